mod commands;
mod selftest;

use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde_json::{json, Map, Value};

use hilok_core::Error;

#[derive(Parser, Debug)]
#[command(name = "hilok", version, about = "Exact arithmetic on higher local fields of positive characteristic")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
    #[command(flatten)]
    pub global: Global,
}

#[derive(Args, Debug, Clone)]
pub struct Global {
    /// Precision per variable, innermost first (e.g. `16,12`); one value applies to all
    #[arg(short = 'p', long = "prec", global = true, env = "HILOK_DEFAULT_PREC")]
    pub prec: Option<String>,
    #[arg(long, global = true, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, global = true, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(ValueEnum, Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Text,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Evaluate an element expression
    Eval {
        #[arg(short = 'F', long)]
        field: String,
        expr: String,
    },
    /// Valuation, unit decomposition and p-residue class of an element
    Val {
        #[arg(short = 'F', long)]
        field: String,
        expr: String,
    },
    /// Operations on differential forms
    Form {
        #[arg(value_enum)]
        op: FormOp,
        #[arg(short = 'F', long)]
        field: String,
        /// `(c) dlog t^dlog u + ...`, a plain element for a 0-form, or JSON
        form: String,
    },
    /// Milnor K-theory mod p
    K {
        #[arg(value_enum)]
        op: KOp,
        #[arg(short = 'F', long)]
        field: String,
        /// `{x, y} - 2{z, w}` or a JSON class
        #[arg(short = 's', long)]
        symbol: String,
        #[arg(short = 'N', long, default_value_t = 8)]
        level_cap: i64,
    },
    /// Classes in H^r = Ω^{r-1} / ((F-1)Ω^{r-1} + dΩ^{r-2})
    H {
        #[arg(value_enum)]
        op: HOp,
        #[arg(short = 'F', long)]
        field: String,
        /// representative form or a JSON class
        #[arg(short = 'w', long)]
        class: String,
        #[arg(short = 'r', long, default_value_t = 1)]
        degree: usize,
    },
    /// Residue pairing of a class with a symbol
    Pair {
        #[arg(short = 'F', long)]
        field: String,
        #[arg(short = 'w', long)]
        class: String,
        #[arg(short = 'r', long)]
        degree: Option<usize>,
        /// symbol sum `{x, y}`
        #[arg(short = 's', long, conflicts_with = "entries", required_unless_present = "entries")]
        symbol: Option<String>,
        /// entries of a single symbol, one flag per entry
        #[arg(short = 'x', long = "entry")]
        entries: Vec<String>,
    },
    /// Character table of a class on graded generators below level N
    Character {
        #[arg(short = 'F', long)]
        field: String,
        #[arg(short = 'w', long)]
        class: String,
        #[arg(short = 'r', long, default_value_t = 1)]
        degree: usize,
        #[arg(short = 'N', long)]
        level_cap: i64,
        #[arg(long, default_value_t = hilok_core::recip::DEFAULT_WINDOW)]
        window: i64,
    },
    /// Graded pairing matrix T_i/T_{i-1} x U_i/U_{i+1}
    Grmatrix {
        #[arg(short = 'F', long)]
        field: String,
        #[arg(short = 'i', long)]
        level: i64,
        #[arg(short = 'r', long, default_value_t = 1)]
        degree: usize,
        #[arg(long, default_value_t = hilok_core::recip::DEFAULT_WINDOW)]
        window: i64,
    },
    /// Norm congruences for K(θ), θ^p - θ = a
    Normcheck {
        #[arg(short = 'F', long)]
        field: String,
        #[arg(short = 'a', long)]
        param: String,
        /// 1, 2, 2t<r> (twisted, e.g. 2t1 or 2t-1) or 3
        #[arg(long)]
        family: String,
        /// element of L as `c_0; c_1; ...` in the basis 1, θ, ..., θ^{p-1}
        #[arg(short = 'x', long, required_unless_present = "samples")]
        elem: Option<String>,
        #[arg(short = 'i', long, default_value_t = 0)]
        index: i64,
        /// check this many random inputs instead (uses --seed)
        #[arg(long)]
        samples: Option<usize>,
    },
    /// Existence-theorem check for the character of a
    Existence {
        #[arg(short = 'F', long)]
        field: String,
        #[arg(short = 'a', long)]
        param: String,
        #[arg(short = 'N', long)]
        level_cap: i64,
    },
    /// Randomized consistency checks (uses --seed)
    Selftest {
        #[arg(long, default_value_t = 50)]
        cases: usize,
    },
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum FormOp {
    D,
    Cartier,
    Decompose,
    Delta,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum KOp {
    Symbol,
    ULevel,
    Graded,
}

#[derive(ValueEnum, Clone, Copy, Debug)]
pub enum HOp {
    Class,
    Reduce,
    TLevel,
}

/// A failed request: exit code plus context.
#[derive(Debug)]
pub struct Failure {
    pub code: u8,
    pub operation: String,
    pub argument: Option<String>,
    pub error: String,
    pub kind: &'static str,
}

impl Failure {
    pub fn usage(operation: &str, argument: Option<&str>, msg: impl Into<String>) -> Failure {
        Failure { code: 2, operation: operation.into(), argument: argument.map(Into::into), error: msg.into(), kind: "usage" }
    }

    pub fn lib(operation: &str, argument: Option<&str>, e: Error) -> Failure {
        let (code, kind) = if e.is_precision() {
            (3, "precision")
        } else if matches!(e, Error::Syntax { .. } | Error::Json(_)) {
            (2, "usage")
        } else {
            (4, "domain")
        };
        Failure { code, operation: operation.into(), argument: argument.map(Into::into), error: e.to_string(), kind }
    }
}

pub type Outcome = std::result::Result<Value, Failure>;

fn envelope(command: &str, body: Value) -> Value {
    let mut m = Map::new();
    m.insert("schema".into(), json!("hilok/1"));
    m.insert("command".into(), json!(command));
    if let Value::Object(b) = body {
        m.extend(b);
    }
    Value::Object(m)
}

fn render_text(v: &Value, indent: usize, out: &mut String) {
    let pad = " ".repeat(indent);
    match v {
        Value::Object(m) => {
            let width = m.keys().map(String::len).max().unwrap_or(0);
            for (k, x) in m {
                match x {
                    Value::Object(_) | Value::Array(_) if !is_flat(x) => {
                        out.push_str(&format!("{pad}{k}:\n"));
                        render_text(x, indent + 2, out);
                    }
                    _ => out.push_str(&format!("{pad}{k:<width$}  {}\n", scalar(x))),
                }
            }
        }
        Value::Array(a) => {
            for x in a {
                if is_flat(x) {
                    out.push_str(&format!("{pad}- {}\n", scalar(x)));
                } else {
                    out.push_str(&format!("{pad}-\n"));
                    render_text(x, indent + 2, out);
                }
            }
        }
        _ => out.push_str(&format!("{pad}{}\n", scalar(v))),
    }
}

fn is_flat(v: &Value) -> bool {
    match v {
        Value::Array(a) => a.iter().all(|x| !x.is_object() && !x.is_array() || is_flat_row(x)),
        Value::Object(_) => false,
        _ => true,
    }
}

fn is_flat_row(v: &Value) -> bool {
    v.as_array().is_some_and(|a| a.iter().all(|x| !x.is_object() && !x.is_array()))
}

fn scalar(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

fn emit(v: &Value, format: Format) {
    match format {
        Format::Json => println!("{}", serde_json::to_string_pretty(v).expect("serializable")),
        Format::Text => {
            let mut s = String::new();
            render_text(v, 0, &mut s);
            print!("{s}");
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    let name = commands::name(&cli.command);
    match commands::run(&cli) {
        Ok(body) => {
            // a failed selftest is a domain failure
            let failed = body.get("passed") == Some(&Value::Bool(false));
            emit(&envelope(name, body), cli.global.format);
            if failed {
                ExitCode::from(4)
            } else {
                ExitCode::SUCCESS
            }
        }
        Err(f) => {
            let body = json!({
                "error": { "kind": f.kind, "operation": f.operation, "argument": f.argument, "message": f.error }
            });
            emit(&envelope(name, body), cli.global.format);
            eprintln!("hilok {}: {}{}", f.operation, f.error, f.argument.as_ref().map(|a| format!(" (argument: {a})")).unwrap_or_default());
            ExitCode::from(f.code)
        }
    }
}
