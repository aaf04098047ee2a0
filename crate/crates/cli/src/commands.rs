use std::sync::Arc;

use serde_json::{json, Value};

use hilok_core::ext::{existence_check, make_extension, norm_congruence_check, ASExt, Family, LElement};
use hilok_core::forms::QForm;
use hilok_core::hcoh::CohClass;
use hilok_core::kmilnor::{parse_class, KClass};
use hilok_core::recip::{graded_pairing_matrix, pair, CharacterTable};
use hilok_core::tower::{parse_spec, TowerElement, TowerSpec};
use hilok_core::Error;

use crate::{selftest, Cli, Command, Failure, FormOp, Global, HOp, KOp, Outcome};

pub fn name(c: &Command) -> &'static str {
    match c {
        Command::Eval { .. } => "eval",
        Command::Val { .. } => "val",
        Command::Form { .. } => "form",
        Command::K { .. } => "k",
        Command::H { .. } => "h",
        Command::Pair { .. } => "pair",
        Command::Character { .. } => "character",
        Command::Grmatrix { .. } => "grmatrix",
        Command::Normcheck { .. } => "normcheck",
        Command::Existence { .. } => "existence",
        Command::Selftest { .. } => "selftest",
    }
}

/// Attaches operation and argument names to library errors.
trait Ctx<T> {
    fn ctx(self, op: &str, arg: &str) -> std::result::Result<T, Failure>;
}

impl<T> Ctx<T> for hilok_core::Result<T> {
    fn ctx(self, op: &str, arg: &str) -> std::result::Result<T, Failure> {
        self.map_err(|e| Failure::lib(op, Some(arg), e))
    }
}

fn spec(g: &Global, text: &str) -> std::result::Result<Arc<TowerSpec>, Failure> {
    let prec = match &g.prec {
        None => None,
        Some(p) => {
            let v: std::result::Result<Vec<i64>, _> = p.split(',').map(|x| x.trim().parse::<i64>()).collect();
            match v {
                Ok(v) if !v.is_empty() && v.iter().all(|&x| x > 0) => Some(v),
                _ => return Err(Failure::usage("field", Some(p), "precision must be a list of positive integers")),
            }
        }
    };
    parse_spec(text, prec).ctx("field", text)
}

fn element(s: &Arc<TowerSpec>, text: &str) -> std::result::Result<TowerElement, Failure> {
    TowerElement::parse(s, text).ctx("parse element", text)
}

fn as_json(text: &str) -> Option<Value> {
    serde_json::from_str::<Value>(text).ok().filter(Value::is_object)
}

fn k_class(s: &Arc<TowerSpec>, text: &str) -> std::result::Result<KClass, Failure> {
    match as_json(text) {
        Some(v) => {
            let k = KClass::from_json(&v).ctx("parse symbol", text)?;
            if k.spec().to_string() != s.to_string() {
                return Err(Failure::lib("parse symbol", Some(text), Error::SpecMismatch));
            }
            Ok(k)
        }
        None => parse_class(s, text).ctx("parse symbol", text),
    }
}

fn h_class(s: &Arc<TowerSpec>, text: &str, r: usize) -> std::result::Result<CohClass, Failure> {
    if let Some(v) = as_json(text) {
        // either a class {field, r, rep} or a bare form
        let c = if v.get("rep").is_some() {
            CohClass::from_json(&v)
        } else {
            QForm::from_json(&v).and_then(|f| CohClass::as_class(f.degree() + 1, f))
        };
        let c = c.ctx("parse class", text)?;
        if c.spec().to_string() != s.to_string() {
            return Err(Failure::lib("parse class", Some(text), Error::SpecMismatch));
        }
        return Ok(c);
    }
    if r == 0 {
        return Err(Failure::usage("parse class", Some("-r"), "degree must be at least 1"));
    }
    let f = QForm::parse(s, text).ctx("parse class", text)?;
    // a 0-form is only meaningful for r = 1; forms carry their own degree
    let r = if text.contains("dlog") { f.degree() + 1 } else { r };
    CohClass::as_class(r, f).ctx("parse class", text)
}

fn form(s: &Arc<TowerSpec>, text: &str) -> std::result::Result<QForm, Failure> {
    match as_json(text) {
        Some(v) => QForm::from_json(&v).ctx("parse form", text),
        None => QForm::parse(s, text).ctx("parse form", text),
    }
}

fn element_json(x: &TowerElement) -> Value {
    json!({ "expr": x.to_expr(), "element": x.to_json() })
}

fn form_json(w: &QForm) -> Value {
    json!({ "text": w.to_string(), "form": w.to_json() })
}

pub fn run(cli: &Cli) -> Outcome {
    let g = &cli.global;
    match &cli.command {
        Command::Eval { field, expr } => {
            let s = spec(g, field)?;
            let x = element(&s, expr)?;
            Ok(json!({ "field": s.to_string(), "value": element_json(&x), "precision": x.precision_summary() }))
        }
        Command::Val { field, expr } => {
            let s = spec(g, field)?;
            let x = element(&s, expr)?;
            let v = x.valuation().ctx("valuation", expr)?;
            let (m, u) = x.unit_decompose().ctx("unit decomposition", expr)?;
            let pr = x.p_residue_class().ctx("p-residue class", expr)?;
            Ok(json!({
                "field": s.to_string(),
                "valuation": v,
                "unit_decomposition": { "outer_exponent": m, "unit": element_json(&u) },
                "p_residue_class": {
                    "exponents": pr.exponents,
                    "scalar": s.field().format(pr.scalar.raw()),
                    "one_unit": element_json(&pr.one_unit),
                },
            }))
        }
        Command::Form { op, field, form: text } => {
            let s = spec(g, field)?;
            let w = form(&s, text)?;
            let body = match op {
                FormOp::D => json!({ "op": "d", "result": form_json(&w.ext_d()) }),
                FormOp::Cartier => json!({ "op": "cartier", "result": form_json(&w.cartier()) }),
                FormOp::Decompose => {
                    let (theta, c) = w.cartier_decompose().ctx("cartier decompose", text)?;
                    json!({ "op": "decompose", "theta": form_json(&theta), "constant": s.field().format(c.raw()) })
                }
                FormOp::Delta => json!({ "op": "delta", "value": w.delta_top().ctx("delta", text)? }),
            };
            Ok(body)
        }
        Command::K { op, field, symbol, level_cap } => {
            let s = spec(g, field)?;
            let k = k_class(&s, symbol)?.with_level_cap(*level_cap);
            let body = match op {
                KOp::Symbol => json!({
                    "op": "symbol",
                    "class": k.to_json(),
                    "text": k.to_string(),
                    "is_zero": k.is_zero().ctx("k symbol", symbol)?,
                }),
                KOp::ULevel => json!({ "op": "u-level", "u_level": k.u_level().ctx("u-level", symbol)?, "level_cap": level_cap }),
                KOp::Graded => {
                    let d = k.graded_decompose().ctx("graded decomposition", symbol)?;
                    json!({ "op": "graded", "graded": d.to_json(), "u_level": d.u_level() })
                }
            };
            Ok(body)
        }
        Command::H { op, field, class, degree } => {
            let s = spec(g, field)?;
            let c = h_class(&s, class, *degree)?;
            let body = match op {
                HOp::Class => json!({ "op": "class", "class": c.to_json(), "text": c.to_string() }),
                HOp::Reduce => {
                    let red = c.reduce().ctx("reduce", class)?;
                    json!({ "op": "reduce", "class": red.to_json(), "text": red.to_string(), "is_zero": red.rep().terms().is_empty() })
                }
                HOp::TLevel => json!({ "op": "t-level", "t_level": c.t_level().ctx("t-level", class)? }),
            };
            Ok(body)
        }
        Command::Pair { field, class, degree, symbol, entries } => {
            let s = spec(g, field)?;
            let xi = match symbol {
                Some(t) => k_class(&s, t)?,
                None => {
                    let xs = entries.iter().map(|e| element(&s, e)).collect::<std::result::Result<Vec<_>, _>>()?;
                    KClass::symbol(&s, xs).ctx("pair", &entries.join(", "))?
                }
            };
            let r = degree.unwrap_or((s.n() + 1).saturating_sub(xi.degree()));
            let w = h_class(&s, class, r)?;
            let v = pair(&w, &xi).ctx("pair", class)?;
            Ok(json!({ "value": v, "class": w.to_string(), "symbol": xi.to_string() }))
        }
        Command::Character { field, class, degree, level_cap, window } => {
            let s = spec(g, field)?;
            let w = h_class(&s, class, *degree)?;
            let t = CharacterTable::with_window(&w, *level_cap, *window).ctx("character", class)?;
            Ok(json!({ "table": t.to_json(), "kernel_index": t.kernel_index(), "trivial": t.is_zero() }))
        }
        Command::Grmatrix { field, level, degree, window } => {
            let s = spec(g, field)?;
            let q = (s.n() + 1).checked_sub(*degree).ok_or_else(|| Failure::usage("grmatrix", Some("-r"), "degree exceeds n + 1"))?;
            let m = graded_pairing_matrix(&s, *level, *degree, q, *window).ctx("grmatrix", &level.to_string())?;
            Ok(json!({ "level": level, "r": degree, "q": q, "matrix": m.to_json(), "full_rank": m.full_rank() }))
        }
        Command::Normcheck { field, param, family, elem, index, samples } => {
            let s = spec(g, field)?;
            let a = element(&s, param)?;
            let ext = make_extension(&a).ctx("extension", param)?;
            let fam = parse_family(family)?;
            match (elem, samples) {
                (Some(x), _) => {
                    let x = l_element(&ext, x)?;
                    let r = norm_congruence_check(&ext, fam, &x, *index).ctx("normcheck", &x.to_string())?;
                    Ok(json!({ "extension": ext.to_json(), "report": r.to_json() }))
                }
                (None, Some(n)) => {
                    let res = selftest::random_normchecks(&ext, fam, *n, g.seed)?;
                    Ok(json!({ "extension": ext.to_json(), "samples": res }))
                }
                (None, None) => Err(Failure::usage("normcheck", None, "need -x or --samples")),
            }
        }
        Command::Existence { field, param, level_cap } => {
            let s = spec(g, field)?;
            let a = element(&s, param)?;
            let chi = CohClass::h1_class(&a);
            let r = existence_check(&chi, *level_cap).ctx("existence", param)?;
            Ok(json!({ "class": chi.to_string(), "report": r.to_json() }))
        }
        Command::Selftest { cases } => selftest::run(*cases, g.seed),
    }
}

fn parse_family(text: &str) -> std::result::Result<Family, Failure> {
    let bad = || Failure::usage("normcheck", Some(text), "family must be 1, 2, 2t<r> or 3");
    match text {
        "1" => Ok(Family::One),
        "2" => Ok(Family::Two),
        "3" => Ok(Family::Three),
        t => {
            let r = t.strip_prefix("2t").ok_or_else(bad)?;
            Ok(Family::TwoTwisted(r.parse().map_err(|_| bad())?))
        }
    }
}

fn l_element(ext: &Arc<ASExt>, text: &str) -> std::result::Result<LElement, Failure> {
    let s = ext.spec();
    let cs = text.split(';').map(|c| element(s, c.trim())).collect::<std::result::Result<Vec<_>, _>>()?;
    LElement::new(ext, cs).ctx("parse L element", text)
}
