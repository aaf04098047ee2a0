use std::sync::Arc;

use super::QForm;
use crate::error::{Error, Result};
use crate::tower::{TowerElement, TowerSpec};

fn syntax(pos: usize, msg: impl Into<String>) -> Error {
    Error::Syntax { pos, msg: msg.into() }
}

/// Splits at top-level `+`/`-` that are not exponent or operand signs.
fn split_terms(text: &str) -> Vec<(usize, i64, &str)> {
    let b = text.as_bytes();
    let mut out = Vec::new();
    let mut depth = 0i32;
    let mut start = 0;
    let mut sign = 1i64;
    let mut prev = None::<u8>;
    for (j, &c) in b.iter().enumerate() {
        match c {
            b'(' => depth += 1,
            b')' => depth -= 1,
            b'+' | b'-' if depth == 0 && !matches!(prev, None | Some(b'^' | b'*' | b'/' | b'(')) => {
                out.push((start, sign, &text[start..j]));
                sign = if c == b'-' { -1 } else { 1 };
                start = j + 1;
            }
            b'+' | b'-' if depth == 0 && prev.is_none() => {
                if c == b'-' {
                    sign = -sign;
                }
                start = j + 1;
            }
            _ => {}
        }
        if !c.is_ascii_whitespace() {
            prev = Some(c);
        }
    }
    out.push((start, sign, &text[start..]));
    out
}

impl QForm {
    /// Parses `(c_1) dlog t^dlog u + (c_2) dlog u`; a text without `dlog`
    /// is a 0-form. `∧` may stand for `^` between basis factors.
    pub fn parse(spec: &Arc<TowerSpec>, text: &str) -> Result<QForm> {
        let text = text.replace('∧', "^");
        if !text.contains("dlog") {
            return Ok(QForm::function(&TowerElement::parse(spec, &text)?));
        }
        let mut acc: Option<QForm> = None;
        for (pos, sign, piece) in split_terms(&text) {
            let Some(at) = piece.find("dlog") else {
                return Err(syntax(pos, "every term needs a dlog basis"));
            };
            let coef = piece[..at].trim().trim_end_matches('*').trim();
            let c = if coef.is_empty() { TowerElement::one(spec) } else { TowerElement::parse(spec, coef)? };
            let c = if sign < 0 { -&c } else { c };
            let mut term = QForm::function(&c);
            for part in piece[at..].split('^') {
                let part = part.trim();
                let name = part
                    .strip_prefix("dlog")
                    .map(str::trim)
                    .ok_or_else(|| syntax(pos + at, format!("expected 'dlog', got '{part}'")))?;
                let name = name.trim_start_matches('(').trim_end_matches(')').trim();
                let i = spec
                    .names()
                    .iter()
                    .position(|v| v == name)
                    .ok_or_else(|| syntax(pos + at, format!("unknown variable '{name}'")))?;
                term = term.wedge(&QForm::dlog(&TowerElement::var(spec, i + 1))?)?;
            }
            acc = Some(match acc {
                None => term,
                Some(a) if a.degree() == term.degree() => a.add(&term)?,
                Some(a) => return Err(Error::DegreeMismatch { expected: a.degree(), got: term.degree() }),
            });
        }
        acc.ok_or_else(|| syntax(0, "empty form"))
    }
}
