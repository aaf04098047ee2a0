use std::sync::Arc;

use super::KClass;
use crate::error::{Error, Result};
use crate::tower::{TowerElement, TowerSpec};

/// Parses sums of symbols such as `{t, u} - 2{1+t, u}`.
pub fn parse_class(spec: &Arc<TowerSpec>, text: &str) -> Result<KClass> {
    let src = text.as_bytes();
    let mut pos = 0;
    let mut acc: Option<KClass> = None;
    let skip = |pos: &mut usize| {
        while *pos < src.len() && src[*pos].is_ascii_whitespace() {
            *pos += 1;
        }
    };
    let syntax = |pos: usize, msg: &str| Error::Syntax { pos, msg: msg.to_string() };
    loop {
        skip(&mut pos);
        let mut sign = 1i64;
        while pos < src.len() && (src[pos] == b'+' || src[pos] == b'-') {
            if src[pos] == b'-' {
                sign = -sign;
            }
            pos += 1;
            skip(&mut pos);
        }
        let start = pos;
        while pos < src.len() && src[pos].is_ascii_digit() {
            pos += 1;
        }
        let coeff: i64 = if start == pos {
            1
        } else {
            text[start..pos].parse().map_err(|_| syntax(start, "bad coefficient"))?
        };
        skip(&mut pos);
        if pos < src.len() && src[pos] == b'*' {
            pos += 1;
            skip(&mut pos);
        }
        if pos >= src.len() || src[pos] != b'{' {
            return Err(syntax(pos, "expected '{'"));
        }
        let open = pos;
        let mut depth = 0i32;
        let mut close = None;
        let mut cuts = Vec::new();
        for (j, &c) in src.iter().enumerate().skip(open) {
            match c {
                b'{' | b'(' => depth += 1,
                b')' => depth -= 1,
                b'}' => {
                    depth -= 1;
                    if depth == 0 {
                        close = Some(j);
                        break;
                    }
                }
                b',' if depth == 1 => cuts.push(j),
                _ => {}
            }
        }
        let close = close.ok_or_else(|| syntax(open, "unclosed '{'"))?;
        let body = &text[open + 1..close];
        let mut entries = Vec::new();
        if !body.trim().is_empty() {
            let mut last = open + 1;
            for c in cuts.into_iter().chain(std::iter::once(close)) {
                let piece = &text[last..c];
                let x = TowerElement::parse(spec, piece).map_err(|e| match e {
                    Error::Syntax { pos, msg } => Error::Syntax { pos: pos + last, msg },
                    other => other,
                })?;
                entries.push(x);
                last = c + 1;
            }
        }
        let sym = KClass::symbol(spec, entries)?.scale(sign * coeff);
        acc = Some(match acc {
            None => sym,
            Some(a) => a.add(&sym)?,
        });
        pos = close + 1;
        skip(&mut pos);
        if pos >= src.len() {
            break;
        }
        if src[pos] != b'+' && src[pos] != b'-' {
            return Err(syntax(pos, "expected '+' or '-' between symbols"));
        }
    }
    acc.ok_or_else(|| syntax(0, "empty class"))
}
