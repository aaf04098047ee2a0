//! Field-spec and element-expression parsing.
//!
//! ```text
//! spec  := "F(" p ["^" f] ")" ("((" name "))")+ ["@prec=" int ("," int)*]
//! expr  := term (("+" | "-") term)*
//! term  := unary (("*" | "/")? unary)*          juxtaposition multiplies
//! unary := ("-" | "+") unary | power
//! power := atom ("^" exponent)?
//! atom  := integer | "w" | name | "(" expr ")"
//! ```

use std::sync::Arc;

use super::{field_of, TowerElement, TowerSpec};
use crate::error::{Error, Result};

/// Parses `F(p^f)((t))((u))@prec=16,16`. `prec_override` wins over the text.
pub fn parse_spec(text: &str, prec_override: Option<Vec<i64>>) -> Result<Arc<TowerSpec>> {
    let text = text.trim();
    let (body, prec_txt) = match text.split_once('@') {
        Some((b, p)) => (b.trim(), Some(p.trim())),
        None => (text, None),
    };
    let close = body.find(')').ok_or_else(|| Error::Syntax { pos: 0, msg: "missing F(...)".into() })?;
    let field = field_of(&body[..=close])?;
    let mut rest = &body[close + 1..];
    let mut names = Vec::new();
    while !rest.trim().is_empty() {
        let r = rest.trim_start();
        let inner = r
            .strip_prefix("((")
            .ok_or_else(|| Error::Syntax { pos: body.len() - rest.len(), msg: "expected ((name))".into() })?;
        let end = inner.find("))").ok_or_else(|| Error::Syntax { pos: body.len() - rest.len(), msg: "unclosed ((".into() })?;
        names.push(inner[..end].trim().to_string());
        rest = &inner[end + 2..];
    }
    let n = names.len();
    let mut prec = match prec_txt {
        None => None,
        Some(pt) => {
            let vals = pt
                .strip_prefix("prec=")
                .ok_or_else(|| Error::Syntax { pos: body.len() + 1, msg: "expected prec=".into() })?;
            let parsed: std::result::Result<Vec<i64>, _> = vals.split(',').map(|v| v.trim().parse::<i64>()).collect();
            let parsed = parsed.map_err(|_| Error::Syntax { pos: body.len() + 6, msg: "bad precision list".into() })?;
            Some(if parsed.len() == 1 { vec![parsed[0]; n] } else { parsed })
        }
    };
    if let Some(o) = prec_override {
        prec = Some(if o.len() == 1 { vec![o[0]; n] } else { o });
    }
    TowerSpec::with_names(field, names, prec)
}

pub(super) fn parse_element(spec: &Arc<TowerSpec>, text: &str) -> Result<TowerElement> {
    let mut p = Parser { spec, src: text.as_bytes(), pos: 0 };
    let v = p.expr()?;
    p.skip_ws();
    if p.pos != p.src.len() {
        return Err(p.err("unexpected trailing input"));
    }
    Ok(v)
}

struct Parser<'a> {
    spec: &'a Arc<TowerSpec>,
    src: &'a [u8],
    pos: usize,
}

impl Parser<'_> {
    fn err(&self, msg: &str) -> Error {
        Error::Syntax { pos: self.pos, msg: msg.into() }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&mut self) -> Option<u8> {
        self.skip_ws();
        self.src.get(self.pos).copied()
    }

    fn expr(&mut self) -> Result<TowerElement> {
        let mut acc = self.term()?;
        while let Some(c) = self.peek() {
            match c {
                b'+' => {
                    self.pos += 1;
                    acc = &acc + &self.term()?;
                }
                b'-' => {
                    self.pos += 1;
                    acc = &acc - &self.term()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn term(&mut self) -> Result<TowerElement> {
        let mut acc = self.unary()?;
        loop {
            match self.peek() {
                Some(b'*') => {
                    self.pos += 1;
                    acc = &acc * &self.unary()?;
                }
                Some(b'/') => {
                    self.pos += 1;
                    let at = self.pos;
                    let d = self.unary()?;
                    acc = acc.try_div(&d).map_err(|e| match e {
                        Error::ZeroOrUnknownLeadingTerm(m) => {
                            Error::ZeroOrUnknownLeadingTerm(format!("divisor at offset {at}: {m}"))
                        }
                        other => other,
                    })?;
                }
                Some(c) if c == b'(' || c.is_ascii_alphanumeric() => {
                    acc = &acc * &self.power()?;
                }
                _ => break,
            }
        }
        Ok(acc)
    }

    fn unary(&mut self) -> Result<TowerElement> {
        match self.peek() {
            Some(b'-') => {
                self.pos += 1;
                Ok(-self.unary()?)
            }
            Some(b'+') => {
                self.pos += 1;
                self.unary()
            }
            _ => self.power(),
        }
    }

    fn power(&mut self) -> Result<TowerElement> {
        let base = self.atom()?;
        if self.peek() == Some(b'^') {
            self.pos += 1;
            let e = self.exponent()?;
            return base.pow(e);
        }
        Ok(base)
    }

    fn exponent(&mut self) -> Result<i64> {
        let close = match self.peek() {
            Some(b'{') => Some(b'}'),
            Some(b'(') => Some(b')'),
            _ => None,
        };
        if close.is_some() {
            self.pos += 1;
        }
        let mut sign = 1;
        if self.peek() == Some(b'-') {
            sign = -1;
            self.pos += 1;
        }
        self.skip_ws();
        let start = self.pos;
        while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if start == self.pos {
            return Err(self.err("expected integer exponent"));
        }
        let v: i64 = std::str::from_utf8(&self.src[start..self.pos]).unwrap().parse().map_err(|_| self.err("exponent too large"))?;
        if let Some(c) = close {
            if self.peek() != Some(c) {
                return Err(self.err("unclosed exponent"));
            }
            self.pos += 1;
        }
        Ok(sign * v)
    }

    fn atom(&mut self) -> Result<TowerElement> {
        match self.peek() {
            Some(b'(') => {
                self.pos += 1;
                let v = self.expr()?;
                if self.peek() != Some(b')') {
                    return Err(self.err("expected ')'"));
                }
                self.pos += 1;
                Ok(v)
            }
            Some(c) if c.is_ascii_digit() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_digit() {
                    self.pos += 1;
                }
                let s = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                let p = self.spec.p() as i64;
                // reduce digit-by-digit to avoid overflow
                let v = s.bytes().fold(0i64, |acc, d| (acc * 10 + (d - b'0') as i64) % p);
                Ok(TowerElement::from_int(self.spec, v))
            }
            Some(c) if c.is_ascii_alphabetic() => {
                let start = self.pos;
                while self.pos < self.src.len() && self.src[self.pos].is_ascii_alphabetic() {
                    self.pos += 1;
                }
                let name = std::str::from_utf8(&self.src[start..self.pos]).unwrap();
                if name == "w" {
                    return Ok(TowerElement::constant(self.spec, self.spec.field().generator()));
                }
                match self.spec.names().iter().position(|v| v == name) {
                    Some(i) => Ok(TowerElement::var(self.spec, i + 1)),
                    None => {
                        self.pos = start;
                        Err(self.err(&format!("unknown variable '{name}'")))
                    }
                }
            }
            _ => Err(self.err("expected a number, variable or '('")),
        }
    }
}
