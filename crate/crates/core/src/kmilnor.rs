//! Milnor K-groups mod `p` at a finite filtration level.
//!
//! A class is a formal `Z/p`-combination of symbols. It is compared through
//! its logarithmic differential `dlog`, which is injective on `K_q(K)/p`; the
//! unit filtration `U_i` corresponds to forms whose coefficients have outer
//! valuation `>= i`, so a class vanishes modulo `U_N` exactly when its form
//! does below `t_n^N`. Graded coordinates with respect to a fixed family of
//! generators are computed in [`graded`].

pub mod graded;
mod parse;

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::QForm;
use crate::tower::{parse_spec, TowerElement, TowerSpec};

pub use graded::{GradedDecomposition, Label};
pub use parse::parse_class;

/// An element of `K_q(K) / (p, U_N)`.
#[derive(Clone)]
pub struct KClass {
    spec: Arc<TowerSpec>,
    q: usize,
    level_cap: i64,
    terms: Vec<(u32, Vec<TowerElement>)>,
}

impl KClass {
    pub fn zero(spec: &Arc<TowerSpec>, q: usize) -> KClass {
        let level_cap = default_cap(spec);
        KClass { spec: spec.clone(), q, level_cap, terms: Vec::new() }
    }

    /// The symbol `{x_1, ..., x_q}`.
    pub fn symbol(spec: &Arc<TowerSpec>, xs: Vec<TowerElement>) -> Result<KClass> {
        for (i, x) in xs.iter().enumerate() {
            if x.spec() != spec {
                return Err(Error::SpecMismatch);
            }
            if x.is_known_zero() {
                return Err(Error::ZeroEntry(i));
            }
        }
        let mut out = KClass::zero(spec, xs.len());
        out.terms.push((1, xs));
        Ok(out)
    }

    pub fn with_level_cap(mut self, n: i64) -> KClass {
        self.level_cap = n;
        self
    }

    pub fn spec(&self) -> &Arc<TowerSpec> {
        &self.spec
    }
    pub fn degree(&self) -> usize {
        self.q
    }
    pub fn level_cap(&self) -> i64 {
        self.level_cap
    }
    pub fn terms(&self) -> &[(u32, Vec<TowerElement>)] {
        &self.terms
    }
    fn p(&self) -> u32 {
        self.spec.p()
    }

    pub fn add(&self, other: &KClass) -> Result<KClass> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        if self.q != other.q {
            return Err(Error::DegreeMismatch { expected: self.q, got: other.q });
        }
        let mut out = self.clone();
        out.level_cap = self.level_cap.min(other.level_cap);
        out.terms.extend(other.terms.iter().cloned());
        out.terms.retain(|(c, _)| *c != 0);
        Ok(out)
    }

    pub fn scale(&self, c: i64) -> KClass {
        let p = self.p() as i64;
        let mut out = self.clone();
        for t in &mut out.terms {
            t.0 = ((t.0 as i64 * c).rem_euclid(p)) as u32;
        }
        out.terms.retain(|(c, _)| *c != 0);
        out
    }

    pub fn neg(&self) -> KClass {
        self.scale(-1)
    }

    pub fn sub(&self, other: &KClass) -> Result<KClass> {
        self.add(&other.neg())
    }

    /// `sum c * dlog x_1 ∧ ... ∧ dlog x_q`.
    pub fn dlog_form(&self) -> Result<QForm> {
        let mut acc = QForm::zero(&self.spec, self.q);
        for (c, xs) in &self.terms {
            let w = QForm::dlog_wedge(&self.spec, xs)?;
            acc = acc.add(&w.scale_int(*c as i64))?;
        }
        Ok(acc)
    }

    /// Smallest `i < N` with a nonzero graded piece, `None` if the class
    /// vanishes modulo `U_N`.
    pub fn leading_level(&self) -> Result<Option<i64>> {
        form_level(&self.dlog_form()?, self.level_cap)
    }

    pub fn is_zero(&self) -> Result<bool> {
        Ok(self.leading_level()?.is_none())
    }

    /// Largest `i <= N` with the class in `U_i`.
    pub fn u_level(&self) -> Result<i64> {
        Ok(self.leading_level()?.unwrap_or(self.level_cap))
    }

    pub fn graded_decompose(&self) -> Result<GradedDecomposition> {
        GradedDecomposition::of_form(&self.dlog_form()?, self.level_cap)
    }

    /// `rho_i^q(x) (+ {rho_i^{q-1}(y), t_n})` with `x = c dlog y_1 ∧ ... ∧ dlog y_{q-1}`
    /// over the residue field; entries are lifted constant-coefficient-wise.
    pub fn rho(
        spec: &Arc<TowerSpec>,
        i: i64,
        q: usize,
        x: Option<(&TowerElement, &[TowerElement])>,
        y: Option<(&TowerElement, &[TowerElement])>,
    ) -> Result<KClass> {
        let k = spec.residue();
        let n = spec.n();
        let pi = TowerElement::var(spec, n);
        let mut out = KClass::zero(spec, q);
        let mut build = |c: &TowerElement, ys: &[TowerElement], with_pi: bool| -> Result<()> {
            if *c.spec() != k || ys.iter().any(|y| *y.spec() != k) {
                return Err(Error::SpecMismatch);
            }
            let expected = q - 1 - with_pi as usize;
            if ys.len() != expected {
                return Err(Error::DegreeMismatch { expected, got: ys.len() });
            }
            let lift = |z: &TowerElement| TowerElement::lift_residue(spec, z.node());
            let first = &TowerElement::one(spec) + &(&lift(c) * &pi.pow(i)?);
            let mut entries = vec![first];
            entries.extend(ys.iter().map(lift));
            if with_pi {
                entries.push(pi.clone());
            }
            let sym = KClass::symbol(spec, entries)?;
            out = out.add(&sym)?;
            Ok(())
        };
        if q == 0 {
            return Err(Error::DegreeMismatch { expected: 1, got: 0 });
        }
        if let Some((c, ys)) = x {
            build(c, ys, false)?;
        }
        if let Some((c, ys)) = y {
            if q < 2 {
                return Err(Error::DegreeMismatch { expected: 2, got: q });
            }
            build(c, ys, true)?;
        }
        Ok(out)
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self
            .terms
            .iter()
            .map(|(c, xs)| {
                let entries: Vec<Value> = xs
                    .iter()
                    .map(|x| if x.is_exact() { Value::String(x.known_expr()) } else { x.to_json() })
                    .collect();
                json!({ "coeff": c, "entries": entries })
            })
            .collect();
        json!({ "field": self.spec.to_string(), "q": self.q, "terms": terms, "level_cap": self.level_cap })
    }

    pub fn from_json(v: &Value) -> Result<KClass> {
        let bad = |m: &str| Error::Json(m.to_string());
        let spec = parse_spec(v["field"].as_str().ok_or_else(|| bad("missing field"))?, None)?;
        let q = v["q"].as_u64().ok_or_else(|| bad("missing q"))? as usize;
        let mut out = KClass::zero(&spec, q);
        if let Some(n) = v["level_cap"].as_i64() {
            out.level_cap = n;
        }
        for t in v["terms"].as_array().ok_or_else(|| bad("missing terms"))? {
            let c = t["coeff"].as_i64().ok_or_else(|| bad("missing coeff"))?;
            let mut xs = Vec::new();
            for e in t["entries"].as_array().ok_or_else(|| bad("missing entries"))? {
                let x = match e {
                    Value::String(s) => TowerElement::parse(&spec, s)?,
                    other => {
                        let x = TowerElement::from_json(other)?;
                        if x.spec().to_string() != spec.to_string() {
                            return Err(Error::SpecMismatch);
                        }
                        TowerElement::from_node(&spec, x.into_node())
                    }
                };
                xs.push(x);
            }
            if xs.len() != q {
                return Err(Error::DegreeMismatch { expected: q, got: xs.len() });
            }
            let cap = out.level_cap;
            out = out.add(&KClass::symbol(&spec, xs)?.scale(c))?.with_level_cap(cap);
        }
        Ok(out)
    }
}

impl fmt::Display for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(c, xs)| {
                let body = if xs.is_empty() {
                    "1".to_string()
                } else {
                    let e: Vec<String> = xs.iter().map(|x| x.to_string()).collect();
                    format!("{{{}}}", e.join(", "))
                };
                if *c == 1 {
                    body
                } else if xs.is_empty() {
                    c.to_string()
                } else {
                    format!("{c}{body}")
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for KClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

fn default_cap(spec: &TowerSpec) -> i64 {
    spec.prec().last().copied().unwrap_or(0)
}

/// Smallest outer exponent `< cap` carrying a nonzero known coefficient of
/// the form; `None` when every coefficient vanishes below `cap`.
pub fn form_level(w: &QForm, cap: i64) -> Result<Option<i64>> {
    if w.spec().n() == 0 {
        return Ok(if w.is_known_zero() { None } else { Some(0) });
    }
    let mut best: Option<i64> = None;
    let mut blind: Vec<i64> = Vec::new();
    for f in w.terms().values() {
        let node = f.node();
        let lead = node
            .terms()
            .into_iter()
            .flatten()
            .find(|(e, v)| **e < cap && !v.is_known_zero())
            .map(|(e, _)| *e);
        match lead {
            Some(e) => best = Some(best.map_or(e, |b: i64| b.min(e))),
            None => blind.push(node.prec()),
        }
    }
    let threshold = best.unwrap_or(cap);
    if let Some(h) = blind.into_iter().filter(|&h| h < threshold).min() {
        return Err(Error::precision(format!("form coefficient known only below t_n^{h}, need {threshold}")));
    }
    Ok(best)
}
