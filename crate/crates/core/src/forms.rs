//! Differential forms over `K` in the basis `dlog t_S`, `S` an increasing
//! subset of `{1..n}` stored as a bit mask (bit `i-1` for `t_i`).

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf::GfElement;
use crate::tower::{parse_spec, TowerElement, TowerSpec};

pub type Mask = u8;

/// Indices (1-based) in a mask, increasing.
pub fn mask_indices(m: Mask) -> Vec<usize> {
    (0..8).filter(|i| m >> i & 1 == 1).map(|i| i + 1).collect()
}

pub fn mask_of(indices: &[usize]) -> Mask {
    indices.iter().fold(0, |m, &i| m | 1 << (i - 1))
}

/// All masks of size `q` inside `{1..n}`, in increasing numeric order.
pub fn masks(n: usize, q: usize) -> Vec<Mask> {
    (0..(1u16 << n)).map(|m| m as Mask).filter(|m| m.count_ones() as usize == q).collect()
}

pub fn full_mask(n: usize) -> Mask {
    ((1u16 << n) - 1) as Mask
}

/// Sign of `dlog_A ∧ dlog_B` relative to `dlog_{A∪B}`; `None` if they meet.
pub fn wedge_sign(a: Mask, b: Mask) -> Option<i64> {
    if a & b != 0 {
        return None;
    }
    let mut inv = 0;
    for i in mask_indices(a) {
        inv += mask_indices(b).iter().filter(|&&j| j < i).count();
    }
    Some(if inv % 2 == 0 { 1 } else { -1 })
}

#[derive(Clone, PartialEq)]
pub struct QForm {
    spec: Arc<TowerSpec>,
    q: usize,
    terms: BTreeMap<Mask, TowerElement>,
}

impl QForm {
    pub fn zero(spec: &Arc<TowerSpec>, q: usize) -> QForm {
        QForm { spec: spec.clone(), q, terms: BTreeMap::new() }
    }

    /// `f` as a 0-form.
    pub fn function(f: &TowerElement) -> QForm {
        QForm::monomial(f, 0)
    }

    /// `f * dlog t_S`.
    pub fn monomial(f: &TowerElement, mask: Mask) -> QForm {
        let mut out = QForm::zero(f.spec(), mask.count_ones() as usize);
        out.push(mask, f.clone());
        out
    }

    pub fn from_terms(spec: &Arc<TowerSpec>, q: usize, terms: Vec<(Mask, TowerElement)>) -> Result<QForm> {
        let mut out = QForm::zero(spec, q);
        for (m, f) in terms {
            if m.count_ones() as usize != q || (m as u16) >> spec.n() != 0 {
                return Err(Error::DegreeMismatch { expected: q, got: m.count_ones() as usize });
            }
            if f.spec() != spec {
                return Err(Error::SpecMismatch);
            }
            out.push(m, f);
        }
        Ok(out)
    }

    /// `dlog t_1 ∧ ... ∧ dlog t_n`.
    pub fn top_log(spec: &Arc<TowerSpec>) -> QForm {
        QForm::monomial(&TowerElement::one(spec), full_mask(spec.n()))
    }

    /// `dlog x = sum_i (t_i dx/dt_i / x) dlog t_i`.
    pub fn dlog(x: &TowerElement) -> Result<QForm> {
        let spec = x.spec();
        let inv = x.inverse()?;
        let mut out = QForm::zero(spec, 1);
        for i in 1..=spec.n() {
            let di = TowerElement::from_node(spec, x.node().log_derivative(i, spec.n(), spec.field()));
            out.push(1 << (i - 1), &di * &inv);
        }
        Ok(out)
    }

    /// `dlog x_1 ∧ ... ∧ dlog x_q`; the constant 1 for an empty list.
    pub fn dlog_wedge(spec: &Arc<TowerSpec>, xs: &[TowerElement]) -> Result<QForm> {
        let mut acc = QForm::function(&TowerElement::one(spec));
        for x in xs {
            acc = acc.wedge(&QForm::dlog(x)?)?;
        }
        Ok(acc)
    }

    /// Adds `f dlog_S` in place.
    pub fn push_term(&mut self, m: Mask, f: TowerElement) {
        self.push(m, f)
    }

    fn push(&mut self, m: Mask, f: TowerElement) {
        let v = match self.terms.remove(&m) {
            Some(old) => &old + &f,
            None => f,
        };
        if !v.is_exact_zero() {
            self.terms.insert(m, v);
        }
    }

    pub fn spec(&self) -> &Arc<TowerSpec> {
        &self.spec
    }
    pub fn degree(&self) -> usize {
        self.q
    }
    pub fn terms(&self) -> &BTreeMap<Mask, TowerElement> {
        &self.terms
    }
    /// Coefficient of `dlog t_S` (zero if absent).
    pub fn coeff(&self, m: Mask) -> TowerElement {
        self.terms.get(&m).cloned().unwrap_or_else(|| TowerElement::zero(&self.spec))
    }
    pub fn is_top(&self) -> bool {
        self.q == self.spec.n()
    }

    pub fn is_known_zero(&self) -> bool {
        self.terms.values().all(TowerElement::is_known_zero)
    }
    pub fn is_exact(&self) -> bool {
        self.terms.values().all(TowerElement::is_exact)
    }

    fn same(&self, other: &QForm) -> Result<()> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        if self.q != other.q {
            return Err(Error::DegreeMismatch { expected: self.q, got: other.q });
        }
        Ok(())
    }

    pub fn add(&self, other: &QForm) -> Result<QForm> {
        self.same(other)?;
        let mut out = self.clone();
        for (m, f) in &other.terms {
            out.push(*m, f.clone());
        }
        Ok(out)
    }

    pub fn sub(&self, other: &QForm) -> Result<QForm> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> QForm {
        self.map(|f| -f)
    }

    pub fn scale(&self, c: &TowerElement) -> QForm {
        self.map(|f| f * c)
    }

    pub fn scale_int(&self, c: i64) -> QForm {
        let c = self.spec.field().from_int(c);
        self.map(|f| f.scale(c))
    }

    pub fn map(&self, g: impl Fn(&TowerElement) -> TowerElement) -> QForm {
        let mut out = QForm::zero(&self.spec, self.q);
        for (m, f) in &self.terms {
            out.push(*m, g(f));
        }
        out
    }

    pub fn wedge(&self, other: &QForm) -> Result<QForm> {
        if self.spec != other.spec {
            return Err(Error::SpecMismatch);
        }
        let mut out = QForm::zero(&self.spec, self.q + other.q);
        if self.q + other.q > self.spec.n() {
            return Ok(out);
        }
        for (a, f) in &self.terms {
            for (b, g) in &other.terms {
                if let Some(s) = wedge_sign(*a, *b) {
                    let prod = f * g;
                    out.push(a | b, if s < 0 { -prod } else { prod });
                }
            }
        }
        Ok(out)
    }

    /// Exterior derivative: `d(f dlog_S) = sum_i (t_i df/dt_i) dlog t_i ∧ dlog_S`.
    pub fn ext_d(&self) -> QForm {
        let n = self.spec.n();
        let mut out = QForm::zero(&self.spec, self.q + 1);
        for (m, f) in &self.terms {
            for i in 1..=n {
                let bit = 1 << (i - 1);
                if m & bit != 0 {
                    continue;
                }
                let di = TowerElement::from_node(&self.spec, f.node().log_derivative(i, n, self.spec.field()));
                if di.is_exact_zero() {
                    continue;
                }
                let s = wedge_sign(bit, *m).unwrap();
                out.push(m | bit, if s < 0 { -di } else { di });
            }
        }
        out
    }

    /// Cartier operator on the dlog basis: keeps monomials `c T^{pE} dlog_S`
    /// and sends them to `c^{1/p} T^E dlog_S`.
    pub fn cartier(&self) -> QForm {
        let k = self.spec.field();
        self.map(|f| TowerElement::from_node(&self.spec, f.node().cartier(k)))
    }

    /// `f -> f^p` on coefficients (the Frobenius `F` on forms in the dlog basis).
    pub fn frobenius(&self) -> QForm {
        self.map(TowerElement::frobenius)
    }

    /// Coefficient of `T^0 dlog_{1..n}`.
    pub fn log_constant(&self) -> Result<GfElement> {
        if !self.is_top() {
            return Err(Error::DegreeMismatch { expected: self.spec.n(), got: self.q });
        }
        let f = self.coeff(full_mask(self.spec.n()));
        f.coeff(&vec![0; self.spec.n()]).ok_or(Error::NonConvergence)
    }

    /// Splits a top form as `(1 - C) theta1 + c dlog t_1 ∧ ... ∧ dlog t_n`.
    ///
    /// `theta1 = sum_k C^k (omega - c Omega_log)`; only `Tr(c)` is canonical.
    pub fn cartier_decompose(&self) -> Result<(QForm, GfElement)> {
        let c = self.log_constant()?;
        let rest = self.sub(&QForm::top_log(&self.spec).scale(&TowerElement::constant(&self.spec, c.raw())))?;
        let mut theta = QForm::zero(&self.spec, self.q);
        let mut cur = rest;
        let mut steps = 0;
        // each step divides every surviving exponent by p, so nonzero
        // exponents die after at most log_p(max |e|) steps; an unknown tail
        // keeps shrinking its window until it reaches a fixed point
        loop {
            theta = theta.add(&cur)?;
            let next = cur.cartier();
            if cur.is_known_zero() && next == cur {
                break;
            }
            cur = next;
            steps += 1;
            if steps > 64 {
                return Err(Error::NonConvergence);
            }
        }
        Ok((theta, c))
    }

    /// `delta(omega) = Tr(c)` for the constant of [`QForm::cartier_decompose`].
    pub fn delta_top(&self) -> Result<u32> {
        Ok(self.log_constant()?.trace())
    }

    /// `d omega = 0` and `C omega = omega` on the known region.
    pub fn is_logarithmic(&self) -> bool {
        let closed = self.ext_d().is_known_zero();
        let fixed = self.cartier().sub(self).map(|d| d.is_known_zero()).unwrap_or(false);
        closed && fixed
    }

    pub fn to_json(&self) -> Value {
        let terms: Vec<Value> = self.terms.iter().map(|(m, f)| json!([mask_indices(*m), f.to_json()])).collect();
        json!({ "spec": self.spec.to_string(), "q": self.q, "terms": terms })
    }

    pub fn from_json(v: &Value) -> Result<QForm> {
        let bad = |m: &str| Error::Json(m.to_string());
        let spec = parse_spec(v["spec"].as_str().ok_or_else(|| bad("missing spec"))?, None)?;
        let q = v["q"].as_u64().ok_or_else(|| bad("missing q"))? as usize;
        let mut terms = Vec::new();
        for t in v["terms"].as_array().ok_or_else(|| bad("missing terms"))? {
            let idx: Vec<usize> = serde_json::from_value(t[0].clone()).map_err(|e| Error::Json(e.to_string()))?;
            if idx.iter().any(|&i| i == 0 || i > spec.n()) {
                return Err(bad("index out of range"));
            }
            let mut f = TowerElement::from_json(&t[1])?;
            if f.spec() != &spec {
                // the element carries its own spec string; it must agree
                if f.spec().to_string() != spec.to_string() {
                    return Err(Error::SpecMismatch);
                }
                f = TowerElement::from_node(&spec, f.into_node());
            }
            terms.push((mask_of(&idx), f));
        }
        QForm::from_terms(&spec, q, terms)
    }
}

impl fmt::Display for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        let names = self.spec.names();
        let parts: Vec<String> = self
            .terms
            .iter()
            .map(|(m, c)| {
                let basis: Vec<String> = mask_indices(*m).iter().map(|&i| format!("dlog {}", names[i - 1])).collect();
                if basis.is_empty() {
                    format!("({c})")
                } else {
                    format!("({c}) {}", basis.join("^"))
                }
            })
            .collect();
        write!(f, "{}", parts.join(" + "))
    }
}

impl fmt::Debug for QForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

mod parse;
