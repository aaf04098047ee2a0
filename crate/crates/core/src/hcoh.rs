//! `H_p^r(K)` through differential forms:
//! `H_p^r(K) = Ω^{r-1} / ((F - 1) Ω^{r-1} + d Ω^{r-2})`, with `F` raising
//! coefficients in the dlog basis to the `p`-th power.
//!
//! Reduction works monomial by monomial on `c T^E dlog_S`:
//! positive-valuation monomials lie in `(F - 1)` of the integer ring and are
//! dropped; `E = 0` keeps only `Tr(c)`; `p | E` becomes `c^{1/p} T^{E/p}`;
//! otherwise `d(T^E dlog_{S'}) = T^E ε_E ∧ dlog_{S'}` with
//! `ε_E = sum e_i dlog t_i` lets us remove `dlog t_j` for the first `j` with
//! `p ∤ e_j`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{wedge_sign, Mask, QForm};
use crate::gf::Raw;
use crate::tower::{parse_spec, TowerElement, TowerSpec};

#[derive(Clone)]
pub struct CohClass {
    spec: Arc<TowerSpec>,
    r: usize,
    rep: QForm,
    reduced: bool,
}

/// Which clause of the standard-element definition applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum StandardCase {
    /// totally ramified, `p ∤` level, residues `p`-independent
    Ramified,
    /// residually inseparable leading coefficient
    Inseparable,
}

impl StandardCase {
    pub fn tag(&self) -> &'static str {
        match self {
            StandardCase::Ramified => "i",
            StandardCase::Inseparable => "ii",
        }
    }
}

impl CohClass {
    pub fn as_class(r: usize, rep: QForm) -> Result<CohClass> {
        if r == 0 || rep.degree() + 1 != r {
            return Err(Error::DegreeMismatch { expected: r.saturating_sub(1), got: rep.degree() });
        }
        let spec = rep.spec().clone();
        if r > spec.n() + 1 {
            return Err(Error::Unsupported(format!("H^{r} vanishes above degree {}", spec.n() + 1)));
        }
        Ok(CohClass { spec, r, rep, reduced: false })
    }

    /// Artin-Schreier class of `a` in `H^1 = K / ℘K`.
    pub fn h1_class(a: &TowerElement) -> CohClass {
        CohClass { spec: a.spec().clone(), r: 1, rep: QForm::function(a), reduced: false }
    }

    pub fn zero(spec: &Arc<TowerSpec>, r: usize) -> Result<CohClass> {
        CohClass::as_class(r, QForm::zero(spec, r - 1))
    }

    pub fn spec(&self) -> &Arc<TowerSpec> {
        &self.spec
    }
    pub fn degree(&self) -> usize {
        self.r
    }
    pub fn rep(&self) -> &QForm {
        &self.rep
    }
    pub fn is_reduced(&self) -> bool {
        self.reduced
    }

    pub fn add(&self, other: &CohClass) -> Result<CohClass> {
        if self.r != other.r {
            return Err(Error::DegreeMismatch { expected: self.r, got: other.r });
        }
        CohClass::as_class(self.r, self.rep.add(&other.rep)?)
    }

    pub fn sub(&self, other: &CohClass) -> Result<CohClass> {
        self.add(&other.neg())
    }

    pub fn neg(&self) -> CohClass {
        CohClass { rep: self.rep.neg(), reduced: self.reduced, ..self.clone() }
    }

    pub fn scale_int(&self, c: i64) -> CohClass {
        CohClass { rep: self.rep.scale_int(c), reduced: false, ..self.clone() }
    }

    /// Canonical representative.
    pub fn reduce(&self) -> Result<CohClass> {
        if self.reduced {
            return Ok(self.clone());
        }
        let spec = &self.spec;
        let n = spec.n();
        let mut acc = Reducer { spec: spec.clone(), out: BTreeMap::new(), traces: BTreeMap::new() };
        for (m, f) in self.rep.terms() {
            check_window(f)?;
            for (e, c) in f.terms() {
                acc.term(e, *m, c);
            }
        }
        let k = spec.field();
        let mut rep = QForm::zero(spec, self.r - 1);
        for ((e, m), c) in acc.out {
            if c != 0 {
                rep.push_term(m, TowerElement::monomial(spec, &e, c));
            }
        }
        for (m, tr) in acc.traces {
            if tr != 0 {
                let c = k.mul(k.trace_one(), k.from_int(tr as i64));
                rep.push_term(m, TowerElement::constant(spec, c));
            }
        }
        debug_assert!(rep.terms().keys().all(|m| (*m as u16) >> n == 0));
        Ok(CohClass { spec: spec.clone(), r: self.r, rep, reduced: true })
    }

    pub fn is_zero(&self) -> Result<bool> {
        Ok(self.reduce()?.rep.terms().is_empty())
    }

    pub fn equals(&self, other: &CohClass) -> Result<bool> {
        self.sub(other)?.is_zero()
    }

    /// Smallest `i` with the class in `T_i`: the largest outer pole order of
    /// the reduced representative (0 when there is none).
    pub fn t_level(&self) -> Result<i64> {
        let red = self.reduce()?;
        let mut level = 0;
        for f in red.rep.terms().values() {
            for (e, _) in f.terms() {
                level = level.max(-e[e.len() - 1]);
            }
        }
        Ok(level)
    }

    /// Checks the conditions for `{χ, a_1, ..., a_s}` (case i) or
    /// `{χ, a_1, ..., a_s, π}` (case ii) to be standard.
    pub fn validate_standard_presentation(
        &self,
        a_list: &[TowerElement],
        pi: Option<&TowerElement>,
    ) -> Result<(bool, Option<StandardCase>)> {
        if self.r != 1 {
            return Err(Error::NotAClass(format!("expected a degree-1 class, got degree {}", self.r)));
        }
        if self.is_zero()? {
            return Err(Error::NotAClass("the zero class has no standard presentation".into()));
        }
        for (i, a) in a_list.iter().enumerate() {
            if a.spec() != &self.spec {
                return Err(Error::SpecMismatch);
            }
            if a.is_known_zero() || a.outer_valuation()? != 0 {
                return Err(Error::NonUnitEntry(i));
            }
        }
        if let Some(pi) = pi {
            if pi.spec() != &self.spec {
                return Err(Error::SpecMismatch);
            }
            if pi.outer_valuation()? != 1 {
                return Ok((false, None));
            }
        }
        let p = self.spec.p() as i64;
        let m = self.t_level()?;
        if m == 0 {
            return Ok((false, None));
        }
        let independent = residues_independent(&self.spec, a_list)?;
        if m % p != 0 {
            return Ok(if independent { (true, Some(StandardCase::Ramified)) } else { (false, None) });
        }
        // p | m: leading coefficient lives in the residue field; in reduced
        // form it is a p-th power only if it vanishes
        let red = self.reduce()?;
        let lead_inseparable = red
            .rep
            .coeff(0)
            .terms()
            .iter()
            .any(|(e, c)| *c != 0 && e[e.len() - 1] == -m && e[..e.len() - 1].iter().any(|x| x % p != 0));
        if lead_inseparable && independent {
            Ok((true, Some(StandardCase::Inseparable)))
        } else {
            Ok((false, None))
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "field": self.spec.to_string(), "r": self.r, "rep": self.rep.to_json() })
    }

    pub fn from_json(v: &Value) -> Result<CohClass> {
        let bad = |m: &str| Error::Json(m.to_string());
        let field = v["field"].as_str().ok_or_else(|| bad("missing field"))?;
        let r = v["r"].as_u64().ok_or_else(|| bad("missing r"))? as usize;
        let rep = QForm::from_json(&v["rep"])?;
        if rep.spec().to_string() != parse_spec(field, None)?.to_string() {
            return Err(Error::SpecMismatch);
        }
        CohClass::as_class(r, rep)
    }
}

impl fmt::Display for CohClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}]", self.rep)
    }
}

impl fmt::Debug for CohClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "H^{}{self}", self.r)
    }
}

/// Sign of the first nonzero exponent, outermost variable first.
fn lex_sign(e: &[i64]) -> i64 {
    e.iter().rev().find(|&&x| x != 0).map_or(0, |x| x.signum())
}

/// Unknown parts of a coefficient must sit at positive valuation, where
/// they are absorbed by `℘`.
fn check_window(f: &TowerElement) -> Result<()> {
    for (path, prec) in f.node().precision_records() {
        let s = path.iter().find(|&&x| x != 0).map_or(0, |x| x.signum());
        if s < 0 || (s == 0 && prec < 1) {
            return Err(Error::precision(format!("coefficient unknown at nonpositive valuation (path {path:?}, from {prec})")));
        }
    }
    Ok(())
}

struct Reducer {
    spec: Arc<TowerSpec>,
    out: BTreeMap<(Vec<i64>, Mask), Raw>,
    traces: BTreeMap<Mask, u32>,
}

impl Reducer {
    fn term(&mut self, e: Vec<i64>, m: Mask, c: Raw) {
        let k = self.spec.field().clone();
        let p = k.p() as i64;
        if c == 0 || lex_sign(&e) > 0 {
            return;
        }
        if lex_sign(&e) == 0 {
            let t = self.traces.entry(m).or_insert(0);
            *t = (*t + k.trace(c)) % k.p();
            return;
        }
        if e.iter().all(|x| x % p == 0) {
            let e2 = e.iter().map(|x| x / p).collect();
            self.term(e2, m, k.pth_root(c));
            return;
        }
        let j = e.iter().position(|x| x % p != 0).unwrap() + 1;
        let bit: Mask = 1 << (j - 1);
        if m & bit == 0 {
            let slot = self.out.entry((e, m)).or_insert(0);
            *slot = k.add(*slot, c);
            return;
        }
        // c dlog_S = -(c / (e_j s_j)) sum_{i != j, i ∉ S'} e_i s_i dlog_{S' ∪ i}
        let rest = m & !bit;
        let s_j = wedge_sign(bit, rest).unwrap();
        let denom = k.from_int(e[j - 1] * s_j);
        let base = k.neg(k.mul(c, k.inv(denom).unwrap()));
        for i in 1..=self.spec.n() {
            let b: Mask = 1 << (i - 1);
            if i == j || rest & b != 0 {
                continue;
            }
            let s_i = wedge_sign(b, rest).unwrap();
            let coef = k.mul(base, k.from_int(e[i - 1] * s_i));
            if coef != 0 {
                let slot = self.out.entry((e.clone(), rest | b)).or_insert(0);
                *slot = k.add(*slot, coef);
            }
        }
    }
}

/// `dlog ā_1 ∧ ... ∧ dlog ā_s ≠ 0` over the residue field.
fn residues_independent(spec: &Arc<TowerSpec>, a_list: &[TowerElement]) -> Result<bool> {
    if a_list.is_empty() {
        return Ok(true);
    }
    if spec.n() == 1 {
        // finite residue field is perfect
        return Ok(false);
    }
    let res: Vec<TowerElement> = a_list.iter().map(|a| a.residue_reduce()).collect::<Result<_>>()?;
    let w = QForm::dlog_wedge(&spec.residue(), &res)?;
    if w.terms().values().any(|f| !f.terms().is_empty()) {
        return Ok(true);
    }
    if w.is_exact() {
        return Ok(false);
    }
    Err(Error::precision("residue forms unknown"))
}
