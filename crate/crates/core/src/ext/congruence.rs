//! Norm congruences for `L/K` with `σ(θ) = θ + 1`, `a' = h^{-1}σ(h) - 1`,
//! `b = N(a')`, `t = v_K(b)`; `h = Π` when ramified and `h = θ t_n^{t/p}`
//! otherwise (so `a' = θ^{-1}`).
//!
//! 1. `N(1 + x) ≡ 1 + N(x) mod M_K^{i+1}` for `f | i`, `1 <= i < t`, `x ∈ M_L^{i/f}`
//! 2. `N(1 + x a') ≡ 1 + (x^p - x) b mod M_K^{t+1}` for `x ∈ O_K`; in the
//!    inseparable case also `N(1 + x h^r a') ≡ 1 + x^p N(h)^r b` for `p ∤ r`
//! 3. `1 + M_K^{t+1} ⊂ N(1 + M_L^{t/f+1})`, by successive approximation

use std::sync::Arc;

use serde_json::{json, Value};

use super::{ASExt, ExtKind, LElement};
use crate::error::{Error, Result};
use crate::gf::Raw;
use crate::linalg;
use crate::tower::TowerElement;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Family {
    One,
    Two,
    /// the `h^r` variant of (2), inseparable case only
    TwoTwisted(i64),
    Three,
}

impl Family {
    pub fn name(&self) -> String {
        match self {
            Family::One => "1".into(),
            Family::Two => "2".into(),
            Family::TwoTwisted(r) => format!("2'(r={r})"),
            Family::Three => "3".into(),
        }
    }
}

#[derive(Clone, Debug)]
pub struct CongruenceReport {
    pub family: Family,
    pub holds: bool,
    /// the congruence is checked modulo `M_K^modulus`
    pub modulus: i64,
    /// first differing monomial `(exponents, coefficient)` when it fails
    pub first_difference: Option<(Vec<i64>, Raw)>,
    /// family 3: level up to which `N(z) ≡ 1 + y` was reached
    pub achieved: Option<i64>,
}

impl CongruenceReport {
    pub fn to_json(&self) -> Value {
        json!({
            "family": self.family.name(),
            "holds": self.holds,
            "modulus": self.modulus,
            "first_difference": self.first_difference.as_ref().map(|(e, c)| json!({"exps": e, "coeff": c})),
            "achieved": self.achieved,
        })
    }
}

impl LElement {
    /// `(ϖ_L, g)` with `O_L = ⊕ O_K g^k` and `ϖ_L` a prime of `L`.
    pub fn integral_basis(ext: &Arc<ASExt>) -> (LElement, LElement) {
        let s = &ext.spec;
        let tn = TowerElement::var(s, s.n());
        match ext.kind {
            ExtKind::Ramified => {
                let pi = LElement::uniformizer(ext).unwrap();
                (pi.clone(), pi)
            }
            ExtKind::Unramified => (LElement::from_base(ext, &tn), LElement::theta(ext)),
            ExtKind::Inseparable => {
                let h = aux_h(ext).unwrap();
                (LElement::from_base(ext, &tn), h)
            }
        }
    }
}

fn aux_h(ext: &Arc<ASExt>) -> Result<LElement> {
    let s = &ext.spec;
    match ext.kind {
        ExtKind::Ramified => Ok(LElement::uniformizer(ext).unwrap()),
        _ => {
            let shift = TowerElement::var(s, s.n()).pow(ext.t / s.p() as i64)?;
            Ok(LElement::theta(ext).scale(&shift))
        }
    }
}

/// `a' = h^{-1}σ(h) - 1`.
fn a_prime(ext: &Arc<ASExt>) -> Result<LElement> {
    let inv = LElement::theta_inverse(ext)?;
    match ext.pi_exps {
        // (θ + 1)^β / θ^β - 1 = (1 + θ^{-1})^β - 1
        Some((_, beta)) => Ok(LElement::one(ext).add(&inv).pow(beta as u64).sub(&LElement::one(ext))),
        None => Ok(inv),
    }
}

/// `(a', b)` with the consistency check `v_K(b) = t`.
fn aux_data(ext: &Arc<ASExt>) -> Result<(LElement, TowerElement)> {
    let ap = a_prime(ext)?;
    let b = ap.norm()?;
    let v = b.outer_valuation()?;
    if v != ext.t {
        return Err(Error::InternalInconsistency(format!("v_K(b) = {v} but the break is {}", ext.t)));
    }
    Ok((ap, b))
}

/// First monomial of `lhs - rhs` with outer exponent below `bound`.
fn first_difference(lhs: &TowerElement, rhs: &TowerElement, bound: i64) -> Result<Option<(Vec<i64>, Raw)>> {
    let d = lhs - rhs;
    if d.node().prec() < bound {
        return Err(Error::precision(format!("difference known only below t_n^{}, need {bound}", d.node().prec())));
    }
    Ok(d.terms().into_iter().find(|(e, _)| e[e.len() - 1] < bound))
}

fn report(family: Family, modulus: i64, diff: Option<(Vec<i64>, Raw)>) -> CongruenceReport {
    CongruenceReport { family, holds: diff.is_none(), modulus, first_difference: diff, achieved: None }
}

fn base_of(x: &LElement) -> Result<TowerElement> {
    x.as_base().cloned().ok_or_else(|| Error::HypothesisViolation("x must lie in K for this family".into()))
}

/// Checks one norm congruence family for the input `x`
/// (an element of `L` for family 1, of `K` otherwise) and index `i`
/// (family 1 only).
pub fn norm_congruence_check(ext: &Arc<ASExt>, family: Family, x: &LElement, i: i64) -> Result<CongruenceReport> {
    let s = &ext.spec;
    let p = s.p() as i64;
    let t = ext.t;
    let f = if ext.kind == ExtKind::Inseparable { p } else { 1 };
    let one = TowerElement::one(s);
    match family {
        Family::One => {
            if i % f != 0 || i < 1 || i >= t {
                return Err(Error::HypothesisViolation(format!("need f | i and 1 <= i < t (f = {f}, t = {t}, i = {i})")));
            }
            let nx = if x.is_known_zero() { TowerElement::zero(s) } else { x.norm()? };
            if !nx.is_known_zero() && nx.outer_valuation()? < i {
                return Err(Error::HypothesisViolation(format!("x is not in M_L^{}", i / f)));
            }
            let lhs = LElement::one(ext).add(x).norm()?;
            let rhs = &one + &nx;
            Ok(report(family, i + 1, first_difference(&lhs, &rhs, i + 1)?))
        }
        Family::Two => {
            let xk = base_of(x)?;
            check_integral(&xk)?;
            let (ap, b) = aux_data(ext)?;
            let lhs = LElement::one(ext).add(&ap.scale(&xk)).norm()?;
            let rhs = &one + &(&(&xk.pow(p)? - &xk) * &b);
            Ok(report(family, t + 1, first_difference(&lhs, &rhs, t + 1)?))
        }
        Family::TwoTwisted(r) => {
            if ext.kind != ExtKind::Inseparable {
                return Err(Error::HypothesisViolation("the h^r congruence needs an inseparable residue extension".into()));
            }
            if r % p == 0 {
                return Err(Error::HypothesisViolation(format!("r = {r} must be prime to p")));
            }
            let xk = base_of(x)?;
            check_integral(&xk)?;
            let (ap, b) = aux_data(ext)?;
            let h = aux_h(ext)?;
            let nh = h.norm()?;
            let hr = if r > 0 {
                h.pow(r as u64)
            } else {
                let shift = TowerElement::var(s, s.n()).pow(-(t / p))?;
                LElement::theta_inverse(ext)?.scale(&shift).pow((-r) as u64)
            };
            let lhs = LElement::one(ext).add(&hr.mul(&ap).scale(&xk)).norm()?;
            let rhs = &one + &(&(&xk.pow(p)? * &nh.pow(r)?) * &b);
            Ok(report(family, t + 1, first_difference(&lhs, &rhs, t + 1)?))
        }
        Family::Three => preimage(ext, &base_of(x)?),
    }
}

fn check_integral(x: &TowerElement) -> Result<()> {
    if !x.is_known_zero() && x.outer_valuation()? < 0 {
        return Err(Error::HypothesisViolation("x must be integral".into()));
    }
    Ok(())
}

/// Successive approximation of `z ∈ 1 + M_L^{t/f+1}` with `N(z) = 1 + y`.
fn preimage(ext: &Arc<ASExt>, y: &TowerElement) -> Result<CongruenceReport> {
    let s = &ext.spec;
    if s.n() != 1 {
        return Err(Error::Unsupported("norm preimages are constructed over a finite residue field (n = 1) only".into()));
    }
    let p = s.p() as i64;
    let t = ext.t;
    if ext.kind == ExtKind::Inseparable {
        return Err(Error::Unsupported("inseparable residue extensions do not occur for n = 1".into()));
    }
    if !y.is_known_zero() && y.outer_valuation()? < t + 1 {
        return Err(Error::HypothesisViolation(format!("y must lie in M_K^{}", t + 1)));
    }
    let field = s.field().clone();
    let goal = s.prec()[0];
    // z only matters up to this outer exponent in its θ-coordinates
    let keep = goal + t + 2;
    let target = &TowerElement::one(s) + y;
    let mut z = LElement::one(ext);
    let (pi_l, g) = LElement::integral_basis(ext);
    let mut achieved = None;
    for _ in 0..4 * goal.max(1) {
        let e = &(&target * &z.norm()?.inverse()?) - &TowerElement::one(s);
        let lead = e.terms().into_iter().find(|(ex, _)| ex[0] < goal);
        let Some((ex, c)) = lead else {
            achieved = Some(goal.min(e.node().prec()));
            break;
        };
        let lvl = ex[0];
        if lvl <= t {
            return Err(Error::InternalInconsistency(format!("residual at level {lvl} <= break {t}")));
        }
        // candidates whose norms start at t^lvl; their first-order effect is additive
        let mut cands = Vec::new();
        for a in 0..field.degree() {
            let lam = TowerElement::constant(s, field.pow(field.generator(), a as i64).unwrap());
            match ext.kind {
                ExtKind::Ramified => {
                    let j = t + p * (lvl - t);
                    cands.push(pi_l.pow(j as u64).scale(&lam));
                }
                _ => {
                    for k in 0..p {
                        cands.push(g.pow(k as u64).mul(&pi_l.pow(lvl as u64)).scale(&lam));
                    }
                }
            }
        }
        let mut cols = Vec::new();
        let mut units = Vec::new();
        for c in cands {
            let u = LElement::one(ext).add(&c);
            let nu = &u.norm()? - &TowerElement::one(s);
            let v = nu.coeff(&[lvl]).ok_or_else(|| Error::precision("candidate norm unknown"))?;
            if nu.terms().iter().any(|(ex, _)| ex[0] < lvl) {
                return Err(Error::InternalInconsistency("candidate norm below its level".into()));
            }
            cols.push(field.coeffs(v.raw()));
            units.push(u);
        }
        let want = field.coeffs(c);
        let Some(mu) = linalg::solve(&cols, &want, p as u32) else {
            achieved = Some(lvl);
            break;
        };
        for (u, m) in units.iter().zip(mu) {
            if m != 0 {
                z = z.mul(&u.pow(m as u64));
            }
        }
        z = truncate(&z, keep);
    }
    let achieved = achieved.unwrap_or(t + 1);
    Ok(CongruenceReport {
        family: Family::Three,
        holds: achieved >= goal,
        modulus: goal,
        first_difference: None,
        achieved: Some(achieved),
    })
}

fn truncate(x: &LElement, prec: i64) -> LElement {
    let s = &x.ext.spec;
    let c = x.c.iter().map(|v| TowerElement::from_node(s, v.node().truncate(prec.min(v.node().prec())))).collect();
    LElement { ext: x.ext.clone(), c }
}
