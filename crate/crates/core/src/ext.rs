//! Degree-`p` Artin-Schreier extensions `L = K(θ)`, `θ^p - θ = a`.
//!
//! Elements of `L` are coefficient vectors over `K` in the basis
//! `1, θ, ..., θ^{p-1}`; the generator of the Galois group is `θ ↦ θ + 1`.

mod congruence;
mod oracle;

use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::hcoh::CohClass;
use crate::kmilnor::KClass;
use crate::tower::{TowerElement, TowerSpec};

pub use congruence::{norm_congruence_check, CongruenceReport, Family};
pub use oracle::{existence_check, norm_generators, norm_group_oracle, ExistenceReport, NormGroup, ORACLE_LIMIT};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ExtKind {
    Unramified,
    /// totally ramified, `p ∤` break
    Ramified,
    /// residue extension inseparable, `p |` break
    Inseparable,
}

impl ExtKind {
    pub fn name(&self) -> &'static str {
        match self {
            ExtKind::Unramified => "unramified",
            ExtKind::Ramified => "ramified",
            ExtKind::Inseparable => "inseparable",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct RamData {
    pub t: i64,
    pub kind: ExtKind,
}

#[derive(Debug)]
pub struct ASExt {
    spec: Arc<TowerSpec>,
    a: TowerElement,
    chi: CohClass,
    kind: ExtKind,
    t: i64,
    /// `Π = t_n^α θ^β` with `pα - tβ = 1` (ramified case)
    pi_exps: Option<(i64, i64)>,
}

/// An element of `L`.
#[derive(Clone)]
pub struct LElement {
    ext: Arc<ASExt>,
    c: Vec<TowerElement>,
}

fn binom_mod(n: usize, k: usize, p: u32) -> i64 {
    // Lucas is unnecessary for n < p
    let mut num = 1i64;
    for j in 0..k {
        num = num * (n - j) as i64 / (j + 1) as i64;
    }
    num.rem_euclid(p as i64)
}

/// Builds `L = K(θ)` from `a`, replacing `a` by its reduced representative.
pub fn make_extension(a: &TowerElement) -> Result<Arc<ASExt>> {
    let spec = a.spec().clone();
    let chi = CohClass::h1_class(a).reduce()?;
    if chi.rep().terms().is_empty() {
        return Err(Error::TrivialExtension);
    }
    let a = chi.rep().coeff(0);
    let t = chi.t_level()?;
    let p = spec.p() as i64;
    let (kind, pi_exps) = if t == 0 {
        (ExtKind::Unramified, None)
    } else if t % p != 0 {
        let beta = (1..p).find(|b| (t * b + 1) % p == 0).unwrap();
        (ExtKind::Ramified, Some(((1 + t * beta) / p, beta)))
    } else {
        (ExtKind::Inseparable, None)
    };
    Ok(Arc::new(ASExt { spec, a, chi, kind, t, pi_exps }))
}

impl ASExt {
    pub fn spec(&self) -> &Arc<TowerSpec> {
        &self.spec
    }
    pub fn a(&self) -> &TowerElement {
        &self.a
    }
    pub fn class(&self) -> &CohClass {
        &self.chi
    }
    pub fn kind(&self) -> ExtKind {
        self.kind
    }
    pub fn p(&self) -> u32 {
        self.spec.p()
    }

    /// Break and type. The break is the pole order of the reduced `a`,
    /// which is `t_level` of its class.
    pub fn ram_break(&self) -> RamData {
        RamData { t: self.t, kind: self.kind }
    }

    pub fn to_json(&self) -> Value {
        json!({
            "field": self.spec.to_string(),
            "a": self.a.to_expr(),
            "kind": self.kind.name(),
            "break": self.t,
        })
    }
}

pub fn ram_break(ext: &ASExt) -> RamData {
    ext.ram_break()
}

impl LElement {
    pub fn new(ext: &Arc<ASExt>, coeffs: Vec<TowerElement>) -> Result<LElement> {
        let p = ext.p() as usize;
        if coeffs.len() > p {
            return Err(Error::DimensionMismatch(format!("at most {p} coordinates, got {}", coeffs.len())));
        }
        if coeffs.iter().any(|c| c.spec() != &ext.spec) {
            return Err(Error::SpecMismatch);
        }
        let mut c = coeffs;
        c.resize(p, TowerElement::zero(&ext.spec));
        Ok(LElement { ext: ext.clone(), c })
    }

    pub fn from_base(ext: &Arc<ASExt>, x: &TowerElement) -> LElement {
        LElement::new(ext, vec![x.clone()]).expect("base element")
    }

    pub fn one(ext: &Arc<ASExt>) -> LElement {
        LElement::from_base(ext, &TowerElement::one(&ext.spec))
    }

    pub fn theta(ext: &Arc<ASExt>) -> LElement {
        let s = &ext.spec;
        LElement::new(ext, vec![TowerElement::zero(s), TowerElement::one(s)]).unwrap()
    }

    /// `θ^{-1} = (θ^{p-1} - 1) / a`.
    pub fn theta_inverse(ext: &Arc<ASExt>) -> Result<LElement> {
        let p = ext.p() as usize;
        let inv = ext.a.inverse()?;
        let mut c = vec![TowerElement::zero(&ext.spec); p];
        c[0] = -&inv;
        c[p - 1] = &c[p - 1] + &inv;
        LElement::new(ext, c)
    }

    /// The prime element `t_n^α θ^β` of a ramified extension.
    pub fn uniformizer(ext: &Arc<ASExt>) -> Option<LElement> {
        let (alpha, beta) = ext.pi_exps?;
        let t = TowerElement::var(&ext.spec, ext.spec.n()).pow(alpha).ok()?;
        Some(LElement::theta(ext).pow(beta as u64).scale(&t))
    }

    pub fn ext(&self) -> &Arc<ASExt> {
        &self.ext
    }
    pub fn coeffs(&self) -> &[TowerElement] {
        &self.c
    }

    pub fn is_known_zero(&self) -> bool {
        self.c.iter().all(TowerElement::is_known_zero)
    }

    /// The coordinate in `K` when all higher coordinates vanish.
    pub fn as_base(&self) -> Option<&TowerElement> {
        self.c[1..].iter().all(TowerElement::is_known_zero).then_some(&self.c[0])
    }

    pub fn add(&self, other: &LElement) -> LElement {
        let c = self.c.iter().zip(&other.c).map(|(x, y)| x + y).collect();
        LElement { ext: self.ext.clone(), c }
    }

    pub fn sub(&self, other: &LElement) -> LElement {
        let c = self.c.iter().zip(&other.c).map(|(x, y)| x - y).collect();
        LElement { ext: self.ext.clone(), c }
    }

    pub fn scale(&self, x: &TowerElement) -> LElement {
        LElement { ext: self.ext.clone(), c: self.c.iter().map(|y| y * x).collect() }
    }

    pub fn mul(&self, other: &LElement) -> LElement {
        let p = self.c.len();
        let s = &self.ext.spec;
        let mut full = vec![TowerElement::zero(s); 2 * p - 1];
        for (i, x) in self.c.iter().enumerate() {
            if x.is_exact_zero() {
                continue;
            }
            for (j, y) in other.c.iter().enumerate() {
                if !y.is_exact_zero() {
                    full[i + j] = &full[i + j] + &(x * y);
                }
            }
        }
        // θ^k = θ^{k-p+1} + a θ^{k-p}
        for k in (p..2 * p - 1).rev() {
            let top = std::mem::replace(&mut full[k], TowerElement::zero(s));
            if top.is_exact_zero() {
                continue;
            }
            full[k - p + 1] = &full[k - p + 1] + &top;
            full[k - p] = &full[k - p] + &(&top * &self.ext.a);
        }
        full.truncate(p);
        LElement { ext: self.ext.clone(), c: full }
    }

    pub fn pow(&self, e: u64) -> LElement {
        let mut acc = LElement::one(&self.ext);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                acc = acc.mul(&base);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base);
            }
        }
        acc
    }

    /// `x(θ + j)`.
    pub fn conjugate(&self, j: i64) -> LElement {
        let p = self.ext.p();
        let s = &self.ext.spec;
        let field = s.field();
        let mut out = vec![TowerElement::zero(s); self.c.len()];
        for (k, x) in self.c.iter().enumerate() {
            if x.is_exact_zero() {
                continue;
            }
            for (l, slot) in out.iter_mut().enumerate().take(k + 1) {
                let coef = binom_mod(k, l, p) * j.rem_euclid(p as i64).pow((k - l) as u32);
                let coef = field.from_int(coef);
                if coef != 0 {
                    *slot = &*slot + &x.scale(coef);
                }
            }
        }
        LElement { ext: self.ext.clone(), c: out }
    }

    /// `N_{L/K}(x) = Π_j x(θ + j)`.
    pub fn norm(&self) -> Result<TowerElement> {
        if self.is_known_zero() {
            return Err(Error::ZeroOrUnknownLeadingTerm("norm of zero".into()));
        }
        let p = self.ext.p() as i64;
        let mut acc = self.clone();
        for j in 1..p {
            acc = acc.mul(&self.conjugate(j));
        }
        match acc.as_base() {
            Some(x) => Ok(x.clone()),
            None => Err(Error::InternalInconsistency(format!("norm has nonzero θ-coordinates: {acc}"))),
        }
    }

    pub fn to_json(&self) -> Value {
        json!({ "ext": self.ext.to_json(), "coeffs": self.c.iter().map(TowerElement::to_expr).collect::<Vec<_>>() })
    }
}

impl fmt::Display for LElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut parts = Vec::new();
        for (k, x) in self.c.iter().enumerate() {
            if x.is_exact_zero() {
                continue;
            }
            parts.push(match k {
                0 => format!("({x})"),
                1 => format!("({x})θ"),
                _ => format!("({x})θ^{k}"),
            });
        }
        if parts.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", parts.join(" + "))
        }
    }
}

impl fmt::Debug for LElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

pub fn norm_elt(x: &LElement) -> Result<TowerElement> {
    x.norm()
}

/// An entry of a symbol with at most one coordinate in `L`.
#[derive(Clone, Debug)]
pub enum SymbolEntry {
    L(LElement),
    K(TowerElement),
}

/// `N_{L/K}{x, y_2, ..., y_q} = {N(x), y_2, ..., y_q}` (projection formula).
pub fn norm_symbol(entries: &[SymbolEntry]) -> Result<KClass> {
    let l_count = entries.iter().filter(|e| matches!(e, SymbolEntry::L(_))).count();
    if l_count != 1 {
        return Err(Error::MultipleLEntries);
    }
    let spec = entries
        .iter()
        .find_map(|e| if let SymbolEntry::L(x) = e { Some(x.ext.spec.clone()) } else { None })
        .unwrap();
    let mut xs = Vec::with_capacity(entries.len());
    for e in entries {
        xs.push(match e {
            SymbolEntry::L(x) => x.norm()?,
            SymbolEntry::K(y) => {
                if y.spec() != &spec {
                    return Err(Error::SpecMismatch);
                }
                y.clone()
            }
        });
    }
    KClass::symbol(&spec, xs)
}

#[cfg(test)]
mod tests;
