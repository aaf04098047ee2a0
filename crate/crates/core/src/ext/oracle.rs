//! Norm groups by enumeration (`n = 1`) and the existence-theorem checker.

use std::sync::Arc;

use serde_json::{json, Value};

use super::{make_extension, norm_symbol, ASExt, ExtKind, LElement, SymbolEntry};
use crate::error::{Error, Result};
use crate::hcoh::CohClass;
use crate::kmilnor::graded::{exponent_box, labels_below};
use crate::kmilnor::{KClass, Label};
use crate::linalg;
use crate::recip::{pair, CharacterTable};
use crate::tower::TowerElement;

/// Largest quotient `K^*/(K^*)^p(1 + M^N)` the oracle enumerates.
pub const ORACLE_LIMIT: u128 = 1 << 20;

/// A subgroup of `K^*/(K^*)^p(1 + M^N)` in graded coordinates.
#[derive(Clone, Debug)]
pub struct NormGroup {
    pub p: u32,
    pub labels: Vec<Label>,
    /// reduced row echelon basis
    pub basis: Vec<Vec<u32>>,
}

impl NormGroup {
    pub fn quotient_size(&self) -> u128 {
        (self.p as u128).pow(self.labels.len() as u32)
    }

    pub fn index(&self) -> u128 {
        (self.p as u128).pow((self.labels.len() - self.basis.len()) as u32)
    }

    pub fn contains(&self, v: &[u32]) -> bool {
        linalg::in_span(&self.basis, v, self.p)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "labels": self.labels.iter().map(Label::to_string).collect::<Vec<_>>(),
            "basis": self.basis,
            "index": self.index() as u64,
        })
    }
}

/// Upper filtration index of `L` whose units norm into `U_N`.
fn l_level(ext: &ASExt, n_cap: i64) -> i64 {
    match ext.kind {
        ExtKind::Ramified if n_cap > ext.t => ext.t + ext.p() as i64 * (n_cap - ext.t),
        _ => n_cap,
    }
}

/// Generators of `L^*/(L^*)^p(1 + M_L^{N'})` whose norms generate the norm
/// group modulo `U_N`: a prime of `L`, `g`, and `1 + λ ϖ^j g^k` with `λ`
/// running over an `F_p`-basis of the constants (times inner monomials in
/// the window when `n >= 2`).
pub fn norm_generators(ext: &Arc<ASExt>, n_cap: i64) -> Result<Vec<LElement>> {
    let s = &ext.spec;
    let field = s.field();
    let (pi_l, g) = LElement::integral_basis(ext);
    let top = l_level(ext, n_cap);
    let window = if s.n() == 1 { 0 } else { 1 };
    let mut lambdas = Vec::new();
    for e in exponent_box(s.n() - 1, window) {
        let mut exps = e.clone();
        exps.push(0);
        for a in 0..field.degree() {
            lambdas.push(TowerElement::monomial(s, &exps, field.pow(field.generator(), a as i64).unwrap()));
        }
    }
    let ks: Vec<i64> = if ext.kind == ExtKind::Ramified { vec![0] } else { (0..s.p() as i64).collect() };
    let mut out = vec![pi_l.clone()];
    if ext.kind != ExtKind::Ramified {
        out.push(g.clone());
    }
    let mut pj = LElement::one(ext);
    for _j in 1..top {
        pj = pj.mul(&pi_l);
        for &k in &ks {
            let base = pj.mul(&g.pow(k as u64));
            for lam in &lambdas {
                out.push(LElement::one(ext).add(&base.scale(lam)));
            }
        }
    }
    Ok(out)
}

fn coordinates(labels: &[Label], x: &TowerElement, n_cap: i64) -> Result<Vec<u32>> {
    let cls = KClass::symbol(x.spec(), vec![x.clone()])?.with_level_cap(n_cap);
    let g = cls.graded_decompose()?;
    let mut v = vec![0u32; labels.len()];
    for (l, c) in g.coords {
        let idx = labels
            .iter()
            .position(|m| *m == l)
            .ok_or_else(|| Error::InternalInconsistency(format!("coordinate label {l} outside the enumerated basis")))?;
        v[idx] = c;
    }
    Ok(v)
}

/// The norm subgroup of `K^*/(K^*)^p(1 + M^N)`, `K` one-dimensional.
pub fn norm_group_oracle(ext: &Arc<ASExt>, n_cap: i64) -> Result<NormGroup> {
    let s = &ext.spec;
    if s.n() != 1 {
        return Err(Error::Unsupported("the norm-group oracle enumerates one-dimensional fields only".into()));
    }
    let mut labels = labels_below(s, 1, n_cap, 0);
    labels.sort();
    let p = s.p();
    let size = (p as u128).checked_pow(labels.len() as u32).unwrap_or(u128::MAX);
    if size > ORACLE_LIMIT {
        return Err(Error::TooLarge(size));
    }
    let mut rows = Vec::new();
    for gen in norm_generators(ext, n_cap)? {
        rows.push(coordinates(&labels, &gen.norm()?, n_cap)?);
    }
    Ok(NormGroup { p, labels, basis: linalg::rref(&rows, p) })
}

#[derive(Clone, Debug)]
pub struct ExistenceReport {
    pub level_cap: i64,
    /// index of the kernel of the character in `K_n(K)/(p, U_N)`
    pub index: u32,
    pub norms_checked: usize,
    /// labels of norm symbols pairing nontrivially (should be empty)
    pub norm_failures: Vec<String>,
    /// `n = 1`: kernel of the character equals the enumerated norm group
    pub oracle_match: Option<bool>,
    pub oracle_index: Option<u128>,
}

impl ExistenceReport {
    /// Index `p`, all norms in the kernel, and agreement with the oracle.
    pub fn passed(&self) -> bool {
        self.index > 1 && self.norm_failures.is_empty() && self.oracle_match != Some(false)
    }

    pub fn to_json(&self) -> Value {
        json!({
            "level_cap": self.level_cap,
            "index": self.index,
            "norms_checked": self.norms_checked,
            "norm_failures": self.norm_failures,
            "oracle_match": self.oracle_match,
            "oracle_index": self.oracle_index.map(|x| x as u64),
            "passed": self.passed(),
        })
    }
}

/// Index of `ker Φ(χ)`, norms in the kernel, and (`n = 1`) kernel = norm group.
pub fn existence_check(chi: &CohClass, n_cap: i64) -> Result<ExistenceReport> {
    if chi.degree() != 1 {
        return Err(Error::NotAClass(format!("expected a degree-1 class, got degree {}", chi.degree())));
    }
    let s = chi.spec().clone();
    let ext = make_extension(&chi.rep().coeff(0))?;
    let table = CharacterTable::new(chi, n_cap)?;
    let index = table.kernel_index();

    // one-L-entry symbols {x, y_2, ..., y_n}
    let mut k_entries: Vec<TowerElement> = (1..=s.n()).map(|i| TowerElement::var(&s, i)).collect();
    for i in 1..=s.n() {
        k_entries.push(&TowerElement::one(&s) + &TowerElement::var(&s, i));
    }
    let gens = norm_generators(&ext, n_cap)?;
    let mut failures = Vec::new();
    let mut checked = 0;
    let tails = combinations(k_entries.len(), s.n() - 1);
    for x in &gens {
        for tail in &tails {
            let mut entries = vec![SymbolEntry::L(x.clone())];
            entries.extend(tail.iter().map(|&i| SymbolEntry::K(k_entries[i].clone())));
            let xi = norm_symbol(&entries)?;
            checked += 1;
            if pair(chi, &xi)? != 0 {
                failures.push(format!("N{{{x}, ...}} = {xi}"));
            }
        }
    }

    let (oracle_match, oracle_index) = if s.n() == 1 {
        let oracle = norm_group_oracle(&ext, n_cap)?;
        let labels: Vec<Label> = table.values.keys().cloned().collect();
        if labels != oracle.labels {
            return Err(Error::InternalInconsistency("character and oracle bases differ".into()));
        }
        let row: Vec<u32> = table.values.values().copied().collect();
        let kernel = linalg::rref(&linalg::kernel(&[row], labels.len(), s.p()), s.p());
        (Some(kernel == oracle.basis), Some(oracle.index()))
    } else {
        (None, None)
    };
    Ok(ExistenceReport { level_cap: n_cap, index, norms_checked: checked, norm_failures: failures, oracle_match, oracle_index })
}

fn combinations(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![Vec::new()];
    }
    let mut out = Vec::new();
    for first in 0..n {
        for mut rest in combinations(n, k - 1) {
            if rest.first().is_none_or(|&r| r > first) {
                rest.insert(0, first);
                out.push(rest);
            }
        }
    }
    out
}
