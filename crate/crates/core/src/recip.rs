//! The residue pairing `H_p^r(K) × K_q(K)/p → Z/p` for `q + r = n + 1`,
//! character tables on graded generators, and graded pairing matrices.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::forms::{mask_indices, masks, Mask, QForm};
use crate::hcoh::CohClass;
use crate::kmilnor::graded::{exponent_box, first_unit_index, generator, labels_below, level_labels, lift};
use crate::kmilnor::{KClass, Label};
use crate::linalg;
use crate::tower::{TowerElement, TowerSpec};

/// Inner exponent window used for generator families unless overridden.
pub const DEFAULT_WINDOW: i64 = 3;

/// `δ(ω)` for a top form, refusing unknown constants.
fn delta(w: &QForm) -> Result<u32> {
    match w.log_constant() {
        Ok(c) => Ok(c.trace()),
        Err(Error::NonConvergence) => Err(Error::precision("constant coefficient of the residue form is unknown")),
        Err(e) => Err(e),
    }
}

/// `Σ c · δ(rep(w) ∧ dlog x_1 ∧ ... ∧ dlog x_q)`.
pub fn pair(w: &CohClass, xi: &KClass) -> Result<u32> {
    let spec = w.spec();
    if xi.spec() != spec {
        return Err(Error::SpecMismatch);
    }
    let n = spec.n();
    if w.degree() + xi.degree() != n + 1 {
        return Err(Error::DegreeMismatch { expected: n + 1 - w.degree(), got: xi.degree() });
    }
    let p = spec.p();
    let mut total = 0;
    for (c, xs) in xi.terms() {
        let form = w.rep().wedge(&QForm::dlog_wedge(spec, xs)?)?;
        total = (total + c * delta(&form)?) % p;
    }
    Ok(total)
}

fn pair_label(w: &CohClass, label: &Label) -> Result<u32> {
    let xs = generator(w.spec(), label)?;
    pair(w, &KClass::symbol(w.spec(), xs)?)
}

/// Values of `pair(w, ·)` on the generators of `K_q(K)/(p, U_N)` in a window.
#[derive(Clone, Debug)]
pub struct CharacterTable {
    pub w: CohClass,
    pub level_cap: i64,
    pub window: i64,
    pub values: BTreeMap<Label, u32>,
}

impl CharacterTable {
    pub fn new(w: &CohClass, level_cap: i64) -> Result<CharacterTable> {
        CharacterTable::with_window(w, level_cap, DEFAULT_WINDOW)
    }

    pub fn with_window(w: &CohClass, level_cap: i64, window: i64) -> Result<CharacterTable> {
        let spec = w.spec();
        let q = spec.n() + 1 - w.degree();
        let mut values = BTreeMap::new();
        for label in labels_below(spec, q, level_cap, window) {
            let v = pair_label(w, &label)?;
            values.insert(label, v);
        }
        Ok(CharacterTable { w: w.clone(), level_cap, window, values })
    }

    pub fn is_zero(&self) -> bool {
        self.values.values().all(|&v| v == 0)
    }

    /// Index of the kernel: `p` when the character is nontrivial, else 1.
    pub fn kernel_index(&self) -> u32 {
        if self.is_zero() {
            1
        } else {
            self.w.spec().p()
        }
    }

    /// `larger` agrees on our generators and vanishes on the new ones.
    pub fn stable_under(&self, larger: &CharacterTable) -> bool {
        self.values.iter().all(|(l, v)| larger.values.get(l) == Some(v))
            && larger.values.iter().all(|(l, v)| self.values.contains_key(l) || *v == 0)
    }

    pub fn to_json(&self) -> Value {
        let values: serde_json::Map<String, Value> = self.values.iter().map(|(l, v)| (l.to_string(), json!(v))).collect();
        json!({
            "class": self.w.to_json(),
            "level_cap": self.level_cap,
            "window": self.window,
            "values": values,
        })
    }
}

/// A basis vector of `T_i H^r / T_{i-1}`: `π^{-i}(a + b ∧ dlog π)` with
/// `a`, `b` monomial forms over the residue tower.
#[derive(Clone, Debug)]
pub struct HBasis {
    pub label: String,
    pub class: CohClass,
    pub a: QForm,
    pub b: QForm,
}

fn monomial_form(k: &Arc<TowerSpec>, a: u32, exps: &[i64], mask: Mask) -> QForm {
    let field = k.field();
    let c = field.pow(field.generator(), a as i64).unwrap();
    QForm::monomial(&TowerElement::monomial(k, exps, c), mask)
}

fn lex_negative(e: &[i64]) -> bool {
    e.iter().rev().find(|&&x| x != 0).is_some_and(|x| *x < 0)
}

fn basis_label(i: i64, kind: &str, a: u32, exps: &[i64], mask: Mask) -> String {
    let e: Vec<String> = exps.iter().map(|x| x.to_string()).collect();
    let s: Vec<String> = mask_indices(mask).iter().map(|x| x.to_string()).collect();
    format!("T{i}.{kind}[w^{a};T({});S({})]", e.join(","), s.join(","))
}

/// Monomial representatives of `T_i H^r(K) / T_{i-1}` in the window.
pub fn h_basis(spec: &Arc<TowerSpec>, r: usize, i: i64, window: i64) -> Result<Vec<HBasis>> {
    let n = spec.n();
    if r == 0 || r > n + 1 || n == 0 {
        return Err(Error::DimensionMismatch(format!("no H^{r} basis over {spec}")));
    }
    let k = spec.residue();
    let p = spec.p() as i64;
    let f = spec.field().degree();
    let mut out = Vec::new();
    let push = |kind: &str, a: u32, exps: &[i64], mask: Mask, out: &mut Vec<HBasis>| -> Result<()> {
        let form = monomial_form(&k, a, exps, mask);
        let (fa, fb) = if kind == "a" { (form, QForm::zero(&k, r.saturating_sub(2))) } else { (QForm::zero(&k, r - 1), form) };
        let rep = lift(spec, &fa, &fb, -i);
        out.push(HBasis { label: basis_label(i, kind, a, exps, mask), class: CohClass::as_class(r, rep)?, a: fa, b: fb });
        Ok(())
    };
    let trace_power = {
        // w^a with trace 1
        let field = spec.field();
        (0..f).find(|&a| field.trace(field.pow(field.generator(), a as i64).unwrap()) == 1).unwrap_or(0)
    };
    for exps in exponent_box(n - 1, window) {
        let j = first_unit_index(&exps, p);
        let avoid = |m: &Mask| j.is_none_or(|j| m >> j & 1 == 0);
        let (a_masks, b_masks): (Vec<Mask>, Vec<Mask>) = if i == 0 {
            if exps.iter().all(|&x| x == 0) {
                for m in masks(n - 1, r - 1) {
                    push("a", trace_power, &exps, m, &mut out)?;
                }
                if r >= 2 {
                    for m in masks(n - 1, r - 2) {
                        push("b", trace_power, &exps, m, &mut out)?;
                    }
                }
                continue;
            }
            if !lex_negative(&exps) || j.is_none() {
                continue;
            }
            (masks(n - 1, r - 1).into_iter().filter(avoid).collect(), b_masks_for(n, r, avoid))
        } else if i % p != 0 {
            (masks(n - 1, r - 1), Vec::new())
        } else {
            if j.is_none() {
                continue;
            }
            (masks(n - 1, r - 1).into_iter().filter(avoid).collect(), b_masks_for(n, r, avoid))
        };
        for a in 0..f {
            for &m in &a_masks {
                push("a", a, &exps, m, &mut out)?;
            }
            for &m in &b_masks {
                push("b", a, &exps, m, &mut out)?;
            }
        }
    }
    Ok(out)
}

fn b_masks_for(n: usize, r: usize, avoid: impl Fn(&Mask) -> bool) -> Vec<Mask> {
    if r >= 2 {
        masks(n - 1, r - 2).into_iter().filter(|m| avoid(m)).collect()
    } else {
        Vec::new()
    }
}

/// Pairing matrix between an `H` basis and a list of `K` generators.
#[derive(Clone, Debug)]
pub struct GradedMatrix {
    pub p: u32,
    pub rows: Vec<String>,
    pub cols: Vec<String>,
    pub entries: Vec<Vec<u32>>,
}

impl GradedMatrix {
    pub fn rank(&self) -> usize {
        linalg::rank(&self.entries, self.p)
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().flatten().all(|&x| x == 0)
    }

    pub fn full_rank(&self) -> bool {
        self.rank() == self.rows.len().min(self.cols.len())
    }

    pub fn to_json(&self) -> Value {
        json!({ "rows": self.rows, "cols": self.cols, "matrix": self.entries, "rank": self.rank() })
    }
}

impl fmt::Display for GradedMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in &self.entries {
            let s: Vec<String> = row.iter().map(|x| x.to_string()).collect();
            writeln!(f, "{}", s.join(" "))?;
        }
        Ok(())
    }
}

fn check_degrees(spec: &TowerSpec, r: usize, q: usize) -> Result<()> {
    if r == 0 || q + r != spec.n() + 1 {
        return Err(Error::DimensionMismatch(format!("r + q must be {} (got r={r}, q={q})", spec.n() + 1)));
    }
    Ok(())
}

/// Pairing of `T_{h_level}` basis against `U_{u_level}` generators.
pub fn pairing_block(
    spec: &Arc<TowerSpec>,
    h_level: i64,
    u_level: i64,
    r: usize,
    q: usize,
    window: i64,
) -> Result<GradedMatrix> {
    check_degrees(spec, r, q)?;
    let hs = h_basis(spec, r, h_level, window)?;
    let us = level_labels(spec, q, u_level, window);
    let gens: Vec<KClass> =
        us.iter().map(|l| KClass::symbol(spec, generator(spec, l)?)).collect::<Result<_>>()?;
    let mut entries = Vec::with_capacity(hs.len());
    for h in &hs {
        let row: Vec<u32> = gens.iter().map(|g| pair(&h.class, g)).collect::<Result<_>>()?;
        entries.push(row);
    }
    Ok(GradedMatrix {
        p: spec.p(),
        rows: hs.into_iter().map(|h| h.label).collect(),
        cols: us.iter().map(Label::to_string).collect(),
        entries,
    })
}

/// The induced pairing `T_i/T_{i-1} × U_i/U_{i+1} → Z/p` on window bases.
pub fn graded_pairing_matrix(spec: &Arc<TowerSpec>, i: i64, r: usize, q: usize, window: i64) -> Result<GradedMatrix> {
    if i < 0 {
        return Err(Error::DimensionMismatch(format!("negative level {i}")));
    }
    pairing_block(spec, i, i, r, q, window)
}

/// `δ(d w_1 ∧ v_2 + d w_2 ∧ v_1)` over the residue tower, with
/// `w_1 = (-1)^r a`, `w_2 = (-1)^n b` read off the basis element and
/// `v_1`, `v_2` the slot forms of a level label (`p | i`).
pub fn case3_value(spec: &Arc<TowerSpec>, h: &HBasis, label: &Label) -> Result<u32> {
    let n = spec.n();
    let k = spec.residue();
    let r = h.class.degree();
    let Label::Level { slot, a, exps, mask, .. } = label else {
        return Err(Error::DimensionMismatch(format!("{label} is not a positive-level generator")));
    };
    let v = monomial_form(&k, *a, exps, *mask);
    let w1 = h.a.scale_int(if r % 2 == 0 { 1 } else { -1 });
    let w2 = h.b.scale_int(if n % 2 == 0 { 1 } else { -1 });
    let top = if *slot == 1 { w2.ext_d().wedge(&v)? } else { w1.ext_d().wedge(&v)? };
    if top.degree() != k.n() {
        return Err(Error::DimensionMismatch("slot forms do not reach top degree".into()));
    }
    delta(&top)
}
