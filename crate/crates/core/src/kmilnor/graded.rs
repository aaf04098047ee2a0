//! Graded coordinates of `K_q(K)/(p, U_N)`.
//!
//! Write `k` for the residue tower and `pi = t_n`. A logarithmic form
//! `omega = dlog(xi)` has coefficients in `O_K`; its `pi^i` part is
//! `alpha_i + beta_i ∧ dlog pi` with `alpha_i`, `beta_i` forms over `k`.
//!
//! * `i = 0`: `(alpha_0, beta_0)` are logarithmic over `k` and are decomposed
//!   recursively (`K_q(k) ⊕ K_{q-1}(k)`).
//! * `p ∤ i`: the generator `{1 + x pi^i, t_S}` contributes
//!   `alpha = d(x dlog t_S)` and `beta = (-1)^{q-1} i x dlog t_S`, so the
//!   coordinate is `eta = (-1)^{q-1} beta_i / i` in `Omega^{q-1}_k`.
//! * `p | i`: `{1 + x pi^i, t_S}` contributes `alpha = d(x dlog t_S)` and
//!   `{1 + x pi^i, t_S, pi}` contributes `beta = d(x dlog t_S)`; coordinates
//!   are canonical primitives of `alpha_i` and `beta_i` modulo closed forms.
//!
//! After reading level `i` the generators are subtracted from `omega`, which
//! makes the coordinates additive.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use serde_json::{json, Value};

use super::KClass;
use crate::error::{Error, Result};
use crate::forms::{mask_indices, mask_of, wedge_sign, Mask, QForm};
use crate::tower::node::EXACT;
use crate::tower::{TowerElement, TowerSpec};

/// Generator labels. Every label names a fixed symbol (see [`generator`]).
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Label {
    /// The class `1` in `K_0` of the finite base field.
    Unit,
    /// A generator of the residue tower, lifted; slot 2 appends `pi`.
    Gr0 { slot: u8, inner: Box<Label> },
    /// `{1 + w^a T^E pi^i, t_S}` (slot 1) or `{1 + w^a T^E pi^i, t_S, pi}` (slot 2).
    Level { i: i64, slot: u8, a: u32, exps: Vec<i64>, mask: Mask },
}

impl Label {
    /// Filtration level of the generator (0 for residue generators).
    pub fn level(&self) -> i64 {
        match self {
            Label::Level { i, .. } => *i,
            _ => 0,
        }
    }
}

impl fmt::Display for Label {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Label::Unit => write!(f, "1"),
            Label::Gr0 { slot, inner } => write!(f, "gr0.{slot}({inner})"),
            Label::Level { i, slot, a, exps, mask } => {
                let e: Vec<String> = exps.iter().map(|x| x.to_string()).collect();
                let s: Vec<String> = mask_indices(*mask).iter().map(|x| x.to_string()).collect();
                write!(f, "U{i}.{slot}[w^{a};T({});S({})]", e.join(","), s.join(","))
            }
        }
    }
}

pub type Coords = BTreeMap<Label, u32>;

/// The symbol named by `label`, as a list of entries over `spec`.
pub fn generator(spec: &Arc<TowerSpec>, label: &Label) -> Result<Vec<TowerElement>> {
    let n = spec.n();
    match label {
        Label::Unit => {
            if n == 0 {
                Ok(Vec::new())
            } else {
                Err(Error::Unsupported("the unit label lives over the finite base field".into()))
            }
        }
        Label::Gr0 { slot, inner } => {
            if n == 0 {
                return Err(Error::Unsupported("residue label over the finite base field".into()));
            }
            let k = spec.residue();
            let mut out: Vec<TowerElement> =
                generator(&k, inner)?.iter().map(|z| TowerElement::lift_residue(spec, z.node())).collect();
            if *slot == 2 {
                out.push(TowerElement::var(spec, n));
            }
            Ok(out)
        }
        Label::Level { i, slot, a, exps, mask } => {
            if n == 0 || exps.len() != n - 1 {
                return Err(Error::Unsupported(format!("label {label} does not fit {spec}")));
            }
            let k = spec.field();
            let c = k.pow(k.generator(), *a as i64).unwrap();
            let mut e = exps.clone();
            e.push(*i);
            let first = &TowerElement::one(spec) + &TowerElement::monomial(spec, &e, c);
            let mut out = vec![first];
            out.extend(mask_indices(*mask).into_iter().map(|s| TowerElement::var(spec, s)));
            if *slot == 2 {
                out.push(TowerElement::var(spec, n));
            }
            Ok(out)
        }
    }
}

/// Exponent vectors in `[-window, window]^d`.
pub fn exponent_box(d: usize, window: i64) -> Vec<Vec<i64>> {
    let mut out = vec![Vec::new()];
    for _ in 0..d {
        out = out
            .into_iter()
            .flat_map(|e| (-window..=window).map(move |x| {
                let mut e = e.clone();
                e.push(x);
                e
            }))
            .collect();
    }
    out
}

/// First index (0-based) with `p ∤ e_j`.
pub fn first_unit_index(e: &[i64], p: i64) -> Option<usize> {
    e.iter().position(|x| x.rem_euclid(p) != 0)
}

/// Generator labels of `gr_i K_q(K)/p` with inner exponents in the window;
/// `i = 0` recurses into the residue tower with cap `window`.
pub fn level_labels(spec: &Arc<TowerSpec>, q: usize, i: i64, window: i64) -> Vec<Label> {
    let n = spec.n();
    if n == 0 {
        return if q == 0 && i == 0 { vec![Label::Unit] } else { Vec::new() };
    }
    let k = spec.residue();
    if i == 0 {
        let mut out: Vec<Label> =
            labels_below(&k, q, window, window).into_iter().map(|l| Label::Gr0 { slot: 1, inner: Box::new(l) }).collect();
        if q >= 1 {
            out.extend(labels_below(&k, q - 1, window, window).into_iter().map(|l| Label::Gr0 { slot: 2, inner: Box::new(l) }));
        }
        return out;
    }
    if q == 0 {
        return Vec::new();
    }
    let p = spec.p() as i64;
    let f = spec.field().degree();
    let mut out = Vec::new();
    for exps in exponent_box(n - 1, window) {
        let mut push = |slot: u8, mask: Mask| {
            for a in 0..f {
                out.push(Label::Level { i, slot, a, exps: exps.clone(), mask });
            }
        };
        if i % p != 0 {
            for m in crate::forms::masks(n - 1, q - 1) {
                push(1, m);
            }
        } else if let Some(j) = first_unit_index(&exps, p) {
            for m in crate::forms::masks(n - 1, q - 1).into_iter().filter(|m| m >> j & 1 == 0) {
                push(1, m);
            }
            if q >= 2 {
                for m in crate::forms::masks(n - 1, q - 2).into_iter().filter(|m| m >> j & 1 == 0) {
                    push(2, m);
                }
            }
        }
    }
    out
}

/// Generator labels of `K_q(K)/(p, U_cap)` (levels `0..cap`) in the window.
pub fn labels_below(spec: &Arc<TowerSpec>, q: usize, cap: i64, window: i64) -> Vec<Label> {
    let top = if spec.n() == 0 { 1 } else { cap.max(1) };
    (0..top).flat_map(|i| level_labels(spec, q, i, window)).collect()
}

/// The `pi^i` part of a form over `K` as `(alpha, beta)` over the residue tower.
pub(crate) fn split(w: &QForm, i: i64) -> Result<(QForm, QForm)> {
    let spec = w.spec();
    let n = spec.n();
    let k = spec.residue();
    let top: Mask = 1 << (n - 1);
    let q = w.degree();
    let mut a = QForm::zero(&k, q);
    let mut b = QForm::zero(&k, q.saturating_sub(1));
    for (m, f) in w.terms() {
        let g = TowerElement::from_node(&k, f.outer_coefficient(i)?);
        if m & top != 0 {
            b.push_term(m & !top, g);
        } else {
            a.push_term(*m, g);
        }
    }
    Ok((a, b))
}

/// `pi^i (lift(alpha) + lift(beta) ∧ dlog pi)`.
pub(crate) fn lift(spec: &Arc<TowerSpec>, a: &QForm, b: &QForm, i: i64) -> QForm {
    let n = spec.n();
    let top: Mask = 1 << (n - 1);
    let mut out = QForm::zero(spec, a.degree());
    let up = |f: &TowerElement| TowerElement::lift_residue(spec, f.node()).shift_outer(i);
    for (m, f) in a.terms() {
        out.push_term(*m, up(f));
    }
    for (m, f) in b.terms() {
        out.push_term(m | top, up(f));
    }
    out
}

/// Smallest outer precision among the coefficients.
fn outer_known(w: &QForm) -> i64 {
    w.terms().values().map(|f| f.node().prec()).min().unwrap_or(EXACT)
}

fn inconsistent(what: &str) -> Error {
    Error::InternalInconsistency(format!("form is not logarithmic: {what}"))
}

/// Canonical primitive of an exact form: on the `T^E` part, with `j` the
/// first index where `p ∤ e_j`, returns `iota_j(alpha_E) / e_j`.
pub(crate) fn d_inverse(a: &QForm) -> Result<Option<QForm>> {
    let spec = a.spec();
    let k = spec.field();
    let p = spec.p() as i64;
    if a.degree() == 0 {
        return if a.is_known_zero() { Ok(None) } else { Err(inconsistent("nonzero exact 0-form")) };
    }
    let mut out = QForm::zero(spec, a.degree() - 1);
    for (m, f) in a.terms() {
        for (e, c) in f.terms() {
            let j = e
                .iter()
                .position(|x| x.rem_euclid(p) != 0)
                .ok_or_else(|| inconsistent("closed monomial in an exact form"))?;
            let bit: Mask = 1 << j;
            if m & bit == 0 {
                continue;
            }
            let before = mask_indices(*m).iter().filter(|&&s| s < j + 1).count();
            let mut coef = k.mul(c, k.inv(k.from_int(e[j])).unwrap());
            if before % 2 == 1 {
                coef = k.neg(coef);
            }
            out.push_term(m & !bit, TowerElement::monomial(spec, &e, coef));
        }
    }
    if !out.ext_d().sub(a)?.is_known_zero() {
        return Err(inconsistent("graded piece is not exact"));
    }
    Ok(Some(out))
}

fn monomial_labels(w: &QForm, i: i64, slot: u8, out: &mut Vec<(Label, u32)>) {
    let k = w.spec().field();
    for (m, f) in w.terms() {
        for (e, c) in f.terms() {
            for (a, &v) in k.coeffs(c).iter().enumerate() {
                if v != 0 {
                    out.push((Label::Level { i, slot, a: a as u32, exps: e.clone(), mask: *m }, v));
                }
            }
        }
    }
}

/// Coordinates of a logarithmic form modulo `U_cap`. With `strict`, missing
/// precision below the cap is an error; otherwise the cap shrinks to what is
/// known and the effective cap is returned.
pub fn coordinates(w: &QForm, cap: i64, strict: bool) -> Result<(Coords, i64)> {
    let spec = w.spec();
    let n = spec.n();
    let q = w.degree();
    let field = spec.field();
    let mut out = Coords::new();
    if n == 0 {
        if q == 0 {
            let c = w.coeff(0).coeff(&[]).unwrap().raw();
            let v = field.as_prime(c).ok_or_else(|| inconsistent("degree-0 scalar outside F_p"))?;
            if v != 0 {
                out.insert(Label::Unit, v);
            }
        }
        return Ok((out, 0));
    }
    let k = spec.residue();
    let p = spec.p() as i64;

    let (a0, b0) = split(w, 0)?;
    // everything known about the residue parts is decomposed
    let inner_cap = |f: &QForm| {
        if k.n() == 0 {
            return 0;
        }
        match outer_known(f) {
            EXACT => {
                let top = f.terms().values().flat_map(|g| g.terms()).map(|(e, _)| e[e.len() - 1] + 1).max().unwrap_or(0);
                top.max(k.prec()[k.n() - 1])
            }
            known => known,
        }
    };
    let (ca, _) = coordinates(&a0, inner_cap(&a0), false)?;
    for (l, v) in ca {
        out.insert(Label::Gr0 { slot: 1, inner: Box::new(l) }, v);
    }
    if q >= 1 {
        let (cb, _) = coordinates(&b0, inner_cap(&b0), false)?;
        for (l, v) in cb {
            out.insert(Label::Gr0 { slot: 2, inner: Box::new(l) }, v);
        }
    }
    let mut rem = w.sub(&lift(spec, &a0, &b0, 0))?;
    let known = outer_known(&rem);
    let cap = if strict {
        if known < cap {
            return Err(Error::precision(format!("form known only below t_n^{known}, level cap is {cap}")));
        }
        cap
    } else {
        cap.min(known)
    };
    for i in 1..cap {
        let (a, b) = split(&rem, i)?;
        if a.is_known_zero() && b.is_known_zero() {
            continue;
        }
        if q == 0 {
            return Err(inconsistent("degree-0 form with positive-level part"));
        }
        let mut level = Vec::new();
        if i % p != 0 {
            let sign = if (q - 1) % 2 == 0 { 1 } else { -1 };
            let s = field.mul(field.from_int(sign), field.inv(field.from_int(i)).unwrap());
            let eta = b.map(|f| f.scale(s));
            if !eta.ext_d().sub(&a)?.is_known_zero() {
                return Err(inconsistent(&format!("level {i} parts do not match")));
            }
            monomial_labels(&eta, i, 1, &mut level);
        } else {
            if let Some(w1) = d_inverse(&a)? {
                monomial_labels(&w1, i, 1, &mut level);
            }
            if let Some(w2) = d_inverse(&b)? {
                monomial_labels(&w2, i, 2, &mut level);
            }
        }
        for (label, v) in level {
            let g = QForm::dlog_wedge(spec, &generator(spec, &label)?)?;
            rem = rem.sub(&g.scale_int(v as i64))?;
            out.insert(label, v);
        }
        if i % p != 0 {
            // the exact part a = dη is often known further out than b
            for _ in 0..8 {
                let (a, _) = split(&rem, i)?;
                let Some(extra) = eta_from_exact_part(&a, p)? else { break };
                let mut more = Vec::new();
                monomial_labels(&extra, i, 1, &mut more);
                for (label, v) in more {
                    let g = QForm::dlog_wedge(spec, &generator(spec, &label)?)?;
                    rem = rem.sub(&g.scale_int(v as i64))?;
                    let e = out.entry(label.clone()).or_insert(0);
                    *e = (*e + v) % p as u32;
                    if *e == 0 {
                        out.remove(&label);
                    }
                }
            }
        }
    }
    Ok((out, cap))
}

/// Known monomials of `η` recovered from known monomials of `a = dη`:
/// `c t^e ω_M` comes from `c / (s e_j) t^e ω_{M - j}` for `j ∈ M`, `p ∤ e_j`.
fn eta_from_exact_part(a: &QForm, p: i64) -> Result<Option<QForm>> {
    let k = a.spec();
    let field = k.field();
    let q = a.degree();
    if q == 0 {
        return Ok(None);
    }
    let mut seen = std::collections::BTreeSet::new();
    let mut terms = Vec::new();
    for (m, f) in a.terms() {
        for (e, c) in f.terms() {
            let Some(j) = mask_indices(*m).into_iter().find(|&j| e[j - 1].rem_euclid(p) != 0) else {
                return Err(inconsistent("exact part has a monomial killed by d"));
            };
            let rest = *m & !mask_of(&[j]);
            if !seen.insert((e.clone(), rest)) {
                continue;
            }
            let s = wedge_sign(mask_of(&[j]), rest).unwrap();
            let coef = field.mul(c, field.inv(field.from_int(s * e[j - 1])).unwrap());
            terms.push((rest, TowerElement::monomial(k, &e, coef)));
        }
    }
    if terms.is_empty() {
        return Ok(None);
    }
    let mut eta = QForm::zero(k, q - 1);
    for (m, f) in terms {
        eta.push_term(m, f);
    }
    Ok(Some(eta))
}

/// Graded pieces of a class modulo `U_N`.
#[derive(Clone, Debug)]
pub struct GradedDecomposition {
    pub spec: Arc<TowerSpec>,
    pub q: usize,
    pub level_cap: i64,
    pub coords: Coords,
    /// `(K_q(k), K_{q-1}(k))` components.
    pub gr0: (KClass, Option<KClass>),
    /// Nonzero `gr_i`, `1 <= i < N`: (first slot, second slot) forms over `k`.
    pub levels: BTreeMap<i64, (QForm, Option<QForm>)>,
}

impl GradedDecomposition {
    pub fn of_form(w: &QForm, cap: i64) -> Result<GradedDecomposition> {
        let spec = w.spec().clone();
        let q = w.degree();
        let (coords, _) = coordinates(w, cap, true)?;
        GradedDecomposition::from_coords(&spec, q, cap, coords)
    }

    pub fn from_coords(spec: &Arc<TowerSpec>, q: usize, cap: i64, coords: Coords) -> Result<GradedDecomposition> {
        let k = spec.residue();
        let field = spec.field();
        let mut first = KClass::zero(&k, q);
        let mut second = if q >= 1 { Some(KClass::zero(&k, q - 1)) } else { None };
        let mut levels: BTreeMap<i64, (QForm, Option<QForm>)> = BTreeMap::new();
        for (label, &v) in &coords {
            match label {
                Label::Gr0 { slot, inner } => {
                    let sym = KClass::symbol(&k, generator(&k, inner)?)?.scale(v as i64);
                    if *slot == 1 {
                        first = first.add(&sym)?;
                    } else if let Some(s) = second.as_mut() {
                        *s = s.add(&sym)?;
                    }
                }
                Label::Level { i, slot, a, exps, mask } => {
                    let c = field.mul(field.from_int(v as i64), field.pow(field.generator(), *a as i64).unwrap());
                    let term = QForm::monomial(&TowerElement::monomial(&k, exps, c), *mask);
                    let entry = levels
                        .entry(*i)
                        .or_insert_with(|| (QForm::zero(&k, q - 1), if q >= 2 { Some(QForm::zero(&k, q - 2)) } else { None }));
                    if *slot == 1 {
                        entry.0 = entry.0.add(&term)?;
                    } else if let Some(s) = entry.1.as_mut() {
                        *s = s.add(&term)?;
                    }
                }
                Label::Unit => return Err(inconsistent("unit label at positive dimension")),
            }
        }
        Ok(GradedDecomposition { spec: spec.clone(), q, level_cap: cap, coords, gr0: (first, second), levels })
    }

    pub fn is_zero(&self) -> bool {
        self.coords.is_empty()
    }

    /// Smallest level with a nonzero piece, or the cap.
    pub fn u_level(&self) -> i64 {
        self.coords.keys().map(Label::level).min().unwrap_or(self.level_cap)
    }

    pub fn to_json(&self) -> Value {
        let levels: Vec<Value> = self
            .levels
            .iter()
            .map(|(i, (a, b))| {
                json!({
                    "i": i,
                    "first": a.to_string(),
                    "second": b.as_ref().map(|x| x.to_string()),
                })
            })
            .collect();
        let coords: serde_json::Map<String, Value> = self.coords.iter().map(|(l, v)| (l.to_string(), json!(v))).collect();
        json!({
            "field": self.spec.to_string(),
            "q": self.q,
            "level_cap": self.level_cap,
            "gr0": {
                "first": self.gr0.0.to_string(),
                "second": self.gr0.1.as_ref().map(|x| x.to_string()),
            },
            "levels": levels,
            "coords": coords,
        })
    }
}
