//! Truncated arithmetic in `K = F_q((t_1))...((t_n))`.
//!
//! `t_n` is the outermost variable: `K` is a complete discrete valuation field
//! with prime element `t_n` and residue field `F_q((t_1))...((t_{n-1}))`.

pub mod node;
mod parse;

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::gf::{parse_field, GfElement, GfField, Raw};
use node::{Ctx, Node};

pub use parse::parse_spec;

pub const DEFAULT_PREC: i64 = 16;
pub const MAX_DIM: usize = 3;
const DEFAULT_NAMES: [&str; 3] = ["t", "u", "v"];

#[derive(Debug, PartialEq, Eq)]
pub struct TowerSpec {
    field: Arc<GfField>,
    names: Vec<String>,
    prec: Vec<i64>,
}

impl TowerSpec {
    pub fn new(field: Arc<GfField>, n: usize, prec: Option<Vec<i64>>) -> Result<Arc<TowerSpec>> {
        let names = DEFAULT_NAMES.iter().take(n).map(|s| s.to_string()).collect();
        TowerSpec::with_names(field, names, prec)
    }

    pub fn with_names(field: Arc<GfField>, names: Vec<String>, prec: Option<Vec<i64>>) -> Result<Arc<TowerSpec>> {
        let n = names.len();
        if n == 0 || n > MAX_DIM {
            return Err(Error::Unsupported(format!("tower dimension {n} outside 1..=3")));
        }
        let prec = prec.unwrap_or_else(|| vec![DEFAULT_PREC; n]);
        if prec.len() != n || prec.iter().any(|&p| p < 1) {
            return Err(Error::Unsupported(format!("need {n} positive precision caps")));
        }
        for (i, a) in names.iter().enumerate() {
            if a == "w" || !a.chars().all(|c| c.is_ascii_alphabetic()) || names[..i].contains(a) {
                return Err(Error::Unsupported(format!("bad variable name '{a}'")));
            }
        }
        Ok(Arc::new(TowerSpec { field, names, prec }))
    }

    /// The residue tower `k_{n-1}`; dimension 0 means the base field itself.
    pub fn residue(&self) -> Arc<TowerSpec> {
        let n = self.n();
        Arc::new(TowerSpec {
            field: self.field.clone(),
            names: self.names[..n - 1].to_vec(),
            prec: self.prec[..n - 1].to_vec(),
        })
    }

    /// Same field and names with different precision caps.
    pub fn with_prec(&self, prec: Vec<i64>) -> Result<Arc<TowerSpec>> {
        TowerSpec::with_names(self.field.clone(), self.names.clone(), Some(prec))
    }

    pub fn field(&self) -> &Arc<GfField> {
        &self.field
    }
    pub fn p(&self) -> u32 {
        self.field.p()
    }
    pub fn n(&self) -> usize {
        self.names.len()
    }
    pub fn names(&self) -> &[String] {
        &self.names
    }
    /// Precision caps `P_1..P_n` (innermost first).
    pub fn prec(&self) -> &[i64] {
        &self.prec
    }
    pub(crate) fn ctx(&self) -> Ctx<'_> {
        Ctx { k: &self.field, caps: &self.prec }
    }
}

impl fmt::Display for TowerSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let (p, d) = (self.field.p(), self.field.degree());
        if d == 1 {
            write!(f, "F({p})")?;
        } else {
            write!(f, "F({p}^{d})")?;
        }
        for name in &self.names {
            write!(f, "(({name}))")?;
        }
        if !self.names.is_empty() {
            let caps: Vec<String> = self.prec.iter().map(|c| c.to_string()).collect();
            write!(f, "@prec={}", caps.join(","))?;
        }
        Ok(())
    }
}

/// An element of the tower field together with its known region.
#[derive(Clone)]
pub struct TowerElement {
    spec: Arc<TowerSpec>,
    node: Node,
}

/// Result of [`TowerElement::p_residue_class`].
#[derive(Clone, Debug)]
pub struct PResidueClass {
    /// `v_i mod p`, innermost variable first.
    pub exponents: Vec<u32>,
    pub one_unit: TowerElement,
    /// Leading scalar; always a `p`-th power since the base field is perfect.
    pub scalar: GfElement,
}

impl TowerElement {
    pub fn from_node(spec: &Arc<TowerSpec>, node: Node) -> TowerElement {
        TowerElement { spec: spec.clone(), node }
    }
    pub fn zero(spec: &Arc<TowerSpec>) -> TowerElement {
        TowerElement::from_node(spec, Node::zero(spec.n()))
    }
    pub fn one(spec: &Arc<TowerSpec>) -> TowerElement {
        TowerElement::constant(spec, 1)
    }
    pub fn constant(spec: &Arc<TowerSpec>, c: Raw) -> TowerElement {
        TowerElement::from_node(spec, Node::constant(spec.n(), c))
    }
    pub fn from_int(spec: &Arc<TowerSpec>, c: i64) -> TowerElement {
        TowerElement::constant(spec, spec.field.from_int(c))
    }
    /// `c * t_1^{e_1} ... t_n^{e_n}`.
    pub fn monomial(spec: &Arc<TowerSpec>, exps: &[i64], c: Raw) -> TowerElement {
        assert_eq!(exps.len(), spec.n());
        TowerElement::from_node(spec, Node::monomial(exps, c))
    }
    /// The variable `t_i` (1-based).
    pub fn var(spec: &Arc<TowerSpec>, i: usize) -> TowerElement {
        let mut e = vec![0; spec.n()];
        e[i - 1] = 1;
        TowerElement::monomial(spec, &e, 1)
    }
    pub fn parse(spec: &Arc<TowerSpec>, text: &str) -> Result<TowerElement> {
        parse::parse_element(spec, text)
    }

    pub fn spec(&self) -> &Arc<TowerSpec> {
        &self.spec
    }
    pub fn node(&self) -> &Node {
        &self.node
    }
    pub fn into_node(self) -> Node {
        self.node
    }
    pub fn field(&self) -> &Arc<GfField> {
        &self.spec.field
    }

    pub fn is_exact(&self) -> bool {
        self.node.is_exact()
    }
    pub fn is_exact_zero(&self) -> bool {
        self.node.is_exact_zero()
    }
    pub fn is_known_zero(&self) -> bool {
        self.node.is_known_zero()
    }

    fn check(&self, other: &TowerElement) -> Result<()> {
        if self.spec == other.spec {
            Ok(())
        } else {
            Err(Error::SpecMismatch)
        }
    }

    pub fn try_add(&self, other: &TowerElement) -> Result<TowerElement> {
        self.check(other)?;
        Ok(TowerElement::from_node(&self.spec, self.node.add(&other.node, &self.spec.field)))
    }
    pub fn try_sub(&self, other: &TowerElement) -> Result<TowerElement> {
        self.check(other)?;
        Ok(TowerElement::from_node(&self.spec, self.node.sub(&other.node, &self.spec.field)))
    }
    pub fn try_mul(&self, other: &TowerElement) -> Result<TowerElement> {
        self.check(other)?;
        Ok(TowerElement::from_node(&self.spec, self.node.mul(&other.node, &self.spec.field)))
    }
    pub fn try_div(&self, other: &TowerElement) -> Result<TowerElement> {
        self.check(other)?;
        let inv = other.inverse()?;
        let out = self.try_mul(&inv)?;
        if !self.is_known_zero() && out.is_known_zero() {
            return Err(Error::precision("quotient has no known coefficients"));
        }
        Ok(out)
    }

    pub fn inverse(&self) -> Result<TowerElement> {
        let ctx = self.spec.ctx();
        Ok(TowerElement::from_node(&self.spec, self.node.inverse(ctx, self.spec.n())?))
    }

    pub fn scale(&self, c: Raw) -> TowerElement {
        TowerElement::from_node(&self.spec, self.node.scale(c, &self.spec.field))
    }

    pub fn pow(&self, e: i64) -> Result<TowerElement> {
        if e >= 0 {
            Ok(TowerElement::from_node(&self.spec, self.node.pow(e as u64, &self.spec.field, self.spec.n())))
        } else {
            self.inverse()?.pow(-e)
        }
    }

    /// `x -> x^p`, computed monomial-wise.
    pub fn frobenius(&self) -> TowerElement {
        TowerElement::from_node(&self.spec, self.node.frobenius(&self.spec.field))
    }

    /// Multiplies by `t_n^k`.
    pub fn shift_outer(&self, k: i64) -> TowerElement {
        TowerElement::from_node(&self.spec, self.node.shift(k))
    }

    /// Coefficient at `exps` (innermost first); `None` outside the known region.
    pub fn coeff(&self, exps: &[i64]) -> Option<GfElement> {
        self.node.coeff(exps).map(|c| GfElement::new(&self.spec.field, c))
    }

    /// Known nonzero monomials, innermost exponent first.
    pub fn terms(&self) -> Vec<(Vec<i64>, Raw)> {
        let mut out = Vec::new();
        self.node.for_each_term(&mut |e, c| out.push((e.to_vec(), c)));
        out
    }

    /// Lexicographic rank-n valuation `(v_n, ..., v_1)`.
    pub fn valuation(&self) -> Result<Vec<i64>> {
        self.node.valuation()
    }

    /// Outer (`t_n`-adic) valuation.
    pub fn outer_valuation(&self) -> Result<i64> {
        Ok(self.valuation()?[0])
    }

    /// `x = t_n^m * u` with `u` a unit of the valuation ring.
    pub fn unit_decompose(&self) -> Result<(i64, TowerElement)> {
        let m = self.outer_valuation()?;
        Ok((m, self.shift_outer(-m)))
    }

    /// Constant term in `t_n`, as an element of the residue tower.
    pub fn residue_reduce(&self) -> Result<TowerElement> {
        let res = self.spec.residue();
        if res.n() == 0 {
            return Err(Error::Unsupported("residue of a 1-dimensional tower is a base-field scalar; use residue_scalar".into()));
        }
        let inner = self.outer_coefficient(0)?;
        Ok(TowerElement::from_node(&res, inner))
    }

    /// Residue of a 1-dimensional element.
    pub fn residue_scalar(&self) -> Result<GfElement> {
        let inner = self.outer_coefficient(0)?;
        match inner {
            Node::Scalar(c) => Ok(GfElement::new(&self.spec.field, c)),
            _ => Err(Error::Unsupported("residue is not a scalar".into())),
        }
    }

    /// Coefficient node of `t_n^j`; fails for negative valuation when `j == 0`.
    pub(crate) fn outer_coefficient(&self, j: i64) -> Result<Node> {
        match &self.node {
            Node::Series { terms, prec } => {
                if j == 0 {
                    if let Some((&e, _)) = terms.iter().next() {
                        if e < 0 {
                            return Err(Error::NegativeValuation);
                        }
                    } else if *prec <= 0 {
                        return Err(Error::precision("residue outside known region"));
                    }
                }
                if j >= *prec {
                    return Err(Error::precision(format!("coefficient of t_n^{j} is unknown")));
                }
                Ok(terms.get(&j).cloned().unwrap_or_else(|| Node::zero(self.spec.n() - 1)))
            }
            Node::Scalar(_) => unreachable!("tower elements have depth >= 1"),
        }
    }

    /// Lifts a residue-tower element to `t_n^0` (constant-coefficient lift).
    pub fn lift_residue(spec: &Arc<TowerSpec>, residue: &Node) -> TowerElement {
        TowerElement::from_node(spec, residue.clone().embed())
    }

    /// Decomposes `x` modulo `p`-th powers as `t^s * c * one_unit` with no
    /// monomial of `one_unit - 1` having all exponents divisible by `p`.
    pub fn p_residue_class(&self) -> Result<PResidueClass> {
        let spec = &self.spec;
        let p = spec.p() as i64;
        let v = self.valuation()?; // outermost first
        let c = self.node.leading_scalar()?;
        let exps: Vec<i64> = v.iter().rev().copied().collect();
        let lead = TowerElement::monomial(spec, &exps, c);
        let mut unit = self.try_div(&lead)?;
        let mut guard = 0usize;
        loop {
            guard += 1;
            if guard > 10_000 {
                return Err(Error::precision("p-residue reduction did not terminate"));
            }
            // smallest monomial with all exponents divisible by p
            let cand = unit
                .terms()
                .into_iter()
                .filter(|(e, _)| e.iter().any(|&x| x != 0) && e.iter().all(|x| x.rem_euclid(p) == 0))
                .min_by(|a, b| {
                    let ka: Vec<i64> = a.0.iter().rev().copied().collect();
                    let kb: Vec<i64> = b.0.iter().rev().copied().collect();
                    ka.cmp(&kb)
                });
            match cand {
                None => break,
                Some((e, coef)) => {
                    let m = TowerElement::monomial(spec, &e, coef);
                    let factor = TowerElement::one(spec).try_add(&m)?;
                    unit = unit.try_div(&factor)?;
                }
            }
        }
        Ok(PResidueClass {
            exponents: exps.iter().map(|e| e.rem_euclid(p) as u32).collect(),
            one_unit: unit,
            scalar: GfElement::new(&spec.field, c),
        })
    }

    /// Smallest precision seen at each variable, innermost first.
    pub fn precision_summary(&self) -> Vec<i64> {
        let mut v = self.node.min_precisions(self.spec.n());
        v.reverse();
        v
    }

    /// Renders the known part as an expression; an unknown tail is shown as
    /// `O(...)` terms which the parser does not accept.
    pub fn to_expr(&self) -> String {
        let s = self.known_expr();
        let recs = self.node.precision_records();
        if recs.is_empty() {
            s
        } else {
            let tails: Vec<String> = recs.iter().map(|(path, h)| self.big_o(path, *h)).collect();
            format!("{s} + {}", tails.join(" + "))
        }
    }

    fn big_o(&self, path: &[i64], h: i64) -> String {
        let n = self.spec.n();
        let mut parts = Vec::new();
        for (i, e) in path.iter().enumerate() {
            parts.push(format!("{}^{}", self.spec.names[n - 1 - i], e));
        }
        parts.push(format!("{}^{}", self.spec.names[n - 1 - path.len()], h));
        format!("O({})", parts.join("*"))
    }

    /// Exact known part rendered as a sum of monomials (parser-compatible).
    pub fn known_expr(&self) -> String {
        let mut terms = self.terms();
        if terms.is_empty() {
            return "0".into();
        }
        terms.sort_by(|a, b| {
            let ka: Vec<i64> = a.0.iter().rev().copied().collect();
            let kb: Vec<i64> = b.0.iter().rev().copied().collect();
            ka.cmp(&kb)
        });
        let k = &self.spec.field;
        let parts: Vec<String> = terms
            .iter()
            .map(|(e, c)| {
                let mut factors = Vec::new();
                let cs = k.format(*c);
                let all_zero = e.iter().all(|&x| x == 0);
                if *c != 1 || all_zero {
                    if cs.contains('+') && !all_zero {
                        factors.push(format!("({cs})"));
                    } else {
                        factors.push(cs);
                    }
                }
                for (i, &x) in e.iter().enumerate() {
                    match x {
                        0 => {}
                        1 => factors.push(self.spec.names[i].clone()),
                        _ => factors.push(format!("{}^{}", self.spec.names[i], x)),
                    }
                }
                factors.join("*")
            })
            .collect();
        parts.join(" + ")
    }

    pub fn to_json(&self) -> Value {
        let coeffs: Vec<Value> = self
            .terms()
            .into_iter()
            .map(|(e, c)| json!([e, self.spec.field.format(c)]))
            .collect();
        let window: Vec<Value> = self.node.precision_records().into_iter().map(|(p, h)| json!([p, h])).collect();
        json!({ "spec": self.spec.to_string(), "coeffs": coeffs, "window": window })
    }

    pub fn from_json(value: &Value) -> Result<TowerElement> {
        let raw: ElementJson = serde_json::from_value(value.clone()).map_err(|e| Error::Json(e.to_string()))?;
        let spec = parse_spec(&raw.spec, None)?;
        let n = spec.n();
        let mut node = Node::zero(n);
        for (e, c) in &raw.coeffs {
            if e.len() != n {
                return Err(Error::Json(format!("exponent {e:?} has wrong length")));
            }
            let c = spec.field.parse(c)?;
            node = node.add(&Node::monomial(e, c), &spec.field);
        }
        // apply precisions outermost-first so truncation respects nesting
        let mut recs = raw.window.clone();
        recs.sort_by_key(|(p, _)| p.len());
        for (path, h) in recs {
            if path.len() >= n {
                return Err(Error::Json("precision path too long".into()));
            }
            node.set_precision(&path, h);
        }
        Ok(TowerElement::from_node(&spec, node))
    }
}

#[derive(Serialize, Deserialize)]
struct ElementJson {
    spec: String,
    coeffs: Vec<(Vec<i64>, String)>,
    #[serde(default)]
    window: Vec<(Vec<i64>, i64)>,
}

impl PartialEq for TowerElement {
    /// Structural equality: same spec, same known terms, same precision.
    fn eq(&self, other: &Self) -> bool {
        self.spec == other.spec && self.node == other.node
    }
}

impl fmt::Debug for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}
impl fmt::Display for TowerElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.to_expr())
    }
}

macro_rules! tower_binop {
    ($tr:ident, $m:ident, $try:ident) => {
        impl $tr for &TowerElement {
            type Output = TowerElement;
            /// Panics when the operands live over different towers.
            fn $m(self, rhs: &TowerElement) -> TowerElement {
                self.$try(rhs).expect("tower spec mismatch")
            }
        }
        impl $tr for TowerElement {
            type Output = TowerElement;
            fn $m(self, rhs: TowerElement) -> TowerElement {
                (&self).$m(&rhs)
            }
        }
    };
}
tower_binop!(Add, add, try_add);
tower_binop!(Sub, sub, try_sub);
tower_binop!(Mul, mul, try_mul);

impl Neg for &TowerElement {
    type Output = TowerElement;
    fn neg(self) -> TowerElement {
        TowerElement::from_node(&self.spec, self.node.neg(&self.spec.field))
    }
}
impl Neg for TowerElement {
    type Output = TowerElement;
    fn neg(self) -> TowerElement {
        -&self
    }
}

/// True when every known coefficient of `a - b` vanishes.
pub fn agree(a: &TowerElement, b: &TowerElement) -> bool {
    (a - b).is_known_zero()
}

pub(crate) fn field_of(text: &str) -> Result<Arc<GfField>> {
    parse_field(text)
}
