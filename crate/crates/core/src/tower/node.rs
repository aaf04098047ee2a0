//! Nested truncated Laurent series.
//!
//! A depth-`d` node is a Laurent series in `t_d` whose coefficients are
//! depth-`(d-1)` nodes; depth 0 is a scalar of the base field. Every series
//! carries an absolute precision `prec`: coefficients at exponents `< prec` are
//! represented (absent keys are exact zeros), coefficients at `>= prec` are
//! unknown. Each coefficient node carries its own precision, so the known
//! region follows the tower topology rather than a box.

use std::collections::BTreeMap;

use crate::error::{Error, Result};
use crate::gf::{GfField, Raw};

/// Precision of an exactly known series.
pub const EXACT: i64 = i64::MAX;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Node {
    Scalar(Raw),
    Series { terms: BTreeMap<i64, Node>, prec: i64 },
}

#[inline]
pub(crate) fn prec_shift(h: i64, by: i64) -> i64 {
    if h == EXACT {
        EXACT
    } else {
        h + by
    }
}

#[inline]
fn ceil_div(h: i64, p: i64) -> i64 {
    if h == EXACT {
        EXACT
    } else {
        -((-h).div_euclid(p))
    }
}

/// Arithmetic context: the base field and per-depth relative precision caps
/// (`caps[d-1]` for depth `d`) used wherever an infinite expansion is cut.
#[derive(Clone, Copy)]
pub struct Ctx<'a> {
    pub k: &'a GfField,
    pub caps: &'a [i64],
}

impl Node {
    pub fn zero(depth: usize) -> Node {
        if depth == 0 {
            Node::Scalar(0)
        } else {
            Node::Series { terms: BTreeMap::new(), prec: EXACT }
        }
    }

    /// The unknown element `O(t_d^prec)`.
    pub fn unknown(depth: usize, prec: i64) -> Node {
        assert!(depth > 0);
        Node::Series { terms: BTreeMap::new(), prec }
    }

    pub fn constant(depth: usize, c: Raw) -> Node {
        let mut e = vec![0i64; depth];
        Node::monomial_at(&mut e, depth, c)
    }

    /// `c * t_1^{e_1} ... t_d^{e_d}` with `exps[i]` the exponent of `t_{i+1}`.
    pub fn monomial(exps: &[i64], c: Raw) -> Node {
        let mut e = exps.to_vec();
        Node::monomial_at(&mut e, exps.len(), c)
    }

    fn monomial_at(exps: &mut [i64], depth: usize, c: Raw) -> Node {
        if depth == 0 {
            return Node::Scalar(c);
        }
        if c == 0 {
            return Node::zero(depth);
        }
        let inner = Node::monomial_at(exps, depth - 1, c);
        let mut terms = BTreeMap::new();
        terms.insert(exps[depth - 1], inner);
        Node::Series { terms, prec: EXACT }
    }

    /// Wraps a depth-`d` node as the `t_{d+1}^0` coefficient of a depth-`d+1` node.
    pub fn embed(self) -> Node {
        let mut terms = BTreeMap::new();
        if !self.is_exact_zero() {
            terms.insert(0, self);
        }
        Node::Series { terms, prec: EXACT }
    }

    pub fn prec(&self) -> i64 {
        match self {
            Node::Scalar(_) => EXACT,
            Node::Series { prec, .. } => *prec,
        }
    }

    pub fn is_exact_zero(&self) -> bool {
        match self {
            Node::Scalar(c) => *c == 0,
            Node::Series { terms, prec } => terms.is_empty() && *prec == EXACT,
        }
    }

    /// True when the node and all of its coefficients are exactly known.
    pub fn is_exact(&self) -> bool {
        match self {
            Node::Scalar(_) => true,
            Node::Series { terms, prec } => *prec == EXACT && terms.values().all(Node::is_exact),
        }
    }

    /// True when every known coefficient vanishes (unknown parts may remain).
    pub fn is_known_zero(&self) -> bool {
        match self {
            Node::Scalar(c) => *c == 0,
            Node::Series { terms, .. } => terms.values().all(Node::is_known_zero),
        }
    }

    pub fn terms(&self) -> Option<&BTreeMap<i64, Node>> {
        match self {
            Node::Scalar(_) => None,
            Node::Series { terms, .. } => Some(terms),
        }
    }

    /// Smallest exponent that may carry a nonzero coefficient.
    pub fn lower_bound(&self) -> i64 {
        match self {
            Node::Scalar(c) => {
                if *c == 0 {
                    EXACT
                } else {
                    0
                }
            }
            Node::Series { terms, prec } => terms.keys().next().copied().unwrap_or(*prec),
        }
    }

    fn clean(mut terms: BTreeMap<i64, Node>, prec: i64) -> Node {
        terms.retain(|&k, v| k < prec && !v.is_exact_zero());
        Node::Series { terms, prec }
    }

    pub fn truncate(&self, new_prec: i64) -> Node {
        match self {
            Node::Scalar(_) => self.clone(),
            Node::Series { terms, prec } => {
                let h = (*prec).min(new_prec);
                Node::Series { terms: terms.range(..h).map(|(k, v)| (*k, v.clone())).collect(), prec: h }
            }
        }
    }

    /// Multiplies by `t_d^k` at the top level.
    pub fn shift(&self, k: i64) -> Node {
        match self {
            Node::Scalar(_) => self.clone(),
            Node::Series { terms, prec } => Node::Series {
                terms: terms.iter().map(|(e, v)| (e + k, v.clone())).collect(),
                prec: prec_shift(*prec, k),
            },
        }
    }

    pub fn add(&self, other: &Node, k: &GfField) -> Node {
        match (self, other) {
            (Node::Scalar(a), Node::Scalar(b)) => Node::Scalar(k.add(*a, *b)),
            (Node::Series { terms: ta, prec: ha }, Node::Series { terms: tb, prec: hb }) => {
                let h = (*ha).min(*hb);
                let mut out: BTreeMap<i64, Node> = ta.range(..h).map(|(e, v)| (*e, v.clone())).collect();
                for (e, v) in tb.range(..h) {
                    match out.get_mut(e) {
                        Some(x) => *x = x.add(v, k),
                        None => {
                            out.insert(*e, v.clone());
                        }
                    }
                }
                Node::clean(out, h)
            }
            _ => panic!("depth mismatch in add"),
        }
    }

    pub fn neg(&self, k: &GfField) -> Node {
        self.map_scalars(&|c| k.neg(c))
    }

    pub fn sub(&self, other: &Node, k: &GfField) -> Node {
        self.add(&other.neg(k), k)
    }

    pub fn scale(&self, c: Raw, k: &GfField) -> Node {
        if c == 0 {
            return self.zero_like();
        }
        self.map_scalars(&|x| k.mul(x, c))
    }

    /// Exact zero at the depth of `self`, keeping no precision information.
    fn zero_like(&self) -> Node {
        match self {
            Node::Scalar(_) => Node::Scalar(0),
            Node::Series { .. } => Node::Series { terms: BTreeMap::new(), prec: EXACT },
        }
    }

    /// Applies a map to every scalar; zero results are pruned when exact.
    pub fn map_scalars(&self, f: &dyn Fn(Raw) -> Raw) -> Node {
        match self {
            Node::Scalar(c) => Node::Scalar(f(*c)),
            Node::Series { terms, prec } => {
                Node::clean(terms.iter().map(|(e, v)| (*e, v.map_scalars(f))).collect(), *prec)
            }
        }
    }

    pub fn mul(&self, other: &Node, k: &GfField) -> Node {
        match (self, other) {
            (Node::Scalar(a), Node::Scalar(b)) => Node::Scalar(k.mul(*a, *b)),
            (Node::Series { terms: ta, prec: ha }, Node::Series { terms: tb, prec: hb }) => {
                if self.is_exact_zero() || other.is_exact_zero() {
                    return self.zero_like();
                }
                let va = self.lower_bound();
                let vb = other.lower_bound();
                let h = prec_shift(*ha, vb).min(prec_shift(*hb, va));
                let mut out: BTreeMap<i64, Node> = BTreeMap::new();
                for (i, x) in ta {
                    for (j, y) in tb {
                        let e = i + j;
                        if e >= h {
                            break;
                        }
                        let prod = x.mul(y, k);
                        match out.get_mut(&e) {
                            Some(acc) => *acc = acc.add(&prod, k),
                            None => {
                                out.insert(e, prod);
                            }
                        }
                    }
                }
                Node::clean(out, h)
            }
            _ => panic!("depth mismatch in mul"),
        }
    }

    pub fn pow(&self, e: u64, k: &GfField, depth: usize) -> Node {
        let mut result = Node::constant(depth, 1);
        let mut base = self.clone();
        let mut e = e;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base, k);
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base, k);
            }
        }
        result
    }

    /// Rank-`d` valuation, outermost exponent first.
    pub fn valuation(&self) -> Result<Vec<i64>> {
        match self {
            Node::Scalar(c) => {
                if *c == 0 {
                    Err(Error::ZeroOrUnknownLeadingTerm("zero scalar".into()))
                } else {
                    Ok(Vec::new())
                }
            }
            Node::Series { terms, .. } => {
                let (e, v) = terms
                    .iter()
                    .next()
                    .ok_or_else(|| Error::ZeroOrUnknownLeadingTerm("no known terms".into()))?;
                if v.is_known_zero() {
                    return Err(Error::ZeroOrUnknownLeadingTerm(format!("coefficient at exponent {e} is unknown")));
                }
                let mut out = vec![*e];
                out.extend(v.valuation()?);
                Ok(out)
            }
        }
    }

    /// Coefficient of the leading monomial (after [`valuation`] succeeds).
    pub fn leading_scalar(&self) -> Result<Raw> {
        match self {
            Node::Scalar(c) => Ok(*c),
            Node::Series { terms, .. } => terms
                .values()
                .next()
                .ok_or_else(|| Error::ZeroOrUnknownLeadingTerm("no known terms".into()))?
                .leading_scalar(),
        }
    }

    pub fn inverse(&self, ctx: Ctx<'_>, depth: usize) -> Result<Node> {
        match self {
            Node::Scalar(c) => ctx
                .k
                .inv(*c)
                .map(Node::Scalar)
                .ok_or_else(|| Error::ZeroOrUnknownLeadingTerm("division by zero".into())),
            Node::Series { terms, prec } => {
                let (&v, lead) = terms
                    .iter()
                    .next()
                    .ok_or_else(|| Error::ZeroOrUnknownLeadingTerm("division by zero or unknown element".into()))?;
                if lead.is_known_zero() {
                    return Err(Error::ZeroOrUnknownLeadingTerm(format!(
                        "leading coefficient at exponent {v} is unknown"
                    )));
                }
                if *prec == EXACT && terms.len() == 1 {
                    // exact monomial in t_d: the inverse stays exact when the
                    // coefficient's inverse does
                    let inner = lead.inverse(ctx, depth - 1)?;
                    let mut out = BTreeMap::new();
                    out.insert(-v, inner);
                    return Ok(Node::Series { terms: out, prec: EXACT });
                }
                let cap = ctx.caps[depth - 1];
                let rel = if *prec == EXACT { cap } else { cap.min(prec - v) };
                if rel <= 0 {
                    return Err(Error::precision("inverse has empty window"));
                }
                let lead_inv = lead.inverse(ctx, depth - 1)?;
                let neg_lead_inv = lead_inv.neg(ctx.k);
                // long division on the unit part u = x t^{-v}
                let unit: Vec<(i64, &Node)> = terms.iter().map(|(e, n)| (e - v, n)).take_while(|(e, _)| *e < rel).collect();
                let mut y: Vec<Node> = Vec::with_capacity(rel as usize);
                y.push(lead_inv.clone());
                for m in 1..rel {
                    let mut acc: Option<Node> = None;
                    for &(j, uj) in unit.iter().skip(1) {
                        if j > m {
                            break;
                        }
                        let prod = uj.mul(&y[(m - j) as usize], ctx.k);
                        acc = Some(match acc {
                            Some(a) => a.add(&prod, ctx.k),
                            None => prod,
                        });
                    }
                    y.push(match acc {
                        Some(a) => a.mul(&neg_lead_inv, ctx.k),
                        None => Node::zero(depth - 1),
                    });
                }
                let out: BTreeMap<i64, Node> = y.into_iter().enumerate().map(|(i, n)| (i as i64 - v, n)).collect();
                Ok(Node::clean(out, rel - v))
            }
        }
    }

    /// Multiplies every coefficient of `t_var` exponent `e` by `e` (mod p);
    /// this is the coefficient of `dlog t_var` in `d(self)`.
    pub fn log_derivative(&self, var: usize, depth: usize, k: &GfField) -> Node {
        match self {
            Node::Scalar(_) => Node::Scalar(0),
            Node::Series { terms, prec } => {
                let out = if depth == var {
                    terms.iter().map(|(e, v)| (*e, v.scale(k.from_int(*e), k))).collect()
                } else {
                    terms.iter().map(|(e, v)| (*e, v.log_derivative(var, depth - 1, k))).collect()
                };
                Node::clean(out, *prec)
            }
        }
    }

    /// Cartier map on coefficients: keeps monomials with every exponent
    /// divisible by `p`, divides exponents by `p`, takes `p`-th roots.
    pub fn cartier(&self, k: &GfField) -> Node {
        let p = k.p() as i64;
        match self {
            Node::Scalar(c) => Node::Scalar(k.pth_root(*c)),
            Node::Series { terms, prec } => {
                let out = terms
                    .iter()
                    .filter(|(e, _)| e.rem_euclid(p) == 0)
                    .map(|(e, v)| (e / p, v.cartier(k)))
                    .collect();
                Node::clean(out, ceil_div(*prec, p))
            }
        }
    }

    /// Absolute Frobenius `x -> x^p` computed monomial-wise.
    pub fn frobenius(&self, k: &GfField) -> Node {
        let p = k.p() as i64;
        match self {
            Node::Scalar(c) => Node::Scalar(k.frobenius(*c)),
            Node::Series { terms, prec } => {
                let h = if *prec == EXACT { EXACT } else { prec * p };
                Node::clean(terms.iter().map(|(e, v)| (e * p, v.frobenius(k))).collect(), h)
            }
        }
    }

    /// Coefficient at `exps` (`exps[i]` for `t_{i+1}`); `None` when unknown.
    pub fn coeff(&self, exps: &[i64]) -> Option<Raw> {
        match self {
            Node::Scalar(c) => Some(*c),
            Node::Series { terms, prec } => {
                let d = exps.len();
                let e = exps[d - 1];
                if e >= *prec {
                    return None;
                }
                match terms.get(&e) {
                    Some(n) => n.coeff(&exps[..d - 1]),
                    None => Some(0),
                }
            }
        }
    }

    /// Visits every known nonzero monomial as `(exps, c)`.
    pub fn for_each_term(&self, f: &mut dyn FnMut(&[i64], Raw)) {
        let mut buf = Vec::new();
        self.visit(&mut buf, f);
    }

    fn visit(&self, stack: &mut Vec<i64>, f: &mut dyn FnMut(&[i64], Raw)) {
        match self {
            Node::Scalar(c) => {
                if *c != 0 {
                    let exps: Vec<i64> = stack.iter().rev().copied().collect();
                    f(&exps, *c);
                }
            }
            Node::Series { terms, .. } => {
                for (e, v) in terms {
                    stack.push(*e);
                    v.visit(stack, f);
                    stack.pop();
                }
            }
        }
    }

    /// Collects `(path, prec)` for every inexact series node, where `path`
    /// lists exponents from the outermost variable inward.
    pub fn precision_records(&self) -> Vec<(Vec<i64>, i64)> {
        let mut out = Vec::new();
        let mut path = Vec::new();
        self.collect_precs(&mut path, &mut out);
        out
    }

    fn collect_precs(&self, path: &mut Vec<i64>, out: &mut Vec<(Vec<i64>, i64)>) {
        if let Node::Series { terms, prec } = self {
            if *prec != EXACT {
                out.push((path.clone(), *prec));
            }
            for (e, v) in terms {
                path.push(*e);
                v.collect_precs(path, out);
                path.pop();
            }
        }
    }

    /// Sets the precision of the series node at `path` (creating it if needed).
    pub fn set_precision(&mut self, path: &[i64], prec: i64) {
        if let Node::Series { terms, prec: h } = self {
            match path.split_first() {
                None => {
                    *h = prec;
                    terms.retain(|&k, _| k < prec);
                }
                Some((e, rest)) => {
                    let child = terms.entry(*e).or_insert_with(|| Node::Series { terms: BTreeMap::new(), prec: EXACT });
                    child.set_precision(rest, prec);
                }
            }
        }
    }

    /// Smallest precision found anywhere at each depth (outermost first).
    pub fn min_precisions(&self, depth: usize) -> Vec<i64> {
        let mut out = vec![EXACT; depth];
        self.min_precs_into(depth, &mut out);
        out
    }

    fn min_precs_into(&self, depth: usize, out: &mut [i64]) {
        if let Node::Series { terms, prec } = self {
            let idx = out.len() - depth;
            out[idx] = out[idx].min(*prec);
            for v in terms.values() {
                v.min_precs_into(depth - 1, out);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f2() -> std::sync::Arc<GfField> {
        GfField::new(2, 1, None).unwrap()
    }

    #[test]
    fn inverse_of_one_plus_t() {
        let k = f2();
        let caps = [8i64];
        let ctx = Ctx { k: &k, caps: &caps };
        let x = Node::monomial(&[0], 1).add(&Node::monomial(&[1], 1), &k);
        let y = x.inverse(ctx, 1).unwrap();
        assert_eq!(y.prec(), 8);
        let prod = x.mul(&y, &k);
        assert_eq!(prod.prec(), 8);
        for e in 0..8 {
            assert_eq!(prod.coeff(&[e]), Some(if e == 0 { 1 } else { 0 }));
        }
        assert_eq!(prod.coeff(&[8]), None);
    }

    #[test]
    fn cartier_precision_rounds_up() {
        let k = f2();
        let x = Node::unknown(1, -3);
        assert_eq!(x.cartier(&k).prec(), -1);
        let x = Node::unknown(1, 5);
        assert_eq!(x.cartier(&k).prec(), 3);
    }
}
