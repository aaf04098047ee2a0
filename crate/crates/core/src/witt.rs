//! `p`-typical Witt vectors of length at most 3.
//!
//! Addition and multiplication use the universal polynomials `S_n`, `P_n`
//! over the integers, derived from the ghost components
//! `w_n = sum_{i<=n} p^i x_i^{p^{n-i}}` and cached per prime.

use std::collections::{BTreeMap, HashMap};
use std::fmt::Debug;
use std::sync::{Arc, Mutex, OnceLock};

use crate::error::{Error, Result};
use crate::gf::GfElement;
use crate::tower::{TowerElement, TowerSpec};

pub const MAX_LEN: usize = 3;

/// Coefficient rings usable for Witt vectors.
pub trait WittRing: Clone + PartialEq + Debug {
    /// The image of an integer in the ring of `self`.
    fn int_like(&self, n: i128) -> Self;
    fn add(&self, other: &Self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    fn same_ring(&self, other: &Self) -> bool;
    fn torsion_free(&self) -> bool;
    /// Characteristic of the ring (0 for torsion-free rings).
    fn characteristic(&self) -> u32;
}

impl WittRing for i128 {
    fn int_like(&self, n: i128) -> Self {
        n
    }
    fn add(&self, other: &Self) -> Self {
        self.checked_add(*other).expect("integer Witt arithmetic overflow")
    }
    fn mul(&self, other: &Self) -> Self {
        self.checked_mul(*other).expect("integer Witt arithmetic overflow")
    }
    fn same_ring(&self, _: &Self) -> bool {
        true
    }
    fn torsion_free(&self) -> bool {
        true
    }
    fn characteristic(&self) -> u32 {
        0
    }
}

impl WittRing for GfElement {
    fn int_like(&self, n: i128) -> Self {
        let k = self.field();
        let p = k.p() as i128;
        GfElement::new(k, k.from_int(n.rem_euclid(p) as i64))
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn same_ring(&self, other: &Self) -> bool {
        self.field() == other.field()
    }
    fn torsion_free(&self) -> bool {
        false
    }
    fn characteristic(&self) -> u32 {
        self.field().p()
    }
}

impl WittRing for TowerElement {
    fn int_like(&self, n: i128) -> Self {
        let p = self.spec().p() as i128;
        TowerElement::from_int(self.spec(), n.rem_euclid(p) as i64)
    }
    fn add(&self, other: &Self) -> Self {
        self + other
    }
    fn mul(&self, other: &Self) -> Self {
        self * other
    }
    fn same_ring(&self, other: &Self) -> bool {
        self.spec() == other.spec()
    }
    fn torsion_free(&self) -> bool {
        false
    }
    fn characteristic(&self) -> u32 {
        self.spec().p()
    }
}

/// Exponents of `x_0, x_1, x_2, y_0, y_1, y_2`.
type Mono = [u16; 6];

/// Integer polynomial in the six Witt variables.
#[derive(Clone, Debug, Default, PartialEq)]
struct Poly(BTreeMap<Mono, i128>);

impl Poly {
    fn var(i: usize) -> Poly {
        let mut m = [0; 6];
        m[i] = 1;
        Poly(BTreeMap::from([(m, 1)]))
    }

    fn add(&self, o: &Poly) -> Poly {
        let mut out = self.0.clone();
        for (m, c) in &o.0 {
            *out.entry(*m).or_insert(0) += c;
        }
        out.retain(|_, c| *c != 0);
        Poly(out)
    }

    fn scale(&self, s: i128) -> Poly {
        Poly(self.0.iter().filter(|_| s != 0).map(|(m, c)| (*m, c * s)).collect())
    }

    fn mul(&self, o: &Poly) -> Poly {
        let mut out: BTreeMap<Mono, i128> = BTreeMap::new();
        for (ma, ca) in &self.0 {
            for (mb, cb) in &o.0 {
                let mut m = *ma;
                for i in 0..6 {
                    m[i] += mb[i];
                }
                *out.entry(m).or_insert(0) += ca * cb;
            }
        }
        out.retain(|_, c| *c != 0);
        Poly(out)
    }

    fn pow(&self, mut e: u32) -> Poly {
        let mut acc = Poly(BTreeMap::from([([0; 6], 1)]));
        let mut base = self.clone();
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

    fn div_exact(&self, d: i128) -> Poly {
        Poly(
            self.0
                .iter()
                .map(|(m, c)| {
                    assert_eq!(c % d, 0, "universal polynomial is not integral");
                    (*m, c / d)
                })
                .collect(),
        )
    }

    fn eval<R: WittRing>(&self, x: &[R], y: &[R], proto: &R) -> R {
        let vars: Vec<&R> = (0..6).map(|i| if i < 3 { &x[i.min(x.len() - 1)] } else { &y[(i - 3).min(y.len() - 1)] }).collect();
        // cache powers of each variable
        let mut powers: HashMap<(usize, u16), R> = HashMap::new();
        let mut acc = proto.int_like(0);
        for (m, c) in &self.0 {
            let mut term = proto.int_like(*c);
            for (i, &e) in m.iter().enumerate() {
                if e == 0 {
                    continue;
                }
                let pw = powers.entry((i, e)).or_insert_with(|| ring_pow(vars[i], e as u64, proto)).clone();
                term = term.mul(&pw);
            }
            acc = acc.add(&term);
        }
        acc
    }
}

fn ring_pow<R: WittRing>(x: &R, mut e: u64, proto: &R) -> R {
    let mut acc = proto.int_like(1);
    let mut base = x.clone();
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

struct Universal {
    sum: Vec<Poly>,
    prod: Vec<Poly>,
}

fn ghost_poly(p: u32, n: usize, offset: usize) -> Poly {
    let mut acc = Poly::default();
    for i in 0..=n {
        let e = p.pow((n - i) as u32);
        acc = acc.add(&Poly::var(offset + i).pow(e).scale((p as i128).pow(i as u32)));
    }
    acc
}

fn derive(p: u32) -> Universal {
    let pp = p as i128;
    let mut sum: Vec<Poly> = Vec::new();
    let mut prod: Vec<Poly> = Vec::new();
    for n in 0..MAX_LEN {
        let gx = ghost_poly(p, n, 0);
        let gy = ghost_poly(p, n, 3);
        let mut s = gx.add(&gy);
        let mut m = gx.mul(&gy);
        for i in 0..n {
            let e = p.pow((n - i) as u32);
            let w = pp.pow(i as u32);
            s = s.add(&sum[i].pow(e).scale(-w));
            m = m.add(&prod[i].pow(e).scale(-w));
        }
        let d = pp.pow(n as u32);
        sum.push(s.div_exact(d));
        prod.push(m.div_exact(d));
    }
    Universal { sum, prod }
}

fn universal(p: u32) -> Arc<Universal> {
    static CACHE: OnceLock<Mutex<HashMap<u32, Arc<Universal>>>> = OnceLock::new();
    let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
    let mut guard = cache.lock().unwrap();
    guard.entry(p).or_insert_with(|| Arc::new(derive(p))).clone()
}

#[derive(Clone, Debug, PartialEq)]
pub struct WittVector<R: WittRing> {
    p: u32,
    entries: Vec<R>,
}

impl<R: WittRing> WittVector<R> {
    pub fn new(p: u32, entries: Vec<R>) -> Result<Self> {
        if !crate::gf::is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if entries.is_empty() || entries.len() > MAX_LEN {
            return Err(Error::LengthMismatch);
        }
        let c = entries[0].characteristic();
        if c != 0 && c != p {
            return Err(Error::Unsupported(format!("coefficient ring has characteristic {c}, expected {p}")));
        }
        if entries.iter().any(|e| !e.same_ring(&entries[0])) {
            return Err(Error::SpecMismatch);
        }
        Ok(WittVector { p, entries })
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn len(&self) -> usize {
        self.entries.len()
    }
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }
    pub fn entries(&self) -> &[R] {
        &self.entries
    }

    fn compatible(&self, other: &Self) -> Result<()> {
        if self.p != other.p || self.len() != other.len() {
            return Err(Error::LengthMismatch);
        }
        if !self.entries[0].same_ring(&other.entries[0]) {
            return Err(Error::SpecMismatch);
        }
        Ok(())
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let u = universal(self.p);
        let proto = &self.entries[0];
        let entries = u.sum[..self.len()].iter().map(|s| s.eval(&self.entries, &other.entries, proto)).collect();
        Ok(WittVector { p: self.p, entries })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.compatible(other)?;
        let u = universal(self.p);
        let proto = &self.entries[0];
        let entries = u.prod[..self.len()].iter().map(|s| s.eval(&self.entries, &other.entries, proto)).collect();
        Ok(WittVector { p: self.p, entries })
    }

    /// Ghost components `w_j = sum_{i<=j} p^i x_i^{p^{j-i}}`.
    pub fn ghost(&self) -> Result<Vec<R>> {
        let proto = &self.entries[0];
        if !proto.torsion_free() {
            return Err(Error::TorsionRing);
        }
        Ok((0..self.len())
            .map(|j| {
                let mut acc = proto.int_like(0);
                for i in 0..=j {
                    let e = (self.p as u64).pow((j - i) as u32);
                    let term = ring_pow(&self.entries[i], e, proto).mul(&proto.int_like((self.p as i128).pow(i as u32)));
                    acc = acc.add(&term);
                }
                acc
            })
            .collect())
    }
}

/// Residue-ring elements that lift to a tower ring by the constant-term lift.
pub trait Liftable: WittRing {
    fn lift_into(&self, target: &Arc<TowerSpec>) -> Result<TowerElement>;
}

impl Liftable for GfElement {
    fn lift_into(&self, target: &Arc<TowerSpec>) -> Result<TowerElement> {
        if target.n() != 1 || target.field() != self.field() {
            return Err(Error::ResidueMismatch);
        }
        Ok(TowerElement::constant(target, self.raw()))
    }
}

impl Liftable for TowerElement {
    fn lift_into(&self, target: &Arc<TowerSpec>) -> Result<TowerElement> {
        if target.n() < 2 || **self.spec() != *target.residue() {
            return Err(Error::ResidueMismatch);
        }
        Ok(TowerElement::lift_residue(target, self.node()))
    }
}

/// `sum_{i=0}^r p^i lift(x_i)^{p^{r-i}}` in the target ring.
pub fn phi_lift<R: Liftable>(w: &WittVector<R>, target: &Arc<TowerSpec>, r: usize) -> Result<TowerElement> {
    if r >= w.len() {
        return Err(Error::LengthMismatch);
    }
    if target.p() != w.p() {
        return Err(Error::ResidueMismatch);
    }
    let mut acc = TowerElement::zero(target);
    for i in 0..=r {
        let lift = w.entries[i].lift_into(target)?;
        let e = (w.p as i64).pow((r - i) as u32);
        let pi = (w.p as i64).pow(i as u32);
        let term = lift.pow(e)?.scale(target.field().from_int(pi));
        acc = &acc + &term;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gf::GfField;
    use crate::tower::{agree, parse_spec};
    use proptest::prelude::*;

    fn wv(p: u32, e: &[i128]) -> WittVector<i128> {
        WittVector::new(p, e.to_vec()).unwrap()
    }

    #[test]
    fn ghost_examples() {
        assert_eq!(wv(2, &[5, 7]).ghost().unwrap(), vec![5, 25 + 14]);
        assert_eq!(wv(2, &[1, 0]).ghost().unwrap(), vec![1, 1]);
        assert_eq!(wv(3, &[1, 1, 0]).ghost().unwrap(), vec![1, 4, 4]);
        let k = GfField::new(2, 1, None).unwrap();
        let x = WittVector::new(2, vec![GfElement::new(&k, 1)]).unwrap();
        assert_eq!(x.ghost(), Err(Error::TorsionRing));
    }

    #[test]
    fn low_degree_universal_polynomials() {
        let u = universal(2);
        // S_1 = x_1 + y_1 - x_0 y_0 for p = 2
        let expect = Poly::var(1).add(&Poly::var(4)).add(&Poly::var(0).mul(&Poly::var(3)).scale(-1));
        assert_eq!(u.sum[1], expect);
        // P_1 = x_0^p y_1 + x_1 y_0^p + p x_1 y_1
        let u3 = universal(3);
        let p1 = Poly::var(0).pow(3).mul(&Poly::var(4)).add(&Poly::var(1).mul(&Poly::var(3).pow(3))).add(&Poly::var(1).mul(&Poly::var(4)).scale(3));
        assert_eq!(u3.prod[1], p1);
    }

    #[test]
    fn add_mul_examples_over_f2() {
        let k = GfField::new(2, 1, None).unwrap();
        let g = |v: &[u16]| WittVector::new(2, v.iter().map(|&c| GfElement::new(&k, c)).collect()).unwrap();
        assert_eq!(g(&[1, 0]).add(&g(&[1, 0])).unwrap(), g(&[0, 1]));
        // W_2(F_2) = Z/4: exhaustive identities
        for a in 0..2 {
            for b in 0..2 {
                let w = g(&[a, b]);
                assert_eq!(g(&[0, 0]).add(&w).unwrap(), w);
                assert_eq!(g(&[1, 0]).mul(&w).unwrap(), w);
            }
        }
        // 1 has additive order 4
        let one = g(&[1, 0]);
        let mut acc = g(&[0, 0]);
        for i in 1..=4 {
            acc = acc.add(&one).unwrap();
            assert_eq!(acc == g(&[0, 0]), i == 4);
        }
    }

    #[test]
    fn witt_ring_axioms_exhaustive_f2_len2() {
        let k = GfField::new(2, 1, None).unwrap();
        let all: Vec<WittVector<GfElement>> = (0..4)
            .map(|m| WittVector::new(2, vec![GfElement::new(&k, m & 1), GfElement::new(&k, m >> 1)]).unwrap())
            .collect();
        for a in &all {
            for b in &all {
                assert_eq!(a.add(b).unwrap(), b.add(a).unwrap());
                assert_eq!(a.mul(b).unwrap(), b.mul(a).unwrap());
                for c in &all {
                    assert_eq!(a.add(b).unwrap().add(c).unwrap(), a.add(&b.add(c).unwrap()).unwrap());
                    assert_eq!(a.mul(b).unwrap().mul(c).unwrap(), a.mul(&b.mul(c).unwrap()).unwrap());
                    assert_eq!(a.mul(&b.add(c).unwrap()).unwrap(), a.mul(b).unwrap().add(&a.mul(c).unwrap()).unwrap());
                }
            }
        }
    }

    #[test]
    fn length_and_ring_mismatch() {
        assert_eq!(wv(2, &[1]).add(&wv(2, &[1, 0])), Err(Error::LengthMismatch));
        assert_eq!(WittVector::new(2, vec![0i128; 4]), Err(Error::LengthMismatch));
        assert!(matches!(WittVector::<i128>::new(4, vec![0]), Err(Error::NotPrime(4))));
    }

    #[test]
    fn phi_lift_examples() {
        let a = parse_spec("F(2)((t))@prec=4", None).unwrap();
        let k = a.field().clone();
        let x0 = GfElement::new(&k, 1);
        let w = WittVector::new(2, vec![x0.clone(), GfElement::new(&k, 1)]).unwrap();
        assert!(agree(&phi_lift(&w, &a, 1).unwrap(), &TowerElement::one(&a)));
        let z = WittVector::new(2, vec![GfElement::new(&k, 0); 3]).unwrap();
        assert!(phi_lift(&z, &a, 2).unwrap().is_exact_zero());
        let w3 = WittVector::new(2, vec![x0, GfElement::new(&k, 1), GfElement::new(&k, 1)]).unwrap();
        assert!(agree(&phi_lift(&w3, &a, 2).unwrap(), &TowerElement::one(&a)));

        // two-dimensional target with residue F_2((t))
        let a2 = parse_spec("F(2)((t))((u))@prec=4,4", None).unwrap();
        let res = a2.residue();
        let y = TowerElement::parse(&res, "1+t").unwrap();
        let wy = WittVector::new(2, vec![y.clone(), y]).unwrap();
        let got = phi_lift(&wy, &a2, 1).unwrap();
        assert!(agree(&got, &TowerElement::parse(&a2, "1+t^2").unwrap()));
        assert_eq!(phi_lift(&wy, &a, 1), Err(Error::ResidueMismatch));
    }

    fn small() -> impl Strategy<Value = i128> {
        -6i128..7
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(48))]

        #[test]
        fn ghost_is_ring_hom(p in prop::sample::select(vec![2u32, 3]), a in prop::collection::vec(small(), 3), b in prop::collection::vec(small(), 3)) {
            let x = wv(p, &a);
            let y = wv(p, &b);
            let gx = x.ghost().unwrap();
            let gy = y.ghost().unwrap();
            let gs = x.add(&y).unwrap().ghost().unwrap();
            let gm = x.mul(&y).unwrap().ghost().unwrap();
            for j in 0..3 {
                prop_assert_eq!(gs[j], gx[j] + gy[j]);
                prop_assert_eq!(gm[j], gx[j] * gy[j]);
            }
        }

        #[test]
        fn witt_axioms_f3(a in prop::collection::vec(0u16..3, 3), b in prop::collection::vec(0u16..3, 3), c in prop::collection::vec(0u16..3, 3)) {
            let k = GfField::new(3, 1, None).unwrap();
            let g = |v: &[u16]| WittVector::new(3, v.iter().map(|&x| GfElement::new(&k, x)).collect()).unwrap();
            let (x, y, z) = (g(&a), g(&b), g(&c));
            prop_assert_eq!(x.add(&y).unwrap().add(&z).unwrap(), x.add(&y.add(&z).unwrap()).unwrap());
            prop_assert_eq!(x.mul(&y).unwrap().mul(&z).unwrap(), x.mul(&y.mul(&z).unwrap()).unwrap());
            prop_assert_eq!(x.mul(&y.add(&z).unwrap()).unwrap(), x.mul(&y).unwrap().add(&x.mul(&z).unwrap()).unwrap());
        }

        #[test]
        fn phi_lift_multiplicative(a in 1u16..4, b in 1u16..4) {
            let target = parse_spec("F(2^2)((t))@prec=4", None).unwrap();
            let k = target.field().clone();
            let w = |c: u16| WittVector::new(2, vec![GfElement::new(&k, c), GfElement::new(&k, 1)]).unwrap();
            let lhs = phi_lift(&w(a).mul(&w(b)).unwrap(), &target, 1).unwrap();
            let rhs = &phi_lift(&w(a), &target, 1).unwrap() * &phi_lift(&w(b), &target, 1).unwrap();
            prop_assert!(agree(&lhs, &rhs));
        }
    }
}
