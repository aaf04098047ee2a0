//! Small finite fields `F_{p^f}` with `p <= 7`, `f <= 4`.
//!
//! Elements are stored as their coefficient vector over `Z/p` packed into a
//! base-`p` integer: `c_0 + c_1 p + ... + c_{f-1} p^{f-1}` where the element is
//! `c_0 + c_1 w + ... + c_{f-1} w^{f-1}` and `w` is a root of the modulus.
//! Multiplication goes through log/antilog tables.

use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::sync::Arc;

use crate::error::{Error, Result};

pub const MAX_P: u32 = 7;
pub const MAX_F: u32 = 4;

/// Raw packed field element. Only meaningful together with its [`GfField`].
pub type Raw = u16;

#[derive(Debug)]
pub struct GfField {
    p: u32,
    f: u32,
    order: u32,
    /// Coefficients `m_0..m_{f-1}` of the monic modulus (leading 1 omitted).
    modulus: Vec<u32>,
    exp: Vec<Raw>,
    log: Vec<u32>,
    digits: Vec<[u8; 4]>,
    trace_one: Raw,
}

impl PartialEq for GfField {
    fn eq(&self, other: &Self) -> bool {
        self.p == other.p && self.f == other.f && self.modulus == other.modulus
    }
}
impl Eq for GfField {}

pub fn is_prime(n: u32) -> bool {
    n >= 2 && (2..n).take_while(|d| d * d <= n).all(|d| n % d != 0)
}

fn poly_rem(mut a: Vec<u32>, b: &[u32], p: u32) -> Vec<u32> {
    // b monic
    let db = b.len() - 1;
    while a.len() > db {
        let lead = *a.last().unwrap() % p;
        let shift = a.len() - 1 - db;
        if lead != 0 {
            for (i, &bi) in b.iter().enumerate() {
                a[shift + i] = (a[shift + i] + p * p - lead * bi % p) % p;
            }
        }
        a.pop();
    }
    a
}

/// Trial division by every monic polynomial of degree `1..=deg/2`.
fn is_irreducible(monic: &[u32], p: u32) -> bool {
    let deg = monic.len() - 1;
    for d in 1..=deg / 2 {
        let count = p.pow(d as u32);
        for code in 0..count {
            let mut div: Vec<u32> = (0..d).map(|i| code / p.pow(i as u32) % p).collect();
            div.push(1);
            if poly_rem(monic.to_vec(), &div, p).iter().all(|&c| c == 0) {
                return false;
            }
        }
    }
    true
}

impl GfField {
    /// Builds `F_{p^f}`. Without a modulus, the irreducible polynomial with the
    /// smallest packed coefficient code is chosen.
    pub fn new(p: u32, f: u32, modulus: Option<&[u32]>) -> Result<Arc<GfField>> {
        if !is_prime(p) {
            return Err(Error::NotPrime(p));
        }
        if p > MAX_P || f == 0 || f > MAX_F {
            return Err(Error::Unsupported(format!("F({p}^{f}) outside p<=7, 1<=f<=4")));
        }
        let modulus: Vec<u32> = match modulus {
            Some(m) => {
                // accepts either f coefficients (monic implied) or f+1 with leading 1
                let mut m: Vec<u32> = m.iter().map(|c| c % p).collect();
                if m.len() == f as usize + 1 {
                    if m[f as usize] != 1 {
                        return Err(Error::Unsupported("modulus must be monic".into()));
                    }
                    m.pop();
                }
                if m.len() != f as usize {
                    return Err(Error::Unsupported(format!("modulus must have degree {f}")));
                }
                let mut monic = m.clone();
                monic.push(1);
                if !is_irreducible(&monic, p) {
                    return Err(Error::ReducibleModulus(poly_string(&monic)));
                }
                m
            }
            None => (0..p.pow(f))
                .map(|code| (0..f).map(|i| code / p.pow(i) % p).collect::<Vec<u32>>())
                .find(|m| {
                    let mut monic = m.clone();
                    monic.push(1);
                    is_irreducible(&monic, p)
                })
                .expect("an irreducible polynomial exists in every degree"),
        };
        let order = p.pow(f);
        let digits: Vec<[u8; 4]> = (0..order)
            .map(|v| {
                let mut d = [0u8; 4];
                for (i, di) in d.iter_mut().enumerate().take(f as usize) {
                    *di = (v / p.pow(i as u32) % p) as u8;
                }
                d
            })
            .collect();
        let mut field = GfField {
            p,
            f,
            order,
            modulus,
            exp: Vec::new(),
            log: Vec::new(),
            digits,
            trace_one: 0,
        };
        field.build_tables();
        field.trace_one = (1..order as Raw)
            .find(|&a| field.trace(a) == 1)
            .expect("trace is surjective");
        Ok(Arc::new(field))
    }

    fn slow_mul(&self, a: Raw, b: Raw) -> Raw {
        let (p, f) = (self.p, self.f as usize);
        let da = self.digits[a as usize];
        let db = self.digits[b as usize];
        let mut prod = vec![0u32; 2 * f - 1];
        for i in 0..f {
            for j in 0..f {
                prod[i + j] = (prod[i + j] + da[i] as u32 * db[j] as u32) % p;
            }
        }
        let mut monic = self.modulus.clone();
        monic.push(1);
        let rem = poly_rem(prod, &monic, p);
        self.pack(&rem)
    }

    fn pack(&self, coeffs: &[u32]) -> Raw {
        coeffs
            .iter()
            .enumerate()
            .map(|(i, &c)| (c % self.p) * self.p.pow(i as u32))
            .sum::<u32>() as Raw
    }

    fn build_tables(&mut self) {
        let q1 = self.order - 1;
        let mut primes = Vec::new();
        let mut m = q1;
        let mut d = 2;
        while d * d <= m {
            if m % d == 0 {
                primes.push(d);
                while m % d == 0 {
                    m /= d;
                }
            }
            d += 1;
        }
        if m > 1 {
            primes.push(m);
        }
        let slow_pow = |s: &GfField, a: Raw, mut e: u32| {
            let mut r: Raw = 1;
            let mut b = a;
            while e > 0 {
                if e & 1 == 1 {
                    r = s.slow_mul(r, b);
                }
                b = s.slow_mul(b, b);
                e >>= 1;
            }
            r
        };
        let g = (1..self.order as Raw)
            .find(|&g| primes.iter().all(|&l| slow_pow(self, g, q1 / l) != 1))
            .expect("multiplicative group is cyclic");
        let mut exp = vec![0 as Raw; q1 as usize];
        let mut log = vec![0u32; self.order as usize];
        let mut x: Raw = 1;
        for (k, e) in exp.iter_mut().enumerate() {
            *e = x;
            log[x as usize] = k as u32;
            x = self.slow_mul(x, g);
        }
        self.exp = exp;
        self.log = log;
    }

    pub fn p(&self) -> u32 {
        self.p
    }
    pub fn degree(&self) -> u32 {
        self.f
    }
    pub fn order(&self) -> u32 {
        self.order
    }
    /// Monic modulus coefficients, constant term first, leading 1 included.
    pub fn modulus(&self) -> Vec<u32> {
        let mut m = self.modulus.clone();
        m.push(1);
        m
    }

    pub fn zero(&self) -> Raw {
        0
    }
    pub fn one(&self) -> Raw {
        1
    }
    /// The class of `w`, the adjoined root of the modulus.
    pub fn generator(&self) -> Raw {
        if self.f == 1 {
            // w is a root of x + m_0, i.e. -m_0
            ((self.p - self.modulus[0]) % self.p) as Raw
        } else {
            self.p as Raw
        }
    }
    pub fn from_int(&self, n: i64) -> Raw {
        n.rem_euclid(self.p as i64) as Raw
    }
    /// Coefficients over `Z/p` of the element, constant first.
    pub fn coeffs(&self, a: Raw) -> Vec<u32> {
        self.digits[a as usize][..self.f as usize].iter().map(|&d| d as u32).collect()
    }
    pub fn from_coeffs(&self, c: &[i64]) -> Raw {
        let mut monic = self.modulus.clone();
        monic.push(1);
        let v: Vec<u32> = c.iter().map(|x| x.rem_euclid(self.p as i64) as u32).collect();
        let r = if v.len() > self.f as usize { poly_rem(v, &monic, self.p) } else { v };
        self.pack(&r)
    }
    /// Returns the prime-field value if `a` lies in `Z/p`.
    pub fn as_prime(&self, a: Raw) -> Option<u32> {
        if (a as u32) < self.p {
            Some(a as u32)
        } else {
            None
        }
    }

    #[inline]
    pub fn add(&self, a: Raw, b: Raw) -> Raw {
        if self.f == 1 {
            return ((a as u32 + b as u32) % self.p) as Raw;
        }
        let (da, db) = (self.digits[a as usize], self.digits[b as usize]);
        let mut v = 0u32;
        let mut pw = 1u32;
        for i in 0..self.f as usize {
            v += ((da[i] + db[i]) as u32 % self.p) * pw;
            pw *= self.p;
        }
        v as Raw
    }
    #[inline]
    pub fn neg(&self, a: Raw) -> Raw {
        let d = self.digits[a as usize];
        let mut v = 0u32;
        let mut pw = 1u32;
        for &di in d.iter().take(self.f as usize) {
            v += ((self.p - di as u32) % self.p) * pw;
            pw *= self.p;
        }
        v as Raw
    }
    #[inline]
    pub fn sub(&self, a: Raw, b: Raw) -> Raw {
        self.add(a, self.neg(b))
    }
    #[inline]
    pub fn mul(&self, a: Raw, b: Raw) -> Raw {
        if a == 0 || b == 0 {
            return 0;
        }
        let q1 = self.order - 1;
        let k = (self.log[a as usize] + self.log[b as usize]) % q1;
        self.exp[k as usize]
    }
    pub fn mul_int(&self, a: Raw, n: i64) -> Raw {
        self.mul(a, self.from_int(n))
    }
    pub fn inv(&self, a: Raw) -> Option<Raw> {
        if a == 0 {
            return None;
        }
        let q1 = self.order - 1;
        Some(self.exp[((q1 - self.log[a as usize]) % q1) as usize])
    }
    /// `a^e` for any integer `e`; `0^e` with `e < 0` is reported as `None`.
    pub fn pow(&self, a: Raw, e: i64) -> Option<Raw> {
        if a == 0 {
            return match e.cmp(&0) {
                std::cmp::Ordering::Less => None,
                std::cmp::Ordering::Equal => Some(1),
                std::cmp::Ordering::Greater => Some(0),
            };
        }
        let q1 = (self.order - 1) as i64;
        let k = (self.log[a as usize] as i64 * e.rem_euclid(q1)).rem_euclid(q1);
        Some(self.exp[k as usize])
    }
    pub fn frobenius(&self, a: Raw) -> Raw {
        self.pow(a, self.p as i64).unwrap()
    }
    /// Inverse Frobenius `a^(p^(f-1))`; `F_{p^f}` is perfect.
    pub fn pth_root(&self, a: Raw) -> Raw {
        self.pow(a, (self.order / self.p) as i64).unwrap()
    }
    pub fn frobenius_pow(&self, a: Raw, k: i64) -> Raw {
        let f = self.f as i64;
        let k = k.rem_euclid(f);
        self.pow(a, (self.p as i64).pow(k as u32)).unwrap()
    }
    /// `Tr_{F_{p^f}/F_p}(a)` as an element of `Z/p`.
    pub fn trace(&self, a: Raw) -> u32 {
        let mut s = 0;
        let mut x = a;
        for _ in 0..self.f {
            s = self.add(s, x);
            x = self.frobenius(x);
        }
        s as u32
    }
    /// A fixed element of trace 1, the smallest in packed order.
    pub fn trace_one(&self) -> Raw {
        self.trace_one
    }
    /// Solves `x^p - x = a`; returns the solution with the smallest packed code.
    pub fn artin_schreier_solve(&self, a: Raw) -> Option<Raw> {
        if self.trace(a) != 0 {
            return None;
        }
        (0..self.order as Raw).find(|&x| self.sub(self.frobenius(x), x) == a)
    }

    pub fn elements(&self) -> impl Iterator<Item = Raw> {
        0..self.order as Raw
    }

    /// Renders as a polynomial in `w`, e.g. `w^2+2w+1`.
    pub fn format(&self, a: Raw) -> String {
        if a == 0 {
            return "0".into();
        }
        let c = self.coeffs(a);
        let mut parts = Vec::new();
        for (i, &ci) in c.iter().enumerate().rev() {
            if ci == 0 {
                continue;
            }
            let s = match (i, ci) {
                (0, _) => format!("{ci}"),
                (1, 1) => "w".to_string(),
                (1, _) => format!("{ci}w"),
                (_, 1) => format!("w^{i}"),
                _ => format!("{ci}w^{i}"),
            };
            parts.push(s);
        }
        parts.join("+")
    }

    /// Parses a polynomial in `w` with integer coefficients (`+`, `-`, `*`,
    /// `^` with non-negative integer exponents).
    pub fn parse(&self, text: &str) -> Result<Raw> {
        let mut acc: Raw = 0;
        let s: String = text.chars().filter(|c| !c.is_whitespace()).collect();
        if s.is_empty() {
            return Err(Error::Syntax { pos: 0, msg: "empty field element".into() });
        }
        let bytes = s.as_bytes();
        let mut i = 0;
        while i < bytes.len() {
            let mut sign = 1i64;
            while i < bytes.len() && (bytes[i] == b'+' || bytes[i] == b'-') {
                if bytes[i] == b'-' {
                    sign = -sign;
                }
                i += 1;
            }
            let start = i;
            let mut coef: i64 = 1;
            let mut had_num = false;
            while i < bytes.len() && bytes[i].is_ascii_digit() {
                i += 1;
                had_num = true;
            }
            if had_num {
                coef = s[start..i].parse().map_err(|_| Error::Syntax { pos: start, msg: "bad integer".into() })?;
            }
            if i < bytes.len() && bytes[i] == b'*' {
                i += 1;
            }
            let mut power: i64 = 0;
            if i < bytes.len() && bytes[i] == b'w' {
                i += 1;
                power = 1;
                if i < bytes.len() && bytes[i] == b'^' {
                    i += 1;
                    let ps = i;
                    while i < bytes.len() && bytes[i].is_ascii_digit() {
                        i += 1;
                    }
                    power = s[ps..i].parse().map_err(|_| Error::Syntax { pos: ps, msg: "bad exponent".into() })?;
                }
            } else if !had_num {
                return Err(Error::Syntax { pos: i, msg: format!("unexpected input in field element '{text}'") });
            }
            let term = self.mul(self.from_int(sign * coef), self.pow(self.generator(), power).unwrap());
            acc = self.add(acc, term);
        }
        Ok(acc)
    }

    /// `N_{F_{p^{2f}}/F_{p^f}}` realized with this field as `F_{p^{2f}}` and
    /// `sub` as the subfield of index 2: `a^{(p^{2f}-1)/(p^f-1)} = a^{p^f+1}`.
    pub fn norm_to_half(&self, a: Raw) -> Raw {
        assert!(self.f % 2 == 0, "field degree must be even");
        let half = self.p.pow(self.f / 2) as i64;
        self.pow(a, half + 1).unwrap()
    }
}

fn poly_string(monic: &[u32]) -> String {
    let mut parts = Vec::new();
    for (i, &c) in monic.iter().enumerate().rev() {
        if c == 0 {
            continue;
        }
        parts.push(match (i, c) {
            (0, _) => format!("{c}"),
            (1, 1) => "x".into(),
            (1, _) => format!("{c}x"),
            (_, 1) => format!("x^{i}"),
            _ => format!("{c}x^{i}"),
        });
    }
    parts.join("+")
}

/// Parses the field syntax `F(p)` or `F(p^f)`.
pub fn parse_field(text: &str) -> Result<Arc<GfField>> {
    let t = text.trim();
    let inner = t
        .strip_prefix("F(")
        .and_then(|r| r.strip_suffix(')'))
        .ok_or_else(|| Error::Syntax { pos: 0, msg: format!("expected F(p^f), got '{t}'") })?;
    let (p, f) = match inner.split_once('^') {
        Some((a, b)) => (a.trim().parse::<u32>(), b.trim().parse::<u32>()),
        None => (inner.trim().parse::<u32>(), Ok(1)),
    };
    match (p, f) {
        (Ok(p), Ok(f)) => GfField::new(p, f, None),
        _ => Err(Error::Syntax { pos: 2, msg: format!("bad field '{t}'") }),
    }
}

/// A field element bundled with its field, for ergonomic use at API edges.
#[derive(Clone)]
pub struct GfElement {
    field: Arc<GfField>,
    value: Raw,
}

impl GfElement {
    pub fn new(field: &Arc<GfField>, value: Raw) -> Self {
        assert!((value as u32) < field.order, "raw value out of range");
        GfElement { field: field.clone(), value }
    }
    pub fn field(&self) -> &Arc<GfField> {
        &self.field
    }
    pub fn raw(&self) -> Raw {
        self.value
    }
    pub fn coeffs(&self) -> Vec<u32> {
        self.field.coeffs(self.value)
    }
    pub fn is_zero(&self) -> bool {
        self.value == 0
    }
    pub fn frobenius(&self) -> Self {
        GfElement::new(&self.field, self.field.frobenius(self.value))
    }
    pub fn pth_root(&self) -> Self {
        GfElement::new(&self.field, self.field.pth_root(self.value))
    }
    pub fn trace(&self) -> u32 {
        self.field.trace(self.value)
    }
    pub fn inv(&self) -> Option<Self> {
        self.field.inv(self.value).map(|v| GfElement::new(&self.field, v))
    }
    pub fn pow(&self, e: i64) -> Option<Self> {
        self.field.pow(self.value, e).map(|v| GfElement::new(&self.field, v))
    }
    pub fn artin_schreier_solve(&self) -> Option<Self> {
        self.field.artin_schreier_solve(self.value).map(|v| GfElement::new(&self.field, v))
    }
}

impl PartialEq for GfElement {
    fn eq(&self, other: &Self) -> bool {
        *self.field == *other.field && self.value == other.value
    }
}
impl Eq for GfElement {}

impl fmt::Debug for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format(self.value))
    }
}
impl fmt::Display for GfElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.field.format(self.value))
    }
}

macro_rules! gf_binop {
    ($tr:ident, $m:ident) => {
        impl $tr for &GfElement {
            type Output = GfElement;
            fn $m(self, rhs: &GfElement) -> GfElement {
                assert!(*self.field == *rhs.field, "field mismatch");
                GfElement::new(&self.field, self.field.$m(self.value, rhs.value))
            }
        }
        impl $tr for GfElement {
            type Output = GfElement;
            fn $m(self, rhs: GfElement) -> GfElement {
                (&self).$m(&rhs)
            }
        }
    };
}
gf_binop!(Add, add);
gf_binop!(Sub, sub);
gf_binop!(Mul, mul);

impl Neg for &GfElement {
    type Output = GfElement;
    fn neg(self) -> GfElement {
        GfElement::new(&self.field, self.field.neg(self.value))
    }
}
impl Neg for GfElement {
    type Output = GfElement;
    fn neg(self) -> GfElement {
        -&self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn construction() {
        let f2 = GfField::new(2, 1, None).unwrap();
        assert_eq!(f2.order(), 2);
        let f4 = GfField::new(2, 2, None).unwrap();
        assert_eq!(f4.modulus(), vec![1, 1, 1]);
        assert_eq!(GfField::new(4, 1, None).unwrap_err(), Error::NotPrime(4));
        assert!(matches!(GfField::new(2, 2, Some(&[1, 0, 1])), Err(Error::ReducibleModulus(_))));
        let f9 = GfField::new(3, 2, None).unwrap();
        assert_eq!(f9.modulus(), vec![1, 0, 1]);
    }

    #[test]
    fn frobenius_examples() {
        let f2 = GfField::new(2, 1, None).unwrap();
        assert_eq!(f2.frobenius(1), 1);
        let f4 = GfField::new(2, 2, None).unwrap();
        let w = f4.generator();
        assert_eq!(f4.frobenius(w), f4.add(w, 1));
        let f9 = GfField::new(3, 2, None).unwrap();
        assert_eq!(f9.frobenius(0), 0);
    }

    #[test]
    fn trace_examples() {
        let f2 = GfField::new(2, 1, None).unwrap();
        assert_eq!(f2.trace(1), 1);
        let f4 = GfField::new(2, 2, None).unwrap();
        assert_eq!(f4.trace(f4.generator()), 1);
        assert_eq!(f4.trace(1), 0);
    }

    #[test]
    fn artin_schreier_examples() {
        let f2 = GfField::new(2, 1, None).unwrap();
        assert_eq!(f2.artin_schreier_solve(0), Some(0));
        assert_eq!(f2.artin_schreier_solve(1), None);
        let f4 = GfField::new(2, 2, None).unwrap();
        assert_eq!(f4.artin_schreier_solve(1), Some(f4.generator()));
    }

    #[test]
    fn parse_and_format() {
        let f9 = GfField::new(3, 2, None).unwrap();
        let a = f9.parse("2w+1").unwrap();
        assert_eq!(f9.format(a), "2w+1");
        assert_eq!(f9.parse("w^2").unwrap(), f9.from_int(-1));
        assert_eq!(f9.parse("-1").unwrap(), 2);
        assert!(f9.parse("x").is_err());
        assert_eq!(parse_field("F(3^2)").unwrap().order(), 9);
    }

    #[test]
    fn exhaustive_small_fields() {
        for (p, f) in [(2, 1), (2, 2), (2, 3), (2, 4), (3, 1), (3, 2), (3, 3), (3, 4), (5, 1), (5, 2), (7, 1), (7, 2)] {
            let k = GfField::new(p, f, None).unwrap();
            for a in k.elements() {
                assert_eq!(k.pow(a, k.order() as i64).unwrap(), a);
                assert_eq!(k.frobenius(k.pth_root(a)), a);
                assert_eq!(k.trace(k.frobenius(a)), k.trace(a));
                if k.order() <= 81 {
                    assert_eq!(k.artin_schreier_solve(a).is_some(), k.trace(a) == 0);
                    for b in k.elements() {
                        assert_eq!(k.trace(k.add(a, b)), (k.trace(a) + k.trace(b)) % p);
                    }
                }
                if a != 0 {
                    assert_eq!(k.mul(a, k.inv(a).unwrap()), 1);
                }
            }
        }
    }

    #[test]
    fn half_norm_is_surjective() {
        for (p, f) in [(2, 2), (3, 2), (2, 4)] {
            let big = GfField::new(p, f, None).unwrap();
            let half = p.pow(f / 2);
            let mut image: Vec<Raw> = big.elements().map(|a| big.norm_to_half(a)).collect();
            image.sort_unstable();
            image.dedup();
            assert_eq!(image.len() as u32, half);
        }
    }
}
