use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::{json, Value};

use hilok_core::ext::{make_extension, norm_congruence_check, norm_symbol, ASExt, ExtKind, Family, LElement, SymbolEntry};
use hilok_core::forms::QForm;
use hilok_core::hcoh::CohClass;
use hilok_core::kmilnor::KClass;
use hilok_core::recip::pair;
use hilok_core::tower::{parse_spec, TowerElement, TowerSpec};
use hilok_core::Result;

use crate::{Failure, Outcome};

/// Sum of `terms` random monomials, outer exponent in `lo..=hi`, inner in `-2..=2`.
pub fn random_element(s: &Arc<TowerSpec>, rng: &mut ChaCha8Rng, lo: i64, hi: i64, terms: usize) -> TowerElement {
    let q = s.field().order();
    let mut x = TowerElement::zero(s);
    for _ in 0..terms {
        let mut e: Vec<i64> = (0..s.n() - 1).map(|_| rng.gen_range(-2..=2)).collect();
        e.push(rng.gen_range(lo..=hi));
        let c = rng.gen_range(1..q);
        x = &x + &TowerElement::monomial(s, &e, c as _);
    }
    x
}

/// A random element whose leading monomial is `t_n^lo` times a nonzero constant.
pub fn random_with_lead(s: &Arc<TowerSpec>, rng: &mut ChaCha8Rng, lo: i64, span: i64) -> TowerElement {
    let q = s.field().order();
    let mut e = vec![0; s.n()];
    e[s.n() - 1] = lo;
    let lead = TowerElement::monomial(s, &e, rng.gen_range(1..q) as _);
    &lead + &random_element(s, rng, lo + 1, lo + span, 2)
}

fn random_unit(s: &Arc<TowerSpec>, rng: &mut ChaCha8Rng) -> TowerElement {
    let q = s.field().order();
    let c = TowerElement::constant(s, rng.gen_range(1..q) as _);
    &c + &random_element(s, rng, 1, 4, 2)
}

fn random_integral_l(ext: &Arc<ASExt>, rng: &mut ChaCha8Rng) -> LElement {
    let s = ext.spec();
    let (_, g) = LElement::integral_basis(ext);
    let mut x = LElement::from_base(ext, &random_element(s, rng, 0, 3, 2));
    let mut gk = LElement::one(ext);
    for _ in 1..ext.p() {
        gk = gk.mul(&g);
        x = x.add(&gk.scale(&random_element(s, rng, 0, 3, 2)));
    }
    x
}

fn one_sample(ext: &Arc<ASExt>, fam: Family, rng: &mut ChaCha8Rng) -> Result<Value> {
    let s = ext.spec();
    let p = s.p() as i64;
    let t = ext.ram_break().t;
    let (x, i) = match fam {
        Family::One => {
            let f = if ext.kind() == ExtKind::Inseparable { p } else { 1 };
            let choices: Vec<i64> = (1..t).filter(|i| i % f == 0).collect();
            let i = if choices.is_empty() { 1 } else { choices[rng.gen_range(0..choices.len())] };
            let (pi_l, _) = LElement::integral_basis(ext);
            let x = pi_l.pow((i / f) as u64).mul(&random_integral_l(ext, rng));
            (x, i)
        }
        Family::Two | Family::TwoTwisted(_) => (LElement::from_base(ext, &random_element(s, rng, 0, 4, 3)), 0),
        Family::Three => (LElement::from_base(ext, &random_with_lead(s, rng, t + 1, 3)), 0),
    };
    let r = norm_congruence_check(ext, fam, &x, i)?;
    Ok(json!({ "x": x.to_string(), "i": i, "holds": r.holds, "report": r.to_json() }))
}

pub fn random_normchecks(ext: &Arc<ASExt>, fam: Family, n: usize, seed: u64) -> std::result::Result<Value, Failure> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    let mut holds = 0;
    for _ in 0..n {
        let v = one_sample(ext, fam, &mut rng).map_err(|e| Failure::lib("normcheck", Some(&fam.name()), e))?;
        if v["holds"] == json!(true) {
            holds += 1;
        }
        out.push(v);
    }
    Ok(json!({ "count": n, "holds": holds, "all_hold": holds == n, "cases": out }))
}

struct Tally {
    name: &'static str,
    run: usize,
    failed: Vec<String>,
}

impl Tally {
    fn new(name: &'static str) -> Tally {
        Tally { name, run: 0, failed: Vec::new() }
    }

    fn record(&mut self, ok: Result<bool>, what: impl FnOnce() -> String) {
        self.run += 1;
        match ok {
            Ok(true) => {}
            Ok(false) => self.failed.push(what()),
            Err(e) if e.is_precision() => self.run -= 1,
            Err(e) => self.failed.push(format!("{}: {e}", what())),
        }
    }

    fn json(&self) -> Value {
        json!({ "check": self.name, "run": self.run, "failed": self.failed.len(), "failures": self.failed.iter().take(5).collect::<Vec<_>>() })
    }
}

/// A small randomized battery over the library's identities.
pub fn run(cases: usize, seed: u64) -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let err = |e| Failure::lib("selftest", None, e);
    let s1 = parse_spec("F(2)((t))@prec=16", None).map_err(err)?;
    let s2 = parse_spec("F(3)((t))((u))@prec=10,10", None).map_err(err)?;

    let mut steinberg = Tally::new("steinberg {x, 1-x} = 0");
    let mut reduce = Tally::new("reduce is idempotent and class-preserving");
    let mut recip = Tally::new("norm symbols pair to zero");
    let mut bilinear = Tally::new("pairing is additive in the symbol");
    for k in 0..cases {
        let s = if k % 2 == 0 { &s1 } else { &s2 };
        let one = TowerElement::one(s);
        let x = random_with_lead(s, &mut rng, 1, 4);
        let y = random_unit(s, &mut rng);
        let sym = vec![x.clone(), &one - &x];
        steinberg.record(KClass::symbol(s, sym).and_then(|c| c.is_zero()), || format!("x = {x}"));

        let a = random_element(s, &mut rng, -4, 2, 3);
        let c = CohClass::h1_class(&a);
        reduce.record(
            (|| {
                let r = c.reduce()?;
                Ok(r.reduce()?.rep() == r.rep() && c.sub(&r)?.is_zero()?)
            })(),
            || format!("a = {a}"),
        );

        let Ok(ext) = make_extension(&a) else { continue };
        let z = random_with_lead(s, &mut rng, -1, 3);
        let lz = LElement::from_base(&ext, &z).add(&LElement::theta(&ext).scale(&random_unit(s, &mut rng)));
        let mut entries = vec![SymbolEntry::L(lz.clone())];
        if s.n() == 2 {
            entries.push(SymbolEntry::K(y.clone()));
        }
        recip.record(norm_symbol(&entries).and_then(|xi| pair(ext.class(), &xi)).map(|v| v == 0), || format!("a = {a}, x = {lz}"));

        let w = if s.n() == 1 { c.clone() } else { CohClass::as_class(2, QForm::dlog(&y).map_err(err)?.scale(&a)).map_err(err)? };
        let q = s.n() + 1 - w.degree();
        let u: Vec<TowerElement> = (0..q).map(|_| random_unit(s, &mut rng)).collect();
        let mut v = u.clone();
        v[0] = random_with_lead(s, &mut rng, 0, 3);
        let mut uv = u.clone();
        uv[0] = &u[0] * &v[0];
        bilinear.record(
            (|| {
                let lhs = pair(&w, &KClass::symbol(s, uv.clone())?)?;
                let rhs = (pair(&w, &KClass::symbol(s, u.clone())?)? + pair(&w, &KClass::symbol(s, v.clone())?)?) % s.p();
                Ok(lhs == rhs)
            })(),
            || format!("w = {w}"),
        );
    }
    let checks = [steinberg, reduce, recip, bilinear];
    let passed = checks.iter().all(|c| c.failed.is_empty());
    Ok(json!({ "seed": seed, "cases": cases, "checks": checks.iter().map(Tally::json).collect::<Vec<_>>(), "passed": passed }))
}
