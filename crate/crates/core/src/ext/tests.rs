use super::*;
use crate::gf::Raw;
use crate::kmilnor::parse_class;
use crate::recip::pair;
use crate::tower::parse_spec;
use proptest::prelude::*;

fn spec(text: &str) -> Arc<TowerSpec> {
    parse_spec(text, None).unwrap()
}

fn el(s: &Arc<TowerSpec>, text: &str) -> TowerElement {
    TowerElement::parse(s, text).unwrap()
}

fn ext(s: &Arc<TowerSpec>, a: &str) -> Arc<ASExt> {
    make_extension(&el(s, a)).unwrap()
}

#[test]
fn make_extension_examples() {
    let s = spec("F(2)((t))");
    let e = ext(&s, "t^-1");
    assert_eq!(e.ram_break(), RamData { t: 1, kind: ExtKind::Ramified });
    assert_eq!(ext(&s, "1").ram_break(), RamData { t: 0, kind: ExtKind::Unramified });
    assert_eq!(make_extension(&el(&s, "t")).unwrap_err(), Error::TrivialExtension);
    assert_eq!(ext(&s, "t^-3").ram_break().t, 3);
    // reduction replaces a by its canonical form
    assert_eq!(ext(&s, "t^-2 + t").a(), &el(&s, "t^-1"));
    let s2 = spec("F(2)((t))((u))");
    assert_eq!(ext(&s2, "t*u^-2").ram_break(), RamData { t: 2, kind: ExtKind::Inseparable });
    assert_eq!(ext(&s2, "t^-1").ram_break().kind, ExtKind::Unramified);
}

#[test]
fn norm_examples() {
    let s = spec("F(2)((t))");
    let e = ext(&s, "t^-1");
    let theta = LElement::theta(&e);
    assert_eq!(theta.norm().unwrap(), el(&s, "t^-1"));
    let t = el(&s, "t");
    assert_eq!(theta.scale(&t).norm().unwrap(), t);
    let c = el(&s, "1+t");
    assert_eq!(LElement::from_base(&e, &c).norm().unwrap(), el(&s, "(1+t)^2"));
    let s3 = spec("F(3)((t))");
    let e3 = ext(&s3, "t^-2");
    assert_eq!(LElement::theta(&e3).norm().unwrap(), el(&s3, "t^-2"));
    assert_eq!(LElement::uniformizer(&e3).unwrap().norm().unwrap().outer_valuation().unwrap(), 1);
    assert!(LElement::new(&e, vec![]).unwrap().norm().is_err());
}

#[test]
fn norm_symbol_examples() {
    let s = spec("F(2)((t))");
    let e = ext(&s, "t^-1");
    let tt = LElement::theta(&e).scale(&el(&s, "t"));
    let k = norm_symbol(&[SymbolEntry::L(tt.clone())]).unwrap();
    assert!(k.sub(&parse_class(&s, "{t}").unwrap()).unwrap().is_zero().unwrap());
    let c = LElement::from_base(&e, &el(&s, "1+t"));
    assert!(norm_symbol(&[SymbolEntry::L(c.clone()), SymbolEntry::K(el(&s, "t"))]).unwrap().is_zero().unwrap());
    assert_eq!(norm_symbol(&[SymbolEntry::L(c.clone()), SymbolEntry::L(c)]).unwrap_err(), Error::MultipleLEntries);
    let s2 = spec("F(2)((t))((u))");
    let e2 = ext(&s2, "t^-1");
    let tt = LElement::theta(&e2).scale(&el(&s2, "t"));
    let k = norm_symbol(&[SymbolEntry::L(tt), SymbolEntry::K(el(&s2, "u"))]).unwrap();
    assert!(k.sub(&parse_class(&s2, "{t, u}").unwrap()).unwrap().is_zero().unwrap());
}

#[test]
fn norm_congruence_examples() {
    let s = spec("F(2)((t))@prec=20");
    let e = ext(&s, "t^-1");
    let one = LElement::one(&e);
    let r = norm_congruence_check(&e, Family::Two, &one, 0).unwrap();
    assert!(r.holds, "{r:?}");
    let zero = LElement::from_base(&e, &TowerElement::zero(&s));
    assert!(norm_congruence_check(&e, Family::Two, &zero, 0).unwrap().holds);
    assert!(matches!(norm_congruence_check(&e, Family::One, &zero, 1), Err(Error::HypothesisViolation(_))));
    let e3 = ext(&s, "t^-3");
    let pi = LElement::uniformizer(&e3).unwrap();
    for i in [1, 2] {
        let x = pi.pow(i as u64).scale(&el(&s, "1+t"));
        assert!(norm_congruence_check(&e3, Family::One, &x, i).unwrap().holds);
    }
    let y = LElement::from_base(&e3, &el(&s, "t^4 + t^7"));
    let r = norm_congruence_check(&e3, Family::Three, &y, 0).unwrap();
    assert!(r.holds, "{r:?}");
    let y = LElement::from_base(&e3, &el(&s, "t^2"));
    assert!(matches!(norm_congruence_check(&e3, Family::Three, &y, 0), Err(Error::HypothesisViolation(_))));
}

#[test]
fn norm_congruences_unramified_and_inseparable() {
    let s = spec("F(2)((t))@prec=16");
    let e = ext(&s, "1");
    let x = LElement::from_base(&e, &el(&s, "1+t+t^3"));
    assert!(norm_congruence_check(&e, Family::Two, &x, 0).unwrap().holds);
    let y = LElement::from_base(&e, &el(&s, "t + t^2"));
    assert!(norm_congruence_check(&e, Family::Three, &y, 0).unwrap().holds);
    let s2 = spec("F(2)((t))((u))@prec=12,12");
    let e2 = ext(&s2, "t*u^-2");
    let x = LElement::from_base(&e2, &el(&s2, "1+t*u"));
    assert!(norm_congruence_check(&e2, Family::Two, &x, 0).unwrap().holds);
    assert!(norm_congruence_check(&e2, Family::TwoTwisted(1), &x, 0).unwrap().holds);
    assert!(norm_congruence_check(&e2, Family::TwoTwisted(-1), &x, 0).unwrap().holds);
}

#[test]
fn oracle_examples() {
    let s = spec("F(2)((t))@prec=24");
    let e = ext(&s, "t^-1");
    let g = norm_group_oracle(&e, 4).unwrap();
    assert_eq!(g.index(), 2);
    let lab = |name: &str| g.labels.iter().position(|l| l.to_string() == name).unwrap();
    let mut v = vec![0; g.labels.len()];
    v[lab("gr0.2(1)")] = 1;
    assert!(g.contains(&v));
    let mut v = vec![0; g.labels.len()];
    v[lab("U1.1[w^0;T();S()]")] = 1;
    assert!(!g.contains(&v));
    assert_eq!(norm_group_oracle(&e, 1).unwrap().index(), 1);
    let u = ext(&s, "1");
    let g = norm_group_oracle(&u, 4).unwrap();
    assert_eq!(g.index(), 2);
    assert!(matches!(norm_group_oracle(&e, 60), Err(Error::TooLarge(_))));
}

#[test]
fn existence_examples() {
    let s = spec("F(2)((t))@prec=24");
    for a in ["t^-1", "1", "t^-3 + 1"] {
        let chi = CohClass::h1_class(&el(&s, a));
        let r = existence_check(&chi, 4).unwrap();
        assert_eq!(r.index, 2, "{a}");
        assert_eq!(r.oracle_match, Some(true), "{a}");
        assert!(r.passed(), "{a}: {:?}", r.norm_failures);
    }
    let s2 = spec("F(2)((t))((u))@prec=10,10");
    let r = existence_check(&CohClass::h1_class(&el(&s2, "t^-1")), 4).unwrap();
    assert_eq!(r.index, 2);
    assert!(r.norm_failures.is_empty(), "{:?}", r.norm_failures);
    assert!(r.norms_checked > 0);
}

#[test]
fn breaks_match_t_level() {
    let s = spec("F(3)((t))");
    for a in ["t^-1", "t^-2 + t^-1", "2*t^-4", "t^-9 + t^-5", "1", "t^-3 + 1"] {
        let e = ext(&s, a);
        assert_eq!(e.ram_break().t, CohClass::h1_class(&el(&s, a)).t_level().unwrap());
    }
}

// ---- properties ----

fn arb_k(s: Arc<TowerSpec>, lo: i64) -> impl Strategy<Value = TowerElement> {
    let n = s.n();
    let q = s.field().order() as Raw;
    prop::collection::vec((prop::collection::vec(lo..3, n), 0..q), 1..4).prop_map(move |terms| {
        terms.into_iter().fold(TowerElement::zero(&s), |acc, (e, c)| &acc + &TowerElement::monomial(&s, &e, c))
    })
}

fn arb_l(e: Arc<ASExt>) -> impl Strategy<Value = LElement> {
    let p = e.p() as usize;
    prop::collection::vec(arb_k(e.spec().clone(), -1), p)
        .prop_filter_map("zero", move |c| {
            let x = LElement::new(&e, c).unwrap();
            (!x.is_known_zero()).then_some(x)
        })
}

fn exts() -> impl Strategy<Value = Arc<ASExt>> {
    prop::sample::select(vec![
        ("F(2)((t))@prec=16", "t^-1"),
        ("F(2)((t))@prec=16", "t^-3"),
        ("F(2)((t))@prec=16", "1"),
        ("F(3)((t))@prec=16", "t^-2"),
        ("F(2)((t))((u))@prec=8,8", "u^-1"),
        ("F(2)((t))((u))@prec=8,8", "t^-1"),
    ])
    .prop_map(|(s, a)| {
        let s = parse_spec(s, None).unwrap();
        make_extension(&TowerElement::parse(&s, a).unwrap()).unwrap()
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn galois_invariant_and_multiplicative((_e, x, y) in exts().prop_flat_map(|e| (Just(e.clone()), arb_l(e.clone()), arb_l(e)))) {
        let nx = x.norm().unwrap();
        prop_assert!(crate::tower::agree(&nx, &x.conjugate(1).norm().unwrap()));
        let nxy = x.mul(&y).norm().unwrap();
        prop_assert!(crate::tower::agree(&nxy, &(&nx * &y.norm().unwrap())));
    }

    #[test]
    fn norms_pair_to_zero((e, x, y) in exts().prop_flat_map(|e| {
        let s = e.spec().clone();
        (Just(e.clone()), arb_l(e), arb_k(s, -1))
    })) {
        let s = e.spec().clone();
        let mut entries = vec![SymbolEntry::L(x)];
        if s.n() == 2 {
            prop_assume!(!y.is_known_zero());
            entries.push(SymbolEntry::K(y));
        }
        let xi = norm_symbol(&entries).unwrap();
        prop_assert_eq!(pair(e.class(), &xi).unwrap(), 0);
    }
}
