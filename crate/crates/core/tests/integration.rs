use std::sync::Arc;

use hilok_core::ext::{existence_check, make_extension, norm_group_oracle, norm_symbol, LElement, SymbolEntry};
use hilok_core::forms::QForm;
use hilok_core::hcoh::CohClass;
use hilok_core::kmilnor::{parse_class, KClass};
use hilok_core::recip::{pair, CharacterTable};
use hilok_core::tower::{parse_spec, TowerElement, TowerSpec};
use hilok_core::Error;

fn spec(text: &str) -> Arc<TowerSpec> {
    parse_spec(text, None).unwrap()
}

fn el(s: &Arc<TowerSpec>, text: &str) -> TowerElement {
    TowerElement::parse(s, text).unwrap()
}

#[test]
fn kernel_matches_oracle_at_p3() {
    let s = spec("F(3)((t))");
    for a in ["t^-1", "2*t^-2", "t^-2 + t^-1", "1", "t^-4 + 1"] {
        let r = existence_check(&CohClass::h1_class(&el(&s, a)), 5).unwrap();
        assert_eq!(r.index, 3, "{a}");
        assert_eq!(r.oracle_match, Some(true), "{a}");
        assert_eq!(r.oracle_index, Some(3), "{a}");
    }
}

#[test]
fn kernel_matches_oracle_over_f4() {
    let s = spec("F(2^2)((t))");
    for a in ["t^-1", "w*t^-3", "w"] {
        let r = existence_check(&CohClass::h1_class(&el(&s, a)), 4).unwrap();
        assert!(r.passed(), "{a}: {}", r.to_json());
        assert_eq!(r.oracle_index, Some(2));
    }
}

#[test]
fn norm_group_shrinks_with_break() {
    // the conductor is t + 1: below it the norm group is everything
    let s = spec("F(2)((t))");
    let e = make_extension(&el(&s, "t^-3")).unwrap();
    assert_eq!(norm_group_oracle(&e, 3).unwrap().index(), 1);
    assert_eq!(norm_group_oracle(&e, 4).unwrap().index(), 2);
    assert_eq!(norm_group_oracle(&e, 7).unwrap().index(), 2);
}

#[test]
fn pairing_through_parsed_inputs() {
    let s = spec("F(2)((t))((u))");
    let w = CohClass::as_class(2, QForm::parse(&s, "(u^-1) dlog t").unwrap()).unwrap();
    let xi = parse_class(&s, "{u}").unwrap();
    assert_eq!(pair(&w, &xi).unwrap(), 0);
    let w1 = CohClass::h1_class(&el(&s, "u^-1"));
    assert_eq!(pair(&w1, &parse_class(&s, "{1+u, t}").unwrap()).unwrap(), 1);
    assert_eq!(pair(&w1, &parse_class(&s, "{1+u, t} + {1+u, t}").unwrap()).unwrap(), 0);
    assert!(matches!(pair(&w1, &parse_class(&s, "{t}").unwrap()), Err(Error::DegreeMismatch { .. })));
}

#[test]
fn json_round_trips_across_modules() {
    let s = spec("F(3)((t))((u))@prec=8,8");
    let x = el(&s, "1/(1 + t*u)");
    assert!(hilok_core::tower::agree(&TowerElement::from_json(&x.to_json()).unwrap(), &x));
    let k = parse_class(&s, "{1+t, u} - 2{t, u}").unwrap();
    let k2 = KClass::from_json(&k.to_json()).unwrap();
    assert!(k.sub(&k2).unwrap().is_zero().unwrap());
    let w = CohClass::h1_class(&el(&s, "t^-2*u^-1"));
    let w2 = CohClass::from_json(&w.to_json()).unwrap();
    assert!(w.equals(&w2).unwrap());
}

#[test]
fn norms_of_symbols_are_in_character_kernel() {
    let s = spec("F(3)((t))((u))@prec=8,8");
    let e = make_extension(&el(&s, "u^-2")).unwrap();
    let th = LElement::theta(&e);
    for y in ["t", "1+t", "u", "1+u*t"] {
        let x = th.scale(&el(&s, "u")).add(&LElement::one(&e));
        let xi = norm_symbol(&[SymbolEntry::L(x), SymbolEntry::K(el(&s, y))]).unwrap();
        assert_eq!(pair(e.class(), &xi).unwrap(), 0, "{y}");
    }
}

#[test]
fn character_detects_break() {
    let s = spec("F(2)((t))");
    let chi = CohClass::h1_class(&el(&s, "t^-3"));
    let t3 = CharacterTable::new(&chi, 3).unwrap();
    let t4 = CharacterTable::new(&chi, 4).unwrap();
    // U_3 is not in the kernel, U_4 is
    assert!(!t3.stable_under(&CharacterTable::new(&chi, 5).unwrap()));
    assert!(t4.stable_under(&CharacterTable::new(&chi, 6).unwrap()));
    assert_eq!(t4.kernel_index(), 2);
}
