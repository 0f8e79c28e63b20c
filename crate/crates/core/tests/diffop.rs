use dessin_core::diffop::{
    apply, commutator_check, conjugate_shift, constraint_c, virasoro_l, DiffOp, DiffOpError, Grading,
};
use dessin_core::ratseries::{int, rat, Caps, Marker, Monomial, Poly, Rational};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn poly(terms: &[(&[u32], Rational)], cap: u32) -> Poly {
    Poly::from_terms(
        terms.iter().map(|(p, c)| (Monomial::from_parts(p), c.clone())),
        Caps::degree(cap),
    )
}

fn shift_by(c: i64) -> Vec<(Monomial, Rational)> {
    vec![(Monomial::one(), int(c))]
}

#[test]
fn join_of_vacuum() {
    let out = apply(&DiffOp::w1_prime(), &Poly::one(Caps::degree(8)), 2).unwrap();
    assert_eq!(out, poly(&[(&[2], rat(1, 1)), (&[1, 1], rat(1, 2))], 2));
}

#[test]
fn w0_on_t1() {
    let out = apply(&DiffOp::w0(), &poly(&[(&[1], rat(1, 1))], 3), 2).unwrap();
    assert_eq!(out, poly(&[(&[2], rat(2, 1))], 2));
}

#[test]
fn second_application() {
    let z1 = poly(&[(&[2], rat(1, 1)), (&[1, 1], rat(1, 2))], 2);
    let expected = poly(
        &[
            (&[1, 1, 1, 1], rat(1, 4)),
            (&[2, 1, 1], rat(3, 1)),
            (&[2, 2], rat(3, 1)),
            (&[3, 1], rat(6, 1)),
            (&[4], rat(6, 1)),
        ],
        4,
    );
    assert_eq!(apply(&DiffOp::w1_prime(), &z1, 4).unwrap(), expected);
}

#[test]
fn inexact_window_is_refused() {
    let p = Poly::one(Caps::degree(2));
    assert!(matches!(
        apply(&virasoro_l(2).unwrap(), &p, 2),
        Err(DiffOpError::InexactWindow { .. })
    ));
    assert_eq!(virasoro_l(-2), Err(DiffOpError::VirasoroIndex(-2)));
}

#[test]
fn shifted_w0_gains_t1() {
    let shifted = conjugate_shift(&DiffOp::w0(), &shift_by(1));
    for m in [Monomial::one(), Monomial::from_parts(&[2, 1]), Monomial::from_parts(&[3])] {
        let mut expected = DiffOp::w0().apply_monomial(&m);
        expected.push((m.mul(&Monomial::var(1)), Rational::one()));
        expected.sort_by(|a, b| a.0.cmp(&b.0));
        let mut got = shifted.apply_monomial(&m);
        got.sort_by(|a, b| a.0.cmp(&b.0));
        assert_eq!(got, expected, "on {m}");
    }
}

#[test]
fn zero_shift_is_identity() {
    for op in [DiffOp::w0(), DiffOp::w1(), virasoro_l(3).unwrap()] {
        assert_eq!(conjugate_shift(&op, &shift_by(0)), op);
    }
}

#[test]
fn shifts_compose_additively() {
    let twice = conjugate_shift(&DiffOp::w1_prime(), &shift_by(1));
    assert_eq!(twice, conjugate_shift(&DiffOp::w1(), &shift_by(2)));
    assert_eq!(conjugate_shift(&twice, &shift_by(-2)), DiffOp::w1());
}

#[test]
fn gradings() {
    assert_eq!(DiffOp::w0().grading(), Grading::Homogeneous(1));
    for op in [DiffOp::w1(), DiffOp::p_plus(), DiffOp::p_minus(), DiffOp::w1_prime()] {
        assert_eq!(op.grading(), Grading::Homogeneous(2));
    }
    assert!(matches!(virasoro_l(1).unwrap().grading(), Grading::Mixed(_)));
}

#[test]
fn l0_contains_second_t0_derivative() {
    let t0_sq = Monomial::marker_only(Marker::T0, 2);
    let out = virasoro_l(0).unwrap().apply_monomial(&t0_sq);
    let constant: Rational = out
        .iter()
        .filter(|(m, _)| *m == Monomial::one())
        .map(|(_, c)| c.clone())
        .sum();
    assert_eq!(constant, int(2));
}

#[test]
fn constraint_kills_exponential_of_t0() {
    let c = constraint_c();
    let mut acc: Vec<(Monomial, Rational)> = Vec::new();
    let mut fact = Rational::one();
    for k in 0..=6u32 {
        if k > 0 {
            fact *= int(k as i64);
        }
        let m = Monomial::marker_only(Marker::T0, k).times_var(2, 1);
        for (om, oc) in c.apply_monomial(&m) {
            if om.marker(Marker::T0) < 6 {
                acc.push((om, oc / &fact));
            }
        }
    }
    let mut total: std::collections::BTreeMap<String, Rational> = Default::default();
    for (m, c) in acc {
        *total.entry(m.to_string()).or_insert_with(Rational::zero) += c;
    }
    assert!(total.values().all(Zero::is_zero), "{total:?}");
}

#[test]
fn flow_generators_commute() {
    assert!(commutator_check(&DiffOp::w0(), &DiffOp::w1(), None, &Rational::zero(), 8, 10, 2).passed());
    assert!(commutator_check(&DiffOp::w1(), &DiffOp::w1(), None, &Rational::zero(), 8, 10, 2).passed());
}

#[test]
fn bracket_sign_is_pinned() {
    let (lm, l0, l1) = (virasoro_l(-1).unwrap(), virasoro_l(0).unwrap(), virasoro_l(1).unwrap());
    assert!(commutator_check(&lm, &l1, Some(&l0), &int(-2), 8, 10, 3).passed());
    assert!(!commutator_check(&lm, &l1, Some(&l0), &int(2), 8, 10, 3).passed());
}

fn arb_monomial() -> impl Strategy<Value = Monomial> {
    (prop::collection::vec(1u32..=5, 0..=4), 0u32..=2)
        .prop_map(|(parts, k)| Monomial::from_parts(&parts).with_marker(Marker::T0, k))
}

fn homogeneous_ops() -> Vec<(DiffOp, i64)> {
    vec![
        (DiffOp::w0(), 1),
        (DiffOp::w1(), 2),
        (DiffOp::p_plus(), 2),
        (DiffOp::p_minus(), 2),
    ]
}

proptest! {
    #[test]
    fn homogeneous_operators_shift_degree_exactly(m in arb_monomial(), which in 0usize..4) {
        let (op, shift) = &homogeneous_ops()[which];
        for (out, c) in op.apply_monomial(&m) {
            prop_assert!(!c.is_zero());
            prop_assert_eq!(out.degree() as i64, m.degree() as i64 + shift);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn conjugation_preserves_brackets((i, j) in (-1i64..=2).prop_flat_map(|i| (Just(i), i + 1..=3)), s in -2i64..=2) {
        let conj = |k: i64| conjugate_shift(&virasoro_l(k).unwrap(), &shift_by(s));
        let expect = conj(i + j);
        let r = commutator_check(&conj(i), &conj(j), Some(&expect), &int(i - j), 5, 6, 2);
        prop_assert!(r.passed(), "{:?}", r.residuals.first());
        let w = commutator_check(
            &conjugate_shift(&DiffOp::w0(), &shift_by(s)),
            &conjugate_shift(&DiffOp::w1(), &shift_by(s)),
            None, &Rational::zero(), 5, 6, 2,
        );
        prop_assert!(w.passed());
    }
}

proptest! {
    #[test]
    fn apply_is_linear(a in arb_monomial(), b in arb_monomial(), x in -3i64..=3) {
        let cap = 12;
        let pa = Poly::monomial(a.strip_marker(Marker::T0), int(x), Caps::degree(cap));
        let pb = Poly::monomial(b.strip_marker(Marker::T0), Rational::one(), Caps::degree(cap));
        let op = DiffOp::w1_prime();
        let sum = apply(&op, &pa.add(&pb), cap - 2).unwrap();
        prop_assert_eq!(sum, apply(&op, &pa, cap - 2).unwrap().add(&apply(&op, &pb, cap - 2).unwrap()));
    }
}
