use dessin_core::ratseries::{
    catalan, laurent_compose, laurent_mul, poly_exp, poly_log, rat, solve_disc, Caps, LaurentSeries, Monomial, Poly,
    Rational, SeriesError, UPoly,
};
use num_traits::{One, Zero};
use proptest::prelude::*;

fn poly(terms: &[(&[u32], Rational)], cap: u32) -> Poly {
    Poly::from_terms(
        terms.iter().map(|(p, c)| (Monomial::from_parts(p), c.clone())),
        Caps::degree(cap),
    )
}

fn one(cap: u32) -> Poly {
    Poly::one(Caps::degree(cap))
}

#[test]
fn small_products() {
    let t1 = poly(&[(&[1], rat(1, 1))], 2);
    assert_eq!(t1.mul(&t1, 2).unwrap(), poly(&[(&[1, 1], rat(1, 1))], 2));

    let a = poly(&[(&[], rat(1, 1)), (&[2], rat(1, 1))], 4);
    let b = poly(&[(&[], rat(1, 1)), (&[2], rat(-1, 1))], 4);
    assert_eq!(a.mul(&b, 4).unwrap(), poly(&[(&[], rat(1, 1)), (&[2, 2], rat(-1, 1))], 4));

    let z1 = poly(&[(&[2], rat(1, 1)), (&[1, 1], rat(1, 2))], 4);
    let sq = poly(
        &[(&[2, 2], rat(1, 1)), (&[2, 1, 1], rat(1, 1)), (&[1, 1, 1, 1], rat(1, 4))],
        4,
    );
    assert_eq!(z1.mul(&z1, 4).unwrap(), sq);
}

#[test]
fn product_beyond_operand_cap_is_refused() {
    let t1 = poly(&[(&[1], rat(1, 1))], 2);
    assert!(matches!(t1.mul(&t1, 3), Err(SeriesError::CapViolation { .. })));
}

#[test]
fn exp_and_log() {
    assert_eq!(poly_exp(&Poly::zero(Caps::degree(4)), 4).unwrap(), one(4));

    let t1 = poly(&[(&[1], rat(1, 1))], 3);
    let expected = poly(
        &[
            (&[], rat(1, 1)),
            (&[1], rat(1, 1)),
            (&[1, 1], rat(1, 2)),
            (&[1, 1, 1], rat(1, 6)),
        ],
        3,
    );
    assert_eq!(poly_exp(&t1, 3).unwrap(), expected);

    let z1 = poly(&[(&[2], rat(1, 1)), (&[1, 1], rat(1, 2))], 6);
    assert_eq!(poly_log(&poly_exp(&z1, 6).unwrap(), 6).unwrap(), z1);
}

#[test]
fn exp_and_log_domains() {
    assert_eq!(poly_exp(&one(2), 2), Err(SeriesError::ExpConstantTerm));
    let t1 = poly(&[(&[1], rat(1, 1))], 2);
    assert_eq!(poly_log(&t1, 2), Err(SeriesError::LogConstantTerm));
}

#[test]
fn disc_series_is_catalan() {
    let u = solve_disc(11);
    let odd: Vec<Rational> = [1, 3, 5, 7].iter().map(|&k| u.coeff(k)).collect();
    assert_eq!(odd, vec![rat(1, 1), rat(1, 1), rat(2, 1), rat(5, 1)]);
    assert!(u.coeff(2).is_zero());
    for k in 0..=5 {
        assert_eq!(u.coeff(2 * k as i64 + 1), catalan(k));
    }
}

#[test]
fn disc_series_solves_its_quadratic() {
    let u = solve_disc(15);
    let x = LaurentSeries::exact("x", [(-1, Rational::one())]);
    let one = LaurentSeries::exact("x", [(0, Rational::one())]);
    let residual = laurent_mul(&u, &u).sub(&laurent_mul(&x, &u)).add(&one);
    assert!(residual.is_zero_in_window(), "{residual}");
}

#[test]
fn composition() {
    let y = LaurentSeries::exact("y", [(-1, Rational::one())]);
    let inv_x = LaurentSeries::exact("x", [(1, Rational::one())]);
    let c = laurent_compose(&y, &inv_x).unwrap();
    assert_eq!(c.coeff(1), Rational::one());
    assert_eq!(c.coeffs().count(), 1);

    let u = solve_disc(9);
    let y2 = LaurentSeries::exact("y", [(-2, Rational::one())]);
    let c = laurent_compose(&y2, &u).unwrap();
    let sq = laurent_mul(&u, &u);
    for k in 0..=9 {
        assert_eq!(c.coeff(k), sq.coeff(k), "x^-{k}");
    }

    let bad = LaurentSeries::exact("y", [(-1, Rational::one()), (1, Rational::one())]);
    assert_eq!(laurent_compose(&bad, &u), Err(SeriesError::NegativePower));
    let flat = LaurentSeries::exact("x", [(0, Rational::one())]);
    assert_eq!(laurent_compose(&y, &flat), Err(SeriesError::ZeroOrder));
}

#[test]
fn univariate_division() {
    let a = UPoly::from_ints(&[-1, 0, 0, 1]);
    let d = UPoly::from_ints(&[-1, 1]);
    let (q, r) = a.divrem(&d).unwrap();
    assert_eq!(q, UPoly::from_ints(&[1, 1, 1]));
    assert!(r.is_zero());
    assert_eq!(a.root_multiplicity(&Rational::one()), 1);
    assert!(a.divrem(&UPoly::zero()).is_err());
}

fn arb_poly(cap: u32) -> impl Strategy<Value = Poly> {
    let term = (prop::collection::vec(1u32..=4, 0..=4), -5i64..=5, 1i64..=4);
    prop::collection::vec(term, 0..6).prop_map(move |ts| {
        let mut p = Poly::zero(Caps::degree(cap));
        for (parts, n, d) in ts {
            if parts.iter().sum::<u32>() <= cap {
                p.add_term(Monomial::from_parts(&parts), rat(n, d));
            }
        }
        p
    })
}

const CAP: u32 = 6;

proptest! {
    #[test]
    fn ring_laws(a in arb_poly(CAP), b in arb_poly(CAP), c in arb_poly(CAP)) {
        let ab = a.mul(&b, CAP).unwrap();
        prop_assert_eq!(&ab, &b.mul(&a, CAP).unwrap());
        prop_assert_eq!(ab.mul(&c, CAP).unwrap(), a.mul(&b.mul(&c, CAP).unwrap(), CAP).unwrap());
        prop_assert_eq!(
            a.mul(&b.add(&c), CAP).unwrap(),
            ab.add(&a.mul(&c, CAP).unwrap())
        );
        prop_assert_eq!(a.mul(&one(CAP), CAP).unwrap(), a.clone());
        prop_assert!(a.sub(&a).is_zero());
    }

    #[test]
    fn log_inverts_exp(a in arb_poly(CAP)) {
        let p = a.sub(&Poly::constant(a.constant_term(), Caps::degree(CAP)));
        prop_assert_eq!(poly_log(&poly_exp(&p, CAP).unwrap(), CAP).unwrap(), p);
    }

    #[test]
    fn truncation_is_coherent(a in arb_poly(CAP), b in arb_poly(CAP), lower in 0u32..CAP) {
        let low = Caps::degree(lower);
        let high = a.mul(&b, CAP).unwrap().truncate(low);
        prop_assert_eq!(high, a.truncate(low).mul(&b.truncate(low), lower).unwrap());
        let p = a.sub(&Poly::constant(a.constant_term(), Caps::degree(CAP)));
        prop_assert_eq!(
            poly_exp(&p, CAP).unwrap().truncate(low),
            poly_exp(&p.truncate(low), lower).unwrap()
        );
    }

    #[test]
    fn stored_terms_respect_caps(a in arb_poly(CAP), b in arb_poly(CAP)) {
        let p = a.mul(&b, CAP).unwrap();
        for (m, c) in p.terms() {
            prop_assert!(m.degree() <= CAP);
            prop_assert!(!c.is_zero());
        }
    }
}
