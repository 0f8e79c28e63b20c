use dessin_core::ratseries::{catalan, rat, solve_disc};
use dessin_core::spectral::{
    bergman_check, kernel_normalization, laplace_w, loop_check, norbury_substitution_check, tr_check, tr_omega,
    u0_identity, SpectralError,
};
use dessin_core::tutte::r_tilde;
use num_traits::Zero;
use proptest::prelude::*;

#[test]
fn disc_correlator_is_catalan() {
    let w = laplace_w(0, 1, 12);
    let u = solve_disc(13);
    for k in 0..=6u32 {
        assert_eq!(w.coeff(&[2 * k]), catalan(k));
        let xi = w.xi_series();
        assert_eq!(xi.get(&vec![2 * k + 1]).cloned().unwrap_or_default(), u.coeff(2 * k as i64 + 1));
    }
}

#[test]
fn star_divides_by_perimeters() {
    let w = laplace_w(0, 2, 6);
    for (alpha, v) in w.star() {
        let prod: u32 = alpha.iter().product();
        assert_eq!(v * rat(prod as i64, 1), w.coeff(&alpha));
    }
}

#[test]
fn loop_equations_hold() {
    for (g, n) in [(0, 1), (1, 1), (0, 2), (0, 3)] {
        let r = loop_check(g, n, 8);
        assert!(r.passed(), "({g}, {n}): {:?}", r.residuals.first());
        assert!(r.checked > 0);
    }
}

#[test]
fn bergman_kernel() {
    let r = bergman_check(10);
    assert!(r.passed(), "{:?}", r.residuals.first());
}

#[test]
fn residue_recursion_matches_counts() {
    assert_eq!(kernel_normalization(), rat(-1, 2));
    for (g, n, order) in [(1, 1, 9), (0, 3, 8), (0, 4, 8), (1, 2, 8)] {
        let r = tr_check(g, n, order).unwrap();
        assert!(r.passed(), "({g}, {n}): {:?}", r.residuals.first());
    }
}

#[test]
fn one_point_differentials_are_rational() {
    for g in 1..=2 {
        let w = tr_omega(g, 1).unwrap();
        assert!(w.poles_confined());
        let f = w.to_rational_fn().unwrap();
        let (_, other) = f.poles_within(&[rat(1, 1), rat(-1, 1)]);
        assert!(!other);
    }
    assert!(tr_omega(0, 3).unwrap().to_rational_fn().is_none());
}

#[test]
fn unstable_types_are_rejected() {
    assert!(matches!(tr_omega(0, 1), Err(SpectralError::Unstable { .. })));
    assert!(matches!(tr_omega(0, 2), Err(SpectralError::Unstable { .. })));
    assert!(matches!(
        norbury_substitution_check(0, 4, 8),
        Err(SpectralError::Unsupported { .. })
    ));
}

#[test]
fn tree_series_identity() {
    assert!(u0_identity(12).passed());
}

#[test]
fn substitution_into_lattice_counts() {
    assert!(norbury_substitution_check(1, 1, 9).unwrap().passed());
    assert!(norbury_substitution_check(0, 3, 8).unwrap().passed());
}

proptest! {
    #[test]
    fn odd_total_degree_vanishes(alpha in prop::collection::vec(0u32..=6, 2..=3), g in 0u32..=1) {
        prop_assume!(alpha.iter().sum::<u32>() % 2 == 1);
        prop_assert!(r_tilde(g, alpha.len() as u32, &alpha).is_zero());
    }

    #[test]
    fn correlators_are_symmetric(a in 0u32..=6, b in 0u32..=6) {
        let w = laplace_w(0, 2, 12);
        prop_assert_eq!(w.coeff(&[a, b]), w.coeff(&[b, a]));
    }
}
