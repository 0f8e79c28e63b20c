use dessin_core::partition::{
    bivalent_with_order, connected, constraint_residual, count, count_table, integral_points_series,
    partition_function, partition_function_bivalent, virasoro_residual, z_one, z_one_flow_residuals, CountKey,
    FlowOrder, QSeries,
};
use dessin_core::ratseries::{rat, Caps, Marker, Monomial, Poly, Rational};
use num_traits::Zero;
use proptest::prelude::*;
use std::sync::OnceLock;

static SERIES: OnceLock<QSeries> = OnceLock::new();

fn poly(terms: &[(&[u32], Rational)], cap: u32) -> Poly {
    Poly::from_terms(
        terms.iter().map(|(p, c)| (Monomial::from_parts(p), c.clone())),
        Caps::degree(cap),
    )
}

#[test]
fn first_layers() {
    let z = partition_function(2, false);
    assert_eq!(z.layer(0).unwrap(), &Poly::one(Caps::degree(0)));
    assert_eq!(z.layer(1).unwrap(), &poly(&[(&[2], rat(1, 1)), (&[1, 1], rat(1, 2))], 2));
    let z2 = poly(
        &[
            (&[1, 1, 1, 1], rat(1, 8)),
            (&[2, 1, 1], rat(3, 2)),
            (&[2, 2], rat(3, 2)),
            (&[3, 1], rat(3, 1)),
            (&[4], rat(3, 1)),
        ],
        4,
    );
    assert_eq!(z.layer(2).unwrap(), &z2);
}

#[test]
fn connected_layers() {
    let z = partition_function(3, false);
    let c = connected(&z).unwrap();
    assert_eq!(c.layer(1), z.layer(1));
    assert_eq!(c.layer(2).unwrap().coeff(&Monomial::from_parts(&[2, 2])), rat(1, 1));
    assert!(c.layer(0).is_none_or(Poly::is_zero));
}

#[test]
fn small_counts() {
    let c = connected(&partition_function(3, true)).unwrap();
    let h = |g, np, nm, a: &[u32]| count(&c, &CountKey::new(g, np, nm, a)).unwrap();
    assert_eq!(h(0, 1, 2, &[2]), rat(1, 2));
    assert_eq!(h(0, 2, 1, &[1, 1]), rat(1, 1));
    assert_eq!(h(1, 1, 1, &[4]), rat(1, 4));
    assert_eq!(h(0, 1, 3, &[4]), rat(1, 2));
}

#[test]
fn inadmissible_keys_count_zero() {
    let c = connected(&partition_function(3, true)).unwrap();
    assert!(count(&c, &CountKey::new(0, 1, 2, &[3])).unwrap().is_zero());
    assert!(count(&c, &CountKey::new(0, 2, 2, &[4, 0])).unwrap().is_zero());
    assert!(!CountKey::new(0, 1, 1, &[2]).is_stable());
    assert!(CountKey::bivalent(0, 1, 1, &[1], 1).is_stable());
}

#[test]
fn bivalent_layers() {
    let zb = partition_function_bivalent(2, 3, false);
    assert_eq!(zb.layer2(1, 0).unwrap(), &poly(&[(&[1], rat(1, 1))], 1));
    let z = partition_function(3, false);
    for d in 0..=3 {
        assert_eq!(zb.layer2(0, d), z.layer(d), "layer {d}");
    }
}

#[test]
fn flow_order_is_irrelevant() {
    let a = bivalent_with_order(3, 3, true, FlowOrder::QuadFirst);
    let b = bivalent_with_order(3, 3, true, FlowOrder::BivalentFirst);
    assert_eq!(a, b);
}

#[test]
fn integral_points_first_layer() {
    let z = integral_points_series(2, false);
    let expected = poly(&[(&[1], rat(1, 1)), (&[2], rat(1, 1)), (&[1, 1], rat(1, 2))], 2);
    assert_eq!(z.layer(1).unwrap(), &expected);
}

#[test]
fn one_boundary_series() {
    let z1 = z_one(4);
    let seed = z1.layer(0).unwrap();
    assert_eq!(seed.coeff(&Monomial::marker_only(Marker::T0, 1)), rat(1, 1));
    assert_eq!(seed.len(), 1);
    assert!(z_one_flow_residuals(&z1).is_empty());
}

#[test]
fn virasoro_constraints_vanish() {
    let z = partition_function(4, false);
    for i in -1..=6 {
        assert!(virasoro_residual(&z, i).unwrap().is_empty(), "L_{i}");
    }
    assert!(constraint_residual(&z, 6).unwrap().is_zero());
}

#[test]
fn layers_are_homogeneous() {
    let z = partition_function(5, false);
    for (&(_, d), p) in z.layers() {
        assert!(p.terms().all(|(m, _)| m.degree() == 2 * d), "layer {d}");
    }
    let zb = partition_function_bivalent(3, 3, false);
    for (&(m, d), p) in zb.layers() {
        assert!(p.terms().all(|(mono, _)| mono.degree() == 2 * d + m), "layer ({m}, {d})");
    }
}

#[test]
fn count_table_matches_point_queries() {
    let c = connected(&partition_function(3, true)).unwrap();
    for (key, v) in count_table(&c).unwrap() {
        assert!(key.is_admissible());
        assert_eq!(count(&c, &key).unwrap(), v);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn counts_ignore_alpha_order(
        alpha in prop::collection::vec(1u32..=4, 1..=3),
        n_minus in 1u32..=4,
        g in 0u32..=1,
        seed in any::<u64>(),
    ) {
        let key = CountKey::new(g, alpha.len() as u32, n_minus, &alpha);
        prop_assume!(key.euler_degree().is_some_and(|d| d <= 4));
        let c = SERIES.get_or_init(|| connected(&partition_function(4, true)).unwrap());
        let mut shuffled = alpha.clone();
        let len = shuffled.len();
        shuffled.rotate_left((seed as usize) % len);
        let a = count(c, &key).unwrap();
        let b = count(c, &CountKey::new(g, len as u32, n_minus, &shuffled)).unwrap();
        prop_assert_eq!(a, b);
    }
}
