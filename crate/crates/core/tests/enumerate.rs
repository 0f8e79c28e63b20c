use dessin_core::enumerate::{
    count_dessins, count_dessins_by_classes, directed_map, directed_shape, for_each_directed_map, lattice_points,
    norbury_n, EnumError, EnumSpec, DEFAULT_DART_BUDGET,
};
use dessin_core::ratseries::{rat, Rational};
use dessin_core::suites;
use num_traits::Zero;
use proptest::prelude::*;

#[test]
fn small_counts() {
    let spec = EnumSpec::new(1, 0, 0, 1, 2, &[2]);
    assert_eq!(count_dessins(&spec, DEFAULT_DART_BUDGET).unwrap(), rat(1, 2));
    let spec = EnumSpec::new(2, 0, 1, 1, 1, &[4]);
    assert_eq!(count_dessins(&spec, DEFAULT_DART_BUDGET).unwrap(), rat(1, 4));
    let spec = EnumSpec::new(2, 0, 0, 1, 3, &[3]);
    assert!(count_dessins(&spec, DEFAULT_DART_BUDGET).unwrap().is_zero());
}

#[test]
fn budget_is_enforced() {
    let spec = EnumSpec::new(3, 0, 0, 1, 5, &[6]);
    assert_eq!(
        count_dessins(&spec, 8),
        Err(EnumError::Budget { darts: 12, budget: 8 })
    );
}

#[test]
fn lattice_point_basics() {
    let cylinder = directed_map(0, 1, &[0]);
    for k in 0..6 {
        assert_eq!(lattice_points(&cylinder, &[k], &[k]).unwrap(), 1);
    }
    assert_eq!(lattice_points(&cylinder, &[2], &[3]).unwrap(), 0);

    let map = directed_map(1, 0, &[1, 0]);
    let (_, n_plus, n_minus, _) = directed_shape(&map).unwrap();
    let zeros_plus = vec![0; n_plus as usize];
    let zeros_minus = vec![0; n_minus as usize];
    assert_eq!(lattice_points(&map, &zeros_plus, &zeros_minus).unwrap(), 1);
    assert!(matches!(
        lattice_points(&map, &[], &zeros_minus),
        Err(EnumError::TargetShape { .. })
    ));
}

#[test]
fn norbury_values() {
    for b in [1, 3, 5] {
        assert!(norbury_n(1, 1, &[b]).unwrap().is_zero());
    }
    assert!(norbury_n(1, 1, &[2]).unwrap().is_zero());
    // (b^2 - 4) / 48 at even b.
    assert_eq!(norbury_n(1, 1, &[4]).unwrap(), rat(1, 4));
    assert_eq!(norbury_n(1, 1, &[6]).unwrap(), rat(2, 3));
    assert_eq!(norbury_n(0, 3, &[1, 1, 2]).unwrap(), rat(1, 1));
    assert_eq!(norbury_n(0, 3, &[2, 2, 2]).unwrap(), rat(1, 1));
    assert!(norbury_n(0, 3, &[1, 1, 1]).unwrap().is_zero());
    assert!(matches!(norbury_n(2, 1, &[4]), Err(EnumError::UnsupportedType { .. })));
}

#[test]
fn maps_are_bipartite() {
    for (v4, v2) in [(1, 0), (2, 0), (1, 1), (0, 3)] {
        let bad = for_each_directed_map(
            v4,
            v2,
            Vec::new,
            |map, acc: &mut Vec<String>| {
                let faces = map.faces();
                let plus: u32 = faces.iter().filter(|f| f.sign > 0).map(|f| f.perimeter()).sum();
                let minus: u32 = faces.iter().filter(|f| f.sign < 0).map(|f| f.perimeter()).sum();
                let edges = map.n_edges() as u32;
                if !map.is_directed() || plus != edges || minus != edges {
                    acc.push(map.to_line());
                }
            },
            |mut a, b| {
                a.extend(b);
                a
            },
        );
        assert!(bad.is_empty(), "{bad:?}");
    }
}

#[test]
fn orbit_stabilizer_agreement() {
    for (v4, v2) in [(1, 0), (2, 0), (1, 1), (1, 2), (0, 4)] {
        let edges = (2 * v4 + v2) as u32;
        for g in 0..=1 {
            for n_plus in 1..=edges {
                for n_minus in 1..=edges {
                    for alpha in dessin_core::opmatrix::sorted_tuples(n_plus as usize, 1, edges) {
                        let spec = EnumSpec::new(v4, v2, g, n_plus, n_minus, &alpha);
                        let labeled = count_dessins(&spec, 8).unwrap();
                        let classes = count_dessins_by_classes(&spec, 8).unwrap();
                        assert_eq!(labeled, classes, "{spec:?}");
                    }
                }
            }
        }
    }
}

#[test]
fn bivalent_counts_match_series() {
    assert!(suites::bivalent(10).unwrap().passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn invariant_under_alpha_permutation(
        alpha in prop::collection::vec(1u32..=4, 1..=3),
        n_minus in 1u32..=4,
        g in 0u32..=1,
    ) {
        let total: u32 = alpha.iter().sum();
        prop_assume!(total == 4);
        let mut reversed = alpha.clone();
        reversed.reverse();
        let n_plus = alpha.len() as u32;
        let a = count_dessins(&EnumSpec::new(2, 0, g, n_plus, n_minus, &alpha), 8).unwrap();
        let b = count_dessins(&EnumSpec::new(2, 0, g, n_plus, n_minus, &reversed), 8).unwrap();
        prop_assert_eq!(a, b);
    }

    #[test]
    fn edge_identity_violations_count_zero(extra in 1u32..=3) {
        let spec = EnumSpec::new(1, 0, 0, 1, 2, &[2 + extra]);
        prop_assert_eq!(count_dessins(&spec, 8).unwrap(), Rational::zero());
    }
}
