use dessin_core::opmatrix::{
    adjoint_check, block_symbol, blocks_of_degree, cutjoin_matrix_check, kernel_block, vacuum_consistency, AdjointForm,
    OpMatrixError, Symbol,
};
use dessin_core::enumerate::DEFAULT_DART_BUDGET;
use dessin_core::ratseries::{int, rat, Monomial, Rational};
use num_traits::Zero;
use proptest::prelude::*;

fn add(sym: &mut Symbol, t: &[u32], d: &[u32], c: Rational) {
    let s: Vec<u32> = d.iter().map(|&k| k + 1).collect();
    let e = sym
        .entry((Monomial::from_parts(t), Monomial::from_parts(&s)))
        .or_insert_with(Rational::zero);
    *e += c;
}

#[test]
fn pair_of_pants_entries() {
    let join = kernel_block(0, 2, 1, 6).unwrap();
    assert_eq!(join.entry(&[1, 1], &[0]), Some(int(1)));
    assert_eq!(join.entry(&[2, 1], &[1]), Some(int(2)));
    assert_eq!(join.entry(&[2, 2], &[2]), Some(int(4)));
    let cut = kernel_block(0, 1, 2, 6).unwrap();
    assert_eq!(cut.entry(&[2], &[0, 0]), Some(int(1)));
    assert_eq!(cut.entry(&[3], &[1, 0]), Some(rat(3, 2)));
}

#[test]
fn first_blocks_reproduce_the_join_cut_operator() {
    let cap = 6;
    let mut from_blocks = Symbol::new();
    for b in blocks_of_degree(1, cap, DEFAULT_DART_BUDGET).unwrap() {
        for (k, v) in block_symbol(&b) {
            *from_blocks.entry(k).or_insert_with(Rational::zero) += v;
        }
    }
    let mut join_cut = Symbol::new();
    for i in 0..cap {
        for j in 0..cap {
            if i + j + 2 <= cap {
                add(&mut join_cut, &[i + 1, j + 1], &[i + j], rat(((i + 1) * (j + 1)) as i64, 2));
                add(&mut join_cut, &[i + j + 2], &[i, j], rat((i + j + 2) as i64, 2));
            }
        }
    }
    from_blocks.retain(|_, v| !v.is_zero());
    join_cut.retain(|_, v| !v.is_zero());
    assert_eq!(from_blocks, join_cut);
}

#[test]
fn entries_balance_degrees() {
    for b in blocks_of_degree(2, 8, DEFAULT_DART_BUDGET).unwrap() {
        let d = b.euler_degree();
        for ((ap, am), v) in b.entries() {
            assert!(!v.is_zero());
            let plus: u32 = ap.iter().sum();
            let minus: u32 = am.iter().sum();
            assert_eq!(plus, minus + 2 * d, "({}, {}, {})", b.g, b.n_plus, b.n_minus);
            assert!(plus >= 2 * d);
        }
    }
}

#[test]
fn unstable_and_empty_blocks() {
    assert!(matches!(kernel_block(0, 1, 1, 6), Err(OpMatrixError::Unstable { .. })));
    assert!(matches!(kernel_block(0, 3, 0, 6), Err(OpMatrixError::Unstable { .. })));
    let low = kernel_block(1, 1, 1, 3).unwrap();
    assert!(low.warning.is_some());
    assert_eq!(low.entries().count(), 0);
    assert!(adjoint_check(1, 1, 1, 3, AdjointForm::Volume).unwrap().passed());
}

#[test]
fn entries_beyond_cap_are_unknown() {
    let b = kernel_block(0, 2, 1, 4).unwrap();
    assert_eq!(b.entry(&[3, 2], &[3]), None);
    assert_eq!(b.entry(&[2, 1], &[1]), Some(int(2)));
}

#[test]
fn vacuum_and_cut_and_join() {
    assert!(vacuum_consistency(3).unwrap().passed());
    assert!(cutjoin_matrix_check(1, 4).unwrap().passed());
}

#[test]
fn volumes_are_adjoint() {
    for (g, np, nm) in [(0, 2, 1), (0, 2, 2), (1, 1, 1)] {
        let r = adjoint_check(g, np, nm, 5, AdjointForm::Volume).unwrap();
        assert!(r.passed(), "({g}, {np}, {nm}): {:?}", r.residuals.first());
    }
}

#[test]
fn raw_kernels_are_not_adjoint() {
    assert!(!adjoint_check(0, 2, 1, 5, AdjointForm::Kernel).unwrap().passed());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn blocks_are_symmetric(
        plus in prop::collection::vec(0u32..=4, 2),
        minus in prop::collection::vec(0u32..=4, 2),
    ) {
        let b = kernel_block(0, 2, 2, 8).unwrap();
        let mut p2 = plus.clone();
        p2.reverse();
        let mut m2 = minus.clone();
        m2.reverse();
        prop_assert_eq!(b.entry(&plus, &minus), b.entry(&p2, &m2));
        prop_assert_eq!(b.entry(&plus, &minus), b.entry(&plus, &m2));
    }
}
