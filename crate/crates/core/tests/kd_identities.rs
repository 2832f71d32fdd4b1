mod common;

use kd_abelian::kd::{self, KdDistribution, Operator, StateVector};
use kd_abelian::sampling;
use kd_abelian::GroupSpec;
use num_complex::Complex64 as C64;
use proptest::prelude::*;

const GROUPS: &[&[usize]] = &[&[1], &[2], &[3], &[5], &[6], &[8], &[2, 2], &[2, 4], &[3, 3], &[2, 2, 2], &[2, 3, 2]];

fn group_and_seed() -> impl Strategy<Value = (Vec<usize>, u64)> {
    (0..GROUPS.len(), any::<u64>()).prop_map(|(i, s)| (GROUPS[i].to_vec(), s))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn lower_symbol_matches_definition((orders, seed) in group_and_seed()) {
        let g = GroupSpec::new(&orders).unwrap();
        let c = sampling::random_operator(&g, &mut sampling::seeded(seed));
        let q = kd::kd_lower(&c);
        prop_assert!(common::max_diff(&q.values, &common::kd_table(&orders, &c.entries)) < 1e-10);
        prop_assert!((q.total() - c.trace()).norm() < 1e-10);
        let upper = kd::kd_upper(&c);
        let n = g.order() as f64;
        prop_assert!(upper.max_abs_diff(&q.clone().scaled(C64::new(n, 0.0))) < 1e-10);
    }

    #[test]
    fn round_trips((orders, seed) in group_and_seed()) {
        let g = GroupSpec::new(&orders).unwrap();
        let mut rng = sampling::seeded(seed);
        let c = sampling::random_operator(&g, &mut rng);
        prop_assert!(kd::kd_lower_inverse(&kd::kd_lower(&c)).max_abs_diff(&c) < 1e-10);
        prop_assert!(kd::kd_upper_inverse(&kd::kd_upper(&c)).max_abs_diff(&c) < 1e-10);
        let f = kd::kd_lower(&sampling::random_operator(&g, &mut rng));
        prop_assert!(kd::kd_lower(&kd::kd_lower_inverse(&f)).max_abs_diff(&f) < 1e-10);
    }

    #[test]
    fn overlap_identity((orders, seed) in group_and_seed()) {
        let g = GroupSpec::new(&orders).unwrap();
        let mut rng = sampling::seeded(seed);
        let c = sampling::random_operator(&g, &mut rng);
        let d = sampling::random_operator(&g, &mut rng);
        let direct = common::frobenius(&c.entries, &d.entries);
        prop_assert!((kd::overlap(&c, &d).unwrap() - direct).norm() < 1e-10 * (1.0 + direct.norm()));
    }

    #[test]
    fn marginals((orders, seed) in group_and_seed()) {
        let g = GroupSpec::new(&orders).unwrap();
        let rho = sampling::random_density(&g, 3, &mut sampling::seeded(seed));
        let q = kd::kd_lower(&rho);
        let n = g.order();
        for (x, r) in q.row_sums().iter().enumerate() {
            prop_assert!((r - rho.get(x, x)).norm() < 1e-10);
        }
        for (chi, col) in q.column_sums().iter().enumerate() {
            let b = StateVector::dual_basis(&g, chi);
            prop_assert!((col - rho.sandwich(&b, &b)).norm() < 1e-10);
            prop_assert!(col.im.abs() < 1e-10 && col.re > -1e-10);
        }
        prop_assert_eq!(q.values.len(), n * n);
    }

    #[test]
    fn covariance((orders, seed) in group_and_seed(), g0 in 0usize..64, chi0 in 0usize..64) {
        let g = GroupSpec::new(&orders).unwrap();
        let n = g.order();
        let (g0, chi0) = (g0 % n, chi0 % n);
        let c = sampling::random_operator(&g, &mut sampling::seeded(seed));
        let u = common::weyl_matrix(&orders, g0, chi0);
        let moved = common::matmul(n, &common::matmul(n, &u, &c.entries), &common::adjoint(n, &u));
        prop_assert!(common::max_diff(&c.weyl_conjugate(g0, chi0).entries, &moved) < 1e-10);
        let lhs = kd::kd_lower(&Operator::new(g.clone(), moved).unwrap());
        prop_assert!(lhs.max_abs_diff(&kd::kd_translate(&kd::kd_lower(&c), g0, chi0)) < 1e-10);
    }

    #[test]
    fn fourier_is_unitary((orders, seed) in group_and_seed()) {
        let g = GroupSpec::new(&orders).unwrap();
        let mut rng = sampling::seeded(seed);
        let psi = sampling::haar_state(&g, &mut rng);
        let phi = sampling::haar_state(&g, &mut rng);
        let (fp, ff) = (kd::fourier(&psi), kd::fourier(&phi));
        prop_assert!((fp.inner(&ff) - psi.inner(&phi)).norm() < 1e-10);
        let back = kd::inverse_fourier(&fp);
        prop_assert!(common::max_diff(&back.amplitudes, &psi.amplitudes) < 1e-10);
        for chi in 0..g.order() {
            let b = StateVector::dual_basis(&g, chi);
            prop_assert!((fp.amplitudes[chi] - b.inner(&psi)).norm() < 1e-10);
        }
    }

    /// `Q[|psi><psi|](g, chi) = |G|^{-1/2} conj(chi(g)) psi(g) conj(psi_hat(chi))`.
    #[test]
    fn pure_state_symbol((orders, seed) in group_and_seed()) {
        let g = GroupSpec::new(&orders).unwrap();
        let n = g.order();
        let psi = sampling::haar_state(&g, &mut sampling::seeded(seed));
        let hat = kd::fourier(&psi);
        let q = kd::kd_lower(&psi.projector());
        let s = (n as f64).sqrt().recip();
        for x in 0..n {
            for chi in 0..n {
                let expect = common::character(&orders, chi, x).conj() * psi.amplitudes[x] * hat.amplitudes[chi].conj() * s;
                prop_assert!((q.get(x, chi) - expect).norm() < 1e-10);
            }
        }
    }
}

#[test]
fn diagonal_operators_have_one_sided_symbols() {
    let g = GroupSpec::new(&[2, 3]).unwrap();
    let n = g.order();
    let v: Vec<C64> = (0..n).map(|i| C64::new(i as f64, 0.5)).collect();
    let qa = kd::kd_lower(&Operator::diagonal_in_a(&g, &v));
    let qb = kd::kd_lower(&Operator::diagonal_in_b(&g, &v));
    for x in 0..n {
        for chi in 0..n {
            assert!((qa.get(x, chi) - v[x] / n as f64).norm() < 1e-12);
            assert!((qb.get(x, chi) - v[chi] / n as f64).norm() < 1e-12);
        }
    }
}

#[test]
fn maximally_mixed_is_uniform() {
    let g = GroupSpec::new(&[6]).unwrap();
    let q = kd::kd_lower(&Operator::maximally_mixed(&g));
    let expect = KdDistribution::constant(&g, C64::new(1.0 / 36.0, 0.0));
    assert!(q.max_abs_diff(&expect) < 1e-15);
}

#[test]
fn translation_and_modulation_compose_to_weyl() {
    let g = GroupSpec::new(&[2, 4]).unwrap();
    let psi = sampling::haar_state(&g, &mut sampling::seeded(3));
    let (g0, chi0) = (5, 6);
    let t = Operator::translation(&g, g0);
    let m = Operator::modulation(&g, chi0);
    let u = m.matmul(&t).unwrap();
    let direct = kd::weyl_apply(&psi, g0, chi0);
    for x in 0..g.order() {
        let via: C64 = (0..g.order()).map(|y| u.get(x, y) * psi.amplitudes[y]).sum();
        assert!((via - direct.amplitudes[x]).norm() < 1e-12);
    }
    assert!(common::max_diff(&u.entries, &common::weyl_matrix(&[2, 4], g0, chi0)) < 1e-12);
}

#[test]
fn json_round_trip() {
    let g = GroupSpec::new(&[3]).unwrap();
    let c = sampling::random_operator(&g, &mut sampling::seeded(9));
    let text = serde_json::to_string(&kd::OperatorJson::from(&c)).unwrap();
    assert!(text.starts_with("{\"group\":{\"orders\":[3]},\"entries\":[[["));
    let back = Operator::try_from(serde_json::from_str::<kd::OperatorJson>(&text).unwrap()).unwrap();
    assert_eq!(back, c);

    let bad = r#"{"group":{"orders":[3]},"entries":[[[1,0]]]}"#;
    let j: kd::OperatorJson = serde_json::from_str(bad).unwrap();
    assert!(Operator::try_from(j).is_err());
}
