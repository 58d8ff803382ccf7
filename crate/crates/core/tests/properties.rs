use std::sync::Arc;

use proptest::prelude::*;
use qfp_core::coarse_grain::{coarse_grained_l, lamb_shift, pv_gaussian, CoarseGrainSchedule};
use qfp_core::generator::build_generator;
use qfp_core::mat::random::{random_complex, random_hermitian, seeded};
use qfp_core::mat::{
    choi_min_eigenvalue, hermitian_eig, identity, max_abs, max_abs_diff, ComplexMatrix,
    HermitianOperator, C64,
};
use qfp_core::scenarios::presets::random_qubit_bath3;
use qfp_core::scenarios::{dual_path_residual, heat_bath_general, heat_bath_generator};
use qfp_core::subsystem::{build_projection, sector_family, sector_ranges};

fn block_diagonal_hamiltonian(dims: &[usize], seed: u64) -> HermitianOperator {
    let d: usize = dims.iter().sum();
    let mut rng = seeded(seed);
    let mut h = ComplexMatrix::zeros(d, d);
    for r in sector_ranges(dims) {
        let block = random_hermitian(&mut rng, r.len());
        h.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(block.matrix());
    }
    HermitianOperator::new(h).unwrap()
}

fn sectors() -> impl Strategy<Value = Vec<usize>> {
    prop::collection::vec(1usize..=2, 1..=3)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn reflection_gives_adjoint(seed in any::<u64>(), t in 0.2f64..5.0, w in -3.0f64..3.0) {
        let mut rng = seeded(seed);
        let eig = hermitian_eig(&random_hermitian(&mut rng, 3));
        let hp = random_hermitian(&mut rng, 3);
        let a = coarse_grained_l(&eig, &hp, t, w).unwrap();
        let b = coarse_grained_l(&eig, &hp, t, -w).unwrap();
        prop_assert!(max_abs_diff(&b.matrix, &a.matrix.adjoint()) < 1e-10);
    }

    #[test]
    fn pv_gaussian_is_odd(mu in -20.0f64..20.0, a in 0.01f64..100.0) {
        let p = pv_gaussian(mu, a).unwrap();
        let m = pv_gaussian(-mu, a).unwrap();
        prop_assert!((p + m).abs() <= 1e-15 * (1.0 + p.abs()));
    }

    #[test]
    fn perturbation_scaling(seed in any::<u64>(), c in -3.0f64..3.0, t in 0.3f64..4.0) {
        let sub = build_projection(&sector_family(&[1, 2]).unwrap()).unwrap();
        let h0 = block_diagonal_hamiltonian(&[1, 2], seed);
        let eig = hermitian_eig(&h0);
        let hp = random_hermitian(&mut seeded(seed ^ 0x55), 3);
        let l1 = coarse_grained_l(&eig, &hp, t, 0.3).unwrap().matrix;
        let l2 = coarse_grained_l(&eig, &hp.scaled(c), t, 0.3).unwrap().matrix;
        prop_assert!(max_abs_diff(&(l1 * C64::from(c)), &l2) < 1e-10 * (1.0 + c.abs()));
        let s1 = lamb_shift(&eig, &hp, t, &sub).unwrap().into_matrix();
        let s2 = lamb_shift(&eig, &hp.scaled(c), t, &sub).unwrap().into_matrix();
        prop_assert!(max_abs_diff(&(s1 * C64::from(c * c)), &s2) < 1e-10 * (1.0 + c * c));
    }

    #[test]
    fn trace_dual_pairing(seed in any::<u64>()) {
        let sub = build_projection(&sector_family(&[2, 1]).unwrap()).unwrap();
        let mut rng = seeded(seed);
        let rho = random_complex(&mut rng, 3, 3);
        let x = random_complex(&mut rng, 3, 3);
        let p = sub.heisenberg_projection();
        let lhs = (p.trace_dual().apply(&rho) * &x).trace();
        let rhs = (&rho * p.apply(&x)).trace();
        prop_assert!((lhs - rhs).norm() < 1e-12);
        prop_assert_eq!(p.trace_dual().trace_dual(), p.clone());
    }

    #[test]
    fn generator_structure(dims in sectors(), seed in any::<u64>(), lambda in 0.05f64..0.5) {
        let family = sector_family(&dims).unwrap();
        let sub = Arc::new(build_projection(&family).unwrap());
        let d = sub.dim();
        let h0 = block_diagonal_hamiltonian(&dims, seed);
        let hp = random_hermitian(&mut seeded(seed.wrapping_add(1)), d);
        let sched = CoarseGrainSchedule::new(lambda, 1.0, 1.0).unwrap();
        let b = build_generator(sub.clone(), &h0, &hp, &sched).unwrap();
        prop_assert!(b.unitality_residual() <= 1e-10);
        prop_assert!(b.decomposition.jump_decay_residual() <= 1e-10);
        prop_assert!(choi_min_eigenvalue(&b.decomposition.jump_map) >= -1e-12);
        prop_assert!(b.schrodinger.max_abs_diff(&b.heisenberg.trace_dual()) == 0.0);
        let dec = &b.decomposition;
        for h in [&dec.h_free, &dec.h_first, &dec.h_lamb, &dec.decay] {
            let m = h.matrix();
            prop_assert!(max_abs_diff(m, &m.adjoint()) == 0.0);
            prop_assert!(sub.image_residual(m) <= 1e-10 * (1.0 + max_abs(m)));
        }
        // block-diagonal states stay block diagonal
        let mut rng = seeded(seed.wrapping_add(2));
        let rho = sub.project_state(&random_complex(&mut rng, d, d));
        let out = b.schrodinger.apply(&rho);
        prop_assert!(sub.state_residual(&out) <= 1e-10 * (1.0 + max_abs(&out)));
    }

    #[test]
    fn gauge_invariance(seed in any::<u64>(), c in -5.0f64..5.0) {
        let sub = Arc::new(build_projection(&sector_family(&[2, 2]).unwrap()).unwrap());
        let h0 = block_diagonal_hamiltonian(&[2, 2], seed);
        let hp = random_hermitian(&mut seeded(seed ^ 0xabc), 4);
        let sched = CoarseGrainSchedule::new(0.2, 1.0, 1.0).unwrap();
        let a = build_generator(sub.clone(), &h0, &hp, &sched).unwrap();
        let shifted = HermitianOperator::new(hp.matrix() + identity(4) * C64::from(c)).unwrap();
        let b = build_generator(sub, &h0, &shifted, &sched).unwrap();
        prop_assert!(a.heisenberg.max_abs_diff(&b.heisenberg) <= 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(8))]

    #[test]
    fn heat_bath_paths_agree(seed in any::<u64>(), lambda in 0.05f64..0.4) {
        let sched = CoarseGrainSchedule::new(lambda, 1.0, 1.0).unwrap();
        let m = random_qubit_bath3(seed, sched).unwrap();
        let a = heat_bath_generator(&m).unwrap();
        let b = heat_bath_general(&m).unwrap();
        prop_assert!(dual_path_residual(&a, &b, 3) <= 1e-7);
    }
}
