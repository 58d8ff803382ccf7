use std::sync::Arc;

use qfp_core::coarse_grain::CoarseGrainSchedule;
use qfp_core::generator::{evolve, k_t_oracle, qds_certificate, steady_state, Picture};
use qfp_core::mat::random::{random_density, seeded};
use qfp_core::mat::{hermitian_eig, is_psd, max_abs, max_abs_diff, pauli, HermitianOperator, C64};
use qfp_core::scenarios::presets::{self, GIBBS_LAMBDAS};
use qfp_core::scenarios::qfgr::{sector_superoperator, QFGR_CROSS_CHECK_TOL};
use qfp_core::scenarios::{
    bath_correlation, gibbs_limit_study, gibbs_state, heat_bath_generator, qfgr_generator,
    trace_distance, HeatBathModel,
};
use qfp_core::subsystem::{partial_trace_b, sector_ranges};

fn sched(lambda: f64) -> CoarseGrainSchedule {
    CoarseGrainSchedule::new(lambda, 1.0, 1.0).unwrap()
}

#[test]
fn sectors_2x2_conserve_probability_and_positivity() {
    let model = presets::sectors_2x2(sched(0.2)).unwrap();
    let sys = qfgr_generator(&model).unwrap();
    assert!(sys.cross_check_residual <= QFGR_CROSS_CHECK_TOL);
    let sector_map = sector_superoperator(&model, &sys.scattering);
    let mut rng = seeded(40);
    let rho0 = sys.bundle.subsystem.project_state(random_density(&mut rng, 4).matrix());
    let rho0 = HermitianOperator::from_hermitian_part(&rho0);
    let times = [0.0, 0.5, 2.0, 10.0, 50.0];
    let traj = evolve(&sys.bundle, &rho0, &times, Picture::Schrodinger).unwrap();
    for (t, rho) in times.iter().zip(&traj.states) {
        assert!((rho.trace().re - 1.0).abs() < 1e-9);
        // integrating the sector equations directly gives the same state
        let direct = sector_map.exp(*t).apply(rho0.matrix());
        assert!(max_abs_diff(&direct, rho) < 1e-9);
        for r in sector_ranges(&model.sector_dims) {
            let block = rho.view((r.start, r.start), (r.len(), r.len())).into_owned();
            let psd = is_psd(&HermitianOperator::from_hermitian_part(&block), 0.0);
            assert!(psd.min_eigenvalue >= -1e-9);
        }
        // off-diagonal sector blocks stay empty
        assert!(rho[(0, 2)].norm() < 1e-12 && rho[(1, 3)].norm() < 1e-12);
    }
}

#[test]
fn two_sector_populations_relax_to_steady_state() {
    let model = presets::two_sector_qubit(sched(0.3)).unwrap();
    let sys = qfgr_generator(&model).unwrap();
    let ss = steady_state(&sys.bundle).unwrap();
    assert!(ss.unique);
    let rho0 = HermitianOperator::from_real_diagonal(&[1.0, 0.0]);
    let traj = evolve(&sys.bundle, &rho0, &[4000.0], Picture::Schrodinger).unwrap();
    assert!(max_abs_diff(&traj.states[0], ss.state.matrix()) < 1e-8);
}

#[test]
fn dephasing_model_long_time_limit_and_certificate() {
    let m = presets::dephasing_qubit();
    let sub = Arc::new(m.subsystem);
    let b = qfp_core::generator::build_generator(sub, &m.h0, &m.hp, &sched(0.1)).unwrap();
    let report = qds_certificate(&b, &[0.1, 1.0, 10.0]);
    assert!(report.passed(), "{report:?}");
    let t0 = qds_certificate(&b, &[0.0]);
    assert!(t0.samples[0].choi_psd);
    let ss = steady_state(&b).unwrap();
    assert_eq!(ss.state.matrix().trace().re, 1.0);
}

#[test]
fn heisenberg_unit_is_preserved() {
    let model = presets::qubit_bath3(sched(0.2)).unwrap();
    let b = qfp_core::scenarios::heat_bath_general(&model).unwrap();
    let one = HermitianOperator::identity(b.dim());
    let traj = evolve(&b, &one, &[0.0, 1.0, 7.5, 30.0], Picture::Heisenberg).unwrap();
    for x in &traj.states {
        assert!(max_abs_diff(x, one.matrix()) < 1e-10);
    }
    let out = evolve(&b, &one, &[-1.0], Picture::Heisenberg).unwrap();
    assert!(out.has_negative_times);
}

#[test]
fn evolve_rejects_states_outside_image() {
    let m = presets::dephasing_qubit();
    let b = qfp_core::generator::build_generator(Arc::new(m.subsystem), &m.h0, &m.hp, &sched(0.1)).unwrap();
    let plus = HermitianOperator::new(
        (qfp_core::mat::identity(2) + pauli::x()) * C64::from(0.5),
    )
    .unwrap();
    assert!(evolve(&b, &plus, &[1.0], Picture::Schrodinger).is_err());
}

#[test]
fn pure_rotation_when_perturbation_in_image() {
    let m = presets::dephasing_qubit();
    let sub = Arc::new(m.subsystem);
    let hp = HermitianOperator::new(pauli::z()).unwrap();
    let b = qfp_core::generator::build_generator(sub.clone(), &m.h0, &hp, &sched(0.01)).unwrap();
    let rho0 = HermitianOperator::from_real_diagonal(&[0.8, 0.2]);
    let traj = evolve(&b, &rho0, &[0.0, 3.0, 300.0], Picture::Schrodinger).unwrap();
    for rho in &traj.states {
        let ev = hermitian_eig(&HermitianOperator::from_hermitian_part(rho)).eigenvalues;
        assert!((ev[0] - 0.2).abs() < 1e-12 && (ev[1] - 0.8).abs() < 1e-12);
    }
    let oracle = k_t_oracle(&sub, &m.h0, &hp, 100.0).unwrap();
    assert!(max_abs(oracle.matrix()) < 1e-8);
}

#[test]
fn connected_correlation_matches_direct_trace() {
    let model = presets::qubit_bath3(sched(0.1)).unwrap();
    let corr = bath_correlation(&model);
    let sigma = model.bath_state();
    let eig = hermitian_eig(&model.h_b);
    let phi_t = |t: f64| {
        let u = eig.map_spectrum(|e| C64::from_polar(1.0, -e * t));
        &u * model.phi.matrix() * u.adjoint()
    };
    let centred = |t: f64| phi_t(t) - qfp_core::mat::identity(3) * C64::from(corr.mean);
    for &(t1, t2) in &[(0.0, 0.0), (1.3, -0.4), (5.0, 2.5), (-3.0, 7.0)] {
        let direct = (sigma.matrix() * centred(t1) * centred(t2)).trace();
        assert!((corr.connected(t1 - t2) - direct).norm() < 1e-10);
        let full = (sigma.matrix() * phi_t(t1) * phi_t(t2)).trace();
        assert!((corr.h(t1 - t2) - full).norm() < 1e-10);
    }
}

#[test]
fn gibbs_reference_study() {
    let model = presets::qubit_gibbs(sched(0.1)).unwrap();
    let study = gibbs_limit_study(&model, &GIBBS_LAMBDAS).unwrap();
    assert!(study.monotone(), "{:?}", study.distances());
    assert!(study.rows.last().unwrap().distance < 0.05);
    assert!(study.rows.iter().all(|r| r.steady.unique));
}

#[test]
fn infinite_temperature_gives_maximally_mixed() {
    let mut model = presets::qubit_gibbs(sched(0.05)).unwrap();
    model.beta = 0.0;
    let study = gibbs_limit_study(&model, &[0.05]).unwrap();
    assert!(max_abs_diff(study.target.matrix(), &(qfp_core::mat::identity(2) * C64::from(0.5))) < 1e-15);
    assert!(study.rows[0].distance < 1e-9);
}

#[test]
fn degenerate_system_hamiltonian_targets_maximally_mixed() {
    let base = presets::qubit_gibbs(sched(0.1)).unwrap();
    let model = HeatBathModel::new(
        HermitianOperator::identity(2).scaled(0.4),
        base.h_b.clone(),
        base.q.clone(),
        base.phi.clone(),
        1.0,
        sched(0.1),
    )
    .unwrap();
    let target = gibbs_state(&model.h_a, 3.0);
    assert!(max_abs_diff(target.matrix(), &(qfp_core::mat::identity(2) * C64::from(0.5))) < 1e-15);
    let b = heat_bath_generator(&model).unwrap();
    let ss = steady_state(&b).unwrap();
    assert!(trace_distance(ss.state.matrix(), target.matrix()) < 1e-8);
}

#[test]
fn partial_trace_reduction_of_evolved_state() {
    let model = presets::qubit_bath3(sched(0.25)).unwrap();
    let general = qfp_core::scenarios::heat_bath_general(&model).unwrap();
    let special = heat_bath_generator(&model).unwrap();
    let sigma_b = model.bath_state();
    let rho_a = HermitianOperator::from_real_diagonal(&[0.3, 0.7]);
    let rho = HermitianOperator::from_hermitian_part(&qfp_core::mat::kron(rho_a.matrix(), sigma_b.matrix()));
    let t = [2.0];
    let full = evolve(&general, &rho, &t, Picture::Schrodinger).unwrap();
    let reduced = evolve(&special, &rho_a, &t, Picture::Schrodinger).unwrap();
    let traced = partial_trace_b(&full.states[0], 2, 3);
    assert!(max_abs_diff(&traced, &reduced.states[0]) < 1e-9);
}
