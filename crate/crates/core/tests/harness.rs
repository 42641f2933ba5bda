use std::f64::consts::PI;

use eigenprep::harness::*;
use eigenprep::phase_estimation::nearest_bin;
use eigenprep::*;

fn zero_config(n0: Vec<usize>, fine: FineGrid) -> ExperimentConfig {
    ExperimentConfig::new(PotentialSpec::Zero, 0, n0, fine)
}

#[test]
fn s_zero_prepares_the_exact_eigenvector() {
    let report = run_pipeline(&zero_config(vec![16], FineGrid::Doublings(0))).unwrap();
    let r = &report.records[0];
    assert!((r.overlap.success_probability - 1.0).abs() < 1e-10);
    assert!(r.distribution_exact);
    assert_eq!(r.modal_outcome, nearest_bin(r.true_phase, r.b));
}

#[test]
fn eigenvalue_estimate_within_one_bin() {
    let mut config = zero_config(vec![16], FineGrid::Doublings(4));
    config.qpe.b = Some(8);
    let r = &run_pipeline(&config).unwrap().records[0];
    assert_eq!(r.b, 8);
    let width = 2.0 * PI * 2f64.powi(-8) / r.evolution_time;
    assert!((r.eigenvalue_resolution - width).abs() <= 1e-9 * width);
    assert!(r.eigenvalue_error <= width);
}

#[test]
fn quadratic_well_failure_decreases_with_coarse_size() {
    let config = ExperimentConfig::new(
        PotentialSpec::QuadraticWell { strength: 100.0 },
        0,
        vec![8, 16, 32, 64, 128],
        FineGrid::FixedN(4096),
    );
    let report = run_pipeline(&config).unwrap();
    let failures: Vec<f64> = report.records.iter().map(|r| r.overlap.failure).collect();
    assert!(failures.windows(2).all(|w| w[1] < w[0]), "{failures:?}");
    assert!(report.records.iter().all(|r| !r.distribution_exact));
}

#[test]
fn identical_configs_write_identical_csv() {
    let mut config = zero_config(vec![8, 16, 32], FineGrid::Doublings(2));
    config.shots = 2000;
    config.rng_seed = 17;
    let write = || {
        let mut buf = Vec::new();
        run_pipeline(&config).unwrap().write_csv(&mut buf).unwrap();
        buf
    };
    let a = write();
    assert_eq!(a, write());
    let mut buf = Vec::new();
    sweep_and_fit(&config).unwrap().write_csv(&mut buf).unwrap();
    let mut buf2 = Vec::new();
    sweep_and_fit(&config).unwrap().write_csv(&mut buf2).unwrap();
    assert_eq!(buf, buf2);
}

#[test]
fn analytic_distribution_matches_statevector_path() {
    let potential = PotentialSpec::QuadraticWell { strength: 30.0 };
    let mut config = ExperimentConfig::new(potential.clone(), 1, vec![8, 16], FineGrid::Doublings(2));
    config.qpe.bits = 4;
    config.qpe.b = Some(7);
    let report = run_pipeline(&config).unwrap();
    for r in &report.records {
        let n = r.overlap.n;
        let fine = solve_problem(&potential, n, n).unwrap();
        let (overlap, _) = prepare_and_compare(&potential, 1, r.overlap.n0, r.overlap.s, &fine).unwrap();
        let phases: Vec<f64> = fine
            .basis
            .pairs
            .iter()
            .map(|p| map_eigenvalue_to_phase(p.value, r.evolution_time).unwrap().phase)
            .collect();
        let instance = SpectralInstance::new(phases, overlap.coefficients).unwrap();
        let simulated = statevector_qpe(&instance, r.b).unwrap().marginal();
        let analytic = r.distribution.as_ref().unwrap();
        for (a, s) in analytic.probabilities.iter().zip(&simulated.probabilities) {
            assert!((a - s).abs() <= 1e-9);
        }
    }
}

#[test]
fn every_record_satisfies_both_inequalities() {
    let config = ExperimentConfig::new(
        PotentialSpec::QuadraticWell { strength: 100.0 },
        2,
        vec![8, 16, 32],
        FineGrid::Doublings(3),
    );
    for r in run_pipeline(&config).unwrap().records {
        assert!(r.overlap.failure <= r.overlap.error_norm.powi(2) + 1e-12);
        assert!(r.window_one.measured >= r.window_one.bound - 1e-12);
        assert!(r.accuracy_window.measured >= r.accuracy_window.bound - 1e-12);
    }
}

#[test]
fn sweep_csv_layout_and_threshold() {
    let sweep = sweep_and_fit(&zero_config(vec![8, 16, 32, 64], FineGrid::FixedN(512))).unwrap();
    let mut buf = Vec::new();
    sweep.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert_eq!(
        text.lines().next().unwrap(),
        "N0,s,N,success_probability,failure,error_norm,bound_rhs"
    );
    assert_eq!(text.lines().count(), 5);
    assert!(sweep.rows.iter().all(|r| r.failure <= r.bound_rhs + 1e-12));
    assert_eq!(sweep.threshold_n0, Some(8));
    assert!(sweep.fit.slope <= -1.7);

    let mut json = Vec::new();
    sweep.write_json(&mut json).unwrap();
    let value: serde_json::Value = serde_json::from_slice(&json).unwrap();
    assert_eq!(value["rows"][0]["N0"], 8);
}

#[test]
fn overlap_json_fields() {
    let report = run_pipeline(&zero_config(vec![8], FineGrid::Doublings(1))).unwrap();
    let value = serde_json::to_value(&report.records[0]).unwrap();
    for field in ["N", "N0", "s", "k", "success_probability", "failure", "error_norm", "degenerate_warning"] {
        assert!(value.get(field).is_some(), "missing {field}");
    }
}

#[test]
fn sweep_needs_three_sizes() {
    assert!(sweep_and_fit(&zero_config(vec![8, 16], FineGrid::Doublings(1))).is_err());
}

#[test]
fn sampling_beyond_full_basis_limit_is_rejected() {
    let mut config = zero_config(vec![8], FineGrid::Doublings(4));
    config.shots = 1000;
    config.full_basis_limit = 64;
    let err = run_pipeline(&config).unwrap_err();
    assert!(err.to_string().contains("N0 = 8"), "{err}");
    assert!(matches!(err.root(), Error::InvalidArgument(_)));
}

#[test]
fn success_rate_requires_enough_shots() {
    let mut config = zero_config(vec![8], FineGrid::Doublings(1));
    config.shots = 999;
    assert!(end_to_end_success_rate(&config).is_err());
}

#[test]
fn exact_input_meets_single_bin_floor() {
    let mut config = zero_config(vec![16], FineGrid::Doublings(0));
    config.shots = 5000;
    let stats = end_to_end_success_rate(&config).unwrap();
    let floor = 8.0 / (PI * PI);
    assert!((stats[0].predicted_floor - floor).abs() < 1e-10);
    assert!(stats[0].within_margin);
    assert_eq!(stats[0].counts.iter().sum::<u64>(), 5000);
}

#[test]
fn tabulated_potential_runs_across_grids() {
    let grid = build_grid(255).unwrap();
    let table = PotentialSpec::Tabulated {
        x: grid.points(),
        values: grid.points().iter().map(|x| 100.0 * (x - 0.5) * (x - 0.5)).collect(),
    };
    let config = ExperimentConfig::new(table, 0, vec![8, 16, 32], FineGrid::FixedN(256));
    let tab = sweep_and_fit(&config).unwrap();
    let quad = sweep_and_fit(&ExperimentConfig::new(
        PotentialSpec::QuadraticWell { strength: 100.0 },
        0,
        vec![8, 16, 32],
        FineGrid::FixedN(256),
    ))
    .unwrap();
    for (a, b) in tab.rows.iter().zip(&quad.rows) {
        assert!((a.failure - b.failure).abs() < 1e-4 * b.failure);
    }
}

#[test]
fn point_instance_reproduces_the_reported_distribution() {
    let mut config = zero_config(vec![8], FineGrid::Doublings(2));
    config.k = 1;
    let record = run_pipeline(&config).unwrap().records.remove(0);
    let (instance, b) = point_instance(&config, 8).unwrap();
    assert_eq!(b, record.b);
    assert_eq!(instance.len(), 32);
    let dist = outcome_distribution(&instance, b).unwrap();
    assert_eq!(dist, record.distribution.unwrap());
}
