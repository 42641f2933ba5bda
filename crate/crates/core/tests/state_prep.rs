mod common;

use common::*;
use eigenprep::harness::{prepare_and_compare, solve_problem};
use eigenprep::*;
use num_complex::Complex64;
use proptest::prelude::*;

fn zero_basis(n: usize, count: usize) -> EigenBasis {
    let h = discretize(&PotentialSpec::Zero, &build_grid(n).unwrap()).unwrap();
    eigensolve(&h, count).unwrap()
}

#[test]
fn ground_state_n0_8_s3_two_routes() {
    let coarse = zero_basis(8, 1);
    let prepared = replicate(&StateVector::from_real(&coarse.pairs[0].vector).unwrap(), 3);
    let fine = zero_basis(64, 64);
    let report = overlap_analysis(&fine, 0, &prepared).unwrap();
    assert!((report.success_probability - report.success_from_complement()).abs() < 1e-10);

    // independent route: dense eigendecomposition of H_64
    let h64 = discretize(&PotentialSpec::Zero, &build_grid(64).unwrap()).unwrap();
    let dense = dense_eigen(&h64);
    let d: f64 = prepared
        .amplitudes()
        .iter()
        .zip(&dense[0].1)
        .map(|(a, u)| a.re * u)
        .sum();
    assert!((report.success_probability - d * d).abs() < 1e-12);

    // frozen regression value
    assert!((report.success_probability - 0.980_401_646_874_889_5).abs() < 1e-12);
}

#[test]
fn failure_inequality_on_many_configurations() {
    for potential in [PotentialSpec::Zero, PotentialSpec::QuadraticWell { strength: 100.0 }] {
        for k in 0..3 {
            for n0 in [8, 12, 16] {
                for s in 0..4 {
                    let fine = solve_problem(&potential, n0 << s, k + 1).unwrap();
                    let (r, _) = prepare_and_compare(&potential, k, n0, s, &fine).unwrap();
                    assert!(r.failure <= r.error_norm.powi(2) + 1e-12);
                }
            }
        }
    }
}

#[test]
fn failure_shrinks_when_coarse_grid_doubles() {
    let fine = solve_problem(&PotentialSpec::Zero, 1024, 1).unwrap();
    let failures: Vec<f64> = [8usize, 16, 32, 64, 128]
        .iter()
        .map(|&n0| {
            let s = (1024 / n0).trailing_zeros();
            prepare_and_compare(&PotentialSpec::Zero, 0, n0, s, &fine).unwrap().0.failure
        })
        .collect();
    assert!(failures.windows(2).all(|w| w[1] < w[0]), "{failures:?}");
}

#[test]
fn s_zero_reduces_to_plain_overlap() {
    let basis = zero_basis(16, 16);
    let v = StateVector::normalized(
        (0..16).map(|i| Complex64::new(1.0 + (i as f64).cos(), 0.3 * i as f64)).collect(),
    )
    .unwrap();
    let r = overlap_analysis(&basis, 2, &replicate(&v, 0)).unwrap();
    let direct = v.overlap_real(&basis.pairs[2].vector).norm_sqr();
    assert!((r.success_probability - direct).abs() < 1e-14);
    assert!((r.total_weight() - 1.0).abs() < 1e-10);
}

#[test]
fn inexact_coarse_solution_degrades_gracefully() {
    let delta = 0.01;
    let coarse = zero_basis(16, 1);
    let fine = zero_basis(512, 1);
    let exact = replicate(&StateVector::from_real(&coarse.pairs[0].vector).unwrap(), 5);
    let clean = overlap_analysis(&fine, 0, &exact).unwrap().success_probability;
    for seed in 0..20 {
        let noisy = perturbed_coarse_input(&coarse.pairs[0], delta, seed).unwrap();
        let p = overlap_analysis(&fine, 0, &replicate(&noisy, 5)).unwrap().success_probability;
        assert!((clean - p).abs() <= 3.0 * delta, "seed {seed}: {clean} vs {p}");
    }
}

fn unit_vector() -> impl Strategy<Value = StateVector> {
    prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..24).prop_filter_map("nonzero", |v| {
        StateVector::normalized(v.into_iter().map(|(re, im)| Complex64::new(re, im)).collect()).ok()
    })
}

proptest! {
    #[test]
    fn replication_preserves_norm_and_is_blockwise_constant(v in unit_vector(), s in 0u32..=10) {
        let r = replicate(&v, s);
        prop_assert_eq!(r.len(), v.len() << s);
        prop_assert!((r.norm() - 1.0).abs() <= 1e-14);
        let block = 1usize << s;
        for (j, a) in r.amplitudes().iter().enumerate() {
            // f(j) = ⌊j / 2^s⌋
            let coarse = v.amplitudes()[j / block];
            prop_assert!((a * (block as f64).sqrt() - coarse).norm() <= 1e-14);
        }
    }
}
