//! Invariant suites run by `eigenprep check`. Each suite is a quick,
//! seeded version of a property the test suite asserts at full size.

use std::f64::consts::PI;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::Serialize;

use super::config::{ExperimentConfig, FineGrid};
use super::pipeline::failure_at_fine_sizes;
use super::sweep::sweep_and_fit;
use crate::eigen::eigensolve;
use crate::error::Result;
use crate::grid::{build_grid, discretize, PotentialSpec};
use crate::phase_estimation::{
    choose_b, collapse, g_kernel, good_set, good_set_probability, good_set_probability_bound,
    outcome_distribution, statevector_qpe, SpectralInstance,
};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Random instance with `n` uniform phases and complex Gaussian amplitudes.
pub fn random_instance<R: Rng>(rng: &mut R, n: usize) -> SpectralInstance {
    let phases: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let raw: Vec<Complex64> = (0..n)
        .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
        .collect();
    let norm = raw.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
    let amplitudes = raw.into_iter().map(|a| a / norm).collect();
    SpectralInstance::new(phases, amplitudes).expect("normalized by construction")
}

type Suite = (&'static str, fn(&mut ChaCha8Rng) -> Result<(bool, String)>);

const SUITES: [Suite; 8] = [
    ("kernel completeness", kernel_completeness),
    ("oracle equivalence", oracle_equivalence),
    ("exact-phase collapse", exact_phase),
    ("good-set bounds", bound_suite),
    ("ancilla sizing", ancilla_sizing),
    ("discretization oracle", discretization_oracle),
    ("failure inequality", failure_inequality),
    ("convergence order", convergence_order),
];

pub fn run_all(seed: u64) -> Vec<CheckOutcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    SUITES
        .iter()
        .map(|(name, suite)| {
            let (passed, detail) = match suite(&mut rng) {
                Ok(r) => r,
                Err(e) => (false, e.to_string()),
            };
            CheckOutcome {
                name,
                passed,
                detail,
            }
        })
        .collect()
}

fn kernel_completeness(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let phi: f64 = rng.random();
        for b in 1..=10 {
            let total: f64 = (0..1u64 << b).map(|j| g_kernel(phi, j, b).norm_sqr()).sum();
            worst = worst.max((total - 1.0).abs());
        }
    }
    Ok((worst <= 1e-10, format!("max |sum |g|^2 - 1| = {worst:.3e}")))
}

fn oracle_equivalence(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let n = rng.random_range(1..=64);
        let b = rng.random_range(1..=8);
        let inst = random_instance(rng, n);
        let analytic = outcome_distribution(&inst, b)?;
        let simulated = statevector_qpe(&inst, b)?.marginal();
        for (a, s) in analytic.probabilities.iter().zip(&simulated.probabilities) {
            worst = worst.max((a - s).abs());
        }
    }
    Ok((worst <= 1e-9, format!("max elementwise difference {worst:.3e}")))
}

fn exact_phase(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let b: u32 = rng.random_range(2..=8);
        let m = 1u64 << b;
        let n = rng.random_range(1..=m.min(16)) as usize;
        let mut bins: Vec<u64> = (0..m).collect();
        for i in 0..n {
            let pick = rng.random_range(i..m as usize);
            bins.swap(i, pick);
        }
        bins.truncate(n);
        let random = random_instance(rng, n);
        let phases = bins.iter().map(|&j| j as f64 / m as f64).collect();
        let inst = SpectralInstance::new(phases, random.amplitudes().to_vec())?;
        let dist = outcome_distribution(&inst, b)?;
        for (u, &j) in bins.iter().enumerate() {
            worst = worst.max((dist.probabilities[j as usize] - inst.amplitudes()[u].norm_sqr()).abs());
            if inst.amplitudes()[u].norm_sqr() > 1e-300 {
                let c = collapse(&inst, b, j)?;
                worst = worst.max((c.weight(u) - 1.0).abs());
            }
        }
    }
    Ok((worst <= 1e-12, format!("max deviation {worst:.3e}")))
}

fn bound_suite(rng: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut violations = 0;
    let mut tightest = f64::INFINITY;
    for _ in 0..200 {
        let n = rng.random_range(1..=16);
        let b = rng.random_range(3..=8);
        let inst = random_instance(rng, n);
        let target = rng.random_range(0..n);
        let d_sq = inst.amplitudes()[target].norm_sqr();
        let dist = outcome_distribution(&inst, b)?;
        for window in 1..=10 {
            let set = good_set(inst.phases()[target], b, window)?;
            let margin = good_set_probability(&dist, &set)
                - good_set_probability_bound(d_sq.min(1.0), window)?;
            tightest = tightest.min(margin);
            if margin < -1e-12 {
                violations += 1;
            }
        }
    }
    Ok((
        violations == 0,
        format!("{violations} violations, smallest margin {tightest:.3e}"),
    ))
}

fn ancilla_sizing(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut mismatches = 0;
    for n in 1..=16 {
        for eps in [0.01, 0.1, 0.25, 0.5] {
            let expected = n + (1.0f64 + 1.0 / (2.0 * eps)).log2().ceil() as u32;
            if choose_b(n, eps)? != expected {
                mismatches += 1;
            }
        }
    }
    Ok((mismatches == 0, format!("{mismatches} mismatches over 64 entries")))
}

fn discretization_oracle(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut worst_value = 0.0f64;
    let mut worst_fidelity = 0.0f64;
    for n in [8, 64] {
        let grid = build_grid(n)?;
        let basis = eigensolve(&discretize(&PotentialSpec::Zero, &grid)?, n)?;
        let h = grid.spacing();
        for (i, pair) in basis.pairs.iter().enumerate() {
            let kk = (i + 1) as f64;
            let exact = 4.0 / (h * h) * (kk * PI * h / 2.0).sin().powi(2);
            worst_value = worst_value.max((pair.value - exact).abs() / exact);
            let sine: Vec<f64> = grid.points().iter().map(|x| (kk * PI * x).sin()).collect();
            let norm = sine.iter().map(|v| v * v).sum::<f64>().sqrt();
            let overlap: f64 = pair.vector.iter().zip(&sine).map(|(a, b)| a * b).sum::<f64>() / norm;
            worst_fidelity = worst_fidelity.max(1.0 - overlap.abs());
        }
    }
    Ok((
        worst_value <= 1e-10 && worst_fidelity <= 1e-10,
        format!("max relative eigenvalue error {worst_value:.3e}, max infidelity {worst_fidelity:.3e}"),
    ))
}

fn failure_inequality(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let mut checked = 0;
    let mut worst = f64::NEG_INFINITY;
    for potential in [PotentialSpec::Zero, PotentialSpec::QuadraticWell { strength: 100.0 }] {
        for k in 0..3 {
            for n0 in [8, 16, 32] {
                let fine: Vec<usize> = (0..=3).map(|s| n0 << s).collect();
                for row in failure_at_fine_sizes(&potential, k, n0, &fine)? {
                    worst = worst.max(row.failure - row.error_norm * row.error_norm);
                    checked += 1;
                }
            }
        }
    }
    Ok((
        worst <= 1e-12,
        format!("{checked} configurations, max failure - error^2 = {worst:.3e}"),
    ))
}

fn convergence_order(_: &mut ChaCha8Rng) -> Result<(bool, String)> {
    let config = ExperimentConfig::new(PotentialSpec::Zero, 0, vec![8, 16, 32, 64], FineGrid::FixedN(1024));
    let sweep = sweep_and_fit(&config)?;
    Ok((
        sweep.fit.slope <= -1.7,
        format!("fitted slope {:.4}", sweep.fit.slope),
    ))
}
