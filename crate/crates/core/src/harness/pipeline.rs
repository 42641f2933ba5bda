use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::io::Write;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::ExperimentConfig;
use crate::eigen::{eigensolve, EigenBasis};
use crate::error::{Error, Result};
use crate::grid::{build_grid, discretize, DiscreteHamiltonian, PotentialSpec};
use crate::phase_estimation::{
    accuracy_window, g_kernel, good_set, good_set_probability, good_set_probability_bound,
    map_eigenvalue_to_phase, outcome_distribution, phase_to_eigenvalue, sample_outcomes,
    OutcomeDistribution, PhaseConfig, SpectralInstance,
};
use crate::state_prep::{overlap_analysis, replicate, OverlapReport, StateVector};

/// Slack allowed when comparing a measured probability with its lower bound.
const BOUND_SLACK: f64 = 1e-12;

/// Overlap of one prepared state, in the serialized form shared by every
/// report.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapSummary {
    #[serde(rename = "N")]
    pub n: usize,
    #[serde(rename = "N0")]
    pub n0: usize,
    pub s: u32,
    pub k: usize,
    pub success_probability: f64,
    pub failure: f64,
    pub error_norm: f64,
    pub degenerate_warning: bool,
}

impl OverlapSummary {
    pub fn from_report(report: &OverlapReport, n0: usize, s: u32, n: usize) -> Self {
        Self {
            n,
            n0,
            s,
            k: report.k,
            success_probability: report.success_probability,
            failure: report.failure,
            error_norm: report.error_norm,
            degenerate_warning: report.degenerate_warning,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GoodSetCheck {
    pub window: u64,
    /// Probability of the good set; a lower bound on it when the outcome
    /// distribution is not exact.
    pub measured: f64,
    pub bound: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShotStats {
    pub shots: u64,
    pub seed: u64,
    /// Shots landing within one bin width of the true phase.
    pub hits: u64,
    pub success_rate: f64,
    /// `(8/π²) |d_kk|²`.
    pub predicted_floor: f64,
    /// Standard error of the empirical rate.
    pub sigma: f64,
    pub within_margin: bool,
    #[serde(skip)]
    pub counts: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    #[serde(flatten)]
    pub overlap: OverlapSummary,
    pub coarse_eigenvalue: f64,
    pub fine_eigenvalue: f64,
    pub b: u32,
    pub evolution_time: f64,
    pub true_phase: f64,
    /// Whether every eigenvector of `H_N` entered the outcome distribution.
    pub distribution_exact: bool,
    pub window_one: GoodSetCheck,
    pub accuracy_window: GoodSetCheck,
    pub modal_outcome: u64,
    pub phase_estimate: f64,
    pub eigenvalue_estimate: f64,
    pub eigenvalue_error: f64,
    /// One bin width expressed as an eigenvalue difference.
    pub eigenvalue_resolution: f64,
    pub shots: Option<ShotStats>,
    pub duration_ms: f64,
    #[serde(skip)]
    pub distribution: Option<OutcomeDistribution>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub config: ExperimentConfig,
    pub records: Vec<RunRecord>,
}

const RECORD_COLUMNS: [&str; 26] = [
    "N0",
    "s",
    "N",
    "k",
    "success_probability",
    "failure",
    "error_norm",
    "degenerate_warning",
    "coarse_eigenvalue",
    "fine_eigenvalue",
    "b",
    "t",
    "true_phase",
    "distribution_exact",
    "pr_window_one",
    "bound_window_one",
    "accuracy_window",
    "pr_accuracy_window",
    "bound_accuracy_window",
    "modal_outcome",
    "phase_estimate",
    "eigenvalue_estimate",
    "eigenvalue_error",
    "shots",
    "shot_success_rate",
    "shot_sigma",
];

pub(crate) fn fmt_f64(x: f64) -> String {
    format!("{x:.17e}")
}

impl RunReport {
    /// One row per record. Timing is left out so equal configs give
    /// byte-identical files.
    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(RECORD_COLUMNS)?;
        for r in &self.records {
            let o = &r.overlap;
            let (shots, rate, sigma) = match &r.shots {
                Some(s) => (s.shots.to_string(), fmt_f64(s.success_rate), fmt_f64(s.sigma)),
                None => ("0".into(), String::new(), String::new()),
            };
            w.write_record([
                o.n0.to_string(),
                o.s.to_string(),
                o.n.to_string(),
                o.k.to_string(),
                fmt_f64(o.success_probability),
                fmt_f64(o.failure),
                fmt_f64(o.error_norm),
                o.degenerate_warning.to_string(),
                fmt_f64(r.coarse_eigenvalue),
                fmt_f64(r.fine_eigenvalue),
                r.b.to_string(),
                fmt_f64(r.evolution_time),
                fmt_f64(r.true_phase),
                r.distribution_exact.to_string(),
                fmt_f64(r.window_one.measured),
                fmt_f64(r.window_one.bound),
                r.accuracy_window.window.to_string(),
                fmt_f64(r.accuracy_window.measured),
                fmt_f64(r.accuracy_window.bound),
                r.modal_outcome.to_string(),
                fmt_f64(r.phase_estimate),
                fmt_f64(r.eigenvalue_estimate),
                fmt_f64(r.eigenvalue_error),
                shots,
                rate,
                sigma,
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn write_json<W: Write>(&self, writer: W) -> Result<()> {
        serde_json::to_writer_pretty(writer, self)?;
        Ok(())
    }
}

/// Fine-grid operator and its classically computed eigenpairs, the oracle
/// the prepared state is measured against.
#[derive(Debug, Clone)]
pub struct FineProblem {
    pub hamiltonian: DiscreteHamiltonian,
    pub basis: EigenBasis,
}

pub fn solve_problem(potential: &PotentialSpec, n: usize, count: usize) -> Result<FineProblem> {
    let grid = build_grid(n)?;
    let hamiltonian = discretize(&potential.resampled(&grid)?, &grid)?;
    let basis = eigensolve(&hamiltonian, count.min(n))?;
    Ok(FineProblem { hamiltonian, basis })
}

/// Coarse solve, replication and overlap with fine eigenvector `k`.
pub fn prepare_and_compare(
    potential: &PotentialSpec,
    k: usize,
    n0: usize,
    s: u32,
    fine: &FineProblem,
) -> Result<(OverlapReport, f64)> {
    let coarse = solve_problem(potential, n0, k + 1)?;
    let target = &coarse.basis.pairs[k];
    let prepared = replicate(&StateVector::from_real(&target.vector)?, s);
    let report = overlap_analysis(&fine.basis, k, &prepared)?;
    Ok((report, target.value))
}

/// Overlap summaries for one coarse size at several fine sizes.
pub fn failure_at_fine_sizes(
    potential: &PotentialSpec,
    k: usize,
    n0: usize,
    fine_sizes: &[usize],
) -> Result<Vec<OverlapSummary>> {
    fine_sizes
        .par_iter()
        .map(|&n| {
            let (s, n) = super::config::FineGrid::FixedN(n).resolve(n0)?;
            let fine = solve_problem(potential, n, k + 1)?;
            let (report, _) = prepare_and_compare(potential, k, n0, s, &fine)?;
            Ok(OverlapSummary::from_report(&report, n0, s, n))
        })
        .collect()
}

pub fn run_pipeline(config: &ExperimentConfig) -> Result<RunReport> {
    config.validate()?;
    let mut points = Vec::with_capacity(config.n0_list.len());
    for &n0 in &config.n0_list {
        let (s, n) = config.fine.resolve(n0)?;
        points.push((n0, s, n));
    }
    points.sort_unstable();
    points.dedup();

    let mut fine_sizes: Vec<usize> = points.iter().map(|p| p.2).collect();
    fine_sizes.sort_unstable();
    fine_sizes.dedup();
    let fine: BTreeMap<usize, FineProblem> = fine_sizes
        .par_iter()
        .map(|&n| {
            let count = if n <= config.full_basis_limit { n } else { config.k + 1 };
            solve_problem(&config.potential, n, count)
                .map(|p| (n, p))
                .map_err(|e| e.context(format!("fine eigensolve at N = {n}")))
        })
        .collect::<Result<_>>()?;

    let records = points
        .par_iter()
        .enumerate()
        .map(|(i, &(n0, s, n))| {
            run_point(config, n0, s, &fine[&n], config.rng_seed.wrapping_add(i as u64))
                .map_err(|e| e.context(format!("N0 = {n0}, s = {s}")))
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(RunReport {
        config: config.clone(),
        records,
    })
}

fn run_point(
    config: &ExperimentConfig,
    n0: usize,
    s: u32,
    fine: &FineProblem,
    seed: u64,
) -> Result<RunRecord> {
    let start = Instant::now();
    let k = config.k;
    let n = fine.basis.dimension;
    let (report, coarse_eigenvalue) = prepare_and_compare(&config.potential, k, n0, s, fine)?;

    let phase = PhaseConfig::for_hamiltonian(
        &fine.hamiltonian,
        config.qpe.bits,
        config.qpe.epsilon,
        config.qpe.b,
    )?;
    let b = phase.b;
    let t = phase.evolution_time;
    let phases = fine
        .basis
        .pairs
        .iter()
        .map(|p| map_eigenvalue_to_phase(p.value, t).map(|m| m.phase))
        .collect::<Result<Vec<f64>>>()?;
    let true_phase = phases[k];
    let d_sq = report.success_probability;

    let distribution_exact = report.complete_basis;
    let distribution = if distribution_exact {
        let instance = SpectralInstance::new(phases.clone(), report.coefficients.clone())?;
        outcome_distribution(&instance, b)?
    } else {
        // only the target term is known: Σ_{j∈G} |d_k g(φ_k, j)|² ≤ Pr(G)
        let m = 1u64 << b;
        OutcomeDistribution {
            probabilities: (0..m)
                .map(|j| d_sq * g_kernel(true_phase, j, b).norm_sqr())
                .collect(),
        }
    };

    let check_window = |window: u64| -> Result<GoodSetCheck> {
        let set = good_set(true_phase, b, window)?;
        let check = GoodSetCheck {
            window,
            measured: good_set_probability(&distribution, &set),
            bound: good_set_probability_bound(d_sq.min(1.0), window)?,
        };
        if check.measured + BOUND_SLACK < check.bound {
            return Err(Error::invariant(
                "good-set probability bound",
                format!(
                    "window {window}: Pr(G) = {} < bound {}",
                    check.measured, check.bound
                ),
            ));
        }
        Ok(check)
    };
    let window_one = check_window(1)?;
    let accuracy_window = check_window(accuracy_window(b, phase.target_accuracy_bits))?;

    let modal_outcome = distribution.mode();
    let m = (1u64 << b) as f64;
    let phase_estimate = modal_outcome as f64 / m;
    let eigenvalue_estimate = phase_to_eigenvalue(phase_estimate, t);
    let fine_eigenvalue = fine.basis.pairs[k].value;

    let shots = if config.shots > 0 {
        if !distribution_exact {
            return Err(Error::invalid(format!(
                "sampling needs the full eigenbasis; N = {n} exceeds full_basis_limit = {}",
                config.full_basis_limit
            )));
        }
        let counts = sample_outcomes(&distribution, config.shots, seed);
        let good = good_set(true_phase, b, 1)?;
        let hits: u64 = good.iter().map(|&j| counts[j as usize]).sum();
        let success_rate = hits as f64 / config.shots as f64;
        let predicted_floor = 8.0 / (PI * PI) * d_sq;
        let p = window_one.measured.clamp(0.0, 1.0);
        let sigma = (p * (1.0 - p) / config.shots as f64).sqrt();
        Some(ShotStats {
            shots: config.shots,
            seed,
            hits,
            success_rate,
            predicted_floor,
            sigma,
            within_margin: success_rate >= predicted_floor - 3.0 * sigma,
            counts,
        })
    } else {
        None
    };

    Ok(RunRecord {
        overlap: OverlapSummary::from_report(&report, n0, s, n),
        coarse_eigenvalue,
        fine_eigenvalue,
        b,
        evolution_time: t,
        true_phase,
        distribution_exact,
        window_one,
        accuracy_window,
        modal_outcome,
        phase_estimate,
        eigenvalue_estimate,
        eigenvalue_error: (eigenvalue_estimate - fine_eigenvalue).abs(),
        eigenvalue_resolution: phase_to_eigenvalue(1.0 / m, t),
        shots,
        duration_ms: start.elapsed().as_secs_f64() * 1e3,
        distribution: Some(distribution),
    })
}

/// Full spectral instance seen by the phase-estimation register for one
/// coarse size, with the register size the pipeline would use.
pub fn point_instance(config: &ExperimentConfig, n0: usize) -> Result<(SpectralInstance, u32)> {
    config.validate()?;
    let (s, n) = config.fine.resolve(n0)?;
    if n > config.full_basis_limit {
        return Err(Error::invalid(format!(
            "the full instance needs the whole eigenbasis; N = {n} exceeds full_basis_limit = {}",
            config.full_basis_limit
        )));
    }
    let fine = solve_problem(&config.potential, n, n)?;
    let (report, _) = prepare_and_compare(&config.potential, config.k, n0, s, &fine)?;
    let phase = PhaseConfig::for_hamiltonian(
        &fine.hamiltonian,
        config.qpe.bits,
        config.qpe.epsilon,
        config.qpe.b,
    )?;
    let phases = fine
        .basis
        .pairs
        .iter()
        .map(|p| map_eigenvalue_to_phase(p.value, phase.evolution_time).map(|m| m.phase))
        .collect::<Result<Vec<f64>>>()?;
    Ok((SpectralInstance::new(phases, report.coefficients)?, phase.b))
}

/// Empirical rate of landing within one bin of the true phase, per record.
pub fn end_to_end_success_rate(config: &ExperimentConfig) -> Result<Vec<ShotStats>> {
    if config.shots < 1000 {
        return Err(Error::invalid(format!(
            "success-rate estimation needs at least 1000 shots, got {}",
            config.shots
        )));
    }
    let report = run_pipeline(config)?;
    Ok(report
        .records
        .into_iter()
        .map(|r| r.shots.expect("shots requested"))
        .collect())
}
