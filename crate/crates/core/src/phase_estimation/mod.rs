//! Measurement statistics of phase estimation with an approximate
//! eigenvector as input.
//!
//! The first register holds `b` qubits, so outcomes are bins
//! `j ∈ {0, …, 2^b - 1}` on the unit circle of phases. An input
//! `Σ_u d_u |u⟩` with eigenphases `φ_u` produces outcome `j` with probability
//! `Σ_u |d_u|² |g(φ_u, j)|²`, where [`g_kernel`] is the spreading amplitude of
//! a single phase over the bins.

mod sampling;
mod statevector;

use std::f64::consts::PI;
use std::io::{Read, Write};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::DiscreteHamiltonian;

pub use sampling::sample_outcomes;
pub use statevector::{statevector_qpe, JointState, MAX_STATEVECTOR_BITS, MAX_STATEVECTOR_DIM};

/// Offsets `|2^b φ - j|` below this are treated as an exactly representable
/// phase.
pub const EXACT_BIN_TOLERANCE: f64 = 1e-12;
/// Largest register size accepted by the analytic path.
pub const MAX_BITS: u32 = 30;

/// Distance between two phases on the unit circle, in `[0, 1/2]`.
pub fn wrap_distance(phi0: f64, phi1: f64) -> f64 {
    let r = (phi1 - phi0).rem_euclid(1.0);
    r.min(1.0 - r)
}

/// Amplitude of bin `j` when the register encodes phase `phi` exactly:
///
/// `g = e^{πi δ (2^b - 1) / 2^b} sin(πδ) / (2^b sin(πδ / 2^b))`, `δ = 2^b φ - j`,
///
/// and `g = 1` when `δ = 0`.
pub fn g_kernel(phi: f64, j: u64, b: u32) -> Complex64 {
    let m = (1u64 << b) as f64;
    let delta = m * phi - j as f64;
    // δ and δ ± 2^b describe the same bin, and the kernel is 2^b-periodic
    let reduced = delta - m * (delta / m).round();
    if reduced.abs() < EXACT_BIN_TOLERANCE {
        return Complex64::new(1.0, 0.0);
    }
    let nearest = reduced.round();
    let frac = reduced - nearest;
    // sin(πδ) = (-1)^round(δ) sin(π frac(δ)), accurate near integers
    let sign = if (nearest as i64).rem_euclid(2) == 0 { 1.0 } else { -1.0 };
    let ratio = sign * (PI * frac).sin() / (m * (PI * reduced / m).sin());
    let phase = Complex64::from_polar(1.0, PI * reduced * (m - 1.0) / m);
    phase * ratio
}

/// Bin closest to `phi` on the circle.
pub fn nearest_bin(phi: f64, b: u32) -> u64 {
    let m = 1u64 << b;
    ((phi * m as f64).round() as u64) % m
}

/// Eigenphases and input amplitudes `d_u` of the second register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectralInstance {
    phases: Vec<f64>,
    amplitudes: Vec<Complex64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
struct InstanceEntry {
    phase: f64,
    amplitude_re: f64,
    amplitude_im: f64,
}

impl SpectralInstance {
    pub fn new(phases: Vec<f64>, amplitudes: Vec<Complex64>) -> Result<Self> {
        if phases.is_empty() || phases.len() != amplitudes.len() {
            return Err(Error::invalid(format!(
                "instance needs equal nonzero numbers of phases ({}) and amplitudes ({})",
                phases.len(),
                amplitudes.len()
            )));
        }
        if let Some(p) = phases.iter().find(|p| !(0.0..1.0).contains(*p)) {
            return Err(Error::invalid(format!("phase {p} outside [0, 1)")));
        }
        let weight: f64 = amplitudes.iter().map(|d| d.norm_sqr()).sum();
        if (weight - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!(
                "amplitudes have total weight {weight}, expected 1"
            )));
        }
        Ok(Self { phases, amplitudes })
    }

    pub fn phases(&self) -> &[f64] {
        &self.phases
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.phases.len()
    }

    pub fn is_empty(&self) -> bool {
        self.phases.is_empty()
    }

    /// Reads a JSON array of `{phase, amplitude_re, amplitude_im}`.
    pub fn from_json_reader<R: Read>(reader: R) -> Result<Self> {
        let entries: Vec<InstanceEntry> = serde_json::from_reader(reader)?;
        let (phases, amplitudes) = entries
            .into_iter()
            .map(|e| (e.phase, Complex64::new(e.amplitude_re, e.amplitude_im)))
            .unzip();
        Self::new(phases, amplitudes)
    }

    pub fn to_json_writer<W: Write>(&self, writer: W) -> Result<()> {
        let entries: Vec<InstanceEntry> = self
            .phases
            .iter()
            .zip(&self.amplitudes)
            .map(|(&phase, d)| InstanceEntry {
                phase,
                amplitude_re: d.re,
                amplitude_im: d.im,
            })
            .collect();
        serde_json::to_writer_pretty(writer, &entries)?;
        Ok(())
    }
}

/// Probabilities `p_j` over the `2^b` outcomes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutcomeDistribution {
    pub probabilities: Vec<f64>,
}

impl OutcomeDistribution {
    pub fn new(probabilities: Vec<f64>) -> Result<Self> {
        if probabilities.iter().any(|p| !(*p >= 0.0)) {
            return Err(Error::invalid("probabilities must be nonnegative"));
        }
        let total: f64 = probabilities.iter().sum();
        if (total - 1.0).abs() > 1e-10 {
            return Err(Error::invalid(format!("probabilities sum to {total}")));
        }
        Ok(Self { probabilities })
    }

    pub fn len(&self) -> usize {
        self.probabilities.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probabilities.is_empty()
    }

    /// Most likely outcome; ties go to the lowest bin.
    pub fn mode(&self) -> u64 {
        let mut best = 0;
        for (j, &p) in self.probabilities.iter().enumerate() {
            if p > self.probabilities[best] {
                best = j;
            }
        }
        best as u64
    }

    pub fn write_csv<W: Write>(&self, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["j", "p_j"])?;
        for (j, p) in self.probabilities.iter().enumerate() {
            w.write_record([j.to_string(), format!("{p:.17e}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Writes per-bin shot counts as `j,count`.
pub fn write_counts_csv<W: Write>(counts: &[u64], writer: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record(["j", "count"])?;
    for (j, c) in counts.iter().enumerate() {
        w.write_record([j.to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

fn check_bits(b: u32) -> Result<()> {
    if b == 0 || b > MAX_BITS {
        return Err(Error::invalid(format!(
            "register size must lie in 1..={MAX_BITS}, got {b}"
        )));
    }
    Ok(())
}

/// `p_j = Σ_u |d_u|² |g(φ_u, j)|²` for every bin.
pub fn outcome_distribution(instance: &SpectralInstance, b: u32) -> Result<OutcomeDistribution> {
    check_bits(b)?;
    let m = 1u64 << b;
    let probabilities = (0..m)
        .map(|j| {
            instance
                .phases
                .iter()
                .zip(&instance.amplitudes)
                .map(|(&phi, d)| d.norm_sqr() * g_kernel(phi, j, b).norm_sqr())
                .sum()
        })
        .collect();
    Ok(OutcomeDistribution { probabilities })
}

/// Second-register state after observing `outcome` on the first register.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CollapseResult {
    pub outcome: u64,
    pub probability: f64,
    /// `d_u g(φ_u, j) / √p_j`, indexed like the instance's eigenvectors.
    pub coefficients: Vec<Complex64>,
}

impl CollapseResult {
    pub fn weight(&self, u: usize) -> f64 {
        self.coefficients[u].norm_sqr()
    }
}

pub fn collapse(instance: &SpectralInstance, b: u32, outcome: u64) -> Result<CollapseResult> {
    check_bits(b)?;
    if outcome >= 1u64 << b {
        return Err(Error::invalid(format!(
            "outcome {outcome} outside a {b}-qubit register"
        )));
    }
    let amps: Vec<Complex64> = instance
        .phases
        .iter()
        .zip(&instance.amplitudes)
        .map(|(&phi, d)| d * g_kernel(phi, outcome, b))
        .collect();
    let probability: f64 = amps.iter().map(|a| a.norm_sqr()).sum();
    if probability < 1e-300 {
        return Err(Error::invalid(format!(
            "outcome {outcome} has zero probability"
        )));
    }
    let scale = probability.sqrt();
    Ok(CollapseResult {
        outcome,
        probability,
        coefficients: amps.into_iter().map(|a| a / scale).collect(),
    })
}

/// Bins within circle distance `window_k / 2^b` of `phi_target`.
pub fn good_set(phi_target: f64, b: u32, window_k: u64) -> Result<Vec<u64>> {
    check_bits(b)?;
    if window_k < 1 {
        return Err(Error::invalid("window must be at least 1"));
    }
    let m = 1u64 << b;
    Ok((0..m)
        .filter(|&j| {
            wrap_distance(j as f64 / m as f64, phi_target) * m as f64
                <= window_k as f64 + EXACT_BIN_TOLERANCE
        })
        .collect())
}

pub fn good_set_probability(distribution: &OutcomeDistribution, set: &[u64]) -> f64 {
    set.iter()
        .map(|&j| distribution.probabilities[j as usize])
        .sum()
}

/// Guaranteed probability of landing in the window-`k` good set when the
/// target eigenvector has weight `d_target_sq`:
/// `(8/π²)|d|²` for `k = 1` and `|d|² (1 - 1/(2(k-1)))` for `k > 1`.
pub fn good_set_probability_bound(d_target_sq: f64, window_k: u64) -> Result<f64> {
    if !(-1e-12..=1.0 + 1e-12).contains(&d_target_sq) {
        return Err(Error::invalid(format!(
            "target weight must lie in [0, 1], got {d_target_sq}"
        )));
    }
    match window_k {
        0 => Err(Error::invalid("window must be at least 1")),
        1 => Ok(8.0 / (PI * PI) * d_target_sq),
        k => Ok(d_target_sq * (1.0 - 1.0 / (2.0 * (k - 1) as f64))),
    }
}

/// Ancilla count `n + ⌈log₂(1 + 1/(2ε))⌉` giving accuracy `2^{-n}` with
/// probability at least `|d|²(1 - ε)`.
pub fn choose_b(n: u32, epsilon: f64) -> Result<u32> {
    if n < 1 {
        return Err(Error::invalid("accuracy bits must be at least 1"));
    }
    if !(epsilon > 0.0 && epsilon < 1.0) {
        return Err(Error::invalid(format!(
            "epsilon must lie in (0, 1), got {epsilon}"
        )));
    }
    let x = 1.0 + 1.0 / (2.0 * epsilon);
    // smallest m with 2^m >= x, without trusting log2 at exact powers
    let mut m = x.log2().ceil().max(0.0) as u32;
    while 2f64.powi(m as i32) < x {
        m += 1;
    }
    while m > 0 && 2f64.powi(m as i32 - 1) >= x {
        m -= 1;
    }
    Ok(n + m)
}

/// Window `2^{b-n}` on which [`choose_b`]'s guarantee is stated.
pub fn accuracy_window(b: u32, n: u32) -> u64 {
    1u64 << b.saturating_sub(n)
}

/// Phase of `e^{-iλt}` written as `e^{2πiφ}` up to orientation.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MappedPhase {
    pub phase: f64,
    /// `λt/(2π)` fell outside `[0, 1)`, so the map is not invertible.
    pub aliased: bool,
}

/// `φ = (λt / 2π) mod 1`.
pub fn map_eigenvalue_to_phase(lambda: f64, t: f64) -> Result<MappedPhase> {
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::invalid(format!("evolution time must be positive, got {t}")));
    }
    let raw = lambda * t / (2.0 * PI);
    let aliased = !(0.0..1.0).contains(&raw);
    if aliased {
        log::warn!("eigenvalue {lambda} aliases at t = {t}: lambda t / 2pi = {raw}");
    }
    Ok(MappedPhase {
        phase: raw.rem_euclid(1.0),
        aliased,
    })
}

pub fn phase_to_eigenvalue(phi: f64, t: f64) -> f64 {
    2.0 * PI * phi / t
}

/// Evolution time `2π(1 - 2^{-b}) / λ_upper` mapping `[0, λ_upper]` into
/// `[0, 1 - 2^{-b}]`.
pub fn evolution_time(lambda_upper: f64, b: u32) -> f64 {
    2.0 * PI * (1.0 - 0.5f64.powi(b as i32)) / lambda_upper
}

/// Register size, evolution time and accuracy target of one phase-estimation
/// run.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseConfig {
    pub b: u32,
    pub evolution_time: f64,
    pub target_accuracy_bits: u32,
    pub epsilon: f64,
}

impl PhaseConfig {
    /// Sizes the register from `(n, ε)` unless `b` is given, and picks `t`
    /// from the Gershgorin upper bound of `h` so no eigenvalue aliases.
    pub fn for_hamiltonian(
        h: &DiscreteHamiltonian,
        target_accuracy_bits: u32,
        epsilon: f64,
        b: Option<u32>,
    ) -> Result<Self> {
        let b = match b {
            Some(b) => b,
            None => choose_b(target_accuracy_bits, epsilon)?,
        };
        check_bits(b)?;
        if b < target_accuracy_bits {
            return Err(Error::invalid(format!(
                "register of {b} qubits cannot reach {target_accuracy_bits} bits of accuracy"
            )));
        }
        let (_, upper) = h.gershgorin();
        if !(upper > 0.0) {
            return Err(Error::invalid("operator spectrum bound must be positive"));
        }
        Ok(Self {
            b,
            evolution_time: evolution_time(upper, b),
            target_accuracy_bits,
            epsilon,
        })
    }
}
