//! Fine-grid state preparation by replication of a coarse eigenvector, and
//! the overlap of the prepared state with the fine eigenbasis.

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::eigen::{EigenBasis, EigenPair};
use crate::error::{Error, Result};

/// Unit-norm tolerance for [`StateVector`].
pub const NORM_TOLERANCE: f64 = 1e-12;
/// Pairwise overlap allowed between distinct basis vectors.
pub const ORTHONORMALITY_TOLERANCE: f64 = 1e-10;

/// Complex amplitude vector of unit 2-norm.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that already have unit norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        if amplitudes.is_empty() {
            return Err(Error::invalid("state vector is empty"));
        }
        let norm = norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOLERANCE {
            return Err(Error::invalid(format!(
                "state vector norm is {norm}, expected 1 within {NORM_TOLERANCE:e}"
            )));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary nonzero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        let norm = norm(&amplitudes);
        if !(norm > 0.0) || !norm.is_finite() {
            return Err(Error::invalid(format!("cannot normalize vector of norm {norm}")));
        }
        amplitudes.iter_mut().for_each(|a| *a /= norm);
        Ok(Self { amplitudes })
    }

    pub fn from_real(values: &[f64]) -> Result<Self> {
        Self::new(values.iter().map(|&v| Complex64::new(v, 0.0)).collect())
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn len(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amplitudes.is_empty()
    }

    pub fn norm(&self) -> f64 {
        norm(&self.amplitudes)
    }

    /// `⟨u|self⟩` for a real vector `u`.
    pub fn overlap_real(&self, u: &[f64]) -> Complex64 {
        self.amplitudes.iter().zip(u).map(|(a, &u)| a * u).sum()
    }

    /// `min_θ ‖u - e^{iθ} self‖₂` for a real vector `u`; global phase is
    /// unobservable.
    pub fn aligned_distance_real(&self, u: &[f64]) -> f64 {
        let overlap = self.overlap_real(u);
        let phase = if overlap.norm() > 0.0 {
            overlap.conj() / overlap.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        self.amplitudes
            .iter()
            .zip(u)
            .map(|(a, &u)| (Complex64::new(u, 0.0) - phase * a).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }

    /// `‖u - self‖₂` for a real vector `u`.
    pub fn distance_real(&self, u: &[f64]) -> f64 {
        self.amplitudes
            .iter()
            .zip(u)
            .map(|(a, &u)| (Complex64::new(u, 0.0) - a).norm_sqr())
            .sum::<f64>()
            .sqrt()
    }
}

/// 2-norm with Neumaier-compensated summation of the squares.
fn norm(v: &[Complex64]) -> f64 {
    let mut sum = 0.0f64;
    let mut compensation = 0.0f64;
    for a in v {
        let x = a.norm_sqr();
        let t = sum + x;
        if sum.abs() >= x {
            compensation += (sum - t) + x;
        } else {
            compensation += (x - t) + sum;
        }
        sum = t;
    }
    (sum + compensation).sqrt()
}

/// Appends `s` qubits in `|0⟩` and applies a Hadamard to each: amplitude `j`
/// of the result is `u[⌊j / 2^s⌋] / √(2^s)`.
pub fn replicate(coarse: &StateVector, s: u32) -> StateVector {
    let block = 1usize << s;
    let scale = (block as f64).sqrt().recip();
    let amplitudes = coarse
        .amplitudes
        .iter()
        .flat_map(|&a| std::iter::repeat_n(a * scale, block))
        .collect();
    StateVector { amplitudes }
}

/// Expansion of a prepared state in the fine eigenbasis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub k: usize,
    /// `d_{k,l} = ⟨U_l|Ũ⟩` for every supplied basis vector `l`.
    pub coefficients: Vec<Complex64>,
    /// `|d_{k,k}|²`.
    pub success_probability: f64,
    /// `‖U_k - e^{iθ}Ũ‖₂` with the global phase `θ` aligned to `U_k`.
    pub error_norm: f64,
    /// `1 - |d_{k,k}|²`.
    pub failure: f64,
    /// True when the basis spans the whole space, so `Σ_l |d_{k,l}|² = 1`.
    pub complete_basis: bool,
    pub degenerate_warning: bool,
}

impl OverlapReport {
    /// `1 - Σ_{l≠k} |d_{k,l}|²`; equal to the success probability when the
    /// basis is complete.
    pub fn success_from_complement(&self) -> f64 {
        1.0 - self
            .coefficients
            .iter()
            .enumerate()
            .filter(|(l, _)| *l != self.k)
            .map(|(_, d)| d.norm_sqr())
            .sum::<f64>()
    }

    pub fn total_weight(&self) -> f64 {
        self.coefficients.iter().map(|d| d.norm_sqr()).sum()
    }
}

/// Overlap of `prepared` with eigenvector `k` of the (possibly partial)
/// fine basis.
pub fn overlap_analysis(basis: &EigenBasis, k: usize, prepared: &StateVector) -> Result<OverlapReport> {
    let n = basis.dimension;
    if prepared.len() != n {
        return Err(Error::invalid(format!(
            "prepared state has length {} but the basis dimension is {n}",
            prepared.len()
        )));
    }
    let target = basis.get(k).ok_or_else(|| {
        Error::invalid(format!(
            "target index {k} outside the {} supplied eigenvectors",
            basis.pairs.len()
        ))
    })?;
    check_orthonormal(&basis.pairs)?;

    let coefficients: Vec<Complex64> = basis
        .pairs
        .iter()
        .map(|p| prepared.overlap_real(&p.vector))
        .collect();
    let success_probability = coefficients[k].norm_sqr();
    let report = OverlapReport {
        k,
        success_probability,
        error_norm: prepared.aligned_distance_real(&target.vector),
        failure: 1.0 - success_probability,
        complete_basis: basis.is_complete(),
        degenerate_warning: basis.is_degenerate_at(k),
        coefficients,
    };
    if report.complete_basis && (report.total_weight() - 1.0).abs() > 1e-10 {
        return Err(Error::invariant(
            "eigenbasis completeness",
            format!("sum of |d|^2 = {}", report.total_weight()),
        ));
    }
    if report.failure > report.error_norm * report.error_norm + 1e-12 {
        return Err(Error::invariant(
            "failure inequality",
            format!(
                "1 - |d_kk|^2 = {:e} exceeds ||U - U~||^2 = {:e}",
                report.failure,
                report.error_norm * report.error_norm
            ),
        ));
    }
    Ok(report)
}

fn check_orthonormal(pairs: &[EigenPair]) -> Result<()> {
    for (a, p) in pairs.iter().enumerate() {
        let nn: f64 = p.vector.iter().map(|v| v * v).sum();
        if (nn.sqrt() - 1.0).abs() > ORTHONORMALITY_TOLERANCE {
            return Err(Error::invalid(format!(
                "basis vector {a} has norm {}",
                nn.sqrt()
            )));
        }
        for (b, q) in pairs.iter().enumerate().skip(a + 1) {
            let dot: f64 = p.vector.iter().zip(&q.vector).map(|(x, y)| x * y).sum();
            if dot.abs() > ORTHONORMALITY_TOLERANCE {
                return Err(Error::invalid(format!(
                    "basis vectors {a} and {b} are not orthogonal: overlap {dot:e}"
                )));
            }
        }
    }
    Ok(())
}

/// Coarse eigenvector moved a 2-norm distance `noise` in a seeded random
/// direction orthogonal to it, staying on the unit sphere.
pub fn perturbed_coarse_input(coarse: &EigenPair, noise: f64, seed: u64) -> Result<StateVector> {
    if !(0.0..1.0).contains(&noise) {
        return Err(Error::invalid(format!(
            "perturbation magnitude must lie in [0, 1), got {noise}"
        )));
    }
    let v = &coarse.vector;
    if noise == 0.0 {
        return StateVector::from_real(v);
    }
    if v.len() < 2 {
        return Err(Error::invalid("cannot perturb a one-dimensional vector"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let direction = loop {
        let mut w: Vec<f64> = (0..v.len()).map(|_| StandardNormal.sample(&mut rng)).collect();
        let dot: f64 = w.iter().zip(v).map(|(a, b)| a * b).sum();
        w.iter_mut().zip(v).for_each(|(a, b)| *a -= dot * b);
        let norm = w.iter().map(|a| a * a).sum::<f64>().sqrt();
        if norm > 1e-8 {
            w.iter_mut().for_each(|a| *a /= norm);
            break w;
        }
    };
    // ‖u - v‖² = 2 - 2 cos θ
    let cos = 1.0 - 0.5 * noise * noise;
    let sin = (1.0 - cos * cos).sqrt();
    let amplitudes: Vec<Complex64> = v
        .iter()
        .zip(&direction)
        .map(|(a, w)| Complex64::new(cos * a + sin * w, 0.0))
        .collect();
    StateVector::normalized(amplitudes)
}
