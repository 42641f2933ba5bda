//! Literal joint-register simulation: Hadamards on the first register,
//! controlled powers of the unitary, then an inverse Fourier transform.
//!
//! The second register is kept in the eigenbasis, so a controlled `Q^x` only
//! multiplies amplitude `(x, u)` by `e^{2πi x φ_u}`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::{OutcomeDistribution, SpectralInstance};
use crate::error::{Error, Result};

pub const MAX_STATEVECTOR_BITS: u32 = 10;
pub const MAX_STATEVECTOR_DIM: usize = 1 << 12;

/// Pre-measurement state, row-major over (first-register bin, eigenvector).
#[derive(Debug, Clone, PartialEq)]
pub struct JointState {
    pub b: u32,
    pub dim: usize,
    pub amplitudes: Vec<Complex64>,
}

impl JointState {
    pub fn amplitude(&self, j: usize, u: usize) -> Complex64 {
        self.amplitudes[j * self.dim + u]
    }

    /// Distribution of the first register.
    pub fn marginal(&self) -> OutcomeDistribution {
        OutcomeDistribution {
            probabilities: self
                .amplitudes
                .chunks(self.dim)
                .map(|row| row.iter().map(|a| a.norm_sqr()).sum())
                .collect(),
        }
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }
}

pub fn statevector_qpe(instance: &SpectralInstance, b: u32) -> Result<JointState> {
    let dim = instance.len();
    if b == 0 || b > MAX_STATEVECTOR_BITS || dim > MAX_STATEVECTOR_DIM {
        return Err(Error::ResourceLimit(format!(
            "statevector simulation supports 1..={MAX_STATEVECTOR_BITS} bits and \
             {MAX_STATEVECTOR_DIM} eigenvectors, got b = {b}, N = {dim}"
        )));
    }
    let m = 1usize << b;
    let inv_sqrt_m = (m as f64).sqrt().recip();

    // Hadamards: every bin x carries d_u / √M
    let mut columns: Vec<Vec<Complex64>> = instance
        .amplitudes()
        .iter()
        .map(|&d| vec![d * inv_sqrt_m; m])
        .collect();

    // controlled Q^x
    for (column, &phi) in columns.iter_mut().zip(instance.phases()) {
        for (x, a) in column.iter_mut().enumerate() {
            let turns = (x as f64 * phi).fract();
            *a *= Complex64::from_polar(1.0, 2.0 * PI * turns);
        }
    }

    // inverse QFT |x⟩ → M^{-1/2} Σ_j e^{-2πi xj/M} |j⟩, which is the
    // unnormalized forward DFT in rustfft's sign convention
    let fft = FftPlanner::new().plan_fft_forward(m);
    for column in &mut columns {
        fft.process(column);
        column.iter_mut().for_each(|a| *a *= inv_sqrt_m);
    }

    let mut amplitudes = vec![Complex64::new(0.0, 0.0); m * dim];
    for (u, column) in columns.iter().enumerate() {
        for (j, &a) in column.iter().enumerate() {
            amplitudes[j * dim + u] = a;
        }
    }
    Ok(JointState { b, dim, amplitudes })
}
