use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::PotentialSpec;

/// Fine-grid size, either relative to each coarse size or absolute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FineGrid {
    /// `N = 2^s N₀`.
    Doublings(u32),
    /// The same `N` for every coarse size; `N / N₀` must be a power of two.
    FixedN(usize),
}

impl FineGrid {
    /// `(s, N)` for coarse size `n0`.
    pub fn resolve(&self, n0: usize) -> Result<(u32, usize)> {
        match *self {
            FineGrid::Doublings(s) => {
                let n = n0
                    .checked_shl(s)
                    .filter(|n| n >> s == n0)
                    .ok_or_else(|| Error::invalid(format!("2^{s} * {n0} overflows")))?;
                Ok((s, n))
            }
            FineGrid::FixedN(n) => {
                if n0 == 0 || n % n0 != 0 || !(n / n0).is_power_of_two() {
                    return Err(Error::invalid(format!(
                        "fine size {n} is not a power-of-two multiple of coarse size {n0}"
                    )));
                }
                Ok(((n / n0).trailing_zeros(), n))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QpeSettings {
    /// Accuracy target `n` in bits.
    #[serde(default = "default_bits")]
    pub bits: u32,
    #[serde(default = "default_epsilon")]
    pub epsilon: f64,
    /// Explicit register size; overrides the `(n, ε)` sizing.
    #[serde(default)]
    pub b: Option<u32>,
}

fn default_bits() -> u32 {
    8
}

fn default_epsilon() -> f64 {
    0.25
}

fn default_full_basis_limit() -> usize {
    1024
}

impl Default for QpeSettings {
    fn default() -> Self {
        Self {
            bits: default_bits(),
            epsilon: default_epsilon(),
            b: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub potential: PotentialSpec,
    /// Target eigenvector index, 0 for the ground state.
    #[serde(default)]
    pub k: usize,
    pub n0_list: Vec<usize>,
    pub fine: FineGrid,
    #[serde(default)]
    pub qpe: QpeSettings,
    /// Finite-shot samples per point; 0 runs the analytic path only.
    #[serde(default)]
    pub shots: u64,
    #[serde(default)]
    pub rng_seed: u64,
    /// Fine grids up to this size get a full eigendecomposition, so the whole
    /// outcome distribution is available. Larger grids only resolve the
    /// eigenvectors up to `k`.
    #[serde(default = "default_full_basis_limit")]
    pub full_basis_limit: usize,
}

impl ExperimentConfig {
    pub fn new(potential: PotentialSpec, k: usize, n0_list: Vec<usize>, fine: FineGrid) -> Self {
        Self {
            potential,
            k,
            n0_list,
            fine,
            qpe: QpeSettings::default(),
            shots: 0,
            rng_seed: 0,
            full_basis_limit: default_full_basis_limit(),
        }
    }

    pub fn from_json_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::from(e).context(format!("opening {}", path.display())))?;
        let config: Self = serde_json::from_reader(file)?;
        config.validate()?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n0_list.is_empty() {
            return Err(Error::invalid("at least one coarse size is required"));
        }
        if let Some(n0) = self.n0_list.iter().find(|&&n0| n0 < 2) {
            return Err(Error::invalid(format!("coarse size {n0} is below 2")));
        }
        let smallest = *self.n0_list.iter().min().expect("nonempty");
        if self.k >= smallest {
            return Err(Error::invalid(format!(
                "target index k = {} needs coarse grids larger than {smallest}",
                self.k
            )));
        }
        for &n0 in &self.n0_list {
            self.fine.resolve(n0)?;
        }
        if self.qpe.b.is_none() {
            crate::phase_estimation::choose_b(self.qpe.bits, self.qpe.epsilon)?;
        }
        Ok(())
    }
}
