//! Uniform interior grids on `[0, 1]` and the 3-point finite-difference
//! Hamiltonian `-d²/dx² + V(x)` with homogeneous Dirichlet boundaries.

use std::io::Read;
use std::path::Path;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tolerance used when matching tabulated abscissae to grid points.
const TABLE_X_TOLERANCE: f64 = 1e-9;

/// `N` interior points `x_j = (j + 1) h` with `h = 1 / (N + 1)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    n_points: usize,
}

impl GridSpec {
    pub fn new(n_points: usize) -> Result<Self> {
        if n_points < 2 {
            return Err(Error::invalid(format!(
                "grid needs at least 2 interior points, got {n_points}"
            )));
        }
        Ok(Self { n_points })
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        self.n_points == 0
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.n_points + 1) as f64
    }

    pub fn point(&self, j: usize) -> f64 {
        (j + 1) as f64 / (self.n_points + 1) as f64
    }

    pub fn points(&self) -> Vec<f64> {
        (0..self.n_points).map(|j| self.point(j)).collect()
    }
}

pub fn build_grid(n_points: usize) -> Result<GridSpec> {
    GridSpec::new(n_points)
}

/// Potential energy term of the Hamiltonian. Values are nonnegative.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PotentialSpec {
    Zero,
    /// `V(x) = strength * (x - 1/2)^2`.
    QuadraticWell { strength: f64 },
    /// Values sampled at the grid points of one specific grid.
    Tabulated { x: Vec<f64>, values: Vec<f64> },
}

impl PotentialSpec {
    pub fn quadratic_well(strength: f64) -> Result<Self> {
        if !(strength >= 0.0) || !strength.is_finite() {
            return Err(Error::invalid(format!(
                "quadratic well strength must be finite and >= 0, got {strength}"
            )));
        }
        Ok(PotentialSpec::QuadraticWell { strength })
    }

    /// Reads a two-column `x,V` table with a header row.
    pub fn from_csv_reader<R: Read>(reader: R) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut x = Vec::new();
        let mut values = Vec::new();
        for (line, record) in rdr.records().enumerate() {
            let record = record?;
            if record.len() != 2 {
                return Err(Error::invalid(format!(
                    "potential table row {} has {} columns, expected 2",
                    line + 1,
                    record.len()
                )));
            }
            let parse = |s: &str| {
                s.parse::<f64>().map_err(|e| {
                    Error::invalid(format!("potential table row {}: {s:?}: {e}", line + 1))
                })
            };
            x.push(parse(&record[0])?);
            values.push(parse(&record[1])?);
        }
        if x.is_empty() {
            return Err(Error::invalid("potential table is empty"));
        }
        Ok(PotentialSpec::Tabulated { x, values })
    }

    pub fn from_csv_path(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let file = std::fs::File::open(path)
            .map_err(|e| Error::from(e).context(format!("opening {}", path.display())))?;
        Self::from_csv_reader(file)
    }

    /// A potential evaluable on `grid`. Tables that were sampled on a
    /// different grid are linearly interpolated onto it, holding the end
    /// values constant outside the tabulated range; other kinds are returned
    /// unchanged.
    pub fn resampled(&self, grid: &GridSpec) -> Result<PotentialSpec> {
        let PotentialSpec::Tabulated { x, values } = self else {
            return Ok(self.clone());
        };
        if x.len() == grid.len() {
            return Ok(self.clone());
        }
        if x.len() != values.len() || x.is_empty() {
            return Err(Error::invalid("tabulated potential has mismatched columns"));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::invalid("tabulated x values must be strictly increasing"));
        }
        let points = grid.points();
        let resampled = points
            .iter()
            .map(|&p| {
                let i = x.partition_point(|&xi| xi <= p);
                if i == 0 {
                    values[0]
                } else if i == x.len() {
                    values[x.len() - 1]
                } else {
                    let w = (p - x[i - 1]) / (x[i] - x[i - 1]);
                    values[i - 1] + w * (values[i] - values[i - 1])
                }
            })
            .collect();
        Ok(PotentialSpec::Tabulated {
            x: points,
            values: resampled,
        })
    }

    /// Potential values at every point of `grid`.
    pub fn evaluate(&self, grid: &GridSpec) -> Result<Vec<f64>> {
        let values = match self {
            PotentialSpec::Zero => vec![0.0; grid.len()],
            PotentialSpec::QuadraticWell { strength } => grid
                .points()
                .into_iter()
                .map(|x| strength * (x - 0.5) * (x - 0.5))
                .collect(),
            PotentialSpec::Tabulated { x, values } => {
                if values.len() != grid.len() || x.len() != grid.len() {
                    return Err(Error::invalid(format!(
                        "tabulated potential has {} rows but the grid has {} points",
                        values.len(),
                        grid.len()
                    )));
                }
                for (j, &xj) in x.iter().enumerate() {
                    if (xj - grid.point(j)).abs() > TABLE_X_TOLERANCE {
                        return Err(Error::invalid(format!(
                            "tabulated x[{j}] = {xj} does not match grid point {}",
                            grid.point(j)
                        )));
                    }
                }
                values.clone()
            }
        };
        if let Some((j, v)) = values
            .iter()
            .enumerate()
            .find(|(_, v)| !(**v >= 0.0) || !v.is_finite())
        {
            return Err(Error::invalid(format!(
                "potential must be finite and nonnegative, V(x[{j}]) = {v}"
            )));
        }
        Ok(values)
    }
}

impl FromStr for PotentialSpec {
    type Err = Error;

    /// Parses `zero`, `quad:<strength>` or `file:<path>`.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("zero") {
            return Ok(PotentialSpec::Zero);
        }
        if let Some(c) = s.strip_prefix("quad:") {
            let c = c
                .parse::<f64>()
                .map_err(|e| Error::invalid(format!("bad quadratic strength {c:?}: {e}")))?;
            return PotentialSpec::quadratic_well(c);
        }
        if let Some(path) = s.strip_prefix("file:") {
            return PotentialSpec::from_csv_path(path);
        }
        Err(Error::invalid(format!(
            "unknown potential {s:?}; expected zero, quad:<c> or file:<path>"
        )))
    }
}

/// Real symmetric tridiagonal `H_N`, stored as its diagonal and the
/// (shared) sub/super diagonal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiscreteHamiltonian {
    pub grid: GridSpec,
    pub diagonal: Vec<f64>,
    pub off_diagonal: Vec<f64>,
}

impl DiscreteHamiltonian {
    pub fn dim(&self) -> usize {
        self.diagonal.len()
    }

    /// Matrix-vector product `H x`.
    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let n = self.dim();
        assert_eq!(x.len(), n, "vector length does not match operator");
        let mut y: Vec<f64> = self.diagonal.iter().zip(x).map(|(d, x)| d * x).collect();
        for (i, &e) in self.off_diagonal.iter().enumerate() {
            y[i] += e * x[i + 1];
            y[i + 1] += e * x[i];
        }
        y
    }

    /// Gershgorin interval containing every eigenvalue.
    pub fn gershgorin(&self) -> (f64, f64) {
        let n = self.dim();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let mut radius = 0.0;
            if i > 0 {
                radius += self.off_diagonal[i - 1].abs();
            }
            if i + 1 < n {
                radius += self.off_diagonal[i].abs();
            }
            lo = lo.min(self.diagonal[i] - radius);
            hi = hi.max(self.diagonal[i] + radius);
        }
        (lo, hi)
    }

    /// Max-row-sum norm, an upper bound on the spectral radius.
    pub fn norm_inf(&self) -> f64 {
        let (lo, hi) = self.gershgorin();
        lo.abs().max(hi.abs())
    }

    pub fn to_dense(&self) -> Vec<Vec<f64>> {
        let n = self.dim();
        let mut m = vec![vec![0.0; n]; n];
        for (i, &d) in self.diagonal.iter().enumerate() {
            m[i][i] = d;
        }
        for (i, &e) in self.off_diagonal.iter().enumerate() {
            m[i][i + 1] = e;
            m[i + 1][i] = e;
        }
        m
    }
}

/// Assembles `H_N` with diagonal `2/h² + V(x_j)` and off-diagonal `-1/h²`.
pub fn discretize(potential: &PotentialSpec, grid: &GridSpec) -> Result<DiscreteHamiltonian> {
    let v = potential.evaluate(grid)?;
    let n = grid.len();
    let inv_h2 = ((n + 1) * (n + 1)) as f64;
    Ok(DiscreteHamiltonian {
        grid: *grid,
        diagonal: v.iter().map(|vj| 2.0 * inv_h2 + vj).collect(),
        off_diagonal: vec![-inv_h2; n - 1],
    })
}

/// A function sampled on a grid: the normalized vector and the norm it had
/// before normalization.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledFunction {
    pub raw: Vec<f64>,
    pub raw_norm: f64,
    pub normalized: Vec<f64>,
}

impl SampledFunction {
    /// `‖V‖ / √N`, which tends to one for a unit-L² function.
    pub fn norm_ratio(&self) -> f64 {
        self.raw_norm / (self.raw.len() as f64).sqrt()
    }
}

pub fn sample_eigenfunction<F>(f: F, grid: &GridSpec) -> Result<SampledFunction>
where
    F: Fn(f64) -> f64,
{
    let raw: Vec<f64> = grid.points().into_iter().map(&f).collect();
    if let Some((j, v)) = raw.iter().enumerate().find(|(_, v)| !v.is_finite()) {
        return Err(Error::invalid(format!(
            "function evaluation failed at x[{j}] = {}: got {v}",
            grid.point(j)
        )));
    }
    let raw_norm = raw.iter().map(|v| v * v).sum::<f64>().sqrt();
    if raw_norm == 0.0 {
        return Err(Error::invalid("sampled function vanishes on the grid"));
    }
    let normalized = raw.iter().map(|v| v / raw_norm).collect();
    Ok(SampledFunction {
        raw,
        raw_norm,
        normalized,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn grid_rejects_fewer_than_two_points() {
        assert!(matches!(build_grid(1), Err(Error::InvalidArgument(_))));
        assert!(build_grid(0).is_err());
    }

    #[test]
    fn small_grids() {
        let g = build_grid(3).unwrap();
        assert_eq!(g.spacing(), 0.25);
        assert_eq!(g.points(), vec![0.25, 0.5, 0.75]);

        let g = build_grid(15).unwrap();
        assert_eq!(g.spacing(), 1.0 / 16.0);
        assert_eq!(g.point(0), 1.0 / 16.0);
        assert_eq!(g.point(14), 15.0 / 16.0);
    }

    #[test]
    fn grid_is_interior_and_uniform() {
        for n in [2, 7, 100, 1023] {
            let g = build_grid(n).unwrap();
            let p = g.points();
            assert!(p[0] > 0.0 && p[n - 1] < 1.0);
            for w in p.windows(2) {
                assert!((w[1] - w[0] - g.spacing()).abs() < 4.0 * f64::EPSILON);
            }
        }
    }

    #[test]
    fn zero_potential_n3() {
        let h = discretize(&PotentialSpec::Zero, &build_grid(3).unwrap()).unwrap();
        assert_eq!(h.diagonal, vec![32.0; 3]);
        assert_eq!(h.off_diagonal, vec![-16.0; 2]);
    }

    #[test]
    fn quadratic_well_zero_strength_matches_zero_potential() {
        let g = build_grid(17).unwrap();
        let a = discretize(&PotentialSpec::quadratic_well(0.0).unwrap(), &g).unwrap();
        let b = discretize(&PotentialSpec::Zero, &g).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn quadratic_well_entries() {
        let g = build_grid(31).unwrap();
        let h = discretize(&PotentialSpec::quadratic_well(100.0).unwrap(), &g).unwrap();
        for j in 0..31 {
            // independent scalar evaluation
            let x = (j as f64 + 1.0) / 32.0;
            let expected = 2.0 * 32.0f64.powi(2) + 100.0 * (x - 0.5).powi(2);
            assert_relative_eq!(h.diagonal[j], expected, max_relative = 1e-15);
            assert!(h.diagonal[j] >= 2.0 * 1024.0);
        }
        assert!(h.off_diagonal.iter().all(|&e| e == -1024.0));
    }

    #[test]
    fn negative_potential_rejected() {
        let g = build_grid(3).unwrap();
        let p = PotentialSpec::Tabulated {
            x: g.points(),
            values: vec![1.0, -0.5, 1.0],
        };
        assert!(matches!(discretize(&p, &g), Err(Error::InvalidArgument(_))));
        assert!(PotentialSpec::quadratic_well(-1.0).is_err());
    }

    #[test]
    fn tabulated_csv_roundtrip_and_alignment() {
        let csv = "x,V\n0.25,1.0\n0.5,2.0\n0.75,3.0\n";
        let p = PotentialSpec::from_csv_reader(csv.as_bytes()).unwrap();
        let g = build_grid(3).unwrap();
        assert_eq!(p.evaluate(&g).unwrap(), vec![1.0, 2.0, 3.0]);
        // wrong N
        assert!(p.evaluate(&build_grid(4).unwrap()).is_err());
        // misaligned x
        let bad = PotentialSpec::from_csv_reader("x,V\n0.2,1\n0.5,1\n0.75,1\n".as_bytes()).unwrap();
        assert!(bad.evaluate(&g).is_err());
    }

    #[test]
    fn resampling_interpolates_linear_tables_exactly() {
        let fine = build_grid(7).unwrap();
        let table = PotentialSpec::Tabulated {
            x: fine.points(),
            values: fine.points().iter().map(|x| 3.0 * x + 1.0).collect(),
        };
        let coarse = build_grid(3).unwrap();
        let v = table.resampled(&coarse).unwrap().evaluate(&coarse).unwrap();
        for (vi, x) in v.iter().zip(coarse.points()) {
            assert_relative_eq!(*vi, 3.0 * x + 1.0, epsilon = 1e-14);
        }
        // outside the table the end values are held
        let finer = build_grid(15).unwrap();
        let v = table.resampled(&finer).unwrap().evaluate(&finer).unwrap();
        assert_relative_eq!(v[0], 3.0 / 8.0 + 1.0, epsilon = 1e-14);
        assert_eq!(PotentialSpec::Zero.resampled(&finer).unwrap(), PotentialSpec::Zero);
    }

    #[test]
    fn parse_potential_strings() {
        assert_eq!("zero".parse::<PotentialSpec>().unwrap(), PotentialSpec::Zero);
        assert_eq!(
            "quad:100".parse::<PotentialSpec>().unwrap(),
            PotentialSpec::QuadraticWell { strength: 100.0 }
        );
        assert!("cubic".parse::<PotentialSpec>().is_err());
        assert!("quad:abc".parse::<PotentialSpec>().is_err());
    }

    #[test]
    fn gershgorin_zero_potential() {
        let h = discretize(&PotentialSpec::Zero, &build_grid(3).unwrap()).unwrap();
        assert_eq!(h.gershgorin(), (0.0, 64.0));
    }

    #[test]
    fn apply_matches_dense() {
        let g = build_grid(6).unwrap();
        let h = discretize(&PotentialSpec::quadratic_well(3.0).unwrap(), &g).unwrap();
        let x: Vec<f64> = (0..6).map(|i| (i as f64).sin()).collect();
        let dense = h.to_dense();
        let y = h.apply(&x);
        for i in 0..6 {
            let yi: f64 = (0..6).map(|j| dense[i][j] * x[j]).sum();
            assert_relative_eq!(y[i], yi, epsilon = 1e-12);
        }
    }

    #[test]
    fn sample_sine_n3() {
        let g = build_grid(3).unwrap();
        let s = sample_eigenfunction(|x| 2f64.sqrt() * (std::f64::consts::PI * x).sin(), &g)
            .unwrap();
        let r2 = 2f64.sqrt();
        let expected = [r2 * (0.25f64 * std::f64::consts::PI).sin(), r2, r2 * (0.75f64 * std::f64::consts::PI).sin()];
        for (a, b) in s.raw.iter().zip(expected) {
            assert_relative_eq!(*a, b, epsilon = 1e-15);
        }
    }

    #[test]
    fn sample_constant() {
        let g = build_grid(9).unwrap();
        let s = sample_eigenfunction(|_| 1.0, &g).unwrap();
        for v in s.normalized {
            assert_relative_eq!(v, 1.0 / 3.0, epsilon = 1e-15);
        }
    }

    #[test]
    fn sample_reports_evaluation_failure() {
        let g = build_grid(4).unwrap();
        assert!(sample_eigenfunction(|x| (x - 0.4).ln(), &g).is_err());
    }
}
