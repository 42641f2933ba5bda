//! Lowest eigenpairs of a real symmetric tridiagonal matrix.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration on the shifted tridiagonal LU factorization (partial pivoting),
//! with Gram-Schmidt reorthogonalization inside clusters of close eigenvalues.
//! Only the requested `count` lowest pairs are computed, so the cost is
//! `O(count * N)` outside of clusters.

use serde::{Deserialize, Serialize};

use crate::error::{ConvergenceDiagnostics, Error, Result};
use crate::grid::DiscreteHamiltonian;

/// Eigenvalues closer than this fraction of the matrix norm share a cluster
/// and get their vectors reorthogonalized against each other.
const CLUSTER_TOLERANCE: f64 = 1e-3;
/// Relative gap below which a pair of eigenvalues is reported as degenerate.
const DEGENERACY_TOLERANCE: f64 = 1e-9;
const MAX_BISECTION_STEPS: usize = 256;
const MAX_INVERSE_ITERATIONS: usize = 10;
/// Coordinates within this fraction of the largest magnitude tie for the
/// sign convention; the lowest index wins.
const SIGN_TIE_TOLERANCE: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenPair {
    /// Position in ascending eigenvalue order, starting at 0.
    pub index: usize,
    pub value: f64,
    /// Unit-norm, largest-magnitude coordinate positive.
    pub vector: Vec<f64>,
}

impl EigenPair {
    /// `‖H v - λ v‖₂`.
    pub fn residual(&self, h: &DiscreteHamiltonian) -> f64 {
        h.apply(&self.vector)
            .iter()
            .zip(&self.vector)
            .map(|(hv, v)| {
                let r = hv - self.value * v;
                r * r
            })
            .sum::<f64>()
            .sqrt()
    }
}

/// The lowest `pairs.len()` eigenpairs of an `dimension x dimension` operator.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EigenBasis {
    pub dimension: usize,
    pub pairs: Vec<EigenPair>,
    /// Indices `k` with `λ_{k+1} - λ_k < 1e-9 λ_k`.
    pub degenerate: Vec<usize>,
}

impl EigenBasis {
    pub fn is_complete(&self) -> bool {
        self.pairs.len() == self.dimension
    }

    pub fn values(&self) -> Vec<f64> {
        self.pairs.iter().map(|p| p.value).collect()
    }

    pub fn get(&self, k: usize) -> Option<&EigenPair> {
        self.pairs.get(k)
    }

    /// Whether eigenvalue `k` is within the degeneracy tolerance of a neighbour.
    pub fn is_degenerate_at(&self, k: usize) -> bool {
        self.degenerate.contains(&k) || (k > 0 && self.degenerate.contains(&(k - 1)))
    }
}

/// Computes the `count` lowest eigenpairs of `h` in ascending order.
pub fn eigensolve(h: &DiscreteHamiltonian, count: usize) -> Result<EigenBasis> {
    let n = h.dim();
    if count == 0 || count > n {
        return Err(Error::invalid(format!(
            "eigenpair count must lie in 1..={n}, got {count}"
        )));
    }
    let tri = Tridiagonal::new(&h.diagonal, &h.off_diagonal);
    let values: Vec<f64> = (0..count).map(|i| tri.bisect(i)).collect();

    let mut pairs: Vec<EigenPair> = Vec::with_capacity(count);
    let cluster_gap = CLUSTER_TOLERANCE * tri.norm;
    let mut cluster_start = 0;
    for (i, &lambda) in values.iter().enumerate() {
        if i > 0 && lambda - values[i - 1] > cluster_gap {
            cluster_start = i;
        }
        let cluster: Vec<&[f64]> = pairs[cluster_start..]
            .iter()
            .map(|p| p.vector.as_slice())
            .collect();
        let mut vector = tri.inverse_iteration(i, lambda, &cluster)?;
        fix_sign(&mut vector);
        pairs.push(EigenPair {
            index: i,
            value: lambda,
            vector,
        });
    }

    let degenerate: Vec<usize> = values
        .windows(2)
        .enumerate()
        .filter(|(_, w)| w[1] - w[0] < DEGENERACY_TOLERANCE * w[0].abs())
        .map(|(k, _)| k)
        .collect();
    if !degenerate.is_empty() {
        log::warn!("near-degenerate eigenvalues at indices {degenerate:?}");
    }

    Ok(EigenBasis {
        dimension: n,
        pairs,
        degenerate,
    })
}

/// Flips `v` so its largest-magnitude coordinate is positive.
pub fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if max == 0.0 {
        return;
    }
    let pivot = v
        .iter()
        .position(|x| x.abs() >= max * (1.0 - SIGN_TIE_TOLERANCE))
        .expect("maximum exists");
    if v[pivot] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

struct Tridiagonal<'a> {
    diag: &'a [f64],
    off: &'a [f64],
    off_sq: Vec<f64>,
    lower: f64,
    upper: f64,
    norm: f64,
    pivmin: f64,
}

impl<'a> Tridiagonal<'a> {
    fn new(diag: &'a [f64], off: &'a [f64]) -> Self {
        let n = diag.len();
        let mut lower = f64::INFINITY;
        let mut upper = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { off[i - 1].abs() } else { 0.0 };
            let right = if i + 1 < n { off[i].abs() } else { 0.0 };
            lower = lower.min(diag[i] - left - right);
            upper = upper.max(diag[i] + left + right);
        }
        let norm = lower.abs().max(upper.abs()).max(f64::MIN_POSITIVE);
        let off_sq: Vec<f64> = off.iter().map(|e| e * e).collect();
        let max_off_sq = off_sq.iter().cloned().fold(1.0, f64::max);
        // widen the Gershgorin interval so both ends bracket strictly
        let pad = 2.0 * f64::EPSILON * norm * n as f64 + f64::MIN_POSITIVE;
        Self {
            diag,
            off,
            off_sq,
            lower: lower - pad,
            upper: upper + pad,
            norm,
            pivmin: f64::MIN_POSITIVE * max_off_sq,
        }
    }

    fn n(&self) -> usize {
        self.diag.len()
    }

    /// Number of eigenvalues strictly below `x`.
    fn count_below(&self, x: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < self.pivmin {
            q = -self.pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.n() {
            q = self.diag[i] - x - self.off_sq[i - 1] / q;
            if q.abs() < self.pivmin {
                q = -self.pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    /// The `i`-th smallest eigenvalue (0-based).
    fn bisect(&self, i: usize) -> f64 {
        let mut lo = self.lower;
        let mut hi = self.upper;
        for _ in 0..MAX_BISECTION_STEPS {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let tol = 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + self.pivmin;
            if hi - lo <= tol {
                break;
            }
            if self.count_below(mid) > i {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    fn residual(&self, lambda: f64, v: &[f64]) -> f64 {
        let n = self.n();
        let mut acc = 0.0;
        for i in 0..n {
            let mut r = (self.diag[i] - lambda) * v[i];
            if i > 0 {
                r += self.off[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                r += self.off[i] * v[i + 1];
            }
            acc += r * r;
        }
        acc.sqrt()
    }

    fn inverse_iteration(&self, index: usize, lambda: f64, cluster: &[&[f64]]) -> Result<Vec<f64>> {
        let n = self.n();
        let lu = ShiftedLu::factor(self.diag, self.off, lambda, f64::EPSILON * self.norm);
        let mut x = start_vector(n, index);
        let tol = 10.0 * (n as f64).sqrt() * f64::EPSILON * self.norm;
        let mut residual = f64::INFINITY;
        for iteration in 1..=MAX_INVERSE_ITERATIONS {
            lu.solve(&mut x);
            for q in cluster {
                let dot: f64 = x.iter().zip(q.iter()).map(|(a, b)| a * b).sum();
                x.iter_mut().zip(q.iter()).for_each(|(a, b)| *a -= dot * b);
            }
            let norm = x.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm > 0.0) || !norm.is_finite() {
                x = start_vector(n, index + iteration * 7919);
                continue;
            }
            x.iter_mut().for_each(|v| *v /= norm);
            residual = self.residual(lambda, &x);
            if iteration >= 2 && residual <= tol {
                return Ok(x);
            }
        }
        Err(Error::NumericFailure(ConvergenceDiagnostics {
            eigen_index: index,
            eigenvalue: lambda,
            iterations: MAX_INVERSE_ITERATIONS,
            residual,
            tolerance: tol,
        }))
    }
}

/// Deterministic pseudo-random start vector with entries in `[-1, 1)`.
fn start_vector(n: usize, salt: usize) -> Vec<f64> {
    let mut state = 0x9E37_79B9_7F4A_7C15u64 ^ (salt as u64).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    (0..n)
        .map(|_| {
            // splitmix64
            state = state.wrapping_add(0x9E37_79B9_7F4A_7C15);
            let mut z = state;
            z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
            z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
            z ^= z >> 31;
            (z >> 11) as f64 / (1u64 << 53) as f64 * 2.0 - 1.0
        })
        .collect()
}

/// LU factorization of `T - λI` with partial pivoting (the `U` factor gains
/// a second superdiagonal when rows are swapped).
struct ShiftedLu {
    lower: Vec<f64>,
    diag: Vec<f64>,
    upper1: Vec<f64>,
    upper2: Vec<f64>,
    swapped: Vec<bool>,
}

impl ShiftedLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, tiny: f64) -> Self {
        let n = diag.len();
        let mut d: Vec<f64> = diag.iter().map(|v| v - shift).collect();
        let mut dl = off.to_vec();
        let mut du = off.to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] == 0.0 {
                    d[i] = tiny;
                }
                let fact = dl[i] / d[i];
                dl[i] = fact;
                d[i + 1] -= fact * du[i];
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        if let Some(last) = d.last_mut() {
            if *last == 0.0 {
                *last = tiny;
            }
        }
        Self {
            lower: dl,
            diag: d,
            upper1: du,
            upper2: du2,
            swapped,
        }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = self.diag.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i] - self.lower[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= self.lower[i] * b[i];
            }
        }
        b[n - 1] /= self.diag[n - 1];
        if n >= 2 {
            b[n - 2] = (b[n - 2] - self.upper1[n - 2] * b[n - 1]) / self.diag[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.upper1[i] * b[i + 1] - self.upper2[i] * b[i + 2]) / self.diag[i];
        }
        // keep the iterate finite when the shift sits on an eigenvalue
        let scale = b.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if scale > 1e150 {
            b.iter_mut().for_each(|v| *v /= scale);
        }
    }
}
