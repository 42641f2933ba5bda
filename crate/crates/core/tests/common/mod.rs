#![allow(dead_code)]

use std::f64::consts::PI;

use eigenprep::DiscreteHamiltonian;
use nalgebra::{DMatrix, SymmetricEigen};

/// Dense eigendecomposition, ascending, each vector with its
/// largest-magnitude coordinate made positive (first one on ties).
pub fn dense_eigen(h: &DiscreteHamiltonian) -> Vec<(f64, Vec<f64>)> {
    let n = h.dim();
    let dense = h.to_dense();
    let m = DMatrix::from_fn(n, n, |i, j| dense[i][j]);
    let eig = SymmetricEigen::new(m);
    let mut pairs: Vec<(f64, Vec<f64>)> = (0..n)
        .map(|i| {
            let mut v: Vec<f64> = eig.eigenvectors.column(i).iter().cloned().collect();
            let max = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
            let pivot = v.iter().position(|x| x.abs() >= max * (1.0 - 1e-8)).unwrap();
            if v[pivot] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            (eig.eigenvalues[i], v)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

/// `λ_k = (4/h²) sin²(kπh/2)`, `k = 1..=N`, the closed-form spectrum of the
/// zero-potential operator.
pub fn toeplitz_eigenvalue(n: usize, k: usize) -> f64 {
    let h = 1.0 / (n + 1) as f64;
    4.0 / (h * h) * (k as f64 * PI * h / 2.0).sin().powi(2)
}

/// Unit vector with coordinates proportional to `sin(kπ x_j)`.
pub fn toeplitz_eigenvector(n: usize, k: usize) -> Vec<f64> {
    let h = 1.0 / (n + 1) as f64;
    let v: Vec<f64> = (1..=n).map(|j| (k as f64 * PI * j as f64 * h).sin()).collect();
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / norm).collect()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let m = points.len() as f64;
    let xs: Vec<f64> = points.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.1.ln()).collect();
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
