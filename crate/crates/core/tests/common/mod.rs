//! Shared helpers for the integration test suites.
//!
//! Each test binary compiles its own copy, so not every helper is used
//! everywhere.
#![allow(dead_code)]

use coalsim_core::network::{EnergyModel, MarginalModel, NetworkModel, Sensor};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

/// Kendall's tau of a sample, O(n log n) via inversion counting (no ties
/// assumed, which holds almost surely for continuous draws).
pub fn kendall_tau(xs: &[f64], ys: &[f64]) -> f64 {
    assert_eq!(xs.len(), ys.len());
    let n = xs.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| xs[a].total_cmp(&xs[b]));
    let mut y_in_x_order: Vec<f64> = order.iter().map(|&i| ys[i]).collect();
    let mut scratch = vec![0.0; n];
    let inversions = count_inversions(&mut y_in_x_order, &mut scratch);
    1.0 - 4.0 * inversions as f64 / (n as f64 * (n as f64 - 1.0))
}

fn count_inversions(v: &mut [f64], scratch: &mut [f64]) -> u64 {
    let n = v.len();
    if n <= 1 {
        return 0;
    }
    let mid = n / 2;
    let (left, right) = v.split_at_mut(mid);
    let mut inv = count_inversions(left, scratch) + count_inversions(right, scratch);
    let (mut i, mut j, mut k) = (0, 0, 0);
    while i < left.len() && j < right.len() {
        if left[i] <= right[j] {
            scratch[k] = left[i];
            i += 1;
        } else {
            scratch[k] = right[j];
            inv += (left.len() - i) as u64;
            j += 1;
        }
        k += 1;
    }
    while i < left.len() {
        scratch[k] = left[i];
        i += 1;
        k += 1;
    }
    while j < right.len() {
        scratch[k] = right[j];
        j += 1;
        k += 1;
    }
    v.copy_from_slice(&scratch[..n]);
    inv
}

/// Random symmetric positive-definite correlation matrix.
pub fn random_spd_correlation(d: usize, rng: &mut impl Rng) -> DMatrix<f64> {
    let a = DMatrix::from_fn(d, d, |_, _| rng.sample::<f64, _>(StandardNormal));
    let g = a.transpose() * &a + DMatrix::identity(d, d) * 0.05 * d as f64;
    DMatrix::from_fn(d, d, |i, j| g[(i, j)] / (g[(i, i)] * g[(j, j)]).sqrt())
}

/// All-Gaussian network with an explicit correlation matrix.
pub fn gaussian_net_with(sigmas: &[f64], corr: DMatrix<f64>, energy: EnergyModel) -> NetworkModel {
    let sensors: Vec<Sensor> = sigmas
        .iter()
        .enumerate()
        .map(|(id, &sigma)| Sensor {
            id,
            location: [0.0, 0.0],
            marginal: MarginalModel::GaussianMean { sigma },
        })
        .collect();
    NetworkModel::with_matrices(sensors, [0.75, 0.75], corr, energy).unwrap()
}

/// Two-dimensional low-discrepancy sequence (Kronecker sequence driven by
/// the plastic constant), used for quasi-uniform integration on the square.
pub struct QuasiUniform2 {
    state: [f64; 2],
}

impl QuasiUniform2 {
    pub fn new() -> Self {
        QuasiUniform2 { state: [0.5, 0.5] }
    }
}

impl Iterator for QuasiUniform2 {
    type Item = [f64; 2];

    fn next(&mut self) -> Option<[f64; 2]> {
        const G: f64 = 1.324_717_957_244_746;
        let a1 = 1.0 / G;
        let a2 = 1.0 / (G * G);
        self.state[0] = (self.state[0] + a1).fract();
        self.state[1] = (self.state[1] + a2).fract();
        Some(self.state)
    }
}

/// Gauss-Hermite nodes and weights (physicists' convention) via the
/// Golub-Welsch eigenvalue method; `E[f(Z)]` for standard normal `Z` equals
/// `sum_i w_i f(sqrt(2) x_i) / sqrt(pi)`.
pub fn gauss_hermite(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut jacobi = DMatrix::zeros(n, n);
    for k in 0..n - 1 {
        let b = ((k + 1) as f64 / 2.0).sqrt();
        jacobi[(k, k + 1)] = b;
        jacobi[(k + 1, k)] = b;
    }
    let eig = jacobi.symmetric_eigen();
    let mut pairs: Vec<(f64, f64)> = (0..n)
        .map(|i| {
            let node = eig.eigenvalues[i];
            let v0 = eig.eigenvectors[(0, i)];
            (node, std::f64::consts::PI.sqrt() * v0 * v0)
        })
        .collect();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs.into_iter().unzip()
}
