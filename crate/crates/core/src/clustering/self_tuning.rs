//! Cluster-count estimation by eigenvector rotation.
//!
//! For each candidate `K`, the top-`K` eigenvectors `X` of the normalised
//! affinity are rotated by a product of Givens rotations so that each row has
//! as few dominant entries as possible. The alignment cost of a rotated
//! `n × K` matrix `Z` is
//!
//! ```text
//! J = Σ_i Σ_j Z_ij² / max_j Z_ij²
//! ```
//!
//! which equals `n` when every row has exactly one non-zero entry and is at
//! most `n K`. Row norms are rotation invariant, so only the row maxima move.

use log::warn;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use super::spectral::normalized_spectrum;
use super::{AffinityMatrix, ClusteringConfig};
use crate::error::{Error, Result};

/// Costs within this distance of the best one count as equally good; the
/// largest such `K` is chosen.
pub const NEAR_OPTIMAL_SLACK: f64 = 0.01;

/// Eigenvalues at or below this bound are treated as zero.
pub const INFORMATIVE_EIGENVALUE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SelfTuning {
    pub k: usize,
    /// `(K, alignment cost)` for every candidate examined.
    pub costs: Vec<(usize, f64)>,
    /// Leading eigenvalues of the normalised affinity, largest first.
    pub eigenvalues: Vec<f64>,
    pub degenerate: bool,
}

/// Alignment cost of a column-rotated eigenvector matrix (row-major `n × k`).
pub fn rotation_cost(z: &[f64], n: usize, k: usize) -> f64 {
    let mut total = 0.0;
    for i in 0..n {
        let row = &z[i * k..(i + 1) * k];
        let sq: f64 = row.iter().map(|v| v * v).sum();
        let max = row.iter().map(|v| v * v).fold(0.0, f64::max);
        total += if max > 0.0 { sq / max } else { 1.0 };
    }
    total
}

/// Estimates the number of clusters in `2..=k_max` (capped at the point count).
pub fn estimate_num_clusters(a: &AffinityMatrix, k_max: usize, config: &ClusteringConfig) -> Result<SelfTuning> {
    let n = a.len();
    if n < 2 {
        return Err(Error::Clustering(format!("cannot estimate clusters for {n} points")));
    }
    if k_max < 2 {
        return Err(Error::InvalidConfig("k-max must be at least 2".into()));
    }
    let k_max = k_max.min(n);
    let all_ones = (0..n).all(|i| (0..n).all(|j| a.get(i, j) >= 1.0 - 1e-12));
    if all_ones || n == 2 {
        if all_ones {
            warn!("affinity is uniformly 1; cluster count is undetermined, using 2");
        }
        return Ok(SelfTuning {
            k: 2,
            costs: vec![(2, n as f64)],
            eigenvalues: Vec::new(),
            degenerate: all_ones,
        });
    }

    let spectrum = normalized_spectrum(&a.values);
    // eigenvectors of a (numerically) zero eigenvalue are an arbitrary basis
    // of the null space and carry no grouping information
    let informative = spectrum
        .values
        .iter()
        .take_while(|&&v| v > INFORMATIVE_EIGENVALUE)
        .count();
    if informative < 2 {
        warn!("fewer than two informative eigenvectors; cluster count is undetermined, using 2");
        return Ok(SelfTuning {
            k: 2,
            costs: vec![(2, n as f64)],
            eigenvalues: spectrum.values[..k_max].to_vec(),
            degenerate: true,
        });
    }
    let k_max = k_max.min(informative);
    let mut costs = Vec::with_capacity(k_max - 1);
    // rotated basis carried over from the previous K
    let mut carried: Vec<f64> = (0..n).map(|i| spectrum.vectors[(i, 0)]).collect();
    for k in 2..=k_max {
        let mut x = Vec::with_capacity(n * k);
        for i in 0..n {
            x.extend_from_slice(&carried[i * (k - 1)..i * (k - 1) + (k - 1)]);
            x.push(spectrum.vectors[(i, k - 1)]);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
        rng.set_stream(1000 + k as u64);
        let mut best = descend(x.clone(), n, k, config);
        let mut restart = x;
        random_rotation(&mut restart, n, k, &mut rng);
        let other = descend(restart, n, k, config);
        if other.1 < best.1 {
            best = other;
        }
        costs.push((k, best.1));
        carried = best.0;
    }

    let min = costs.iter().map(|c| c.1).fold(f64::INFINITY, f64::min);
    let k = costs
        .iter()
        .filter(|c| c.1 <= min + NEAR_OPTIMAL_SLACK)
        .map(|c| c.0)
        .max()
        .expect("non-empty candidate list");
    Ok(SelfTuning {
        k,
        costs,
        eigenvalues: spectrum.values[..k_max].to_vec(),
        degenerate: false,
    })
}

fn rotate_columns(z: &mut [f64], n: usize, k: usize, p: usize, q: usize, theta: f64) {
    let (s, c) = theta.sin_cos();
    for i in 0..n {
        let (zp, zq) = (z[i * k + p], z[i * k + q]);
        z[i * k + p] = c * zp - s * zq;
        z[i * k + q] = s * zp + c * zq;
    }
}

fn random_rotation<R: Rng>(z: &mut [f64], n: usize, k: usize, rng: &mut R) {
    for p in 0..k {
        for q in (p + 1)..k {
            let theta = rng.gen_range(-std::f64::consts::PI..std::f64::consts::PI);
            rotate_columns(z, n, k, p, q, theta);
        }
    }
}

/// The three largest squared entries of a row with their columns, largest first.
#[derive(Clone, Copy)]
struct RowTop {
    vals: [f64; 3],
    cols: [usize; 3],
}

impl RowTop {
    fn empty() -> Self {
        RowTop {
            vals: [0.0; 3],
            cols: [usize::MAX; 3],
        }
    }

    fn offer(&mut self, col: usize, val: f64) {
        let mut pos = 3;
        while pos > 0 && val > self.vals[pos - 1] {
            pos -= 1;
        }
        if pos == 3 {
            return;
        }
        for t in (pos + 1..3).rev() {
            self.vals[t] = self.vals[t - 1];
            self.cols[t] = self.cols[t - 1];
        }
        self.vals[pos] = val;
        self.cols[pos] = col;
    }

    fn scan(row: &[f64]) -> Self {
        let mut top = RowTop::empty();
        for (j, v) in row.iter().enumerate() {
            top.offer(j, v * v);
        }
        top
    }

    fn contains(&self, col: usize) -> bool {
        self.cols.contains(&col)
    }

    /// Largest squared entry outside columns `p` and `q`.
    fn excluding(&self, p: usize, q: usize) -> f64 {
        (0..3)
            .find(|&t| self.cols[t] != p && self.cols[t] != q)
            .map_or(0.0, |t| self.vals[t])
    }
}

fn row_norms(z: &[f64], n: usize, k: usize) -> Vec<f64> {
    (0..n)
        .map(|i| z[i * k..(i + 1) * k].iter().map(|v| v * v).sum())
        .collect()
}

/// Alignment cost after rotating columns `(p, q)` by `theta`, in O(n).
fn plane_cost(z: &[f64], k: usize, p: usize, q: usize, theta: f64, other: &[f64], sq: &[f64]) -> f64 {
    let (s, c) = theta.sin_cos();
    let mut total = 0.0;
    for (i, (&o, &norm)) in other.iter().zip(sq).enumerate() {
        let (zp, zq) = (z[i * k + p], z[i * k + q]);
        let (a, b) = (c * zp - s * zq, s * zp + c * zq);
        let max = o.max(a * a).max(b * b);
        total += if max > 0.0 { norm / max } else { 1.0 };
    }
    total
}

/// Derivative of the alignment cost with respect to a rotation of columns
/// `(p, q)` at angle zero, holding each row's arg-max column fixed.
fn plane_gradient(z: &[f64], k: usize, p: usize, q: usize, other: &[f64], sq: &[f64]) -> f64 {
    let mut g = 0.0;
    for (i, (&o, &norm)) in other.iter().zip(sq).enumerate() {
        let (zp, zq) = (z[i * k + p], z[i * k + q]);
        let (a, b) = (zp * zp, zq * zq);
        let max = a.max(b);
        if max <= o || max <= 0.0 {
            continue;
        }
        // d(z_im)/dθ: column p moves by −z_iq, column q by +z_ip
        let (zm, dz) = if a >= b { (zp, -zq) } else { (zq, zp) };
        g += -norm * 2.0 * zm * dz / (max * max);
    }
    g
}

/// Gradient descent over Givens angles, one plane at a time, with backtracking.
fn descend(mut z: Vec<f64>, n: usize, k: usize, config: &ClusteringConfig) -> (Vec<f64>, f64) {
    let sq = row_norms(&z, n, k);
    let mut cost = rotation_cost(&z, n, k);
    let planes: Vec<(usize, usize)> = (0..k).flat_map(|p| ((p + 1)..k).map(move |q| (p, q))).collect();
    let mut steps = vec![1.0f64; planes.len()];
    let mut tops: Vec<RowTop> = (0..n).map(|i| RowTop::scan(&z[i * k..(i + 1) * k])).collect();
    let mut other = vec![0.0; n];
    for _ in 0..config.rotation_max_iter {
        let before = cost;
        for (idx, &(p, q)) in planes.iter().enumerate() {
            for (o, top) in other.iter_mut().zip(&tops) {
                *o = top.excluding(p, q);
            }
            let g = plane_gradient(&z, k, p, q, &other, &sq);
            if g == 0.0 {
                continue;
            }
            let mut step = steps[idx];
            let mut accepted = None;
            for _ in 0..20 {
                let theta = (-step * g).clamp(-std::f64::consts::FRAC_PI_4, std::f64::consts::FRAC_PI_4);
                let c = plane_cost(&z, k, p, q, theta, &other, &sq);
                if c < cost {
                    accepted = Some((theta, c));
                    break;
                }
                step *= 0.5;
            }
            match accepted {
                Some((theta, c)) => {
                    rotate_columns(&mut z, n, k, p, q, theta);
                    for (i, top) in tops.iter_mut().enumerate() {
                        if top.contains(p) || top.contains(q) {
                            *top = RowTop::scan(&z[i * k..(i + 1) * k]);
                        } else {
                            top.offer(p, z[i * k + p] * z[i * k + p]);
                            top.offer(q, z[i * k + q] * z[i * k + q]);
                        }
                    }
                    cost = c;
                    steps[idx] = (step * 2.0).min(1e3);
                }
                None => steps[idx] = step.max(1e-12),
            }
        }
        if before - cost < config.rotation_tolerance {
            break;
        }
    }
    // report the cost of the matrix actually returned
    let cost = rotation_cost(&z, n, k);
    (z, cost)
}
