use nalgebra::DMatrix;

use super::squared_distance;
use crate::embedding::{l2_norm, Token, WordVectorStore};
use crate::error::{Error, Result};

const MIN_SCALE: f64 = 1e-12;

/// Symmetric affinity over an ordered token list, unit diagonal, entries in `[0, 1]`.
#[derive(Debug, Clone, PartialEq)]
pub struct AffinityMatrix {
    pub tokens: Vec<Token>,
    pub values: DMatrix<f64>,
}

impl AffinityMatrix {
    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[(i, j)]
    }

    /// Affinity restricted to the given row indices, in that order.
    pub fn submatrix(&self, rows: &[usize]) -> AffinityMatrix {
        let values = DMatrix::from_fn(rows.len(), rows.len(), |i, j| self.values[(rows[i], rows[j])]);
        AffinityMatrix {
            tokens: rows.iter().map(|&r| self.tokens[r].clone()).collect(),
            values,
        }
    }
}

/// Local-scaling Gaussian affinity between the unit-normalised vectors of `tokens`.
///
/// `A[i][j] = exp(−d(i,j)² / (σ_i σ_j))` where `σ_i` is the distance from point
/// `i` to its `neighbor`-th nearest neighbour.
pub fn build_affinity(store: &WordVectorStore, tokens: &[Token], neighbor: usize) -> Result<AffinityMatrix> {
    let points = tokens
        .iter()
        .map(|t| {
            let v = store.get(t).ok_or_else(|| Error::UnknownToken(t.to_string()))?;
            let n = l2_norm(v);
            if n == 0.0 {
                return Err(Error::ZeroVector(t.to_string()));
            }
            Ok(v.iter().map(|x| x / n).collect::<Vec<f64>>())
        })
        .collect::<Result<Vec<_>>>()?;
    affinity_from_points(tokens.to_vec(), &points, neighbor)
}

/// Local-scaling Gaussian affinity over raw points (no normalisation).
pub fn affinity_from_points(tokens: Vec<Token>, points: &[Vec<f64>], neighbor: usize) -> Result<AffinityMatrix> {
    let n = points.len();
    if n < 2 {
        return Err(Error::Clustering(format!("affinity needs at least 2 points, got {n}")));
    }
    if tokens.len() != n {
        return Err(Error::Clustering(format!("{} tokens for {n} points", tokens.len())));
    }
    if neighbor == 0 {
        return Err(Error::InvalidConfig("local scale neighbour must be positive".into()));
    }
    let d2 = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            0.0
        } else {
            squared_distance(&points[i], &points[j])
        }
    });
    let m = neighbor.min(n - 1);
    let sigma: Vec<f64> = (0..n)
        .map(|i| {
            let mut row: Vec<f64> = (0..n).filter(|&j| j != i).map(|j| d2[(i, j)]).collect();
            row.sort_by(f64::total_cmp);
            row[m - 1].sqrt().max(MIN_SCALE)
        })
        .collect();
    let mut values = DMatrix::from_element(n, n, 1.0);
    for i in 0..n {
        for j in (i + 1)..n {
            let a = (-d2[(i, j)] / (sigma[i] * sigma[j])).exp();
            values[(i, j)] = a;
            values[(j, i)] = a;
        }
    }
    Ok(AffinityMatrix { tokens, values })
}
