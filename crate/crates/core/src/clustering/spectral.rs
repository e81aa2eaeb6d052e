use nalgebra::{DMatrix, SymmetricEigen};

use super::{canonical_labels, kmeans, AffinityMatrix, ClusterAssignment, ClusteringConfig};
use crate::error::{Error, Result};

/// Eigenpairs of `D^{-1/2} A D^{-1/2}` sorted by decreasing eigenvalue
/// (ties by original index), together with the degree vector.
pub(crate) struct NormalizedSpectrum {
    pub values: Vec<f64>,
    pub vectors: DMatrix<f64>,
    pub degrees: Vec<f64>,
}

pub(crate) fn normalized_spectrum(a: &DMatrix<f64>) -> NormalizedSpectrum {
    let n = a.nrows();
    let degrees: Vec<f64> = (0..n).map(|i| a.row(i).sum()).collect();
    let inv_sqrt: Vec<f64> = degrees.iter().map(|d| 1.0 / d.sqrt()).collect();
    let mut s = DMatrix::from_fn(n, n, |i, j| a[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    // exact symmetry for the solver
    for i in 0..n {
        for j in (i + 1)..n {
            let m = 0.5 * (s[(i, j)] + s[(j, i)]);
            s[(i, j)] = m;
            s[(j, i)] = m;
        }
    }
    let eig = SymmetricEigen::new(s);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[y].total_cmp(&eig.eigenvalues[x]).then(x.cmp(&y)));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vectors = DMatrix::zeros(n, n);
    for (c, &i) in order.iter().enumerate() {
        let mut col = eig.eigenvectors.column(i).into_owned();
        // deterministic sign: largest-magnitude entry positive
        let pivot = col
            .iter()
            .enumerate()
            .fold(0, |b, (j, v)| if v.abs() > col[b].abs() { j } else { b });
        if col[pivot] < 0.0 {
            col.neg_mut();
        }
        vectors.set_column(c, &col);
    }
    NormalizedSpectrum {
        values,
        vectors,
        degrees,
    }
}

/// Rows of the top-`k` eigenvectors of the random-walk matrix `P = D⁻¹A`.
///
/// Computed through the symmetric matrix `D^{-1/2} A D^{-1/2}` and mapped back
/// with `D^{-1/2}`.
pub fn spectral_embedding(a: &AffinityMatrix, k: usize) -> Result<Vec<Vec<f64>>> {
    let n = a.len();
    if k == 0 || k > n {
        return Err(Error::Clustering(format!("k={k} invalid for {n} points")));
    }
    let spectrum = normalized_spectrum(&a.values);
    Ok((0..n)
        .map(|i| {
            let scale = 1.0 / spectrum.degrees[i].sqrt();
            (0..k).map(|c| spectrum.vectors[(i, c)] * scale).collect()
        })
        .collect())
}

/// Multiway normalised-cut clustering into `k` groups.
///
/// Points with no affinity to any other point become singleton clusters first;
/// the rest are embedded with [`spectral_embedding`] and grouped by seeded
/// K-means with restarts.
pub fn mncut_spectral_cluster(a: &AffinityMatrix, k: usize, config: &ClusteringConfig) -> Result<ClusterAssignment> {
    let n = a.len();
    if k == 0 || k > n {
        return Err(Error::Clustering(format!("k={k} invalid for {n} points")));
    }
    let isolated: Vec<usize> = (0..n)
        .filter(|&i| (0..n).all(|j| j == i || a.get(i, j) <= 0.0))
        .collect();
    let connected: Vec<usize> = (0..n).filter(|i| !isolated.contains(i)).collect();

    let mut labels = vec![0usize; n];
    if isolated.len() >= k {
        // every cluster but the last is one isolated point; everything else shares the last
        for (c, &i) in isolated.iter().take(k - 1).enumerate() {
            labels[i] = c;
        }
        for &i in isolated.iter().skip(k - 1).chain(&connected) {
            labels[i] = k - 1;
        }
    } else {
        for (c, &i) in isolated.iter().enumerate() {
            labels[i] = c;
        }
        let offset = isolated.len();
        let remaining = k - offset;
        if remaining > 1 {
            let sub = a.submatrix(&connected);
            let rows = spectral_embedding(&sub, remaining)?;
            let mut rng = config.rng(0);
            let result = kmeans(
                &rows,
                remaining,
                config.kmeans_restarts,
                config.kmeans_max_iter,
                &mut rng,
            )?;
            for (&i, &l) in connected.iter().zip(&result.labels) {
                labels[i] = offset + l;
            }
        } else {
            for &i in &connected {
                labels[i] = offset;
            }
        }
    }
    ClusterAssignment::new(a.tokens.clone(), canonical_labels(&labels, k), k)
}
