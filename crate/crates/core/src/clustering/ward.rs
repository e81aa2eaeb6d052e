use super::{canonical_labels, squared_distance};
use crate::error::{Error, Result};

/// Bottom-up Ward clustering cut at `k` clusters.
///
/// Merge costs are Ward variance increases, maintained with the Lance–Williams
/// update. Equal costs merge the pair with the smallest cluster indices.
/// Labels are numbered by first appearance.
pub fn ward_agglomerative(points: &[Vec<f64>], k: usize) -> Result<Vec<usize>> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Clustering("Ward clustering on zero points".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Clustering(format!("k={k} invalid for {n} points")));
    }

    // cost[i][j] for i < j, flat upper triangle stored densely for simplicity
    let mut cost = vec![0.0; n * n];
    for i in 0..n {
        for j in (i + 1)..n {
            let c = 0.5 * squared_distance(&points[i], &points[j]);
            cost[i * n + j] = c;
            cost[j * n + i] = c;
        }
    }
    let mut size = vec![1usize; n];
    let mut active: Vec<bool> = vec![true; n];
    let mut owner: Vec<usize> = (0..n).collect();
    let mut remaining = n;

    while remaining > k {
        let mut best: Option<(usize, usize, f64)> = None;
        for i in 0..n {
            if !active[i] {
                continue;
            }
            for j in (i + 1)..n {
                if !active[j] {
                    continue;
                }
                let c = cost[i * n + j];
                if best.is_none_or(|(_, _, b)| c < b) {
                    best = Some((i, j, c));
                }
            }
        }
        let (a, b, ab) = best.expect("at least two active clusters");
        let (na, nb) = (size[a] as f64, size[b] as f64);
        for m in 0..n {
            if !active[m] || m == a || m == b {
                continue;
            }
            let nm = size[m] as f64;
            let updated = ((na + nm) * cost[a * n + m] + (nb + nm) * cost[b * n + m] - nm * ab) / (na + nb + nm);
            cost[a * n + m] = updated;
            cost[m * n + a] = updated;
        }
        size[a] += size[b];
        active[b] = false;
        owner.iter_mut().filter(|o| **o == b).for_each(|o| *o = a);
        remaining -= 1;
    }
    Ok(canonical_labels(&owner, k))
}
