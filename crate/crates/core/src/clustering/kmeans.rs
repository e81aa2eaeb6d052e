use rand::Rng;

use super::squared_distance;
use crate::error::{Error, Result};

#[derive(Debug, Clone)]
pub struct KMeansResult {
    pub labels: Vec<usize>,
    pub centroids: Vec<Vec<f64>>,
    pub distortion: f64,
    /// Distortion after every assignment step of the returned run.
    pub history: Vec<f64>,
    /// Final distortion of each restart, in order.
    pub restart_distortions: Vec<f64>,
}

/// Lloyd's K-means with k-means++ seeding; the lowest-distortion restart wins
/// (earliest on ties).
pub fn kmeans<R: Rng + ?Sized>(
    points: &[Vec<f64>],
    k: usize,
    restarts: usize,
    max_iter: usize,
    rng: &mut R,
) -> Result<KMeansResult> {
    let n = points.len();
    if n == 0 {
        return Err(Error::Clustering("k-means on zero points".into()));
    }
    if k == 0 || k > n {
        return Err(Error::Clustering(format!("k={k} invalid for {n} points")));
    }
    let dim = points[0].len();
    if let Some(p) = points.iter().find(|p| p.len() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: p.len(),
        });
    }
    let mut best: Option<KMeansResult> = None;
    let mut all = Vec::with_capacity(restarts.max(1));
    for _ in 0..restarts.max(1) {
        let run = lloyd(points, k, max_iter, rng);
        all.push(run.distortion);
        if best.as_ref().is_none_or(|b| run.distortion < b.distortion) {
            best = Some(run);
        }
    }
    let mut best = best.expect("at least one restart");
    best.restart_distortions = all;
    Ok(best)
}

fn plus_plus_init<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, rng: &mut R) -> Vec<Vec<f64>> {
    let n = points.len();
    let mut centroids = vec![points[rng.gen_range(0..n)].clone()];
    let mut nearest: Vec<f64> = points.iter().map(|p| squared_distance(p, &centroids[0])).collect();
    while centroids.len() < k {
        let total: f64 = nearest.iter().sum();
        let pick = if total > 0.0 {
            let mut r = rng.gen::<f64>() * total;
            let mut chosen = n - 1;
            for (i, &w) in nearest.iter().enumerate() {
                if w > 0.0 && r < w {
                    chosen = i;
                    break;
                }
                r -= w;
            }
            // guard against round-off landing on an already chosen point
            if nearest[chosen] == 0.0 {
                chosen = argmax(&nearest);
            }
            chosen
        } else {
            rng.gen_range(0..n)
        };
        centroids.push(points[pick].clone());
        for (i, p) in points.iter().enumerate() {
            nearest[i] = nearest[i].min(squared_distance(p, &centroids[centroids.len() - 1]));
        }
    }
    centroids
}

fn argmax(values: &[f64]) -> usize {
    let mut best = 0;
    for (i, &v) in values.iter().enumerate() {
        if v > values[best] {
            best = i;
        }
    }
    best
}

fn nearest_centroid(p: &[f64], centroids: &[Vec<f64>]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (c, centroid) in centroids.iter().enumerate() {
        let d = squared_distance(p, centroid);
        if d < best.1 {
            best = (c, d);
        }
    }
    best
}

fn lloyd<R: Rng + ?Sized>(points: &[Vec<f64>], k: usize, max_iter: usize, rng: &mut R) -> KMeansResult {
    let dim = points[0].len();
    let mut centroids = plus_plus_init(points, k, rng);
    let mut labels = vec![usize::MAX; points.len()];
    let mut dists = vec![0.0; points.len()];
    let mut history = Vec::new();

    for _ in 0..max_iter.max(1) {
        let mut changed = false;
        for (i, p) in points.iter().enumerate() {
            let (c, d) = nearest_centroid(p, &centroids);
            if labels[i] != c {
                labels[i] = c;
                changed = true;
            }
            dists[i] = d;
        }

        // repair empty clusters from the farthest points
        let mut counts = vec![0usize; k];
        labels.iter().for_each(|&l| counts[l] += 1);
        for c in 0..k {
            if counts[c] > 0 {
                continue;
            }
            let far =
                (0..points.len())
                    .filter(|&i| counts[labels[i]] > 1)
                    .fold(None, |acc: Option<usize>, i| match acc {
                        Some(b) if dists[b] >= dists[i] => Some(b),
                        _ => Some(i),
                    });
            if let Some(i) = far {
                counts[labels[i]] -= 1;
                labels[i] = c;
                counts[c] = 1;
                dists[i] = 0.0;
                centroids[c] = points[i].clone();
                changed = true;
            }
        }
        history.push(dists.iter().sum());
        if !changed {
            break;
        }

        let mut sums = vec![vec![0.0; dim]; k];
        for (p, &l) in points.iter().zip(&labels) {
            sums[l].iter_mut().zip(p).for_each(|(s, v)| *s += v);
        }
        for c in 0..k {
            if counts[c] > 0 {
                centroids[c] = sums[c].iter().map(|s| s / counts[c] as f64).collect();
            }
        }
    }

    let distortion = points
        .iter()
        .zip(&labels)
        .map(|(p, &l)| squared_distance(p, &centroids[l]))
        .sum();
    KMeansResult {
        labels,
        centroids,
        distortion,
        history,
        restart_distortions: Vec::new(),
    }
}
