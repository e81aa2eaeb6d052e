mod common;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::*;
use verb_transfer::clustering::{
    affinity_from_points, canonical_labels, estimate_num_clusters, kmeans, mncut_spectral_cluster, ward_agglomerative,
    ClusteringConfig,
};

fn sq(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}

/// Ward by brute force: recompute centroids and merge the pair with the
/// smallest variance increase.
fn naive_ward(points: &[Vec<f64>], k: usize) -> Vec<usize> {
    let mut clusters: Vec<Vec<usize>> = (0..points.len()).map(|i| vec![i]).collect();
    let centroid = |c: &[usize]| {
        let mut m = vec![0.0; points[0].len()];
        for &i in c {
            m.iter_mut().zip(&points[i]).for_each(|(a, b)| *a += b);
        }
        m.iter_mut().for_each(|a| *a /= c.len() as f64);
        m
    };
    while clusters.len() > k {
        let mut best = (0, 1, f64::INFINITY);
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let (na, nb) = (clusters[a].len() as f64, clusters[b].len() as f64);
                let cost = na * nb / (na + nb) * sq(&centroid(&clusters[a]), &centroid(&clusters[b]));
                if cost < best.2 {
                    best = (a, b, cost);
                }
            }
        }
        let moved = clusters.remove(best.1);
        clusters[best.0].extend(moved);
    }
    let mut labels = vec![0; points.len()];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = c;
        }
    }
    canonical_labels(&labels, k)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn ward_matches_naive(seed in any::<u64>(), n in 2usize..25, d in 1usize..4) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<f64>> = (0..n).map(|_| gaussian(d, &mut rng)).collect();
        let k = 1 + (seed as usize % n);
        prop_assert_eq!(ward_agglomerative(&points, k).unwrap(), naive_ward(&points, k));
    }

    #[test]
    fn kmeans_keeps_best_restart(seed in any::<u64>(), k in 1usize..6) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let points: Vec<Vec<f64>> = (0..30).map(|_| gaussian(3, &mut rng)).collect();
        let out = kmeans(&points, k, 5, 100, &mut rng).unwrap();
        for &d in &out.restart_distortions {
            prop_assert!(out.distortion <= d);
        }
        for w in out.history.windows(2) {
            prop_assert!(w[1] <= w[0] + 1e-9);
        }
    }

    #[test]
    fn affinity_ignores_uniform_scaling(seed in any::<u64>(), scale in 0.01f64..100.0) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (points, _) = planted_blobs(&mut rng, 3, 8, 2, 10.0);
        let scaled: Vec<Vec<f64>> = points.iter().map(|p| p.iter().map(|x| x * scale).collect()).collect();
        let a = affinity_from_points(tokens("fr", points.len()), &points, 7).unwrap();
        let b = affinity_from_points(tokens("fr", points.len()), &scaled, 7).unwrap();
        for i in 0..a.len() {
            for j in 0..a.len() {
                prop_assert!((a.get(i, j) - b.get(i, j)).abs() < 1e-9);
            }
        }
        let config = ClusteringConfig::default();
        prop_assert_eq!(
            estimate_num_clusters(&a, 10, &config).unwrap().k,
            estimate_num_clusters(&b, 10, &config).unwrap().k
        );
    }
}

#[test]
fn spectral_partition_survives_permutation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (points, planted) = planted_blobs(&mut rng, 4, 15, 2, 10.0);
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.shuffle(&mut rng);
    let shuffled: Vec<Vec<f64>> = order.iter().map(|&i| points[i].clone()).collect();
    let config = ClusteringConfig::default();
    let a = affinity_from_points(tokens("fr", points.len()), &shuffled, 7).unwrap();
    let labels = mncut_spectral_cluster(&a, 4, &config).unwrap().labels().to_vec();
    let planted_shuffled: Vec<usize> = order.iter().map(|&i| planted[i]).collect();
    assert_eq!(labels, canonical_labels(&planted_shuffled, 4));
}

#[test]
fn disconnected_components_give_their_count() {
    // three groups far beyond the kernel's reach
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let mut points = Vec::new();
    let mut planted = Vec::new();
    for c in 0..3 {
        for _ in 0..10 {
            points.push(vec![
                1e4 * c as f64 + gaussian(1, &mut rng)[0],
                gaussian(1, &mut rng)[0],
            ]);
            planted.push(c);
        }
    }
    let a = affinity_from_points(tokens("fr", points.len()), &points, 3).unwrap();
    let config = ClusteringConfig::default();
    let st = estimate_num_clusters(&a, 10, &config).unwrap();
    assert_eq!(st.k, 3);
    assert!(!st.degenerate);
    let labels = mncut_spectral_cluster(&a, 3, &config).unwrap().labels().to_vec();
    assert_eq!(labels, canonical_labels(&planted, 3));
}
