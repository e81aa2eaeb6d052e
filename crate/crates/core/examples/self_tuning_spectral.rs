// Estimate the number of clusters from the affinity's eigenvectors and split
// planted Gaussian blobs with normalised-cut spectral clustering.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use verb_transfer::clustering::{
    affinity_from_points, estimate_num_clusters, mncut_spectral_cluster, ClusteringConfig,
};
use verb_transfer::embedding::{LanguageTag, Token};

pub fn run_example() -> verb_transfer::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let noise = Normal::new(0.0, 0.1).expect("valid sigma");
    let centers = [[0.0, 0.0], [3.0, 0.0], [0.0, 3.0], [3.0, 3.0]];
    let fr = LanguageTag::new("fr")?;
    let (mut tokens, mut points, mut planted) = (Vec::new(), Vec::new(), Vec::new());
    for (c, center) in centers.iter().enumerate() {
        for _ in 0..15 {
            tokens.push(Token::new(&fr, &format!("p{:02}", tokens.len()))?);
            points.push(center.iter().map(|x| x + noise.sample(&mut rng)).collect::<Vec<f64>>());
            planted.push(c);
        }
    }

    let config = ClusteringConfig::default();
    let affinity = affinity_from_points(tokens, &points, config.local_scale_neighbor)?;
    let st = estimate_num_clusters(&affinity, 8, &config)?;
    for (k, cost) in &st.costs {
        println!("K={k}\tcost={cost:.4}");
    }
    println!("chosen K = {}", st.k);

    let clusters = mncut_spectral_cluster(&affinity, st.k, &config)?;
    println!("labels:  {:?}", clusters.labels());
    println!("planted: {planted:?}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> verb_transfer::Result<()> {
    run_example()
}
