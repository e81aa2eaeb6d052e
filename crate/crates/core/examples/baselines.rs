// Compare spectral clustering with K-means and Ward on the same word vectors.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

use verb_transfer::clustering::{cluster_tokens, Algorithm, ClusteringConfig};
use verb_transfer::embedding::{LanguageTag, Token, WordVectorStore};
use verb_transfer::evaluation::{evaluate, Denominator, GoldStandard};

pub fn run_example() -> verb_transfer::Result<()> {
    let fr = LanguageTag::new("fr")?;
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let noise = Normal::new(0.0, 0.15).expect("valid sigma");
    let d = 10;
    let mut store = WordVectorStore::new(d);
    let mut classes: Vec<(String, Vec<Token>)> = Vec::new();
    for c in 0..3 {
        let mut members = Vec::new();
        for i in 0..8 {
            let t = Token::new(&fr, &format!("c{c}v{i}"))?;
            let v: Vec<f64> = (0..d)
                .map(|j| if j == c { 1.0 } else { 0.0 } + noise.sample(&mut rng))
                .collect();
            store.insert(t.clone(), &v)?;
            members.push(t);
        }
        classes.push((format!("class{c}"), members));
    }
    let gold = GoldStandard::new(classes)?;
    let tokens = store.tokens().to_vec();

    for algorithm in [Algorithm::MncutSpectral, Algorithm::Kmeans, Algorithm::Ward] {
        let config = ClusteringConfig {
            algorithm,
            k: Some(3),
            ..Default::default()
        };
        let out = cluster_tokens(&store, &tokens, &config)?;
        let report = evaluate(&out.assignment, &gold, Some(&store), Denominator::AllGold);
        println!(
            "{algorithm}\tF1={:.3}\tmPur={:.3}\twAcc={:.3}",
            report.f1, report.mpur, report.wacc
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> verb_transfer::Result<()> {
    run_example()
}
