// Pull constrained word pairs together with the ATTRACT objective and watch
// their cosine similarity rise while unconstrained words stay put.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use verb_transfer::constraints::{ConstraintSet, Provenance};
use verb_transfer::embedding::{cosine, unit_normalize, LanguageTag, Token, WordVectorStore};
use verb_transfer::specializer::{specialize, SpecializationConfig};

fn mean_cosine(store: &WordVectorStore, set: &ConstraintSet) -> f64 {
    let sims: Vec<f64> = set
        .pairs()
        .map(|p| cosine(store.get(p.left()).unwrap(), store.get(p.right()).unwrap()))
        .collect();
    sims.iter().sum::<f64>() / sims.len() as f64
}

pub fn run_example() -> verb_transfer::Result<()> {
    let en = LanguageTag::new("en")?;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let d = 50;
    let mut store = WordVectorStore::new(d);
    for i in 0..100 {
        let v: Vec<f64> = (0..d).map(|_| rng.gen_range(-1.0..1.0)).collect();
        store.insert(Token::new(&en, &format!("w{i:03}"))?, &v)?;
    }
    let store = unit_normalize(&store)?;

    let mut set = ConstraintSet::new();
    for i in 0..20 {
        let a = store.tokens()[2 * i].clone();
        let b = store.tokens()[2 * i + 1].clone();
        set.add(a, b, Provenance::MonoSyn);
    }

    let config = SpecializationConfig::default();
    let out = specialize(&store, &set, &config)?;
    println!(
        "mean pair cosine: {:.3} -> {:.3}",
        mean_cosine(&store, &set),
        mean_cosine(&out.store, &set)
    );
    print!("epoch\tcost\tactive\n{}", out.log_text());
    let untouched = store.tokens()[99].clone();
    println!(
        "untouched {untouched} unchanged: {}",
        store.get(&untouched) == out.store.get(&untouched)
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> verb_transfer::Result<()> {
    run_example()
}
