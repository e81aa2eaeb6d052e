// Load two monolingual spaces, merge them into a joint space and query it.

use std::fs;

use verb_transfer::embedding::{
    load_word_vectors, merge_stores, nearest_neighbors, unit_normalize, LanguageTag, Token,
};

pub fn run_example() -> verb_transfer::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let en_path = dir.path().join("en.vec");
    let fr_path = dir.path().join("fr.vec");
    fs::write(&en_path, "3 3\nrun 1 0.1 0\nsprint 0.9 0.2 0\neat 0 1 0.1\n").expect("write en");
    fs::write(&fr_path, "3 3\ncourir 1 0.15 0\nmanger 0.1 0.9 0\nRun 0 0 1\n").expect("write fr");

    let en = LanguageTag::new("en")?;
    let fr = LanguageTag::new("fr")?;
    let en_store = load_word_vectors(&en_path, &en)?.store;
    let fr_loaded = load_word_vectors(&fr_path, &fr)?;
    for w in &fr_loaded.warnings {
        println!("warning: {w}");
    }
    let joint = merge_stores(&[unit_normalize(&en_store)?, unit_normalize(&fr_loaded.store)?])?;
    println!("joint space: {} tokens, dimension {}", joint.len(), joint.dimension());

    let query = Token::new(&en, "run")?;
    for (tok, sim) in nearest_neighbors(&joint, &query, 3, None)? {
        println!("  {tok}\t{sim:.3}");
    }
    println!("french neighbours of {query}:");
    for (tok, sim) in nearest_neighbors(&joint, &query, 2, Some(&fr))? {
        println!("  {tok}\t{sim:.3}");
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> verb_transfer::Result<()> {
    run_example()
}
