// Generate a two-language experiment with noisy target verbs and compare the
// constraint variants end to end.

use verb_transfer::pipeline::{compare_variants, run_experiment, run_synthetic, SyntheticSpec, Variant};

pub fn run_example() -> verb_transfer::Result<()> {
    let dir = tempfile::tempdir().expect("temp dir");
    let exp = run_synthetic(&SyntheticSpec::default(), dir.path())?;

    let table = compare_variants(
        &exp.config,
        &[Variant::Distributional, Variant::Xling, Variant::XlingVerbnet],
    )?;
    print!("{}", table.to_tsv());

    let outcome = run_experiment(&exp.config)?;
    let c = &outcome.manifest.constraints;
    println!(
        "{} constraints used ({} touch test verbs); outputs in {}",
        c.used,
        c.test_verb_overlap,
        dir.path().join("out").display()
    );
    Ok(())
}

#[allow(dead_code)]
fn main() -> verb_transfer::Result<()> {
    run_example()
}
