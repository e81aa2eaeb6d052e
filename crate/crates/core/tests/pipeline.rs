use std::fs;
use std::path::Path;

use verb_transfer::pipeline::{compare_variants, run_experiment, run_synthetic, SyntheticSpec, Variant};

fn small(seed: u64) -> SyntheticSpec {
    SyntheticSpec {
        num_classes: 4,
        verbs_per_class: 8,
        dimension: 100,
        distractors: 10,
        seed,
        ..Default::default()
    }
}

fn artifacts(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut out = Vec::new();
    for name in [
        "clusters.tsv",
        "report.json",
        "train.log",
        "manifest.json",
        "vectors/en.txt",
        "vectors/fr.txt",
    ] {
        out.push((name.to_owned(), fs::read(dir.join(name)).unwrap()));
    }
    out
}

#[test]
fn reruns_are_byte_identical() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = run_synthetic(&small(3), tmp.path().join("data")).unwrap();
    let mut a = exp.config.clone();
    a.output_dir = Some(tmp.path().join("a"));
    let mut b = exp.config.clone();
    b.output_dir = Some(tmp.path().join("b"));
    run_experiment(&a).unwrap();
    run_experiment(&b).unwrap();
    assert_eq!(artifacts(&tmp.path().join("a")), artifacts(&tmp.path().join("b")));
}

#[test]
fn manifest_records_inputs_and_settings() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = run_synthetic(&small(4), tmp.path()).unwrap();
    let out = run_experiment(&exp.config).unwrap();
    let json: serde_json::Value =
        serde_json::from_slice(&fs::read(tmp.path().join("out/manifest.json")).unwrap()).unwrap();

    let roles: Vec<&str> = out.manifest.inputs.iter().map(|r| r.role.as_str()).collect();
    assert_eq!(
        roles,
        ["source_vectors", "target_vectors", "lexicon", "dictionary", "gold"]
    );
    for record in &out.manifest.inputs {
        assert_eq!(record.sha256.len(), 64);
        assert!(tmp.path().join(&record.path).exists());
    }
    for key in [
        "seed",
        "variant",
        "stages",
        "inputs",
        "specialization",
        "clustering",
        "constraints",
        "self_tuning",
    ] {
        assert!(!json[key].is_null(), "manifest lacks {key}");
    }
    for key in [
        "attract-margin",
        "reg-constant",
        "batch-size",
        "epochs",
        "learning-rate",
    ] {
        assert!(!json["specialization"][key].is_null(), "specialisation lacks {key}");
    }
    assert_eq!(json["seed"], 4);
}

#[test]
fn distributional_clusters_the_loaded_space() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = run_synthetic(&small(5), tmp.path()).unwrap();
    let mut config = exp.config.clone();
    config.variant = Variant::Distributional;
    config.output_dir = None;
    let out = run_experiment(&config).unwrap();
    assert!(!out.manifest.stages.contains(&"specialize"));
    assert!(out.manifest.specialization.is_none());
    assert!(out.training_log.is_empty());
    assert_eq!(out.space.tokens(), out.loaded.tokens());
    let same_bits = out
        .space
        .as_slice()
        .iter()
        .zip(out.loaded.as_slice())
        .all(|(a, b)| a.to_bits() == b.to_bits());
    assert!(same_bits);
}

#[test]
fn zero_coverage_removes_the_transfer_signal() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec {
        coverage: 0.0,
        ..small(6)
    };
    let exp = run_synthetic(&spec, tmp.path()).unwrap();
    let mut config = exp.config.clone();
    config.output_dir = None;
    let cmp = compare_variants(
        &config,
        &[Variant::Distributional, Variant::Xling, Variant::XlingVerbnet],
    )
    .unwrap();
    let dist = cmp.f1_of(Variant::Distributional).unwrap();
    assert_eq!(cmp.f1_of(Variant::Xling).unwrap(), dist);
    assert_eq!(cmp.f1_of(Variant::XlingVerbnet).unwrap(), dist);
}

#[test]
fn noiseless_target_is_recovered_without_transfer() {
    let tmp = tempfile::tempdir().unwrap();
    let spec = SyntheticSpec { noise: 0.0, ..small(7) };
    let exp = run_synthetic(&spec, tmp.path()).unwrap();
    let mut config = exp.config.clone();
    config.variant = Variant::Distributional;
    config.output_dir = None;
    assert_eq!(run_experiment(&config).unwrap().report.f1, 1.0);
}

#[test]
fn compare_keeps_request_order_and_rejects_duplicates() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = run_synthetic(&small(8), tmp.path()).unwrap();
    let order = [Variant::XlingVerbnet, Variant::Distributional, Variant::Xling];
    let cmp = compare_variants(&exp.config, &order).unwrap();
    let got: Vec<Variant> = cmp.rows.iter().map(|r| r.variant).collect();
    assert_eq!(got, order);
    for v in order {
        assert!(tmp.path().join("out").join(v.as_str()).join("clusters.tsv").exists());
    }
    assert!(compare_variants(&exp.config, &[Variant::Xling, Variant::Xling]).is_err());
}

#[test]
fn missing_inputs_name_their_stage() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = run_synthetic(&small(9), tmp.path()).unwrap();
    let mut config = exp.config.clone();
    config.output_dir = None;

    fs::remove_file(tmp.path().join("dict.tsv")).unwrap();
    let err = run_experiment(&config).unwrap_err().to_string();
    assert!(err.contains("stage `constraints`"), "{err}");

    fs::remove_file(tmp.path().join("fr.vec")).unwrap();
    let err = run_experiment(&config).unwrap_err().to_string();
    assert!(err.contains("stage `load`"), "{err}");
}

#[test]
fn mono_syn_without_synonyms_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let exp = run_synthetic(&small(10), tmp.path()).unwrap();
    let mut config = exp.config.clone();
    config.variant = Variant::MonoSyn;
    let err = run_experiment(&config).unwrap_err().to_string();
    assert!(err.contains("stage `config`"), "{err}");
}
