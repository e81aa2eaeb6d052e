use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::config::{DictionaryInput, ExperimentConfig, LexiconInput, Variant, VectorInput};
use crate::embedding::{save_surfaces, LanguageTag, Token, WordVectorStore};
use crate::error::{Error, Result};

/// Target noise level treated as "high": class signal is swamped by noise.
pub const HIGH_NOISE: f64 = 5.0;

/// Shape of a generated two-language experiment.
///
/// Source verbs sit tightly around one random unit centre per class. Target
/// verbs share the class centres but carry `noise`-scaled Gaussian
/// perturbations, so their class structure is mostly hidden. A dictionary
/// links a `coverage` fraction of target verbs to their source counterparts.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", deny_unknown_fields, default)]
pub struct SyntheticSpec {
    pub num_classes: usize,
    pub verbs_per_class: usize,
    pub dimension: usize,
    /// Norm scale of the source perturbation relative to the unit centre.
    pub tightness: f64,
    /// Norm scale of the target perturbation relative to the unit centre.
    pub noise: f64,
    pub coverage: f64,
    /// Unrelated words added to each language's vocabulary.
    pub distractors: usize,
    pub seed: u64,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        SyntheticSpec {
            num_classes: 5,
            verbs_per_class: 12,
            dimension: 300,
            tightness: 0.3,
            noise: HIGH_NOISE,
            coverage: 1.0,
            distractors: 20,
            seed: 0,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidConfig(m));
        if self.num_classes == 0 || self.dimension == 0 {
            return bad("num-classes and dimension must be positive".into());
        }
        if self.verbs_per_class < 2 {
            return bad(format!(
                "verbs-per-class must be at least 2 to form class pairs, got {}",
                self.verbs_per_class
            ));
        }
        if !(self.tightness >= 0.0 && self.tightness.is_finite()) || !(self.noise >= 0.0 && self.noise.is_finite()) {
            return bad("tightness and noise must be finite and non-negative".into());
        }
        if !(0.0..=1.0).contains(&self.coverage) {
            return bad(format!("coverage must lie in [0, 1], got {}", self.coverage));
        }
        Ok(())
    }
}

/// A generated experiment on disk.
#[derive(Debug, Clone)]
pub struct SyntheticExperiment {
    /// Ready-to-run config (variant `xling_verbnet`, output under `dir/out`).
    pub config: ExperimentConfig,
    /// Planted class of every target verb, in token order.
    pub planted: Vec<(Token, usize)>,
    pub dir: PathBuf,
}

fn perturbed<R: Rng>(center: &[f64], scale: f64, rng: &mut R) -> Vec<f64> {
    let d = center.len() as f64;
    let mut v: Vec<f64> = center
        .iter()
        .map(|c| c + scale * rng.sample::<f64, _>(StandardNormal) / d.sqrt())
        .collect();
    let norm = crate::embedding::l2_norm(&v);
    v.iter_mut().for_each(|x| *x /= norm);
    v
}

fn random_unit<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    perturbed(&vec![0.0; d], 1.0, rng)
}

fn class_file(classes: &[Vec<String>]) -> String {
    let mut out = String::new();
    for (c, members) in classes.iter().enumerate() {
        let _ = writeln!(out, "c{c}\t{}", members.join(" "));
    }
    out
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Writes `en.vec`, `fr.vec`, `verbnet.tsv`, `dict.tsv`, `gold.tsv` and
/// `config.toml` into `dir` and returns the matching config.
pub fn run_synthetic(spec: &SyntheticSpec, dir: impl AsRef<Path>) -> Result<SyntheticExperiment> {
    spec.validate()?;
    let dir = dir.as_ref();
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let (k, m, d) = (spec.num_classes, spec.verbs_per_class, spec.dimension);
    let n = k * m;
    let en = LanguageTag::new("en")?;
    let fr = LanguageTag::new("fr")?;

    // shuffled ids so that token order carries no class information
    let mut source_ids: Vec<usize> = (0..n).collect();
    let mut target_ids: Vec<usize> = (0..n).collect();
    source_ids.shuffle(&mut rng);
    target_ids.shuffle(&mut rng);
    let width = (n + spec.distractors).to_string().len();
    let name = |p: &str, i: usize| format!("{p}{i:0width$}");

    let centers: Vec<Vec<f64>> = (0..k).map(|_| random_unit(d, &mut rng)).collect();
    let mut source = WordVectorStore::new(d);
    let mut target = WordVectorStore::new(d);
    let mut lexicon = vec![Vec::new(); k];
    let mut gold = vec![Vec::new(); k];
    let mut dictionary = Vec::new();
    let mut planted = Vec::with_capacity(n);
    for v in 0..n {
        let class = v / m;
        let s = name("v", source_ids[v]);
        let t = name("v", target_ids[v]);
        source.insert(
            Token::new(&en, &s)?,
            &perturbed(&centers[class], spec.tightness, &mut rng),
        )?;
        target.insert(Token::new(&fr, &t)?, &perturbed(&centers[class], spec.noise, &mut rng))?;
        if rng.gen_bool(spec.coverage) {
            dictionary.push((s.clone(), t.clone()));
        }
        planted.push((Token::new(&fr, &t)?, class));
        lexicon[class].push(s);
        gold[class].push(t);
    }
    for i in 0..spec.distractors {
        source.insert(Token::new(&en, &name("w", n + i))?, &random_unit(d, &mut rng))?;
        target.insert(Token::new(&fr, &name("w", n + i))?, &random_unit(d, &mut rng))?;
    }
    planted.sort();
    dictionary.sort();

    save_surfaces(&source, dir.join("en.vec"))?;
    save_surfaces(&target, dir.join("fr.vec"))?;
    write(&dir.join("verbnet.tsv"), &class_file(&lexicon))?;
    write(&dir.join("gold.tsv"), &class_file(&gold))?;
    let dict: String = dictionary.iter().map(|(s, t)| format!("{s}\t{t}\n")).collect();
    write(&dir.join("dict.tsv"), &dict)?;

    let mut config = ExperimentConfig {
        source: VectorInput {
            path: "en.vec".into(),
            language: en.clone(),
        },
        targets: vec![VectorInput {
            path: "fr.vec".into(),
            language: fr.clone(),
        }],
        lexicon: Some(LexiconInput {
            path: "verbnet.tsv".into(),
        }),
        dictionaries: vec![DictionaryInput {
            path: "dict.tsv".into(),
            source: en,
            target: fr.clone(),
        }],
        synonyms: Vec::new(),
        gold: VectorInput {
            path: "gold.tsv".into(),
            language: fr,
        },
        variant: Variant::XlingVerbnet,
        seed: spec.seed,
        output_dir: Some("out".into()),
        normalize: true,
        cluster_scope: Default::default(),
        exclude_test_verbs: false,
        denominator: Default::default(),
        specialization: Default::default(),
        clustering: Default::default(),
        base_dir: PathBuf::new(),
    };
    write(&dir.join("config.toml"), &config.to_toml()?)?;
    config.base_dir = dir.to_path_buf();
    Ok(SyntheticExperiment {
        config,
        planted,
        dir: dir.to_path_buf(),
    })
}
