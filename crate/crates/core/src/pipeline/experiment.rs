use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;
use sha2::{Digest, Sha256};

use super::config::{ClusterScope, ExperimentConfig, Variant};
use crate::clustering::{cluster_tokens, ClusterAssignment, ClusteringConfig, SelfTuning};
use crate::constraints::{
    filter_by_vocabulary, load_synsets, pairs_from_dictionary, pairs_from_synonyms, pairs_from_verb_classes, union,
    BilingualDictionary, ConstraintSet, ProvenanceCounts, VerbClassLexicon,
};
use crate::embedding::{load_word_vectors, merge_stores, save_surfaces, unit_normalize, Token, WordVectorStore};
use crate::error::{Error, Result, StageExt};
use crate::evaluation::{evaluate, EvalReport, GoldStandard};
use crate::specializer::{specialize, EpochLog, SpecializationConfig};

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InputRecord {
    pub role: String,
    pub path: String,
    pub sha256: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConstraintSummary {
    /// Counts of the variant's constraints before vocabulary filtering.
    pub before_filter: ProvenanceCounts,
    pub dropped_oov: ProvenanceCounts,
    pub after_filter: ProvenanceCounts,
    /// Retained pairs touching a gold test verb (before any exclusion).
    pub test_verb_overlap: usize,
    pub excluded_test_verb_pairs: usize,
    pub used: usize,
}

/// Everything resolved for one run, written as `manifest.json`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Manifest {
    pub tool_version: &'static str,
    pub variant: Variant,
    pub seed: u64,
    pub stages: Vec<&'static str>,
    pub inputs: Vec<InputRecord>,
    pub normalize: bool,
    pub cluster_scope: ClusterScope,
    pub exclude_test_verbs: bool,
    pub specialization: Option<SpecializationConfig>,
    pub clustering: ClusteringConfig,
    pub constraints: ConstraintSummary,
    pub vocabulary_size: usize,
    pub clustered_tokens: usize,
    pub num_clusters: usize,
    pub self_tuning: Option<SelfTuning>,
    pub load_warnings: Vec<String>,
}

/// Results of one experiment.
#[derive(Debug, Clone)]
pub struct ExperimentOutcome {
    pub report: EvalReport,
    pub assignment: ClusterAssignment,
    pub manifest: Manifest,
    pub training_log: Vec<EpochLog>,
    /// Joint space handed to clustering (specialised unless distributional).
    pub space: WordVectorStore,
    /// Joint space as loaded (after optional normalisation).
    pub loaded: WordVectorStore,
}

impl ExperimentOutcome {
    pub fn training_log_text(&self) -> String {
        self.training_log
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.epoch, e.mean_batch_cost, e.active_hinge_fraction))
            .collect()
    }

    /// Writes `vectors/`, `clusters.tsv`, `report.json`, `train.log` and `manifest.json`.
    pub fn write(&self, dir: &Path) -> Result<()> {
        let vectors = dir.join("vectors");
        fs::create_dir_all(&vectors).map_err(|e| Error::io(&vectors, e))?;
        for lang in self.space.languages() {
            let tag = crate::embedding::LanguageTag::new(&lang)?;
            save_surfaces(&self.space.restrict_to(&tag), vectors.join(format!("{lang}.txt")))?;
        }
        self.assignment.write_tsv(
            dir.join("clusters.tsv"),
            &[
                ("algorithm", self.manifest.clustering.algorithm.to_string()),
                ("k", self.assignment.k().to_string()),
                ("seed", self.manifest.seed.to_string()),
                ("variant", self.manifest.variant.to_string()),
            ],
        )?;
        write_file(&dir.join("report.json"), self.report.to_json()? + "\n")?;
        write_file(&dir.join("train.log"), self.training_log_text())?;
        write_file(
            &dir.join("manifest.json"),
            serde_json::to_string_pretty(&self.manifest)? + "\n",
        )
    }
}

fn write_file(path: &Path, contents: String) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn checksum(path: &Path) -> Result<String> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    Ok(hex::encode(Sha256::digest(&bytes)))
}

/// Inputs read from disk once and shared by every variant.
#[derive(Debug, Clone)]
pub struct PreparedInputs {
    pub config: ExperimentConfig,
    pub space: WordVectorStore,
    pub gold: GoldStandard,
    /// Union of every configured constraint source, unfiltered.
    pub constraints: ConstraintSet,
    pub inputs: Vec<InputRecord>,
    pub warnings: Vec<String>,
}

/// Loads vectors, resources and the gold standard named in `config`.
pub fn prepare(config: &ExperimentConfig) -> Result<PreparedInputs> {
    let mut inputs = Vec::new();
    let mut record = |role: &str, path: &Path| -> Result<PathBuf> {
        let resolved = config.resolve(path);
        inputs.push(InputRecord {
            role: role.to_owned(),
            path: path.display().to_string(),
            sha256: checksum(&resolved)?,
        });
        Ok(resolved)
    };

    let mut warnings = Vec::new();
    let mut stores = Vec::new();
    for (role, input) in
        std::iter::once(("source_vectors", &config.source)).chain(config.targets.iter().map(|t| ("target_vectors", t)))
    {
        let path = record(role, &input.path).stage("load")?;
        let loaded = load_word_vectors(&path, &input.language).stage("load")?;
        warnings.extend(loaded.warnings);
        let store = if config.normalize {
            unit_normalize(&loaded.store).stage("normalize")?
        } else {
            loaded.store
        };
        stores.push(store);
    }
    let space = merge_stores(&stores).stage("merge")?;

    let mut sets = Vec::new();
    if let Some(lex) = &config.lexicon {
        let path = record("lexicon", &lex.path).stage("constraints")?;
        let lexicon = VerbClassLexicon::load(&path, config.source.language.clone()).stage("constraints")?;
        sets.push(pairs_from_verb_classes(&lexicon));
    }
    for d in &config.dictionaries {
        let path = record("dictionary", &d.path).stage("constraints")?;
        let dict = BilingualDictionary::load(&path, d.source.clone(), d.target.clone()).stage("constraints")?;
        sets.push(pairs_from_dictionary(&dict));
    }
    for s in &config.synonyms {
        let path = record("synonyms", &s.path).stage("constraints")?;
        let synsets = load_synsets(&path).stage("constraints")?;
        sets.push(pairs_from_synonyms(&synsets, &s.language));
    }
    let constraints = union(&sets);

    let gold_path = record("gold", &config.gold.path).stage("evaluate")?;
    let gold = GoldStandard::load(&gold_path, &config.gold.language).stage("evaluate")?;

    Ok(PreparedInputs {
        config: config.clone(),
        space,
        gold,
        constraints,
        inputs,
        warnings,
    })
}

/// Runs one variant end to end on prepared inputs. Nothing is written.
pub fn run_prepared(prepared: &PreparedInputs, variant: Variant) -> Result<ExperimentOutcome> {
    let config = &prepared.config;
    config.validate_for(variant).stage("config")?;
    let mut stages = vec!["load"];
    if config.normalize {
        stages.push("normalize");
    }
    stages.extend(["merge", "constraints", "filter"]);

    let gold = &prepared.gold;
    let is_test_verb = |t: &Token| gold.class_of(t).is_some();
    let selected = prepared.constraints.with_provenance(variant.provenances());
    let filtered = filter_by_vocabulary(&selected, &prepared.space);
    let test_verb_overlap = filtered
        .set
        .pairs()
        .filter(|p| is_test_verb(p.left()) || is_test_verb(p.right()))
        .count();
    let used = if config.exclude_test_verbs {
        filtered.set.without_tokens(is_test_verb)
    } else {
        filtered.set.clone()
    };
    let summary = ConstraintSummary {
        before_filter: selected.counts(),
        dropped_oov: filtered.dropped,
        after_filter: filtered.set.counts(),
        test_verb_overlap,
        excluded_test_verb_pairs: filtered.set.len() - used.len(),
        used: used.len(),
    };

    let mut spec_config = config.specialization.clone();
    spec_config.seed = config.seed;
    let (space, training_log, specialization) = if variant == Variant::Distributional {
        (prepared.space.clone(), Vec::new(), None)
    } else {
        stages.push("specialize");
        let out = specialize(&prepared.space, &used, &spec_config).stage("specialize")?;
        (out.store, out.log, Some(spec_config))
    };

    stages.push("extract");
    let tokens: Vec<Token> = match config.cluster_scope {
        ClusterScope::GoldVerbs => gold
            .verbs()
            .filter(|t| space.contains(t))
            .cloned()
            .collect::<BTreeSet<_>>()
            .into_iter()
            .collect(),
        ClusterScope::TargetVocabulary => {
            let mut t: Vec<Token> = space
                .tokens()
                .iter()
                .filter(|t| t.is_language(&config.gold.language))
                .cloned()
                .collect();
            t.sort();
            t
        }
    };

    stages.push("cluster");
    let mut clustering = config.clustering.clone();
    clustering.seed = config.seed;
    let outcome = cluster_tokens(&space, &tokens, &clustering).stage("cluster")?;

    stages.push("evaluate");
    let report = evaluate(&outcome.assignment, gold, Some(&space), config.denominator);

    let manifest = Manifest {
        tool_version: env!("CARGO_PKG_VERSION"),
        variant,
        seed: config.seed,
        stages,
        inputs: prepared.inputs.clone(),
        normalize: config.normalize,
        cluster_scope: config.cluster_scope,
        exclude_test_verbs: config.exclude_test_verbs,
        specialization,
        clustering,
        constraints: summary,
        vocabulary_size: space.len(),
        clustered_tokens: tokens.len(),
        num_clusters: outcome.assignment.k(),
        self_tuning: outcome.self_tuning,
        load_warnings: prepared.warnings.clone(),
    };
    Ok(ExperimentOutcome {
        report,
        assignment: outcome.assignment,
        manifest,
        training_log,
        space,
        loaded: prepared.space.clone(),
    })
}

/// Loads, specialises, clusters and evaluates as configured, writing the
/// outputs when `output_dir` is set.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentOutcome> {
    config.validate().stage("config")?;
    let prepared = prepare(config)?;
    let outcome = run_prepared(&prepared, config.variant)?;
    if let Some(dir) = &config.output_dir {
        outcome.write(&config.resolve(dir)).stage("write")?;
    }
    Ok(outcome)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonRow {
    pub variant: Variant,
    pub f1: f64,
    pub mpur: f64,
    pub wacc: f64,
    pub num_clusters: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Comparison {
    pub rows: Vec<ComparisonRow>,
}

impl Comparison {
    /// Tab-separated table, one row per variant in request order.
    pub fn to_tsv(&self) -> String {
        let mut out = String::from("variant\tf1\tmpur\twacc\tnum_clusters\n");
        for r in &self.rows {
            out.push_str(&format!(
                "{}\t{:.4}\t{:.4}\t{:.4}\t{}\n",
                r.variant, r.f1, r.mpur, r.wacc, r.num_clusters
            ));
        }
        out
    }

    pub fn f1_of(&self, variant: Variant) -> Option<f64> {
        self.rows.iter().find(|r| r.variant == variant).map(|r| r.f1)
    }
}

/// Runs each variant on the same inputs and seed.
///
/// Variants run on separate threads; each writes into `<output_dir>/<variant>/`
/// when an output directory is configured.
pub fn compare_variants(config: &ExperimentConfig, variants: &[Variant]) -> Result<Comparison> {
    let mut seen = BTreeSet::new();
    if let Some(dup) = variants.iter().find(|v| !seen.insert(**v)) {
        return Err(Error::InvalidConfig(format!("variant {dup} listed twice")));
    }
    for v in variants {
        config.validate_for(*v).stage("config")?;
    }
    let prepared = prepare(config)?;
    let outcomes: Vec<Result<ExperimentOutcome>> = std::thread::scope(|scope| {
        let handles: Vec<_> = variants
            .iter()
            .map(|&v| {
                let prepared = &prepared;
                scope.spawn(move || run_prepared(prepared, v))
            })
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("variant thread panicked"))
            .collect()
    });
    let mut rows = Vec::with_capacity(variants.len());
    for (variant, outcome) in variants.iter().zip(outcomes) {
        let outcome = outcome?;
        if let Some(dir) = &config.output_dir {
            outcome
                .write(&config.resolve(dir).join(variant.as_str()))
                .stage("write")?;
        }
        rows.push(ComparisonRow {
            variant: *variant,
            f1: outcome.report.f1,
            mpur: outcome.report.mpur,
            wacc: outcome.report.wacc,
            num_clusters: outcome.assignment.k(),
        });
    }
    Ok(Comparison { rows })
}
