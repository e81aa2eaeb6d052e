use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use verb_transfer::clustering::ClusterAssignment;
use verb_transfer::embedding::{load_word_vectors, LanguageTag};
use verb_transfer::evaluation::{evaluate, Denominator, GoldStandard};
use verb_transfer::pipeline::{
    compare_variants, run_experiment, run_synthetic, ExperimentConfig, SyntheticSpec, Variant, HIGH_NOISE,
};
use verb_transfer::specializer::SpecializationConfig;
use verb_transfer::{Error, Result};

#[derive(Parser)]
#[command(version, about = "Cross-lingual verb class induction")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run one experiment from a TOML config.
    Run {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        variant: Option<Variant>,
    },
    /// Generate a synthetic two-language experiment.
    Synth(SynthArgs),
    /// Run several variants on the same inputs and print an F1 table.
    Compare {
        #[command(flatten)]
        common: Common,
        /// Comma-separated variants, in output order. Defaults to every
        /// variant whose resources are configured.
        #[arg(long, value_delimiter = ',')]
        variants: Vec<Variant>,
    },
    /// Score an existing clusters.tsv against a gold file.
    Eval {
        #[arg(long)]
        clusters: PathBuf,
        #[arg(long)]
        gold: PathBuf,
        #[arg(long, default_value = "fr")]
        language: LanguageTag,
        /// Target vectors, used only to report coverage.
        #[arg(long)]
        vectors: Option<PathBuf>,
        #[arg(long)]
        clustered_only: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct Common {
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    out: Option<PathBuf>,
    /// Flat key-value file of specialisation options.
    #[arg(long)]
    spec_config: Option<PathBuf>,
    /// Override one specialisation option, e.g. `--set epochs=10`.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    overrides: Vec<String>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long)]
    out: PathBuf,
    #[arg(long, default_value_t = 5)]
    num_classes: usize,
    #[arg(long, default_value_t = 12)]
    verbs_per_class: usize,
    #[arg(long, default_value_t = 300)]
    dimension: usize,
    #[arg(long, default_value_t = 0.3)]
    tightness: f64,
    #[arg(long, default_value_t = HIGH_NOISE)]
    noise: f64,
    #[arg(long, default_value_t = 1.0)]
    coverage: f64,
    #[arg(long, default_value_t = 20)]
    distractors: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

fn absolute(path: &Path) -> Result<PathBuf> {
    std::env::current_dir()
        .map(|cwd| cwd.join(path))
        .map_err(|e| Error::io(".", e))
}

impl Common {
    fn load(&self) -> Result<ExperimentConfig> {
        let mut config = ExperimentConfig::load(&self.config).map_err(|e| e.in_stage("config"))?;
        if let Some(seed) = self.seed {
            config.seed = seed;
        }
        if let Some(out) = &self.out {
            config.output_dir = Some(absolute(out)?);
        }
        if let Some(path) = &self.spec_config {
            let mut spec = SpecializationConfig::from_kv_file(path).map_err(|e| e.in_stage("config"))?;
            spec.seed = config.seed;
            config.specialization = spec;
        }
        for kv in &self.overrides {
            let (key, value) = kv
                .split_once('=')
                .ok_or_else(|| Error::InvalidConfig(format!("expected KEY=VALUE, got {kv:?}")).in_stage("config"))?;
            config
                .specialization
                .set(key.trim(), value.trim())
                .map_err(|e| e.in_stage("config"))?;
        }
        Ok(config)
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run { common, variant } => {
            let mut config = common.load()?;
            if let Some(v) = variant {
                config.variant = v;
            }
            let outcome = run_experiment(&config)?;
            println!("{}", outcome.report.to_json()?);
        }
        Command::Synth(a) => {
            let spec = SyntheticSpec {
                num_classes: a.num_classes,
                verbs_per_class: a.verbs_per_class,
                dimension: a.dimension,
                tightness: a.tightness,
                noise: a.noise,
                coverage: a.coverage,
                distractors: a.distractors,
                seed: a.seed,
            };
            let exp = run_synthetic(&spec, &a.out).map_err(|e| e.in_stage("synth"))?;
            println!("{}", exp.dir.join("config.toml").display());
        }
        Command::Compare { common, variants } => {
            let config = common.load()?;
            let variants = if variants.is_empty() {
                Variant::ALL
                    .into_iter()
                    .filter(|v| config.validate_for(*v).is_ok())
                    .collect()
            } else {
                variants
            };
            print!("{}", compare_variants(&config, &variants)?.to_tsv());
        }
        Command::Eval {
            clusters,
            gold,
            language,
            vectors,
            clustered_only,
            out,
        } => {
            let assignment = ClusterAssignment::read_tsv(&clusters).map_err(|e| e.in_stage("load"))?;
            let gold = GoldStandard::load(&gold, &language).map_err(|e| e.in_stage("load"))?;
            let store = match vectors {
                Some(p) => Some(load_word_vectors(&p, &language).map_err(|e| e.in_stage("load"))?.store),
                None => None,
            };
            let mode = if clustered_only {
                Denominator::Clustered
            } else {
                Denominator::AllGold
            };
            let json = evaluate(&assignment, &gold, store.as_ref(), mode).to_json()?;
            match out {
                Some(p) => std::fs::write(&p, json + "\n").map_err(|e| Error::io(&p, e))?,
                None => println!("{json}"),
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
