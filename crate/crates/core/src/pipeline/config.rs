use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::clustering::ClusteringConfig;
use crate::constraints::Provenance;
use crate::embedding::LanguageTag;
use crate::error::{Error, Result};
use crate::evaluation::Denominator;
use crate::specializer::SpecializationConfig;

/// Which constraint sets feed the specialiser.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// No specialisation; cluster the input vectors.
    Distributional,
    /// Target-language synonym pairs only.
    MonoSyn,
    /// Cross-lingual translation pairs only.
    Xling,
    /// Translation pairs plus source verb-class pairs.
    XlingVerbnet,
}

impl Variant {
    pub const ALL: [Variant; 4] = [
        Variant::Distributional,
        Variant::MonoSyn,
        Variant::Xling,
        Variant::XlingVerbnet,
    ];

    pub fn provenances(self) -> &'static [Provenance] {
        match self {
            Variant::Distributional => &[],
            Variant::MonoSyn => &[Provenance::MonoSyn],
            Variant::Xling => &[Provenance::CrossLingual],
            Variant::XlingVerbnet => &[Provenance::CrossLingual, Provenance::Verbnet],
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Variant::Distributional => "distributional",
            Variant::MonoSyn => "mono_syn",
            Variant::Xling => "xling",
            Variant::XlingVerbnet => "xling_verbnet",
        }
    }
}

impl fmt::Display for Variant {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for Variant {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Variant::ALL
            .into_iter()
            .find(|v| v.as_str() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown variant {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VectorInput {
    pub path: PathBuf,
    pub language: LanguageTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LexiconInput {
    pub path: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DictionaryInput {
    pub path: PathBuf,
    pub source: LanguageTag,
    pub target: LanguageTag,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynonymInput {
    pub path: PathBuf,
    pub language: LanguageTag,
}

/// Which target tokens are clustered.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ClusterScope {
    /// Gold verbs present in the target vocabulary.
    #[default]
    GoldVerbs,
    /// Every token of the gold language.
    TargetVocabulary,
}

/// Everything needed to run one experiment. Read from TOML; relative paths
/// resolve against the config file's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub source: VectorInput,
    pub targets: Vec<VectorInput>,
    #[serde(default)]
    pub lexicon: Option<LexiconInput>,
    #[serde(default)]
    pub dictionaries: Vec<DictionaryInput>,
    #[serde(default)]
    pub synonyms: Vec<SynonymInput>,
    pub gold: VectorInput,
    pub variant: Variant,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
    /// Unit-normalise every loaded vector before anything else.
    #[serde(default = "default_true")]
    pub normalize: bool,
    #[serde(default)]
    pub cluster_scope: ClusterScope,
    /// Drop constraints that mention a gold test verb.
    #[serde(default)]
    pub exclude_test_verbs: bool,
    #[serde(default)]
    pub denominator: Denominator,
    #[serde(default)]
    pub specialization: SpecializationConfig,
    #[serde(default)]
    pub clustering: ClusteringConfig,
    #[serde(skip)]
    pub base_dir: PathBuf,
}

fn default_true() -> bool {
    true
}

impl ExperimentConfig {
    pub fn from_toml(text: &str, base_dir: impl Into<PathBuf>) -> Result<Self> {
        let mut config: ExperimentConfig = toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        config.base_dir = base_dir.into();
        Ok(config)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::from_toml(&text, base)
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    pub fn resolve(&self, path: &Path) -> PathBuf {
        if path.is_absolute() {
            path.to_path_buf()
        } else {
            self.base_dir.join(path)
        }
    }

    /// Checks that the variant's resources are configured and languages line up.
    pub fn validate(&self) -> Result<()> {
        self.validate_for(self.variant)
    }

    pub fn validate_for(&self, variant: Variant) -> Result<()> {
        let need = |ok: bool, what: &str| {
            if ok {
                Ok(())
            } else {
                Err(Error::InvalidConfig(format!("variant {variant} requires {what}")))
            }
        };
        match variant {
            Variant::Distributional => {}
            Variant::MonoSyn => need(!self.synonyms.is_empty(), "a synonym file")?,
            Variant::Xling => need(!self.dictionaries.is_empty(), "a dictionary")?,
            Variant::XlingVerbnet => {
                need(!self.dictionaries.is_empty(), "a dictionary")?;
                need(self.lexicon.is_some(), "a verb-class lexicon")?;
            }
        }
        if self.targets.is_empty() {
            return Err(Error::InvalidConfig(
                "at least one target vector file is required".into(),
            ));
        }
        let languages: Vec<&LanguageTag> = std::iter::once(&self.source.language)
            .chain(self.targets.iter().map(|t| &t.language))
            .collect();
        if !languages.contains(&&self.gold.language) {
            return Err(Error::InvalidConfig(format!(
                "gold language {} has no vector file",
                self.gold.language
            )));
        }
        for d in &self.dictionaries {
            if !languages.contains(&&d.source) || !languages.contains(&&d.target) {
                return Err(Error::InvalidConfig(format!(
                    "dictionary {} links languages without vectors",
                    d.path.display()
                )));
            }
        }
        self.specialization.validate()?;
        self.clustering.validate()
    }
}
