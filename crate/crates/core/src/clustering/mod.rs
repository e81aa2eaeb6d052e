//! Verb clustering: local-scaling affinities, multiway normalised-cut spectral
//! clustering with self-tuned cluster count, and K-means / Ward baselines.

mod affinity;
mod kmeans;
mod self_tuning;
mod spectral;
mod ward;

use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::embedding::{Token, WordVectorStore};
use crate::error::{Error, Result};

pub use affinity::{affinity_from_points, build_affinity, AffinityMatrix};
pub use kmeans::{kmeans, KMeansResult};
pub use self_tuning::{estimate_num_clusters, rotation_cost, SelfTuning, INFORMATIVE_EIGENVALUE, NEAR_OPTIMAL_SLACK};
pub use spectral::{mncut_spectral_cluster, spectral_embedding};
pub use ward::ward_agglomerative;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Algorithm {
    MncutSpectral,
    Kmeans,
    Ward,
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::MncutSpectral => "mncut_spectral",
            Algorithm::Kmeans => "kmeans",
            Algorithm::Ward => "ward",
        })
    }
}

impl std::str::FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mncut_spectral" | "spectral" | "mncut" => Ok(Algorithm::MncutSpectral),
            "kmeans" => Ok(Algorithm::Kmeans),
            "ward" => Ok(Algorithm::Ward),
            _ => Err(Error::InvalidConfig(format!("unknown clustering algorithm {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct ClusteringConfig {
    pub algorithm: Algorithm,
    /// Fixed number of clusters; estimated with the rotation criterion when absent.
    pub k: Option<usize>,
    pub k_max: usize,
    pub local_scale_neighbor: usize,
    pub kmeans_restarts: usize,
    pub kmeans_max_iter: usize,
    /// Iteration cap of the Givens-angle descent.
    pub rotation_max_iter: usize,
    pub rotation_tolerance: f64,
    pub seed: u64,
}

impl Default for ClusteringConfig {
    fn default() -> Self {
        ClusteringConfig {
            algorithm: Algorithm::MncutSpectral,
            k: None,
            k_max: 20,
            local_scale_neighbor: 7,
            kmeans_restarts: 10,
            kmeans_max_iter: 300,
            rotation_max_iter: 200,
            rotation_tolerance: 1e-6,
            seed: 0,
        }
    }
}

impl ClusteringConfig {
    pub fn validate(&self) -> Result<()> {
        if self.k_max < 2 {
            return Err(Error::InvalidConfig("k-max must be at least 2".into()));
        }
        if self.k == Some(0) {
            return Err(Error::InvalidConfig("k must be positive".into()));
        }
        if self.local_scale_neighbor == 0 || self.kmeans_restarts == 0 {
            return Err(Error::InvalidConfig(
                "local-scale-neighbor and kmeans-restarts must be positive".into(),
            ));
        }
        Ok(())
    }

    pub(crate) fn rng(&self, stream: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(stream);
        rng
    }
}

/// Cluster index of every clustered token.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterAssignment {
    tokens: Vec<Token>,
    labels: Vec<usize>,
    k: usize,
}

impl ClusterAssignment {
    pub fn new(tokens: Vec<Token>, labels: Vec<usize>, k: usize) -> Result<Self> {
        if tokens.len() != labels.len() {
            return Err(Error::Clustering(format!(
                "{} tokens but {} labels",
                tokens.len(),
                labels.len()
            )));
        }
        if let Some(bad) = labels.iter().find(|&&l| l >= k) {
            return Err(Error::Clustering(format!("label {bad} out of range for k={k}")));
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(dup) = tokens.iter().find(|t| !seen.insert(*t)) {
            return Err(Error::DuplicateToken(dup.to_string()));
        }
        Ok(ClusterAssignment { tokens, labels, k })
    }

    pub fn tokens(&self) -> &[Token] {
        &self.tokens
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn len(&self) -> usize {
        self.tokens.len()
    }

    pub fn is_empty(&self) -> bool {
        self.tokens.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&Token, usize)> {
        self.tokens.iter().zip(self.labels.iter().copied())
    }

    /// Members of each cluster index, including empty ones.
    pub fn clusters(&self) -> Vec<Vec<&Token>> {
        let mut out = vec![Vec::new(); self.k];
        for (t, l) in self.iter() {
            out[l].push(t);
        }
        out
    }

    pub fn empty_clusters(&self) -> Vec<usize> {
        self.clusters()
            .iter()
            .enumerate()
            .filter(|(_, c)| c.is_empty())
            .map(|(i, _)| i)
            .collect()
    }

    /// Writes `token<TAB>index` lines after `#` header comments.
    pub fn write_tsv(&self, path: impl AsRef<Path>, header: &[(&str, String)]) -> Result<()> {
        let path = path.as_ref();
        let mut out = String::new();
        for (key, value) in header {
            out.push_str(&format!("# {key}={value}\n"));
        }
        for (t, l) in self.iter() {
            out.push_str(&format!("{t}\t{l}\n"));
        }
        fs::write(path, out).map_err(|e| Error::io(path, e))
    }

    /// Reads a cluster file; `k` comes from a `# k=` header or the largest index.
    pub fn read_tsv(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut tokens = Vec::new();
        let mut labels = Vec::new();
        let mut declared_k = None;
        for (i, line) in text.lines().enumerate() {
            if let Some(comment) = line.strip_prefix('#') {
                if let Some(k) = comment.trim().strip_prefix("k=") {
                    declared_k = k.trim().parse::<usize>().ok();
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let (token, label) = line
                .split_once('\t')
                .ok_or_else(|| Error::parse(path, i + 1, "expected token<TAB>cluster_index"))?;
            tokens.push(Token::parse(token.trim()).map_err(|e| Error::parse(path, i + 1, e.to_string()))?);
            labels.push(
                label
                    .trim()
                    .parse::<usize>()
                    .map_err(|_| Error::parse(path, i + 1, format!("bad cluster index {label:?}")))?,
            );
        }
        let k = declared_k.unwrap_or_else(|| labels.iter().max().map_or(0, |m| m + 1));
        ClusterAssignment::new(tokens, labels, k)
    }
}

/// Relabels so that clusters are numbered by first appearance; empty indices come last.
pub fn canonical_labels(labels: &[usize], k: usize) -> Vec<usize> {
    let mut map: BTreeMap<usize, usize> = BTreeMap::new();
    for &l in labels {
        let next = map.len();
        map.entry(l).or_insert(next);
    }
    debug_assert!(map.len() <= k.max(map.len()));
    labels.iter().map(|l| map[l]).collect()
}

/// Outcome of clustering a token list.
#[derive(Debug, Clone)]
pub struct ClusterOutcome {
    pub assignment: ClusterAssignment,
    /// Rotation-criterion result when the cluster count was estimated.
    pub self_tuning: Option<SelfTuning>,
}

/// Clusters `tokens` (rows of `store`) with the configured algorithm.
pub fn cluster_tokens(store: &WordVectorStore, tokens: &[Token], config: &ClusteringConfig) -> Result<ClusterOutcome> {
    config.validate()?;
    if tokens.len() < 2 {
        return Err(Error::Clustering(format!(
            "need at least 2 tokens to cluster, got {}",
            tokens.len()
        )));
    }
    let affinity = build_affinity(store, tokens, config.local_scale_neighbor)?;
    let (k, self_tuning) = match config.k {
        Some(k) => (k, None),
        None => {
            let st = estimate_num_clusters(&affinity, config.k_max, config)?;
            (st.k, Some(st))
        }
    };
    if k > tokens.len() {
        return Err(Error::Clustering(format!("k={k} exceeds {} points", tokens.len())));
    }
    let assignment = match config.algorithm {
        Algorithm::MncutSpectral => mncut_spectral_cluster(&affinity, k, config)?,
        Algorithm::Kmeans | Algorithm::Ward => {
            let points = tokens
                .iter()
                .map(|t| {
                    store
                        .get(t)
                        .map(<[f64]>::to_vec)
                        .ok_or_else(|| Error::UnknownToken(t.to_string()))
                })
                .collect::<Result<Vec<_>>>()?;
            let labels = if config.algorithm == Algorithm::Kmeans {
                let mut rng = config.rng(1);
                kmeans(&points, k, config.kmeans_restarts, config.kmeans_max_iter, &mut rng)?.labels
            } else {
                ward_agglomerative(&points, k)?
            };
            ClusterAssignment::new(tokens.to_vec(), canonical_labels(&labels, k), k)?
        }
    };
    Ok(ClusterOutcome {
        assignment,
        self_tuning,
    })
}

pub(crate) fn squared_distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum()
}
