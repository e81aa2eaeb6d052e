//! Scoring induced verb clusters against a gold standard.
//!
//! Modified purity credits each induced cluster with the size of its largest
//! overlap with a gold class, ignoring clusters whose best overlap is a single
//! verb. Weighted class accuracy credits each gold class with its largest
//! overlap with an induced cluster. Both divide by the number of gold verbs.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::path::Path;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::clustering::ClusterAssignment;
use crate::constraints::read_class_lines;
use crate::embedding::{cosine, LanguageTag, Token, WordVectorStore};
use crate::error::{Error, Result};

/// Gold verb classes; every verb belongs to exactly one class.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GoldStandard {
    classes: BTreeMap<String, BTreeSet<Token>>,
    class_of: HashMap<Token, String>,
}

impl GoldStandard {
    pub fn new<I, M>(classes: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, M)>,
        M: IntoIterator<Item = Token>,
    {
        let mut gold = GoldStandard {
            classes: BTreeMap::new(),
            class_of: HashMap::new(),
        };
        for (id, members) in classes {
            for t in members {
                gold.add(&id, t)?;
            }
        }
        if gold.classes.is_empty() {
            return Err(Error::Evaluation("empty gold standard".into()));
        }
        Ok(gold)
    }

    fn add(&mut self, class: &str, verb: Token) -> Result<()> {
        match self.class_of.get(&verb) {
            Some(existing) if existing == class => Ok(()),
            Some(existing) => Err(Error::Evaluation(format!(
                "verb {verb} appears in gold classes {existing} and {class}"
            ))),
            None => {
                self.class_of.insert(verb.clone(), class.to_owned());
                self.classes.entry(class.to_owned()).or_default().insert(verb);
                Ok(())
            }
        }
    }

    /// Reads `class_id<TAB>verb1 verb2 ...` lines, tagging verbs with `language`.
    pub fn load(path: impl AsRef<Path>, language: &LanguageTag) -> Result<Self> {
        let path = path.as_ref();
        let mut gold = GoldStandard {
            classes: BTreeMap::new(),
            class_of: HashMap::new(),
        };
        for (lineno, class, members) in read_class_lines(path)? {
            if members.is_empty() {
                return Err(Error::parse(path, lineno, format!("class {class:?} has no members")));
            }
            for m in members {
                let t = Token::new(language, &m).map_err(|e| Error::parse(path, lineno, e.to_string()))?;
                gold.add(&class, t)
                    .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
            }
        }
        if gold.classes.is_empty() {
            return Err(Error::parse(path, 1, "empty gold standard"));
        }
        Ok(gold)
    }

    pub fn classes(&self) -> &BTreeMap<String, BTreeSet<Token>> {
        &self.classes
    }

    pub fn class_of(&self, verb: &Token) -> Option<&str> {
        self.class_of.get(verb).map(String::as_str)
    }

    pub fn num_test_verbs(&self) -> usize {
        self.class_of.len()
    }

    /// All gold verbs in class then token order.
    pub fn verbs(&self) -> impl Iterator<Item = &Token> {
        self.classes.values().flatten()
    }
}

/// What the metric denominators count.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Denominator {
    /// Every gold verb, clustered or not.
    #[default]
    AllGold,
    /// Only gold verbs present in the assignment.
    Clustered,
}

/// Contingency between induced clusters and gold classes, over gold verbs only.
struct Overlap {
    /// cluster index -> gold class -> count
    table: Vec<BTreeMap<String, usize>>,
    clustered_gold: usize,
    skipped: Vec<Token>,
}

fn overlap(assignment: &ClusterAssignment, gold: &GoldStandard) -> Overlap {
    let mut table = vec![BTreeMap::new(); assignment.k()];
    let mut clustered_gold = 0;
    let mut skipped = Vec::new();
    for (token, label) in assignment.iter() {
        match gold.class_of(token) {
            Some(class) => {
                *table[label].entry(class.to_owned()).or_insert(0) += 1;
                clustered_gold += 1;
            }
            None => skipped.push(token.clone()),
        }
    }
    if !skipped.is_empty() {
        warn!(
            "{} clustered tokens are not in the gold standard and are ignored",
            skipped.len()
        );
    }
    Overlap {
        table,
        clustered_gold,
        skipped,
    }
}

fn denominator(gold: &GoldStandard, ov: &Overlap, mode: Denominator) -> usize {
    match mode {
        Denominator::AllGold => gold.num_test_verbs(),
        Denominator::Clustered => ov.clustered_gold,
    }
}

fn ratio(num: usize, den: usize) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn purity_numerator(ov: &Overlap) -> usize {
    ov.table
        .iter()
        .map(|row| row.values().copied().max().unwrap_or(0))
        .filter(|&prev| prev > 1)
        .sum()
}

fn accuracy_numerator(ov: &Overlap, gold: &GoldStandard) -> usize {
    gold.classes
        .keys()
        .map(|class| {
            ov.table
                .iter()
                .filter_map(|row| row.get(class))
                .copied()
                .max()
                .unwrap_or(0)
        })
        .sum()
}

/// Modified purity with all gold verbs in the denominator.
pub fn modified_purity(assignment: &ClusterAssignment, gold: &GoldStandard) -> f64 {
    modified_purity_with(assignment, gold, Denominator::AllGold)
}

pub fn modified_purity_with(assignment: &ClusterAssignment, gold: &GoldStandard, mode: Denominator) -> f64 {
    let ov = overlap(assignment, gold);
    ratio(purity_numerator(&ov), denominator(gold, &ov, mode))
}

/// Weighted class accuracy with all gold verbs in the denominator.
pub fn weighted_class_accuracy(assignment: &ClusterAssignment, gold: &GoldStandard) -> f64 {
    weighted_class_accuracy_with(assignment, gold, Denominator::AllGold)
}

pub fn weighted_class_accuracy_with(assignment: &ClusterAssignment, gold: &GoldStandard, mode: Denominator) -> f64 {
    let ov = overlap(assignment, gold);
    ratio(accuracy_numerator(&ov, gold), denominator(gold, &ov, mode))
}

/// Balanced harmonic mean of purity and accuracy; 0 when both are 0.
pub fn f1(mpur: f64, wacc: f64) -> f64 {
    if mpur + wacc == 0.0 {
        0.0
    } else {
        2.0 * mpur * wacc / (mpur + wacc)
    }
}

/// Fraction of gold verbs present in `store`.
pub fn coverage(gold: &GoldStandard, store: &WordVectorStore) -> f64 {
    let present = gold.verbs().filter(|v| store.contains(v)).count();
    ratio(present, gold.num_test_verbs())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Scores {
    pub mpur: f64,
    pub wacc: f64,
    pub f1: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClusterBreakdown {
    pub cluster: usize,
    pub size: usize,
    /// Largest overlap with a gold class.
    pub n_prev: usize,
    /// Every gold class attaining `n_prev`.
    pub prevalent_classes: Vec<String>,
    /// Whether the cluster is credited in modified purity.
    pub counted: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ClassBreakdown {
    pub class: String,
    pub size: usize,
    /// Largest overlap with an induced cluster.
    pub n_dom: usize,
    pub dominant_clusters: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EvalReport {
    pub mpur: f64,
    pub wacc: f64,
    pub f1: f64,
    pub coverage: f64,
    pub num_clusters: usize,
    pub num_test_verbs: usize,
    pub num_clustered_test_verbs: usize,
    pub denominator: Denominator,
    /// Same scores with only clustered gold verbs in the denominator.
    pub clustered_denominator: Scores,
    pub per_cluster: Vec<ClusterBreakdown>,
    pub per_class: Vec<ClassBreakdown>,
    pub empty_clusters: Vec<usize>,
    pub skipped_tokens: Vec<Token>,
}

impl EvalReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

/// Full report; `store` supplies coverage, or the assignment is used when absent.
pub fn evaluate(
    assignment: &ClusterAssignment,
    gold: &GoldStandard,
    store: Option<&WordVectorStore>,
    mode: Denominator,
) -> EvalReport {
    let ov = overlap(assignment, gold);
    let pur = purity_numerator(&ov);
    let acc = accuracy_numerator(&ov, gold);
    let den = denominator(gold, &ov, mode);
    let (mpur, wacc) = (ratio(pur, den), ratio(acc, den));
    let (cp, ca) = (ratio(pur, ov.clustered_gold), ratio(acc, ov.clustered_gold));

    let clusters = assignment.clusters();
    let per_cluster = ov
        .table
        .iter()
        .enumerate()
        .map(|(c, row)| {
            let n_prev = row.values().copied().max().unwrap_or(0);
            ClusterBreakdown {
                cluster: c,
                size: clusters[c].len(),
                n_prev,
                prevalent_classes: row
                    .iter()
                    .filter(|(_, &n)| n == n_prev && n > 0)
                    .map(|(k, _)| k.clone())
                    .collect(),
                counted: n_prev > 1,
            }
        })
        .collect();
    let per_class = gold
        .classes
        .iter()
        .map(|(class, members)| {
            let counts: Vec<usize> = ov
                .table
                .iter()
                .map(|row| row.get(class).copied().unwrap_or(0))
                .collect();
            let n_dom = counts.iter().copied().max().unwrap_or(0);
            ClassBreakdown {
                class: class.clone(),
                size: members.len(),
                n_dom,
                dominant_clusters: counts
                    .iter()
                    .enumerate()
                    .filter(|(_, &n)| n == n_dom && n > 0)
                    .map(|(c, _)| c)
                    .collect(),
            }
        })
        .collect();
    let cov = match store {
        Some(s) => coverage(gold, s),
        None => ratio(ov.clustered_gold, gold.num_test_verbs()),
    };
    EvalReport {
        mpur,
        wacc,
        f1: f1(mpur, wacc),
        coverage: cov,
        num_clusters: assignment.k(),
        num_test_verbs: gold.num_test_verbs(),
        num_clustered_test_verbs: ov.clustered_gold,
        denominator: mode,
        clustered_denominator: Scores {
            mpur: cp,
            wacc: ca,
            f1: f1(cp, ca),
        },
        per_cluster,
        per_class,
        empty_clusters: assignment.empty_clusters(),
        skipped_tokens: ov.skipped,
    }
}

/// Similarity-benchmark pair with a human score.
#[derive(Debug, Clone, PartialEq)]
pub struct ScoredPair {
    pub left: Token,
    pub right: Token,
    pub score: f64,
}

/// Reads `word1<TAB>word2<TAB>score` lines, tagging both words with `language`.
pub fn load_similarity_dataset(path: impl AsRef<Path>, language: &LanguageTag) -> Result<Vec<ScoredPair>> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        let [a, b, s] = fields.as_slice() else {
            return Err(Error::parse(path, i + 1, "expected word1<TAB>word2<TAB>score"));
        };
        let score: f64 = s
            .trim()
            .parse()
            .map_err(|_| Error::parse(path, i + 1, format!("bad score {s:?}")))?;
        let tok = |w: &str| Token::new(language, w.trim()).map_err(|e| Error::parse(path, i + 1, e.to_string()));
        out.push(ScoredPair {
            left: tok(a)?,
            right: tok(b)?,
            score,
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpearmanResult {
    pub rho: f64,
    pub scored_pairs: usize,
    pub skipped_pairs: usize,
}

/// Ranks with ties sharing their average rank (1-based).
pub fn average_ranks(values: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..values.len()).collect();
    order.sort_by(|&a, &b| values[a].total_cmp(&values[b]));
    let mut ranks = vec![0.0; values.len()];
    let mut i = 0;
    while i < order.len() {
        let mut j = i;
        while j + 1 < order.len() && values[order[j + 1]] == values[order[i]] {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for &o in &order[i..=j] {
            ranks[o] = avg;
        }
        i = j + 1;
    }
    ranks
}

fn pearson(x: &[f64], y: &[f64]) -> Option<f64> {
    let n = x.len() as f64;
    let (mx, my) = (x.iter().sum::<f64>() / n, y.iter().sum::<f64>() / n);
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        sxy += (a - mx) * (b - my);
        sxx += (a - mx) * (a - mx);
        syy += (b - my) * (b - my);
    }
    (sxx > 0.0 && syy > 0.0).then(|| sxy / (sxx * syy).sqrt())
}

/// Spearman correlation between cosine similarities in `store` and human scores.
pub fn spearman_similarity(store: &WordVectorStore, pairs: &[ScoredPair]) -> Result<SpearmanResult> {
    let mut model = Vec::new();
    let mut human = Vec::new();
    let mut skipped = 0;
    for p in pairs {
        match (store.get(&p.left), store.get(&p.right)) {
            (Some(a), Some(b)) => {
                model.push(cosine(a, b));
                human.push(p.score);
            }
            _ => skipped += 1,
        }
    }
    if model.len() < 2 {
        return Err(Error::Evaluation(format!(
            "need at least 2 scorable pairs, got {} ({skipped} skipped)",
            model.len()
        )));
    }
    let rho = pearson(&average_ranks(&model), &average_ranks(&human))
        .ok_or_else(|| Error::Evaluation("correlation undefined for constant scores".into()))?;
    Ok(SpearmanResult {
        rho,
        scored_pairs: model.len(),
        skipped_pairs: skipped,
    })
}
