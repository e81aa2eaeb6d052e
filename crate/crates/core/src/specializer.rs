//! Attract-only specialisation of a joint vector space.
//!
//! Mini-batches of constraint pairs are pulled together with a margin hinge
//! against the closest in-batch word, while an L2 term keeps every touched
//! vector near its starting point. Parameters are updated with AdaGrad.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::constraints::ConstraintSet;
use crate::embedding::{dot, l2_norm, Token, WordVectorStore};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, rename_all = "kebab-case", deny_unknown_fields)]
pub struct SpecializationConfig {
    pub attract_margin: f64,
    pub reg_constant: f64,
    pub batch_size: usize,
    pub epochs: usize,
    pub learning_rate: f64,
    pub seed: u64,
    /// Use `λ‖x − x₀‖²` instead of `λ‖x − x₀‖`.
    pub squared_regulariser: bool,
    /// Rescale touched vectors to unit length after every epoch.
    pub renormalize: bool,
    pub adagrad_epsilon: f64,
}

impl Default for SpecializationConfig {
    fn default() -> Self {
        SpecializationConfig {
            attract_margin: 0.6,
            reg_constant: 1e-9,
            batch_size: 50,
            epochs: 5,
            learning_rate: 0.025,
            seed: 0,
            squared_regulariser: false,
            renormalize: true,
            adagrad_epsilon: 1e-8,
        }
    }
}

impl SpecializationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.batch_size < 2 {
            return Err(Error::InvalidConfig(format!(
                "batch size must be at least 2, got {}",
                self.batch_size
            )));
        }
        if self.epochs == 0 {
            return Err(Error::InvalidConfig("epochs must be positive".into()));
        }
        if self.learning_rate.is_nan() || self.learning_rate <= 0.0 {
            return Err(Error::InvalidConfig("learning rate must be positive".into()));
        }
        if self.reg_constant.is_nan() || self.reg_constant < 0.0 {
            return Err(Error::InvalidConfig("regularisation constant must be >= 0".into()));
        }
        if !self.attract_margin.is_finite() {
            return Err(Error::InvalidConfig("attract margin must be finite".into()));
        }
        Ok(())
    }

    /// Sets one option by its flat key name (`attract-margin`, `batch-size`, ...).
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
            value
                .parse()
                .map_err(|_| Error::InvalidConfig(format!("bad value {value:?} for {key}")))
        }
        match key {
            "attract-margin" => self.attract_margin = num(key, value)?,
            "reg-constant" => self.reg_constant = num(key, value)?,
            "batch-size" => self.batch_size = num(key, value)?,
            "epochs" => self.epochs = num(key, value)?,
            "learning-rate" => self.learning_rate = num(key, value)?,
            "seed" => self.seed = num(key, value)?,
            "squared-regulariser" => self.squared_regulariser = num(key, value)?,
            "renormalize" => self.renormalize = num(key, value)?,
            "adagrad-epsilon" => self.adagrad_epsilon = num(key, value)?,
            _ => return Err(Error::InvalidConfig(format!("unknown option {key:?}"))),
        }
        Ok(())
    }

    /// Reads `key = value` (or `key value`) lines on top of the defaults.
    pub fn from_kv_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut config = SpecializationConfig::default();
        for (i, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .or_else(|| line.split_once(char::is_whitespace))
                .ok_or_else(|| Error::parse(path, i + 1, "expected key = value"))?;
            config
                .set(key.trim(), value.trim())
                .map_err(|e| Error::parse(path, i + 1, e.to_string()))?;
        }
        config.validate()?;
        Ok(config)
    }
}

/// One oriented constraint inside a batch.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OrientedPair {
    pub left: Token,
    pub right: Token,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Batch {
    pub pairs: Vec<OrientedPair>,
}

impl Batch {
    pub fn new(pairs: Vec<(Token, Token)>) -> Self {
        Batch {
            pairs: pairs
                .into_iter()
                .map(|(left, right)| OrientedPair { left, right })
                .collect(),
        }
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Distinct words of the batch, in token order.
    pub fn vocabulary(&self) -> BTreeSet<&Token> {
        self.pairs.iter().flat_map(|p| [&p.left, &p.right]).collect()
    }
}

/// In-batch negatives for each pair slot: `(t_left, t_right)`.
///
/// `None` means no candidate existed and the corresponding hinge term is dropped.
pub type Negatives = Vec<(Option<Token>, Option<Token>)>;

/// Per-token gradients, ordered by token.
pub type Gradients = BTreeMap<Token, Vec<f64>>;

/// Randomly oriented, shuffled constraint pairs cut into batches of at most `k`.
pub fn make_batches<R: Rng + ?Sized>(set: &ConstraintSet, k: usize, rng: &mut R) -> Result<Vec<Batch>> {
    if k < 2 {
        return Err(Error::InvalidConfig(format!("batch size must be at least 2, got {k}")));
    }
    let mut oriented: Vec<OrientedPair> = set
        .pairs()
        .map(|p| {
            let (l, r) = if rng.gen::<bool>() {
                (p.left(), p.right())
            } else {
                (p.right(), p.left())
            };
            OrientedPair {
                left: l.clone(),
                right: r.clone(),
            }
        })
        .collect();
    oriented.shuffle(rng);
    Ok(oriented.chunks(k).map(|c| Batch { pairs: c.to_vec() }).collect())
}

/// Row indices of a batch's words and of each pair.
struct Resolved {
    words: Vec<usize>,
    slots: Vec<(usize, usize)>,
}

fn resolve(batch: &Batch, store: &WordVectorStore) -> Result<Resolved> {
    let lookup = |t: &Token| store.index_of(t).ok_or_else(|| Error::UnknownToken(t.to_string()));
    let words = batch.vocabulary().into_iter().map(lookup).collect::<Result<Vec<_>>>()?;
    let slots = batch
        .pairs
        .iter()
        .map(|p| Ok((lookup(&p.left)?, lookup(&p.right)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(Resolved { words, slots })
}

/// Picks, for each word of each pair, the closest other in-batch word by dot product.
///
/// The word itself and its partner are excluded. Equal scores go to the
/// smaller token.
pub fn select_negatives(batch: &Batch, store: &WordVectorStore) -> Result<Negatives> {
    let resolved = resolve(batch, store)?;
    let tokens = store.tokens();
    // words are already in token order, so the first maximum wins ties
    let closest = |x: usize, partner: usize| -> Option<Token> {
        let xv = store.row(x);
        let mut best: Option<(usize, f64)> = None;
        for &w in &resolved.words {
            if w == x || w == partner {
                continue;
            }
            let s = dot(xv, store.row(w));
            if best.is_none_or(|(_, b)| s > b) {
                best = Some((w, s));
            }
        }
        best.map(|(w, _)| tokens[w].clone())
    };
    Ok(resolved
        .slots
        .iter()
        .map(|&(l, r)| (closest(l, r), closest(r, l)))
        .collect())
}

fn hinge(x: f64) -> f64 {
    x.max(0.0)
}

fn resolve_negatives(negatives: &Negatives, store: &WordVectorStore) -> Result<Vec<(Option<usize>, Option<usize>)>> {
    let lookup = |t: &Option<Token>| -> Result<Option<usize>> {
        t.as_ref()
            .map(|t| store.index_of(t).ok_or_else(|| Error::UnknownToken(t.to_string())))
            .transpose()
    };
    negatives.iter().map(|(a, b)| Ok((lookup(a)?, lookup(b)?))).collect()
}

/// Sum of both hinge terms over every pair of the batch.
pub fn attract_cost(batch: &Batch, negatives: &Negatives, margin: f64, store: &WordVectorStore) -> Result<f64> {
    let resolved = resolve(batch, store)?;
    let negs = resolve_negatives(negatives, store)?;
    let mut cost = 0.0;
    for (&(l, r), &(tl, tr)) in resolved.slots.iter().zip(&negs) {
        let (xl, xr) = (store.row(l), store.row(r));
        let pos = dot(xl, xr);
        if let Some(tl) = tl {
            cost += hinge(margin + dot(xl, store.row(tl)) - pos);
        }
        if let Some(tr) = tr {
            cost += hinge(margin + dot(xr, store.row(tr)) - pos);
        }
    }
    Ok(cost)
}

/// Mutable training state: the store being specialised, its frozen starting
/// point and the AdaGrad accumulators.
#[derive(Debug, Clone)]
pub struct TrainingState {
    store: WordVectorStore,
    initial: Vec<f64>,
    accumulators: Vec<f64>,
    touched: Vec<bool>,
    pub epoch: usize,
    pub log: Vec<EpochLog>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EpochLog {
    pub epoch: usize,
    pub mean_batch_cost: f64,
    pub active_hinge_fraction: f64,
}

impl TrainingState {
    pub fn new(store: WordVectorStore) -> Self {
        let initial = store.as_slice().to_vec();
        let n = initial.len();
        let rows = store.len();
        TrainingState {
            store,
            initial,
            accumulators: vec![0.0; n],
            touched: vec![false; rows],
            epoch: 0,
            log: Vec::new(),
        }
    }

    pub fn store(&self) -> &WordVectorStore {
        &self.store
    }

    /// Mutable access to the live vectors; the initial snapshot is unaffected.
    pub fn store_mut(&mut self) -> &mut WordVectorStore {
        &mut self.store
    }

    pub fn into_store(self) -> WordVectorStore {
        self.store
    }

    pub fn initial(&self, row: usize) -> &[f64] {
        let d = self.store.dimension();
        &self.initial[row * d..(row + 1) * d]
    }

    pub fn accumulator(&self, row: usize) -> &[f64] {
        let d = self.store.dimension();
        &self.accumulators[row * d..(row + 1) * d]
    }

    fn displacement(&self, row: usize) -> Vec<f64> {
        self.store
            .row(row)
            .iter()
            .zip(self.initial(row))
            .map(|(x, x0)| x - x0)
            .collect()
    }

    /// Rescales every vector that has been updated to unit length.
    pub fn renormalize_touched(&mut self) {
        for row in 0..self.store.len() {
            if !self.touched[row] {
                continue;
            }
            let v = self.store.row_mut(row);
            let n = l2_norm(v);
            if n > 0.0 {
                v.iter_mut().for_each(|x| *x /= n);
            }
        }
    }
}

/// `λ Σ ‖x₀ − x‖` over the distinct words of the batch (squared norm when `squared`).
pub fn regularization_cost(batch: &Batch, state: &TrainingState, lambda: f64, squared: bool) -> Result<f64> {
    let resolved = resolve(batch, state.store())?;
    Ok(resolved
        .words
        .iter()
        .map(|&w| {
            let n = l2_norm(&state.displacement(w));
            lambda * if squared { n * n } else { n }
        })
        .sum())
}

/// Cost and subgradient of one batch.
#[derive(Debug, Clone)]
pub struct BatchObjective {
    pub cost: f64,
    pub attract: f64,
    pub regularization: f64,
    pub gradients: Gradients,
    pub active_hinges: usize,
    pub hinge_terms: usize,
}

/// Total batch cost with its subgradient, negatives held fixed.
///
/// Inactive hinges (argument ≤ 0) contribute nothing. For the unsquared
/// regulariser at an unmoved vector the minimum-norm subgradient of the whole
/// objective is used, so a word whose attract gradient is smaller than λ stays put.
pub fn cost_and_subgradient(
    batch: &Batch,
    negatives: &Negatives,
    config: &SpecializationConfig,
    state: &TrainingState,
) -> Result<BatchObjective> {
    let store = state.store();
    let d = store.dimension();
    let resolved = resolve(batch, store)?;
    let negs = resolve_negatives(negatives, store)?;
    let margin = config.attract_margin;

    let mut grads: BTreeMap<usize, Vec<f64>> = resolved.words.iter().map(|&w| (w, vec![0.0; d])).collect();
    let mut add = |row: usize, v: &[f64], sign: f64| {
        let g = grads.entry(row).or_insert_with(|| vec![0.0; d]);
        g.iter_mut().zip(v).for_each(|(g, v)| *g += sign * v);
    };

    let mut attract = 0.0;
    let mut active = 0;
    let mut terms = 0;
    for (&(l, r), &(tl, tr)) in resolved.slots.iter().zip(&negs) {
        let (xl, xr) = (store.row(l), store.row(r));
        let pos = dot(xl, xr);
        // term for x_l: δ + x_l·t_l − x_l·x_r
        for (x, partner, neg) in [(l, r, tl), (r, l, tr)] {
            let Some(t) = neg else { continue };
            terms += 1;
            let (xv, tv, pv) = (store.row(x), store.row(t), store.row(partner));
            let arg = margin + dot(xv, tv) - pos;
            if arg > 0.0 {
                attract += arg;
                active += 1;
                add(x, tv, 1.0);
                add(x, pv, -1.0);
                add(t, xv, 1.0);
                add(partner, xv, -1.0);
            }
        }
    }

    let lambda = config.reg_constant;
    let mut regularization = 0.0;
    for &w in &resolved.words {
        let diff = state.displacement(w);
        let norm = l2_norm(&diff);
        let g = grads.get_mut(&w).expect("batch word has a gradient slot");
        if config.squared_regulariser {
            regularization += lambda * norm * norm;
            g.iter_mut().zip(&diff).for_each(|(g, d)| *g += 2.0 * lambda * d);
        } else if norm > 0.0 {
            regularization += lambda * norm;
            g.iter_mut().zip(&diff).for_each(|(g, d)| *g += lambda * d / norm);
        } else {
            let gn = l2_norm(g);
            let scale = if gn > lambda { 1.0 - lambda / gn } else { 0.0 };
            g.iter_mut().for_each(|g| *g *= scale);
        }
    }

    let tokens = store.tokens();
    Ok(BatchObjective {
        cost: attract + regularization,
        attract,
        regularization,
        gradients: grads.into_iter().map(|(row, g)| (tokens[row].clone(), g)).collect(),
        active_hinges: active,
        hinge_terms: terms,
    })
}

/// One AdaGrad update: `G += g²; x −= lr · g / (√G + ε)` per coordinate.
pub fn adagrad_step(state: &mut TrainingState, gradients: &Gradients, learning_rate: f64, epsilon: f64) -> Result<()> {
    let d = state.store.dimension();
    for (token, g) in gradients {
        if g.len() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                got: g.len(),
            });
        }
        let row = state
            .store
            .index_of(token)
            .ok_or_else(|| Error::UnknownToken(token.to_string()))?;
        if g.iter().all(|&v| v == 0.0) {
            continue;
        }
        state.touched[row] = true;
        let acc = &mut state.accumulators[row * d..(row + 1) * d];
        let x = state.store.row_mut(row);
        for j in 0..d {
            acc[j] += g[j] * g[j];
            x[j] -= learning_rate / (acc[j].sqrt() + epsilon) * g[j];
        }
    }
    Ok(())
}

/// Output of a specialisation run.
#[derive(Debug, Clone)]
pub struct Specialized {
    pub store: WordVectorStore,
    pub log: Vec<EpochLog>,
}

impl Specialized {
    /// Training log lines: `epoch<TAB>mean_batch_cost<TAB>active_hinge_fraction`.
    pub fn log_text(&self) -> String {
        self.log
            .iter()
            .map(|e| format!("{}\t{}\t{}\n", e.epoch, e.mean_batch_cost, e.active_hinge_fraction))
            .collect()
    }
}

/// Runs the full specialisation: for every epoch, batches are drawn, negatives
/// selected, and an AdaGrad step taken per batch.
pub fn specialize(store: &WordVectorStore, set: &ConstraintSet, config: &SpecializationConfig) -> Result<Specialized> {
    config.validate()?;
    if let Some(missing) = set.vocabulary().into_iter().find(|t| !store.contains(t)) {
        return Err(Error::UnknownToken(format!(
            "{missing} (constraints must be filtered by vocabulary first)"
        )));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut state = TrainingState::new(store.clone());
    for epoch in 1..=config.epochs {
        let batches = make_batches(set, config.batch_size, &mut rng)?;
        let mut cost_sum = 0.0;
        let (mut active, mut terms) = (0usize, 0usize);
        for batch in &batches {
            let negatives = select_negatives(batch, state.store())?;
            let objective = cost_and_subgradient(batch, &negatives, config, &state)?;
            cost_sum += objective.cost;
            active += objective.active_hinges;
            terms += objective.hinge_terms;
            adagrad_step(
                &mut state,
                &objective.gradients,
                config.learning_rate,
                config.adagrad_epsilon,
            )?;
        }
        if config.renormalize {
            state.renormalize_touched();
        }
        state.epoch = epoch;
        state.log.push(EpochLog {
            epoch,
            mean_batch_cost: if batches.is_empty() {
                0.0
            } else {
                cost_sum / batches.len() as f64
            },
            active_hinge_fraction: if terms == 0 { 0.0 } else { active as f64 / terms as f64 },
        });
    }
    let log = std::mem::take(&mut state.log);
    Ok(Specialized {
        store: state.into_store(),
        log,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constraints::Provenance;

    fn tok(s: &str) -> Token {
        Token::parse(s).unwrap()
    }

    fn four_store() -> WordVectorStore {
        WordVectorStore::from_entries(
            2,
            [
                (tok("en_a"), vec![1.0, 0.0]),
                (tok("en_b"), vec![0.8, 0.6]),
                (tok("en_c"), vec![0.0, 1.0]),
                (tok("en_d"), vec![-0.6, 0.8]),
            ],
        )
        .unwrap()
    }

    fn four_batch() -> Batch {
        Batch::new(vec![(tok("en_a"), tok("en_b")), (tok("en_c"), tok("en_d"))])
    }

    fn pairs(n: usize) -> ConstraintSet {
        let mut set = ConstraintSet::new();
        for i in 0..n {
            set.add(
                tok(&format!("en_w{i}")),
                tok(&format!("fr_w{i}")),
                Provenance::CrossLingual,
            );
        }
        set
    }

    #[test]
    fn batches_are_sliced() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let b = make_batches(&pairs(120), 50, &mut rng).unwrap();
        assert_eq!(b.iter().map(Batch::len).collect::<Vec<_>>(), vec![50, 50, 20]);
        let one = make_batches(&pairs(1), 50, &mut rng).unwrap();
        assert_eq!(one.len(), 1);
        assert_eq!(one[0].len(), 1);
        assert!(make_batches(&ConstraintSet::new(), 50, &mut rng).unwrap().is_empty());
        assert!(make_batches(&pairs(3), 1, &mut rng).is_err());
    }

    #[test]
    fn batches_deterministic_per_seed() {
        let set = pairs(37);
        let a = make_batches(&set, 8, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        let b = make_batches(&set, 8, &mut ChaCha8Rng::seed_from_u64(9)).unwrap();
        assert_eq!(a, b);
        let c = make_batches(&set, 8, &mut ChaCha8Rng::seed_from_u64(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn negatives_by_enumeration() {
        let negs = select_negatives(&four_batch(), &four_store()).unwrap();
        assert_eq!(negs[0], (Some(tok("en_c")), Some(tok("en_c"))));
        // c: c·a = 0, c·b = 0.6 -> b; d: d·a = -0.6, d·b = 0 -> b
        assert_eq!(negs[1], (Some(tok("en_b")), Some(tok("en_b"))));
    }

    #[test]
    fn single_pair_has_no_negatives() {
        let batch = Batch::new(vec![(tok("en_a"), tok("en_b"))]);
        let store = four_store();
        let negs = select_negatives(&batch, &store).unwrap();
        assert_eq!(negs, vec![(None, None)]);
        assert_eq!(attract_cost(&batch, &negs, 0.6, &store).unwrap(), 0.0);
    }

    #[test]
    fn negative_ties_go_to_smaller_token() {
        let store = WordVectorStore::from_entries(
            2,
            [
                (tok("en_a"), vec![1.0, 0.0]),
                (tok("en_b"), vec![1.0, 0.0]),
                (tok("en_y"), vec![0.0, 1.0]),
                (tok("en_x"), vec![0.0, 1.0]),
            ],
        )
        .unwrap();
        let batch = Batch::new(vec![(tok("en_a"), tok("en_b")), (tok("en_y"), tok("en_x"))]);
        let negs = select_negatives(&batch, &store).unwrap();
        // en_x and en_y tie for en_a; x < y
        assert_eq!(negs[0].0, Some(tok("en_x")));
    }

    #[test]
    fn attract_cost_examples() {
        let store = four_store();
        let batch = four_batch();
        let negs = select_negatives(&batch, &store).unwrap();
        let c = attract_cost(&batch, &negs, 0.6, &store).unwrap();
        assert!((c - 0.8).abs() < 1e-12, "{c}");

        // margin-free, orthogonal negatives, positive pair similarity
        let s = WordVectorStore::from_entries(
            3,
            [
                (tok("en_a"), vec![1.0, 0.0, 0.0]),
                (tok("en_b"), vec![0.8, 0.0, 0.6]),
                (tok("en_c"), vec![0.0, 1.0, 0.0]),
                (tok("en_d"), vec![0.0, 0.6, 0.8]),
            ],
        )
        .unwrap();
        let negs = vec![
            (Some(tok("en_c")), Some(tok("en_c"))),
            (Some(tok("en_a")), Some(tok("en_a"))),
        ];
        assert_eq!(attract_cost(&batch, &negs, 0.0, &s).unwrap(), 0.0);
    }

    #[test]
    fn regularization_examples() {
        let batch = Batch::new(vec![(tok("en_a"), tok("en_b")), (tok("en_c"), tok("en_d"))]);
        let mut state = TrainingState::new(four_store());
        assert_eq!(regularization_cost(&batch, &state, 1.0, false).unwrap(), 0.0);
        state.store_mut().row_mut(0)[0] += 0.3;
        let r = regularization_cost(&batch, &state, 1e-9, false).unwrap();
        assert!((r - 3e-10).abs() < 1e-22);
        state.store_mut().row_mut(0)[0] -= 0.2;
        state.store_mut().row_mut(2)[1] += 0.2;
        let r = regularization_cost(&batch, &state, 1.0, false).unwrap();
        assert!((r - 0.3).abs() < 1e-12);
        let sq = regularization_cost(&batch, &state, 1.0, true).unwrap();
        assert!((sq - 0.05).abs() < 1e-12);
    }

    #[test]
    fn zero_cost_gives_zero_gradient() {
        let store = WordVectorStore::from_entries(
            2,
            [
                (tok("en_a"), vec![1.0, 0.0]),
                (tok("en_b"), vec![1.0, 0.0]),
                (tok("en_c"), vec![0.0, 1.0]),
                (tok("en_d"), vec![0.0, 1.0]),
            ],
        )
        .unwrap();
        let state = TrainingState::new(store);
        let batch = four_batch();
        let negs = select_negatives(&batch, state.store()).unwrap();
        let obj = cost_and_subgradient(&batch, &negs, &SpecializationConfig::default(), &state).unwrap();
        assert_eq!(obj.cost, 0.0);
        assert!(obj.gradients.values().flatten().all(|&g| g == 0.0));
    }

    #[test]
    fn single_active_hinge_gradient() {
        // only x_l's term is active; x_r's negative is absent
        let store = WordVectorStore::from_entries(
            2,
            [
                (tok("en_l"), vec![1.0, 0.0]),
                (tok("en_r"), vec![0.0, 1.0]),
                (tok("en_t"), vec![0.6, 0.8]),
            ],
        )
        .unwrap();
        let state = TrainingState::new(store);
        let batch = Batch::new(vec![(tok("en_l"), tok("en_r"))]);
        let negs = vec![(Some(tok("en_t")), None)];
        let config = SpecializationConfig {
            reg_constant: 0.0,
            ..Default::default()
        };
        let obj = cost_and_subgradient(&batch, &negs, &config, &state).unwrap();
        assert!((obj.cost - (0.6 + 0.6)).abs() < 1e-12);
        let gl = &obj.gradients[&tok("en_l")];
        // t_l - x_r
        assert!((gl[0] - 0.6).abs() < 1e-12 && (gl[1] - (0.8 - 1.0)).abs() < 1e-12);
        assert_eq!(obj.active_hinges, 1);
        assert_eq!(obj.hinge_terms, 1);
    }

    #[test]
    fn large_lambda_pins_unmoved_vectors() {
        let state = TrainingState::new(four_store());
        let batch = four_batch();
        let negs = select_negatives(&batch, state.store()).unwrap();
        let config = SpecializationConfig {
            reg_constant: 1e6,
            ..Default::default()
        };
        let obj = cost_and_subgradient(&batch, &negs, &config, &state).unwrap();
        assert!(obj.gradients.values().flatten().all(|&g| g == 0.0));
    }

    #[test]
    fn adagrad_examples() {
        let store = WordVectorStore::from_entries(1, [(tok("en_a"), vec![0.0])]).unwrap();
        let mut state = TrainingState::new(store);
        let zero: Gradients = [(tok("en_a"), vec![0.0])].into_iter().collect();
        adagrad_step(&mut state, &zero, 0.025, 1e-8).unwrap();
        assert_eq!(state.store().row(0)[0], 0.0);

        let one: Gradients = [(tok("en_a"), vec![1.0])].into_iter().collect();
        adagrad_step(&mut state, &one, 0.025, 1e-8).unwrap();
        assert_eq!(state.store().row(0)[0], -0.025 / (1.0 + 1e-8));
        assert_eq!(state.accumulator(0)[0], 1.0);

        let mut prev = state.store().row(0)[0];
        let mut last_step = f64::INFINITY;
        for _ in 0..10 {
            adagrad_step(&mut state, &one, 0.025, 1e-8).unwrap();
            let x = state.store().row(0)[0];
            let step = (prev - x).abs();
            assert!(step < last_step);
            last_step = step;
            prev = x;
        }
    }

    #[test]
    fn specialize_empty_set_is_identity() {
        let store = four_store();
        let out = specialize(&store, &ConstraintSet::new(), &SpecializationConfig::default()).unwrap();
        assert_eq!(out.store, store);
        assert_eq!(out.log.len(), 5);
    }

    #[test]
    fn specialize_rejects_unfiltered_constraints_and_small_k() {
        let mut set = ConstraintSet::new();
        set.add(tok("en_a"), tok("en_zzz"), Provenance::Verbnet);
        assert!(matches!(
            specialize(&four_store(), &set, &SpecializationConfig::default()),
            Err(Error::UnknownToken(_))
        ));
        let config = SpecializationConfig {
            batch_size: 1,
            ..Default::default()
        };
        assert!(specialize(&four_store(), &ConstraintSet::new(), &config).is_err());
    }

    #[test]
    fn single_pair_dot_non_decreasing() {
        // one pair, λ = 0, a fixed external negative for both sides
        let store = WordVectorStore::from_entries(
            3,
            [
                (tok("en_a"), vec![1.0, 0.0, 0.0]),
                (tok("en_b"), vec![0.0, 1.0, 0.0]),
                (tok("en_c"), vec![0.0, 0.0, 1.0]),
            ],
        )
        .unwrap();
        let config = SpecializationConfig {
            reg_constant: 0.0,
            ..Default::default()
        };
        let mut state = TrainingState::new(store);
        let batch = Batch::new(vec![(tok("en_a"), tok("en_b"))]);
        let negs = vec![(Some(tok("en_c")), Some(tok("en_c")))];
        let mut last = dot(state.store().row(0), state.store().row(1));
        let mut steps = 0;
        loop {
            let mut obj = cost_and_subgradient(&batch, &negs, &config, &state).unwrap();
            if obj.cost == 0.0 {
                break;
            }
            obj.gradients.remove(&tok("en_c"));
            adagrad_step(&mut state, &obj.gradients, 0.025, 1e-8).unwrap();
            let now = dot(state.store().row(0), state.store().row(1));
            assert!(now >= last, "step {steps}: {now} < {last}");
            last = now;
            steps += 1;
            assert!(steps < 10_000);
        }
        let s = state.store();
        assert!(last - dot(s.row(0), s.row(2)) >= 0.6);
        assert!(last - dot(s.row(1), s.row(2)) >= 0.6);
    }

    #[test]
    fn kv_config_file() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("spec.conf");
        std::fs::write(
            &p,
            "# comment\nattract-margin = 0.5\nbatch-size 20\nsquared-regulariser = true\n",
        )
        .unwrap();
        let c = SpecializationConfig::from_kv_file(&p).unwrap();
        assert_eq!(c.attract_margin, 0.5);
        assert_eq!(c.batch_size, 20);
        assert!(c.squared_regulariser);
        assert_eq!(c.epochs, 5);
        std::fs::write(&p, "bogus = 1\n").unwrap();
        assert!(SpecializationConfig::from_kv_file(&p).is_err());
    }
}
