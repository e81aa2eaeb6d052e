#![allow(dead_code)]

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::StandardNormal;

use verb_transfer::clustering::ClusterAssignment;
use verb_transfer::constraints::{ConstraintSet, Provenance};
use verb_transfer::embedding::{cosine, LanguageTag, Token, WordVectorStore};
use verb_transfer::evaluation::GoldStandard;

pub fn tag(code: &str) -> LanguageTag {
    LanguageTag::new(code).unwrap()
}

pub fn tokens(lang: &str, n: usize) -> Vec<Token> {
    let l = tag(lang);
    (0..n).map(|i| Token::new(&l, &format!("w{i:04}")).unwrap()).collect()
}

pub fn gaussian<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    (0..d).map(|_| rng.sample(StandardNormal)).collect()
}

pub fn unit<R: Rng>(d: usize, rng: &mut R) -> Vec<f64> {
    let v = gaussian(d, rng);
    let n = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.into_iter().map(|x| x / n).collect()
}

/// A random clustering of a random subset of gold verbs.
pub struct MetricInstance {
    pub gold: GoldStandard,
    pub assignment: ClusterAssignment,
    /// gold class of every gold verb
    pub classes: Vec<usize>,
    /// cluster of every gold verb, `None` when left unclustered
    pub labels: Vec<Option<usize>>,
    pub k: usize,
    pub num_classes: usize,
}

pub fn random_metric_instance<R: Rng>(rng: &mut R, max_verbs: usize, max_classes: usize) -> MetricInstance {
    let n = rng.gen_range(1..=max_verbs);
    let num_classes = rng.gen_range(1..=max_classes.min(n));
    let verbs = tokens("fr", n);
    // every class non-empty
    let mut classes: Vec<usize> = (0..n)
        .map(|i| {
            if i < num_classes {
                i
            } else {
                rng.gen_range(0..num_classes)
            }
        })
        .collect();
    classes.shuffle(rng);
    let gold = GoldStandard::new((0..num_classes).map(|c| {
        (
            format!("g{c}"),
            verbs
                .iter()
                .zip(&classes)
                .filter(|(_, &g)| g == c)
                .map(|(t, _)| t.clone())
                .collect::<Vec<_>>(),
        )
    }))
    .unwrap();
    let k = rng.gen_range(1..=n);
    let labels: Vec<Option<usize>> = (0..n)
        .map(|_| {
            if rng.gen_bool(0.85) {
                Some(rng.gen_range(0..k))
            } else {
                None
            }
        })
        .collect();
    let (toks, labs): (Vec<Token>, Vec<usize>) = verbs
        .iter()
        .zip(&labels)
        .filter_map(|(t, l)| l.map(|l| (t.clone(), l)))
        .unzip();
    let assignment = ClusterAssignment::new(toks, labs, k).unwrap();
    MetricInstance {
        gold,
        assignment,
        classes,
        labels,
        k,
        num_classes,
    }
}

/// Modified purity by direct enumeration of every (cluster, class) cell.
pub fn brute_force_mpur(inst: &MetricInstance) -> f64 {
    let mut numerator = 0usize;
    for c in 0..inst.k {
        let mut n_prev = 0;
        for g in 0..inst.num_classes {
            let mut count = 0;
            for i in 0..inst.classes.len() {
                if inst.labels[i] == Some(c) && inst.classes[i] == g {
                    count += 1;
                }
            }
            n_prev = n_prev.max(count);
        }
        if n_prev > 1 {
            numerator += n_prev;
        }
    }
    numerator as f64 / inst.classes.len() as f64
}

/// Weighted class accuracy by direct enumeration.
pub fn brute_force_wacc(inst: &MetricInstance) -> f64 {
    let mut numerator = 0usize;
    for g in 0..inst.num_classes {
        let mut n_dom = 0;
        for c in 0..inst.k {
            let mut count = 0;
            for i in 0..inst.classes.len() {
                if inst.labels[i] == Some(c) && inst.classes[i] == g {
                    count += 1;
                }
            }
            n_dom = n_dom.max(count);
        }
        numerator += n_dom;
    }
    numerator as f64 / inst.classes.len() as f64
}

/// Batch cost written directly from the objective: both hinge terms of every
/// pair plus the regulariser over the batch's distinct words.
pub struct BatchProblem {
    pub pairs: Vec<(usize, usize)>,
    pub negatives: Vec<(Option<usize>, Option<usize>)>,
    pub words: Vec<usize>,
    pub margin: f64,
    pub lambda: f64,
    pub squared: bool,
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

impl BatchProblem {
    pub fn hinge_arguments(&self, x: &[Vec<f64>]) -> Vec<f64> {
        let mut out = Vec::new();
        for (&(l, r), &(tl, tr)) in self.pairs.iter().zip(&self.negatives) {
            let pos = dot(&x[l], &x[r]);
            if let Some(t) = tl {
                out.push(self.margin + dot(&x[l], &x[t]) - pos);
            }
            if let Some(t) = tr {
                out.push(self.margin + dot(&x[r], &x[t]) - pos);
            }
        }
        out
    }

    pub fn cost(&self, x: &[Vec<f64>], x0: &[Vec<f64>]) -> f64 {
        let attract: f64 = self.hinge_arguments(x).into_iter().map(|a| a.max(0.0)).sum();
        let reg: f64 = self
            .words
            .iter()
            .map(|&w| {
                let sq: f64 = x[w].iter().zip(&x0[w]).map(|(a, b)| (a - b) * (a - b)).sum();
                if self.squared {
                    sq
                } else {
                    sq.sqrt()
                }
            })
            .sum();
        attract + self.lambda * reg
    }

    /// Central finite-difference gradient for word `w`.
    pub fn finite_difference(&self, x: &[Vec<f64>], x0: &[Vec<f64>], w: usize, h: f64) -> Vec<f64> {
        let mut probe = x.to_vec();
        (0..x[w].len())
            .map(|j| {
                probe[w][j] = x[w][j] + h;
                let plus = self.cost(&probe, x0);
                probe[w][j] = x[w][j] - h;
                let minus = self.cost(&probe, x0);
                probe[w][j] = x[w][j];
                (plus - minus) / (2.0 * h)
            })
            .collect()
    }
}

/// `n` random unit vectors in `d` dimensions with `m` distinct random pairs among them.
pub fn attract_toy<R: Rng>(rng: &mut R, n: usize, d: usize, m: usize) -> (WordVectorStore, ConstraintSet) {
    let toks = tokens("en", n);
    let store = WordVectorStore::from_entries(d, toks.iter().map(|t| (t.clone(), unit(d, rng)))).unwrap();
    let mut set = ConstraintSet::new();
    while set.len() < m {
        let a = rng.gen_range(0..n);
        let b = rng.gen_range(0..n);
        if a != b {
            set.add(toks[a].clone(), toks[b].clone(), Provenance::MonoSyn);
        }
    }
    (store, set)
}

pub fn mean_pair_cosine(store: &WordVectorStore, set: &ConstraintSet) -> f64 {
    let sims: Vec<f64> = set
        .pairs()
        .map(|p| cosine(store.get(p.left()).unwrap(), store.get(p.right()).unwrap()))
        .collect();
    sims.iter().sum::<f64>() / sims.len() as f64
}

/// `k` isotropic unit-variance Gaussian blobs of `per` points in `d`
/// dimensions whose centres are at least `separation` apart.
pub fn planted_blobs<R: Rng>(
    rng: &mut R,
    k: usize,
    per: usize,
    d: usize,
    separation: f64,
) -> (Vec<Vec<f64>>, Vec<usize>) {
    let side = separation * (k as f64).sqrt() * 2.0;
    let mut centers: Vec<Vec<f64>> = Vec::new();
    while centers.len() < k {
        let c: Vec<f64> = (0..d).map(|_| rng.gen_range(0.0..side)).collect();
        let far = centers
            .iter()
            .all(|o| o.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt() >= separation);
        if far {
            centers.push(c);
        }
    }
    let mut points = Vec::with_capacity(k * per);
    let mut labels = Vec::with_capacity(k * per);
    for (ci, c) in centers.iter().enumerate() {
        for _ in 0..per {
            points.push(c.iter().zip(gaussian(d, rng)).map(|(a, g)| a + g).collect());
            labels.push(ci);
        }
    }
    (points, labels)
}

/// Draws one random batch (d ≤ 10, ≤ 8 pairs) with moved vectors and returns the
/// worst relative error between the analytic subgradient and central
/// differences, or `None` when the point lies within `kink` of a
/// non-differentiable point.
pub fn gradient_check<R: Rng>(rng: &mut R, h: f64, kink: f64) -> Option<f64> {
    use verb_transfer::specializer::{
        cost_and_subgradient, select_negatives, Batch, SpecializationConfig, TrainingState,
    };

    let d = rng.gen_range(2..=10);
    let num_pairs = rng.gen_range(1..=8);
    let vocab = rng.gen_range(3..=2 * num_pairs + 2);
    let toks = tokens("en", vocab);
    let x0: Vec<Vec<f64>> = (0..vocab)
        .map(|_| gaussian(d, rng).into_iter().map(|v| v * 0.5).collect())
        .collect();
    let store = WordVectorStore::from_entries(d, toks.iter().cloned().zip(x0.iter().cloned())).unwrap();
    let mut state = TrainingState::new(store);
    let mut x = x0.clone();
    for (i, row) in x.iter_mut().enumerate() {
        row.iter_mut()
            .for_each(|v| *v += 0.3 * rng.sample::<f64, _>(StandardNormal));
        state.store_mut().row_mut(i).copy_from_slice(row);
    }
    let mut pairs = Vec::new();
    while pairs.len() < num_pairs {
        let (a, b) = (rng.gen_range(0..vocab), rng.gen_range(0..vocab));
        if a != b {
            pairs.push((a, b));
        }
    }
    let batch = Batch::new(pairs.iter().map(|&(a, b)| (toks[a].clone(), toks[b].clone())).collect());
    let config = SpecializationConfig {
        attract_margin: rng.gen_range(0.0..1.0),
        reg_constant: rng.gen_range(0.0..0.5),
        squared_regulariser: rng.gen_bool(0.5),
        ..Default::default()
    };
    let negatives = select_negatives(&batch, state.store()).unwrap();
    let index = |t: &Option<Token>| t.as_ref().map(|t| toks.iter().position(|u| u == t).unwrap());
    let mut words: Vec<usize> = pairs.iter().flat_map(|&(a, b)| [a, b]).collect();
    words.sort();
    words.dedup();
    let problem = BatchProblem {
        pairs: pairs.clone(),
        negatives: negatives.iter().map(|(a, b)| (index(a), index(b))).collect(),
        words: words.clone(),
        margin: config.attract_margin,
        lambda: config.reg_constant,
        squared: config.squared_regulariser,
    };
    if problem.hinge_arguments(&x).iter().any(|a| a.abs() < kink) {
        return None;
    }
    let displacement = |w: usize| {
        x[w].iter()
            .zip(&x0[w])
            .map(|(a, b)| (a - b) * (a - b))
            .sum::<f64>()
            .sqrt()
    };
    if !config.squared_regulariser && words.iter().any(|&w| displacement(w) < kink) {
        return None;
    }

    let objective = cost_and_subgradient(&batch, &negatives, &config, &state).unwrap();
    let cost_gap = (objective.cost - problem.cost(&x, &x0)).abs();
    let mut worst = cost_gap / problem.cost(&x, &x0).abs().max(1.0);
    for (w, tok) in toks.iter().enumerate() {
        let fd = problem.finite_difference(&x, &x0, w, h);
        let zero = vec![0.0; d];
        let g = objective.gradients.get(tok).unwrap_or(&zero);
        let diff: f64 = g.iter().zip(&fd).map(|(a, b)| (a - b) * (a - b)).sum::<f64>().sqrt();
        let scale = dot(g, g).sqrt().max(dot(&fd, &fd).sqrt());
        if scale > 0.0 {
            worst = worst.max(diff / scale.max(1e-8));
        }
    }
    Some(worst)
}
