//! Generation phase: CART regression trees and bagged homogeneous ensembles.

use std::fmt::Write as _;

use rand::Rng;
use rayon::prelude::*;

use crate::dataset::Dataset;
use crate::rng::{derive_seed, rng_from_seed};
use crate::{Error, Result};

/// Targets whose variance falls below this are treated as pure.
const PURE_VARIANCE: f64 = 1e-12;

/// A fitted prediction function over fixed-width feature vectors.
pub trait Regressor: Send + Sync {
    fn n_features(&self) -> usize;

    /// Prediction without the dimension check.
    fn evaluate(&self, x: &[f64]) -> f64;

    fn predict(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        Ok(self.evaluate(x))
    }
}

/// A learning algorithm that fits a model on a subset of a dataset's rows.
/// Rows may repeat, which is how bootstrap samples are passed in.
pub trait Learner: Sync {
    type Model: Regressor;

    fn fit_rows(&self, data: &Dataset, rows: &[usize]) -> Self::Model;
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TreeParams {
    /// Nodes with fewer instances than this become leaves.
    pub min_parent_size: usize,
    pub min_leaf_size: usize,
    /// `None` grows until another stopping rule fires.
    pub max_depth: Option<usize>,
}

impl Default for TreeParams {
    fn default() -> Self {
        TreeParams {
            min_parent_size: 10,
            min_leaf_size: 1,
            max_depth: None,
        }
    }
}

impl TreeParams {
    pub fn validate(&self) -> Result<()> {
        if self.min_leaf_size < 1 {
            return Err(Error::invalid("min_leaf_size must be at least 1"));
        }
        if self.min_parent_size < 2 * self.min_leaf_size {
            return Err(Error::invalid(format!(
                "min_parent_size ({}) must be at least twice min_leaf_size ({})",
                self.min_parent_size, self.min_leaf_size
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Split {
        feature: usize,
        threshold: f64,
        left: usize,
        right: usize,
    },
    Leaf {
        value: f64,
    },
}

/// Binary regression tree; `nodes[0]` is the root. Instances with
/// `x[feature] <= threshold` go left.
#[derive(Debug, Clone, PartialEq)]
pub struct RegressionTree {
    nodes: Vec<Node>,
    n_features: usize,
    params: TreeParams,
}

impl RegressionTree {
    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn params(&self) -> &TreeParams {
        &self.params
    }

    pub fn n_leaves(&self) -> usize {
        self.nodes.iter().filter(|n| matches!(n, Node::Leaf { .. })).count()
    }

    pub fn depth(&self) -> usize {
        fn walk(nodes: &[Node], id: usize) -> usize {
            match nodes[id] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + walk(nodes, left).max(walk(nodes, right)),
            }
        }
        walk(&self.nodes, 0)
    }

    /// Line-oriented dump, one node per line:
    /// `<id> split <feature> <threshold> <left> <right>` or `<id> leaf <value>`.
    pub fn to_text(&self) -> String {
        let mut out = format!("tree n_features={}\n", self.n_features);
        for (id, node) in self.nodes.iter().enumerate() {
            match node {
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => writeln!(out, "{id} split {feature} {threshold:?} {left} {right}"),
                Node::Leaf { value } => writeln!(out, "{id} leaf {value:?}"),
            }
            .expect("writing to a String cannot fail");
        }
        out
    }

    /// Parses the output of [`RegressionTree::to_text`]. Fitting parameters
    /// are not part of the format and come back as defaults.
    pub fn from_text(text: &str) -> Result<Self> {
        let bad = |line: usize, what: &str| Error::invalid(format!("tree text line {line}: {what}"));
        let mut lines = text.lines();
        let n_features = lines
            .next()
            .and_then(|l| l.strip_prefix("tree n_features="))
            .and_then(|v| v.trim().parse().ok())
            .ok_or_else(|| bad(1, "expected `tree n_features=<n>` header"))?;
        let mut nodes = Vec::new();
        for (i, line) in lines.enumerate() {
            let lineno = i + 2;
            let parts: Vec<&str> = line.split_whitespace().collect();
            if parts.first().and_then(|id| id.parse::<usize>().ok()) != Some(nodes.len()) {
                return Err(bad(lineno, "node ids must be consecutive from 0"));
            }
            let node = match parts.get(1..) {
                Some(["leaf", v]) => Node::Leaf {
                    value: v.parse().map_err(|_| bad(lineno, "bad leaf value"))?,
                },
                Some(["split", f, t, l, r]) => Node::Split {
                    feature: f.parse().map_err(|_| bad(lineno, "bad feature"))?,
                    threshold: t.parse().map_err(|_| bad(lineno, "bad threshold"))?,
                    left: l.parse().map_err(|_| bad(lineno, "bad child id"))?,
                    right: r.parse().map_err(|_| bad(lineno, "bad child id"))?,
                },
                _ => return Err(bad(lineno, "unrecognized node")),
            };
            nodes.push(node);
        }
        if nodes.is_empty() {
            return Err(bad(2, "tree has no nodes"));
        }
        for node in &nodes {
            if let Node::Split {
                feature, left, right, ..
            } = *node
            {
                if feature >= n_features || left >= nodes.len() || right >= nodes.len() {
                    return Err(Error::invalid("tree text references a missing node or feature"));
                }
            }
        }
        Ok(RegressionTree {
            nodes,
            n_features,
            params: TreeParams::default(),
        })
    }
}

impl Regressor for RegressionTree {
    fn n_features(&self) -> usize {
        self.n_features
    }

    fn evaluate(&self, x: &[f64]) -> f64 {
        let mut id = 0;
        loop {
            match self.nodes[id] {
                Node::Leaf { value } => return value,
                Node::Split {
                    feature,
                    threshold,
                    left,
                    right,
                } => id = if x[feature] <= threshold { left } else { right },
            }
        }
    }
}

/// CART with squared-error impurity.
#[derive(Debug, Clone, Copy, Default)]
pub struct Cart {
    pub params: TreeParams,
}

impl Learner for Cart {
    type Model = RegressionTree;

    fn fit_rows(&self, data: &Dataset, rows: &[usize]) -> RegressionTree {
        let mut builder = TreeBuilder {
            data,
            params: &self.params,
            nodes: Vec::new(),
            scratch: Vec::with_capacity(rows.len()),
        };
        let mut rows = rows.to_vec();
        builder.grow(&mut rows, 0);
        RegressionTree {
            nodes: builder.nodes,
            n_features: data.n_features(),
            params: self.params,
        }
    }
}

struct TreeBuilder<'a> {
    data: &'a Dataset,
    params: &'a TreeParams,
    nodes: Vec<Node>,
    scratch: Vec<(f64, f64)>,
}

struct SplitChoice {
    feature: usize,
    threshold: f64,
    gain: f64,
}

impl TreeBuilder<'_> {
    fn grow(&mut self, rows: &mut [usize], depth: usize) -> usize {
        let id = self.nodes.len();
        self.nodes.push(Node::Leaf { value: 0.0 });

        let n = rows.len() as f64;
        let (mut lo, mut hi, mut sum) = (f64::INFINITY, f64::NEG_INFINITY, 0.0);
        for &r in rows.iter() {
            let y = self.data.target(r);
            lo = lo.min(y);
            hi = hi.max(y);
            sum += y;
        }
        let mean = sum / n;
        let variance = rows
            .iter()
            .map(|&r| (self.data.target(r) - mean).powi(2))
            .sum::<f64>()
            / n;
        let leaf = Node::Leaf {
            value: mean.clamp(lo, hi),
        };

        let stop = rows.len() < self.params.min_parent_size
            || self.params.max_depth.is_some_and(|d| depth >= d)
            || variance < PURE_VARIANCE;
        let choice = if stop { None } else { self.best_split(rows) };
        let Some(choice) = choice else {
            self.nodes[id] = leaf;
            return id;
        };

        let mut split_at = 0;
        for i in 0..rows.len() {
            if self.data.feature(rows[i], choice.feature) <= choice.threshold {
                rows.swap(i, split_at);
                split_at += 1;
            }
        }
        let (left_rows, right_rows) = rows.split_at_mut(split_at);
        let left = self.grow(left_rows, depth + 1);
        let right = self.grow(right_rows, depth + 1);
        self.nodes[id] = Node::Split {
            feature: choice.feature,
            threshold: choice.threshold,
            left,
            right,
        };
        id
    }

    /// Exhaustive search over midpoints between consecutive distinct values.
    /// The SSE reduction of a split is `nL*nR/n * (meanL - meanR)^2`. Ties
    /// keep the lowest feature, then the lowest threshold.
    fn best_split(&mut self, rows: &[usize]) -> Option<SplitChoice> {
        let n = rows.len();
        let min_leaf = self.params.min_leaf_size;
        let mut best: Option<SplitChoice> = None;

        for feature in 0..self.data.n_features() {
            self.scratch.clear();
            self.scratch
                .extend(rows.iter().map(|&r| (self.data.feature(r, feature), self.data.target(r))));
            self.scratch.sort_by(|a, b| a.0.total_cmp(&b.0));

            let total: f64 = self.scratch.iter().map(|p| p.1).sum();
            let mut left_sum = 0.0;
            for i in 0..n - 1 {
                left_sum += self.scratch[i].1;
                let n_left = i + 1;
                let n_right = n - n_left;
                if n_left < min_leaf || n_right < min_leaf {
                    continue;
                }
                let (a, b) = (self.scratch[i].0, self.scratch[i + 1].0);
                if a >= b {
                    continue;
                }
                let diff = left_sum / n_left as f64 - (total - left_sum) / n_right as f64;
                let gain = (n_left * n_right) as f64 / n as f64 * diff * diff;
                if gain > best.as_ref().map_or(0.0, |b| b.gain) {
                    let mid = 0.5 * (a + b);
                    best = Some(SplitChoice {
                        feature,
                        threshold: if mid < b { mid } else { a },
                        gain,
                    });
                }
            }
        }
        best
    }
}

/// Fits a CART tree on every row of `train`.
pub fn fit_tree(train: &Dataset, params: &TreeParams) -> Result<RegressionTree> {
    params.validate()?;
    let rows: Vec<usize> = (0..train.n_instances()).collect();
    Ok(Cart { params: *params }.fit_rows(train, &rows))
}

/// The single-regressor baseline: one tree on the whole training fold.
pub fn fit_individual(train: &Dataset, params: &TreeParams) -> Result<RegressionTree> {
    fit_tree(train, params)
}

/// Bootstrap sample: `n` indices drawn uniformly with replacement from `0..n`.
pub fn bagging_sample(n: usize, seed: u64) -> Vec<usize> {
    let mut rng = rng_from_seed(seed);
    (0..n).map(|_| rng.gen_range(0..n)).collect()
}

/// An ordered collection of fitted regressors.
#[derive(Debug, Clone)]
pub struct Ensemble<M = RegressionTree> {
    members: Vec<M>,
    generation_seed: u64,
    bag_indices: Vec<Vec<usize>>,
}

impl<M: Regressor> Ensemble<M> {
    /// Fits `n_members` models, member `i` on the bootstrap sample drawn with
    /// seed `derive_seed(seed, i)`.
    pub fn fit_bagged<L>(learner: &L, train: &Dataset, n_members: usize, seed: u64) -> Result<Self>
    where
        L: Learner<Model = M>,
    {
        if n_members == 0 {
            return Err(Error::invalid("ensemble needs at least one member"));
        }
        let n = train.n_instances();
        let (members, bag_indices) = (0..n_members)
            .into_par_iter()
            .map(|i| {
                let bag = bagging_sample(n, derive_seed(seed, i as u64));
                (learner.fit_rows(train, &bag), bag)
            })
            .unzip();
        Ok(Ensemble {
            members,
            generation_seed: seed,
            bag_indices,
        })
    }

    pub fn from_members(members: Vec<M>) -> Result<Self> {
        let Some(first) = members.first() else {
            return Err(Error::invalid("ensemble needs at least one member"));
        };
        let nf = first.n_features();
        if let Some(m) = members.iter().find(|m| m.n_features() != nf) {
            return Err(Error::DimensionMismatch {
                expected: nf,
                found: m.n_features(),
            });
        }
        Ok(Ensemble {
            members,
            generation_seed: 0,
            bag_indices: Vec::new(),
        })
    }

    pub fn len(&self) -> usize {
        self.members.len()
    }

    pub fn is_empty(&self) -> bool {
        self.members.is_empty()
    }

    pub fn members(&self) -> &[M] {
        &self.members
    }

    pub fn n_features(&self) -> usize {
        self.members[0].n_features()
    }

    pub fn generation_seed(&self) -> u64 {
        self.generation_seed
    }

    /// Bootstrap indices per member; empty for ensembles built from members.
    pub fn bag_indices(&self) -> &[Vec<usize>] {
        &self.bag_indices
    }

    /// Every member's prediction for `x`, in member order.
    pub fn predict_all(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.n_features() {
            return Err(Error::DimensionMismatch {
                expected: self.n_features(),
                found: x.len(),
            });
        }
        Ok(self.members.iter().map(|m| m.evaluate(x)).collect())
    }
}

impl Ensemble<RegressionTree> {
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for (i, m) in self.members.iter().enumerate() {
            writeln!(out, "# member {i}").expect("writing to a String cannot fail");
            out.push_str(&m.to_text());
        }
        out
    }
}

/// Bagged CART ensemble of `n_members` trees.
pub fn generate_ensemble(
    train: &Dataset,
    n_members: usize,
    params: &TreeParams,
    seed: u64,
) -> Result<Ensemble> {
    params.validate()?;
    Ensemble::fit_bagged(&Cart { params: *params }, train, n_members, seed)
}
