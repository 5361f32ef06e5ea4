use super::{FeatureVector, TrainingExample, WaitingPredictor};
use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::path::Path;

pub const MODEL_FORMAT: &str = "radsched-gbt";
pub const MODEL_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GbtParams {
    pub n_trees: usize,
    pub max_depth: usize,
    pub learning_rate: f64,
    pub min_samples_leaf: usize,
}

impl Default for GbtParams {
    fn default() -> Self {
        GbtParams { n_trees: 200, max_depth: 6, learning_rate: 0.1, min_samples_leaf: 5 }
    }
}

impl GbtParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.learning_rate > 0.0 && self.learning_rate <= 1.0) {
            return Err(Error::InvalidParameter(format!("learning rate {} outside (0, 1]", self.learning_rate)));
        }
        if self.min_samples_leaf == 0 {
            return Err(Error::InvalidParameter("min_samples_leaf must be positive".into()));
        }
        Ok(())
    }
}

/// Tree node. Samples with `x[feature] < threshold` go left. `cover` is the
/// number of training samples that reached the node.
#[derive(Debug, Clone, PartialEq)]
pub enum Node {
    Leaf { value: f64, cover: f64 },
    Split { feature: usize, threshold: f64, left: usize, right: usize, cover: f64 },
}

impl Node {
    pub fn cover(&self) -> f64 {
        match *self {
            Node::Leaf { cover, .. } | Node::Split { cover, .. } => cover,
        }
    }
}

/// Regression tree stored as an arena with the root at index 0.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "TreeRecord", into = "TreeRecord")]
pub struct Tree {
    pub nodes: Vec<Node>,
}

impl Tree {
    pub fn leaf(value: f64, cover: f64) -> Self {
        Tree { nodes: vec![Node::Leaf { value, cover }] }
    }

    pub fn predict(&self, x: &[f64]) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if x[feature] < threshold { left } else { right };
                }
            }
        }
    }

    /// Cover-weighted mean leaf value.
    pub fn expected_value(&self) -> f64 {
        let root = self.nodes[0].cover();
        if root <= 0.0 {
            return 0.0;
        }
        self.nodes
            .iter()
            .filter_map(|n| match *n {
                Node::Leaf { value, cover } => Some(value * cover),
                Node::Split { .. } => None,
            })
            .sum::<f64>()
            / root
    }

    pub fn depth(&self) -> usize {
        fn go(nodes: &[Node], i: usize) -> usize {
            match nodes[i] {
                Node::Leaf { .. } => 0,
                Node::Split { left, right, .. } => 1 + go(nodes, left).max(go(nodes, right)),
            }
        }
        go(&self.nodes, 0)
    }

    pub fn split_features(&self) -> impl Iterator<Item = usize> + '_ {
        self.nodes.iter().filter_map(|n| match *n {
            Node::Split { feature, .. } => Some(feature),
            Node::Leaf { .. } => None,
        })
    }

    fn validate(&self, num_features: usize) -> Result<()> {
        if self.nodes.is_empty() {
            return Err(Error::ModelFormat("empty tree".into()));
        }
        for (i, n) in self.nodes.iter().enumerate() {
            if let Node::Split { feature, left, right, .. } = *n {
                if feature >= num_features
                    || left <= i
                    || right <= i
                    || left >= self.nodes.len()
                    || right >= self.nodes.len()
                {
                    return Err(Error::ModelFormat(format!("malformed split at node {i}")));
                }
            }
        }
        Ok(())
    }
}

/// Nested on-disk form of a tree.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(untagged)]
enum TreeRecord {
    Leaf { value: f64, cover: f64 },
    Split { feature: usize, threshold: f64, cover: f64, left: Box<TreeRecord>, right: Box<TreeRecord> },
}

impl From<Tree> for TreeRecord {
    fn from(tree: Tree) -> Self {
        fn go(nodes: &[Node], i: usize) -> TreeRecord {
            match nodes[i] {
                Node::Leaf { value, cover } => TreeRecord::Leaf { value, cover },
                Node::Split { feature, threshold, left, right, cover } => TreeRecord::Split {
                    feature,
                    threshold,
                    cover,
                    left: Box::new(go(nodes, left)),
                    right: Box::new(go(nodes, right)),
                },
            }
        }
        go(&tree.nodes, 0)
    }
}

impl TryFrom<TreeRecord> for Tree {
    type Error = Error;

    /// Rebuilds the arena in breadth-first order, the order trees are grown in.
    fn try_from(record: TreeRecord) -> Result<Self> {
        let mut nodes = vec![Node::Leaf { value: 0.0, cover: 0.0 }];
        let mut queue = std::collections::VecDeque::from([(record, 0usize)]);
        while let Some((record, i)) = queue.pop_front() {
            nodes[i] = match record {
                TreeRecord::Leaf { value, cover } => Node::Leaf { value, cover },
                TreeRecord::Split { feature, threshold, cover, left, right } => {
                    let l = nodes.len();
                    nodes.push(Node::Leaf { value: 0.0, cover: 0.0 });
                    nodes.push(Node::Leaf { value: 0.0, cover: 0.0 });
                    queue.push_back((*left, l));
                    queue.push_back((*right, l + 1));
                    Node::Split { feature, threshold, left: l, right: l + 1, cover }
                }
            };
        }
        Ok(Tree { nodes })
    }
}

/// Least-squares gradient-boosted regression trees.
///
/// `predict(x) = base_score + learning_rate * sum(tree(x))`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GbtModel {
    pub params: GbtParams,
    pub base_score: f64,
    pub num_features: usize,
    pub trees: Vec<Tree>,
}

#[derive(Serialize, Deserialize)]
struct ModelFile {
    format: String,
    version: u32,
    model: GbtModel,
}

impl GbtModel {
    /// Raw score of a row of `num_features` values.
    pub fn predict_row(&self, x: &[f64]) -> Result<f64> {
        if x.len() != self.num_features {
            return Err(Error::FeatureLength { got: x.len(), expected: self.num_features });
        }
        Ok(self.predict_unchecked(x))
    }

    fn predict_unchecked(&self, x: &[f64]) -> f64 {
        let sum: f64 = self.trees.iter().map(|t| t.predict(x)).sum();
        self.base_score + self.params.learning_rate * sum
    }

    /// Mean model output over the training distribution, by tree cover.
    pub fn expected_value(&self) -> f64 {
        self.base_score + self.params.learning_rate * self.trees.iter().map(Tree::expected_value).sum::<f64>()
    }

    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.trees.iter().try_for_each(|t| t.validate(self.num_features))
    }

    pub fn to_json(&self) -> Result<String> {
        let file = ModelFile { format: MODEL_FORMAT.into(), version: MODEL_VERSION, model: self.clone() };
        Ok(serde_json::to_string_pretty(&file)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let header: serde_json::Value = serde_json::from_str(text)?;
        let format = header.get("format").and_then(|v| v.as_str()).unwrap_or("");
        if format != MODEL_FORMAT {
            return Err(Error::ModelFormat(format!("expected format {MODEL_FORMAT:?}, found {format:?}")));
        }
        match header.get("version").and_then(|v| v.as_u64()) {
            Some(v) if v == MODEL_VERSION as u64 => {}
            other => {
                return Err(Error::ModelFormat(format!(
                    "unsupported model version {other:?}, expected {MODEL_VERSION}"
                )))
            }
        }
        let file: ModelFile = serde_json::from_str(text)?;
        file.model.validate()?;
        Ok(file.model)
    }

    pub fn save(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_json()?)?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_json(&std::fs::read_to_string(path)?)
    }
}

impl WaitingPredictor for GbtModel {
    fn predict_raw(&self, x: &FeatureVector) -> Result<f64> {
        self.predict_row(x.as_slice())
    }
}

/// Fits a model on labelled feature vectors.
pub fn fit_gbt(examples: &[TrainingExample], params: &GbtParams) -> Result<GbtModel> {
    let x: Vec<&[f64]> = examples.iter().map(|e| e.x.as_slice()).collect();
    let y: Vec<f64> = examples.iter().map(|e| e.y).collect();
    fit_gbt_rows(&x, &y, params)
}

/// Fits a model on arbitrary rows of equal length.
///
/// Trees grow level by level. At each level every feature is scanned once in
/// presorted order and the best variance-reduction split of every open node is
/// kept; ties go to the lower feature index and the lower threshold. Leaves
/// hold the mean residual of their samples.
pub fn fit_gbt_rows<R: AsRef<[f64]>>(x: &[R], y: &[f64], params: &GbtParams) -> Result<GbtModel> {
    params.validate()?;
    if x.len() < 2 || x.len() != y.len() {
        return Err(Error::InvalidParameter(format!(
            "need at least 2 labelled rows, got {} rows and {} labels",
            x.len(),
            y.len()
        )));
    }
    let num_features = x[0].as_ref().len();
    if let Some(row) = x.iter().find(|r| r.as_ref().len() != num_features) {
        return Err(Error::FeatureLength { got: row.as_ref().len(), expected: num_features });
    }
    let n = x.len();
    let base_score = y.iter().sum::<f64>() / n as f64;
    let columns: Vec<Vec<f64>> = (0..num_features).map(|f| x.iter().map(|r| r.as_ref()[f]).collect()).collect();
    let sorted: Vec<Vec<u32>> = columns
        .iter()
        .map(|col| {
            let mut idx: Vec<u32> = (0..n as u32).collect();
            idx.sort_by(|&a, &b| col[a as usize].total_cmp(&col[b as usize]).then(a.cmp(&b)));
            idx
        })
        .collect();

    let mut pred = vec![base_score; n];
    let mut trees = Vec::with_capacity(params.n_trees);
    let mut grower = Grower::new(&columns, &sorted, params);
    for _ in 0..params.n_trees {
        let residual: Vec<f64> = y.iter().zip(&pred).map(|(a, b)| a - b).collect();
        let tree = grower.grow(&residual);
        for (i, p) in pred.iter_mut().enumerate() {
            *p += params.learning_rate * tree.predict_col(&columns, i);
        }
        trees.push(tree);
    }
    Ok(GbtModel { params: *params, base_score, num_features, trees })
}

impl Tree {
    fn predict_col(&self, columns: &[Vec<f64>], row: usize) -> f64 {
        let mut i = 0;
        loop {
            match self.nodes[i] {
                Node::Leaf { value, .. } => return value,
                Node::Split { feature, threshold, left, right, .. } => {
                    i = if columns[feature][row] < threshold { left } else { right };
                }
            }
        }
    }
}

const NONE: u32 = u32::MAX;
/// Splits must reduce the squared error by more than this.
const MIN_GAIN: f64 = 1e-9;

#[derive(Clone, Copy)]
struct Best {
    gain: f64,
    feature: usize,
    threshold: f64,
}

struct Grower<'a> {
    columns: &'a [Vec<f64>],
    sorted: &'a [Vec<u32>],
    params: &'a GbtParams,
    /// Open node (index into the level's list) of each sample, or NONE.
    slot: Vec<u32>,
}

impl<'a> Grower<'a> {
    fn new(columns: &'a [Vec<f64>], sorted: &'a [Vec<u32>], params: &'a GbtParams) -> Self {
        let n = columns.first().map_or(0, Vec::len);
        Grower { columns, sorted, params, slot: vec![0; n] }
    }

    fn grow(&mut self, residual: &[f64]) -> Tree {
        let n = residual.len();
        self.slot.iter_mut().for_each(|s| *s = 0);
        let mut nodes = vec![Node::Leaf { value: 0.0, cover: n as f64 }];
        // Arena index of each open node of the current level.
        let mut open: Vec<usize> = vec![0];
        for depth in 0..=self.params.max_depth {
            let k = open.len();
            let mut sum = vec![0.0; k];
            let mut count = vec![0usize; k];
            for (&s, &r) in self.slot[..n].iter().zip(&residual[..n]) {
                if s != NONE {
                    sum[s as usize] += r;
                    count[s as usize] += 1;
                }
            }
            let best =
                if depth < self.params.max_depth { self.best_splits(residual, &sum, &count) } else { vec![None; k] };

            let mut next_open = Vec::new();
            let mut child_slot = vec![(NONE, NONE); k];
            for (s, &node) in open.iter().enumerate() {
                let cover = count[s] as f64;
                match best[s] {
                    Some(b) => {
                        let left = nodes.len();
                        nodes.push(Node::Leaf { value: 0.0, cover: 0.0 });
                        nodes.push(Node::Leaf { value: 0.0, cover: 0.0 });
                        nodes[node] =
                            Node::Split { feature: b.feature, threshold: b.threshold, left, right: left + 1, cover };
                        child_slot[s] = (next_open.len() as u32, next_open.len() as u32 + 1);
                        next_open.push(left);
                        next_open.push(left + 1);
                    }
                    None => {
                        let value = if count[s] > 0 { sum[s] / cover } else { 0.0 };
                        nodes[node] = Node::Leaf { value, cover };
                    }
                }
            }
            if next_open.is_empty() {
                break;
            }
            for i in 0..n {
                let s = self.slot[i];
                if s == NONE {
                    continue;
                }
                self.slot[i] = match best[s as usize] {
                    Some(b) => {
                        let (l, r) = child_slot[s as usize];
                        if self.columns[b.feature][i] < b.threshold {
                            l
                        } else {
                            r
                        }
                    }
                    None => NONE,
                };
            }
            open = next_open;
        }
        Tree { nodes }
    }

    fn best_splits(&self, residual: &[f64], sum: &[f64], count: &[usize]) -> Vec<Option<Best>> {
        let k = sum.len();
        let min_leaf = self.params.min_samples_leaf;
        let mut best: Vec<Option<Best>> = vec![None; k];
        let parent: Vec<f64> =
            (0..k).map(|s| if count[s] > 0 { sum[s] * sum[s] / count[s] as f64 } else { 0.0 }).collect();
        let mut left_sum = vec![0.0; k];
        let mut left_count = vec![0usize; k];
        let mut last = vec![f64::NAN; k];
        for (f, order) in self.sorted.iter().enumerate() {
            let col = &self.columns[f];
            left_sum.iter_mut().for_each(|v| *v = 0.0);
            left_count.iter_mut().for_each(|v| *v = 0);
            last.iter_mut().for_each(|v| *v = f64::NAN);
            for &i in order {
                let i = i as usize;
                let s = self.slot[i];
                if s == NONE {
                    continue;
                }
                let s = s as usize;
                let v = col[i];
                let nl = left_count[s];
                if nl >= min_leaf && count[s] - nl >= min_leaf && v > last[s] {
                    let nr = count[s] - nl;
                    let sl = left_sum[s];
                    let sr = sum[s] - sl;
                    let gain = sl * sl / nl as f64 + sr * sr / nr as f64 - parent[s];
                    if gain > MIN_GAIN && best[s].map_or(true, |b| gain > b.gain) {
                        let threshold = last[s] + (v - last[s]) / 2.0;
                        best[s] = Some(Best { gain, feature: f, threshold });
                    }
                }
                left_sum[s] += residual[i];
                left_count[s] += 1;
                last[s] = v;
            }
        }
        best
    }
}
