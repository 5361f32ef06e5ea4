//! Exact Shapley attributions for [`GbtModel`] predictions.
//!
//! [`tree_shap`] runs the polynomial path algorithm on every tree. Absent
//! features are integrated out by following both children of a split,
//! weighted by their training cover. The attributions sum exactly to the raw
//! prediction minus the cover-weighted mean output.

use crate::error::{Error, Result};
use crate::learning::{feature_name, FeatureVector, GbtModel, Node, Tree};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::io::Write;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Attribution {
    pub base_value: f64,
    pub phis: Vec<f64>,
    pub prediction: f64,
}

impl Attribution {
    /// `|base + sum(phis) - prediction|`.
    pub fn accuracy_gap(&self) -> f64 {
        (self.base_value + self.phis.iter().sum::<f64>() - self.prediction).abs()
    }
}

pub fn tree_shap(model: &GbtModel, x: &FeatureVector) -> Result<Attribution> {
    tree_shap_row(model, x.as_slice())
}

/// Attribution of a raw row of `model.num_features` values.
pub fn tree_shap_row(model: &GbtModel, x: &[f64]) -> Result<Attribution> {
    if x.len() != model.num_features {
        return Err(Error::FeatureLength { got: x.len(), expected: model.num_features });
    }
    let eta = model.params.learning_rate;
    let mut phis = vec![0.0; model.num_features];
    let mut tree_phi = vec![0.0; model.num_features];
    for tree in &model.trees {
        tree_phi.iter_mut().for_each(|v| *v = 0.0);
        shap_tree(tree, x, &mut tree_phi);
        for (p, t) in phis.iter_mut().zip(&tree_phi) {
            *p += eta * t;
        }
    }
    Ok(Attribution { base_value: model.expected_value(), phis, prediction: model.predict_row(x)? })
}

/// Adds one tree's attributions to `phi`.
pub fn shap_tree(tree: &Tree, x: &[f64], phi: &mut [f64]) {
    if tree.nodes.is_empty() || tree.nodes[0].cover() <= 0.0 {
        return;
    }
    let depth = tree.depth() + 2;
    let mut path = Vec::with_capacity(depth * (depth + 1) / 2);
    recurse(tree, x, phi, 0, &mut path, 0, 0, 1.0, 1.0, None);
}

#[derive(Debug, Clone, Copy)]
struct PathElem {
    feature: Option<usize>,
    zero: f64,
    one: f64,
    weight: f64,
}

/// `path[start..]` holds the current unique path of length `depth + 1` after extension.
#[allow(clippy::too_many_arguments)]
fn recurse(
    tree: &Tree,
    x: &[f64],
    phi: &mut [f64],
    node: usize,
    path: &mut Vec<PathElem>,
    parent_start: usize,
    depth: usize,
    zero: f64,
    one: f64,
    feature: Option<usize>,
) {
    // Copy the parent's path into a fresh segment so siblings see it unchanged.
    let start = path.len();
    for i in 0..depth {
        let e = path[parent_start + i];
        path.push(e);
    }
    path.push(PathElem { feature, zero, one, weight: 0.0 });
    extend(&mut path[start..], depth, zero, one, feature);

    match tree.nodes[node] {
        Node::Leaf { value, .. } => {
            let seg = &path[start..];
            for i in 1..=depth {
                let w = unwound_sum(seg, depth, i);
                let e = seg[i];
                if let Some(f) = e.feature {
                    phi[f] += w * (e.one - e.zero) * value;
                }
            }
        }
        Node::Split { feature: f, threshold, left, right, cover } => {
            let (hot, cold) = if x[f] < threshold { (left, right) } else { (right, left) };
            let mut depth = depth;
            let mut in_zero = 1.0;
            let mut in_one = 1.0;
            if let Some(k) = (1..=depth).find(|&k| path[start + k].feature == Some(f)) {
                in_zero = path[start + k].zero;
                in_one = path[start + k].one;
                unwind(&mut path[start..], depth, k);
                depth -= 1;
            }
            let hot_zero = tree.nodes[hot].cover() / cover;
            let cold_zero = tree.nodes[cold].cover() / cover;
            recurse(tree, x, phi, hot, path, start, depth + 1, hot_zero * in_zero, in_one, Some(f));
            recurse(tree, x, phi, cold, path, start, depth + 1, cold_zero * in_zero, 0.0, Some(f));
        }
    }
    path.truncate(start);
}

fn extend(path: &mut [PathElem], depth: usize, zero: f64, one: f64, feature: Option<usize>) {
    path[depth] = PathElem { feature, zero, one, weight: if depth == 0 { 1.0 } else { 0.0 } };
    let d = depth as f64;
    for i in (0..depth).rev() {
        path[i + 1].weight += one * path[i].weight * (i as f64 + 1.0) / (d + 1.0);
        path[i].weight = zero * path[i].weight * (d - i as f64) / (d + 1.0);
    }
}

fn unwind(path: &mut [PathElem], depth: usize, index: usize) {
    let one = path[index].one;
    let zero = path[index].zero;
    let d = depth as f64;
    let mut next = path[depth].weight;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = path[i].weight;
            path[i].weight = next * (d + 1.0) / ((i as f64 + 1.0) * one);
            next = tmp - path[i].weight * zero * (d - i as f64) / (d + 1.0);
        } else {
            path[i].weight = path[i].weight * (d + 1.0) / (zero * (d - i as f64));
        }
    }
    for i in index..depth {
        path[i].feature = path[i + 1].feature;
        path[i].zero = path[i + 1].zero;
        path[i].one = path[i + 1].one;
    }
}

fn unwound_sum(path: &[PathElem], depth: usize, index: usize) -> f64 {
    let one = path[index].one;
    let zero = path[index].zero;
    let d = depth as f64;
    let mut next = path[depth].weight;
    let mut total = 0.0;
    for i in (0..depth).rev() {
        if one != 0.0 {
            let tmp = next * (d + 1.0) / ((i as f64 + 1.0) * one);
            total += tmp;
            next = path[i].weight - tmp * zero * (d - i as f64) / (d + 1.0);
        } else if zero != 0.0 {
            total += path[i].weight / zero / ((d - i as f64) / (d + 1.0));
        }
    }
    total
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeatureSummary {
    pub index: usize,
    pub name: String,
    pub mean_abs_phi: f64,
    /// `(phi, feature value)` for every row.
    pub points: Vec<(f64, f64)>,
}

/// Beeswarm data: per-feature attributions over a dataset.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSummary {
    pub features: Vec<FeatureSummary>,
    /// Feature indices by descending mean |phi|.
    pub ranking: Vec<usize>,
}

pub fn global_summary(model: &GbtModel, dataset: &[FeatureVector]) -> Result<GlobalSummary> {
    if dataset.is_empty() {
        return Err(Error::Empty("dataset"));
    }
    let attributions = dataset.par_iter().map(|x| tree_shap(model, x)).collect::<Result<Vec<_>>>()?;
    let n = dataset.len() as f64;
    let features: Vec<FeatureSummary> = (0..model.num_features)
        .map(|f| {
            let points: Vec<(f64, f64)> =
                attributions.iter().zip(dataset).map(|(a, x)| (a.phis[f], x.as_slice()[f])).collect();
            let mean_abs_phi = points.iter().map(|p| p.0.abs()).sum::<f64>() / n;
            FeatureSummary { index: f, name: feature_name(f), mean_abs_phi, points }
        })
        .collect();
    let mut ranking: Vec<usize> = (0..features.len()).collect();
    ranking.sort_by(|&a, &b| features[b].mean_abs_phi.total_cmp(&features[a].mean_abs_phi).then(a.cmp(&b)));
    Ok(GlobalSummary { features, ranking })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WaterfallEntry {
    pub index: usize,
    pub name: String,
    pub value: f64,
    pub phi: f64,
    /// Base value plus this and every earlier contribution.
    pub cumulative: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Waterfall {
    pub base_value: f64,
    pub prediction: f64,
    pub entries: Vec<WaterfallEntry>,
}

impl Waterfall {
    pub fn end_value(&self) -> f64 {
        self.entries.last().map_or(self.base_value, |e| e.cumulative)
    }
}

/// Nonzero contributions by descending |phi|, ties by feature index.
pub fn waterfall_from(attribution: &Attribution, x: &[f64]) -> Waterfall {
    let mut order: Vec<usize> = (0..attribution.phis.len()).filter(|&i| attribution.phis[i] != 0.0).collect();
    order.sort_by(|&a, &b| attribution.phis[b].abs().total_cmp(&attribution.phis[a].abs()).then(a.cmp(&b)));
    let mut cumulative = attribution.base_value;
    let entries = order
        .into_iter()
        .map(|i| {
            cumulative += attribution.phis[i];
            WaterfallEntry { index: i, name: feature_name(i), value: x[i], phi: attribution.phis[i], cumulative }
        })
        .collect();
    Waterfall { base_value: attribution.base_value, prediction: attribution.prediction, entries }
}

pub fn waterfall(model: &GbtModel, x: &FeatureVector) -> Result<Waterfall> {
    Ok(waterfall_from(&tree_shap(model, x)?, x.as_slice()))
}

pub fn write_waterfall_csv<W: Write>(w: &Waterfall, out: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["feature", "value", "phi", "cumulative"])?;
    csv.write_record(["base", "", "", &w.base_value.to_string()])?;
    for e in &w.entries {
        csv.write_record([e.name.clone(), e.value.to_string(), e.phi.to_string(), e.cumulative.to_string()])?;
    }
    csv.flush()?;
    Ok(())
}

/// One row per (feature, observation), features in ranking order.
pub fn write_beeswarm_csv<W: Write>(s: &GlobalSummary, out: W) -> Result<()> {
    let mut csv = csv::Writer::from_writer(out);
    csv.write_record(["rank", "feature", "mean_abs_phi", "row", "phi", "value"])?;
    for (rank, &f) in s.ranking.iter().enumerate() {
        let fs = &s.features[f];
        for (row, (phi, value)) in fs.points.iter().enumerate() {
            csv.write_record([
                rank.to_string(),
                fs.name.clone(),
                fs.mean_abs_phi.to_string(),
                row.to_string(),
                phi.to_string(),
                value.to_string(),
            ])?;
        }
    }
    csv.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learning::GbtParams;

    fn stump(feature: usize, threshold: f64, lo: f64, hi: f64, n_lo: f64, n_hi: f64) -> Tree {
        Tree {
            nodes: vec![
                Node::Split { feature, threshold, left: 1, right: 2, cover: n_lo + n_hi },
                Node::Leaf { value: lo, cover: n_lo },
                Node::Leaf { value: hi, cover: n_hi },
            ],
        }
    }

    fn model(trees: Vec<Tree>, num_features: usize) -> GbtModel {
        GbtModel {
            params: GbtParams { learning_rate: 1.0, ..Default::default() },
            base_score: 0.0,
            num_features,
            trees,
        }
    }

    #[test]
    fn single_leaf_has_no_attribution() {
        let m = GbtModel { base_score: 2.0, ..model(vec![Tree::leaf(1.5, 10.0)], 3) };
        let a = tree_shap_row(&m, &[1.0, 2.0, 3.0]).unwrap();
        assert_eq!(a.phis, vec![0.0; 3]);
        assert_eq!(a.base_value, 3.5);
        assert_eq!(a.prediction, 3.5);
    }

    #[test]
    fn stump_by_hand() {
        // E = (1*3 + 5*1)/4 = 2; for x on the high side phi = 5 - 2.
        let m = model(vec![stump(1, 0.5, 1.0, 5.0, 3.0, 1.0)], 3);
        let a = tree_shap_row(&m, &[0.0, 1.0, 0.0]).unwrap();
        assert_eq!(a.base_value, 2.0);
        assert_eq!(a.phis, vec![0.0, 3.0, 0.0]);
        let b = tree_shap_row(&m, &[0.0, 0.0, 0.0]).unwrap();
        assert_eq!(b.phis, vec![0.0, -1.0, 0.0]);
    }

    #[test]
    fn waterfall_orders_by_magnitude() {
        let m = model(vec![stump(0, 0.5, 0.0, 1.0, 1.0, 1.0), stump(2, 0.5, 0.0, 4.0, 1.0, 1.0)], 3);
        let x = [1.0, 0.0, 1.0];
        let a = tree_shap_row(&m, &x).unwrap();
        let w = waterfall_from(&a, &x);
        assert_eq!(w.entries.iter().map(|e| e.index).collect::<Vec<_>>(), vec![2, 0]);
        assert!((w.end_value() - a.prediction).abs() < 1e-12);
        let zero = Attribution { base_value: 1.0, phis: vec![0.0; 3], prediction: 1.0 };
        let w0 = waterfall_from(&zero, &x);
        assert!(w0.entries.is_empty());
        assert_eq!(w0.end_value(), 1.0);
    }

    #[test]
    fn wrong_length() {
        let m = model(vec![Tree::leaf(0.0, 1.0)], 3);
        assert!(tree_shap_row(&m, &[0.0]).is_err());
    }

    #[test]
    fn csv_outputs() {
        let m = model(vec![stump(0, 0.5, 0.0, 1.0, 1.0, 1.0)], 54);
        let x = FeatureVector::new(vec![1.0; 54]).unwrap();
        let mut buf = Vec::new();
        write_waterfall_csv(&waterfall(&m, &x).unwrap(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.starts_with("feature,value,phi,cumulative\nbase,,,0.5\ncapacity_d0,1,0.5,1\n"));
        let s = global_summary(&m, &[x]).unwrap();
        assert_eq!(s.ranking[0], 0);
        let mut buf = Vec::new();
        write_beeswarm_csv(&s, &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap().lines().count(), 55);
    }
}
