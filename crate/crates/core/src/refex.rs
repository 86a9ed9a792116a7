//! Recursive structural node features.
//!
//! Five base features per node are computed on the symmetrized, loop-free
//! adjacency:
//!
//! | column                  | definition                                            |
//! |-------------------------|-------------------------------------------------------|
//! | `degree`                | number of distinct neighbors                          |
//! | `weighted_degree`       | sum of incident edge weights                          |
//! | `egonet_internal_edges` | edges with both endpoints in node ∪ neighbors         |
//! | `egonet_external_edges` | edges with exactly one endpoint in node ∪ neighbors   |
//! | `clustering_coefficient`| closed neighbor pairs / all neighbor pairs (0 if deg < 2) |
//!
//! Recursion appends, for every column added at the previous level, the sum
//! and/or mean of that column over each node's neighbors. A new column is
//! dropped when its absolute Pearson correlation with an already retained
//! column exceeds `prune_corr`; base columns are never dropped. The retained
//! derivations form a [`FeatureSchema`] that can be evaluated on any other
//! graph, which is how several graphs (or relation slices) share one feature
//! space.

use std::collections::HashSet;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2, Axis};

use crate::error::{Error, Result};
use crate::graphio::{Graph, LabeledMatrix, MultiGraph};
use crate::numkit::Tensor3;

pub const BASE_FEATURES: [&str; 5] =
    ["degree", "weighted_degree", "egonet_internal_edges", "egonet_external_edges", "clustering_coefficient"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Aggregator {
    Sum,
    Mean,
}

impl Aggregator {
    pub fn name(self) -> &'static str {
        match self {
            Aggregator::Sum => "sum",
            Aggregator::Mean => "mean",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s.trim() {
            "sum" => Ok(Aggregator::Sum),
            "mean" => Ok(Aggregator::Mean),
            other => Err(Error::Config(format!("unknown aggregator {other:?}, expected sum or mean"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureConfig {
    pub max_depth: usize,
    pub prune_corr: f64,
    pub log_transform: bool,
    pub aggregators: Vec<Aggregator>,
}

impl Default for FeatureConfig {
    fn default() -> Self {
        Self {
            max_depth: 2,
            prune_corr: 0.95,
            log_transform: true,
            aggregators: vec![Aggregator::Sum, Aggregator::Mean],
        }
    }
}

impl FeatureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.prune_corr) {
            return Err(Error::Config(format!("prune_corr must be in [0, 1], got {}", self.prune_corr)));
        }
        if self.max_depth > 0 && self.aggregators.is_empty() {
            return Err(Error::Config("recursion needs at least one aggregator".into()));
        }
        Ok(())
    }
}

/// How one feature column is derived.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum FeatureDef {
    /// Column of the base feature matrix.
    Base(usize),
    /// Neighbor aggregate of an earlier schema column.
    Aggregate { agg: Aggregator, source: usize },
}

/// Ordered list of feature derivations; every `Aggregate` refers to an
/// earlier entry.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSchema {
    pub defs: Vec<FeatureDef>,
    pub names: Vec<String>,
}

impl FeatureSchema {
    pub fn len(&self) -> usize {
        self.defs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.defs.is_empty()
    }

    /// Raw (untransformed) feature values of `graph` under this schema.
    pub fn evaluate(&self, graph: &Graph) -> Array2<f64> {
        let adj = graph.undirected_adjacency();
        let base = base_values(&adj);
        let mut out = Array2::zeros((graph.node_count(), self.len()));
        for (c, def) in self.defs.iter().enumerate() {
            let col = match *def {
                FeatureDef::Base(b) => base.column(b).to_owned(),
                FeatureDef::Aggregate { agg, source } => aggregate(&adj, out.column(source), agg),
            };
            out.column_mut(c).assign(&col);
        }
        out
    }
}

/// Per-column `log(1+x)` followed by min-max scaling with stored bounds.
#[derive(Debug, Clone, PartialEq)]
pub struct Scaling {
    pub mins: Vec<f64>,
    pub maxs: Vec<f64>,
}

impl Scaling {
    /// Bounds of `log(1+x)` over all rows of all matrices.
    pub fn fit(matrices: &[ArrayView2<f64>]) -> Self {
        let cols = matrices.first().map_or(0, |m| m.ncols());
        let mut mins = vec![f64::INFINITY; cols];
        let mut maxs = vec![f64::NEG_INFINITY; cols];
        for m in matrices {
            for row in m.rows() {
                for (c, &x) in row.iter().enumerate() {
                    let t = x.ln_1p();
                    mins[c] = mins[c].min(t);
                    maxs[c] = maxs[c].max(t);
                }
            }
        }
        for c in 0..cols {
            if !mins[c].is_finite() {
                mins[c] = 0.0;
                maxs[c] = 0.0;
            }
        }
        Self { mins, maxs }
    }

    /// Transform `raw` with these bounds. Values below the stored minimum
    /// (possible on a graph other than the one the bounds came from) clamp to 0.
    pub fn apply(&self, raw: ArrayView2<f64>) -> Array2<f64> {
        let mut out = raw.mapv(f64::ln_1p);
        for (c, mut col) in out.axis_iter_mut(Axis(1)).enumerate() {
            let span = self.maxs[c] - self.mins[c];
            if span > 0.0 {
                col.mapv_inplace(|t| ((t - self.mins[c]) / span).max(0.0));
            } else {
                col.fill(0.0);
            }
        }
        out
    }
}

/// Extracted features with everything needed to evaluate them elsewhere.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureSet {
    pub matrix: LabeledMatrix,
    pub schema: FeatureSchema,
    pub scaling: Option<Scaling>,
}

impl FeatureSet {
    /// Evaluate the same features (and scaling, if any) on another graph.
    pub fn apply_to(&self, graph: &Graph) -> LabeledMatrix {
        let raw = self.schema.evaluate(graph);
        let values = match &self.scaling {
            Some(s) => s.apply(raw.view()),
            None => raw,
        };
        LabeledMatrix { values, row_labels: graph.node_ids.clone(), col_labels: self.schema.names.clone() }
    }
}

fn base_values(adj: &[Vec<(usize, f64)>]) -> Array2<f64> {
    let n = adj.len();
    let neighbor_sets: Vec<HashSet<usize>> = adj.iter().map(|l| l.iter().map(|&(j, _)| j).collect()).collect();
    let mut out = Array2::zeros((n, BASE_FEATURES.len()));
    let mut in_ego = vec![false; n];
    for v in 0..n {
        let deg = adj[v].len();
        let wdeg: f64 = adj[v].iter().map(|&(_, w)| w).sum();

        in_ego[v] = true;
        for &(u, _) in &adj[v] {
            in_ego[u] = true;
        }
        // each edge touching the egonet is seen from its ego endpoints
        let mut internal_twice = 0usize;
        let mut external = 0usize;
        let mut members = vec![v];
        members.extend(adj[v].iter().map(|&(u, _)| u));
        for &a in &members {
            for &(b, _) in &adj[a] {
                if in_ego[b] {
                    internal_twice += 1;
                } else {
                    external += 1;
                }
            }
        }
        for &a in &members {
            in_ego[a] = false;
        }

        let mut closed = 0usize;
        for (x, &(a, _)) in adj[v].iter().enumerate() {
            for &(b, _) in &adj[v][x + 1..] {
                if neighbor_sets[a].contains(&b) {
                    closed += 1;
                }
            }
        }
        let cc = if deg < 2 { 0.0 } else { closed as f64 / (deg * (deg - 1) / 2) as f64 };

        out[[v, 0]] = deg as f64;
        out[[v, 1]] = wdeg;
        out[[v, 2]] = (internal_twice / 2) as f64;
        out[[v, 3]] = external as f64;
        out[[v, 4]] = cc;
    }
    out
}

fn aggregate(adj: &[Vec<(usize, f64)>], col: ArrayView1<f64>, agg: Aggregator) -> Array1<f64> {
    Array1::from_shape_fn(adj.len(), |v| {
        let sum: f64 = adj[v].iter().map(|&(u, _)| col[u]).sum();
        match agg {
            Aggregator::Sum => sum,
            Aggregator::Mean if adj[v].is_empty() => 0.0,
            Aggregator::Mean => sum / adj[v].len() as f64,
        }
    })
}

/// The five base features (see the module table); rows follow `graph.node_ids`.
pub fn base_features(graph: &Graph) -> LabeledMatrix {
    let adj = graph.undirected_adjacency();
    LabeledMatrix {
        values: base_values(&adj),
        row_labels: graph.node_ids.clone(),
        col_labels: BASE_FEATURES.iter().map(|s| s.to_string()).collect(),
    }
}

/// Pearson correlation; a constant column correlates 1 with another constant
/// column and 0 with anything else.
pub fn pearson(a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
    let n = a.len() as f64;
    if a.is_empty() {
        return 1.0;
    }
    let ma = a.sum() / n;
    let mb = b.sum() / n;
    let (mut sab, mut saa, mut sbb) = (0.0, 0.0, 0.0);
    for (&x, &y) in a.iter().zip(b.iter()) {
        let (dx, dy) = (x - ma, y - mb);
        sab += dx * dy;
        saa += dx * dx;
        sbb += dy * dy;
    }
    match (saa == 0.0, sbb == 0.0) {
        (true, true) => 1.0,
        (true, false) | (false, true) => 0.0,
        _ => (sab / (saa.sqrt() * sbb.sqrt())).clamp(-1.0, 1.0),
    }
}

/// Greedy correlation pruning in column order. The first `protected` columns
/// are always kept; a later column is kept unless its absolute correlation
/// with some kept column exceeds `threshold`. Returns kept column indices.
pub fn prune_columns(m: ArrayView2<f64>, threshold: f64, protected: usize) -> Vec<usize> {
    let mut kept: Vec<usize> = (0..protected.min(m.ncols())).collect();
    for c in protected..m.ncols() {
        let col = m.column(c);
        if kept.iter().all(|&k| pearson(m.column(k), col).abs() <= threshold) {
            kept.push(c);
        }
    }
    kept
}

/// Recursive features on top of `base` (whose columns become `Base` entries
/// of the schema).
pub fn recurse_features(graph: &Graph, base: &LabeledMatrix, config: &FeatureConfig) -> Result<FeatureSet> {
    config.validate()?;
    let n = graph.node_count();
    if base.values.nrows() != n {
        return Err(Error::Input(format!("base has {} rows for {n} nodes", base.values.nrows())));
    }
    let adj = graph.undirected_adjacency();
    let mut defs: Vec<FeatureDef> = (0..base.values.ncols()).map(FeatureDef::Base).collect();
    let mut names = base.col_labels.clone();
    let mut columns: Vec<Array1<f64>> = base.values.columns().into_iter().map(|c| c.to_owned()).collect();
    let mut frontier: Vec<usize> = (0..columns.len()).collect();

    for _ in 0..config.max_depth {
        let mut added = Vec::new();
        for &src in &frontier {
            for &agg in &config.aggregators {
                let col = aggregate(&adj, columns[src].view(), agg);
                let keep = columns.iter().all(|c| pearson(c.view(), col.view()).abs() <= config.prune_corr);
                if keep {
                    added.push(columns.len());
                    defs.push(FeatureDef::Aggregate { agg, source: src });
                    names.push(format!("{}({})", agg.name(), names[src]));
                    columns.push(col);
                }
            }
        }
        if added.is_empty() {
            break;
        }
        frontier = added;
    }

    let raw = Array2::from_shape_fn((n, columns.len()), |(i, c)| columns[c][i]);
    let schema = FeatureSchema { defs, names };
    let (values, scaling) = if config.log_transform {
        let s = Scaling::fit(&[raw.view()]);
        (s.apply(raw.view()), Some(s))
    } else {
        (raw, None)
    };
    Ok(FeatureSet {
        matrix: LabeledMatrix { values, row_labels: graph.node_ids.clone(), col_labels: schema.names.clone() },
        schema,
        scaling,
    })
}

/// Base plus recursive features of one graph.
pub fn extract_features(graph: &Graph, config: &FeatureConfig) -> Result<FeatureSet> {
    recurse_features(graph, &base_features(graph), config)
}

/// Feature tensor of a multigraph: entities × features × relations.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureTensor {
    pub tensor: Tensor3,
    pub node_labels: Vec<String>,
    pub feature_labels: Vec<String>,
    pub relation_labels: Vec<String>,
    pub schema: FeatureSchema,
    pub scaling: Option<Scaling>,
}

/// One feature slice per relation, all under the schema learned on the
/// relation-aggregated graph. With `log_transform`, scaling bounds are taken
/// over all slices jointly so slices stay comparable.
pub fn extract_tensor(graph: &MultiGraph, config: &FeatureConfig) -> Result<FeatureTensor> {
    let raw_config = FeatureConfig { log_transform: false, ..config.clone() };
    let schema = extract_features(&graph.aggregate(), &raw_config)?.schema;
    let slices: Vec<Array2<f64>> =
        (0..graph.relation_count()).map(|k| schema.evaluate(&graph.relation_graph(k))).collect();
    let scaling = config.log_transform.then(|| Scaling::fit(&slices.iter().map(|s| s.view()).collect::<Vec<_>>()));
    let slices: Vec<Array2<f64>> = match &scaling {
        Some(s) => slices.iter().map(|m| s.apply(m.view())).collect(),
        None => slices,
    };
    let dims = (graph.node_count(), schema.len(), graph.relation_count());
    let tensor = Tensor3::from_fn(dims, |i, j, k| slices[k][[i, j]]);
    Ok(FeatureTensor {
        tensor,
        node_labels: graph.node_ids.clone(),
        feature_labels: schema.names.clone(),
        relation_labels: graph.relation_ids.clone(),
        schema,
        scaling,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graphio::{load_edge_list, load_multigraph};
    use ndarray::array;

    fn path() -> Graph {
        load_edge_list("a\tb\nb\tc\n", false).unwrap()
    }

    #[test]
    fn triangle() {
        let g = load_edge_list("a\tb\nb\tc\na\tc\n", false).unwrap();
        let f = base_features(&g);
        for i in 0..3 {
            assert_eq!(f.values.row(i).to_vec(), vec![2.0, 2.0, 3.0, 0.0, 1.0]);
        }
    }

    #[test]
    fn path_middle_and_end() {
        let f = base_features(&path());
        assert_eq!(f.values.row(1).to_vec(), vec![2.0, 2.0, 2.0, 0.0, 0.0]);
        assert_eq!(f.values.row(0).to_vec(), vec![1.0, 1.0, 1.0, 1.0, 0.0]);
    }

    #[test]
    fn isolated_node_is_zero() {
        let mut g = path();
        g.node_ids.push("z".into());
        let f = base_features(&g);
        assert!(f.values.row(3).iter().all(|&x| x == 0.0));
    }

    #[test]
    fn self_loops_ignored() {
        let g = load_edge_list("a\ta\na\tb\n", false).unwrap();
        assert_eq!(base_features(&g).values.row(0).to_vec(), vec![1.0, 1.0, 1.0, 0.0, 0.0]);
    }

    #[test]
    fn neighbor_sum_and_mean() {
        let g = path();
        let adj = g.undirected_adjacency();
        let deg = array![1.0, 2.0, 1.0];
        assert_eq!(aggregate(&adj, deg.view(), Aggregator::Sum), array![2.0, 2.0, 2.0]);
        assert_eq!(aggregate(&adj, deg.view(), Aggregator::Mean), array![2.0, 1.0, 2.0]);
    }

    #[test]
    fn threshold_one_keeps_everything() {
        let g = load_edge_list("a\tb\nb\tc\nc\td\nd\te\nb\td\n", false).unwrap();
        let cfg = FeatureConfig { max_depth: 1, prune_corr: 1.0, log_transform: false, ..Default::default() };
        let f = extract_features(&g, &cfg).unwrap();
        assert_eq!(f.schema.len(), 5 + 10);
    }

    #[test]
    fn pruning_is_idempotent() {
        let m = array![[1.0, 2.0, 3.0, 0.5], [2.0, 4.0, 1.0, 0.1], [3.0, 6.0, 2.0, 0.9]];
        let kept = prune_columns(m.view(), 0.9, 1);
        let sub = m.select(Axis(1), &kept);
        assert_eq!(prune_columns(sub.view(), 0.9, 1), (0..kept.len()).collect::<Vec<_>>());
        assert!(!kept.contains(&1));
    }

    #[test]
    fn schema_reevaluates_to_same_values() {
        let g = load_edge_list("a\tb\nb\tc\nc\ta\nc\td\nd\te\n", false).unwrap();
        let f = extract_features(&g, &FeatureConfig::default()).unwrap();
        assert_eq!(f.apply_to(&g), f.matrix);
    }

    #[test]
    fn empty_relation_gives_zero_slice() {
        let mut mg = load_multigraph("a\tb\tX\nb\tc\tX\n", false).unwrap();
        mg.relation_ids.push("Y".into());
        let t = extract_tensor(&mg, &FeatureConfig { log_transform: false, ..Default::default() }).unwrap();
        let (n, f, m) = t.tensor.dims();
        assert_eq!(m, 2);
        for i in 0..n {
            for j in 0..f {
                assert_eq!(t.tensor.get(i, j, 1), 0.0);
            }
        }
    }

    #[test]
    fn bad_config() {
        let cfg = FeatureConfig { aggregators: vec![], ..Default::default() };
        assert!(matches!(extract_features(&path(), &cfg), Err(Error::Config(_))));
    }
}
