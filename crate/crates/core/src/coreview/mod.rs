//! Reading a Tucker core: slices, the E-group/role/R-group interaction
//! graph, per-E-group tie patterns, graph-level summary metrics and a 2-D
//! embedding of the core's hyper-edges.
//!
//! A core entry `ℋ[i,j,k]` is kept when it is positive and at least
//! `threshold_frac × max(ℋ)`. Slices are oriented rows = roles,
//! columns = R-groups.

mod embed;
mod metrics;

pub use embed::{embed_core, kmeans, CoreEmbedding};
pub use metrics::{macro_metrics, pagerank, stoer_wagner_mincut, MacroMetrics, StabilityOperator};

use std::collections::BTreeMap;

use ndarray::Array2;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::numkit::Tensor3;

pub const DEFAULT_THRESHOLD_FRAC: f64 = 0.1;

/// `ℋ[i, ·, ·]`: rows are roles, columns are R-groups.
#[derive(Debug, Clone, PartialEq)]
pub struct CoreSlice {
    pub egroup: usize,
    pub values: Array2<f64>,
}

pub fn slice_core(core: &Tensor3, egroup: usize) -> Result<CoreSlice> {
    let p = core.dims().0;
    if egroup >= p {
        return Err(Error::Input(format!("E-group {egroup} out of range for a core with {p} E-groups")));
    }
    Ok(CoreSlice { egroup, values: core.slice_mode1(egroup) })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize)]
pub enum NodeKind {
    EGroup(usize),
    Role(usize),
    RGroup(usize),
}

impl NodeKind {
    pub fn kind_name(self) -> &'static str {
        match self {
            NodeKind::EGroup(_) => "egroup",
            NodeKind::Role(_) => "role",
            NodeKind::RGroup(_) => "rgroup",
        }
    }

    pub fn index(self) -> usize {
        match self {
            NodeKind::EGroup(i) | NodeKind::Role(i) | NodeKind::RGroup(i) => i,
        }
    }

    pub fn label(self) -> String {
        match self {
            NodeKind::EGroup(i) => format!("E{i}"),
            NodeKind::Role(i) => format!("role{i}"),
            NodeKind::RGroup(i) => format!("R{i}"),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphMode {
    /// Every kept entry becomes a triangle E-group–role–R-group.
    Clique,
    /// As clique but without the role–R-group edge.
    Tripartite,
}

/// Weighted undirected graph over the core's E-groups, roles and R-groups.
///
/// Only nodes that take part in at least one kept entry are present. Nodes
/// are ordered E-groups, roles, R-groups, each by index; edges are stored
/// once with `a < b`, sorted.
#[derive(Debug, Clone, PartialEq)]
pub struct InteractionGraph {
    pub nodes: Vec<NodeKind>,
    pub edges: Vec<(usize, usize, f64)>,
    pub mode: GraphMode,
    pub threshold: f64,
}

impl InteractionGraph {
    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    /// Dense symmetric weight matrix.
    pub fn weights(&self) -> Array2<f64> {
        let n = self.nodes.len();
        let mut w = Array2::zeros((n, n));
        for &(a, b, x) in &self.edges {
            w[[a, b]] += x;
            w[[b, a]] += x;
        }
        w
    }

    /// Tab-separated `a b weight` lines using node labels.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(a, b, w) in &self.edges {
            out.push_str(&format!("{}\t{}\t{}\n", self.nodes[a].label(), self.nodes[b].label(), w));
        }
        out
    }
}

/// Absolute cutoff `frac × max(ℋ)`.
pub fn core_threshold(core: &Tensor3, threshold_frac: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&threshold_frac) {
        return Err(Error::Config(format!("threshold_frac must be in [0, 1], got {threshold_frac}")));
    }
    Ok(threshold_frac * core.max().max(0.0))
}

/// Kept entries `(i, j, k, h)` in index order (i fastest).
pub fn kept_entries(core: &Tensor3, threshold_frac: f64) -> Result<Vec<(usize, usize, usize, f64)>> {
    let cut = core_threshold(core, threshold_frac)?;
    let (p, q, s) = core.dims();
    let mut out = Vec::new();
    for k in 0..s {
        for j in 0..q {
            for i in 0..p {
                let h = core.get(i, j, k);
                if h > 0.0 && h >= cut {
                    out.push((i, j, k, h));
                }
            }
        }
    }
    Ok(out)
}

pub fn build_interaction_graph(core: &Tensor3, threshold_frac: f64, mode: GraphMode) -> Result<InteractionGraph> {
    let threshold = core_threshold(core, threshold_frac)?;
    let entries = kept_entries(core, threshold_frac)?;
    let mut weights: BTreeMap<(NodeKind, NodeKind), f64> = BTreeMap::new();
    let mut add = |a: NodeKind, b: NodeKind, h: f64| *weights.entry((a, b)).or_insert(0.0) += h;
    for &(i, j, k, h) in &entries {
        add(NodeKind::EGroup(i), NodeKind::Role(j), h);
        add(NodeKind::EGroup(i), NodeKind::RGroup(k), h);
        if mode == GraphMode::Clique {
            add(NodeKind::Role(j), NodeKind::RGroup(k), h);
        }
    }
    let mut nodes: Vec<NodeKind> = entries
        .iter()
        .flat_map(|&(i, j, k, _)| [NodeKind::EGroup(i), NodeKind::Role(j), NodeKind::RGroup(k)])
        .collect();
    nodes.sort();
    nodes.dedup();
    let index: BTreeMap<NodeKind, usize> = nodes.iter().enumerate().map(|(i, &n)| (n, i)).collect();
    let edges = weights.into_iter().map(|((a, b), w)| (index[&a], index[&b], w)).collect();
    Ok(InteractionGraph { nodes, edges, mode, threshold })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Pattern {
    Inactive,
    NoTie,
    RGroupTie,
    RoleTie,
    BowTie,
}

impl Pattern {
    pub fn name(self) -> &'static str {
        match self {
            Pattern::Inactive => "inactive",
            Pattern::NoTie => "no_tie",
            Pattern::RGroupTie => "rgroup_tie",
            Pattern::RoleTie => "role_tie",
            Pattern::BowTie => "bow_tie",
        }
    }
}

fn classify_values(values: &Array2<f64>, cut: f64) -> Pattern {
    let kept: Vec<(usize, usize)> =
        values.indexed_iter().filter(|(_, &h)| h > 0.0 && h >= cut).map(|(ix, _)| ix).collect();
    let mut roles: Vec<usize> = kept.iter().map(|&(j, _)| j).collect();
    let mut groups: Vec<usize> = kept.iter().map(|&(_, k)| k).collect();
    roles.sort_unstable();
    roles.dedup();
    groups.sort_unstable();
    groups.dedup();
    match (kept.len(), roles.len(), groups.len()) {
        (0, _, _) => Pattern::Inactive,
        (1, _, _) => Pattern::NoTie,
        (_, 1, _) => Pattern::RGroupTie,
        (_, _, 1) => Pattern::RoleTie,
        _ => Pattern::BowTie,
    }
}

/// Tie pattern of one slice, thresholded relative to the slice's own maximum.
pub fn classify_pattern(slice: &CoreSlice, threshold_frac: f64) -> Pattern {
    let max = slice.values.iter().fold(0.0f64, |m, &v| m.max(v));
    classify_values(&slice.values, threshold_frac * max)
}

/// Tie pattern of every E-group, thresholded relative to the whole core (the
/// same cut [`build_interaction_graph`] uses).
pub fn classify_core(core: &Tensor3, threshold_frac: f64) -> Result<Vec<Pattern>> {
    let cut = core_threshold(core, threshold_frac)?;
    Ok((0..core.dims().0).map(|i| classify_values(&core.slice_mode1(i), cut)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use ndarray::array;

    fn core_from(entries: &[(usize, usize, usize, f64)], dims: (usize, usize, usize)) -> Tensor3 {
        let mut t = Tensor3::zeros(dims);
        for &(i, j, k, v) in entries {
            t.set(i, j, k, v);
        }
        t
    }

    #[test]
    fn slice_is_copy() {
        let core = core_from(&[(0, 0, 0, 1.0), (0, 1, 1, 2.0), (1, 0, 1, 5.0)], (2, 2, 2));
        assert_eq!(slice_core(&core, 0).unwrap().values, array![[1.0, 0.0], [0.0, 2.0]]);
        assert!(slice_core(&core, 2).is_err());
    }

    #[test]
    fn single_entry_clique_and_tripartite() {
        let core = core_from(&[(0, 0, 0, 1.0)], (1, 1, 1));
        let g = build_interaction_graph(&core, 0.1, GraphMode::Clique).unwrap();
        assert_eq!(g.nodes, vec![NodeKind::EGroup(0), NodeKind::Role(0), NodeKind::RGroup(0)]);
        assert_eq!(g.edges, vec![(0, 1, 1.0), (0, 2, 1.0), (1, 2, 1.0)]);
        let t = build_interaction_graph(&core, 0.1, GraphMode::Tripartite).unwrap();
        assert_eq!(t.edges, vec![(0, 1, 1.0), (0, 2, 1.0)]);
    }

    #[test]
    fn weights_are_summed() {
        let core = core_from(&[(0, 0, 0, 1.0), (0, 0, 1, 1.0)], (1, 1, 2));
        let g = build_interaction_graph(&core, 0.1, GraphMode::Clique).unwrap();
        assert_eq!(g.edges[0], (0, 1, 2.0));
    }

    #[test]
    fn zero_core_is_empty_graph() {
        let g = build_interaction_graph(&Tensor3::zeros((2, 2, 2)), 0.1, GraphMode::Clique).unwrap();
        assert!(g.nodes.is_empty() && g.edges.is_empty());
    }

    #[test]
    fn patterns() {
        let slice = |v: Array2<f64>| CoreSlice { egroup: 0, values: v };
        assert_eq!(classify_pattern(&slice(array![[0.0, 0.0], [0.0, 0.0]]), 0.1), Pattern::Inactive);
        assert_eq!(classify_pattern(&slice(array![[3.0, 0.0], [0.0, 0.0]]), 0.1), Pattern::NoTie);
        assert_eq!(classify_pattern(&slice(array![[3.0, 3.0], [0.0, 0.0]]), 0.1), Pattern::RGroupTie);
        assert_eq!(classify_pattern(&slice(array![[3.0, 0.0], [3.0, 0.0]]), 0.1), Pattern::RoleTie);
        assert_eq!(classify_pattern(&slice(array![[3.0, 0.0], [0.0, 3.0]]), 0.1), Pattern::BowTie);
        // below-threshold entries are ignored
        assert_eq!(classify_pattern(&slice(array![[3.0, 0.01], [0.0, 0.0]]), 0.1), Pattern::NoTie);
    }

    #[test]
    fn bad_threshold() {
        assert!(build_interaction_graph(&Tensor3::zeros((1, 1, 1)), 1.5, GraphMode::Clique).is_err());
    }
}
