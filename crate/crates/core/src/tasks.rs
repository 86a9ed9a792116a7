//! Evaluation procedures built on fitted role models: transferring role
//! definitions to another graph, cross-graph identity resolution, and
//! comparisons of hard role partitions.

use std::collections::HashMap;

use ndarray::{Array1, Array2, ArrayView1, ArrayView2};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::graphio::LabeledMatrix;
use crate::numkit::nnls_gram;

/// Role assignments for `v` (n×f) under fixed role definitions `f_source`
/// (r×f): each row is the NNLS solution of `min ‖v_i - g_i F‖, g_i ≥ 0`.
pub fn assign_roles(v: ArrayView2<f64>, f_source: ArrayView2<f64>) -> Result<Array2<f64>> {
    if v.ncols() != f_source.ncols() {
        return Err(Error::Input(format!(
            "feature schema mismatch: matrix has {} features, role definitions have {}",
            v.ncols(),
            f_source.ncols()
        )));
    }
    let gram = f_source.dot(&f_source.t());
    let rhs = v.dot(&f_source.t());
    let mut g = Array2::zeros((v.nrows(), f_source.nrows()));
    for (i, row) in rhs.rows().into_iter().enumerate() {
        g.row_mut(i).assign(&nnls_gram(gram.view(), row));
    }
    Ok(g)
}

/// Require identical feature names when both sides carry them.
pub fn check_feature_schema(left: &[String], right: &[String]) -> Result<()> {
    if !left.is_empty() && !right.is_empty() && left != right {
        let first = left.iter().zip(right).position(|(a, b)| a != b).unwrap_or(left.len().min(right.len()));
        return Err(Error::Input(format!(
            "feature schema mismatch at column {first} ({} vs {} columns)",
            left.len(),
            right.len()
        )));
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    #[default]
    Euclidean,
    /// `1 - cos`; a zero vector has cosine 0 with everything.
    Cosine,
}

impl Distance {
    pub fn eval(self, a: ArrayView1<f64>, b: ArrayView1<f64>) -> f64 {
        match self {
            Distance::Euclidean => a.iter().zip(b.iter()).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt(),
            Distance::Cosine => {
                let na = a.dot(&a).sqrt();
                let nb = b.dot(&b).sqrt();
                if na == 0.0 || nb == 0.0 {
                    1.0
                } else {
                    1.0 - a.dot(&b) / (na * nb)
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResolutionResult {
    pub k: usize,
    pub matches: usize,
    pub shared_count: usize,
    pub recall: f64,
}

/// 0-based rank of each shared id's true counterpart among all target rows,
/// ordered by distance from its source row (ties broken by lower target
/// index).
pub fn match_ranks(
    src: &LabeledMatrix,
    tgt: &LabeledMatrix,
    shared: &[String],
    metric: Distance,
) -> Result<Vec<usize>> {
    if shared.is_empty() {
        return Err(Error::Input("no shared ids to resolve".into()));
    }
    if src.values.ncols() != tgt.values.ncols() {
        return Err(Error::Input(format!(
            "role spaces differ: {} vs {} roles",
            src.values.ncols(),
            tgt.values.ncols()
        )));
    }
    let (si, ti) = (row_index(src), row_index(tgt));
    shared
        .iter()
        .map(|id| {
            let (Some(&s), Some(&t)) = (si.get(id.as_str()), ti.get(id.as_str())) else {
                return Err(Error::Input(format!("shared id {id:?} is missing from one of the graphs")));
            };
            let q = src.values.row(s);
            let dt = metric.eval(q, tgt.values.row(t));
            let ahead = tgt
                .values
                .rows()
                .into_iter()
                .enumerate()
                .filter(|&(j, row)| {
                    let d = metric.eval(q, row);
                    d < dt || (d == dt && j < t)
                })
                .count();
            Ok(ahead)
        })
        .collect()
}

fn row_index(m: &LabeledMatrix) -> HashMap<&str, usize> {
    m.row_labels.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect()
}

/// Fraction of shared ids whose counterpart is among the `k` target rows
/// closest to their source row.
pub fn resolve_identity(
    src: &LabeledMatrix,
    tgt: &LabeledMatrix,
    shared: &[String],
    k: usize,
    metric: Distance,
) -> Result<ResolutionResult> {
    Ok(recall_curve(src, tgt, shared, &[k], metric)?.remove(0))
}

/// [`resolve_identity`] for several `k` at once.
pub fn recall_curve(
    src: &LabeledMatrix,
    tgt: &LabeledMatrix,
    shared: &[String],
    ks: &[usize],
    metric: Distance,
) -> Result<Vec<ResolutionResult>> {
    if let Some(&k) = ks.iter().find(|&&k| k == 0) {
        return Err(Error::Config(format!("k must be >= 1, got {k}")));
    }
    let ranks = match_ranks(src, tgt, shared, metric)?;
    Ok(ks
        .iter()
        .map(|&k| {
            let matches = ranks.iter().filter(|&&r| r < k).count();
            ResolutionResult { k, matches, shared_count: ranks.len(), recall: matches as f64 / ranks.len() as f64 }
        })
        .collect())
}

/// Hard role per node; `None` for nodes with an all-zero assignment row.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    pub assignment: Vec<Option<usize>>,
    pub roles: usize,
}

/// Most dominant role of every row (lowest index on ties).
pub fn dominant_partition(g: ArrayView2<f64>) -> Partition {
    let assignment = g
        .rows()
        .into_iter()
        .map(|row| {
            let mut best: Option<(usize, f64)> = None;
            for (j, &x) in row.iter().enumerate() {
                if x > 0.0 && best.is_none_or(|(_, b)| x > b) {
                    best = Some((j, x));
                }
            }
            best.map(|(j, _)| j)
        })
        .collect();
    Partition { assignment, roles: g.ncols() }
}

/// `1 - |Sₐ ∩ Tᵦ| / |Sₐ ∪ Tᵦ|` for every role pair; 0 when both sets are
/// empty. Unassigned nodes belong to no set.
pub fn jaccard_matrix(p1: &Partition, p2: &Partition) -> Result<Array2<f64>> {
    if p1.assignment.len() != p2.assignment.len() {
        return Err(Error::Input(format!(
            "partitions cover {} and {} nodes",
            p1.assignment.len(),
            p2.assignment.len()
        )));
    }
    let mut inter = Array2::<f64>::zeros((p1.roles, p2.roles));
    let mut size1 = vec![0.0; p1.roles];
    let mut size2 = vec![0.0; p2.roles];
    for (a, b) in p1.assignment.iter().zip(&p2.assignment) {
        if let Some(a) = *a {
            size1[a] += 1.0;
        }
        if let Some(b) = *b {
            size2[b] += 1.0;
        }
        if let (Some(a), Some(b)) = (*a, *b) {
            inter[[a, b]] += 1.0;
        }
    }
    Ok(Array2::from_shape_fn((p1.roles, p2.roles), |(a, b)| {
        let union = size1[a] + size2[b] - inter[[a, b]];
        if union == 0.0 {
            0.0
        } else {
            1.0 - inter[[a, b]] / union
        }
    }))
}

/// Population standard deviation, across communities, of the share of each
/// community's nodes holding each role. `communities` lists node indices.
pub fn role_proportion_stddev(p: &Partition, communities: &[Vec<usize>]) -> Result<Array1<f64>> {
    if communities.is_empty() {
        return Err(Error::Input("at least one community is required".into()));
    }
    let mut props = Array2::<f64>::zeros((communities.len(), p.roles));
    for (c, members) in communities.iter().enumerate() {
        if members.is_empty() {
            return Err(Error::Input(format!("community {c} is empty")));
        }
        for &v in members {
            let role = *p
                .assignment
                .get(v)
                .ok_or_else(|| Error::Input(format!("community member {v} is not a node of the partition")))?;
            if let Some(j) = role {
                props[[c, j]] += 1.0;
            }
        }
        let size = members.len() as f64;
        props.row_mut(c).mapv_inplace(|x| x / size);
    }
    let n = communities.len() as f64;
    Ok(Array1::from_shape_fn(p.roles, |j| {
        let col = props.column(j);
        let mean = col.sum() / n;
        (col.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / n).sqrt()
    }))
}
