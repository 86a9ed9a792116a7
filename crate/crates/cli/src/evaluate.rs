use std::collections::{BTreeMap, HashMap, HashSet};
use std::fmt::Write as _;

use rolekit::graphio::LabeledMatrix;
use rolekit::tasks::{
    assign_roles, check_feature_schema, dominant_partition, jaccard_matrix, recall_curve, role_proportion_stddev,
    Distance,
};

use crate::args::{CompareArgs, MetricArg, ResolveArgs};
use crate::artifacts::{
    manifest_for, matrix_csv, read_matrix, read_role_model, read_text, write_manifest, write_text, Failure, InModule,
};

fn role_labels(r: usize) -> Vec<String> {
    (0..r).map(|j| format!("role{j}")).collect()
}

pub fn resolve(a: &ResolveArgs, argv: &[String]) -> Result<(), Failure> {
    let model = read_role_model(&a.model)?;
    let mut src = read_matrix(&a.source)?;
    let mut tgt = read_matrix(&a.target)?;
    check_feature_schema(&model.feature_labels, &src.col_labels).in_module("tasks")?;
    check_feature_schema(&model.feature_labels, &tgt.col_labels).in_module("tasks")?;
    if a.reverse {
        std::mem::swap(&mut src, &mut tgt);
    }
    let r = model.rank();
    let embed = |m: &LabeledMatrix| -> Result<LabeledMatrix, Failure> {
        let g = assign_roles(m.values.view(), model.f.view()).in_module("tasks")?;
        Ok(LabeledMatrix { values: g, row_labels: m.row_labels.clone(), col_labels: role_labels(r) })
    };
    let (gs, gt) = (embed(&src)?, embed(&tgt)?);

    let shared: Vec<String> = match &a.shared {
        Some(path) => read_text(path)?
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(str::to_string)
            .collect(),
        None => {
            let in_target: HashSet<&str> = gt.row_labels.iter().map(String::as_str).collect();
            gs.row_labels.iter().filter(|l| in_target.contains(l.as_str())).cloned().collect()
        }
    };
    let metric = match a.metric {
        MetricArg::Euclidean => Distance::Euclidean,
        MetricArg::Cosine => Distance::Cosine,
    };
    let ks: Vec<usize> = a.k.iter().map(|&k| k as usize).collect();
    let curve = recall_curve(&gs, &gt, &shared, &ks, metric).in_module("tasks")?;
    let mut csv = String::from("k,matches,shared,recall\n");
    for res in &curve {
        writeln!(csv, "{},{},{},{}", res.k, res.matches, res.shared_count, res.recall).expect("write to string");
        println!("k={} recall={}", res.k, res.recall);
    }
    write_text(&a.out, &csv)?;
    write_manifest(&manifest_for(&a.out), "resolve", argv, a, std::slice::from_ref(&a.out))
}

/// Community lists (node indices) in first-seen community order.
fn read_communities(text: &str, nodes: &[String]) -> Result<(Vec<String>, Vec<Vec<usize>>), Failure> {
    let index: HashMap<&str, usize> = nodes.iter().enumerate().map(|(i, l)| (l.as_str(), i)).collect();
    let mut order: Vec<String> = Vec::new();
    let mut members: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (ln, line) in text.lines().enumerate() {
        let line = line.trim_end_matches('\r');
        if line.trim().is_empty() || line.starts_with('#') {
            continue;
        }
        let mut parts = line.split('\t');
        let (Some(node), Some(comm), None) = (parts.next(), parts.next(), parts.next()) else {
            return Err(Failure::new("tasks", format!("community file line {}: expected node<TAB>community", ln + 1)));
        };
        let &v = index
            .get(node)
            .ok_or_else(|| Failure::new("tasks", format!("community file line {}: unknown node {node:?}", ln + 1)))?;
        let c = match order.iter().position(|c| c == comm) {
            Some(c) => c,
            None => {
                order.push(comm.to_string());
                order.len() - 1
            }
        };
        members.entry(c).or_default().push(v);
    }
    Ok((order, members.into_values().collect()))
}

pub fn compare(a: &CompareArgs, argv: &[String]) -> Result<(), Failure> {
    if a.against.is_none() && a.communities.is_none() {
        return Err(Failure::usage("tasks", "compare needs --against and/or --communities"));
    }
    let model = read_role_model(&a.model)?;
    let partition = dominant_partition(model.g.view());
    let mut artifacts = Vec::new();

    if let (Some(other_path), Some(out)) = (&a.against, &a.jaccard_out) {
        let other = read_role_model(other_path)?;
        if !model.node_labels.is_empty() && !other.node_labels.is_empty() && model.node_labels != other.node_labels {
            return Err(Failure::new("tasks", "the two models cover different node sets"));
        }
        let j = jaccard_matrix(&partition, &dominant_partition(other.g.view())).in_module("tasks")?;
        write_text(out, &matrix_csv("model\\against", &role_labels(model.rank()), &role_labels(other.rank()), &j))?;
        artifacts.push(out.clone());
    }
    if let (Some(comm_path), Some(out)) = (&a.communities, &a.stddev_out) {
        if model.node_labels.is_empty() {
            return Err(Failure::new("tasks", "model has no node labels to match communities against"));
        }
        let (names, communities) = read_communities(&read_text(comm_path)?, &model.node_labels)?;
        let sd = role_proportion_stddev(&partition, &communities).in_module("tasks")?;
        let mut csv = String::from("role,stddev\n");
        for (j, v) in sd.iter().enumerate() {
            writeln!(csv, "role{j},{v}").expect("write to string");
        }
        write_text(out, &csv)?;
        println!("{} communities", names.len());
        artifacts.push(out.clone());
    }
    write_manifest(&manifest_for(&artifacts[0]), "compare", argv, a, &artifacts)
}
