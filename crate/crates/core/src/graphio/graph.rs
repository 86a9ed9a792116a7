use std::collections::HashMap;

use crate::error::{Error, Result};

/// Weighted graph over string-labelled nodes.
///
/// Parallel edges are summed when loading. Undirected graphs store every edge
/// once with `src <= dst`.
#[derive(Debug, Clone, PartialEq)]
pub struct Graph {
    pub node_ids: Vec<String>,
    pub edges: Vec<(usize, usize, f64)>,
    pub directed: bool,
}

/// Multi-relational graph: every edge carries a relation index.
#[derive(Debug, Clone, PartialEq)]
pub struct MultiGraph {
    pub node_ids: Vec<String>,
    pub relation_ids: Vec<String>,
    pub edges: Vec<(usize, usize, usize, f64)>,
    pub directed: bool,
}

/// Assigns dense indices to labels in first-seen order.
#[derive(Debug, Default)]
struct Interner {
    ids: Vec<String>,
    index: HashMap<String, usize>,
}

impl Interner {
    fn intern(&mut self, label: &str) -> usize {
        if let Some(&i) = self.index.get(label) {
            return i;
        }
        let i = self.ids.len();
        self.ids.push(label.to_string());
        self.index.insert(label.to_string(), i);
        i
    }
}

fn data_lines(text: &str) -> impl Iterator<Item = (usize, Vec<&str>)> {
    text.lines().enumerate().filter_map(|(i, raw)| {
        let line = raw.trim_end_matches('\r');
        if line.trim().is_empty() || line.trim_start().starts_with('#') {
            None
        } else {
            Some((i + 1, line.split('\t').collect()))
        }
    })
}

fn parse_weight(field: &str, line: usize) -> Result<f64> {
    let w: f64 = field.trim().parse().map_err(|_| Error::parse(line, format!("weight {field:?} is not a number")))?;
    if !w.is_finite() {
        return Err(Error::parse(line, format!("weight {field:?} is not finite")));
    }
    if w < 0.0 {
        return Err(Error::parse(line, format!("negative weight {w}")));
    }
    Ok(w)
}

fn orient(directed: bool, a: usize, b: usize) -> (usize, usize) {
    if directed || a <= b {
        (a, b)
    } else {
        (b, a)
    }
}

/// Parse `src<TAB>dst[<TAB>weight]` lines. Missing weights are 1.0.
pub fn load_edge_list(text: &str, directed: bool) -> Result<Graph> {
    let mut nodes = Interner::default();
    let mut edges: Vec<(usize, usize, f64)> = Vec::new();
    let mut position: HashMap<(usize, usize), usize> = HashMap::new();
    for (line, fields) in data_lines(text) {
        if fields.len() < 2 || fields.len() > 3 {
            return Err(Error::parse(line, format!("expected 2 or 3 tab-separated fields, got {}", fields.len())));
        }
        let w = match fields.get(2) {
            Some(f) => parse_weight(f, line)?,
            None => 1.0,
        };
        let a = nodes.intern(fields[0].trim());
        let b = nodes.intern(fields[1].trim());
        let key = orient(directed, a, b);
        match position.get(&key) {
            Some(&p) => edges[p].2 += w,
            None => {
                position.insert(key, edges.len());
                edges.push((key.0, key.1, w));
            }
        }
    }
    Ok(Graph { node_ids: nodes.ids, edges, directed })
}

/// Parse `src<TAB>dst<TAB>relation[<TAB>weight]` lines.
pub fn load_multigraph(text: &str, directed: bool) -> Result<MultiGraph> {
    let mut nodes = Interner::default();
    let mut relations = Interner::default();
    let mut edges: Vec<(usize, usize, usize, f64)> = Vec::new();
    let mut position: HashMap<(usize, usize, usize), usize> = HashMap::new();
    for (line, fields) in data_lines(text) {
        if fields.len() < 3 || fields.len() > 4 {
            return Err(Error::parse(line, format!("expected 3 or 4 tab-separated fields, got {}", fields.len())));
        }
        let w = match fields.get(3) {
            Some(f) => parse_weight(f, line)?,
            None => 1.0,
        };
        let a = nodes.intern(fields[0].trim());
        let b = nodes.intern(fields[1].trim());
        let rel = relations.intern(fields[2].trim());
        let (s, d) = orient(directed, a, b);
        match position.get(&(s, d, rel)) {
            Some(&p) => edges[p].3 += w,
            None => {
                position.insert((s, d, rel), edges.len());
                edges.push((s, d, rel, w));
            }
        }
    }
    Ok(MultiGraph { node_ids: nodes.ids, relation_ids: relations.ids, edges, directed })
}

impl Graph {
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    /// Symmetrized adjacency lists without self-loops, sorted by neighbor
    /// index. Weights of both directions of a directed pair are summed.
    pub fn undirected_adjacency(&self) -> Vec<Vec<(usize, f64)>> {
        let n = self.node_count();
        let mut maps: Vec<HashMap<usize, f64>> = vec![HashMap::new(); n];
        for &(a, b, w) in &self.edges {
            if a == b {
                continue;
            }
            *maps[a].entry(b).or_insert(0.0) += w;
            *maps[b].entry(a).or_insert(0.0) += w;
        }
        maps.into_iter()
            .map(|m| {
                let mut v: Vec<(usize, f64)> = m.into_iter().collect();
                v.sort_by_key(|&(j, _)| j);
                v
            })
            .collect()
    }

    /// Render as an edge list accepted by [`load_edge_list`]. Isolated nodes
    /// are not representable and are dropped.
    pub fn to_edge_list(&self) -> String {
        let mut out = String::new();
        for &(a, b, w) in &self.edges {
            out.push_str(&format!("{}\t{}\t{}\n", self.node_ids[a], self.node_ids[b], w));
        }
        out
    }
}

impl MultiGraph {
    pub fn node_count(&self) -> usize {
        self.node_ids.len()
    }

    pub fn relation_count(&self) -> usize {
        self.relation_ids.len()
    }

    /// Edges of one relation as a graph over the full shared node set.
    pub fn relation_graph(&self, relation: usize) -> Graph {
        Graph {
            node_ids: self.node_ids.clone(),
            edges: self.edges.iter().filter(|e| e.2 == relation).map(|&(a, b, _, w)| (a, b, w)).collect(),
            directed: self.directed,
        }
    }

    /// All relations collapsed into one graph, parallel edges summed.
    pub fn aggregate(&self) -> Graph {
        let mut edges: Vec<(usize, usize, f64)> = Vec::new();
        let mut position: HashMap<(usize, usize), usize> = HashMap::new();
        for &(a, b, _, w) in &self.edges {
            match position.get(&(a, b)) {
                Some(&p) => edges[p].2 += w,
                None => {
                    position.insert((a, b), edges.len());
                    edges.push((a, b, w));
                }
            }
        }
        Graph { node_ids: self.node_ids.clone(), edges, directed: self.directed }
    }
}
