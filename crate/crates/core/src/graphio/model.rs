//! JSON model documents.
//!
//! ```text
//! {
//!   "format": "rolekit-model", "version": 1, "kind": "role" | "tucker",
//!   ...kind-specific fields...
//! }
//! ```
//!
//! Matrices are `{"rows", "cols", "values"}` with row-major values. The Tucker
//! core is stored sparsely as `[i, j, k, value]` entries next to its dims.
//! Infinite constraint bounds are written as `null`. Floats are written with
//! shortest round-trip formatting, so reading a written model gives back
//! exactly the same numbers.

use ndarray::Array2;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::glrd::{ConstraintKind, ConstraintSpec, RoleModel, Target};
use crate::mrd::{Factor, TuckerModel};
use crate::numkit::Tensor3;

const FORMAT: &str = "rolekit-model";
const VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub enum ModelDocument {
    Role(RoleModel),
    Tucker(TuckerModel),
}

impl ModelDocument {
    pub fn kind(&self) -> &'static str {
        match self {
            ModelDocument::Role(_) => "role",
            ModelDocument::Tucker(_) => "tucker",
        }
    }
}

#[derive(Serialize, Deserialize)]
struct MatrixDoc {
    rows: usize,
    cols: usize,
    values: Vec<f64>,
}

impl MatrixDoc {
    fn from_array(m: &Array2<f64>) -> Self {
        Self { rows: m.nrows(), cols: m.ncols(), values: m.iter().copied().collect() }
    }

    fn into_array(self, name: &str) -> Result<Array2<f64>> {
        let expected = self.rows.saturating_mul(self.cols);
        if self.values.len() != expected {
            return Err(Error::Format(format!(
                "{name} declared {}x{} but has {} values",
                self.rows,
                self.cols,
                self.values.len()
            )));
        }
        Array2::from_shape_vec((self.rows, self.cols), self.values).map_err(|e| Error::Format(format!("{name}: {e}")))
    }
}

#[derive(Serialize, Deserialize)]
struct ConstraintDoc {
    kind: ConstraintKind,
    target: Target,
    eps: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    reference: Option<MatrixDoc>,
}

#[derive(Serialize, Deserialize)]
struct RoleDoc {
    format: String,
    version: u32,
    kind: String,
    seed: u64,
    iterations: usize,
    objective: f64,
    relative_error: f64,
    #[serde(default)]
    node_labels: Vec<String>,
    #[serde(default)]
    feature_labels: Vec<String>,
    g: MatrixDoc,
    f: MatrixDoc,
    #[serde(default)]
    g_constraints: Vec<ConstraintDoc>,
    #[serde(default)]
    f_constraints: Vec<ConstraintDoc>,
    #[serde(default)]
    dead_roles: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CoreDoc {
    dims: [usize; 3],
    entries: Vec<(usize, usize, usize, f64)>,
}

#[derive(Serialize, Deserialize)]
struct TuckerDoc {
    format: String,
    version: u32,
    kind: String,
    seed: u64,
    iterations: usize,
    objective: f64,
    fit: f64,
    tol: f64,
    max_iters: usize,
    #[serde(default)]
    fixed: Vec<Factor>,
    #[serde(default)]
    zero_columns: Vec<(Factor, usize)>,
    #[serde(default)]
    entity_labels: Vec<String>,
    #[serde(default)]
    feature_labels: Vec<String>,
    #[serde(default)]
    relation_labels: Vec<String>,
    g: MatrixDoc,
    f: MatrixDoc,
    r: MatrixDoc,
    core: CoreDoc,
}

#[derive(Deserialize)]
struct Header {
    format: String,
    version: u32,
    kind: String,
}

fn constraint_doc(c: &ConstraintSpec) -> ConstraintDoc {
    ConstraintDoc {
        kind: c.kind,
        target: c.target,
        eps: c.eps.is_finite().then_some(c.eps),
        reference: c.reference.as_ref().map(MatrixDoc::from_array),
    }
}

fn constraint_spec(d: ConstraintDoc) -> Result<ConstraintSpec> {
    Ok(ConstraintSpec {
        kind: d.kind,
        target: d.target,
        eps: d.eps.unwrap_or(f64::INFINITY),
        reference: d.reference.map(|m| m.into_array("constraint reference")).transpose()?,
    })
}

fn check_labels(name: &str, labels: &[String], len: usize) -> Result<()> {
    if !labels.is_empty() && labels.len() != len {
        return Err(Error::Format(format!("{} {name} for {len} rows", labels.len())));
    }
    Ok(())
}

pub fn write_model(doc: &ModelDocument) -> String {
    let json = match doc {
        ModelDocument::Role(m) => serde_json::to_string_pretty(&RoleDoc {
            format: FORMAT.into(),
            version: VERSION,
            kind: "role".into(),
            seed: m.seed,
            iterations: m.iterations,
            objective: m.objective,
            relative_error: m.relative_error,
            node_labels: m.node_labels.clone(),
            feature_labels: m.feature_labels.clone(),
            g: MatrixDoc::from_array(&m.g),
            f: MatrixDoc::from_array(&m.f),
            g_constraints: m.g_constraints.iter().map(constraint_doc).collect(),
            f_constraints: m.f_constraints.iter().map(constraint_doc).collect(),
            dead_roles: m.dead_roles.clone(),
        }),
        ModelDocument::Tucker(m) => {
            let (p, q, s) = m.core.dims();
            let mut entries = Vec::new();
            for k in 0..s {
                for j in 0..q {
                    for i in 0..p {
                        let v = m.core.get(i, j, k);
                        if v != 0.0 {
                            entries.push((i, j, k, v));
                        }
                    }
                }
            }
            serde_json::to_string_pretty(&TuckerDoc {
                format: FORMAT.into(),
                version: VERSION,
                kind: "tucker".into(),
                seed: m.seed,
                iterations: m.iterations,
                objective: m.objective,
                fit: m.fit,
                tol: m.tol,
                max_iters: m.max_iters,
                fixed: m.fixed.clone(),
                zero_columns: m.zero_columns.clone(),
                entity_labels: m.entity_labels.clone(),
                feature_labels: m.feature_labels.clone(),
                relation_labels: m.relation_labels.clone(),
                g: MatrixDoc::from_array(&m.g),
                f: MatrixDoc::from_array(&m.f),
                r: MatrixDoc::from_array(&m.r),
                core: CoreDoc { dims: [p, q, s], entries },
            })
        }
    };
    let mut text = json.expect("model documents always serialize");
    text.push('\n');
    text
}

pub fn read_model(text: &str) -> Result<ModelDocument> {
    let bad = |e: serde_json::Error| Error::Format(format!("model document: {e}"));
    let header: Header = serde_json::from_str(text).map_err(bad)?;
    if header.format != FORMAT {
        return Err(Error::Format(format!("expected format {FORMAT:?}, found {:?}", header.format)));
    }
    if header.version != VERSION {
        return Err(Error::Format(format!("unsupported model version {}", header.version)));
    }
    match header.kind.as_str() {
        "role" => {
            let d: RoleDoc = serde_json::from_str(text).map_err(bad)?;
            let g = d.g.into_array("G")?;
            let f = d.f.into_array("F")?;
            if g.ncols() != f.nrows() {
                return Err(Error::Format(format!("G has {} roles but F has {}", g.ncols(), f.nrows())));
            }
            check_labels("node labels", &d.node_labels, g.nrows())?;
            check_labels("feature labels", &d.feature_labels, f.ncols())?;
            Ok(ModelDocument::Role(RoleModel {
                g,
                f,
                objective: d.objective,
                relative_error: d.relative_error,
                iterations: d.iterations,
                seed: d.seed,
                node_labels: d.node_labels,
                feature_labels: d.feature_labels,
                g_constraints: d.g_constraints.into_iter().map(constraint_spec).collect::<Result<_>>()?,
                f_constraints: d.f_constraints.into_iter().map(constraint_spec).collect::<Result<_>>()?,
                dead_roles: d.dead_roles,
            }))
        }
        "tucker" => {
            let d: TuckerDoc = serde_json::from_str(text).map_err(bad)?;
            let g = d.g.into_array("G")?;
            let f = d.f.into_array("F")?;
            let r = d.r.into_array("R")?;
            let [p, q, s] = d.core.dims;
            if (g.ncols(), f.ncols(), r.ncols()) != (p, q, s) {
                return Err(Error::Format(format!(
                    "core dims {:?} do not match factor ranks ({}, {}, {})",
                    d.core.dims,
                    g.ncols(),
                    f.ncols(),
                    r.ncols()
                )));
            }
            let mut core = Tensor3::zeros((p, q, s));
            for (i, j, k, v) in d.core.entries {
                if i >= p || j >= q || k >= s {
                    return Err(Error::Format(format!("core entry ({i}, {j}, {k}) outside dims {:?}", d.core.dims)));
                }
                core.set(i, j, k, v);
            }
            check_labels("entity labels", &d.entity_labels, g.nrows())?;
            check_labels("feature labels", &d.feature_labels, f.nrows())?;
            check_labels("relation labels", &d.relation_labels, r.nrows())?;
            Ok(ModelDocument::Tucker(TuckerModel {
                g,
                f,
                r,
                core,
                objective: d.objective,
                fit: d.fit,
                seed: d.seed,
                iterations: d.iterations,
                tol: d.tol,
                max_iters: d.max_iters,
                fixed: d.fixed,
                zero_columns: d.zero_columns,
                entity_labels: d.entity_labels,
                feature_labels: d.feature_labels,
                relation_labels: d.relation_labels,
            }))
        }
        other => Err(Error::Format(format!("unknown model kind {other:?}"))),
    }
}
