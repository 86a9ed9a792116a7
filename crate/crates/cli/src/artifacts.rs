//! Reading inputs, writing outputs and their run manifests.

use std::path::{Path, PathBuf};

use rolekit::glrd::RoleModel;
use rolekit::graphio::{read_model, CooTensor, LabeledMatrix, ModelDocument};
use rolekit::mrd::TuckerModel;
use rolekit::numkit::Tensor3;
use serde::{Deserialize, Serialize};

/// A failed run: printed as `error [module]: message`.
#[derive(Debug)]
pub struct Failure {
    pub module: &'static str,
    pub message: String,
    /// Invalid values rather than a failed computation (exit 2).
    pub usage: bool,
}

impl Failure {
    pub fn new(module: &'static str, message: impl Into<String>) -> Self {
        Self { module, message: message.into(), usage: false }
    }

    pub fn usage(module: &'static str, message: impl Into<String>) -> Self {
        Self { module, message: message.into(), usage: true }
    }
}

pub trait InModule<T> {
    fn in_module(self, module: &'static str) -> Result<T, Failure>;
}

impl<T> InModule<T> for rolekit::Result<T> {
    fn in_module(self, module: &'static str) -> Result<T, Failure> {
        self.map_err(|e| Failure { module, usage: matches!(e, rolekit::Error::Config(_)), message: e.to_string() })
    }
}

pub fn read_text(path: &Path) -> Result<String, Failure> {
    std::fs::read_to_string(path).map_err(|e| Failure::new("graphio", format!("cannot read {}: {e}", path.display())))
}

pub fn write_text(path: &Path, text: &str) -> Result<(), Failure> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)
            .map_err(|e| Failure::new("graphio", format!("cannot create {}: {e}", parent.display())))?;
    }
    std::fs::write(path, text).map_err(|e| Failure::new("graphio", format!("cannot write {}: {e}", path.display())))
}

pub fn create_dir(path: &Path) -> Result<(), Failure> {
    std::fs::create_dir_all(path).map_err(|e| Failure::new("graphio", format!("cannot create {}: {e}", path.display())))
}

pub fn read_matrix(path: &Path) -> Result<LabeledMatrix, Failure> {
    let m = LabeledMatrix::read_csv(&read_text(path)?).in_module("graphio")?;
    m.ensure_nonnegative().in_module("graphio")?;
    Ok(m)
}

pub fn read_document(path: &Path) -> Result<ModelDocument, Failure> {
    read_model(&read_text(path)?).in_module("graphio")
}

pub fn read_role_model(path: &Path) -> Result<RoleModel, Failure> {
    match read_document(path)? {
        ModelDocument::Role(m) => Ok(m),
        ModelDocument::Tucker(_) => {
            Err(Failure::new("glrd", format!("{} is a Tucker model, expected a role model", path.display())))
        }
    }
}

pub fn read_tucker_model(path: &Path, module: &'static str) -> Result<TuckerModel, Failure> {
    match read_document(path)? {
        ModelDocument::Tucker(m) => Ok(m),
        ModelDocument::Role(_) => Err(Failure::new(module, "model has no Tucker core")),
    }
}

/// Entity, feature and relation names of a COO tensor, stored next to it as
/// `<tensor>.labels.json`.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct TensorLabels {
    pub entities: Vec<String>,
    pub features: Vec<String>,
    pub relations: Vec<String>,
}

pub fn sidecar_path(tensor: &Path) -> PathBuf {
    let mut s = tensor.as_os_str().to_owned();
    s.push(".labels.json");
    PathBuf::from(s)
}

/// Tensor plus labels from `labels`, else the sidecar if it exists, else none.
pub fn read_tensor(path: &Path, labels: Option<&Path>) -> Result<(Tensor3, TensorLabels), Failure> {
    let tensor = CooTensor::read(&read_text(path)?).in_module("graphio")?.to_dense();
    let sidecar = sidecar_path(path);
    let label_path = match labels {
        Some(p) => Some(p.to_path_buf()),
        None => sidecar.exists().then_some(sidecar),
    };
    let labels = match label_path {
        Some(p) => {
            let l: TensorLabels = serde_json::from_str(&read_text(&p)?)
                .map_err(|e| Failure::new("graphio", format!("invalid label file {}: {e}", p.display())))?;
            let (n, f, m) = tensor.dims();
            let ok = |v: &Vec<String>, len| v.is_empty() || v.len() == len;
            if !ok(&l.entities, n) || !ok(&l.features, f) || !ok(&l.relations, m) {
                return Err(Failure::new(
                    "graphio",
                    format!("label file {} does not match tensor dims {:?}", p.display(), tensor.dims()),
                ));
            }
            l
        }
        None => TensorLabels::default(),
    };
    Ok((tensor, labels))
}

pub fn write_tensor(path: &Path, tensor: &Tensor3, labels: &TensorLabels) -> Result<(), Failure> {
    write_text(path, &CooTensor::from_dense(tensor).write())?;
    let json = serde_json::to_string_pretty(labels).expect("labels serialize");
    write_text(&sidecar_path(path), &(json + "\n"))
}

#[derive(Serialize)]
struct Manifest<'a, C: Serialize> {
    tool: &'static str,
    version: &'static str,
    command: &'a str,
    /// Arguments after the program name, config-file flags included.
    argv: &'a [String],
    config: &'a C,
    kron_budget_bytes: usize,
    artifacts: Vec<String>,
}

/// Manifest path for a single-file artifact.
pub fn manifest_for(out: &Path) -> PathBuf {
    let mut s = out.as_os_str().to_owned();
    s.push(".manifest.json");
    PathBuf::from(s)
}

/// Write a manifest that echoes the resolved configuration of this run.
pub fn write_manifest<C: Serialize>(
    path: &Path,
    command: &str,
    argv: &[String],
    config: &C,
    artifacts: &[PathBuf],
) -> Result<(), Failure> {
    let manifest = Manifest {
        tool: "rolekit",
        version: env!("CARGO_PKG_VERSION"),
        command,
        argv,
        config,
        kron_budget_bytes: rolekit::mrd::kron_budget_from_env(),
        artifacts: artifacts.iter().map(|p| p.display().to_string()).collect(),
    };
    let json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    write_text(path, &(json + "\n"))
}

/// CSV of a square or rectangular matrix with row and column labels.
pub fn matrix_csv(corner: &str, rows: &[String], cols: &[String], values: &ndarray::Array2<f64>) -> String {
    LabeledMatrix { values: values.clone(), row_labels: rows.to_vec(), col_labels: cols.to_vec() }.write_csv(corner)
}
