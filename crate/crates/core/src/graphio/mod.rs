//! Text formats: TSV edge lists, CSV matrices, COO tensors and JSON model
//! documents.
//!
//! Every loader rejects bad input (negative or non-finite weights, ragged
//! rows, out-of-range indices) with the offending line number instead of
//! repairing it. Node and relation indices follow first appearance in the file.

mod coo;
mod graph;
mod matrix;
mod model;

pub use coo::CooTensor;
pub use graph::{load_edge_list, load_multigraph, Graph, MultiGraph};
pub use matrix::LabeledMatrix;
pub use model::{read_model, write_model, ModelDocument};
