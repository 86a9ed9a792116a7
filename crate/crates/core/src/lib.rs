//! Role discovery in graphs.
//!
//! * [`glrd`]: guided role discovery, a non-negative factorization `V ≈ GF`
//!   of a node-feature matrix where every role vector is solved in closed form
//!   and projected onto a convex constraint set (sparsity, diversity,
//!   alternativeness).
//! * [`mrd`]: multi-relational role discovery, a non-negative Tucker
//!   decomposition of a node × feature × relation tensor fitted by alternating
//!   non-negative least squares, with optional fixed (transferred) factors.
//! * [`coreview`]: interpretation of a Tucker core as an interaction graph and
//!   its macroscopic metrics.
//! * [`tasks`]: identity resolution and partition comparison built on role
//!   assignments.
//! * [`refex`]: recursive structural features for graphs and multigraphs.
//! * [`graphio`]: text formats for graphs, matrices, tensors and models.

pub mod coreview;
pub mod error;
pub mod glrd;
pub mod graphio;
pub mod mrd;
pub mod numkit;
pub mod refex;
pub mod synth;
pub mod tasks;

pub use error::{Error, Result};
