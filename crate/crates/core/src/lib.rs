//! Multi-view binary clustering with graph-collaborated auto-encoder hashing
//! (GCAE).
//!
//! Pipeline: every view is mapped through an RBF kernel against shared
//! anchors ([`kernel`]), a low-rank affinity graph is learned per view
//! ([`graphs`]), the graphs are tied to one `±1` code matrix through linear
//! auto-encoders ([`encoder`]), and the codes are clustered in Hamming space
//! ([`binclust`]). [`metrics`] scores the result against ground truth.

pub mod baseline;
pub mod binclust;
pub mod data;
pub mod encoder;
pub mod error;
pub mod graphs;
pub mod kernel;
pub mod linalg;
pub mod metrics;

pub use binclust::{BinaryClusterModel, ClusterParams};
pub use data::{MultiViewDataset, SynthParams};
pub use encoder::{run_gcae, EncoderState, GcaeFit, Hyperparameters, LossBreakdown};
pub use error::{GcaeError, Result};
pub use linalg::DenseMatrix;
