//! Problem builders: sparse covariance estimation, the k-means SDP, the
//! uniform sparsest-cut SDP and a synthetic quadratic on a box.

use std::sync::Arc;

use crate::gradients::SampleOracle;
use crate::lmo::AtomSet;
use crate::sets::ConstraintChannel;
use crate::solvers::ProblemConstants;

pub mod kmeans;
pub mod quad;
pub mod sparse_cov;
pub mod sparsest_cut;

pub use kmeans::{make_kmeans, planted_blobs, KMeans};
pub use quad::{make_quadratic_test, Quadratic};
pub use sparse_cov::{make_sparse_cov, SparseCov, SparseCovOptions};
pub use sparsest_cut::{make_sparsest_cut, Graph, SparsestCut, TriangleMode};

/// Logged quality measures of an iterate.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Metrics {
    pub obj_proxy: f64,
    pub cons_violation: f64,
}

/// A stochastic objective that also knows how to score iterates.
pub trait Problem: SampleOracle {
    fn name(&self) -> &'static str;
    fn metrics(&self, x: &[f64]) -> Metrics;
}

/// Everything a solver needs to run on one instance.
#[derive(Clone)]
pub struct ProblemSpec {
    pub problem: Arc<dyn Problem>,
    pub atoms: AtomSet,
    /// Stacked easy constraints `(G, 𝒳)`; `None` when there are none.
    pub channel: Option<ConstraintChannel>,
    pub constants: ProblemConstants,
    /// Extra `key = value` pairs copied into run headers.
    pub notes: Vec<(String, String)>,
}

impl ProblemSpec {
    pub fn dim(&self) -> usize {
        self.atoms.dim()
    }

    pub fn metrics(&self, x: &[f64]) -> Metrics {
        self.problem.metrics(x)
    }
}

impl std::fmt::Debug for ProblemSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ProblemSpec")
            .field("problem", &self.problem.name())
            .field("atoms", &self.atoms)
            .field("constraint_rows", &self.channel.as_ref().map(|c| c.rows()))
            .field("constants", &self.constants)
            .finish()
    }
}
