//! Turns a [`RunConfig`] into a problem instance and solver settings.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::io::config::{ProblemKind, RunConfig};
use crate::io::{parse_idx, pca, read_edge_list, read_points};
use crate::problems::kmeans::make_kmeans_labeled;
use crate::problems::quad::make_quadratic;
use crate::problems::{make_sparsest_cut, planted_blobs, Graph, ProblemSpec, SparseCovOptions};
use crate::solvers::RunSettings;

pub const DEFAULT_QUAD_DIM: usize = 20;
pub const DEFAULT_SPARSE_COV_DIM: usize = 100;
pub const DEFAULT_SPARSE_COV_BATCH: usize = 20;
pub const DEFAULT_KMEANS_POINTS: usize = 60;
pub const DEFAULT_GRAPH_VERTICES: usize = 12;
/// Feature dimension of planted blobs and of PCA-reduced image data.
pub const KMEANS_FEATURES: usize = 10;
pub const DEFAULT_KMEANS_REVEAL: f64 = 0.01;
pub const DEFAULT_EDGE_FRAC: f64 = 0.05;

/// Two dense halves joined by a few sparse cross edges, plus a Hamiltonian
/// cycle so the graph is always connected.
pub fn default_graph(n: usize, seed: u64) -> Result<Graph> {
    if n < 3 {
        return Err(Error::InvalidParameter(format!("graph needs at least 3 vertices, got {n}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let half = n / 2;
    let mut edges: Vec<(usize, usize)> = (0..n).map(|i| (i, (i + 1) % n)).collect();
    for i in 0..n {
        for j in i + 1..n {
            let p = if (i < half) == (j < half) { 0.6 } else { 0.05 };
            if rng.random::<f64>() < p {
                edges.push((i, j));
            }
        }
    }
    Graph::new(n, edges)
}

fn load_kmeans_points(path: &std::path::Path, limit: usize) -> Result<Vec<Vec<f64>>> {
    let bytes = std::fs::read(path)?;
    if bytes.len() >= 3 && bytes[0] == 0 && bytes[1] == 0 {
        let arr = parse_idx(&bytes)?;
        let pts = arr.to_points(Some(limit));
        let p = KMEANS_FEATURES.min(pts.first().map_or(0, Vec::len));
        return pca(&pts, p);
    }
    read_points(path)
}

/// Builds the instance selected by `cfg`. Data generation uses
/// `cfg.data_seed`, so every run seed sees the same instance.
pub fn build_problem(cfg: &RunConfig) -> Result<ProblemSpec> {
    cfg.validate()?;
    match cfg.problem {
        ProblemKind::Quad => {
            let m = cfg.dim.unwrap_or(DEFAULT_QUAD_DIM);
            if m == 0 {
                return Err(Error::InvalidParameter("dim must be >= 1".into()));
            }
            Ok(make_quadratic(m, cfg.data_seed, cfg.sigma, cfg.batch.unwrap_or(1), false))
        }
        ProblemKind::SparseCov => SparseCovOptions::new(cfg.dim.unwrap_or(DEFAULT_SPARSE_COV_DIM), cfg.rank)
            .batch(cfg.batch.unwrap_or(DEFAULT_SPARSE_COV_BATCH))
            .swap_radii(cfg.swap_radii)
            .build(cfg.data_seed),
        ProblemKind::Kmeans => {
            let reveal = cfg.batch_frac.unwrap_or(DEFAULT_KMEANS_REVEAL);
            let n = cfg.dim.unwrap_or(DEFAULT_KMEANS_POINTS);
            match &cfg.points {
                Some(path) => {
                    let pts = load_kmeans_points(path, n)?;
                    make_kmeans_labeled(&pts, cfg.clusters, reveal, None)
                }
                None => {
                    let (pts, labels) = planted_blobs(n, cfg.clusters, KMEANS_FEATURES, cfg.separation, cfg.data_seed);
                    make_kmeans_labeled(&pts, cfg.clusters, reveal, Some(&labels))
                }
            }
        }
        ProblemKind::SparsestCut => {
            let graph = match &cfg.graph {
                Some(path) => read_edge_list(path)?,
                None => default_graph(cfg.dim.unwrap_or(DEFAULT_GRAPH_VERTICES), cfg.data_seed)?,
            };
            make_sparsest_cut(&graph, cfg.batch_frac.unwrap_or(DEFAULT_EDGE_FRAC), cfg.triangles)
        }
    }
}

/// Solver settings for `cfg` with an explicit run seed.
pub fn run_settings(cfg: &RunConfig, seed: u64) -> RunSettings {
    RunSettings {
        algo: cfg.algo,
        mode: cfg.oracle,
        mu_c: cfg.mu_c,
        tau_0: cfg.tau0,
        iters: cfg.iters,
        seed,
        log_every: cfg.log_every,
        constraint_frac: cfg.constraint_frac,
    }
}
