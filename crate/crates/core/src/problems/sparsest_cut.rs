//! Uniform sparsest-cut SDP: minimize `(1/d²)⟨L, X⟩` over
//! `{X ⪰ 0, tr X ≤ d}` with the spreading constraint
//! `d·tr X − 1ᵀX1 = d²/2` and triangle inequalities
//! `X_ij + X_jk − X_ik − X_jj ≤ 0`.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::seq::index;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::gradients::{SampleData, SampleOracle};
use crate::linops::dot;
use crate::lmo::AtomSet;
use crate::sets::{ChannelBlock, ConstraintChannel, EasySet, LinearMap};
use crate::solvers::ProblemConstants;

use super::{Metrics, Problem, ProblemSpec};

/// Simple undirected graph on vertices `0..n`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Graph {
    n: usize,
    /// Edges `(i, j)` with `i < j`, sorted, no duplicates.
    edges: Vec<(usize, usize)>,
}

impl Graph {
    /// Self-loops are dropped and duplicate or reversed edges merged.
    pub fn new(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        let mut set = BTreeSet::new();
        for (a, b) in edges {
            if a >= n || b >= n {
                return Err(Error::InvalidParameter(format!("edge ({a}, {b}) out of range for {n} vertices")));
            }
            if a != b {
                set.insert((a.min(b), a.max(b)));
            }
        }
        Ok(Graph {
            n,
            edges: set.into_iter().collect(),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn edges(&self) -> &[(usize, usize)] {
        &self.edges
    }

    /// Row-major `Degree − Adjacency`.
    pub fn laplacian(&self) -> Vec<f64> {
        let n = self.n;
        let mut l = vec![0.0; n * n];
        for &(i, j) in &self.edges {
            l[i * n + i] += 1.0;
            l[j * n + j] += 1.0;
            l[i * n + j] -= 1.0;
            l[j * n + i] -= 1.0;
        }
        l
    }

    pub fn is_connected(&self) -> bool {
        if self.n == 0 {
            return true;
        }
        let mut adj = vec![Vec::new(); self.n];
        for &(i, j) in &self.edges {
            adj[i].push(j);
            adj[j].push(i);
        }
        let mut seen = vec![false; self.n];
        let mut stack = vec![0];
        seen[0] = true;
        while let Some(v) = stack.pop() {
            for &u in &adj[v] {
                if !seen[u] {
                    seen[u] = true;
                    stack.push(u);
                }
            }
        }
        seen.into_iter().all(|s| s)
    }

    pub fn cycle(n: usize) -> Self {
        Graph::new(n, (0..n).map(|i| (i, (i + 1) % n))).expect("in range")
    }

    pub fn complete(n: usize) -> Self {
        Graph::new(n, (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j)))).expect("in range")
    }
}

/// Which vertex triples generate triangle inequalities.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TriangleMode {
    /// All ordered triples of distinct vertices: `d(d−1)(d−2)` rows.
    Ordered,
    /// One row per 3-subset `i < j < k`: `C(d, 3)` rows.
    Unordered,
    /// Ordered triples with `i < k`: `d(d−1)(d−2)/2` rows.
    IkOnly,
}

impl TriangleMode {
    pub fn triples(self, d: usize) -> Vec<(usize, usize, usize)> {
        let mut out = Vec::new();
        for i in 0..d {
            for j in 0..d {
                for k in 0..d {
                    if i == j || j == k || i == k {
                        continue;
                    }
                    let keep = match self {
                        TriangleMode::Ordered => true,
                        TriangleMode::Unordered => i < j && j < k,
                        TriangleMode::IkOnly => i < k,
                    };
                    if keep {
                        out.push((i, j, k));
                    }
                }
            }
        }
        out
    }
}

impl std::str::FromStr for TriangleMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "ordered" => Ok(TriangleMode::Ordered),
            "unordered" => Ok(TriangleMode::Unordered),
            "ik-only" => Ok(TriangleMode::IkOnly),
            _ => Err(Error::InvalidParameter(format!("unknown triangle mode '{s}'"))),
        }
    }
}

/// Sparse functional `X_ij + X_jk − X_ik − X_jj` on the row-major flat matrix.
pub fn triangle_functional(d: usize, (i, j, k): (usize, usize, usize)) -> Vec<(usize, f64)> {
    vec![(i * d + j, 1.0), (j * d + k, 1.0), (i * d + k, -1.0), (j * d + j, -1.0)]
}

/// `d·tr X − 1ᵀX1` as a dense functional.
pub fn spreading_functional(d: usize) -> Vec<(usize, f64)> {
    (0..d * d)
        .map(|t| (t, if t / d == t % d { d as f64 - 1.0 } else { -1.0 }))
        .collect()
}

#[derive(Clone, Debug)]
pub struct SparsestCut {
    d: usize,
    edges: Vec<(usize, usize)>,
    batch: usize,
    laplacian: Vec<f64>,
    channel: ConstraintChannel,
}

impl SparsestCut {
    pub fn objective(&self, x: &[f64]) -> f64 {
        dot(&self.laplacian, x) / (self.d * self.d) as f64
    }

    /// `⟨L_e, X⟩` for edge `e = (i, j)`, symmetric in the off-diagonal pair.
    fn edge_term(&self, x: &[f64], (i, j): (usize, usize)) -> f64 {
        let d = self.d;
        x[i * d + i] + x[j * d + j] - x[i * d + j] - x[j * d + i]
    }

    fn scale(&self, sampled: usize) -> f64 {
        self.edges.len() as f64 / (sampled as f64 * (self.d * self.d) as f64)
    }
}

impl SampleOracle for SparsestCut {
    fn dim(&self) -> usize {
        self.d * self.d
    }

    /// Edge subset, drawn without replacement.
    fn draw(&self, rng: &mut ChaCha8Rng) -> SampleData {
        SampleData::Indices(index::sample(rng, self.edges.len(), self.batch).into_vec())
    }

    fn value(&self, x: &[f64], sample: &SampleData) -> f64 {
        let SampleData::Indices(idx) = sample else {
            return f64::NAN;
        };
        self.scale(idx.len()) * idx.iter().map(|&e| self.edge_term(x, self.edges[e])).sum::<f64>()
    }

    fn grad(&self, x: &[f64], sample: &SampleData) -> Vec<f64> {
        let SampleData::Indices(idx) = sample else {
            return vec![f64::NAN; x.len()];
        };
        let d = self.d;
        let s = self.scale(idx.len());
        let mut g = vec![0.0; x.len()];
        for &e in idx {
            let (i, j) = self.edges[e];
            g[i * d + i] += s;
            g[j * d + j] += s;
            g[i * d + j] -= s;
            g[j * d + i] -= s;
        }
        g
    }

    fn expected_grad(&self, _x: &[f64]) -> Option<Vec<f64>> {
        let s = 1.0 / (self.d * self.d) as f64;
        Some(self.laplacian.iter().map(|v| v * s).collect())
    }

    fn expected_value(&self, x: &[f64]) -> Option<f64> {
        Some(self.objective(x))
    }

    fn is_affine(&self) -> bool {
        true
    }
}

impl Problem for SparsestCut {
    fn name(&self) -> &'static str {
        "sparsest-cut"
    }

    /// Objective value and the distance of `Gx` to the constraint targets.
    fn metrics(&self, x: &[f64]) -> Metrics {
        Metrics {
            obj_proxy: self.objective(x),
            cons_violation: self.channel.violation(x).unwrap_or(f64::NAN),
        }
    }
}

/// Builds the SDP for `graph`. Each stochastic gradient samples
/// `⌈edge_frac · |E|⌉` edges.
pub fn make_sparsest_cut(graph: &Graph, edge_frac: f64, triangles: TriangleMode) -> Result<ProblemSpec> {
    let d = graph.n();
    if d < 3 {
        return Err(Error::InvalidParameter(format!("sparsest cut needs at least 3 vertices, got {d}")));
    }
    if graph.edges().is_empty() {
        return Err(Error::InvalidParameter("graph has no edges".into()));
    }
    if !(edge_frac > 0.0 && edge_frac <= 1.0) {
        return Err(Error::InvalidParameter(format!("edge fraction must lie in (0, 1], got {edge_frac}")));
    }
    if !graph.is_connected() {
        log::warn!("graph with {d} vertices is disconnected; proceeding");
    }
    let e = graph.edges().len();
    let batch = ((edge_frac * e as f64).ceil() as usize).clamp(1, e);

    let triples = triangles.triples(d);
    let tri_rows: Vec<Vec<(usize, f64)>> = triples.iter().map(|&t| triangle_functional(d, t)).collect();
    let channel = ConstraintChannel::new(vec![
        ChannelBlock {
            map: LinearMap::Functionals {
                dim: d * d,
                rows: vec![spreading_functional(d)],
            },
            target: EasySet::equals((d * d) as f64 / 2.0),
        },
        ChannelBlock {
            map: LinearMap::Functionals { dim: d * d, rows: tri_rows },
            target: EasySet::Product(vec![EasySet::upper_bound(0.0); triples.len()]),
        },
    ])?;

    let atoms = AtomSet::psd_trace_ball(d, d as f64)?;
    let constants = ProblemConstants {
        l: 0.0,
        l_g: channel.spectral_bound(),
        // Sets the zeroth-order step to ρ_k = 2/(√m (k+1)).
        d: 2.0,
    };
    let notes = vec![
        ("vertices".into(), d.to_string()),
        ("edges".into(), e.to_string()),
        ("edge_batch".into(), batch.to_string()),
        ("triangle_rows".into(), triples.len().to_string()),
        ("obj_proxy".into(), "objective value".into()),
    ];
    let problem = SparsestCut {
        d,
        edges: graph.edges().to_vec(),
        batch,
        laplacian: graph.laplacian(),
        channel: channel.clone(),
    };
    Ok(ProblemSpec {
        problem: Arc::new(problem),
        atoms,
        channel: Some(channel),
        constants,
        notes,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn triangle_on_identity() {
        let d = 3;
        let eye = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        let triples = TriangleMode::Ordered.triples(d);
        assert_eq!(triples.len(), 6);
        for t in triples {
            let v: f64 = triangle_functional(d, t).iter().map(|&(i, a)| a * eye[i]).sum();
            assert_eq!(v, -1.0);
        }
    }

    #[test]
    fn triple_counts() {
        assert_eq!(TriangleMode::Ordered.triples(25).len(), 13800);
        assert_eq!(TriangleMode::IkOnly.triples(25).len(), 6900);
        assert_eq!(TriangleMode::Unordered.triples(25).len(), 2300);
    }

    #[test]
    fn path_laplacian_rows_vanish() {
        let g = Graph::new(3, [(0, 1), (1, 2)]).unwrap();
        let l = g.laplacian();
        for i in 0..3 {
            assert_eq!(l[i * 3..(i + 1) * 3].iter().sum::<f64>(), 0.0);
        }
    }

    #[test]
    fn graph_dedup_and_connectivity() {
        let g = Graph::new(4, [(1, 0), (0, 1), (2, 2), (2, 3)]).unwrap();
        assert_eq!(g.edges(), &[(0, 1), (2, 3)]);
        assert!(!g.is_connected());
        assert!(Graph::cycle(5).is_connected());
        assert!(Graph::new(2, [(0, 2)]).is_err());
    }

    #[test]
    fn full_batch_is_exact() {
        let spec = make_sparsest_cut(&Graph::cycle(5), 1.0, TriangleMode::Ordered).unwrap();
        let mut rng = rand::SeedableRng::seed_from_u64(4);
        let s = spec.problem.draw(&mut rng);
        let x: Vec<f64> = (0..25).map(|i| ((i * 7) % 5) as f64).collect();
        let exact = spec.problem.expected_value(&x).unwrap();
        assert!((spec.problem.value(&x, &s) - exact).abs() < 1e-12);
        let g = spec.problem.grad(&x, &s);
        for (a, b) in g.iter().zip(spec.problem.expected_grad(&x).unwrap()) {
            assert!((a - b).abs() < 1e-15);
        }
    }
}
