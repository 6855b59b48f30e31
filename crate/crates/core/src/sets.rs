//! Easy-to-project constraint sets and the linear constraint channels `(G, 𝒳)`
//! that feed them.

use rand::seq::index;
use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};
use crate::linops::{check_len, dist, dot, norm2};

/// A closed convex set with a cheap exact Euclidean projection.
#[derive(Clone, Debug, PartialEq)]
pub enum EasySet {
    /// `{u : ‖u‖₁ ≤ radius}`
    L1Ball { radius: f64, dim: usize },
    /// `{b}`
    FixedPoint(Vec<f64>),
    /// `{u : u ≥ 0}`
    NonNegOrthant(usize),
    /// `{u : ⟨a, u⟩ ≤ b}`
    Halfspace { normal: Vec<f64>, offset: f64 },
    /// `{u : ⟨c, u⟩ = d}`
    Hyperplane { normal: Vec<f64>, offset: f64 },
    /// Cartesian product, blocks laid out consecutively.
    Product(Vec<EasySet>),
}

impl EasySet {
    pub fn dim(&self) -> usize {
        match self {
            EasySet::L1Ball { dim, .. } => *dim,
            EasySet::FixedPoint(b) => b.len(),
            EasySet::NonNegOrthant(d) => *d,
            EasySet::Halfspace { normal, .. } | EasySet::Hyperplane { normal, .. } => normal.len(),
            EasySet::Product(parts) => parts.iter().map(EasySet::dim).sum(),
        }
    }

    /// Scalar `{u : u ≤ b}`.
    pub fn upper_bound(b: f64) -> Self {
        EasySet::Halfspace {
            normal: vec![1.0],
            offset: b,
        }
    }

    /// Scalar `{u : u = d}`.
    pub fn equals(d: f64) -> Self {
        EasySet::Hyperplane {
            normal: vec![1.0],
            offset: d,
        }
    }

    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.dim(), y.len())?;
        let mut out = y.to_vec();
        self.project_in_place(&mut out);
        Ok(out)
    }

    /// `𝒟(y) = ‖y − Π(y)‖₂`
    pub fn distance(&self, y: &[f64]) -> Result<f64> {
        let p = self.project(y)?;
        Ok(dist(y, &p))
    }

    pub(crate) fn project_in_place(&self, y: &mut [f64]) {
        match self {
            EasySet::L1Ball { radius, .. } => project_l1_ball(y, *radius),
            EasySet::FixedPoint(b) => y.copy_from_slice(b),
            EasySet::NonNegOrthant(_) => y.iter_mut().for_each(|v| *v = v.max(0.0)),
            EasySet::Halfspace { normal, offset } => {
                let excess = dot(normal, y) - offset;
                if excess > 0.0 {
                    let nn = dot(normal, normal);
                    let t = excess / nn;
                    y.iter_mut().zip(normal).for_each(|(v, a)| *v -= t * a);
                }
            }
            EasySet::Hyperplane { normal, offset } => {
                let nn = dot(normal, normal);
                let t = (dot(normal, y) - offset) / nn;
                y.iter_mut().zip(normal).for_each(|(v, a)| *v -= t * a);
            }
            EasySet::Product(parts) => {
                let mut start = 0;
                for p in parts {
                    let d = p.dim();
                    p.project_in_place(&mut y[start..start + d]);
                    start += d;
                }
            }
        }
    }

    /// The set seen through a subset of its coordinates (sorted, distinct).
    /// Only coordinate-separable sets can be restricted.
    pub fn restrict(&self, coords: &[usize]) -> Result<EasySet> {
        let whole = coords.len() == self.dim() && coords.iter().enumerate().all(|(i, c)| i == *c);
        match self {
            EasySet::FixedPoint(b) => Ok(EasySet::FixedPoint(coords.iter().map(|&i| b[i]).collect())),
            EasySet::NonNegOrthant(_) => Ok(EasySet::NonNegOrthant(coords.len())),
            EasySet::Product(parts) => {
                let mut out = Vec::new();
                let mut start = 0;
                let mut cursor = 0;
                for p in parts {
                    let d = p.dim();
                    let mut local = Vec::new();
                    while cursor < coords.len() && coords[cursor] < start + d {
                        local.push(coords[cursor] - start);
                        cursor += 1;
                    }
                    if !local.is_empty() {
                        out.push(p.restrict(&local)?);
                    }
                    start += d;
                }
                Ok(EasySet::Product(out))
            }
            _ if whole => Ok(self.clone()),
            EasySet::L1Ball { .. } => Err(Error::NotSeparable("l1 ball")),
            EasySet::Halfspace { .. } => Err(Error::NotSeparable("halfspace")),
            EasySet::Hyperplane { .. } => Err(Error::NotSeparable("hyperplane")),
        }
    }
}

/// Euclidean projection onto `{u : ‖u‖₁ ≤ radius}` by sorting magnitudes and
/// soft-thresholding at the simplex threshold.
fn project_l1_ball(y: &mut [f64], radius: f64) {
    let l1: f64 = y.iter().map(|v| v.abs()).sum();
    if l1 <= radius {
        return;
    }
    if radius <= 0.0 {
        y.iter_mut().for_each(|v| *v = 0.0);
        return;
    }
    let mut mags: Vec<f64> = y.iter().map(|v| v.abs()).collect();
    mags.sort_unstable_by(|a, b| b.total_cmp(a));
    let mut cumsum = 0.0;
    let mut theta = 0.0;
    for (i, &m) in mags.iter().enumerate() {
        cumsum += m;
        let t = (cumsum - radius) / (i + 1) as f64;
        if m > t {
            theta = t;
        } else {
            break;
        }
    }
    for v in y.iter_mut() {
        let shrunk = (v.abs() - theta).max(0.0);
        *v = shrunk.copysign(*v);
    }
}

/// Linear maps acting on a flat decision vector.
#[derive(Clone, Debug, PartialEq)]
pub enum LinearMap {
    Identity { dim: usize },
    /// Coordinate selection (rows of the identity).
    Select { dim: usize, indices: Vec<usize> },
    /// `X ↦ (X1)_r` for the listed rows `r` of an `n × n` matrix.
    RowSum { n: usize, rows: Vec<usize> },
    /// Stack of sparse linear functionals `aᵢ · x`.
    Functionals { dim: usize, rows: Vec<Vec<(usize, f64)>> },
}

impl LinearMap {
    pub fn row_sum(n: usize) -> Self {
        LinearMap::RowSum {
            n,
            rows: (0..n).collect(),
        }
    }

    pub fn in_dim(&self) -> usize {
        match self {
            LinearMap::Identity { dim }
            | LinearMap::Select { dim, .. }
            | LinearMap::Functionals { dim, .. } => *dim,
            LinearMap::RowSum { n, .. } => n * n,
        }
    }

    pub fn out_dim(&self) -> usize {
        match self {
            LinearMap::Identity { dim } => *dim,
            LinearMap::Select { indices, .. } => indices.len(),
            LinearMap::RowSum { rows, .. } => rows.len(),
            LinearMap::Functionals { rows, .. } => rows.len(),
        }
    }

    fn apply_into(&self, x: &[f64], out: &mut [f64]) {
        match self {
            LinearMap::Identity { .. } => out.copy_from_slice(x),
            LinearMap::Select { indices, .. } => {
                for (o, &i) in out.iter_mut().zip(indices) {
                    *o = x[i];
                }
            }
            LinearMap::RowSum { n, rows } => {
                for (o, &r) in out.iter_mut().zip(rows) {
                    *o = x[r * n..(r + 1) * n].iter().sum();
                }
            }
            LinearMap::Functionals { rows, .. } => {
                for (o, row) in out.iter_mut().zip(rows) {
                    *o = row.iter().map(|&(i, a)| a * x[i]).sum();
                }
            }
        }
    }

    /// `out += Aᵀ r`
    fn adjoint_add(&self, r: &[f64], out: &mut [f64]) {
        match self {
            LinearMap::Identity { .. } => out.iter_mut().zip(r).for_each(|(o, v)| *o += v),
            LinearMap::Select { indices, .. } => {
                for (&i, v) in indices.iter().zip(r) {
                    out[i] += v;
                }
            }
            LinearMap::RowSum { n, rows } => {
                for (&row, v) in rows.iter().zip(r) {
                    out[row * n..(row + 1) * n].iter_mut().for_each(|o| *o += v);
                }
            }
            LinearMap::Functionals { rows, .. } => {
                for (row, v) in rows.iter().zip(r) {
                    for &(i, a) in row {
                        out[i] += a * v;
                    }
                }
            }
        }
    }

    fn restrict(&self, local: &[usize]) -> LinearMap {
        match self {
            LinearMap::Identity { dim } => LinearMap::Select {
                dim: *dim,
                indices: local.to_vec(),
            },
            LinearMap::Select { dim, indices } => LinearMap::Select {
                dim: *dim,
                indices: local.iter().map(|&i| indices[i]).collect(),
            },
            LinearMap::RowSum { n, rows } => LinearMap::RowSum {
                n: *n,
                rows: local.iter().map(|&i| rows[i]).collect(),
            },
            LinearMap::Functionals { dim, rows } => LinearMap::Functionals {
                dim: *dim,
                rows: local.iter().map(|&i| rows[i].clone()).collect(),
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelBlock {
    pub map: LinearMap,
    pub target: EasySet,
}

/// A stacked linear operator `G` with a product target set `𝒳`.
///
/// `spectral_bound` holds `L_G ≥ ‖G‖²`, the smoothness factor of the
/// penalty built on this channel.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintChannel {
    blocks: Vec<ChannelBlock>,
    in_dim: usize,
    spectral_bound: f64,
}

impl ConstraintChannel {
    /// Builds the stack and estimates `‖G‖²` by power iteration on `GᵀG`.
    pub fn new(blocks: Vec<ChannelBlock>) -> Result<Self> {
        let in_dim = validate_blocks(&blocks)?;
        let mut c = ConstraintChannel {
            blocks,
            in_dim,
            spectral_bound: 0.0,
        };
        c.spectral_bound = c.estimate_gram_norm();
        Ok(c)
    }

    pub fn with_spectral_bound(blocks: Vec<ChannelBlock>, spectral_bound: f64) -> Result<Self> {
        let in_dim = validate_blocks(&blocks)?;
        Ok(ConstraintChannel {
            blocks,
            in_dim,
            spectral_bound,
        })
    }

    pub fn single(map: LinearMap, target: EasySet) -> Result<Self> {
        Self::new(vec![ChannelBlock { map, target }])
    }

    pub fn blocks(&self) -> &[ChannelBlock] {
        &self.blocks
    }

    pub fn in_dim(&self) -> usize {
        self.in_dim
    }

    /// Number of scalar constraint rows.
    pub fn rows(&self) -> usize {
        self.blocks.iter().map(|b| b.map.out_dim()).sum()
    }

    pub fn spectral_bound(&self) -> f64 {
        self.spectral_bound
    }

    pub fn target(&self) -> EasySet {
        EasySet::Product(self.blocks.iter().map(|b| b.target.clone()).collect())
    }

    /// `G x`
    pub fn apply_g(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_len(self.in_dim, x.len())?;
        let mut out = vec![0.0; self.rows()];
        let mut start = 0;
        for b in &self.blocks {
            let d = b.map.out_dim();
            b.map.apply_into(x, &mut out[start..start + d]);
            start += d;
        }
        Ok(out)
    }

    /// `Gᵀ r`
    pub fn apply_gt(&self, r: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows(), r.len())?;
        let mut out = vec![0.0; self.in_dim];
        let mut start = 0;
        for b in &self.blocks {
            let d = b.map.out_dim();
            b.map.adjoint_add(&r[start..start + d], &mut out);
            start += d;
        }
        Ok(out)
    }

    /// `Π_𝒳(y)` on the stacked output space.
    pub fn project(&self, y: &[f64]) -> Result<Vec<f64>> {
        check_len(self.rows(), y.len())?;
        let mut out = y.to_vec();
        let mut start = 0;
        for b in &self.blocks {
            let d = b.map.out_dim();
            b.target.project_in_place(&mut out[start..start + d]);
            start += d;
        }
        Ok(out)
    }

    /// `Gx − Π_𝒳(Gx)`
    pub fn residual(&self, x: &[f64]) -> Result<Vec<f64>> {
        let gx = self.apply_g(x)?;
        let p = self.project(&gx)?;
        Ok(gx.iter().zip(&p).map(|(a, b)| a - b).collect())
    }

    /// `𝒟_𝒳(Gx)`
    pub fn violation(&self, x: &[f64]) -> Result<f64> {
        Ok(norm2(&self.residual(x)?))
    }

    /// Uniformly samples `⌈frac · rows⌉` constraint rows without replacement.
    /// The sub-stack keeps the parent's row order and spectral bound.
    pub fn sample_subchannel(&self, frac: f64, rng: &mut dyn RngCore) -> Result<ConstraintChannel> {
        if !(frac > 0.0 && frac <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "constraint fraction must lie in (0, 1], got {frac}"
            )));
        }
        let total = self.rows();
        if total == 0 {
            return Err(Error::EmptyStack);
        }
        let count = ((frac * total as f64).ceil() as usize).clamp(1, total);
        let mut picked = index::sample(rng, total, count).into_vec();
        picked.sort_unstable();

        let mut blocks = Vec::new();
        let mut start = 0;
        let mut cursor = 0;
        for b in &self.blocks {
            let d = b.map.out_dim();
            let mut local = Vec::new();
            while cursor < picked.len() && picked[cursor] < start + d {
                local.push(picked[cursor] - start);
                cursor += 1;
            }
            if !local.is_empty() {
                blocks.push(ChannelBlock {
                    map: b.map.restrict(&local),
                    target: b.target.restrict(&local)?,
                });
            }
            start += d;
        }
        Ok(ConstraintChannel {
            blocks,
            in_dim: self.in_dim,
            spectral_bound: self.spectral_bound,
        })
    }

    fn estimate_gram_norm(&self) -> f64 {
        if self.blocks.len() == 1 {
            if let LinearMap::Identity { .. } = self.blocks[0].map {
                return 1.0;
            }
        }
        let mut rng = ChaCha8Rng::seed_from_u64(0x6a11);
        let mut v: Vec<f64> = (0..self.in_dim).map(|_| rng.random_range(-1.0..1.0)).collect();
        let mut lambda = 0.0;
        for _ in 0..300 {
            let nv = norm2(&v);
            if nv == 0.0 {
                return 0.0;
            }
            v.iter_mut().for_each(|x| *x /= nv);
            let gv = self.apply_g(&v).expect("dims validated");
            let w = self.apply_gt(&gv).expect("dims validated");
            let next = dot(&v, &w);
            let settled = (next - lambda).abs() <= 1e-12 * next.abs();
            lambda = next;
            v = w;
            if settled {
                break;
            }
        }
        // Power iteration approaches from below.
        lambda * 1.01
    }
}

fn validate_blocks(blocks: &[ChannelBlock]) -> Result<usize> {
    let in_dim = blocks.first().map(|b| b.map.in_dim()).ok_or(Error::EmptyStack)?;
    for b in blocks {
        check_len(in_dim, b.map.in_dim())?;
        check_len(b.map.out_dim(), b.target.dim())?;
    }
    Ok(in_dim)
}

/// Free-function forms of the channel operations.
pub fn project(set: &EasySet, y: &[f64]) -> Result<Vec<f64>> {
    set.project(y)
}

pub fn distance(set: &EasySet, y: &[f64]) -> Result<f64> {
    set.distance(y)
}

pub fn apply_g(c: &ConstraintChannel, x: &[f64]) -> Result<Vec<f64>> {
    c.apply_g(x)
}

pub fn apply_gt(c: &ConstraintChannel, r: &[f64]) -> Result<Vec<f64>> {
    c.apply_gt(r)
}

pub fn sample_subchannel(c: &ConstraintChannel, frac: f64, rng: &mut dyn RngCore) -> Result<ConstraintChannel> {
    c.sample_subchannel(frac, rng)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn l1(r: f64, d: usize) -> EasySet {
        EasySet::L1Ball { radius: r, dim: d }
    }

    #[test]
    fn l1_feasible_point_is_fixed() {
        assert_eq!(l1(1.0, 2).project(&[0.2, 0.3]).unwrap(), vec![0.2, 0.3]);
    }

    #[test]
    fn l1_single_axis() {
        assert_eq!(l1(1.0, 2).project(&[3.0, 0.0]).unwrap(), vec![1.0, 0.0]);
    }

    #[test]
    fn l1_shrinks_with_signs() {
        let p = l1(1.0, 3).project(&[2.0, -1.5, 0.1]).unwrap();
        // theta = 1.25: (0.75, -0.25, 0)
        assert!((p[0] - 0.75).abs() < 1e-15);
        assert!((p[1] + 0.25).abs() < 1e-15);
        assert_eq!(p[2], 0.0);
    }

    #[test]
    fn orthant_clamps() {
        assert_eq!(EasySet::NonNegOrthant(2).project(&[-1.0, 2.0]).unwrap(), vec![0.0, 2.0]);
    }

    #[test]
    fn fixed_point_distance_zero() {
        let b = vec![1.0, -2.0, 0.5];
        assert_eq!(EasySet::FixedPoint(b.clone()).distance(&b).unwrap(), 0.0);
    }

    #[test]
    fn halfspace_distance() {
        let h = EasySet::Halfspace {
            normal: vec![1.0, 0.0],
            offset: 0.0,
        };
        assert_eq!(h.distance(&[2.0, 0.0]).unwrap(), 2.0);
        assert_eq!(h.distance(&[-2.0, 5.0]).unwrap(), 0.0);
    }

    #[test]
    fn hyperplane_projection() {
        let h = EasySet::Hyperplane {
            normal: vec![1.0, 1.0],
            offset: 1.0,
        };
        assert_eq!(h.project(&[1.0, 1.0]).unwrap(), vec![0.5, 0.5]);
    }

    #[test]
    fn dim_mismatch() {
        assert!(matches!(
            EasySet::NonNegOrthant(3).project(&[1.0]),
            Err(Error::DimMismatch { expected: 3, got: 1 })
        ));
    }

    #[test]
    fn identity_and_row_sum_channels() {
        let id = ConstraintChannel::single(LinearMap::Identity { dim: 3 }, EasySet::NonNegOrthant(3)).unwrap();
        assert_eq!(id.apply_g(&[1.0, -2.0, 3.0]).unwrap(), vec![1.0, -2.0, 3.0]);
        assert_eq!(id.spectral_bound(), 1.0);

        let rs = ConstraintChannel::single(LinearMap::row_sum(3), EasySet::FixedPoint(vec![1.0; 3])).unwrap();
        let eye = [1.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0, 0.0, 1.0];
        assert_eq!(rs.apply_g(&eye).unwrap(), vec![1.0, 1.0, 1.0]);
        // ‖G‖² = n for the row-sum map
        assert!(rs.spectral_bound() >= 3.0 && rs.spectral_bound() < 3.1);
        assert_eq!(rs.violation(&eye).unwrap(), 0.0);
    }

    #[test]
    fn restrict_rejects_coupled_sets() {
        assert_eq!(l1(1.0, 3).restrict(&[0, 2]), Err(Error::NotSeparable("l1 ball")));
        assert_eq!(l1(1.0, 3).restrict(&[0, 1, 2]), Ok(l1(1.0, 3)));
        let p = EasySet::Product(vec![EasySet::FixedPoint(vec![1.0, 2.0]), EasySet::NonNegOrthant(3)]);
        assert_eq!(
            p.restrict(&[1, 3]).unwrap(),
            EasySet::Product(vec![EasySet::FixedPoint(vec![2.0]), EasySet::NonNegOrthant(1)])
        );
    }

    #[test]
    fn subchannel_cardinality() {
        let rows: Vec<Vec<(usize, f64)>> = (0..10).map(|i| vec![(i % 4, 1.0)]).collect();
        let target = EasySet::Product((0..10).map(|i| EasySet::upper_bound(i as f64)).collect());
        let c = ConstraintChannel::single(LinearMap::Functionals { dim: 4, rows }, target).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let half = c.sample_subchannel(0.5, &mut rng).unwrap();
        assert_eq!(half.rows(), 5);
        let all = c.sample_subchannel(1.0, &mut rng).unwrap();
        assert_eq!(all, c);
        assert!(c.sample_subchannel(0.0, &mut rng).is_err());
    }
}
