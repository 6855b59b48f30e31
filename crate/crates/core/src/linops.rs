//! Dense symmetric matrices, flat-vector helpers and the Lanczos solver used
//! by the PSD-cone linear minimization oracle.
//!
//! Matrices are square, row-major and exactly symmetric. A matrix of side `n`
//! doubles as a flat vector of length `n * n`, which is the representation the
//! solvers work with.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub fn norm2(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// `y += alpha * x`
pub fn axpy(alpha: f64, x: &[f64], y: &mut [f64]) {
    debug_assert_eq!(x.len(), y.len());
    for (yi, xi) in y.iter_mut().zip(x) {
        *yi += alpha * xi;
    }
}

pub fn sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

pub fn dist(a: &[f64], b: &[f64]) -> f64 {
    a.iter()
        .zip(b)
        .map(|(x, y)| (x - y) * (x - y))
        .sum::<f64>()
        .sqrt()
}

pub(crate) fn check_len(expected: usize, got: usize) -> Result<()> {
    if expected == got {
        Ok(())
    } else {
        Err(Error::DimMismatch { expected, got })
    }
}

/// Side length `n` of a flat square matrix of length `m`, if `m` is a perfect square.
pub fn side_of(m: usize) -> Option<usize> {
    let n = (m as f64).sqrt().round() as usize;
    (n * n == m).then_some(n)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SymMat {
    n: usize,
    data: Vec<f64>,
}

impl SymMat {
    pub fn zeros(n: usize) -> Self {
        assert!(n >= 1, "matrix side must be at least 1");
        SymMat {
            n,
            data: vec![0.0; n * n],
        }
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diag(&vec![1.0; n])
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len());
        for (i, v) in d.iter().enumerate() {
            m.data[i * m.n + i] = *v;
        }
        m
    }

    /// Builds from `f(i, j)` evaluated on the upper triangle and mirrored.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Self {
        let mut m = Self::zeros(n);
        for i in 0..n {
            for j in i..n {
                let v = f(i, j);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        m
    }

    /// Symmetrizes an arbitrary row-major square array as `(A + Aᵀ) / 2`.
    /// Already-symmetric input is reproduced bit for bit.
    pub fn from_row_major(n: usize, data: &[f64]) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix side must be >= 1".into()));
        }
        check_len(n * n, data.len())?;
        let mut m = Self::zeros(n);
        for i in 0..n {
            m.data[i * n + i] = data[i * n + i];
            for j in (i + 1)..n {
                let v = 0.5 * (data[i * n + j] + data[j * n + i]);
                m.data[i * n + j] = v;
                m.data[j * n + i] = v;
            }
        }
        Ok(m)
    }

    /// Symmetrizes a flat vector whose length is a perfect square.
    pub fn from_flat(data: &[f64]) -> Result<Self> {
        let n = side_of(data.len()).ok_or_else(|| {
            Error::InvalidParameter(format!("length {} is not a perfect square", data.len()))
        })?;
        Self::from_row_major(n, data)
    }

    /// `scale * v vᵀ`
    pub fn rank_one(v: &[f64], scale: f64) -> Self {
        Self::from_fn(v.len(), |i, j| scale * v[i] * v[j])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn into_vec(self) -> Vec<f64> {
        self.data
    }

    pub fn trace(&self) -> f64 {
        (0..self.n).map(|i| self.data[i * self.n + i]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        norm2(&self.data)
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|v| v.is_finite())
    }

    /// `A + c I`
    pub fn shifted(&self, c: f64) -> Self {
        let mut m = self.clone();
        for i in 0..self.n {
            m.data[i * self.n + i] += c;
        }
        m
    }

    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) {
        debug_assert_eq!(x.len(), self.n);
        debug_assert_eq!(y.len(), self.n);
        for (row, yi) in self.data.chunks_exact(self.n).zip(y.iter_mut()) {
            *yi = dot(row, x);
        }
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y);
        y
    }

    pub fn quad_form(&self, v: &[f64]) -> f64 {
        dot(v, &self.matvec(v))
    }
}

/// Frobenius inner product `Σᵢⱼ AᵢⱼBᵢⱼ`.
pub fn frob_inner(a: &SymMat, b: &SymMat) -> Result<f64> {
    check_len(a.n, b.n)?;
    Ok(dot(&a.data, &b.data))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Which {
    Smallest,
    Largest,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EigPair {
    pub value: f64,
    /// Unit norm; sign fixed so the largest-magnitude entry is positive.
    pub vector: Vec<f64>,
    /// `‖Av − λv‖₂`
    pub residual: f64,
    /// False when the matvec budget ran out before the residual target was met.
    pub converged: bool,
    pub matvecs: usize,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EigOptions {
    /// Residual target relative to `‖A‖_F`.
    pub tol: f64,
    /// Matvec budget; `None` means `10 * n`.
    pub max_iter: Option<usize>,
    pub seed: u64,
}

impl Default for EigOptions {
    fn default() -> Self {
        EigOptions {
            tol: 1e-9,
            max_iter: None,
            seed: 0x5eed,
        }
    }
}

/// Extreme eigenpair of a symmetric matrix from a seeded random start.
pub fn extreme_eigpair(
    a: &SymMat,
    which: Which,
    tol: f64,
    max_iter: usize,
    seed: u64,
) -> Result<EigPair> {
    let opts = EigOptions {
        tol,
        max_iter: Some(max_iter),
        seed,
    };
    extreme_eigpair_from(a, which, &opts, None)
}

/// Like [`extreme_eigpair`] but optionally warm-started from `start`.
///
/// The start vector is blended with a seeded random direction so that a
/// stale hint orthogonal to the wanted eigenvector cannot stall the Krylov
/// subspace.
pub fn extreme_eigpair_from(
    a: &SymMat,
    which: Which,
    opts: &EigOptions,
    start: Option<&[f64]>,
) -> Result<EigPair> {
    if !(opts.tol > 0.0) {
        return Err(Error::InvalidParameter(format!("tol must be > 0, got {}", opts.tol)));
    }
    let max_mv = opts.max_iter.unwrap_or(10 * a.n);
    if max_mv == 0 {
        return Err(Error::InvalidParameter("max_iter must be >= 1".into()));
    }
    if !a.is_finite() {
        return Err(Error::NonFinite("eigensolver input"));
    }
    if let Some(s) = start {
        check_len(a.n, s.len())?;
    }
    Ok(Lanczos::new(a, which, opts.tol, max_mv, opts.seed).solve(start))
}

struct Lanczos<'a> {
    a: &'a SymMat,
    which: Which,
    target: f64,
    norm_a: f64,
    max_mv: usize,
    rng: ChaCha8Rng,
    matvecs: usize,
}

impl<'a> Lanczos<'a> {
    fn new(a: &'a SymMat, which: Which, tol: f64, max_mv: usize, seed: u64) -> Self {
        let norm_a = a.frobenius_norm();
        Lanczos {
            a,
            which,
            target: tol * norm_a,
            norm_a,
            max_mv,
            rng: ChaCha8Rng::seed_from_u64(seed),
            matvecs: 0,
        }
    }

    fn random_unit(&mut self) -> Vec<f64> {
        loop {
            let v: Vec<f64> = (0..self.a.n).map(|_| self.rng.random_range(-1.0..1.0)).collect();
            let nv = norm2(&v);
            if nv > 1e-8 {
                return v.into_iter().map(|x| x / nv).collect();
            }
        }
    }

    fn initial(&mut self, start: Option<&[f64]>) -> Vec<f64> {
        let mut q = self.random_unit();
        if let Some(s) = start {
            let ns = norm2(s);
            if ns.is_finite() && ns > 0.0 {
                for (qi, si) in q.iter_mut().zip(s) {
                    *qi = si / ns + 0.1 * *qi;
                }
                let nq = norm2(&q);
                q.iter_mut().for_each(|x| *x /= nq);
            }
        }
        q
    }

    fn finish(&self, mut v: Vec<f64>, value: f64, residual: f64, converged: bool) -> EigPair {
        fix_sign(&mut v);
        EigPair {
            value,
            vector: v,
            residual,
            converged,
            matvecs: self.matvecs,
        }
    }

    /// Rayleigh quotient and true residual of a unit vector.
    fn assess(&mut self, v: &[f64]) -> (f64, f64) {
        let av = self.a.matvec(v);
        self.matvecs += 1;
        let theta = dot(v, &av);
        let r: f64 = av
            .iter()
            .zip(v)
            .map(|(x, y)| (x - theta * y).powi(2))
            .sum::<f64>()
            .sqrt();
        (theta, r)
    }

    fn solve(mut self, start: Option<&[f64]>) -> EigPair {
        let n = self.a.n;
        if n == 1 {
            return self.finish(vec![1.0], self.a.data[0], 0.0, true);
        }
        let mut q0 = self.initial(start);
        if self.norm_a == 0.0 {
            return self.finish(q0, 0.0, 0.0, true);
        }
        let breakdown_tol = 1e-12 * self.norm_a;
        let mut best: Option<(f64, Vec<f64>, f64)> = None;
        let mut w = vec![0.0; n];

        loop {
            let mut basis: Vec<Vec<f64>> = vec![q0];
            let mut alpha: Vec<f64> = Vec::new();
            let mut beta: Vec<f64> = Vec::new();

            let ritz = loop {
                let j = basis.len() - 1;
                self.a.matvec_into(&basis[j], &mut w);
                self.matvecs += 1;
                let aj = dot(&basis[j], &w);
                axpy(-aj, &basis[j], &mut w);
                if j > 0 {
                    axpy(-beta[j - 1], &basis[j - 1], &mut w);
                }
                for _ in 0..2 {
                    for q in &basis {
                        let c = dot(q, &w);
                        axpy(-c, q, &mut w);
                    }
                }
                alpha.push(aj);
                let bj = norm2(&w);
                let full = basis.len() == n;
                let out_of_budget = self.matvecs >= self.max_mv;

                if bj <= breakdown_tol && !full && !out_of_budget {
                    // Invariant subspace: keep the Ritz values honest by
                    // extending with a fresh orthogonal direction.
                    let mut r = self.random_unit();
                    for _ in 0..2 {
                        for q in &basis {
                            let c = dot(q, &r);
                            axpy(-c, q, &mut r);
                        }
                    }
                    let nr = norm2(&r);
                    r.iter_mut().for_each(|x| *x /= nr);
                    beta.push(0.0);
                    basis.push(r);
                    continue;
                }

                let (_, s) = tridiag_extreme(&alpha, &beta, self.which);
                let estimate = bj * s.last().copied().unwrap_or(0.0).abs();
                if estimate <= self.target || full || out_of_budget {
                    let mut v = vec![0.0; n];
                    for (si, q) in s.iter().zip(&basis) {
                        axpy(*si, q, &mut v);
                    }
                    let nv = norm2(&v);
                    v.iter_mut().for_each(|x| *x /= nv);
                    break v;
                }
                let next: Vec<f64> = w.iter().map(|x| x / bj).collect();
                beta.push(bj);
                basis.push(next);
            };

            let (value, residual) = self.assess(&ritz);
            if residual <= self.target {
                return self.finish(ritz, value, residual, true);
            }
            let improved = best.as_ref().is_none_or(|(_, _, r)| residual < *r);
            if improved {
                best = Some((value, ritz.clone(), residual));
            }
            if self.matvecs >= self.max_mv {
                let (value, v, residual) = best.expect("at least one Ritz pair assessed");
                return self.finish(v, value, residual, false);
            }
            q0 = ritz;
        }
    }
}

fn fix_sign(v: &mut [f64]) {
    let mut idx = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[idx].abs() {
            idx = i;
        }
    }
    if v[idx] < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Number of eigenvalues of the tridiagonal `(alpha, beta)` strictly below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64, pivmin: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let coupling = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] / d };
        d = alpha[i] - x - coupling;
        if d.abs() < pivmin {
            d = -pivmin;
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Extreme eigenpair of a symmetric tridiagonal matrix: bisection on the
/// Sturm sequence for the value, inverse iteration for the vector.
fn tridiag_extreme(alpha: &[f64], beta: &[f64], which: Which) -> (f64, Vec<f64>) {
    let k = alpha.len();
    if k == 1 {
        return (alpha[0], vec![1.0]);
    }
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    let mut scale: f64 = 0.0;
    for i in 0..k {
        let left = if i > 0 { beta[i - 1].abs() } else { 0.0 };
        let right = if i + 1 < k { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - left - right);
        hi = hi.max(alpha[i] + left + right);
        scale = scale.max(alpha[i].abs()).max(left);
    }
    let bmax2 = beta.iter().fold(0.0_f64, |m, b| m.max(b * b));
    let pivmin = f64::MIN_POSITIVE * bmax2.max(1.0);
    let span = (hi - lo).abs().max(scale).max(f64::MIN_POSITIVE);
    lo -= 1e-14 * span;
    hi += 1e-14 * span;
    let wanted = match which {
        Which::Smallest => 1,
        Which::Largest => k,
    };
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if hi - lo <= 2.0 * f64::EPSILON * lo.abs().max(hi.abs()) + f64::MIN_POSITIVE {
            break;
        }
        if sturm_count(alpha, beta, mid, pivmin) >= wanted {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    let theta = 0.5 * (lo + hi);
    (theta, inverse_iteration(alpha, beta, theta, span))
}

fn inverse_iteration(alpha: &[f64], beta: &[f64], theta: f64, scale: f64) -> Vec<f64> {
    let k = alpha.len();
    let tiny = f64::EPSILON * scale.max(f64::MIN_POSITIVE);

    // LU with partial pivoting of T - theta I (LAPACK gttrf layout).
    let mut d: Vec<f64> = alpha.iter().map(|a| a - theta).collect();
    let mut dl = beta.to_vec();
    let mut du = beta.to_vec();
    let mut du2 = vec![0.0; k.saturating_sub(2)];
    let mut swapped = vec![false; k - 1];
    for i in 0..k - 1 {
        if d[i].abs() >= dl[i].abs() {
            if d[i] == 0.0 {
                d[i] = tiny;
            }
            let fact = dl[i] / d[i];
            dl[i] = fact;
            d[i + 1] -= fact * du[i];
        } else {
            let fact = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = fact;
            let temp = du[i];
            du[i] = d[i + 1];
            d[i + 1] = temp - fact * d[i + 1];
            if i + 2 < k {
                du2[i] = du[i + 1];
                du[i + 1] *= -fact;
            }
            swapped[i] = true;
        }
    }
    for di in d.iter_mut() {
        if di.abs() < tiny {
            *di = if *di < 0.0 { -tiny } else { tiny };
        }
    }

    let mut b: Vec<f64> = (0..k).map(|i| 1.0 + 0.1 * ((i * 7 + 3) % 11) as f64).collect();
    for _ in 0..3 {
        for i in 0..k - 1 {
            if swapped[i] {
                let temp = b[i] - dl[i] * b[i + 1];
                b[i] = b[i + 1];
                b[i + 1] = temp;
            } else {
                b[i + 1] -= dl[i] * b[i];
            }
        }
        b[k - 1] /= d[k - 1];
        if k > 1 {
            b[k - 2] = (b[k - 2] - du[k - 2] * b[k - 1]) / d[k - 2];
        }
        for i in (0..k.saturating_sub(2)).rev() {
            b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
        }
        let nb = norm2(&b);
        if !nb.is_finite() || nb == 0.0 {
            break;
        }
        b.iter_mut().for_each(|x| *x /= nb);
    }
    b
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_smallest() {
        let a = SymMat::from_diag(&[1.0, 2.0]);
        let e = extreme_eigpair(&a, Which::Smallest, 1e-9, 20, 1).unwrap();
        assert!((e.value - 1.0).abs() < 1e-12);
        assert!((e.vector[0].abs() - 1.0).abs() < 1e-10);
        assert!(e.vector[1].abs() < 1e-10);
        assert!(e.converged);
    }

    #[test]
    fn zero_matrix() {
        let a = SymMat::zeros(3);
        let e = extreme_eigpair(&a, Which::Largest, 1e-9, 30, 7).unwrap();
        assert_eq!(e.value, 0.0);
        assert_eq!(e.residual, 0.0);
        assert!((norm2(&e.vector) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn rejects_non_finite() {
        let mut d = vec![0.0; 4];
        d[1] = f64::NAN;
        d[2] = f64::NAN;
        let a = SymMat::from_row_major(2, &d).unwrap();
        assert_eq!(
            extreme_eigpair(&a, Which::Smallest, 1e-9, 10, 0),
            Err(Error::NonFinite("eigensolver input"))
        );
    }

    #[test]
    fn start_in_wrong_eigenspace_still_finds_minimum() {
        let a = SymMat::from_diag(&[3.0, -2.0, 5.0, 1.0]);
        let opts = EigOptions::default();
        let e = extreme_eigpair_from(&a, Which::Smallest, &opts, Some(&[0.0, 0.0, 1.0, 0.0])).unwrap();
        assert!((e.value + 2.0).abs() < 1e-10);
    }

    #[test]
    fn rank_one_has_breakdown_but_converges() {
        let v = [0.6, 0.0, -0.8, 0.0, 0.0];
        let a = SymMat::rank_one(&v, -4.0);
        let e = extreme_eigpair(&a, Which::Smallest, 1e-9, 50, 3).unwrap();
        assert!((e.value + 4.0).abs() < 1e-10, "{}", e.value);
        let e = extreme_eigpair(&a, Which::Largest, 1e-9, 50, 3).unwrap();
        assert!(e.value.abs() < 1e-10);
    }

    #[test]
    fn sign_convention() {
        let a = SymMat::from_diag(&[-1.0, 2.0]);
        let e = extreme_eigpair(&a, Which::Smallest, 1e-9, 20, 99).unwrap();
        assert!(e.vector[0] > 0.0);
    }

    #[test]
    fn frob_inner_basics() {
        let i2 = SymMat::identity(2);
        assert_eq!(frob_inner(&i2, &i2).unwrap(), 2.0);
        assert_eq!(frob_inner(&i2, &SymMat::zeros(2)).unwrap(), 0.0);
        assert!(matches!(
            frob_inner(&i2, &SymMat::zeros(3)),
            Err(Error::DimMismatch { .. })
        ));
    }

    #[test]
    fn symmetrization_is_exact_on_symmetric_input() {
        let d = [1.0, 0.3, 0.3, -2.0];
        let m = SymMat::from_row_major(2, &d).unwrap();
        assert_eq!(m.as_slice(), &d);
        let m = SymMat::from_row_major(2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        assert_eq!(m.get(0, 1), 0.5);
        assert_eq!(m.get(1, 0), 0.5);
    }

    #[test]
    fn tridiag_matches_closed_form() {
        // [[2, 1], [1, 2]] has eigenvalues 1 and 3.
        let (lo, v) = tridiag_extreme(&[2.0, 2.0], &[1.0], Which::Smallest);
        assert!((lo - 1.0).abs() < 1e-14);
        assert!((v[0] + v[1]).abs() < 1e-10);
        let (hi, _) = tridiag_extreme(&[2.0, 2.0], &[1.0], Which::Largest);
        assert!((hi - 3.0).abs() < 1e-14);
    }
}
