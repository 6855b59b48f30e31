//! Linear minimization oracles over the hard set and the trimming wrapper
//! that reuses the previous atom while the surrogate has barely moved.

use crate::error::{Error, Result};
use crate::linops::{check_len, dist, dot, extreme_eigpair_from, EigOptions, SymMat, Which};

/// Hard constraint set with a cheap linear minimization oracle.
#[derive(Clone, Debug, PartialEq)]
pub enum AtomSet {
    /// `{X ⪰ 0, tr X ≤ radius}` over `n × n` matrices, flattened row-major.
    PsdTraceBall { n: usize, radius: f64 },
    /// The box `[lo, hi]`, used by the synthetic test problems.
    Hypercube { lo: Vec<f64>, hi: Vec<f64> },
}

/// Result of one oracle call.
#[derive(Clone, Debug, PartialEq)]
pub struct Atom {
    pub point: Vec<f64>,
    /// `⟨point, w⟩`
    pub value: f64,
    /// Eigenvector behind a rank-one PSD atom; reused to warm-start the next solve.
    pub eigvec: Option<Vec<f64>>,
}

impl AtomSet {
    pub fn psd_trace_ball(n: usize, radius: f64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter("matrix side must be >= 1".into()));
        }
        if !(radius.is_finite() && radius >= 0.0) {
            return Err(Error::InvalidParameter(format!("trace radius must be finite and >= 0, got {radius}")));
        }
        Ok(AtomSet::PsdTraceBall { n, radius })
    }

    pub fn hypercube(lo: Vec<f64>, hi: Vec<f64>) -> Result<Self> {
        check_len(lo.len(), hi.len())?;
        if lo.iter().zip(&hi).any(|(l, h)| !(l <= h)) {
            return Err(Error::InvalidParameter("hypercube needs lo <= hi".into()));
        }
        Ok(AtomSet::Hypercube { lo, hi })
    }

    /// Flat dimension `m` of the decision vector.
    pub fn dim(&self) -> usize {
        match self {
            AtomSet::PsdTraceBall { n, .. } => n * n,
            AtomSet::Hypercube { lo, .. } => lo.len(),
        }
    }

    /// Euclidean diameter.
    pub fn diameter(&self) -> f64 {
        match self {
            AtomSet::PsdTraceBall { radius, .. } => std::f64::consts::SQRT_2 * radius,
            AtomSet::Hypercube { lo, hi } => dist(lo, hi),
        }
    }

    /// Deterministic feasible start: `K e₁e₁ᵀ` for the PSD ball, `lo` for the box.
    pub fn initial_point(&self) -> Vec<f64> {
        match self {
            AtomSet::PsdTraceBall { n, radius } => {
                let mut x = vec![0.0; n * n];
                x[0] = *radius;
                x
            }
            AtomSet::Hypercube { lo, .. } => lo.clone(),
        }
    }

    /// `argmin_{z ∈ C} ⟨z, w⟩`.
    pub fn minimize(&self, w: &[f64], hint: Option<&[f64]>) -> Result<Atom> {
        check_len(self.dim(), w.len())?;
        if w.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite("lmo direction"));
        }
        match self {
            AtomSet::PsdTraceBall { n, radius } => {
                let sym = SymMat::from_row_major(*n, w)?;
                let pair = extreme_eigpair_from(&sym, Which::Smallest, &EigOptions::default(), hint)?;
                if !pair.converged {
                    return Err(Error::EigFailure {
                        residual: pair.residual,
                        target: EigOptions::default().tol * sym.frobenius_norm(),
                        iterations: pair.matvecs,
                    });
                }
                if pair.value < 0.0 {
                    let point = SymMat::rank_one(&pair.vector, *radius).into_vec();
                    let value = dot(&point, w);
                    Ok(Atom {
                        point,
                        value,
                        eigvec: Some(pair.vector),
                    })
                } else {
                    Ok(Atom {
                        point: vec![0.0; n * n],
                        value: 0.0,
                        eigvec: Some(pair.vector),
                    })
                }
            }
            AtomSet::Hypercube { lo, hi } => {
                let point: Vec<f64> = w
                    .iter()
                    .zip(lo.iter().zip(hi))
                    .map(|(&wi, (&l, &h))| {
                        if wi > 0.0 {
                            l
                        } else if wi < 0.0 {
                            h
                        } else {
                            0.0f64.clamp(l, h)
                        }
                    })
                    .collect();
                let value = dot(&point, w);
                Ok(Atom {
                    point,
                    value,
                    eigvec: None,
                })
            }
        }
    }

    /// Membership test with the tolerances used by the solver's feasibility checks.
    pub fn contains(&self, x: &[f64], trace_tol: f64, eig_tol: f64) -> Result<bool> {
        check_len(self.dim(), x.len())?;
        match self {
            AtomSet::PsdTraceBall { n, radius } => {
                let sym = SymMat::from_row_major(*n, x)?;
                if sym.trace() > radius + trace_tol {
                    return Ok(false);
                }
                let pair = extreme_eigpair_from(&sym, Which::Smallest, &EigOptions::default(), None)?;
                Ok(pair.value >= -eig_tol)
            }
            AtomSet::Hypercube { lo, hi } => Ok(x
                .iter()
                .zip(lo.iter().zip(hi))
                .all(|(&v, (&l, &h))| v >= l - trace_tol && v <= h + trace_tol)),
        }
    }
}

/// Free-function form of [`AtomSet::minimize`] without a warm start.
pub fn lmo(atoms: &AtomSet, w: &[f64]) -> Result<Vec<f64>> {
    Ok(atoms.minimize(w, None)?.point)
}

/// Bookkeeping for the trimmed oracle: the last surrogate sent to the LMO
/// and the atom it returned.
#[derive(Clone, Debug, PartialEq)]
pub struct TrimState {
    pub v: Vec<f64>,
    pub z: Vec<f64>,
    pub calls_made: usize,
    pub calls_skipped: usize,
    hint: Option<Vec<f64>>,
}

impl TrimState {
    pub fn new(dim: usize) -> Self {
        TrimState {
            v: vec![0.0; dim],
            z: vec![0.0; dim],
            calls_made: 0,
            calls_skipped: 0,
            hint: None,
        }
    }

    /// Eigenvector from the last PSD call, if any.
    pub fn hint(&self) -> Option<&[f64]> {
        self.hint.as_deref()
    }

    /// Calls the oracle on `s` when `first` or `‖s − v‖ ≥ tau`, otherwise keeps
    /// the stored atom. Returns whether the call was skipped.
    pub fn step(&mut self, atoms: &AtomSet, s: &[f64], tau: f64, first: bool) -> Result<bool> {
        if !(tau >= 0.0) {
            return Err(Error::InvalidParameter(format!("trimming threshold must be >= 0, got {tau}")));
        }
        check_len(self.v.len(), s.len())?;
        if first || dist(s, &self.v) >= tau {
            let atom = atoms.minimize(s, self.hint.as_deref())?;
            self.v.copy_from_slice(s);
            self.z = atom.point;
            if atom.eigvec.is_some() {
                self.hint = atom.eigvec;
            }
            self.calls_made += 1;
            Ok(false)
        } else {
            self.calls_skipped += 1;
            Ok(true)
        }
    }
}

/// Functional form: consumes and returns the state.
pub fn trimmed_lmo(
    mut ts: TrimState,
    atoms: &AtomSet,
    s: &[f64],
    tau: f64,
    first: bool,
) -> Result<(Vec<f64>, TrimState, bool)> {
    let skipped = ts.step(atoms, s, tau, first)?;
    Ok((ts.z.clone(), ts, skipped))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_direction_gives_zero() {
        let a = AtomSet::psd_trace_ball(3, 5.0).unwrap();
        let w = SymMat::identity(3).into_vec();
        let atom = a.minimize(&w, None).unwrap();
        assert!(atom.point.iter().all(|&v| v == 0.0));
        assert_eq!(atom.value, 0.0);
    }

    #[test]
    fn diagonal_direction() {
        let a = AtomSet::psd_trace_ball(2, 3.0).unwrap();
        let w = [-1.0, 0.0, 0.0, 2.0];
        let atom = a.minimize(&w, None).unwrap();
        assert!((atom.value + 3.0).abs() < 1e-12);
        assert!((atom.point[0] - 3.0).abs() < 1e-12);
        assert!(atom.point[1].abs() < 1e-12 && atom.point[3].abs() < 1e-12);
    }

    #[test]
    fn hypercube_vertex() {
        let a = AtomSet::hypercube(vec![-1.0; 3], vec![1.0; 3]).unwrap();
        assert_eq!(lmo(&a, &[2.0, -3.0, 0.0]).unwrap(), vec![-1.0, 1.0, 0.0]);
    }

    #[test]
    fn rejects_bad_input() {
        let a = AtomSet::psd_trace_ball(2, 1.0).unwrap();
        assert!(matches!(a.minimize(&[1.0; 3], None), Err(Error::DimMismatch { .. })));
        assert!(matches!(a.minimize(&[f64::NAN, 0.0, 0.0, 1.0], None), Err(Error::NonFinite(_))));
    }

    #[test]
    fn trim_first_always_calls() {
        let a = AtomSet::hypercube(vec![0.0; 2], vec![1.0; 2]).unwrap();
        let mut ts = TrimState::new(2);
        assert!(!ts.step(&a, &[0.0, 0.0], 1e9, true).unwrap());
        assert_eq!(ts.v, vec![0.0, 0.0]);
        assert_eq!(ts.calls_made, 1);
    }

    #[test]
    fn trim_zero_threshold_always_calls() {
        let a = AtomSet::hypercube(vec![0.0; 2], vec![1.0; 2]).unwrap();
        let mut ts = TrimState::new(2);
        ts.step(&a, &[1.0, 1.0], 0.0, true).unwrap();
        for _ in 0..3 {
            assert!(!ts.step(&a, &[1.0, 1.0], 0.0, false).unwrap());
        }
        assert_eq!(ts.calls_made, 4);
    }

    #[test]
    fn trim_skips_identical_surrogate() {
        let a = AtomSet::hypercube(vec![0.0; 2], vec![1.0; 2]).unwrap();
        let (z1, ts, _) = trimmed_lmo(TrimState::new(2), &a, &[1.0, -1.0], 0.5, true).unwrap();
        let (z2, ts, skipped) = trimmed_lmo(ts, &a, &[1.0, -1.0], 0.5, false).unwrap();
        assert!(skipped);
        assert_eq!(z1, z2);
        assert_eq!((ts.calls_made, ts.calls_skipped), (1, 1));
    }

    #[test]
    fn trim_equality_triggers_call() {
        let a = AtomSet::hypercube(vec![0.0], vec![1.0]).unwrap();
        let mut ts = TrimState::new(1);
        ts.step(&a, &[1.0], 0.5, true).unwrap();
        assert!(!ts.step(&a, &[1.5], 0.5, false).unwrap());
    }
}
