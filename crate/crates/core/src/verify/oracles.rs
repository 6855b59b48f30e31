//! Slow reference implementations used to cross-check the fast paths. None of
//! these share code with the routines they check.

use crate::sets::EasySet;

/// Eigenvalues of a dense symmetric `n × n` row-major matrix by cyclic Jacobi
/// rotations, ascending.
pub fn jacobi_eigenvalues(a: &[f64], n: usize) -> Vec<f64> {
    assert_eq!(a.len(), n * n);
    let mut m = a.to_vec();
    for _sweep in 0..100 {
        let off: f64 = (0..n)
            .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| m[i * n + j].powi(2))
            .sum();
        let scale: f64 = m.iter().map(|v| v * v).sum::<f64>().max(f64::MIN_POSITIVE);
        if off <= 1e-30 * scale {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = m[p * n + q];
                if apq == 0.0 {
                    continue;
                }
                let theta = (m[q * n + q] - m[p * n + p]) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..n {
                    let mkp = m[k * n + p];
                    let mkq = m[k * n + q];
                    m[k * n + p] = c * mkp - s * mkq;
                    m[k * n + q] = s * mkp + c * mkq;
                }
                for k in 0..n {
                    let mpk = m[p * n + k];
                    let mqk = m[q * n + k];
                    m[p * n + k] = c * mpk - s * mqk;
                    m[q * n + k] = s * mpk + c * mqk;
                }
            }
        }
    }
    let mut ev: Vec<f64> = (0..n).map(|i| m[i * n + i]).collect();
    ev.sort_by(f64::total_cmp);
    ev
}

/// Projection onto `{‖x‖₁ ≤ r}` by enumerating supports: on a support `S`
/// the candidate is `yᵢ − θ sign(yᵢ)` with `θ` fixed by `‖x‖₁ = r`; the
/// closest sign-consistent candidate wins.
pub fn l1_projection_bruteforce(y: &[f64], r: f64) -> Vec<f64> {
    let l1: f64 = y.iter().map(|v| v.abs()).sum();
    if l1 <= r {
        return y.to_vec();
    }
    let n = y.len();
    assert!(n <= 20, "brute force is exponential in the dimension");
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 1u32..(1 << n) {
        let support: Vec<usize> = (0..n).filter(|i| mask >> i & 1 == 1).collect();
        let theta = (support.iter().map(|&i| y[i].abs()).sum::<f64>() - r) / support.len() as f64;
        if theta < 0.0 || support.iter().any(|&i| y[i].abs() < theta) {
            continue;
        }
        let mut x = vec![0.0; n];
        for &i in &support {
            x[i] = y[i] - theta * y[i].signum();
        }
        let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.expect("some support is always feasible").1
}

/// Solves the small dense system `a x = b` by Gaussian elimination with
/// partial pivoting; `None` when singular.
fn solve_dense(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let piv = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[piv][col].abs() < 1e-12 {
            return None;
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..n {
            let f = a[row][col] / a[col][col];
            let pivot = a[col].clone();
            for (x, p) in a[row][col..n].iter_mut().zip(&pivot[col..n]) {
                *x -= f * p;
            }
            b[row] -= f * b[col];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let s: f64 = (i + 1..n).map(|j| a[i][j] * x[j]).sum();
        x[i] = (b[i] - s) / a[i][i];
    }
    Some(x)
}

/// Projection onto `{x : ⟨aᵢ, x⟩ ≤ bᵢ, ⟨cⱼ, x⟩ = dⱼ}` by trying every subset
/// of the inequalities as the active set.
pub fn polyhedron_projection_bruteforce(y: &[f64], ineq: &[(Vec<f64>, f64)], eq: &[(Vec<f64>, f64)]) -> Option<Vec<f64>> {
    assert!(ineq.len() <= 16, "brute force is exponential in the constraint count");
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let mut best: Option<(f64, Vec<f64>)> = None;
    for mask in 0u32..(1 << ineq.len()) {
        let active: Vec<&(Vec<f64>, f64)> = eq
            .iter()
            .chain(ineq.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, c)| c))
            .collect();
        let x = if active.is_empty() {
            y.to_vec()
        } else {
            // x = y − Aᵀλ with A A ᵀ λ = A y − b
            let gram: Vec<Vec<f64>> = active
                .iter()
                .map(|(ai, _)| active.iter().map(|(aj, _)| dot(ai, aj)).collect())
                .collect();
            let rhs: Vec<f64> = active.iter().map(|(a, b)| dot(a, y) - b).collect();
            let Some(lam) = solve_dense(gram, rhs) else {
                continue;
            };
            let mut x = y.to_vec();
            for ((a, _), l) in active.iter().zip(&lam) {
                for (xi, ai) in x.iter_mut().zip(a) {
                    *xi -= l * ai;
                }
            }
            x
        };
        let feasible = ineq.iter().all(|(a, b)| dot(a, &x) <= b + 1e-9)
            && eq.iter().all(|(c, d)| (dot(c, &x) - d).abs() <= 1e-9 * (1.0 + d.abs()));
        if !feasible {
            continue;
        }
        let d: f64 = x.iter().zip(y).map(|(a, b)| (a - b).powi(2)).sum();
        if best.as_ref().is_none_or(|(bd, _)| d < *bd) {
            best = Some((d, x));
        }
    }
    best.map(|(_, x)| x)
}

/// Reference projection onto any [`EasySet`] of small dimension.
pub fn easy_set_projection_bruteforce(set: &EasySet, y: &[f64]) -> Vec<f64> {
    let unit = |n: usize, i: usize, s: f64| {
        let mut e = vec![0.0; n];
        e[i] = s;
        e
    };
    match set {
        EasySet::L1Ball { radius, .. } => l1_projection_bruteforce(y, *radius),
        EasySet::FixedPoint(b) => b.clone(),
        EasySet::NonNegOrthant(n) => {
            let ineq: Vec<(Vec<f64>, f64)> = (0..*n).map(|i| (unit(*n, i, -1.0), 0.0)).collect();
            polyhedron_projection_bruteforce(y, &ineq, &[]).expect("orthant is nonempty")
        }
        EasySet::Halfspace { normal, offset } => {
            polyhedron_projection_bruteforce(y, &[(normal.clone(), *offset)], &[]).expect("halfspace is nonempty")
        }
        EasySet::Hyperplane { normal, offset } => {
            polyhedron_projection_bruteforce(y, &[], &[(normal.clone(), *offset)]).expect("hyperplane is nonempty")
        }
        EasySet::Product(parts) => {
            let mut out = Vec::with_capacity(y.len());
            let mut at = 0;
            for p in parts {
                let d = p.dim();
                out.extend(easy_set_projection_bruteforce(p, &y[at..at + d]));
                at += d;
            }
            out
        }
    }
}

/// Central finite-difference gradient with step `h`.
pub fn finite_difference_grad(f: impl Fn(&[f64]) -> f64, x: &[f64], h: f64) -> Vec<f64> {
    let mut buf = x.to_vec();
    (0..x.len())
        .map(|i| {
            buf[i] = x[i] + h;
            let up = f(&buf);
            buf[i] = x[i] - h;
            let down = f(&buf);
            buf[i] = x[i];
            (up - down) / (2.0 * h)
        })
        .collect()
}
