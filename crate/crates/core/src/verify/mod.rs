//! Property and oracle checks run by `pffw verify`. Each check reports the
//! worst deviation it saw next to the tolerance it was held to.

use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::Result;
use crate::gradients::{cge, OracleMode};
use crate::linops::{dist, dot, norm2, sub};
use crate::lmo::AtomSet;
use crate::problems::kmeans::{indicator_matrix, make_kmeans_labeled};
use crate::problems::{make_quadratic_test, planted_blobs, SparseCovOptions};
use crate::record::RunRecord;
use crate::sets::{ChannelBlock, ConstraintChannel, EasySet, LinearMap};
use crate::smoothing::{penalty_grad, penalty_value};
use crate::solvers::{run, Algo, ProblemConstants, RunSettings, ScheduleParams, Variant};

pub mod oracles;

use oracles::{easy_set_projection_bruteforce, finite_difference_grad, jacobi_eigenvalues, l1_projection_bruteforce};

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub name: &'static str,
    pub worst: f64,
    pub tol: f64,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &'static str, worst: f64, tol: f64, detail: impl Into<String>) -> Self {
        Check {
            name,
            worst,
            tol,
            passed: worst <= tol,
            detail: detail.into(),
        }
    }
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "{} {}: worst {:.3e} (tol {:.1e}) {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.name,
            self.worst,
            self.tol,
            self.detail
        )
    }
}

fn gaussian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> Vec<f64> {
    (0..n).map(|_| scale * rng.sample::<f64, _>(StandardNormal)).collect()
}

fn random_sym(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    let a = gaussian(rng, n * n, 1.0);
    (0..n * n).map(|t| 0.5 * (a[t] + a[(t % n) * n + t / n])).collect()
}

/// A random easy set of dimension `d`; products nest one level.
pub fn random_easy_set(rng: &mut ChaCha8Rng, d: usize, allow_product: bool) -> EasySet {
    let pick = rng.random_range(0..if allow_product && d >= 2 { 6 } else { 5 });
    match pick {
        0 => EasySet::L1Ball {
            radius: rng.random_range(0.2..3.0),
            dim: d,
        },
        1 => EasySet::NonNegOrthant(d),
        2 => EasySet::Halfspace {
            normal: gaussian(rng, d, 1.0),
            offset: rng.random_range(-1.0..1.0),
        },
        3 => EasySet::Hyperplane {
            normal: gaussian(rng, d, 1.0),
            offset: rng.random_range(-1.0..1.0),
        },
        4 => EasySet::FixedPoint(gaussian(rng, d, 1.0)),
        _ => {
            let cut = rng.random_range(1..d);
            EasySet::Product(vec![random_easy_set(rng, cut, false), random_easy_set(rng, d - cut, false)])
        }
    }
}

/// A random channel on `ℝⁿ` with one or two blocks of mixed map kinds.
pub fn random_channel(rng: &mut ChaCha8Rng, n: usize) -> Result<ConstraintChannel> {
    let blocks = rng.random_range(1..=2);
    let mut out = Vec::with_capacity(blocks);
    for _ in 0..blocks {
        let map = match rng.random_range(0..3) {
            0 => LinearMap::Identity { dim: n },
            1 => {
                let k = rng.random_range(1..=n);
                let idx = rand::seq::index::sample(rng, n, k).into_vec();
                LinearMap::Select { dim: n, indices: idx }
            }
            _ => {
                let rows = rng.random_range(1..=3);
                LinearMap::Functionals {
                    dim: n,
                    rows: (0..rows)
                        .map(|_| {
                            let mut row = Vec::new();
                            for j in 0..n {
                                if rng.random_bool(0.6) {
                                    row.push((j, rng.sample(StandardNormal)));
                                }
                            }
                            row
                        })
                        .collect(),
                }
            }
        };
        let target = random_easy_set(rng, map.out_dim(), true);
        out.push(ChannelBlock { map, target });
    }
    ConstraintChannel::new(out)
}

/// Largest eigenvalue of `GᵀG`, assembled column by column.
fn exact_gram_bound(ch: &ConstraintChannel) -> Result<f64> {
    let n = ch.in_dim();
    let cols: Vec<Vec<f64>> = (0..n)
        .map(|j| {
            let mut e = vec![0.0; n];
            e[j] = 1.0;
            ch.apply_g(&e)
        })
        .collect::<Result<_>>()?;
    let gram: Vec<f64> = (0..n * n).map(|t| dot(&cols[t / n], &cols[t % n])).collect();
    Ok(*jacobi_eigenvalues(&gram, n).last().unwrap_or(&0.0))
}

/// PSD trace-ball LMO value `⟨Z, W⟩` against `K · min(0, λ_min(W))` from a
/// dense Jacobi solve. A quarter of the instances are positive definite.
pub fn check_psd_lmo(instances: usize, n: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for t in 0..instances {
        let mut w = random_sym(&mut rng, n);
        if t % 4 == 3 {
            let b = gaussian(&mut rng, n * n, 1.0);
            w = (0..n * n)
                .map(|p| {
                    let (i, j) = (p / n, p % n);
                    (0..n).map(|l| b[i * n + l] * b[j * n + l]).sum::<f64>() / n as f64 + if i == j { 0.1 } else { 0.0 }
                })
                .collect();
        }
        let k = rng.random_range(0.5..5.0);
        let atoms = AtomSet::psd_trace_ball(n, k)?;
        let z = atoms.minimize(&w, None)?.point;
        let got = dot(&z, &w);
        let lam_min = jacobi_eigenvalues(&w, n)[0];
        let want = k * lam_min.min(0.0);
        let err = if want == 0.0 { got.abs() } else { (got - want).abs() / want.abs() };
        worst = worst.max(err);
    }
    Ok(Check::new(
        "psd-lmo-vs-jacobi",
        worst,
        1e-6,
        format!("{instances} instances, n = {n}, relative"),
    ))
}

/// ℓ1-ball projection against support enumeration, dims 1 to 5.
pub fn check_l1_projection(instances: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let d = rng.random_range(1..=5);
        let y = gaussian(&mut rng, d, 2.0);
        let r = rng.random_range(0.1..3.0);
        let got = EasySet::L1Ball { radius: r, dim: d }.project(&y)?;
        worst = worst.max(dist(&got, &l1_projection_bruteforce(&y, r)));
    }
    Ok(Check::new("l1-projection-vs-bruteforce", worst, 1e-6, format!("{instances} instances")))
}

/// Projections onto random product sets against active-set enumeration.
pub fn check_product_projection(instances: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let d = rng.random_range(2..=5);
        let set = match random_easy_set(&mut rng, d, true) {
            p @ EasySet::Product(_) => p,
            _ => EasySet::Product(vec![random_easy_set(&mut rng, d - 1, false), random_easy_set(&mut rng, 1, false)]),
        };
        let y = gaussian(&mut rng, set.dim(), 2.0);
        let got = set.project(&y)?;
        worst = worst.max(dist(&got, &easy_set_projection_bruteforce(&set, &y)));
    }
    Ok(Check::new("product-projection-vs-bruteforce", worst, 1e-6, format!("{instances} instances")))
}

/// `penalty_grad` against central differences of `penalty_value` on random
/// channels. Instances whose gradient is below `1e-3` are compared in
/// absolute terms, since the relative error is meaningless there.
pub fn check_penalty_gradient(instances: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    for _ in 0..instances {
        let n = rng.random_range(2..=6);
        let ch = random_channel(&mut rng, n)?;
        let mu = rng.random_range(0.1..2.0);
        let x = gaussian(&mut rng, n, 1.5);
        let g = penalty_grad(&ch, mu, &x)?;
        let fd = finite_difference_grad(|z| penalty_value(&ch, mu, z).unwrap_or(f64::NAN), &x, 1e-6);
        let err = norm2(&sub(&g, &fd)) / norm2(&g).max(1e-3);
        worst = worst.max(err);
    }
    Ok(Check::new(
        "penalty-grad-vs-finite-differences",
        worst,
        1e-4,
        format!("{instances} instances, relative"),
    ))
}

/// `‖∇h(x) − ∇h(y)‖ ≤ (L_G/μ)‖x − y‖` with `L_G = λ_max(GᵀG)` from Jacobi;
/// the worst ratio to the bound is reported. Also fails if a channel's
/// declared bound is below the exact one.
pub fn check_penalty_lipschitz(pairs: usize, seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst: f64 = 0.0;
    let mut under = 0usize;
    for _ in 0..pairs {
        let n = rng.random_range(2..=6);
        let ch = random_channel(&mut rng, n)?;
        let lg = exact_gram_bound(&ch)?;
        if ch.spectral_bound() < lg * (1.0 - 1e-9) {
            under += 1;
        }
        let mu = rng.random_range(0.1..2.0);
        let x = gaussian(&mut rng, n, 2.0);
        let y = gaussian(&mut rng, n, 2.0);
        let gx = penalty_grad(&ch, mu, &x)?;
        let gy = penalty_grad(&ch, mu, &y)?;
        let dxy = dist(&x, &y);
        if dxy > 0.0 && lg > 0.0 {
            worst = worst.max(dist(&gx, &gy) / (lg / mu * dxy));
        }
    }
    let worst = if under > 0 { f64::INFINITY } else { worst };
    Ok(Check::new(
        "penalty-grad-lipschitz",
        worst,
        1.0 + 1e-9,
        format!("{pairs} pairs, ratio to L_G/mu; {under} channels under-report L_G"),
    ))
}

/// CGE on a random quadratic equals the analytic gradient.
pub fn check_cge_quadratic(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 12;
    let a = random_sym(&mut rng, m);
    let b = gaussian(&mut rng, m, 1.0);
    let f = |x: &[f64]| {
        let ax: Vec<f64> = (0..m).map(|i| dot(&a[i * m..(i + 1) * m], x)).collect();
        0.5 * dot(x, &ax) + dot(&b, x)
    };
    let mut worst: f64 = 0.0;
    for trial in 0..20 {
        let x = gaussian(&mut rng, m, 1.0);
        let rho = [1e-3, 1e-2, 0.1, 1.0][trial % 4];
        let mut calls = 0;
        let est = cge(f, &x, rho, &mut calls)?;
        let exact: Vec<f64> = (0..m).map(|i| dot(&a[i * m..(i + 1) * m], &x) + b[i]).collect();
        worst = worst.max(dist(&est, &exact));
    }
    Ok(Check::new("cge-exact-on-quadratic", worst, 1e-10, "20 points, absolute"))
}

/// CGE bias on `f(x) = ¼ Σ xᵢ⁴` against `√m · L · ρ`, with `L` the gradient
/// Lipschitz constant on the box the differences touch. Reports the worst
/// ratio of error to bound.
pub fn check_cge_quartic(seed: u64) -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let m = 10;
    let f = |x: &[f64]| x.iter().map(|v| v.powi(4)).sum::<f64>() / 4.0;
    let mut worst: f64 = 0.0;
    for trial in 0..30 {
        let x: Vec<f64> = (0..m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let rho = [0.5, 0.1, 0.01][trial % 3];
        let mut calls = 0;
        let est = cge(f, &x, rho, &mut calls)?;
        let exact: Vec<f64> = x.iter().map(|v| v.powi(3)).collect();
        let r = x.iter().fold(0.0f64, |a, v| a.max(v.abs())) + rho;
        let bound = (m as f64).sqrt() * 3.0 * r * r * rho;
        worst = worst.max(dist(&est, &exact) / bound);
    }
    Ok(Check::new("cge-bias-on-quartic", worst, 1.0, "30 points, ratio to sqrt(m) L rho"))
}

/// Sweeps `μ_k ≥ μ_{k−1}(1 − η_k)` for `2 ≤ k ≤ k_max`, both variants.
pub fn check_schedule_condition(k_max: usize) -> Check {
    let mut violations = 0usize;
    for variant in [Variant::MostFw, Variant::MostFwPlus] {
        let p = ScheduleParams {
            mu_c: 1.0,
            tau_0: 0.0,
            constants: ProblemConstants { l: 1.0, l_g: 1.0, d: 1.0 },
            variant,
            mode: OracleMode::Sfo,
        };
        violations += (2..=k_max).filter(|&k| p.check_mu_condition(k).is_err()).count();
    }
    Check::new("mu-schedule-condition", violations as f64, 0.0, format!("k <= {k_max}, violations counted"))
}

/// With `τ₀ = 0` the trimmed solvers reproduce the untrimmed traces exactly,
/// and a positive `τ₀` run never trips the skip invariant.
pub fn check_trimming(iters: usize, seed: u64) -> Result<Check> {
    let spec = SparseCovOptions::new(8, 2).batch(4).build(seed)?;
    let mut mismatches = 0usize;
    let mut failures = Vec::new();
    for (plain, trimmed) in [(Algo::MostFw, Algo::TMostFw), (Algo::MostFwPlus, Algo::TMostFwPlus)] {
        let a = run(&spec, &RunSettings::new(plain, iters, seed));
        let b = run(&spec, &RunSettings::new(trimmed, iters, seed));
        if a.record.body_without_wall() != b.record.body_without_wall() || a.x != b.x {
            mismatches += 1;
        }
        let mut s = RunSettings::new(trimmed, iters, seed);
        s.tau_0 = 5.0;
        let c = run(&spec, &s);
        if let Some(e) = c.error {
            failures.push(format!("{trimmed}: {e}"));
        }
    }
    let worst = (mismatches + failures.len()) as f64;
    Ok(Check::new(
        "trimming-zero-tau-and-invariant",
        worst,
        0.0,
        format!("{mismatches} trace mismatches; {failures:?}"),
    ))
}

/// The normalized planted-cluster matrix is feasible for the k-means SDP.
pub fn check_kmeans_fixture(seed: u64) -> Result<Check> {
    let (pts, labels) = planted_blobs(30, 3, 4, 4.0, seed);
    let spec = make_kmeans_labeled(&pts, 3, 0.1, Some(&labels))?;
    let x = indicator_matrix(&labels);
    let m = spec.metrics(&x);
    let inside = spec.atoms.contains(&x, 1e-9, 1e-9)?;
    let worst = if inside { m.cons_violation.max(m.obj_proxy.abs()) } else { f64::INFINITY };
    Ok(Check::new("kmeans-planted-fixture", worst, 1e-10, "violation and gap at the planted clustering"))
}

/// Repeated runs give identical bodies, including a zeroth-order run under a
/// one-thread pool against the global pool.
pub fn check_determinism(iters: usize, seed: u64) -> Result<Check> {
    let spec = make_quadratic_test(6, seed);
    let mut s = RunSettings::new(Algo::MostFw, iters, seed);
    let a = run(&spec, &s).record.body_without_wall();
    let b = run(&spec, &s).record.body_without_wall();
    s.mode = OracleMode::Szo;
    let c = run(&spec, &s).record.body_without_wall();
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| crate::error::Error::InvalidParameter(e.to_string()))?;
    let d = pool.install(|| run(&spec, &s).record.body_without_wall());
    let diffs = usize::from(a != b) + usize::from(c != d);
    Ok(Check::new("run-determinism", diffs as f64, 0.0, "differing bodies"))
}

pub fn check_csv_round_trip(seed: u64) -> Result<Check> {
    let spec = make_quadratic_test(4, seed);
    let rec = run(&spec, &RunSettings::new(Algo::Shcgm, 30, seed)).record;
    let back = RunRecord::parse_csv(&rec.to_csv_string())?;
    Ok(Check::new("record-csv-round-trip", f64::from(u8::from(back != rec)), 0.0, "records differing"))
}

/// Runs every check; setup errors count as failures.
pub fn run_suite(seed: u64) -> Vec<Check> {
    let fallible: Vec<(&'static str, Result<Check>)> = vec![
        ("psd-lmo-vs-jacobi", check_psd_lmo(200, 10, seed)),
        ("l1-projection-vs-bruteforce", check_l1_projection(500, seed)),
        ("product-projection-vs-bruteforce", check_product_projection(500, seed)),
        ("penalty-grad-vs-finite-differences", check_penalty_gradient(500, seed)),
        ("penalty-grad-lipschitz", check_penalty_lipschitz(1000, seed)),
        ("cge-exact-on-quadratic", check_cge_quadratic(seed)),
        ("cge-bias-on-quartic", check_cge_quartic(seed)),
        ("trimming-zero-tau-and-invariant", check_trimming(300, seed)),
        ("kmeans-planted-fixture", check_kmeans_fixture(seed)),
        ("run-determinism", check_determinism(200, seed)),
        ("record-csv-round-trip", check_csv_round_trip(seed)),
    ];
    let mut out: Vec<Check> = fallible
        .into_iter()
        .map(|(name, r)| r.unwrap_or_else(|e| Check::new(name, f64::INFINITY, 0.0, format!("error: {e}"))))
        .collect();
    out.push(check_schedule_condition(100_000));
    out
}
