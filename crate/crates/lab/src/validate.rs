//! Acceptance checks shared by the `validate` subcommand and the acceptance
//! test target. Every tolerance is a named constant below.

use std::fmt;
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use zeno_core::distributions::{mu2_shift_direction, IntervalDistribution};
use zeno_core::fisher::{
    binary_fisher_finite_difference, chain_rule_check, fim_report, fio_eigenvalue,
    fisher_along_direction, most_probable_survival, pstar_from_eigenvalue, survival_from_moments,
    uniform_mu2_fisher,
};
use zeno_core::spin::{ghz_state, product_zero_state, variance_hpi, SpinModel, ZenoSubspace};

use crate::config::{Axis, Calibration, ExperimentConfig, ScalingConfig, NS};
use crate::ensemble::{simulate_ensemble, EnsembleSpec};
use crate::error::{LabError, Result};
use crate::estimation::{estimate_mu2_batches, BatchPlan};
use crate::experiments::{run_scaling, scaling_csv, System, FD_STEP};
use crate::ld::ld_convergence;
use crate::output::csv_body;
use crate::trajectory::LogSurvival;

pub const IDENTITY_TOL: f64 = 1e-9;
pub const IDENTITY_BUDGET: Duration = Duration::from_secs(60);
pub const MINOR_TOL: f64 = 1e-10;
pub const EIGENVECTOR_TOL: f64 = 1e-9;
pub const CHAIN_RULE_TOL: f64 = 1e-9;
pub const CHAIN_RULE_PAIRS: usize = 100;
pub const VARIANCE_TOL: f64 = 1e-9;
pub const PSTAR_REFERENCE: f64 = 0.9383;
pub const PSTAR_TOL: f64 = 1e-3;
pub const QUADRATIC_PSTAR_TOL: f64 = 2e-3;
pub const MHZ_FISHER_PER_SPIN_NS: f64 = 6.5;
pub const MHZ_CRB_SQRT_N_NS: f64 = 0.39;
pub const KHZ_FISHER_PER_SPIN_NS: f64 = 6.47e-6;
pub const CALIBRATION_TOL: f64 = 0.03;
pub const LINEAR_FIT_R2: f64 = 0.999;
pub const ORACLE_TOL: f64 = 1e-4;
pub const ENSEMBLE_RUNS: usize = 100_000;
pub const BINOMIAL_Z: f64 = 4.0;
pub const LD_SLOPE: (f64, f64) = (-0.55, -0.45);
pub const LD_M_VALUES: [usize; 3] = [100, 1_000, 10_000];
pub const LD_RUNS: usize = 4_000;
pub const MONTE_CARLO_BUDGET: Duration = Duration::from_secs(300);
pub const CRB_BATCHES: usize = 200;
pub const CRB_RUNS: usize = 10_000;
pub const SATURATION: (f64, f64) = (1.0, 1.2);

/// Grid used by the identity and rank-one suites: 10 x 10 over
/// `[5, 100]` ns in each bound, cells with `mu1 >= mu2` left out.
pub const GRID_NS: (f64, f64, usize) = (5.0, 100.0, 10);
pub const GRID_SPINS: [usize; 3] = [1, 4, 9];

#[derive(Clone, Debug, PartialEq)]
pub struct Check {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for Check {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let verdict = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "criterion {} [{}]: {} ({})", self.id, self.name, verdict, self.detail)
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs()
}

fn reference() -> ExperimentConfig {
    ExperimentConfig::reference()
}

fn grid_cells() -> Vec<(f64, f64)> {
    let axis = Axis {
        start: GRID_NS.0,
        stop: GRID_NS.1,
        points: GRID_NS.2,
    }
    .values();
    let mut cells = Vec::new();
    for &a in &axis {
        for &b in &axis {
            if a < b {
                cells.push((a * NS, b * NS));
            }
        }
    }
    cells
}

fn grid_systems() -> Result<Vec<(usize, System)>> {
    let cfg = reference();
    GRID_SPINS
        .iter()
        .map(|&n| Ok((n, System::new(&cfg.model.with_n(n))?)))
        .collect()
}

/// `P* = F_v / (F_v + m^2 ||v||^2)` for the operator eigenvalue, and the
/// same with the moment-basis eigenvalue.
pub fn identity_suite() -> Result<Check> {
    let start = Instant::now();
    let cfg = reference();
    let mut worst = 0.0_f64;
    let mut cells = 0;
    for (_, system) in grid_systems()? {
        let q = &system.survival;
        let betas = q.betas_up_to(cfg.k_moments);
        for (mu1, mu2) in grid_cells() {
            let p = IntervalDistribution::uniform(mu1, mu2)?;
            let est = most_probable_survival(&p, q, cfg.m)?;
            let fio = fio_eigenvalue(q, cfg.m, &est)?;
            worst = worst.max(rel(pstar_from_eigenvalue(fio.eigenvalue, cfg.m, fio.norm_sq), est.pstar));
            let report = fim_report(&betas, p.moments(cfg.k_moments).as_slice(), cfg.m, cfg.k_moments)?;
            let back = pstar_from_eigenvalue(report.fim_eigenvalue, cfg.m, report.eigenvector_norm_sq());
            worst = worst.max(rel(back, report.pstar));
            cells += 1;
        }
    }
    let elapsed = start.elapsed();
    Ok(Check {
        id: 1,
        name: "identity suite",
        passed: worst <= IDENTITY_TOL && elapsed < IDENTITY_BUDGET,
        detail: format!(
            "{cells} cells, worst relative deviation {worst:.2e} (tol {IDENTITY_TOL:e}), runtime {:.2} s (limit {} s)",
            elapsed.as_secs_f64(),
            IDENTITY_BUDGET.as_secs()
        ),
    })
}

/// Leading eigenvector of a symmetric positive semi-definite rank-one
/// matrix by power iteration from the all-ones vector.
fn leading_eigenvector(f: &[Vec<f64>]) -> Vec<f64> {
    let k = f.len();
    let mut v = vec![1.0; k];
    for _ in 0..4 {
        let next: Vec<f64> = (0..k).map(|i| (0..k).map(|j| f[i][j] * v[j]).sum()).collect();
        let norm = next.iter().map(|x| x * x).sum::<f64>().sqrt();
        v = next.into_iter().map(|x| x / norm).collect();
    }
    v
}

/// Rank-one structure of the `K = 8` FIM and its eigenvector.
///
/// The comparison runs in the dimensionless basis `v_i tau^i` with
/// `tau = 1 / sqrt(Delta^2 H)`, otherwise the components span dozens of
/// orders of magnitude.
pub fn rank_one_suite() -> Result<Check> {
    let cfg = reference();
    let k = cfg.k_moments;
    let (mut worst_minor, mut worst_vec) = (0.0_f64, 0.0_f64);
    for (_, system) in grid_systems()? {
        let q = &system.survival;
        let betas = q.betas_up_to(k);
        let tau = 1.0 / q.variance_hpi().sqrt();
        let expected: Vec<f64> = (0..k)
            .map(|i| betas[i] / factorial(i + 1) * tau.powi(i as i32 + 1))
            .collect();
        let norm = expected.iter().map(|x| x * x).sum::<f64>().sqrt();
        let expected: Vec<f64> = expected.iter().map(|x| x / norm).collect();
        for (mu1, mu2) in grid_cells() {
            let p = IntervalDistribution::uniform(mu1, mu2)?;
            let report = fim_report(&betas, p.moments(k).as_slice(), cfg.m, k)?;
            worst_minor = worst_minor.max(report.max_minor_ratio());
            let scaled: Vec<Vec<f64>> = (0..k)
                .map(|i| {
                    (0..k)
                        .map(|j| report.fim[i][j] * tau.powi(i as i32 + 1) * tau.powi(j as i32 + 1))
                        .collect()
                })
                .collect();
            let mut v = leading_eigenvector(&scaled);
            if v[1] * expected[1] < 0.0 {
                v.iter_mut().for_each(|x| *x = -*x);
            }
            for (got, want) in v.iter().zip(&expected) {
                let dev = if *want == 0.0 {
                    got.abs()
                } else {
                    rel(*got, *want)
                };
                worst_vec = worst_vec.max(dev);
            }
        }
    }
    Ok(Check {
        id: 2,
        name: "rank-one suite",
        passed: worst_minor <= MINOR_TOL && worst_vec <= EIGENVECTOR_TOL,
        detail: format!(
            "worst minor / max|F|^2 {worst_minor:.2e} (tol {MINOR_TOL:e}), worst eigenvector deviation {worst_vec:.2e} (tol {EIGENVECTOR_TOL:e})"
        ),
    })
}

fn factorial(n: usize) -> f64 {
    (1..=n).map(|i| i as f64).product()
}

/// Chain rule between the `mu2` direction and the `chi2` coordinate.
pub fn chain_rule_suite() -> Result<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(reference().seed);
    let mut worst = 0.0_f64;
    for _ in 0..CHAIN_RULE_PAIRS {
        let a = rng.random_range(GRID_NS.0..GRID_NS.1);
        let b = rng.random_range(GRID_NS.0..GRID_NS.1);
        let (mu1, mu2) = if a < b { (a, b) } else { (b, a) };
        worst = worst.max((chain_rule_check(mu1 * NS, mu2 * NS)? - 1.0).abs());
    }
    Ok(Check {
        id: 3,
        name: "chain rule",
        passed: worst <= CHAIN_RULE_TOL,
        detail: format!("{CHAIN_RULE_PAIRS} random pairs, worst |ratio - 1| {worst:.2e} (tol {CHAIN_RULE_TOL:e})"),
    })
}

/// `Delta^2 H = N w^2` for the product state under x couplings and `N^2 w^2`
/// for GHZ under z couplings.
pub fn variance_bounds() -> Result<Check> {
    let omega = reference().model.omega();
    let mut worst = 0.0_f64;
    for n in 1..=9 {
        let product = SpinModel::all_x(n, omega)?;
        let psi = product_zero_state(n)?;
        let v = variance_hpi(&product, &psi, &ZenoSubspace::from_state(&psi))?;
        worst = worst.max(rel(v, n as f64 * omega * omega));

        let ghz = SpinModel::all_z(n, omega)?;
        let psi = ghz_state(n)?;
        let v = variance_hpi(&ghz, &psi, &ZenoSubspace::from_state(&psi))?;
        worst = worst.max(rel(v, (n * n) as f64 * omega * omega));
    }
    Ok(Check {
        id: 4,
        name: "variance bounds",
        passed: worst <= VARIANCE_TOL,
        detail: format!("N = 1..9, worst relative deviation {worst:.2e} (tol {VARIANCE_TOL:e})"),
    })
}

/// `P*` at the kHz reference point by quadrature and by the quadratic
/// Zeno expansion.
pub fn reference_pstar() -> Result<Check> {
    let cfg = reference();
    let system = System::new(&cfg.model)?;
    let p = cfg.distribution.build()?;
    let quad = most_probable_survival(&p, &system.survival, cfg.m)?.pstar;
    let betas = system.survival.betas_up_to(2);
    let quadratic = survival_from_moments(&betas, p.moments(2).as_slice(), cfg.m, 2)?.pstar;
    let ok = (quad - PSTAR_REFERENCE).abs() <= PSTAR_TOL && (quadratic - quad).abs() <= QUADRATIC_PSTAR_TOL;
    Ok(Check {
        id: 5,
        name: "reference surface point",
        passed: ok,
        detail: format!(
            "quadrature P* = {quad:.6} (target {PSTAR_REFERENCE} +/- {PSTAR_TOL:e}), quadratic expansion P* = {quadratic:.6} (|diff| {:.2e}, tol {QUADRATIC_PSTAR_TOL:e})",
            (quadratic - quad).abs()
        ),
    })
}

fn scaling_sweep(c: Calibration) -> ExperimentConfig {
    let mut cfg = reference().with_calibration(c);
    cfg.scaling = Some(ScalingConfig {
        n_values: (1..=9).collect(),
        m_values: vec![1000, 2000, 3000, 4000, 5000],
        batches: 0,
        runs_per_batch: None,
    });
    cfg
}

/// Closed-form Fisher information per spin at both calibrations, the
/// Zeno-validity flags and linearity of the sweep.
pub fn scaling_arithmetic() -> Result<Check> {
    let cfg = reference();
    let (mu1, mu2) = cfg.distribution.uniform_bounds()?;
    let mut lines = Vec::new();
    let mut ok = true;
    for c in [Calibration::Mhz, Calibration::Khz] {
        let omega = 2.0 * std::f64::consts::PI * c.omega_hz();
        let (mut worst_f, mut worst_crb, mut valid) = (0.0_f64, 0.0_f64, true);
        let target = match c {
            Calibration::Mhz => MHZ_FISHER_PER_SPIN_NS,
            Calibration::Khz => KHZ_FISHER_PER_SPIN_NS,
        };
        for n in 1..=9 {
            let r = uniform_mu2_fisher(n as f64 * omega * omega, mu1, mu2, cfg.m)?;
            let per_spin = r.fisher * NS * NS / n as f64;
            worst_f = worst_f.max(rel(per_spin, target));
            let crb_sqrt_n = r.crb / NS * (n as f64).sqrt();
            if c == Calibration::Mhz {
                worst_crb = worst_crb.max(rel(crb_sqrt_n, MHZ_CRB_SQRT_N_NS));
            }
            valid &= r.in_zeno_regime;
        }
        let table = run_scaling(&scaling_sweep(c))?;
        let r2 = table.min_r_squared();
        ok &= worst_f <= CALIBRATION_TOL && worst_crb <= CALIBRATION_TOL && r2 >= LINEAR_FIT_R2;
        // the kHz point is the one inside the Zeno regime
        if c == Calibration::Khz {
            ok &= valid;
        }
        lines.push(format!(
            "{}: F/N off by {worst_f:.2e} from {target:e}, delta mu2 sqrt(N) off by {worst_crb:.2e}, zeno_valid = {valid}, min R^2 {r2:.6} on {}",
            c.label(),
            table.fit_column
        ));
    }
    Ok(Check {
        id: 6,
        name: "scaling arithmetic",
        passed: ok,
        detail: format!("{}; tol {CALIBRATION_TOL}, R^2 >= {LINEAR_FIT_R2}", lines.join("; ")),
    })
}

/// Closed form, moment form, functional form and the finite-difference
/// binary-outcome definition at the kHz reference point.
pub fn fisher_oracles() -> Result<Check> {
    let cfg = reference();
    let system = System::new(&cfg.model)?;
    let q = &system.survival;
    let (mu1, mu2) = cfg.distribution.uniform_bounds()?;
    let p = cfg.distribution.build()?;
    let closed = uniform_mu2_fisher(q.variance_hpi(), mu1, mu2, cfg.m)?.fisher;
    let dir = fisher_along_direction(&p, &mu2_shift_direction(mu1, mu2)?, q, &q.betas_up_to(cfg.k_moments), cfg.m)?;
    let fd = binary_fisher_finite_difference(
        |t| IntervalDistribution::uniform(mu1, t),
        q,
        cfg.m,
        mu2,
        FD_STEP * (mu2 - mu1),
    )?;
    let values = [
        ("closed", closed),
        ("moment", dir.moment_form),
        ("functional", dir.functional),
        ("finite-difference", fd),
    ];
    let mut worst = 0.0_f64;
    for (i, a) in values.iter().enumerate() {
        for b in &values[i + 1..] {
            worst = worst.max(rel(a.1, b.1));
        }
    }
    let listing: Vec<String> = values
        .iter()
        .map(|(name, v)| format!("{name} {:.6e}", v * NS * NS))
        .collect();
    Ok(Check {
        id: 7,
        name: "fisher oracle equivalence",
        passed: worst <= ORACLE_TOL,
        detail: format!(
            "{} ns^-2, worst pairwise relative gap {worst:.2e} (tol {ORACLE_TOL:e})",
            listing.join(", ")
        ),
    })
}

/// Runs `f` on a dedicated single-thread pool.
fn single_threaded<T: Send>(f: impl FnOnce() -> T + Send) -> Result<T> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .map_err(|e| LabError::Resource(e.to_string()))?;
    Ok(pool.install(f))
}

/// Ensemble against `P*` and LD concentration, timed on one thread.
pub fn monte_carlo_statistics() -> Result<Check> {
    let cfg = reference();
    let start = Instant::now();
    let (ens, pstar, ld) = single_threaded(|| -> Result<_> {
        let system = System::new(&cfg.model)?;
        let p = cfg.distribution.build()?;
        let engine = system.engine(cfg.mode, &p)?;
        let ens = simulate_ensemble(
            &engine,
            &EnsembleSpec {
                distribution: &p,
                m: cfg.m,
                runs: ENSEMBLE_RUNS,
                seed: cfg.seed,
                first_run: 0,
                sample_budget: cfg.sample_budget,
            },
        )?;
        let pstar = most_probable_survival(&p, &system.survival, cfg.m)?.pstar;
        let log_q = LogSurvival::new(system.survival.clone(), p.support());
        let ld = ld_convergence(&log_q, &p, &LD_M_VALUES, LD_RUNS, cfg.seed)?;
        Ok((ens, pstar, ld))
    })??;
    let elapsed = start.elapsed();
    let binomial_se = (pstar * (1.0 - pstar) / ENSEMBLE_RUNS as f64).sqrt();
    let z = (ens.p_hat - pstar) / binomial_se;
    let slope = ld.slope.unwrap_or(f64::NAN);
    let passed = z.abs() <= BINOMIAL_Z
        && slope >= LD_SLOPE.0
        && slope <= LD_SLOPE.1
        && elapsed < MONTE_CARLO_BUDGET;
    Ok(Check {
        id: 8,
        name: "monte carlo statistics",
        passed,
        detail: format!(
            "P_hat = {:.5} vs P* = {pstar:.5} (z = {z:.2}, limit {BINOMIAL_Z}), LD std-dev slope {slope:.4} (range [{}, {}]), LD worst mean z {:.2}, runtime {:.1} s single-threaded (limit {} s)",
            ens.p_hat,
            LD_SLOPE.0,
            LD_SLOPE.1,
            ld.worst_z(),
            elapsed.as_secs_f64(),
            MONTE_CARLO_BUDGET.as_secs()
        ),
    })
}

/// Sample variance of the batch MLE against `1 / (R F)`.
pub fn crb_saturation() -> Result<Check> {
    let cfg = reference();
    let start = Instant::now();
    let system = System::new(&cfg.model)?;
    let p = cfg.distribution.build()?;
    let engine = system.engine(cfg.mode, &p)?;
    let (mu1, mu2) = cfg.distribution.uniform_bounds()?;
    let plan = BatchPlan {
        batches: CRB_BATCHES,
        runs_per_batch: CRB_RUNS,
        seed: cfg.seed,
        sample_budget: cfg.sample_budget,
    };
    let r = estimate_mu2_batches(&engine, &system.survival, mu1, mu2, cfg.m, &plan)?;
    let ratio = r.saturation_ratio;
    Ok(Check {
        id: 9,
        name: "crb saturation",
        passed: r.failed_batches == 0 && ratio >= SATURATION.0 && ratio <= SATURATION.1,
        detail: format!(
            "{} batches x {} runs, variance / CRB = {ratio:.4} +/- {:.4} (range [{}, {}]), mean mu2_hat = {:.4} ns +/- {:.4}, failed batches {}, seed {}, runtime {:.1} s",
            CRB_BATCHES,
            CRB_RUNS,
            r.ratio_std_error(),
            SATURATION.0,
            SATURATION.1,
            r.mean / NS,
            r.mean_std_error() / NS,
            r.failed_batches,
            cfg.seed,
            start.elapsed().as_secs_f64()
        ),
    })
}

/// Configuration for the determinism check: a reduced sweep with a Monte
/// Carlo column.
pub fn determinism_config() -> ExperimentConfig {
    let mut cfg = reference();
    cfg.scaling = Some(ScalingConfig {
        n_values: vec![1, 5, 9],
        m_values: vec![1000, 3000, 5000],
        batches: 4,
        runs_per_batch: Some(500),
    });
    cfg
}

/// Two scaling runs, on one and on two worker threads, give identical CSV
/// bodies.
pub fn determinism() -> Result<Check> {
    let cfg = determinism_config();
    let render = |threads: usize| -> Result<Vec<u8>> {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .map_err(|e| LabError::Resource(e.to_string()))?;
        let table = pool.install(|| run_scaling(&cfg))?;
        scaling_csv(&cfg, &table).to_bytes()
    };
    let first = render(1)?;
    let second = render(2)?;
    let same = csv_body(&first) == csv_body(&second);
    let has_monte_carlo = String::from_utf8_lossy(csv_body(&first))
        .lines()
        .skip(1)
        .any(|l| l.split(',').nth(4).is_some_and(|v| v != "NaN"));
    Ok(Check {
        id: 10,
        name: "determinism",
        passed: same && has_monte_carlo,
        detail: format!(
            "{} body bytes, identical = {same}, empirical column populated = {has_monte_carlo}",
            csv_body(&first).len()
        ),
    })
}

/// Checks that finish in seconds.
pub fn quick_checks() -> Vec<fn() -> Result<Check>> {
    vec![
        identity_suite,
        rank_one_suite,
        chain_rule_suite,
        variance_bounds,
        reference_pstar,
        scaling_arithmetic,
        fisher_oracles,
        determinism,
    ]
}

/// Monte Carlo checks at full size.
pub fn heavy_checks() -> Vec<fn() -> Result<Check>> {
    vec![monte_carlo_statistics, crb_saturation]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grid_has_lower_triangle_only() {
        let cells = grid_cells();
        assert_eq!(cells.len(), 45);
        assert!(cells.iter().all(|(a, b)| a < b));
    }

    #[test]
    fn power_iteration_on_rank_one() {
        let v = [3.0, -4.0, 0.0];
        let f: Vec<Vec<f64>> = v.iter().map(|a| v.iter().map(|b| 2.0 * a * b).collect()).collect();
        let e = leading_eigenvector(&f);
        assert!((e[0].abs() - 0.6).abs() < 1e-15 && (e[1].abs() - 0.8).abs() < 1e-15);
        assert_eq!(e[2], 0.0);
    }

    #[test]
    fn report_line_format() {
        let c = Check {
            id: 3,
            name: "chain rule",
            passed: false,
            detail: "x".into(),
        };
        assert_eq!(c.to_string(), "criterion 3 [chain rule]: FAIL (x)");
    }
}
