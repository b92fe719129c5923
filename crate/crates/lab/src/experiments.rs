//! Experiment runners behind the CLI subcommands.

use rayon::prelude::*;
use zeno_core::distributions::IntervalDistribution;
use zeno_core::fisher::{
    binary_fisher_finite_difference, fim_report, most_probable_survival, uniform_mu2_fisher,
    zeno_confinement, ZENO_THRESHOLD,
};
use zeno_core::linalg::{SpectralDecomposition, StateVector};
use zeno_core::spin::ZenoSubspace;
use zeno_core::{SurvivalFunction, SurvivalModel, ZenoError};

use crate::config::{ExperimentConfig, ModelConfig, NS};
use crate::ensemble::{simulate_ensemble, EnsembleSpec, TrajectoryEnsemble};
use crate::error::{LabError, Result};
use crate::estimation::{estimate_mu2_batches, BatchPlan, EstimationResult};
use crate::ld::{ld_convergence, LdTable};
use crate::output::{num, CsvTable};
use crate::rng::derive_seed;
use crate::stats::{linear_fit, LinearFit};
use crate::trajectory::{LogSurvival, SequentialPropagator, TrajectoryEngine, TrajectoryMode};

/// Relative step of the finite-difference Fisher oracle, in units of
/// `mu2 - mu1`.
pub const FD_STEP: f64 = 1e-6;

/// Model objects for one spin configuration.
#[derive(Clone, Debug)]
pub struct System {
    pub decomposition: SpectralDecomposition,
    pub psi0: StateVector,
    pub subspace: ZenoSubspace,
    pub survival: SurvivalModel,
}

impl System {
    pub fn new(model: &ModelConfig) -> Result<Self> {
        let spin = model.build()?;
        let psi0 = model.initial_state()?;
        let subspace = ZenoSubspace::from_state(&psi0);
        let decomposition = spin.decompose()?;
        let survival = SurvivalModel::from_decomposition(&decomposition, &subspace)?;
        Ok(Self {
            decomposition,
            psi0,
            subspace,
            survival,
        })
    }

    /// Trajectory engine for sampling from `p`.
    pub fn engine(&self, mode: TrajectoryMode, p: &IntervalDistribution) -> Result<TrajectoryEngine> {
        Ok(match mode {
            TrajectoryMode::Product => {
                TrajectoryEngine::Product(LogSurvival::new(self.survival.clone(), p.support()))
            }
            TrajectoryMode::Sequential => TrajectoryEngine::Sequential(SequentialPropagator::new(
                &self.decomposition,
                &self.subspace,
                &self.psi0,
            )?),
        })
    }
}

/// Ensemble at the configured point.
pub fn run_ensemble(cfg: &ExperimentConfig) -> Result<TrajectoryEnsemble> {
    let system = System::new(&cfg.model)?;
    let p = cfg.distribution.build()?;
    let engine = system.engine(cfg.mode, &p)?;
    simulate_ensemble(
        &engine,
        &EnsembleSpec {
            distribution: &p,
            m: cfg.m,
            runs: cfg.runs,
            seed: cfg.seed,
            first_run: 0,
            sample_budget: cfg.sample_budget,
        },
    )
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CellStatus {
    Ok,
    /// `mu1 >= mu2`.
    Skipped,
    /// The support reaches beyond the window where `q > 0` is guaranteed.
    OutsideWindow,
}

impl CellStatus {
    pub fn label(self) -> &'static str {
        match self {
            Self::Ok => "ok",
            Self::Skipped => "skipped_mu1_ge_mu2",
            Self::OutsideWindow => "outside_window",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurfaceRow {
    pub mu1_ns: f64,
    pub mu2_ns: f64,
    pub pstar: f64,
    pub one_minus_pstar: f64,
    /// `F~_v / ||v||^2 = m^2 P*/(1-P*)` from the truncated moment series.
    pub fim_eigenvalue_normalized: f64,
    pub zeno_valid: bool,
    pub status: CellStatus,
}

/// `P*` and the normalised FIM eigenvalue over a `(mu1, mu2)` grid.
pub fn run_surface(cfg: &ExperimentConfig) -> Result<Vec<SurfaceRow>> {
    let grid = cfg
        .surface
        .as_ref()
        .ok_or_else(|| LabError::Config("the surface experiment needs a `surface` section".into()))?;
    let system = System::new(&cfg.model)?;
    let q = &system.survival;
    let betas = q.betas_up_to(cfg.k_moments);
    let cells: Vec<(f64, f64)> = grid
        .mu1_ns
        .values()
        .into_iter()
        .flat_map(|a| grid.mu2_ns.values().into_iter().map(move |b| (a, b)))
        .collect();
    cells
        .par_iter()
        .map(|&(mu1_ns, mu2_ns)| {
            let blank = SurfaceRow {
                mu1_ns,
                mu2_ns,
                pstar: f64::NAN,
                one_minus_pstar: f64::NAN,
                fim_eigenvalue_normalized: f64::NAN,
                zeno_valid: false,
                status: CellStatus::Skipped,
            };
            if mu1_ns >= mu2_ns {
                return Ok(blank);
            }
            if mu2_ns * NS > q.mu_max() {
                return Ok(SurfaceRow {
                    status: CellStatus::OutsideWindow,
                    ..blank
                });
            }
            let p = IntervalDistribution::uniform(mu1_ns * NS, mu2_ns * NS)?;
            let est = most_probable_survival(&p, q, cfg.m)?;
            let zeno = zeno_confinement(&p, q, cfg.m, ZENO_THRESHOLD)?;
            let report = fim_report(&betas, p.moments(cfg.k_moments).as_slice(), cfg.m, cfg.k_moments)?;
            Ok(SurfaceRow {
                pstar: est.pstar,
                one_minus_pstar: est.one_minus,
                fim_eigenvalue_normalized: report.normalized_eigenvalue(),
                zeno_valid: zeno.in_regime,
                status: CellStatus::Ok,
                ..blank
            })
        })
        .collect()
}

pub fn surface_csv(cfg: &ExperimentConfig, rows: &[SurfaceRow]) -> CsvTable {
    let mut t = CsvTable::for_config(
        cfg,
        "surface",
        &[
            "mu1_ns",
            "mu2_ns",
            "pstar",
            "one_minus_pstar",
            "fim_eigenvalue_normalized",
            "zeno_valid",
            "status",
        ],
    );
    t.note("m", cfg.m.to_string());
    t.note("k_moments", cfg.k_moments.to_string());
    for r in rows {
        t.push(vec![
            num(r.mu1_ns),
            num(r.mu2_ns),
            num(r.pstar),
            num(r.one_minus_pstar),
            num(r.fim_eigenvalue_normalized),
            r.zeno_valid.to_string(),
            r.status.label().to_string(),
        ]);
    }
    t
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScalingRow {
    pub n: usize,
    pub m: usize,
    /// Zeno-regime closed form, ns^-2.
    pub fisher_closed_form: f64,
    /// Binary-outcome definition with a central difference in `mu2`, ns^-2.
    /// `NaN` when the density reaches past the survival window.
    pub fisher_finite_difference: f64,
    /// `1 / (R var(mu2_hat))` from Monte Carlo batches, ns^-2; `NaN` when
    /// not requested or not attainable.
    pub fisher_empirical: f64,
    pub empirical_batches: usize,
    /// `m Delta^2 H chi2` below the regime threshold.
    pub zeno_valid: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ScalingTable {
    pub rows: Vec<ScalingRow>,
    /// `F` against `m` for each `N`.
    pub fits_in_m: Vec<(usize, LinearFit)>,
    /// `F` against `N` for each `m`.
    pub fits_in_n: Vec<(usize, LinearFit)>,
    /// Which column the fits use.
    pub fit_column: &'static str,
}

impl ScalingTable {
    pub fn min_r_squared(&self) -> f64 {
        self.fits_in_m
            .iter()
            .chain(&self.fits_in_n)
            .map(|(_, f)| f.r_squared)
            .fold(f64::INFINITY, f64::min)
    }
}

/// Fisher information for `mu2` over an `(N, m)` sweep.
pub fn run_scaling(cfg: &ExperimentConfig) -> Result<ScalingTable> {
    let sweep = cfg
        .scaling
        .as_ref()
        .ok_or_else(|| LabError::Config("the scaling experiment needs a `scaling` section".into()))?;
    let (mu1, mu2) = cfg.distribution.uniform_bounds()?;
    let p = cfg.distribution.build()?;
    let runs_per_batch = sweep.runs_per_batch.unwrap_or(cfg.runs);
    let mut rows = Vec::new();
    for (ni, &n) in sweep.n_values.iter().enumerate() {
        let system = System::new(&cfg.model.with_n(n))?;
        let q = &system.survival;
        let inside = mu2 <= q.mu_max();
        let engine = system.engine(cfg.mode, &p)?;
        for (mi, &m) in sweep.m_values.iter().enumerate() {
            let closed = uniform_mu2_fisher(q.variance_hpi(), mu1, mu2, m)?;
            let fd = if inside {
                binary_fisher_finite_difference(
                    |theta| IntervalDistribution::uniform(mu1, theta),
                    q,
                    m,
                    mu2,
                    FD_STEP * (mu2 - mu1),
                )?
            } else {
                f64::NAN
            };
            let (empirical, batches) = if sweep.batches >= 2 && inside {
                let plan = BatchPlan {
                    batches: sweep.batches,
                    runs_per_batch,
                    seed: derive_seed(cfg.seed, "scaling", (ni * sweep.m_values.len() + mi) as u64),
                    sample_budget: cfg.sample_budget,
                };
                match estimate_mu2_batches(&engine, q, mu1, mu2, m, &plan) {
                    Ok(r) => (r.empirical_fisher(), r.estimates.len()),
                    Err(LabError::Estimation(_) | LabError::Argument(_)) => (f64::NAN, 0),
                    Err(e) => return Err(e),
                }
            } else {
                (f64::NAN, 0)
            };
            rows.push(ScalingRow {
                n,
                m,
                fisher_closed_form: closed.fisher * NS * NS,
                fisher_finite_difference: fd * NS * NS,
                fisher_empirical: empirical * NS * NS,
                empirical_batches: batches,
                zeno_valid: closed.in_zeno_regime,
            });
        }
    }
    let use_fd = rows.iter().all(|r| r.fisher_finite_difference.is_finite());
    let value = |r: &ScalingRow| {
        if use_fd {
            r.fisher_finite_difference
        } else {
            r.fisher_closed_form
        }
    };
    let fit_over = |key: &dyn Fn(&ScalingRow) -> usize, x: &dyn Fn(&ScalingRow) -> usize, keys: &[usize]| {
        keys.iter()
            .filter_map(|&k| {
                let group: Vec<&ScalingRow> = rows.iter().filter(|r| key(r) == k).collect();
                let xs: Vec<f64> = group.iter().map(|r| x(r) as f64).collect();
                let ys: Vec<f64> = group.iter().map(|r| value(r)).collect();
                linear_fit(&xs, &ys).map(|f| (k, f))
            })
            .collect::<Vec<_>>()
    };
    let fits_in_m = fit_over(&|r| r.n, &|r| r.m, &sweep.n_values);
    let fits_in_n = fit_over(&|r| r.m, &|r| r.n, &sweep.m_values);
    Ok(ScalingTable {
        rows,
        fits_in_m,
        fits_in_n,
        fit_column: if use_fd {
            "fisher_finite_difference"
        } else {
            "fisher_closed_form"
        },
    })
}

pub fn scaling_csv(cfg: &ExperimentConfig, table: &ScalingTable) -> CsvTable {
    let mut t = CsvTable::for_config(
        cfg,
        "scaling",
        &[
            "n",
            "m",
            "fisher_closed_form",
            "fisher_finite_difference",
            "fisher_empirical",
            "empirical_batches",
            "zeno_valid",
            "fit_slope_m",
            "fit_r2_m",
            "fit_slope_n",
            "fit_r2_n",
        ],
    );
    t.note("units", "fisher columns in ns^-2; slopes per measurement and per spin");
    t.note("fit_column", table.fit_column);
    let lookup = |fits: &[(usize, LinearFit)], k: usize| {
        fits.iter()
            .find(|(key, _)| *key == k)
            .map_or((f64::NAN, f64::NAN), |(_, f)| (f.slope, f.r_squared))
    };
    for r in &table.rows {
        let (sm, rm) = lookup(&table.fits_in_m, r.n);
        let (sn, rn) = lookup(&table.fits_in_n, r.m);
        t.push(vec![
            r.n.to_string(),
            r.m.to_string(),
            num(r.fisher_closed_form),
            num(r.fisher_finite_difference),
            num(r.fisher_empirical),
            r.empirical_batches.to_string(),
            r.zeno_valid.to_string(),
            num(sm),
            num(rm),
            num(sn),
            num(rn),
        ]);
    }
    t
}

/// Batch estimation of `mu2` at the configured point.
pub fn run_crb(cfg: &ExperimentConfig) -> Result<EstimationResult> {
    let batches = cfg
        .estimation
        .as_ref()
        .ok_or_else(|| LabError::Config("the crb experiment needs an `estimation` section".into()))?
        .batches;
    let (mu1, mu2) = cfg.distribution.uniform_bounds()?;
    let system = System::new(&cfg.model)?;
    let p = cfg.distribution.build()?;
    let engine = system.engine(cfg.mode, &p)?;
    let plan = BatchPlan {
        batches,
        runs_per_batch: cfg.runs,
        seed: cfg.seed,
        sample_budget: cfg.sample_budget,
    };
    estimate_mu2_batches(&engine, &system.survival, mu1, mu2, cfg.m, &plan)
}

pub fn crb_csv(cfg: &ExperimentConfig, r: &EstimationResult) -> CsvTable {
    let mut t = CsvTable::for_config(cfg, "crb", &["batch", "mu2_hat_ns"]);
    t.note("mu2_true_ns", num(r.mu2_true / NS));
    t.note("runs_per_batch", r.runs_per_batch.to_string());
    t.note("failed_batches", r.failed_batches.to_string());
    t.note("mean_ns", num(r.mean / NS));
    t.note("sample_variance_ns2", num(r.sample_variance / (NS * NS)));
    t.note("crb_variance_ns2", num(r.crb / (NS * NS)));
    t.note("saturation_ratio", num(r.saturation_ratio));
    t.note("saturation_ratio_std_error", num(r.ratio_std_error()));
    t.note("fisher_per_run_ns-2", num(r.fisher * NS * NS));
    for (i, mu) in r.estimates.iter().enumerate() {
        t.push(vec![i.to_string(), num(mu / NS)]);
    }
    t
}

/// Large-deviation convergence at the configured density.
pub fn run_ld(cfg: &ExperimentConfig) -> Result<LdTable> {
    let ms = &cfg
        .ld
        .as_ref()
        .ok_or_else(|| LabError::Config("the ld experiment needs an `ld` section".into()))?
        .m_values;
    let system = System::new(&cfg.model)?;
    let p = cfg.distribution.build()?;
    if p.support().1 > system.survival.mu_max() {
        return Err(ZenoError::Argument("the density reaches past the survival window".into()).into());
    }
    ld_convergence(&LogSurvival::new(system.survival, p.support()), &p, ms, cfg.runs, cfg.seed)
}

pub fn ld_csv(cfg: &ExperimentConfig, table: &LdTable) -> CsvTable {
    let mut t = CsvTable::for_config(cfg, "ld", &["m", "mean", "std_dev", "std_error", "target"]);
    t.note("runs", cfg.runs.to_string());
    t.note("std_dev_slope", table.slope.map_or("NaN".to_string(), num));
    for r in &table.rows {
        t.push(vec![
            r.m.to_string(),
            num(r.mean),
            num(r.std_dev),
            num(r.std_error),
            num(table.target),
        ]);
    }
    t
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{Axis, Calibration, ScalingConfig, SurfaceConfig};

    fn small() -> ExperimentConfig {
        let mut cfg = ExperimentConfig::reference();
        cfg.model.n = 3;
        cfg.runs = 300;
        cfg
    }

    #[test]
    fn surface_flags_and_trends() {
        let mut cfg = small();
        cfg.surface = Some(SurfaceConfig {
            mu1_ns: Axis { start: 0.0, stop: 40.0, points: 5 },
            mu2_ns: Axis { start: 5.0, stop: 60.0, points: 6 },
        });
        let rows = run_surface(&cfg).unwrap();
        assert_eq!(rows.len(), 30);
        for r in &rows {
            assert_eq!(r.status == CellStatus::Skipped, r.mu1_ns >= r.mu2_ns);
        }
        // along each row P* does not increase with mu2
        for a in 0..5 {
            let row: Vec<&SurfaceRow> = rows[a * 6..(a + 1) * 6].iter().filter(|r| r.status == CellStatus::Ok).collect();
            for w in row.windows(2) {
                assert!(w[1].pstar <= w[0].pstar);
            }
        }
        let csv = surface_csv(&cfg, &rows).to_bytes().unwrap();
        assert!(String::from_utf8(csv).unwrap().contains("skipped_mu1_ge_mu2"));
    }

    #[test]
    fn surface_at_mhz_is_outside_the_window() {
        let mut cfg = small().with_calibration(Calibration::Mhz);
        cfg.surface = Some(SurfaceConfig {
            mu1_ns: Axis { start: 10.0, stop: 10.0, points: 1 },
            mu2_ns: Axis { start: 60.0, stop: 60.0, points: 1 },
        });
        let rows = run_surface(&cfg).unwrap();
        assert_eq!(rows[0].status, CellStatus::OutsideWindow);
    }

    #[test]
    fn scaling_without_monte_carlo() {
        let mut cfg = small();
        cfg.scaling = Some(ScalingConfig {
            n_values: vec![1, 2, 3],
            m_values: vec![1000, 3000, 5000],
            batches: 0,
            runs_per_batch: None,
        });
        let table = run_scaling(&cfg).unwrap();
        assert_eq!(table.rows.len(), 9);
        assert_eq!(table.fit_column, "fisher_finite_difference");
        assert!(table.rows.iter().all(|r| r.fisher_empirical.is_nan() && r.zeno_valid));
        assert!(table.min_r_squared() > 0.999);
        // closed form is linear in N at fixed m
        let f1 = table.rows[0].fisher_closed_form;
        let f3 = table.rows[6].fisher_closed_form;
        assert!((f3 / f1 - 3.0).abs() < 1e-12);
    }

    #[test]
    fn missing_sections_are_config_errors() {
        let mut cfg = small();
        cfg.surface = None;
        cfg.scaling = None;
        assert!(matches!(run_surface(&cfg), Err(LabError::Config(_))));
        assert!(matches!(run_scaling(&cfg), Err(LabError::Config(_))));
    }

    #[test]
    fn ensemble_modes_agree_at_small_n() {
        let mut cfg = small();
        cfg.m = 50;
        cfg.runs = 200;
        let product = run_ensemble(&cfg).unwrap();
        cfg.mode = TrajectoryMode::Sequential;
        let sequential = run_ensemble(&cfg).unwrap();
        for (a, b) in product.log_probabilities.iter().zip(&sequential.log_probabilities) {
            assert!((a.exp() - b.exp()).abs() <= 1e-12);
        }
    }
}
