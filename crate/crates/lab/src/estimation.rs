//! Maximum-likelihood estimation of the upper bound `mu2` of a uniform
//! waiting-time density from the registered survival fraction.

use zeno_core::distributions::{mu2_shift_direction, IntervalDistribution};
use zeno_core::fisher::{fisher_along_direction, most_probable_survival};
use zeno_core::SurvivalModel;

use crate::ensemble::{simulate_ensemble, EnsembleSpec};
use crate::error::{LabError, Result};
use crate::stats::mean_and_variance;
use crate::trajectory::TrajectoryEngine;

/// Bisection stops once the bracket is narrower than this, in seconds.
pub const MU2_TOLERANCE: f64 = 1e-12;
const MONOTONICITY_PROBES: usize = 17;

/// Inverts `mu2 -> P*(uniform(mu1, mu2))` on a bracket where it is
/// strictly decreasing.
#[derive(Clone, Debug)]
pub struct Mu2Estimator<'a> {
    q: &'a SurvivalModel,
    mu1: f64,
    m: usize,
    lo: f64,
    hi: f64,
    p_lo: f64,
    p_hi: f64,
}

impl<'a> Mu2Estimator<'a> {
    /// Bracket `[mu1 + 1e-3 (guess - mu1), 3 guess]`.
    pub fn new(q: &'a SurvivalModel, mu1: f64, mu2_guess: f64, m: usize) -> Result<Self> {
        if !(mu2_guess > mu1) {
            return Err(LabError::Argument(format!(
                "the guess for mu2 ({mu2_guess:e}) must exceed mu1 ({mu1:e})"
            )));
        }
        Self::with_bracket(q, mu1, mu1 + 1e-3 * (mu2_guess - mu1), 3.0 * mu2_guess, m)
    }

    pub fn with_bracket(q: &'a SurvivalModel, mu1: f64, lo: f64, hi: f64, m: usize) -> Result<Self> {
        if !(lo > mu1 && hi > lo) {
            return Err(LabError::Argument(format!(
                "invalid bracket [{lo:e}, {hi:e}] for mu1 = {mu1:e}"
            )));
        }
        let mut est = Self {
            q,
            mu1,
            m,
            lo,
            hi,
            p_lo: 0.0,
            p_hi: 0.0,
        };
        let probes = (0..MONOTONICITY_PROBES)
            .map(|i| est.pstar(lo + (hi - lo) * i as f64 / (MONOTONICITY_PROBES - 1) as f64))
            .collect::<Result<Vec<f64>>>()
            .map_err(|e| LabError::Argument(format!("P* cannot be evaluated on the bracket: {e}")))?;
        if probes.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(LabError::Argument(
                "P* is not strictly decreasing in mu2 on the bracket".into(),
            ));
        }
        est.p_lo = probes[0];
        est.p_hi = probes[MONOTONICITY_PROBES - 1];
        Ok(est)
    }

    /// Quadrature `P*` for the candidate `mu2`.
    pub fn pstar(&self, mu2: f64) -> Result<f64> {
        let p = IntervalDistribution::uniform(self.mu1, mu2)?;
        Ok(most_probable_survival(&p, self.q, self.m)?.pstar)
    }

    pub fn bracket(&self) -> (f64, f64) {
        (self.lo, self.hi)
    }

    /// Solves `P*(mu2) = p_hat` by bisection.
    pub fn estimate(&self, p_hat: f64) -> Result<f64> {
        if !(p_hat <= self.p_lo && p_hat >= self.p_hi) {
            return Err(LabError::Estimation(format!(
                "survival fraction {p_hat} outside the attainable range [{}, {}]",
                self.p_hi, self.p_lo
            )));
        }
        let (mut lo, mut hi) = (self.lo, self.hi);
        while hi - lo > MU2_TOLERANCE {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.pstar(mid)? > p_hat {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }
}

/// One-shot MLE with the default bracket around `mu2_guess`.
pub fn mle_mu2(p_hat: f64, q: &SurvivalModel, mu1: f64, mu2_guess: f64, m: usize) -> Result<f64> {
    Mu2Estimator::new(q, mu1, mu2_guess, m)?.estimate(p_hat)
}

#[derive(Clone, Copy, Debug)]
pub struct BatchPlan {
    pub batches: usize,
    pub runs_per_batch: usize,
    pub seed: u64,
    pub sample_budget: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EstimationResult {
    pub mu2_true: f64,
    pub runs_per_batch: usize,
    /// `mu2_hat` per successful batch, seconds.
    pub estimates: Vec<f64>,
    /// Batches whose survival fraction could not be inverted.
    pub failed_batches: usize,
    pub mean: f64,
    pub sample_variance: f64,
    /// `sample_variance * sqrt(2 / (B - 1))`.
    pub variance_std_error: f64,
    /// Per-run Fisher information for `mu2`, s^-2.
    pub fisher: f64,
    /// `1 / (R F)`, s^2.
    pub crb: f64,
    /// `sample_variance / crb`.
    pub saturation_ratio: f64,
}

impl EstimationResult {
    /// `1 / (R var)`, s^-2.
    pub fn empirical_fisher(&self) -> f64 {
        1.0 / (self.runs_per_batch as f64 * self.sample_variance)
    }

    pub fn mean_std_error(&self) -> f64 {
        (self.sample_variance / self.estimates.len() as f64).sqrt()
    }

    /// Statistical error of the saturation ratio.
    pub fn ratio_std_error(&self) -> f64 {
        self.variance_std_error / self.crb
    }
}

/// Runs `plan.batches` ensembles of `plan.runs_per_batch` runs at
/// `uniform(mu1, mu2_true)`, inverts each survival fraction, and compares
/// the spread of the estimates with the Cramér-Rao bound.
pub fn estimate_mu2_batches(
    engine: &TrajectoryEngine,
    q: &SurvivalModel,
    mu1: f64,
    mu2_true: f64,
    m: usize,
    plan: &BatchPlan,
) -> Result<EstimationResult> {
    if plan.batches < 2 {
        return Err(LabError::Argument("at least two batches are needed for a variance".into()));
    }
    let p = IntervalDistribution::uniform(mu1, mu2_true)?;
    let direction = mu2_shift_direction(mu1, mu2_true)?;
    let fisher = fisher_along_direction(&p, &direction, q, q.betas(), m)?.functional;
    let estimator = Mu2Estimator::new(q, mu1, mu2_true, m)?;

    let mut estimates = Vec::with_capacity(plan.batches);
    let mut failed_batches = 0;
    for b in 0..plan.batches {
        let spec = EnsembleSpec {
            distribution: &p,
            m,
            runs: plan.runs_per_batch,
            seed: plan.seed,
            first_run: (b * plan.runs_per_batch) as u64,
            sample_budget: plan.sample_budget,
        };
        let ens = simulate_ensemble(engine, &spec)?;
        match estimator.estimate(ens.p_hat) {
            Ok(mu2) => estimates.push(mu2),
            Err(LabError::Estimation(_)) => failed_batches += 1,
            Err(e) => return Err(e),
        }
    }
    if estimates.len() < 2 {
        return Err(LabError::Estimation(format!(
            "only {} of {} batches produced an estimate",
            estimates.len(),
            plan.batches
        )));
    }
    let (mean, sample_variance) = mean_and_variance(&estimates);
    let crb = 1.0 / (plan.runs_per_batch as f64 * fisher);
    Ok(EstimationResult {
        mu2_true,
        runs_per_batch: plan.runs_per_batch,
        variance_std_error: sample_variance * (2.0 / (estimates.len() as f64 - 1.0)).sqrt(),
        estimates,
        failed_batches,
        mean,
        sample_variance,
        fisher,
        crb,
        saturation_ratio: sample_variance / crb,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensemble::DEFAULT_SAMPLE_BUDGET;
    use crate::trajectory::LogSurvival;
    use zeno_core::spin::{product_zero_state, ZenoSubspace};
    use zeno_core::SpinModel;

    const NS: f64 = 1e-9;

    fn survival(n: usize, omega: f64) -> SurvivalModel {
        let model = SpinModel::all_x(n, omega).unwrap();
        SurvivalModel::new(&model, &ZenoSubspace::from_state(&product_zero_state(n).unwrap())).unwrap()
    }

    #[test]
    fn exact_inversion() {
        let q = survival(9, 2.0 * std::f64::consts::PI * 5e3);
        let est = Mu2Estimator::new(&q, 10.0 * NS, 60.0 * NS, 5000).unwrap();
        for &truth in &[25.0 * NS, 60.0 * NS, 140.0 * NS] {
            let p = est.pstar(truth).unwrap();
            let got = est.estimate(p).unwrap();
            assert!((got - truth).abs() <= MU2_TOLERANCE, "{got:e} vs {truth:e}");
        }
    }

    #[test]
    fn unattainable_fractions() {
        let q = survival(9, 2.0 * std::f64::consts::PI * 5e3);
        let r = mle_mu2(1.0, &q, 10.0 * NS, 60.0 * NS, 5000);
        assert!(matches!(r, Err(LabError::Estimation(_))));
        let r = mle_mu2(0.0, &q, 10.0 * NS, 60.0 * NS, 5000);
        assert!(matches!(r, Err(LabError::Estimation(_))));
    }

    #[test]
    fn bracket_outside_the_window_is_rejected() {
        // q vanishes at 50 ns for 5 MHz, far outside the Zeno regime
        let q = survival(9, 2.0 * std::f64::consts::PI * 5e6);
        let r = Mu2Estimator::new(&q, 10.0 * NS, 60.0 * NS, 5000);
        assert!(matches!(r, Err(LabError::Argument(_))));
        assert!(Mu2Estimator::new(&q, 10.0 * NS, 5.0 * NS, 5000).is_err());
    }

    #[test]
    fn small_batch_experiment_is_consistent() {
        let q = survival(9, 2.0 * std::f64::consts::PI * 5e3);
        let (mu1, mu2) = (10.0 * NS, 60.0 * NS);
        let p = IntervalDistribution::uniform(mu1, mu2).unwrap();
        let engine = TrajectoryEngine::Product(LogSurvival::new(q.clone(), p.support()));
        let plan = BatchPlan {
            batches: 30,
            runs_per_batch: 2000,
            seed: 3,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
        };
        let r = estimate_mu2_batches(&engine, &q, mu1, mu2, 1000, &plan).unwrap();
        assert_eq!(r.failed_batches + r.estimates.len(), 30);
        let sd = r.sample_variance.sqrt();
        assert!((r.mean - mu2).abs() < 4.0 * sd / (r.estimates.len() as f64).sqrt() + 1e-9);
        assert!(r.saturation_ratio > 0.4 && r.saturation_ratio < 2.0, "{}", r.saturation_ratio);
    }
}
