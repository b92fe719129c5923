//! Ensembles of independent runs, each registering one survive/decay bit.

use rand::Rng;
use rayon::prelude::*;
use zeno_core::distributions::IntervalDistribution;

use crate::error::{LabError, Result};
use crate::rng::run_stream;
use crate::trajectory::TrajectoryEngine;

/// Default cap on `runs * m` for a single ensemble.
pub const DEFAULT_SAMPLE_BUDGET: u64 = 1_000_000_000;

#[derive(Clone, Copy, Debug)]
pub struct EnsembleSpec<'a> {
    pub distribution: &'a IntervalDistribution,
    pub m: usize,
    pub runs: usize,
    pub seed: u64,
    /// Stream index of the first run; batches use disjoint ranges.
    pub first_run: u64,
    pub sample_budget: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TrajectoryEnsemble {
    /// One bit per run, `true` when the system passed every measurement.
    pub outcomes: Vec<bool>,
    /// `ln P` of each run's trajectory.
    pub log_probabilities: Vec<f64>,
    pub survived: usize,
    pub p_hat: f64,
    /// `sqrt(p_hat (1 - p_hat) / R)`.
    pub std_error: f64,
}

impl TrajectoryEnsemble {
    pub fn runs(&self) -> usize {
        self.outcomes.len()
    }
}

/// Runs `spec.runs` independent trajectories. Run `i` draws its `m`
/// intervals and then one uniform variate for the outcome from stream
/// `first_run + i`, so the result does not depend on the thread count.
pub fn simulate_ensemble(engine: &TrajectoryEngine, spec: &EnsembleSpec) -> Result<TrajectoryEnsemble> {
    if spec.m == 0 || spec.runs == 0 {
        return Err(LabError::Argument("m and runs must both be at least 1".into()));
    }
    let samples = (spec.runs as u64).saturating_mul(spec.m as u64);
    if samples > spec.sample_budget {
        return Err(LabError::Resource(format!(
            "{} runs x {} measurements = {samples} draws exceeds the budget of {}",
            spec.runs, spec.m, spec.sample_budget
        )));
    }
    let per_run: Vec<(bool, f64)> = (0..spec.runs)
        .into_par_iter()
        .with_min_len(64)
        .map(|i| {
            let mut rng = run_stream(spec.seed, spec.first_run + i as u64);
            let log = engine.sample_log_survival(spec.distribution, spec.m, &mut rng);
            let u: f64 = rng.random();
            (u < log.exp(), log)
        })
        .collect();
    let (outcomes, log_probabilities): (Vec<bool>, Vec<f64>) = per_run.into_iter().unzip();
    let survived = outcomes.iter().filter(|&&b| b).count();
    let r = outcomes.len() as f64;
    let p_hat = survived as f64 / r;
    Ok(TrajectoryEnsemble {
        outcomes,
        log_probabilities,
        survived,
        p_hat,
        std_error: (p_hat * (1.0 - p_hat) / r).sqrt(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trajectory::LogSurvival;
    use zeno_core::spin::{product_zero_state, ZenoSubspace};
    use zeno_core::{SpinModel, SurvivalFunction, SurvivalModel};

    const NS: f64 = 1e-9;

    fn survival() -> SurvivalModel {
        let model = SpinModel::all_x(3, 2.0 * std::f64::consts::PI * 5e3).unwrap();
        SurvivalModel::new(&model, &ZenoSubspace::from_state(&product_zero_state(3).unwrap())).unwrap()
    }

    fn spec(p: &IntervalDistribution, runs: usize) -> EnsembleSpec<'_> {
        EnsembleSpec {
            distribution: p,
            m: 200,
            runs,
            seed: 42,
            first_run: 0,
            sample_budget: DEFAULT_SAMPLE_BUDGET,
        }
    }

    #[test]
    fn same_seed_same_bits() {
        let p = IntervalDistribution::uniform(10.0 * NS, 60.0 * NS).unwrap();
        let e = TrajectoryEngine::Product(LogSurvival::new(survival(), p.support()));
        let a = simulate_ensemble(&e, &spec(&p, 500)).unwrap();
        let b = simulate_ensemble(&e, &spec(&p, 500)).unwrap();
        assert_eq!(a, b);
        let mut other = spec(&p, 500);
        other.seed = 43;
        assert_ne!(a.log_probabilities, simulate_ensemble(&e, &other).unwrap().log_probabilities);
    }

    #[test]
    fn bookkeeping() {
        let p = IntervalDistribution::uniform(1e-6, 4e-6).unwrap();
        let e = TrajectoryEngine::Product(LogSurvival::new(survival(), p.support()));
        let ens = simulate_ensemble(&e, &spec(&p, 1000)).unwrap();
        let count = ens.outcomes.iter().filter(|&&b| b).count();
        assert_eq!(ens.survived, count);
        assert_eq!(ens.p_hat, count as f64 / 1000.0);
        assert_eq!(ens.std_error, (ens.p_hat * (1.0 - ens.p_hat) / 1000.0).sqrt());
    }

    #[test]
    fn dirac_runs_are_powers_of_q() {
        let s = survival();
        let at = 1e-6;
        let p = IntervalDistribution::dirac(at).unwrap();
        let e = TrajectoryEngine::Product(LogSurvival::new(s.clone(), p.support()));
        let ens = simulate_ensemble(&e, &spec(&p, 50)).unwrap();
        let expect = s.q(at).powi(200);
        for log in &ens.log_probabilities {
            assert!((log.exp() - expect).abs() <= 1e-12 * expect);
        }
    }

    #[test]
    fn budget_and_argument_errors() {
        let p = IntervalDistribution::dirac(1e-6).unwrap();
        let e = TrajectoryEngine::Product(LogSurvival::exact(survival()));
        let mut s = spec(&p, 10);
        s.sample_budget = 1999;
        assert!(matches!(simulate_ensemble(&e, &s), Err(LabError::Resource(_))));
        s.runs = 0;
        assert!(matches!(simulate_ensemble(&e, &s), Err(LabError::Argument(_))));
    }

    #[test]
    fn batches_are_slices_of_one_long_ensemble() {
        let p = IntervalDistribution::uniform(10.0 * NS, 60.0 * NS).unwrap();
        let e = TrajectoryEngine::Product(LogSurvival::new(survival(), p.support()));
        let whole = simulate_ensemble(&e, &spec(&p, 40)).unwrap();
        let mut second = spec(&p, 20);
        second.first_run = 20;
        let tail = simulate_ensemble(&e, &second).unwrap();
        assert_eq!(&whole.outcomes[20..], &tail.outcomes[..]);
    }
}
