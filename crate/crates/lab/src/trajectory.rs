//! Survival probability of one measurement trajectory.
//!
//! In product mode the probability of passing all `m` measurements is
//! `prod_j q(mu_j)`. Sequential mode evolves the state between
//! measurements, projects with `Pi` and renormalises, which also covers
//! projectors of rank above one.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};
use zeno_core::distributions::IntervalDistribution;
use zeno_core::linalg::{SpectralDecomposition, StateVector};
use zeno_core::spin::ZenoSubspace;
use zeno_core::SurvivalModel;

use crate::error::{LabError, Result};
use crate::surrogate::{Chebyshev, DEFAULT_TOLERANCE};

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TrajectoryMode {
    #[default]
    Product,
    Sequential,
}

#[derive(Clone, Debug)]
enum Fast {
    Constant { at: f64, value: f64 },
    Interpolant(Chebyshev),
    Exact,
}

/// `ln q(mu)` for the Monte Carlo loop. On the support of the sampling
/// density the spectral sum is replaced by a Chebyshev interpolant when one
/// can be verified to `1e-13` of `max |ln q|`; elsewhere, and when the fit
/// fails, the exact sum is used.
#[derive(Clone, Debug)]
pub struct LogSurvival {
    model: SurvivalModel,
    low: f64,
    high: f64,
    fast: Fast,
}

impl LogSurvival {
    pub fn new(model: SurvivalModel, support: (f64, f64)) -> Self {
        let (low, high) = support;
        let exact = |mu: f64| log_q_exact(&model, mu);
        let fast = if low == high {
            Fast::Constant {
                at: low,
                value: exact(low),
            }
        } else {
            match Chebyshev::fit(exact, low, high, DEFAULT_TOLERANCE) {
                Some(c) => Fast::Interpolant(c),
                None => Fast::Exact,
            }
        };
        Self {
            model,
            low,
            high,
            fast,
        }
    }

    /// Always evaluates the spectral sum.
    pub fn exact(model: SurvivalModel) -> Self {
        Self {
            model,
            low: 0.0,
            high: 0.0,
            fast: Fast::Exact,
        }
    }

    pub fn model(&self) -> &SurvivalModel {
        &self.model
    }

    pub fn uses_interpolant(&self) -> bool {
        matches!(self.fast, Fast::Interpolant(_))
    }

    /// `ln q(mu)`, `-inf` where `q` vanishes.
    #[inline]
    pub fn eval(&self, mu: f64) -> f64 {
        match &self.fast {
            Fast::Constant { at, value } if mu == *at => *value,
            Fast::Interpolant(c) if mu >= self.low && mu <= self.high => c.eval(mu),
            _ => log_q_exact(&self.model, mu),
        }
    }

    /// `sum_j ln q(mu_j)` over `m` draws from `p`.
    pub fn sample_sum<R: Rng + ?Sized>(&self, p: &IntervalDistribution, m: usize, rng: &mut R) -> f64 {
        let (lo, hi) = p.support();
        match &self.fast {
            // every draw lands inside the fitted interval
            Fast::Interpolant(c) if lo >= self.low && hi <= self.high => p.sum_of_draws(rng, m, |mu| c.eval(mu)),
            _ => p.sum_of_draws(rng, m, |mu| self.eval(mu)),
        }
    }
}

fn log_q_exact(model: &SurvivalModel, mu: f64) -> f64 {
    let d = model.one_minus_q(mu);
    if d >= 1.0 {
        f64::NEG_INFINITY
    } else {
        (-d).ln_1p()
    }
}

/// Measurement-by-measurement propagation in the eigenbasis of `H`.
#[derive(Clone, Debug)]
pub struct SequentialPropagator {
    energies: Vec<f64>,
    /// Orthonormal basis of the Zeno subspace in eigenbasis coordinates.
    basis: Vec<Vec<Complex64>>,
    start: Vec<Complex64>,
}

impl SequentialPropagator {
    /// `psi0` must lie in the range of `pi`.
    pub fn new(dec: &SpectralDecomposition, pi: &ZenoSubspace, psi0: &StateVector) -> Result<Self> {
        if pi.dim() != dec.dim() || psi0.dim() != dec.dim() {
            return Err(LabError::Argument(
                "state, projector and Hamiltonian dimensions differ".into(),
            ));
        }
        let projected = pi.project(psi0.amplitudes())?;
        let inside: f64 = projected.iter().map(|z| z.norm_sqr()).sum();
        if (inside - 1.0).abs() > 1e-10 {
            return Err(LabError::Argument(format!(
                "initial state is not inside the Zeno subspace (|Pi psi0|^2 = {inside})"
            )));
        }
        let basis = pi
            .basis()
            .iter()
            .map(|b| dec.to_eigenbasis(b.amplitudes()))
            .collect::<zeno_core::Result<Vec<_>>>()?;
        Ok(Self {
            energies: dec.eigenvalues().to_vec(),
            basis,
            start: dec.to_eigenbasis(psi0.amplitudes())?,
        })
    }

    /// Evolves `state` for `mu`, projects it and renormalises. Returns the
    /// projection probability; the state is left untouched when it is zero.
    fn step(&self, state: &mut [Complex64], overlaps: &mut [Complex64], mu: f64) -> f64 {
        for (c, &e) in state.iter_mut().zip(&self.energies) {
            *c *= Complex64::from_polar(1.0, -e * mu);
        }
        let mut prob = 0.0;
        for (a, b) in overlaps.iter_mut().zip(&self.basis) {
            *a = b.iter().zip(state.iter()).map(|(x, y)| x.conj() * y).sum();
            prob += a.norm_sqr();
        }
        if prob > 0.0 {
            let scale = 1.0 / prob.sqrt();
            state.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            for (a, b) in overlaps.iter().zip(&self.basis) {
                let a = a * scale;
                for (c, x) in state.iter_mut().zip(b) {
                    *c += a * x;
                }
            }
        }
        prob
    }

    fn log_survival_with<I: Iterator<Item = f64>>(&self, intervals: I) -> f64 {
        let mut state = self.start.clone();
        let mut overlaps = vec![Complex64::new(0.0, 0.0); self.basis.len()];
        let mut log = 0.0;
        for mu in intervals {
            let p = self.step(&mut state, &mut overlaps, mu);
            if !(p > 0.0) {
                return f64::NEG_INFINITY;
            }
            log += p.min(1.0).ln();
        }
        log
    }
}

#[derive(Clone, Debug)]
pub enum TrajectoryEngine {
    Product(LogSurvival),
    Sequential(SequentialPropagator),
}

impl TrajectoryEngine {
    pub fn mode(&self) -> TrajectoryMode {
        match self {
            Self::Product(_) => TrajectoryMode::Product,
            Self::Sequential(_) => TrajectoryMode::Sequential,
        }
    }

    /// `ln P({mu_j})` for given intervals; `-inf` for a trajectory that died.
    pub fn log_survival(&self, intervals: &[f64]) -> f64 {
        match self {
            Self::Product(l) => intervals.iter().map(|&mu| l.eval(mu)).sum(),
            Self::Sequential(s) => s.log_survival_with(intervals.iter().copied()),
        }
    }

    /// Same as [`Self::log_survival`] with `m` intervals drawn from `p` on
    /// the fly.
    pub fn sample_log_survival<R: Rng + ?Sized>(
        &self,
        p: &IntervalDistribution,
        m: usize,
        rng: &mut R,
    ) -> f64 {
        match self {
            Self::Product(l) => l.sample_sum(p, m, rng),
            Self::Sequential(s) => s.log_survival_with((0..m).map(|_| p.sample_one(rng))),
        }
    }
}

/// Survival probability of a trajectory with waiting times `intervals`.
pub fn trajectory_survival(engine: &TrajectoryEngine, intervals: &[f64]) -> Result<f64> {
    if let Some(bad) = intervals.iter().find(|mu| !(**mu >= 0.0)) {
        return Err(LabError::Argument(format!("waiting times must be non-negative, got {bad}")));
    }
    Ok(engine.log_survival(intervals).exp())
}
