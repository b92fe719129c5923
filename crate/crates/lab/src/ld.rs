//! Concentration of the per-measurement log survival `(1/m) sum_j ln q(mu_j)`
//! around `<p|ln q>` as `m` grows.

use rayon::prelude::*;
use zeno_core::distributions::IntervalDistribution;
use zeno_core::fisher::mean_log_survival;

use crate::error::{LabError, Result};
use crate::rng::{derive_seed, run_stream};
use crate::stats::{linear_fit, mean_and_variance};
use crate::trajectory::LogSurvival;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LdRow {
    pub m: usize,
    pub mean: f64,
    pub std_dev: f64,
    /// `std_dev / sqrt(runs)`.
    pub std_error: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct LdTable {
    pub rows: Vec<LdRow>,
    /// `<p|ln q>` by quadrature.
    pub target: f64,
    /// Log-log slope of the standard deviation against `m`; `None` when
    /// the spread vanishes (point mass) or fewer than two rows exist.
    pub slope: Option<f64>,
}

impl LdTable {
    /// Largest `|mean - target| / std_error` over rows with a spread.
    pub fn worst_z(&self) -> f64 {
        self.rows
            .iter()
            .filter(|r| r.std_error > 0.0)
            .map(|r| (r.mean - self.target).abs() / r.std_error)
            .fold(0.0, f64::max)
    }
}

/// For every `m` in the ascending sweep, `runs` independent draws of
/// `(1/m) sum_j ln q(mu_j)`.
pub fn ld_convergence(
    log_q: &LogSurvival,
    p: &IntervalDistribution,
    ms: &[usize],
    runs: usize,
    seed: u64,
) -> Result<LdTable> {
    if ms.is_empty() || ms.windows(2).any(|w| w[1] <= w[0]) || ms[0] == 0 {
        return Err(LabError::Argument("the m sweep must be positive and strictly ascending".into()));
    }
    if runs < 2 {
        return Err(LabError::Argument("at least two runs are needed for a spread".into()));
    }
    let target = mean_log_survival(p, log_q.model())?;
    let rows = ms
        .iter()
        .map(|&m| {
            let stream_seed = derive_seed(seed, "ld", m as u64);
            let values: Vec<f64> = (0..runs)
                .into_par_iter()
                .with_min_len(16)
                .map(|i| {
                    let mut rng = run_stream(stream_seed, i as u64);
                    log_q.sample_sum(p, m, &mut rng) / m as f64
                })
                .collect();
            let (mean, var) = mean_and_variance(&values);
            let std_dev = var.sqrt();
            LdRow {
                m,
                mean,
                std_dev,
                std_error: std_dev / (runs as f64).sqrt(),
            }
        })
        .collect::<Vec<_>>();
    let spread = rows.iter().all(|r| r.std_dev > 0.0);
    let slope = if spread {
        let lx: Vec<f64> = rows.iter().map(|r| (r.m as f64).ln()).collect();
        let ly: Vec<f64> = rows.iter().map(|r| r.std_dev.ln()).collect();
        linear_fit(&lx, &ly).map(|f| f.slope)
    } else {
        None
    };
    Ok(LdTable { rows, target, slope })
}
