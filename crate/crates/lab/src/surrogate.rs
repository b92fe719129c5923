//! Chebyshev interpolant of a smooth function on a closed interval, used to
//! replace the spectral sum for `ln q` inside the Monte Carlo loop.

use std::f64::consts::PI;

/// Accepted worst-case deviation, relative to `max |f|` on the interval.
pub const DEFAULT_TOLERANCE: f64 = 1e-13;

const DEGREES: [usize; 4] = [16, 32, 64, 128];
const CHECK_POINTS: usize = 1025;

#[derive(Clone, Debug)]
pub struct Chebyshev {
    low: f64,
    high: f64,
    coeffs: Vec<f64>,
    max_error: f64,
}

impl Chebyshev {
    /// Fits `f` on `[low, high]`, returning `None` when no degree up to 128
    /// reaches `tol` on a dense check grid (e.g. near a zero of `q`).
    pub fn fit<F: Fn(f64) -> f64>(f: F, low: f64, high: f64, tol: f64) -> Option<Self> {
        if !(high > low) {
            return None;
        }
        for &n in &DEGREES {
            let values: Vec<f64> = (0..n)
                .map(|k| {
                    let x = (PI * (k as f64 + 0.5) / n as f64).cos();
                    f(0.5 * (high + low) + 0.5 * (high - low) * x)
                })
                .collect();
            if values.iter().any(|v| !v.is_finite()) {
                return None;
            }
            let mut coeffs: Vec<f64> = (0..n)
                .map(|j| {
                    let s: f64 = values
                        .iter()
                        .enumerate()
                        .map(|(k, v)| v * (PI * j as f64 * (k as f64 + 0.5) / n as f64).cos())
                        .sum();
                    2.0 * s / n as f64
                })
                .collect();
            coeffs[0] *= 0.5;
            let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
            let cut = scale * 1e-18;
            while coeffs.len() > 1 && coeffs.last().is_some_and(|c| c.abs() <= cut) {
                coeffs.pop();
            }
            let mut fit = Self {
                low,
                high,
                coeffs,
                max_error: 0.0,
            };
            let mut worst = 0.0_f64;
            let mut f_max = scale;
            for i in 0..CHECK_POINTS {
                let mu = low + (high - low) * i as f64 / (CHECK_POINTS - 1) as f64;
                let exact = f(mu);
                f_max = f_max.max(exact.abs());
                worst = worst.max((fit.eval(mu) - exact).abs());
            }
            if worst <= tol * f_max {
                fit.max_error = worst;
                return Some(fit);
            }
        }
        None
    }

    /// Clenshaw recurrence.
    #[inline]
    pub fn eval(&self, mu: f64) -> f64 {
        let t = (2.0 * mu - (self.high + self.low)) / (self.high - self.low);
        let (mut b1, mut b2) = (0.0, 0.0);
        for &c in self.coeffs[1..].iter().rev() {
            let next = 2.0 * t * b1 - b2 + c;
            b2 = b1;
            b1 = next;
        }
        t * b1 - b2 + self.coeffs[0]
    }

    pub fn degree(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Largest deviation seen on the check grid.
    pub fn max_error(&self) -> f64 {
        self.max_error
    }
}
