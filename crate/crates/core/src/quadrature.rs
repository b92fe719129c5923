//! Globally adaptive 15-point Gauss-Kronrod quadrature.

use std::collections::BinaryHeap;

use crate::error::{arg, Result, ZenoError};

const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_225,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
// Gauss weights for the nodes XGK[1], XGK[3], XGK[5], XGK[7].
const WG: [f64; 4] = [
    0.129_484_966_168_869_7,
    0.279_705_391_489_276_7,
    0.381_830_050_505_118_9,
    0.417_959_183_673_469_4,
];

/// Tolerances for [`integrate_with`].
#[derive(Clone, Copy, Debug)]
pub struct QuadratureOptions {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub max_subdivisions: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-12,
            abs_tol: 1e-300,
            max_subdivisions: 1 << 20,
        }
    }
}

#[derive(Clone, Copy, Debug)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
    // error estimate is dominated by rounding, splitting cannot help
    saturated: bool,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error == other.error
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.error.total_cmp(&other.error)
    }
}

fn gauss_kronrod<F>(f: &F, a: f64, b: f64) -> Result<Segment>
where
    F: Fn(f64) -> Result<f64>,
{
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center)?;
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    let mut abs_sum = fc.abs() * WGK[7];
    let mut samples = [(0.0, 0.0); 7];
    for (j, &x) in XGK[..7].iter().enumerate() {
        let dx = half * x;
        let (f1, f2) = (f(center - dx)?, f(center + dx)?);
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
        samples[j] = (f1, f2);
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[7] * (fc - mean).abs();
    for (j, &(f1, f2)) in samples.iter().enumerate() {
        asc += WGK[j] * ((f1 - mean).abs() + (f2 - mean).abs());
    }
    let value = kronrod * half;
    let abs_sum = abs_sum * half.abs();
    let asc = asc * half.abs();
    let mut error = ((kronrod - gauss) * half).abs();
    if asc != 0.0 && error != 0.0 {
        error = asc * (200.0 * error / asc).powf(1.5).min(1.0);
    }
    let floor = 50.0 * f64::EPSILON * abs_sum;
    let saturated = error <= floor;
    if abs_sum > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        error = error.max(floor);
    }
    if !value.is_finite() {
        return Err(ZenoError::Evaluation(format!(
            "integrand is not finite on [{a:e}, {b:e}]"
        )));
    }
    Ok(Segment {
        a,
        b,
        value,
        error,
        saturated,
    })
}

/// Integrates a fallible integrand over `[a, b]` with custom tolerances.
pub fn integrate_with<F>(f: F, a: f64, b: f64, opts: QuadratureOptions) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    if !(a.is_finite() && b.is_finite()) {
        return arg(format!("integration bounds must be finite, got [{a}, {b}]"));
    }
    if a == b {
        return Ok(0.0);
    }
    if a > b {
        return integrate_with(f, b, a, opts).map(|v| -v);
    }
    let first = gauss_kronrod(&f, a, b)?;
    let mut total = first.value;
    let mut total_err = first.error;
    let mut heap = BinaryHeap::from([first]);
    let mut parked_value = 0.0;
    let mut subdivisions = 0_usize;

    while total_err > opts.abs_tol.max(opts.rel_tol * total.abs()) {
        let Some(seg) = heap.pop() else { break };
        let mid = 0.5 * (seg.a + seg.b);
        if seg.saturated || mid <= seg.a || mid >= seg.b {
            // Nothing left to gain on this piece; park it.
            parked_value += seg.value;
            if heap.is_empty() {
                break;
            }
            continue;
        }
        subdivisions += 1;
        if subdivisions > opts.max_subdivisions {
            return Err(ZenoError::Evaluation(format!(
                "quadrature exceeded {} subdivisions on [{a:e}, {b:e}]",
                opts.max_subdivisions
            )));
        }
        let left = gauss_kronrod(&f, seg.a, mid)?;
        let right = gauss_kronrod(&f, mid, seg.b)?;
        total += left.value + right.value - seg.value;
        heap.push(left);
        heap.push(right);
        total_err += left.error + right.error - seg.error;
    }
    // Re-sum from the pieces to shed the rounding of incremental updates.
    Ok(parked_value + heap.iter().map(|s| s.value).sum::<f64>())
}

/// Integrates `f` over `[a, b]` with the default tolerances
/// (relative `1e-12`, absolute floor `1e-300`).
pub fn integrate<F>(f: F, a: f64, b: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    integrate_with(f, a, b, QuadratureOptions::default())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn polynomials_are_exact() {
        for k in 0..=8 {
            let v = integrate(|x| Ok(x.powi(k)), 0.0, 2.0).unwrap();
            let exact = 2f64.powi(k + 1) / f64::from(k + 1);
            assert!(((v - exact) / exact).abs() < 1e-14, "k={k}");
        }
    }

    #[test]
    fn smooth_transcendental() {
        let v = integrate(|x: f64| Ok(x.cos().ln()), 0.0, 1.2).unwrap();
        // no elementary antiderivative; compare against a tighter run
        let opts = QuadratureOptions {
            rel_tol: 1e-15,
            ..Default::default()
        };
        let tight = integrate_with(|x: f64| Ok(x.cos().ln()), 0.0, 1.2, opts).unwrap();
        assert!(((v - tight) / tight).abs() < 1e-12);

        let e = integrate(|x: f64| Ok(x.exp()), -1.0, 3.0).unwrap();
        let exact = 3f64.exp() - (-1f64).exp();
        assert!(((e - exact) / exact).abs() < 1e-13);
    }

    #[test]
    fn endpoint_singularity_converges() {
        let v = integrate(|x: f64| Ok(x.sqrt()), 0.0, 1.0).unwrap();
        assert!((v - 2.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn reversed_and_empty_intervals() {
        let f = |x: f64| Ok(x * x);
        assert_eq!(integrate(f, 1.0, 1.0).unwrap(), 0.0);
        let fwd = integrate(f, 0.0, 1.0).unwrap();
        let rev = integrate(f, 1.0, 0.0).unwrap();
        assert_eq!(fwd, -rev);
    }

    #[test]
    fn integrand_errors_propagate() {
        let r = integrate(
            |x| {
                if x > 0.5 {
                    Err(ZenoError::Evaluation("boom".into()))
                } else {
                    Ok(1.0)
                }
            },
            0.0,
            1.0,
        );
        assert!(matches!(r, Err(ZenoError::Evaluation(_))));
    }

    #[test]
    fn subdivision_cap() {
        let opts = QuadratureOptions {
            max_subdivisions: 4,
            ..Default::default()
        };
        let r = integrate_with(|x: f64| Ok((50.0 * x).sin().abs()), 0.0, 10.0, opts);
        assert!(matches!(r, Err(ZenoError::Evaluation(_))));
    }
}
