//! Waiting-time densities `p(mu)`, their moments and samplers, and signed
//! tangent directions `f(mu)` used to perturb them.

use rand::Rng;

use crate::error::{arg, Result, ZenoError};
use crate::quadrature::integrate;

/// Piecewise-linear density through `(grid[i], density[i])`.
#[derive(Clone, Debug, PartialEq)]
pub struct TabulatedDensity {
    grid: Vec<f64>,
    density: Vec<f64>,
    cdf: Vec<f64>,
}

impl TabulatedDensity {
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn density_values(&self) -> &[f64] {
        &self.density
    }

    fn eval(&self, mu: f64) -> f64 {
        let g = &self.grid;
        if mu < g[0] || mu > g[g.len() - 1] {
            return 0.0;
        }
        let i = g.partition_point(|&x| x <= mu).clamp(1, g.len() - 1);
        let t = (mu - g[i - 1]) / (g[i] - g[i - 1]);
        self.density[i - 1] + t * (self.density[i] - self.density[i - 1])
    }

    fn inverse_cdf(&self, u: f64) -> f64 {
        let i = self.cdf.partition_point(|&c| c <= u).clamp(1, self.grid.len() - 1);
        let (x0, x1) = (self.grid[i - 1], self.grid[i]);
        let (p0, p1) = (self.density[i - 1], self.density[i]);
        let r = u - self.cdf[i - 1];
        let slope = (p1 - p0) / (x1 - x0);
        // Solve p0 t + slope t^2 / 2 = r in the cancellation-free form.
        let disc = (p0 * p0 + 2.0 * slope * r).max(0.0);
        let denom = p0 + disc.sqrt();
        let t = if denom > 0.0 { 2.0 * r / denom } else { 0.0 };
        (x0 + t).clamp(x0, x1)
    }
}

/// Probability density of the waiting time between two measurements.
#[derive(Clone, Debug, PartialEq)]
pub enum IntervalDistribution {
    /// Flat on `[low, high]`.
    Uniform { low: f64, high: f64 },
    /// Point mass at `at`; every interval has the same length.
    Dirac { at: f64 },
    /// Piecewise-linear density on a grid.
    Tabulated(TabulatedDensity),
}

impl IntervalDistribution {
    pub fn uniform(low: f64, high: f64) -> Result<Self> {
        if !(low.is_finite() && high.is_finite()) || low < 0.0 {
            return arg(format!("uniform support [{low}, {high}] must be finite and non-negative"));
        }
        if !(high > low) {
            return arg(format!("uniform support needs high > low, got [{low}, {high}]"));
        }
        Ok(Self::Uniform { low, high })
    }

    pub fn dirac(at: f64) -> Result<Self> {
        if !(at >= 0.0 && at.is_finite()) {
            return arg(format!("point mass location must be non-negative, got {at}"));
        }
        Ok(Self::Dirac { at })
    }

    /// Piecewise-linear density through `(grid[i], weights[i])`, rescaled
    /// to unit mass.
    pub fn tabulated(grid: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != weights.len() {
            return arg("tabulated density needs at least two nodes and one weight per node");
        }
        if grid[0] < 0.0 || grid.iter().any(|x| !x.is_finite()) {
            return arg("tabulated grid must be finite and non-negative");
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return arg("tabulated grid must be strictly increasing");
        }
        if weights.iter().any(|&w| !(w >= 0.0 && w.is_finite())) {
            return arg("tabulated weights must be finite and non-negative");
        }
        let mut cdf = Vec::with_capacity(grid.len());
        cdf.push(0.0);
        for i in 1..grid.len() {
            let area = 0.5 * (weights[i - 1] + weights[i]) * (grid[i] - grid[i - 1]);
            cdf.push(cdf[i - 1] + area);
        }
        let total = cdf[cdf.len() - 1];
        if !(total > 0.0) {
            return arg("tabulated density has zero total weight");
        }
        Ok(Self::Tabulated(TabulatedDensity {
            grid,
            density: weights.iter().map(|w| w / total).collect(),
            cdf: cdf.iter().map(|c| c / total).collect(),
        }))
    }

    /// `[low, high]` in seconds; a point mass has `low == high`.
    pub fn support(&self) -> (f64, f64) {
        match self {
            Self::Uniform { low, high } => (*low, *high),
            Self::Dirac { at } => (*at, *at),
            Self::Tabulated(t) => (t.grid[0], t.grid[t.grid.len() - 1]),
        }
    }

    /// Density value, `None` for a point mass.
    pub fn density(&self, mu: f64) -> Option<f64> {
        match self {
            Self::Uniform { low, high } => {
                Some(if (*low..=*high).contains(&mu) { 1.0 / (high - low) } else { 0.0 })
            }
            Self::Dirac { .. } => None,
            Self::Tabulated(t) => Some(t.eval(mu)),
        }
    }

    /// `E_p[g] = integral p(mu) g(mu) dmu`, by quadrature for continuous
    /// densities and exactly for a point mass.
    pub fn expectation<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(f64) -> Result<f64>,
    {
        match self {
            Self::Uniform { low, high } => Ok(integrate(&g, *low, *high)? / (high - low)),
            Self::Dirac { at } => g(*at),
            Self::Tabulated(t) => t
                .grid
                .windows(2)
                .map(|w| integrate(|mu| Ok(t.eval(mu) * g(mu)?), w[0], w[1]))
                .sum(),
        }
    }

    /// `chi_k = integral p(mu) mu^k dmu` in s^k.
    pub fn moment(&self, k: u32) -> f64 {
        match self {
            Self::Uniform { low, high } => {
                // (high^{k+1} - low^{k+1}) / ((k+1)(high - low)) expanded to
                // avoid cancellation when the support is narrow.
                let mut acc = 0.0;
                for j in 0..=k {
                    acc += high.powi(j as i32) * low.powi((k - j) as i32);
                }
                acc / f64::from(k + 1)
            }
            Self::Dirac { at } => at.powi(k as i32),
            Self::Tabulated(_) => self
                .quadrature_moment(k)
                .expect("polynomial integrand on a finite grid"),
        }
    }

    /// `chi_k` by quadrature regardless of the kind.
    pub fn quadrature_moment(&self, k: u32) -> Result<f64> {
        self.expectation(|mu| Ok(mu.powi(k as i32)))
    }

    /// `chi_1 .. chi_K`.
    pub fn moments(&self, k_max: usize) -> MomentVector {
        MomentVector((1..=k_max as u32).map(|k| self.moment(k)).collect())
    }

    pub fn mean(&self) -> f64 {
        self.moment(1)
    }

    /// One draw.
    pub fn sample_one<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Self::Uniform { low, high } => low + (high - low) * rng.random::<f64>(),
            Self::Dirac { at } => *at,
            Self::Tabulated(t) => t.inverse_cdf(rng.random::<f64>()),
        }
    }

    /// `sum_j g(mu_j)` over `count` draws, consuming the stream exactly as
    /// repeated [`sample_one`](Self::sample_one) calls would. The variant is
    /// matched once, outside the loop.
    pub fn sum_of_draws<R, G>(&self, rng: &mut R, count: usize, mut g: G) -> f64
    where
        R: Rng + ?Sized,
        G: FnMut(f64) -> f64,
    {
        let mut acc = 0.0;
        match self {
            Self::Uniform { low, high } => {
                for _ in 0..count {
                    acc += g(low + (high - low) * rng.random::<f64>());
                }
            }
            Self::Dirac { at } => {
                for _ in 0..count {
                    acc += g(*at);
                }
            }
            Self::Tabulated(t) => {
                for _ in 0..count {
                    acc += g(t.inverse_cdf(rng.random::<f64>()));
                }
            }
        }
        acc
    }

    /// `count` i.i.d. draws; the sequence is a pure function of the stream
    /// state.
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R, count: usize) -> Result<Vec<f64>> {
        if count == 0 {
            return arg("sample count must be at least 1");
        }
        Ok((0..count).map(|_| self.sample_one(rng)).collect())
    }
}

/// Moments `chi_1 .. chi_K`; `chi_k` carries units of s^k.
#[derive(Clone, Debug, PartialEq)]
pub struct MomentVector(pub Vec<f64>);

impl MomentVector {
    /// `chi_k`, 1-based.
    pub fn chi(&self, k: usize) -> f64 {
        self.0[k - 1]
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// `chi_2 >= chi_1^2` up to rounding.
    pub fn has_nonnegative_variance(&self) -> bool {
        if self.0.len() < 2 {
            return true;
        }
        let m1sq = self.0[0] * self.0[0];
        self.0[1] >= m1sq - 1e-12 * m1sq.abs()
    }
}

/// Point mass `weight * delta(mu - at)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PointMass {
    pub at: f64,
    pub weight: f64,
}

/// Signed direction `f(mu)` in the tangent space of densities, made of
/// point masses plus a multiple of a continuous density. `integral f = 0`
/// so that `p + dc * f` stays normalised.
#[derive(Clone, Debug, PartialEq)]
pub struct PerturbationDirection {
    point_masses: Vec<PointMass>,
    continuous: Option<(IntervalDistribution, f64)>,
    tag: String,
}

const MASS_TOL: f64 = 1e-10;

impl PerturbationDirection {
    /// `sum_i w_i delta(mu - a_i) + scale * p(mu)`.
    pub fn new(
        point_masses: Vec<PointMass>,
        continuous: Option<(IntervalDistribution, f64)>,
        tag: impl Into<String>,
    ) -> Result<Self> {
        if matches!(continuous, Some((IntervalDistribution::Dirac { .. }, _))) {
            return arg("the continuous part of a direction cannot be a point mass");
        }
        if point_masses.iter().any(|p| !(p.at >= 0.0 && p.at.is_finite() && p.weight.is_finite())) {
            return arg("point masses need finite non-negative locations and finite weights");
        }
        let out = Self {
            point_masses,
            continuous,
            tag: tag.into(),
        };
        let mass = out.total_mass();
        let scale = out.point_masses.iter().map(|p| p.weight.abs()).sum::<f64>()
            + out.continuous.as_ref().map_or(0.0, |c| c.1.abs());
        if mass.abs() > MASS_TOL * scale.max(f64::MIN_POSITIVE) {
            return arg(format!("direction has net mass {mass:e}, expected 0"));
        }
        Ok(out)
    }

    /// The zero direction.
    pub fn zero() -> Self {
        Self {
            point_masses: Vec::new(),
            continuous: None,
            tag: "zero".into(),
        }
    }

    /// Shift of the upper bound of a uniform density:
    /// `f = (delta(mu - mu2) - p(mu)) / (mu2 - mu1)`.
    pub fn mu2_shift(p: &IntervalDistribution) -> Result<Self> {
        let IntervalDistribution::Uniform { low, high } = *p else {
            return arg("the mu2 shift is defined for uniform densities only");
        };
        let width = high - low;
        Self::new(
            vec![PointMass { at: high, weight: 1.0 / width }],
            Some((p.clone(), -1.0 / width)),
            "mu2_shift",
        )
    }

    pub fn tag(&self) -> &str {
        &self.tag
    }

    pub fn point_masses(&self) -> &[PointMass] {
        &self.point_masses
    }

    pub fn continuous(&self) -> Option<&(IntervalDistribution, f64)> {
        self.continuous.as_ref()
    }

    pub fn total_mass(&self) -> f64 {
        self.point_masses.iter().map(|p| p.weight).sum::<f64>()
            + self.continuous.as_ref().map_or(0.0, |c| c.1)
    }

    /// `xi_k = integral f(mu) mu^k dmu` in s^k.
    pub fn moment(&self, k: u32) -> f64 {
        self.point_masses
            .iter()
            .map(|p| p.weight * p.at.powi(k as i32))
            .sum::<f64>()
            + self
                .continuous
                .as_ref()
                .map_or(0.0, |(d, s)| s * d.moment(k))
    }

    /// `xi_1 .. xi_K`.
    pub fn moments(&self, k_max: usize) -> Vec<f64> {
        (1..=k_max as u32).map(|k| self.moment(k)).collect()
    }

    /// `<f|g> = integral f(mu) g(mu) dmu`; point masses are evaluated
    /// exactly and the continuous part by quadrature.
    pub fn pair<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let mut acc = 0.0;
        for p in &self.point_masses {
            acc += p.weight * g(p.at)?;
        }
        if let Some((d, s)) = &self.continuous {
            acc += s * d.expectation(&g)?;
        }
        Ok(acc)
    }

    /// `integral |f(mu)| |g(mu)| dmu`, the scale against which a vanishing
    /// pairing is judged.
    pub fn pair_abs<G>(&self, g: G) -> Result<f64>
    where
        G: Fn(f64) -> Result<f64>,
    {
        let mut acc = 0.0;
        for p in &self.point_masses {
            acc += (p.weight * g(p.at)?).abs();
        }
        if let Some((d, s)) = &self.continuous {
            acc += s.abs() * d.expectation(|mu| Ok(g(mu)?.abs()))?;
        }
        Ok(acc)
    }
}

/// Shift direction for `uniform(mu1, mu2)`, failing on a degenerate support.
pub fn mu2_shift_direction(mu1: f64, mu2: f64) -> Result<PerturbationDirection> {
    if mu1 == mu2 {
        return arg("mu1 == mu2 gives a degenerate support");
    }
    PerturbationDirection::mu2_shift(&IntervalDistribution::uniform(mu1, mu2)?)
}

/// `d chi_k / d mu2` for `uniform(mu1, mu2)` in closed form:
/// `((k+1) mu2^k (mu2 - mu1) - (mu2^{k+1} - mu1^{k+1})) / ((k+1) (mu2 - mu1)^2)`.
pub fn uniform_moment_derivative_mu2(mu1: f64, mu2: f64, k: u32) -> Result<f64> {
    if !(mu2 > mu1) {
        return arg(format!("need mu2 > mu1, got ({mu1}, {mu2})"));
    }
    let kp1 = f64::from(k + 1);
    let w = mu2 - mu1;
    let num = kp1 * mu2.powi(k as i32) * w - (mu2.powi(k as i32 + 1) - mu1.powi(k as i32 + 1));
    Ok(num / (kp1 * w * w))
}

/// `<f|ln q>`, surfacing evaluation failures of `ln q`.
pub fn pair_with_log_q<L>(f: &PerturbationDirection, ln_q: L) -> Result<f64>
where
    L: Fn(f64) -> Result<f64>,
{
    f.pair(ln_q).map_err(|e| match e {
        ZenoError::Evaluation(m) => ZenoError::Evaluation(format!("pairing with ln q: {m}")),
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const NS: f64 = 1e-9;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    #[test]
    fn uniform_moments() {
        let u = IntervalDistribution::uniform(0.0, 1.0).unwrap();
        assert_eq!(u.moment(1), 0.5);
        assert_eq!(u.moment(0), 1.0);
        let u = IntervalDistribution::uniform(10.0 * NS, 60.0 * NS).unwrap();
        assert!(rel(u.moment(2), 4300.0 / 3.0 * NS * NS) < 1e-14);
    }

    #[test]
    fn analytic_and_quadrature_moments_agree() {
        let u = IntervalDistribution::uniform(10.0 * NS, 60.0 * NS).unwrap();
        for k in 0..=8 {
            let q = u.quadrature_moment(k).unwrap();
            assert!(rel(u.moment(k), q) <= 1e-12, "k={k}");
        }
        // SI form of the k-th moment
        let (a, b) = (10.0 * NS, 60.0 * NS);
        for k in 1..=8 {
            let si = (b.powi(k + 1) - a.powi(k + 1)) / (f64::from(k + 1) * (b - a));
            assert!(rel(u.moment(k as u32), si) < 1e-13);
        }
    }

    #[test]
    fn dirac_moments() {
        let d = IntervalDistribution::dirac(3.0).unwrap();
        for k in 0..6 {
            assert_eq!(d.moment(k), 3f64.powi(k as i32));
        }
        assert!(d.moments(4).has_nonnegative_variance());
    }

    #[test]
    fn constructor_errors() {
        assert!(IntervalDistribution::uniform(1.0, 1.0).is_err());
        assert!(IntervalDistribution::uniform(-1.0, 1.0).is_err());
        assert!(IntervalDistribution::dirac(-1.0).is_err());
        assert!(IntervalDistribution::tabulated(vec![0.0, 1.0], vec![0.0, 0.0]).is_err());
        assert!(IntervalDistribution::tabulated(vec![1.0, 0.0], vec![1.0, 1.0]).is_err());
        assert!(mu2_shift_direction(2.0, 2.0).is_err());
        assert!(uniform_moment_derivative_mu2(2.0, 2.0, 2).is_err());
    }

    #[test]
    fn tabulated_normalisation_and_moments() {
        let t = IntervalDistribution::tabulated(vec![0.0, 1.0, 2.0, 4.0], vec![0.0, 2.0, 1.0, 0.5])
            .unwrap();
        let mass = t.expectation(|_| Ok(1.0)).unwrap();
        assert!((mass - 1.0).abs() < 1e-10);
        let m = t.moments(3);
        assert!(m.has_nonnegative_variance());
        // triangle-shaped comparison: a flat table equals the uniform density
        let flat = IntervalDistribution::tabulated(vec![1.0, 2.0, 3.0], vec![5.0, 5.0, 5.0]).unwrap();
        let u = IntervalDistribution::uniform(1.0, 3.0).unwrap();
        for k in 1..=6 {
            assert!(rel(flat.moment(k), u.moment(k)) < 1e-12);
        }
    }

    #[test]
    fn tabulated_sampling_matches_moments() {
        let t = IntervalDistribution::tabulated(vec![0.0, 1.0, 3.0], vec![1.0, 3.0, 0.0]).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 200_000;
        let xs = t.sample(&mut rng, n).unwrap();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = t.moment(2) - t.moment(1).powi(2);
        let se = (var / n as f64).sqrt();
        assert!((mean - t.moment(1)).abs() < 4.0 * se);
        assert!(xs.iter().all(|&x| (0.0..=3.0).contains(&x)));
    }

    #[test]
    fn uniform_and_dirac_samples() {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let u = IntervalDistribution::uniform(10.0 * NS, 60.0 * NS).unwrap();
        assert!(u
            .sample(&mut rng, 10_000)
            .unwrap()
            .iter()
            .all(|&x| (10.0 * NS..=60.0 * NS).contains(&x)));
        let d = IntervalDistribution::dirac(7.0 * NS).unwrap();
        assert!(d.sample(&mut rng, 100).unwrap().iter().all(|&x| x == 7.0 * NS));
        assert!(u.sample(&mut rng, 0).is_err());
    }

    #[test]
    fn uniform_sample_moments_within_standard_error() {
        let u = IntervalDistribution::uniform(10.0 * NS, 60.0 * NS).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        let n = 1_000_000;
        let xs = u.sample(&mut rng, n).unwrap();
        for k in 1..=4_u32 {
            let emp = xs.iter().map(|x| x.powi(k as i32)).sum::<f64>() / n as f64;
            let var = u.moment(2 * k) - u.moment(k).powi(2);
            let se = (var / n as f64).sqrt();
            assert!((emp - u.moment(k)).abs() < 4.0 * se, "k={k}");
        }
    }

    #[test]
    fn sampling_is_deterministic() {
        let u = IntervalDistribution::uniform(0.0, 1.0).unwrap();
        let a = u.sample(&mut ChaCha8Rng::seed_from_u64(9), 1000).unwrap();
        let b = u.sample(&mut ChaCha8Rng::seed_from_u64(9), 1000).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn summed_draws_follow_the_single_draw_stream() {
        let tab = IntervalDistribution::tabulated(vec![0.0, 1.0, 3.0], vec![1.0, 2.0, 0.5]).unwrap();
        for p in [IntervalDistribution::uniform(2.0, 5.0).unwrap(), IntervalDistribution::dirac(1.5).unwrap(), tab] {
            let g = |mu: f64| (mu * 0.7).sin();
            let mut one = ChaCha8Rng::seed_from_u64(4);
            let mut sum = ChaCha8Rng::seed_from_u64(4);
            let expected: f64 = (0..257).fold(0.0, |acc, _| acc + g(p.sample_one(&mut one)));
            assert_eq!(p.sum_of_draws(&mut sum, 257, g), expected);
            assert_eq!(one.random::<u64>(), sum.random::<u64>());
        }
    }

    #[test]
    fn mu2_shift_moments() {
        let (a, b) = (10.0 * NS, 60.0 * NS);
        let f = mu2_shift_direction(a, b).unwrap();
        assert!(f.total_mass().abs() < 1e-12 / (b - a));
        assert!(rel(f.moment(2), 325_000.0 / 7_500.0 * NS) < 1e-12);
        for k in 1..=8_u32 {
            let si = uniform_moment_derivative_mu2(a, b, k).unwrap();
            assert!(rel(f.moment(k), si) < 1e-10, "k={k}");
            // central difference in mu2
            let h = 1e-4 * (b - a);
            let up = IntervalDistribution::uniform(a, b + h).unwrap().moment(k);
            let dn = IntervalDistribution::uniform(a, b - h).unwrap().moment(k);
            assert!(rel((up - dn) / (2.0 * h), si) < 1e-6, "k={k}");
        }
    }

    #[test]
    fn perturbed_moments_are_first_order_accurate() {
        let (a, b) = (10.0 * NS, 60.0 * NS);
        let u = IntervalDistribution::uniform(a, b).unwrap();
        let f = PerturbationDirection::mu2_shift(&u).unwrap();
        let k = 3;
        let steps = [1e-3, 3e-3, 1e-2, 3e-2].map(|s| s * (b - a));
        let errs: Vec<f64> = steps
            .iter()
            .map(|&dc| {
                let exact = IntervalDistribution::uniform(a, b + dc).unwrap().moment(k);
                (exact - (u.moment(k) + dc * f.moment(k))).abs()
            })
            .collect();
        let (lx, ly): (Vec<f64>, Vec<f64>) = steps.iter().zip(&errs).map(|(s, e)| (s.ln(), e.ln())).unzip();
        let n = lx.len() as f64;
        let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
        let slope = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum::<f64>()
            / lx.iter().map(|x| (x - mx).powi(2)).sum::<f64>();
        assert!(slope >= 1.9, "slope {slope}");
    }

    #[test]
    fn pairing() {
        let (a, b) = (10.0 * NS, 60.0 * NS);
        let f = mu2_shift_direction(a, b).unwrap();
        let c = pair_with_log_q(&f, |_| Ok(-0.7)).unwrap();
        // zero net mass; residue is rounding relative to 0.7 / (mu2 - mu1)
        assert!(c.abs() < 1e-12 * 0.7 / (b - a));
        // ln q = -D mu^2  =>  <f|ln q> = -D (mu2^2 - chi2) / (mu2 - mu1)
        let d = 8.88e9;
        let u = IntervalDistribution::uniform(a, b).unwrap();
        let got = pair_with_log_q(&f, |mu| Ok(-d * mu * mu)).unwrap();
        let expect = -d * (b * b - u.moment(2)) / (b - a);
        assert!(rel(got, expect) < 1e-12);
        let z = PerturbationDirection::zero();
        assert_eq!(z.pair(|_| Ok(1.0)).unwrap(), 0.0);
        let err = pair_with_log_q(&f, |_| Err(ZenoError::Evaluation("q <= 0".into())));
        assert!(matches!(err, Err(ZenoError::Evaluation(_))));
    }

    #[test]
    fn direction_rejects_net_mass() {
        let r = PerturbationDirection::new(vec![PointMass { at: 1.0, weight: 1.0 }], None, "bad");
        assert!(r.is_err());
        let ok = PerturbationDirection::new(
            vec![PointMass { at: 1.0, weight: 1.0 }, PointMass { at: 2.0, weight: -1.0 }],
            None,
            "dipole",
        );
        assert!(ok.is_ok());
    }
}
