//! Most-probable survival probability and the Fisher information it carries
//! about the waiting-time density.
//!
//! With `m` measurements and waiting times drawn from `p`, the survival
//! probability concentrates at
//!
//! ```text
//! P* = exp(m <p|ln q>),   <f|g> = integral f(mu) g(mu) dmu.
//! ```
//!
//! A perturbation `dp` shifts it by `dP* = m P* <dp|ln q>`. Because only the
//! binary survive/decay outcome is recorded, the Fisher information operator
//! `m^2 P*/(1-P*) |ln q><ln q|` has rank one. In the moment basis its matrix
//! elements are `m^2 P*/(1-P*) beta_i beta_j / (i! j!)` with
//! `beta_k = d^k ln q / d mu^k` at zero.

use crate::distributions::{IntervalDistribution, PerturbationDirection};
use crate::error::{arg, Result, ZenoError};
use crate::quadrature::integrate;
use crate::spin::SurvivalFunction;

/// Default Zeno-regime threshold on `m |<p|ln q>|`.
pub const ZENO_THRESHOLD: f64 = 0.2;

fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

fn check_m(m: usize) -> Result<f64> {
    if m == 0 {
        return arg("number of measurements must be at least 1");
    }
    Ok(m as f64)
}

/// `P*` together with its logarithm and a cancellation-free `1 - P*`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SurvivalEstimate {
    /// `ln P*`.
    pub log: f64,
    pub pstar: f64,
    /// `1 - P*` computed as `-expm1(ln P*)`.
    pub one_minus: f64,
}

impl SurvivalEstimate {
    pub fn from_log(log: f64) -> Self {
        Self {
            log,
            pstar: log.exp(),
            one_minus: -log.exp_m1(),
        }
    }

    /// `P* / (1 - P*)`, failing at `P* = 1`.
    pub fn odds(&self) -> Result<f64> {
        if self.one_minus == 0.0 {
            return Err(ZenoError::Singularity(
                "P* = 1: the binary outcome is deterministic".into(),
            ));
        }
        Ok(self.pstar / self.one_minus)
    }
}

fn check_support<Q: SurvivalFunction + ?Sized>(p: &IntervalDistribution, q: &Q) -> Result<()> {
    let (_, high) = p.support();
    if high > q.mu_max() {
        return arg(format!(
            "density support reaches {high:e} s, beyond the survival window {:e} s",
            q.mu_max()
        ));
    }
    Ok(())
}

/// `<p|ln q> = integral p(mu) ln q(mu) dmu`.
pub fn mean_log_survival<Q: SurvivalFunction + ?Sized>(p: &IntervalDistribution, q: &Q) -> Result<f64> {
    check_support(p, q)?;
    p.expectation(|mu| q.ln_q(mu))
}

/// `P* = exp(m <p|ln q>)` by adaptive quadrature.
pub fn most_probable_survival<Q: SurvivalFunction + ?Sized>(
    p: &IntervalDistribution,
    q: &Q,
    m: usize,
) -> Result<SurvivalEstimate> {
    let m = check_m(m)?;
    Ok(SurvivalEstimate::from_log(m * mean_log_survival(p, q)?))
}

/// `P* = exp(m sum_{k<=K} beta_k chi_k / k!)`, the truncated moment series.
pub fn survival_from_moments(betas: &[f64], chi: &[f64], m: usize, k: usize) -> Result<SurvivalEstimate> {
    let m = check_m(m)?;
    if k > betas.len() || k > chi.len() {
        return arg(format!(
            "truncation K = {k} exceeds the available betas ({}) or moments ({})",
            betas.len(),
            chi.len()
        ));
    }
    Ok(SurvivalEstimate::from_log(m * moment_pairing(betas, chi, k)))
}

/// `sum_{k<=K} beta_k x_k / k!`.
pub fn moment_pairing(betas: &[f64], x: &[f64], k: usize) -> f64 {
    (0..k).map(|i| betas[i] * x[i] / factorial(i + 1)).sum()
}

/// `dP* = m P* <dp|ln q>`, the functional derivative applied to `dp`.
pub fn functional_derivative_pairing<Q: SurvivalFunction + ?Sized>(
    dp: &PerturbationDirection,
    q: &Q,
    m: usize,
    pstar: f64,
) -> Result<f64> {
    let m = check_m(m)?;
    Ok(m * pstar * dp.pair(|mu| q.ln_q(mu))?)
}

/// `P*[p + c f]` evaluated on the perturbed measure.
pub fn perturbed_survival<Q: SurvivalFunction + ?Sized>(
    p: &IntervalDistribution,
    f: &PerturbationDirection,
    c: f64,
    q: &Q,
    m: usize,
) -> Result<SurvivalEstimate> {
    let m = check_m(m)?;
    let base = mean_log_survival(p, q)?;
    let shift = f.pair(|mu| q.ln_q(mu))?;
    Ok(SurvivalEstimate::from_log(m * (base + c * shift)))
}

/// Linearised versus exact confinement error.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZenoConfinement {
    /// `-m <p|ln q>`.
    pub approx_error: f64,
    /// `1 - P*`.
    pub exact_error: f64,
    /// `m |<p|ln q>|` below the regime threshold.
    pub in_regime: bool,
}

impl ZenoConfinement {
    /// `approx / exact`; one for a perfectly confined system.
    pub fn ratio(&self) -> f64 {
        if self.exact_error == 0.0 {
            1.0
        } else {
            self.approx_error / self.exact_error
        }
    }
}

pub fn zeno_confinement<Q: SurvivalFunction + ?Sized>(
    p: &IntervalDistribution,
    q: &Q,
    m: usize,
    threshold: f64,
) -> Result<ZenoConfinement> {
    let est = most_probable_survival(p, q, m)?;
    Ok(ZenoConfinement {
        approx_error: -est.log,
        exact_error: est.one_minus,
        in_regime: est.log.abs() < threshold,
    })
}

/// `||ln q||^2 = integral_0^{mu_max} (ln q)^2 dmu`, in s.
pub fn log_q_norm_sq<Q: SurvivalFunction + ?Sized>(q: &Q) -> Result<f64> {
    let upper = q.mu_max();
    if !upper.is_finite() {
        return arg("the L2 norm of ln q needs a finite survival window");
    }
    integrate(|mu| q.ln_q(mu).map(|l| l * l), 0.0, upper)
}

/// Non-zero eigenvalue of the Fisher information operator.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FioEigen {
    /// `F_v = m^2 P*/(1-P*) ||ln q||^2`.
    pub eigenvalue: f64,
    /// `||ln q||^2` on `[0, mu_max]`.
    pub norm_sq: f64,
}

pub fn fio_eigenvalue<Q: SurvivalFunction + ?Sized>(
    q: &Q,
    m: usize,
    pstar: &SurvivalEstimate,
) -> Result<FioEigen> {
    let mf = check_m(m)?;
    let odds = pstar.odds()?;
    let norm_sq = log_q_norm_sq(q)?;
    if norm_sq == 0.0 {
        return Err(ZenoError::Singularity("ln q vanishes identically".into()));
    }
    Ok(FioEigen {
        eigenvalue: mf * mf * odds * norm_sq,
        norm_sq,
    })
}

/// `P* = F / (F + m^2 ||v||^2)`.
pub fn pstar_from_eigenvalue(eigenvalue: f64, m: usize, v_norm_sq: f64) -> f64 {
    let m = m as f64;
    eigenvalue / (eigenvalue + m * m * v_norm_sq)
}

/// How `P*` in a [`FisherReport`] was obtained.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PstarMethod {
    Quadrature,
    MomentSeries(usize),
}

/// Fisher information along one perturbation direction.
#[derive(Clone, Debug, PartialEq)]
pub struct DirectionalFisher {
    /// `<f|ln q>` by quadrature.
    pub pairing: f64,
    /// `sum_k beta_k xi_k / k!`.
    pub moment_pairing: f64,
    /// `m^2 P*/(1-P*) <f|ln q>^2`.
    pub functional: f64,
    /// `m^2 P*/(1-P*) (sum_k beta_k xi_k / k!)^2`.
    pub moment_form: f64,
    /// Cramér-Rao bound `1/sqrt(F_f)` on the direction parameter; `None`
    /// when the information vanishes.
    pub crb: Option<f64>,
}

impl DirectionalFisher {
    /// Relative gap between the functional and the moment form.
    pub fn relative_gap(&self) -> f64 {
        let scale = self.functional.abs().max(self.moment_form.abs());
        if scale == 0.0 {
            0.0
        } else {
            (self.functional - self.moment_form).abs() / scale
        }
    }
}

/// Truncated Fisher information matrix in the moment basis.
#[derive(Clone, Debug, PartialEq)]
pub struct FisherReport {
    pub m: usize,
    pub pstar: f64,
    pub one_minus_pstar: f64,
    pub pstar_method: PstarMethod,
    /// `F_ij`, in s^-(i+j).
    pub fim: Vec<Vec<f64>>,
    /// `F~_v = m^2 P*/(1-P*) sum_k (beta_k/k!)^2`.
    pub fim_eigenvalue: f64,
    /// `F_v` of the operator, when a survival function was supplied.
    pub fio_eigenvalue: Option<f64>,
    /// `v_i = beta_i / i!`.
    pub eigenvector: Vec<f64>,
    pub directional: Option<DirectionalFisher>,
    /// `|beta_K chi_K / K!|`, size of the last retained series term.
    pub truncation_remainder: f64,
}

impl FisherReport {
    pub fn eigenvector_norm_sq(&self) -> f64 {
        self.eigenvector.iter().map(|v| v * v).sum()
    }

    /// `F~_v / ||v||^2 = m^2 P*/(1-P*)`, free of the moment units.
    pub fn normalized_eigenvalue(&self) -> f64 {
        self.fim_eigenvalue / self.eigenvector_norm_sq()
    }

    /// Largest `|F_ij F_kl - F_il F_kj|` over all 2x2 minors, relative to
    /// `max |F_ij|^2`.
    pub fn max_minor_ratio(&self) -> f64 {
        let k = self.fim.len();
        let max_sq = self
            .fim
            .iter()
            .flatten()
            .fold(0.0_f64, |m, x| m.max(x.abs()))
            .powi(2);
        if max_sq == 0.0 {
            return 0.0;
        }
        let f = &self.fim;
        let mut worst = 0.0_f64;
        for i in 0..k {
            for r in i + 1..k {
                for j in 0..k {
                    for c in j + 1..k {
                        let minor = f[i][j] * f[r][c] - f[i][c] * f[r][j];
                        worst = worst.max(minor.abs());
                    }
                }
            }
        }
        worst / max_sq
    }

    /// Attaches the operator eigenvalue.
    pub fn with_fio_eigenvalue(mut self, fio: &FioEigen) -> Self {
        self.fio_eigenvalue = Some(fio.eigenvalue);
        self
    }

    pub fn with_directional(mut self, d: DirectionalFisher) -> Self {
        self.directional = Some(d);
        self
    }
}

/// Builds the rank-one FIM from `beta` and the moments `chi`, with `P*`
/// taken from the same truncated series.
pub fn fim_report(betas: &[f64], chi: &[f64], m: usize, k: usize) -> Result<FisherReport> {
    let est = survival_from_moments(betas, chi, m, k)?;
    let odds = est.odds()?;
    let mf = m as f64;
    let prefactor = mf * mf * odds;
    let eigenvector: Vec<f64> = (0..k).map(|i| betas[i] / factorial(i + 1)).collect();
    let fim = eigenvector
        .iter()
        .map(|vi| eigenvector.iter().map(|vj| prefactor * vi * vj).collect())
        .collect();
    let norm_sq: f64 = eigenvector.iter().map(|v| v * v).sum();
    Ok(FisherReport {
        m,
        pstar: est.pstar,
        one_minus_pstar: est.one_minus,
        pstar_method: PstarMethod::MomentSeries(k),
        fim,
        fim_eigenvalue: prefactor * norm_sq,
        fio_eigenvalue: None,
        eigenvector,
        directional: None,
        truncation_remainder: if k == 0 {
            0.0
        } else {
            (betas[k - 1] * chi[k - 1] / factorial(k)).abs()
        },
    })
}

/// Fisher information for the parameter `c` of `p + c f`, by both the
/// functional pairing `<f|ln q>` and the moment series over `betas`.
pub fn fisher_along_direction<Q: SurvivalFunction + ?Sized>(
    p: &IntervalDistribution,
    f: &PerturbationDirection,
    q: &Q,
    betas: &[f64],
    m: usize,
) -> Result<DirectionalFisher> {
    let est = most_probable_survival(p, q, m)?;
    let odds = est.odds()?;
    let mf = m as f64;
    let ln_q = |mu: f64| q.ln_q(mu);
    let pairing = f.pair(ln_q)?;
    let scale = f.pair_abs(ln_q)?;
    let xi = f.moments(betas.len());
    let moment_pairing = moment_pairing(betas, &xi, betas.len());
    let orthogonal = pairing.abs() <= 1e-12 * scale;
    let functional = if orthogonal {
        0.0
    } else {
        mf * mf * odds * pairing * pairing
    };
    let moment_form = if orthogonal {
        0.0
    } else {
        mf * mf * odds * moment_pairing * moment_pairing
    };
    Ok(DirectionalFisher {
        pairing,
        moment_pairing,
        functional,
        moment_form,
        crb: (functional > 0.0).then(|| 1.0 / functional.sqrt()),
    })
}

/// Zeno-regime Fisher information for the upper bound of a uniform density.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct UniformMu2Fisher {
    /// `m Delta^2 H (mu2^2 - chi2)^2 / (chi2 (mu2 - mu1)^2)`, in s^-2.
    pub fisher: f64,
    /// `1 / sqrt(F)`, in s.
    pub crb: f64,
    /// `m Delta^2 H chi2`, the quadratic-order confinement error.
    pub zeno_parameter: f64,
    pub in_zeno_regime: bool,
}

pub fn uniform_mu2_fisher(variance: f64, mu1: f64, mu2: f64, m: usize) -> Result<UniformMu2Fisher> {
    let mf = check_m(m)?;
    if !(mu2 > mu1 && mu1 >= 0.0) {
        return arg(format!("need mu2 > mu1 >= 0, got ({mu1:e}, {mu2:e})"));
    }
    let chi2 = IntervalDistribution::uniform(mu1, mu2)?.moment(2);
    let width = mu2 - mu1;
    let fisher = mf * variance * (mu2 * mu2 - chi2).powi(2) / (chi2 * width * width);
    let zeno_parameter = mf * variance * chi2;
    Ok(UniformMu2Fisher {
        fisher,
        crb: 1.0 / fisher.sqrt(),
        zeno_parameter,
        in_zeno_regime: zeno_parameter <= ZENO_THRESHOLD,
    })
}

/// `F_22 = m Delta^2 H / chi2`, the quadratic-order FIM element.
pub fn f22_quadratic(variance: f64, chi2: f64, m: usize) -> f64 {
    m as f64 * variance / chi2
}

/// `F(f) / (F(chi2) (d chi2 / d mu2)^2)`, which the chain rule fixes to one.
///
/// The three factors are evaluated separately: the directional information
/// from the closed form, `F(chi2)` from the quadratic FIM element and the
/// derivative from its own closed form.
pub fn chain_rule_check(mu1: f64, mu2: f64) -> Result<f64> {
    if mu1 == mu2 {
        return arg("mu1 == mu2 gives a degenerate support");
    }
    // Delta^2 H and m cancel; unit values keep the factors readable.
    let (variance, m) = (1.0, 1);
    let directional = uniform_mu2_fisher(variance, mu1, mu2, m)?.fisher;
    let chi2 = (mu2.powi(3) - mu1.powi(3)) / (3.0 * (mu2 - mu1));
    let f_chi2 = f22_quadratic(variance, chi2, m);
    let dchi2 = (-3.0 * mu2 * mu2 * mu1 + 2.0 * mu2.powi(3) + mu1.powi(3))
        / (3.0 * (mu2 - mu1).powi(2));
    Ok(directional / (f_chi2 * dchi2 * dchi2))
}

/// Binary-outcome Fisher information `(dP/dtheta)^2 / (P (1 - P))`.
pub fn binary_fisher(p: f64, one_minus_p: f64, dp_dtheta: f64) -> f64 {
    dp_dtheta * dp_dtheta / (p * one_minus_p)
}

/// Binary-outcome Fisher information for a parameter `theta` of the
/// density, with `dP*/dtheta` from a central difference of the quadrature
/// `P*`.
pub fn binary_fisher_finite_difference<Q, D>(
    family: D,
    q: &Q,
    m: usize,
    theta: f64,
    step: f64,
) -> Result<f64>
where
    Q: SurvivalFunction + ?Sized,
    D: Fn(f64) -> Result<IntervalDistribution>,
{
    let up = most_probable_survival(&family(theta + step)?, q, m)?;
    let down = most_probable_survival(&family(theta - step)?, q, m)?;
    let centre = most_probable_survival(&family(theta)?, q, m)?;
    centre.odds()?;
    let slope = (up.pstar - down.pstar) / (2.0 * step);
    Ok(binary_fisher(centre.pstar, centre.one_minus, slope))
}

/// One row of the Zeno-limit convergence table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ZenoLimitRow {
    pub m: usize,
    /// `T(m) = m chi_1`.
    pub total_time: f64,
    /// `m <p|ln q>`.
    pub log_survival: f64,
    pub one_minus_pstar: f64,
}

/// Tracks `m <p_m|ln q>` along a family with fixed expected total time.
pub fn zeno_limit_condition<Q, D>(
    family: D,
    q: &Q,
    total_time: f64,
    ms: &[usize],
) -> Result<Vec<ZenoLimitRow>>
where
    Q: SurvivalFunction + ?Sized,
    D: Fn(usize) -> Result<IntervalDistribution>,
{
    ms.iter()
        .map(|&m| {
            let p = family(m)?;
            let t = m as f64 * p.mean();
            if (t - total_time).abs() > 1e-9 * total_time.abs() {
                return arg(format!(
                    "family member for m = {m} has expected total time {t:e}, expected {total_time:e}"
                ));
            }
            let est = most_probable_survival(&p, q, m)?;
            Ok(ZenoLimitRow {
                m,
                total_time: t,
                log_survival: est.log,
                one_minus_pstar: est.one_minus,
            })
        })
        .collect()
}

/// Both sides of `F~_v = -m P*/(1-P*) I(P*)` for the formal moment choice
/// `chi = v`, where `I = -ln P*`. Such `chi` are not moments of any
/// density (`v_2 < 0`), so `P* > 1` here.
pub fn self_information_check(betas: &[f64], m: usize) -> Result<(f64, f64)> {
    let k = betas.len();
    let v: Vec<f64> = (0..k).map(|i| betas[i] / factorial(i + 1)).collect();
    let report = fim_report(betas, &v, m, k)?;
    let information = -report.pstar.ln();
    let rhs = -(m as f64) * report.pstar / report.one_minus_pstar * information;
    Ok((report.fim_eigenvalue, rhs))
}

/// `F_sm = 4 Delta^2 H_Pi`, the single-measurement Fisher information bound.
pub fn single_measurement_fisher(variance: f64) -> f64 {
    4.0 * variance
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::distributions::PointMass;
    use crate::spin::ClosedFormSurvival;

    const NS: f64 = 1e-9;

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs()
    }

    fn unit_q() -> ClosedFormSurvival<impl Fn(f64) -> f64 + Sync> {
        ClosedFormSurvival::new(|_| 1.0, 1.0)
    }

    #[test]
    fn trivial_survival() {
        let p = IntervalDistribution::uniform(0.1, 0.4).unwrap();
        let est = most_probable_survival(&p, &unit_q(), 10).unwrap();
        assert_eq!(est.pstar, 1.0);
        assert_eq!(est.one_minus, 0.0);
        assert!(matches!(est.odds(), Err(ZenoError::Singularity(_))));
        assert!(matches!(
            fio_eigenvalue(&unit_q(), 10, &est),
            Err(ZenoError::Singularity(_))
        ));
        let c = zeno_confinement(&p, &unit_q(), 10, ZENO_THRESHOLD).unwrap();
        assert_eq!((c.approx_error, c.exact_error), (0.0, 0.0));
    }

    #[test]
    fn dirac_survival_is_a_power() {
        let omega = 3.0;
        let q = ClosedFormSurvival::new(move |mu: f64| (omega * mu).cos().powi(2), 0.5 / omega);
        let p = IntervalDistribution::dirac(0.05).unwrap();
        let est = most_probable_survival(&p, &q, 40).unwrap();
        assert!(rel(est.pstar, q.q(0.05).powi(40)) < 1e-14);
    }

    #[test]
    fn zero_moments_give_unit_survival() {
        let est = survival_from_moments(&[0.0, -2.0], &[0.0, 0.0], 100, 2).unwrap();
        assert_eq!(est.pstar, 1.0);
        assert!(survival_from_moments(&[0.0], &[0.0, 0.0], 1, 2).is_err());
        assert!(survival_from_moments(&[0.0], &[0.0], 0, 1).is_err());
    }

    #[test]
    fn one_minus_pstar_is_stable_near_one() {
        // Taylor oracle for -expm1(L) is exact to double precision for tiny L.
        for &target in &[1e-3, 1e-6, 1e-9, 1e-12] {
            let l: f64 = -target;
            let oracle = -(l + l * l / 2.0 + l * l * l / 6.0 + l.powi(4) / 24.0);
            let est = SurvivalEstimate::from_log(l);
            assert!(rel(est.one_minus, oracle) <= 1e-10, "1-P* = {target}");
        }
    }

    #[test]
    fn fim_is_rank_one() {
        let betas = [0.0, -2.0, 0.0, -4.0, 0.0, -32.0, 0.0, -544.0];
        let u = IntervalDistribution::uniform(0.01, 0.06).unwrap();
        let chi = u.moments(8);
        let r = fim_report(&betas, chi.as_slice(), 500, 8).unwrap();
        assert!(r.max_minor_ratio() <= 1e-10);
        // trace of a rank-one matrix is its eigenvalue
        let trace: f64 = (0..8).map(|i| r.fim[i][i]).sum();
        assert!(rel(trace, r.fim_eigenvalue) < 1e-12);
        for (i, v) in r.eigenvector.iter().enumerate() {
            assert_eq!(*v, betas[i] / factorial(i + 1));
        }
        let p = pstar_from_eigenvalue(r.fim_eigenvalue, 500, r.eigenvector_norm_sq());
        assert!(rel(p, r.pstar) < 1e-12);
    }

    #[test]
    fn self_information_identity() {
        let betas = [0.0, -2.0, 0.0, -4.0];
        let (lhs, rhs) = self_information_check(&betas, 3).unwrap();
        assert!(rel(lhs, rhs) < 1e-9);
    }

    #[test]
    fn chain_rule() {
        let r = chain_rule_check(10.0 * NS, 60.0 * NS).unwrap();
        assert!((r - 1.0).abs() < 1e-12);
        assert!(chain_rule_check(3.0, 3.0).is_err());
    }

    #[test]
    fn orthogonal_direction_has_no_information() {
        let omega = 2.0;
        let q = ClosedFormSurvival::new(move |mu: f64| (omega * mu).cos().powi(2), 0.5 / omega);
        let (a, b, c) = (0.05, 0.1, 0.2);
        let (la, lb, lc) = (q.ln_q(a).unwrap(), q.ln_q(b).unwrap(), q.ln_q(c).unwrap());
        // w_a + w_b + w_c = 0 and w_a la + w_b lb + w_c lc = 0 with w_a = 1
        let wc = (lb - la) / (lc - lb);
        let wb = -1.0 - wc;
        let f = PerturbationDirection::new(
            vec![
                PointMass { at: a, weight: 1.0 },
                PointMass { at: b, weight: wb },
                PointMass { at: c, weight: wc },
            ],
            None,
            "orthogonal",
        )
        .unwrap();
        let p = IntervalDistribution::uniform(0.05, 0.2).unwrap();
        let betas = [0.0, -2.0 * omega * omega];
        let d = fisher_along_direction(&p, &f, &q, &betas, 10).unwrap();
        assert_eq!(d.functional, 0.0);
        assert!(d.crb.is_none());
    }

    #[test]
    fn zero_perturbation() {
        let q = ClosedFormSurvival::new(|mu: f64| (mu).cos().powi(2), 0.5);
        let d = functional_derivative_pairing(&PerturbationDirection::zero(), &q, 5, 0.9).unwrap();
        assert_eq!(d, 0.0);
    }

    #[test]
    fn uniform_mu2_fisher_is_linear_in_m() {
        let var = 9.0 * (2.0 * std::f64::consts::PI * 5e3_f64).powi(2);
        let a = uniform_mu2_fisher(var, 10.0 * NS, 60.0 * NS, 2500).unwrap();
        let b = uniform_mu2_fisher(var, 10.0 * NS, 60.0 * NS, 5000).unwrap();
        assert_eq!(b.fisher / a.fisher, 2.0);
        assert!(uniform_mu2_fisher(var, 1.0, 1.0, 5).is_err());
    }
}
