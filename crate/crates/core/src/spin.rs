//! Local spin Hamiltonians, Zeno subspaces and the single-measurement
//! survival function.
//!
//! For a rank-one Zeno subspace spanned by `psi0`, the survival probability
//! after free evolution for a time `mu` is
//!
//! ```text
//! q(mu) = |<psi0| exp(-i H mu) |psi0>|^2 = |sum_l w_l exp(-i E_l mu)|^2
//! ```
//!
//! where `E_l` are the distinct eigenvalues of `H` and `w_l` the weight of
//! `psi0` on each eigenspace. [`SurvivalModel`] precomputes these weights
//! once so that `q` costs a handful of `sin_cos` calls per evaluation.

use num_complex::Complex64;

use crate::error::{arg, Result, ZenoError};
use crate::linalg::{self, eig_hermitian, kron_chain, ComplexMatrix, SpectralDecomposition, StateVector};

/// Largest number of spins with dense storage.
pub const MAX_SPINS: usize = 12;

/// Default moment truncation order.
pub const DEFAULT_K: usize = 8;

/// Largest derivative order supported by the finite-difference extractor.
pub const MAX_FD_ORDER: usize = 8;

fn check_spins(n: usize) -> Result<()> {
    if n == 0 || n > MAX_SPINS {
        return Err(ZenoError::Resource(format!(
            "number of spins must be in 1..={MAX_SPINS}, got {n}"
        )));
    }
    Ok(())
}

/// `H = omega * sum_n alpha_n . sigma_n` on `n` spins.
#[derive(Clone, Debug)]
pub struct SpinModel {
    n: usize,
    omega: f64,
    alphas: Vec<[f64; 3]>,
    hamiltonian: ComplexMatrix,
}

/// Builds the local spin Hamiltonian `omega * sum_n alpha_n . sigma_n`.
///
/// `omega` is an angular frequency in rad/s. The coupling vectors are stored
/// normalised.
pub fn build_spin_model(n: usize, omega: f64, alphas: &[[f64; 3]]) -> Result<SpinModel> {
    check_spins(n)?;
    if !(omega > 0.0 && omega.is_finite()) {
        return arg(format!("omega must be positive and finite, got {omega}"));
    }
    if alphas.len() != n {
        return arg(format!("expected {n} coupling vectors, got {}", alphas.len()));
    }
    let alphas = alphas
        .iter()
        .enumerate()
        .map(|(i, a)| {
            let norm = a.iter().map(|x| x * x).sum::<f64>().sqrt();
            if !(norm > 0.0 && norm.is_finite()) {
                return arg(format!("coupling vector {i} = {a:?} cannot be normalised"));
            }
            Ok(a.map(|x| x / norm))
        })
        .collect::<Result<Vec<_>>>()?;

    let paulis = [
        ComplexMatrix::pauli_x(),
        ComplexMatrix::pauli_y(),
        ComplexMatrix::pauli_z(),
    ];
    let dim = 1 << n;
    let mut hamiltonian = ComplexMatrix::zeros(dim);
    for (site, alpha) in alphas.iter().enumerate() {
        let mut local = ComplexMatrix::zeros(2);
        for (a, p) in alpha.iter().zip(&paulis) {
            local = &local + &(p * *a);
        }
        let mut factors = vec![ComplexMatrix::identity(2); n];
        factors[site] = local;
        hamiltonian = &hamiltonian + &kron_chain(&factors)?;
    }
    let hamiltonian = &hamiltonian * omega;
    Ok(SpinModel {
        n,
        omega,
        alphas,
        hamiltonian,
    })
}

impl SpinModel {
    /// Every coupling along `x`.
    pub fn all_x(n: usize, omega: f64) -> Result<Self> {
        build_spin_model(n, omega, &vec![[1.0, 0.0, 0.0]; n])
    }

    /// Every coupling along `z`.
    pub fn all_z(n: usize, omega: f64) -> Result<Self> {
        build_spin_model(n, omega, &vec![[0.0, 0.0, 1.0]; n])
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn omega(&self) -> f64 {
        self.omega
    }

    pub fn alphas(&self) -> &[[f64; 3]] {
        &self.alphas
    }

    pub fn hamiltonian(&self) -> &ComplexMatrix {
        &self.hamiltonian
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }

    pub fn decompose(&self) -> Result<SpectralDecomposition> {
        eig_hermitian(&self.hamiltonian)
    }
}

/// `|00...0>` on `n` spins.
pub fn product_zero_state(n: usize) -> Result<StateVector> {
    check_spins(n)?;
    StateVector::basis(1 << n, 0)
}

/// `(|0...0> - i |1...1>) / sqrt(2)` on `n` spins.
pub fn ghz_state(n: usize) -> Result<StateVector> {
    check_spins(n)?;
    let dim = 1 << n;
    let mut amps = vec![Complex64::new(0.0, 0.0); dim];
    let s = std::f64::consts::FRAC_1_SQRT_2;
    amps[0] = Complex64::new(s, 0.0);
    amps[dim - 1] = Complex64::new(0.0, -s);
    StateVector::normalized(amps)
}

/// Measurement subspace `Pi H` given by an orthonormal basis.
#[derive(Clone, Debug)]
pub struct ZenoSubspace {
    projector: ComplexMatrix,
    basis: Vec<StateVector>,
    generating_state: Option<StateVector>,
}

impl ZenoSubspace {
    /// `Pi = |psi0><psi0|`.
    pub fn from_state(psi0: &StateVector) -> Self {
        Self {
            projector: psi0.projector(),
            basis: vec![psi0.clone()],
            generating_state: Some(psi0.clone()),
        }
    }

    /// Projector onto the span of orthonormal `states`.
    pub fn from_orthonormal(states: Vec<StateVector>) -> Result<Self> {
        let Some(first) = states.first() else {
            return arg("a Zeno subspace needs at least one basis state");
        };
        let dim = first.dim();
        for (i, a) in states.iter().enumerate() {
            if a.dim() != dim {
                return arg("basis states have different dimensions");
            }
            for b in &states[..i] {
                let overlap = a.inner(b).norm();
                if overlap > 1e-10 {
                    return arg(format!("basis states are not orthogonal (overlap {overlap:e})"));
                }
            }
        }
        let mut projector = ComplexMatrix::zeros(dim);
        for s in &states {
            projector = &projector + &s.projector();
        }
        let generating_state = (states.len() == 1).then(|| states[0].clone());
        Ok(Self {
            projector,
            basis: states,
            generating_state,
        })
    }

    /// Validates an explicit projector and extracts an orthonormal basis of
    /// its range.
    pub fn from_projector(projector: ComplexMatrix) -> Result<Self> {
        let scale = projector.max_abs().max(1.0);
        if projector.hermiticity_defect() > linalg::HERMITIAN_TOL * scale {
            return arg("projector is not Hermitian");
        }
        let sq = projector.matmul(&projector)?;
        let idem = (&sq - &projector).frobenius_norm();
        if idem > 1e-10 {
            return arg(format!("projector is not idempotent (|P^2 - P| = {idem:e})"));
        }
        let dec = eig_hermitian(&projector)?;
        let v = dec.eigenvectors();
        let states = dec
            .eigenvalues()
            .iter()
            .enumerate()
            .filter(|(_, &l)| l > 0.5)
            .map(|(k, _)| {
                StateVector::normalized((0..v.dim()).map(|i| v[(i, k)]).collect())
            })
            .collect::<Result<Vec<_>>>()?;
        if states.is_empty() {
            return arg("projector has rank zero");
        }
        let mut out = Self::from_orthonormal(states)?;
        out.projector = projector;
        Ok(out)
    }

    pub fn rank(&self) -> usize {
        self.basis.len()
    }

    pub fn dim(&self) -> usize {
        self.projector.dim()
    }

    pub fn projector(&self) -> &ComplexMatrix {
        &self.projector
    }

    pub fn basis(&self) -> &[StateVector] {
        &self.basis
    }

    pub fn generating_state(&self) -> Option<&StateVector> {
        self.generating_state.as_ref()
    }

    /// `Pi v`.
    pub fn project(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        self.projector.matvec(v)
    }
}

/// `<H_Pi^2> - <H_Pi>^2` in `psi0` with `H_Pi = H - Pi H Pi`, in s^-2.
pub fn variance_hpi(model: &SpinModel, psi0: &StateVector, pi: &ZenoSubspace) -> Result<f64> {
    let h = model.hamiltonian();
    if psi0.dim() != h.dim() || pi.dim() != h.dim() {
        return arg(format!(
            "dimension mismatch: H is {}, state {}, projector {}",
            h.dim(),
            psi0.dim(),
            pi.dim()
        ));
    }
    let psi = psi0.amplitudes();
    let h_psi = h.matvec(psi)?;
    let pi_h_pi_psi = pi.project(&h.matvec(&pi.project(psi)?)?)?;
    let h_pi_psi: Vec<Complex64> = h_psi.iter().zip(&pi_h_pi_psi).map(|(a, b)| a - b).collect();
    let mean = linalg::inner(psi, &h_pi_psi).re;
    let second = h_pi_psi.iter().map(|z| z.norm_sqr()).sum::<f64>();
    Ok((second - mean * mean).max(0.0))
}

/// `Tr[Pi U(mu) rho0 U(mu)^dagger]` for the pure state `psi0`, computed by
/// full state evolution. This decomposes `H` on every call and serves as the
/// reference route for [`SurvivalModel::q`].
pub fn survival_q(model: &SpinModel, pi: &ZenoSubspace, psi0: &StateVector, mu: f64) -> Result<f64> {
    if psi0.dim() != model.dim() || pi.dim() != model.dim() {
        return arg("dimension mismatch between model, projector and state");
    }
    if !(mu >= 0.0) {
        return arg(format!("waiting time must be non-negative, got {mu}"));
    }
    let evolved = model.decompose()?.evolve(mu, psi0)?;
    let projected = pi.project(evolved.amplitudes())?;
    Ok(linalg::l2_norm(&projected).powi(2).min(1.0))
}

/// Anything that can evaluate the single-measurement survival probability.
pub trait SurvivalFunction: Sync {
    /// `q(mu)` for `mu` in seconds.
    fn q(&self, mu: f64) -> f64;

    /// Upper end of the window on which `q` is trusted to stay positive.
    fn mu_max(&self) -> f64;

    /// `ln q(mu)`, failing where `q` is not strictly positive.
    fn ln_q(&self, mu: f64) -> Result<f64> {
        let q = self.q(mu);
        if q > 0.0 {
            Ok(q.ln())
        } else {
            Err(ZenoError::Evaluation(format!("q({mu:e}) = {q:e} is not positive")))
        }
    }
}

/// Survival function given by a closure, e.g. a closed-form `cos^2`.
pub struct ClosedFormSurvival<F> {
    f: F,
    mu_max: f64,
}

impl<F: Fn(f64) -> f64 + Sync> ClosedFormSurvival<F> {
    pub fn new(f: F, mu_max: f64) -> Self {
        Self { f, mu_max }
    }
}

impl<F: Fn(f64) -> f64 + Sync> SurvivalFunction for ClosedFormSurvival<F> {
    fn q(&self, mu: f64) -> f64 {
        (self.f)(mu)
    }

    fn mu_max(&self) -> f64 {
        self.mu_max
    }
}

/// Rank-one survival function `q(mu) = |<psi0|exp(-iH mu)|psi0>|^2` with
/// its short-time expansion.
#[derive(Clone, Debug)]
pub struct SurvivalModel {
    /// Distinct eigenvalues shifted by `<H>`, rad/s.
    levels: Vec<f64>,
    weights: Vec<f64>,
    variance: f64,
    mu_max: f64,
    betas: Vec<f64>,
}

impl SurvivalModel {
    /// Builds the survival model for `Pi = |psi0><psi0|`.
    pub fn new(model: &SpinModel, pi: &ZenoSubspace) -> Result<Self> {
        let dec = model.decompose()?;
        Self::from_decomposition(&dec, pi)
    }

    /// Same as [`Self::new`] but reuses an existing decomposition of `H`.
    pub fn from_decomposition(dec: &SpectralDecomposition, pi: &ZenoSubspace) -> Result<Self> {
        let psi0 = match (pi.rank(), pi.generating_state()) {
            (1, Some(psi)) => psi,
            _ => {
                return arg(format!(
                    "the product survival model needs a rank-one subspace, got rank {}",
                    pi.rank()
                ))
            }
        };
        if psi0.dim() != dec.dim() {
            return arg("state and Hamiltonian dimensions differ");
        }
        let coeffs = dec.to_eigenbasis(psi0.amplitudes())?;
        let energies = dec.eigenvalues();
        let scale = energies.iter().fold(0.0_f64, |m, e| m.max(e.abs()));
        let tol = 1e-10 * scale;

        let mut levels: Vec<f64> = Vec::new();
        let mut weights: Vec<f64> = Vec::new();
        let mut anchor = f64::NEG_INFINITY;
        for (&e, c) in energies.iter().zip(&coeffs) {
            let w = c.norm_sqr();
            if e - anchor > tol || levels.is_empty() {
                anchor = e;
                levels.push(e);
                weights.push(w);
            } else {
                let last = weights.len() - 1;
                // weight-averaged position of a numerically split level
                let total = weights[last] + w;
                if total > 0.0 {
                    levels[last] = (levels[last] * weights[last] + e * w) / total;
                }
                weights[last] = total;
            }
        }
        let (levels, weights): (Vec<f64>, Vec<f64>) = levels
            .into_iter()
            .zip(weights)
            .filter(|&(_, w)| w > 0.0)
            .unzip();
        let norm: f64 = weights.iter().sum();
        let weights: Vec<f64> = weights.iter().map(|w| w / norm).collect();
        let mean: f64 = levels.iter().zip(&weights).map(|(e, w)| e * w).sum();
        let levels: Vec<f64> = levels.iter().map(|e| e - mean).collect();
        Ok(Self::from_levels(levels, weights))
    }

    /// Builds the model directly from centred levels and normalised weights.
    fn from_levels(levels: Vec<f64>, weights: Vec<f64>) -> Self {
        let variance: f64 = levels.iter().zip(&weights).map(|(e, w)| w * e * e).sum();
        let mu_max = if variance > 0.0 {
            0.5 / variance.sqrt()
        } else {
            f64::INFINITY
        };
        let mut out = Self {
            levels,
            weights,
            variance,
            mu_max,
            betas: Vec::new(),
        };
        out.betas = out.betas_up_to(DEFAULT_K);
        out
    }

    /// `Delta^2 H_Pi` in s^-2.
    pub fn variance_hpi(&self) -> f64 {
        self.variance
    }

    /// `beta_1 .. beta_K` for the default truncation, `beta_k` in s^-k.
    pub fn betas(&self) -> &[f64] {
        &self.betas
    }

    pub fn levels(&self) -> &[f64] {
        &self.levels
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// Replaces the trusted evaluation window.
    pub fn with_mu_max(mut self, mu_max: f64) -> Self {
        self.mu_max = mu_max;
        self
    }

    /// `q` at any real `mu`; negative times evolve with `exp(+i H |mu|)`.
    pub fn q_signed(&self, mu: f64) -> f64 {
        1.0 - self.one_minus_q(mu)
    }

    /// `1 - q(mu)` without cancellation near `mu = 0`.
    ///
    /// With the amplitude written as `1 - a - i b`, where
    /// `a = sum w (1 - cos E mu)` and `b = sum w sin E mu`, one has
    /// `1 - q = 2a - a^2 - b^2`.
    pub fn one_minus_q(&self, mu: f64) -> f64 {
        if mu == 0.0 {
            return 0.0;
        }
        let (mut a, mut b) = (0.0, 0.0);
        for (&e, &w) in self.levels.iter().zip(&self.weights) {
            let half = 0.5 * e * mu;
            let s = half.sin();
            a += 2.0 * w * s * s;
            b += w * (e * mu).sin();
        }
        (a * (2.0 - a) - b * b).clamp(0.0, 1.0)
    }

    /// Exact derivatives `beta_k = d^k ln q / d mu^k` at zero, `k = 1..=k_max`.
    ///
    /// The Taylor coefficients of the amplitude `<psi0|exp(-iH mu)|psi0>` are
    /// the energy moments of `psi0`; `q` and then `ln q` follow from power
    /// series products and the logarithm recursion.
    pub fn betas_up_to(&self, k_max: usize) -> Vec<f64> {
        if self.variance <= 0.0 {
            return vec![0.0; k_max];
        }
        // Work in natural units x = sigma * mu to keep powers bounded.
        let sigma = self.variance.sqrt();
        let moments: Vec<f64> = (0..=k_max)
            .map(|k| {
                self.levels
                    .iter()
                    .zip(&self.weights)
                    .map(|(e, w)| w * (e / sigma).powi(k as i32))
                    .sum()
            })
            .collect();
        // Amplitude coefficients a_k / k! with a_k = (-i)^k M_k.
        let minus_i_pow = |k: usize| match k % 4 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        };
        let mut fact = vec![1.0_f64; k_max + 1];
        for k in 1..=k_max {
            fact[k] = fact[k - 1] * k as f64;
        }
        let amp: Vec<Complex64> = (0..=k_max)
            .map(|k| minus_i_pow(k) * moments[k] / fact[k])
            .collect();
        // q = amp * conj(amp) as power series.
        let c: Vec<f64> = (0..=k_max)
            .map(|n| (0..=n).map(|k| (amp[k] * amp[n - k].conj()).re).sum())
            .collect();
        // ln q: l_n = (c_n - (1/n) sum_{k<n} k l_k c_{n-k}) / c_0, c_0 = 1.
        let mut l = vec![0.0; k_max + 1];
        for n in 1..=k_max {
            let acc: f64 = (1..n).map(|k| k as f64 * l[k] * c[n - k]).sum();
            l[n] = (c[n] - acc / n as f64) / c[0];
        }
        (1..=k_max)
            .map(|n| l[n] * fact[n] * sigma.powi(n as i32))
            .collect()
    }

    /// Finite-difference estimate of the betas, see [`beta_coefficients`].
    pub fn finite_difference_betas(&self, k_max: usize) -> Result<Vec<f64>> {
        if self.variance <= 0.0 {
            return arg("finite differences need a non-zero variance to set the step");
        }
        beta_coefficients(|mu| self.q_signed(mu), k_max, 1.0 / self.variance.sqrt())
    }
}

impl SurvivalFunction for SurvivalModel {
    fn q(&self, mu: f64) -> f64 {
        self.q_signed(mu)
    }

    fn ln_q(&self, mu: f64) -> Result<f64> {
        let d = self.one_minus_q(mu);
        if d >= 1.0 {
            return Err(ZenoError::Evaluation(format!(
                "q({mu:e}) = 0, ln q is undefined"
            )));
        }
        Ok((-d).ln_1p())
    }

    fn mu_max(&self) -> f64 {
        self.mu_max
    }
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Central finite-difference derivative of order `k` at zero with step `h`.
fn central_difference<F>(ln_q: &F, k: usize, h: f64) -> Result<f64>
where
    F: Fn(f64) -> Result<f64>,
{
    let mut acc = 0.0;
    for j in 0..=k {
        let x = (k as f64 / 2.0 - j as f64) * h;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        acc += sign * binomial(k, j) * ln_q(x)?;
    }
    Ok(acc / h.powi(k as i32))
}

/// Derivatives `beta_k` of `ln q` at zero by central differences with two
/// levels of Richardson extrapolation.
///
/// `char_time` sets the stencil spacing `h = 0.05 * char_time`; for a
/// coherent model use `1 / sqrt(Delta^2 H_Pi)`. The result carries units
/// of `time^-k`. Orders above 6 lose most of their digits to cancellation.
pub fn beta_coefficients<F>(q: F, k_max: usize, char_time: f64) -> Result<Vec<f64>>
where
    F: Fn(f64) -> f64,
{
    if k_max > MAX_FD_ORDER {
        return arg(format!("finite-difference order is limited to {MAX_FD_ORDER}, got {k_max}"));
    }
    if !(char_time > 0.0 && char_time.is_finite()) {
        return arg(format!("characteristic time must be positive, got {char_time}"));
    }
    let ln_q = |mu: f64| {
        let v = q(mu);
        if v > 0.0 {
            Ok(v.ln())
        } else {
            Err(ZenoError::Evaluation(format!(
                "q({mu:e}) = {v:e} is not positive inside the stencil"
            )))
        }
    };
    let h = 0.05 * char_time;
    (1..=k_max)
        .map(|k| {
            let d0 = central_difference(&ln_q, k, h)?;
            let d1 = central_difference(&ln_q, k, h / 2.0)?;
            let d2 = central_difference(&ln_q, k, h / 4.0)?;
            let r0 = (4.0 * d1 - d0) / 3.0;
            let r1 = (4.0 * d2 - d1) / 3.0;
            Ok((16.0 * r1 - r0) / 15.0)
        })
        .collect()
}
