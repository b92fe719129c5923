//! Dense complex linear algebra for exact unitary evolution of small spin
//! systems.
//!
//! Matrices are square and stored row-major. Time evolution is always done
//! through the spectral decomposition of a Hermitian generator: the
//! decomposition is computed once, after which `exp(-i H mu) psi` costs two
//! dense matrix-vector products for any `mu`.

use std::ops::{Add, Index, IndexMut, Mul, Sub};

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{arg, Result, ZenoError};

/// Largest supported Hilbert-space dimension (12 spins).
pub const MAX_DIM: usize = 1 << 12;

/// Relative tolerance used to accept a matrix as Hermitian.
pub const HERMITIAN_TOL: f64 = 1e-12;

const NORM_TOL: f64 = 1e-12;

const ZERO: Complex64 = Complex64::new(0.0, 0.0);
const ONE: Complex64 = Complex64::new(1.0, 0.0);

fn check_dim(dim: usize) -> Result<()> {
    if dim == 0 {
        return arg("matrix dimension must be at least 1");
    }
    if dim > MAX_DIM {
        return Err(ZenoError::Resource(format!(
            "dimension {dim} exceeds the dense-storage cap of {MAX_DIM}"
        )));
    }
    Ok(())
}

/// Square dense complex matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexMatrix {
    dim: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(dim: usize) -> Self {
        Self {
            dim,
            data: vec![ZERO; dim * dim],
        }
    }

    pub fn identity(dim: usize) -> Self {
        let mut m = Self::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = ONE;
        }
        m
    }

    /// Builds a matrix from row-major entries.
    pub fn from_row_major(dim: usize, data: Vec<Complex64>) -> Result<Self> {
        check_dim(dim)?;
        if data.len() != dim * dim {
            return arg(format!(
                "expected {} entries for a {dim}x{dim} matrix, got {}",
                dim * dim,
                data.len()
            ));
        }
        Ok(Self { dim, data })
    }

    pub fn from_fn(dim: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(dim * dim);
        for i in 0..dim {
            for j in 0..dim {
                data.push(f(i, j));
            }
        }
        Self { dim, data }
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = Complex64::new(d, 0.0);
        }
        m
    }

    pub fn pauli_x() -> Self {
        Self::from_fn(2, |i, j| if i != j { ONE } else { ZERO })
    }

    pub fn pauli_y() -> Self {
        let i = Complex64::i();
        Self {
            dim: 2,
            data: vec![ZERO, -i, i, ZERO],
        }
    }

    pub fn pauli_z() -> Self {
        Self::from_real_diagonal(&[1.0, -1.0])
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn as_slice(&self) -> &[Complex64] {
        &self.data
    }

    #[inline]
    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.dim..(i + 1) * self.dim]
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.dim, |i, j| self[(j, i)].conj())
    }

    pub fn scale(&self, s: Complex64) -> Self {
        Self {
            dim: self.dim,
            data: self.data.iter().map(|&z| z * s).collect(),
        }
    }

    pub fn trace(&self) -> Complex64 {
        (0..self.dim).map(|i| self[(i, i)]).sum()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// `max |A_ij - conj(A_ji)|`.
    pub fn hermiticity_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self[(i, j)] - self[(j, i)].conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermiticity_defect() <= HERMITIAN_TOL * self.max_abs()
    }

    pub fn matmul(&self, rhs: &Self) -> Result<Self> {
        if self.dim != rhs.dim {
            return arg(format!(
                "cannot multiply {0}x{0} by {1}x{1}",
                self.dim, rhs.dim
            ));
        }
        let n = self.dim;
        let mut out = Self::zeros(n);
        for i in 0..n {
            let out_row = &mut out.data[i * n..(i + 1) * n];
            for k in 0..n {
                let a = self.data[i * n + k];
                if a == ZERO {
                    continue;
                }
                for (o, b) in out_row.iter_mut().zip(rhs.row(k)) {
                    *o += a * b;
                }
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return arg(format!(
                "vector of length {} does not match matrix dimension {}",
                v.len(),
                self.dim
            ));
        }
        Ok((0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect())
    }

    /// `A^dagger v` without materialising the adjoint.
    pub fn adjoint_matvec(&self, v: &[Complex64]) -> Result<Vec<Complex64>> {
        if v.len() != self.dim {
            return arg(format!(
                "vector of length {} does not match matrix dimension {}",
                v.len(),
                self.dim
            ));
        }
        let mut out = vec![ZERO; self.dim];
        for (row, &vi) in v.iter().enumerate() {
            if vi == ZERO {
                continue;
            }
            for (o, a) in out.iter_mut().zip(self.row(row)) {
                *o += a.conj() * vi;
            }
        }
        Ok(out)
    }

    fn zip_with(&self, rhs: &Self, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        assert_eq!(self.dim, rhs.dim, "matrix dimensions differ");
        Self {
            dim: self.dim,
            data: self
                .data
                .iter()
                .zip(&rhs.data)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        }
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        &self.data[i * self.dim + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        &mut self.data[i * self.dim + j]
    }
}

impl Add for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn add(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn sub(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, s: f64) -> ComplexMatrix {
        self.scale(Complex64::new(s, 0.0))
    }
}

/// Kronecker product of two square matrices.
pub fn kron(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let (na, nb) = (a.dim, b.dim);
    let n = na * nb;
    let mut out = ComplexMatrix::zeros(n);
    for ia in 0..na {
        for ja in 0..na {
            let s = a[(ia, ja)];
            if s == ZERO {
                continue;
            }
            for ib in 0..nb {
                let dst = (ia * nb + ib) * n + ja * nb;
                for (o, &x) in out.data[dst..dst + nb].iter_mut().zip(b.row(ib)) {
                    *o = s * x;
                }
            }
        }
    }
    out
}

/// Kronecker product of `factors` in list order; the first factor acts on
/// the most significant index.
pub fn kron_chain(factors: &[ComplexMatrix]) -> Result<ComplexMatrix> {
    let (first, rest) = factors
        .split_first()
        .ok_or_else(|| ZenoError::Argument("kron_chain needs at least one factor".into()))?;
    let total = factors
        .iter()
        .try_fold(1_usize, |acc, f| acc.checked_mul(f.dim))
        .filter(|&d| d <= MAX_DIM);
    if total.is_none() {
        return Err(ZenoError::Resource(format!(
            "Kronecker product exceeds the dense-storage cap of {MAX_DIM}"
        )));
    }
    Ok(rest.iter().fold(first.clone(), |acc, f| kron(&acc, f)))
}

/// Normalised pure state.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    amplitudes: Vec<Complex64>,
}

impl StateVector {
    /// Wraps amplitudes that must already have unit L2 norm.
    pub fn new(amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if (norm - 1.0).abs() > NORM_TOL {
            return arg(format!("state has norm {norm}, expected 1"));
        }
        Ok(Self { amplitudes })
    }

    /// Rescales arbitrary non-zero amplitudes to unit norm.
    pub fn normalized(mut amplitudes: Vec<Complex64>) -> Result<Self> {
        check_dim(amplitudes.len())?;
        let norm = l2_norm(&amplitudes);
        if !(norm > 0.0 && norm.is_finite()) {
            return arg("cannot normalise a zero or non-finite vector");
        }
        amplitudes.iter_mut().for_each(|z| *z /= norm);
        Ok(Self { amplitudes })
    }

    /// Computational basis state `|index>`.
    pub fn basis(dim: usize, index: usize) -> Result<Self> {
        check_dim(dim)?;
        if index >= dim {
            return arg(format!("basis index {index} out of range for dim {dim}"));
        }
        let mut amplitudes = vec![ZERO; dim];
        amplitudes[index] = ONE;
        Ok(Self { amplitudes })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    #[inline]
    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn norm(&self) -> f64 {
        l2_norm(&self.amplitudes)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Complex64 {
        inner(&self.amplitudes, &other.amplitudes)
    }

    /// `<self| A |self>`.
    pub fn expectation(&self, a: &ComplexMatrix) -> Result<Complex64> {
        let av = a.matvec(&self.amplitudes)?;
        Ok(inner(&self.amplitudes, &av))
    }

    /// `|self><self|`.
    pub fn projector(&self) -> ComplexMatrix {
        let a = &self.amplitudes;
        ComplexMatrix::from_fn(a.len(), |i, j| a[i] * a[j].conj())
    }
}

pub(crate) fn inner(a: &[Complex64], b: &[Complex64]) -> Complex64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

pub(crate) fn l2_norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Eigendecomposition `A = V diag(lambda) V^dagger` of a Hermitian matrix.
///
/// Eigenvalues are sorted ascending; column `k` of `eigenvectors` belongs to
/// `eigenvalues[k]`.
#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    eigenvectors: ComplexMatrix,
}

impl SpectralDecomposition {
    #[inline]
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    #[inline]
    pub fn eigenvectors(&self) -> &ComplexMatrix {
        &self.eigenvectors
    }

    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `V diag(lambda) V^dagger`.
    pub fn reconstruct(&self) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let mut scaled = v.clone();
        for i in 0..n {
            for (k, &l) in self.eigenvalues.iter().enumerate() {
                scaled[(i, k)] *= l;
            }
        }
        scaled
            .matmul(&v.adjoint())
            .expect("dimensions agree by construction")
    }

    /// Dense propagator `exp(-i A mu)`.
    pub fn unitary(&self, mu: f64) -> ComplexMatrix {
        let v = &self.eigenvectors;
        let n = self.dim();
        let mut scaled = v.clone();
        for i in 0..n {
            for (k, &l) in self.eigenvalues.iter().enumerate() {
                scaled[(i, k)] *= Complex64::from_polar(1.0, -l * mu);
            }
        }
        scaled
            .matmul(&v.adjoint())
            .expect("dimensions agree by construction")
    }

    /// Coordinates `V^dagger psi` of a vector in the eigenbasis.
    pub fn to_eigenbasis(&self, psi: &[Complex64]) -> Result<Vec<Complex64>> {
        self.eigenvectors.adjoint_matvec(psi)
    }

    /// Inverse of [`Self::to_eigenbasis`].
    pub fn from_eigenbasis(&self, coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
        self.eigenvectors.matvec(coeffs)
    }

    /// `exp(-i A mu) psi`. Negative `mu` is allowed and runs the evolution
    /// backwards.
    pub fn evolve(&self, mu: f64, psi: &StateVector) -> Result<StateVector> {
        let mut c = self.to_eigenbasis(psi.amplitudes())?;
        for (ck, &l) in c.iter_mut().zip(&self.eigenvalues) {
            *ck *= Complex64::from_polar(1.0, -l * mu);
        }
        Ok(StateVector {
            amplitudes: self.from_eigenbasis(&c)?,
        })
    }
}

/// Eigendecomposition of a Hermitian matrix.
pub fn eig_hermitian(a: &ComplexMatrix) -> Result<SpectralDecomposition> {
    let defect = a.hermiticity_defect();
    if defect > HERMITIAN_TOL * a.max_abs() {
        return arg(format!(
            "matrix is not Hermitian (max |A_ij - conj A_ji| = {defect:e})"
        ));
    }
    let n = a.dim();
    // Symmetrise so rounding-level anti-Hermitian parts do not leak in.
    let m = DMatrix::from_fn(n, n, |i, j| (a[(i, j)] + a[(j, i)].conj()) * 0.5);
    let eig = SymmetricEigen::try_new(m, f64::EPSILON, 0).ok_or_else(|| {
        ZenoError::Evaluation("Hermitian eigensolver did not converge".into())
    })?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
    let eigenvalues = order.iter().map(|&k| eig.eigenvalues[k]).collect();
    let eigenvectors =
        ComplexMatrix::from_fn(n, |i, col| eig.eigenvectors[(i, order[col])]);
    Ok(SpectralDecomposition {
        eigenvalues,
        eigenvectors,
    })
}

/// `exp(-i H mu) psi` for a Hermitian `H`.
///
/// This decomposes `H` on every call; reuse a [`SpectralDecomposition`]
/// when evolving with the same generator repeatedly.
pub fn evolve(h: &ComplexMatrix, mu: f64, psi: &StateVector) -> Result<StateVector> {
    if h.dim() != psi.dim() {
        return arg(format!(
            "Hamiltonian dim {} does not match state dim {}",
            h.dim(),
            psi.dim()
        ));
    }
    if !(mu >= 0.0) {
        return arg(format!("evolution time must be non-negative, got {mu}"));
    }
    eig_hermitian(h)?.evolve(mu, psi)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub(crate) fn random_hermitian(dim: usize, rng: &mut impl Rng) -> ComplexMatrix {
        let mut m = ComplexMatrix::zeros(dim);
        for i in 0..dim {
            m[(i, i)] = c(rng.random_range(-1.0..1.0), 0.0);
            for j in i + 1..dim {
                let z = c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
                m[(i, j)] = z;
                m[(j, i)] = z.conj();
            }
        }
        m
    }

    #[test]
    fn kron_of_identities_is_identity() {
        let i2 = ComplexMatrix::identity(2);
        assert_eq!(kron_chain(&[i2.clone(), i2]).unwrap(), ComplexMatrix::identity(4));
    }

    #[test]
    fn double_bit_flip() {
        let xx = kron_chain(&[ComplexMatrix::pauli_x(), ComplexMatrix::pauli_x()]).unwrap();
        let out = xx.matvec(StateVector::basis(4, 0).unwrap().amplitudes()).unwrap();
        assert_eq!(out, StateVector::basis(4, 3).unwrap().amplitudes());
    }

    #[test]
    fn kron_chain_dimensions() {
        let f = vec![ComplexMatrix::pauli_z(); 9];
        assert_eq!(kron_chain(&f).unwrap().dim(), 512);
        assert!(matches!(kron_chain(&[]), Err(ZenoError::Argument(_))));
        let too_big = vec![ComplexMatrix::identity(2); 13];
        assert!(matches!(kron_chain(&too_big), Err(ZenoError::Resource(_))));
    }

    #[test]
    fn kron_order_matches_index_convention() {
        // sigma_z on the first factor flips the sign of the upper half.
        let zi = kron(&ComplexMatrix::pauli_z(), &ComplexMatrix::identity(2));
        let diag: Vec<f64> = (0..4).map(|i| zi[(i, i)].re).collect();
        assert_eq!(diag, vec![1.0, 1.0, -1.0, -1.0]);
    }

    #[test]
    fn pauli_spectrum() {
        let d = eig_hermitian(&ComplexMatrix::pauli_x()).unwrap();
        assert!((d.eigenvalues()[0] + 1.0).abs() < 1e-14);
        assert!((d.eigenvalues()[1] - 1.0).abs() < 1e-14);
        let d = eig_hermitian(&ComplexMatrix::pauli_y()).unwrap();
        assert!((d.eigenvalues()[0] + 1.0).abs() < 1e-14);
    }

    #[test]
    fn diagonal_spectrum_is_sorted_diagonal() {
        let d = eig_hermitian(&ComplexMatrix::from_real_diagonal(&[3.0, -2.0, 0.5, 7.0])).unwrap();
        let expect = [-2.0, 0.5, 3.0, 7.0];
        for (a, b) in d.eigenvalues().iter().zip(expect) {
            assert!((a - b).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_non_hermitian() {
        let mut m = ComplexMatrix::pauli_x();
        m[(0, 1)] = c(2.0, 0.0);
        assert!(matches!(eig_hermitian(&m), Err(ZenoError::Argument(_))));
    }

    fn reconstruction_error(a: &ComplexMatrix) -> (f64, f64) {
        let d = eig_hermitian(a).unwrap();
        let recon = (&d.reconstruct() - a).frobenius_norm() / a.frobenius_norm();
        let v = d.eigenvectors();
        let vdv = v.adjoint().matmul(v).unwrap();
        let ortho = (&vdv - &ComplexMatrix::identity(a.dim())).frobenius_norm();
        (recon, ortho)
    }

    #[test]
    fn random_hermitian_reconstruction_64() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..3 {
            let (recon, ortho) = reconstruction_error(&random_hermitian(64, &mut rng));
            assert!(recon <= 1e-10, "reconstruction {recon:e}");
            assert!(ortho <= 1e-10, "orthonormality {ortho:e}");
        }
    }

    #[test]
    fn random_hermitian_reconstruction_512() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let (recon, ortho) = reconstruction_error(&random_hermitian(512, &mut rng));
        assert!(recon <= 1e-10, "reconstruction {recon:e}");
        assert!(ortho <= 1e-10, "orthonormality {ortho:e}");
    }

    #[test]
    fn zero_time_is_identity() {
        let psi = StateVector::normalized(vec![c(1.0, 2.0), c(-0.5, 0.1)]).unwrap();
        let out = evolve(&ComplexMatrix::pauli_y(), 0.0, &psi).unwrap();
        for (a, b) in out.amplitudes().iter().zip(psi.amplitudes()) {
            assert!((a - b).norm() < 1e-15);
        }
    }

    #[test]
    fn rabi_oscillation() {
        let omega = 2.0 * std::f64::consts::PI * 5e3;
        let h = &ComplexMatrix::pauli_x() * omega;
        let psi0 = StateVector::basis(2, 0).unwrap();
        let dec = eig_hermitian(&h).unwrap();
        for &mu in &[1e-8, 3.3e-6, 4.7e-5, 1.1e-4] {
            let out = dec.evolve(mu, &psi0).unwrap();
            let expect = [c((omega * mu).cos(), 0.0), c(0.0, -(omega * mu).sin())];
            for (a, b) in out.amplitudes().iter().zip(expect) {
                assert!((a - b).norm() < 1e-12, "mu={mu}: {a} vs {b}");
            }
        }
    }

    #[test]
    fn evolve_rejects_mismatch_and_negative_time() {
        let psi = StateVector::basis(4, 0).unwrap();
        assert!(evolve(&ComplexMatrix::pauli_x(), 1.0, &psi).is_err());
        let psi = StateVector::basis(2, 0).unwrap();
        assert!(evolve(&ComplexMatrix::pauli_x(), -1.0, &psi).is_err());
    }

    #[test]
    fn unitarity_and_composition() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let h = random_hermitian(16, &mut rng);
        let dec = eig_hermitian(&h).unwrap();
        let psi = StateVector::normalized(
            (0..16)
                .map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)))
                .collect(),
        )
        .unwrap();
        for _ in 0..20 {
            let (t1, t2) = (rng.random_range(0.0..5.0), rng.random_range(0.0..5.0));
            let u = dec.unitary(t1);
            let uu = u.matmul(&u.adjoint()).unwrap();
            assert!((&uu - &ComplexMatrix::identity(16)).frobenius_norm() <= 1e-10);

            let direct = dec.evolve(t1 + t2, &psi).unwrap();
            assert!((direct.norm() - 1.0).abs() <= 1e-10);
            let stepped = dec.evolve(t2, &dec.evolve(t1, &psi).unwrap()).unwrap();
            for (a, b) in direct.amplitudes().iter().zip(stepped.amplitudes()) {
                assert!((a - b).norm() <= 1e-9);
            }
        }
    }

    #[test]
    fn state_validation() {
        assert!(StateVector::new(vec![c(1.0, 0.0), c(1.0, 0.0)]).is_err());
        assert!(StateVector::normalized(vec![ZERO; 3]).is_err());
        let s = StateVector::normalized(vec![c(3.0, 0.0), c(0.0, 4.0)]).unwrap();
        assert!((s.norm() - 1.0).abs() < 1e-15);
    }
}
