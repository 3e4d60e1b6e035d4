//! Dense complex Hermitian linear algebra.
//!
//! Every matrix function here (powers, inverses, absolute values, square roots inside
//! the geometric mean) goes through a single spectral decomposition path, so all of
//! them share one error model: `f(H) = U f(Λ) U†` with `H = U Λ U†`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense square complex matrix.
pub type ComplexMatrix = DMatrix<Complex64>;

const EIG_MAX_ITER: usize = 10_000;

/// Relative/absolute tolerance pair used by every positivity decision.
///
/// An operator `X` with spectral norm `s` counts as positive semidefinite when
/// `λ_min(X) ≥ -(abs + rel·s)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerance {
    pub rel: f64,
    pub abs: f64,
}

impl Default for Tolerance {
    fn default() -> Self {
        Tolerance { rel: 1e-8, abs: 1e-10 }
    }
}

impl Tolerance {
    pub fn new(rel: f64, abs: f64) -> Result<Self> {
        let tol = Tolerance { rel, abs };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.rel.is_finite() && self.abs.is_finite() && self.rel >= 0.0 && self.abs >= 0.0) {
            return Err(Error::InvalidArgument(format!(
                "tolerance must be finite and nonnegative (rel={}, abs={})",
                self.rel, self.abs
            )));
        }
        Ok(())
    }

    /// `abs + rel·scale`.
    pub fn threshold(&self, scale: f64) -> f64 {
        self.abs + self.rel * scale
    }
}

/// A complex matrix that is exactly Hermitian (`M = M†` entrywise).
#[derive(Debug, Clone, PartialEq)]
pub struct HermitianMatrix(ComplexMatrix);

impl HermitianMatrix {
    pub fn identity(dim: usize) -> Self {
        HermitianMatrix(ComplexMatrix::identity(dim, dim))
    }

    pub fn zeros(dim: usize) -> Self {
        HermitianMatrix(ComplexMatrix::zeros(dim, dim))
    }

    pub fn from_real_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        HermitianMatrix(ComplexMatrix::from_fn(n, n, |i, j| {
            if i == j {
                Complex64::new(diag[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        }))
    }

    /// Wraps `m` after checking its Hermiticity defect against `tol`.
    pub fn try_new(m: ComplexMatrix, tol: &Tolerance) -> Result<Self> {
        check_square(&m)?;
        let defect = hermitian_defect(&m);
        if defect > tol.threshold(max_abs(&m)) {
            return Err(Error::NotSelfAdjoint { defect });
        }
        hermitize(&m)
    }

    pub fn dim(&self) -> usize {
        self.0.nrows()
    }

    pub fn as_matrix(&self) -> &ComplexMatrix {
        &self.0
    }

    pub fn into_matrix(self) -> ComplexMatrix {
        self.0
    }

    pub fn eig(&self) -> Result<Spectrum> {
        eig_hermitian(self)
    }

    /// Spectral norm `max |λ|`.
    pub fn norm2(&self) -> Result<f64> {
        let s = self.eig()?;
        Ok(s.norm2())
    }
}

/// Eigen-decomposition `H = U diag(λ) U†` with ascending eigenvalues.
#[derive(Debug, Clone)]
pub struct Spectrum {
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: ComplexMatrix,
}

impl Spectrum {
    pub fn dim(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn lambda_min(&self) -> f64 {
        self.eigenvalues.first().copied().unwrap_or(0.0)
    }

    pub fn lambda_max(&self) -> f64 {
        self.eigenvalues.last().copied().unwrap_or(0.0)
    }

    pub fn norm2(&self) -> f64 {
        self.lambda_min().abs().max(self.lambda_max().abs())
    }

    /// `U diag(f(λ)) U†`.
    pub fn map<F: Fn(f64) -> f64>(&self, f: F) -> HermitianMatrix {
        let u = &self.eigenvectors;
        let mut scaled = u.clone();
        for (j, &lam) in self.eigenvalues.iter().enumerate() {
            let v = f(lam);
            scaled.column_mut(j).scale_mut(v);
        }
        let m = scaled * u.adjoint();
        HermitianMatrix(symmetrize(&m))
    }

    pub fn reconstruct(&self) -> HermitianMatrix {
        self.map(|x| x)
    }

    /// Fractional power with the support-projection convention `0^0 = 0`.
    ///
    /// Eigenvalues in `[-δ, 0)` are clamped to zero, where `δ = tol.threshold(‖H‖₂)`.
    /// For `α = 0`, eigenvalues `≤ δ` count as zero. Negative exponents require every
    /// eigenvalue to exceed `δ`.
    pub fn power(&self, alpha: f64, tol: &Tolerance) -> Result<HermitianMatrix> {
        if !alpha.is_finite() {
            return Err(Error::InvalidArgument(format!("exponent {alpha} is not finite")));
        }
        let delta = tol.threshold(self.norm2());
        let lmin = self.lambda_min();
        if lmin < -delta {
            return Err(Error::NotPsd { lambda_min: lmin, threshold: delta });
        }
        if alpha < 0.0 && lmin <= delta {
            return Err(Error::Singular { lambda_min: lmin });
        }
        Ok(self.map(|lam| {
            let lam = lam.max(0.0);
            if alpha == 0.0 {
                if lam > delta {
                    1.0
                } else {
                    0.0
                }
            } else if alpha == 1.0 {
                lam
            } else if lam == 0.0 {
                0.0
            } else {
                lam.powf(alpha)
            }
        }))
    }
}

fn check_square(m: &ComplexMatrix) -> Result<()> {
    if m.nrows() != m.ncols() {
        return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
    }
    Ok(())
}

fn check_same_dim(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<()> {
    check_square(a)?;
    check_square(b)?;
    if a.nrows() != b.nrows() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: b.nrows() });
    }
    Ok(())
}

fn symmetrize(m: &ComplexMatrix) -> ComplexMatrix {
    (m + m.adjoint()).scale(0.5)
}

/// Largest entry modulus.
pub fn max_abs(m: &ComplexMatrix) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// `‖M − M†‖_max`.
pub fn hermitian_defect(m: &ComplexMatrix) -> f64 {
    if m.nrows() != m.ncols() {
        return f64::INFINITY;
    }
    let n = m.nrows();
    let mut d = 0.0_f64;
    for i in 0..n {
        for j in i..n {
            d = d.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    d
}

/// `(M + M†)/2`.
pub fn hermitize(m: &ComplexMatrix) -> Result<HermitianMatrix> {
    check_square(m)?;
    if m.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite);
    }
    Ok(HermitianMatrix(symmetrize(m)))
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues ascending.
pub fn eig_hermitian(h: &HermitianMatrix) -> Result<Spectrum> {
    let n = h.dim();
    if n == 0 {
        return Ok(Spectrum { eigenvalues: vec![], eigenvectors: ComplexMatrix::zeros(0, 0) });
    }
    if n == 1 {
        return Ok(Spectrum {
            eigenvalues: vec![h.0[(0, 0)].re],
            eigenvectors: ComplexMatrix::identity(1, 1),
        });
    }
    let eig = h
        .0
        .clone()
        .try_symmetric_eigen(f64::EPSILON, EIG_MAX_ITER)
        .ok_or(Error::Eigensolver { dim: n })?;
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    if eigenvalues.iter().any(|x| !x.is_finite()) {
        return Err(Error::Eigensolver { dim: n });
    }
    let eigenvectors = ComplexMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    Ok(Spectrum { eigenvalues, eigenvectors })
}

/// `P^α` for positive semidefinite `P`, using the default tolerance.
pub fn matrix_power(p: &HermitianMatrix, alpha: f64) -> Result<HermitianMatrix> {
    matrix_power_with_tol(p, alpha, &Tolerance::default())
}

pub fn matrix_power_with_tol(p: &HermitianMatrix, alpha: f64, tol: &Tolerance) -> Result<HermitianMatrix> {
    eig_hermitian(p)?.power(alpha, tol)
}

/// `|A| = (A†A)^{1/2}`.
pub fn matrix_abs(a: &ComplexMatrix) -> Result<HermitianMatrix> {
    check_square(a)?;
    let gram = hermitize(&(a.adjoint() * a))?;
    let s = eig_hermitian(&gram)?;
    Ok(s.map(|lam| lam.max(0.0).sqrt()))
}

/// Spectral norm of an arbitrary square matrix.
pub fn spectral_norm(a: &ComplexMatrix) -> Result<f64> {
    check_square(a)?;
    let gram = hermitize(&(a.adjoint() * a))?;
    Ok(eig_hermitian(&gram)?.lambda_max().max(0.0).sqrt())
}

/// Inverse of a positive definite matrix.
pub fn inverse_definite(p: &HermitianMatrix, tol: &Tolerance) -> Result<HermitianMatrix> {
    matrix_power_with_tol(p, -1.0, tol)
}

/// Result of [`geometric_mean`]; `regularization` holds the shift `ε` when `A` had to
/// be replaced by `A + εI`.
#[derive(Debug, Clone)]
pub struct GeometricMean {
    pub mean: HermitianMatrix,
    pub regularization: Option<f64>,
}

/// `A♯B = A^{1/2} (A^{-1/2} B A^{-1/2})^{1/2} A^{1/2}`.
///
/// When `λ_min(A)` lies within the positivity band `[-δ, δ]`, `A` is replaced by
/// `A + εI` with `ε = 1e-10·max(‖A‖₂, 1)` (negative eigenvalues clamped first).
pub fn geometric_mean(a: &HermitianMatrix, b: &HermitianMatrix, tol: &Tolerance) -> Result<GeometricMean> {
    check_same_dim(&a.0, &b.0)?;
    let sa = eig_hermitian(a)?;
    let norm_a = sa.norm2();
    let delta = tol.threshold(norm_a);
    let lmin = sa.lambda_min();
    if lmin < -delta {
        return Err(Error::NotPsd { lambda_min: lmin, threshold: delta });
    }
    let regularization = if lmin <= delta { Some(1e-10 * norm_a.max(1.0)) } else { None };
    let shift = regularization.unwrap_or(0.0);
    let root = sa.map(|l| (l.max(0.0) + shift).sqrt());
    let inv_root = sa.map(|l| 1.0 / (l.max(0.0) + shift).sqrt());
    let sb = eig_hermitian(b)?;
    let db = tol.threshold(sb.norm2());
    if sb.lambda_min() < -db {
        return Err(Error::NotPsd { lambda_min: sb.lambda_min(), threshold: db });
    }
    // negative eigenvalues inside B's tolerance band may be amplified by A^{-1/2}
    let middle = hermitize(&(inv_root.as_matrix() * b.as_matrix() * inv_root.as_matrix()))?;
    let sm = eig_hermitian(&middle)?;
    let middle_root = sm.map(|l| l.max(0.0).sqrt());
    let mean = hermitize(&(root.as_matrix() * middle_root.as_matrix() * root.as_matrix()))?;
    Ok(GeometricMean { mean, regularization })
}

/// Signed Löwner margin `λ_min(A − B)`; `A ≥ B` when it is at least
/// `-tol.threshold(max(‖A‖₂, ‖B‖₂, 1))` (see [`loewner_holds`]).
pub fn loewner_geq(a: &HermitianMatrix, b: &HermitianMatrix) -> Result<f64> {
    check_same_dim(&a.0, &b.0)?;
    let d = HermitianMatrix(symmetrize(&(&a.0 - &b.0)));
    Ok(eig_hermitian(&d)?.lambda_min())
}

pub fn loewner_holds(a: &HermitianMatrix, b: &HermitianMatrix, tol: &Tolerance) -> Result<bool> {
    let margin = loewner_geq(a, b)?;
    let scale = a.norm2()?.max(b.norm2()?).max(1.0);
    Ok(margin >= -tol.threshold(scale))
}

/// Both routes of the block-positivity test for `[[A, X], [X†, B]]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SchurCheck {
    /// `λ_min(B − X†A⁻¹X)`.
    pub schur_margin: f64,
    pub schur_threshold: f64,
    /// `λ_min` of the assembled block matrix.
    pub block_margin: f64,
    pub block_threshold: f64,
    pub verdict: bool,
}

/// Decides positivity of `[[A, X], [X†, B]]` through the Schur complement and,
/// independently, through the block matrix's smallest eigenvalue.
pub fn schur_positivity_details(
    a: &HermitianMatrix,
    x: &ComplexMatrix,
    b: &HermitianMatrix,
    tol: &Tolerance,
) -> Result<SchurCheck> {
    let (n, m) = (a.dim(), b.dim());
    if x.nrows() != n {
        return Err(Error::DimensionMismatch { expected: n, got: x.nrows() });
    }
    if x.ncols() != m {
        return Err(Error::DimensionMismatch { expected: m, got: x.ncols() });
    }
    let sa = eig_hermitian(a)?;
    let da = tol.threshold(sa.norm2().max(1.0));
    if sa.lambda_min() <= da {
        return Err(Error::Singular { lambda_min: sa.lambda_min() });
    }
    let a_inv = sa.map(|l| 1.0 / l);
    let pulled = hermitize(&(x.adjoint() * a_inv.as_matrix() * x))?;
    let complement = hermitize(&(b.as_matrix() - pulled.as_matrix()))?;
    let schur_margin = eig_hermitian(&complement)?.lambda_min();
    let schur_scale = b.norm2()?.max(pulled.norm2()?).max(1.0);
    let schur_threshold = tol.threshold(schur_scale);

    let mut block = ComplexMatrix::zeros(n + m, n + m);
    block.view_mut((0, 0), (n, n)).copy_from(a.as_matrix());
    block.view_mut((0, n), (n, m)).copy_from(x);
    block.view_mut((n, 0), (m, n)).copy_from(&x.adjoint());
    block.view_mut((n, n), (m, m)).copy_from(b.as_matrix());
    let sb = eig_hermitian(&HermitianMatrix(block))?;
    let block_margin = sb.lambda_min();
    let block_threshold = tol.threshold(sb.norm2().max(1.0));

    let schur_ok = schur_margin >= -schur_threshold;
    let block_ok = block_margin >= -block_threshold;
    if schur_ok != block_ok {
        return Err(Error::SchurDisagreement { schur_margin, block_margin });
    }
    Ok(SchurCheck { schur_margin, schur_threshold, block_margin, block_threshold, verdict: schur_ok })
}

pub fn schur_positivity_check(
    a: &HermitianMatrix,
    x: &ComplexMatrix,
    b: &HermitianMatrix,
    tol: &Tolerance,
) -> Result<bool> {
    Ok(schur_positivity_details(a, x, b, tol)?.verdict)
}

/// `(λ_min, λ_max)`.
pub fn spectrum_interval(h: &HermitianMatrix) -> Result<(f64, f64)> {
    let s = eig_hermitian(h)?;
    Ok((s.lambda_min(), s.lambda_max()))
}

/// `[A, B] = AB − BA`.
pub fn commutator(a: &ComplexMatrix, b: &ComplexMatrix) -> Result<ComplexMatrix> {
    check_same_dim(a, b)?;
    Ok(a * b - b * a)
}

/// `Re(A) = (A + A†)/2`.
pub fn real_part(a: &ComplexMatrix) -> Result<HermitianMatrix> {
    hermitize(a)
}

/// `Im(A) = (A − A†)/(2i)`.
pub fn imaginary_part(a: &ComplexMatrix) -> Result<HermitianMatrix> {
    check_square(a)?;
    let skew = a - a.adjoint();
    hermitize(&skew.scale(0.5).map(|z| z * Complex64::new(0.0, -1.0)))
}

/// Pauli matrices and other small fixtures shared by tests and examples.
pub mod pauli {
    use super::ComplexMatrix;
    use num_complex::Complex64;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    pub fn sigma_x() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(1., 0.), c(1., 0.), c(0., 0.)])
    }

    pub fn sigma_y() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(0., 0.), c(0., -1.), c(0., 1.), c(0., 0.)])
    }

    pub fn sigma_z() -> ComplexMatrix {
        ComplexMatrix::from_row_slice(2, 2, &[c(1., 0.), c(0., 0.), c(0., 0.), c(-1., 0.)])
    }

    pub fn real_diag(d: &[f64]) -> ComplexMatrix {
        let n = d.len();
        ComplexMatrix::from_fn(n, n, |i, j| if i == j { c(d[i], 0.0) } else { c(0.0, 0.0) })
    }
}
