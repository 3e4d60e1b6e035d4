//! Finite-dimensional C*-algebras as direct sums of full matrix blocks.
//!
//! An element of `M_{n₁} ⊕ … ⊕ M_{n_k}` is stored as its list of diagonal blocks.
//! All algebraic operations and matrix functions act blockwise, which is exactly how
//! they act on the assembled block-diagonal matrix.
//!
//! Arithmetic operators panic when the operands live in different algebras, the same
//! way `nalgebra` panics on shape mismatch; public entry points that accept
//! user-provided elements validate membership first and return [`Error::DomainMismatch`].

use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::hermitian::{
    self, eig_hermitian, hermitian_defect, hermitize, max_abs, ComplexMatrix, HermitianMatrix, Spectrum, Tolerance,
};
use crate::matrix_json::MatrixJson;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct BlockAlgebra {
    dims: Vec<usize>,
}

impl TryFrom<Vec<usize>> for BlockAlgebra {
    type Error = Error;
    fn try_from(dims: Vec<usize>) -> Result<Self> {
        BlockAlgebra::new(dims)
    }
}

impl From<BlockAlgebra> for Vec<usize> {
    fn from(a: BlockAlgebra) -> Self {
        a.dims
    }
}

impl BlockAlgebra {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidArgument("a block algebra needs at least one block".into()));
        }
        if dims.contains(&0) {
            return Err(Error::InvalidArgument("block dimensions must be positive".into()));
        }
        Ok(BlockAlgebra { dims })
    }

    /// The full matrix algebra `M_n`.
    pub fn full(n: usize) -> Result<Self> {
        Self::new(vec![n])
    }

    /// `ℂᵏ` as the diagonal subalgebra of `M_k`, i.e. `k` one-dimensional blocks.
    pub fn diagonal(k: usize) -> Result<Self> {
        Self::new(vec![1; k])
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn num_blocks(&self) -> usize {
        self.dims.len()
    }

    pub fn total_dim(&self) -> usize {
        self.dims.iter().sum()
    }

    pub fn is_commutative(&self) -> bool {
        self.dims.iter().all(|&d| d == 1)
    }

    /// `M₂(𝒜) ≅ ⊕ M_{2nᵢ}`.
    pub fn doubled(&self) -> BlockAlgebra {
        BlockAlgebra { dims: self.dims.iter().map(|d| 2 * d).collect() }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    algebra: BlockAlgebra,
    blocks: Vec<ComplexMatrix>,
}

impl AlgebraElement {
    pub fn new(algebra: BlockAlgebra, blocks: Vec<ComplexMatrix>) -> Result<Self> {
        if blocks.len() != algebra.num_blocks() {
            return Err(Error::DomainMismatch(format!(
                "expected {} blocks, got {}",
                algebra.num_blocks(),
                blocks.len()
            )));
        }
        for (b, &n) in blocks.iter().zip(algebra.dims()) {
            if b.nrows() != n || b.ncols() != n {
                return Err(Error::DomainMismatch(format!(
                    "block of shape {}x{} where {n}x{n} was expected",
                    b.nrows(),
                    b.ncols()
                )));
            }
            if b.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
                return Err(Error::NonFinite);
            }
        }
        Ok(AlgebraElement { algebra, blocks })
    }

    /// An element of the one-block algebra `M_n`.
    pub fn single(m: ComplexMatrix) -> Result<Self> {
        let n = m.nrows();
        if m.ncols() != n {
            return Err(Error::NotSquare { rows: m.nrows(), cols: m.ncols() });
        }
        Self::new(BlockAlgebra::full(n)?, vec![m])
    }

    pub fn from_hermitian(h: HermitianMatrix) -> Result<Self> {
        Self::single(h.into_matrix())
    }

    pub fn zeros(algebra: &BlockAlgebra) -> Self {
        Self::scalar(algebra, Complex64::new(0.0, 0.0))
    }

    pub fn identity(algebra: &BlockAlgebra) -> Self {
        Self::scalar(algebra, Complex64::new(1.0, 0.0))
    }

    pub fn scalar(algebra: &BlockAlgebra, c: Complex64) -> Self {
        let blocks = algebra.dims().iter().map(|&n| ComplexMatrix::identity(n, n).map(|z| z * c)).collect();
        AlgebraElement { algebra: algebra.clone(), blocks }
    }

    /// Central element `⊕ cᵢ I_{nᵢ}`.
    pub fn central(algebra: &BlockAlgebra, coeffs: &[Complex64]) -> Result<Self> {
        if coeffs.len() != algebra.num_blocks() {
            return Err(Error::DomainMismatch(format!(
                "expected {} central coefficients, got {}",
                algebra.num_blocks(),
                coeffs.len()
            )));
        }
        let blocks = algebra
            .dims()
            .iter()
            .zip(coeffs)
            .map(|(&n, &c)| ComplexMatrix::identity(n, n).map(|z| z * c))
            .collect();
        Ok(AlgebraElement { algebra: algebra.clone(), blocks })
    }

    /// Diagonal element of `ℂᵏ` (one-dimensional blocks).
    pub fn diagonal(values: &[Complex64]) -> Result<Self> {
        let alg = BlockAlgebra::diagonal(values.len())?;
        Self::central(&alg, values)
    }

    /// Splits a block-diagonal matrix; entries outside the blocks must vanish.
    pub fn from_block_diagonal(algebra: &BlockAlgebra, m: &ComplexMatrix) -> Result<Self> {
        let n = algebra.total_dim();
        if m.nrows() != n || m.ncols() != n {
            return Err(Error::DomainMismatch(format!(
                "expected a {n}x{n} block-diagonal matrix, got {}x{}",
                m.nrows(),
                m.ncols()
            )));
        }
        let scale = max_abs(m).max(1.0);
        let mut blocks = Vec::with_capacity(algebra.num_blocks());
        let mut off = 0;
        for &d in algebra.dims() {
            blocks.push(m.view((off, off), (d, d)).into_owned());
            off += d;
        }
        let elem = Self::new(algebra.clone(), blocks)?;
        if max_abs(&(m - elem.to_block_diagonal())) > 1e-12 * scale {
            return Err(Error::DomainMismatch("matrix has entries outside the diagonal blocks".into()));
        }
        Ok(elem)
    }

    pub fn to_block_diagonal(&self) -> ComplexMatrix {
        let n = self.algebra.total_dim();
        let mut m = ComplexMatrix::zeros(n, n);
        let mut off = 0;
        for b in &self.blocks {
            let d = b.nrows();
            m.view_mut((off, off), (d, d)).copy_from(b);
            off += d;
        }
        m
    }

    pub fn algebra(&self) -> &BlockAlgebra {
        &self.algebra
    }

    pub fn blocks(&self) -> &[ComplexMatrix] {
        &self.blocks
    }

    pub fn block(&self, i: usize) -> &ComplexMatrix {
        &self.blocks[i]
    }

    pub fn to_json(&self) -> Vec<MatrixJson> {
        self.blocks.iter().map(MatrixJson::from_matrix).collect()
    }

    pub fn from_json(algebra: &BlockAlgebra, blocks: &[MatrixJson]) -> Result<Self> {
        let ms = blocks.iter().map(|b| b.to_matrix()).collect::<Result<Vec<_>>>()?;
        Self::new(algebra.clone(), ms)
    }

    /// Infers the algebra from the block shapes.
    pub fn from_json_blocks(blocks: &[MatrixJson]) -> Result<Self> {
        let alg = BlockAlgebra::new(blocks.iter().map(|b| b.dim).collect())?;
        Self::from_json(&alg, blocks)
    }

    fn map_blocks<F: Fn(&ComplexMatrix) -> ComplexMatrix>(&self, f: F) -> Self {
        AlgebraElement { algebra: self.algebra.clone(), blocks: self.blocks.iter().map(f).collect() }
    }

    fn zip_blocks<F: Fn(&ComplexMatrix, &ComplexMatrix) -> ComplexMatrix>(&self, other: &Self, f: F) -> Self {
        assert_eq!(self.algebra, other.algebra, "operands belong to different block algebras");
        AlgebraElement {
            algebra: self.algebra.clone(),
            blocks: self.blocks.iter().zip(&other.blocks).map(|(a, b)| f(a, b)).collect(),
        }
    }

    pub fn same_algebra(&self, other: &Self) -> Result<()> {
        if self.algebra != other.algebra {
            return Err(Error::DomainMismatch(format!(
                "algebra {:?} vs {:?}",
                self.algebra.dims(),
                other.algebra.dims()
            )));
        }
        Ok(())
    }

    pub fn scale(&self, c: Complex64) -> Self {
        self.map_blocks(|b| b.map(|z| z * c))
    }

    pub fn scale_real(&self, c: f64) -> Self {
        self.map_blocks(|b| b.scale(c))
    }

    pub fn adjoint(&self) -> Self {
        self.map_blocks(|b| b.adjoint())
    }

    /// `(X + X†)/2`, i.e. the real part.
    pub fn hermitian_part(&self) -> Self {
        self.map_blocks(|b| (b + b.adjoint()).scale(0.5))
    }

    /// `(X − X†)/(2i)`.
    pub fn imaginary_part(&self) -> Self {
        self.map_blocks(|b| (b - b.adjoint()).scale(0.5).map(|z| z * Complex64::new(0.0, -1.0)))
    }

    pub fn hermitian_defect(&self) -> f64 {
        self.blocks.iter().map(hermitian_defect).fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.blocks.iter().map(max_abs).fold(0.0, f64::max)
    }

    pub fn is_self_adjoint(&self, tol: &Tolerance) -> bool {
        self.hermitian_defect() <= tol.threshold(self.max_abs())
    }

    pub fn commutator(&self, other: &Self) -> Self {
        self.zip_blocks(other, |a, b| a * b - b * a)
    }

    pub fn anticommutator(&self, other: &Self) -> Self {
        self.zip_blocks(other, |a, b| a * b + b * a)
    }

    pub fn block_traces(&self) -> Vec<Complex64> {
        self.blocks.iter().map(|b| b.trace()).collect()
    }

    pub fn trace(&self) -> Complex64 {
        self.block_traces().into_iter().sum()
    }

    /// Spectra of the Hermitian parts of every block.
    pub fn spectra(&self) -> Result<Vec<Spectrum>> {
        self.blocks.iter().map(|b| eig_hermitian(&hermitize(b)?)).collect()
    }

    /// `λ_min` of the Hermitian part (minimum over blocks).
    pub fn lambda_min(&self) -> Result<f64> {
        Ok(self.spectra()?.iter().map(Spectrum::lambda_min).fold(f64::INFINITY, f64::min))
    }

    /// `(λ_min, λ_max)` of the Hermitian part.
    pub fn spectrum_interval(&self) -> Result<(f64, f64)> {
        let sp = self.spectra()?;
        let lo = sp.iter().map(Spectrum::lambda_min).fold(f64::INFINITY, f64::min);
        let hi = sp.iter().map(Spectrum::lambda_max).fold(f64::NEG_INFINITY, f64::max);
        Ok((lo, hi))
    }

    /// Spectral norm (maximum over blocks).
    pub fn norm2(&self) -> Result<f64> {
        let mut n = 0.0_f64;
        for b in &self.blocks {
            n = n.max(hermitian::spectral_norm(b)?);
        }
        Ok(n)
    }

    /// Spectral norm of a Hermitian element (cheaper than [`Self::norm2`]).
    pub fn hermitian_norm2(&self) -> Result<f64> {
        Ok(self.spectra()?.iter().map(Spectrum::norm2).fold(0.0, f64::max))
    }

    pub fn is_psd(&self, tol: &Tolerance) -> Result<bool> {
        let sp = self.spectra()?;
        let scale = sp.iter().map(Spectrum::norm2).fold(0.0, f64::max);
        let lmin = sp.iter().map(Spectrum::lambda_min).fold(f64::INFINITY, f64::min);
        Ok(lmin >= -tol.threshold(scale))
    }

    pub fn power(&self, alpha: f64, tol: &Tolerance) -> Result<Self> {
        let sp = self.spectra()?;
        ElementSpectrum { algebra: self.algebra.clone(), blocks: sp }.power(alpha, tol)
    }

    pub fn inverse(&self, tol: &Tolerance) -> Result<Self> {
        self.power(-1.0, tol)
    }

    /// `|X| = (X†X)^{1/2}` blockwise.
    pub fn abs(&self) -> Result<Self> {
        let blocks = self
            .blocks
            .iter()
            .map(|b| hermitian::matrix_abs(b).map(HermitianMatrix::into_matrix))
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement { algebra: self.algebra.clone(), blocks })
    }

    /// `X†X`.
    pub fn abs_squared(&self) -> Self {
        self.map_blocks(|b| b.adjoint() * b)
    }

    /// Blockwise geometric mean; the second component is the largest regularization
    /// shift applied to any block, if any.
    pub fn geometric_mean(&self, other: &Self, tol: &Tolerance) -> Result<(Self, Option<f64>)> {
        self.same_algebra(other)?;
        let mut blocks = Vec::with_capacity(self.blocks.len());
        let mut reg: Option<f64> = None;
        for (a, b) in self.blocks.iter().zip(&other.blocks) {
            let g = hermitian::geometric_mean(&hermitize(a)?, &hermitize(b)?, tol)?;
            if let Some(e) = g.regularization {
                reg = Some(reg.map_or(e, |r: f64| r.max(e)));
            }
            blocks.push(g.mean.into_matrix());
        }
        Ok((AlgebraElement { algebra: self.algebra.clone(), blocks }, reg))
    }

    /// Blockwise `[[a11, a12], [a21, a22]]` in `M₂(𝒜)`.
    pub fn block_2x2(a11: &Self, a12: &Self, a21: &Self, a22: &Self) -> Result<Self> {
        a11.same_algebra(a12)?;
        a11.same_algebra(a21)?;
        a11.same_algebra(a22)?;
        let blocks = (0..a11.blocks.len())
            .map(|i| {
                let n = a11.blocks[i].nrows();
                let mut m = ComplexMatrix::zeros(2 * n, 2 * n);
                m.view_mut((0, 0), (n, n)).copy_from(&a11.blocks[i]);
                m.view_mut((0, n), (n, n)).copy_from(&a12.blocks[i]);
                m.view_mut((n, 0), (n, n)).copy_from(&a21.blocks[i]);
                m.view_mut((n, n), (n, n)).copy_from(&a22.blocks[i]);
                m
            })
            .collect();
        Ok(AlgebraElement { algebra: a11.algebra.doubled(), blocks })
    }

    /// Inverse of [`Self::block_2x2`]: returns the four corners of every doubled block.
    pub fn split_2x2(&self) -> Result<[Self; 4]> {
        let dims: Vec<usize> = self
            .algebra
            .dims()
            .iter()
            .map(|&d| if d % 2 == 0 { Ok(d / 2) } else { Err(Error::DomainMismatch("odd block".into())) })
            .collect::<Result<_>>()?;
        let half = BlockAlgebra::new(dims)?;
        let corner = |r: usize, c: usize| AlgebraElement {
            algebra: half.clone(),
            blocks: self
                .blocks
                .iter()
                .map(|b| {
                    let n = b.nrows() / 2;
                    b.view((r * n, c * n), (n, n)).into_owned()
                })
                .collect(),
        };
        Ok([corner(0, 0), corner(0, 1), corner(1, 0), corner(1, 1)])
    }

    /// Max over blocks of the Frobenius distance.
    pub fn distance(&self, other: &Self) -> f64 {
        assert_eq!(self.algebra, other.algebra, "operands belong to different block algebras");
        self.blocks.iter().zip(&other.blocks).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }
}

/// Cached per-block spectral decomposition of a Hermitian element, so that several
/// powers of the same operator share one eigen-decomposition.
#[derive(Debug, Clone)]
pub struct ElementSpectrum {
    algebra: BlockAlgebra,
    blocks: Vec<Spectrum>,
}

impl ElementSpectrum {
    pub fn new(x: &AlgebraElement) -> Result<Self> {
        Ok(ElementSpectrum { algebra: x.algebra.clone(), blocks: x.spectra()? })
    }

    pub fn lambda_min(&self) -> f64 {
        self.blocks.iter().map(Spectrum::lambda_min).fold(f64::INFINITY, f64::min)
    }

    pub fn norm2(&self) -> f64 {
        self.blocks.iter().map(Spectrum::norm2).fold(0.0, f64::max)
    }

    pub fn power(&self, alpha: f64, tol: &Tolerance) -> Result<AlgebraElement> {
        // one shared threshold across blocks, scaled by the whole element's norm
        let scale = self.norm2();
        let delta = tol.threshold(scale);
        let lmin = self.lambda_min();
        if lmin < -delta {
            return Err(Error::NotPsd { lambda_min: lmin, threshold: delta });
        }
        let blocks = self
            .blocks
            .iter()
            .map(|s| {
                let local = Tolerance { rel: 0.0, abs: delta };
                s.power(alpha, &local).map(HermitianMatrix::into_matrix)
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AlgebraElement { algebra: self.algebra.clone(), blocks })
    }
}

impl Add for &AlgebraElement {
    type Output = AlgebraElement;
    fn add(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a + b)
    }
}

impl Sub for &AlgebraElement {
    type Output = AlgebraElement;
    fn sub(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a - b)
    }
}

impl Mul for &AlgebraElement {
    type Output = AlgebraElement;
    fn mul(self, rhs: &AlgebraElement) -> AlgebraElement {
        self.zip_blocks(rhs, |a, b| a * b)
    }
}

impl Neg for &AlgebraElement {
    type Output = AlgebraElement;
    fn neg(self) -> AlgebraElement {
        self.scale_real(-1.0)
    }
}
