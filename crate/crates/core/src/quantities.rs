//! Generalized covariance, variance, correlation and skew information for a
//! tracial positive map `Φ` and a state `ρ`.
//!
//! Quantities that are Hermitian by construction (variances, skew informations,
//! `J`, `U`) are symmetrized after evaluation and the removed defect is recorded.

use std::cell::{OnceCell, RefCell};
use std::collections::HashMap;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, ElementSpectrum};
use crate::error::{Error, Result};
use crate::hermitian::Tolerance;
use crate::maps::TracialMap;

#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct AlphaParam(f64);

impl AlphaParam {
    pub const HALF: AlphaParam = AlphaParam(0.5);

    pub fn new(value: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&value) {
            return Err(Error::InvalidArgument(format!("alpha must lie in [0, 1], got {value}")));
        }
        Ok(AlphaParam(value))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for AlphaParam {
    type Error = Error;
    fn try_from(v: f64) -> Result<Self> {
        AlphaParam::new(v)
    }
}

impl From<AlphaParam> for f64 {
    fn from(a: AlphaParam) -> f64 {
        a.0
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct QuantityMeta {
    /// `max |X − X†|` before symmetrization.
    pub hermitian_defect: f64,
    /// Shift applied inside a geometric mean, if any.
    pub regularization: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct QuantityResult {
    pub value: AlgebraElement,
    pub hermitian: bool,
    pub metadata: QuantityMeta,
}

impl QuantityResult {
    fn hermitian(value: AlgebraElement) -> Self {
        let defect = value.hermitian_defect();
        QuantityResult {
            value: value.hermitian_part(),
            hermitian: true,
            metadata: QuantityMeta { hermitian_defect: defect, regularization: None },
        }
    }

    fn raw(value: AlgebraElement) -> Self {
        let defect = value.hermitian_defect();
        let hermitian = defect <= 1e-10 * value.max_abs().max(1.0);
        QuantityResult { value, hermitian, metadata: QuantityMeta { hermitian_defect: defect, regularization: None } }
    }
}

/// `(M + m)² / (4Mm)`.
pub fn kantorovich(m: f64, big_m: f64) -> Result<f64> {
    if !(m > 0.0) || !(m <= big_m) || !big_m.is_finite() {
        return Err(Error::InvalidArgument(format!("Kantorovich constant needs 0 < m <= M, got m={m}, M={big_m}")));
    }
    Ok((big_m + m) * (big_m + m) / (4.0 * big_m * m))
}

/// A map together with a state, caching the spectral data of `ρ`.
pub struct Setting<'a> {
    map: &'a TracialMap,
    rho: AlgebraElement,
    spectrum: ElementSpectrum,
    tol: Tolerance,
    powers: RefCell<HashMap<u64, AlgebraElement>>,
    density_defect: OnceCell<f64>,
    phi_rho: OnceCell<AlgebraElement>,
    enforce_density: bool,
}

impl<'a> Setting<'a> {
    /// `ρ` must lie in the map's domain and be PSD within `tol`.
    pub fn new(map: &'a TracialMap, rho: &AlgebraElement, tol: &Tolerance) -> Result<Self> {
        if rho.algebra() != map.domain() {
            return Err(Error::DomainMismatch("rho is not in the map's domain".into()));
        }
        if !rho.is_self_adjoint(tol) {
            return Err(Error::NotSelfAdjoint { defect: rho.hermitian_defect() });
        }
        let rho = rho.hermitian_part();
        let spectrum = ElementSpectrum::new(&rho)?;
        let threshold = tol.threshold(spectrum.norm2());
        if spectrum.lambda_min() < -threshold {
            return Err(Error::NotPsd { lambda_min: spectrum.lambda_min(), threshold });
        }
        Ok(Setting {
            map,
            rho,
            spectrum,
            tol: *tol,
            powers: RefCell::new(HashMap::new()),
            density_defect: OnceCell::new(),
            phi_rho: OnceCell::new(),
            enforce_density: true,
        })
    }

    /// Evaluates density-dependent quantities even when `Φ(ρ) ≠ I`. Verifiers use
    /// this to report margins for instances that fail the density hypothesis.
    pub fn without_density_check(mut self) -> Self {
        self.enforce_density = false;
        self
    }

    pub fn map(&self) -> &TracialMap {
        self.map
    }

    pub fn rho(&self) -> &AlgebraElement {
        &self.rho
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    pub fn rho_spectrum(&self) -> &ElementSpectrum {
        &self.spectrum
    }

    pub fn phi(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.map.apply(x)
    }

    pub fn phi_rho(&self) -> &AlgebraElement {
        self.phi_rho.get_or_init(|| self.map.apply(&self.rho).expect("rho is in the domain").hermitian_part())
    }

    /// `‖Φ(ρ) − I‖₂`.
    pub fn density_defect(&self) -> f64 {
        *self.density_defect.get_or_init(|| self.map.density_defect(&self.rho).unwrap_or(f64::INFINITY))
    }

    pub fn is_density(&self) -> bool {
        self.density_defect() <= self.tol.threshold(1.0)
    }

    pub fn require_density(&self) -> Result<()> {
        if !self.enforce_density || self.is_density() {
            Ok(())
        } else {
            Err(Error::NotPhiDensity { defect: self.density_defect() })
        }
    }

    /// `ρ^α` with the support convention at `α = 0`.
    pub fn rho_power(&self, alpha: f64) -> Result<AlgebraElement> {
        let key = alpha.to_bits();
        if let Some(p) = self.powers.borrow().get(&key) {
            return Ok(p.clone());
        }
        let p = self.spectrum.power(alpha, &self.tol)?;
        self.powers.borrow_mut().insert(key, p.clone());
        Ok(p)
    }

    fn check_operand(&self, a: &AlgebraElement) -> Result<()> {
        if a.algebra() != self.map.domain() {
            return Err(Error::DomainMismatch("operand is not in the map's domain".into()));
        }
        Ok(())
    }

    fn check_self_adjoint(&self, a: &AlgebraElement) -> Result<()> {
        if !a.is_self_adjoint(&self.tol) {
            return Err(Error::NotSelfAdjoint { defect: a.hermitian_defect() });
        }
        Ok(())
    }

    /// `Φ(ρX)`.
    pub fn expectation(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        self.check_operand(x)?;
        self.phi(&(&self.rho * x))
    }

    fn cov_unchecked(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<AlgebraElement> {
        let ad = a.adjoint();
        let first = self.phi(&(&(&self.rho * &ad) * b))?;
        let second = &self.phi(&(&self.rho * &ad))? * &self.phi(&(&self.rho * b))?;
        Ok(&first - &second)
    }

    /// `Φ(ρA†B) − Φ(ρA†)Φ(ρB)`; requires `ρ` to be a Φ-density.
    pub fn covariance(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<QuantityResult> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        self.require_density()?;
        Ok(QuantityResult::raw(self.cov_unchecked(a, b)?))
    }

    pub fn variance(&self, a: &AlgebraElement) -> Result<QuantityResult> {
        self.check_operand(a)?;
        self.require_density()?;
        Ok(QuantityResult::hermitian(self.cov_unchecked(a, a)?))
    }

    /// `Φ(ρ)^{-1}`; fails when `Φ(ρ)` is singular within tolerance.
    pub fn phi_rho_inverse(&self) -> Result<AlgebraElement> {
        let sp = ElementSpectrum::new(self.phi_rho())?;
        let threshold = self.tol.threshold(sp.norm2());
        if sp.lambda_min() <= threshold {
            return Err(Error::Singular { lambda_min: sp.lambda_min() });
        }
        sp.power(-1.0, &self.tol)
    }

    fn cov_prime_unchecked(&self, a: &AlgebraElement, b: &AlgebraElement, inv: &AlgebraElement) -> Result<AlgebraElement> {
        let ad = a.adjoint();
        let first = self.phi(&(&(&self.rho * &ad) * b))?;
        let second = &(&self.phi(&(&self.rho * &ad))? * inv) * &self.phi(&(&self.rho * b))?;
        Ok(&first - &second)
    }

    /// `Φ(ρA†B) − Φ(ρA†)Φ(ρ)^{-1}Φ(ρB)`; only needs `Φ(ρ) > 0`.
    pub fn covariance_prime(&self, a: &AlgebraElement, b: &AlgebraElement) -> Result<QuantityResult> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        let inv = self.phi_rho_inverse()?;
        Ok(QuantityResult::raw(self.cov_prime_unchecked(a, b, &inv)?))
    }

    pub fn variance_prime(&self, a: &AlgebraElement) -> Result<QuantityResult> {
        self.check_operand(a)?;
        let inv = self.phi_rho_inverse()?;
        Ok(QuantityResult::hermitian(self.cov_prime_unchecked(a, a, &inv)?))
    }

    /// `Φ(ρ^{1−α} X ρ^α Y)`.
    pub fn sandwich(&self, x: &AlgebraElement, y: &AlgebraElement, alpha: f64) -> Result<AlgebraElement> {
        let left = self.rho_power(1.0 - alpha)?;
        let right = self.rho_power(alpha)?;
        self.phi(&(&(&(&left * x) * &right) * y))
    }

    fn corr_unchecked(&self, a: &AlgebraElement, b: &AlgebraElement, alpha: f64) -> Result<AlgebraElement> {
        let ad = a.adjoint();
        let first = self.phi(&(&(&self.rho * &ad) * b))?;
        Ok(&first - &self.sandwich(&ad, b, alpha)?)
    }

    /// `Φ(ρA†B) − Φ(ρ^{1−α}A†ρ^αB)`.
    pub fn correlation(&self, a: &AlgebraElement, b: &AlgebraElement, alpha: AlphaParam) -> Result<QuantityResult> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        Ok(QuantityResult::raw(self.corr_unchecked(a, b, alpha.value())?))
    }

    /// `I^α(A)` for self-adjoint `A`.
    pub fn skew(&self, a: &AlgebraElement, alpha: AlphaParam) -> Result<QuantityResult> {
        self.check_operand(a)?;
        self.check_self_adjoint(a)?;
        Ok(QuantityResult::hermitian(self.corr_unchecked(a, a, alpha.value())?))
    }

    /// `Corr^α(A, A)` for arbitrary `A`; Hermitian by traciality.
    pub fn skew_any(&self, a: &AlgebraElement, alpha: AlphaParam) -> Result<QuantityResult> {
        self.check_operand(a)?;
        Ok(QuantityResult::hermitian(self.corr_unchecked(a, a, alpha.value())?))
    }

    /// `½(Corr^α(A,B) + Corr^α(B†,A†))`; requires a Φ-density.
    pub fn corr_prime(&self, a: &AlgebraElement, b: &AlgebraElement, alpha: AlphaParam) -> Result<QuantityResult> {
        self.check_operand(a)?;
        self.check_operand(b)?;
        self.require_density()?;
        let x = self.corr_unchecked(a, b, alpha.value())?;
        let y = self.corr_unchecked(&b.adjoint(), &a.adjoint(), alpha.value())?;
        Ok(QuantityResult::raw((&x + &y).scale_real(0.5)))
    }

    pub fn skew_prime(&self, a: &AlgebraElement, alpha: AlphaParam) -> Result<QuantityResult> {
        let r = self.corr_prime(a, a, alpha)?;
        Ok(QuantityResult::hermitian(r.value))
    }

    /// `J(A) = 2V(A) − I^{1/2}(A)`.
    pub fn j(&self, a: &AlgebraElement) -> Result<QuantityResult> {
        self.check_self_adjoint(a)?;
        let v = self.variance(a)?;
        let i = self.skew(a, AlphaParam::HALF)?;
        Ok(QuantityResult::hermitian(&v.value.scale_real(2.0) - &i.value))
    }

    /// `U(A) = I^{1/2}(A) ♯ J(A)`.
    pub fn u(&self, a: &AlgebraElement) -> Result<QuantityResult> {
        let i = self.skew(a, AlphaParam::HALF)?;
        let j = self.j(a)?;
        let (mean, reg) = i.value.geometric_mean(&j.value, &self.tol)?;
        let mut r = QuantityResult::hermitian(mean);
        r.metadata.regularization = reg;
        Ok(r)
    }
}

pub fn gen_covariance(map: &TracialMap, rho: &AlgebraElement, a: &AlgebraElement, b: &AlgebraElement) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.covariance(a, b)
}

pub fn gen_variance(map: &TracialMap, rho: &AlgebraElement, a: &AlgebraElement) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.variance(a)
}

pub fn gen_covariance_prime(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.covariance_prime(a, b)
}

pub fn gen_variance_prime(map: &TracialMap, rho: &AlgebraElement, a: &AlgebraElement) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.variance_prime(a)
}

pub fn gen_correlation_alpha(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    alpha: f64,
) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.correlation(a, b, AlphaParam::new(alpha)?)
}

pub fn skew_information_alpha(map: &TracialMap, rho: &AlgebraElement, a: &AlgebraElement, alpha: f64) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.skew(a, AlphaParam::new(alpha)?)
}

pub fn corr_prime_alpha(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    alpha: f64,
) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.corr_prime(a, b, AlphaParam::new(alpha)?)
}

pub fn skew_info_prime_alpha(map: &TracialMap, rho: &AlgebraElement, a: &AlgebraElement, alpha: f64) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.skew_prime(a, AlphaParam::new(alpha)?)
}

pub fn j_quantity(map: &TracialMap, rho: &AlgebraElement, a: &AlgebraElement) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.j(a)
}

pub fn u_quantity(map: &TracialMap, rho: &AlgebraElement, a: &AlgebraElement) -> Result<QuantityResult> {
    Setting::new(map, rho, &Tolerance::default())?.u(a)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BlockAlgebra;
    use crate::hermitian::pauli::*;
    use crate::hermitian::ComplexMatrix;
    use crate::random::Sampler;
    use num_complex::Complex64;

    fn el(m: ComplexMatrix) -> AlgebraElement {
        AlgebraElement::single(m).unwrap()
    }

    fn scalar(r: &QuantityResult) -> Complex64 {
        assert_eq!(r.value.algebra().total_dim(), 1);
        r.value.block(0)[(0, 0)]
    }

    fn qubit(p: f64) -> (TracialMap, AlgebraElement) {
        (TracialMap::usual_trace(&BlockAlgebra::full(2).unwrap()), el(real_diag(&[p, 1.0 - p])))
    }

    fn close(z: Complex64, re: f64, im: f64, eps: f64) -> bool {
        (z - Complex64::new(re, im)).norm() <= eps
    }

    #[test]
    fn covariance_examples() {
        let (ut, rho) = qubit(0.75);
        assert!(close(scalar(&gen_covariance(&ut, &rho, &el(sigma_x()), &el(sigma_y())).unwrap()), 0.0, 0.5, 1e-14));
        let id = el(ComplexMatrix::identity(2, 2));
        assert!(close(scalar(&gen_covariance(&ut, &rho, &id, &el(sigma_z())).unwrap()), 0.0, 0.0, 1e-14));
        assert!(close(scalar(&gen_covariance(&ut, &rho, &el(sigma_x()), &el(sigma_x())).unwrap()), 1.0, 0.0, 1e-14));
        let not_density = el(real_diag(&[0.7, 0.7]));
        assert!(matches!(gen_covariance(&ut, &not_density, &id, &id), Err(Error::NotPhiDensity { .. })));
        let other = el(ComplexMatrix::identity(3, 3));
        assert!(matches!(gen_covariance(&ut, &rho, &other, &id), Err(Error::DomainMismatch(_))));
    }

    #[test]
    fn variance_examples() {
        for p in [0.1, 0.5, 0.75] {
            let (ut, rho) = qubit(p);
            assert!(close(scalar(&gen_variance(&ut, &rho, &el(sigma_x())).unwrap()), 1.0, 0.0, 1e-14));
        }
        let (ut, rho) = qubit(0.75);
        assert!(scalar(&gen_variance(&ut, &rho, &el(ComplexMatrix::identity(2, 2))).unwrap()).norm() < 1e-15);
        let c = el(ComplexMatrix::identity(2, 2).scale(3.5));
        assert!(scalar(&gen_variance(&ut, &rho, &c).unwrap()).norm() < 1e-14);
    }

    #[test]
    fn primed_covariance_examples() {
        let (ut, rho) = qubit(0.75);
        let (a, b) = (el(sigma_x()), el(sigma_y()));
        let cov = gen_covariance(&ut, &rho, &a, &b).unwrap();
        let covp = gen_covariance_prime(&ut, &rho, &a, &b).unwrap();
        assert!(cov.value.distance(&covp.value) < 1e-15);
        let heavy = el(real_diag(&[1.5, 0.5]));
        assert!(close(scalar(&gen_variance_prime(&ut, &heavy, &a).unwrap()), 2.0, 0.0, 1e-14));
        let id = el(ComplexMatrix::identity(2, 2));
        assert!(scalar(&gen_covariance_prime(&ut, &heavy, &id, &b).unwrap()).norm() < 1e-14);
        let zero = el(ComplexMatrix::zeros(2, 2));
        assert!(matches!(gen_variance_prime(&ut, &zero, &a), Err(Error::Singular { .. })));
    }

    #[test]
    fn correlation_and_skew_examples() {
        let (ut, rho) = qubit(0.75);
        let sx = el(sigma_x());
        let want = 1.0 - 2.0 * 0.1875_f64.sqrt();
        assert!((want - 0.1339746).abs() < 1e-7);
        assert!(close(scalar(&gen_correlation_alpha(&ut, &rho, &sx, &sx, 0.5).unwrap()), want, 0.0, 1e-14));
        assert!(close(scalar(&skew_information_alpha(&ut, &rho, &sx, 0.5).unwrap()), want, 0.0, 1e-14));
        let id = el(ComplexMatrix::identity(2, 2));
        for alpha in [0.0, 0.3, 1.0] {
            assert!(scalar(&gen_correlation_alpha(&ut, &rho, &id, &id, alpha).unwrap()).norm() < 1e-15);
            assert!(scalar(&skew_information_alpha(&ut, &rho, &id, alpha).unwrap()).norm() < 1e-15);
        }
        assert!(scalar(&skew_information_alpha(&ut, &rho, &sx, 1.0).unwrap()).norm() < 1e-15);
        let e12 = el(ComplexMatrix::from_row_slice(2, 2, &[0.0, 1.0, 0.0, 0.0].map(|x| Complex64::new(x, 0.0))));
        assert!(matches!(skew_information_alpha(&ut, &rho, &e12, 0.5), Err(Error::NotSelfAdjoint { .. })));
        assert!(skew_information_alpha(&ut, &rho, &sx, 1.5).is_err());
    }

    #[test]
    fn corr_at_alpha_one_vanishes_by_traciality() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let mut s = Sampler::new(4);
        let map = s.tracial_map(&domain, crate::maps::MapFamily::Composite, 2, &BlockAlgebra::full(2).unwrap()).unwrap();
        let rho = map.make_phi_density(3).unwrap();
        let a = s.hermitian_element(&domain);
        let r = gen_correlation_alpha(&map, &rho, &a, &a, 1.0).unwrap();
        assert!(r.value.max_abs() < 1e-12);
        // for non-normal A only Φ(ρ[A†, A]) survives
        let x = s.element(&domain);
        let r = gen_correlation_alpha(&map, &rho, &x, &x, 1.0).unwrap();
        let want = map.apply(&(&rho * &x.adjoint().commutator(&x))).unwrap();
        assert!(r.value.distance(&want) < 1e-12);
        assert!(want.max_abs() > 1e-3);
    }

    #[test]
    fn primed_correlation_examples() {
        let (ut, rho) = qubit(0.75);
        let sx = el(sigma_x());
        let i = skew_information_alpha(&ut, &rho, &sx, 0.3).unwrap();
        let ip = skew_info_prime_alpha(&ut, &rho, &sx, 0.3).unwrap();
        assert!(i.value.distance(&ip.value) < 1e-15);

        // σx + iσy = 2E₁₂: dilation oracle
        let a = el(sigma_x() + sigma_y().map(|z| z * Complex64::i()));
        let ip = skew_info_prime_alpha(&ut, &rho, &a, 0.5).unwrap();
        let dil_alg = BlockAlgebra::full(4).unwrap();
        let tilde_phi = TracialMap::scaled_block_trace(&dil_alg, vec![vec![0.5]]).unwrap();
        let zero = el(ComplexMatrix::zeros(2, 2));
        let tilde_a = AlgebraElement::block_2x2(&zero, &a.adjoint(), &a, &zero).unwrap();
        let tilde_rho = AlgebraElement::block_2x2(&rho, &zero, &zero, &rho).unwrap();
        let dilated = skew_information_alpha(&tilde_phi, &tilde_rho, &tilde_a, 0.5).unwrap();
        assert!((scalar(&ip) - scalar(&dilated)).norm() < 1e-14);
        // 4·(p + q − 2√(pq))/2 with p = 0.75, q = 0.25
        let closed = 2.0 * (1.0 - 2.0 * 0.1875_f64.sqrt());
        assert!((scalar(&ip).re - closed).abs() < 1e-14);

        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let map = TracialMap::center_expectation(&domain);
        let rho = map.make_phi_density(1).unwrap();
        let mut s = Sampler::new(2);
        let (x, y) = (s.element(&domain), s.element(&domain));
        let xy = corr_prime_alpha(&map, &rho, &x, &y, 0.3).unwrap();
        let yx = corr_prime_alpha(&map, &rho, &y, &x, 0.3).unwrap();
        assert!(xy.value.adjoint().distance(&yx.value) < 1e-12);
    }

    #[test]
    fn j_and_u_examples() {
        let (ut, rho) = qubit(0.75);
        let sx = el(sigma_x());
        let j = j_quantity(&ut, &rho, &sx).unwrap();
        assert!(close(scalar(&j), 1.0 + 2.0 * 0.1875_f64.sqrt(), 0.0, 1e-14));
        assert!((scalar(&j).re - 1.8660254).abs() < 1e-7);
        let u = u_quantity(&ut, &rho, &sx).unwrap();
        assert!(close(scalar(&u), 0.5, 0.0, 1e-12));
        assert!(u.metadata.regularization.is_none());
        // Luo's scalar form √(V² − (V − I)²)
        let v = scalar(&gen_variance(&ut, &rho, &sx).unwrap()).re;
        let i = scalar(&skew_information_alpha(&ut, &rho, &sx, 0.5).unwrap()).re;
        assert!((scalar(&u).re - (v * v - (v - i) * (v - i)).sqrt()).abs() < 1e-12);
        let id = el(ComplexMatrix::identity(2, 2));
        assert!(scalar(&j_quantity(&ut, &rho, &id).unwrap()).norm() < 1e-14);
        let u0 = u_quantity(&ut, &rho, &id).unwrap();
        assert!(scalar(&u0).norm() < 1e-9);
        assert!(u0.metadata.regularization.is_some());
    }

    #[test]
    fn kantorovich_examples() {
        assert_eq!(kantorovich(1.0, 1.0).unwrap(), 1.0);
        assert!((kantorovich(1.0, 3.0).unwrap() - 4.0 / 3.0).abs() < 1e-15);
        assert!((kantorovich(1.0, 4.0).unwrap() - 25.0 / 16.0).abs() < 1e-15);
        assert!(kantorovich(0.0, 1.0).is_err());
        assert!(kantorovich(2.0, 1.0).is_err());
    }

    #[test]
    fn alpha_param_validates() {
        assert!(AlphaParam::new(-0.1).is_err());
        assert!(AlphaParam::new(f64::NAN).is_err());
        assert_eq!(AlphaParam::new(1.0).unwrap().value(), 1.0);
    }
}
