//! Tracial positive linear maps between direct sums of matrix blocks.
//!
//! Every built-in kind depends on its argument only through the block traces
//! `tr(X₁), …, tr(X_b)`, which is what makes it tracial:
//!
//! * `UsualTrace`: `X ↦ Σᵢ tr(Xᵢ)` into `ℂ`.
//! * `ScaledBlockTrace`: `X ↦ diag_j(Σᵢ c_ji tr(Xᵢ))` into `ℂᵏ`, `c ≥ 0`.
//! * `CenterExpectation`: `X ↦ ⊕ᵢ (tr(Xᵢ)/nᵢ) I_{nᵢ}`, the trace-preserving
//!   conditional expectation onto the center.
//! * `Composite`: a scaled block trace into `ℂᵏ` followed by `eⱼ ↦ Qⱼ` with `Qⱼ ≥ 0`.
//!
//! A map may carry a blockwise unitary `U`, in which case it evaluates
//! `X ↦ Φ(U†XU)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::error::{Error, Result};
use crate::hermitian::{hermitize, max_abs, ComplexMatrix, Tolerance};
use crate::matrix_json::MatrixJson;
use crate::nnls::nnls;
use crate::random::Sampler;

const UNITAL_TOL: f64 = 1e-10;
const DENSITY_TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MapFamily {
    UsualTrace,
    ScaledBlockTrace,
    CenterExpectation,
    Composite,
}

impl MapFamily {
    pub const ALL: [MapFamily; 4] =
        [MapFamily::UsualTrace, MapFamily::ScaledBlockTrace, MapFamily::CenterExpectation, MapFamily::Composite];

    pub fn as_str(&self) -> &'static str {
        match self {
            MapFamily::UsualTrace => "usual-trace",
            MapFamily::ScaledBlockTrace => "scaled-block-trace",
            MapFamily::CenterExpectation => "center-expectation",
            MapFamily::Composite => "composite",
        }
    }
}

impl fmt::Display for MapFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MapFamily {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        MapFamily::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown map kind {s:?}")))
    }
}

/// `eⱼ ↦ Qⱼ`: a positive map from `ℂᵏ` into a block algebra.
#[derive(Debug, Clone, PartialEq)]
pub struct PositiveAssignment {
    codomain: BlockAlgebra,
    targets: Vec<AlgebraElement>,
}

impl PositiveAssignment {
    pub fn new(codomain: &BlockAlgebra, targets: Vec<AlgebraElement>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::InvalidArgument("a positive assignment needs at least one target".into()));
        }
        let tol = Tolerance::default();
        let mut cleaned = Vec::with_capacity(targets.len());
        for q in targets {
            if q.algebra() != codomain {
                return Err(Error::DomainMismatch("target outside the codomain".into()));
            }
            if !q.is_self_adjoint(&tol) {
                return Err(Error::NotSelfAdjoint { defect: q.hermitian_defect() });
            }
            let q = q.hermitian_part();
            let sp = crate::algebra::ElementSpectrum::new(&q)?;
            let threshold = tol.threshold(sp.norm2());
            if sp.lambda_min() < -threshold {
                return Err(Error::NotPsd { lambda_min: sp.lambda_min(), threshold });
            }
            cleaned.push(q);
        }
        Ok(PositiveAssignment { codomain: codomain.clone(), targets: cleaned })
    }

    /// `Qⱼ' = S^{-1/2} Qⱼ S^{-1/2}` with `S = Σ Qⱼ`, so that `Σ Qⱼ' = I`.
    pub fn normalized(codomain: &BlockAlgebra, raw: Vec<AlgebraElement>) -> Result<Self> {
        let first = Self::new(codomain, raw)?;
        let tol = Tolerance::default();
        let s_inv_half = first.sum().power(-0.5, &tol)?;
        let targets = first.targets.iter().map(|q| (&(&s_inv_half * q) * &s_inv_half).hermitian_part()).collect();
        Self::new(codomain, targets)
    }

    /// `eⱼ ↦ eⱼ` on `ℂᵏ`.
    pub fn identity_diagonal(k: usize) -> Result<Self> {
        let alg = BlockAlgebra::diagonal(k)?;
        let targets = (0..k)
            .map(|j| {
                let v: Vec<Complex64> =
                    (0..k).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect();
                AlgebraElement::diagonal(&v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(&alg, targets)
    }

    /// `eᵢ ↦ Pᵢ`, the central projection onto block `i`.
    pub fn block_projections(alg: &BlockAlgebra) -> Result<Self> {
        let b = alg.num_blocks();
        let targets = (0..b)
            .map(|j| {
                let v: Vec<Complex64> =
                    (0..b).map(|i| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0)).collect();
                AlgebraElement::central(alg, &v)
            })
            .collect::<Result<Vec<_>>>()?;
        Self::new(alg, targets)
    }

    pub fn codomain(&self) -> &BlockAlgebra {
        &self.codomain
    }

    pub fn targets(&self) -> &[AlgebraElement] {
        &self.targets
    }

    pub fn len(&self) -> usize {
        self.targets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.targets.is_empty()
    }

    pub fn sum(&self) -> AlgebraElement {
        let mut s = AlgebraElement::zeros(&self.codomain);
        for q in &self.targets {
            s = &s + q;
        }
        s
    }

    /// `Σⱼ yⱼ Qⱼ`.
    pub fn apply(&self, y: &[Complex64]) -> Result<AlgebraElement> {
        if y.len() != self.targets.len() {
            return Err(Error::DimensionMismatch { expected: self.targets.len(), got: y.len() });
        }
        let mut out = AlgebraElement::zeros(&self.codomain);
        for (q, &c) in self.targets.iter().zip(y) {
            out = &out + &q.scale(c);
        }
        Ok(out)
    }

    /// Applies the assignment to an element of `ℂᵏ`.
    pub fn apply_diagonal(&self, d: &AlgebraElement) -> Result<AlgebraElement> {
        if d.algebra() != &BlockAlgebra::diagonal(self.len())? {
            return Err(Error::DomainMismatch(format!("expected an element of C^{}", self.len())));
        }
        let y: Vec<Complex64> = d.blocks().iter().map(|b| b[(0, 0)]).collect();
        self.apply(&y)
    }

    pub fn unital_defect(&self) -> Result<f64> {
        (&self.sum() - &AlgebraElement::identity(&self.codomain)).hermitian_norm2()
    }

    pub fn is_unital(&self) -> bool {
        self.unital_defect().map(|d| d <= UNITAL_TOL).unwrap_or(false)
    }

    /// Largest `‖[Qᵢ, Qⱼ]‖_max` relative to the squared target scale.
    pub fn commutator_defect(&self) -> f64 {
        let scale = self.targets.iter().map(AlgebraElement::max_abs).fold(1.0, f64::max);
        let mut worst = 0.0_f64;
        for i in 0..self.targets.len() {
            for j in i + 1..self.targets.len() {
                worst = worst.max(self.targets[i].commutator(&self.targets[j]).max_abs());
            }
        }
        worst / (scale * scale)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum MapKind {
    UsualTrace,
    ScaledBlockTrace { coeffs: Vec<Vec<f64>> },
    CenterExpectation,
    Composite { coeffs: Vec<Vec<f64>>, outer: PositiveAssignment },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MapJson", into = "MapJson")]
pub struct TracialMap {
    kind: MapKind,
    domain: BlockAlgebra,
    codomain: BlockAlgebra,
    unitary: Option<Vec<ComplexMatrix>>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TracialCheck {
    pub max_deviation: f64,
    pub scale: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositivityCheck {
    pub positivity_ok: bool,
    /// Smallest `λ_min(Φ(X)) / max(‖Φ(X)‖₂, 1)` over the samples.
    pub min_margin: f64,
    pub unital_defect: f64,
}

fn check_coeffs(domain: &BlockAlgebra, coeffs: &[Vec<f64>], allow_negative: bool) -> Result<()> {
    if coeffs.is_empty() {
        return Err(Error::InvalidArgument("coefficient matrix needs at least one row".into()));
    }
    for row in coeffs {
        if row.len() != domain.num_blocks() {
            return Err(Error::DimensionMismatch { expected: domain.num_blocks(), got: row.len() });
        }
        if row.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        if !allow_negative && row.iter().any(|&c| c < 0.0) {
            return Err(Error::InvalidArgument("block-trace coefficients must be nonnegative".into()));
        }
    }
    Ok(())
}

fn combine(coeffs: &[Vec<f64>], traces: &[Complex64]) -> Vec<Complex64> {
    coeffs.iter().map(|row| row.iter().zip(traces).map(|(&c, &t)| t * c).sum()).collect()
}

impl TracialMap {
    pub fn usual_trace(domain: &BlockAlgebra) -> Self {
        TracialMap {
            kind: MapKind::UsualTrace,
            domain: domain.clone(),
            codomain: BlockAlgebra::diagonal(1).expect("one block"),
            unitary: None,
        }
    }

    pub fn center_expectation(domain: &BlockAlgebra) -> Self {
        TracialMap { kind: MapKind::CenterExpectation, domain: domain.clone(), codomain: domain.clone(), unitary: None }
    }

    pub fn scaled_block_trace(domain: &BlockAlgebra, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        check_coeffs(domain, &coeffs, false)?;
        Ok(Self::sbt_unchecked(domain, coeffs))
    }

    /// Skips the sign check on the coefficients. Only useful for exercising
    /// [`TracialMap::check_positive_unital`] on a map that is not positive.
    #[doc(hidden)]
    pub fn scaled_block_trace_unchecked(domain: &BlockAlgebra, coeffs: Vec<Vec<f64>>) -> Result<Self> {
        check_coeffs(domain, &coeffs, true)?;
        Ok(Self::sbt_unchecked(domain, coeffs))
    }

    fn sbt_unchecked(domain: &BlockAlgebra, coeffs: Vec<Vec<f64>>) -> Self {
        let k = coeffs.len();
        TracialMap {
            kind: MapKind::ScaledBlockTrace { coeffs },
            domain: domain.clone(),
            codomain: BlockAlgebra::diagonal(k).expect("k >= 1"),
            unitary: None,
        }
    }

    pub fn composite(domain: &BlockAlgebra, coeffs: Vec<Vec<f64>>, outer: PositiveAssignment) -> Result<Self> {
        check_coeffs(domain, &coeffs, false)?;
        if coeffs.len() != outer.len() {
            return Err(Error::DimensionMismatch { expected: coeffs.len(), got: outer.len() });
        }
        let codomain = outer.codomain().clone();
        Ok(TracialMap { kind: MapKind::Composite { coeffs, outer }, domain: domain.clone(), codomain, unitary: None })
    }

    pub fn kind(&self) -> &MapKind {
        &self.kind
    }

    pub fn family(&self) -> MapFamily {
        match self.kind {
            MapKind::UsualTrace => MapFamily::UsualTrace,
            MapKind::ScaledBlockTrace { .. } => MapFamily::ScaledBlockTrace,
            MapKind::CenterExpectation => MapFamily::CenterExpectation,
            MapKind::Composite { .. } => MapFamily::Composite,
        }
    }

    pub fn domain(&self) -> &BlockAlgebra {
        &self.domain
    }

    pub fn codomain(&self) -> &BlockAlgebra {
        &self.codomain
    }

    pub fn unitary(&self) -> Option<&[ComplexMatrix]> {
        self.unitary.as_deref()
    }

    fn traces(&self, x: &AlgebraElement) -> Vec<Complex64> {
        match &self.unitary {
            None => x.block_traces(),
            Some(us) => x.blocks().iter().zip(us).map(|(b, u)| (u.adjoint() * b * u).trace()).collect(),
        }
    }

    fn element_from_traces(&self, t: &[Complex64]) -> AlgebraElement {
        match &self.kind {
            MapKind::UsualTrace => AlgebraElement::diagonal(&[t.iter().sum()]).expect("one block"),
            MapKind::ScaledBlockTrace { coeffs } => AlgebraElement::diagonal(&combine(coeffs, t)).expect("k >= 1"),
            MapKind::CenterExpectation => {
                let c: Vec<Complex64> = t.iter().zip(self.domain.dims()).map(|(&ti, &n)| ti / n as f64).collect();
                AlgebraElement::central(&self.domain, &c).expect("matching blocks")
            }
            MapKind::Composite { coeffs, outer } => outer.apply(&combine(coeffs, t)).expect("matching length"),
        }
    }

    pub fn apply(&self, x: &AlgebraElement) -> Result<AlgebraElement> {
        if x.algebra() != &self.domain {
            return Err(Error::DomainMismatch(format!(
                "map domain {:?}, element algebra {:?}",
                self.domain.dims(),
                x.algebra().dims()
            )));
        }
        Ok(self.element_from_traces(&self.traces(x)))
    }

    pub fn unital_defect(&self) -> Result<f64> {
        let out = self.apply(&AlgebraElement::identity(&self.domain))?;
        (&out - &AlgebraElement::identity(&self.codomain)).hermitian_part().hermitian_norm2()
    }

    pub fn is_unital(&self) -> bool {
        self.unital_defect().map(|d| d <= UNITAL_TOL).unwrap_or(false)
    }

    /// Largest relative commutator among range generators; zero for the kinds whose
    /// codomain is commutative or whose range lies in the center.
    pub fn range_commutator_defect(&self) -> f64 {
        match &self.kind {
            MapKind::Composite { outer, .. } => outer.commutator_defect(),
            _ => 0.0,
        }
    }

    /// `Φ(𝒜)` is a commutative set of operators.
    pub fn has_commutative_range(&self) -> bool {
        self.range_commutator_defect() <= 1e-12
    }

    /// Samples random pairs and returns `max ‖Φ(AB) − Φ(BA)‖₂`.
    pub fn check_tracial(&self, trials: usize, seed: u64) -> Result<TracialCheck> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        let mut max_deviation = 0.0_f64;
        let mut scale = 1.0_f64;
        for t in 0..trials as u64 {
            let mut s = Sampler::for_trial(seed, t);
            let a = s.element(&self.domain);
            let b = s.element(&self.domain);
            let ab = self.apply(&(&a * &b))?;
            let ba = self.apply(&(&b * &a))?;
            max_deviation = max_deviation.max((&ab - &ba).norm2()?);
            scale = scale.max(ab.norm2()?).max(ba.norm2()?);
        }
        Ok(TracialCheck { max_deviation, scale })
    }

    /// Applies the map to random PSD inputs. The first samples are supported on a
    /// single block each, so a negative coefficient on any block is detected.
    pub fn check_positive_unital(&self, trials: usize, seed: u64) -> Result<PositivityCheck> {
        if trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        let nb = self.domain.num_blocks();
        let mut min_margin = f64::INFINITY;
        for t in 0..trials.max(nb) {
            let mut s = Sampler::for_trial(seed, t as u64);
            let mut x = s.wishart_element(&self.domain);
            if t < nb {
                let blocks = x
                    .blocks()
                    .iter()
                    .enumerate()
                    .map(|(i, b)| if i == t { b.clone() } else { ComplexMatrix::zeros(b.nrows(), b.ncols()) })
                    .collect();
                x = AlgebraElement::new(self.domain.clone(), blocks)?;
            }
            let y = self.apply(&x)?.hermitian_part();
            let sp = crate::algebra::ElementSpectrum::new(&y)?;
            min_margin = min_margin.min(sp.lambda_min() / sp.norm2().max(1.0));
        }
        Ok(PositivityCheck { positivity_ok: min_margin >= -1e-9, min_margin, unital_defect: self.unital_defect()? })
    }

    /// `X ↦ Φ(U†XU)`; conjugating an already conjugated map composes the unitaries.
    pub fn conjugate_map(&self, us: &[ComplexMatrix]) -> Result<TracialMap> {
        if us.len() != self.domain.num_blocks() {
            return Err(Error::DimensionMismatch { expected: self.domain.num_blocks(), got: us.len() });
        }
        for (u, &n) in us.iter().zip(self.domain.dims()) {
            if u.nrows() != n || u.ncols() != n {
                return Err(Error::DomainMismatch(format!("unitary of shape {}x{} for block {n}", u.nrows(), u.ncols())));
            }
            let defect = max_abs(&(u.adjoint() * u - ComplexMatrix::identity(n, n)));
            if !(defect <= 1e-10) {
                return Err(Error::NotUnitary { defect });
            }
        }
        let combined = match &self.unitary {
            None => us.to_vec(),
            Some(old) => us.iter().zip(old).map(|(u, u0)| u * u0).collect(),
        };
        Ok(TracialMap { unitary: Some(combined), ..self.clone() })
    }

    /// `Φ = φ₂ ∘ φ₁` with `φ₁` a scaled block trace into `ℂᵏ` (carrying this map's
    /// unitary) and `φ₂` a positive assignment.
    pub fn factorization(&self) -> Result<(TracialMap, PositiveAssignment)> {
        let (coeffs, outer) = match &self.kind {
            MapKind::UsualTrace => {
                (vec![vec![1.0; self.domain.num_blocks()]], PositiveAssignment::identity_diagonal(1)?)
            }
            MapKind::ScaledBlockTrace { coeffs } => (coeffs.clone(), PositiveAssignment::identity_diagonal(coeffs.len())?),
            MapKind::CenterExpectation => {
                let b = self.domain.num_blocks();
                let dims = self.domain.dims();
                let c = (0..b).map(|j| (0..b).map(|i| if i == j { 1.0 / dims[i] as f64 } else { 0.0 }).collect()).collect();
                (c, PositiveAssignment::block_projections(&self.domain)?)
            }
            MapKind::Composite { coeffs, outer } => (coeffs.clone(), outer.clone()),
        };
        let mut inner = Self::sbt_unchecked(&self.domain, coeffs);
        inner.unitary = self.unitary.clone();
        Ok((inner, outer))
    }

    /// `‖Φ(ρ) − I‖₂`.
    pub fn density_defect(&self, rho: &AlgebraElement) -> Result<f64> {
        let out = self.apply(rho)?;
        (&out - &AlgebraElement::identity(&self.codomain)).hermitian_part().hermitian_norm2()
    }

    /// PSD within `tol` and `‖Φ(ρ) − I‖₂ ≤ tol.threshold(1)`.
    pub fn is_phi_density(&self, rho: &AlgebraElement, tol: &Tolerance) -> bool {
        let check = || -> Result<bool> {
            if !rho.is_self_adjoint(tol) {
                return Ok(false);
            }
            Ok(rho.hermitian_part().is_psd(tol)? && self.density_defect(rho)? <= tol.threshold(1.0))
        };
        check().unwrap_or(false)
    }

    /// Block traces `t ≥ 0` with `Φ(⊕ tᵢ/nᵢ I) = I`, or the infeasibility residual.
    fn density_traces(&self, sampler: &mut Sampler) -> Result<Vec<f64>> {
        let dims: Vec<f64> = self.domain.dims().iter().map(|&n| n as f64).collect();
        match &self.kind {
            MapKind::CenterExpectation => Ok(dims),
            MapKind::UsualTrace => {
                let raw: Vec<f64> = dims.iter().map(|n| n * sampler.uniform_range(0.25, 1.0)).collect();
                let s: f64 = raw.iter().sum();
                Ok(raw.into_iter().map(|t| t / s).collect())
            }
            MapKind::ScaledBlockTrace { coeffs } => {
                let ones = vec![1.0; coeffs.len()];
                self.solve_traces(coeffs, &ones, &dims, sampler)
            }
            MapKind::Composite { coeffs, outer } => {
                let x = if outer.is_unital() { vec![1.0; outer.len()] } else { identity_weights(outer)? };
                self.solve_traces(coeffs, &x, &dims, sampler)
            }
        }
    }

    fn solve_traces(&self, coeffs: &[Vec<f64>], rhs: &[f64], dims: &[f64], sampler: &mut Sampler) -> Result<Vec<f64>> {
        let k = coeffs.len();
        let b = dims.len();
        let c = DMatrix::from_fn(k, b, |j, i| coeffs[j][i]);
        let y = DVector::from_column_slice(rhs);
        let sol = nnls(&c, &y);
        if !(sol.residual <= DENSITY_TOL) {
            return Err(Error::Infeasible { residual: sol.residual });
        }
        let mut t: Vec<f64> = sol.x.iter().copied().collect();
        // blend with the trace vector of the identity when it is itself a solution
        let via_identity = DVector::from_column_slice(dims);
        if (&c * &via_identity - &y).amax() <= 1e-12 * y.amax().max(1.0) {
            let lambda = sampler.uniform_range(0.25, 1.0);
            for (ti, &ni) in t.iter_mut().zip(dims) {
                *ti = lambda * ni + (1.0 - lambda) * *ti;
            }
        }
        Ok(t)
    }

    /// A random Φ-density: Wishart blocks rescaled to block traces solving `Φ(ρ) = I`.
    pub fn make_phi_density(&self, seed: u64) -> Result<AlgebraElement> {
        let mut sampler = Sampler::new(seed);
        let traces = self.density_traces(&mut sampler)?;
        let blocks = self
            .domain
            .dims()
            .iter()
            .zip(&traces)
            .map(|(&n, &t)| {
                let w = sampler.wishart(n).into_matrix();
                let tr = w.trace().re;
                hermitize(&w.scale(t / tr)).map(|h| h.into_matrix())
            })
            .collect::<Result<Vec<_>>>()?;
        let rho = AlgebraElement::new(self.domain.clone(), blocks)?;
        let residual = self.density_defect(&rho)?;
        if !(residual <= DENSITY_TOL) {
            return Err(Error::Infeasible { residual });
        }
        Ok(rho)
    }
}

/// Nonnegative weights `x` with `Σ xⱼ Qⱼ = I`, via NNLS on the real embedding.
fn identity_weights(outer: &PositiveAssignment) -> Result<Vec<f64>> {
    let id = AlgebraElement::identity(outer.codomain());
    let flatten = |e: &AlgebraElement| -> Vec<f64> {
        e.blocks().iter().flat_map(|b| b.iter().flat_map(|z| [z.re, z.im]).collect::<Vec<_>>()).collect()
    };
    let cols: Vec<Vec<f64>> = outer.targets().iter().map(flatten).collect();
    let rhs = flatten(&id);
    let a = DMatrix::from_fn(rhs.len(), cols.len(), |r, c| cols[c][r]);
    let sol = nnls(&a, &DVector::from_vec(rhs));
    if !(sol.residual <= DENSITY_TOL) {
        return Err(Error::Infeasible { residual: sol.residual });
    }
    Ok(sol.x.iter().copied().collect())
}

/// Serialized form of a [`TracialMap`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MapJson {
    pub kind: MapFamily,
    pub domain_blocks: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coeffs: Option<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub codomain_blocks: Option<Vec<usize>>,
    /// Composite targets as full block-diagonal matrices of the codomain.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub targets: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unitary: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub unital: Option<bool>,
}

impl TryFrom<MapJson> for TracialMap {
    type Error = Error;
    fn try_from(j: MapJson) -> Result<Self> {
        let domain = BlockAlgebra::new(j.domain_blocks)?;
        let need_coeffs = || j.coeffs.clone().ok_or_else(|| Error::Schema(format!("{} map needs \"coeffs\"", j.kind)));
        let map = match j.kind {
            MapFamily::UsualTrace => TracialMap::usual_trace(&domain),
            MapFamily::CenterExpectation => TracialMap::center_expectation(&domain),
            MapFamily::ScaledBlockTrace => TracialMap::scaled_block_trace(&domain, need_coeffs()?)?,
            MapFamily::Composite => {
                let coeffs = need_coeffs()?;
                let targets = j.targets.as_ref().ok_or_else(|| Error::Schema("composite map needs \"targets\"".into()))?;
                let first = targets.first().ok_or_else(|| Error::Schema("\"targets\" is empty".into()))?;
                let codomain = BlockAlgebra::new(j.codomain_blocks.clone().unwrap_or_else(|| vec![first.dim]))?;
                let qs = targets
                    .iter()
                    .map(|t| AlgebraElement::from_block_diagonal(&codomain, &t.to_matrix()?))
                    .collect::<Result<Vec<_>>>()?;
                TracialMap::composite(&domain, coeffs, PositiveAssignment::new(&codomain, qs)?)?
            }
        };
        let map = match &j.unitary {
            None => map,
            Some(us) => map.conjugate_map(&us.iter().map(MatrixJson::to_matrix).collect::<Result<Vec<_>>>()?)?,
        };
        if j.unital == Some(true) && !map.is_unital() {
            return Err(Error::Schema(format!("map flagged unital has defect {:e}", map.unital_defect()?)));
        }
        Ok(map)
    }
}

impl From<TracialMap> for MapJson {
    fn from(m: TracialMap) -> Self {
        let unital = Some(m.is_unital());
        let (coeffs, codomain_blocks, targets) = match &m.kind {
            MapKind::UsualTrace | MapKind::CenterExpectation => (None, None, None),
            MapKind::ScaledBlockTrace { coeffs } => (Some(coeffs.clone()), None, None),
            MapKind::Composite { coeffs, outer } => (
                Some(coeffs.clone()),
                Some(outer.codomain().dims().to_vec()),
                Some(outer.targets().iter().map(|q| MatrixJson::from_matrix(&q.to_block_diagonal())).collect()),
            ),
        };
        MapJson {
            kind: m.family(),
            domain_blocks: m.domain.dims().to_vec(),
            coeffs,
            codomain_blocks,
            targets,
            unitary: m.unitary.as_ref().map(|us| us.iter().map(MatrixJson::from_matrix).collect()),
            unital,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hermitian::pauli::*;

    fn c(x: f64) -> Complex64 {
        Complex64::new(x, 0.0)
    }

    fn m2() -> BlockAlgebra {
        BlockAlgebra::full(2).unwrap()
    }

    fn el(m: ComplexMatrix) -> AlgebraElement {
        AlgebraElement::single(m).unwrap()
    }

    fn scalar_value(x: &AlgebraElement) -> Complex64 {
        assert_eq!(x.algebra().dims(), &[1]);
        x.block(0)[(0, 0)]
    }

    fn composite_2x3() -> TracialMap {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let mut s = Sampler::new(5);
        let coeffs = s.unital_coefficients(&domain, 3);
        let outer = s.unital_assignment(&m2(), 3).unwrap();
        TracialMap::composite(&domain, coeffs, outer).unwrap()
    }

    #[test]
    fn apply_examples() {
        let ce = TracialMap::center_expectation(&m2());
        assert!(ce.apply(&el(sigma_z())).unwrap().max_abs() == 0.0);
        let ut = TracialMap::usual_trace(&m2());
        assert!((scalar_value(&ut.apply(&el(real_diag(&[0.75, 0.25]))).unwrap()) - c(1.0)).norm() < 1e-15);
        let comp = composite_2x3();
        let id = AlgebraElement::identity(comp.domain());
        assert!(comp.apply(&id).unwrap().distance(&AlgebraElement::identity(comp.codomain())) < 1e-10);
        assert!(ut.apply(&AlgebraElement::identity(&BlockAlgebra::full(3).unwrap())).is_err());
    }

    #[test]
    fn apply_preserves_adjoints() {
        let comp = composite_2x3();
        let x = Sampler::new(2).element(comp.domain());
        let lhs = comp.apply(&x.adjoint()).unwrap();
        let rhs = comp.apply(&x).unwrap().adjoint();
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn tracial_examples() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let ce = TracialMap::center_expectation(&domain);
        let t = ce.check_tracial(50, 1).unwrap();
        assert!(t.max_deviation <= 1e-12 * t.scale);
        let sbt = TracialMap::scaled_block_trace(&domain, vec![vec![0.3, 0.1], vec![0.0, 1.0]]).unwrap();
        let t = sbt.check_tracial(50, 1).unwrap();
        assert!(t.max_deviation <= 1e-12 * t.scale);
        assert!(ce.check_tracial(0, 1).is_err());
    }

    #[test]
    fn positivity_examples() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let p = TracialMap::center_expectation(&domain).check_positive_unital(10, 3).unwrap();
        assert!(p.positivity_ok && p.unital_defect <= 1e-12);
        let p = composite_2x3().check_positive_unital(10, 3).unwrap();
        assert!(p.positivity_ok && p.unital_defect <= 1e-10);
        let bad = TracialMap::scaled_block_trace_unchecked(&domain, vec![vec![0.5, -0.1]]).unwrap();
        assert!(!bad.check_positive_unital(1, 3).unwrap().positivity_ok);
        assert!(TracialMap::scaled_block_trace(&domain, vec![vec![0.5, -0.1]]).is_err());
    }

    #[test]
    fn phi_density_examples() {
        let ut = TracialMap::usual_trace(&m2());
        let rho = ut.make_phi_density(1).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let ce = TracialMap::center_expectation(&domain);
        let rho = ce.make_phi_density(9).unwrap();
        let t = rho.block_traces();
        assert!((t[0].re - 2.0).abs() < 1e-12 && (t[1].re - 3.0).abs() < 1e-12);
        let dead = TracialMap::scaled_block_trace(&domain, vec![vec![0.0, 0.0]]).unwrap();
        assert!(matches!(dead.make_phi_density(1), Err(Error::Infeasible { .. })));
    }

    #[test]
    fn phi_density_for_every_kind() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let tol = Tolerance::default();
        let maps = vec![
            TracialMap::usual_trace(&domain),
            TracialMap::center_expectation(&domain),
            TracialMap::scaled_block_trace(&domain, vec![vec![0.2, 0.2], vec![0.5, 0.0]]).unwrap(),
            composite_2x3(),
        ];
        for m in maps {
            for seed in 0..20 {
                let rho = m.make_phi_density(seed).unwrap();
                assert!(m.is_phi_density(&rho, &tol), "{:?} seed {seed}", m.family());
            }
        }
    }

    #[test]
    fn non_unital_assignment_density() {
        // Q₁ = 2I, Q₂ = diag(1, 0): Σ xQ = I forces x = (1/2, 0)
        let outer = PositiveAssignment::new(&m2(), vec![el(real_diag(&[2.0, 2.0])), el(real_diag(&[1.0, 0.0]))]).unwrap();
        assert!(!outer.is_unital());
        let domain = BlockAlgebra::new(vec![1, 2]).unwrap();
        let m = TracialMap::composite(&domain, vec![vec![1.0, 0.0], vec![0.0, 1.0]], outer).unwrap();
        let rho = m.make_phi_density(4).unwrap();
        assert!(m.is_phi_density(&rho, &Tolerance::default()));
        assert!(rho.block_traces()[1].norm() < 1e-12);
    }

    #[test]
    fn is_phi_density_examples() {
        let ut = TracialMap::usual_trace(&m2());
        let tol = Tolerance::default();
        assert!(ut.is_phi_density(&el(real_diag(&[0.5, 0.5])), &tol));
        assert!(!ut.is_phi_density(&el(real_diag(&[0.7, 0.7])), &tol));
        let ce = TracialMap::center_expectation(&m2());
        assert!(ce.is_phi_density(&el(sigma_x() + real_diag(&[1.0, 1.0])), &tol));
        assert!(!ce.is_phi_density(&el(real_diag(&[1.5, -0.5])), &tol));
    }

    #[test]
    fn conjugation_examples() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let ce = TracialMap::center_expectation(&domain);
        let id: Vec<ComplexMatrix> = domain.dims().iter().map(|&n| ComplexMatrix::identity(n, n)).collect();
        let us = Sampler::new(3).unitary_blocks(&domain);
        let x = Sampler::new(4).element(&domain);
        assert!(ce.conjugate_map(&id).unwrap().apply(&x).unwrap().distance(&ce.apply(&x).unwrap()) < 1e-15);
        assert!(ce.conjugate_map(&us).unwrap().apply(&x).unwrap().distance(&ce.apply(&x).unwrap()) < 1e-12);
        let comp = composite_2x3().conjugate_map(&us).unwrap();
        let t = comp.check_tracial(50, 8).unwrap();
        assert!(t.max_deviation <= 1e-9 * t.scale);
        let p = comp.check_positive_unital(20, 8).unwrap();
        assert!(p.positivity_ok);
        let mut bad = us.clone();
        bad[0] = bad[0].scale(1.1);
        assert!(matches!(ce.conjugate_map(&bad), Err(Error::NotUnitary { .. })));
    }

    #[test]
    fn center_expectation_is_a_bimodule_map() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let ce = TracialMap::center_expectation(&domain);
        let mut s = Sampler::new(12);
        let x = s.element(&domain);
        let b = AlgebraElement::central(&domain, &[Complex64::new(0.3, 1.0), c(-2.0)]).unwrap();
        let d = AlgebraElement::central(&domain, &[c(4.0), Complex64::new(0.0, 0.5)]).unwrap();
        let lhs = ce.apply(&(&(&b * &x) * &d)).unwrap();
        let rhs = &(&b * &ce.apply(&x).unwrap()) * &d;
        assert!(lhs.distance(&rhs) < 1e-12);
    }

    #[test]
    fn factorization_reproduces_the_map() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let us = Sampler::new(3).unitary_blocks(&domain);
        let maps = vec![
            TracialMap::usual_trace(&domain),
            TracialMap::center_expectation(&domain),
            TracialMap::scaled_block_trace(&domain, vec![vec![0.2, 0.2], vec![0.5, 0.0]]).unwrap(),
            composite_2x3(),
            composite_2x3().conjugate_map(&us).unwrap(),
        ];
        let x = Sampler::new(6).element(&domain);
        for m in maps {
            let (inner, outer) = m.factorization().unwrap();
            let via = outer.apply_diagonal(&inner.apply(&x).unwrap()).unwrap();
            assert!(via.distance(&m.apply(&x).unwrap()) < 1e-12, "{:?}", m.family());
            assert_eq!(outer.codomain(), m.codomain());
        }
    }

    #[test]
    fn commutative_range() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        assert!(TracialMap::center_expectation(&domain).has_commutative_range());
        let sbt = TracialMap::scaled_block_trace(&domain, vec![vec![0.2, 0.2], vec![0.5, 0.0]]).unwrap();
        assert!(sbt.has_commutative_range());
        let mut s = Sampler::new(1);
        let (x, y) = (s.element(&domain), s.element(&domain));
        let (fx, fy) = (sbt.apply(&x).unwrap(), sbt.apply(&y).unwrap());
        assert_eq!(&fx * &fy, &fy * &fx);
        assert!(!composite_2x3().has_commutative_range());
    }

    #[test]
    fn json_round_trip() {
        let domain = BlockAlgebra::new(vec![2, 3]).unwrap();
        let us = Sampler::new(3).unitary_blocks(&domain);
        let maps = vec![
            TracialMap::usual_trace(&domain),
            TracialMap::center_expectation(&domain).conjugate_map(&us).unwrap(),
            TracialMap::scaled_block_trace(&domain, vec![vec![0.2, 0.2]]).unwrap(),
            composite_2x3(),
        ];
        for m in maps {
            let text = serde_json::to_string(&m).unwrap();
            let back: TracialMap = serde_json::from_str(&text).unwrap();
            assert_eq!(back.family(), m.family());
            let x = Sampler::new(6).element(&domain);
            assert!(back.apply(&x).unwrap().distance(&m.apply(&x).unwrap()) < 1e-12);
        }
        let parsed: TracialMap =
            serde_json::from_str(r#"{"kind": "scaled-block-trace", "domain_blocks": [2], "coeffs": [[0.5]], "unital": true}"#)
                .unwrap();
        assert!(parsed.is_unital());
        let bad = serde_json::from_str::<TracialMap>(
            r#"{"kind": "scaled-block-trace", "domain_blocks": [2], "coeffs": [[0.4]], "unital": true}"#,
        );
        assert!(bad.is_err());
        assert!(serde_json::from_str::<TracialMap>(r#"{"kind": "partial-trace", "domain_blocks": [2]}"#).is_err());
    }
}
