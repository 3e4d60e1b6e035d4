//! One verifier per inequality. Each returns a [`VerifierReport`] with the status of
//! every hypothesis, one signed margin per checked inequality and a verdict.
//!
//! Margins are `λ_min(LHS − RHS)` for operator inequalities and `LHS − RHS` for
//! scalars; identities report `−‖LHS − RHS‖₂`. All checks of one report share the
//! threshold `tol.abs + tol.rel·scale`, where `scale` is the largest norm among the
//! compared operators (at least 1). The report margin is the minimum over checks, and
//! `pass` holds exactly when every hypothesis is met and that margin is at least
//! `−threshold`.
//!
//! Verifiers keep evaluating when a hypothesis fails, as long as the quantities are
//! still defined, so that counterexample search can inspect the margins.

mod classical;
mod covariance;
mod skew;

pub use classical::{verify_heisenberg_classical, verify_schrodinger_classical};
pub use covariance::{
    verify_conditional_expectation_schrodinger, verify_kadison_family, verify_mean_subadditive,
    verify_schrodinger_commutative_range, verify_uncertainty_main, verify_uncertainty_main_factored,
};
pub use skew::{
    verify_alpha_convexity, verify_corr_cauchy_schwarz, verify_ij_identities, verify_luo_refined,
    verify_planted_variance_le_skew, verify_skew_le_variance, verify_skew_monotone_half, verify_skew_nonneg,
    verify_skew_sum_nonneg,
};

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, ElementSpectrum};
use crate::error::{Error, Result};
use crate::hermitian::Tolerance;
use crate::maps::{MapFamily, TracialMap};
use crate::matrix_json::MatrixJson;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TheoremId {
    HeisenbergClassical,
    SchrodingerClassical,
    SchrodingerCommutativeRange,
    ConditionalExpectationSchrodinger,
    UncertaintyMain,
    KadisonFamily,
    SkewNonneg,
    AlphaConvexity,
    SkewMonotoneHalf,
    SkewSumNonneg,
    CorrCauchySchwarz,
    SkewLeVariance,
    LuoRefined,
    MeanSubadditive,
    IjIdentities,
    /// Deliberately false: `V(A) ≤ I^{1/2}(A)`. Used to exercise counterexample search.
    PlantedVarianceLeSkew,
}

impl TheoremId {
    /// Every genuine theorem (excludes the planted falsehood).
    pub const ALL: [TheoremId; 15] = [
        TheoremId::HeisenbergClassical,
        TheoremId::SchrodingerClassical,
        TheoremId::SchrodingerCommutativeRange,
        TheoremId::ConditionalExpectationSchrodinger,
        TheoremId::UncertaintyMain,
        TheoremId::KadisonFamily,
        TheoremId::SkewNonneg,
        TheoremId::AlphaConvexity,
        TheoremId::SkewMonotoneHalf,
        TheoremId::SkewSumNonneg,
        TheoremId::CorrCauchySchwarz,
        TheoremId::SkewLeVariance,
        TheoremId::LuoRefined,
        TheoremId::MeanSubadditive,
        TheoremId::IjIdentities,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            TheoremId::HeisenbergClassical => "heisenberg_classical",
            TheoremId::SchrodingerClassical => "schrodinger_classical",
            TheoremId::SchrodingerCommutativeRange => "schrodinger_commutative_range",
            TheoremId::ConditionalExpectationSchrodinger => "conditional_expectation_schrodinger",
            TheoremId::UncertaintyMain => "uncertainty_main",
            TheoremId::KadisonFamily => "kadison_family",
            TheoremId::SkewNonneg => "skew_nonneg",
            TheoremId::AlphaConvexity => "alpha_convexity",
            TheoremId::SkewMonotoneHalf => "skew_monotone_half",
            TheoremId::SkewSumNonneg => "skew_sum_nonneg",
            TheoremId::CorrCauchySchwarz => "corr_cauchy_schwarz",
            TheoremId::SkewLeVariance => "skew_le_variance",
            TheoremId::LuoRefined => "luo_refined",
            TheoremId::MeanSubadditive => "mean_subadditive",
            TheoremId::IjIdentities => "ij_identities",
            TheoremId::PlantedVarianceLeSkew => "planted_variance_le_skew",
        }
    }

    /// Map families on which the statement is asserted.
    pub fn supports(&self, family: MapFamily) -> bool {
        use MapFamily::*;
        match self {
            TheoremId::HeisenbergClassical | TheoremId::SchrodingerClassical => family == UsualTrace,
            TheoremId::SchrodingerCommutativeRange => family != Composite,
            TheoremId::ConditionalExpectationSchrodinger
            | TheoremId::CorrCauchySchwarz
            | TheoremId::LuoRefined
            | TheoremId::IjIdentities => matches!(family, CenterExpectation | UsualTrace),
            TheoremId::KadisonFamily | TheoremId::MeanSubadditive => family != UsualTrace,
            TheoremId::UncertaintyMain
            | TheoremId::SkewNonneg
            | TheoremId::AlphaConvexity
            | TheoremId::SkewMonotoneHalf
            | TheoremId::SkewSumNonneg
            | TheoremId::SkewLeVariance
            | TheoremId::PlantedVarianceLeSkew => true,
        }
    }
}

impl fmt::Display for TheoremId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for TheoremId {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        TheoremId::ALL
            .into_iter()
            .chain([TheoremId::PlantedVarianceLeSkew])
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown theorem id {s:?}")))
    }
}

/// How the spectral window of the main uncertainty relation is read.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    /// `(m, M)` from `sp(−iρ^{1/2}[A,B]ρ^{1/2})`, as literally stated.
    Strict,
    /// `(m, M)` from `sp(|φ₁(ρ[A,B])|)`, the operator the proof actually bounds.
    #[default]
    Relaxed,
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "strict" => Ok(Mode::Strict),
            "relaxed" => Ok(Mode::Relaxed),
            _ => Err(Error::InvalidArgument(format!("unknown mode {s:?} (expected strict or relaxed)"))),
        }
    }
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Strict => "strict",
            Mode::Relaxed => "relaxed",
        })
    }
}

/// Hypothesis set for the covariance-type results.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Variant {
    /// Tracial positive map with a Φ-density (or `Φ(ρ) > 0`).
    #[default]
    Tracial,
    /// `ρ = I` with a unital positive map; traciality is not needed.
    UnitalIdentityDensity,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HypothesisStatus {
    Met,
    Unmet,
    Regularized,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Hypothesis {
    pub name: String,
    pub status: HypothesisStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Side {
    Scalar { value: f64 },
    Operator { blocks: Vec<MatrixJson> },
}

impl Side {
    pub fn operator(x: &AlgebraElement) -> Self {
        Side::Operator { blocks: x.to_json() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerifierReport {
    pub schema_version: u32,
    pub theorem: TheoremId,
    pub hypotheses: Vec<Hypothesis>,
    /// Minimum over `checks`; `None` when no inequality could be evaluated.
    pub margin: Option<f64>,
    pub threshold: f64,
    pub pass: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mode: Option<Mode>,
    pub tolerance: Tolerance,
    pub checks: Vec<Check>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub lhs: Option<Side>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rhs: Option<Side>,
    #[serde(default)]
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl VerifierReport {
    pub fn hypotheses_met(&self) -> bool {
        self.hypotheses.iter().all(|h| h.status == HypothesisStatus::Met)
    }

    pub fn hypothesis(&self, name: &str) -> Option<&Hypothesis> {
        self.hypotheses.iter().find(|h| h.name == name)
    }

    pub fn check(&self, name: &str) -> Option<&Check> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn check_margin(&self, name: &str) -> Option<f64> {
        self.check(name).map(|c| c.margin)
    }

    /// All hypotheses met but some inequality failed.
    pub fn is_margin_failure(&self) -> bool {
        self.hypotheses_met() && !self.pass
    }

    /// Every hypothesis other than `dropped` is met and the margin is below `−threshold`.
    pub fn violates_without(&self, dropped: Option<&str>) -> bool {
        let others_met = self
            .hypotheses
            .iter()
            .all(|h| h.status == HypothesisStatus::Met || Some(h.name.as_str()) == dropped);
        others_met && self.margin.is_some_and(|m| m < -self.threshold)
    }

    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub(crate) struct ReportBuilder {
    theorem: TheoremId,
    tol: Tolerance,
    hypotheses: Vec<Hypothesis>,
    checks: Vec<(String, f64)>,
    scale: f64,
    mode: Option<Mode>,
    lhs: Option<Side>,
    rhs: Option<Side>,
    metadata: BTreeMap<String, serde_json::Value>,
}

impl ReportBuilder {
    pub fn new(theorem: TheoremId, tol: &Tolerance) -> Self {
        ReportBuilder {
            theorem,
            tol: *tol,
            hypotheses: Vec::new(),
            checks: Vec::new(),
            scale: 1.0,
            mode: None,
            lhs: None,
            rhs: None,
            metadata: BTreeMap::new(),
        }
    }

    pub fn tol(&self) -> &Tolerance {
        &self.tol
    }

    pub fn hypothesis(&mut self, name: &str, status: HypothesisStatus, detail: impl Into<String>) -> &mut Self {
        self.hypotheses.push(Hypothesis { name: name.into(), status, detail: detail.into() });
        self
    }

    pub fn require(&mut self, name: &str, ok: bool, detail: impl Into<String>) -> bool {
        let status = if ok { HypothesisStatus::Met } else { HypothesisStatus::Unmet };
        self.hypothesis(name, status, detail);
        ok
    }

    pub fn check(&mut self, name: &str, margin: f64, scale: f64) {
        self.checks.push((name.into(), margin));
        if scale.is_finite() {
            self.scale = self.scale.max(scale);
        }
    }

    /// `LHS ≥ RHS` in the Löwner order.
    pub fn check_geq(&mut self, name: &str, lhs: &AlgebraElement, rhs: &AlgebraElement) -> Result<f64> {
        let (margin, scale) = loewner_margin(lhs, rhs)?;
        self.check(name, margin, scale);
        Ok(margin)
    }

    /// `X ≥ 0`.
    pub fn check_psd(&mut self, name: &str, x: &AlgebraElement) -> Result<f64> {
        let sp = ElementSpectrum::new(&x.hermitian_part())?;
        self.check(name, sp.lambda_min(), sp.norm2());
        Ok(sp.lambda_min())
    }

    /// `LHS = RHS`, reported as `−‖LHS − RHS‖₂`.
    pub fn check_equal(&mut self, name: &str, lhs: &AlgebraElement, rhs: &AlgebraElement) -> Result<f64> {
        let defect = (lhs - rhs).norm2()?;
        let scale = lhs.norm2()?.max(rhs.norm2()?);
        self.check(name, -defect, scale);
        Ok(-defect)
    }

    pub fn mode(&mut self, mode: Mode) -> &mut Self {
        self.mode = Some(mode);
        self
    }

    pub fn sides(&mut self, lhs: Side, rhs: Side) -> &mut Self {
        self.lhs = Some(lhs);
        self.rhs = Some(rhs);
        self
    }

    /// Non-finite values are stored as strings so the report stays valid JSON.
    pub fn meta(&mut self, key: &str, value: impl Into<serde_json::Value>) -> &mut Self {
        let v: serde_json::Value = value.into();
        self.metadata.insert(key.into(), v);
        self
    }

    pub fn meta_f64(&mut self, key: &str, value: f64) -> &mut Self {
        let v = if value.is_finite() { serde_json::Value::from(value) } else { serde_json::Value::from(value.to_string()) };
        self.metadata.insert(key.into(), v);
        self
    }

    pub fn finish(self) -> VerifierReport {
        let threshold = self.tol.threshold(self.scale);
        let checks: Vec<Check> = self
            .checks
            .into_iter()
            .map(|(name, margin)| Check { pass: margin >= -threshold, name, margin })
            .collect();
        let margin = checks.iter().map(|c| c.margin).reduce(f64::min);
        let met = self.hypotheses.iter().all(|h| h.status == HypothesisStatus::Met);
        let pass = met && margin.is_some_and(|m| m >= -threshold);
        VerifierReport {
            schema_version: SCHEMA_VERSION,
            theorem: self.theorem,
            hypotheses: self.hypotheses,
            margin,
            threshold,
            pass,
            mode: self.mode,
            tolerance: self.tol,
            checks,
            lhs: self.lhs,
            rhs: self.rhs,
            metadata: self.metadata,
        }
    }
}

/// `(λ_min(LHS − RHS), max(‖LHS‖₂, ‖RHS‖₂))` on Hermitian parts.
pub fn loewner_margin(lhs: &AlgebraElement, rhs: &AlgebraElement) -> Result<(f64, f64)> {
    lhs.same_algebra(rhs)?;
    let d = ElementSpectrum::new(&(lhs - rhs).hermitian_part())?;
    let scale = lhs.hermitian_part().hermitian_norm2()?.max(rhs.hermitian_part().hermitian_norm2()?);
    Ok((d.lambda_min(), scale))
}

/// `½(XY + YX)`, the product used when factors are known to commute.
pub(crate) fn jordan(x: &AlgebraElement, y: &AlgebraElement) -> AlgebraElement {
    x.anticommutator(y).scale_real(0.5)
}

/// `max |XY − YX|`.
pub(crate) fn ordering_deviation(x: &AlgebraElement, y: &AlgebraElement) -> f64 {
    x.commutator(y).max_abs()
}

/// Records `tracial_positive`, or `unital_positive` + `rho_identity` for the
/// `ρ = I` variant.
pub(crate) fn map_hypotheses(
    b: &mut ReportBuilder,
    map: &TracialMap,
    rho: &AlgebraElement,
    variant: Variant,
) -> Result<()> {
    match variant {
        Variant::Tracial => {
            b.require("tracial_positive", true, format!("built-in {} map", map.family()));
        }
        Variant::UnitalIdentityDensity => {
            let defect = map.unital_defect()?;
            b.require("unital_positive", defect <= 1e-10, format!("||Phi(I) - I|| = {defect:.3e}"));
            let dist = (rho - &AlgebraElement::identity(rho.algebra())).max_abs();
            b.require("rho_identity", dist <= b.tol().threshold(1.0), format!("max|rho - I| = {dist:.3e}"));
        }
    }
    Ok(())
}

pub(crate) fn self_adjoint_hypothesis(b: &mut ReportBuilder, name: &str, x: &AlgebraElement) -> bool {
    let defect = x.hermitian_defect();
    let ok = defect <= b.tol().threshold(x.max_abs());
    b.require(name, ok, format!("max|X - X*| = {defect:.3e}"))
}

/// The map is a (possibly conjugated) center expectation, or the usual trace as its
/// scalar specialization.
pub(crate) fn conditional_expectation_hypothesis(b: &mut ReportBuilder, map: &TracialMap) -> bool {
    let family = map.family();
    let ok = matches!(family, MapFamily::CenterExpectation | MapFamily::UsualTrace);
    b.require("conditional_expectation", ok, format!("{family} map"))
}

/// Embeds a value of a conditional expectation back into its domain (scalars as
/// multiples of the identity).
pub(crate) fn embed_in_domain(map: &TracialMap, x: &AlgebraElement) -> Result<AlgebraElement> {
    match map.family() {
        MapFamily::CenterExpectation => Ok(x.clone()),
        MapFamily::UsualTrace => Ok(AlgebraElement::scalar(map.domain(), x.block(0)[(0, 0)])),
        f => Err(Error::InvalidArgument(format!("{f} map has no embedding into its domain"))),
    }
}
