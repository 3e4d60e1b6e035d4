//! Counterexample search: drop one hypothesis, draw instances that violate it, and
//! look for a negative margin with every other hypothesis met.
//!
//! A search that finds nothing only says so; it never claims the weakened statement.

use serde::{Deserialize, Serialize};

use super::instance::{draw_map, generate_with, DrawOptions, Instance, InstanceSpec, StateDraw};
use crate::error::{Error, Result};
use crate::hermitian::Tolerance;
use crate::maps::{MapFamily, MapKind, TracialMap};
use crate::random::{derive_seed, Sampler};
use crate::verify::{Mode, TheoremId, VerifierReport};

pub const SEARCH_SCHEMA_VERSION: u32 = 1;

const SEARCH_DIMS: [&[usize]; 5] = [&[2], &[3], &[2, 2], &[2, 3], &[1, 2]];
const SPEC_STREAM: u64 = 0x5ea2_c4ed;

/// A hypothesis that search can drop, or none.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Drop {
    None,
    CommutativeRange,
    SelfAdjoint,
    ConditionalExpectation,
    SpectralWindow,
    Density,
    PhiDensity,
    Unital,
}

impl Drop {
    pub const ALL: [Drop; 8] = [
        Drop::None,
        Drop::CommutativeRange,
        Drop::SelfAdjoint,
        Drop::ConditionalExpectation,
        Drop::SpectralWindow,
        Drop::Density,
        Drop::PhiDensity,
        Drop::Unital,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            Drop::None => "none",
            Drop::CommutativeRange => "commutative_range",
            Drop::SelfAdjoint => "self_adjoint",
            Drop::ConditionalExpectation => "conditional_expectation",
            Drop::SpectralWindow => "spectral_window",
            Drop::Density => "density",
            Drop::PhiDensity => "phi_density",
            Drop::Unital => "unital",
        }
    }

    /// Theorems whose hypothesis of this name can be dropped.
    pub fn targets(&self) -> &'static [TheoremId] {
        use TheoremId::*;
        match self {
            Drop::None => &[],
            Drop::CommutativeRange => &[SchrodingerCommutativeRange],
            Drop::SelfAdjoint => &[SkewNonneg],
            Drop::ConditionalExpectation => &[ConditionalExpectationSchrodinger, CorrCauchySchwarz, LuoRefined, IjIdentities],
            Drop::SpectralWindow => &[KadisonFamily],
            Drop::Density => &[HeisenbergClassical, SchrodingerClassical],
            Drop::PhiDensity => &[SkewLeVariance],
            Drop::Unital => &[MeanSubadditive],
        }
    }

    pub fn supports(&self, target: TheoremId) -> bool {
        *self == Drop::None || self.targets().contains(&target)
    }
}

impl std::str::FromStr for Drop {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        Drop::ALL
            .into_iter()
            .find(|d| d.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown hypothesis {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchConfig {
    pub target: TheoremId,
    pub drop: Drop,
    pub budget: usize,
    pub seed: u64,
    #[serde(default)]
    pub tolerance: Tolerance,
    #[serde(default)]
    pub mode: Mode,
}

impl SearchConfig {
    pub fn new(target: TheoremId, drop: Drop, budget: usize, seed: u64) -> Self {
        SearchConfig { target, drop, budget, seed, tolerance: Tolerance::default(), mode: Mode::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Violation {
    pub trial: u64,
    pub margin: f64,
    pub threshold: f64,
    pub instance: Instance,
    pub report: VerifierReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchReport {
    pub schema_version: u32,
    pub config: SearchConfig,
    pub trials_run: usize,
    pub errors: usize,
    pub found: bool,
    pub violation: Option<Violation>,
    pub message: String,
}

impl SearchReport {
    /// 1 when a violation was found, 0 otherwise.
    pub fn exit_code(&self) -> i32 {
        i32::from(self.found)
    }
}

fn families(config: &SearchConfig) -> Vec<MapFamily> {
    match config.drop {
        Drop::CommutativeRange => vec![MapFamily::Composite],
        Drop::ConditionalExpectation => vec![MapFamily::ScaledBlockTrace, MapFamily::Composite],
        Drop::Unital => vec![MapFamily::ScaledBlockTrace, MapFamily::Composite],
        _ => MapFamily::ALL.into_iter().filter(|f| config.target.supports(*f)).collect(),
    }
}

/// Multiplies every coefficient row by a random factor so that `Φ(I) ≠ I`.
fn non_unital(s: &mut Sampler, map: TracialMap) -> Result<TracialMap> {
    let mut factor = || {
        let f = s.uniform_range(0.2, 3.0);
        if (f - 1.0).abs() < 0.1 {
            f + 0.5
        } else {
            f
        }
    };
    match map.kind() {
        MapKind::ScaledBlockTrace { coeffs } => {
            let c = coeffs.iter().map(|row| row.iter().map(|x| x * factor()).collect()).collect();
            TracialMap::scaled_block_trace(map.domain(), c)
        }
        MapKind::Composite { coeffs, outer } => {
            let c = coeffs.iter().map(|row| row.iter().map(|x| x * factor()).collect()).collect();
            TracialMap::composite(map.domain(), c, outer.clone())
        }
        _ => Ok(map),
    }
}

fn trial_spec(config: &SearchConfig, fams: &[MapFamily], trial: u64) -> InstanceSpec {
    let mut s = Sampler::new(derive_seed(config.seed ^ SPEC_STREAM, trial));
    let dims = SEARCH_DIMS[s.index(SEARCH_DIMS.len())].to_vec();
    let family = fams[s.index(fams.len())];
    let k = match (config.drop, family) {
        // two unital targets always commute
        (Drop::CommutativeRange, _) => 3 + s.index(2),
        _ => 1 + s.index(3),
    };
    InstanceSpec::new(dims, family, config.budget.max(1), config.seed).with_k(k)
}

/// Draws the instance for `trial` exactly as the search does.
pub fn search_instance(config: &SearchConfig, trial: u64) -> Result<Instance> {
    let fams = families(config);
    if fams.is_empty() {
        return Err(Error::InvalidArgument(format!("{} applies to no built-in map family", config.target)));
    }
    let spec = trial_spec(config, &fams, trial);
    let opts = match config.drop {
        Drop::SelfAdjoint => DrawOptions { general_operators: true, ..Default::default() },
        Drop::SpectralWindow => DrawOptions { outside_window: true, ..Default::default() },
        Drop::Density => DrawOptions { state: Some(StateDraw::ScaledDensity), ..Default::default() },
        Drop::PhiDensity => DrawOptions { state: Some(StateDraw::ScaledPhiDensity), ..Default::default() },
        _ => DrawOptions::default(),
    };
    let keep_unital = config.drop != Drop::Unital;
    generate_with(config.target, &spec, trial, config.mode, opts, |s, spec| {
        let map = draw_map(s, spec)?;
        if keep_unital {
            Ok(map)
        } else {
            non_unital(s, map)
        }
    })
}

pub fn counterexample_search(config: &SearchConfig) -> Result<SearchReport> {
    if !config.drop.supports(config.target) {
        return Err(Error::InvalidArgument(format!(
            "dropping {} is not supported for {} (supported targets: {})",
            config.drop.as_str(),
            config.target,
            config.drop.targets().iter().map(|t| t.as_str()).collect::<Vec<_>>().join(", ")
        )));
    }
    let dropped = (config.drop != Drop::None).then(|| config.drop.as_str());
    let mut errors = 0;
    for trial in 0..config.budget as u64 {
        let inst = search_instance(config, trial)?;
        let report = match super::instance::run_instance(&inst, &config.tolerance) {
            Ok(r) => r,
            Err(_) => {
                errors += 1;
                continue;
            }
        };
        if report.violates_without(dropped) {
            let margin = report.margin.unwrap_or(f64::NAN);
            return Ok(SearchReport {
                schema_version: SEARCH_SCHEMA_VERSION,
                config: config.clone(),
                trials_run: trial as usize + 1,
                errors,
                found: true,
                message: format!("violation at trial {trial}: margin {margin:e} below -{:e}", report.threshold),
                violation: Some(Violation { trial, margin, threshold: report.threshold, instance: inst, report }),
            });
        }
    }
    Ok(SearchReport {
        schema_version: SEARCH_SCHEMA_VERSION,
        config: config.clone(),
        trials_run: config.budget,
        errors,
        found: false,
        violation: None,
        message: format!("none found within budget {}", config.budget),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn planted_falsehood_is_found() {
        let c = SearchConfig::new(TheoremId::PlantedVarianceLeSkew, Drop::None, 100, 7);
        let r = counterexample_search(&c).unwrap();
        assert!(r.found && r.exit_code() == 1);
        let v = r.violation.unwrap();
        // replaying the serialized instance reproduces the margin
        let back = Instance::from_json_str(&v.instance.to_json_pretty().unwrap()).unwrap();
        let again = super::super::instance::run_instance(&back, &c.tolerance).unwrap();
        assert_eq!(again.margin, Some(v.margin));
    }

    #[test]
    fn zero_budget_finds_nothing() {
        let c = SearchConfig::new(TheoremId::PlantedVarianceLeSkew, Drop::None, 0, 7);
        let r = counterexample_search(&c).unwrap();
        assert!(!r.found && r.trials_run == 0 && r.exit_code() == 0);
    }

    #[test]
    fn theorems_with_all_hypotheses_kept() {
        for t in [TheoremId::LuoRefined, TheoremId::SkewLeVariance, TheoremId::UncertaintyMain] {
            let r = counterexample_search(&SearchConfig::new(t, Drop::None, 30, 7)).unwrap();
            assert!(!r.found, "{t}: {:?}", r.violation.map(|v| v.report));
        }
    }

    #[test]
    fn unsupported_pairs_are_rejected() {
        let c = SearchConfig::new(TheoremId::LuoRefined, Drop::Unital, 10, 7);
        assert!(matches!(counterexample_search(&c), Err(Error::InvalidArgument(_))));
        assert!("bogus".parse::<Drop>().is_err());
    }

    #[test]
    fn dropped_hypothesis_is_actually_violated() {
        for drop in Drop::ALL.into_iter().skip(1) {
            for &t in drop.targets() {
                let c = SearchConfig::new(t, drop, 5, 3);
                for trial in 0..5 {
                    let inst = search_instance(&c, trial).unwrap();
                    let r = super::super::instance::run_instance(&inst, &c.tolerance).unwrap();
                    let h = r.hypothesis(drop.as_str()).unwrap_or_else(|| panic!("{t} lacks {}", drop.as_str()));
                    assert_ne!(h.status, crate::verify::HypothesisStatus::Met, "{t}/{}: {h:?}", drop.as_str());
                }
            }
        }
    }

    #[test]
    fn non_self_adjoint_skew_is_found() {
        let c = SearchConfig::new(TheoremId::SkewNonneg, Drop::SelfAdjoint, 200, 7);
        assert!(counterexample_search(&c).unwrap().found);
    }
}
