//! Random instances for each theorem, their JSON form, and dispatch to the verifiers.

use serde::{Deserialize, Serialize};

use crate::algebra::{AlgebraElement, BlockAlgebra};
use crate::error::{Error, Result};
use crate::hermitian::Tolerance;
use crate::maps::{MapFamily, TracialMap};
use crate::matrix_json::MatrixJson;
use crate::random::{derive_seed, Sampler};
use crate::verify::{self, Mode, TheoremId, Variant, VerifierReport};

pub const INSTANCE_SCHEMA_VERSION: u32 = 1;

/// `{0, 0.1, …, 1}`.
pub fn default_alpha_grid() -> Vec<f64> {
    (0..=10).map(|i| i as f64 / 10.0).collect()
}

fn default_k() -> usize {
    2
}

fn default_codomain() -> Vec<usize> {
    vec![2]
}

/// What to draw: the block algebra, the map family and its shape, the α grid, and
/// the trial count with the campaign seed. Trial `t` draws from `derive_seed(seed, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct InstanceSpec {
    pub block_dims: Vec<usize>,
    pub map_kind: MapFamily,
    /// Rows of the scaled block trace (and targets of a composite map).
    #[serde(default = "default_k")]
    pub k: usize,
    /// Codomain of composite maps.
    #[serde(default = "default_codomain")]
    pub codomain: Vec<usize>,
    #[serde(default = "default_alpha_grid")]
    pub alpha_grid: Vec<f64>,
    pub trials: usize,
    pub seed: u64,
    #[serde(default)]
    pub variant: Variant,
}

impl InstanceSpec {
    pub fn new(block_dims: Vec<usize>, map_kind: MapFamily, trials: usize, seed: u64) -> Self {
        InstanceSpec {
            block_dims,
            map_kind,
            k: default_k(),
            codomain: default_codomain(),
            alpha_grid: default_alpha_grid(),
            trials,
            seed,
            variant: Variant::Tracial,
        }
    }

    pub fn with_k(mut self, k: usize) -> Self {
        self.k = k;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::InvalidArgument("trials must be at least 1".into()));
        }
        if self.k == 0 {
            return Err(Error::InvalidArgument("k must be at least 1".into()));
        }
        BlockAlgebra::new(self.block_dims.clone())?;
        BlockAlgebra::new(self.codomain.clone())?;
        if self.alpha_grid.is_empty() {
            return Err(Error::InvalidArgument("alpha grid is empty".into()));
        }
        if let Some(a) = self.alpha_grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
            return Err(Error::InvalidArgument(format!("alpha {a} outside [0, 1]")));
        }
        Ok(())
    }

    pub fn domain(&self) -> Result<BlockAlgebra> {
        BlockAlgebra::new(self.block_dims.clone())
    }

    pub fn trial_seed(&self, trial: u64) -> u64 {
        derive_seed(self.seed, trial)
    }
}

/// One concrete verifier input. Fields a theorem does not use are `None`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "InstanceJson", into = "InstanceJson")]
pub struct Instance {
    pub theorem: TheoremId,
    pub trial: u64,
    pub seed: u64,
    pub map: TracialMap,
    pub rho: Option<AlgebraElement>,
    pub a: AlgebraElement,
    pub b: Option<AlgebraElement>,
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    /// `(m, M)` for the Kadison family.
    pub window: Option<(f64, f64)>,
    pub variant: Variant,
    pub mode: Mode,
}

#[derive(Serialize, Deserialize)]
struct InstanceJson {
    schema_version: u32,
    theorem: TheoremId,
    trial: u64,
    seed: u64,
    map: TracialMap,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    rho: Option<Vec<MatrixJson>>,
    a: Vec<MatrixJson>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    b: Option<Vec<MatrixJson>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    alpha: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    window: Option<(f64, f64)>,
    #[serde(default)]
    variant: Variant,
    #[serde(default)]
    mode: Mode,
}

impl From<Instance> for InstanceJson {
    fn from(i: Instance) -> Self {
        InstanceJson {
            schema_version: INSTANCE_SCHEMA_VERSION,
            theorem: i.theorem,
            trial: i.trial,
            seed: i.seed,
            rho: i.rho.as_ref().map(AlgebraElement::to_json),
            a: i.a.to_json(),
            b: i.b.as_ref().map(AlgebraElement::to_json),
            map: i.map,
            alpha: i.alpha,
            beta: i.beta,
            window: i.window,
            variant: i.variant,
            mode: i.mode,
        }
    }
}

impl TryFrom<InstanceJson> for Instance {
    type Error = Error;
    fn try_from(j: InstanceJson) -> Result<Self> {
        if j.schema_version != INSTANCE_SCHEMA_VERSION {
            return Err(Error::Schema(format!("unsupported instance schema version {}", j.schema_version)));
        }
        let alg = j.map.domain().clone();
        let load = |blocks: &[MatrixJson]| AlgebraElement::from_json(&alg, blocks);
        Ok(Instance {
            theorem: j.theorem,
            trial: j.trial,
            seed: j.seed,
            rho: j.rho.as_deref().map(load).transpose()?,
            a: load(&j.a)?,
            b: j.b.as_deref().map(load).transpose()?,
            map: j.map,
            alpha: j.alpha,
            beta: j.beta,
            window: j.window,
            variant: j.variant,
            mode: j.mode,
        })
    }
}

impl Instance {
    pub fn to_json_pretty(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn from_json_str(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::Schema(e.to_string()))
    }
}

/// How the state is drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(crate) enum StateDraw {
    /// Trace-one density matrix.
    Density,
    /// Generic positive definite element (only `Φ(ρ) > 0` matters).
    Positive,
    /// Φ-density of the map.
    PhiDensity,
    /// Φ-density multiplied by a random factor in `[1.5, 4]`, so the density
    /// hypothesis fails.
    ScaledPhiDensity,
    /// Trace-one density multiplied by a random factor in `[1.5, 4]`.
    ScaledDensity,
    Identity,
}

/// Knobs that counterexample search turns; the campaign uses the defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub(crate) struct DrawOptions {
    pub state: Option<StateDraw>,
    /// Draw `A` (and `B`) without the self-adjointness constraint.
    pub general_operators: bool,
    /// Draw the spectrum of `|A|` above the stated Kadison window.
    pub outside_window: bool,
}


fn default_state(theorem: TheoremId, variant: Variant) -> Option<StateDraw> {
    use TheoremId::*;
    if variant == Variant::UnitalIdentityDensity {
        return match theorem {
            KadisonFamily | MeanSubadditive => None,
            _ => Some(StateDraw::Identity),
        };
    }
    match theorem {
        HeisenbergClassical | SchrodingerClassical => Some(StateDraw::Density),
        SchrodingerCommutativeRange => Some(StateDraw::Positive),
        KadisonFamily | MeanSubadditive => None,
        _ => Some(StateDraw::PhiDensity),
    }
}

fn needs_b(theorem: TheoremId) -> bool {
    use TheoremId::*;
    matches!(
        theorem,
        HeisenbergClassical
            | SchrodingerClassical
            | SchrodingerCommutativeRange
            | ConditionalExpectationSchrodinger
            | UncertaintyMain
            | CorrCauchySchwarz
            | LuoRefined
            | MeanSubadditive
    )
}

fn uses_alpha(theorem: TheoremId) -> bool {
    use TheoremId::*;
    matches!(theorem, SkewNonneg | AlphaConvexity | SkewMonotoneHalf | SkewSumNonneg | CorrCauchySchwarz)
}

fn draw_state(s: &mut Sampler, map: &TracialMap, how: StateDraw) -> Result<AlgebraElement> {
    let alg = map.domain();
    Ok(match how {
        StateDraw::Density => s.density_element(alg),
        StateDraw::Positive => s.wishart_element(alg),
        StateDraw::PhiDensity => map.make_phi_density(s.next_u64())?,
        StateDraw::ScaledPhiDensity => {
            let c = s.uniform_range(1.5, 4.0);
            map.make_phi_density(s.next_u64())?.scale_real(c)
        }
        StateDraw::ScaledDensity => {
            let c = s.uniform_range(1.5, 4.0);
            s.density_element(alg).scale_real(c)
        }
        StateDraw::Identity => AlgebraElement::identity(alg),
    })
}

/// Draws the map for `spec` from the trial's sampler.
pub(crate) fn draw_map(s: &mut Sampler, spec: &InstanceSpec) -> Result<TracialMap> {
    let domain = spec.domain()?;
    let codomain = BlockAlgebra::new(spec.codomain.clone())?;
    s.tracial_map(&domain, spec.map_kind, spec.k, &codomain)
}

/// Draws trial `trial` of `spec` for `theorem`.
pub fn generate(theorem: TheoremId, spec: &InstanceSpec, trial: u64, mode: Mode) -> Result<Instance> {
    generate_with(theorem, spec, trial, mode, DrawOptions::default(), draw_map)
}

pub(crate) fn generate_with(
    theorem: TheoremId,
    spec: &InstanceSpec,
    trial: u64,
    mode: Mode,
    opts: DrawOptions,
    map_draw: impl Fn(&mut Sampler, &InstanceSpec) -> Result<TracialMap>,
) -> Result<Instance> {
    let seed = spec.trial_seed(trial);
    let mut s = Sampler::new(seed);
    let map = map_draw(&mut s, spec)?;
    let alg = map.domain().clone();
    let state = opts.state.or_else(|| default_state(theorem, spec.variant));
    let rho = state.map(|how| draw_state(&mut s, &map, how)).transpose()?;

    let operator = |s: &mut Sampler| if opts.general_operators { s.element(&alg) } else { s.hermitian_element(&alg) };
    let mut window = None;
    let (a, b) = match theorem {
        TheoremId::SkewSumNonneg => (s.element(&alg), None),
        TheoremId::MeanSubadditive => {
            (s.spectral_element(&alg, 0.05, 3.0, false), Some(s.spectral_element(&alg, 0.05, 3.0, false)))
        }
        TheoremId::KadisonFamily => {
            let m = s.uniform_range(0.1, 1.0);
            let big_m = m + s.uniform_range(0.0, 3.0);
            let a = if opts.outside_window {
                s.spectral_element(&alg, 1.5 * big_m, 3.0 * big_m, true)
            } else {
                s.spectral_element(&alg, m, big_m, true)
            };
            window = Some((m, big_m));
            (a, None)
        }
        t => {
            let a = operator(&mut s);
            let b = needs_b(t).then(|| operator(&mut s));
            (a, b)
        }
    };

    let grid = &spec.alpha_grid;
    let (alpha, beta) = if uses_alpha(theorem) {
        let alpha = grid[(trial % grid.len() as u64) as usize];
        let beta = (theorem == TheoremId::AlphaConvexity).then(|| grid[s.index(grid.len())]);
        (Some(alpha), beta)
    } else {
        (None, None)
    };

    Ok(Instance {
        theorem,
        trial,
        seed,
        map,
        rho,
        a,
        b,
        alpha,
        beta,
        window,
        variant: spec.variant,
        mode,
    })
}

fn missing(what: &str, theorem: TheoremId) -> Error {
    Error::Schema(format!("instance has no {what}, which {theorem} needs"))
}

/// Runs `theorem` on the instance (normally `inst.theorem`).
pub fn run_theorem(inst: &Instance, theorem: TheoremId, mode: Mode, tol: &Tolerance) -> Result<VerifierReport> {
    use TheoremId::*;
    let rho = || inst.rho.as_ref().ok_or_else(|| missing("rho", theorem));
    let b = || inst.b.as_ref().ok_or_else(|| missing("b", theorem));
    let alpha = || inst.alpha.ok_or_else(|| missing("alpha", theorem));
    let (map, a, variant) = (&inst.map, &inst.a, inst.variant);
    match theorem {
        HeisenbergClassical => verify::verify_heisenberg_classical(rho()?, a, b()?, tol),
        SchrodingerClassical => verify::verify_schrodinger_classical(rho()?, a, b()?, tol),
        SchrodingerCommutativeRange => verify::verify_schrodinger_commutative_range(map, rho()?, a, b()?, variant, tol),
        ConditionalExpectationSchrodinger => {
            verify::verify_conditional_expectation_schrodinger(map, rho()?, a, b()?, variant, tol)
        }
        UncertaintyMain => verify::verify_uncertainty_main(map, rho()?, a, b()?, mode, variant, tol),
        KadisonFamily => {
            let (m, big_m) = inst.window.ok_or_else(|| missing("window", theorem))?;
            verify::verify_kadison_family(map, a, m, big_m, tol)
        }
        SkewNonneg => verify::verify_skew_nonneg(map, rho()?, a, alpha()?, tol),
        AlphaConvexity => {
            let beta = inst.beta.ok_or_else(|| missing("beta", theorem))?;
            verify::verify_alpha_convexity(map, rho()?, a, alpha()?, beta, tol)
        }
        SkewMonotoneHalf => verify::verify_skew_monotone_half(map, rho()?, a, alpha()?, tol),
        SkewSumNonneg => verify::verify_skew_sum_nonneg(map, rho()?, a, alpha()?, tol),
        CorrCauchySchwarz => verify::verify_corr_cauchy_schwarz(map, rho()?, a, b()?, alpha()?, tol),
        SkewLeVariance => verify::verify_skew_le_variance(map, rho()?, a, tol),
        LuoRefined => verify::verify_luo_refined(map, rho()?, a, b()?, tol),
        MeanSubadditive => verify::verify_mean_subadditive(map, a, b()?, tol),
        IjIdentities => verify::verify_ij_identities(map, rho()?, a, tol),
        PlantedVarianceLeSkew => verify::verify_planted_variance_le_skew(map, rho()?, a, tol),
    }
}

pub fn run_instance(inst: &Instance, tol: &Tolerance) -> Result<VerifierReport> {
    run_theorem(inst, inst.theorem, inst.mode, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_validation() {
        let spec = InstanceSpec::new(vec![2, 3], MapFamily::CenterExpectation, 0, 7);
        assert!(spec.validate().is_err());
        let mut spec = InstanceSpec::new(vec![2, 3], MapFamily::CenterExpectation, 1, 7);
        assert!(spec.validate().is_ok());
        spec.alpha_grid = vec![1.5];
        assert!(spec.validate().is_err());
        let spec = InstanceSpec::new(vec![0], MapFamily::CenterExpectation, 1, 7);
        assert!(spec.validate().is_err());
    }

    #[test]
    fn generation_is_deterministic() {
        let spec = InstanceSpec::new(vec![2, 3], MapFamily::Composite, 10, 7);
        for t in TheoremId::ALL {
            let x = generate(t, &spec, 3, Mode::Relaxed).unwrap();
            let y = generate(t, &spec, 3, Mode::Relaxed).unwrap();
            assert_eq!(x, y);
        }
    }

    #[test]
    fn instances_round_trip_exactly() {
        let spec = InstanceSpec::new(vec![2, 3], MapFamily::Composite, 10, 7);
        let tol = Tolerance::default();
        for t in TheoremId::ALL {
            let inst = generate(t, &spec, 1, Mode::Relaxed).unwrap();
            let back = Instance::from_json_str(&inst.to_json_pretty().unwrap()).unwrap();
            assert_eq!(inst, back);
            let r1 = run_instance(&inst, &tol).unwrap();
            let r2 = run_instance(&back, &tol).unwrap();
            assert_eq!(r1.margin.map(f64::to_bits), r2.margin.map(f64::to_bits));
        }
    }

    #[test]
    fn corrupted_instance_is_a_schema_error() {
        assert!(matches!(Instance::from_json_str("{\"theorem\": 3}"), Err(Error::Schema(_))));
        let spec = InstanceSpec::new(vec![2], MapFamily::UsualTrace, 1, 1);
        let inst = generate(TheoremId::SkewNonneg, &spec, 0, Mode::Relaxed).unwrap();
        let s = inst.to_json_pretty().unwrap().replace("\"schema_version\": 1", "\"schema_version\": 99");
        assert!(matches!(Instance::from_json_str(&s), Err(Error::Schema(_))));
    }

    #[test]
    fn alpha_cycles_through_the_grid() {
        let spec = InstanceSpec::new(vec![2], MapFamily::UsualTrace, 30, 1);
        let grid = default_alpha_grid();
        for t in 0..22 {
            let inst = generate(TheoremId::SkewNonneg, &spec, t, Mode::Relaxed).unwrap();
            assert_eq!(inst.alpha, Some(grid[t as usize % grid.len()]));
        }
    }
}
