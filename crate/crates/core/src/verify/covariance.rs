//! Covariance-type uncertainty relations and the operator inequalities they rest on.

use num_complex::Complex64;

use super::{
    conditional_expectation_hypothesis, jordan, map_hypotheses, ordering_deviation, self_adjoint_hypothesis,
    HypothesisStatus, Mode, ReportBuilder, Side, TheoremId, Variant, VerifierReport,
};
use crate::algebra::AlgebraElement;
use crate::error::{Error, Result};
use crate::hermitian::Tolerance;
use crate::maps::{MapFamily, PositiveAssignment, TracialMap};
use crate::quantities::{kantorovich, Setting};
use crate::random::Sampler;

const RANGE_SAMPLES: usize = 4;
const RANGE_SEED: u64 = 0x5eed_0fc0;

/// Structural commutator bound of the range plus a sampled test on random images.
fn commutative_range_hypothesis(r: &mut ReportBuilder, map: &TracialMap) -> Result<bool> {
    let structural = map.range_commutator_defect();
    let mut sampler = Sampler::new(RANGE_SEED);
    let images = (0..RANGE_SAMPLES)
        .map(|_| map.apply(&sampler.element(map.domain())))
        .collect::<Result<Vec<_>>>()?;
    let mut sampled = 0.0_f64;
    let mut scale = 1.0_f64;
    for (i, x) in images.iter().enumerate() {
        scale = scale.max(x.max_abs());
        for y in &images[i + 1..] {
            sampled = sampled.max(ordering_deviation(x, y));
        }
    }
    let ok = structural <= 1e-12 && sampled <= r.tol().threshold(scale * scale);
    Ok(r.require(
        "commutative_range",
        ok,
        format!("generator commutator {structural:.3e}, sampled commutator {sampled:.3e}"),
    ))
}

fn density_hypothesis(r: &mut ReportBuilder, s: &Setting) {
    let defect = s.density_defect();
    r.require("phi_density", s.is_density(), format!("||Phi(rho) - I|| = {defect:.3e}"));
}

/// `V_A ∘ V_B − (Re C)² ≥ ¼|Φ(ρ[A,B])|²` with the product symmetrized.
fn schrodinger_check(
    r: &mut ReportBuilder,
    va: &AlgebraElement,
    vb: &AlgebraElement,
    cov: &AlgebraElement,
    comm: &AlgebraElement,
) -> Result<()> {
    let re = cov.hermitian_part();
    let prod = jordan(va, vb);
    let re2 = &re * &re;
    let lhs = &prod - &re2;
    let rhs = comm.abs_squared().scale_real(0.25);
    let margin = (&lhs - &rhs).hermitian_part().lambda_min()?;
    let scale = prod.hermitian_norm2()?.max(re2.hermitian_norm2()?).max(rhs.hermitian_norm2()?);
    r.check("schrodinger", margin, scale);
    r.meta_f64("ordering_deviation", ordering_deviation(va, vb));
    r.sides(Side::operator(&lhs), Side::operator(&rhs));
    Ok(())
}

/// `V′(A)V′(B) − |Re Cov′(A,B)|² ≥ ¼|Φ(ρ[A,B])|²` for maps with commutative range.
/// Only `Φ(ρ) > 0` is needed, not a Φ-density.
pub fn verify_schrodinger_commutative_range(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    variant: Variant,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::SchrodingerCommutativeRange, tol);
    map_hypotheses(&mut r, map, rho, variant)?;
    commutative_range_hypothesis(&mut r, map)?;
    self_adjoint_hypothesis(&mut r, "self_adjoint_a", a);
    self_adjoint_hypothesis(&mut r, "self_adjoint_b", b);
    let s = Setting::new(map, rho, tol)?;
    match s.phi_rho_inverse() {
        Ok(_) => {
            r.require("phi_rho_definite", true, "Phi(rho) > 0");
        }
        Err(Error::Singular { lambda_min }) => {
            r.require("phi_rho_definite", false, format!("lambda_min(Phi(rho)) = {lambda_min:.3e}"));
            return Ok(r.finish());
        }
        Err(e) => return Err(e),
    }
    let va = s.variance_prime(a)?.value;
    let vb = s.variance_prime(b)?.value;
    let cov = s.covariance_prime(a, b)?.value;
    let comm = s.expectation(&a.commutator(b))?;
    schrodinger_check(&mut r, &va, &vb, &cov, &comm)?;
    Ok(r.finish())
}

/// `V(A)V(B) − |Re Cov(A,B)|² ≥ ¼|E(ρ[A,B])|²` for the center-valued trace `E`.
pub fn verify_conditional_expectation_schrodinger(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    variant: Variant,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::ConditionalExpectationSchrodinger, tol);
    map_hypotheses(&mut r, map, rho, variant)?;
    conditional_expectation_hypothesis(&mut r, map);
    let s = Setting::new(map, rho, tol)?.without_density_check();
    density_hypothesis(&mut r, &s);
    self_adjoint_hypothesis(&mut r, "self_adjoint_a", a);
    self_adjoint_hypothesis(&mut r, "self_adjoint_b", b);
    let va = s.variance(a)?.value;
    let vb = s.variance(b)?.value;
    let cov = s.covariance(a, b)?.value;
    let comm = s.expectation(&a.commutator(b))?;
    schrodinger_check(&mut r, &va, &vb, &cov, &comm)?;
    Ok(r.finish())
}

/// Main uncertainty relation `V(A)♯V(B) ≥ (2√K)^{-1}|Φ(ρ[A,B])|` for a map given
/// through its factorization `Φ = φ₂∘φ₁`.
pub fn verify_uncertainty_main(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    mode: Mode,
    variant: Variant,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let (phi1, phi2) = map.factorization()?;
    verify_uncertainty_main_factored(&phi1, &phi2, rho, a, b, mode, variant, tol)
}

/// `[y₁ … y_k]` as a diagonal element.
fn diag(values: &[Complex64]) -> Result<AlgebraElement> {
    AlgebraElement::diagonal(values)
}

fn diag_values(x: &AlgebraElement) -> Vec<Complex64> {
    x.blocks().iter().map(|b| b[(0, 0)]).collect()
}

/// `φ₁` must be a scaled block trace (so its range is commutative) and `φ₂` a
/// positive assignment on `ℂᵏ`. Reported checks:
///
/// * `stage_i`: `V₁′(A)♯V₁′(B) ≥ ½|φ₁(ρ[A,B])|` entrywise on `ℂᵏ`;
/// * `stage_ii_a`, `stage_ii_b`: the block matrix
///   `[[φ₂(φ₁(ρX)φ₁(ρ)⁻¹φ₁(ρX)), Φ(ρX)], [Φ(ρX), Φ(ρ)]] ≥ 0`;
/// * `step_push`, `step_mean`, `step_varcomm`, `step_reverse`: the chain
///   `V♯V ≥ φ₂(V₁′A)♯φ₂(V₁′B) ≥ φ₂(V₁′A♯V₁′B) ≥ ½φ₂|φ₁(ρ[A,B])| ≥ (2√K)⁻¹|Φ(ρ[A,B])|`;
/// * `stage_iii`: the final inequality.
///
/// The last two need the spectral window and are skipped when it is unmet.
#[allow(clippy::too_many_arguments)]
pub fn verify_uncertainty_main_factored(
    phi1: &TracialMap,
    phi2: &PositiveAssignment,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    mode: Mode,
    variant: Variant,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    if phi1.family() != MapFamily::ScaledBlockTrace {
        return Err(Error::InvalidArgument(format!("phi1 must be a scaled block trace, got {}", phi1.family())));
    }
    if phi1.codomain().num_blocks() != phi2.len() {
        return Err(Error::DimensionMismatch { expected: phi1.codomain().num_blocks(), got: phi2.len() });
    }
    let phi = |x: &AlgebraElement| -> Result<AlgebraElement> { phi2.apply_diagonal(&phi1.apply(x)?) };
    let mut r = ReportBuilder::new(TheoremId::UncertaintyMain, tol);
    r.mode(mode);
    let thr1 = tol.threshold(1.0);
    let identity = AlgebraElement::identity(phi2.codomain());

    match variant {
        Variant::Tracial => {
            r.require("tracial_positive", true, "phi2 o phi1 with phi1 a scaled block trace");
            let d = (&phi(rho)? - &identity).hermitian_part().hermitian_norm2()?;
            r.require("phi_density", d <= thr1, format!("||Phi(rho) - I|| = {d:.3e}"));
        }
        Variant::UnitalIdentityDensity => {
            let d = (&phi(&AlgebraElement::identity(rho.algebra()))? - &identity).hermitian_part().hermitian_norm2()?;
            r.require("unital_positive", d <= 1e-10, format!("||Phi(I) - I|| = {d:.3e}"));
            let dist = (rho - &AlgebraElement::identity(rho.algebra())).max_abs();
            r.require("rho_identity", dist <= thr1, format!("max|rho - I| = {dist:.3e}"));
        }
    }
    let d2 = phi2.unital_defect()?;
    r.require("phi2_unital", d2 <= 1e-10, format!("||phi2(1) - I|| = {d2:.3e}"));
    let d1 = phi1.unital_defect()?;
    match mode {
        Mode::Strict => {
            r.require("phi1_unital", d1 <= 1e-10, format!("||phi1(I) - 1|| = {d1:.3e}"));
        }
        Mode::Relaxed => {
            r.meta_f64("phi1_unital_defect", d1);
        }
    }
    self_adjoint_hypothesis(&mut r, "self_adjoint_a", a);
    self_adjoint_hypothesis(&mut r, "self_adjoint_b", b);

    let s1 = Setting::new(phi1, rho, tol)?;
    let comm = a.commutator(b);
    let rho_comm = rho * &comm;
    let c1 = phi1.apply(&rho_comm)?;
    let abs_c1: Vec<f64> = diag_values(&c1).iter().map(|z| z.norm()).collect();
    let abs_c1_el = diag(&abs_c1.iter().map(|&v| Complex64::new(v, 0.0)).collect::<Vec<_>>())?;
    let c = phi(&rho_comm)?;

    // spectral window and Kantorovich constant
    let kant: Option<f64> = match mode {
        Mode::Strict => {
            let root = s1.rho_power(0.5)?;
            let w = (&(&root * &comm) * &root).scale(Complex64::new(0.0, -1.0)).hermitian_part();
            let (lo, hi) = w.spectrum_interval()?;
            let trace = w.trace().re;
            r.meta_f64("window_trace", trace).meta_f64("m", lo).meta_f64("M", hi);
            let ok = lo > tol.threshold(hi.abs().max(lo.abs()));
            let detail = if ok {
                format!("sp(-i rho^1/2 [A,B] rho^1/2) in [{lo:.3e}, {hi:.3e}]")
            } else {
                format!(
                    "traceless commutator: tr(-i rho^1/2 [A,B] rho^1/2) = {trace:.3e}, spectrum [{lo:.3e}, {hi:.3e}] not inside (0, inf)"
                )
            };
            r.require("spectral_window", ok, detail);
            if ok {
                Some(kantorovich(lo, hi)?)
            } else {
                None
            }
        }
        Mode::Relaxed => {
            let lo = abs_c1.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = abs_c1.iter().cloned().fold(0.0, f64::max);
            r.meta_f64("m", lo).meta_f64("M", hi);
            let thr = tol.threshold(hi.max(1.0));
            if hi <= thr {
                r.require("spectral_window", true, format!("|phi1(rho[A,B])| <= {hi:.3e}: the bound is zero for every K"));
                Some(1.0)
            } else if lo > thr {
                r.require("spectral_window", true, format!("sp(|phi1(rho[A,B])|) in [{lo:.3e}, {hi:.3e}]"));
                Some(kantorovich(lo, hi)?)
            } else {
                r.require("spectral_window", false, format!("degenerate commutator image: m = {lo:.3e}"));
                None
            }
        }
    };
    if let Some(k) = kant {
        r.meta_f64("K", k);
    }

    let inv1 = match s1.phi_rho_inverse() {
        Ok(inv) => {
            r.require("phi1_rho_definite", true, "phi1(rho) > 0");
            inv
        }
        Err(Error::Singular { lambda_min }) => {
            r.require("phi1_rho_definite", false, format!("lambda_min(phi1(rho)) = {lambda_min:.3e}"));
            return Ok(r.finish());
        }
        Err(e) => return Err(e),
    };

    // stage (i) on the commutative range of φ₁: ♯ is the entrywise geometric mean
    let v1a = s1.variance_prime(a)?.value;
    let v1b = s1.variance_prime(b)?.value;
    let g1_vals: Vec<Complex64> = diag_values(&v1a)
        .iter()
        .zip(diag_values(&v1b))
        .map(|(x, y)| Complex64::new((x.re.max(0.0) * y.re.max(0.0)).sqrt(), 0.0))
        .collect();
    let g1 = diag(&g1_vals)?;
    r.check_geq("stage_i", &g1, &abs_c1_el.scale_real(0.5))?;

    // stage (ii): the assembled block matrices
    let phi_rho = phi(rho)?;
    for (name, x) in [("stage_ii_a", a), ("stage_ii_b", b)] {
        let y1 = s1.expectation(x)?;
        let p = phi2.apply_diagonal(&(&(&y1 * &inv1) * &y1))?;
        let y = phi2.apply_diagonal(&y1)?;
        let block = AlgebraElement::block_2x2(&p, &y, &y.adjoint(), &phi_rho)?;
        r.check_psd(name, &block)?;
    }

    // chain down to the final bound
    let variance = |x: &AlgebraElement| -> Result<AlgebraElement> {
        let e = phi(&(rho * x))?;
        Ok((&phi(&(&(rho * x) * x))? - &(&e * &e)).hermitian_part())
    };
    let va = variance(a)?;
    let vb = variance(b)?;
    let (mean_v, reg_v) = va.geometric_mean(&vb, tol)?;
    let (mean_pushed, reg_p) = phi2.apply_diagonal(&v1a)?.geometric_mean(&phi2.apply_diagonal(&v1b)?, tol)?;
    match reg_v.or(reg_p) {
        None => {
            r.require("definite_variances", true, "no regularization in the geometric means");
        }
        Some(eps) => {
            r.hypothesis("definite_variances", HypothesisStatus::Regularized, format!("geometric mean shifted by {eps:.3e}"));
        }
    }
    let pushed_g1 = phi2.apply_diagonal(&g1)?;
    let half_abs = phi2.apply_diagonal(&abs_c1_el)?.scale_real(0.5);
    r.check_geq("step_push", &mean_v, &mean_pushed)?;
    r.check_geq("step_mean", &mean_pushed, &pushed_g1)?;
    r.check_geq("step_varcomm", &pushed_g1, &half_abs)?;
    match kant {
        Some(k) => {
            let rhs = c.abs()?.scale_real(1.0 / (2.0 * k.sqrt()));
            r.check_geq("step_reverse", &half_abs, &rhs)?;
            r.check_geq("stage_iii", &mean_v, &rhs)?;
            r.sides(Side::operator(&mean_v), Side::operator(&rhs));
        }
        None => {
            r.meta("stage_iii", "skipped: spectral window unmet");
        }
    }
    Ok(r.finish())
}

/// Kadison's inequality `Φ(A†A) ≥ Φ(A)†Φ(A)`, its reverse `K·Φ(|A|)² ≥ Φ(|A|²)` and
/// `√K·Φ(|A|) ≥ |Φ(A)|`, with `K = K(m, M)` and the window `sp(|A|) ⊆ [m, M]`.
/// For self-adjoint `A` the window reads `sp(A) ⊆ [m, M] ∪ [−M, −m]`.
pub fn verify_kadison_family(
    map: &TracialMap,
    a: &AlgebraElement,
    m: f64,
    big_m: f64,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::KadisonFamily, tol);
    let d = map.unital_defect()?;
    r.require("unital", d <= 1e-10, format!("||Phi(I) - I|| = {d:.3e}"));
    r.require("two_positive", true, format!("built-in {} map is completely positive", map.family()));
    self_adjoint_hypothesis(&mut r, "self_adjoint", a);

    let abs_a = a.abs()?;
    let k = kantorovich(m, big_m).ok();
    let (lo, hi) = abs_a.hermitian_part().spectrum_interval()?;
    let thr = tol.threshold(hi.max(big_m.abs()));
    let in_window = k.is_some() && lo >= m - thr && hi <= big_m + thr;
    r.require("spectral_window", in_window, format!("sp(|A|) in [{lo:.6e}, {hi:.6e}], window [{m}, {big_m}]"));
    if let Some(k) = k {
        r.meta_f64("K", k);
    }

    let fa = map.apply(a)?;
    let f_abs2 = map.apply(&a.abs_squared())?.hermitian_part();
    r.check_geq("kadison", &f_abs2, &fa.abs_squared())?;
    if let Some(k) = k {
        let f_abs = map.apply(&abs_a)?.hermitian_part();
        r.check_geq("reverse", &(&f_abs * &f_abs).scale_real(k), &f_abs2)?;
        let abs_fa = fa.abs()?;
        r.check_geq("absolute", &f_abs.scale_real(k.sqrt()), &abs_fa)?;
        r.sides(Side::operator(&f_abs.scale_real(k.sqrt())), Side::operator(&abs_fa));
    }
    Ok(r.finish())
}

/// `Φ(A♯B) ≤ Φ(A)♯Φ(B)` for positive definite `A`, `B`.
pub fn verify_mean_subadditive(
    map: &TracialMap,
    a: &AlgebraElement,
    b: &AlgebraElement,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::MeanSubadditive, tol);
    let d = map.unital_defect()?;
    r.require("unital", d <= 1e-10, format!("||Phi(I) - I|| = {d:.3e}"));
    r.require("positive", true, format!("built-in {} map", map.family()));
    let mut definite = true;
    for (name, x) in [("definite_a", a), ("definite_b", b)] {
        let sp = x.hermitian_part().spectrum_interval()?;
        let ok = x.is_self_adjoint(tol) && sp.0 > tol.threshold(sp.1.abs());
        definite &= ok;
        r.require(name, ok, format!("lambda_min = {:.3e}", sp.0));
    }
    if !definite && !(a.is_psd(tol)? && b.is_psd(tol)?) {
        return Ok(r.finish());
    }
    let (ab, reg1) = a.geometric_mean(b, tol)?;
    let (fab, reg2) = map.apply(a)?.geometric_mean(&map.apply(b)?, tol)?;
    if let Some(eps) = reg1.or(reg2) {
        r.meta_f64("regularization", eps);
    }
    let lhs = map.apply(&ab)?;
    r.check_geq("ando", &fab, &lhs)?;
    r.sides(Side::operator(&fab), Side::operator(&lhs));
    Ok(r.finish())
}
