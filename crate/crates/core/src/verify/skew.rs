//! Wigner–Yanase–Dyson skew information: positivity, α-behaviour, the
//! Cauchy–Schwarz inequality for the correlation and the refined Luo bound.

use super::{
    conditional_expectation_hypothesis, embed_in_domain, jordan, ordering_deviation, self_adjoint_hypothesis,
    HypothesisStatus, ReportBuilder, Side, TheoremId, VerifierReport,
};
use crate::algebra::AlgebraElement;
use crate::error::Result;
use crate::hermitian::Tolerance;
use crate::maps::TracialMap;
use crate::quantities::{AlphaParam, Setting};

fn tracial(r: &mut ReportBuilder, map: &TracialMap) {
    r.require("tracial_positive", true, format!("built-in {} map", map.family()));
}

fn density(r: &mut ReportBuilder, s: &Setting) {
    let defect = s.density_defect();
    r.require("phi_density", s.is_density(), format!("||Phi(rho) - I|| = {defect:.3e}"));
}

/// `I^α(A) ≥ 0` for self-adjoint `A`.
pub fn verify_skew_nonneg(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    alpha: f64,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let alpha = AlphaParam::new(alpha)?;
    let mut r = ReportBuilder::new(TheoremId::SkewNonneg, tol);
    tracial(&mut r, map);
    self_adjoint_hypothesis(&mut r, "self_adjoint", a);
    let s = Setting::new(map, rho, tol)?;
    let i = s.skew_any(a, alpha)?;
    r.check_psd("skew_nonneg", &i.value)?;
    r.meta_f64("alpha", alpha.value()).meta_f64("hermitian_defect", i.metadata.hermitian_defect);
    r.sides(Side::operator(&i.value), Side::Scalar { value: 0.0 });
    Ok(r.finish())
}

/// Midpoint convexity of `α ↦ Φ(ρ^α A ρ^{1−α} A)`.
pub fn verify_alpha_convexity(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    alpha: f64,
    beta: f64,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let (alpha, beta) = (AlphaParam::new(alpha)?, AlphaParam::new(beta)?);
    let mut r = ReportBuilder::new(TheoremId::AlphaConvexity, tol);
    tracial(&mut r, map);
    self_adjoint_hypothesis(&mut r, "self_adjoint", a);
    let s = Setting::new(map, rho, tol)?;
    // Φ(ρ^t A ρ^{1−t} A) is the sandwich at 1 − t
    let f = |t: f64| -> Result<AlgebraElement> { Ok(s.sandwich(a, a, 1.0 - t)?.hermitian_part()) };
    let mid = 0.5 * (alpha.value() + beta.value());
    let lhs = &f(alpha.value())? + &f(beta.value())?;
    let rhs = f(mid)?.scale_real(2.0);
    r.check_geq("convexity", &lhs, &rhs)?;
    r.meta_f64("alpha", alpha.value()).meta_f64("beta", beta.value());
    r.sides(Side::operator(&lhs), Side::operator(&rhs));
    Ok(r.finish())
}

/// `I^α(A) ≤ I^{1/2}(A)`.
pub fn verify_skew_monotone_half(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    alpha: f64,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let alpha = AlphaParam::new(alpha)?;
    let mut r = ReportBuilder::new(TheoremId::SkewMonotoneHalf, tol);
    tracial(&mut r, map);
    self_adjoint_hypothesis(&mut r, "self_adjoint", a);
    let s = Setting::new(map, rho, tol)?;
    let half = s.skew_any(a, AlphaParam::HALF)?.value;
    let ia = s.skew_any(a, alpha)?.value;
    r.check_geq("monotone_half", &half, &ia)?;
    r.meta_f64("alpha", alpha.value());
    r.sides(Side::operator(&half), Side::operator(&ia));
    Ok(r.finish())
}

/// `I^α(A) + I^α(A†) ≥ 0` for arbitrary `A`, computed directly and through the
/// dilation `Ã = [[0, A†], [A, 0]]`, `ρ̃ = ρ ⊕ ρ`, `Φ̃(X) = ½Φ(X₁₁ + X₂₂)`, for
/// which the sum equals `2·I^α_Φ̃(Ã)`.
pub fn verify_skew_sum_nonneg(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    alpha: f64,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let alpha = AlphaParam::new(alpha)?;
    let mut r = ReportBuilder::new(TheoremId::SkewSumNonneg, tol);
    tracial(&mut r, map);
    let s = Setting::new(map, rho, tol)?;
    let ad = a.adjoint();
    let direct = (&s.skew_any(a, alpha)?.value + &s.skew_any(&ad, alpha)?.value).hermitian_part();

    let alg = a.algebra();
    let zero = AlgebraElement::zeros(alg);
    let dil = |x: &AlgebraElement| AlgebraElement::block_2x2(x, &zero, &zero, x);
    let phi_t = |x: &AlgebraElement| -> Result<AlgebraElement> {
        let [x11, _, _, x22] = x.split_2x2()?;
        Ok(map.apply(&(&x11 + &x22))?.scale_real(0.5))
    };
    let a_t = AlgebraElement::block_2x2(&zero, &ad, a, &zero)?;
    let rho_t = dil(s.rho())?;
    let left = dil(&s.rho_power(1.0 - alpha.value())?)?;
    let right = dil(&s.rho_power(alpha.value())?)?;
    let first = phi_t(&(&(&rho_t * &a_t) * &a_t))?;
    let second = phi_t(&(&(&(&left * &a_t) * &right) * &a_t))?;
    let dilated = (&first - &second).hermitian_part().scale_real(2.0);

    r.check_psd("sum_nonneg", &direct)?;
    r.check_equal("dilation_agreement", &direct, &dilated)?;
    r.meta_f64("alpha", alpha.value());
    r.sides(Side::operator(&direct), Side::Scalar { value: 0.0 });
    Ok(r.finish())
}

/// `I^α(A)·I^α(B) ≥ |Re Corr^α(A,B)|²` for a conditional expectation (products
/// in the center).
pub fn verify_corr_cauchy_schwarz(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    alpha: f64,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let alpha = AlphaParam::new(alpha)?;
    let mut r = ReportBuilder::new(TheoremId::CorrCauchySchwarz, tol);
    conditional_expectation_hypothesis(&mut r, map);
    let s = Setting::new(map, rho, tol)?.without_density_check();
    density(&mut r, &s);
    self_adjoint_hypothesis(&mut r, "self_adjoint_a", a);
    self_adjoint_hypothesis(&mut r, "self_adjoint_b", b);
    let ia = s.skew_any(a, alpha)?.value;
    let ib = s.skew_any(b, alpha)?.value;
    let re = s.correlation(a, b, alpha)?.value.hermitian_part();
    let lhs = jordan(&ia, &ib);
    let rhs = &re * &re;
    r.check_geq("cauchy_schwarz", &lhs, &rhs)?;
    r.meta_f64("alpha", alpha.value()).meta_f64("ordering_deviation", ordering_deviation(&ia, &ib));
    r.sides(Side::operator(&lhs), Side::operator(&rhs));
    Ok(r.finish())
}

/// `I^{1/2}(A) ≤ V(A)` for a Φ-density.
pub fn verify_skew_le_variance(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::SkewLeVariance, tol);
    r.require("two_positive", true, format!("built-in {} map is completely positive", map.family()));
    let s = Setting::new(map, rho, tol)?.without_density_check();
    density(&mut r, &s);
    self_adjoint_hypothesis(&mut r, "self_adjoint", a);
    let v = s.variance(a)?.value;
    let i = s.skew_any(a, AlphaParam::HALF)?.value;
    r.check_geq("skew_le_variance", &v, &i)?;
    r.sides(Side::operator(&v), Side::operator(&i));
    Ok(r.finish())
}

/// `U(A)U(B) ≥ ¼|E(ρ[A,B])|²` with `U = I♯J`, together with the refinement
/// `V(A)V(B) ≥ U(A)U(B)` and `U ≤ V` for both observables.
pub fn verify_luo_refined(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::LuoRefined, tol);
    conditional_expectation_hypothesis(&mut r, map);
    let s = Setting::new(map, rho, tol)?.without_density_check();
    density(&mut r, &s);
    let sa = self_adjoint_hypothesis(&mut r, "self_adjoint_a", a);
    let sb = self_adjoint_hypothesis(&mut r, "self_adjoint_b", b);
    if !(sa && sb) {
        return Ok(r.finish());
    }
    let ua = s.u(a)?;
    let ub = s.u(b)?;
    match ua.metadata.regularization.into_iter().chain(ub.metadata.regularization).reduce(f64::max) {
        None => {
            r.require("definite_skew", true, "I(A), I(B) positive definite");
        }
        Some(eps) => {
            r.hypothesis("definite_skew", HypothesisStatus::Regularized, format!("geometric mean shifted by {eps:.3e}"));
        }
    }
    let va = s.variance(a)?.value;
    let vb = s.variance(b)?.value;
    let comm = s.expectation(&a.commutator(b))?;
    let rhs = comm.abs_squared().scale_real(0.25);
    let uu = jordan(&ua.value, &ub.value);
    let vv = jordan(&va, &vb);
    r.check_geq("luo", &uu, &rhs)?;
    r.check_geq("refinement", &vv, &uu)?;
    r.check_geq("u_le_v_a", &va, &ua.value)?;
    r.check_geq("u_le_v_b", &vb, &ub.value)?;
    let (vmargin, _) = super::loewner_margin(&vv, &rhs)?;
    r.meta_f64("variance_bound_margin", vmargin);
    r.meta_f64("ordering_deviation", ordering_deviation(&ua.value, &ub.value));
    r.sides(Side::operator(&uu), Side::operator(&rhs));
    Ok(r.finish())
}

/// `I(A) = ½E((i[ρ^{1/2}, A₀])²)` and `J(A) = ½E({ρ^{1/2}, A₀}²)` with
/// `A₀ = A − E(ρA)`.
pub fn verify_ij_identities(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::IjIdentities, tol);
    let is_ce = conditional_expectation_hypothesis(&mut r, map);
    let s = Setting::new(map, rho, tol)?.without_density_check();
    density(&mut r, &s);
    let sa = self_adjoint_hypothesis(&mut r, "self_adjoint", a);
    if !(is_ce && sa) {
        return Ok(r.finish());
    }
    let a0 = a - &embed_in_domain(map, &s.expectation(a)?)?;
    let root = s.rho_power(0.5)?;
    let c = a0.commutator(&root).scale(num_complex::Complex64::new(0.0, 1.0));
    let ac = root.anticommutator(&a0);
    let i_rhs = map.apply(&(&c * &c))?.scale_real(0.5).hermitian_part();
    let j_rhs = map.apply(&(&ac * &ac))?.scale_real(0.5).hermitian_part();
    let i = s.skew(a, AlphaParam::HALF)?.value;
    let j = s.j(a)?.value;
    r.check_equal("i_identity", &i, &i_rhs)?;
    r.check_equal("j_identity", &j, &j_rhs)?;
    Ok(r.finish())
}

/// Deliberately false statement `V(A) ≤ I^{1/2}(A)`; margin `λ_min(I^{1/2}(A) − V(A))`.
pub fn verify_planted_variance_le_skew(
    map: &TracialMap,
    rho: &AlgebraElement,
    a: &AlgebraElement,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::PlantedVarianceLeSkew, tol);
    let s = Setting::new(map, rho, tol)?.without_density_check();
    density(&mut r, &s);
    self_adjoint_hypothesis(&mut r, "self_adjoint", a);
    let v = s.variance(a)?.value;
    let i = s.skew_any(a, AlphaParam::HALF)?.value;
    r.check_geq("variance_le_skew", &i, &v)?;
    r.sides(Side::operator(&i), Side::operator(&v));
    Ok(r.finish())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::algebra::BlockAlgebra;
    use crate::hermitian::pauli::{real_diag, sigma_x, sigma_y};
    use crate::hermitian::ComplexMatrix;
    use crate::maps::MapFamily;
    use crate::random::Sampler;
    use num_complex::Complex64;

    fn el(m: ComplexMatrix) -> AlgebraElement {
        AlgebraElement::single(m).unwrap()
    }

    fn tol() -> Tolerance {
        Tolerance::default()
    }

    fn ut() -> TracialMap {
        TracialMap::usual_trace(&BlockAlgebra::full(2).unwrap())
    }

    fn qubit(p: f64) -> AlgebraElement {
        el(real_diag(&[p, 1.0 - p]))
    }

    fn e12() -> AlgebraElement {
        let mut m = ComplexMatrix::zeros(2, 2);
        m[(0, 1)] = Complex64::new(1.0, 0.0);
        el(m)
    }

    // f(α) = p^α q^{1−α} + p^{1−α} q^α for ρ = diag(p, q), A = σx
    fn f_qubit(p: f64, a: f64) -> f64 {
        let q = 1.0 - p;
        p.powf(a) * q.powf(1.0 - a) + p.powf(1.0 - a) * q.powf(a)
    }

    const I_HALF: f64 = 0.133_974_596_215_561_35; // 1 − 2√0.1875

    #[test]
    fn skew_nonneg_examples() {
        let r = verify_skew_nonneg(&ut(), &qubit(0.75), &el(sigma_x()), 0.5, &tol()).unwrap();
        assert!(r.pass && (r.margin.unwrap() - I_HALF).abs() < 1e-12);
        let id = AlgebraElement::identity(&BlockAlgebra::full(2).unwrap());
        let r = verify_skew_nonneg(&ut(), &qubit(0.75), &id, 0.3, &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap().abs() < 1e-12);
        let r = verify_skew_nonneg(&ut(), &qubit(0.75), &el(sigma_x()), 1.0, &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap().abs() < 1e-12);
        assert!(verify_skew_nonneg(&ut(), &qubit(0.75), &el(sigma_x()), 1.5, &tol()).is_err());
    }

    #[test]
    fn non_self_adjoint_skew_can_be_negative() {
        // I^1(E₁₂) = tr(ρ[E₂₁, E₁₂]) = q − p
        let r = verify_skew_nonneg(&ut(), &qubit(0.75), &e12(), 1.0, &tol()).unwrap();
        assert_eq!(r.hypothesis("self_adjoint").unwrap().status, HypothesisStatus::Unmet);
        assert!((r.margin.unwrap() + 0.5).abs() < 1e-12);
        assert!(r.violates_without(Some("self_adjoint")));
    }

    #[test]
    fn convexity_examples() {
        let r = verify_alpha_convexity(&ut(), &qubit(0.75), &el(sigma_x()), 0.0, 1.0, &tol()).unwrap();
        let expected = 2.0 - 2.0 * f_qubit(0.75, 0.5);
        assert!((expected - 0.267_949_192_431_122_7).abs() < 1e-12);
        assert!(r.pass && (r.margin.unwrap() - expected).abs() < 1e-12);
        let r = verify_alpha_convexity(&ut(), &qubit(0.75), &el(sigma_x()), 0.3, 0.3, &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap().abs() < 1e-12);
    }

    #[test]
    fn monotone_half_examples() {
        let r = verify_skew_monotone_half(&ut(), &qubit(0.75), &el(sigma_x()), 0.5, &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap().abs() < 1e-12);
        // I^α(σx) = 1 − f(α)
        let r = verify_skew_monotone_half(&ut(), &qubit(0.75), &el(sigma_x()), 0.25, &tol()).unwrap();
        let expected = (1.0 - f_qubit(0.75, 0.5)) - (1.0 - f_qubit(0.75, 0.25));
        assert!(r.pass && (r.margin.unwrap() - expected).abs() < 1e-12);
        assert!((expected - 0.0330).abs() < 5e-4);
        let r = verify_skew_monotone_half(&ut(), &qubit(0.75), &el(sigma_x()), 1.0, &tol()).unwrap();
        assert!((r.margin.unwrap() - I_HALF).abs() < 1e-12);
    }

    #[test]
    fn skew_sum_examples() {
        let rho = qubit(0.75);
        let r = verify_skew_sum_nonneg(&ut(), &rho, &el(sigma_x()), 0.3, &tol()).unwrap();
        assert!(r.pass);
        assert!((r.check_margin("sum_nonneg").unwrap() - 2.0 * (1.0 - f_qubit(0.75, 0.3))).abs() < 1e-12);
        for alpha in [0.0, 0.25, 0.5, 0.8, 1.0] {
            let (p, q) = (0.75_f64, 0.25_f64);
            let expected = p + q - q.powf(1.0 - alpha) * p.powf(alpha) - p.powf(1.0 - alpha) * q.powf(alpha);
            let r = verify_skew_sum_nonneg(&ut(), &rho, &e12(), alpha, &tol()).unwrap();
            assert!(r.pass, "{r:?}");
            assert!((r.check_margin("sum_nonneg").unwrap() - expected).abs() < 1e-12);
        }
        let zero = AlgebraElement::zeros(&BlockAlgebra::full(2).unwrap());
        let r = verify_skew_sum_nonneg(&ut(), &rho, &zero, 0.5, &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap().abs() < 1e-15);
    }

    #[test]
    fn skew_sum_random_maps_with_unitaries() {
        let alg = BlockAlgebra::new(vec![2, 3]).unwrap();
        let mut s = Sampler::new(2);
        for family in MapFamily::ALL {
            let map = s.tracial_map(&alg, family, 2, &BlockAlgebra::full(2).unwrap()).unwrap();
            let map = map.conjugate_map(&s.unitary_blocks(&alg)).unwrap();
            let rho = s.density_element(&alg);
            let a = s.element(&alg);
            let r = verify_skew_sum_nonneg(&map, &rho, &a, 0.3, &tol()).unwrap();
            assert!(r.pass, "{family}: {r:?}");
        }
    }

    #[test]
    fn cauchy_schwarz_examples() {
        let m2 = BlockAlgebra::full(2).unwrap();
        let e = TracialMap::center_expectation(&m2);
        let rho = el(real_diag(&[1.5, 0.5]));
        let r = verify_corr_cauchy_schwarz(&e, &rho, &el(sigma_x()), &el(sigma_y()), 0.5, &tol()).unwrap();
        assert!(r.pass);
        // Re Corr = 0; I(σx) = I(σy) = 1 − √0.75 on the center
        let i = 1.0 - 0.75_f64.sqrt();
        assert!((r.margin.unwrap() - i * i).abs() < 1e-12);
        let r = verify_corr_cauchy_schwarz(&e, &rho, &el(sigma_x()), &el(sigma_x()), 0.3, &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap().abs() < 1e-12);
        let r = verify_corr_cauchy_schwarz(&ut(), &qubit(0.75), &el(sigma_x()), &el(sigma_y()), 0.5, &tol()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn skew_le_variance_examples() {
        let r = verify_skew_le_variance(&ut(), &qubit(0.75), &el(sigma_x()), &tol()).unwrap();
        assert!(r.pass && (r.margin.unwrap() - (1.0 - I_HALF)).abs() < 1e-12);
        let id = AlgebraElement::identity(&BlockAlgebra::full(2).unwrap());
        let r = verify_skew_le_variance(&ut(), &qubit(0.75), &id, &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap().abs() < 1e-12);
    }

    #[test]
    fn luo_saturates_on_the_qubit() {
        for p in [0.6, 0.75, 0.9] {
            let r = verify_luo_refined(&ut(), &qubit(p), &el(sigma_x()), &el(sigma_y()), &tol()).unwrap();
            assert!(r.pass, "{r:?}");
            assert!(r.check_margin("luo").unwrap().abs() < 1e-9);
            match r.rhs {
                Some(Side::Operator { ref blocks }) => {
                    let v = blocks[0].re[0][0];
                    assert!((v - (2.0 * p - 1.0) * (2.0 * p - 1.0)).abs() < 1e-12);
                }
                _ => panic!("operator rhs expected"),
            }
        }
        let r = verify_luo_refined(&ut(), &qubit(0.75), &el(sigma_x()), &el(sigma_x()), &tol()).unwrap();
        assert!(r.pass);
    }

    #[test]
    fn ij_identity_examples() {
        let r = verify_ij_identities(&ut(), &qubit(0.75), &el(sigma_x()), &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap() >= -1e-10);
        let id = AlgebraElement::identity(&BlockAlgebra::full(2).unwrap());
        let r = verify_ij_identities(&ut(), &qubit(0.75), &id, &tol()).unwrap();
        assert!(r.pass && r.margin.unwrap() >= -1e-12);
        let alg = BlockAlgebra::new(vec![2, 3]).unwrap();
        let e = TracialMap::center_expectation(&alg);
        let mut s = Sampler::new(6);
        for t in 0..5 {
            let rho = e.make_phi_density(t).unwrap();
            let a = s.hermitian_element(&alg);
            let r = verify_ij_identities(&e, &rho, &a, &tol()).unwrap();
            assert!(r.pass, "{r:?}");
        }
    }

    #[test]
    fn planted_falsehood_fails_on_the_qubit() {
        let r = verify_planted_variance_le_skew(&ut(), &qubit(0.75), &el(sigma_x()), &tol()).unwrap();
        assert!(!r.pass && r.hypotheses_met());
        assert!((r.margin.unwrap() - (I_HALF - 1.0)).abs() < 1e-12);
    }
}
