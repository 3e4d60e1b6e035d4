//! Robertson and Schrödinger relations for the ordinary trace.

use num_complex::Complex64;

use super::{self_adjoint_hypothesis, ReportBuilder, Side, TheoremId, VerifierReport};
use crate::algebra::AlgebraElement;
use crate::error::Result;
use crate::hermitian::Tolerance;

struct Moments {
    var_a: f64,
    var_b: f64,
    re_cov: f64,
    comm: Complex64,
}

fn density_hypotheses(b: &mut ReportBuilder, rho: &AlgebraElement) -> Result<()> {
    let tol = *b.tol();
    self_adjoint_hypothesis(b, "rho_self_adjoint", rho);
    let lmin = rho.hermitian_part().lambda_min()?;
    b.require("rho_psd", lmin >= -tol.threshold(1.0), format!("lambda_min(rho) = {lmin:.3e}"));
    let tr = rho.trace();
    let defect = (tr - 1.0).norm();
    b.require("density", defect <= tol.threshold(1.0), format!("tr(rho) = {:.12}", tr.re));
    Ok(())
}

fn moments(rho: &AlgebraElement, a: &AlgebraElement, b: &AlgebraElement) -> Result<Moments> {
    rho.same_algebra(a)?;
    rho.same_algebra(b)?;
    let ra = rho * a;
    let rb = rho * b;
    let ea = ra.trace();
    let eb = rb.trace();
    let var_a = ((&ra * a).trace() - ea * ea).re;
    let var_b = ((&rb * b).trace() - eb * eb).re;
    let re_cov = ((&ra * b).trace() - ea * eb).re;
    let comm = (rho * &a.commutator(b)).trace();
    Ok(Moments { var_a, var_b, re_cov, comm })
}

/// `V(A)V(B) ≥ ¼|tr(ρ[A,B])|²` with `V(A) = tr(ρA²) − tr(ρA)²`.
pub fn verify_heisenberg_classical(
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::HeisenbergClassical, tol);
    density_hypotheses(&mut r, rho)?;
    self_adjoint_hypothesis(&mut r, "self_adjoint_a", a);
    self_adjoint_hypothesis(&mut r, "self_adjoint_b", b);
    let m = moments(rho, a, b)?;
    let lhs = m.var_a * m.var_b;
    let rhs = 0.25 * m.comm.norm_sqr();
    r.check("robertson", lhs - rhs, lhs.abs().max(rhs));
    r.sides(Side::Scalar { value: lhs }, Side::Scalar { value: rhs });
    r.meta_f64("variance_a", m.var_a).meta_f64("variance_b", m.var_b);
    Ok(r.finish())
}

/// `V(A)V(B) − (Re Cov(A,B))² ≥ ¼|tr(ρ[A,B])|²`.
pub fn verify_schrodinger_classical(
    rho: &AlgebraElement,
    a: &AlgebraElement,
    b: &AlgebraElement,
    tol: &Tolerance,
) -> Result<VerifierReport> {
    let mut r = ReportBuilder::new(TheoremId::SchrodingerClassical, tol);
    density_hypotheses(&mut r, rho)?;
    self_adjoint_hypothesis(&mut r, "self_adjoint_a", a);
    self_adjoint_hypothesis(&mut r, "self_adjoint_b", b);
    let m = moments(rho, a, b)?;
    let lhs = m.var_a * m.var_b - m.re_cov * m.re_cov;
    let rhs = 0.25 * m.comm.norm_sqr();
    let scale = (m.var_a * m.var_b).abs().max(m.re_cov * m.re_cov).max(rhs);
    r.check("schrodinger", lhs - rhs, scale);
    r.sides(Side::Scalar { value: lhs }, Side::Scalar { value: rhs });
    r.meta_f64("variance_a", m.var_a).meta_f64("variance_b", m.var_b).meta_f64("re_covariance", m.re_cov);
    Ok(r.finish())
}
