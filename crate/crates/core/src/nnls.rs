//! Lawson–Hanson nonnegative least squares for the small systems that decide
//! Φ-density feasibility.

use nalgebra::{DMatrix, DVector};

/// Solution of `min ‖Ax − b‖₂` subject to `x ≥ 0`.
#[derive(Debug, Clone)]
pub struct NnlsSolution {
    pub x: DVector<f64>,
    pub residual: f64,
}

pub fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> NnlsSolution {
    let n = a.ncols();
    let mut x = DVector::<f64>::zeros(n);
    let mut passive = vec![false; n];
    let scale = a.amax().max(b.amax()).max(1.0);
    let tol = 1e-12 * scale * (n.max(a.nrows()) as f64);
    let max_outer = 3 * n + 10;

    for _ in 0..max_outer {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(j) = candidate else { break };
        passive[j] = true;

        for _ in 0..max_outer {
            let s = solve_passive(a, b, &passive);
            let feasible = (0..n).all(|i| !passive[i] || s[i] > 0.0);
            if feasible {
                x = s;
                break;
            }
            let mut step = 1.0_f64;
            for i in 0..n {
                if passive[i] && s[i] <= 0.0 {
                    let denom = x[i] - s[i];
                    if denom > 0.0 {
                        step = step.min(x[i] / denom);
                    }
                }
            }
            x = &x + (&s - &x) * step;
            for i in 0..n {
                if passive[i] && x[i] <= tol {
                    passive[i] = false;
                    x[i] = 0.0;
                }
            }
        }
    }
    let residual = (a * &x - b).norm();
    NnlsSolution { x, residual }
}

fn solve_passive(a: &DMatrix<f64>, b: &DVector<f64>, passive: &[bool]) -> DVector<f64> {
    let cols: Vec<usize> = (0..passive.len()).filter(|&i| passive[i]).collect();
    let mut s = DVector::<f64>::zeros(passive.len());
    if cols.is_empty() {
        return s;
    }
    let sub = DMatrix::from_fn(a.nrows(), cols.len(), |r, c| a[(r, cols[c])]);
    let svd = sub.svd(true, true);
    if let Ok(sol) = svd.solve(b, 1e-13) {
        for (k, &i) in cols.iter().enumerate() {
            s[i] = sol[k];
        }
    }
    s
}
