//! The lcK condition `dω = θ ∧ ω` checked pointwise on the real coefficients
//! of `ω = i Σ h_{ab̄} dz_a ∧ dz̄_b`.

use nalgebra::DMatrix;

use super::fd;
use super::field::HermitianMetricField;
use crate::algebra::C64;
use crate::error::{Error, Result};

/// Real antisymmetric `A` with `ω = Σ_{p<q} A[p][q] e_p ∧ e_q`, where
/// `e_{2a} = dx_a`, `e_{2a+1} = dy_a`.
pub fn real_two_form(h: &DMatrix<C64>) -> DMatrix<f64> {
    let n = h.nrows();
    let mut acc = DMatrix::from_element(2 * n, 2 * n, C64::new(0.0, 0.0));
    let i = C64::new(0.0, 1.0);
    let mut wedge = |p: usize, q: usize, coef: C64| {
        if p != q {
            acc[(p, q)] += coef;
            acc[(q, p)] -= coef;
        }
    };
    for a in 0..n {
        for b in 0..n {
            let c = i * h[(a, b)];
            let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
            // dz_a ∧ dz̄_b = dx_a∧dx_b - i dx_a∧dy_b + i dy_a∧dx_b + dy_a∧dy_b
            wedge(xa, xb, c);
            wedge(xa, yb, -i * c);
            wedge(ya, xb, i * c);
            wedge(ya, yb, c);
        }
    }
    acc.map(|c| c.re)
}

/// Max-norm of the coefficients of `dω - θ ∧ ω` at a point, with `dω` from
/// central differences of the 2-form coefficients.
pub fn lck_residual(metric: &HermitianMetricField, point: &[C64]) -> Result<f64> {
    if !metric.has_lee_form() {
        return Err(Error::Contract(format!("{}: no Lee form attached", metric.name())));
    }
    if point.len() != metric.nvars() {
        return Err(Error::Dimension {
            expected: metric.nvars(),
            got: point.len(),
        });
    }
    let h = fd::EXTERIOR_STEP;
    let m = 2 * point.len();
    for axis in 0..m {
        for s in [-2.0 * h, 2.0 * h] {
            if !metric.in_domain(&fd::shifted(point, axis, s)) {
                return Err(Error::Domain(format!(
                    "{}: point too close to the boundary",
                    metric.name()
                )));
            }
        }
    }
    let omega = |z: &[C64]| real_two_form(&metric.coeff(z));
    let a = omega(point);
    let partials: Vec<DMatrix<f64>> = (0..m)
        .map(|p| fd::d1(|t| omega(&fd::shifted(point, p, t)), h))
        .collect();
    let theta = metric.lee_form(point).expect("checked above");

    let mut worst = 0.0f64;
    for p in 0..m {
        for q in (p + 1)..m {
            for r in (q + 1)..m {
                let d_omega = partials[p][(q, r)] - partials[q][(p, r)] + partials[r][(p, q)];
                let theta_omega = theta[p] * a[(q, r)] - theta[q] * a[(p, r)] + theta[r] * a[(p, q)];
                worst = worst.max((d_omega - theta_omega).abs());
            }
        }
    }
    Ok(worst)
}
