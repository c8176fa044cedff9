//! The Gauduchon–Ornea potential on `C^2 \ {0}` for the diagonal Hopf
//! surface generated by `(z_1, z_2) ↦ (α z_1, β z_2)`: the unique `Φ > 0` with
//!
//! `|z_1|^2 Φ^{-a} + |z_2|^2 Φ^{-b} = 1`,
//! `a = 2 log|α| / (log|α| + log|β|)`, `b = 2 - a`.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::C64;
use crate::calabi::go_eigen_product;
use crate::error::{Error, Result};
use crate::geometry::fd;

const LOWER_BRACKET: f64 = 1e-300;
const MAX_ITERATIONS: usize = 200;

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GoParams {
    pub a: f64,
    pub b: f64,
}

impl GoParams {
    pub fn new(a: f64, b: f64) -> Result<Self> {
        if (a + b - 2.0).abs() > 1e-12 {
            return Err(Error::Parameter(format!("a + b must equal 2, got {}", a + b)));
        }
        if !(a >= 1.0 - 1e-15 && b <= 1.0 + 1e-15 && b > 0.0) {
            return Err(Error::Parameter(format!("need a >= 1 >= b > 0, got a={a}, b={b}")));
        }
        Ok(GoParams { a, b })
    }

    /// From `|α| >= |β| > 1`.
    pub fn from_moduli(alpha_abs: f64, beta_abs: f64) -> Result<Self> {
        if !(alpha_abs >= beta_abs && beta_abs > 1.0) {
            return Err(Error::Parameter(format!(
                "need |alpha| >= |beta| > 1, got {alpha_abs}, {beta_abs}"
            )));
        }
        let (la, lb) = (alpha_abs.ln(), beta_abs.ln());
        let a = 2.0 * la / (la + lb);
        GoParams::new(a, 2.0 - a)
    }

    pub fn is_flat(&self) -> bool {
        (self.a - self.b).abs() <= 1e-12
    }

    fn lhs(&self, phi: f64, r1: f64, r2: f64) -> f64 {
        r1 * phi.powf(-self.a) + r2 * phi.powf(-self.b)
    }
}

/// Bisection in `log Φ` on `[lo, hi]`; `lhs - 1` must change sign from
/// positive to negative.
fn bisect(params: &GoParams, r1: f64, r2: f64, lo: f64, hi: f64) -> f64 {
    let (mut lo, mut hi) = (lo.ln(), hi.ln());
    for _ in 0..MAX_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if params.lhs(mid.exp(), r1, r2) > 1.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    // pick the endpoint with the smaller residual
    let (pl, ph) = (lo.exp(), hi.exp());
    if (params.lhs(pl, r1, r2) - 1.0).abs() <= (params.lhs(ph, r1, r2) - 1.0).abs() {
        pl
    } else {
        ph
    }
}

/// Solves the defining equation in terms of `r_i = |z_i|^2`. `r1` may be
/// slightly negative (analytic continuation used by radial differences).
pub fn go_potential_radial(params: &GoParams, r1: f64, r2: f64) -> Result<f64> {
    if r2 < 0.0 || (r1 <= 0.0 && r2 == 0.0) {
        return Err(Error::Domain(format!("r = ({r1}, {r2}) outside the domain")));
    }
    if r1 >= 0.0 {
        let hi = (2.0 * r1)
            .powf(1.0 / params.a)
            .max((2.0 * r2).powf(1.0 / params.b))
            .max(1.0);
        return Ok(bisect(params, r1, r2, LOWER_BRACKET, hi));
    }
    // local bracket around the r1 = 0 root
    let phi0 = r2.powf(1.0 / params.b);
    let (lo, hi) = (phi0 / std::f64::consts::E, phi0 * std::f64::consts::E);
    if !(params.lhs(lo, r1, r2) > 1.0 && params.lhs(hi, r1, r2) < 1.0) {
        return Err(Error::Domain(format!("no bracketed root for r1 = {r1}")));
    }
    Ok(bisect(params, r1, r2, lo, hi))
}

/// `Φ(z_1, z_2)`.
pub fn go_potential(params: &GoParams, point: &[C64]) -> Result<f64> {
    if point.len() != 2 {
        return Err(Error::Dimension {
            expected: 2,
            got: point.len(),
        });
    }
    let (r1, r2) = (point[0].norm_sqr(), point[1].norm_sqr());
    if r1 == 0.0 && r2 == 0.0 {
        return Err(Error::Domain("the potential is undefined at the origin".into()));
    }
    go_potential_radial(params, r1, r2)
}

/// `|z_1|^2 Φ^{-a} + |z_2|^2 Φ^{-b} - 1` at the computed `Φ`.
pub fn go_residual(params: &GoParams, point: &[C64]) -> Result<f64> {
    let phi = go_potential(params, point)?;
    Ok(params.lhs(phi, point[0].norm_sqr(), point[1].norm_sqr()) - 1.0)
}

/// `Φ`, `∂Φ/∂r_i` and `∂²Φ/∂r_i∂r_j` by implicit differentiation.
fn radial_jet(params: &GoParams, r1: f64, r2: f64) -> Result<(f64, [f64; 2], [[f64; 2]; 2])> {
    let GoParams { a, b } = *params;
    let phi = go_potential_radial(params, r1, r2)?;
    let g_phi = -a * r1 * phi.powf(-a - 1.0) - b * r2 * phi.powf(-b - 1.0);
    let g_r = [phi.powf(-a), phi.powf(-b)];
    let g_r_phi = [-a * phi.powf(-a - 1.0), -b * phi.powf(-b - 1.0)];
    let g_phi_phi = a * (a + 1.0) * r1 * phi.powf(-a - 2.0) + b * (b + 1.0) * r2 * phi.powf(-b - 2.0);
    let d = [-g_r[0] / g_phi, -g_r[1] / g_phi];
    let mut dd = [[0.0; 2]; 2];
    for i in 0..2 {
        for j in 0..2 {
            dd[i][j] = -(g_r_phi[i] * d[j] + g_r_phi[j] * d[i] + g_phi_phi * d[i] * d[j]) / g_phi;
        }
    }
    Ok((phi, d, dd))
}

/// Complex Hessian `∂²Φ/∂z_a∂z̄_b = Φ_{r_a} δ_{ab} + Φ_{r_a r_b} z̄_a z_b`.
pub fn go_hessian(params: &GoParams, point: &[C64]) -> Result<DMatrix<C64>> {
    let (_, d, dd) = radial_jet(params, point[0].norm_sqr(), point[1].norm_sqr())?;
    Ok(DMatrix::from_fn(2, 2, |a, b| {
        let diag = if a == b { d[a] } else { 0.0 };
        C64::new(diag, 0.0) + point[a].conj() * point[b] * dd[a][b]
    }))
}

/// Real gradient of `Φ` on `(x_1, y_1, x_2, y_2)`.
pub fn go_gradient(params: &GoParams, point: &[C64]) -> Result<Vec<f64>> {
    let (_, d, _) = radial_jet(params, point[0].norm_sqr(), point[1].norm_sqr())?;
    Ok(vec![
        2.0 * point[0].re * d[0],
        2.0 * point[0].im * d[0],
        2.0 * point[1].re * d[1],
        2.0 * point[1].im * d[1],
    ])
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DerivativeCheck {
    pub j: u32,
    /// `Φ(0,|s|²)^{j(b-a)+1} / (|s|^{2j} b^j) · ∏_{k=1}^{j-1}(k b + 1 - j a)`.
    pub closed_form: f64,
    /// `d^jΦ/dr_1^j` at `(r_1, r_2) = (0, |s|^2)` by central differences of
    /// the bisection solver.
    pub finite_difference: f64,
    /// `∂^{2j}Φ/∂z_1^j∂z̄_1^j = j! · d^jΦ/dr_1^j`, the diagonal Calabi
    /// coefficient scaled by `(j!)^2`; same sign as the closed form.
    pub wirtinger: f64,
}

/// Closed-form `j`-th radial derivative at `(0, s)`, against finite
/// differences of the solver in `r_1 = |z_1|^2`.
pub fn go_derivative_check(params: &GoParams, s: C64, j: u32) -> Result<DerivativeCheck> {
    if !(1..=3).contains(&j) {
        return Err(Error::Parameter(format!("j must be in 1..=3, got {j}")));
    }
    if s.norm() == 0.0 {
        return Err(Error::Domain("s must be nonzero".into()));
    }
    let GoParams { a, b } = *params;
    let r2 = s.norm_sqr();
    let phi0 = go_potential_radial(params, 0.0, r2)?;
    let jf = j as f64;
    let closed_form =
        phi0.powf(jf * (b - a) + 1.0) / (r2.powi(j as i32) * b.powi(j as i32)) * go_eigen_product(a, b, j);

    // steps scaled with r2 so the stencil stays within the local bracket
    let g = |t: f64| go_potential_radial(params, t, r2).unwrap_or(f64::NAN);
    let finite_difference = match j {
        1 => fd::d1(g, 1e-3 * r2),
        2 => fd::d2(g, 1e-3 * r2),
        _ => fd::d3(g, 1e-2 * r2),
    };
    if !finite_difference.is_finite() {
        return Err(Error::Domain(
            "finite-difference stencil left the solver's bracket".into(),
        ));
    }
    let factorial: f64 = (1..=j).map(|i| i as f64).product();
    Ok(DerivativeCheck {
        j,
        closed_form,
        finite_difference,
        wirtinger: factorial * finite_difference,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unit_first_axis_gives_one() {
        for (a, b) in [(1.0, 1.0), (4.0 / 3.0, 2.0 / 3.0), (1.8, 0.2)] {
            let p = GoParams::new(a, b).unwrap();
            let phi = go_potential(&p, &[c(1.0, 0.0), c(0.0, 0.0)]).unwrap();
            assert!((phi - 1.0).abs() < 1e-12, "{a}: {phi}");
        }
    }

    #[test]
    fn equal_moduli_gives_norm_squared() {
        let p = GoParams::new(1.0, 1.0).unwrap();
        let z = [c(0.3, -1.2), c(0.7, 0.1)];
        let phi = go_potential(&p, &z).unwrap();
        assert!((phi - (z[0].norm_sqr() + z[1].norm_sqr())).abs() < 1e-12);
    }

    #[test]
    fn golden_ratio_point() {
        // t = Φ^{-2/3} solves t^2 + t = 1
        let p = GoParams::new(4.0 / 3.0, 2.0 / 3.0).unwrap();
        let phi = go_potential(&p, &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        let t = (5f64.sqrt() - 1.0) / 2.0;
        assert!((phi - t.powf(-1.5)).abs() < 1e-12);
        assert!((phi - 2.0582).abs() < 1e-4);
    }

    #[test]
    fn origin_is_a_domain_error() {
        let p = GoParams::new(1.0, 1.0).unwrap();
        assert!(matches!(
            go_potential(&p, &[c(0.0, 0.0), c(0.0, 0.0)]),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn moduli_to_params() {
        let p = GoParams::from_moduli(4.0, 2.0).unwrap();
        assert!((p.a - 4.0 / 3.0).abs() < 1e-14);
        assert!(GoParams::from_moduli(2.0, 4.0).is_err());
        assert!(GoParams::from_moduli(2.0, 1.0).is_err());
        assert!(GoParams::new(0.5, 1.5).is_err());
    }

    #[test]
    fn derivative_check_flat_case() {
        let p = GoParams::new(1.0, 1.0).unwrap();
        let d = go_derivative_check(&p, c(1.0, 0.0), 1).unwrap();
        assert!((d.closed_form - 1.0).abs() < 1e-14);
        assert!((d.finite_difference - 1.0).abs() < 1e-8);
    }

    #[test]
    fn derivative_check_four_thirds() {
        let p = GoParams::new(4.0 / 3.0, 2.0 / 3.0).unwrap();
        let d1 = go_derivative_check(&p, c(1.0, 0.0), 1).unwrap();
        assert!((d1.closed_form - 1.5).abs() < 1e-14);
        assert!((d1.finite_difference - 1.5).abs() < 1e-5);
        let d2 = go_derivative_check(&p, c(1.0, 0.0), 2).unwrap();
        assert!((d2.closed_form + 2.25).abs() < 1e-14);
        assert!((d2.finite_difference + 2.25).abs() < 1e-4);
        assert!((d2.wirtinger + 4.5).abs() < 2e-4);
    }

    #[test]
    fn derivative_check_off_unit_circle() {
        // |s|^2 = 1.69, values from an independent high-precision computation
        let p = GoParams::new(4.0 / 3.0, 2.0 / 3.0).unwrap();
        let s = c(1.3, 0.0);
        let expected = [1.153846153846154, -0.6059904172715349, 1.2376821892617976];
        for (j, e) in (1..=3).zip(expected) {
            let d = go_derivative_check(&p, s, j).unwrap();
            assert!((d.closed_form - e).abs() < 1e-12, "closed j={j}");
            assert!(
                (d.finite_difference - e).abs() < 1e-4 * e.abs().max(1.0),
                "fd j={j}: {}",
                d.finite_difference
            );
        }
    }

    #[test]
    fn derivative_order_out_of_range() {
        let p = GoParams::new(1.0, 1.0).unwrap();
        assert!(go_derivative_check(&p, c(1.0, 0.0), 4).is_err());
        assert!(go_derivative_check(&p, c(1.0, 0.0), 0).is_err());
    }

    #[test]
    fn analytic_hessian_matches_finite_differences() {
        let p = GoParams::new(1.5, 0.5).unwrap();
        let z = [c(0.4, -0.3), c(1.1, 0.6)];
        let exact = go_hessian(&p, &z).unwrap();
        let f = |w: &[C64]| go_potential(&p, w).unwrap();
        let approx = fd::complex_hessian(&f, &z, fd::HESSIAN_STEP);
        assert!((exact - approx).norm() < 1e-6);
    }
}
