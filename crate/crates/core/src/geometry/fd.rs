//! Fourth-order central finite differences in the underlying real coordinates
//! `(x_1, y_1, ..., x_n, y_n)` of a point in `C^n`.

use nalgebra::DMatrix;

use crate::algebra::C64;

/// Step for metric Hessians.
pub const HESSIAN_STEP: f64 = 1e-4;
/// Step for exterior derivatives of metric coefficients.
pub const EXTERIOR_STEP: f64 = 1e-3;

/// Shifts real coordinate `axis` (`2a` = Re z_a, `2a+1` = Im z_a) by `delta`.
pub fn shifted(point: &[C64], axis: usize, delta: f64) -> Vec<C64> {
    let mut p = point.to_vec();
    let a = axis / 2;
    if axis.is_multiple_of(2) {
        p[a].re += delta;
    } else {
        p[a].im += delta;
    }
    p
}

/// `f'(0)` from `g(t) = f(t)`, error `O(h^4)`.
pub fn d1<T, F>(g: F, h: f64) -> T
where
    F: Fn(f64) -> T,
    T: std::ops::Add<Output = T> + std::ops::Sub<Output = T> + std::ops::Mul<f64, Output = T>,
{
    (g(-2.0 * h) - g(2.0 * h) + (g(h) - g(-h)) * 8.0) * (1.0 / (12.0 * h))
}

/// `f''(0)`, error `O(h^4)`.
pub fn d2<F: Fn(f64) -> f64>(g: F, h: f64) -> f64 {
    (-g(-2.0 * h) + 16.0 * g(-h) - 30.0 * g(0.0) + 16.0 * g(h) - g(2.0 * h)) / (12.0 * h * h)
}

/// `f'''(0)`, error `O(h^4)`.
pub fn d3<F: Fn(f64) -> f64>(g: F, h: f64) -> f64 {
    (g(-3.0 * h) - 8.0 * g(-2.0 * h) + 13.0 * g(-h) - 13.0 * g(h) + 8.0 * g(2.0 * h) - g(3.0 * h)) / (8.0 * h * h * h)
}

/// Real Hessian of `f` in the `2n` real coordinates.
pub fn real_hessian<F: Fn(&[C64]) -> f64 + ?Sized>(f: &F, point: &[C64], h: f64) -> DMatrix<f64> {
    let m = 2 * point.len();
    let mut hess = DMatrix::zeros(m, m);
    for p in 0..m {
        hess[(p, p)] = d2(|t| f(&shifted(point, p, t)), h);
        for q in (p + 1)..m {
            let v = d1(|s| d1(|t| f(&shifted(&shifted(point, p, s), q, t)), h), h);
            hess[(p, q)] = v;
            hess[(q, p)] = v;
        }
    }
    hess
}

/// Complex Hessian `∂²f/∂z_a∂z̄_b` assembled from the real Hessian:
/// `¼[f_{x_a x_b} + f_{y_a y_b} + i(f_{x_a y_b} - f_{y_a x_b})]`.
pub fn complex_hessian<F: Fn(&[C64]) -> f64 + ?Sized>(f: &F, point: &[C64], h: f64) -> DMatrix<C64> {
    let n = point.len();
    let r = real_hessian(f, point, h);
    DMatrix::from_fn(n, n, |a, b| {
        let (xa, ya, xb, yb) = (2 * a, 2 * a + 1, 2 * b, 2 * b + 1);
        C64::new(r[(xa, xb)] + r[(ya, yb)], r[(xa, yb)] - r[(ya, xb)]) * 0.25
    })
}

/// Real gradient (`2n` entries) of `f`.
pub fn gradient<F: Fn(&[C64]) -> f64 + ?Sized>(f: &F, point: &[C64], h: f64) -> Vec<f64> {
    (0..2 * point.len())
        .map(|p| d1(|t| f(&shifted(point, p, t)), h))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn stencils_on_exponential() {
        let h = 1e-3;
        assert!((d1(|t: f64| t.exp(), h) - 1.0).abs() < 1e-11);
        assert!((d2(|t: f64| t.exp(), h) - 1.0).abs() < 1e-8);
        assert!((d3(|t: f64| t.exp(), 1e-2) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn complex_hessian_of_polynomial() {
        // f = |z1|^2 |z2|^2: ∂1∂̄1 = |z2|^2, ∂1∂̄2 = z̄1 z2
        let f = |z: &[C64]| z[0].norm_sqr() * z[1].norm_sqr();
        let p = [C64::new(0.3, -0.2), C64::new(1.1, 0.4)];
        let h = complex_hessian(&f, &p, HESSIAN_STEP);
        assert!((h[(0, 0)] - C64::new(p[1].norm_sqr(), 0.0)).norm() < 1e-7);
        assert!((h[(0, 1)] - p[0].conj() * p[1]).norm() < 1e-7);
        assert!((h[(1, 0)] - p[1].conj() * p[0]).norm() < 1e-7);
    }
}
