//! The explicit maps of the surface catalog.

use nalgebra::DMatrix;

use super::{geometric_tail, ImmersionMap, TailBound, TailKind};
use crate::algebra::C64;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// `z ↦ A z`.
#[derive(Clone, Debug)]
pub struct LinearMap {
    name: String,
    matrix: DMatrix<C64>,
}

impl LinearMap {
    pub fn new(name: impl Into<String>, matrix: DMatrix<C64>) -> Self {
        LinearMap {
            name: name.into(),
            matrix,
        }
    }

    pub fn identity(n: usize) -> Self {
        LinearMap::new("identity", DMatrix::identity(n, n))
    }
}

impl ImmersionMap for LinearMap {
    fn name(&self) -> String {
        self.name.clone()
    }
    fn nvars(&self) -> usize {
        self.matrix.ncols()
    }
    fn in_domain(&self, z: &[C64]) -> bool {
        z.len() == self.nvars()
    }
    fn finite_len(&self) -> Option<usize> {
        Some(self.matrix.nrows())
    }
    fn tail_kind(&self) -> TailKind {
        TailKind::Finite
    }
    fn component(&self, j: usize, z: &[C64]) -> C64 {
        (0..z.len()).map(|a| self.matrix[(j, a)] * z[a]).sum()
    }
    fn jacobian_row(&self, j: usize, _z: &[C64]) -> Vec<C64> {
        self.matrix.row(j).iter().copied().collect()
    }
    fn tail_bound(&self, _j0: usize, _z: &[C64]) -> TailBound {
        TailBound::ZERO
    }
}

/// `F_j = sqrt(C(k,j)/k) z_1^{k-j} z_2^j`, `j = 0..=k`; `‖F‖^2 = ‖z‖^{2k}/k`.
#[derive(Clone, Debug)]
pub struct PartonMap {
    k: u32,
    coeffs: Vec<f64>,
}

impl PartonMap {
    pub fn new(k: u32) -> Self {
        assert!(k >= 1, "parton degree must be positive");
        let mut binom = 1.0f64;
        let mut coeffs = Vec::with_capacity(k as usize + 1);
        for j in 0..=k {
            if j > 0 {
                binom = binom * (k - j + 1) as f64 / j as f64;
            }
            coeffs.push((binom / k as f64).sqrt());
        }
        PartonMap { k, coeffs }
    }

    pub fn k(&self) -> u32 {
        self.k
    }
}

impl ImmersionMap for PartonMap {
    fn name(&self) -> String {
        format!("parton(k={})", self.k)
    }
    fn nvars(&self) -> usize {
        2
    }
    fn in_domain(&self, z: &[C64]) -> bool {
        z.len() == 2
    }
    fn finite_len(&self) -> Option<usize> {
        Some(self.k as usize + 1)
    }
    fn tail_kind(&self) -> TailKind {
        TailKind::Finite
    }
    fn component(&self, j: usize, z: &[C64]) -> C64 {
        let p = self.k - j as u32;
        z[0].powu(p) * z[1].powu(j as u32) * self.coeffs[j]
    }
    fn jacobian_row(&self, j: usize, z: &[C64]) -> Vec<C64> {
        let (p, q) = (self.k - j as u32, j as u32);
        let c = self.coeffs[j];
        let d1 = if p == 0 {
            C64::new(0.0, 0.0)
        } else {
            z[0].powu(p - 1) * z[1].powu(q) * (c * p as f64)
        };
        let d2 = if q == 0 {
            C64::new(0.0, 0.0)
        } else {
            z[0].powu(p) * z[1].powu(q - 1) * (c * q as f64)
        };
        vec![d1, d2]
    }
    fn tail_bound(&self, _j0: usize, _z: &[C64]) -> TailBound {
        TailBound::ZERO
    }
}

/// `φ_j = n^j / d^{j+1}` with `n = z_1 + i z_2`, `d = z_1 - i z_2`, on
/// `|n| < |d|`; `‖φ‖^2 = 1/(|d|^2 - |n|^2) = -1/(4 Im(z_1 z̄_2))`.
#[derive(Clone, Copy, Debug, Default)]
pub struct EllipticMap;

impl EllipticMap {
    fn nd(z: &[C64]) -> (C64, C64) {
        (z[0] + I * z[1], z[0] - I * z[1])
    }
}

impl ImmersionMap for EllipticMap {
    fn name(&self) -> String {
        "elliptic".into()
    }
    fn nvars(&self) -> usize {
        2
    }
    fn in_domain(&self, z: &[C64]) -> bool {
        if z.len() != 2 {
            return false;
        }
        let (n, d) = Self::nd(z);
        d.norm() > 0.0 && n.norm() < d.norm()
    }
    fn finite_len(&self) -> Option<usize> {
        None
    }
    fn tail_kind(&self) -> TailKind {
        TailKind::Geometric
    }
    fn component(&self, j: usize, z: &[C64]) -> C64 {
        let (n, d) = Self::nd(z);
        (n / d).powu(j as u32) / d
    }
    fn jacobian_row(&self, j: usize, z: &[C64]) -> Vec<C64> {
        let (n, d) = Self::nd(z);
        let q = n / d;
        let jf = j as f64;
        // ∂n/∂z = (1, i), ∂d/∂z = (1, -i)
        let from_n = if j == 0 {
            C64::new(0.0, 0.0)
        } else {
            q.powu(j as u32 - 1) / (d * d) * jf
        };
        let from_d = -q.powu(j as u32) / (d * d) * (jf + 1.0);
        vec![from_n + from_d, I * from_n - I * from_d]
    }
    fn tail_bound(&self, j0: usize, z: &[C64]) -> TailBound {
        let (n, d) = Self::nd(z);
        let d2 = d.norm_sqr();
        let s = n.norm() / d.norm();
        let r = s * s;
        let value = geometric_tail(r.powi(j0 as i32) / d2, r);
        // |∂_a φ_j| <= (2j+1) s^{j-1} / |d|^2 for j >= 1
        let start = j0.max(1);
        let first = 2.0 * ((2 * start + 1) as f64).powi(2) * r.powi(start as i32 - 1) / (d2 * d2);
        let grow = ((2 * start + 3) as f64 / (2 * start + 1) as f64).powi(2);
        let mut jacobian = geometric_tail(first, grow * r);
        if j0 == 0 {
            jacobian += 2.0 / (d2 * d2);
        }
        TailBound { value, jacobian }
    }
}

/// `F_j = z^j / (2^j sqrt(j!)) · exp(-i w / 4)`; `‖F‖^2 = exp(|z|^2/4 + Im w / 2)`.
#[derive(Clone, Copy, Debug, Default)]
pub struct KodairaMap;

impl KodairaMap {
    /// `z^j / (2^j sqrt(j!))`.
    fn scaled_power(j: usize, z: C64) -> C64 {
        (1..=j).fold(C64::new(1.0, 0.0), |acc, i| acc * z / (2.0 * (i as f64).sqrt()))
    }

    fn phase(w: C64) -> C64 {
        (-I * w / 4.0).exp()
    }

    /// `x^j / j!`.
    fn power_over_factorial(x: f64, j: usize) -> f64 {
        (1..=j).fold(1.0, |acc, i| acc * x / i as f64)
    }
}

impl ImmersionMap for KodairaMap {
    fn name(&self) -> String {
        "kodaira".into()
    }
    fn nvars(&self) -> usize {
        2
    }
    fn in_domain(&self, z: &[C64]) -> bool {
        z.len() == 2 && z.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }
    fn finite_len(&self) -> Option<usize> {
        None
    }
    fn tail_kind(&self) -> TailKind {
        TailKind::Factorial
    }
    fn component(&self, j: usize, z: &[C64]) -> C64 {
        Self::scaled_power(j, z[0]) * Self::phase(z[1])
    }
    fn jacobian_row(&self, j: usize, z: &[C64]) -> Vec<C64> {
        let e = Self::phase(z[1]);
        let dz = if j == 0 {
            C64::new(0.0, 0.0)
        } else {
            Self::scaled_power(j - 1, z[0]) * e * ((j as f64).sqrt() / 2.0)
        };
        let dw = -I / 4.0 * Self::scaled_power(j, z[0]) * e;
        vec![dz, dw]
    }
    fn tail_bound(&self, j0: usize, z: &[C64]) -> TailBound {
        let x = z[0].norm_sqr() / 4.0;
        let e = (z[1].im / 2.0).exp();
        let exp_tail = |j: usize| {
            let first = Self::power_over_factorial(x, j);
            geometric_tail(first, x / (j + 1) as f64)
        };
        let value = e * exp_tail(j0);
        // Σ (j/4) x^{j-1}/(j-1)! over j >= max(j0, 1)
        let start = j0.max(1);
        let first = start as f64 / 4.0 * Self::power_over_factorial(x, start - 1);
        let ratio = (start + 1) as f64 / start as f64 * x / start as f64;
        let jacobian = e * (geometric_tail(first, ratio) + exp_tail(j0) / 16.0);
        TailBound { value, jacobian }
    }
}

/// `F = (z, √2 ŵ, √2(ŵ^2 - iŵ), ..., √2(ŵ^{j+1} - iŵ^j), ...)` on `C × {|ŵ| < 1}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct InoueMap;

impl ImmersionMap for InoueMap {
    fn name(&self) -> String {
        "inoue".into()
    }
    fn nvars(&self) -> usize {
        2
    }
    fn in_domain(&self, z: &[C64]) -> bool {
        z.len() == 2 && z[1].norm() < 1.0
    }
    fn finite_len(&self) -> Option<usize> {
        None
    }
    fn tail_kind(&self) -> TailKind {
        TailKind::Geometric
    }
    fn component(&self, j: usize, z: &[C64]) -> C64 {
        let w = z[1];
        match j {
            0 => z[0],
            1 => w * std::f64::consts::SQRT_2,
            _ => w.powu(j as u32 - 1) * (w - I) * std::f64::consts::SQRT_2,
        }
    }
    fn jacobian_row(&self, j: usize, z: &[C64]) -> Vec<C64> {
        let w = z[1];
        let zero = C64::new(0.0, 0.0);
        match j {
            0 => vec![C64::new(1.0, 0.0), zero],
            1 => vec![zero, C64::new(std::f64::consts::SQRT_2, 0.0)],
            _ => {
                let c = j as f64;
                let d = w.powu(j as u32 - 1) * c - I * w.powu(j as u32 - 2) * (c - 1.0);
                vec![zero, d * std::f64::consts::SQRT_2]
            }
        }
    }
    fn tail_bound(&self, j0: usize, z: &[C64]) -> TailBound {
        let s = z[1].norm();
        let r = s * s;
        let m = j0.max(2);
        let mut value = geometric_tail(2.0 * (z[1] - I).norm_sqr() * r.powi(m as i32 - 1), r);
        // |∂F_c|^2 <= 2 (2c-1)^2 s^{2(c-2)} for c >= 2
        let first = 2.0 * ((2 * m - 1) as f64).powi(2) * r.powi(m as i32 - 2);
        let grow = ((2 * m + 1) as f64 / (2 * m - 1) as f64).powi(2);
        let mut jacobian = geometric_tail(first, grow * r);
        if j0 <= 1 {
            value += 2.0 * r;
            jacobian += 2.0;
        }
        if j0 == 0 {
            value += z[0].norm_sqr();
            jacobian += 1.0;
        }
        TailBound { value, jacobian }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fd;
    use crate::immersions::{evaluate, evaluate_to, norm_squared, pullback_metric};

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    /// Jacobian rows against central differences of the components.
    fn check_rows(map: &dyn ImmersionMap, z: &[C64], n: usize) {
        for j in 0..n {
            let row = map.jacobian_row(j, z);
            for (a, entry) in row.iter().enumerate() {
                // holomorphic: ∂F/∂z_a = ∂F/∂x_a
                let fd_val = fd::d1(|t| map.component(j, &fd::shifted(z, 2 * a, t)), 1e-4);
                assert!(
                    (entry - fd_val).norm() < 1e-8 * (1.0 + fd_val.norm()),
                    "{} j={j} a={a}",
                    map.name()
                );
            }
        }
    }

    #[test]
    fn jacobian_rows_match_finite_differences() {
        check_rows(&PartonMap::new(3), &[c(0.4, -0.2), c(1.1, 0.3)], 4);
        check_rows(&EllipticMap, &[c(0.9, 0.1), c(0.2, -0.6)], 8);
        check_rows(&KodairaMap, &[c(0.7, -0.4), c(0.3, 1.2)], 8);
        check_rows(&InoueMap, &[c(0.3, 0.1), c(0.1, 0.4)], 8);
    }

    #[test]
    fn parton_two_norm_at_unit_point() {
        let n = norm_squared(&PartonMap::new(2), &[c(1.0, 0.0), c(1.0, 0.0)]).unwrap();
        assert!((n.value - 2.0).abs() < 1e-15);
        assert_eq!(n.error_bar, 0.0);
    }

    #[test]
    fn parton_two_pullback_at_first_axis() {
        let m = pullback_metric(&PartonMap::new(2), &[c(1.0, 0.0), c(0.0, 0.0)])
            .unwrap()
            .matrix;
        assert!((m[(0, 0)] - c(2.0, 0.0)).norm() < 1e-14);
        assert!((m[(1, 1)] - c(1.0, 0.0)).norm() < 1e-14);
        assert!(m[(0, 1)].norm() < 1e-14);
    }

    #[test]
    fn inoue_norm_on_imaginary_axis_point() {
        let n = norm_squared(&InoueMap, &[c(0.0, 0.0), c(0.5, 0.0)]).unwrap();
        assert!((n.value - 4.0 / 3.0).abs() < 1e-9);
    }

    #[test]
    fn kodaira_norm_at_origin_is_one() {
        let n = norm_squared(&KodairaMap, &[c(0.0, 0.0), c(0.0, 0.0)]).unwrap();
        assert!((n.value - 1.0).abs() < 1e-15);
    }

    #[test]
    fn elliptic_norm_matches_closed_form() {
        let z = [c(1.0, 0.0), c(0.0, 0.5)];
        let n = norm_squared(&EllipticMap, &z).unwrap();
        let exact = -1.0 / (4.0 * (z[0] * z[1].conj()).im);
        assert!((n.value - exact).abs() <= 1e-9 * exact);
        assert!(n.value <= exact && exact <= n.value + n.error_bar + 1e-15);
    }

    #[test]
    fn elliptic_outside_domain() {
        assert!(!EllipticMap.in_domain(&[c(1.0, 0.0), c(0.0, -0.5)]));
        assert!(evaluate(&EllipticMap, &[c(1.0, 0.0), c(0.0, -0.5)]).is_err());
    }

    #[test]
    fn tails_bound_longer_partial_sums() {
        let pts: [(&dyn ImmersionMap, [C64; 2]); 3] = [
            (&EllipticMap, [c(0.6, 0.2), c(-0.1, 0.45)]),
            (&KodairaMap, [c(1.8, 0.5), c(0.4, 1.9)]),
            (&InoueMap, [c(0.2, 0.1), c(0.5, -0.6)]),
        ];
        for (map, z) in pts {
            let e = evaluate(map, &z).unwrap();
            let j = e.truncation();
            let longer = evaluate_to(map, &z, j + 200);
            let s: f64 = e.values.iter().map(|v| v.norm_sqr()).sum();
            let s2: f64 = longer.values.iter().map(|v| v.norm_sqr()).sum();
            assert!(s2 <= s + e.tail.value * (1.0 + 1e-12) + 1e-15, "{}", map.name());
        }
    }
}
