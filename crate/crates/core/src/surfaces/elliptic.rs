use std::sync::Arc;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{in_disc, uniform, Surface, SurfaceSpec};
use crate::algebra::C64;
use crate::error::Result;
use crate::geometry::{DeckMap, HermitianMetricField, PointFn, PotentialField};
use crate::immersions::{EllipticMap, ImmersionMap};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Properly elliptic covering `{Im(z_1 z̄_2) < 0}` (the region where the
/// series `Σ |n/d|^{2j}` converges) with potential `|Im(z_1 z̄_2)|^{-1}`.
#[derive(Clone, Copy, Debug, Default)]
pub struct Elliptic;

/// `t = Im(z_1 z̄_2)`.
fn t(z: &[C64]) -> f64 {
    (z[0] * z[1].conj()).im
}

fn in_domain(z: &[C64]) -> bool {
    z.len() == 2 && t(z) < 0.0
}

/// `∂t/∂z_a` and `∂t/∂z̄_b`.
fn t_derivatives(z: &[C64]) -> ([C64; 2], [C64; 2]) {
    let k = 1.0 / (2.0 * I);
    ([z[1].conj() * k, -z[0].conj() * k], [-z[1] * k, z[0] * k])
}

/// `∂∂̄(-1/t) = t_{ab̄}/t^2 - 2 t_a t_b̄ / t^3`.
fn hessian(z: &[C64]) -> DMatrix<C64> {
    let tv = t(z);
    let (da, db) = t_derivatives(z);
    let k = 1.0 / (2.0 * I);
    let mixed = [[C64::new(0.0, 0.0), k], [-k, C64::new(0.0, 0.0)]];
    DMatrix::from_fn(2, 2, |a, b| {
        mixed[a][b] / (tv * tv) - da[a] * db[b] * (2.0 / (tv * tv * tv))
    })
}

/// `t = |d|^2 (|q|^2 - 1)/4`, so both bounds keep samples off `t = 0`.
fn ratio_samples(rng: &mut ChaCha8Rng, n: usize, max_ratio: f64, min_d: f64) -> Vec<Vec<C64>> {
    (0..n)
        .map(|_| {
            let q = in_disc(rng, max_ratio);
            let d = C64::from_polar(uniform(rng, min_d, 2.0), uniform(rng, 0.0, std::f64::consts::TAU));
            Elliptic::from_ratio(q, d)
        })
        .collect()
}

impl Elliptic {
    pub fn build(spec: &SurfaceSpec) -> Result<Box<dyn Surface>> {
        spec.expect_keys(&[])?;
        Ok(Box::new(Elliptic))
    }

    /// `(z_1, z_2)` with `z_1 - i z_2 = d`, `z_1 + i z_2 = q d`.
    pub fn from_ratio(q: C64, d: C64) -> Vec<C64> {
        vec![(d + q * d) / 2.0, (q * d - d) / (2.0 * I)]
    }
}

impl Surface for Elliptic {
    fn family(&self) -> &'static str {
        "elliptic"
    }
    fn selector(&self) -> String {
        "elliptic".into()
    }
    fn params_json(&self) -> serde_json::Value {
        json!({})
    }
    fn potential(&self) -> PotentialField {
        PotentialField::new("elliptic-potential", 2, |z| -1.0 / t(z), in_domain)
    }
    fn covering_metric(&self) -> HermitianMetricField {
        HermitianMetricField::new("elliptic-kahler", 2, hessian, in_domain)
    }
    fn lck_metric(&self) -> HermitianMetricField {
        // dΦ = dt / t^2; for real f, ∂f/∂x = 2 Re ∂f/∂z and ∂f/∂y = -2 Im ∂f/∂z
        let grad: PointFn<Vec<f64>> = Arc::new(|z| {
            let tv = t(z);
            let (da, _) = t_derivatives(z);
            da.iter()
                .flat_map(|d| [2.0 * d.re / (tv * tv), -2.0 * d.im / (tv * tv)])
                .collect()
        });
        HermitianMetricField::conformal_lck("elliptic-lck", &self.covering_metric(), &self.potential(), Some(grad))
    }
    fn deck_maps(&self) -> Vec<DeckMap> {
        let r = |x: f64| C64::new(x, 0.0);
        vec![
            DeckMap::scalar("2id", 2, r(2.0)),
            DeckMap::scalar("3id", 2, r(3.0)),
            DeckMap::scalar("5id", 2, r(5.0)),
            DeckMap::linear("sl2", DMatrix::from_row_slice(2, 2, &[r(2.0), r(1.0), r(1.0), r(1.0)])),
        ]
    }
    fn sample_points(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        // finite differences of the metric degrade near t = 0
        ratio_samples(rng, n, 0.6, 1.0)
    }
    fn immersion(&self) -> Result<Arc<dyn ImmersionMap>> {
        Ok(Arc::new(EllipticMap))
    }
    fn immersion_samples(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        ratio_samples(rng, n, 0.8, 0.5)
    }
    fn expected_scalar(&self, deck: &str) -> Result<bool> {
        // the ratio n/d is invariant under scalars; SL(2,R) mixes the powers
        Ok(deck != "sl2")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fd, homothety_factor, lck_residual};
    use rand::SeedableRng;

    #[test]
    fn closed_form_hessian_matches_finite_differences() {
        let z = Elliptic::from_ratio(C64::new(0.2, -0.3), C64::new(1.1, 0.4));
        let pot = Elliptic.potential();
        let f = |w: &[C64]| pot.evaluate(w).unwrap();
        let approx = fd::complex_hessian(&f, &z, fd::HESSIAN_STEP);
        let exact = hessian(&z);
        assert!((approx - &exact).norm() < 1e-6 * exact.norm());
    }

    #[test]
    fn sample_convention_point() {
        // (1, 0.5i) has ratio 1/3
        let z = [C64::new(1.0, 0.0), C64::new(0.0, 0.5)];
        assert!(in_domain(&z));
        let q = (z[0] + I * z[1]) / (z[0] - I * z[1]);
        assert!((q - C64::new(1.0 / 3.0, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn scalar_decks_scale_by_inverse_square() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let pts = Elliptic.sample_points(&mut rng, 10);
        for (deck, expected) in [("2id", 0.25), ("3id", 1.0 / 9.0), ("sl2", 1.0)] {
            let r = homothety_factor(&Elliptic.deck(deck).unwrap(), &Elliptic.covering_metric(), &pts);
            assert!((r.factor - expected).abs() < 1e-10, "{deck}: {r:?}");
            assert!(r.homothetic);
        }
    }

    #[test]
    fn lck_condition_holds() {
        let z = Elliptic::from_ratio(C64::new(0.1, 0.2), C64::new(0.9, -0.3));
        let r = lck_residual(&Elliptic.lck_metric(), &z).unwrap();
        assert!(r < 1e-5, "{r}");
    }
}
