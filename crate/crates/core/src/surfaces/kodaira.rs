use std::sync::Arc;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{in_box, in_disc, Surface, SurfaceSpec};
use crate::algebra::{BiSeries, C64};
use crate::error::{Error, Result};
use crate::geometry::{DeckKind, DeckMap, HermitianMetricField, PointFn, PotentialField};
use crate::immersions::{ImmersionMap, KodairaMap};

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Degree of the series attached to the potential; accurate near the origin only.
const ATTACHED_DEGREE: u32 = 12;

/// Primary Kodaira surface, covering `C^2 ∋ (z, w)` with potential
/// `Φ = exp(u/2)`, `u = |z|^2/2 + Im w`.
#[derive(Clone, Copy, Debug)]
pub struct Kodaira {
    shift: f64,
}

fn phi(z: &[C64]) -> f64 {
    (z[0].norm_sqr() / 4.0 + z[1].im / 2.0).exp()
}

fn everywhere(z: &[C64]) -> bool {
    z.len() == 2
}

/// Deck map of `Heis(3;R) × R` acting by `(a, b, c, d)`:
/// `z ↦ z + (a + ib)/√2`,
/// `w ↦ w - (i/√2)(a - ib) z + c - ab/2 - (i/4)(a^2 + b^2) + i d`.
pub fn heisenberg_deck(name: &str, a: f64, b: f64, c: f64, d: f64) -> DeckMap {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let tz = C64::new(a, b) * s;
    let slope = -I * s * C64::new(a, -b);
    let tw = C64::new(c - a * b / 2.0, d - (a * a + b * b) / 4.0);
    DeckMap::new(
        name,
        DeckKind::Heisenberg,
        move |z| vec![z[0] + tz, z[1] + slope * z[0] + tw],
        move |_| {
            DMatrix::from_row_slice(
                2,
                2,
                &[C64::new(1.0, 0.0), C64::new(0.0, 0.0), slope, C64::new(1.0, 0.0)],
            )
        },
    )
}

impl Kodaira {
    pub fn new(shift: f64) -> Result<Self> {
        if !(shift.is_finite() && shift != 0.0) {
            return Err(Error::Parameter(format!(
                "kodaira: shift must be finite and nonzero, got {shift}"
            )));
        }
        Ok(Kodaira { shift })
    }

    pub fn build(spec: &SurfaceSpec) -> Result<Box<dyn Surface>> {
        spec.expect_keys(&["shift"])?;
        Ok(Box::new(Kodaira::new(spec.real("shift")?.unwrap_or(1.0))?))
    }

    /// `exp(|z|^2/4 - i w/4 + i w̄/4)`.
    pub fn series(d: u32) -> BiSeries {
        let x = BiSeries::abs_sq(2, d, 0)
            .scale_real(0.25)
            .add(&BiSeries::variable(2, d, 1).scale(-I * 0.25))
            .and_then(|s| s.add(&BiSeries::conj_variable(2, d, 1).scale(I * 0.25)))
            .expect("same number of variables")
            .with_hermitian_flag(true);
        x.exp()
    }
}

impl Surface for Kodaira {
    fn family(&self) -> &'static str {
        "kodaira"
    }
    fn selector(&self) -> String {
        format!("kodaira:shift={}", self.shift)
    }
    fn params_json(&self) -> serde_json::Value {
        json!({"shift": self.shift})
    }
    fn potential(&self) -> PotentialField {
        PotentialField::new("kodaira-potential", 2, phi, everywhere)
            .with_series(Kodaira::series(ATTACHED_DEGREE), vec![C64::new(0.0, 0.0); 2])
    }
    fn covering_metric(&self) -> HermitianMetricField {
        HermitianMetricField::new(
            "kodaira-kahler",
            2,
            |z| {
                let p = phi(z) / 16.0;
                DMatrix::from_row_slice(
                    2,
                    2,
                    &[
                        C64::new(p * (z[0].norm_sqr() + 4.0), 0.0),
                        I * p * z[0].conj(),
                        -I * p * z[0],
                        C64::new(p, 0.0),
                    ],
                )
            },
            everywhere,
        )
    }
    fn lck_metric(&self) -> HermitianMetricField {
        let grad: PointFn<Vec<f64>> = Arc::new(|z| {
            let p = phi(z);
            vec![p * z[0].re / 2.0, p * z[0].im / 2.0, 0.0, p / 2.0]
        });
        let pot = PotentialField::new("kodaira-potential", 2, phi, everywhere);
        HermitianMetricField::conformal_lck("kodaira-lck", &self.covering_metric(), &pot, Some(grad))
    }
    fn deck_maps(&self) -> Vec<DeckMap> {
        vec![
            heisenberg_deck("u-shift", 0.0, 0.0, 0.0, self.shift),
            heisenberg_deck("heis-a", 1.0, 0.0, 0.0, 0.0),
            heisenberg_deck("heis-b", 0.0, 1.0, 0.0, 0.0),
            heisenberg_deck("heis-c", 0.0, 0.0, 1.0, 0.0),
        ]
    }
    fn sample_points(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        (0..n).map(|_| vec![in_disc(rng, 2.0), in_box(rng, 2.0)]).collect()
    }
    fn potential_series(&self, d: u32) -> Result<BiSeries> {
        Ok(Kodaira::series(d))
    }
    fn immersion(&self) -> Result<Arc<dyn ImmersionMap>> {
        Ok(Arc::new(KodairaMap))
    }
    fn expected_scalar(&self, deck: &str) -> Result<bool> {
        // translations in w only change the phase or modulus of every component
        Ok(matches!(deck, "u-shift" | "heis-c"))
    }
}
