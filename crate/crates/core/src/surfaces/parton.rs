use std::sync::Arc;

use nalgebra::DMatrix;
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::{in_box, Surface, SurfaceSpec};
use crate::algebra::{BiSeries, C64};
use crate::error::{Error, Result};
use crate::geometry::{DeckMap, HermitianMetricField, PointFn, PotentialField};
use crate::immersions::{ImmersionMap, PartonMap};

/// `(C^2 \ 0)/⟨α·id⟩` with covering potential `Φ_k = ‖z‖^{2k}/k`.
#[derive(Clone, Debug)]
pub struct Parton {
    k: u32,
    alpha: C64,
}

impl Parton {
    pub fn new(k: u32, alpha: C64) -> Result<Self> {
        if !(1..=12).contains(&k) {
            return Err(Error::Parameter(format!("parton: k must be in 1..=12, got {k}")));
        }
        if alpha.norm() <= 1.0 {
            return Err(Error::Parameter(format!(
                "parton: need |alpha| > 1, got {}",
                alpha.norm()
            )));
        }
        Ok(Parton { k, alpha })
    }

    pub fn build(spec: &SurfaceSpec) -> Result<Box<dyn Surface>> {
        spec.expect_keys(&["k", "alpha"])?;
        let k = spec.unsigned("k")?.unwrap_or(2);
        let alpha = spec.complex("alpha")?.unwrap_or(C64::new(2.0, 0.0));
        Ok(Box::new(Parton::new(k, alpha)?))
    }

    pub fn k(&self) -> u32 {
        self.k
    }

    fn series(&self, d: u32) -> BiSeries {
        BiSeries::norm_sq(2, d).powi(self.k).scale_real(1.0 / self.k as f64)
    }
}

fn radius(z: &[C64]) -> f64 {
    z[0].norm_sqr() + z[1].norm_sqr()
}

impl Surface for Parton {
    fn family(&self) -> &'static str {
        "parton"
    }
    fn selector(&self) -> String {
        format!("parton:alpha={},k={}", self.alpha, self.k)
    }
    fn params_json(&self) -> serde_json::Value {
        json!({"k": self.k, "alpha": [self.alpha.re, self.alpha.im]})
    }
    fn potential(&self) -> PotentialField {
        let k = self.k;
        PotentialField::new(
            format!("parton-potential(k={k})"),
            2,
            move |z| radius(z).powi(k as i32) / k as f64,
            |z| z.len() == 2,
        )
        .with_series(self.series(k), vec![C64::new(0.0, 0.0); 2])
    }
    fn covering_metric(&self) -> HermitianMetricField {
        let k = self.k as i32;
        HermitianMetricField::new(
            format!("parton-kahler(k={k})"),
            2,
            move |z| {
                let r = radius(z);
                DMatrix::from_fn(2, 2, |a, b| {
                    let diag = if a == b { r.powi(k - 1) } else { 0.0 };
                    let rank_one = if k >= 2 { (k - 1) as f64 * r.powi(k - 2) } else { 0.0 };
                    C64::new(diag, 0.0) + z[a].conj() * z[b] * rank_one
                })
            },
            |z| z.len() == 2,
        )
    }
    fn lck_metric(&self) -> HermitianMetricField {
        let k = self.k as i32;
        let grad: PointFn<Vec<f64>> = Arc::new(move |z| {
            let s = radius(z).powi(k - 1);
            z.iter().flat_map(|c| [2.0 * c.re * s, 2.0 * c.im * s]).collect()
        });
        // Φ^{-1} needs Φ > 0
        let base = PotentialField::new(
            format!("parton-potential(k={k})"),
            2,
            move |z| radius(z).powi(k) / k as f64,
            |z| z.len() == 2 && radius(z) > 0.0,
        );
        HermitianMetricField::conformal_lck(format!("parton-lck(k={k})"), &self.covering_metric(), &base, Some(grad))
    }
    fn deck_maps(&self) -> Vec<DeckMap> {
        vec![DeckMap::scalar("alpha-id", 2, self.alpha)]
    }
    fn sample_points(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        let mut out = Vec::with_capacity(n);
        while out.len() < n {
            let z = vec![in_box(rng, 1.5), in_box(rng, 1.5)];
            if radius(&z) > 0.04 {
                out.push(z);
            }
        }
        out
    }
    fn potential_series(&self, d: u32) -> Result<BiSeries> {
        Ok(self.series(d))
    }
    fn immersion(&self) -> Result<Arc<dyn ImmersionMap>> {
        Ok(Arc::new(PartonMap::new(self.k)))
    }
    fn expected_scalar(&self, _deck: &str) -> Result<bool> {
        Ok(true)
    }
}
