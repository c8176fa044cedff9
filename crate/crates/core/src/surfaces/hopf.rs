use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use super::go::{go_gradient, go_hessian, go_potential, GoParams};
use super::{in_box, Surface, SurfaceSpec};
use crate::algebra::{BiSeries, C64};
use crate::error::{Error, Result};
use crate::geometry::{DeckMap, HermitianMetricField, PointFn, PotentialField};
use crate::immersions::{ImmersionMap, LinearMap};

fn nonzero(z: &[C64]) -> bool {
    z.iter().any(|c| c.norm() > 0.0)
}

fn flat_norm(z: &[C64]) -> f64 {
    z.iter().map(|c| c.norm_sqr()).sum()
}

fn flat_gradient() -> PointFn<Vec<f64>> {
    Arc::new(|z: &[C64]| z.iter().flat_map(|c| [2.0 * c.re, 2.0 * c.im]).collect())
}

fn samples_away_from_origin(rng: &mut ChaCha8Rng, n: usize, nvars: usize) -> Vec<Vec<C64>> {
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z: Vec<C64> = (0..nvars).map(|_| in_box(rng, 2.0)).collect();
        if flat_norm(&z) > 0.04 {
            out.push(z);
        }
    }
    out
}

/// Diagonal Hopf surface `(C^2 \ 0)/⟨(αz_1, βz_2)⟩` with the
/// Gauduchon–Ornea metric.
#[derive(Clone, Debug)]
pub struct HopfDiagonal {
    alpha: C64,
    beta: C64,
    params: GoParams,
}

impl HopfDiagonal {
    pub fn new(alpha: C64, beta: C64) -> Result<Self> {
        let params = GoParams::from_moduli(alpha.norm(), beta.norm())?;
        Ok(HopfDiagonal { alpha, beta, params })
    }

    pub fn build(spec: &SurfaceSpec) -> Result<Box<dyn Surface>> {
        spec.expect_keys(&["alpha", "beta", "a", "b"])?;
        let moduli = spec.has("alpha") || spec.has("beta");
        let exponents = spec.has("a") || spec.has("b");
        if moduli && exponents {
            return Err(Error::Config("hopf: give either alpha,beta or a,b".into()));
        }
        let s = if exponents {
            let a = spec.real("a")?.ok_or_else(|| Error::Config("hopf: missing a".into()))?;
            let b = spec.real("b")?.ok_or_else(|| Error::Config("hopf: missing b".into()))?;
            let p = GoParams::new(a, b)?;
            // |β| = 2 and log|α| / log|β| = a / b
            let beta = 2.0f64;
            HopfDiagonal {
                alpha: C64::new(beta.powf(p.a / p.b), 0.0),
                beta: C64::new(beta, 0.0),
                params: p,
            }
        } else {
            let alpha = spec.complex("alpha")?.unwrap_or(C64::new(2.0, 0.0));
            let beta = spec.complex("beta")?.unwrap_or(alpha);
            HopfDiagonal::new(alpha, beta)?
        };
        Ok(Box::new(s))
    }

    pub fn params(&self) -> GoParams {
        self.params
    }

    pub fn alpha(&self) -> C64 {
        self.alpha
    }

    pub fn beta(&self) -> C64 {
        self.beta
    }

    pub fn is_flat(&self) -> bool {
        self.params.is_flat()
    }
}

impl Surface for HopfDiagonal {
    fn family(&self) -> &'static str {
        "hopf"
    }
    fn selector(&self) -> String {
        format!("hopf:alpha={},beta={}", self.alpha, self.beta)
    }
    fn params_json(&self) -> serde_json::Value {
        json!({
            "alpha": [self.alpha.re, self.alpha.im],
            "beta": [self.beta.re, self.beta.im],
            "a": self.params.a,
            "b": self.params.b,
        })
    }
    fn potential(&self) -> PotentialField {
        let p = self.params;
        let field = PotentialField::new(
            "go-potential",
            2,
            move |z| go_potential(&p, z).unwrap_or(f64::NAN),
            nonzero,
        );
        if self.is_flat() {
            field.with_series(BiSeries::norm_sq(2, 1), vec![C64::new(0.0, 0.0); 2])
        } else {
            field
        }
    }
    fn covering_metric(&self) -> HermitianMetricField {
        let p = self.params;
        HermitianMetricField::new(
            "go-kahler",
            2,
            move |z| go_hessian(&p, z).unwrap_or_else(|_| DMatrix::from_element(2, 2, C64::new(f64::NAN, 0.0))),
            nonzero,
        )
    }
    fn lck_metric(&self) -> HermitianMetricField {
        let p = self.params;
        let grad: PointFn<Vec<f64>> = Arc::new(move |z| go_gradient(&p, z).unwrap_or_else(|_| vec![f64::NAN; 4]));
        HermitianMetricField::conformal_lck("go-lck", &self.covering_metric(), &self.potential(), Some(grad))
    }
    fn deck_maps(&self) -> Vec<DeckMap> {
        vec![DeckMap::linear(
            "gamma",
            DMatrix::from_diagonal(&DVector::from_vec(vec![self.alpha, self.beta])),
        )]
    }
    fn sample_points(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        samples_away_from_origin(rng, n, 2)
    }
    fn potential_series(&self, d: u32) -> Result<BiSeries> {
        if self.is_flat() {
            Ok(BiSeries::norm_sq(2, d))
        } else {
            Err(Error::NotApplicable(
                "hopf: |alpha| != |beta|, the potential is not resolvable (negative Calabi coefficient)".into(),
            ))
        }
    }
    fn immersion(&self) -> Result<Arc<dyn ImmersionMap>> {
        if self.is_flat() {
            Ok(Arc::new(LinearMap::identity(2)))
        } else {
            Err(Error::NotApplicable(
                "hopf: |alpha| != |beta|, no Kähler immersion of the covering into flat space".into(),
            ))
        }
    }
    fn expected_scalar(&self, _deck: &str) -> Result<bool> {
        if self.is_flat() {
            Ok((self.alpha - self.beta).norm() == 0.0)
        } else {
            Err(Error::NotApplicable(
                "hopf: |alpha| != |beta|, no immersion to descend".into(),
            ))
        }
    }
}

/// Classical Hopf manifold `(C^n \ 0)/⟨λ·id⟩` with `ω_H = ‖z‖^{-2} ω_0`.
#[derive(Clone, Debug)]
pub struct HopfAmbient {
    n: usize,
    lambda: C64,
}

impl HopfAmbient {
    pub fn new(n: usize, lambda: C64) -> Result<Self> {
        if !(1..=4).contains(&n) {
            return Err(Error::Parameter(format!("ambient: n must be in 1..=4, got {n}")));
        }
        if (lambda.norm() - 1.0).abs() < 1e-12 {
            return Err(Error::Parameter("ambient: |lambda| must differ from 1".into()));
        }
        Ok(HopfAmbient { n, lambda })
    }

    pub fn build(spec: &SurfaceSpec) -> Result<Box<dyn Surface>> {
        spec.expect_keys(&["n", "lambda"])?;
        let n = spec.unsigned("n")?.unwrap_or(2) as usize;
        let lambda = spec.complex("lambda")?.unwrap_or(C64::new(2.0, 0.0));
        Ok(Box::new(HopfAmbient::new(n, lambda)?))
    }
}

impl Surface for HopfAmbient {
    fn family(&self) -> &'static str {
        "ambient"
    }
    fn selector(&self) -> String {
        format!("ambient:lambda={},n={}", self.lambda, self.n)
    }
    fn params_json(&self) -> serde_json::Value {
        json!({"n": self.n, "lambda": [self.lambda.re, self.lambda.im]})
    }
    fn nvars(&self) -> usize {
        self.n
    }
    fn potential(&self) -> PotentialField {
        PotentialField::new("flat-norm", self.n, flat_norm, nonzero)
            .with_series(BiSeries::norm_sq(self.n, 1), vec![C64::new(0.0, 0.0); self.n])
    }
    fn covering_metric(&self) -> HermitianMetricField {
        let n = self.n;
        HermitianMetricField::new("flat", n, move |_| DMatrix::identity(n, n), nonzero)
    }
    fn lck_metric(&self) -> HermitianMetricField {
        HermitianMetricField::conformal_lck(
            "hopf",
            &self.covering_metric(),
            &self.potential(),
            Some(flat_gradient()),
        )
    }
    fn deck_maps(&self) -> Vec<DeckMap> {
        vec![DeckMap::scalar("lambda-id", self.n, self.lambda)]
    }
    fn sample_points(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        samples_away_from_origin(rng, n, self.n)
    }
    fn potential_series(&self, d: u32) -> Result<BiSeries> {
        Ok(BiSeries::norm_sq(self.n, d))
    }
    fn immersion(&self) -> Result<Arc<dyn ImmersionMap>> {
        Ok(Arc::new(LinearMap::identity(self.n)))
    }
    fn expected_scalar(&self, _deck: &str) -> Result<bool> {
        Ok(true)
    }
}
