//! The surface catalog. Each family implements [`Surface`] and is registered
//! by name in a [`SurfaceRegistry`]; selectors look like `parton:k=3` or
//! `inoue:m=0,1,0,0,0,1,1,1,0`.

mod elliptic;
mod go;
mod hopf;
mod inoue;
mod kodaira;
mod parton;

pub use elliptic::Elliptic;
pub use go::{
    go_derivative_check, go_gradient, go_hessian, go_potential, go_potential_radial, go_residual, DerivativeCheck,
    GoParams,
};
pub use hopf::{HopfAmbient, HopfDiagonal};
pub use inoue::{Inoue, InoueData};
pub use kodaira::Kodaira;
pub use parton::Parton;

use std::collections::BTreeMap;
use std::fmt;
use std::sync::Arc;

use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::algebra::{BiSeries, C64};
use crate::error::{Error, Result};
use crate::geometry::{DeckMap, HermitianMetricField, PotentialField};
use crate::immersions::ImmersionMap;

/// A parsed selector `family:key=value,...`. Bare tokens continue the
/// previous value, so `m=0,1,0` is one list-valued parameter.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct SurfaceSpec {
    pub family: String,
    pub params: BTreeMap<String, String>,
}

impl SurfaceSpec {
    pub fn parse(selector: &str) -> Result<Self> {
        let selector = selector.trim();
        let (family, rest) = match selector.split_once(':') {
            Some((f, r)) => (f.trim(), r.trim()),
            None => (selector, ""),
        };
        if family.is_empty() {
            return Err(Error::Config("empty surface family".into()));
        }
        let mut params: BTreeMap<String, String> = BTreeMap::new();
        let mut last: Option<String> = None;
        for token in rest.split(',').map(str::trim).filter(|t| !t.is_empty()) {
            match token.split_once('=') {
                Some((k, v)) => {
                    let k = k.trim().to_string();
                    if params.insert(k.clone(), v.trim().to_string()).is_some() {
                        return Err(Error::Config(format!("parameter '{k}' given twice")));
                    }
                    last = Some(k);
                }
                None => {
                    let key = last
                        .as_ref()
                        .ok_or_else(|| Error::Config(format!("value '{token}' has no parameter name")))?;
                    let v = params.get_mut(key).expect("inserted above");
                    v.push(',');
                    v.push_str(token);
                }
            }
        }
        Ok(SurfaceSpec {
            family: family.to_string(),
            params,
        })
    }

    pub fn has(&self, key: &str) -> bool {
        self.params.contains_key(key)
    }

    fn raw(&self, key: &str) -> Option<&str> {
        self.params.get(key).map(String::as_str)
    }

    pub fn real(&self, key: &str) -> Result<Option<f64>> {
        self.raw(key)
            .map(|v| {
                v.parse::<f64>()
                    .map_err(|_| Error::Config(format!("{key}: '{v}' is not a real number")))
            })
            .transpose()
    }

    pub fn complex(&self, key: &str) -> Result<Option<C64>> {
        self.raw(key)
            .map(|v| parse_complex(v).map_err(|e| Error::Config(format!("{key}: {e}"))))
            .transpose()
    }

    pub fn unsigned(&self, key: &str) -> Result<Option<u32>> {
        self.raw(key)
            .map(|v| {
                v.parse::<u32>()
                    .map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
            })
            .transpose()
    }

    pub fn integers(&self, key: &str) -> Result<Option<Vec<i64>>> {
        self.raw(key)
            .map(|v| {
                v.split(',')
                    .map(|t| {
                        t.trim()
                            .parse::<i64>()
                            .map_err(|_| Error::Config(format!("{key}: '{t}' is not an integer")))
                    })
                    .collect()
            })
            .transpose()
    }

    /// Rejects parameters outside `allowed`.
    pub fn expect_keys(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::Config(format!(
                "{}: unknown parameter '{k}' (allowed: {})",
                self.family,
                allowed.join(", ")
            ))),
            None => Ok(()),
        }
    }
}

impl fmt::Display for SurfaceSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.family)?;
        for (i, (k, v)) in self.params.iter().enumerate() {
            write!(f, "{}{k}={v}", if i == 0 { ":" } else { "," })?;
        }
        Ok(())
    }
}

/// Parses `2`, `-1.5`, `2i`, `-i`, `2+1i`, `1-0.5i`.
pub fn parse_complex(s: &str) -> std::result::Result<C64, String> {
    let t: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let bad = || format!("'{s}' is not a complex number");
    if t.is_empty() {
        return Err(bad());
    }
    let Some(body) = t.strip_suffix('i') else {
        return t.parse::<f64>().map(|x| C64::new(x, 0.0)).map_err(|_| bad());
    };
    // split before the last sign that is not a leading sign or an exponent sign
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&p| (bytes[p] == b'+' || bytes[p] == b'-') && !matches!(bytes[p - 1], b'e' | b'E'));
    let (re, im) = match split {
        Some(p) => (&body[..p], &body[p..]),
        None => ("0", body),
    };
    let im = match im {
        "" | "+" => "1",
        "-" => "-1",
        other => other,
    };
    let re = re.parse::<f64>().map_err(|_| bad())?;
    let im = im.parse::<f64>().map_err(|_| bad())?;
    Ok(C64::new(re, im))
}

/// A surface of the catalog on its (Kähler) covering.
pub trait Surface: Send + Sync {
    /// Registry name.
    fn family(&self) -> &'static str;
    /// Canonical selector, including defaulted parameters.
    fn selector(&self) -> String;
    fn params_json(&self) -> serde_json::Value;
    fn nvars(&self) -> usize {
        2
    }
    /// Automorphic potential of the covering Kähler metric.
    fn potential(&self) -> PotentialField;
    fn covering_metric(&self) -> HermitianMetricField;
    /// The lcK metric with its Lee form.
    fn lck_metric(&self) -> HermitianMetricField;
    fn deck_maps(&self) -> Vec<DeckMap>;
    fn deck(&self, name: &str) -> Result<DeckMap> {
        let decks = self.deck_maps();
        let names: Vec<String> = decks.iter().map(|d| d.name().to_string()).collect();
        decks.into_iter().find(|d| d.name() == name).ok_or_else(|| {
            Error::Config(format!(
                "{}: unknown deck '{name}' (available: {})",
                self.family(),
                names.join(", ")
            ))
        })
    }
    /// Interior points of the covering domain.
    fn sample_points(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>>;
    /// Potential expansion at the center of the covering, truncated at degree
    /// `d` per side.
    fn potential_series(&self, _d: u32) -> Result<BiSeries> {
        Err(Error::NotApplicable(format!(
            "{}: no expansion center in the covering domain",
            self.family()
        )))
    }
    fn immersion(&self) -> Result<Arc<dyn ImmersionMap>> {
        Err(Error::NotApplicable(format!(
            "{}: no explicit immersion",
            self.family()
        )))
    }
    /// The metric the immersion pulls back to (up to a constant).
    fn immersion_target(&self) -> HermitianMetricField {
        self.covering_metric()
    }
    fn immersion_samples(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        self.sample_points(rng, n)
    }
    /// Whether the immersion is expected to be scalar-equivariant under the
    /// named deck map; `Err` when the question does not apply.
    fn expected_scalar(&self, deck: &str) -> Result<bool>;
}

pub type SurfaceBuilder = fn(&SurfaceSpec) -> Result<Box<dyn Surface>>;

/// Family name → constructor.
pub struct SurfaceRegistry {
    builders: BTreeMap<&'static str, SurfaceBuilder>,
}

impl SurfaceRegistry {
    pub fn empty() -> Self {
        SurfaceRegistry {
            builders: BTreeMap::new(),
        }
    }

    pub fn register(&mut self, family: &'static str, builder: SurfaceBuilder) {
        self.builders.insert(family, builder);
    }

    pub fn families(&self) -> Vec<&'static str> {
        self.builders.keys().copied().collect()
    }

    pub fn build(&self, spec: &SurfaceSpec) -> Result<Box<dyn Surface>> {
        let builder = self.builders.get(spec.family.as_str()).ok_or_else(|| {
            Error::Config(format!(
                "unknown surface family '{}' (known: {})",
                spec.family,
                self.families().join(", ")
            ))
        })?;
        builder(spec)
    }
}

impl Default for SurfaceRegistry {
    fn default() -> Self {
        let mut r = SurfaceRegistry::empty();
        r.register("hopf", HopfDiagonal::build);
        r.register("parton", Parton::build);
        r.register("elliptic", Elliptic::build);
        r.register("kodaira", Kodaira::build);
        r.register("inoue", Inoue::build);
        r.register("ambient", HopfAmbient::build);
        r
    }
}

/// Builds a surface from a selector with the default registry.
pub fn build_surface(selector: &str) -> Result<Box<dyn Surface>> {
    SurfaceRegistry::default().build(&SurfaceSpec::parse(selector)?)
}

pub(crate) fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    use rand::Rng;
    lo + (hi - lo) * rng.random::<f64>()
}

/// Uniform point in the disc `|z| < r`.
pub(crate) fn in_disc(rng: &mut ChaCha8Rng, r: f64) -> C64 {
    let rho = r * uniform(rng, 0.0, 1.0).sqrt();
    C64::from_polar(rho, uniform(rng, 0.0, std::f64::consts::TAU))
}

pub(crate) fn in_box(rng: &mut ChaCha8Rng, half: f64) -> C64 {
    C64::new(uniform(rng, -half, half), uniform(rng, -half, half))
}
