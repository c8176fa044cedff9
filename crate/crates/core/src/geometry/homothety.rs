use rayon::prelude::*;
use serde::Serialize;

use super::deck::DeckMap;
use super::field::HermitianMetricField;
use crate::algebra::C64;

/// Relative spread above which a deck map is reported as not homothetic.
pub const HOMOTHETY_SPREAD_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct HomothetyReport {
    pub deck: String,
    pub metric: String,
    /// Common ratio `c` in `γ*h = c·h`.
    pub factor: f64,
    /// Max over samples of `‖γ*h - c h‖_F / ‖c h‖_F`.
    pub spread: f64,
    pub homothetic: bool,
    pub samples_used: usize,
    pub samples_skipped: usize,
}

/// Ratio estimate, metric and pulled-back metric at one point.
type Sample = (f64, nalgebra::DMatrix<C64>, nalgebra::DMatrix<C64>);

/// Estimates the homothety factor of `gamma` on `metric` from sample points.
pub fn homothety_factor(gamma: &DeckMap, metric: &HermitianMetricField, samples: &[Vec<C64>]) -> HomothetyReport {
    let pairs: Vec<Option<Sample>> = samples
        .par_iter()
        .map(|z| {
            let image = gamma.apply(z);
            if !metric.in_domain(z) || !metric.in_domain(&image) {
                return None;
            }
            let h = metric.coeff(z);
            let pulled = gamma.pullback(metric, z);
            let num: f64 = h.iter().zip(pulled.iter()).map(|(a, b)| (a.conj() * b).re).sum();
            let den = h.norm_squared();
            Some((num / den, h, pulled))
        })
        .collect();

    let used: Vec<_> = pairs.iter().flatten().collect();
    let skipped = pairs.len() - used.len();
    if used.is_empty() {
        return HomothetyReport {
            deck: gamma.name().to_string(),
            metric: metric.name().to_string(),
            factor: f64::NAN,
            spread: f64::INFINITY,
            homothetic: false,
            samples_used: 0,
            samples_skipped: skipped,
        };
    }
    let mut ratios: Vec<f64> = used.iter().map(|(r, _, _)| *r).collect();
    ratios.sort_by(f64::total_cmp);
    let factor = median_sorted(&ratios);
    let spread = used
        .iter()
        .map(|(_, h, pulled)| (pulled - h.map(|v| v * factor)).norm() / (factor.abs() * h.norm()))
        .fold(0.0, f64::max);
    HomothetyReport {
        deck: gamma.name().to_string(),
        metric: metric.name().to_string(),
        factor,
        spread,
        homothetic: spread <= HOMOTHETY_SPREAD_TOL,
        samples_used: used.len(),
        samples_skipped: skipped,
    }
}

pub(crate) fn median_sorted(v: &[f64]) -> f64 {
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}
