use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::Serialize;

use super::{pullback_metric, ImmersionMap};
use crate::algebra::C64;
use crate::geometry::HermitianMetricField;

pub const VERIFY_TOL: f64 = 1e-6;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ImmersionReport {
    pub map: String,
    pub target: String,
    /// Fitted constant in `F*ω_0 = c·target`.
    pub c: f64,
    /// Max over samples of `‖F*ω_0 - c·target‖_F / ‖F*ω_0‖_F`.
    pub max_deviation: f64,
    pub tol: f64,
    pub pass: bool,
    pub samples_used: usize,
    pub samples_skipped: usize,
    /// Largest Jacobian tail bound met at a sample.
    pub max_tail: f64,
}

/// Pullback, target and Jacobian tail bound at one sample.
type Evaluated = (DMatrix<C64>, DMatrix<C64>, f64);

fn deviation(pairs: &[(DMatrix<C64>, DMatrix<C64>)], c: f64) -> f64 {
    pairs
        .iter()
        .map(|(p, t)| (p - t.map(|v| v * c)).norm() / p.norm())
        .fold(0.0, f64::max)
}

/// Certifies `F*ω_0 = c·target` at the samples, fitting one `c`.
pub fn verify_immersion(
    map: &dyn ImmersionMap,
    target: &HermitianMetricField,
    samples: &[Vec<C64>],
    tol: f64,
) -> ImmersionReport {
    let evaluated: Vec<Option<Evaluated>> = samples
        .par_iter()
        .map(|z| {
            if !target.in_domain(z) {
                return None;
            }
            let p = pullback_metric(map, z).ok()?;
            Some((p.matrix, target.coeff(z), p.error_bar))
        })
        .collect();
    let used: Vec<(DMatrix<C64>, DMatrix<C64>)> = evaluated
        .iter()
        .flatten()
        .map(|(p, t, _)| (p.clone(), t.clone()))
        .collect();
    let max_tail = evaluated.iter().flatten().map(|(_, _, e)| *e).fold(0.0, f64::max);
    let skipped = samples.len() - used.len();
    let mut report = ImmersionReport {
        map: map.name(),
        target: target.name().to_string(),
        c: f64::NAN,
        max_deviation: f64::INFINITY,
        tol,
        pass: false,
        samples_used: used.len(),
        samples_skipped: skipped,
        max_tail,
    };
    if used.is_empty() {
        return report;
    }

    // each deviation is convex in c and minimized at its own least-squares
    // ratio, so the minimax c lies between the extreme ratios
    let ratios: Vec<f64> = used
        .iter()
        .map(|(p, t)| t.iter().zip(p.iter()).map(|(a, b)| (a.conj() * b).re).sum::<f64>() / t.norm_squared())
        .collect();
    let (mut lo, mut hi) = ratios
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &r| (l.min(r), h.max(r)));
    let golden = (5f64.sqrt() - 1.0) / 2.0;
    for _ in 0..200 {
        if hi - lo <= f64::EPSILON * hi.abs().max(lo.abs()) {
            break;
        }
        let m1 = hi - golden * (hi - lo);
        let m2 = lo + golden * (hi - lo);
        if deviation(&used, m1) <= deviation(&used, m2) {
            hi = m2;
        } else {
            lo = m1;
        }
    }
    let c = 0.5 * (lo + hi);
    report.c = c;
    report.max_deviation = deviation(&used, c);
    report.pass = c > 0.0 && report.max_deviation < tol;
    report
}
