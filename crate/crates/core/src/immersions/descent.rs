//! Equivariance of an immersion under a deck map: `F∘γ = λF` (scalar mode),
//! or only `⟨F(γx), F(γy)⟩ = c⟨F(x), F(y)⟩` (Gram mode, which by Calabi
//! rigidity means `F∘γ = U(√c F)` for some unitary `U`).

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use super::{evaluate, evaluate_to, inner, ImmersionMap};
use crate::algebra::C64;
use crate::geometry::homothety::median_sorted;
use crate::geometry::DeckMap;

pub const DESCENT_TOL: f64 = 1e-8;
pub const GRAM_PAIRS: usize = 30;
/// Components below this fraction of the largest are ignored when
/// estimating `λ`.
const RATIO_FLOOR: f64 = 0.1;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DescentMode {
    Scalar,
    Gram,
    None,
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct DescentReport {
    pub map: String,
    pub deck: String,
    pub mode: DescentMode,
    /// `[re, im]` of the estimated `λ` in `F∘γ = λF`.
    pub lambda: Option<[f64; 2]>,
    /// Gram factor `c` (equal to `|λ|^2` in scalar mode).
    pub c: Option<f64>,
    /// Deviation of the reported mode, or of the Gram test when neither holds.
    pub max_deviation: f64,
    pub scalar_deviation: f64,
    pub gram_deviation: f64,
    pub tol: f64,
    pub seed: u64,
    pub samples: usize,
    pub pairs: usize,
}

struct Sample {
    at_x: Vec<C64>,
    at_gx: Vec<C64>,
}

fn norm(v: &[C64]) -> f64 {
    v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt()
}

fn sample_pairs(n: usize, seed: u64) -> Vec<(usize, usize)> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..GRAM_PAIRS)
        .map(|_| {
            let i = rng.random_range(0..n);
            let mut k = rng.random_range(0..n);
            if n > 1 {
                while k == i {
                    k = rng.random_range(0..n);
                }
            }
            (i, k)
        })
        .collect()
}

fn median_complex(v: &[C64]) -> C64 {
    let mut re: Vec<f64> = v.iter().map(|c| c.re).collect();
    let mut im: Vec<f64> = v.iter().map(|c| c.im).collect();
    re.sort_by(f64::total_cmp);
    im.sort_by(f64::total_cmp);
    C64::new(median_sorted(&re), median_sorted(&im))
}

/// Classifies the equivariance of `map` under `gamma`.
pub fn scalar_descent(map: &dyn ImmersionMap, gamma: &DeckMap, samples: &[Vec<C64>], seed: u64) -> DescentReport {
    let evaluated: Vec<Option<Sample>> = samples
        .par_iter()
        .map(|x| {
            let gx = gamma.apply(x);
            let ex = evaluate(map, x).ok()?;
            let eg = evaluate(map, &gx).ok()?;
            let j = ex.truncation().max(eg.truncation());
            Some(Sample {
                at_x: evaluate_to(map, x, j).values,
                at_gx: evaluate_to(map, &gx, j).values,
            })
        })
        .collect();
    let used: Vec<Sample> = evaluated.into_iter().flatten().collect();
    let mut report = DescentReport {
        map: map.name(),
        deck: gamma.name().to_string(),
        mode: DescentMode::None,
        lambda: None,
        c: None,
        max_deviation: f64::INFINITY,
        scalar_deviation: f64::INFINITY,
        gram_deviation: f64::INFINITY,
        tol: DESCENT_TOL,
        seed,
        samples: used.len(),
        pairs: 0,
    };
    if used.is_empty() {
        return report;
    }

    let mut ratios = Vec::new();
    for s in &used {
        let top = s.at_x.iter().fold(0.0f64, |m, c| m.max(c.norm()));
        for (a, b) in s.at_x.iter().zip(&s.at_gx) {
            if top > 0.0 && a.norm() >= RATIO_FLOOR * top {
                ratios.push(b / a);
            }
        }
    }
    if !ratios.is_empty() {
        let lambda = median_complex(&ratios);
        let dev = used
            .iter()
            .map(|s| {
                let diff: Vec<C64> = s.at_gx.iter().zip(&s.at_x).map(|(b, a)| b - lambda * a).collect();
                let scale = norm(&s.at_gx).max(lambda.norm() * norm(&s.at_x));
                if scale == 0.0 {
                    0.0
                } else {
                    norm(&diff) / scale
                }
            })
            .fold(0.0, f64::max);
        report.scalar_deviation = dev;
        if dev <= DESCENT_TOL {
            report.mode = DescentMode::Scalar;
            report.lambda = Some([lambda.re, lambda.im]);
            report.c = Some(lambda.norm_sqr());
        }
    }

    let pairs = sample_pairs(used.len(), seed);
    report.pairs = pairs.len();
    let grams: Vec<(C64, C64, f64, f64)> = pairs
        .iter()
        .map(|&(i, k)| {
            let (x, y) = (&used[i], &used[k]);
            (
                inner(&x.at_x, &y.at_x),
                inner(&x.at_gx, &y.at_gx),
                norm(&x.at_x) * norm(&y.at_x),
                norm(&x.at_gx) * norm(&y.at_gx),
            )
        })
        .collect();
    let mut factors: Vec<f64> = grams
        .iter()
        .filter(|(g, _, s, _)| g.norm() > 1e-6 * s)
        .map(|(g, gp, _, _)| (gp / g).re)
        .collect();
    if !factors.is_empty() {
        factors.sort_by(f64::total_cmp);
        let c = median_sorted(&factors);
        let dev = grams
            .iter()
            .map(|(g, gp, s, sp)| {
                let scale = sp.max(c.abs() * s);
                if scale == 0.0 {
                    0.0
                } else {
                    (gp - g * c).norm() / scale
                }
            })
            .fold(0.0, f64::max);
        report.gram_deviation = dev;
        if report.mode != DescentMode::Scalar && dev <= DESCENT_TOL && c > 0.0 {
            report.mode = DescentMode::Gram;
            report.c = Some(c);
        }
    }
    report.max_deviation = match report.mode {
        DescentMode::Scalar => report.scalar_deviation,
        _ => report.gram_deviation,
    };
    report
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct GaugeReport {
    pub first: String,
    pub second: String,
    /// True when the Gram matrices agree, i.e. a unitary intertwiner exists.
    pub equal: bool,
    pub max_deviation: f64,
    pub pairs: usize,
}

/// Compares `⟨F1(x), F1(y)⟩` with `⟨F2(x), F2(y)⟩` on sample pairs.
pub fn rigidity_gauge(f1: &dyn ImmersionMap, f2: &dyn ImmersionMap, pairs: &[(Vec<C64>, Vec<C64>)]) -> GaugeReport {
    let devs: Vec<f64> = pairs
        .par_iter()
        .map(|(x, y)| {
            let gram = |f: &dyn ImmersionMap| -> Option<(C64, f64)> {
                let (ex, ey) = (evaluate(f, x).ok()?, evaluate(f, y).ok()?);
                Some((inner(&ex.values, &ey.values), norm(&ex.values) * norm(&ey.values)))
            };
            match (gram(f1), gram(f2)) {
                (Some((g1, s1)), Some((g2, s2))) => {
                    let scale = s1.max(s2);
                    if scale == 0.0 {
                        0.0
                    } else {
                        (g1 - g2).norm() / scale
                    }
                }
                _ => f64::INFINITY,
            }
        })
        .collect();
    let max_deviation = devs.iter().copied().fold(0.0, f64::max);
    GaugeReport {
        first: f1.name(),
        second: f2.name(),
        equal: !pairs.is_empty() && max_deviation <= DESCENT_TOL,
        max_deviation,
        pairs: pairs.len(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::immersions::{EllipticMap, LinearMap, PartonMap, ScaledMap};
    use nalgebra::DMatrix;
    use std::sync::Arc;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn box_samples() -> Vec<Vec<C64>> {
        (0..12)
            .map(|i| {
                let t = i as f64;
                vec![
                    c((0.7 * t).sin(), (1.3 * t).cos()),
                    c((0.4 * t).cos(), (0.9 * t + 0.2).sin()),
                ]
            })
            .collect()
    }

    #[test]
    fn parton_is_scalar_with_alpha_to_the_k() {
        let alpha = c(1.5, 0.5);
        let r = scalar_descent(
            &PartonMap::new(3),
            &DeckMap::scalar("alpha-id", 2, alpha),
            &box_samples(),
            7,
        );
        assert_eq!(r.mode, DescentMode::Scalar);
        let l = r.lambda.unwrap();
        assert!((c(l[0], l[1]) - alpha.powu(3)).norm() < 1e-10);
    }

    #[test]
    fn identity_deck_gives_unit_lambda() {
        let r = scalar_descent(&PartonMap::new(2), &DeckMap::identity(2), &box_samples(), 1);
        assert_eq!(r.mode, DescentMode::Scalar);
        assert_eq!(r.lambda, Some([1.0, 0.0]));
    }

    #[test]
    fn unequal_diagonal_is_gram_only() {
        let gamma = DeckMap::linear(
            "gamma",
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(2.0, 0.0), c(0.0, 2.0)])),
        );
        let r = scalar_descent(&LinearMap::identity(2), &gamma, &box_samples(), 3);
        assert_eq!(r.mode, DescentMode::Gram);
        assert!((r.c.unwrap() - 4.0).abs() < 1e-12);
    }

    #[test]
    fn non_conformal_diagonal_is_neither() {
        let gamma = DeckMap::linear(
            "gamma",
            DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(3.0, 0.0), c(2.0, 0.0)])),
        );
        let r = scalar_descent(&LinearMap::identity(2), &gamma, &box_samples(), 3);
        assert_eq!(r.mode, DescentMode::None);
    }

    #[test]
    fn elliptic_doubling_is_scalar_one_half() {
        let samples = vec![
            vec![c(1.0, 0.0), c(0.0, 0.5)],
            vec![c(0.8, 0.3), c(-0.2, 0.4)],
            vec![c(1.2, -0.1), c(0.1, 0.3)],
        ];
        let r = scalar_descent(&EllipticMap, &DeckMap::scalar("2id", 2, c(2.0, 0.0)), &samples, 5);
        assert_eq!(r.mode, DescentMode::Scalar);
        let l = r.lambda.unwrap();
        assert!((l[0] - 0.5).abs() < 1e-12 && l[1].abs() < 1e-12);
    }

    #[test]
    fn gauge_detects_rescaling() {
        let f: Arc<dyn ImmersionMap> = Arc::new(PartonMap::new(2));
        let g = ScaledMap::new(f.clone(), c(2.0, 0.0));
        let s = box_samples();
        let pairs: Vec<_> = s.windows(2).map(|w| (w[0].clone(), w[1].clone())).collect();
        assert!(rigidity_gauge(f.as_ref(), f.as_ref(), &pairs).equal);
        assert!(!rigidity_gauge(f.as_ref(), &g, &pairs).equal);
    }
}
