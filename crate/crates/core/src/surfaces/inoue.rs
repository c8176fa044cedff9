use std::sync::Arc;

use nalgebra::{DMatrix, DVector, Matrix3, Vector3};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use serde_json::json;

use super::{in_box, in_disc, uniform, Surface, SurfaceSpec};
use crate::algebra::{BiSeries, MultiIndex, C64};
use crate::error::{Error, Result};
use crate::geometry::{DeckMap, HermitianMetricField, PotentialField};
use crate::immersions::{ImmersionMap, InoueMap};

const I: C64 = C64 { re: 0.0, im: 1.0 };
/// Companion matrix of `x^3 - x - 1`.
pub const DEFAULT_MATRIX: [i64; 9] = [0, 1, 0, 0, 0, 1, 1, 1, 0];

/// Spectral data of `M ∈ SL(3, Z)`: the real eigenvalue `ρ > 1` with a real
/// eigenvector `ℓ`, and the eigenvalue `μ` (`Im μ > 0`) with eigenvector `m`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct InoueData {
    pub matrix: [i64; 9],
    pub rho: f64,
    pub mu: C64,
    pub ell: [f64; 3],
    pub m: [C64; 3],
}

/// A null vector of a rank-2 matrix: the largest cross product of two rows.
fn null_vector(a: &Matrix3<C64>) -> Vector3<C64> {
    let rows: Vec<Vector3<C64>> = (0..3).map(|i| a.row(i).transpose()).collect();
    let candidates = [
        rows[0].cross(&rows[1]),
        rows[0].cross(&rows[2]),
        rows[1].cross(&rows[2]),
    ];
    let best = candidates
        .into_iter()
        .max_by(|x, y| x.norm().total_cmp(&y.norm()))
        .expect("three candidates");
    let n = best.norm();
    best / C64::new(n, 0.0)
}

impl InoueData {
    pub fn new(matrix: [i64; 9]) -> Result<Self> {
        let m = Matrix3::from_row_slice(&matrix.map(|v| v as f64));
        let det = m.determinant();
        if (det - 1.0).abs() > 1e-9 {
            return Err(Error::Parameter(format!("inoue: det M must be 1, got {det}")));
        }
        let eig = m.complex_eigenvalues();
        let real: Vec<f64> = eig.iter().filter(|e| e.im.abs() < 1e-12).map(|e| e.re).collect();
        let complex: Vec<C64> = eig.iter().filter(|e| e.im.abs() >= 1e-12).copied().collect();
        if real.len() != 1 || complex.len() != 2 || real[0] <= 1.0 {
            return Err(Error::Parameter(
                "inoue: M needs one real eigenvalue > 1 and a non-real conjugate pair".into(),
            ));
        }
        let rho = real[0];
        let mu = if complex[0].im > 0.0 { complex[0] } else { complex[1] };
        let mc = m.map(|v| C64::new(v, 0.0));
        let shifted = |l: C64| mc - Matrix3::from_diagonal_element(l);
        let ell_c = null_vector(&shifted(C64::new(rho, 0.0)));
        // fix the phase so ℓ is real
        let pivot = ell_c
            .iter()
            .max_by(|a, b| a.norm().total_cmp(&b.norm()))
            .copied()
            .expect("nonzero");
        let phase = pivot.conj() / pivot.norm();
        let ell = [0, 1, 2].map(|i| (ell_c[i] * phase).re);
        let mv = null_vector(&shifted(mu));
        Ok(InoueData {
            matrix,
            rho,
            mu,
            ell,
            m: [mv[0], mv[1], mv[2]],
        })
    }
}

/// Inoue–Bombieri surface `S_M` with the Tricerri metric, on the covering
/// `C × H ∋ (z, w)`, `y_2 = Im w > 0`.
#[derive(Clone, Debug)]
pub struct Inoue {
    data: InoueData,
}

fn upper(z: &[C64]) -> bool {
    z.len() == 2 && z[1].im > 0.0
}

fn in_unit_disc(z: &[C64]) -> bool {
    z.len() == 2 && z[1].norm() < 1.0
}

impl Inoue {
    pub fn new(matrix: [i64; 9]) -> Result<Self> {
        Ok(Inoue {
            data: InoueData::new(matrix)?,
        })
    }

    pub fn build(spec: &SurfaceSpec) -> Result<Box<dyn Surface>> {
        spec.expect_keys(&["m"])?;
        let matrix = match spec.integers("m")? {
            None => DEFAULT_MATRIX,
            Some(v) => v
                .try_into()
                .map_err(|v: Vec<i64>| Error::Config(format!("inoue: m needs 9 entries, got {}", v.len())))?,
        };
        Ok(Box::new(Inoue::new(matrix)?))
    }

    pub fn data(&self) -> &InoueData {
        &self.data
    }

    /// `D_0(z, ŵ) = |z|^2 + 2(2 + i(ŵ - ŵ̄))|ŵ|^2 / (1 - |ŵ|^2)` in the disc
    /// coordinate, as the series `|z|^2 + Σ_{m>=1} 4|ŵ|^{2m} + 2i ŵ^{m+1}ŵ̄^m - 2i ŵ^m ŵ̄^{m+1}`.
    pub fn disc_series(d: u32) -> BiSeries {
        let idx = |p: u32, q: u32| MultiIndex::new(vec![p, q]);
        let mut terms = vec![(idx(1, 0), idx(1, 0), C64::new(1.0, 0.0))];
        for m in 1..=d {
            terms.push((idx(0, m), idx(0, m), C64::new(4.0, 0.0)));
            terms.push((idx(0, m + 1), idx(0, m), 2.0 * I));
            terms.push((idx(0, m), idx(0, m + 1), -2.0 * I));
        }
        BiSeries::from_terms(2, d, true, terms).expect("two variables")
    }

    pub fn disc_potential(d: u32) -> PotentialField {
        PotentialField::new(
            "inoue-diastasis",
            2,
            |z| {
                let w = z[1];
                let r = w.norm_sqr();
                z[0].norm_sqr() + 2.0 * (2.0 + (I * (w - w.conj())).re) * r / (1.0 - r)
            },
            in_unit_disc,
        )
        .with_series(Inoue::disc_series(d), vec![C64::new(0.0, 0.0); 2])
    }

    /// `Hess D_0`: `diag(1, 4|1 + iŵ|^2 / (1 - |ŵ|^2)^3)`.
    pub fn disc_metric() -> HermitianMetricField {
        HermitianMetricField::new(
            "inoue-disc-kahler",
            2,
            |z| {
                let w = z[1];
                let g = 4.0 * (C64::new(1.0, 0.0) + I * w).norm_sqr() / (1.0 - w.norm_sqr()).powi(3);
                DMatrix::from_diagonal(&DVector::from_vec(vec![C64::new(1.0, 0.0), C64::new(g, 0.0)]))
            },
            in_unit_disc,
        )
    }
}

impl Surface for Inoue {
    fn family(&self) -> &'static str {
        "inoue"
    }
    fn selector(&self) -> String {
        let m: Vec<String> = self.data.matrix.iter().map(|v| v.to_string()).collect();
        format!("inoue:m={}", m.join(","))
    }
    fn params_json(&self) -> serde_json::Value {
        json!({
            "m": self.data.matrix,
            "rho": self.data.rho,
            "mu": [self.data.mu.re, self.data.mu.im],
            "mu_abs_sq": self.data.mu.norm_sqr(),
        })
    }
    /// `|z|^2 + 1/(2 y_2)`, automorphic with factor `|μ|^2` under `f_0`.
    fn potential(&self) -> PotentialField {
        PotentialField::new("inoue-potential", 2, |z| z[0].norm_sqr() + 0.5 / z[1].im, upper)
    }
    fn covering_metric(&self) -> HermitianMetricField {
        HermitianMetricField::new(
            "tricerri-kahler",
            2,
            |z| {
                let y = z[1].im;
                DMatrix::from_diagonal(&DVector::from_vec(vec![
                    C64::new(1.0, 0.0),
                    C64::new(0.25 / (y * y * y), 0.0),
                ]))
            },
            upper,
        )
    }
    fn lck_metric(&self) -> HermitianMetricField {
        HermitianMetricField::new(
            "tricerri",
            2,
            |z| {
                let y = z[1].im;
                DMatrix::from_diagonal(&DVector::from_vec(vec![
                    C64::new(y, 0.0),
                    C64::new(0.25 / (y * y), 0.0),
                ]))
            },
            upper,
        )
        .with_lee_form(|z| vec![0.0, 0.0, 0.0, 1.0 / z[1].im])
    }
    fn deck_maps(&self) -> Vec<DeckMap> {
        let d = &self.data;
        let mut decks = vec![DeckMap::linear(
            "f0",
            DMatrix::from_diagonal(&DVector::from_vec(vec![d.mu, C64::new(d.rho, 0.0)])),
        )];
        for j in 0..3 {
            decks.push(DeckMap::affine(
                format!("f{}", j + 1),
                DMatrix::identity(2, 2),
                DVector::from_vec(vec![d.m[j], C64::new(d.ell[j], 0.0)]),
            ));
        }
        decks
    }
    fn sample_points(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        (0..n)
            .map(|_| {
                vec![
                    in_box(rng, 1.0),
                    C64::new(uniform(rng, -1.0, 1.0), uniform(rng, 0.5, 2.0)),
                ]
            })
            .collect()
    }
    /// The diastasis in the disc coordinate `(z, ŵ)`.
    fn potential_series(&self, d: u32) -> Result<BiSeries> {
        Ok(Inoue::disc_series(d))
    }
    fn immersion(&self) -> Result<Arc<dyn ImmersionMap>> {
        Ok(Arc::new(InoueMap))
    }
    fn immersion_target(&self) -> HermitianMetricField {
        Inoue::disc_metric()
    }
    fn immersion_samples(&self, rng: &mut ChaCha8Rng, n: usize) -> Vec<Vec<C64>> {
        (0..n).map(|_| vec![in_disc(rng, 1.0), in_disc(rng, 0.8)]).collect()
    }
    fn expected_scalar(&self, _deck: &str) -> Result<bool> {
        Err(Error::NotApplicable(
            "inoue: S_M is not diffeomorphic to a Vaisman manifold, so it has no lcK immersion into a Hopf manifold"
                .into(),
        ))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{homothety_factor, lck_residual, metric_from_potential, HessianMethod};
    use rand::SeedableRng;

    #[test]
    fn companion_matrix_spectrum() {
        let d = InoueData::new(DEFAULT_MATRIX).unwrap();
        assert!((d.rho - 1.324717957244746).abs() < 1e-12);
        assert!((d.mu.norm_sqr() - 1.0 / d.rho).abs() < 1e-12);
        let m = Matrix3::from_row_slice(&DEFAULT_MATRIX.map(|v| v as f64));
        let ell = Vector3::from_row_slice(&d.ell);
        assert!((m * ell - ell * d.rho).norm() < 1e-12);
        let mc = m.map(|v| C64::new(v, 0.0));
        let mv = Vector3::from_row_slice(&d.m);
        assert!((mc * mv - mv * d.mu).norm() < 1e-12);
    }

    #[test]
    fn invalid_matrices_rejected() {
        assert!(InoueData::new([1, 0, 0, 0, 1, 0, 0, 0, 1]).is_err());
        assert!(InoueData::new([2, 0, 0, 0, 1, 0, 0, 0, 1]).is_err());
    }

    #[test]
    fn f0_scales_tricerri_kahler_metric() {
        let s = Inoue::new(DEFAULT_MATRIX).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let pts = s.sample_points(&mut rng, 10);
        let r = homothety_factor(&s.deck("f0").unwrap(), &s.covering_metric(), &pts);
        assert!((r.factor - s.data().mu.norm_sqr()).abs() < 1e-12);
        for j in 1..=3 {
            let t = homothety_factor(&s.deck(&format!("f{j}")).unwrap(), &s.covering_metric(), &pts);
            assert!((t.factor - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn tricerri_lck_at_base_point() {
        let s = Inoue::new(DEFAULT_MATRIX).unwrap();
        let r = lck_residual(&s.lck_metric(), &[C64::new(0.0, 0.0), C64::new(0.0, 1.0)]).unwrap();
        assert!(r < 1e-6, "{r}");
    }

    #[test]
    fn disc_metric_is_hessian_of_series() {
        let z = [C64::new(0.3, 0.1), C64::new(0.0, 0.2)];
        let s = metric_from_potential(&Inoue::disc_potential(30), &z, HessianMethod::Series)
            .unwrap()
            .matrix;
        let c = Inoue::disc_metric().coeff(&z);
        assert!((s - &c).norm() < 1e-12 * c.norm());
    }

    #[test]
    fn disc_potential_matches_series() {
        let z = [C64::new(0.3, -0.4), C64::new(0.25, 0.1)];
        let p = Inoue::disc_potential(40);
        let (series, _) = p.exact_series().unwrap();
        assert!((series.eval(&z).re - p.evaluate(&z).unwrap()).abs() < 1e-12);
    }
}
