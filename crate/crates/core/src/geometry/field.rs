use std::fmt;
use std::sync::Arc;

use nalgebra::DMatrix;

use super::fd;
use crate::algebra::{BiSeries, C64};
use crate::error::{Error, Result};

pub type PointFn<T> = Arc<dyn Fn(&[C64]) -> T + Send + Sync>;

/// A real-analytic potential on a guarded domain in `C^n`, optionally with an
/// exact power series around a center.
#[derive(Clone)]
pub struct PotentialField {
    name: String,
    nvars: usize,
    evaluate: PointFn<f64>,
    domain: PointFn<bool>,
    exact_series: Option<(BiSeries, Vec<C64>)>,
}

impl fmt::Debug for PotentialField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PotentialField")
            .field("name", &self.name)
            .field("nvars", &self.nvars)
            .field("has_series", &self.exact_series.is_some())
            .finish()
    }
}

impl PotentialField {
    pub fn new(
        name: impl Into<String>,
        nvars: usize,
        evaluate: impl Fn(&[C64]) -> f64 + Send + Sync + 'static,
        domain: impl Fn(&[C64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        PotentialField {
            name: name.into(),
            nvars,
            evaluate: Arc::new(evaluate),
            domain: Arc::new(domain),
            exact_series: None,
        }
    }

    /// Attaches an expansion valid near `center`.
    pub fn with_series(mut self, series: BiSeries, center: Vec<C64>) -> Self {
        self.exact_series = Some((series, center));
        self
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn in_domain(&self, point: &[C64]) -> bool {
        point.len() == self.nvars && (self.domain)(point)
    }

    pub fn evaluate(&self, point: &[C64]) -> Result<f64> {
        if !self.in_domain(point) {
            return Err(Error::Domain(format!("{}: point outside domain", self.name)));
        }
        Ok((self.evaluate)(point))
    }

    pub fn exact_series(&self) -> Option<(&BiSeries, &[C64])> {
        self.exact_series.as_ref().map(|(s, c)| (s, c.as_slice()))
    }

    /// Real gradient by finite differences.
    pub fn gradient(&self, point: &[C64]) -> Vec<f64> {
        fd::gradient(&*self.evaluate, point, fd::HESSIAN_STEP)
    }
}

/// A Hermitian metric `h_{ab̄}` on a guarded domain, with an optional Lee form
/// given by its `2n` real coefficients on `(dx_1, dy_1, ..., dx_n, dy_n)`.
#[derive(Clone)]
pub struct HermitianMetricField {
    name: String,
    nvars: usize,
    coeff: PointFn<DMatrix<C64>>,
    lee_form: Option<PointFn<Vec<f64>>>,
    domain: PointFn<bool>,
}

impl fmt::Debug for HermitianMetricField {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("HermitianMetricField")
            .field("name", &self.name)
            .field("nvars", &self.nvars)
            .field("has_lee_form", &self.lee_form.is_some())
            .finish()
    }
}

impl HermitianMetricField {
    pub fn new(
        name: impl Into<String>,
        nvars: usize,
        coeff: impl Fn(&[C64]) -> DMatrix<C64> + Send + Sync + 'static,
        domain: impl Fn(&[C64]) -> bool + Send + Sync + 'static,
    ) -> Self {
        HermitianMetricField {
            name: name.into(),
            nvars,
            coeff: Arc::new(coeff),
            lee_form: None,
            domain: Arc::new(domain),
        }
    }

    pub fn with_lee_form(mut self, lee: impl Fn(&[C64]) -> Vec<f64> + Send + Sync + 'static) -> Self {
        self.lee_form = Some(Arc::new(lee));
        self
    }

    /// The Kähler metric `dd^c Φ` of a potential, by exact series or finite
    /// differences (see [`metric_from_potential`]).
    pub fn from_potential(phi: &PotentialField) -> Self {
        let p = phi.clone();
        let domain = phi.domain.clone();
        HermitianMetricField {
            name: format!("ddc({})", phi.name),
            nvars: phi.nvars,
            coeff: Arc::new(move |z| {
                metric_from_potential(&p, z, HessianMethod::Auto)
                    .map(|m| m.matrix)
                    .unwrap_or_else(|_| DMatrix::from_element(z.len(), z.len(), C64::new(f64::NAN, 0.0)))
            }),
            lee_form: None,
            domain: Arc::new(move |z| domain(z)),
        }
    }

    /// The lcK metric `Φ^{-1} h` with Lee form `θ = -d log Φ`, for a Kähler
    /// metric `h` with automorphic potential `Φ`.
    pub fn conformal_lck(
        name: impl Into<String>,
        kahler: &HermitianMetricField,
        potential: &PotentialField,
        gradient: Option<PointFn<Vec<f64>>>,
    ) -> Self {
        let h = kahler.coeff.clone();
        let phi = potential.evaluate.clone();
        let phi2 = potential.evaluate.clone();
        let grad: PointFn<Vec<f64>> = match gradient {
            Some(g) => g,
            None => {
                let p = potential.evaluate.clone();
                Arc::new(move |z| fd::gradient(&*p, z, fd::HESSIAN_STEP))
            }
        };
        HermitianMetricField {
            name: name.into(),
            nvars: kahler.nvars,
            coeff: Arc::new(move |z| h(z).map(|c| c / phi(z))),
            lee_form: Some(Arc::new(move |z| {
                let v = phi2(z);
                grad(z).into_iter().map(|g| -g / v).collect()
            })),
            domain: kahler.domain.clone(),
        }
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn in_domain(&self, point: &[C64]) -> bool {
        point.len() == self.nvars && (self.domain)(point)
    }

    pub fn coeff(&self, point: &[C64]) -> DMatrix<C64> {
        (self.coeff)(point)
    }

    pub fn has_lee_form(&self) -> bool {
        self.lee_form.is_some()
    }

    pub fn lee_form(&self, point: &[C64]) -> Option<Vec<f64>> {
        self.lee_form.as_ref().map(|f| f(point))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum HessianMethod {
    /// Series differentiation when an exact series is attached, else finite differences.
    Auto,
    Series,
    FiniteDifference,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MetricEval {
    pub matrix: DMatrix<C64>,
    /// Cleared (with a warning, not an error) when the Hessian is not
    /// positive definite.
    pub positive_definite: bool,
}

/// `h_{ab̄} = ∂²Φ/∂z_a∂z̄_b` at a point.
pub fn metric_from_potential(phi: &PotentialField, point: &[C64], method: HessianMethod) -> Result<MetricEval> {
    if point.len() != phi.nvars {
        return Err(Error::Dimension {
            expected: phi.nvars,
            got: point.len(),
        });
    }
    if !phi.in_domain(point) {
        return Err(Error::Domain(format!("{}: point outside domain", phi.name)));
    }
    let use_series = match method {
        HessianMethod::Series => true,
        HessianMethod::FiniteDifference => false,
        HessianMethod::Auto => phi.exact_series.is_some(),
    };
    let matrix = if use_series {
        let (series, center) = phi
            .exact_series
            .as_ref()
            .ok_or_else(|| Error::Contract(format!("{}: no exact series attached", phi.name)))?;
        let local: Vec<C64> = point.iter().zip(center).map(|(z, c)| z - c).collect();
        series.hessian_at(&local)
    } else {
        let reach = 2.0 * fd::HESSIAN_STEP;
        for axis in 0..2 * point.len() {
            for s in [-reach, reach] {
                if !phi.in_domain(&fd::shifted(point, axis, s)) {
                    return Err(Error::Domain(format!(
                        "{}: finite-difference stencil leaves the domain",
                        phi.name
                    )));
                }
            }
        }
        fd::complex_hessian(&*phi.evaluate, point, fd::HESSIAN_STEP)
    };
    let positive_definite = is_positive_definite(&matrix);
    Ok(MetricEval {
        matrix,
        positive_definite,
    })
}

pub fn is_positive_definite(m: &DMatrix<C64>) -> bool {
    let herm = (m + m.adjoint()).map(|c| c * 0.5);
    herm.symmetric_eigen().eigenvalues.iter().all(|&v| v > 0.0)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn everywhere(_: &[C64]) -> bool {
        true
    }

    #[test]
    fn flat_potential_gives_identity() {
        let phi = PotentialField::new("flat", 2, |z| z.iter().map(|c| c.norm_sqr()).sum(), everywhere)
            .with_series(BiSeries::norm_sq(2, 2), vec![C64::new(0.0, 0.0); 2]);
        let p = [C64::new(0.7, 0.2), C64::new(-0.3, 1.0)];
        let s = metric_from_potential(&phi, &p, HessianMethod::Series).unwrap();
        assert_eq!(s.matrix, DMatrix::identity(2, 2));
        let f = metric_from_potential(&phi, &p, HessianMethod::FiniteDifference).unwrap();
        assert!((f.matrix - DMatrix::<C64>::identity(2, 2)).norm() < 1e-7);
        assert!(f.positive_definite);
    }

    #[test]
    fn parton_two_at_unit_point() {
        let phi = PotentialField::new(
            "parton2",
            2,
            |z| 0.5 * (z[0].norm_sqr() + z[1].norm_sqr()).powi(2),
            everywhere,
        );
        let p = [C64::new(1.0, 0.0), C64::new(0.0, 0.0)];
        let m = metric_from_potential(&phi, &p, HessianMethod::Auto).unwrap().matrix;
        assert!((m[(0, 0)] - C64::new(2.0, 0.0)).norm() < 1e-7);
        assert!((m[(1, 1)] - C64::new(1.0, 0.0)).norm() < 1e-7);
        assert!(m[(0, 1)].norm() < 1e-7);
    }

    #[test]
    fn stencil_outside_domain_is_an_error() {
        let phi = PotentialField::new("half", 1, |z| z[0].norm_sqr(), |z| z[0].im > 0.0);
        let p = [C64::new(0.0, 1e-5)];
        assert!(matches!(
            metric_from_potential(&phi, &p, HessianMethod::FiniteDifference),
            Err(Error::Domain(_))
        ));
        assert!(matches!(
            metric_from_potential(&phi, &[C64::new(0.0, -1.0)], HessianMethod::Auto),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn indefinite_hessian_is_flagged_not_rejected() {
        let phi = PotentialField::new("neg", 1, |z| -z[0].norm_sqr(), everywhere);
        let m = metric_from_potential(&phi, &[C64::new(0.1, 0.1)], HessianMethod::Auto).unwrap();
        assert!(!m.positive_definite);
    }
}
