use std::fmt;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use serde::Serialize;

use super::field::{HermitianMetricField, PointFn};
use crate::algebra::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DeckKind {
    Linear,
    Affine,
    MoebiusComponent,
    Heisenberg,
    Composite,
}

/// A holomorphic deck transformation together with its complex Jacobian
/// `J[c][a] = ∂γ_c/∂z_a`.
#[derive(Clone)]
pub struct DeckMap {
    name: String,
    kind: DeckKind,
    apply: PointFn<Vec<C64>>,
    jacobian: PointFn<DMatrix<C64>>,
}

impl fmt::Debug for DeckMap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("DeckMap")
            .field("name", &self.name)
            .field("kind", &self.kind)
            .finish()
    }
}

impl DeckMap {
    pub fn new(
        name: impl Into<String>,
        kind: DeckKind,
        apply: impl Fn(&[C64]) -> Vec<C64> + Send + Sync + 'static,
        jacobian: impl Fn(&[C64]) -> DMatrix<C64> + Send + Sync + 'static,
    ) -> Self {
        DeckMap {
            name: name.into(),
            kind,
            apply: Arc::new(apply),
            jacobian: Arc::new(jacobian),
        }
    }

    /// `z ↦ A z + t`.
    pub fn affine(name: impl Into<String>, matrix: DMatrix<C64>, translation: DVector<C64>) -> Self {
        let kind = if translation.iter().all(|c| *c == C64::new(0.0, 0.0)) {
            DeckKind::Linear
        } else {
            DeckKind::Affine
        };
        let m = matrix.clone();
        DeckMap::new(
            name,
            kind,
            move |z| {
                let v = DVector::from_column_slice(z);
                (&m * v + &translation).iter().copied().collect()
            },
            move |_| matrix.clone(),
        )
    }

    pub fn linear(name: impl Into<String>, matrix: DMatrix<C64>) -> Self {
        let n = matrix.nrows();
        DeckMap::affine(name, matrix, DVector::from_element(n, C64::new(0.0, 0.0)))
    }

    /// `z ↦ λ z` in `n` variables.
    pub fn scalar(name: impl Into<String>, n: usize, lambda: C64) -> Self {
        DeckMap::linear(name, DMatrix::from_diagonal_element(n, n, lambda))
    }

    pub fn identity(n: usize) -> Self {
        DeckMap::scalar("id", n, C64::new(1.0, 0.0))
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn kind(&self) -> DeckKind {
        self.kind
    }

    pub fn apply(&self, z: &[C64]) -> Vec<C64> {
        (self.apply)(z)
    }

    pub fn jacobian(&self, z: &[C64]) -> DMatrix<C64> {
        (self.jacobian)(z)
    }

    /// `self ∘ inner`.
    pub fn compose(&self, inner: &DeckMap) -> DeckMap {
        let (fa, ja) = (self.apply.clone(), self.jacobian.clone());
        let (fb, jb) = (inner.apply.clone(), inner.jacobian.clone());
        let fb2 = fb.clone();
        DeckMap {
            name: format!("{}∘{}", self.name, inner.name),
            kind: DeckKind::Composite,
            apply: Arc::new(move |z| fa(&fb(z))),
            jacobian: Arc::new(move |z| ja(&fb2(z)) * jb(z)),
        }
    }

    /// `(γ*h)(z) = Jᵀ h(γ z) J̄`.
    pub fn pullback(&self, metric: &HermitianMetricField, z: &[C64]) -> DMatrix<C64> {
        let j = self.jacobian(z);
        let h = metric.coeff(&self.apply(z));
        j.transpose() * h * j.map(|c| c.conj())
    }
}
