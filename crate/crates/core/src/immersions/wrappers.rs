use std::sync::Arc;

use nalgebra::DMatrix;

use super::{ImmersionMap, TailBound, TailKind};
use crate::algebra::C64;
use crate::geometry::DeckMap;

/// `U` applied to the first `U.nrows()` components of `F`.
#[derive(Clone)]
pub struct GaugedMap {
    inner: Arc<dyn ImmersionMap>,
    unitary: DMatrix<C64>,
}

impl GaugedMap {
    pub fn new(inner: Arc<dyn ImmersionMap>, unitary: DMatrix<C64>) -> Self {
        assert_eq!(unitary.nrows(), unitary.ncols(), "gauge must be square");
        GaugedMap { inner, unitary }
    }

    fn k(&self) -> usize {
        self.unitary.nrows()
    }
}

impl ImmersionMap for GaugedMap {
    fn name(&self) -> String {
        format!("U·{}", self.inner.name())
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn in_domain(&self, z: &[C64]) -> bool {
        self.inner.in_domain(z)
    }
    fn finite_len(&self) -> Option<usize> {
        self.inner.finite_len().map(|n| n.max(self.k()))
    }
    fn tail_kind(&self) -> TailKind {
        self.inner.tail_kind()
    }
    fn component(&self, j: usize, z: &[C64]) -> C64 {
        if j >= self.k() {
            return self.inner.component(j, z);
        }
        (0..self.k())
            .map(|l| self.unitary[(j, l)] * self.inner.component(l, z))
            .sum()
    }
    fn jacobian_row(&self, j: usize, z: &[C64]) -> Vec<C64> {
        if j >= self.k() {
            return self.inner.jacobian_row(j, z);
        }
        let mut row = vec![C64::new(0.0, 0.0); self.nvars()];
        for l in 0..self.k() {
            for (r, v) in row.iter_mut().zip(self.inner.jacobian_row(l, z)) {
                *r += self.unitary[(j, l)] * v;
            }
        }
        row
    }
    fn tail_bound(&self, j0: usize, z: &[C64]) -> TailBound {
        let k = self.k();
        let mut t = self.inner.tail_bound(j0.max(k), z);
        for j in j0..k {
            t.value += self.component(j, z).norm_sqr();
            t.jacobian += self.jacobian_row(j, z).iter().map(|c| c.norm_sqr()).sum::<f64>();
        }
        t
    }
}

/// `s · F`.
#[derive(Clone)]
pub struct ScaledMap {
    inner: Arc<dyn ImmersionMap>,
    scale: C64,
}

impl ScaledMap {
    pub fn new(inner: Arc<dyn ImmersionMap>, scale: C64) -> Self {
        ScaledMap { inner, scale }
    }
}

impl ImmersionMap for ScaledMap {
    fn name(&self) -> String {
        format!("({})·{}", self.scale, self.inner.name())
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn in_domain(&self, z: &[C64]) -> bool {
        self.inner.in_domain(z)
    }
    fn finite_len(&self) -> Option<usize> {
        self.inner.finite_len()
    }
    fn tail_kind(&self) -> TailKind {
        self.inner.tail_kind()
    }
    fn component(&self, j: usize, z: &[C64]) -> C64 {
        self.scale * self.inner.component(j, z)
    }
    fn jacobian_row(&self, j: usize, z: &[C64]) -> Vec<C64> {
        self.inner
            .jacobian_row(j, z)
            .into_iter()
            .map(|v| self.scale * v)
            .collect()
    }
    fn tail_bound(&self, j0: usize, z: &[C64]) -> TailBound {
        let t = self.inner.tail_bound(j0, z);
        let s2 = self.scale.norm_sqr();
        TailBound {
            value: s2 * t.value,
            jacobian: s2 * t.jacobian,
        }
    }
}

/// `F ∘ γ`.
#[derive(Clone)]
pub struct PrecomposedMap {
    inner: Arc<dyn ImmersionMap>,
    gamma: DeckMap,
}

impl PrecomposedMap {
    pub fn new(inner: Arc<dyn ImmersionMap>, gamma: DeckMap) -> Self {
        PrecomposedMap { inner, gamma }
    }
}

impl ImmersionMap for PrecomposedMap {
    fn name(&self) -> String {
        format!("{}∘{}", self.inner.name(), self.gamma.name())
    }
    fn nvars(&self) -> usize {
        self.inner.nvars()
    }
    fn in_domain(&self, z: &[C64]) -> bool {
        z.len() == self.nvars() && self.inner.in_domain(&self.gamma.apply(z))
    }
    fn finite_len(&self) -> Option<usize> {
        self.inner.finite_len()
    }
    fn tail_kind(&self) -> TailKind {
        self.inner.tail_kind()
    }
    fn component(&self, j: usize, z: &[C64]) -> C64 {
        self.inner.component(j, &self.gamma.apply(z))
    }
    fn jacobian_row(&self, j: usize, z: &[C64]) -> Vec<C64> {
        let jac = self.gamma.jacobian(z);
        let row = self.inner.jacobian_row(j, &self.gamma.apply(z));
        (0..self.nvars())
            .map(|a| (0..row.len()).map(|c| row[c] * jac[(c, a)]).sum())
            .collect()
    }
    fn tail_bound(&self, j0: usize, z: &[C64]) -> TailBound {
        let t = self.inner.tail_bound(j0, &self.gamma.apply(z));
        TailBound {
            value: t.value,
            jacobian: t.jacobian * self.gamma.jacobian(z).norm_squared(),
        }
    }
}
