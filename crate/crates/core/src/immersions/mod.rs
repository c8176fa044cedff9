//! Holomorphic maps into `C^N` or `l^2(C)`, evaluated with certified tails,
//! and the checks built on them: pullback metrics, immersion certificates,
//! deck equivariance and Gram-matrix rigidity.

mod descent;
mod maps;
mod verify;
mod wrappers;

pub use descent::{rigidity_gauge, scalar_descent, DescentMode, DescentReport, GaugeReport, DESCENT_TOL, GRAM_PAIRS};
pub use maps::{EllipticMap, InoueMap, KodairaMap, LinearMap, PartonMap};
pub use verify::{verify_immersion, ImmersionReport, VERIFY_TOL};
pub use wrappers::{GaugedMap, PrecomposedMap, ScaledMap};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::C64;
use crate::error::{Error, Result};

/// Relative accuracy the automatic truncation aims for.
pub const TAIL_REL_TARGET: f64 = 1e-10;
pub const GEOMETRIC_CAP: usize = 500;
pub const FACTORIAL_CAP: usize = 120;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum TailKind {
    Finite,
    Geometric,
    Factorial,
}

/// Upper bounds on `Σ_{j>=J} |F_j|^2` and `Σ_{j>=J} Σ_a |∂_a F_j|^2`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailBound {
    pub value: f64,
    pub jacobian: f64,
}

impl TailBound {
    pub const ZERO: TailBound = TailBound {
        value: 0.0,
        jacobian: 0.0,
    };

    pub fn is_finite(&self) -> bool {
        self.value.is_finite() && self.jacobian.is_finite()
    }
}

/// A countable family of holomorphic components `F_0, F_1, ...`.
pub trait ImmersionMap: Send + Sync {
    fn name(&self) -> String;
    fn nvars(&self) -> usize;
    fn in_domain(&self, z: &[C64]) -> bool;
    /// `Some(N)` for maps into `C^N`.
    fn finite_len(&self) -> Option<usize>;
    fn tail_kind(&self) -> TailKind;
    fn component(&self, j: usize, z: &[C64]) -> C64;
    /// `∂F_j/∂z_a` for each `a`.
    fn jacobian_row(&self, j: usize, z: &[C64]) -> Vec<C64>;
    /// Bounds for the components with index `>= j0`. Infinite when no bound
    /// is available yet at this `j0`.
    fn tail_bound(&self, j0: usize, z: &[C64]) -> TailBound;
}

/// `Σ r` over a geometric-type tail: `first / (1 - ratio)` when `ratio < 1`.
pub(crate) fn geometric_tail(first: f64, ratio: f64) -> f64 {
    if first == 0.0 {
        0.0
    } else if ratio < 1.0 {
        first / (1.0 - ratio)
    } else {
        f64::INFINITY
    }
}

/// Neumaier compensated summation.
#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct Compensated {
    sum: f64,
    c: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.c += (self.sum - t) + x;
        } else {
            self.c += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.c
    }
}

#[derive(Clone, Copy, Debug, Default)]
pub(crate) struct CompensatedC {
    re: Compensated,
    im: Compensated,
}

impl CompensatedC {
    pub fn add(&mut self, x: C64) {
        self.re.add(x.re);
        self.im.add(x.im);
    }

    pub fn value(&self) -> C64 {
        C64::new(self.re.value(), self.im.value())
    }
}

/// Components and Jacobian rows up to a truncation, with the tail bound.
#[derive(Clone, Debug, PartialEq)]
pub struct Evaluation {
    pub values: Vec<C64>,
    pub rows: Vec<Vec<C64>>,
    pub tail: TailBound,
}

impl Evaluation {
    pub fn truncation(&self) -> usize {
        self.values.len()
    }
}

fn check_point(map: &dyn ImmersionMap, z: &[C64]) -> Result<()> {
    if z.len() != map.nvars() {
        return Err(Error::Dimension {
            expected: map.nvars(),
            got: z.len(),
        });
    }
    if !map.in_domain(z) {
        return Err(Error::Domain(format!("{}: point outside domain", map.name())));
    }
    Ok(())
}

/// Evaluates with the smallest truncation whose tail is below
/// `TAIL_REL_TARGET` times the partial sums, up to the family cap.
pub fn evaluate(map: &dyn ImmersionMap, z: &[C64]) -> Result<Evaluation> {
    check_point(map, z)?;
    if let Some(n) = map.finite_len() {
        return Ok(evaluate_to(map, z, n));
    }
    let cap = match map.tail_kind() {
        TailKind::Factorial => FACTORIAL_CAP,
        _ => GEOMETRIC_CAP,
    };
    let mut values = Vec::new();
    let mut rows = Vec::new();
    let mut partial = Compensated::default();
    let mut partial_jac = Compensated::default();
    let mut tail = TailBound {
        value: f64::INFINITY,
        jacobian: f64::INFINITY,
    };
    for j in 0..cap {
        let v = map.component(j, z);
        let row = map.jacobian_row(j, z);
        partial.add(v.norm_sqr());
        partial_jac.add(row.iter().map(|c| c.norm_sqr()).sum());
        values.push(v);
        rows.push(row);
        tail = map.tail_bound(j + 1, z);
        if tail.is_finite()
            && tail.value <= TAIL_REL_TARGET * partial.value()
            && tail.jacobian <= TAIL_REL_TARGET * partial_jac.value()
        {
            break;
        }
    }
    if !tail.is_finite() {
        return Err(Error::Domain(format!(
            "{}: tail does not converge at this point",
            map.name()
        )));
    }
    Ok(Evaluation { values, rows, tail })
}

/// Evaluates exactly `n` components (fewer for finite maps).
pub fn evaluate_to(map: &dyn ImmersionMap, z: &[C64], n: usize) -> Evaluation {
    let n = map.finite_len().map_or(n, |m| m.min(n));
    let values = (0..n).map(|j| map.component(j, z)).collect();
    let rows = (0..n).map(|j| map.jacobian_row(j, z)).collect();
    let tail = match map.finite_len() {
        Some(m) if n >= m => TailBound::ZERO,
        _ => map.tail_bound(n, z),
    };
    Evaluation { values, rows, tail }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct NormSquared {
    /// Partial sum over the retained components.
    pub value: f64,
    /// The true value lies in `[value, value + error_bar]`.
    pub error_bar: f64,
    pub truncation: usize,
}

/// `‖F(z)‖^2` with a certified tail interval.
pub fn norm_squared(map: &dyn ImmersionMap, z: &[C64]) -> Result<NormSquared> {
    let e = evaluate(map, z)?;
    let mut s = Compensated::default();
    for v in &e.values {
        s.add(v.norm_sqr());
    }
    Ok(NormSquared {
        value: s.value(),
        error_bar: e.tail.value,
        truncation: e.truncation(),
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PullbackMetric {
    pub matrix: DMatrix<C64>,
    /// Bound on each entry's neglected tail.
    pub error_bar: f64,
    pub truncation: usize,
}

/// `h_{ab̄} = Σ_j ∂_a F_j · conj(∂_b F_j)`.
pub fn pullback_metric(map: &dyn ImmersionMap, z: &[C64]) -> Result<PullbackMetric> {
    let e = evaluate(map, z)?;
    Ok(PullbackMetric {
        matrix: gram_of_rows(&e.rows, map.nvars()),
        error_bar: e.tail.jacobian,
        truncation: e.truncation(),
    })
}

pub(crate) fn gram_of_rows(rows: &[Vec<C64>], n: usize) -> DMatrix<C64> {
    let mut acc = vec![CompensatedC::default(); n * n];
    for row in rows {
        for a in 0..n {
            for b in 0..n {
                acc[a * n + b].add(row[a] * row[b].conj());
            }
        }
    }
    DMatrix::from_fn(n, n, |a, b| acc[a * n + b].value())
}

/// `⟨u, v⟩ = Σ u_j conj(v_j)`, compensated, ascending `j`.
pub(crate) fn inner(u: &[C64], v: &[C64]) -> C64 {
    let mut acc = CompensatedC::default();
    for (a, b) in u.iter().zip(v) {
        acc.add(a * b.conj());
    }
    acc.value()
}
