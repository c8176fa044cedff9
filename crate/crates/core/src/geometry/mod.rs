//! Potentials, Hermitian metrics, deck maps, and the lcK checks built on them.

mod character;
mod deck;
pub mod fd;
mod field;
pub(crate) mod homothety;
mod lck;

pub use character::{character_rank, CharacterRank, Relation, DENOMINATOR_BOUND};
pub use deck::{DeckKind, DeckMap};
pub use field::{
    is_positive_definite, metric_from_potential, HermitianMetricField, HessianMethod, MetricEval, PointFn,
    PotentialField,
};
pub use homothety::{homothety_factor, HomothetyReport, HOMOTHETY_SPREAD_TOL};
pub use lck::{lck_residual, real_two_form};

use serde::Serialize;

use crate::algebra::C64;

/// Default threshold for `lck_residual`.
pub const LCK_RESIDUAL_TOL: f64 = 1e-5;

/// One pointwise check, as emitted in reports.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CheckRecord {
    pub check: String,
    /// `[re, im]` per coordinate.
    pub point: Vec<[f64; 2]>,
    pub value: f64,
    pub pass: bool,
}

impl CheckRecord {
    pub fn new(check: impl Into<String>, point: &[C64], value: f64, pass: bool) -> Self {
        CheckRecord {
            check: check.into(),
            point: point.iter().map(|c| [c.re, c.im]).collect(),
            value,
            pass,
        }
    }
}
