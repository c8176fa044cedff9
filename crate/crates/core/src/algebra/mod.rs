//! Multi-indices and truncated bidegree power series in `z`, `z̄`.

mod multi_index;
mod series;

pub use multi_index::MultiIndex;
pub use series::{BiSeries, SeriesJson, SeriesTerm};

pub type C64 = num_complex::Complex64;
