//! Diastasis extraction, the Calabi coefficient matrix, and resolvability.
//!
//! A real-analytic Kähler potential expanded around a center is normalized
//! to its diastasis by dropping the pluriharmonic (pure `z` / pure `z̄`)
//! terms. The remaining coefficients `a_{jk}` of `z^{m_j} z̄^{m_k}` form a
//! Hermitian matrix; the metric admits a local Kähler immersion into flat
//! `C^N` exactly when that matrix is positive semidefinite of rank `<= N`.

use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::Serialize;

use crate::algebra::{BiSeries, MultiIndex, C64};
use crate::error::{Error, Result};

/// Default relative eigenvalue tolerance.
pub const DEFAULT_EIGEN_TOL: f64 = 1e-9;

/// Normalizes a potential expansion to the diastasis centered at the origin.
pub fn diastasis_from_potential(phi: &BiSeries) -> Result<BiSeries> {
    if !phi.is_hermitian_flagged() || !phi.is_hermitian(1e-12) {
        return Err(Error::Domain(format!(
            "potential series is not real-valued (hermitian defect {:.3e})",
            phi.hermitian_defect()
        )));
    }
    Ok(phi.pure_part_removal())
}

/// Two-point diastasis `D(z, z')` from a potential series by polarization:
/// `Φ(z, z̄) + Φ(z', z̄') - Φ(z, z̄') - Φ(z', z̄)`.
pub fn diastasis_between(phi: &BiSeries, z: &[C64], zp: &[C64]) -> f64 {
    let v =
        phi.eval_polarized(z, z) + phi.eval_polarized(zp, zp) - phi.eval_polarized(z, zp) - phi.eval_polarized(zp, z);
    v.re
}

#[derive(Clone, Debug, PartialEq)]
pub struct CalabiMatrix {
    labels: Vec<MultiIndex>,
    entries: DMatrix<C64>,
}

impl CalabiMatrix {
    /// Builds directly from a Hermitian matrix; used for hand-made examples.
    pub fn from_parts(labels: Vec<MultiIndex>, entries: DMatrix<C64>) -> Result<Self> {
        if entries.nrows() != labels.len() || entries.ncols() != labels.len() {
            return Err(Error::Dimension {
                expected: labels.len(),
                got: entries.nrows(),
            });
        }
        let entries = (&entries + entries.adjoint()).map(|c| c * 0.5);
        Ok(CalabiMatrix { labels, entries })
    }

    pub fn labels(&self) -> &[MultiIndex] {
        &self.labels
    }

    pub fn entries(&self) -> &DMatrix<C64> {
        &self.entries
    }

    pub fn size(&self) -> usize {
        self.labels.len()
    }

    /// Principal block on the given labels (which must be present).
    pub fn restrict(&self, keep: &[MultiIndex]) -> Result<CalabiMatrix> {
        let pos: Vec<usize> = keep
            .iter()
            .map(|m| {
                self.labels
                    .iter()
                    .position(|l| l == m)
                    .ok_or_else(|| Error::Precondition(format!("label {m} not in matrix")))
            })
            .collect::<Result<_>>()?;
        let entries = DMatrix::from_fn(pos.len(), pos.len(), |r, c| self.entries[(pos[r], pos[c])]);
        Ok(CalabiMatrix {
            labels: keep.to_vec(),
            entries,
        })
    }

    /// CSV with multi-index row/column headers; entries as `re+imi`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("label");
        for l in &self.labels {
            write!(out, ",{l}").unwrap();
        }
        out.push('\n');
        for (r, l) in self.labels.iter().enumerate() {
            out.push_str(&l.to_string());
            for c in 0..self.labels.len() {
                let v = self.entries[(r, c)];
                write!(out, ",{}{:+}i", v.re, v.im).unwrap();
            }
            out.push('\n');
        }
        out
    }
}

/// Reads the coefficient matrix off a diastasis series. Rows and columns are
/// all nonzero multi-indices of degree `<= d`, in graded-lex order.
pub fn calabi_matrix(d0: &BiSeries) -> Result<CalabiMatrix> {
    if !d0.has_no_pure_part() {
        return Err(Error::Precondition(
            "series has terms in z or z̄ alone; normalize to the diastasis first".into(),
        ));
    }
    let labels: Vec<MultiIndex> = MultiIndex::up_to_degree(d0.nvars(), d0.max_degree())
        .into_iter()
        .filter(|m| !m.is_zero())
        .collect();
    let raw = DMatrix::from_fn(labels.len(), labels.len(), |r, c| d0.coeff(&labels[r], &labels[c]));
    CalabiMatrix::from_parts(labels, raw)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ResolvabilityReport {
    pub psd: bool,
    pub rank: usize,
    pub min_eigenvalue: f64,
    pub tolerance: f64,
    /// `tol * max(1, spectral norm)`, the threshold actually applied.
    pub threshold: f64,
    pub labels: Vec<String>,
    pub eigenvalues: Vec<f64>,
    /// Label carrying the largest weight in an eigenvector with negative
    /// eigenvalue.
    pub witness_index: Option<String>,
    /// Ranks of truncated matrices only bound the true rank from below.
    pub rank_is_lower_bound: bool,
}

/// Positive-semidefiniteness and numerical rank of a Calabi matrix.
pub fn resolvability(a: &CalabiMatrix, tol: f64) -> ResolvabilityReport {
    let labels: Vec<String> = a.labels.iter().map(|l| l.to_string()).collect();
    if a.size() == 0 {
        return ResolvabilityReport {
            psd: true,
            rank: 0,
            min_eigenvalue: 0.0,
            tolerance: tol,
            threshold: tol,
            labels,
            eigenvalues: Vec::new(),
            witness_index: None,
            rank_is_lower_bound: true,
        };
    }
    let eig = a.entries.clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..eig.eigenvalues.len()).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let eigenvalues: Vec<f64> = order.iter().map(|&i| eig.eigenvalues[i]).collect();

    let spectral = eigenvalues.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let threshold = tol * spectral.max(1.0);
    let min_eigenvalue = eigenvalues[0];
    let psd = min_eigenvalue >= -threshold;
    let rank = eigenvalues.iter().filter(|&&v| v > threshold).count();

    let witness_index = (!psd).then(|| {
        let col = eig.eigenvectors.column(order[0]);
        let (pos, _) = col.iter().enumerate().fold(
            (0, -1.0),
            |best, (i, c)| if c.norm() > best.1 { (i, c.norm()) } else { best },
        );
        labels[pos].clone()
    });

    ResolvabilityReport {
        psd,
        rank,
        min_eigenvalue,
        tolerance: tol,
        threshold,
        labels,
        eigenvalues,
        witness_index,
        rank_is_lower_bound: true,
    }
}

/// `∏_{k=1}^{j-1} (k b + 1 - j a)`, the sign-carrying factor of the `j`-th
/// diagonal Calabi coefficient of the Gauduchon–Ornea potential.
pub fn go_eigen_product(a: f64, b: f64, j: u32) -> f64 {
    (1..j).map(|k| k as f64 * b + 1.0 - j as f64 * a).product()
}

/// Smallest `j` in `[2, jmax]` whose eigenvalue product is negative.
pub fn go_negative_witness(a: f64, b: f64, jmax: u32) -> Result<Option<u32>> {
    if (a + b - 2.0).abs() > 1e-12 {
        return Err(Error::Parameter(format!("a + b must equal 2, got {}", a + b)));
    }
    if !(a >= b && b > 0.0) {
        return Err(Error::Parameter(format!("need a >= b > 0, got a={a}, b={b}")));
    }
    if jmax < 2 {
        return Err(Error::Parameter(format!("jmax must be >= 2, got {jmax}")));
    }
    Ok((2..=jmax).find(|&j| go_eigen_product(a, b, j) < 0.0))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mi(e: &[u32]) -> MultiIndex {
        MultiIndex::new(e.to_vec())
    }

    fn c(v: f64) -> C64 {
        C64::new(v, 0.0)
    }

    #[test]
    fn flat_is_its_own_diastasis() {
        let phi = BiSeries::norm_sq(2, 3);
        assert_eq!(diastasis_from_potential(&phi).unwrap(), phi);
    }

    #[test]
    fn pluriharmonic_terms_are_removed() {
        let d = 3;
        let z1 = BiSeries::variable(2, d, 0);
        let re_z1_cubed = z1
            .powi(3)
            .add(&BiSeries::conj_variable(2, d, 0).powi(3))
            .unwrap()
            .scale_real(0.5)
            .with_hermitian_flag(true);
        let phi = BiSeries::norm_sq(2, d)
            .add(&re_z1_cubed)
            .unwrap()
            .add(&BiSeries::constant(2, d, 7.0))
            .unwrap();
        assert_eq!(diastasis_from_potential(&phi).unwrap(), BiSeries::norm_sq(2, d));
    }

    #[test]
    fn non_hermitian_potential_is_rejected() {
        let phi = BiSeries::variable(1, 2, 0);
        assert!(matches!(diastasis_from_potential(&phi), Err(Error::Domain(_))));
        let lying = BiSeries::variable(1, 2, 0).with_hermitian_flag(true);
        assert!(matches!(diastasis_from_potential(&lying), Err(Error::Domain(_))));
    }

    #[test]
    fn flat_matrix_is_identity() {
        let a = calabi_matrix(&BiSeries::norm_sq(2, 1)).unwrap();
        assert_eq!(a.entries(), &DMatrix::identity(2, 2).map(c));
        let r = resolvability(&a, DEFAULT_EIGEN_TOL);
        assert!(r.psd);
        assert_eq!(r.rank, 2);
    }

    #[test]
    fn parton_two_is_diagonal_half_one_half() {
        let phi = BiSeries::norm_sq(2, 2).powi(2).scale_real(0.5);
        let a = calabi_matrix(&diastasis_from_potential(&phi).unwrap()).unwrap();
        let deg2 = [mi(&[2, 0]), mi(&[1, 1]), mi(&[0, 2])];
        let block = a.restrict(&deg2).unwrap();
        let expected = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![c(0.5), c(1.0), c(0.5)]));
        assert!((block.entries() - expected).norm() < 1e-15);
        // degree-1 rows vanish
        for r in 0..2 {
            assert!(a.entries().row(r).norm() == 0.0);
        }
    }

    #[test]
    fn read_off_two_by_two_block() {
        let d = 2;
        let z = MultiIndex::unit(1, 0);
        let z2 = mi(&[2]);
        let s = BiSeries::from_terms(
            1,
            d,
            true,
            [
                (z.clone(), z.clone(), c(2.0)),
                (z.clone(), z2.clone(), c(1.0)),
                (z2.clone(), z.clone(), c(1.0)),
            ],
        )
        .unwrap();
        let a = calabi_matrix(&s).unwrap();
        assert_eq!(a.labels(), &[z, z2]);
        assert_eq!(
            a.entries(),
            &DMatrix::from_row_slice(2, 2, &[c(2.0), c(1.0), c(1.0), c(0.0)])
        );
    }

    #[test]
    fn pure_part_is_a_precondition_error() {
        let s = BiSeries::norm_sq(1, 2).add(&BiSeries::constant(1, 2, 1.0)).unwrap();
        assert!(matches!(calabi_matrix(&s), Err(Error::Precondition(_))));
    }

    #[test]
    fn indefinite_matrix_reports_witness() {
        let labels = vec![mi(&[1]), mi(&[2])];
        let a =
            CalabiMatrix::from_parts(labels, DMatrix::from_row_slice(2, 2, &[c(1.0), c(2.0), c(2.0), c(1.0)])).unwrap();
        let r = resolvability(&a, DEFAULT_EIGEN_TOL);
        assert!(!r.psd);
        assert!((r.min_eigenvalue + 1.0).abs() < 1e-12);
        assert!(r.witness_index.is_some());
    }

    #[test]
    fn csv_has_headers() {
        let a = calabi_matrix(&BiSeries::norm_sq(2, 1)).unwrap();
        let csv = a.to_csv();
        assert_eq!(csv.lines().next().unwrap(), "label,z1,z2");
        assert_eq!(csv.lines().nth(1).unwrap(), "z1,1+0i,0+0i");
    }

    #[test]
    fn witness_examples() {
        assert_eq!(go_negative_witness(4.0 / 3.0, 2.0 / 3.0, 10).unwrap(), Some(2));
        assert!((go_eigen_product(4.0 / 3.0, 2.0 / 3.0, 2) + 1.0).abs() < 1e-15);
        assert_eq!(go_negative_witness(1.0, 1.0, 40).unwrap(), None);
        assert_eq!(go_negative_witness(1.01, 0.99, 10).unwrap(), Some(2));
        assert!((go_eigen_product(1.01, 0.99, 2) + 0.03).abs() < 1e-12);
    }

    #[test]
    fn witness_parameter_errors() {
        assert!(matches!(go_negative_witness(1.0, 0.5, 10), Err(Error::Parameter(_))));
        assert!(matches!(go_negative_witness(0.5, 1.5, 10), Err(Error::Parameter(_))));
        assert!(matches!(go_negative_witness(1.0, 1.0, 1), Err(Error::Parameter(_))));
    }
}
