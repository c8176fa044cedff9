use std::collections::BTreeMap;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::MultiIndex;
use crate::error::{Error, Result};

/// Truncated power series in `z` and `z̄`:
/// `Σ a_{jk} z^{m_j} z̄^{m_k}` with `deg m_j <= d` and `deg m_k <= d`.
///
/// `hermitian` marks series that represent real-valued functions, for which
/// `a_{jk} = conj(a_{kj})`.
#[derive(Clone, Debug, PartialEq)]
pub struct BiSeries {
    nvars: usize,
    max_degree: u32,
    hermitian: bool,
    coeffs: BTreeMap<(MultiIndex, MultiIndex), Complex64>,
}

/// One `{j, k, re, im}` entry of the JSON form.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesTerm {
    pub j: Vec<u32>,
    pub k: Vec<u32>,
    pub re: f64,
    pub im: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SeriesJson {
    pub nvars: usize,
    pub max_degree: u32,
    pub hermitian: bool,
    pub terms: Vec<SeriesTerm>,
}

impl BiSeries {
    pub fn zero(nvars: usize, max_degree: u32) -> Self {
        BiSeries {
            nvars,
            max_degree,
            hermitian: true,
            coeffs: BTreeMap::new(),
        }
    }

    pub fn constant(nvars: usize, max_degree: u32, value: f64) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        s.insert(
            MultiIndex::zero(nvars),
            MultiIndex::zero(nvars),
            Complex64::new(value, 0.0),
        );
        s
    }

    /// A single monomial `c z^j z̄^k`. Not flagged Hermitian unless `j == k`
    /// and `c` is real.
    pub fn monomial(max_degree: u32, j: MultiIndex, k: MultiIndex, c: Complex64) -> Result<Self> {
        if j.nvars() != k.nvars() {
            return Err(Error::Dimension {
                expected: j.nvars(),
                got: k.nvars(),
            });
        }
        let hermitian = j == k && c.im == 0.0;
        let mut s = Self::zero(j.nvars(), max_degree);
        s.hermitian = hermitian;
        s.insert(j, k, c);
        Ok(s)
    }

    /// The holomorphic coordinate `z_var`.
    pub fn variable(nvars: usize, max_degree: u32, var: usize) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        s.hermitian = false;
        s.insert(
            MultiIndex::unit(nvars, var),
            MultiIndex::zero(nvars),
            Complex64::new(1.0, 0.0),
        );
        s
    }

    /// The antiholomorphic coordinate `z̄_var`.
    pub fn conj_variable(nvars: usize, max_degree: u32, var: usize) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        s.hermitian = false;
        s.insert(
            MultiIndex::zero(nvars),
            MultiIndex::unit(nvars, var),
            Complex64::new(1.0, 0.0),
        );
        s
    }

    /// `|z_var|^2`.
    pub fn abs_sq(nvars: usize, max_degree: u32, var: usize) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        let e = MultiIndex::unit(nvars, var);
        s.insert(e.clone(), e, Complex64::new(1.0, 0.0));
        s
    }

    /// `‖z‖^2 = Σ |z_i|^2`.
    pub fn norm_sq(nvars: usize, max_degree: u32) -> Self {
        let mut s = Self::zero(nvars, max_degree);
        for var in 0..nvars {
            let e = MultiIndex::unit(nvars, var);
            s.insert(e.clone(), e, Complex64::new(1.0, 0.0));
        }
        s
    }

    pub fn from_terms(
        nvars: usize,
        max_degree: u32,
        hermitian: bool,
        terms: impl IntoIterator<Item = (MultiIndex, MultiIndex, Complex64)>,
    ) -> Result<Self> {
        let mut s = Self::zero(nvars, max_degree);
        s.hermitian = hermitian;
        for (j, k, c) in terms {
            if j.nvars() != nvars || k.nvars() != nvars {
                return Err(Error::Dimension {
                    expected: nvars,
                    got: j.nvars().max(k.nvars()),
                });
            }
            let slot = s.coeffs.entry((j, k)).or_insert(Complex64::new(0.0, 0.0));
            *slot += c;
        }
        s.truncate_in_place();
        Ok(s)
    }

    fn insert(&mut self, j: MultiIndex, k: MultiIndex, c: Complex64) {
        if j.degree() <= self.max_degree && k.degree() <= self.max_degree && c != Complex64::new(0.0, 0.0) {
            self.coeffs.insert((j, k), c);
        }
    }

    fn truncate_in_place(&mut self) {
        let d = self.max_degree;
        self.coeffs
            .retain(|(j, k), c| j.degree() <= d && k.degree() <= d && *c != Complex64::new(0.0, 0.0));
    }

    pub fn nvars(&self) -> usize {
        self.nvars
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    pub fn is_hermitian_flagged(&self) -> bool {
        self.hermitian
    }

    /// Overrides the real-valued flag, e.g. after assembling a real function
    /// from non-real pieces.
    pub fn with_hermitian_flag(mut self, hermitian: bool) -> Self {
        self.hermitian = hermitian;
        self
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn coeff(&self, j: &MultiIndex, k: &MultiIndex) -> Complex64 {
        self.coeffs
            .get(&(j.clone(), k.clone()))
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    pub fn terms(&self) -> impl Iterator<Item = (&MultiIndex, &MultiIndex, &Complex64)> {
        self.coeffs.iter().map(|((j, k), c)| (j, k, c))
    }

    /// Constant coefficient `a_{00}`.
    pub fn constant_term(&self) -> Complex64 {
        let z = MultiIndex::zero(self.nvars);
        self.coeff(&z, &z)
    }

    /// Largest `|a_{jk} - conj(a_{kj})|` over all stored entries.
    pub fn hermitian_defect(&self) -> f64 {
        self.coeffs
            .iter()
            .map(|((j, k), c)| (c - self.coeff(k, j).conj()).norm())
            .fold(0.0, f64::max)
    }

    /// Checks `a_{jk} = conj(a_{kj})` to an absolute-plus-relative tolerance.
    pub fn is_hermitian(&self, tol: f64) -> bool {
        let scale = self.coeffs.values().map(|c| c.norm()).fold(1.0, f64::max);
        self.hermitian_defect() <= tol * scale
    }

    fn check_compatible(&self, other: &BiSeries) -> Result<()> {
        if self.nvars != other.nvars {
            return Err(Error::Dimension {
                expected: self.nvars,
                got: other.nvars,
            });
        }
        Ok(())
    }

    pub fn add(&self, other: &BiSeries) -> Result<BiSeries> {
        self.check_compatible(other)?;
        let mut out = BiSeries {
            nvars: self.nvars,
            max_degree: self.max_degree.min(other.max_degree),
            hermitian: self.hermitian && other.hermitian,
            coeffs: self.coeffs.clone(),
        };
        for (key, c) in &other.coeffs {
            *out.coeffs.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        out.truncate_in_place();
        Ok(out)
    }

    pub fn sub(&self, other: &BiSeries) -> Result<BiSeries> {
        self.add(&other.scale_real(-1.0))
    }

    pub fn scale_real(&self, factor: f64) -> BiSeries {
        self.scale(Complex64::new(factor, 0.0))
            .with_hermitian_flag(self.hermitian)
    }

    /// Multiplies every coefficient by `factor`; drops the Hermitian flag
    /// unless `factor` is real.
    pub fn scale(&self, factor: Complex64) -> BiSeries {
        let mut out = self.clone();
        for c in out.coeffs.values_mut() {
            *c *= factor;
        }
        out.hermitian = self.hermitian && factor.im == 0.0;
        out.truncate_in_place();
        out
    }

    pub fn mul(&self, other: &BiSeries) -> Result<BiSeries> {
        self.check_compatible(other)?;
        let d = self.max_degree.min(other.max_degree);
        let mut acc: BTreeMap<(MultiIndex, MultiIndex), Complex64> = BTreeMap::new();
        for ((j1, k1), c1) in &self.coeffs {
            if j1.degree() > d || k1.degree() > d {
                continue;
            }
            for ((j2, k2), c2) in &other.coeffs {
                if j1.degree() + j2.degree() > d || k1.degree() + k2.degree() > d {
                    continue;
                }
                *acc.entry((j1.add(j2), k1.add(k2))).or_insert(Complex64::new(0.0, 0.0)) += c1 * c2;
            }
        }
        let mut out = BiSeries {
            nvars: self.nvars,
            max_degree: d,
            hermitian: self.hermitian && other.hermitian,
            coeffs: acc,
        };
        out.truncate_in_place();
        Ok(out)
    }

    /// `self^n` by repeated squaring.
    pub fn powi(&self, n: u32) -> BiSeries {
        let mut result = BiSeries::constant(self.nvars, self.max_degree, 1.0);
        let mut base = self.clone();
        let mut e = n;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&base).expect("same nvars");
            }
            e >>= 1;
            if e > 0 {
                base = base.mul(&base).expect("same nvars");
            }
        }
        result.hermitian = self.hermitian;
        result
    }

    /// Splits `self = a0 + x` with `x(0) = 0`.
    fn split_constant(&self) -> (Complex64, BiSeries) {
        let a0 = self.constant_term();
        let mut x = self.clone();
        let z = MultiIndex::zero(self.nvars);
        x.coeffs.remove(&(z.clone(), z));
        (a0, x)
    }

    /// Composes a scalar Taylor series `Σ t_n x^n` (with `x = self - self(0)`).
    /// Since `x` has no constant term, `x^n` vanishes for `n > 2d`.
    fn compose_taylor(&self, taylor: impl Fn(u32) -> Complex64) -> BiSeries {
        let (_, x) = self.split_constant();
        let d = self.max_degree;
        let mut out = BiSeries::constant(self.nvars, d, 0.0);
        out.insert(MultiIndex::zero(self.nvars), MultiIndex::zero(self.nvars), taylor(0));
        let mut power = BiSeries::constant(self.nvars, d, 1.0);
        for n in 1..=(2 * d) {
            power = power.mul(&x).expect("same nvars");
            if power.is_empty() {
                break;
            }
            let t = taylor(n);
            for (key, c) in &power.coeffs {
                *out.coeffs.entry(key.clone()).or_insert(Complex64::new(0.0, 0.0)) += t * c;
            }
        }
        out.truncate_in_place();
        out
    }

    pub fn exp(&self) -> BiSeries {
        let (a0, _) = self.split_constant();
        let e0 = a0.exp();
        // t_n = e^{a0} / n!
        let mut factorials = vec![1.0f64];
        for n in 1..=(2 * self.max_degree as usize + 1) {
            factorials.push(factorials[n - 1] * n as f64);
        }
        let mut out = self.compose_taylor(|n| e0 / factorials[n as usize]);
        out.hermitian = self.hermitian;
        out
    }

    /// `self^r` for real `r`, expanded around the (real, positive) constant term.
    pub fn rpow(&self, r: f64) -> Result<BiSeries> {
        let (a0, _) = self.split_constant();
        if a0.im.abs() > 1e-14 * a0.norm().max(1.0) || a0.re <= 0.0 {
            return Err(Error::Domain(format!(
                "rpow needs a real positive constant term, got {a0}"
            )));
        }
        let base = a0.re;
        // t_n = a0^r * binom(r, n) * a0^{-n}
        let n_max = 2 * self.max_degree as usize + 1;
        let mut coef = Vec::with_capacity(n_max + 1);
        let mut binom = 1.0;
        for n in 0..=n_max {
            if n > 0 {
                binom *= (r - (n as f64 - 1.0)) / n as f64;
            }
            coef.push(base.powf(r) * binom * base.powi(-(n as i32)));
        }
        let mut out = self.compose_taylor(|n| Complex64::new(coef[n as usize], 0.0));
        out.hermitian = self.hermitian;
        Ok(out)
    }

    /// Removes every term that is holomorphic or antiholomorphic alone
    /// (`m_j = 0` or `m_k = 0`, including the constant).
    pub fn pure_part_removal(&self) -> BiSeries {
        let mut out = self.clone();
        out.coeffs.retain(|(j, k), _| !j.is_zero() && !k.is_zero());
        out
    }

    /// True when no entry has `m_j = 0` or `m_k = 0`.
    pub fn has_no_pure_part(&self) -> bool {
        self.coeffs.keys().all(|(j, k)| !j.is_zero() && !k.is_zero())
    }

    /// `Σ a_{jk} z^{m_j} conj(w)^{m_k}`: the polarization evaluated at `(z, w̄)`.
    pub fn eval_polarized(&self, z: &[Complex64], w: &[Complex64]) -> Complex64 {
        let wbar: Vec<Complex64> = w.iter().map(|c| c.conj()).collect();
        let mut sum = Complex64::new(0.0, 0.0);
        for ((j, k), c) in &self.coeffs {
            sum += c * j.monomial(z) * k.monomial(&wbar);
        }
        sum
    }

    pub fn eval(&self, z: &[Complex64]) -> Complex64 {
        self.eval_polarized(z, z)
    }

    /// Complex Hessian `∂²/∂z_a∂z̄_b` of the series at a point.
    pub fn hessian_at(&self, z: &[Complex64]) -> DMatrix<Complex64> {
        let n = self.nvars;
        let zbar: Vec<Complex64> = z.iter().map(|c| c.conj()).collect();
        let mut h = DMatrix::from_element(n, n, Complex64::new(0.0, 0.0));
        for ((j, k), c) in &self.coeffs {
            for a in 0..n {
                let Some(ja) = j.lower(a) else { continue };
                let hol = ja.monomial(z) * j.exponents()[a] as f64;
                for b in 0..n {
                    let Some(kb) = k.lower(b) else { continue };
                    h[(a, b)] += c * hol * kb.monomial(&zbar) * k.exponents()[b] as f64;
                }
            }
        }
        h
    }

    pub fn to_json(&self) -> SeriesJson {
        SeriesJson {
            nvars: self.nvars,
            max_degree: self.max_degree,
            hermitian: self.hermitian,
            terms: self
                .coeffs
                .iter()
                .map(|((j, k), c)| SeriesTerm {
                    j: j.exponents().to_vec(),
                    k: k.exponents().to_vec(),
                    re: c.re,
                    im: c.im,
                })
                .collect(),
        }
    }

    pub fn from_json(json: &SeriesJson) -> Result<BiSeries> {
        BiSeries::from_terms(
            json.nvars,
            json.max_degree,
            json.hermitian,
            json.terms.iter().map(|t| {
                (
                    MultiIndex::new(t.j.clone()),
                    MultiIndex::new(t.k.clone()),
                    Complex64::new(t.re, t.im),
                )
            }),
        )
    }
}

impl Serialize for BiSeries {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_json().serialize(serializer)
    }
}
