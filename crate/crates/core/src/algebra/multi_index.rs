use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};

/// Exponent vector of a monomial `z^m = z_1^{m_1} ... z_n^{m_n}`.
///
/// Ordered graded-lexicographically: total degree first, then the exponent
/// vectors compared left to right with larger leading exponents first, so
/// that `z1^2 < z1*z2 < z2^2` and every degree block is finite.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct MultiIndex(Vec<u32>);

impl MultiIndex {
    pub fn new(exponents: Vec<u32>) -> Self {
        MultiIndex(exponents)
    }

    pub fn zero(nvars: usize) -> Self {
        MultiIndex(vec![0; nvars])
    }

    /// The index of the single variable `z_var`.
    pub fn unit(nvars: usize, var: usize) -> Self {
        let mut e = vec![0; nvars];
        e[var] = 1;
        MultiIndex(e)
    }

    pub fn nvars(&self) -> usize {
        self.0.len()
    }

    pub fn exponents(&self) -> &[u32] {
        &self.0
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(|&e| e == 0)
    }

    pub fn add(&self, other: &MultiIndex) -> MultiIndex {
        MultiIndex(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    /// `self - e_var`, or `None` when the exponent of `var` is zero.
    pub fn lower(&self, var: usize) -> Option<MultiIndex> {
        if self.0[var] == 0 {
            return None;
        }
        let mut e = self.0.clone();
        e[var] -= 1;
        Some(MultiIndex(e))
    }

    /// Evaluates the monomial `z^m` at a complex point.
    pub fn monomial(&self, point: &[num_complex::Complex64]) -> num_complex::Complex64 {
        self.0
            .iter()
            .zip(point)
            .fold(num_complex::Complex64::new(1.0, 0.0), |acc, (&e, z)| acc * z.powu(e))
    }

    /// All multi-indices in `nvars` variables with total degree `<= max_degree`,
    /// in graded-lex order (the zero index first).
    pub fn up_to_degree(nvars: usize, max_degree: u32) -> Vec<MultiIndex> {
        let mut out = Vec::new();
        for deg in 0..=max_degree {
            let mut block = Vec::new();
            compositions(nvars, deg, &mut Vec::with_capacity(nvars), &mut block);
            block.sort();
            out.extend(block);
        }
        out
    }
}

fn compositions(nvars: usize, remaining: u32, prefix: &mut Vec<u32>, out: &mut Vec<MultiIndex>) {
    if prefix.len() + 1 == nvars {
        prefix.push(remaining);
        out.push(MultiIndex(prefix.clone()));
        prefix.pop();
        return;
    }
    if nvars == 0 {
        return;
    }
    for e in 0..=remaining {
        prefix.push(e);
        compositions(nvars, remaining - e, prefix, out);
        prefix.pop();
    }
}

impl Ord for MultiIndex {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree().cmp(&other.degree()).then_with(|| other.0.cmp(&self.0))
    }
}

impl PartialOrd for MultiIndex {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for MultiIndex {
    /// `z1^2*z2`, or `1` for the zero index.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return write!(f, "1");
        }
        let mut first = true;
        for (i, &e) in self.0.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "z{}", i + 1)?;
            } else {
                write!(f, "z{}^{}", i + 1, e)?;
            }
        }
        Ok(())
    }
}
