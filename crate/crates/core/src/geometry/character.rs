//! Rank of the multiplicative group generated by homothety factors.
//!
//! The rank equals the dimension over `Q` of the span of `log f_i`. Integer
//! relations `Σ c_i log f_i = 0` with `|c_i| <= DENOMINATOR_BOUND` are found by
//! LLL reduction of the lattice spanned by `(e_i, N log f_i)`; when fewer
//! relations turn up than factors, the remainder is declared independent,
//! which is a heuristic conclusion.

use serde::Serialize;

use crate::error::{Error, Result};

pub const DENOMINATOR_BOUND: i64 = 50;
const RELATION_TOL: f64 = 1e-9;
/// Weight of the log coordinate; relation residuals near 1e-13 stay far
/// below one, non-relations with bounded coefficients far above.
const WEIGHT: f64 = 1e9;
const LOVASZ: f64 = 0.75;

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CharacterRank {
    pub rank: usize,
    /// True when independence (rank >= 2) was concluded from a failed search.
    pub heuristic: bool,
    pub label: String,
    pub denominator_bound: i64,
    /// Independent integer relations among the factors.
    pub relations: Vec<Relation>,
}

/// `Σ coefficients[i] · log f_i = 0`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Relation {
    pub coefficients: Vec<i64>,
}

pub fn character_rank(factors: &[f64]) -> Result<CharacterRank> {
    if factors.is_empty() {
        return Err(Error::Parameter("character_rank needs at least one factor".into()));
    }
    if let Some(bad) = factors.iter().find(|f| !(f.is_finite() && **f > 0.0)) {
        return Err(Error::Parameter(format!(
            "homothety factors must be positive, got {bad}"
        )));
    }
    let logs: Vec<f64> = factors.iter().map(|f| f.ln()).collect();
    let relations = integer_relations(&logs, DENOMINATOR_BOUND);
    let rank = logs.len() - relations.len();
    let heuristic = rank >= 2;
    let label = if heuristic {
        format!("rank >= {rank} (heuristic)")
    } else {
        format!("rank = {rank}")
    };
    Ok(CharacterRank {
        rank,
        heuristic,
        label,
        denominator_bound: DENOMINATOR_BOUND,
        relations,
    })
}

fn is_relation(c: &[i64], logs: &[f64], scale: f64, bound: i64) -> bool {
    if c.iter().all(|&v| v == 0) || c.iter().any(|v| v.abs() > bound) {
        return false;
    }
    let sum: f64 = c.iter().zip(logs).map(|(&n, l)| n as f64 * l).sum();
    let size: f64 = c.iter().zip(logs).map(|(&n, l)| (n as f64 * l).abs()).sum();
    sum.abs() <= RELATION_TOL * size.max(scale)
}

/// A basis of the relations with bounded coefficients, as found in the
/// LLL-reduced lattice.
fn integer_relations(logs: &[f64], bound: i64) -> Vec<Relation> {
    let n = logs.len();
    let scale = logs.iter().fold(0.0f64, |m, l| m.max(l.abs()));
    if scale < RELATION_TOL {
        return (0..n)
            .map(|i| Relation {
                coefficients: (0..n).map(|k| i64::from(k == i)).collect(),
            })
            .collect();
    }
    let mut rows: Vec<Vec<f64>> = (0..n)
        .map(|i| {
            let mut r = vec![0.0; n + 1];
            r[i] = 1.0;
            r[n] = WEIGHT * logs[i] / scale;
            r
        })
        .collect();
    lll(&mut rows);
    rows.iter()
        .map(|r| r[..n].iter().map(|v| v.round() as i64).collect::<Vec<i64>>())
        .filter(|c| is_relation(c, logs, scale, bound))
        .map(|coefficients| Relation { coefficients })
        .collect()
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Gram–Schmidt vectors' squared norms and coefficients `μ_{ij}`.
fn gram_schmidt(rows: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = rows.len();
    let mut star: Vec<Vec<f64>> = Vec::with_capacity(n);
    let mut norms = Vec::with_capacity(n);
    let mut mu = vec![vec![0.0; n]; n];
    for i in 0..n {
        let mut v = rows[i].clone();
        for j in 0..i {
            mu[i][j] = dot(&rows[i], &star[j]) / norms[j];
            v.iter_mut().zip(&star[j]).for_each(|(a, b)| *a -= mu[i][j] * b);
        }
        norms.push(dot(&v, &v));
        star.push(v);
    }
    (norms, mu)
}

fn lll(rows: &mut [Vec<f64>]) {
    let n = rows.len();
    let mut k = 1;
    let mut guard = 0;
    while k < n && guard < 100_000 {
        guard += 1;
        for j in (0..k).rev() {
            let (_, mu) = gram_schmidt(rows);
            let q = mu[k][j].round();
            if q != 0.0 {
                let rj = rows[j].clone();
                rows[k].iter_mut().zip(&rj).for_each(|(a, b)| *a -= q * b);
            }
        }
        let (norms, mu) = gram_schmidt(rows);
        if norms[k] >= (LOVASZ - mu[k][k - 1] * mu[k][k - 1]) * norms[k - 1] {
            k += 1;
        } else {
            rows.swap(k, k - 1);
            k = (k - 1).max(1);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_factor_has_rank_one() {
        let r = character_rank(&[4.0]).unwrap();
        assert_eq!(r.rank, 1);
        assert!(!r.heuristic);
    }

    #[test]
    fn powers_of_a_quarter_have_rank_one() {
        let r = character_rank(&[0.25, 1.0 / 16.0]).unwrap();
        assert_eq!(r.rank, 1);
        let c = &r.relations[0].coefficients;
        assert!(c == &vec![2, -1] || c == &vec![-2, 1], "{c:?}");
    }

    #[test]
    fn log_two_and_log_three_are_independent() {
        let r = character_rank(&[0.25, 1.0 / 9.0]).unwrap();
        assert_eq!(r.rank, 2);
        assert!(r.heuristic);
        assert_eq!(r.label, "rank >= 2 (heuristic)");
    }

    #[test]
    fn unit_factors_are_ignored() {
        assert_eq!(character_rank(&[1.0]).unwrap().rank, 0);
        assert_eq!(character_rank(&[1.0, 2.0, 8.0]).unwrap().rank, 1);
    }

    #[test]
    fn three_generators_with_one_relation() {
        // 6 = 2 * 3
        let r = character_rank(&[2.0, 3.0, 6.0]).unwrap();
        assert_eq!(r.rank, 2);
        assert_eq!(r.relations.len(), 1);
    }

    #[test]
    fn relation_outside_a_greedy_basis_is_found() {
        // in this order a relation against the first three needs a coefficient of 52
        let f = |p: i32, q: i32, r: i32| 2f64.powi(p) * 3f64.powi(q) * 5f64.powi(r);
        let mut factors = vec![f(0, 1, 0), f(-3, -2, 0), f(-1, 2, -3), f(-3, 2, 2), f(-1, 0, 0)];
        for _ in 0..factors.len() {
            assert_eq!(character_rank(&factors).unwrap().rank, 3);
            factors.rotate_left(1);
        }
    }

    #[test]
    fn invalid_factors_rejected() {
        assert!(character_rank(&[]).is_err());
        assert!(character_rank(&[0.0]).is_err());
        assert!(character_rank(&[-1.0]).is_err());
    }
}
