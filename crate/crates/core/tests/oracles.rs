//! Derived values against closed forms computed here, independently of the
//! library's series and solver code.

use calabi_kit::algebra::{MultiIndex, C64};
use calabi_kit::calabi::{calabi_matrix, diastasis_from_potential, go_eigen_product, resolvability};
use calabi_kit::immersions::{norm_squared, EllipticMap};
use calabi_kit::surfaces::{build_surface, Elliptic, GoParams, InoueData, Kodaira, Surface};
use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn factorial(n: u32) -> f64 {
    (1..=n).map(f64::from).product()
}

fn binomial(n: u32, k: u32) -> f64 {
    factorial(n) / (factorial(k) * factorial(n - k))
}

#[test]
fn kodaira_calabi_matrix_is_a_gram_matrix() {
    // Φ = Σ_p |v_p|^2 with v_p = z^p e^{-iw/4} / (2^p √p!), so the entry at
    // ((p, q), (p', q')) is δ_{pp'} (1/(4^p p!)) (-i/4)^q (i/4)^{q'} / (q! q'!)
    for d in 1..=4u32 {
        let a = calabi_matrix(&diastasis_from_potential(&Kodaira::series(d)).unwrap()).unwrap();
        let coef = |m: &MultiIndex| {
            let (p, q) = (m.exponents()[0], m.exponents()[1]);
            let w = C64::new(0.0, -0.25).powu(q) / factorial(q);
            (p, w / (2f64.powi(p as i32) * factorial(p).sqrt()))
        };
        let labels = a.labels();
        for (r, lr) in labels.iter().enumerate() {
            for (c, lc) in labels.iter().enumerate() {
                let ((p, u), (pp, v)) = (coef(lr), coef(lc));
                let expected = if p == pp { u * v.conj() } else { C64::new(0.0, 0.0) };
                let got = a.entries()[(r, c)];
                assert!((got - expected).norm() < 1e-14, "d={d} {lr} {lc}: {got} vs {expected}");
            }
        }
        assert_eq!(resolvability(&a, 1e-9).rank, d as usize + 1);
    }
}

#[test]
fn parton_calabi_matrix_is_multinomial_diagonal() {
    // ‖z‖^{2k}/k = Σ_{|m|=k} C(k, m_1)/k |z^m|^2
    for k in 1..=5u32 {
        let s = build_surface(&format!("parton:k={k}")).unwrap();
        let a = calabi_matrix(&diastasis_from_potential(&s.potential_series(k).unwrap()).unwrap()).unwrap();
        for (r, lr) in a.labels().iter().enumerate() {
            for (c, lc) in a.labels().iter().enumerate() {
                let e = lr.exponents();
                let expected = if r == c && lr.degree() == k {
                    binomial(k, e[0]) / k as f64
                } else {
                    0.0
                };
                assert!(
                    (a.entries()[(r, c)] - C64::new(expected, 0.0)).norm() < 1e-12,
                    "k={k} {lr} {lc}"
                );
            }
        }
    }
}

#[test]
fn inoue_spectrum_of_the_companion_matrix() {
    let data = InoueData::new([0, 1, 0, 0, 0, 1, 1, 1, 0]).unwrap();
    let (mut lo, mut hi) = (1.0f64, 2.0f64);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid.powi(3) - mid - 1.0 < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    assert!((data.rho - lo).abs() < 1e-12);
    assert!((data.rho - 1.324_717_957_244_746).abs() < 1e-12);
    // ρ|μ|^2 = det M = 1 and μ is a root of the same cubic
    assert!((data.mu.norm_sqr() - 1.0 / lo).abs() < 1e-12);
    assert!((data.mu.powu(3) - data.mu - 1.0).norm() < 1e-12);
    assert!((data.mu.norm_sqr() - 0.754_878).abs() < 1e-6);
}

#[test]
fn elliptic_norm_is_a_quarter_of_the_potential() {
    // ‖F‖^2 = Σ |q|^{2j}/|d|^2 = 1/(|d|^2 (1 - |q|^2)) and -1/t = 4/(|d|^2 (1 - |q|^2))
    let mut rng = ChaCha8Rng::seed_from_u64(21);
    let pot = Elliptic.potential();
    for _ in 0..20 {
        let q = C64::from_polar(rng.random_range(0.0..0.8), rng.random_range(0.0..TAU));
        let d = C64::from_polar(rng.random_range(0.5..2.0), rng.random_range(0.0..TAU));
        let z = Elliptic::from_ratio(q, d);
        let closed = 1.0 / (d.norm_sqr() * (1.0 - q.norm_sqr()));
        let n = norm_squared(&EllipticMap, &z).unwrap().value;
        assert!((n - closed).abs() < 1e-9 * closed);
        assert!((pot.evaluate(&z).unwrap() / 4.0 - closed).abs() < 1e-9 * closed);
    }
}

#[test]
fn go_products_by_hand() {
    // a = 4/3, b = 2/3: j = 2 gives b + 1 - 2a = -1
    let p = GoParams::from_moduli(4.0, 2.0).unwrap();
    assert!((p.a - 4.0 / 3.0).abs() < 1e-15);
    assert!((go_eigen_product(p.a, p.b, 2) + 1.0).abs() < 1e-14);
    // j = 3: (b + 1 - 3a)(2b + 1 - 3a) = (-7/3)(-5/3)
    assert!((go_eigen_product(p.a, p.b, 3) - 35.0 / 9.0).abs() < 1e-13);
    // a = b = 1: ∏ (k + 1 - j) vanishes at k = j - 1
    for j in 2..10 {
        assert_eq!(go_eigen_product(1.0, 1.0, j), 0.0);
    }
}
