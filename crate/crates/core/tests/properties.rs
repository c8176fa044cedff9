use calabi_kit::algebra::{BiSeries, MultiIndex, C64};
use calabi_kit::calabi::{calabi_matrix, diastasis_from_potential, go_negative_witness, resolvability};
use calabi_kit::geometry::{character_rank, homothety_factor, lck_residual, metric_from_potential, HessianMethod};
use calabi_kit::immersions::{EllipticMap, ImmersionMap, InoueMap, KodairaMap};
use calabi_kit::surfaces::{build_surface, go_potential, go_residual, Elliptic, GoParams, Inoue, Kodaira};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const D: u32 = 2;

fn term() -> impl Strategy<Value = (MultiIndex, MultiIndex, C64)> {
    (0..=D, 0..=D, 0..=D, 0..=D, -1.0..1.0f64, -1.0..1.0f64).prop_filter_map("degree", |(a, b, c, e, re, im)| {
        (a + b <= D && c + e <= D).then(|| {
            (
                MultiIndex::new(vec![a, b]),
                MultiIndex::new(vec![c, e]),
                C64::new(re, im),
            )
        })
    })
}

fn series() -> impl Strategy<Value = BiSeries> {
    prop::collection::vec(term(), 0..8).prop_map(|t| BiSeries::from_terms(2, D, false, t).unwrap())
}

/// `s + s*`, which is Hermitian.
fn hermitian() -> impl Strategy<Value = BiSeries> {
    prop::collection::vec(term(), 0..6).prop_map(|t| {
        let mirrored = t.iter().map(|(j, k, c)| (k.clone(), j.clone(), c.conj()));
        BiSeries::from_terms(2, D, true, t.clone().into_iter().chain(mirrored)).unwrap()
    })
}

fn distance(a: &BiSeries, b: &BiSeries) -> f64 {
    a.sub(b).unwrap().terms().map(|(_, _, c)| c.norm()).fold(0.0, f64::max)
}

fn point(lim: f64) -> impl Strategy<Value = Vec<C64>> {
    prop::collection::vec((-lim..lim, -lim..lim).prop_map(|(re, im)| C64::new(re, im)), 2)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn ring_laws(a in series(), b in series(), c in series()) {
        let ab = a.mul(&b).unwrap();
        prop_assert!(distance(&ab, &b.mul(&a).unwrap()) < 1e-12);
        prop_assert!(distance(&ab.mul(&c).unwrap(), &a.mul(&b.mul(&c).unwrap()).unwrap()) < 1e-12);
        let left = a.add(&b).unwrap().mul(&c).unwrap();
        let right = a.mul(&c).unwrap().add(&b.mul(&c).unwrap()).unwrap();
        prop_assert!(distance(&left, &right) < 1e-12);
    }

    #[test]
    fn hermitian_products_stay_hermitian(a in hermitian(), b in hermitian()) {
        prop_assert!(a.mul(&b).unwrap().hermitian_defect() < 1e-12);
        prop_assert!(a.exp().hermitian_defect() < 1e-10);
    }

    #[test]
    fn exp_inverse(a in series()) {
        let one = a.exp().mul(&a.scale_real(-1.0).exp()).unwrap();
        prop_assert!(distance(&one, &BiSeries::constant(2, D, 1.0)) < 1e-9);
    }

    #[test]
    fn pure_part_removal_is_idempotent(a in series()) {
        let once = a.pure_part_removal();
        prop_assert!(once.has_no_pure_part());
        prop_assert_eq!(once.pure_part_removal(), once);
    }

    #[test]
    fn witness_is_two_below_equal_moduli(a in 1.0f64 + 1e-9..2.0) {
        prop_assert_eq!(go_negative_witness(a, 2.0 - a, 40).unwrap(), Some(2));
    }

    #[test]
    fn character_rank_ignores_order_and_inversion(
        exps in prop::collection::vec((-3i32..=3, -3i32..=3, -3i32..=3), 1..6),
        flip in any::<u8>(),
        rot in 0usize..6,
    ) {
        let base = [2f64.ln(), 3f64.ln(), 5f64.ln()];
        let factors: Vec<f64> = exps
            .iter()
            .map(|&(p, q, r)| (p as f64 * base[0] + q as f64 * base[1] + r as f64 * base[2]).exp())
            .collect();
        let mut changed: Vec<f64> = factors
            .iter()
            .enumerate()
            .map(|(i, f)| if flip >> (i % 8) & 1 == 1 { 1.0 / f } else { *f })
            .collect();
        let len = changed.len();
        changed.rotate_left(rot % len);
        prop_assert_eq!(character_rank(&factors).unwrap().rank, character_rank(&changed).unwrap().rank);
    }

    #[test]
    fn go_rotation_invariance_and_homothety(
        a in 1.0f64..1.9,
        z in point(2.0),
        t1 in 0.0..6.3f64,
        t2 in 0.0..6.3f64,
        alpha in 1.1f64..4.0,
    ) {
        prop_assume!(z[0].norm() + z[1].norm() > 1e-3);
        let p = GoParams::new(a, 2.0 - a).unwrap();
        prop_assert!(go_residual(&p, &z).unwrap() < 1e-12);
        let phi = go_potential(&p, &z).unwrap();
        let rotated = [z[0] * C64::from_polar(1.0, t1), z[1] * C64::from_polar(1.0, t2)];
        prop_assert!((go_potential(&p, &rotated).unwrap() - phi).abs() <= 1e-12 * phi);
        // |α|^{2/a} = |α||β| when |β| = |α|^{(2-a)/a}
        let beta = alpha.powf((2.0 - a) / a);
        let scaled = [z[0] * alpha, z[1] * beta];
        prop_assert!((go_potential(&p, &scaled).unwrap() - alpha * beta * phi).abs() <= 1e-11 * alpha * beta * phi);
    }

    #[test]
    fn conformal_lck_identity(k in 1u32..5, z in point(1.5), a in 1.0f64..1.8) {
        prop_assume!(z[0].norm_sqr() + z[1].norm_sqr() > 0.05);
        let parton = build_surface(&format!("parton:k={k}")).unwrap();
        prop_assert!(lck_residual(&parton.lck_metric(), &z).unwrap() < 1e-5);
        let hopf = build_surface(&format!("hopf:a={a},b={}", 2.0 - a)).unwrap();
        prop_assert!(lck_residual(&hopf.lck_metric(), &z).unwrap() < 1e-5);
    }

    #[test]
    fn tail_bounds_dominate_the_tail(j0 in 0usize..25, q in 0.0f64..0.8, t in 0.0..6.3f64, x in -1.5f64..1.5, y in -1.0f64..1.0) {
        let ell = Elliptic::from_ratio(C64::from_polar(q, t), C64::new(1.2, 0.3));
        let kod = vec![C64::new(x, y), C64::new(0.4, y)];
        let ino = vec![C64::new(x, 0.0), C64::from_polar(q, t)];
        let maps: [(&dyn ImmersionMap, &Vec<C64>); 3] = [(&EllipticMap, &ell), (&KodairaMap, &kod), (&InoueMap, &ino)];
        for (map, z) in maps {
            let bound = map.tail_bound(j0, z);
            let (mut value, mut jac) = (0.0, 0.0);
            for j in j0..j0 + 400 {
                value += map.component(j, z).norm_sqr();
                jac += map.jacobian_row(j, z).iter().map(|c| c.norm_sqr()).sum::<f64>();
            }
            prop_assert!(value <= bound.value * (1.0 + 1e-12) + 1e-300, "{} value {} > {}", map.name(), value, bound.value);
            prop_assert!(jac <= bound.jacobian * (1.0 + 1e-12) + 1e-300, "{} jacobian {} > {}", map.name(), jac, bound.jacobian);
        }
    }

    #[test]
    fn series_metric_matches_finite_differences(z in point(0.3), k in 1u32..5) {
        for s in [build_surface("kodaira").unwrap(), build_surface(&format!("parton:k={k}")).unwrap()] {
            let series = metric_from_potential(&s.potential(), &z, HessianMethod::Series).unwrap().matrix;
            let fd = metric_from_potential(&s.potential(), &z, HessianMethod::FiniteDifference).unwrap().matrix;
            let exact = s.covering_metric().coeff(&z);
            prop_assert!((&series - &exact).norm() <= 1e-10 * exact.norm(), "{}", s.family());
            prop_assert!((&fd - &series).norm() <= 1e-6 * series.norm(), "{}", s.family());
        }
    }

    #[test]
    fn homothety_factors_multiply(seed in 0u64..1000, i in 0usize..4, j in 0usize..4) {
        for s in [build_surface("elliptic").unwrap(), build_surface("kodaira").unwrap(), build_surface("inoue").unwrap()] {
            let decks = s.deck_maps();
            let (g1, g2) = (&decks[i % decks.len()], &decks[j % decks.len()]);
            let samples = s.sample_points(&mut ChaCha8Rng::seed_from_u64(seed), 6);
            let metric = s.covering_metric();
            let f1 = homothety_factor(g1, &metric, &samples).factor;
            let f2 = homothety_factor(g2, &metric, &samples).factor;
            let f12 = homothety_factor(&g1.compose(g2), &metric, &samples).factor;
            prop_assert!((f12 - f1 * f2).abs() <= 1e-8 * f12.abs(), "{}: {} vs {}", s.family(), f12, f1 * f2);
        }
    }
}

#[test]
fn rank_is_monotone_in_truncation() {
    let rank =
        |phi: BiSeries| resolvability(&calabi_matrix(&diastasis_from_potential(&phi).unwrap()).unwrap(), 1e-9).rank;
    let parton = build_surface("parton:k=3").unwrap();
    type Family = (&'static str, Box<dyn Fn(u32) -> BiSeries>);
    let families: [Family; 3] = [
        ("kodaira", Box::new(Kodaira::series)),
        ("inoue", Box::new(Inoue::disc_series)),
        ("parton", Box::new(move |d| parton.potential_series(d).unwrap())),
    ];
    for (name, make) in families {
        let ranks: Vec<usize> = (1..=6).map(|d| rank(make(d))).collect();
        assert!(ranks.windows(2).all(|w| w[0] <= w[1]), "{name}: {ranks:?}");
    }
}
