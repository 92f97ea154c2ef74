use bergman_core::geometry::*;
use bergman_core::group::{exp_algebra, random_algebra, GroupElement, Su21Basis};
use bergman_core::linalg::{c, max_abs, CMatrix};
use bergman_core::C64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn random_point(rng: &mut ChaCha8Rng, m: usize, rmax: f64) -> DomainPoint {
    loop {
        let z: Vec<C64> = (0..m).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let r: f64 = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if r <= rmax && r > 0.0 {
            return DomainPoint::new(z).unwrap();
        }
    }
}

#[test]
fn metric_matches_finite_difference_oracle() {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..50 {
        let z = random_point(&mut rng, 2, 0.9);
        let exact = metric(&z).g;
        let fd = metric_oracle(&z, 4, 1e-5);
        worst = worst.max(max_abs(&(&fd - &exact)) / max_abs(&exact));
    }
    assert!(worst <= 1e-6, "relative error {worst:.3e}");
}

#[test]
fn inverse_and_einstein_for_several_dimensions() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for m in 1..=3 {
        for _ in 0..20 {
            let z = random_point(&mut rng, m, 0.9);
            assert!(metric(&z).inverse_residual() <= 1e-12);
            let rep = ricci_and_scalar(&z);
            assert!(rep.kahler_einstein_residual <= 1e-9, "m={m}: {}", rep.kahler_einstein_residual);
            assert!(rep.einstein_residual <= 1e-9);
            assert!((rep.proportionality + (m as f64 + 1.0)).abs() < 1e-9);
            assert!((rep.scalar_contracted + (m * (m + 1)) as f64).abs() < 1e-9);
            assert!(rep.ricci_hermitian_residual < 1e-9);
        }
    }
}

#[test]
fn measure_is_normalised() {
    for n in 3..=8 {
        let (v, _) = normalization(n).unwrap();
        assert!((v - 1.0).abs() <= 1e-8, "N={n}: {v}");
    }
    let mc = normalization_mc(6, 200_000, 42).unwrap();
    assert!((mc.value - 1.0).abs() < 3e-3, "{mc:?}");
}

#[test]
fn mc_is_deterministic() {
    let a = normalization_mc(5, 20_000, 7).unwrap();
    let b = normalization_mc(5, 20_000, 7).unwrap();
    assert_eq!(a.value.to_bits(), b.value.to_bits());
}

#[test]
fn transported_measure_needs_the_multiplier() {
    let basis = Su21Basis::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let (x, _) = random_algebra(&basis, &mut rng, 0.6);
    let g = exp_algebra(&x).unwrap();
    let center = DomainPoint::new(vec![c(0.2, 0.1), c(-0.1, 0.15)]).unwrap();
    let rep = measure_invariance(&g, 4, bump(&center, 0.5), 40).unwrap();
    assert!(rep.with_multiplier_relative < 1e-5, "{rep:?}");
    assert!(rep.bare_relative > 1e-2, "{rep:?}");
}

#[test]
fn pullback_reverses_products() {
    let basis = Su21Basis::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(12);
    let f = |p: &DomainPoint| (p.z[0] + c(0.3, 0.0)) * (p.z[1] * p.z[1] - c(0.1, 0.2));
    for _ in 0..10 {
        let g1 = exp_algebra(&random_algebra(&basis, &mut rng, 0.8).0).unwrap();
        let g2 = exp_algebra(&random_algebra(&basis, &mut rng, 0.8).0).unwrap();
        let z = random_point(&mut rng, 2, 0.7);
        let rep = cocycle_check(&g1, &g2, 5, f, &z).unwrap();
        assert!(rep.reversed_order <= 1e-10, "{rep:?}");
    }
}

#[test]
fn compact_rotation_preserves_norm() {
    let k = CMatrix::from_fn(2, 2, |i, j| {
        let a = C64::from_polar(1.0, 0.3);
        let (s, co) = (0.4f64.sin(), 0.4f64.cos());
        [[a * co, a * s], [-a * s, a * co]][i][j]
    });
    let kd = C64::from_polar(1.0, -0.6);
    let g = GroupElement::compact(&k, kd).unwrap();
    let z = DomainPoint::new(vec![c(0.3, -0.2), c(0.1, 0.4)]).unwrap();
    let zp = mobius_action(&g, &z).unwrap();
    assert!((zp.r() - z.r()).abs() < 1e-14);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn mobius_stays_in_ball_and_composes(seed in 0u64..10_000, scale in 0.1f64..2.0) {
        let basis = Su21Basis::new().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let g1 = exp_algebra(&random_algebra(&basis, &mut rng, scale).0).unwrap();
        let g2 = exp_algebra(&random_algebra(&basis, &mut rng, scale).0).unwrap();
        let z = random_point(&mut rng, 2, 0.95);
        let a = mobius_action(&g1, &mobius_action(&g2, &z).unwrap()).unwrap();
        let b = mobius_action(&g1.mul(&g2), &z).unwrap();
        prop_assert!(1.0 - a.r() > 0.0);
        for k in 0..2 {
            prop_assert!((a.z[k] - b.z[k]).norm() < 1e-9);
        }
    }

    #[test]
    fn metric_is_hermitian_positive(x1 in -0.6f64..0.6, y1 in -0.6f64..0.6, x2 in -0.5f64..0.5, y2 in -0.5f64..0.5) {
        let z = DomainPoint::new(vec![c(x1, y1), c(x2, y2)]).unwrap();
        let g = metric(&z).g;
        prop_assert!(max_abs(&(&g - g.adjoint())) < 1e-14);
        let eig = nalgebra::DMatrix::from_fn(4, 4, |i, j| {
            // real symmetric form of the Hermitian matrix
            let (a, b) = (i % 2, j % 2);
            let v = g[(i / 2, j / 2)];
            match (a, b) { (0, 0) | (1, 1) => v.re, (0, 1) => -v.im, _ => v.im }
        }).symmetric_eigenvalues();
        prop_assert!(eig.min() > 0.0);
    }
}
