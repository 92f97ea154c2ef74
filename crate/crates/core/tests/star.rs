use bergman_core::group::{exp_algebra, random_algebra, Su21Basis};
use bergman_core::star::*;
use bergman_core::C64;
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn dual_route_omega_agrees() {
    let basis = Su21Basis::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut worst, mut worst_swapped, mut worst_matrix) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..50 {
        let p = CoherentParam::random(&mut rng, (0.0, 0.4)).unwrap();
        let (x, _) = random_algebra(&basis, &mut rng, 0.6);
        let g = exp_algebra(&x).unwrap();
        let r = omega(&g, &p, 4).unwrap();
        worst = worst.max(r.route_gap);
        worst_swapped = worst_swapped.max(r.swapped_order_gap);
        worst_matrix = worst_matrix.max(r.matrix_formula_gap);
        assert!((r.reduction - r.reduction_closed_form).norm() < 1e-10);
    }
    eprintln!("route gap {worst:.2e}, swapped {worst_swapped:.2e}, matrix formula {worst_matrix:.2e}");
    assert!(worst <= 1e-7);
    assert!(worst_swapped > 1e-3);
}

#[test]
fn commutator_half_follows_structure_constants() {
    let f = Su21Basis::new().unwrap().f;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for n in [3, 5, 8] {
        let p = CoherentParam::random(&mut rng, (0.1, 0.4)).unwrap();
        let table = star_table(&p, n).unwrap();
        let r = table.commutator_residual(&f, BRACKET_SIGN);
        let r_unit = table.commutator_residual(&f, 1.0);
        eprintln!("N={n} P={} residual {r:.2e} unit-sign {r_unit:.2e}", table.p_used);
        assert!(r <= 1e-8);
        assert!(r_unit > 1e-3);
        for a in 0..8 {
            assert!(table.commutator_half(a, a).norm() == 0.0);
        }
    }
}

#[test]
fn casimir_symbol_is_constant() {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    for n in [3, 4, 7] {
        let q = Quantizer::new(n, 36).unwrap();
        for _ in 0..5 {
            let p = CoherentParam::random(&mut rng, (0.0, 0.4)).unwrap();
            let x = q.coherent_state(&p).unwrap();
            // exact up to the norm lost to truncation
            assert!((q.number_symbol(&x) - C64::from(n as f64) * x.vec.norm_squared()).norm() < 1e-12);
        }
    }
}

#[test]
fn symmetrised_symbols_match_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let p = CoherentParam::random(&mut rng, (0.1, 0.3)).unwrap();
    let n = 4;
    let q = Quantizer::new(n, 36).unwrap();
    let x = q.coherent_state(&p).unwrap();
    for idx in [vec![2], vec![5], vec![8], vec![1, 4], vec![5, 6], vec![8, 8], vec![3, 7]] {
        let exact = q.symmetrized_symbol(&idx, &x).unwrap();
        let fd = symmetrized_symbol_fd(&idx, &p, n, 1e-3).unwrap();
        assert!((exact - fd).norm() < 1e-5 * exact.norm().max(1.0), "{idx:?}: {exact} vs {fd}");
    }
}

#[test]
fn associativity_holds_and_is_rotation_invariant() {
    let mut rng = ChaCha8Rng::seed_from_u64(13);
    let p = CoherentParam::random(&mut rng, (0.1, 0.3)).unwrap();
    let k0 = random_compact(&mut rng);
    for abc in [[1, 1, 1], [4, 5, 8], [2, 7, 6], [5, 5, 3]] {
        let (r, r_rot) = associativity_check(abc, &p, &k0, 5).unwrap();
        assert!(r <= 1e-8 && r_rot <= 1e-8);
        assert!((r - r_rot).abs() <= 1e-10);
    }
}

#[test]
fn stability_group_phases() {
    let mut rng = ChaCha8Rng::seed_from_u64(17);
    for n in [3, 4, 6] {
        let p = CoherentParam::random(&mut rng, (0.1, 0.35)).unwrap();
        let k0 = random_compact(&mut rng);
        let r = stability_check(&p, &k0, 0.7, n).unwrap();
        assert!(r.m_phase_distance < 1e-12, "{r:?}");
        assert!(r.phase_residual < 1e-8, "{r:?}");
        assert!((r.measured_phase.norm() - 1.0).abs() < 1e-8);
    }
}

#[test]
fn deformation_coefficients_decay_like_one_over_n() {
    let ns: Vec<u32> = (4..=40).step_by(4).collect();
    let fit = fit_deformation_coeffs(&ns, &default_fit_params().unwrap()).unwrap();
    for e in &fit.estimates {
        eprintln!(
            "N={:>2} A={:+.4e} B={:+.4e} rms={:.2e} dev={:.3e} P={}",
            e.n, e.a_n, e.b_n, e.residual, e.pointwise_deviation, e.max_p_used
        );
        assert!(e.commutator_residual <= 1e-8);
    }
    eprintln!("slopes A {:.3} B {:.3} pointwise {:.3}", fit.a_slope, fit.b_slope, fit.pointwise_slope);
    assert!((fit.a_slope + 1.0).abs() <= 0.2);
    assert!((fit.b_slope + 1.0).abs() <= 0.2);
    assert!((fit.pointwise_slope + 1.0).abs() <= 0.2);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 12, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn coordinates_are_coadjoint_equivariant(seed in 0u64..10_000) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let p = CoherentParam::random(&mut rng, (0.0, 0.4)).unwrap();
        let k0 = random_compact(&mut rng);
        prop_assert!(equivariance_residual(&p, &k0, 4).unwrap() < 1e-8);
    }

    #[test]
    fn boost_coordinates_vanish_only_at_origin(t in 0.05f64..0.4) {
        let xi = xi_coords(&CoherentParam::boost(t).unwrap(), 4).unwrap().value.xi;
        prop_assert!(xi[3..7].iter().any(|v| v.abs() > 1e-3));
        let x0 = xi_coords(&CoherentParam::origin(), 4).unwrap().value.xi;
        prop_assert!(x0[3..7].iter().all(|v| v.abs() < 1e-15));
    }
}
