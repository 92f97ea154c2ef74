use bergman_core::geometry::DomainPoint;
use bergman_core::group::{exp_algebra, GroupElement, Su21Basis};
use bergman_core::jet::Jet;
use bergman_core::linalg::c;
use bergman_core::spectral::*;
use bergman_core::C64;
use proptest::prelude::*;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sample_points(seed: u64, count: usize, rmax: f64) -> Vec<DomainPoint> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    while out.len() < count {
        let z = vec![
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)),
        ];
        if z.iter().map(|v| v.norm_sqr()).sum::<f64>() < rmax * rmax {
            out.push(DomainPoint::new(z).unwrap());
        }
    }
    out
}

#[test]
fn eigen_residuals_up_to_n_12() {
    let ns: Vec<u32> = (3..=12).collect();
    let table = residual_table(&ns, 2, &default_r_grid()).unwrap();
    assert_eq!(table.len(), ns.iter().map(|n| (n - 2) / 2 + 1).sum::<u32>() as usize);
    for row in &table {
        assert!(row.relative() <= 1e-8, "{row:?}");
        assert!(row.reduction_gap <= 1e-9 * row.max_abs_phi.max(1.0), "{row:?}");
    }
}

#[test]
fn other_ranks_leave_a_residual() {
    // the hypergeometric parameter c = m only solves the radial equation at m = 2
    let mode = SpectralMode::new(7, 2).unwrap();
    for m in [1, 3] {
        let r = eigen_residual(&mode, m, &default_r_grid()).unwrap();
        assert!(r.relative() > 1e-3, "{r:?}");
        assert!(r.reduction_gap <= 1e-8 * r.max_abs_phi.max(1.0));
    }
}

#[test]
fn eigenvalue_formulas_are_integer_identities() {
    for n in 3..=200 {
        for mode in discrete_spectrum(n, 2).unwrap() {
            assert_eq!(mode.eigenvalue, mode.eigenvalue_from_lambda());
            assert!(mode.eigenvalue <= 0);
        }
        assert_eq!(discrete_spectrum(n, 2).unwrap().len() as u32, (n - 2) / 2 + 1);
    }
}

#[test]
fn laplacian_commutes_with_boosts() {
    let mode = SpectralMode::new(5, 1).unwrap();
    let phi = eigenfunction(&mode, 2).unwrap();
    let f = |v: &[Jet]| phi.jet(&radius_jet(v));
    let g = GroupElement::boost(2, 0.3);
    let pts = sample_points(1, 20, 0.8);
    let rep = invariance_check(&g, f, 5, &pts).unwrap();
    assert!(rep.max_residual <= 1e-8, "{rep:?}");
    let id = GroupElement::identity(g.sig);
    assert!(invariance_check(&id, f, 5, &pts).unwrap().max_residual < 1e-13);
}

#[test]
fn rotations_fix_radial_functions() {
    let basis = Su21Basis::new().unwrap();
    let k = exp_algebra(&basis.element(&[0.3, -1.1, 0.4, 0.0, 0.0, 0.0, 0.0, 0.9])).unwrap();
    let phi = eigenfunction(&SpectralMode::new(8, 3).unwrap(), 2).unwrap();
    let f = |v: &[Jet]| phi.jet(&radius_jet(v));
    let rep = invariance_check(&k, f, 8, &sample_points(2, 20, 0.8)).unwrap();
    assert!(rep.max_residual <= 1e-12 * rep.max_value.max(1.0), "{rep:?}");
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    // holds for non-radial functions as well
    #[test]
    fn invariance_for_general_elements(seed in 0u64..10_000, n in 3u32..9) {
        let basis = Su21Basis::new().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, _) = bergman_core::group::random_algebra(&basis, &mut rng, 0.8);
        let g = exp_algebra(&x).unwrap();
        let f = |v: &[Jet]| {
            let r = radius_jet(v);
            let u = r.scale(C64::from(-1.0)).add_scalar(C64::from(1.0));
            &(&(&v[0] * &v[3]) + &v[1].powi(2)) * &u.powf(0.5)
        };
        let rep = invariance_check(&g, f, n, &sample_points(seed, 6, 0.7)).unwrap();
        prop_assert!(rep.max_residual <= 1e-9 * rep.max_value.max(1.0), "{:?}", rep);
    }
}
