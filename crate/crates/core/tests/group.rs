use bergman_core::group::*;
use bergman_core::linalg::{expm, max_abs, CMatrix};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn random_element(seed: u64, scale: f64) -> GroupElement {
    let basis = Su21Basis::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let (x, _) = random_algebra(&basis, &mut rng, scale);
    exp_algebra(&x).unwrap()
}

#[test]
fn structure_constants_are_consistent() {
    let f = structure_constants(&su21_matrices()).unwrap();
    assert_eq!(f.dim, 8);
    assert!(f.projection_residual < 1e-12);
    assert!(f.antisymmetry_residual < 1e-14);
    assert!(f.jacobi_residual < 1e-12);
    assert!((f.get(2, 0, 1) + 2.0).abs() < 1e-12);
    assert_eq!(f.gram_diagonal.iter().filter(|&&g| g < 0.0).count(), 4);
}

#[test]
fn product_of_elements_stays_in_group() {
    let g = random_element(1, 1.5);
    let h = random_element(2, 1.5);
    let gh = g.mul(&h);
    assert!(gh.residual() < 1e-10);
    assert!((gh.mat.determinant() - bergman_core::linalg::ONE).norm() < 1e-9);
    assert!(max_abs(&(g.mul(&g.inverse()).mat - CMatrix::identity(3, 3))) < 1e-10);
}

#[test]
fn haar_density_rejects_negative_rapidity() {
    assert!(haar_density(-0.1).is_err());
    assert_eq!(haar_density(0.0).unwrap(), 0.0);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 64, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn cartan_factors_reassemble(seed in 0u64..10_000, scale in 0.05f64..3.0) {
        let g = random_element(seed, scale);
        let cf = cartan_decompose(&g).unwrap();
        prop_assert!(cf.t >= 0.0);
        prop_assert!(max_abs(&(cf.reassemble() - &g.mat)) < 1e-9 * g.mat.norm().max(1.0));
        prop_assert!(cf.k.residual() < 1e-9 && cf.q.residual() < 1e-9);
        prop_assert!((cf.k_phase().norm() - 1.0).abs() < 1e-10);
        prop_assert!((cf.q_phase() - bergman_core::linalg::ONE).norm() < 1e-12);
    }

    #[test]
    fn exponential_lands_in_group(seed in 0u64..10_000, scale in 0.0f64..4.0) {
        let basis = Su21Basis::new().unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let (x, xi) = random_algebra(&basis, &mut rng, scale);
        let g = exp_algebra(&x).unwrap();
        prop_assert!(g.residual() < 1e-10 * scale.max(1.0).powi(2));
        let back = basis.coordinates(&x.mat);
        for (a, b) in back.iter().zip(&xi) {
            prop_assert!((a - b).abs() < 1e-12);
        }
        let again = expm(&x.mat);
        prop_assert!(max_abs(&(again - &g.mat)) < 1e-12 * g.mat.norm());
    }
}
