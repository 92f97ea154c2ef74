use bergman_core::qft::*;
use proptest::prelude::*;

#[test]
fn positivity_examples() {
    let free = positivity_domain(&FieldParams::massless(50, 0.1).unwrap(), (3, 50));
    assert!(free.negative.is_empty());
    assert_eq!(free.zero.len(), 48);
    assert!(free.zero.iter().all(|&(_, l)| l == 0));
    let curved = positivity_domain(&FieldParams::new(0.0, 0.1, 1.0, 50, 0.1).unwrap(), (3, 50));
    assert!(curved.negative.iter().all(|&(_, l)| l == 0) && curved.negative.len() == 48);
    assert!(!curved.xi_vanishes);
    let massive = positivity_domain(&FieldParams::new(1.0, 0.0, 1.0, 50, 0.1).unwrap(), (3, 50));
    assert!(massive.min_denominator > 0.0);
}

#[test]
fn propagator_reflection_symmetry() {
    let p = FieldParams::new(0.7, 0.1, 1.0, 60, 0.1).unwrap();
    for n in 3..60u32 {
        for l in 0..=(n - 2) / 2 {
            assert_eq!(denominator(n, l, &p), denominator(n, n - 2 - l, &p));
        }
    }
}

#[test]
fn gap_to_closed_form_shrinks() {
    let gaps = closed_form_gaps(&[50, 100, 200, 400], 0.1).unwrap();
    eprintln!("{gaps:?}");
    assert!(gaps.windows(2).all(|w| w[1].1 < w[0].1));
}

#[test]
fn epsilon_divergence_is_logarithmic() {
    let d = epsilon_divergence(200, &[1e-2, 1e-3, 1e-4, 1e-6, 1e-8], 1.0).unwrap();
    assert!(d.relative_error < 0.05, "{d:?}");
}

#[test]
fn fast_path_matches_direct_sum() {
    let h = harmonic_table(2000);
    for cut in [10, 137, 2000] {
        let p = FieldParams::massless(cut, 0.01).unwrap();
        let direct = tadpole_direct(&p, Regulator::LowerCutoff).unwrap().direct_sum;
        let fast = tadpole_massless_fast(cut, 1.0, |_| 0.01, &h);
        assert!((direct - fast).abs() < 1e-12 * direct);
    }
}

#[test]
fn scaled_regulator_grows_logarithmically() {
    let r = finiteness_scan(1.0, &[100, 1_000, 10_000, 100_000], 1.0).unwrap();
    for row in &r.rows {
        eprintln!("{row:?}");
    }
    eprintln!("slope {} ratio {} per-N ratio {}", r.log_slope, r.increment_ratio, r.per_n_increment_ratio);
    assert!(!r.bounded);
    assert!((r.log_slope - r.expected_log_slope).abs() < 0.1);
    assert!(r.per_n_bounded);
}

#[test]
fn massive_terms_are_positive() {
    let p = FieldParams::new(2.0, 0.5, 1.0, 300, 0.1).unwrap();
    let r = tadpole_direct(&p, Regulator::MassShift).unwrap();
    assert!(r.per_n_terms.iter().all(|t| t.1 > 0.0));
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 32, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn reordering_terms_is_harmless(cut in 3u32..3000, eps in 1e-6f64..1.0, seed in 0u64..1000) {
        let p = FieldParams::massless(cut, eps).unwrap();
        let r = tadpole_direct(&p, Regulator::LowerCutoff).unwrap();
        let mut terms: Vec<f64> = r.per_n_terms.iter().map(|t| t.1).collect();
        // deterministic shuffle
        let len = terms.len();
        for i in 0..len {
            let j = ((seed as usize + 1) * 7919 * (i + 1)) % len;
            terms.swap(i, j);
        }
        let resum = bergman_core::summation::compensated_sum(terms.iter().copied());
        prop_assert!((resum - r.direct_sum).abs() <= 1e-12 * r.direct_sum.abs());
    }

    #[test]
    fn coupling_is_a_prefactor(lam in -5.0f64..5.0, mu2 in 0.1f64..3.0) {
        let one = tadpole_direct(&FieldParams::new(mu2, 0.0, 1.0, 200, 0.1).unwrap(), Regulator::MassShift).unwrap().direct_sum;
        let scaled = tadpole_direct(&FieldParams::new(mu2, 0.0, lam, 200, 0.1).unwrap(), Regulator::MassShift).unwrap().direct_sum;
        prop_assert!((scaled - lam * one).abs() <= 1e-13 * one.abs().max(1.0) * lam.abs().max(1.0));
    }
}
