//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Runs without the libtest harness so the report is always printed. The
//! process fails when a criterion fails unexpectedly; criteria listed in
//! `KNOWN_FAILURES` are reported as FAIL but do not fail the run unless
//! `ACCEPTANCE_STRICT=1` is set.

use std::time::Instant;

use bergman_core::fock::sumn::sumn_algebra_check;
use bergman_core::fock::{adjudicate_omega0, bogolyubov_check, bracket_report, build_sector};
use bergman_core::geometry::*;
use bergman_core::group::*;
use bergman_core::linalg::{c, max_abs};
use bergman_core::qft::*;
use bergman_core::spectral::*;
use bergman_core::star::*;
use bergman_core::C64;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Criteria that fail for reasons documented in the README.
const KNOWN_FAILURES: &[u32] = &[9];

struct Outcome {
    id: u32,
    title: &'static str,
    pass: bool,
    detail: String,
    seconds: f64,
}

type Check = (bool, String);

fn check(ok: bool, msg: String) -> Check {
    (ok, msg)
}

fn run(id: u32, title: &'static str, limit_s: f64, f: fn() -> Vec<Check>) -> Outcome {
    let start = Instant::now();
    let checks = f();
    let seconds = start.elapsed().as_secs_f64();
    let mut pass = checks.iter().all(|c| c.0);
    let mut parts: Vec<String> =
        checks.iter().map(|(ok, m)| if *ok { m.clone() } else { format!("[failed] {m}") }).collect();
    if seconds > limit_s {
        pass = false;
        parts.push(format!("[failed] runtime {seconds:.1} s > {limit_s} s"));
    }
    Outcome { id, title, pass, detail: parts.join("; "), seconds }
}

fn random_point(rng: &mut ChaCha8Rng, m: usize, rmax: f64) -> DomainPoint {
    loop {
        let z: Vec<C64> = (0..m).map(|_| c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))).collect();
        let r: f64 = z.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if r <= rmax {
            return DomainPoint::new(z).unwrap();
        }
    }
}

fn lie_algebra() -> Vec<Check> {
    let f = structure_constants(&su21_matrices()).unwrap();
    vec![
        check(
            f.projection_residual <= 1e-12,
            format!("28 brackets project with residual {:.1e}", f.projection_residual),
        ),
        check(f.jacobi_residual <= 1e-12, format!("Jacobi {:.1e}", f.jacobi_residual)),
        check(f.antisymmetry_residual <= 1e-12, format!("antisymmetry {:.1e}", f.antisymmetry_residual)),
    ]
}

fn cartan() -> Vec<Check> {
    let basis = Su21Basis::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut worst: f64 = 0.0;
    for _ in 0..100 {
        let scale = rng.random_range(0.05..3.0);
        let g = exp_algebra(&random_algebra(&basis, &mut rng, scale).0).unwrap();
        let cf = cartan_decompose(&g).unwrap();
        worst = worst.max(max_abs(&(cf.reassemble() - &g.mat)));
    }
    let mut haar: f64 = 0.0;
    for k in 0..=100 {
        let t = 0.05 * k as f64;
        let want = t.sinh().powi(2) * (2.0 * t).sinh();
        let got = haar_density(t).unwrap();
        haar = haar.max((got - want).abs() / want.abs().max(f64::MIN_POSITIVE));
    }
    vec![
        check(worst <= 1e-10, format!("100 round-trips, max error {worst:.1e}")),
        check(haar <= 1e-14, format!("Haar density vs sinh²t·sinh 2t, relative {haar:.1e}")),
    ]
}

fn geometry() -> Vec<Check> {
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut oracle: f64 = 0.0;
    for _ in 0..50 {
        let z = random_point(&mut rng, 2, 0.9);
        let exact = metric(&z).g;
        oracle = oracle.max(max_abs(&(metric_oracle(&z, 4, 1e-5) - &exact)) / max_abs(&exact));
    }
    let (mut inv, mut ke, mut ein) = (0.0f64, 0.0f64, 0.0f64);
    for m in 1..=3 {
        for _ in 0..20 {
            let z = random_point(&mut rng, m, 0.9);
            inv = inv.max(metric(&z).inverse_residual());
            let rep = ricci_and_scalar(&z);
            ke = ke.max(rep.kahler_einstein_residual);
            ein = ein.max(rep.einstein_residual);
        }
    }
    vec![
        check(oracle <= 1e-6, format!("metric vs ∂∂̄ log K at 50 points, relative {oracle:.1e}")),
        check(inv <= 1e-12, format!("g·g⁻¹ - I {inv:.1e}")),
        check(ke <= 1e-9, format!("R + (m+1)g {ke:.1e} for m = 1..3")),
        check(ein <= 1e-9, format!("Λ-closure {ein:.1e}")),
    ]
}

fn normalization_check() -> Vec<Check> {
    let mut worst: f64 = 0.0;
    for n in 3..=8 {
        worst = worst.max((normalization(n).unwrap().0 - 1.0).abs());
    }
    let mut mc: f64 = 0.0;
    for n in [4, 6, 8] {
        mc = mc.max((normalization_mc(n, 2_000_000, 42).unwrap().value - 1.0).abs());
    }
    vec![
        check(worst <= 1e-8, format!("radial quadrature N = 3..8, max |∫dμ - 1| {worst:.1e}")),
        check(mc <= 1e-3, format!("Monte Carlo (2M samples) {mc:.1e}")),
    ]
}

fn representation() -> Vec<Check> {
    let f = structure_constants(&su21_matrices()).unwrap();
    let (mut res, mut opposite, mut ncomm) = (0.0f64, f64::INFINITY, 0.0f64);
    let mut signs = Vec::new();
    for n in 3..=6 {
        for p in 2..=8 {
            let rep = bracket_report(&build_sector(n, p).unwrap(), &f);
            res = res.max(rep.max_residual);
            opposite = opposite.min(rep.opposite_sign_residual);
            ncomm = ncomm.max(rep.number_commutator);
            signs.push(rep.sign);
        }
    }
    let sign_ok = signs.iter().all(|&s| s == -1.0);
    let (mut a2, mut a1) = (0.0f64, 0.0f64);
    for t in [0.1, 0.25, 0.5, 0.75, 1.0] {
        for n in [3, 4, 6] {
            let b = bogolyubov_check(n, t, 3).unwrap();
            a2 = a2.max(b.a2_residual);
            a1 = a1.max(b.a1_residual);
        }
    }
    vec![
        check(
            res <= 1e-10 && sign_ok,
            format!("brackets on interior states {res:.1e} with σ = -1 (σ = +1 gives ≥ {opposite:.2})"),
        ),
        check(ncomm == 0.0, format!("[N̂, X̂_A] = {ncomm}")),
        check(a2 <= 1e-10, format!("Bogolyubov â₂ identity {a2:.1e} for t ≤ 1")),
        check(a1 <= 1e-10, format!("â₁ invariance {a1:.1e}")),
    ]
}

fn omega0() -> Vec<Check> {
    let grid: Vec<f64> = (1..=10).map(|k| 0.1 * k as f64).collect();
    let mut checks = Vec::new();
    for n in [3, 4, 6] {
        let adj = adjudicate_omega0(n, &grid, 1e-13).unwrap();
        let conv = adj.last_change.iter().all(|&c| c < 1e-8);
        checks.push(check(
            conv && adj.best_offset == 1 && adj.best_deviation < 1e-10,
            format!(
                "N={n}: ω₀(δ) = cosh^-(N+1) t (dev {:.1e}); series form off by {:.2}, cosh^-N form off by {:.2}",
                adj.best_deviation, adj.series_expression_deviation, adj.series_expression_power_n_deviation
            ),
        ));
    }
    let basis = Su21Basis::new().unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let mut gap: f64 = 0.0;
    for _ in 0..50 {
        let p = CoherentParam::random(&mut rng, (0.0, 0.4)).unwrap();
        let g = exp_algebra(&random_algebra(&basis, &mut rng, 0.6).0).unwrap();
        gap = gap.max(omega(&g, &p, 4).unwrap().route_gap);
    }
    checks.push(check(gap <= 1e-7, format!("dual-route ω(g,x), 50 cases, N=4: {gap:.1e}")));
    checks
}

fn star_structure() -> Vec<Check> {
    let f = Su21Basis::new().unwrap().f;
    let mut rng = ChaCha8Rng::seed_from_u64(42);
    let (mut comm, mut comm_unit, mut casimir, mut assoc) = (0.0f64, f64::INFINITY, 0.0f64, 0.0f64);
    for n in [3, 5, 8] {
        let q = Quantizer::new(n, 36).unwrap();
        for _ in 0..4 {
            let p = CoherentParam::random(&mut rng, (0.0, 0.4)).unwrap();
            let x = q.coherent_state(&p).unwrap();
            let table = q.star_table(&x);
            comm = comm.max(table.commutator_residual(&f, BRACKET_SIGN));
            comm_unit = comm_unit.min(table.commutator_residual(&f, 1.0));
            casimir = casimir.max((q.number_symbol(&x) - C64::from(n as f64)).norm());
            for abc in [[4, 5, 8], [1, 6, 7], [3, 3, 5]] {
                assoc = assoc.max(q.associativity(abc, &x).unwrap().residual);
            }
        }
    }
    let ns: Vec<u32> = (4..=40).step_by(4).collect();
    let fit = fit_deformation_coeffs(&ns, &default_fit_params().unwrap()).unwrap();
    vec![
        check(
            comm <= 1e-8,
            format!("commutator half vs (σ/2N) f ξ with σ = -1: {comm:.1e} (σ = +1: ≥ {comm_unit:.2})"),
        ),
        check(casimir <= 1e-12, format!("symbol(N̂) - N {casimir:.1e}")),
        check(assoc <= 1e-8, format!("associativity {assoc:.1e}")),
        check((fit.a_slope + 1.0).abs() <= 0.2, format!("A_N slope {:.3}", fit.a_slope)),
        check((fit.b_slope + 1.0).abs() <= 0.2, format!("B_N slope {:.3}", fit.b_slope)),
    ]
}

fn spectrum() -> Vec<Check> {
    let ns: Vec<u32> = (3..=12).collect();
    let table = residual_table(&ns, 2, &default_r_grid()).unwrap();
    let worst = table.iter().map(|r| r.relative()).fold(0.0, f64::max);
    let mut lists_ok = true;
    let mut identity_ok = true;
    for n in 3..=200 {
        for mode in discrete_spectrum(n, 2).unwrap() {
            let l = mode.l as i64;
            lists_ok &= mode.eigenvalue == l * (l + 2 - n as i64);
            identity_ok &= mode.eigenvalue == mode.eigenvalue_from_lambda();
        }
    }
    let n10: Vec<i64> = discrete_spectrum(10, 2).unwrap().iter().map(|m| m.eigenvalue).collect();
    vec![
        check(worst <= 1e-8, format!("{} modes, max eigen-residual / max|φ| {worst:.1e}", table.len())),
        check(lists_ok && n10 == vec![0, -7, -12, -15, -16], format!("N=10 eigenvalues {n10:?}")),
        check(identity_ok, "l(l+2-N) = -¼((N-2)² + λ²) for N ≤ 200".into()),
    ]
}

fn tadpole() -> Vec<Check> {
    let p3 = FieldParams::new(1.0, 0.0, 1.0, 3, 0.1).unwrap();
    let hand = tadpole_direct(&p3, Regulator::LowerCutoff).unwrap().direct_sum == 1.0 / 3.0;
    let gaps = closed_form_gaps(&[50, 100, 200, 400], 0.1).unwrap();
    let shrinking = gaps.windows(2).all(|w| w[1].1 < w[0].1);
    let scan = finiteness_scan(1.0, &[100, 1_000, 10_000, 100_000], 1.0).unwrap();
    let div = epsilon_divergence(200, &[1e-2, 1e-3, 1e-4, 1e-6, 1e-8], 1.0).unwrap();
    let last = scan.rows.last().unwrap();
    vec![
        check(hand, "Λ=3, μ²=1 gives 1/3".into()),
        check(
            shrinking,
            format!("relative gap to closed form {}", gaps.iter().map(|g| format!("{:.4}", g.1)).collect::<Vec<_>>().join(" > ")),
        ),
        check(
            scan.bounded,
            format!(
                "ε = 1/Λ: G₂ grows like {:.3}·ln Λ (G₂(10⁵) = {:.3}, hypothesis limit {}); ε_N = 1/N stays bounded ({:.4})",
                scan.log_slope, last.direct, scan.hypothesis_limit, last.per_n_regulator
            ),
        ),
        check(
            div.relative_error <= 0.05,
            format!("ln(1/ε) slope {:.6} vs {:.6} ({:.1e} relative)", div.slope, div.expected, div.relative_error),
        ),
    ]
}

fn oscillator_algebra() -> Vec<Check> {
    let rep = sumn_algebra_check(2, 2, 4, 2).unwrap();
    let lam = rep.lowest_eigenvalue.unwrap_or(f64::NAN);
    vec![
        check(
            rep.bracket_residual <= 1e-10 && rep.dim == 495,
            format!("su(2,2) on {} states: {:.1e} with σ = {}", rep.dim, rep.bracket_residual, rep.sign),
        ),
        check(rep.number_commutator == 0.0, format!("[N̂, X̂] = {}", rep.number_commutator)),
        check(
            rep.lowest_eigen_residual.is_some_and(|r| r < 1e-12) && (lam - 4.0).abs() < 1e-12,
            format!("(det b̂†)^N|0⟩ at N=2 is an N̂-eigenvector with eigenvalue {lam} = nN"),
        ),
        check(
            rep.trace_identity_residual < 1e-12,
            format!("N̂ = -tr(Ẑ†ΓẐ) - n² to {:.1e}", rep.trace_identity_residual),
        ),
    ]
}

fn main() {
    // `cargo test -- --list` and filters pass arguments; honour `--list` only
    if std::env::args().any(|a| a == "--list") {
        for i in 1..=10 {
            println!("criterion_{i}: test");
        }
        return;
    }
    let strict = std::env::var("ACCEPTANCE_STRICT").is_ok_and(|v| v == "1");
    let outcomes = [
        run(1, "Lie-algebra integrity", 1.0, lie_algebra),
        run(2, "Cartan round-trip", f64::INFINITY, cartan),
        run(3, "geometry oracle", 10.0, geometry),
        run(4, "measure normalisation", 30.0, normalization_check),
        run(5, "representation integrity", 30.0, representation),
        run(6, "ω₀ adjudication", f64::INFINITY, omega0),
        run(7, "star-product structure", 300.0, star_structure),
        run(8, "spectrum", 10.0, spectrum),
        run(9, "tadpole", 30.0, tadpole),
        run(10, "oscillator algebra su(2,2)", f64::INFINITY, oscillator_algebra),
    ];
    let mut unexpected = 0;
    for o in &outcomes {
        let verdict = if o.pass { "PASS" } else { "FAIL" };
        let known = !o.pass && KNOWN_FAILURES.contains(&o.id);
        println!(
            "criterion {:>2} {verdict} {} ({:.2} s){}: {}",
            o.id,
            o.title,
            o.seconds,
            if known { " [known]" } else { "" },
            o.detail
        );
        if !o.pass && (strict || !known) {
            unexpected += 1;
        }
    }
    let passed = outcomes.iter().filter(|o| o.pass).count();
    println!("acceptance: {passed}/{} criteria pass", outcomes.len());
    if unexpected > 0 {
        std::process::exit(1);
    }
}
