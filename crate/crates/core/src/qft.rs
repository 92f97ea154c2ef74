//! Scalar field on the quantised ball: mode propagators and the regulated
//! one-loop tadpole
//!
//! `G₂ = λ_c Σ_{N=3}^{Λ} w(N) Σ_{l=0}^{⌊(N-2)/2⌋} 1/(l(N-2) - l² + μ² - 3ξ)`
//!
//! with the vertex weight `w(N) = 1/N` by default. The massless `l = 0` mode
//! has a vanishing denominator and needs an infrared regulator `ε`:
//!
//! * [`Regulator::LowerCutoff`] replaces the `l = 0` term by
//!   `(ln(1/ε) + 1/(N-2))/(N-2)`, the continuum `l`-integral started at `ε`;
//! * [`Regulator::MassShift`] adds `ε²` to `μ²`.
//!
//! Both act only when `μ² = 3ξ`; massive sums are never modified.
//!
//! For `μ² = 3ξ` the remaining `l ≥ 1` sum is harmonic,
//! `Σ 1/(l(K-l)) = (H_{K-1} + [K even]·2/K)/K` with `K = N-2`, which gives a
//! fast path for large cutoffs.

use serde::Serialize;

use crate::summation::NeumaierSum;
use crate::{Error, Result};

const POLE_TOL: f64 = 1e-14;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Regulator {
    LowerCutoff,
    MassShift,
}

impl std::str::FromStr for Regulator {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "lower_cutoff" | "lower-cutoff" => Ok(Regulator::LowerCutoff),
            "mass_shift" | "mass-shift" => Ok(Regulator::MassShift),
            other => Err(Error::InvalidInput(format!("unknown regulator '{other}'"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FieldParams {
    /// Mass squared `μ²`.
    pub mu2: f64,
    /// Curvature coupling `ξ`.
    pub xi_c: f64,
    /// Quartic coupling `λ_c`, an overall prefactor.
    pub lambda_c: f64,
    /// Cutoff `Λ` on `N`.
    pub cutoff: u32,
    /// Infrared regulator `ε ∈ (0, 1]`.
    pub eps: f64,
}

impl FieldParams {
    pub fn new(mu2: f64, xi_c: f64, lambda_c: f64, cutoff: u32, eps: f64) -> Result<Self> {
        let p = Self { mu2, xi_c, lambda_c, cutoff, eps };
        p.validate()?;
        Ok(p)
    }

    pub fn massless(cutoff: u32, eps: f64) -> Result<Self> {
        Self::new(0.0, 0.0, 1.0, cutoff, eps)
    }

    pub fn validate(&self) -> Result<()> {
        if self.cutoff < 3 {
            return Err(Error::InvalidInput(format!("cutoff Λ must be ≥ 3, got {}", self.cutoff)));
        }
        if !(self.eps > 0.0 && self.eps <= 1.0) {
            return Err(Error::InvalidInput(format!("ε must lie in (0, 1], got {}", self.eps)));
        }
        if !(self.mu2 >= 0.0) || !self.xi_c.is_finite() || !self.lambda_c.is_finite() {
            return Err(Error::InvalidInput("μ² must be ≥ 0 and the couplings finite".into()));
        }
        Ok(())
    }

    /// `μ² - 3ξ`, the constant part of every denominator.
    pub fn mass_gap(&self) -> f64 {
        self.mu2 - 3.0 * self.xi_c
    }

    fn is_massless(&self) -> bool {
        self.mass_gap().abs() < POLE_TOL
    }
}

/// `l(N-2) - l² + μ² - 3ξ`.
pub fn denominator(n: u32, l: u32, p: &FieldParams) -> f64 {
    let (nf, lf) = (n as f64, l as f64);
    lf * (nf - 2.0) - lf * lf + p.mass_gap()
}

/// `1/(l(N-2) - l² + μ² - 3ξ)` for `m = 2`.
pub fn propagator(n: u32, l: u32, p: &FieldParams) -> Result<f64> {
    if n < 3 || l > (n - 2) / 2 {
        return Err(Error::InvalidInput(format!("mode (N, l) = ({n}, {l}) outside the discrete range")));
    }
    let d = denominator(n, l, p);
    if d.abs() < POLE_TOL {
        return Err(Error::PoleHit { n, l });
    }
    Ok(1.0 / d)
}

/// `1/(μ² - (m+1)ξ + ¼((N-2)² + λ²))` with `λ = i(N-2-2l)`.
pub fn propagator_general(n: u32, l: u32, m: usize, p: &FieldParams) -> Result<f64> {
    let mode = crate::spectral::SpectralMode::new(n, l)?;
    let d = p.mu2 - (m as f64 + 1.0) * p.xi_c - mode.eigenvalue as f64;
    if d.abs() < POLE_TOL {
        return Err(Error::PoleHit { n, l });
    }
    Ok(1.0 / d)
}

#[derive(Debug, Clone, Serialize)]
pub struct PositivityReport {
    pub n_range: (u32, u32),
    pub modes: usize,
    pub negative: Vec<(u32, u32)>,
    pub zero: Vec<(u32, u32)>,
    pub min_denominator: f64,
    /// At `μ = 0` every mode is nonnegative iff `ξ ≤ μ²/3`.
    pub max_xi_for_positivity: f64,
    /// Whether the literal requirement `ξ = 0` holds for these parameters.
    pub xi_vanishes: bool,
}

pub fn positivity_domain(p: &FieldParams, n_range: (u32, u32)) -> PositivityReport {
    let (mut negative, mut zero) = (Vec::new(), Vec::new());
    let mut min_d = f64::INFINITY;
    let mut modes = 0;
    for n in n_range.0.max(3)..=n_range.1 {
        for l in 0..=(n - 2) / 2 {
            modes += 1;
            let d = denominator(n, l, p);
            min_d = min_d.min(d);
            if d.abs() < POLE_TOL {
                zero.push((n, l));
            } else if d < 0.0 {
                negative.push((n, l));
            }
        }
    }
    PositivityReport {
        n_range,
        modes,
        negative,
        zero,
        min_denominator: min_d,
        max_xi_for_positivity: p.mu2 / 3.0,
        xi_vanishes: p.xi_c == 0.0,
    }
}

/// `H_k = Σ_{j=1}^k 1/j` for `k ≤ max`, compensated.
pub fn harmonic_table(max: usize) -> Vec<f64> {
    let mut acc = NeumaierSum::new();
    let mut out = Vec::with_capacity(max + 1);
    out.push(0.0);
    for j in 1..=max {
        acc.add(1.0 / j as f64);
        out.push(acc.value());
    }
    out
}

/// Massless `Σ_{l=1}^{⌊K/2⌋} 1/(l(K-l))`, `K = N-2`, from harmonic numbers.
pub fn massless_tail(n: u32, harmonic: &[f64]) -> f64 {
    let k = n as usize - 2;
    if k < 2 {
        return 0.0;
    }
    let even = if k.is_multiple_of(2) { 2.0 / k as f64 } else { 0.0 };
    (harmonic[k - 1] + even) / k as f64
}

/// `l = 0` term for the lower-cutoff regulator.
pub fn lower_cutoff_zero_mode(n: u32, eps: f64) -> f64 {
    let k = n as f64 - 2.0;
    ((1.0 / eps).ln() + 1.0 / k) / k
}

/// Inner `l`-sum at fixed `N` by direct summation.
pub fn mode_sum(n: u32, p: &FieldParams, reg: Regulator, eps: f64) -> Result<f64> {
    let mut acc = NeumaierSum::new();
    let mut shifted = *p;
    if reg == Regulator::MassShift && p.is_massless() {
        shifted.mu2 += eps * eps;
    }
    for l in 0..=(n - 2) / 2 {
        if l == 0 && reg == Regulator::LowerCutoff && p.is_massless() {
            acc.add(lower_cutoff_zero_mode(n, eps));
        } else {
            acc.add(propagator(n, l, &shifted)?);
        }
    }
    Ok(acc.value())
}

#[derive(Debug, Clone, Serialize)]
pub struct TadpoleResult {
    pub params: FieldParams,
    pub regulator: Regulator,
    pub direct_sum: f64,
    /// `λ_c Σ (1/N)(1/(N-2))(ln(N-2) - ln ε)`; `None` unless massless.
    pub closed_form: Option<f64>,
    /// `(N, λ_c w(N) Σ_l …)`.
    pub per_n_terms: Vec<(u32, f64)>,
}

impl TadpoleResult {
    pub fn relative_gap(&self) -> Option<f64> {
        self.closed_form.map(|c| (self.direct_sum - c).abs() / c.abs())
    }
}

/// Default vertex weight `1/N`.
pub fn inverse_n(n: u32) -> f64 {
    1.0 / n as f64
}

/// Direct double sum with the `1/N` weight.
pub fn tadpole_direct(p: &FieldParams, reg: Regulator) -> Result<TadpoleResult> {
    tadpole_direct_weighted(p, reg, inverse_n)
}

/// Direct double sum with an arbitrary vertex weight. Per-`N` terms are
/// computed in parallel and reduced in increasing `N`, so the result does not
/// depend on the thread count.
pub fn tadpole_direct_weighted<W>(p: &FieldParams, reg: Regulator, weight: W) -> Result<TadpoleResult>
where
    W: Fn(u32) -> f64 + Sync + Send,
{
    p.validate()?;
    let count = p.cutoff as usize - 2;
    let terms = crate::par::map_range(count, |i| {
        let n = i as u32 + 3;
        mode_sum(n, p, reg, p.eps).map(|s| (n, p.lambda_c * weight(n) * s))
    });
    let per_n_terms = terms.into_iter().collect::<Result<Vec<_>>>()?;
    let direct_sum = per_n_terms.iter().map(|t| t.1).collect::<NeumaierSum>().value();
    let closed_form = p.is_massless().then(|| tadpole_closed_form(p));
    Ok(TadpoleResult { params: *p, regulator: reg, direct_sum, closed_form, per_n_terms })
}

/// Massless lower-cutoff sum through the harmonic fast path; `eps_of(N, Λ)`
/// may depend on `N`.
pub fn tadpole_massless_fast<E>(cutoff: u32, lambda_c: f64, eps_of: E, harmonic: &[f64]) -> f64
where
    E: Fn(u32) -> f64,
{
    let mut acc = NeumaierSum::new();
    for n in 3..=cutoff {
        let s = lower_cutoff_zero_mode(n, eps_of(n)) + massless_tail(n, harmonic);
        acc.add(s / n as f64);
    }
    lambda_c * acc.value()
}

/// `λ_c Σ_{N=3}^{Λ} (1/N)(1/(N-2))(ln(N-2) - ln ε)`.
pub fn tadpole_closed_form(p: &FieldParams) -> f64 {
    closed_form_with(p.cutoff, p.lambda_c, |_| p.eps)
}

fn closed_form_with<E: Fn(u32) -> f64>(cutoff: u32, lambda_c: f64, eps_of: E) -> f64 {
    let mut acc = NeumaierSum::new();
    for n in 3..=cutoff {
        let k = n as f64 - 2.0;
        acc.add((k.ln() - eps_of(n).ln()) / (n as f64 * k));
    }
    lambda_c * acc.value()
}

/// `Σ_{N=3}^{Λ} 1/(N(N-2))`, the coefficient of `ln(1/ε)`.
pub fn log_coefficient(cutoff: u32) -> f64 {
    (3..=cutoff).map(|n| 1.0 / (n as f64 * (n as f64 - 2.0))).collect::<NeumaierSum>().value()
}

#[derive(Debug, Clone, Serialize)]
pub struct ScanRow {
    pub cutoff: u32,
    pub eps: f64,
    pub direct: f64,
    pub closed_form: f64,
    /// `λ_c(1 - ln Λ/Λ - 1/Λ)`.
    pub hypothesis: f64,
    /// Direct sum with the per-mode regulator `ε_N = 1/N`.
    pub per_n_regulator: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct FinitenessReport {
    pub eps_scale: f64,
    pub rows: Vec<ScanRow>,
    /// Slope of the direct sum against `ln Λ` over the grid.
    pub log_slope: f64,
    /// `λ_c Σ_{N≥3} 1/(N(N-2)) = 3λ_c/4`, the slope expected for log growth.
    pub expected_log_slope: f64,
    /// Last increment over the first; near 1 for logarithmic growth.
    pub increment_ratio: f64,
    /// The sequence settles (`increment_ratio ≤ 0.25`).
    pub bounded: bool,
    pub per_n_increment_ratio: f64,
    pub per_n_bounded: bool,
    /// Limit of the hypothesis, `λ_c`, next to the last direct value.
    pub hypothesis_limit: f64,
}

fn increment_ratio(vals: &[f64]) -> f64 {
    if vals.len() < 3 {
        return f64::NAN;
    }
    let first = vals[1] - vals[0];
    let last = vals[vals.len() - 1] - vals[vals.len() - 2];
    (last / first).abs()
}

/// Massless lower-cutoff sums under `ε = eps_scale/Λ` on an increasing grid.
pub fn finiteness_scan(eps_scale: f64, grid: &[u32], lambda_c: f64) -> Result<FinitenessReport> {
    if grid.windows(2).any(|w| w[1] <= w[0]) || grid.first().is_none_or(|&g| g < 3) {
        return Err(Error::InvalidInput("cutoff grid must be increasing and start at ≥ 3".into()));
    }
    let max = *grid.last().unwrap();
    let harmonic = harmonic_table(max as usize);
    let rows: Vec<ScanRow> = crate::par::map(grid, |&cut| {
        let eps = (eps_scale / cut as f64).min(1.0);
        ScanRow {
            cutoff: cut,
            eps,
            direct: tadpole_massless_fast(cut, lambda_c, |_| eps, &harmonic),
            closed_form: closed_form_with(cut, lambda_c, |_| eps),
            hypothesis: lambda_c * (1.0 - (cut as f64).ln() / cut as f64 - 1.0 / cut as f64),
            per_n_regulator: tadpole_massless_fast(cut, lambda_c, |n| 1.0 / n as f64, &harmonic),
        }
    });
    let direct: Vec<f64> = rows.iter().map(|r| r.direct).collect();
    let per_n: Vec<f64> = rows.iter().map(|r| r.per_n_regulator).collect();
    let xs: Vec<f64> = grid.iter().map(|&g| (g as f64).ln()).collect();
    let log_slope = linear_slope(&xs, &direct);
    let ratio = increment_ratio(&direct);
    let per_ratio = increment_ratio(&per_n);
    Ok(FinitenessReport {
        eps_scale,
        log_slope,
        expected_log_slope: 0.75 * lambda_c,
        increment_ratio: ratio,
        bounded: ratio <= 0.25,
        per_n_increment_ratio: per_ratio,
        per_n_bounded: per_ratio <= 0.25,
        hypothesis_limit: lambda_c,
        rows,
    })
}

/// Least-squares slope of `ys` against `xs`.
pub fn linear_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}

#[derive(Debug, Clone, Serialize)]
pub struct EpsilonDivergence {
    pub cutoff: u32,
    pub eps_grid: Vec<f64>,
    pub values: Vec<f64>,
    /// Fitted slope of `G₂` against `ln(1/ε)`.
    pub slope: f64,
    /// `λ_c Σ_{N=3}^{Λ} 1/(N(N-2))`.
    pub expected: f64,
    pub relative_error: f64,
}

/// Direct massless lower-cutoff sums at fixed `Λ` as `ε → 0`.
pub fn epsilon_divergence(cutoff: u32, eps_grid: &[f64], lambda_c: f64) -> Result<EpsilonDivergence> {
    let values = eps_grid
        .iter()
        .map(|&eps| {
            let p = FieldParams::new(0.0, 0.0, lambda_c, cutoff, eps)?;
            Ok(tadpole_direct(&p, Regulator::LowerCutoff)?.direct_sum)
        })
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = eps_grid.iter().map(|e| (1.0 / e).ln()).collect();
    let slope = linear_slope(&xs, &values);
    let expected = lambda_c * log_coefficient(cutoff);
    Ok(EpsilonDivergence {
        cutoff,
        eps_grid: eps_grid.to_vec(),
        values,
        slope,
        expected,
        relative_error: (slope - expected).abs() / expected,
    })
}

/// `|direct - closed|/closed` for massless lower-cutoff sums over `grid`.
pub fn closed_form_gaps(grid: &[u32], eps: f64) -> Result<Vec<(u32, f64)>> {
    grid.iter()
        .map(|&cut| {
            let r = tadpole_direct(&FieldParams::massless(cut, eps)?, Regulator::LowerCutoff)?;
            Ok((cut, r.relative_gap().unwrap()))
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn propagator_examples() {
        let p = FieldParams::massless(10, 0.1).unwrap();
        assert_eq!(propagator(5, 1, &p).unwrap(), 0.5);
        assert_eq!(propagator(5, 0, &p), Err(Error::PoleHit { n: 5, l: 0 }));
        let m = FieldParams::new(0.01, 0.0, 1.0, 10, 0.1).unwrap();
        assert!((propagator(5, 0, &m).unwrap() - 100.0).abs() < 1e-12);
        assert_eq!(propagator_general(7, 2, 2, &p).unwrap(), propagator(7, 2, &p).unwrap());
    }

    #[test]
    fn massive_sums_by_hand() {
        let p = FieldParams::new(1.0, 0.0, 1.0, 3, 0.1).unwrap();
        assert_eq!(tadpole_direct(&p, Regulator::LowerCutoff).unwrap().direct_sum, 1.0 / 3.0);
        let p = FieldParams { cutoff: 4, ..p };
        let expect = 1.0 / 3.0 + 0.25 * (1.0 + 0.5);
        assert!((tadpole_direct(&p, Regulator::MassShift).unwrap().direct_sum - expect).abs() < 1e-15);
        assert!(tadpole_direct(&p, Regulator::LowerCutoff).unwrap().closed_form.is_none());
    }

    #[test]
    fn closed_form_examples() {
        let p = FieldParams::massless(3, 0.1).unwrap();
        assert!((tadpole_closed_form(&p) - 10f64.ln() / 3.0).abs() < 1e-15);
        let p4 = FieldParams::massless(4, 0.1).unwrap();
        let expect = 10f64.ln() / 3.0 + 0.125 * (2f64.ln() + 10f64.ln());
        assert!((tadpole_closed_form(&p4) - expect).abs() < 1e-15);
    }

    #[test]
    fn harmonic_tail_matches_direct() {
        let h = harmonic_table(300);
        let p = FieldParams::massless(300, 0.5).unwrap();
        for n in 3..=300 {
            let direct = mode_sum(n, &p, Regulator::LowerCutoff, 0.5).unwrap() - lower_cutoff_zero_mode(n, 0.5);
            assert!((direct - massless_tail(n, &h)).abs() < 1e-14, "N={n}");
        }
    }

    #[test]
    fn unregulated_massless_mode_is_a_pole() {
        let p = FieldParams::massless(5, 0.1).unwrap();
        assert!(matches!(mode_sum(5, &p, Regulator::MassShift, 0.0), Err(Error::PoleHit { n: 5, l: 0 })));
    }
}
