//! Radial part of the invariant Laplacian
//! `Δ_N = (1 - |Z|²)(Σ ∂²/∂z̄ᵢ∂zᵢ - R̄R - N R̄)`, `R = Σ zᵢ ∂/∂zᵢ`, and its
//! discrete spectrum.
//!
//! For radial `F(r)`, `r = |Z|²`, the operator collapses to
//! `Δ_N F = (1 - r)[r(1 - r)F'' + (m - (N+1)r)F']`.
//! Discrete modes are labelled by `0 ≤ l ≤ ⌊(N-2)/2⌋` with
//! `λ = i(N-2-2l)` and eigenfunction
//! `φ = (1 - r)^{-l} F(N-l, -l; m; r)`, a polynomial of degree `l` times a
//! power. The eigen-equation holds exactly for `m = 2`.

use num_rational::Ratio;
use serde::Serialize;

use crate::geometry::DomainPoint;
use crate::group::GroupElement;
use crate::jet::Jet;
use crate::{Error, Result, C64};

/// One discrete mode.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SpectralMode {
    pub n: u32,
    pub l: u32,
    /// `λ = i·lambda_im`.
    pub lambda_im: i64,
    /// `l(l + 2 - N)`.
    pub eigenvalue: i64,
}

impl SpectralMode {
    pub fn new(n: u32, l: u32) -> Result<Self> {
        if n < 3 {
            return Err(Error::InvalidInput(format!("the discrete series needs N ≥ 3, got {n}")));
        }
        if l > (n - 2) / 2 {
            return Err(Error::InvalidInput(format!("l = {l} outside 0..={} for N = {n}", (n - 2) / 2)));
        }
        let (nl, ll) = (n as i64, l as i64);
        Ok(Self { n, l, lambda_im: nl - 2 - 2 * ll, eigenvalue: ll * (ll + 2 - nl) })
    }

    /// `-¼((N-2)² + λ²)` with `λ² = -lambda_im²`, in integers.
    pub fn eigenvalue_from_lambda(&self) -> i64 {
        let n2 = (self.n as i64 - 2).pow(2);
        let num = n2 - self.lambda_im.pow(2);
        debug_assert_eq!(num % 4, 0);
        -num / 4
    }
}

/// All discrete modes for `N`; the list does not depend on `m`.
pub fn discrete_spectrum(n: u32, m: usize) -> Result<Vec<SpectralMode>> {
    if m == 0 {
        return Err(Error::InvalidInput("m must be positive".into()));
    }
    if n < 3 {
        return Err(Error::InvalidInput(format!("the discrete series needs N ≥ 3, got {n}")));
    }
    (0..=(n - 2) / 2).map(|l| SpectralMode::new(n, l)).collect()
}

/// Exact coefficients `(a)_k (b)_k / ((c)_k k!)` for `k < terms`.
pub fn hypergeometric_coefficients(a: i64, b: i64, c: i64, terms: usize) -> Result<Vec<Ratio<i128>>> {
    if c <= 0 {
        return Err(Error::InvalidInput(format!("c = {c} must be positive")));
    }
    let mut out = Vec::with_capacity(terms);
    let mut cur = Ratio::from_integer(1i128);
    for k in 0..terms as i64 {
        out.push(cur);
        cur *= Ratio::new(((a + k) * (b + k)) as i128, ((c + k) * (k + 1)) as i128);
    }
    Ok(out)
}

/// `(1 - r)^power · Σ coeffs[k] r^k` with exact first and second derivatives.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadialFunction {
    pub power: f64,
    pub coeffs: Vec<f64>,
}

impl RadialFunction {
    pub fn constant(v: f64) -> Self {
        Self { power: 0.0, coeffs: vec![v] }
    }

    fn poly(&self, r: f64) -> [f64; 3] {
        let (mut p, mut dp, mut d2p) = (0.0, 0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            d2p = d2p * r + 2.0 * dp;
            dp = dp * r + p;
            p = p * r + c;
        }
        [p, dp, d2p]
    }

    /// `[F, F', F'']` at `r`.
    pub fn derivatives(&self, r: f64) -> [f64; 3] {
        let [p, dp, d2p] = self.poly(r);
        let s = self.power;
        let u = 1.0 - r;
        let w = u.powf(s);
        let w1 = -s * u.powf(s - 1.0);
        let w2 = s * (s - 1.0) * u.powf(s - 2.0);
        [w * p, w1 * p + w * dp, w2 * p + 2.0 * w1 * dp + w * d2p]
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivatives(r)[0]
    }

    /// `(1 - r)^power P(r)` with `r = Σ zᵢwᵢ` in jet arithmetic.
    pub fn jet(&self, r: &Jet) -> Jet {
        let dim = r.dim();
        let mut p = Jet::constant(C64::from(0.0), dim);
        for &c in self.coeffs.iter().rev() {
            p = (&p * r).add_scalar(C64::from(c));
        }
        let u = r.scale(C64::from(-1.0)).add_scalar(C64::from(1.0));
        if self.power == 0.0 {
            p
        } else {
            &u.powf(self.power) * &p
        }
    }
}

/// `φ = (1 - r)^{-l} F(N-l, -l; m; r)`, normalised to `φ(0) = 1`.
pub fn eigenfunction(mode: &SpectralMode, m: usize) -> Result<RadialFunction> {
    let (n, l) = (mode.n as i64, mode.l as i64);
    // the exponent (-N + 2 - iλ)/2 with -iλ = lambda_im
    let power_num = -n + 2 + mode.lambda_im;
    debug_assert_eq!(power_num % 2, 0);
    let coeffs = hypergeometric_coefficients(n - l, -l, m as i64, mode.l as usize + 1)?;
    Ok(RadialFunction {
        power: (power_num / 2) as f64,
        coeffs: coeffs.iter().map(|q| *q.numer() as f64 / *q.denom() as f64).collect(),
    })
}

/// `φ(r)` for one mode.
pub fn eigenfunction_value(mode: &SpectralMode, m: usize, r: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&r) {
        return Err(Error::OutsideDomain { margin: 1.0 - r });
    }
    Ok(eigenfunction(mode, m)?.value(r))
}

/// Radial reduction `(1 - r)[r(1 - r)F'' + (m - (N+1)r)F']`.
pub fn laplacian_apply(f: &RadialFunction, n: u32, m: usize, r: f64) -> f64 {
    let [_, d1, d2] = f.derivatives(r);
    (1.0 - r) * (r * (1.0 - r) * d2 + (m as f64 - (n as f64 + 1.0) * r) * d1)
}

/// `Δ_N f` at `z` from the multivariate definition, with `f` written in the
/// polarised variables `(z₁..z_m, w₁..w_m)` and evaluated at `w = z̄`.
pub fn laplacian_multivariate<F>(f: F, n: u32, z: &[C64]) -> C64
where
    F: Fn(&[Jet]) -> Jet,
{
    let m = z.len();
    let mut vals: Vec<C64> = z.to_vec();
    vals.extend(z.iter().map(|v| v.conj()));
    let vars = Jet::variables(&vals);
    let fj = f(&vars);
    let (zz, ww) = (&vals[..m], &vals[m..]);
    let mut lap = C64::from(0.0);
    for i in 0..m {
        lap += fj.hess(m + i, i);
        lap -= ww[i] * fj.g[m + i] * n as f64;
        for j in 0..m {
            lap -= ww[i] * zz[j] * fj.hess(m + i, j);
        }
    }
    let r: C64 = zz.iter().zip(ww).map(|(a, b)| a * b).sum();
    (C64::from(1.0) - r) * lap
}

/// `r = Σ zᵢ wᵢ` from polarised jets.
pub fn radius_jet(vars: &[Jet]) -> Jet {
    let m = vars.len() / 2;
    let mut r = &vars[0] * &vars[m];
    for i in 1..m {
        r = &r + &(&vars[i] * &vars[m + i]);
    }
    r
}

/// `T_g f(z, w) = (c·z + d)^{-N} f(g·z, ḡ·w)`, the polarised multiplier
/// action; `ḡ` acts with conjugated coefficients.
pub fn transported<'a, F>(g: &'a GroupElement, n: u32, f: &'a F) -> impl Fn(&[Jet]) -> Jet + 'a
where
    F: Fn(&[Jet]) -> Jet,
{
    move |vars: &[Jet]| {
        let (a, b, cc, d) = g.blocks();
        let m = a.nrows();
        let dim = vars[0].dim();
        let mobius = |zs: &[Jet], conj: bool| -> (Vec<Jet>, Jet) {
            let pick = |v: C64| if conj { v.conj() } else { v };
            let mut den = Jet::constant(pick(d), dim);
            for j in 0..m {
                den = &den + &zs[j].scale(pick(cc[j]));
            }
            let inv = den.recip();
            let out = (0..m)
                .map(|i| {
                    let mut num = Jet::constant(pick(b[i]), dim);
                    for j in 0..m {
                        num = &num + &zs[j].scale(pick(a[(i, j)]));
                    }
                    &num * &inv
                })
                .collect();
            (out, den)
        };
        let (zp, den) = mobius(&vars[..m], false);
        let (wp, _) = mobius(&vars[m..], true);
        let mut args = zp;
        args.extend(wp);
        &den.powi(-(n as i32)) * &f(&args)
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct InvarianceReport {
    pub samples: usize,
    /// `max |T_g(Δf) - Δ(T_g f)|`.
    pub max_residual: f64,
    /// Largest `|Δ(T_g f)|` over the samples, for scale.
    pub max_value: f64,
}

/// Checks `T_g Δ_N f = Δ_N T_g f` at the sample points.
pub fn invariance_check<F>(g: &GroupElement, f: F, n: u32, points: &[DomainPoint]) -> Result<InvarianceReport>
where
    F: Fn(&[Jet]) -> Jet,
{
    let tf = transported(g, n, &f);
    let mut worst: f64 = 0.0;
    let mut scale: f64 = 0.0;
    for z in points {
        let zp = crate::geometry::mobius_action(g, z)?;
        let mult = crate::geometry::multiplier_base(g, z).powi(-(n as i32));
        let lhs = mult * laplacian_multivariate(&f, n, &zp.z);
        let rhs = laplacian_multivariate(&tf, n, &z.z);
        worst = worst.max((lhs - rhs).norm());
        scale = scale.max(rhs.norm());
    }
    Ok(InvarianceReport { samples: points.len(), max_residual: worst, max_value: scale })
}

/// Residual of the eigen-equation for one mode on an `r`-grid.
#[derive(Debug, Clone, Serialize)]
pub struct EigenResidual {
    pub n: u32,
    pub l: u32,
    pub m: usize,
    pub eigenvalue: i64,
    /// `max_r |Δφ - l(l+2-N)φ|`.
    pub max_residual: f64,
    pub max_abs_phi: f64,
    /// `max_r |Δφ(radial) - Δφ(multivariate)|` along the first axis.
    pub reduction_gap: f64,
}

impl EigenResidual {
    pub fn relative(&self) -> f64 {
        self.max_residual / self.max_abs_phi
    }
}

/// The grid `r ∈ {0.05, 0.10, …, 0.90}`.
pub fn default_r_grid() -> Vec<f64> {
    (1..=18).map(|k| 0.05 * k as f64).collect()
}

pub fn eigen_residual(mode: &SpectralMode, m: usize, grid: &[f64]) -> Result<EigenResidual> {
    let phi = eigenfunction(mode, m)?;
    let lam = mode.eigenvalue as f64;
    let (mut worst, mut big, mut gap) = (0.0f64, 0.0f64, 0.0f64);
    for &r in grid {
        let v = phi.value(r);
        let lap = laplacian_apply(&phi, mode.n, m, r);
        worst = worst.max((lap - lam * v).abs());
        big = big.max(v.abs());
        let mut z = vec![C64::from(0.0); m];
        z[0] = C64::from(r.sqrt());
        let multi = laplacian_multivariate(|vars| phi.jet(&radius_jet(vars)), mode.n, &z);
        gap = gap.max((multi - C64::from(lap)).norm());
    }
    Ok(EigenResidual {
        n: mode.n,
        l: mode.l,
        m,
        eigenvalue: mode.eigenvalue,
        max_residual: worst,
        max_abs_phi: big,
        reduction_gap: gap,
    })
}

/// Eigen-residuals for every discrete mode with `N` in `ns`, in parallel.
pub fn residual_table(ns: &[u32], m: usize, grid: &[f64]) -> Result<Vec<EigenResidual>> {
    let modes: Vec<SpectralMode> =
        ns.iter().map(|&n| discrete_spectrum(n, m)).collect::<Result<Vec<_>>>()?.into_iter().flatten().collect();
    crate::par::map(&modes, |mode| eigen_residual(mode, m, grid)).into_iter().collect()
}
