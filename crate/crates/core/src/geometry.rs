//! Geometry of the Bergman ball `D = {Z ∈ C^m : |Z|² < 1}`.

use std::f64::consts::PI;

use nalgebra::DVector;
use rand::{RngExt, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::group::GroupElement;
use crate::jet::Jet;
use crate::linalg::{max_abs, CMatrix, ONE, ZERO};
use crate::summation::NeumaierSum;
use crate::{par, quad, Error, Result, C64};

/// Points closer than this to the boundary sphere are rejected.
pub const BOUNDARY_GUARD: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DomainPoint {
    pub z: Vec<C64>,
}

impl DomainPoint {
    pub fn new(z: Vec<C64>) -> Result<Self> {
        if z.is_empty() {
            return Err(Error::InvalidInput("a domain point needs m ≥ 1 coordinates".into()));
        }
        let margin = 1.0 - z.iter().map(|v| v.norm_sqr()).sum::<f64>();
        if !(margin >= BOUNDARY_GUARD) {
            return Err(Error::OutsideDomain { margin });
        }
        Ok(Self { z })
    }

    pub fn origin(m: usize) -> Self {
        Self { z: vec![ZERO; m] }
    }

    pub fn m(&self) -> usize {
        self.z.len()
    }

    /// `r = |Z|²`.
    pub fn r(&self) -> f64 {
        self.z.iter().map(|v| v.norm_sqr()).sum()
    }

    pub fn as_vector(&self) -> DVector<C64> {
        DVector::from_column_slice(&self.z)
    }
}

/// `K(W†, Z) = (1 - W†Z)^{-N}`.
pub fn bergman_kernel(w: &DomainPoint, z: &DomainPoint, n: u32) -> Result<C64> {
    if w.m() != z.m() {
        return Err(Error::DimensionMismatch { expected: w.m(), got: z.m() });
    }
    let inner: C64 = w.z.iter().zip(&z.z).map(|(a, b)| a.conj() * b).sum();
    Ok((ONE - inner).powi(-(n as i32)))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MetricData {
    pub g: CMatrix,
    pub g_inv: CMatrix,
    pub at: DomainPoint,
}

impl MetricData {
    /// `max|g g⁻¹ - I|`.
    pub fn inverse_residual(&self) -> f64 {
        let m = self.at.m();
        max_abs(&(&self.g * &self.g_inv - CMatrix::identity(m, m)))
    }
}

/// `g_{ij̄} = δ_ij/(1-r) + z_i z̄_j/(1-r)²` and its inverse
/// `(1-r)(δ_ij - z_i z̄_j)`.
pub fn metric(z: &DomainPoint) -> MetricData {
    let m = z.m();
    let s = 1.0 - z.r();
    let zz = |i: usize, j: usize| z.z[i] * z.z[j].conj();
    let g = CMatrix::from_fn(m, m, |i, j| {
        let d = if i == j { 1.0 / s } else { 0.0 };
        C64::from(d) + zz(i, j) / (s * s)
    });
    let g_inv = CMatrix::from_fn(m, m, |i, j| {
        let d = if i == j { ONE } else { ZERO };
        (d - zz(i, j)) * s
    });
    MetricData { g, g_inv, at: z.clone() }
}

/// Central-difference oracle for the metric: `(1/N) ∂_{z̄_i} ∂_{z_j} log K(Z†, Z)`
/// with Wirtinger derivatives assembled from real partials at step `h`.
///
/// Differences of `log(1 - r)` are evaluated through `ln_1p` of the exact
/// increment of `r`, which keeps cancellation out of the four-point stencils.
pub fn metric_oracle(z: &DomainPoint, n: u32, h: f64) -> CMatrix {
    let m = z.m();
    let r0 = z.r();
    let nf = n as f64;
    // log K(Z+δ) - log K(Z) for a real displacement vector (x₁, y₁, …)
    let dlogk = |delta: &[f64]| -> f64 {
        let mut dr = NeumaierSum::new();
        for k in 0..m {
            let (x, y) = (z.z[k].re, z.z[k].im);
            let (dx, dy) = (delta[2 * k], delta[2 * k + 1]);
            dr.add(2.0 * (x * dx + y * dy));
            dr.add(dx * dx + dy * dy);
        }
        -nf * (-dr.value() / (1.0 - r0)).ln_1p()
    };
    let second = |a: usize, b: usize| -> f64 {
        let mut acc = 0.0;
        for (sa, sb, w) in [(1.0, 1.0, 1.0), (1.0, -1.0, -1.0), (-1.0, 1.0, -1.0), (-1.0, -1.0, 1.0)] {
            let mut d = vec![0.0; 2 * m];
            d[a] += sa * h;
            d[b] += sb * h;
            acc += w * dlogk(&d);
        }
        acc / (4.0 * h * h)
    };
    CMatrix::from_fn(m, m, |i, j| {
        let (xi, yi, xj, yj) = (2 * i, 2 * i + 1, 2 * j, 2 * j + 1);
        let re = second(xi, xj) + second(yi, yj);
        let im = second(yi, xj) - second(xi, yj);
        C64::new(re, im) / (4.0 * nf)
    })
}

/// Antiholomorphic Christoffel symbols `Γ^l̄_{j̄k̄} = (δ_kl z_j + δ_jl z_k)/(1-r)`,
/// flattened with index `(l * m + j) * m + k`.
pub fn christoffel(z: &DomainPoint) -> Vec<C64> {
    let m = z.m();
    let s = 1.0 - z.r();
    let mut out = vec![ZERO; m * m * m];
    for l in 0..m {
        for j in 0..m {
            for k in 0..m {
                let mut v = ZERO;
                if k == l {
                    v += z.z[j];
                }
                if j == l {
                    v += z.z[k];
                }
                out[(l * m + j) * m + k] = v / s;
            }
        }
    }
    out
}

/// The holomorphic symbols `Γ^l_{jk}`, the complex conjugates of [`christoffel`].
pub fn christoffel_holomorphic(z: &DomainPoint) -> Vec<C64> {
    christoffel(z).into_iter().map(|v| v.conj()).collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct CurvatureReport {
    pub m: usize,
    pub christoffel: Vec<C64>,
    /// `R_{ij̄} = -∂_{z_j} Σ_k Γ^k̄_{īk̄}`, differentiated exactly.
    pub ricci: CMatrix,
    /// Scalar curvature in the normalisation `R = -(m+1)` used with Λ.
    pub scalar: f64,
    /// Literal contraction `g^{ij̄} R_{ij̄} = -m(m+1)`.
    pub scalar_contracted: f64,
    /// Measured ratio `R_{ij̄} / g_{ij̄}`, expected `-(m+1)`.
    pub proportionality: f64,
    /// `max|R_{ij̄} + (m+1) g_{ij̄}|`.
    pub kahler_einstein_residual: f64,
    /// `max|R_{ij̄} - ½ g_{ij̄} R + Λ g_{ij̄}|` with `R = -(m+1)`, `Λ = (m+1)/2`.
    pub einstein_residual: f64,
    pub lambda: f64,
    pub ricci_hermitian_residual: f64,
}

/// Ricci tensor by exact differentiation of the Christoffel closed form,
/// with `z` and `w = z̄` treated as independent jet variables.
pub fn ricci_and_scalar(z: &DomainPoint) -> CurvatureReport {
    let m = z.m();
    let mf = m as f64;
    let mut seeds: Vec<C64> = z.z.clone();
    seeds.extend(z.z.iter().map(|v| v.conj()));
    let vars = Jet::variables(&seeds);
    let dim = 2 * m;
    let one = Jet::constant(ONE, dim);
    let mut r = Jet::constant(ZERO, dim);
    for k in 0..m {
        r = &r + &(&vars[k] * &vars[m + k]);
    }
    let inv = (&one - &r).recip();
    // Γ^l̄_{j̄k̄} in polarised variables: the barred symbols carry z.
    let gamma = |l: usize, j: usize, k: usize| -> Jet {
        let mut v = Jet::constant(ZERO, dim);
        if k == l {
            v = &v + &vars[j];
        }
        if j == l {
            v = &v + &vars[k];
        }
        &v * &inv
    };
    let contracted: Vec<Jet> = (0..m)
        .map(|i| {
            let mut acc = Jet::constant(ZERO, dim);
            for k in 0..m {
                acc = &acc + &gamma(k, i, k);
            }
            acc
        })
        .collect();
    let ricci = CMatrix::from_fn(m, m, |i, j| -contracted[i].g[j]);
    let md = metric(z);
    let scalar = -(mf + 1.0);
    let lambda = (mf + 1.0) / 2.0;
    let ke = max_abs(&(&ricci + &md.g * C64::from(mf + 1.0)));
    let ein = max_abs(&(&ricci - &md.g * C64::from(0.5 * scalar) + &md.g * C64::from(lambda)));
    let scalar_contracted = (&md.g_inv * &ricci).trace().re;
    CurvatureReport {
        m,
        christoffel: christoffel(z),
        proportionality: (ricci[(0, 0)] / md.g[(0, 0)]).re,
        ricci_hermitian_residual: max_abs(&(&ricci - ricci.adjoint())),
        ricci,
        scalar,
        scalar_contracted,
        kahler_einstein_residual: ke,
        einstein_residual: ein,
        lambda,
    }
}

/// `Z' = (AZ + B)(CZ + d)^{-1}` for signature `(m, 1)`.
pub fn mobius_action(g: &GroupElement, z: &DomainPoint) -> Result<DomainPoint> {
    let (a, b, cc, d) = g.blocks();
    if a.nrows() != z.m() {
        return Err(Error::DimensionMismatch { expected: a.nrows(), got: z.m() });
    }
    let zv = z.as_vector();
    let den = cc.dot(&zv) + d;
    let num = &a * &zv + b;
    DomainPoint::new((num / den).iter().copied().collect())
}

/// `det(CZ + d)` for signature `(m, 1)`.
pub fn multiplier_base(g: &GroupElement, z: &DomainPoint) -> C64 {
    let (_, _, cc, d) = g.blocks();
    cc.dot(&z.as_vector()) + d
}

/// `c_N = π^{-2}(N-2)(N-1)`, known for `m = 2` only.
pub fn normalization_constant(n: u32, m: usize) -> Result<f64> {
    if m != 2 {
        return Err(Error::NormalizationUnknown { m });
    }
    let nf = n as f64;
    Ok((nf - 2.0) * (nf - 1.0) / (PI * PI))
}

/// Unnormalised weight `(1 - |Z|²)^{N-(m+1)}`; `det(E - Z†Z)` collapses to
/// `1 - |Z|²` for a single column.
pub fn measure_weight(z: &DomainPoint, n: u32) -> f64 {
    (1.0 - z.r()).powi(n as i32 - (z.m() as i32 + 1))
}

/// Normalised density `c_N (1 - |Z|²)^{N-3}` for `m = 2`.
pub fn measure_density(z: &DomainPoint, n: u32) -> Result<f64> {
    if n < z.m() as u32 + 1 {
        return Err(Error::InvalidInput(format!("measure needs N ≥ m+1, got N = {n}")));
    }
    Ok(normalization_constant(n, z.m())? * measure_weight(z, n))
}

/// `∫_D dμ_N` for `m = 2` by reduction to `r = |Z|²`: `d⁴Z = π² r dr`.
pub fn normalization(n: u32) -> Result<(f64, f64)> {
    let cn = normalization_constant(n, 2)?;
    let e = n as i32 - 3;
    let (v, err) = quad::adaptive(|r| r * (1.0 - r).powi(e), 0.0, 1.0, 1e-14);
    Ok((cn * PI * PI * v, cn * PI * PI * err))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MonteCarloEstimate {
    pub value: f64,
    pub std_error: f64,
    pub samples: usize,
}

/// Uniform direction on the unit sphere of `C^m = R^{2m}` by rejection.
fn random_direction(rng: &mut ChaCha8Rng, m: usize) -> Vec<C64> {
    loop {
        let v: Vec<f64> = (0..2 * m).map(|_| rng.random_range(-1.0..1.0)).collect();
        let n2: f64 = v.iter().map(|x| x * x).sum();
        if n2 > 1e-6 && n2 <= 1.0 {
            let n = n2.sqrt();
            return (0..m).map(|k| C64::new(v[2 * k] / n, v[2 * k + 1] / n)).collect();
        }
    }
}

/// Stratified Monte Carlo over the unit ball of `C^m`.
///
/// The volume coordinate `u = ρ^{2m}` is split into `samples` equal strata
/// with one jittered radius and one random direction per stratum. Chunks use
/// independent streams derived from `seed`, so the estimate does not depend
/// on the thread count.
pub fn mc_integrate<F>(f: F, m: usize, samples: usize, seed: u64) -> MonteCarloEstimate
where
    F: Fn(&DomainPoint) -> f64 + Sync + Send,
{
    const CHUNK: usize = 8192;
    let volume = PI.powi(m as i32) / (1..=m).map(|k| k as f64).product::<f64>();
    let partials = par::map_chunks(samples, CHUNK, |start, end| {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream((start / CHUNK) as u64);
        let mut s = NeumaierSum::new();
        let mut s2 = NeumaierSum::new();
        for k in start..end {
            let u = (k as f64 + rng.random::<f64>()) / samples as f64;
            let rho = u.powf(1.0 / (2 * m) as f64);
            let dir = random_direction(&mut rng, m);
            let p = DomainPoint { z: dir.into_iter().map(|d| d * rho).collect() };
            let v = if 1.0 - p.r() >= BOUNDARY_GUARD { f(&p) } else { 0.0 };
            s.add(v);
            s2.add(v * v);
        }
        (s, s2)
    });
    let mut s = NeumaierSum::new();
    let mut s2 = NeumaierSum::new();
    for (a, b) in &partials {
        s.merge(a);
        s2.merge(b);
    }
    let nf = samples as f64;
    let mean = s.value() / nf;
    let var = (s2.value() / nf - mean * mean).max(0.0);
    // the plain-MC error bound; stratification only reduces it
    MonteCarloEstimate { value: volume * mean, std_error: volume * (var / nf).sqrt(), samples }
}

pub fn normalization_mc(n: u32, samples: usize, seed: u64) -> Result<MonteCarloEstimate> {
    let cn = normalization_constant(n, 2)?;
    Ok(mc_integrate(|p| cn * measure_weight(p, n), 2, samples, seed))
}

/// `∫_D F dμ_N` for `m = 2` with a tensor Gauss–Legendre rule in the chart
/// `z₁ = ρ cos θ e^{iφ₁}`, `z₂ = ρ sin θ e^{iφ₂}`.
pub fn ball_integral<F>(f: F, n: u32, nodes: usize) -> Result<f64>
where
    F: Fn(&DomainPoint) -> f64 + Sync + Send,
{
    let cn = normalization_constant(n, 2)?;
    let rho = quad::gauss_legendre(nodes, 0.0, 1.0);
    let theta = quad::gauss_legendre(nodes, 0.0, PI / 2.0);
    let phi = quad::gauss_legendre(nodes, 0.0, 2.0 * PI);
    let rows = par::map(&rho, |&(r, wr)| {
        let mut acc = NeumaierSum::new();
        for &(th, wt) in &theta {
            let jac = r.powi(3) * th.cos() * th.sin();
            for &(p1, w1) in &phi {
                for &(p2, w2) in &phi {
                    let z =
                        DomainPoint { z: vec![C64::from_polar(r * th.cos(), p1), C64::from_polar(r * th.sin(), p2)] };
                    acc.add(wr * wt * w1 * w2 * jac * cn * measure_weight(&z, n) * f(&z));
                }
            }
        }
        acc
    });
    let mut total = NeumaierSum::new();
    for r in &rows {
        total.merge(r);
    }
    Ok(total.value())
}

/// Smooth bump of radius `radius` around `center`.
pub fn bump(center: &DomainPoint, radius: f64) -> impl Fn(&DomainPoint) -> f64 + Sync + Send + '_ {
    move |p: &DomainPoint| {
        let d2: f64 = p.z.iter().zip(&center.z).map(|(a, b)| (a - b).norm_sqr()).sum::<f64>() / (radius * radius);
        if d2 >= 1.0 {
            0.0
        } else {
            (-1.0 / (1.0 - d2)).exp()
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct MeasureInvarianceReport {
    pub reference: f64,
    /// `∫ |det(CZ+d)|^{-2N} F(Z') dμ_N`.
    pub with_multiplier: f64,
    /// `∫ F(Z') dμ_N`, the transport without the multiplier.
    pub bare: f64,
    pub with_multiplier_relative: f64,
    pub bare_relative: f64,
}

/// Compares `∫ F dμ_N` with the transported integrals, with and without the
/// squared modulus of the representation multiplier.
pub fn measure_invariance<F>(g: &GroupElement, n: u32, f: F, nodes: usize) -> Result<MeasureInvarianceReport>
where
    F: Fn(&DomainPoint) -> f64 + Sync + Send,
{
    let reference = ball_integral(&f, n, nodes)?;
    let transported = |p: &DomainPoint, mult: bool| -> f64 {
        let zp = match mobius_action(g, p) {
            Ok(z) => z,
            Err(_) => return 0.0,
        };
        let w = if mult { multiplier_base(g, p).norm().powi(-2 * n as i32) } else { 1.0 };
        w * f(&zp)
    };
    let with_multiplier = ball_integral(|p| transported(p, true), n, nodes)?;
    let bare = ball_integral(|p| transported(p, false), n, nodes)?;
    Ok(MeasureInvarianceReport {
        reference,
        with_multiplier,
        bare,
        with_multiplier_relative: (with_multiplier - reference).abs() / reference.abs(),
        bare_relative: (bare - reference).abs() / reference.abs(),
    })
}

/// `T_N f(Z) = det(CZ+d)^{-N} f(Z')`.
pub fn rep_action<F>(g: &GroupElement, n: u32, f: F, z: &DomainPoint) -> Result<C64>
where
    F: Fn(&DomainPoint) -> C64,
{
    let zp = mobius_action(g, z)?;
    Ok(multiplier_base(g, z).powi(-(n as i32)) * f(&zp))
}

#[derive(Debug, Clone, Copy, Serialize)]
pub struct CocycleReport {
    /// `|T(g₁)T(g₂)f - T(g₂g₁)f|`.
    pub reversed_order: f64,
    /// `|T(g₁)T(g₂)f - T(g₁g₂)f|`.
    pub same_order: f64,
}

/// Composition of the multiplier representation. The pull-back reverses
/// products, `T(g₁)T(g₂) = T(g₂g₁)`; both orders are reported.
pub fn cocycle_check<F>(g1: &GroupElement, g2: &GroupElement, n: u32, f: F, z: &DomainPoint) -> Result<CocycleReport>
where
    F: Fn(&DomainPoint) -> C64 + Copy,
{
    let inner = |p: &DomainPoint| rep_action(g2, n, f, p).unwrap_or(C64::new(f64::NAN, f64::NAN));
    let composed = rep_action(g1, n, inner, z)?;
    let rev = rep_action(&g2.mul(g1), n, f, z)?;
    let same = rep_action(&g1.mul(g2), n, f, z)?;
    Ok(CocycleReport { reversed_order: (composed - rev).norm(), same_order: (composed - same).norm() })
}
