//! Oscillator realisation of the most degenerate discrete series of `SU(2,1)`.
//!
//! With `Ẑ = (â₁, â₂, b̂†)ᵀ` every `X ∈ su(2,1)` is mapped to
//! `X̂ = -Ẑ†ΓXẐ` (ordered as written, so the `b̂ b̂†` term keeps its
//! constant). The operator `N̂ = N_b - N_a` commutes with all `X̂`, so only the
//! block with `N̂ = N` is built. States `|m₁, m₂, n_b⟩` in that block carry
//! `p = m₁ + m₂` pairs and `n_b = N + p`; truncation keeps `p ≤ P`.
//!
//! The map `X ↦ X̂` reverses brackets: `[X̂_A, X̂_B] = -Σ_C f^C_{AB} X̂_C`.
//! Consequently `T(e^X) = e^{X̂}` satisfies `T(g₁)T(g₂) = T(g₂g₁)` together with
//! `T(g) Ẑ T(g)† = gẐ`.

pub mod sumn;

use std::collections::HashMap;

use serde::Serialize;

use crate::group::{cartan_decompose, GroupElement, StructureConstants, Su21Basis};
use crate::linalg::{commutator, expm, expmv, max_abs, CMatrix, CVector, SparseOp, ONE, ZERO};
use crate::{Error, Result, C64};

/// Default bound on the number of retained states.
pub const DEFAULT_STATE_BOUND: usize = 10_000;

/// Occupation numbers of one basis state.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
pub struct Occupation {
    pub m1: usize,
    pub m2: usize,
    pub nb: usize,
}

impl Occupation {
    pub fn pairs(&self) -> usize {
        self.m1 + self.m2
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum SectorShape {
    /// All states with `m₁ + m₂ ≤ P`.
    Full,
    /// Fixed `m₁`, `m₂ ≤ P`; invariant under `X̂₇` and the other
    /// generators that do not touch `â₁`.
    Line { m1: usize },
}

/// Truncated `N̂ = N` block of Fock space.
#[derive(Debug, Clone)]
pub struct FockSector {
    pub n: u32,
    pub p_max: usize,
    pub shape: SectorShape,
    basis: Vec<Occupation>,
    index: HashMap<(usize, usize), usize>,
}

impl FockSector {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[Occupation] {
        &self.basis
    }

    pub fn state(&self, i: usize) -> Occupation {
        self.basis[i]
    }

    pub fn index_of(&self, m1: usize, m2: usize) -> Option<usize> {
        self.index.get(&(m1, m2)).copied()
    }

    /// Index of `|x₀⟩ = |0, 0, N⟩`, present in every full sector.
    pub fn lowest_index(&self) -> Option<usize> {
        self.index_of(0, 0)
    }

    /// Shell label used for the truncation boundary: `p` for full sectors,
    /// `m₂` for lines.
    pub fn shell(&self, i: usize) -> usize {
        match self.shape {
            SectorShape::Full => self.basis[i].pairs(),
            SectorShape::Line { .. } => self.basis[i].m2,
        }
    }

    /// States whose images under a single generator stay inside the basis.
    pub fn is_interior(&self, i: usize) -> bool {
        self.shell(i) < self.p_max
    }

    /// Norm of the amplitude carried by the outermost shell.
    pub fn boundary_weight(&self, v: &CVector) -> f64 {
        (0..self.dim()).filter(|&i| self.shell(i) == self.p_max).map(|i| v[i].norm_sqr()).sum::<f64>().sqrt()
    }

    fn from_states(n: u32, p_max: usize, shape: SectorShape, basis: Vec<Occupation>) -> Self {
        let index = basis.iter().enumerate().map(|(i, o)| ((o.m1, o.m2), i)).collect();
        Self { n, p_max, shape, basis, index }
    }

    /// Sector containing only `m₁ = m1`, `0 ≤ m₂ ≤ p_max`.
    pub fn line(n: u32, m1: usize, p_max: usize) -> Self {
        let basis = (0..=p_max).map(|m2| Occupation { m1, m2, nb: n as usize + m1 + m2 }).collect();
        Self::from_states(n, p_max, SectorShape::Line { m1 }, basis)
    }
}

/// Builds the full truncated sector, graded by `p` and lexicographic in
/// `(m₁, m₂)` within a shell.
pub fn build_sector(n: u32, p_max: usize) -> Result<FockSector> {
    build_sector_with_bound(n, p_max, DEFAULT_STATE_BOUND)
}

pub fn build_sector_with_bound(n: u32, p_max: usize, bound: usize) -> Result<FockSector> {
    if n < 3 {
        return Err(Error::InvalidInput(format!("the discrete series needs N ≥ 3, got {n}")));
    }
    let dim = (p_max + 1) * (p_max + 2) / 2;
    if dim > bound {
        return Err(Error::CutoffTooLarge { dim, bound });
    }
    let mut basis = Vec::with_capacity(dim);
    for p in 0..=p_max {
        for m1 in 0..=p {
            basis.push(Occupation { m1, m2: p - m1, nb: n as usize + p });
        }
    }
    Ok(FockSector::from_states(n, p_max, SectorShape::Full, basis))
}

/// One bosonic ladder operator.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Ladder {
    A1,
    A1Dag,
    A2,
    A2Dag,
    B,
    BDag,
}

impl Ladder {
    /// Action on an occupation state; `None` when the state is annihilated.
    pub fn act(self, s: Occupation) -> Option<(Occupation, f64)> {
        let mut o = s;
        let amp = match self {
            Ladder::A1 => {
                if s.m1 == 0 {
                    return None;
                }
                o.m1 -= 1;
                (s.m1 as f64).sqrt()
            }
            Ladder::A1Dag => {
                o.m1 += 1;
                (o.m1 as f64).sqrt()
            }
            Ladder::A2 => {
                if s.m2 == 0 {
                    return None;
                }
                o.m2 -= 1;
                (s.m2 as f64).sqrt()
            }
            Ladder::A2Dag => {
                o.m2 += 1;
                (o.m2 as f64).sqrt()
            }
            Ladder::B => {
                if s.nb == 0 {
                    return None;
                }
                o.nb -= 1;
                (s.nb as f64).sqrt()
            }
            Ladder::BDag => {
                o.nb += 1;
                (o.nb as f64).sqrt()
            }
        };
        Some((o, amp))
    }

    /// Change of `N̂ = N_b - N_a` caused by this operator.
    pub fn sector_shift(self) -> i64 {
        match self {
            Ladder::A1 | Ladder::A2 | Ladder::BDag => 1,
            Ladder::A1Dag | Ladder::A2Dag | Ladder::B => -1,
        }
    }
}

/// `Ẑ = (â₁, â₂, b̂†)` and `Ẑ† = (â₁†, â₂†, b̂)`.
const ZHAT: [Ladder; 3] = [Ladder::A1, Ladder::A2, Ladder::BDag];
const ZHAT_DAG: [Ladder; 3] = [Ladder::A1Dag, Ladder::A2Dag, Ladder::B];
const GAMMA: [f64; 3] = [1.0, 1.0, -1.0];

/// `X̂ = -Σ_ij Ẑ†_i Γ_ii X_ij Ẑ_j` restricted to `sector`; matrix elements
/// leaving the retained basis are dropped.
pub fn hat(x: &CMatrix, sector: &FockSector) -> SparseOp {
    let mut trips = Vec::new();
    for (col, &s) in sector.basis.iter().enumerate() {
        for i in 0..3 {
            for j in 0..3 {
                let xij = x[(i, j)];
                if xij == ZERO {
                    continue;
                }
                let Some((s1, a1)) = ZHAT[j].act(s) else { continue };
                let Some((s2, a2)) = ZHAT_DAG[i].act(s1) else { continue };
                if let Some(row) = sector.index_of(s2.m1, s2.m2) {
                    debug_assert_eq!(sector.basis[row].nb, s2.nb, "sector leak");
                    trips.push((row, col, xij * (-GAMMA[i] * a1 * a2)));
                }
            }
        }
    }
    SparseOp::from_triplets(sector.dim(), &trips)
}

/// Hat image of the basis generator `X_A` (one-based `a`).
pub fn generator_matrix(a: usize, sector: &FockSector) -> Result<SparseOp> {
    if !(1..=8).contains(&a) {
        return Err(Error::InvalidInput(format!("basis index {a} outside 1..=8")));
    }
    Ok(hat(&crate::group::su21_matrices()[a - 1], sector))
}

/// All eight generators on one sector.
#[derive(Debug, Clone)]
pub struct GeneratorMatrices {
    pub xhat: Vec<SparseOp>,
    pub sector: FockSector,
}

impl GeneratorMatrices {
    pub fn new(sector: FockSector) -> Self {
        let xhat = crate::group::su21_matrices().iter().map(|x| hat(x, &sector)).collect();
        Self { xhat, sector }
    }

    /// `Σ_A ξ_A X̂_A`.
    pub fn combination(&self, xi: &[f64; 8]) -> SparseOp {
        let ops: Vec<&SparseOp> = self.xhat.iter().collect();
        let w: Vec<C64> = xi.iter().map(|&v| C64::from(v)).collect();
        SparseOp::combination(&ops, &w)
    }
}

/// `N̂ = N_b - N_a` on the sector (diagonal).
pub fn number_operator(sector: &FockSector) -> CMatrix {
    let d = sector.dim();
    CMatrix::from_fn(d, d, |i, j| {
        if i == j {
            let s = sector.basis[i];
            C64::from(s.nb as f64 - (s.m1 + s.m2) as f64)
        } else {
            ZERO
        }
    })
}

/// Unit vector `|x₀⟩ = (b̂†)^N / √(N!) |0⟩`.
#[derive(Debug, Clone)]
pub struct LowestWeightState {
    pub vec: CVector,
    pub n: u32,
}

pub fn lowest_weight(sector: &FockSector) -> Result<LowestWeightState> {
    let i0 =
        sector.lowest_index().ok_or_else(|| Error::InvalidInput("sector does not contain the lowest state".into()))?;
    let mut vec = CVector::zeros(sector.dim());
    vec[i0] = ONE;
    Ok(LowestWeightState { vec, n: sector.n })
}

// -----------------------------------------------------------------------------
// Algebra checks on a sector
// -----------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct BracketReport {
    pub n: u32,
    pub p_max: usize,
    /// Measured relative sign σ in `[X̂_A, X̂_B] = σ Σ f^C_{AB} X̂_C`.
    pub sign: f64,
    /// Interior residual with the measured sign.
    pub max_residual: f64,
    /// Interior residual with the opposite sign (the homomorphism reading
    /// for σ = -1).
    pub opposite_sign_residual: f64,
    pub anti_hermitian_residual: f64,
    pub number_commutator: f64,
}

/// Columns restricted to interior states, all rows.
fn interior_max(m: &CMatrix, sector: &FockSector) -> f64 {
    let mut worst: f64 = 0.0;
    for j in (0..sector.dim()).filter(|&j| sector.is_interior(j)) {
        for i in 0..sector.dim() {
            worst = worst.max(m[(i, j)].norm());
        }
    }
    worst
}

/// Bracket, anti-Hermiticity and commutant checks on a full sector.
pub fn bracket_report(sector: &FockSector, f: &StructureConstants) -> BracketReport {
    let gens: Vec<CMatrix> = GeneratorMatrices::new(sector.clone()).xhat.iter().map(|x| x.to_dense()).collect();
    let residual_for = |sign: f64| {
        let mut worst: f64 = 0.0;
        for a in 0..8 {
            for b in a + 1..8 {
                let mut r = commutator(&gens[a], &gens[b]);
                for (cc, g) in gens.iter().enumerate() {
                    let w = f.get(cc, a, b);
                    if w != 0.0 {
                        r -= g * C64::from(sign * w);
                    }
                }
                worst = worst.max(interior_max(&r, sector));
            }
        }
        worst
    };
    let minus = residual_for(-1.0);
    let plus = residual_for(1.0);
    let (sign, max_residual, opposite) = if minus <= plus { (-1.0, minus, plus) } else { (1.0, plus, minus) };
    let nop = number_operator(sector);
    let mut anti: f64 = 0.0;
    let mut ncomm: f64 = 0.0;
    for g in &gens {
        anti = anti.max(max_abs(&(g + g.adjoint())));
        ncomm = ncomm.max(max_abs(&commutator(&nop, g)));
    }
    BracketReport {
        n: sector.n,
        p_max: sector.p_max,
        sign,
        max_residual,
        opposite_sign_residual: opposite,
        anti_hermitian_residual: anti,
        number_commutator: ncomm,
    }
}

// -----------------------------------------------------------------------------
// Group representation
// -----------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct RepExponential {
    pub matrix: CMatrix,
    /// Largest outer-shell amplitude over interior columns.
    pub leakage: f64,
    /// `max|U†U - I|`; zero up to rounding because the truncated generator
    /// is exactly anti-Hermitian.
    pub unitarity_residual: f64,
}

/// Dense `exp(Σ_A ξ_A X̂_A)` on a sector.
pub fn rep_exponential(xi: &[f64; 8], sector: &FockSector, leakage_bound: f64) -> Result<RepExponential> {
    let gens = GeneratorMatrices::new(sector.clone());
    let matrix = expm(&gens.combination(xi).to_dense());
    let d = sector.dim();
    let mut leakage: f64 = 0.0;
    for j in (0..d).filter(|&j| sector.is_interior(j)) {
        leakage = leakage.max(sector.boundary_weight(&matrix.column(j).into_owned()));
    }
    let unitarity_residual = max_abs(&(matrix.adjoint() * &matrix - CMatrix::identity(d, d)));
    if leakage > leakage_bound {
        return Err(Error::LeakageExceeded { leakage, bound: leakage_bound });
    }
    Ok(RepExponential { matrix, leakage, unitarity_residual })
}

/// Maps a vector between sectors with one ladder operator, dropping states
/// outside the target basis.
pub fn apply_ladder(op: Ladder, from: &FockSector, to: &FockSector, v: &CVector) -> CVector {
    debug_assert_eq!(to.n as i64, from.n as i64 + op.sector_shift());
    let mut out = CVector::zeros(to.dim());
    for (i, &s) in from.basis.iter().enumerate() {
        if v[i] == ZERO {
            continue;
        }
        if let Some((t, amp)) = op.act(s) {
            if let Some(j) = to.index_of(t.m1, t.m2) {
                out[j] += v[i] * amp;
            }
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct BogolyubovReport {
    pub n: u32,
    pub t: f64,
    pub p_used: usize,
    /// `max ‖(T a₂ - (cosh t a₂ + sinh t b†) T) e_j‖` over the tested columns.
    pub a2_residual: f64,
    /// `max ‖(T a₁ - a₁ T) e_j‖`.
    pub a1_residual: f64,
    /// The same identity with the adjoint action reversed,
    /// `T† a₂ T = cosh t a₂ + sinh t b†`, for comparison.
    pub reversed_residual: f64,
    pub columns: usize,
    pub boundary_weight: f64,
}

/// Pair cutoff for a boost of rapidity `t` acting on columns up to
/// `extra` pairs: the tail amplitude `√C(N+p, p) tanh^p` must fall below
/// `tol`.
pub fn boost_cutoff(n: u32, t: f64, extra: usize, tol: f64) -> usize {
    let th = t.abs().tanh();
    if th == 0.0 {
        return extra + 4;
    }
    let big_n = (n as usize + 2 * extra + 2) as f64;
    let mut log_amp = 0.0f64;
    let mut p = 0usize;
    loop {
        p += 1;
        log_amp += 0.5 * ((big_n + p as f64) / p as f64).ln() + th.ln();
        if (p > 4 && log_amp < tol.ln()) || p > 5000 {
            return p + extra + 4;
        }
    }
}

/// Checks `T(δ_t) â₂ T(δ_t)† = cosh t â₂ + sinh t b̂†` and the invariance of
/// `â₁` as matrix identities between the `N` and `N+1` sectors, on the
/// columns with at most `max_shell` pairs.
///
/// `T = exp(t X̂₇)` preserves `m₁`, so each column is propagated on a line
/// sector with a pair cutoff large enough for the tail to be negligible.
pub fn bogolyubov_check(n: u32, t: f64, max_shell: usize) -> Result<BogolyubovReport> {
    let p = boost_cutoff(n + 1, t, max_shell, 1e-15);
    let x7 = &crate::group::su21_matrices()[6];
    let (ch, sh) = (C64::from(t.cosh()), C64::from(t.sinh()));
    let mut a2_res: f64 = 0.0;
    let mut a1_res: f64 = 0.0;
    let mut rev_res: f64 = 0.0;
    let mut boundary: f64 = 0.0;
    let mut columns = 0;
    for m1 in 0..=max_shell {
        let src = FockSector::line(n, m1, p);
        let dst = FockSector::line(n + 1, m1, p);
        let gen_src = hat(x7, &src);
        let gen_dst = hat(x7, &dst);
        let scaled = |g: &SparseOp, s: f64| SparseOp::combination(&[g], &[C64::from(s)]);
        let (t_src, t_dst) = (scaled(&gen_src, t), scaled(&gen_dst, t));
        let tinv_dst = scaled(&gen_dst, -t);
        let a1_dst = (m1 > 0).then(|| FockSector::line(n + 1, m1 - 1, p));
        let t_a1 = a1_dst.as_ref().map(|s| scaled(&hat(x7, s), t));
        for m2 in 0..=(max_shell - m1) {
            columns += 1;
            let mut e = CVector::zeros(src.dim());
            e[m2] = ONE;
            let te = expmv(&t_src, &e);
            boundary = boundary.max(src.boundary_weight(&te));
            // T a₂ e
            let lhs = expmv(&t_dst, &apply_ladder(Ladder::A2, &src, &dst, &e));
            // (cosh a₂ + sinh b†) T e
            let rhs = apply_ladder(Ladder::A2, &src, &dst, &te) * ch + apply_ladder(Ladder::BDag, &src, &dst, &te) * sh;
            a2_res = a2_res.max((lhs - rhs).norm());
            // reversed reading: T† a₂ T e versus (cosh a₂ + sinh b†) e
            let rev_l = expmv(&tinv_dst, &apply_ladder(Ladder::A2, &src, &dst, &te));
            let rev_r = apply_ladder(Ladder::A2, &src, &dst, &e) * ch + apply_ladder(Ladder::BDag, &src, &dst, &e) * sh;
            rev_res = rev_res.max((rev_l - rev_r).norm());
            if let (Some(d1), Some(ta1)) = (&a1_dst, &t_a1) {
                let l = expmv(ta1, &apply_ladder(Ladder::A1, &src, d1, &e));
                let r = apply_ladder(Ladder::A1, &src, d1, &te);
                a1_res = a1_res.max((l - r).norm());
            }
        }
    }
    Ok(BogolyubovReport {
        n,
        t,
        p_used: p,
        a2_residual: a2_res,
        a1_residual: a1_res,
        reversed_residual: rev_res,
        columns,
        boundary_weight: boundary,
    })
}

// -----------------------------------------------------------------------------
// Vacuum expectation ω₀
// -----------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, Serialize)]
pub struct Converged<T> {
    pub value: T,
    pub p_used: usize,
    pub last_change: f64,
}

/// Raises the cutoff in steps of two until successive values differ by less
/// than `tol`.
pub fn adaptive_cutoff<T, F>(p_start: usize, p_cap: usize, tol: f64, mut eval: F) -> Result<Converged<T>>
where
    F: FnMut(usize) -> Result<(T, C64)>,
{
    let mut p = p_start;
    let (_, mut prev_key) = eval(p)?;
    let mut change = f64::INFINITY;
    while p + 2 <= p_cap {
        p += 2;
        let (cur, key) = eval(p)?;
        change = (key - prev_key).norm();
        prev_key = key;
        if change < tol {
            return Ok(Converged { value: cur, p_used: p, last_change: change });
        }
    }
    Err(Error::TruncationNotConverged { cutoff: p, change })
}

/// `ω₀(δ(t)) = ⟨x₀| e^{t X̂₇} |x₀⟩` on the `m₁ = 0` line, with adaptive cutoff.
pub fn omega0_delta(t: f64, n: u32, tol: f64) -> Result<Converged<C64>> {
    let x7 = &crate::group::su21_matrices()[6];
    let start = (boost_cutoff(n, t, 0, 1e-6)).max(8);
    adaptive_cutoff(start, 4000, tol, |p| {
        let line = FockSector::line(n, 0, p);
        let gen = SparseOp::combination(&[&hat(x7, &line)], &[C64::from(t)]);
        let mut e = CVector::zeros(line.dim());
        e[0] = ONE;
        let v = expmv(&gen, &e)[0];
        Ok((v, v))
    })
}

/// `⟨x₀| exp(Σ ξ_A X̂_A) |x₀⟩` on full sectors with adaptive cutoff.
pub fn omega0_direct(xi: &[f64; 8], n: u32, tol: f64, p_cap: usize) -> Result<Converged<C64>> {
    adaptive_cutoff(6, p_cap, tol, |p| {
        let sector = build_sector(n, p)?;
        let gens = GeneratorMatrices::new(sector.clone());
        let x0 = lowest_weight(&sector)?;
        let v = expmv(&gens.combination(xi), &x0.vec)[sector.lowest_index().unwrap()];
        Ok((v, v))
    })
}

#[derive(Debug, Clone, Serialize)]
pub struct Omega0Value {
    pub value: C64,
    pub t: f64,
    /// `k''` and `q''` of the Cartan factors.
    pub k_phase: C64,
    pub q_phase: C64,
    /// `ω₀(δ(t))` from the truncated sector.
    pub delta_value: C64,
    pub p_used: usize,
    /// `conj(g₃₃)^{-(N+1)}` for comparison.
    pub closed_form: C64,
}

/// `ω₀(g)` through the Cartan reduction `ω₀(kδq†) = (k'' conj q'')^{N+1} ω₀(δ)`
/// with `ω₀(δ)` computed on the truncated sector.
pub fn omega0(g: &GroupElement, n: u32, tol: f64) -> Result<Omega0Value> {
    let cf = cartan_decompose(g)?;
    let d = omega0_delta(cf.t, n, tol)?;
    let (kp, qp) = (cf.k_phase(), cf.q_phase());
    let phase = (kp * qp.conj()).powi(n as i32 + 1);
    Ok(Omega0Value {
        value: phase * d.value,
        t: cf.t,
        k_phase: kp,
        q_phase: qp,
        delta_value: d.value,
        p_used: d.p_used,
        closed_form: omega0_closed_form(g, n),
    })
}

/// `ω₀(g) = conj(g_{33})^{-(N+1)}`.
pub fn omega0_closed_form(g: &GroupElement, n: u32) -> C64 {
    let m = g.sig.m;
    g.mat[(m, m)].conj().powi(-(n as i32 + 1))
}

/// Closed-form candidates for `ω₀(δ(t))`.
#[derive(Debug, Clone, Serialize)]
pub struct Omega0Candidates {
    /// `(cosh t)^{-1} (1 + ln cosh t)^N`, the series-summation expression.
    pub series_expression: f64,
    /// `(cosh t)^{-N} (1 + ln cosh t)^N`.
    pub series_expression_power_n: f64,
    /// `(c, (cosh t)^{-(N+c)})` for small integers `c`.
    pub pure_powers: Vec<(i32, f64)>,
}

pub const POWER_OFFSETS: [i32; 5] = [-1, 0, 1, 2, 3];

pub fn omega0_candidates(t: f64, n: u32) -> Omega0Candidates {
    let ch = t.cosh();
    let nf = n as f64;
    Omega0Candidates {
        series_expression: (1.0 + ch.ln()).powf(nf) / ch,
        series_expression_power_n: ((1.0 + ch.ln()) / ch).powf(nf),
        pure_powers: POWER_OFFSETS.iter().map(|&c| (c, ch.powf(-(nf + c as f64)))).collect(),
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct Omega0Adjudication {
    pub n: u32,
    pub t_grid: Vec<f64>,
    pub numeric: Vec<f64>,
    pub max_imaginary: f64,
    pub p_used: Vec<usize>,
    pub last_change: Vec<f64>,
    /// Max deviation of each pure power `c` over the grid.
    pub power_deviation: Vec<(i32, f64)>,
    pub series_expression_deviation: f64,
    pub series_expression_power_n_deviation: f64,
    /// Best-matching offset `c` in `(cosh t)^{-(N+c)}`.
    pub best_offset: i32,
    pub best_deviation: f64,
}

/// Compares the truncated-sector `ω₀(δ(t))` with the closed-form candidates.
pub fn adjudicate_omega0(n: u32, t_grid: &[f64], tol: f64) -> Result<Omega0Adjudication> {
    let vals = crate::par::map(t_grid, |&t| omega0_delta(t, n, tol));
    let vals = vals.into_iter().collect::<Result<Vec<_>>>()?;
    let numeric: Vec<f64> = vals.iter().map(|v| v.value.re).collect();
    let max_imaginary = vals.iter().fold(0.0f64, |a, v| a.max(v.value.im.abs()));
    let mut power_deviation: Vec<(i32, f64)> = POWER_OFFSETS.iter().map(|&c| (c, 0.0)).collect();
    let (mut ser, mut ser_n) = (0.0f64, 0.0f64);
    for (&t, &v) in t_grid.iter().zip(&numeric) {
        let cand = omega0_candidates(t, n);
        for (slot, (_, val)) in power_deviation.iter_mut().zip(&cand.pure_powers) {
            slot.1 = slot.1.max((val - v).abs());
        }
        ser = ser.max((cand.series_expression - v).abs());
        ser_n = ser_n.max((cand.series_expression_power_n - v).abs());
    }
    let (best_offset, best_deviation) =
        power_deviation.iter().copied().min_by(|a, b| a.1.partial_cmp(&b.1).unwrap()).unwrap();
    Ok(Omega0Adjudication {
        n,
        t_grid: t_grid.to_vec(),
        numeric,
        max_imaginary,
        p_used: vals.iter().map(|v| v.p_used).collect(),
        last_change: vals.iter().map(|v| v.last_change).collect(),
        power_deviation,
        series_expression_deviation: ser,
        series_expression_power_n_deviation: ser_n,
        best_offset,
        best_deviation,
    })
}

/// Phase picked up by `|x₀⟩` under a compact element: returns the measured
/// `⟨x₀|T(k)|x₀⟩` together with `k''^N` and `k''^{N+1}`.
pub fn rotation_phase(basis: &Su21Basis, xi: &[f64; 8], n: u32) -> Result<(C64, C64, C64)> {
    let sector = build_sector(n, 4)?;
    let gens = GeneratorMatrices::new(sector.clone());
    let x0 = lowest_weight(&sector)?;
    let v = expmv(&gens.combination(xi), &x0.vec);
    let k = expm(&basis.element(xi).mat);
    let kd = k[(2, 2)];
    Ok((v[sector.lowest_index().unwrap()], kd.powi(n as i32), kd.powi(n as i32 + 1)))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sector_examples() {
        let s = build_sector(3, 0).unwrap();
        assert_eq!(s.dim(), 1);
        assert_eq!(s.state(0), Occupation { m1: 0, m2: 0, nb: 3 });
        assert_eq!(build_sector(3, 2).unwrap().dim(), 6);
        assert_eq!(build_sector(5, 8).unwrap().dim(), 45);
        assert!(matches!(build_sector(3, 200), Err(Error::CutoffTooLarge { .. })));
        let s = build_sector(4, 3).unwrap();
        let order: Vec<(usize, usize)> = s.basis().iter().map(|o| (o.m1, o.m2)).collect();
        assert_eq!(&order[..6], &[(0, 0), (0, 1), (1, 0), (0, 2), (1, 1), (2, 0)]);
        assert!(s.basis().iter().all(|o| o.nb - o.m1 - o.m2 == 4));
    }

    #[test]
    fn x8_on_lowest_state() {
        for n in 3..7 {
            let s = build_sector(n, 3).unwrap();
            let x8 = generator_matrix(8, &s).unwrap();
            let x0 = lowest_weight(&s).unwrap();
            let v = x8.apply(&x0.vec);
            let expect = C64::new(0.0, -(2.0 * n as f64 + 2.0) / 3f64.sqrt());
            assert!((v[0] - expect).norm() < 1e-13);
            assert!(v.iter().skip(1).all(|z| *z == ZERO));
            for a in 4..=7 {
                let w = generator_matrix(a, &s).unwrap().apply(&x0.vec);
                assert_eq!(w[0], ZERO);
            }
        }
    }

    #[test]
    fn rotations_keep_pairs_boosts_shift_them() {
        let s = build_sector(4, 5).unwrap();
        for a in 1..=8 {
            let g = generator_matrix(a, &s).unwrap();
            for (r, c, _) in g.triplets() {
                let dp = s.state(r).pairs() as i64 - s.state(c).pairs() as i64;
                if [1, 2, 3, 8].contains(&a) {
                    assert_eq!(dp, 0);
                } else {
                    assert_eq!(dp.abs(), 1);
                }
            }
        }
    }

    #[test]
    fn brackets_close_with_reversed_sign() {
        let basis = Su21Basis::new().unwrap();
        let rep = bracket_report(&build_sector(4, 6).unwrap(), &basis.f);
        assert_eq!(rep.sign, -1.0);
        assert!(rep.max_residual < 1e-12);
        assert!(rep.opposite_sign_residual > 1.0);
        assert_eq!(rep.number_commutator, 0.0);
        assert!(rep.anti_hermitian_residual < 1e-14);
    }

    #[test]
    fn omega0_matches_power_n_plus_one() {
        for &(n, t) in &[(4u32, 0.5f64), (3, 0.3), (6, 1.0)] {
            let v = omega0_delta(t, n, 1e-12).unwrap();
            assert!((v.value.re - t.cosh().powi(-(n as i32 + 1))).abs() < 1e-10, "N={n} t={t}: {:?}", v);
        }
    }

    #[test]
    fn rotation_phase_uses_n_plus_one() {
        let basis = Su21Basis::new().unwrap();
        let mut xi = [0.0; 8];
        xi[7] = 0.7;
        let (measured, _pow_n, pow_n1) = rotation_phase(&basis, &xi, 5).unwrap();
        assert!((measured - pow_n1).norm() < 1e-12);
        let mut xi3 = [0.0; 8];
        xi3[2] = 0.9;
        let (measured, _, _) = rotation_phase(&basis, &xi3, 5).unwrap();
        assert!((measured - ONE).norm() < 1e-13);
    }

    #[test]
    fn bogolyubov_small_t() {
        let r = bogolyubov_check(4, 0.4, 3).unwrap();
        assert!(r.a2_residual < 1e-10, "{r:?}");
        assert!(r.a1_residual < 1e-10);
        assert!(r.reversed_residual > 1e-3);
    }
}
