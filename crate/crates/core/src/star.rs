//! Perelomov coherent states, covariant symbols and the star product of the
//! noncommutative coordinates on `SU(2,1)/U(2)`.
//!
//! A point `x` is labelled by `g_x = k δ(t) k†` with `k = diag(k', k'')`, and
//! `|x⟩ = T(g_x)|x₀⟩ = exp(t (k X₇ k†)^)|x₀⟩`.
//!
//! Two conventions for the coordinates coexist:
//!
//! * anti-Hermitian: `ξᴾ_A = ⟨x|X̂_A|x⟩ / N`, purely imaginary;
//! * Hermitian: `ξᴴ_A = ⟨x|iX̂_A|x⟩ / N = i ξᴾ_A`, real. This is what
//!   [`NCCoordinates`] stores.
//!
//! Star tables are kept in the anti-Hermitian convention,
//! `Sᴾ_AB = ⟨x|X̂_A X̂_B|x⟩ / N²`; the Hermitian table is `-Sᴾ`.
//! Because the hat map reverses brackets, the commutator half is
//! `(σ/2N) Σ_C f^C_AB ξᴾ_C` with `σ = -1`.

use nalgebra::Schur;
use rand::{Rng, RngExt};
use serde::Serialize;

use crate::fock::{self, boost_cutoff, build_sector, Converged, FockSector, GeneratorMatrices};
use crate::group::{exp_algebra, su21_matrices, GroupElement, Signature, StructureConstants, Su21Basis};
use crate::linalg::{braket, expmv, max_abs, CMatrix, CVector, SparseOp, I, ONE, ZERO};
use crate::{Error, Result, C64};

/// Convergence tolerance for adaptive truncation.
pub const STAR_TOL: f64 = 1e-8;
/// Largest pair cutoff tried by the adaptive routines.
pub const P_CAP: usize = 40;
/// Largest outer-shell amplitude accepted for a coherent state.
pub const LEAKAGE_BOUND: f64 = 1e-8;
/// Relative sign of the hat map on brackets.
pub const BRACKET_SIGN: f64 = -1.0;

const TOL_PARAM: f64 = 1e-10;

/// Parameters `(k', k'', t)` of `g_x = k δ(t) k†`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoherentParam {
    pub kprime: CMatrix,
    pub kdprime: C64,
    pub t: f64,
}

impl CoherentParam {
    pub fn new(kprime: CMatrix, kdprime: C64, t: f64) -> Result<Self> {
        if kprime.shape() != (2, 2) {
            return Err(Error::DimensionMismatch { expected: 2, got: kprime.nrows() });
        }
        if !(t >= 0.0) || !t.is_finite() {
            return Err(Error::InvalidInput(format!("rapidity must be finite and nonnegative, got {t}")));
        }
        let unit = max_abs(&(kprime.adjoint() * &kprime - CMatrix::identity(2, 2)));
        if unit > TOL_PARAM || (kdprime.norm() - 1.0).abs() > TOL_PARAM {
            return Err(Error::NotGammaUnitary { residual: unit.max((kdprime.norm() - 1.0).abs()), tol: TOL_PARAM });
        }
        let dev = (kprime.determinant() * kdprime - ONE).norm();
        if dev > TOL_PARAM {
            return Err(Error::DeterminantNotOne { deviation: dev });
        }
        Ok(Self { kprime, kdprime, t })
    }

    /// The base point `x₀`.
    pub fn origin() -> Self {
        Self { kprime: CMatrix::identity(2, 2), kdprime: ONE, t: 0.0 }
    }

    /// Pure boost along the third axis.
    pub fn boost(t: f64) -> Result<Self> {
        Self::new(CMatrix::identity(2, 2), ONE, t)
    }

    /// Random compact part and `t` uniform in `t_range`.
    pub fn random<R: Rng + ?Sized>(rng: &mut R, t_range: (f64, f64)) -> Result<Self> {
        let t = if t_range.1 > t_range.0 { rng.random_range(t_range.0..t_range.1) } else { t_range.0 };
        let k = random_compact(rng);
        Self::from_compact(&k, t)
    }

    pub fn from_compact(k: &GroupElement, t: f64) -> Result<Self> {
        Self::new(k.mat.view((0, 0), (2, 2)).into_owned(), k.mat[(2, 2)], t)
    }

    /// `k = diag(k', k'')`.
    pub fn k(&self) -> GroupElement {
        let mut mat = CMatrix::zeros(3, 3);
        mat.view_mut((0, 0), (2, 2)).copy_from(&self.kprime);
        mat[(2, 2)] = self.kdprime;
        GroupElement { mat, sig: Signature::rank_one(2) }
    }

    pub fn g_x(&self) -> GroupElement {
        let k = self.k();
        let mat = &k.mat * GroupElement::boost(2, self.t).mat * k.mat.adjoint();
        GroupElement { mat, sig: k.sig }
    }

    /// Same point with `k → k·m`, `m = diag(e^{-2iφ}, e^{iφ}, e^{iφ})` in the
    /// centraliser of `δ(t)`.
    pub fn with_m_phase(&self, phi: f64) -> Self {
        let (u, w) = (C64::from_polar(1.0, -2.0 * phi), C64::from_polar(1.0, phi));
        let m = CMatrix::from_diagonal(&CVector::from_vec(vec![u, w]));
        Self { kprime: &self.kprime * m, kdprime: self.kdprime * w, t: self.t }
    }

    /// `k₀·x`: the point labelled by `k₀ g_x k₀†`.
    pub fn rotated(&self, k0: &GroupElement) -> Result<Self> {
        let k = k0.mul(&self.k());
        Self::from_compact(&k, self.t)
    }

    /// Ball coordinates `Z = g_x·0`.
    pub fn point(&self) -> [C64; 2] {
        let g = self.g_x();
        let d = g.mat[(2, 2)];
        [g.mat[(0, 2)] / d, g.mat[(1, 2)] / d]
    }
}

/// Random element of `S(U(2) × U(1))` from the compact generators.
pub fn random_compact<R: Rng + ?Sized>(rng: &mut R) -> GroupElement {
    let mats = su21_matrices();
    let mut x = CMatrix::zeros(3, 3);
    for a in [0usize, 1, 2, 7] {
        x += &mats[a] * C64::from(rng.random_range(-3.0..3.0));
    }
    let e = crate::linalg::expm(&x);
    GroupElement { mat: e, sig: Signature::rank_one(2) }
}

/// Coordinates `ξ` with `exp(Σ ξ_A X_A) = k` for block-diagonal `k`.
pub fn compact_log(k: &GroupElement, basis: &Su21Basis) -> Result<[f64; 8]> {
    let off = k.mat[(0, 2)].norm() + k.mat[(1, 2)].norm() + k.mat[(2, 0)].norm() + k.mat[(2, 1)].norm();
    if off > TOL_PARAM {
        return Err(Error::InvalidInput(format!("element is not in the compact subgroup (off-block {off:.2e})")));
    }
    let kp = k.mat.view((0, 0), (2, 2)).into_owned();
    let (q, tri) = Schur::new(kp).unpack();
    let logs = CMatrix::from_diagonal(&CVector::from_fn(2, |i, _| tri[(i, i)].ln()));
    let lp = &q * logs * q.adjoint();
    let mut l = CMatrix::zeros(3, 3);
    l.view_mut((0, 0), (2, 2)).copy_from(&lp);
    l[(2, 2)] = -lp.trace();
    let xi = basis.coordinates(&l);
    let back = crate::linalg::expm(&basis.element(&xi).mat);
    let res = max_abs(&(back - &k.mat));
    if res > 1e-9 {
        return Err(Error::NotInAlgebra { residual: res });
    }
    Ok(xi)
}

/// Hermitian-convention coordinates `ξᴴ_A = ⟨x|iX̂_A|x⟩ / N`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NCCoordinates {
    pub xi: [f64; 8],
}

impl NCCoordinates {
    /// `ξᴾ = -i ξᴴ`.
    pub fn anti_hermitian(&self) -> [C64; 8] {
        self.xi.map(|v| -I * v)
    }
}

/// Generators, basis data and the lowest state on one truncated sector.
#[derive(Debug, Clone)]
pub struct Quantizer {
    pub n: u32,
    pub gens: GeneratorMatrices,
    pub basis: Su21Basis,
    number: SparseOp,
}

impl Quantizer {
    pub fn new(n: u32, p_max: usize) -> Result<Self> {
        let sector = build_sector(n, p_max)?;
        let diag: Vec<_> =
            sector.basis().iter().enumerate().map(|(i, s)| (i, i, C64::from(s.nb as f64 - s.pairs() as f64))).collect();
        let number = SparseOp::from_triplets(sector.dim(), &diag);
        Ok(Self { n, gens: GeneratorMatrices::new(sector), basis: Su21Basis::new()?, number })
    }

    pub fn sector(&self) -> &FockSector {
        &self.gens.sector
    }

    pub fn structure(&self) -> &StructureConstants {
        &self.basis.f
    }

    fn lowest(&self) -> CVector {
        let mut v = CVector::zeros(self.sector().dim());
        v[self.sector().lowest_index().expect("full sector")] = ONE;
        v
    }

    /// `T(k)v` for compact `k`; exact on the sector.
    pub fn apply_compact(&self, k: &GroupElement, v: &CVector) -> Result<CVector> {
        let xi = compact_log(k, &self.basis)?;
        Ok(expmv(&self.gens.combination(&xi), v))
    }

    /// `T(δ(t))v`.
    pub fn apply_boost(&self, t: f64, v: &CVector) -> CVector {
        let gen = SparseOp::combination(&[&self.gens.xhat[6]], &[C64::from(t)]);
        expmv(&gen, v)
    }

    /// `T(g)v = T(q†) T(δ) T(k) v` through the Cartan factors of `g`.
    pub fn apply_group(&self, g: &GroupElement, v: &CVector) -> Result<CVector> {
        let cf = crate::group::cartan_decompose(g)?;
        let w = self.apply_compact(&cf.k, v)?;
        let w = self.apply_boost(cf.t, &w);
        self.apply_compact(&cf.q.inverse(), &w)
    }

    /// `|x⟩ = exp(t (k X₇ k†)^) |x₀⟩`.
    pub fn coherent_state(&self, param: &CoherentParam) -> Result<CoherentState> {
        let k = param.k();
        let rotated = &k.mat * &self.basis.x[6].mat * k.mat.adjoint();
        let xi = self.basis.coordinates(&rotated).map(|v| v * param.t);
        let vec = expmv(&self.gens.combination(&xi), &self.lowest());
        let leakage = self.sector().boundary_weight(&vec);
        if leakage > LEAKAGE_BOUND {
            return Err(Error::LeakageExceeded { leakage, bound: LEAKAGE_BOUND });
        }
        Ok(CoherentState { vec, param: param.clone(), n: self.n, p_max: self.sector().p_max, leakage })
    }

    /// `⟨x|F̂|x⟩`.
    pub fn symbol(&self, op: &SparseOp, state: &CoherentState) -> C64 {
        braket(&state.vec, &op.apply(&state.vec))
    }

    /// `⟨x|N̂|x⟩`.
    pub fn number_symbol(&self, state: &CoherentState) -> C64 {
        self.symbol(&self.number, state)
    }

    pub fn xi_coords(&self, state: &CoherentState) -> NCCoordinates {
        let nf = self.n as f64;
        let mut xi = [0.0; 8];
        for (a, g) in self.gens.xhat.iter().enumerate() {
            xi[a] = (I * self.symbol(g, state)).re / nf;
        }
        NCCoordinates { xi }
    }

    /// Full table `Sᴾ_AB = ⟨x|X̂_A X̂_B|x⟩ / N²`.
    pub fn star_table(&self, state: &CoherentState) -> StarTable {
        let nf = self.n as f64;
        let images: Vec<CVector> = self.gens.xhat.iter().map(|g| g.apply(&state.vec)).collect();
        let mut values = [[ZERO; 8]; 8];
        for a in 0..8 {
            for b in 0..8 {
                // X̂_A† = -X̂_A
                values[a][b] = -braket(&images[a], &images[b]) / (nf * nf);
            }
        }
        StarTable { n: self.n, p_used: self.sector().p_max, xi: self.xi_coords(state), values }
    }

    /// `(-1)^n` times the symmetrised expectation `⟨x|X̂_{(A₁}⋯X̂_{Aₙ)}|x⟩`.
    pub fn symmetrized_symbol(&self, indices: &[usize], state: &CoherentState) -> Result<C64> {
        if indices.len() > 4 {
            return Err(Error::InvalidInput(format!("at most four indices, got {}", indices.len())));
        }
        if let Some(&a) = indices.iter().find(|&&a| !(1..=8).contains(&a)) {
            return Err(Error::InvalidInput(format!("basis index {a} outside 1..=8")));
        }
        let perms = permutations(indices);
        let mut acc = ZERO;
        for p in &perms {
            let mut v = state.vec.clone();
            for &a in p.iter().rev() {
                v = self.gens.xhat[a - 1].apply(&v);
            }
            acc += braket(&state.vec, &v);
        }
        let sign = if indices.len().is_multiple_of(2) { 1.0 } else { -1.0 };
        Ok(acc * (sign / perms.len() as f64))
    }

    /// `⟨x|(X̂_A X̂_B) X̂_C|x⟩` against `⟨x|X̂_A (X̂_B X̂_C)|x⟩` with the
    /// products formed as sparse matrices.
    pub fn associativity(&self, abc: [usize; 3], state: &CoherentState) -> Result<AssociativityReport> {
        if abc.iter().any(|a| !(1..=8).contains(a)) {
            return Err(Error::InvalidInput(format!("basis indices {abc:?} outside 1..=8")));
        }
        let [a, b, cc] = abc.map(|i| &self.gens.xhat[i - 1]);
        let left = self.symbol(&a.product(b).product(cc), state);
        let right = self.symbol(&a.product(&b.product(cc)), state);
        let n3 = (self.n as f64).powi(3);
        Ok(AssociativityReport {
            indices: abc,
            left: left / n3,
            right: right / n3,
            residual: (left - right).norm() / n3,
        })
    }
}

fn permutations(items: &[usize]) -> Vec<Vec<usize>> {
    if items.len() <= 1 {
        return vec![items.to_vec()];
    }
    let mut out = Vec::new();
    for i in 0..items.len() {
        let mut rest = items.to_vec();
        let head = rest.remove(i);
        for mut tail in permutations(&rest) {
            tail.insert(0, head);
            out.push(tail);
        }
    }
    out
}

#[derive(Debug, Clone, Serialize)]
pub struct CoherentState {
    pub vec: CVector,
    pub param: CoherentParam,
    pub n: u32,
    pub p_max: usize,
    pub leakage: f64,
}

impl CoherentState {
    pub fn norm(&self) -> f64 {
        self.vec.norm()
    }
}

/// `|x⟩` on a fixed sector `P`.
pub fn coherent_state(param: &CoherentParam, n: u32, p_max: usize) -> Result<CoherentState> {
    Quantizer::new(n, p_max)?.coherent_state(param)
}

fn start_cutoff(n: u32, t: f64) -> usize {
    boost_cutoff(n, t, 0, 1e-6).clamp(6, P_CAP - 2)
}

/// Raises `P` from an estimate for `t` until `key` settles.
pub fn adaptive<T, F>(n: u32, t: f64, mut eval: F) -> Result<Converged<T>>
where
    F: FnMut(&Quantizer) -> Result<(T, C64)>,
{
    fock::adaptive_cutoff(start_cutoff(n, t), P_CAP, STAR_TOL, |p| {
        let q = Quantizer::new(n, p)?;
        match eval(&q) {
            // a leaking state just means the cutoff is still too small
            Err(Error::LeakageExceeded { .. }) if p + 2 <= P_CAP => Ok((None, C64::new(f64::NAN, 0.0))),
            Err(e) => Err(e),
            Ok((v, key)) => Ok((Some(v), key)),
        }
    })
    .and_then(|c| match c.value {
        Some(value) => Ok(Converged { value, p_used: c.p_used, last_change: c.last_change }),
        None => Err(Error::TruncationNotConverged { cutoff: c.p_used, change: c.last_change }),
    })
}

/// `ξᴴ(x)` with adaptive truncation.
pub fn xi_coords(param: &CoherentParam, n: u32) -> Result<Converged<NCCoordinates>> {
    adaptive(n, param.t, |q| {
        let xi = q.xi_coords(&q.coherent_state(param)?);
        let key = xi.xi.iter().enumerate().map(|(a, v)| v * (1.0 + 0.1 * a as f64)).sum::<f64>();
        Ok((xi, C64::from(key)))
    })
}

/// Star products of all coordinate pairs at one point, anti-Hermitian
/// convention.
#[derive(Debug, Clone, Serialize)]
pub struct StarTable {
    pub n: u32,
    pub p_used: usize,
    pub xi: NCCoordinates,
    pub values: [[C64; 8]; 8],
}

impl StarTable {
    /// `(S_AB + S_BA)/2`, real.
    pub fn anticommutator_half(&self, a: usize, b: usize) -> f64 {
        ((self.values[a][b] + self.values[b][a]) * 0.5).re
    }

    /// `(S_AB - S_BA)/2`, imaginary.
    pub fn commutator_half(&self, a: usize, b: usize) -> C64 {
        (self.values[a][b] - self.values[b][a]) * 0.5
    }

    /// `(σ/2N) Σ_C f^C_AB ξᴾ_C`.
    pub fn predicted_commutator_half(&self, f: &StructureConstants, a: usize, b: usize, sign: f64) -> C64 {
        let xp = self.xi.anti_hermitian();
        f.contract(a, b, &xp) * (sign / (2.0 * self.n as f64))
    }

    /// Max over pairs of the commutator-half mismatch for relative sign `sign`.
    pub fn commutator_residual(&self, f: &StructureConstants, sign: f64) -> f64 {
        let mut worst: f64 = 0.0;
        for a in 0..8 {
            for b in 0..8 {
                let d = self.commutator_half(a, b) - self.predicted_commutator_half(f, a, b, sign);
                worst = worst.max(d.norm());
            }
        }
        worst
    }

    /// `max |S_AB - ξᴾ_A ξᴾ_B|`.
    pub fn pointwise_deviation(&self) -> f64 {
        let xp = self.xi.anti_hermitian();
        let mut worst: f64 = 0.0;
        for a in 0..8 {
            for b in 0..8 {
                worst = worst.max((self.values[a][b] - xp[a] * xp[b]).norm());
            }
        }
        worst
    }

    /// Table in the Hermitian convention, `⟨iX̂_A iX̂_B⟩/N² = -S_AB`.
    pub fn hermitian(&self) -> [[C64; 8]; 8] {
        self.values.map(|row| row.map(|v| -v))
    }

    fn key(&self) -> C64 {
        let mut acc = ZERO;
        for a in 0..8 {
            for b in 0..8 {
                acc += self.values[a][b] * (1.0 + 0.01 * (8 * a + b) as f64);
            }
        }
        acc
    }
}

/// Star table with adaptive truncation.
pub fn star_table(param: &CoherentParam, n: u32) -> Result<StarTable> {
    let conv = adaptive(n, param.t, |q| {
        let table = q.star_table(&q.coherent_state(param)?);
        let key = table.key();
        Ok((table, key))
    })?;
    Ok(conv.value)
}

/// One entry of the star product with its decomposition.
#[derive(Debug, Clone, Serialize)]
pub struct StarValue {
    pub a: usize,
    pub b: usize,
    pub value: C64,
    pub anticommutator_half: f64,
    pub commutator_half: C64,
    /// `(σ/2N) Σ f ξᴾ` with the measured `σ = -1`.
    pub predicted_half: C64,
    /// The same with `σ = +1`.
    pub predicted_half_unit_sign: C64,
}

/// `ξ_A ⋆ ξ_B` for one-based indices.
pub fn star(a: usize, b: usize, param: &CoherentParam, n: u32) -> Result<StarValue> {
    if !(1..=8).contains(&a) || !(1..=8).contains(&b) {
        return Err(Error::InvalidInput(format!("basis indices ({a}, {b}) outside 1..=8")));
    }
    let table = star_table(param, n)?;
    let f = &Su21Basis::new()?.f;
    let (i, j) = (a - 1, b - 1);
    Ok(StarValue {
        a,
        b,
        value: table.values[i][j],
        anticommutator_half: table.anticommutator_half(i, j),
        commutator_half: table.commutator_half(i, j),
        predicted_half: table.predicted_commutator_half(f, i, j, BRACKET_SIGN),
        predicted_half_unit_sign: table.predicted_commutator_half(f, i, j, 1.0),
    })
}

// -----------------------------------------------------------------------------
// ω(g, x)
// -----------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct OmegaReport {
    /// `⟨x|T(g)|x⟩` on the truncated sector.
    pub fock: C64,
    pub p_used: usize,
    /// `ω₀(g_x g g_x⁻¹)` with `ω₀` from the truncated boost line.
    pub reduction: C64,
    /// `ω₀(g_x g g_x⁻¹)` in closed form.
    pub reduction_closed_form: C64,
    /// `ω₀(g_x⁻¹ g g_x)`, the other ordering.
    pub swapped_order: C64,
    /// Determinant formula `cosh^{-2N} t · det(M)^{-N}`.
    pub matrix_formula: C64,
    pub route_gap: f64,
    pub swapped_order_gap: f64,
    pub matrix_formula_gap: f64,
}

/// `⟨x|T(g)|x⟩` with adaptive truncation.
pub fn omega_fock(g: &GroupElement, param: &CoherentParam, n: u32) -> Result<Converged<C64>> {
    let t_total = param.t + crate::group::cartan_decompose(g)?.t;
    adaptive(n, t_total, |q| {
        let x = q.coherent_state(param)?;
        let v = braket(&x.vec, &q.apply_group(g, &x.vec)?);
        Ok((v, v))
    })
}

/// `ω₀(g_x g g_x⁻¹) = conj((g_x g g_x⁻¹)₃₃)^{-(N+1)}`.
pub fn omega_closed_form(g: &GroupElement, param: &CoherentParam, n: u32) -> C64 {
    let gx = param.g_x();
    fock::omega0_closed_form(&gx.mul(g).mul(&gx.inverse()), n)
}

/// Determinant formula with `M = a + k'' tanh t b v† - tanh t conj(k'') v c
/// - d tanh²t v v†`, `v` the second column of `k'`.
pub fn omega_matrix_formula(g: &GroupElement, param: &CoherentParam, n: u32) -> C64 {
    let (a, b, cc, d) = g.blocks();
    let v = param.kprime.column(1).into_owned();
    let th = C64::from(param.t.tanh());
    let kd = param.kdprime;
    let m = a + (&b * v.adjoint()) * (kd * th)
        - (&v * cc.transpose()) * (th * kd.conj())
        - (&v * v.adjoint()) * (d * th * th);
    let nf = n as i32;
    m.determinant().powi(-nf) * C64::from(param.t.cosh().powi(-2 * nf))
}

/// All routes to `ω(g, x)`.
pub fn omega(g: &GroupElement, param: &CoherentParam, n: u32) -> Result<OmegaReport> {
    let fock_val = omega_fock(g, param, n)?;
    let gx = param.g_x();
    let h = gx.mul(g).mul(&gx.inverse());
    let reduction = fock::omega0(&h, n, 1e-13)?.value;
    let reduction_closed_form = fock::omega0_closed_form(&h, n);
    let swapped_order = fock::omega0_closed_form(&gx.inverse().mul(g).mul(&gx), n);
    let matrix_formula = omega_matrix_formula(g, param, n);
    let f = fock_val.value;
    Ok(OmegaReport {
        fock: f,
        p_used: fock_val.p_used,
        reduction,
        reduction_closed_form,
        swapped_order,
        matrix_formula,
        route_gap: (f - reduction).norm(),
        swapped_order_gap: (f - swapped_order).norm(),
        matrix_formula_gap: (f - matrix_formula).norm(),
    })
}

/// Symmetrised symbol of one or two indices from Richardson-extrapolated
/// central differences of the closed-form `ω(e^{sY}, x)`; returns the same
/// `(-1)^n` convention as [`Quantizer::symmetrized_symbol`].
pub fn symmetrized_symbol_fd(indices: &[usize], param: &CoherentParam, n: u32, h: f64) -> Result<C64> {
    let basis = Su21Basis::new()?;
    let along = |coeffs: &[(usize, f64)], s: f64| -> Result<C64> {
        let mut xi = [0.0; 8];
        for &(a, w) in coeffs {
            xi[a - 1] += w * s;
        }
        Ok(omega_closed_form(&exp_algebra(&basis.element(&xi))?, param, n))
    };
    let first =
        |coeffs: &[(usize, f64)], h: f64| -> Result<C64> { Ok((along(coeffs, h)? - along(coeffs, -h)?) / (2.0 * h)) };
    let second = |coeffs: &[(usize, f64)], h: f64| -> Result<C64> {
        Ok((along(coeffs, h)? - along(coeffs, 0.0)? * 2.0 + along(coeffs, -h)?) / (h * h))
    };
    let richardson = |d: &dyn Fn(f64) -> Result<C64>| -> Result<C64> { Ok((d(h / 2.0)? * 4.0 - d(h)?) / 3.0) };
    match *indices {
        [] => Ok(ONE),
        [a] => Ok(-richardson(&|h| first(&[(a, 1.0)], h))?),
        [a, b] => {
            // ⟨{X̂_A, X̂_B}⟩/2 = (⟨(X̂_A+X̂_B)²⟩ - ⟨X̂_A²⟩ - ⟨X̂_B²⟩)/2
            let pol =
                |h| Ok((second(&[(a, 1.0), (b, 1.0)], h)? - second(&[(a, 1.0)], h)? - second(&[(b, 1.0)], h)?) * 0.5);
            richardson(&pol)
        }
        _ => Err(Error::InvalidInput("finite differences cover at most two indices".into())),
    }
}

// -----------------------------------------------------------------------------
// Deformation coefficients and large-N behaviour
// -----------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct DeformationEstimate {
    pub n: u32,
    pub a_n: f64,
    pub b_n: f64,
    /// RMS of the affine-model residual.
    pub residual: f64,
    pub condition: f64,
    pub samples: usize,
    /// `max |S_AB - ξᴾ_A ξᴾ_B|` over the sampled points.
    pub pointwise_deviation: f64,
    /// Largest commutator-half mismatch with the measured sign.
    pub commutator_residual: f64,
    pub max_p_used: usize,
}

#[derive(Debug, Clone, Serialize)]
pub struct DeformationFit {
    pub estimates: Vec<DeformationEstimate>,
    /// Log-log slopes of `|A_N|`, `|B_N|` and the pointwise deviation.
    pub a_slope: f64,
    pub b_slope: f64,
    pub pointwise_slope: f64,
}

/// Least-squares fit of `(S_AB + S_BA)/2 - u = A_N u + B_N δ_AB`,
/// `u = ξᴾ_A ξᴾ_B`, over pairs `A ≤ B` and the given points.
pub fn fit_deformation(n: u32, params: &[CoherentParam]) -> Result<DeformationEstimate> {
    let f = Su21Basis::new()?.f;
    let tables = params.iter().map(|p| star_table(p, n)).collect::<Result<Vec<_>>>()?;
    let mut rows = Vec::new();
    for t in &tables {
        let xp = t.xi.anti_hermitian();
        for a in 0..8 {
            for b in a..8 {
                let u = (xp[a] * xp[b]).re;
                rows.push((u, if a == b { 1.0 } else { 0.0 }, t.anticommutator_half(a, b) - u));
            }
        }
    }
    let design = nalgebra::DMatrix::from_fn(rows.len(), 2, |i, j| if j == 0 { rows[i].0 } else { rows[i].1 });
    let rhs = nalgebra::DVector::from_fn(rows.len(), |i, _| rows[i].2);
    let (sol, condition) =
        crate::linalg::least_squares(&design, &rhs).ok_or(Error::FitIllConditioned { condition: f64::INFINITY })?;
    if condition > 1e10 {
        return Err(Error::FitIllConditioned { condition });
    }
    let resid = &design * &sol - &rhs;
    Ok(DeformationEstimate {
        n,
        a_n: sol[0],
        b_n: sol[1],
        residual: (resid.norm_squared() / rows.len() as f64).sqrt(),
        condition,
        samples: rows.len(),
        pointwise_deviation: tables.iter().map(|t| t.pointwise_deviation()).fold(0.0, f64::max),
        commutator_residual: tables.iter().map(|t| t.commutator_residual(&f, BRACKET_SIGN)).fold(0.0, f64::max),
        max_p_used: tables.iter().map(|t| t.p_used).max().unwrap_or(0),
    })
}

/// Slope of `ln|y|` against `ln N`.
pub fn log_log_slope(ns: &[u32], ys: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> =
        ns.iter().zip(ys).filter(|(_, y)| y.abs() > 0.0).map(|(&n, y)| ((n as f64).ln(), y.abs().ln())).collect();
    let k = pts.len() as f64;
    let (mx, my) = pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + p.0 / k, acc.1 + p.1 / k));
    let (sxy, sxx) =
        pts.iter().fold((0.0, 0.0), |acc, p| (acc.0 + (p.0 - mx) * (p.1 - my), acc.1 + (p.0 - mx).powi(2)));
    sxy / sxx
}

/// Deformation fits over `ns` (in parallel) with decay slopes.
pub fn fit_deformation_coeffs(ns: &[u32], params: &[CoherentParam]) -> Result<DeformationFit> {
    let estimates = crate::par::map(ns, |&n| fit_deformation(n, params)).into_iter().collect::<Result<Vec<_>>>()?;
    let pick = |f: fn(&DeformationEstimate) -> f64| estimates.iter().map(f).collect::<Vec<_>>();
    Ok(DeformationFit {
        a_slope: log_log_slope(ns, &pick(|e| e.a_n)),
        b_slope: log_log_slope(ns, &pick(|e| e.b_n)),
        pointwise_slope: log_log_slope(ns, &pick(|e| e.pointwise_deviation)),
        estimates,
    })
}

/// Sample points used for the deformation fit: two small rapidities, each
/// at the base orientation and at a fixed rotated one.
pub fn default_fit_params() -> Result<Vec<CoherentParam>> {
    let basis = Su21Basis::new()?;
    let k = exp_algebra(&basis.element(&[0.7, -0.4, 0.3, 0.0, 0.0, 0.0, 0.0, 0.5]))?;
    let mut out = Vec::new();
    for t in [0.15, 0.25] {
        out.push(CoherentParam::boost(t)?);
        out.push(CoherentParam::from_compact(&k, t)?);
    }
    Ok(out)
}

// -----------------------------------------------------------------------------
// Symmetry checks
// -----------------------------------------------------------------------------

#[derive(Debug, Clone, Serialize)]
pub struct AssociativityReport {
    pub indices: [usize; 3],
    pub left: C64,
    pub right: C64,
    pub residual: f64,
}

#[derive(Debug, Clone, Serialize)]
pub struct StabilityReport {
    /// `1 - |⟨x|x'⟩|` for the `M`-shifted parameters.
    pub m_phase_overlap_defect: f64,
    /// `‖x - x'‖` (the two labels give the same `g_x`).
    pub m_phase_distance: f64,
    /// `⟨x|T(k₀ g_x)|x₀⟩`.
    pub measured_phase: C64,
    /// `k₀''^{N+1}`.
    pub expected_phase: C64,
    pub phase_residual: f64,
}

/// `M`-phase invariance and the stability phase `T(k₀ g_x)|x₀⟩ = k₀''^{N+1}|x⟩`.
pub fn stability_check(param: &CoherentParam, k0: &GroupElement, phi: f64, n: u32) -> Result<StabilityReport> {
    let conv = adaptive(n, param.t, |q| {
        let x = q.coherent_state(param)?;
        let xm = q.coherent_state(&param.with_m_phase(phi))?;
        // T(k₀ g_x) = T(g_x) T(k₀)
        let tk0 = q.apply_compact(k0, &q.lowest())?;
        let k_rot = param.k();
        let rotated = &k_rot.mat * &q.basis.x[6].mat * k_rot.mat.adjoint();
        let xi = q.basis.coordinates(&rotated).map(|v| v * param.t);
        let moved = expmv(&q.gens.combination(&xi), &tk0);
        let phase = braket(&x.vec, &moved);
        let report = StabilityReport {
            m_phase_overlap_defect: 1.0 - braket(&x.vec, &xm.vec).norm(),
            m_phase_distance: (&x.vec - &xm.vec).norm(),
            measured_phase: phase,
            expected_phase: k0.mat[(2, 2)].powi(n as i32 + 1),
            phase_residual: (moved - &x.vec * k0.mat[(2, 2)].powi(n as i32 + 1)).norm(),
        };
        Ok((report, phase))
    })?;
    Ok(conv.value)
}

/// `D_BA` with `k₀⁻¹ X_A k₀ = Σ_B D_BA X_B`.
pub fn coadjoint_matrix(k0: &GroupElement, basis: &Su21Basis) -> [[f64; 8]; 8] {
    let inv = k0.inverse();
    let mut d = [[0.0; 8]; 8];
    for a in 0..8 {
        let y = &inv.mat * &basis.x[a].mat * &k0.mat;
        let coords = basis.coordinates(&y);
        for b in 0..8 {
            d[b][a] = coords[b];
        }
    }
    d
}

/// `max_A |ξ_A(k₀·x) - Σ_B D_BA ξ_B(x)|`.
pub fn equivariance_residual(param: &CoherentParam, k0: &GroupElement, n: u32) -> Result<f64> {
    let basis = Su21Basis::new()?;
    let d = coadjoint_matrix(k0, &basis);
    let xi = xi_coords(param, n)?.value.xi;
    let moved = xi_coords(&param.rotated(k0)?, n)?.value.xi;
    let mut worst: f64 = 0.0;
    for a in 0..8 {
        let pred: f64 = (0..8).map(|b| d[b][a] * xi[b]).sum();
        worst = worst.max((moved[a] - pred).abs());
    }
    Ok(worst)
}

/// Associativity residual at `x` and at `k₀·x`.
pub fn associativity_check(abc: [usize; 3], param: &CoherentParam, k0: &GroupElement, n: u32) -> Result<(f64, f64)> {
    let run = |p: &CoherentParam| -> Result<f64> {
        let conv = adaptive(n, p.t, |q| {
            let r = q.associativity(abc, &q.coherent_state(p)?)?;
            Ok((r.residual, r.left))
        })?;
        Ok(conv.value)
    };
    Ok((run(param)?, run(&param.rotated(k0)?)?))
}
