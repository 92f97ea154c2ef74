//! Matrix-level `SU(m,n)` and `su(m,n)`.
//!
//! Besides validation and the exponential map this module carries the
//! explicit eight-element `su(2,1)` basis, structure constants under the
//! trace form `-tr(XY)`, the `K δ K` factorisation for real rank one, and the
//! holomorphic Killing vectors of the ball in two flavours: the tabulated
//! coefficient functions and the ones derived from the Möbius action together
//! with the multiplier `det(CZ+d)^{-N}`.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, RngExt};
use serde::Serialize;

use crate::linalg::{c, commutator, expm, max_abs, CMatrix, I, ONE, ZERO};
use crate::{Error, Result, C64};

pub const TOL_GROUP: f64 = 1e-10;
pub const TOL_ALG: f64 = 1e-10;

/// Block structure `(m, n)` and the form `Γ = diag(1×m, -1×n)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct Signature {
    pub m: usize,
    pub n: usize,
}

impl Signature {
    pub fn new(m: usize, n: usize) -> Result<Self> {
        if m == 0 || n == 0 {
            return Err(Error::InvalidInput(format!("signature ({m},{n}) needs m, n ≥ 1")));
        }
        Ok(Self { m, n })
    }

    /// The rank-one signature `(m, 1)`.
    pub fn rank_one(m: usize) -> Self {
        Self { m: m.max(1), n: 1 }
    }

    pub fn size(&self) -> usize {
        self.m + self.n
    }

    pub fn gamma(&self) -> CMatrix {
        let d = self.size();
        CMatrix::from_fn(d, d, |i, j| {
            if i != j {
                ZERO
            } else if i < self.m {
                ONE
            } else {
                -ONE
            }
        })
    }

    pub fn gamma_diag(&self, i: usize) -> f64 {
        if i < self.m {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroupElement {
    pub mat: CMatrix,
    pub sig: Signature,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AlgebraElement {
    pub mat: CMatrix,
    pub sig: Signature,
}

/// `max|g†Γg - Γ|`.
pub fn gamma_unitarity_residual(mat: &CMatrix, sig: Signature) -> f64 {
    let gamma = sig.gamma();
    max_abs(&(mat.adjoint() * &gamma * mat - &gamma))
}

pub fn validate_group(mat: CMatrix, sig: Signature) -> Result<GroupElement> {
    validate_group_with_tol(mat, sig, TOL_GROUP)
}

pub fn validate_group_with_tol(mat: CMatrix, sig: Signature, tol: f64) -> Result<GroupElement> {
    let d = sig.size();
    if mat.nrows() != d || mat.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: mat.nrows().max(mat.ncols()) });
    }
    let residual = gamma_unitarity_residual(&mat, sig);
    if residual > tol {
        return Err(Error::NotGammaUnitary { residual, tol });
    }
    let deviation = (mat.determinant() - ONE).norm();
    if deviation > tol {
        return Err(Error::DeterminantNotOne { deviation });
    }
    Ok(GroupElement { mat, sig })
}

pub fn validate_algebra(mat: CMatrix, sig: Signature) -> Result<AlgebraElement> {
    let d = sig.size();
    if mat.nrows() != d || mat.ncols() != d {
        return Err(Error::DimensionMismatch { expected: d, got: mat.nrows().max(mat.ncols()) });
    }
    let gamma = sig.gamma();
    let residual = max_abs(&(mat.adjoint() * &gamma + &gamma * &mat)).max(mat.trace().norm());
    if residual > TOL_ALG {
        return Err(Error::NotInAlgebra { residual });
    }
    Ok(AlgebraElement { mat, sig })
}

impl GroupElement {
    pub fn identity(sig: Signature) -> Self {
        let d = sig.size();
        Self { mat: CMatrix::identity(d, d), sig }
    }

    /// Elementary boost mixing coordinate `m` (last of the first block) with
    /// coordinate `m+1`, for signature `(m, 1)`.
    pub fn boost(m: usize, t: f64) -> Self {
        let sig = Signature::rank_one(m);
        let mut mat = CMatrix::identity(m + 1, m + 1);
        mat[(m - 1, m - 1)] = c(t.cosh(), 0.0);
        mat[(m, m)] = c(t.cosh(), 0.0);
        mat[(m - 1, m)] = c(t.sinh(), 0.0);
        mat[(m, m - 1)] = c(t.sinh(), 0.0);
        Self { mat, sig }
    }

    /// Block-diagonal element `diag(k', k'')` of the compact subgroup.
    pub fn compact(kprime: &CMatrix, kdprime: C64) -> Result<Self> {
        let m = kprime.nrows();
        let mut mat = CMatrix::zeros(m + 1, m + 1);
        mat.view_mut((0, 0), (m, m)).copy_from(kprime);
        mat[(m, m)] = kdprime;
        validate_group(mat, Signature::rank_one(m))
    }

    pub fn mul(&self, other: &GroupElement) -> GroupElement {
        GroupElement { mat: &self.mat * &other.mat, sig: self.sig }
    }

    /// Inverse through the form: `g⁻¹ = Γ g† Γ`.
    pub fn inverse(&self) -> GroupElement {
        let gamma = self.sig.gamma();
        GroupElement { mat: &gamma * self.mat.adjoint() * &gamma, sig: self.sig }
    }

    /// Residual of `g†Γg = Γ` and `|det g - 1|`, whichever is larger.
    pub fn residual(&self) -> f64 {
        gamma_unitarity_residual(&self.mat, self.sig).max((self.mat.determinant() - ONE).norm())
    }

    /// Blocks `(a, b, c, d)` for signature `(m, 1)`.
    pub fn blocks(&self) -> (CMatrix, DVector<C64>, DVector<C64>, C64) {
        let m = self.sig.m;
        let a = self.mat.view((0, 0), (m, m)).into_owned();
        let b = DVector::from_iterator(m, (0..m).map(|i| self.mat[(i, m)]));
        let cc = DVector::from_iterator(m, (0..m).map(|j| self.mat[(m, j)]));
        (a, b, cc, self.mat[(m, m)])
    }
}

impl AlgebraElement {
    pub fn zero(sig: Signature) -> Self {
        let d = sig.size();
        Self { mat: CMatrix::zeros(d, d), sig }
    }

    pub fn scaled(&self, s: f64) -> Self {
        Self { mat: &self.mat * C64::from(s), sig: self.sig }
    }
}

/// Exponential map `su(m,n) → SU(m,n)`. The result is validated with a
/// tolerance that scales with its size, since `‖e^X‖` grows like `e^{‖X‖}`.
pub fn exp_algebra(x: &AlgebraElement) -> Result<GroupElement> {
    let e = expm(&x.mat);
    let scale = e.norm().powi(2).max(1.0);
    validate_group_with_tol(e, x.sig, TOL_GROUP * scale)
}

// -----------------------------------------------------------------------------
// The su(2,1) basis
// -----------------------------------------------------------------------------

/// The eight generators `X_1 … X_8` as 3×3 matrices (zero-based order).
pub fn su21_matrices() -> Vec<CMatrix> {
    let z = ZERO;
    let o = ONE;
    let i = I;
    let s3 = 3f64.sqrt();
    let m = |rows: [[C64; 3]; 3]| CMatrix::from_fn(3, 3, |r, col| rows[r][col]);
    vec![
        m([[z, i, z], [i, z, z], [z, z, z]]),
        m([[z, o, z], [-o, z, z], [z, z, z]]),
        m([[i, z, z], [z, -i, z], [z, z, z]]),
        m([[z, z, i], [z, z, z], [-i, z, z]]),
        m([[z, z, o], [z, z, z], [o, z, z]]),
        m([[z, z, z], [z, z, i], [z, -i, z]]),
        m([[z, z, z], [z, z, o], [z, o, z]]),
        m([[i / s3, z, z], [z, i / s3, z], [z, z, -2.0 * i / s3]]),
    ]
}

/// Structure constants `f^C_{AB}` of a basis, `[X_A, X_B] = Σ_C f^C_{AB} X_C`.
#[derive(Debug, Clone, Serialize)]
pub struct StructureConstants {
    pub dim: usize,
    /// Flat storage, index `(c * dim + a) * dim + b`.
    pub f: Vec<f64>,
    /// Largest residual of projecting a commutator back onto the basis.
    pub projection_residual: f64,
    pub antisymmetry_residual: f64,
    pub jacobi_residual: f64,
    /// Diagonal of the Gram matrix `-tr(X_A X_B)`.
    pub gram_diagonal: Vec<f64>,
}

impl StructureConstants {
    #[inline]
    pub fn get(&self, cc: usize, a: usize, b: usize) -> f64 {
        self.f[(cc * self.dim + a) * self.dim + b]
    }

    /// `Σ_C f^C_{AB} v_C` for any vector of coordinates.
    pub fn contract<T>(&self, a: usize, b: usize, v: &[T]) -> T
    where
        T: Copy + std::ops::Mul<f64, Output = T> + std::iter::Sum<T>,
    {
        (0..self.dim).map(|cc| v[cc] * self.get(cc, a, b)).sum()
    }
}

/// Projects all commutators of `basis` onto the basis under `-tr(XY)`.
///
/// The Gram matrix is solved in full, so the basis need not be orthogonal.
pub fn structure_constants(basis: &[CMatrix]) -> Result<StructureConstants> {
    let dim = basis.len();
    let gram = DMatrix::from_fn(dim, dim, |a, b| -(&basis[a] * &basis[b]).trace().re);
    let lu = gram.clone().lu();
    let mut f = vec![0.0; dim * dim * dim];
    let mut projection_residual: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            let comm = commutator(&basis[a], &basis[b]);
            let rhs = DVector::from_fn(dim, |cc, _| -(&basis[cc] * &comm).trace().re);
            let coef = lu.solve(&rhs).ok_or_else(|| Error::InvalidInput("degenerate trace form on basis".into()))?;
            let mut recon = CMatrix::zeros(comm.nrows(), comm.ncols());
            for cc in 0..dim {
                f[(cc * dim + a) * dim + b] = coef[cc];
                recon += &basis[cc] * C64::from(coef[cc]);
            }
            let residual = max_abs(&(comm - recon));
            if residual > 1e-12 {
                return Err(Error::BasisNotClosed { a: a + 1, b: b + 1, residual });
            }
            projection_residual = projection_residual.max(residual);
        }
    }
    let idx = |cc: usize, a: usize, b: usize| (cc * dim + a) * dim + b;
    let mut antisymmetry_residual: f64 = 0.0;
    let mut jacobi_residual: f64 = 0.0;
    for a in 0..dim {
        for b in 0..dim {
            for cc in 0..dim {
                antisymmetry_residual = antisymmetry_residual.max((f[idx(cc, a, b)] + f[idx(cc, b, a)]).abs());
                for e in 0..dim {
                    let mut s = 0.0;
                    for d in 0..dim {
                        s += f[idx(d, a, b)] * f[idx(e, d, cc)]
                            + f[idx(d, b, cc)] * f[idx(e, d, a)]
                            + f[idx(d, cc, a)] * f[idx(e, d, b)];
                    }
                    jacobi_residual = jacobi_residual.max(s.abs());
                }
            }
        }
    }
    Ok(StructureConstants {
        dim,
        f,
        projection_residual,
        antisymmetry_residual,
        jacobi_residual,
        gram_diagonal: (0..dim).map(|a| gram[(a, a)]).collect(),
    })
}

/// The `su(2,1)` basis with its structure constants.
#[derive(Debug, Clone)]
pub struct Su21Basis {
    pub x: Vec<AlgebraElement>,
    pub f: StructureConstants,
}

impl Su21Basis {
    pub fn new() -> Result<Self> {
        let sig = Signature::rank_one(2);
        let mats = su21_matrices();
        let f = structure_constants(&mats)?;
        let x = mats.into_iter().map(|m| validate_algebra(m, sig)).collect::<Result<Vec<_>>>()?;
        Ok(Self { x, f })
    }

    /// `Σ_A ξ_A X_A`.
    pub fn element(&self, xi: &[f64; 8]) -> AlgebraElement {
        let mut mat = CMatrix::zeros(3, 3);
        for (a, &w) in xi.iter().enumerate() {
            mat += &self.x[a].mat * C64::from(w);
        }
        AlgebraElement { mat, sig: self.x[0].sig }
    }

    /// Real coordinates of an algebra element in this basis.
    pub fn coordinates(&self, x: &CMatrix) -> [f64; 8] {
        let mut out = [0.0; 8];
        for (a, o) in out.iter_mut().enumerate() {
            *o = -(&self.x[a].mat * x).trace().re / self.f.gram_diagonal[a];
        }
        out
    }

    pub fn mats(&self) -> Vec<CMatrix> {
        self.x.iter().map(|x| x.mat.clone()).collect()
    }
}

/// Basis of `su(m,n)` of the form `iΓH` with `H` Hermitian and `tr(ΓH) = 0`.
pub fn su_basis(sig: Signature) -> Vec<CMatrix> {
    let d = sig.size();
    let gamma = sig.gamma();
    let mut herm = Vec::new();
    for k in 0..d - 1 {
        let mut h = CMatrix::zeros(d, d);
        h[(k, k)] = C64::from(sig.gamma_diag(k));
        h[(k + 1, k + 1)] = C64::from(-sig.gamma_diag(k + 1));
        herm.push(h);
    }
    for j in 0..d {
        for k in j + 1..d {
            let mut h = CMatrix::zeros(d, d);
            h[(j, k)] = ONE;
            h[(k, j)] = ONE;
            herm.push(h);
            let mut h = CMatrix::zeros(d, d);
            h[(j, k)] = I;
            h[(k, j)] = -I;
            herm.push(h);
        }
    }
    herm.into_iter().map(|h| &gamma * h * I).collect()
}

/// Uniformly drawn coordinates in `[-1, 1]^8`, rescaled to Frobenius norm
/// `scale` in the `su(2,1)` basis.
pub fn random_algebra<R: Rng + ?Sized>(basis: &Su21Basis, rng: &mut R, scale: f64) -> (AlgebraElement, [f64; 8]) {
    let mut xi = [0.0; 8];
    for v in xi.iter_mut() {
        *v = rng.random_range(-1.0..1.0);
    }
    let raw = basis.element(&xi);
    let s = scale / raw.mat.norm();
    for v in xi.iter_mut() {
        *v *= s;
    }
    (basis.element(&xi), xi)
}

// -----------------------------------------------------------------------------
// Cartan K δ K
// -----------------------------------------------------------------------------

#[derive(Debug, Clone)]
pub struct CartanFactors {
    pub k: GroupElement,
    pub t: f64,
    pub q: GroupElement,
}

impl CartanFactors {
    pub fn reassemble(&self) -> CMatrix {
        let m = self.k.sig.m;
        &self.k.mat * GroupElement::boost(m, self.t).mat * self.q.mat.adjoint()
    }

    /// `k''`, the phase of the one-dimensional block of `k`.
    pub fn k_phase(&self) -> C64 {
        let m = self.k.sig.m;
        self.k.mat[(m, m)]
    }

    pub fn q_phase(&self) -> C64 {
        let m = self.q.sig.m;
        self.q.mat[(m, m)]
    }
}

/// Unitary `m × m` matrix with prescribed unit last column and unit
/// determinant (Gram–Schmidt from the standard basis, then a phase fix on the
/// first column). For `m = 1` the determinant cannot be adjusted.
fn complete_to_special_unitary(u: &DVector<C64>) -> CMatrix {
    let m = u.len();
    let mut cols: Vec<DVector<C64>> = vec![u.clone()];
    // order candidates by smallest overlap with u for stability
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&i, &j| u[i].norm().partial_cmp(&u[j].norm()).unwrap());
    for &e in &order {
        if cols.len() == m {
            break;
        }
        let mut v = DVector::from_fn(m, |i, _| if i == e { ONE } else { ZERO });
        for _ in 0..2 {
            for w in &cols {
                let p = w.dotc(&v);
                v -= w * p;
            }
        }
        let n = v.norm();
        if n > 1e-8 {
            cols.push(v / C64::from(n));
        }
    }
    let mut mat = CMatrix::zeros(m, m);
    for (j, col) in cols.iter().skip(1).enumerate() {
        mat.set_column(j, col);
    }
    mat.set_column(m - 1, u);
    if m > 1 {
        let det = mat.determinant();
        let fix = det.conj() / det.norm();
        let first = mat.column(0) * fix;
        mat.set_column(0, &first);
    }
    mat
}

/// `g = k δ(t) q†` for signature `(m, 1)`, from the last row of `g`:
/// `sinh t = ‖c‖`, `k'' = d / cosh t`. For `m ≥ 2` the residual `M`-freedom
/// is fixed by `q'' = 1`; for `m = 1` by `q'' = conj(q')`.
pub fn cartan_decompose(g: &GroupElement) -> Result<CartanFactors> {
    let sig = g.sig;
    if sig.n != 1 {
        return Err(Error::InvalidInput("Cartan factorisation implemented for n = 1 only".into()));
    }
    let m = sig.m;
    let (a, _b, cc, d) = g.blocks();
    let s = cc.norm();
    let t = s.asinh();
    let ch = t.cosh();
    if m == 1 {
        // k = diag(conj κ, κ), q = diag(conj ρ, ρ): d = κ ch conj ρ, c = κ sh ρ.
        let (kd, qd) = if s < 1e-14 {
            (d, ONE)
        } else {
            let kappa = (cc[0] * d / (s * ch)).sqrt();
            let rho = (d / (kappa * ch)).conj();
            (kappa, rho)
        };
        let k = GroupElement { mat: CMatrix::from_diagonal(&DVector::from_vec(vec![kd.conj(), kd])), sig };
        let q = GroupElement { mat: CMatrix::from_diagonal(&DVector::from_vec(vec![qd.conj(), qd])), sig };
        return Ok(CartanFactors { k, t, q });
    }
    let kdd = d / ch;
    let qp = if s < 1e-14 {
        CMatrix::identity(m, m)
    } else {
        let u = cc.map(|z| z.conj() * kdd / s);
        complete_to_special_unitary(&u)
    };
    let mut inv_diag = DVector::from_element(m, ONE);
    inv_diag[m - 1] = C64::from(1.0 / ch);
    let kp = &a * &qp * CMatrix::from_diagonal(&inv_diag);
    let mut kmat = CMatrix::zeros(m + 1, m + 1);
    kmat.view_mut((0, 0), (m, m)).copy_from(&kp);
    kmat[(m, m)] = kdd;
    let mut qmat = CMatrix::zeros(m + 1, m + 1);
    qmat.view_mut((0, 0), (m, m)).copy_from(&qp);
    qmat[(m, m)] = ONE;
    Ok(CartanFactors { k: GroupElement { mat: kmat, sig }, t, q: GroupElement { mat: qmat, sig } })
}

/// Radial Haar weight `ρ(t) = sinh²t · sinh 2t` in the `K δ K` chart.
pub fn haar_density(t: f64) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidInput(format!("Haar density needs t ≥ 0, got {t}")));
    }
    Ok(t.sinh().powi(2) * (2.0 * t).sinh())
}

// -----------------------------------------------------------------------------
// Killing vectors on the ball (m = 2)
// -----------------------------------------------------------------------------

/// First-order operator `v₁ ∂/∂z₁ + v₂ ∂/∂z₂ + s` evaluated at a point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct KillingVector {
    pub coeffs: [C64; 2],
    pub scalar: C64,
}

/// The tabulated holomorphic vector fields, including the constant scalar of
/// `X̂_8`. Index `a` is one-based.
pub fn killing_vector(a: usize, z: [C64; 2], rep_n: C64) -> Result<KillingVector> {
    let poly = killing_polys(a, rep_n, KillingFlavour::Tabulated)?;
    Ok(poly.eval(z))
}

/// Vector field and multiplier of the infinitesimal Möbius action
/// `T_N f(Z) = det(CZ+d)^{-N} f((AZ+B)(CZ+d)^{-1})`:
/// `v(Z) = aZ + b - Z(cZ + d)`, `s(Z) = -N (cZ + d)`.
pub fn killing_vector_mobius(a: usize, z: [C64; 2], rep_n: C64) -> Result<KillingVector> {
    let poly = killing_polys(a, rep_n, KillingFlavour::Mobius)?;
    Ok(poly.eval(z))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum KillingFlavour {
    Tabulated,
    Mobius,
}

/// Dense polynomial in `(z₁, z₂)` of total degree below [`Poly2::CAP`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Poly2 {
    c: [[C64; Poly2::CAP]; Poly2::CAP],
}

impl Poly2 {
    pub const CAP: usize = 6;

    pub fn zero() -> Self {
        Self { c: [[ZERO; Self::CAP]; Self::CAP] }
    }

    pub fn monomial(coef: C64, i: usize, j: usize) -> Self {
        let mut p = Self::zero();
        p.c[i][j] = coef;
        p
    }

    pub fn add(&self, o: &Poly2) -> Poly2 {
        let mut p = *self;
        for i in 0..Self::CAP {
            for j in 0..Self::CAP {
                p.c[i][j] += o.c[i][j];
            }
        }
        p
    }

    pub fn scale(&self, s: C64) -> Poly2 {
        let mut p = *self;
        for row in p.c.iter_mut() {
            for v in row.iter_mut() {
                *v *= s;
            }
        }
        p
    }

    pub fn mul(&self, o: &Poly2) -> Poly2 {
        let mut p = Self::zero();
        for i in 0..Self::CAP {
            for j in 0..Self::CAP {
                if self.c[i][j] == ZERO {
                    continue;
                }
                for k in 0..Self::CAP - i {
                    for l in 0..Self::CAP - j {
                        if o.c[k][l] != ZERO {
                            p.c[i + k][j + l] += self.c[i][j] * o.c[k][l];
                        }
                    }
                }
            }
        }
        p
    }

    /// Derivative in variable 0 (`z₁`) or 1 (`z₂`).
    pub fn diff(&self, var: usize) -> Poly2 {
        let mut p = Self::zero();
        for i in 0..Self::CAP {
            for j in 0..Self::CAP {
                let (e, ti, tj) = if var == 0 { (i, i.wrapping_sub(1), j) } else { (j, i, j.wrapping_sub(1)) };
                if e > 0 {
                    p.c[ti][tj] += self.c[i][j] * e as f64;
                }
            }
        }
        p
    }

    pub fn eval(&self, z: [C64; 2]) -> C64 {
        let mut acc = ZERO;
        for i in 0..Self::CAP {
            for j in 0..Self::CAP {
                if self.c[i][j] != ZERO {
                    acc += self.c[i][j] * z[0].powi(i as i32) * z[1].powi(j as i32);
                }
            }
        }
        acc
    }

    pub fn max_coeff(&self) -> f64 {
        self.c.iter().flatten().fold(0.0, |a, z| a.max(z.norm()))
    }
}

/// Killing vector as polynomial coefficient functions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FirstOrderOp {
    pub v: [Poly2; 2],
    pub s: Poly2,
}

impl FirstOrderOp {
    pub fn eval(&self, z: [C64; 2]) -> KillingVector {
        KillingVector { coeffs: [self.v[0].eval(z), self.v[1].eval(z)], scalar: self.s.eval(z) }
    }

    /// `L[p] = v·∇p + s p`.
    pub fn apply(&self, p: &Poly2) -> Poly2 {
        self.v[0].mul(&p.diff(0)).add(&self.v[1].mul(&p.diff(1))).add(&self.s.mul(p))
    }

    /// Operator commutator `[self, o]`, again first order.
    pub fn commutator(&self, o: &FirstOrderOp) -> FirstOrderOp {
        let vec_part = |k: usize| {
            let lhs = self.v[0].mul(&o.v[k].diff(0)).add(&self.v[1].mul(&o.v[k].diff(1)));
            let rhs = o.v[0].mul(&self.v[k].diff(0)).add(&o.v[1].mul(&self.v[k].diff(1)));
            lhs.add(&rhs.scale(-ONE))
        };
        let s_lhs = self.v[0].mul(&o.s.diff(0)).add(&self.v[1].mul(&o.s.diff(1)));
        let s_rhs = o.v[0].mul(&self.s.diff(0)).add(&o.v[1].mul(&self.s.diff(1)));
        FirstOrderOp { v: [vec_part(0), vec_part(1)], s: s_lhs.add(&s_rhs.scale(-ONE)) }
    }

    pub fn combine(ops: &[FirstOrderOp], w: &[f64]) -> FirstOrderOp {
        let mut out = FirstOrderOp { v: [Poly2::zero(); 2], s: Poly2::zero() };
        for (op, &x) in ops.iter().zip(w) {
            let s = C64::from(x);
            out.v[0] = out.v[0].add(&op.v[0].scale(s));
            out.v[1] = out.v[1].add(&op.v[1].scale(s));
            out.s = out.s.add(&op.s.scale(s));
        }
        out
    }

    pub fn sub(&self, o: &FirstOrderOp) -> FirstOrderOp {
        FirstOrderOp::combine(&[*self, *o], &[1.0, -1.0])
    }

    /// Largest coefficient of the vector part and of the scalar part.
    pub fn size(&self) -> (f64, f64) {
        (self.v[0].max_coeff().max(self.v[1].max_coeff()), self.s.max_coeff())
    }
}

pub fn killing_polys(a: usize, rep_n: C64, flavour: KillingFlavour) -> Result<FirstOrderOp> {
    if !(1..=8).contains(&a) {
        return Err(Error::InvalidInput(format!("basis index {a} outside 1..=8")));
    }
    match flavour {
        KillingFlavour::Tabulated => Ok(tabulated(a, rep_n)),
        KillingFlavour::Mobius => Ok(from_mobius(&su21_matrices()[a - 1], rep_n)),
    }
}

fn tabulated(a: usize, rep_n: C64) -> FirstOrderOp {
    let mono = Poly2::monomial;
    let z = Poly2::zero();
    let s3 = 3f64.sqrt();
    let (v0, v1, s) = match a {
        1 => (mono(I, 0, 1), mono(I, 1, 0), z),
        2 => (mono(ONE, 0, 1), mono(-ONE, 1, 0), z),
        3 => (mono(I, 1, 0), mono(-I, 0, 1), z),
        4 => (mono(I, 0, 0).add(&mono(I, 2, 0)), mono(I, 1, 1), z),
        5 => (mono(ONE, 0, 0).add(&mono(-ONE, 2, 0)), mono(-ONE, 1, 1), z),
        6 => (mono(I, 1, 1), mono(I, 0, 0).add(&mono(I, 0, 2)), z),
        7 => (mono(-ONE, 1, 1), mono(ONE, 0, 0).add(&mono(-ONE, 0, 2)), z),
        _ => (mono(-I / s3, 1, 0), mono(-I / s3, 0, 1), mono(rep_n * 2.0 * I / s3, 0, 0)),
    };
    FirstOrderOp { v: [v0, v1], s }
}

fn from_mobius(x: &CMatrix, rep_n: C64) -> FirstOrderOp {
    let zlin = [Poly2::monomial(ONE, 1, 0), Poly2::monomial(ONE, 0, 1)];
    // cZ + d, a scalar polynomial
    let cz_d = zlin[0].scale(x[(2, 0)]).add(&zlin[1].scale(x[(2, 1)])).add(&Poly2::monomial(x[(2, 2)], 0, 0));
    let comp = |i: usize| {
        zlin[0]
            .scale(x[(i, 0)])
            .add(&zlin[1].scale(x[(i, 1)]))
            .add(&Poly2::monomial(x[(i, 2)], 0, 0))
            .add(&zlin[i].mul(&cz_d).scale(-ONE))
    };
    FirstOrderOp { v: [comp(0), comp(1)], s: cz_d.scale(-rep_n) }
}

/// Bracket closure of the Killing operators against the matrix structure
/// constants: `[L_A, L_B] = σ Σ_C f^C_{AB} L_C`.
#[derive(Debug, Clone, Serialize)]
pub struct KillingBracketReport {
    pub flavour: KillingFlavour,
    pub sign: f64,
    /// `(A, B, vector residual, scalar residual)` with one-based indices.
    pub pairs: Vec<(usize, usize, f64, f64)>,
    pub max_vector_residual: f64,
    pub max_scalar_residual: f64,
    pub failing_pairs: usize,
}

pub fn killing_bracket_report(
    f: &StructureConstants,
    rep_n: f64,
    flavour: KillingFlavour,
    sign: f64,
) -> Result<KillingBracketReport> {
    let ops = (1..=8).map(|a| killing_polys(a, C64::from(rep_n), flavour)).collect::<Result<Vec<_>>>()?;
    let mut pairs = Vec::new();
    let (mut mv, mut ms, mut failing) = (0.0f64, 0.0f64, 0);
    for a in 0..8 {
        for b in a + 1..8 {
            let lhs = ops[a].commutator(&ops[b]);
            let w: Vec<f64> = (0..8).map(|cc| sign * f.get(cc, a, b)).collect();
            let rhs = FirstOrderOp::combine(&ops, &w);
            let (rv, rs) = lhs.sub(&rhs).size();
            if rv > 1e-12 || rs > 1e-12 {
                failing += 1;
            }
            mv = mv.max(rv);
            ms = ms.max(rs);
            pairs.push((a + 1, b + 1, rv, rs));
        }
    }
    Ok(KillingBracketReport {
        flavour,
        sign,
        pairs,
        max_vector_residual: mv,
        max_scalar_residual: ms,
        failing_pairs: failing,
    })
}

/// Picks the bracket sign (±1) with the smaller total residual.
pub fn measured_killing_sign(
    f: &StructureConstants,
    rep_n: f64,
    flavour: KillingFlavour,
) -> Result<(f64, KillingBracketReport, KillingBracketReport)> {
    let plus = killing_bracket_report(f, rep_n, flavour, 1.0)?;
    let minus = killing_bracket_report(f, rep_n, flavour, -1.0)?;
    let total = |r: &KillingBracketReport| r.pairs.iter().map(|p| p.2 + p.3).sum::<f64>();
    let sign = if total(&minus) < total(&plus) { -1.0 } else { 1.0 };
    Ok((sign, plus, minus))
}
