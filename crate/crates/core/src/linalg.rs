//! Dense and sparse complex linear algebra used across the crate.

use nalgebra::{DMatrix, DVector};
use nalgebra_sparse::{CooMatrix, CsrMatrix};

use crate::C64;

pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const I: C64 = C64::new(0.0, 1.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const ZERO: C64 = C64::new(0.0, 0.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Largest entry modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

pub fn max_abs_vec(v: &CVector) -> f64 {
    v.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// Maximum absolute column sum.
pub fn norm1(m: &CMatrix) -> f64 {
    (0..m.ncols()).map(|j| m.column(j).iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

pub fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Matrix exponential by scaling and squaring around a Taylor kernel.
///
/// The argument is scaled until its 1-norm is at most 1/2; the series is
/// then summed until the next term is below machine precision relative to
/// the partial sum.
pub fn expm(a: &CMatrix) -> CMatrix {
    assert!(a.is_square(), "expm needs a square matrix");
    let n = a.nrows();
    let nrm = norm1(a);
    let s = if nrm > 0.5 { (nrm / 0.5).log2().ceil() as i32 } else { 0 };
    let scaled = a * C64::from(0.5f64.powi(s));
    let mut result = CMatrix::identity(n, n);
    let mut term = CMatrix::identity(n, n);
    for k in 1..40 {
        term = &term * &scaled * C64::from(1.0 / k as f64);
        result += &term;
        if norm1(&term) <= 1e-18 * norm1(&result) {
            break;
        }
    }
    for _ in 0..s {
        result = &result * &result;
    }
    result
}

/// Compressed sparse row operator with complex entries.
#[derive(Debug, Clone)]
pub struct SparseOp {
    csr: CsrMatrix<C64>,
}

impl SparseOp {
    /// Builds an `n × n` operator from `(row, col, value)` triplets;
    /// duplicates are summed.
    pub fn from_triplets(n: usize, triplets: &[(usize, usize, C64)]) -> Self {
        let mut coo = CooMatrix::new(n, n);
        for &(r, c, v) in triplets {
            if v != ZERO {
                coo.push(r, c, v);
            }
        }
        Self { csr: CsrMatrix::from(&coo) }
    }

    pub fn dim(&self) -> usize {
        self.csr.nrows()
    }

    pub fn nnz(&self) -> usize {
        self.csr.nnz()
    }

    pub fn csr(&self) -> &CsrMatrix<C64> {
        &self.csr
    }

    /// `y = self · x`.
    pub fn apply_into(&self, x: &[C64], y: &mut [C64]) {
        let (offsets, cols, vals) = self.csr.csr_data();
        for (i, yi) in y.iter_mut().enumerate() {
            let mut acc = ZERO;
            for k in offsets[i]..offsets[i + 1] {
                acc += vals[k] * x[cols[k]];
            }
            *yi = acc;
        }
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        let mut y = CVector::zeros(self.dim());
        self.apply_into(x.as_slice(), y.as_mut_slice());
        y
    }

    /// Maximum absolute column sum.
    pub fn norm1(&self) -> f64 {
        let mut cols = vec![0.0; self.dim()];
        for (_, c, v) in self.csr.triplet_iter() {
            cols[c] += v.norm();
        }
        cols.into_iter().fold(0.0, f64::max)
    }

    /// Sparse product `self · other`.
    pub fn product(&self, other: &SparseOp) -> SparseOp {
        SparseOp { csr: &self.csr * &other.csr }
    }

    /// Hermitian adjoint.
    pub fn adjoint(&self) -> SparseOp {
        let trips: Vec<_> = self.csr.triplet_iter().map(|(r, c, v)| (c, r, v.conj())).collect();
        SparseOp::from_triplets(self.dim(), &trips)
    }

    pub fn to_dense(&self) -> CMatrix {
        let n = self.dim();
        let mut m = CMatrix::zeros(n, n);
        for (r, c, v) in self.csr.triplet_iter() {
            m[(r, c)] += *v;
        }
        m
    }

    pub fn triplets(&self) -> Vec<(usize, usize, C64)> {
        self.csr.triplet_iter().map(|(r, c, v)| (r, c, *v)).collect()
    }

    /// `Σ_k coeffs[k] · ops[k]`; all operators must share a dimension.
    pub fn combination(ops: &[&SparseOp], coeffs: &[C64]) -> SparseOp {
        assert_eq!(ops.len(), coeffs.len());
        let n = ops.first().map_or(0, |o| o.dim());
        let mut trips = Vec::new();
        for (op, &w) in ops.iter().zip(coeffs) {
            if w == ZERO {
                continue;
            }
            assert_eq!(op.dim(), n, "dimension mismatch in combination");
            trips.extend(op.csr.triplet_iter().map(|(r, c, v)| (r, c, w * *v)));
        }
        SparseOp::from_triplets(n, &trips)
    }
}

/// Action of the exponential, `exp(op) · v`, without forming the matrix.
///
/// The interval is split into `s = ⌈‖op‖₁⌉` steps; each step sums the Taylor
/// series of `exp(op / s)` applied to the running vector until the terms stop
/// contributing at double precision.
pub fn expmv(op: &SparseOp, v: &CVector) -> CVector {
    let nrm = op.norm1();
    let steps = nrm.ceil().max(1.0) as usize;
    let h = 1.0 / steps as f64;
    let n = op.dim();
    let mut cur = v.clone();
    let mut term = CVector::zeros(n);
    let mut next = CVector::zeros(n);
    for _ in 0..steps {
        term.copy_from(&cur);
        let mut acc = cur.clone();
        for k in 1..80 {
            op.apply_into(term.as_slice(), next.as_mut_slice());
            let scale = h / k as f64;
            for (t, x) in term.iter_mut().zip(next.iter()) {
                *t = *x * scale;
            }
            acc += &term;
            let tn = term.norm();
            if tn <= 1e-17 * acc.norm() || tn == 0.0 {
                break;
            }
        }
        cur = acc;
    }
    cur
}

/// Inner product `⟨a|b⟩` (conjugate-linear in the first slot).
pub fn braket(a: &CVector, b: &CVector) -> C64 {
    a.dotc(b)
}

/// Least-squares solve through the SVD. Returns the solution and the ratio
/// of extreme singular values of the design matrix.
pub fn least_squares(design: &DMatrix<f64>, rhs: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let svd = design.clone().svd(true, true);
    let smax = svd.singular_values.max();
    let smin = svd.singular_values.min();
    if smin <= 0.0 {
        return None;
    }
    let sol = svd.solve(rhs, 0.0).ok()?;
    Some((sol, smax / smin))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, scale: f64, seed: u64) -> CMatrix {
        let mut s = seed;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            ((s >> 11) as f64 / (1u64 << 53) as f64) - 0.5
        };
        CMatrix::from_fn(n, n, |_, _| c(next(), next()) * scale)
    }

    #[test]
    fn expm_inverse_round_trip() {
        for seed in 0..5 {
            let mut x = sample(3, 1.0, seed);
            x *= C64::from(5.0 / norm1(&x));
            let r = expm(&x) * expm(&(-x.clone())) - CMatrix::identity(3, 3);
            assert!(max_abs(&r) <= 1e-12, "residual {}", max_abs(&r));
        }
    }

    #[test]
    fn expm_of_diagonal() {
        let d = CMatrix::from_diagonal(&CVector::from_vec(vec![c(0.0, 0.3), c(-1.2, 0.0), c(2.0, 1.0)]));
        let e = expm(&d);
        for k in 0..3 {
            assert!((e[(k, k)] - d[(k, k)].exp()).norm() < 1e-14 * e[(k, k)].norm().max(1.0));
        }
    }

    #[test]
    fn expmv_matches_dense() {
        let a = sample(12, 3.0, 7);
        let trips: Vec<_> =
            (0..12).flat_map(|i| (0..12).map(move |j| (i, j))).map(|(i, j)| (i, j, a[(i, j)])).collect();
        let op = SparseOp::from_triplets(12, &trips);
        let v = CVector::from_fn(12, |i, _| c(i as f64, 1.0));
        let dense = expm(&a) * &v;
        let sparse = expmv(&op, &v);
        assert!((dense - sparse).norm() <= 1e-11 * v.norm() * expm(&a).norm());
    }
}
