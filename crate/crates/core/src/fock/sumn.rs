//! Oscillator algebra of `su(m,n)` on a small truncated Fock space.
//!
//! `Ẑ` is the `(m+n) × n` matrix whose upper `m × n` block holds
//! annihilators `â_{aα}` and whose lower `n × n` block holds creators
//! `b̂†_{bα}`. Generators are `X̂ = -tr(Ẑ†ΓXẐ)`, and the space keeps all
//! occupation vectors with at most `cutoff` quanta in total.

use std::collections::HashMap;

use serde::Serialize;

use crate::group::{structure_constants, su_basis, Signature};
use crate::linalg::{CMatrix, CVector, SparseOp, ONE, ZERO};
use crate::{Error, Result, C64};

/// Default limit on the number of states of the truncated space.
pub const SUMN_STATE_BOUND: usize = 5000;

#[derive(Debug, Clone)]
pub struct OscillatorSpace {
    pub sig: Signature,
    pub cutoff: usize,
    states: Vec<Vec<u8>>,
    index: HashMap<Vec<u8>, usize>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Op {
    Ann(usize),
    Cre(usize),
}

impl OscillatorSpace {
    pub fn new(sig: Signature, cutoff: usize) -> Result<Self> {
        let modes = sig.size() * sig.n;
        let dim = binomial(modes + cutoff, cutoff);
        if dim > SUMN_STATE_BOUND {
            return Err(Error::CutoffTooLarge { dim, bound: SUMN_STATE_BOUND });
        }
        let mut states = Vec::with_capacity(dim);
        let mut cur = vec![0u8; modes];
        enumerate(&mut cur, 0, cutoff, &mut states);
        states.sort_by_key(|s| (s.iter().map(|&x| x as usize).sum::<usize>(), s.clone()));
        let index = states.iter().enumerate().map(|(i, s)| (s.clone(), i)).collect();
        Ok(Self { sig, cutoff, states, index })
    }

    pub fn dim(&self) -> usize {
        self.states.len()
    }

    pub fn quanta(&self, i: usize) -> usize {
        self.states[i].iter().map(|&x| x as usize).sum()
    }

    /// Mode number of `â_{aα}` (`a < m`) or `b̂_{bα}` (`b < n`).
    fn a_mode(&self, a: usize, alpha: usize) -> usize {
        a * self.sig.n + alpha
    }

    fn b_mode(&self, b: usize, alpha: usize) -> usize {
        self.sig.m * self.sig.n + b * self.sig.n + alpha
    }

    /// `ẑ_{aα}` and `ẑ†_{aα}` as ladder operations.
    fn z(&self, a: usize, alpha: usize) -> Op {
        if a < self.sig.m {
            Op::Ann(self.a_mode(a, alpha))
        } else {
            Op::Cre(self.b_mode(a - self.sig.m, alpha))
        }
    }

    fn zdag(&self, a: usize, alpha: usize) -> Op {
        match self.z(a, alpha) {
            Op::Ann(k) => Op::Cre(k),
            Op::Cre(k) => Op::Ann(k),
        }
    }

    fn act(state: &[u8], op: Op) -> Option<(Vec<u8>, f64)> {
        let mut s = state.to_vec();
        match op {
            Op::Ann(k) => {
                if s[k] == 0 {
                    return None;
                }
                let amp = (s[k] as f64).sqrt();
                s[k] -= 1;
                Some((s, amp))
            }
            Op::Cre(k) => {
                s[k] += 1;
                let amp = (s[k] as f64).sqrt();
                Some((s, amp))
            }
        }
    }

    /// Sparse matrix of `X̂ = -Σ_α ẑ†_{aα} Γ_aa X_ab ẑ_{bα}`.
    pub fn hat(&self, x: &CMatrix) -> SparseOp {
        let d = self.sig.size();
        let mut trips = Vec::new();
        for (col, st) in self.states.iter().enumerate() {
            for alpha in 0..self.sig.n {
                for a in 0..d {
                    for b in 0..d {
                        let xab = x[(a, b)];
                        if xab == ZERO {
                            continue;
                        }
                        let Some((s1, a1)) = Self::act(st, self.z(b, alpha)) else { continue };
                        let Some((s2, a2)) = Self::act(&s1, self.zdag(a, alpha)) else { continue };
                        if let Some(&row) = self.index.get(&s2) {
                            trips.push((row, col, xab * (-self.sig.gamma_diag(a) * a1 * a2)));
                        }
                    }
                }
            }
        }
        SparseOp::from_triplets(self.dim(), &trips)
    }

    /// `N̂ = N_b - N_a`, diagonal.
    pub fn number_operator(&self) -> SparseOp {
        let split = self.sig.m * self.sig.n;
        let trips: Vec<_> = self
            .states
            .iter()
            .enumerate()
            .map(|(i, s)| {
                let na: usize = s[..split].iter().map(|&x| x as usize).sum();
                let nb: usize = s[split..].iter().map(|&x| x as usize).sum();
                (i, i, C64::from(nb as f64 - na as f64))
            })
            .collect();
        SparseOp::from_triplets(self.dim(), &trips)
    }

    /// `-tr(Ẑ†ΓẐ) - n²`, assembled from the oscillators.
    pub fn number_operator_from_trace(&self) -> SparseOp {
        let d = self.sig.size();
        let n2 = (self.sig.n * self.sig.n) as f64;
        let shift: Vec<_> = (0..self.dim()).map(|i| (i, i, ONE)).collect();
        let shift = SparseOp::from_triplets(self.dim(), &shift);
        SparseOp::combination(&[&self.hat(&CMatrix::identity(d, d)), &shift], &[ONE, C64::from(-n2)])
    }

    /// `(det b̂†)^N |0⟩`, normalised; `None` if it does not fit under the cutoff.
    pub fn lowest_weight(&self, n_rep: u32) -> Option<CVector> {
        let n = self.sig.n;
        if (n * n_rep as usize) > self.cutoff {
            return None;
        }
        let mut v = CVector::zeros(self.dim());
        v[self.index[&vec![0u8; self.sig.size() * n]]] = ONE;
        let perms = permutations(n);
        for _ in 0..n_rep {
            let mut next = CVector::zeros(self.dim());
            for (perm, sign) in &perms {
                for (i, st) in self.states.iter().enumerate() {
                    if v[i] == ZERO {
                        continue;
                    }
                    let mut s = st.clone();
                    let mut amp = 1.0;
                    for (row, &col) in perm.iter().enumerate() {
                        let (s2, a) = Self::act(&s, Op::Cre(self.b_mode(row, col))).unwrap();
                        s = s2;
                        amp *= a;
                    }
                    if let Some(&j) = self.index.get(&s) {
                        next[j] += v[i] * (amp * sign);
                    }
                }
            }
            v = next;
        }
        let nrm = v.norm();
        (nrm > 0.0).then(|| v / C64::from(nrm))
    }
}

fn binomial(n: usize, k: usize) -> usize {
    (0..k).fold(1usize, |acc, i| acc * (n - i) / (i + 1))
}

fn enumerate(cur: &mut Vec<u8>, pos: usize, left: usize, out: &mut Vec<Vec<u8>>) {
    if pos == cur.len() {
        out.push(cur.clone());
        return;
    }
    for k in 0..=left {
        cur[pos] = k as u8;
        enumerate(cur, pos + 1, left - k, out);
    }
    cur[pos] = 0;
}

fn permutations(n: usize) -> Vec<(Vec<usize>, f64)> {
    fn rec(prefix: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if prefix.len() == used.len() {
            out.push(prefix.clone());
            return;
        }
        for k in 0..used.len() {
            if !used[k] {
                used[k] = true;
                prefix.push(k);
                rec(prefix, used, out);
                prefix.pop();
                used[k] = false;
            }
        }
    }
    let mut out = Vec::new();
    rec(&mut Vec::new(), &mut vec![false; n], &mut out);
    out.into_iter()
        .map(|p| {
            let mut inv = 0;
            for i in 0..p.len() {
                for j in i + 1..p.len() {
                    if p[i] > p[j] {
                        inv += 1;
                    }
                }
            }
            (p, if inv % 2 == 0 { 1.0 } else { -1.0 })
        })
        .collect()
}

#[derive(Debug, Clone, Serialize)]
pub struct SumnReport {
    pub m: usize,
    pub n: usize,
    pub cutoff: usize,
    pub dim: usize,
    pub basis_size: usize,
    /// Measured σ in `[X̂_A, X̂_B] = σ Σ f^C_{AB} X̂_C` on interior columns.
    pub sign: f64,
    pub bracket_residual: f64,
    pub opposite_sign_residual: f64,
    pub number_commutator: f64,
    /// `max|N_b - N_a - (-tr(Ẑ†ΓẐ) - n²)|`.
    pub trace_identity_residual: f64,
    pub anti_hermitian_residual: f64,
    pub rep_n: u32,
    /// `‖N̂ψ - λψ‖` for the lowest state ψ and λ = ⟨ψ|N̂|ψ⟩.
    pub lowest_eigen_residual: Option<f64>,
    pub lowest_eigenvalue: Option<f64>,
}

/// Bracket, commutant and lowest-weight checks for `su(m,n)`.
///
/// Interior columns are the states with at most `cutoff - 2` quanta, so both
/// operator products in a commutator are computed without truncation there.
pub fn sumn_algebra_check(m: usize, n: usize, cutoff: usize, rep_n: u32) -> Result<SumnReport> {
    if m + n > 4 || cutoff > 6 {
        return Err(Error::InvalidInput(format!("(m,n)=({m},{n}), cutoff {cutoff} is beyond the supported range")));
    }
    let sig = Signature::new(m, n)?;
    let space = OscillatorSpace::new(sig, cutoff)?;
    let basis = su_basis(sig);
    let f = structure_constants(&basis)?;
    let gens: Vec<SparseOp> = basis.iter().map(|x| space.hat(x)).collect();
    let interior: Vec<bool> = (0..space.dim()).map(|i| space.quanta(i) + 2 <= cutoff).collect();
    let max_on = |op: &SparseOp, cols: Option<&[bool]>| {
        op.csr()
            .triplet_iter()
            .filter(|(_, c, _)| cols.is_none_or(|m| m[*c]))
            .fold(0.0f64, |acc, (_, _, v)| acc.max(v.norm()))
    };
    let comm = |a: &SparseOp, b: &SparseOp| SparseOp::combination(&[&a.product(b), &b.product(a)], &[ONE, -ONE]);
    let (mut minus, mut plus) = (0.0f64, 0.0f64);
    for a in 0..gens.len() {
        for b in a + 1..gens.len() {
            let lhs = comm(&gens[a], &gens[b]);
            let coeffs: Vec<C64> = (0..gens.len()).map(|cc| C64::from(f.get(cc, a, b))).collect();
            let refs: Vec<&SparseOp> = gens.iter().collect();
            let rhs = SparseOp::combination(&refs, &coeffs);
            for (sign, worst) in [(-1.0, &mut minus), (1.0, &mut plus)] {
                let r = SparseOp::combination(&[&lhs, &rhs], &[ONE, C64::from(-sign)]);
                *worst = worst.max(max_on(&r, Some(&interior)));
            }
        }
    }
    let (sign, best, other) = if minus <= plus { (-1.0, minus, plus) } else { (1.0, plus, minus) };
    let nop = space.number_operator();
    let trace_identity_residual =
        max_on(&SparseOp::combination(&[&nop, &space.number_operator_from_trace()], &[ONE, -ONE]), None);
    let mut ncomm: f64 = 0.0;
    let mut anti: f64 = 0.0;
    for g in &gens {
        ncomm = ncomm.max(max_on(&comm(&nop, g), None));
        anti = anti.max(max_on(&SparseOp::combination(&[g, &g.adjoint()], &[ONE, ONE]), None));
    }
    let lw = space.lowest_weight(rep_n);
    let (lowest_eigen_residual, lowest_eigenvalue) = match &lw {
        Some(v) => {
            let nv = nop.apply(v);
            let lam = v.dotc(&nv).re;
            (Some((nv - v * C64::from(lam)).norm()), Some(lam))
        }
        None => (None, None),
    };
    Ok(SumnReport {
        m,
        n,
        cutoff,
        dim: space.dim(),
        basis_size: basis.len(),
        sign,
        bracket_residual: best,
        opposite_sign_residual: other,
        number_commutator: ncomm,
        trace_identity_residual,
        anti_hermitian_residual: anti,
        rep_n,
        lowest_eigen_residual,
        lowest_eigenvalue,
    })
}
