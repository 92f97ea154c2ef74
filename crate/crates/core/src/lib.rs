//! Coherent-state quantization of the rank-one Bergman ball `SU(m,1)/U(m)`.
//!
//! The crate is organised bottom-up:
//!
//! * [`group`]: matrix-level `SU(m,n)` and `su(m,n)`, the explicit `su(2,1)`
//!   basis, structure constants, Cartan `K δ K` factorisation, Killing vectors.
//! * [`geometry`]: Bergman kernel, Kähler–Einstein metric and curvature,
//!   Möbius action, weighted invariant measure, multiplier representation.
//! * [`fock`]: truncated oscillator realisation of the most degenerate
//!   discrete series, plus the general `su(m,n)` oscillator algebra.
//! * [`star`]: Perelomov coherent states, covariant symbols and the star
//!   product of the noncommutative coordinates.
//! * [`spectral`]: radial invariant Laplacian and its discrete spectrum.
//! * [`qft`]: mode propagators and the regulated tadpole sum.
//!
//! Supporting numerics live in [`linalg`], [`jet`], [`quad`], [`summation`]
//! and [`par`]. With the default `parallel` feature the sweeps in [`par`] run
//! on rayon; without it they fall back to plain iterators and produce
//! bit-identical results.

// `!(x >= 0.0)` is the NaN-rejecting guard; index loops mirror the tensor notation
#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop, clippy::suspicious_arithmetic_impl)]

pub mod error;
pub mod fock;
pub mod geometry;
pub mod group;
pub mod jet;
pub mod linalg;
pub mod par;
pub mod qft;
pub mod quad;
pub mod spectral;
pub mod star;
pub mod summation;

pub use error::{Error, Result};

/// Complex scalar used throughout.
pub type C64 = num_complex::Complex64;
