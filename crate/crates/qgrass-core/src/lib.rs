//! Exact-arithmetic toolkit for Grassmann graphs over finite fields.
//!
//! Everything here is computed over arbitrary-precision rationals (or the
//! quadratic extension `Q(sqrt(q))` where half powers of `q` occur); no
//! floating point exists anywhere in the crate, so every identity check is an
//! exact equality.
//!
//! The crate has two halves:
//!
//! * closed-form machinery that works for any integer base `q >= 2`:
//!   q-combinatorial counts ([`qcomb`]), Laplacian difference coefficients
//!   ([`laplacian`]), and the q-Hahn / Rodrigues evaluation of intertwiner
//!   kernels ([`kernels`]);
//! * a brute-force geometric side restricted to prime fields: subspace
//!   enumeration ([`geometry`]), exact dense linear algebra ([`linalg`]) and
//!   matrix realizations of the intertwining operators together with
//!   spectral-projection oracles and Radon transforms ([`algebra`]).
//!
//! The [`verify`] module cross-checks the two halves against each other and
//! produces machine-readable reports; the CLI crate is a thin front end over
//! it.

pub mod algebra;
pub mod geometry;
pub mod kernels;
pub mod laplacian;
pub mod linalg;
pub mod qcomb;
pub mod scalar;
pub mod verify;

pub use qcomb::QContext;
pub use scalar::{QuadExt, Rat};
