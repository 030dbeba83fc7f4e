//! Exact combinatorial machinery for quasitoric manifolds with boundary.
//!
//! The crate builds the truncated simplex `Δⁿ_Q`, equips it with the
//! characteristic function `η`, and certifies the resulting manifold with
//! quasitoric boundary: vertex unimodularity, the CW cell counts of
//! `(W, ∂W)`, and the δ-translation gluing two boundary components so that
//! the remaining boundary is (conjugate) complex projective space.
//!
//! Everything is exact: integers are arbitrary precision and coordinates are
//! rationals. The crate is `no_std` and only needs `alloc`.
#![no_std]
#![allow(clippy::needless_range_loop)]

extern crate alloc;
#[cfg(test)]
extern crate std;

pub mod charfn;
pub mod cobordism;
pub mod polytope;
pub mod zlinalg;

pub use num_bigint::BigInt;
pub use num_rational::BigRational;
