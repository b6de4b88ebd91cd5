//! Exact construction and verification of q-orthogonal polynomial sequences
//! on q-linear lattices x(s+1) = q·x(s) + ω.
//!
//! Everything is exact rational arithmetic. A relation "passes" only when the
//! reconstructed residual is the literal zero polynomial.

#![allow(clippy::needless_range_loop)]

pub mod cli;
pub mod error;
pub mod exactq;
pub mod families;
pub mod functional;
pub mod latticepoly;
mod linalg;
pub mod relations;
pub mod suite;

pub use error::{Error, Result};
pub use exactq::{int, qbracket, qfactorial, qpochhammer, rat, Lattice, Rational};
pub use latticepoly::Poly;
