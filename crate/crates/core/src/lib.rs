//! Simulation library for radially symmetric flow of an ultra-relativistic
//! ideal gas, written in the conserved variables `(a, b)` of the radial
//! Euler system with geometric source term.
//!
//! The pieces fit together as follows:
//!
//! * [`state`] holds the pointwise algebra (primitive/conserved conversion,
//!   flux, entropy pair).
//! * [`piecewise`] represents initial data as piecewise linear functions of
//!   the radius and builds their integral primitives.
//! * [`linear`] evaluates the exact solution of the linearised system and
//!   the closed-form imploding shock example built on top of it.
//! * [`scheme`] runs the staggered finite-volume scheme on the cone grid.
//! * [`diagnostics`] post-processes runs: shock detection and tracking,
//!   entropy production, self-similarity and energy-balance checks.
//! * [`config`] and [`output`] are the plain-text front ends used by the
//!   `urel` binary.

pub mod config;
pub mod diagnostics;
pub mod error;
pub mod linear;
pub mod output;
pub mod piecewise;
pub mod scheme;
pub mod state;
pub mod verify;

pub use error::{Result, UrelError};
pub use state::{Conserved, Primitive};
