//! Numerical toolkit for Cayley geometry in flat ℝ⁸.
//!
//! * [`spin7`]: octonions, the Cayley form, τ, margins, E-bases, plane angles.
//! * [`scenarios`]: flat T⁴, the complex quadric cone and its smoothing.
//! * [`weighted`]: radius functions and weighted Sobolev/Hölder norms.
//! * [`spectra`]: critical rates of the linearized operator on a flat Cayley plane.
//! * [`gluing`]: cone/smoothing gluing with cutoffs and the partition α.
//! * [`flow`]: the deformation operator, its linearization and the iteration.
//! * [`estimates`]: sampled product and quadratic constants.
//! * [`cli`]: configuration, reports and command dispatch behind the binary.

// index loops mirror the formulas; `!(x > 0.0)` is used on purpose to reject NaN
#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord)]

pub mod cli;
pub mod error;
pub mod estimates;
pub mod flow;
pub mod fmt;
pub mod gluing;
pub mod grid;
pub mod scenarios;
pub mod spectra;
pub mod spin7;
pub mod weighted;

pub use error::{Error, Result};
