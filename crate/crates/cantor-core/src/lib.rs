//! Exact-arithmetic toolkit for Cantor series expansions.
//!
//! The crate is organized around five layers:
//!
//! - [`basic_seq`] / [`expansion`]: mixed-radix digit arithmetic and orbit
//!   values, all in exact big-rational arithmetic.
//! - [`adf`] / [`family`]: asymptotic distribution functions as exact
//!   piecewise-affine objects, and the indexed families used as
//!   distribution targets.
//! - [`poly`]: integer polynomials, value-set intersection densities, and
//!   sparsity certificates.
//! - [`schedule`]: the stage construction that turns a target family into
//!   per-index digit envelopes and a canonical digit stream.
//! - [`analysis`]: empirical verification (counts, discrepancies,
//!   accumulation estimates, Moran-type dimension lower bounds).

pub mod adf;
pub mod analysis;
pub mod basic_seq;
pub mod error;
pub mod expansion;
pub mod family;
pub mod numeric;
pub mod poly;
pub mod schedule;

pub use adf::{Adf, ClosedSetU, Side};
pub use basic_seq::{BasicSequence, SeqKind};
pub use error::{CantorError, Result};
pub use expansion::{digits_of, t_qn, t_qn_from_digits, value_of, DigitPrefix};
pub use family::{FamilyKind, LinearFamily};
pub use numeric::{Rat, RatInterval};
pub use poly::{IntPolynomial, SparsePolySet};
pub use schedule::{Schedule, ScheduleParams, TargetSpec};
