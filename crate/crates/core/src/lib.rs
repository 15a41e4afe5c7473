//! Constructions of graphs with large second eigenvalue multiplicity and the
//! numerical machinery to check them: finite groups and Cayley graphs, edge
//! subdivision with Chebyshev polynomial bookkeeping, and dense symmetric
//! spectra.

// Negated float comparisons are deliberate: they reject NaN along with
// out-of-range values.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod algebra;
pub mod chebyshev;
pub mod constructions;
pub mod error;
pub mod format;
pub mod graph;
pub mod harness;
pub mod spectra;

pub use error::{Error, Result};
