//! Tools for studying the solution-space geometry of random Boolean
//! constraint satisfaction problems.
//!
//! * [`relation`], [`formula`], [`io`]: truth-table relations, formulas,
//!   assignments, overlaps and the `gbcsp`/DIMACS text formats.
//! * [`classify`]: sharp/coarse threshold classification of constraint sets.
//! * [`random`]: seeded instance generators (constant-probability, counting
//!   and multiset models).
//! * [`solutions`]: exhaustive enumeration, clusters, overlap histograms and
//!   exact q-overlap decisions for small formulas; [`solve`] for single
//!   solutions at larger sizes.
//! * [`twosat`]: implication graphs, cycle diagnostics, bad literals, paths
//!   between solutions and target-overlap pair construction for 2-CNF.
//! * [`lab`]: Monte Carlo probability estimates, threshold bisection,
//!   sharpness widths and overlap-threshold curves.

pub mod classify;
pub mod error;
pub mod formula;
pub mod io;
pub mod lab;
pub mod random;
pub mod relation;
pub mod solutions;
pub mod solve;
pub mod twosat;

pub use error::{Error, Result};
pub use formula::{Application, Assignment, BandWidth, Formula, Rational};
pub use relation::{ConstraintRelation, ConstraintSet};
