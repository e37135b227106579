//! Linear programming: a dense two-phase simplex and the tour LP built on it.

pub mod model;
pub mod simplex;

pub use model::{approx_length, build_lp, separated_pairs, LpModel, ModelError};
pub use simplex::{LinearProgram, LpError, LpSolution, LpStatus, Relation, VarKind, TAU_LP};
