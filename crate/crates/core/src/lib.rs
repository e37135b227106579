//! Approximation scheme for the traveling salesperson problem with hyperplane
//! neighborhoods in fixed dimension, plus the polytope sparsification suite
//! and reference baselines.

pub mod base_set;
pub mod baselines;
pub mod enumeration;
pub mod geom;
pub mod harness;
pub mod instance;
mod linalg;
pub mod lp;
pub mod sparsify;
