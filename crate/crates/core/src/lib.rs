//! Operator-norm bounds for weighted mean matrices on `l^p`, together with
//! numerical verifiers for the Hardy- and Carleman-type inequalities they
//! imply.

pub mod bounds;
pub mod carleman;
pub mod cli;
pub mod error;
pub mod harness;
pub mod opnorm;
pub mod report;
pub mod summation;
pub mod weights;

pub use error::{Error, Result};
pub use weights::{make_weights, Exponent, WeightSequence, WeightSpec};
