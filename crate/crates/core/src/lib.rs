//! Inconsistency measures for relational databases under denial constraints.

pub mod constraints;
pub mod datasets;
pub mod csvio;
pub mod egd;
pub mod error;
pub mod harness;
pub mod maxcut;
pub mod measures;
pub mod model;
pub mod noise;
pub mod oracle;
pub mod repair;
pub mod solver;
pub mod trajectory;
pub mod violations;

pub use constraints::{parse_constraints, ConstraintSet, DenialConstraint};
pub use error::*;
pub use model::{Database, Fact, RecordId, Schema, Value, ValueKind};
