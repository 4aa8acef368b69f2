//! MILP representation and builder.

mod builder;
mod ir;
mod vars;

pub use builder::{build_model, build_model_with, build_variables, flow_commodity, ModelBuilder};
pub use ir::{ControlTerm, Family, LinearConstraint, ModelIr, ModelOptions, RowKey, Sense, Term};
pub use vars::{Commodity, VarId, VarKind, VarLayout};
