//! ROBDD engine and the multi-rooted model BDD used to score orders.

mod manager;
mod mbdd;
pub mod oracle;
mod order;

pub use manager::{BddManager, Env, ExprMemo, NodeId};
pub use mbdd::{build_mbdd, evaluate_order, evaluate_order_with_cap, EvaluatedOrder, MBdd};
pub use order::{expand_order, format_order, parse_order, SlotAssignment, VariableOrder};

use thiserror::Error;

use crate::model::VarId;

/// Node budget per evaluation unless configured otherwise.
pub const DEFAULT_NODE_CAP: usize = 5_000_000;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum BddError {
    #[error("order has {got} entries but the model has {expected} variables")]
    WrongLength { expected: usize, got: usize },
    #[error("variable {0} appears more than once in the order")]
    DuplicateInOrder(VarId),
    #[error("variable {0} is out of range for this model")]
    OutOfRange(VarId),
    #[error("unknown variable `{0}` in order")]
    UnknownName(String),
    #[error("order is missing variable `{0}`")]
    MissingName(String),
    #[error("variable {0} has no slot in the active assignment")]
    Unassigned(VarId),
    #[error("node cap of {0} exceeded")]
    NodeCap(usize),
    #[error("truth-table oracle limited to 24 slots, got {0}")]
    TooManySlots(usize),
}
