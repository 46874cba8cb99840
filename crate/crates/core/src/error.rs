use thiserror::Error;

use crate::model::{AgentId, NodeId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("unknown agent {0}")]
    UnknownAgent(AgentId),
    #[error("unknown node {0}")]
    UnknownNode(NodeId),
    #[error("node {node} is occupied by agent {occupant}")]
    NodeOccupied { node: NodeId, occupant: AgentId },
    #[error("agent {0} is stubborn")]
    StubbornAgent(AgentId),
    #[error("invalid assignment: {0}")]
    InvalidAssignment(String),
    #[error("invalid instance: {0}")]
    InvalidInstance(String),
    #[error("unsupported: {0}")]
    Unsupported(String),
    #[error("enumeration needs {needed} assignments, budget is {budget}")]
    BudgetExceeded { needed: u128, budget: u128 },
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;
