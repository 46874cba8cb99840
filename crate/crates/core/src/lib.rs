//! Schelling games on graphs: utilities, equilibria, improving-response
//! dynamics, exhaustive search, a tree dynamic program and instance
//! generators.

pub mod dynamics;
pub mod error;
pub mod game;
pub mod instances;
pub mod model;
pub mod rational;
pub mod search;
pub mod treedp;

pub use error::{Error, Result};
pub use model::{AgentId, AgentKind, Assignment, FriendshipSpec, GameInstance, NodeId, Topology, TypeId, UtilityModel};
pub use rational::Rational;
