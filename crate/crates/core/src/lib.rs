//! Decision-diagram engine for Trotterized time evolution of spin chains.
//!
//! States are vector decision diagrams and operators are matrix decision
//! diagrams, both owned by a [`Manager`]. The [`oracle`] module provides a
//! dense reference used to validate every diagram computation.

pub mod algebra;
pub mod dd;
pub mod error;
pub mod models;
pub mod numerics;
pub mod operator;
pub mod oracle;
pub mod state;
pub mod sweeps;

pub use dd::{Config, GcStats, Manager, MatEdge, NodeId, Root, VecEdge};
pub use error::{Error, Result};
pub use models::{EvolutionMode, EvolutionPlan, ModelFamily, ModelSpec, TrotterCircuit};
pub use numerics::{Complex, Tolerance, WeightRef, WeightTable};
pub use operator::{Gate, ObservableSpec, OperatorDD, Pauli};
pub use state::StateDD;
