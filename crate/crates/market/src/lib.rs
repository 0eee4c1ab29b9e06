//! Market side of the arena: an event kernel, a matching engine, scripted
//! trading archetypes, multi-day scenarios, return statistics and the
//! labelled order-flow dataset built from the logs.

pub mod agents;
pub mod dataset;
pub mod error;
pub mod exchange;
pub mod fundamental;
pub mod kernel;
pub mod rng;
pub mod scenario;
pub mod stylized;
pub mod types;

pub use error::{Result, SimError};
pub use types::{AgentId, OrderId, Qty, Side, SimTime, Ticks};
