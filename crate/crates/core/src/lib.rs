//! Simulation and cost model of a robotic disassembly line for end-of-life
//! phones: a discrete-event model of the stations, a stochastic perception
//! model with the matching evaluation metrics, and the techno-economic
//! tables.

pub mod des;
pub mod error;
pub mod fmt;
pub mod line;
pub mod model;
pub mod money;
pub mod perception;
pub mod replicate;
pub mod scenario;
pub mod sweep;
pub mod tea;
pub mod validate;

pub use error::{Error, Result};
pub use money::Cents;
pub use scenario::{Scenario, ScenarioConfig, UnknownKeys};
