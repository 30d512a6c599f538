//! Deterministic discrete-event kernel: a clock with a time-ordered event
//! queue, FIFO resources with busy-time accounting, and counter-based random
//! streams.

mod queue;
mod resource;
mod rng;

pub use queue::{Event, EventKind, EventQueue};
pub use resource::{Resource, Seize};
pub use rng::{replication_seed, RngStream};

pub use crate::line::run;
