//! The disassembly line: cutting, vision-guided sorting with flipping,
//! batch chilling and hammer extraction, wired into the event kernel.

mod params;
mod policy;
mod report;
mod sim;

pub use params::{Duration, RoutingParams, StationParams, STATION_FIELDS};
pub use policy::{decide_action, extract_battery, flip, route, Action, ExtractOutcome, RouteOutcome};
pub use report::{
    BinEntry, BinTally, HazardEntry, HazardLog, PhoneLog, SimOutcome, SimReport, SpanStats,
    StationStats, TraceRecord,
};
pub use sim::{run, simulate, RunOptions};
