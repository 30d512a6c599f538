use thiserror::Error;

use crate::des::EventKind;

/// Errors raised by the line model, the simulation kernel and the evaluators.
#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error at `{path}`: {message}")]
    Config { path: String, message: String },

    #[error("unknown phone model `{0}`")]
    UnknownModel(String),

    #[error("{0} is not a detectable component class")]
    NotDetectable(crate::model::ComponentClass),

    #[error("cannot schedule event at t={time} before the clock (t={clock})")]
    ScheduleInPast { time: f64, clock: f64 },

    #[error("event time {0} is not finite")]
    NonFiniteTime(f64),

    #[error("entity {uid} already holds or waits for resource `{resource}`")]
    AlreadySeized { resource: String, uid: u64 },

    #[error("entity {uid} does not hold resource `{resource}`")]
    NotHolder { resource: String, uid: u64 },

    #[error("handler for {kind:?} event (seq {seq}, t={time}) failed: {source}")]
    Handler {
        kind: EventKind,
        seq: u64,
        time: f64,
        #[source]
        source: Box<Error>,
    },

    #[error("invalid state transition for phone {uid}: {from:?} -> {to:?}")]
    Transition {
        uid: u64,
        from: crate::model::PhoneState,
        to: crate::model::PhoneState,
    },

    #[error("logic error: {0}")]
    Logic(String),

    #[error("invalid geometry: {0}")]
    Geometry(String),

    #[error("invalid matrix: {0}")]
    Matrix(String),

    #[error("division undefined: {0}")]
    Undefined(&'static str),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub fn config(path: impl Into<String>, message: impl Into<String>) -> Self {
        Error::Config {
            path: path.into(),
            message: message.into(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
