use thiserror::Error;

use crate::ir::{Dt, DeviceError, IrError, Violation};
use crate::qasm::QasmError;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Ir(#[from] IrError),
    #[error(transparent)]
    Device(#[from] DeviceError),
    #[error(transparent)]
    Qasm(#[from] QasmError),
    #[error("circuit does not fit the device: {}", join(.0))]
    Validation(Vec<Violation>),
    #[error("inconsistent timing: {0}")]
    Timing(String),
    #[error("window {window}: offset {offset} outside [0, {max}]")]
    OffsetOutOfRange { window: usize, offset: Dt, max: Dt },
    #[error("no slack window with id {0}")]
    UnknownWindow(usize),
    #[error("no tunable slack windows")]
    NoTunableWindows,
    #[error("budget {budget} gives fewer than 2 slots to each of {windows} windows")]
    BudgetTooSmall { budget: usize, windows: usize },
    #[error("{qubits} active qubits exceed the simulator cap of {cap}")]
    QubitCap { qubits: usize, cap: usize },
    #[error("trace deviates from 1 by {deviation:e} after {after}")]
    TraceDeviation { deviation: f64, after: String },
    #[error("empty outcome distribution")]
    EmptyDistribution,
    #[error("distribution is not normalized (total {0})")]
    NotNormalized(f64),
    #[error("window {window}: {source}")]
    Backend {
        window: usize,
        #[source]
        source: Box<Error>,
    },
    #[error("{kind} does not support {n} qubits")]
    UnsupportedSize { kind: String, n: usize },
    #[error("interval of {duration} dt cannot hold a decoupling sequence of {needed} dt")]
    DdDoesNotFit { duration: Dt, needed: Dt },
    #[error("{path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Json(#[from] serde_json::Error),
    #[error("{0}")]
    Usage(String),
}

fn join(v: &[Violation]) -> String {
    v.iter().map(ToString::to_string).collect::<Vec<_>>().join("; ")
}

impl From<Vec<Violation>> for Error {
    fn from(v: Vec<Violation>) -> Self {
        Error::Validation(v)
    }
}
