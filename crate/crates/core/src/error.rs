use thiserror::Error;

/// Errors raised while building, validating, or simulating a network.
#[derive(Debug, Error)]
pub enum GridError {
    #[error("schema violation at `{path}`: {message}")]
    Schema { path: String, message: String },

    #[error("invalid value for `{field}`: {message}")]
    InvalidField { field: String, message: String },

    #[error("duplicate zone id `{0}`")]
    DuplicateZone(String),

    #[error("{kind} references unknown zone `{zone}`")]
    DanglingZone { kind: &'static str, zone: String },

    #[error("network graph is disconnected: zone `{0}` is unreachable from the first zone")]
    Disconnected(String),

    #[error("capacity shortfall: demand {demand:.3} MW exceeds generation {generation:.3} MW plus imports {imports:.3} MW")]
    CapacityShortfall {
        demand: f64,
        generation: f64,
        imports: f64,
    },

    #[error("zone `{0}` hosts no synchronous inertia")]
    ZeroInertiaZone(String),

    #[error("reduced DC power-flow system is singular")]
    SingularSystem,

    #[error("non-finite state at t = {time:.4} s")]
    NumericalBlowUp { time: f64 },

    #[error("invalid scenario: {0}")]
    Scenario(String),

    #[error("invalid bracket [{lo}, {hi}] MW: nadir at lo = {lo_nadir:.5} Hz, at hi = {hi_nadir:.5} Hz, limit {limit} Hz")]
    InvalidBracket {
        lo: f64,
        hi: f64,
        lo_nadir: f64,
        hi_nadir: f64,
        limit: f64,
    },

    #[error("trace error: {0}")]
    Trace(String),

    #[error("unknown {kind} `{name}`")]
    UnknownName { kind: &'static str, name: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

impl GridError {
    pub(crate) fn field(field: impl Into<String>, message: impl Into<String>) -> Self {
        GridError::InvalidField {
            field: field.into(),
            message: message.into(),
        }
    }

    /// True for errors caused by bad input rather than numerics or I/O.
    pub fn is_validation(&self) -> bool {
        !matches!(
            self,
            GridError::NumericalBlowUp { .. } | GridError::Io(_) | GridError::SingularSystem
        )
    }
}

pub type Result<T> = std::result::Result<T, GridError>;
