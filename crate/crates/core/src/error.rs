use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("malformed configuration: {0}")]
    Parse(#[from] serde_json::Error),

    #[error("invalid configuration: {0}")]
    Invalid(String),

    #[error("state space exceeds the ceiling of {cap} states")]
    Capacity { cap: usize },

    #[error("linear system is singular ({context})")]
    Singular { context: String },

    #[error("steady-state residual {residual:e} exceeds tolerance {tolerance:e}")]
    Residual { residual: f64, tolerance: f64 },

    #[error("class {class} cannot be admitted to system {system} from state {state}")]
    InfeasibleTarget {
        class: usize,
        system: usize,
        state: usize,
    },

    #[error("label {label} carries no stationary mass")]
    EmptyLabel { label: usize },

    #[error("policy space of {size} policies exceeds the search cap of {cap}")]
    SearchCap { size: u128, cap: u64 },

    #[error("policy has shape {got:?}, expected {expected:?}")]
    PolicyShape {
        got: (usize, usize),
        expected: (usize, usize),
    },

    #[error("policy entry {value} is not a valid system index")]
    PolicyEntry { value: usize },
}

pub(crate) fn invalid(msg: impl Into<String>) -> Error {
    Error::Invalid(msg.into())
}
