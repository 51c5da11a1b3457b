use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("validation error: {0}")]
    Validation(String),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("{path}:{line}:{column}: {message}")]
    Parse {
        path: String,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("automaton {automaton} is nondeterministic: state {state} has two transitions on {event}")]
    Nondeterministic {
        automaton: String,
        state: String,
        event: String,
    },

    #[error("event {event} is declared {first} and {second}")]
    ControllabilityClash {
        event: String,
        first: String,
        second: String,
    },

    #[error("specification {spec} shares no events with any plant component")]
    NoSharingComponent { spec: String },

    #[error("entity {entity} shares no events with any plant component")]
    UnrelatedEntity { entity: String },

    #[error("matrix error: {0}")]
    Matrix(String),

    #[error("Markov clustering did not converge within {iterations} iterations (last change {last_change:e})")]
    NotConverged {
        iterations: usize,
        last_change: f64,
        last: Box<crate::clustering::StochasticMatrix>,
    },

    #[error("conflict among {members} cannot be resolved: the coordinator is empty")]
    UnresolvableConflict { members: String },

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("state budget of {budget} exceeded while composing {what}")]
    BudgetExceeded { budget: usize, what: String },

    #[error("I/O error on {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
