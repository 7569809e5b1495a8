use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A parameter violated a precondition (bad `p`, `m`, ranges, ...).
    #[error("invalid parameter: {0}")]
    InvalidParam(String),

    /// A constant that is undefined at the critical point was requested.
    #[error("{0} is undefined at alpha = 1")]
    UndefinedAtCritical(&'static str),

    /// A numerical evaluation could not be completed.
    #[error("evaluation error: {0}")]
    Eval(String),

    /// A query was made outside the valid range or against the wrong state.
    #[error("query error: {0}")]
    Query(String),

    /// A lazy-generation primitive was used out of order.
    #[error("protocol error: {0}")]
    Protocol(String),

    /// Every candidate choice of the edge has been revealed away.
    #[error("no candidate choices remain for edge {edge}")]
    AssignImpossible { edge: u64 },

    /// The graph process ran out of edges (the depletion event).
    #[error("graph process depleted at time {t}")]
    Depleted { t: u64 },

    /// The decision sequence lets the graph run out of edges.
    #[error("sigma is infeasible")]
    InfeasibleSigma,

    /// A regression fit had no usable points.
    #[error("fit error: {0}")]
    Fit(String),

    /// An experiment driver failed.
    #[error("run error: {0}")]
    Run(String),
}

pub type Result<T> = std::result::Result<T, Error>;
