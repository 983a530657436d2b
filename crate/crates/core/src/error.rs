use std::fmt;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("syntax error at {line}:{column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },

    #[error("unknown proposition `{0}`")]
    UnknownProposition(String),

    #[error("invalid proposition name `{0}`")]
    InvalidProposition(String),

    #[error("alphabet too large: {0} propositions (at most 64 supported)")]
    AlphabetTooLarge(usize),

    #[error("unsupported construct for automaton compilation: {0}")]
    Unsupported(String),

    #[error("automaton exceeds the state cap of {cap} states")]
    StateExplosion { cap: usize },

    #[error("symbol {0:#x} is not a subset of the automaton alphabet")]
    UnknownSymbol(u64),

    #[error("true transition dynamics are not available for this MDP")]
    MissingDynamics,

    #[error("action `{action}` is not available in state `{state}`")]
    UnavailableAction { state: String, action: String },

    #[error("invalid MDP: {0}")]
    InvalidMdp(String),

    #[error("label alphabet mismatch: {0}")]
    AlphabetMismatch(String),

    #[error("infeasible transition bounds at {location}: sum(lo) = {sum_lo}, sum(hi) = {sum_hi}")]
    Infeasible {
        location: String,
        sum_lo: f64,
        sum_hi: f64,
    },

    #[error("invalid multi-shot plan: {0}")]
    InvalidPlan(String),

    #[error("subgraph {index} has an empty accepting set")]
    EmptyAcceptingSet { index: usize },

    #[error("initial states below the required threshold {threshold}: {}", DisplayViolators(.violators))]
    InitialCheckFailed {
        threshold: f64,
        violators: Vec<(String, f64)>,
    },

    #[error("invalid grid: {0}")]
    InvalidGrid(String),

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("word enumeration of {0} words exceeds the cap")]
    EnumerationTooLarge(u128),

    #[error("{stage}: {source}")]
    Stage {
        stage: &'static str,
        #[source]
        source: Box<Error>,
    },

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

impl Error {
    pub fn at_stage(self, stage: &'static str) -> Error {
        Error::Stage {
            stage,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping stage wrappers.
    pub fn root(&self) -> &Error {
        match self {
            Error::Stage { source, .. } => source.root(),
            other => other,
        }
    }
}

struct DisplayViolators<'a>(&'a [(String, f64)]);

impl fmt::Display for DisplayViolators<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (i, (state, value)) in self.0.iter().enumerate() {
            if i > 0 {
                f.write_str(", ")?;
            }
            write!(f, "{state} (f = {value:.6})")?;
        }
        Ok(())
    }
}
