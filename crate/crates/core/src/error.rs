use thiserror::Error;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid environment: {0}")]
    InvalidSpec(String),

    #[error("invalid hyperparameters: {0}")]
    InvalidHyper(String),

    #[error("infeasible instance: minimum achievable cost {min_cost} exceeds budget {budget}")]
    Infeasible { min_cost: f64, budget: f64 },

    #[error("episode {episode}: non-finite value in {what}")]
    NonFinite { episode: usize, what: &'static str },

    #[error("episode {episode}: dual step {step} exceeds bound {bound}")]
    DualStepExceeded { episode: usize, step: f64, bound: f64 },

    #[error("episode {episode}: {epochs} epochs exceeds bound {bound}")]
    EpochBoundExceeded { episode: usize, epochs: usize, bound: f64 },

    #[error("internal consistency failure: {0}")]
    Consistency(String),

    #[error("episode {episode}: {source}")]
    AtEpisode {
        episode: usize,
        #[source]
        source: Box<Error>,
    },
}

impl Error {
    /// True for failures of the runtime invariant checks (as opposed to bad input).
    pub fn is_runtime_assert(&self) -> bool {
        matches!(
            self,
            Error::NonFinite { .. }
                | Error::DualStepExceeded { .. }
                | Error::EpochBoundExceeded { .. }
                | Error::Consistency(_)
        ) || matches!(self, Error::AtEpisode { source, .. } if source.is_runtime_assert())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
