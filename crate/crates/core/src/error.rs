use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid chain configuration: {0}")]
    InvalidConfig(String),

    #[error("site index {index} out of range 1..={n_atoms}")]
    SiteOutOfRange { index: usize, n_atoms: usize },

    #[error("the most-subradiant state needs an even atom count, got {0} (use {next})", next = .0 + 1)]
    OddChainLength(usize),

    #[error("state has zero norm")]
    ZeroNorm,

    #[error("state has {got} amplitudes but the chain has {expected} atoms")]
    LengthMismatch { expected: usize, got: usize },

    #[error("x = {x} lies on the light line |x| = a = {a}")]
    LightLine { x: f64, a: f64 },

    #[error("polylogarithm argument theta = {theta} outside the supported domain")]
    PolylogDomain { theta: f64 },

    #[error("observation point is {distance:e} d from atom {site}")]
    TooCloseToAtom { site: usize, distance: f64 },

    #[error("invalid plane: {0}")]
    InvalidPlane(String),

    #[error("invalid integration settings: {0}")]
    InvalidIntegration(String),

    #[error("integration produced a non-finite state at t = {time}")]
    Diverged { time: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;
