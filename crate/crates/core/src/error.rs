use thiserror::Error;

/// Errors raised by the probability kernels, the race model and the simulator.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    /// An argument lies outside the domain of the function.
    #[error("{name} = {value} is out of range: {bound}")]
    Domain {
        name: &'static str,
        value: f64,
        bound: &'static str,
    },

    /// An iterative evaluation did not reach its tolerance.
    #[error("{what} did not converge after {iterations} iterations")]
    Convergence {
        what: &'static str,
        iterations: usize,
    },

    /// Adaptive quadrature exhausted its subdivision budget.
    #[error("quadrature did not reach tolerance {target:e} (estimated error {estimate:e})")]
    Quadrature { target: f64, estimate: f64 },

    /// The confirmation search exceeded its upper bound.
    #[error("no confirmation count up to {limit} brings the risk below {risk}")]
    SearchOverflow { limit: u64, risk: f64 },

    /// The sharp-rank scan passed its bound without settling.
    #[error("the sharp rank scan passed {limit} confirmations without settling")]
    RankScanOverflow { limit: u64 },

    /// Too few simulated races fell inside the conditioning window.
    #[error(
        "only {retained} of {trials} trials fell in the kappa window (need at least {required})"
    )]
    Conditioning {
        retained: u64,
        trials: u64,
        required: u64,
    },

    /// Both an observed time and a deviation factor were given and they disagree.
    #[error("kappa = {given} disagrees with kappa = {derived} derived from the observed time")]
    InconsistentQuery { given: f64, derived: f64 },
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn domain(name: &'static str, value: f64, bound: &'static str) -> Error {
    Error::Domain { name, value, bound }
}
