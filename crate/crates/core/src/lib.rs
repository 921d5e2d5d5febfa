//! Success probabilities of a double-spend race on a proof-of-work chain.
//!
//! An attacker controlling a share `q` of the hash rate mines a private chain
//! while the merchant waits for `z` confirmations. This crate computes
//!
//! * the exact success probability `P(z) = I_{4pq}(z, 1/2)` ([`race`]),
//! * Nakamoto's original estimate `P_SN(z)`,
//! * the probability `P(z, κ)` conditioned on how long the confirmations took,
//! * asymptotic forms, bounds and the rank from which `P_SN` underestimates
//!   the risk ([`asymptotics`]),
//! * a seeded Monte-Carlo simulator that checks all of the above ([`sim`]).
//!
//! ```
//! use doublespend::{race, HashSplit};
//!
//! let split = HashSplit::new(0.3)?;
//! assert_eq!(race::confirmations_required(&split, 0.001, false)?, 32);
//! assert_eq!(race::confirmations_required(&split, 0.001, true)?, 24);
//! # Ok::<(), doublespend::Error>(())
//! ```

// Argument checks are written `!(x > 0.0)` so that NaN is rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod asymptotics;
mod error;
mod params;
pub mod quadrature;
pub mod race;
pub mod sim;
pub mod specfun;

pub use error::{Error, Result};
pub use params::{
    HashSplit, NetworkParams, RaceQuery, BITCOIN_BLOCK_MINUTES, KAPPA_MATCH_TOLERANCE,
};

// The guide's code listings are compiled and run as doc-tests.
#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../README.md")]
    mod readme {}
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/mining.md")]
    mod mining {}
    #[doc = include_str!("../../../book/src/exact.md")]
    mod exact {}
    #[doc = include_str!("../../../book/src/conditional.md")]
    mod conditional {}
    #[doc = include_str!("../../../book/src/asymptotics.md")]
    mod asymptotics {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
