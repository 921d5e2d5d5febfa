//! Parameters of the race: the hash-power split, network timing and a single
//! risk query.

use crate::error::{domain, Error, Result};

/// Mean block interval of the Bitcoin network, in minutes.
pub const BITCOIN_BLOCK_MINUTES: f64 = 10.0;

/// Attacker share `q` and honest share `p = 1 - q` of the total hash rate,
/// with the derived ratio `λ = q/p` and decay base `s = 4pq`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HashSplit {
    q: f64,
    p: f64,
    lambda: f64,
    s: f64,
}

impl HashSplit {
    /// Accepts `0 < q <= 0.5`. At `q = 0.5` every success probability is 1.
    pub fn new(q: f64) -> Result<Self> {
        if !(q > 0.0 && q <= 0.5) {
            return Err(domain("q", q, "attacker share q must lie in (0, 0.5]"));
        }
        let p = 1.0 - q;
        Ok(HashSplit {
            q,
            p,
            lambda: q / p,
            s: 4.0 * p * q,
        })
    }

    pub fn q(&self) -> f64 {
        self.q
    }

    pub fn p(&self) -> f64 {
        self.p
    }

    /// λ = q/p, the attacker-to-honest rate ratio.
    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    /// s = 4pq.
    pub fn s(&self) -> f64 {
        self.s
    }

    /// True when the attacker controls exactly half of the hash rate.
    pub fn is_balanced(&self) -> bool {
        self.q == 0.5
    }

    /// Rejects the balanced split for results that only exist when q < p.
    pub(crate) fn require_minority(&self) -> Result<()> {
        if self.is_balanced() {
            Err(domain("q", self.q, "this quantity requires q < 0.5"))
        } else {
            Ok(())
        }
    }
}

/// Block production rates of the two groups for a network whose blocks
/// arrive every `tau0` time units on average.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NetworkParams {
    /// Mean block interval of the whole network.
    pub tau0: f64,
    /// Honest rate α = p / τ₀.
    pub alpha: f64,
    /// Attacker rate α′ = q / τ₀.
    pub alpha_prime: f64,
    /// Mean honest block time t₀ = τ₀ / p.
    pub t0: f64,
}

impl NetworkParams {
    pub fn new(tau0: f64, split: &HashSplit) -> Result<Self> {
        if !(tau0 > 0.0) || !tau0.is_finite() {
            return Err(domain("tau0", tau0, "block interval must be positive"));
        }
        Ok(NetworkParams {
            tau0,
            alpha: split.p() / tau0,
            alpha_prime: split.q() / tau0,
            t0: tau0 / split.p(),
        })
    }

    /// Ten-minute blocks.
    pub fn bitcoin(split: &HashSplit) -> Self {
        Self::new(BITCOIN_BLOCK_MINUTES, split).expect("positive interval")
    }
}

/// One risk question: `z` confirmations, optionally conditioned on the
/// deviation factor κ or on the observed time τ₁ the confirmations took.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RaceQuery {
    pub z: u64,
    pub kappa: Option<f64>,
    pub tau1: Option<f64>,
}

/// Relative mismatch allowed between a given κ and the one implied by τ₁.
pub const KAPPA_MATCH_TOLERANCE: f64 = 1e-9;

impl RaceQuery {
    pub fn unconditional(z: u64) -> Self {
        RaceQuery {
            z,
            kappa: None,
            tau1: None,
        }
    }

    /// The κ this query conditions on, if any. An observed time takes
    /// precedence; a κ that disagrees with it is an error.
    pub fn resolve_kappa(&self, net: &NetworkParams, split: &HashSplit) -> Result<Option<f64>> {
        match (self.kappa, self.tau1) {
            (None, None) => Ok(None),
            (Some(k), None) => {
                if !(k > 0.0) || !k.is_finite() {
                    return Err(domain("kappa", k, "kappa must be positive"));
                }
                Ok(Some(k))
            }
            (given, Some(tau1)) => {
                let derived = crate::race::kappa_from_times(net, split, self.z, tau1)?;
                if let Some(k) = given {
                    if ((k - derived) / derived).abs() > KAPPA_MATCH_TOLERANCE {
                        return Err(Error::InconsistentQuery { given: k, derived });
                    }
                }
                Ok(Some(derived))
            }
        }
    }
}
