//! Large-`z` behaviour of the success probabilities, rigorous bounds, the
//! convexity threshold κ(z) and the confirmation rank z₀ beyond which
//! Nakamoto's estimate is too optimistic.
//!
//! Asymptotic formulas are returned as raw values, without clamping.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{domain, Error, Result};
use crate::params::HashSplit;
use crate::race;

/// Verification window of [`z0_sharp`] past the last observed violation.
pub const SHARP_WINDOW: u64 = 200;

/// Largest confirmation count [`z0_sharp`] is willing to scan.
pub const SHARP_SCAN_LIMIT: u64 = 10_000;

/// Distance from 1 or p/q within which κ is treated as sitting on the
/// boundary between two regimes.
pub const REGIME_TOLERANCE: f64 = 1e-9;

/// `c(x) = x - 1 - ln x`, non-negative and zero only at `x = 1`.
pub fn c_function(x: f64) -> Result<f64> {
    if !(x > 0.0) || !x.is_finite() {
        return Err(domain("x", x, "c(x) requires x > 0"));
    }
    Ok(x - 1.0 - x.ln())
}

fn c(x: f64) -> f64 {
    x - 1.0 - x.ln()
}

fn check(split: &HashSplit, z: u64) -> Result<()> {
    split.require_minority()?;
    if z == 0 {
        return Err(domain("z", 0.0, "asymptotics require z >= 1"));
    }
    Ok(())
}

/// `P(z) ~ s^z / √(π (1-s) z)`.
pub fn p_asymptotic(split: &HashSplit, z: u64) -> Result<f64> {
    check(split, z)?;
    let zf = z as f64;
    let s = split.s();
    let one_minus_s = (split.p() - split.q()).powi(2);
    Ok((zf * s.ln() - 0.5 * (PI * one_minus_s * zf).ln()).exp())
}

/// `P_SN(z) ~ e^{-z c(q/p)} / 2`.
pub fn psn_asymptotic(split: &HashSplit, z: u64) -> Result<f64> {
    check(split, z)?;
    Ok(0.5 * (-(z as f64) * c(split.lambda())).exp())
}

/// Which side of 1 and p/q a deviation factor lies on.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RegimeLabel {
    BelowOne,
    AtOne,
    Mid,
    AtPOverQ,
    AbovePOverQ,
}

impl RegimeLabel {
    pub fn classify(split: &HashSplit, kappa: f64) -> Self {
        let ratio = split.p() / split.q();
        if (kappa - 1.0).abs() < REGIME_TOLERANCE {
            RegimeLabel::AtOne
        } else if (kappa - ratio).abs() < REGIME_TOLERANCE {
            RegimeLabel::AtPOverQ
        } else if kappa < 1.0 {
            RegimeLabel::BelowOne
        } else if kappa < ratio {
            RegimeLabel::Mid
        } else {
            RegimeLabel::AbovePOverQ
        }
    }
}

/// First-order correction used for `P(z, p/q) - 1/2`.
///
/// Two forms of the correction circulate: `(1/3 + q/(p-q)) / √(2πz)`, which
/// is what the expansion of the two incomplete gamma terms produces and what
/// the numerics follow, and the same constant over `2πz`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Regime4Correction {
    #[default]
    InverseSqrt,
    Inverse,
}

/// Asymptotic value of `P(z, κ)` and of its complement.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConditionalAsymptotic {
    pub regime: RegimeLabel,
    /// Approximation of `P(z, κ)`.
    pub value: f64,
    /// Approximation of `1 - P(z, κ)`. Computed from its own formula above
    /// p/q, where `value` rounds to 1.
    pub complement: f64,
}

/// Large-`z` form of `P(z, κ)` in each of the five κ regimes.
///
/// Below κ = 1 the value is `λ^z e^{κz(1-λ)} + e^{-z c(κλ)} / ((1-κλ)√(2πz))`;
/// the first term carries the leading order.
///
/// ```
/// use doublespend::{asymptotics, race, HashSplit};
///
/// let split = HashSplit::new(0.1)?;
/// let approx = asymptotics::conditional_asymptotic(&split, 400, 0.5)?.value;
/// let exact = race::conditional_probability(&split, 400, 0.5)?;
/// assert!((approx / exact - 1.0).abs() < 0.15);
/// # Ok::<(), doublespend::Error>(())
/// ```
pub fn conditional_asymptotic(
    split: &HashSplit,
    z: u64,
    kappa: f64,
) -> Result<ConditionalAsymptotic> {
    conditional_asymptotic_with(split, z, kappa, Regime4Correction::default())
}

pub fn conditional_asymptotic_with(
    split: &HashSplit,
    z: u64,
    kappa: f64,
    correction: Regime4Correction,
) -> Result<ConditionalAsymptotic> {
    check(split, z)?;
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(domain("kappa", kappa, "kappa must be positive and finite"));
    }
    let zf = z as f64;
    let lambda = split.lambda();
    let kl = kappa * lambda;
    let root = (2.0 * PI * zf).sqrt();
    let decay = (-zf * c(kl)).exp();
    let regime = RegimeLabel::classify(split, kappa);
    let value = match regime {
        RegimeLabel::BelowOne => {
            // Q(z, κz) -> 1 here, so the catch-up term λ^z e^{κz(1-λ)} is
            // exponentially larger than the Poisson tail by e^{z c(κ)}.
            let ln_catchup = zf * (lambda.ln() + kappa * (1.0 - lambda));
            let ln_tail = -zf * c(kl) - ((1.0 - kl) * root).ln();
            let (big, small) = if ln_catchup > ln_tail {
                (ln_catchup, ln_tail)
            } else {
                (ln_tail, ln_catchup)
            };
            (big + (small - big).exp().ln_1p()).exp()
        }
        RegimeLabel::AtOne => psn_asymptotic(split, z)?,
        RegimeLabel::Mid => kappa * (1.0 - lambda) / ((kappa - 1.0) * (1.0 - kl)) * decay / root,
        RegimeLabel::AtPOverQ => {
            let constant = 1.0 / 3.0 + split.q() / (split.p() - split.q());
            let scale = match correction {
                Regime4Correction::InverseSqrt => root,
                Regime4Correction::Inverse => 2.0 * PI * zf,
            };
            0.5 + constant / scale
        }
        RegimeLabel::AbovePOverQ => {
            let tail = kappa * (1.0 - lambda) / ((kappa - 1.0) * (kl - 1.0)) * decay / root;
            return Ok(ConditionalAsymptotic {
                regime,
                value: 1.0 - tail,
                complement: tail,
            });
        }
    };
    Ok(ConditionalAsymptotic {
        regime,
        value,
        complement: 1.0 - value,
    })
}

/// Bounds `√(z/(z+½)) s^z/√(πz) ≤ P(z) ≤ s^z/√(π(1-s)z)`.
///
/// The bounds come from Gautschi's inequality for Γ(z+½)/Γ(z), which holds
/// for every z > 0, so `z = 1` is accepted as well.
pub fn p_bounds(split: &HashSplit, z: u64) -> Result<(f64, f64)> {
    check(split, z)?;
    let zf = z as f64;
    let ln_core = zf * split.s().ln() - 0.5 * (PI * zf).ln();
    let one_minus_s = (split.p() - split.q()).powi(2);
    let lower = (ln_core + 0.5 * (zf / (zf + 0.5)).ln()).exp();
    let upper = (ln_core - 0.5 * one_minus_s.ln()).exp();
    Ok((lower, upper))
}

/// Upper bound
/// `P_SN(z) < e^{-z c(λ)} / ((1-λ)√(2πz)) + e^{-z c(λ)} / 2`.
pub fn psn_upper_bound(split: &HashSplit, z: u64) -> Result<f64> {
    check(split, z)?;
    let zf = z as f64;
    let lambda = split.lambda();
    let decay = (-zf * c(lambda)).exp();
    Ok(decay / ((1.0 - lambda) * (2.0 * PI * zf).sqrt()) + 0.5 * decay)
}

/// `ψ(p) = q/p - 1 - ln(q/p) - ln(1/(4pq))`, the gap between the decay rates
/// of `P_SN` and `P`.
pub fn psi(split: &HashSplit) -> Result<f64> {
    split.require_minority()?;
    Ok(c(split.lambda()) + split.s().ln())
}

/// Explicit confirmation count past which `P_SN(z) < P(z)` is guaranteed.
pub fn z0_sufficient(split: &HashSplit) -> Result<u64> {
    let psi = psi(split)?;
    if !(psi > 0.0) {
        return Err(domain("psi", psi, "psi(p) must be positive for q < 0.5"));
    }
    let lambda = split.lambda();
    let first = 2.0 / (PI * (1.0 - lambda).powi(2));
    let second = 1.0 / (2.0 * SQRT_2) - 0.5 * (1.0 + 1.0 / SQRT_2) * (2.0 * psi / PI).ln() / psi;
    Ok(first.max(second).ceil().max(1.0) as u64)
}

/// Smallest `z ≥ 2` from which on `P_SN(w) < P(w)`, checked numerically for
/// `SHARP_WINDOW` confirmations past the last violation. Beyond the window
/// the ordering follows from `ln(1/s) < c(q/p)`. The scan also stops at
/// [`z0_sufficient`], and gives up past [`SHARP_SCAN_LIMIT`] (q very close to
/// 1/2).
///
/// ```
/// use doublespend::{asymptotics, HashSplit};
///
/// assert_eq!(asymptotics::z0_sharp(&HashSplit::new(0.3)?)?, 3);
/// # Ok::<(), doublespend::Error>(())
/// ```
pub fn z0_sharp(split: &HashSplit) -> Result<u64> {
    split.require_minority()?;
    // No violation can occur at or past the sufficient rank.
    let stop = z0_sufficient(split)?;
    let mut last_violation = 1;
    let mut w = 2;
    while w - last_violation <= SHARP_WINDOW && w < stop {
        if w > SHARP_SCAN_LIMIT {
            return Err(Error::RankScanOverflow {
                limit: SHARP_SCAN_LIMIT,
            });
        }
        let exact = race::ln_attacker_success(split, w)?;
        let nakamoto = race::ln_nakamoto_probability(split, w)?;
        if !(nakamoto < exact) {
            last_violation = w;
        }
        w += 1;
    }
    Ok(last_violation + 1)
}

// Σ_{j=1}^{z-1} Π_{i≤j}(1 - i/z) κ^{-j}
fn threshold_polynomial(z: u64, kappa: f64) -> f64 {
    let zf = z as f64;
    let u = 1.0 / kappa;
    let mut coeff = 1.0;
    let mut power = 1.0;
    let mut sum = 0.0;
    for i in 1..z {
        coeff *= 1.0 - i as f64 / zf;
        power *= u;
        sum += coeff * power;
    }
    sum
}

/// The unique root κ(z) of `Σ_j Π_{i≤j}(1 - i/z) κ^{-j} = λ/(1-λ)`; the map
/// κ ↦ P(z, κ) is convex on `(0, κ(z))`.
///
/// ```
/// use doublespend::{asymptotics, HashSplit};
///
/// let split = HashSplit::new(0.1)?;
/// let k2 = asymptotics::kappa_threshold(&split, 2)?;
/// assert!((k2 - (1.0 / (2.0 * 0.1) - 1.0)).abs() < 1e-10);
/// # Ok::<(), doublespend::Error>(())
/// ```
pub fn kappa_threshold(split: &HashSplit, z: u64) -> Result<f64> {
    split.require_minority()?;
    if z < 2 {
        return Err(domain("z", z as f64, "kappa threshold requires z >= 2"));
    }
    let lambda = split.lambda();
    let target = lambda / (1.0 - lambda);
    let f = |k: f64| threshold_polynomial(z, k) - target;

    let mut lo = 1.0;
    let mut hi = 1.0;
    let mut steps = 0;
    while f(lo) <= 0.0 {
        lo *= 0.5;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Convergence {
                what: "kappa threshold bracket",
                iterations: steps,
            });
        }
    }
    while f(hi) > 0.0 {
        hi *= 2.0;
        steps += 1;
        if steps > 2000 {
            return Err(Error::Convergence {
                what: "kappa threshold bracket",
                iterations: steps,
            });
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if f(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn split(q: f64) -> HashSplit {
        HashSplit::new(q).unwrap()
    }

    #[test]
    fn c_values() {
        assert_eq!(c_function(1.0).unwrap(), 0.0);
        let e = std::f64::consts::E;
        assert!((c_function(e).unwrap() - (e - 2.0)).abs() < 1e-15);
        let want = 1.0 / 9.0 - 1.0 + 9f64.ln();
        assert!((c_function(1.0 / 9.0).unwrap() - want).abs() < 1e-15);
        assert!((want - 1.3083).abs() < 1e-4);
        assert!(c_function(0.0).is_err());
    }

    #[test]
    fn p_asymptotic_formula() {
        let got = p_asymptotic(&split(0.1), 10).unwrap();
        let want = 0.36f64.powi(10) / (6.4 * PI).sqrt();
        assert!(((got - want) / want).abs() < 1e-13);
        assert!((got - 8.15e-6).abs() < 1e-8);
    }

    #[test]
    fn regimes() {
        let h = split(0.1);
        assert_eq!(RegimeLabel::classify(&h, 0.5), RegimeLabel::BelowOne);
        assert_eq!(RegimeLabel::classify(&h, 1.0), RegimeLabel::AtOne);
        assert_eq!(RegimeLabel::classify(&h, 4.0), RegimeLabel::Mid);
        assert_eq!(RegimeLabel::classify(&h, 9.0), RegimeLabel::AtPOverQ);
        assert_eq!(RegimeLabel::classify(&h, 20.0), RegimeLabel::AbovePOverQ);
    }

    #[test]
    fn at_one_delegates_to_nakamoto_asymptotic() {
        let h = split(0.1);
        let a = conditional_asymptotic(&h, 300, 1.0).unwrap();
        assert_eq!(a.regime, RegimeLabel::AtOne);
        assert_eq!(a.value, psn_asymptotic(&h, 300).unwrap());
    }

    #[test]
    fn psi_identity() {
        for i in 1..50 {
            let h = split(i as f64 / 100.0);
            let half_p = 1.0 / (2.0 * h.p());
            let alt = 2.0 * (half_p - 1.0 - half_p.ln());
            assert!((psi(&h).unwrap() - alt).abs() < 1e-12);
        }
    }

    #[test]
    fn balanced_split_is_rejected() {
        let h = split(0.5);
        assert!(p_asymptotic(&h, 5).is_err());
        assert!(z0_sharp(&h).is_err());
        assert!(kappa_threshold(&h, 3).is_err());
        assert!(kappa_threshold(&split(0.1), 1).is_err());
    }

    #[test]
    fn sharp_rank_examples() {
        assert_eq!(z0_sharp(&split(0.2)).unwrap(), 2);
        assert_eq!(z0_sharp(&split(0.3)).unwrap(), 3);
        assert_eq!(z0_sharp(&split(0.418)).unwrap(), 11);
        // the rank keeps growing past the last tabulated threshold
        assert_eq!(z0_sharp(&split(0.42)).unwrap(), 12);
        assert!(matches!(
            z0_sharp(&split(0.4999)),
            Err(Error::RankScanOverflow { .. })
        ));
    }

    #[test]
    fn sufficient_rank_guarantees_ordering() {
        let h = split(0.3);
        let z0 = z0_sufficient(&h).unwrap();
        for z in [z0, z0 + 1, 2 * z0] {
            assert!(
                race::nakamoto_probability(&h, z).unwrap()
                    < race::attacker_success_closed(&h, z).unwrap()
            );
        }
    }

    #[test]
    fn threshold_limits() {
        let h = split(0.1);
        let k100 = kappa_threshold(&h, 100).unwrap();
        let correction = 9.0 - k100;
        assert!((correction - 0.10125).abs() <= 0.1 * 0.10125, "{k100}");
        let far = kappa_threshold(&h, 5000).unwrap();
        assert!(far < 9.0 && 9.0 - far < 0.01);
    }
}
