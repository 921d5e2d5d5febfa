//! Success probabilities of the double-spend race.
//!
//! The honest miners need `z` blocks; while they mine them the attacker finds
//! `X_z` blocks, negative-binomially distributed. From a deficit of `n` blocks
//! the attacker catches up with probability `(q/p)^n`. Averaging gives the
//! exact success probability `P(z) = I_{4pq}(z, 1/2)`.
//!
//! Nakamoto's estimate replaces the random duration of the `z` honest blocks
//! by its mean. Conditioning instead on the observed duration, expressed as
//! the deviation factor `κ = p τ₁ / (z τ₀)`, gives `P(z, κ)`, with
//! `P_SN(z) = P(z, 1)` and `P(z)` the average of `P(z, κ)` against the
//! Gamma(z, z) law of κ.
//!
//! ```
//! use doublespend::{race, HashSplit};
//!
//! let split = HashSplit::new(0.1)?;
//! let exact = race::attacker_success_closed(&split, 6)?;
//! let nakamoto = race::nakamoto_probability(&split, 6)?;
//! assert!((exact - 0.0005914).abs() < 5e-8);
//! assert!((nakamoto - 0.0002428).abs() < 5e-8);
//! # Ok::<(), doublespend::Error>(())
//! ```

use crate::error::{domain, Error, Result};
use crate::params::{HashSplit, NetworkParams};
use crate::quadrature;
use crate::specfun::{
    ln_1m_exp, ln_gamma, ln_gamma_pq, ln_reg_inc_beta, log_binomial, reg_inc_beta, Tolerance,
};

/// Largest `z` for which the finite alternating sum is offered.
pub const SUM_MAX_Z: u64 = 200;

/// Upper bound of the confirmation search.
pub const CONFIRMATION_LIMIT: u64 = 10_000_000;

/// Absolute accuracy requested from the κ quadrature.
pub const QUADRATURE_TOLERANCE: f64 = 1e-9;

/// κ beyond which the quadrature truncates: `P[κ > κ_up] < 1e-12`.
pub const QUADRATURE_TAIL: f64 = 1e-12;

fn log_sum_exp(terms: &[f64]) -> f64 {
    let max = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return max;
    }
    max + terms.iter().map(|t| (t - max).exp()).sum::<f64>().ln()
}

/// Probability `(q/p)^n` of ever catching up from `n` blocks behind.
pub fn catchup_probability(split: &HashSplit, n: u64) -> f64 {
    if n == 0 || split.is_balanced() {
        return 1.0;
    }
    (n as f64 * split.lambda().ln()).exp()
}

/// `P[X_n = k] = p^n q^k C(k+n-1, k)`, the law of the attacker's block count
/// when the honest miners finish their `n`-th block.
pub fn negbin_pmf(split: &HashSplit, n: u64, k: u64) -> Result<f64> {
    if n == 0 {
        return Err(domain("n", 0.0, "negative binomial requires n >= 1"));
    }
    let ln = n as f64 * split.p().ln() + k as f64 * split.q().ln() + log_binomial(k + n - 1, k)?;
    Ok(ln.exp())
}

/// Exact success probability from the finite sum
/// `1 - Σ_{k<z} (p^z q^k - q^z p^k) C(k+z-1, k)`. Offered for `z <= 200`.
pub fn attacker_success_sum(split: &HashSplit, z: u64) -> Result<f64> {
    if z > SUM_MAX_Z {
        return Err(domain(
            "z",
            z as f64,
            "the finite sum is only offered for z <= 200; use the closed form",
        ));
    }
    if z == 0 || split.is_balanced() {
        return Ok(1.0);
    }
    let (ln_p, ln_q) = (split.p().ln(), split.q().ln());
    let zf = z as f64;
    let mut acc = 1.0;
    for k in 0..z {
        let ln_c = log_binomial(k + z - 1, k)?;
        let kf = k as f64;
        let honest = (zf * ln_p + kf * ln_q + ln_c).exp();
        let attacker = (zf * ln_q + kf * ln_p + ln_c).exp();
        acc -= honest - attacker;
    }
    Ok(acc.clamp(0.0, 1.0))
}

/// Exact success probability `P(z) = I_{4pq}(z, 1/2)`.
pub fn attacker_success_closed(split: &HashSplit, z: u64) -> Result<f64> {
    if z == 0 || split.is_balanced() {
        return Ok(1.0);
    }
    reg_inc_beta(split.s(), z as f64, 0.5)
}

/// ln P(z), finite even when P(z) underflows.
pub fn ln_attacker_success(split: &HashSplit, z: u64) -> Result<f64> {
    if z == 0 || split.is_balanced() {
        return Ok(0.0);
    }
    ln_reg_inc_beta(split.s(), z as f64, 0.5)
}

/// Nakamoto's estimate `P_SN(z)`, in which the attacker's block count is
/// Poisson with mean `zq/p`.
///
/// Evaluated as `P[N ≥ z] + Σ_{k<z} P[N = k] (q/p)^{z-k}`, a sum of positive
/// terms.
pub fn nakamoto_probability(split: &HashSplit, z: u64) -> Result<f64> {
    Ok(ln_nakamoto_probability(split, z)?.exp().clamp(0.0, 1.0))
}

/// ln P_SN(z).
pub fn ln_nakamoto_probability(split: &HashSplit, z: u64) -> Result<f64> {
    if z == 0 || split.is_balanced() {
        return Ok(0.0);
    }
    let zf = z as f64;
    let ln_lambda = split.lambda().ln();
    let mean = zf * split.lambda();
    let ln_mean = mean.ln();
    let (ln_tail, _) = ln_gamma_pq(zf, mean, &Tolerance::default())?;
    let mut terms = Vec::with_capacity(z as usize + 1);
    terms.push(ln_tail);
    for k in 0..z {
        let kf = k as f64;
        let ln_pois = kf * ln_mean - mean - ln_gamma(kf + 1.0);
        terms.push(ln_pois + (zf - kf) * ln_lambda);
    }
    Ok(log_sum_exp(&terms).min(0.0))
}

fn check_conditional(z: u64, kappa: f64) -> Result<()> {
    if z == 0 {
        return Err(domain("z", 0.0, "conditional probability requires z >= 1"));
    }
    if !(kappa > 0.0) || !kappa.is_finite() {
        return Err(domain("kappa", kappa, "kappa must be positive and finite"));
    }
    Ok(())
}

// (ln P[N' < z], ln λ^z e^{κz(1-λ)} Q(z, κz)) with N' ~ Poisson(κzλ)
fn conditional_parts(split: &HashSplit, z: u64, kappa: f64) -> Result<(f64, f64, f64)> {
    let tol = Tolerance::default();
    let zf = z as f64;
    let lambda = split.lambda();
    let (ln_reached, ln_short) = ln_gamma_pq(zf, kappa * zf * lambda, &tol)?;
    let (_, ln_q_kz) = ln_gamma_pq(zf, kappa * zf, &tol)?;
    let ln_catchup = zf * lambda.ln() + kappa * zf * (1.0 - lambda) + ln_q_kz;
    Ok((ln_reached, ln_short, ln_catchup))
}

/// Success probability given the deviation factor κ of the honest chain,
/// `P(z, κ) = 1 - Q(z, κzq/p) + (q/p)^z e^{κz(p-q)/p} Q(z, κz)`.
///
/// ```
/// use doublespend::{race, HashSplit};
///
/// let split = HashSplit::new(0.26)?;
/// let p = race::conditional_probability(&split, 6, 0.5)?;
/// assert!((100.0 * p - 1.28).abs() < 0.005);
/// # Ok::<(), doublespend::Error>(())
/// ```
pub fn conditional_probability(split: &HashSplit, z: u64, kappa: f64) -> Result<f64> {
    check_conditional(z, kappa)?;
    let (ln_reached, _, ln_catchup) = conditional_parts(split, z, kappa)?;
    Ok((ln_reached.exp() + ln_catchup.exp()).clamp(0.0, 1.0))
}

/// `1 - P(z, κ)`, evaluated directly so that it keeps relative accuracy when
/// `P(z, κ)` is indistinguishable from 1.
pub fn conditional_failure_probability(split: &HashSplit, z: u64, kappa: f64) -> Result<f64> {
    check_conditional(z, kappa)?;
    let (_, ln_short, ln_catchup) = conditional_parts(split, z, kappa)?;
    if ln_catchup >= ln_short {
        return Ok(0.0);
    }
    Ok((ln_short + ln_1m_exp(ln_catchup - ln_short))
        .exp()
        .clamp(0.0, 1.0))
}

/// Density of κ, which is Gamma(z, z) distributed:
/// `z^z / (z-1)! κ^{z-1} e^{-zκ}`.
pub fn kappa_density(z: u64, kappa: f64) -> Result<f64> {
    check_conditional(z, kappa)?;
    let zf = z as f64;
    let ln = zf * zf.ln() - ln_gamma(zf) + (zf - 1.0) * kappa.ln() - zf * kappa;
    Ok(ln.exp())
}

/// `P[κ > kappa] = Q(z, κz)`. Does not depend on the hash split.
pub fn deviation_tail(z: u64, kappa: f64) -> Result<f64> {
    if z == 0 {
        return Err(domain("z", 0.0, "deviation tail requires z >= 1"));
    }
    if !(kappa >= 0.0) {
        return Err(domain("kappa", kappa, "kappa must be non-negative"));
    }
    let (_, ln_q) = ln_gamma_pq(z as f64, kappa * z as f64, &Tolerance::default())?;
    Ok(ln_q.exp().clamp(0.0, 1.0))
}

/// Smallest power-of-two multiple of 1 past which κ has tail mass below `tail`.
pub fn kappa_upper_limit(z: u64, tail: f64) -> Result<f64> {
    let mut up = 1.0;
    while deviation_tail(z, up)? >= tail {
        up *= 2.0;
    }
    Ok(up)
}

/// Recovers `P(z)` as `∫ P(z, κ) dρ_z(κ)` by adaptive quadrature over
/// `(0, κ_up]`.
pub fn recover_p_by_quadrature(split: &HashSplit, z: u64) -> Result<f64> {
    if z == 0 {
        return Err(domain("z", 0.0, "quadrature recovery requires z >= 1"));
    }
    let upper = kappa_upper_limit(z, QUADRATURE_TAIL)?;
    // Errors cannot escape the closure; any failure poisons the sum instead.
    let integrand = |k: f64| match (conditional_probability(split, z, k), kappa_density(z, k)) {
        (Ok(p), Ok(d)) => p * d,
        _ => f64::NAN,
    };
    let integral = quadrature::integrate(integrand, 0.0, upper, QUADRATURE_TOLERANCE)?;
    if !integral.value.is_finite() {
        return Err(Error::Convergence {
            what: "kappa quadrature",
            iterations: integral.segments,
        });
    }
    Ok(integral.value.clamp(0.0, 1.0))
}

/// Deviation factor `κ = p τ₁ / (z τ₀)` for confirmations that took `tau1`.
pub fn kappa_from_times(net: &NetworkParams, split: &HashSplit, z: u64, tau1: f64) -> Result<f64> {
    if z == 0 {
        return Err(domain("z", 0.0, "kappa requires z >= 1"));
    }
    if !(tau1 > 0.0) || !tau1.is_finite() {
        return Err(domain("tau1", tau1, "observed time must be positive"));
    }
    Ok(split.p() * tau1 / (z as f64 * net.tau0))
}

/// Smallest `z >= 1` with success probability strictly below `risk`, using
/// either the exact probability or Nakamoto's estimate.
///
/// ```
/// use doublespend::{race, HashSplit};
///
/// let split = HashSplit::new(0.45)?;
/// assert_eq!(race::confirmations_required(&split, 0.001, false)?, 539);
/// assert_eq!(race::confirmations_required(&split, 0.001, true)?, 340);
/// # Ok::<(), doublespend::Error>(())
/// ```
pub fn confirmations_required(split: &HashSplit, risk: f64, use_nakamoto: bool) -> Result<u64> {
    if !(risk > 0.0 && risk < 1.0) {
        return Err(domain("risk", risk, "risk must lie in (0, 1)"));
    }
    split.require_minority()?;
    let below = |z: u64| -> Result<bool> {
        let p = if use_nakamoto {
            nakamoto_probability(split, z)?
        } else {
            attacker_success_closed(split, z)?
        };
        Ok(p < risk)
    };

    if below(1)? {
        return Ok(1);
    }
    // Invariant: P(lo) >= risk and P(hi) < risk.
    let mut lo = 1;
    let mut hi = 2;
    while !below(hi)? {
        if hi >= CONFIRMATION_LIMIT {
            return Err(Error::SearchOverflow {
                limit: CONFIRMATION_LIMIT,
                risk,
            });
        }
        lo = hi;
        hi = (hi * 2).min(CONFIRMATION_LIMIT);
    }
    while hi - lo > 1 {
        let mid = lo + (hi - lo) / 2;
        if below(mid)? {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    Ok(hi)
}
