//! Regularized incomplete beta function.

use super::gamma::{ln_1m_exp, ln_beta};
use super::Tolerance;
use crate::error::{domain, Error, Result};

/// I_x(a, b) = B_x(a, b) / B(a, b).
///
/// ```
/// use doublespend::specfun::reg_inc_beta;
///
/// // I_x(1, b) = 1 - (1 - x)^b
/// let v = reg_inc_beta(0.36, 1.0, 0.5).unwrap();
/// assert!((v - 0.2).abs() < 1e-15);
/// ```
pub fn reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    reg_inc_beta_with(x, a, b, &Tolerance::default())
}

pub fn reg_inc_beta_with(x: f64, a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    let (ln_i, _) = ln_beta_pair(x, a, b, tol)?;
    Ok(ln_i.exp().clamp(0.0, 1.0))
}

/// ln I_x(a, b), keeping relative accuracy when I_x(a, b) underflows.
pub fn ln_reg_inc_beta(x: f64, a: f64, b: f64) -> Result<f64> {
    Ok(ln_beta_pair(x, a, b, &Tolerance::default())?.0)
}

/// (ln I_x(a, b), ln(1 − I_x(a, b))).
///
/// The continued fraction converges fast for x < (a+1)/(a+b+2); on the other
/// side the symmetry I_x(a, b) = 1 − I_{1−x}(b, a) is used.
pub(crate) fn ln_beta_pair(x: f64, a: f64, b: f64, tol: &Tolerance) -> Result<(f64, f64)> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(domain("a", a, "incomplete beta requires a > 0"));
    }
    if !(b > 0.0) || !b.is_finite() {
        return Err(domain("b", b, "incomplete beta requires b > 0"));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(domain("x", x, "incomplete beta requires 0 <= x <= 1"));
    }
    if x == 0.0 {
        return Ok((f64::NEG_INFINITY, 0.0));
    }
    if x == 1.0 {
        return Ok((0.0, f64::NEG_INFINITY));
    }
    if x < (a + 1.0) / (a + b + 2.0) {
        let ln_i = ln_lower_branch(x, 1.0 - x, a, b, tol)?;
        Ok((ln_i, ln_1m_exp(ln_i)))
    } else {
        let ln_j = ln_lower_branch(1.0 - x, x, b, a, tol)?;
        Ok((ln_1m_exp(ln_j), ln_j))
    }
}

fn ln_lower_branch(x: f64, one_minus_x: f64, a: f64, b: f64, tol: &Tolerance) -> Result<f64> {
    let ln_front = a * x.ln() + b * one_minus_x.ln() - ln_beta(a, b) - a.ln();
    let cf = continued_fraction(x, a, b, tol.rel_eps, tol.iteration_cap(a.max(b)))?;
    Ok(ln_front + cf.ln())
}

// Modified Lentz evaluation of the standard even/odd continued fraction for
// B_x(a, b) x^{-a} (1-x)^{-b} a.
fn continued_fraction(x: f64, a: f64, b: f64, eps: f64, cap: usize) -> Result<f64> {
    const TINY: f64 = 1e-300;
    let qab = a + b;
    let qap = a + 1.0;
    let qam = a - 1.0;
    let mut c = 1.0;
    let mut d = 1.0 - qab * x / qap;
    if d.abs() < TINY {
        d = TINY;
    }
    d = 1.0 / d;
    let mut h = d;
    for m in 1..=cap {
        let m = m as f64;
        let m2 = 2.0 * m;

        let aa = m * (b - m) * x / ((qam + m2) * (a + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        h *= d * c;

        let aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
        d = 1.0 + aa * d;
        if d.abs() < TINY {
            d = TINY;
        }
        c = 1.0 + aa / c;
        if c.abs() < TINY {
            c = TINY;
        }
        d = 1.0 / d;
        let delta = d * c;
        h *= delta;
        if (delta - 1.0).abs() < eps {
            return Ok(h);
        }
    }
    Err(Error::Convergence {
        what: "incomplete beta continued fraction",
        iterations: cap,
    })
}
