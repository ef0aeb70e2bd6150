use crate::error::{Error, Result};

const HALF_LN_2PI: f64 = 0.918_938_533_204_672_8;

// Below this the recurrences shift the argument up before the asymptotic
// series is applied.
const ASYMPTOTIC_MIN: f64 = 10.0;

/// `ln Γ(x)` for `x > 0`.
pub fn log_gamma(x: f64) -> Result<f64> {
    check_positive("log_gamma", x)?;
    Ok(lgamma(x))
}

/// Digamma function ψ(a) = d/da ln Γ(a).
pub fn digamma(a: f64) -> Result<f64> {
    check_positive("digamma", a)?;
    Ok(psi(a))
}

/// Trigamma function ψ₁(a) = d²/da² ln Γ(a).
pub fn trigamma(a: f64) -> Result<f64> {
    check_positive("trigamma", a)?;
    Ok(psi1(a))
}

fn check_positive(what: &'static str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain { what, value: x })
    }
}

/// Unchecked `ln Γ(x)`; callers guarantee `x > 0`.
pub(crate) fn lgamma(x: f64) -> f64 {
    // ln Γ(x) = ln Γ(x + m) - ln(x (x+1) ... (x+m-1))
    let mut shift = 1.0;
    let mut y = x;
    while y < ASYMPTOTIC_MIN {
        shift *= y;
        y += 1.0;
    }
    stirling(y) - shift.ln()
}

fn stirling(x: f64) -> f64 {
    // Bernoulli terms B_2k / (2k (2k-1) x^(2k-1)), k = 1..8
    const C: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 360.0,
        1.0 / 1260.0,
        -1.0 / 1680.0,
        1.0 / 1188.0,
        -691.0 / 360_360.0,
        1.0 / 156.0,
        -3617.0 / 122_400.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    (x - 0.5) * x.ln() - x + HALF_LN_2PI + series * inv
}

/// Unchecked ψ(a).
pub(crate) fn psi(a: f64) -> f64 {
    let mut acc = 0.0;
    let mut x = a;
    while x < ASYMPTOTIC_MIN {
        acc -= 1.0 / x;
        x += 1.0;
    }
    // B_2k / (2k x^2k)
    const C: [f64; 7] = [
        1.0 / 12.0,
        -1.0 / 120.0,
        1.0 / 252.0,
        -1.0 / 240.0,
        1.0 / 132.0,
        -691.0 / 32_760.0,
        1.0 / 12.0,
    ];
    let inv2 = 1.0 / (x * x);
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    acc + x.ln() - 0.5 / x - series * inv2
}

/// Unchecked ψ₁(a).
pub(crate) fn psi1(a: f64) -> f64 {
    let mut acc = 0.0;
    let mut x = a;
    while x < ASYMPTOTIC_MIN {
        acc += 1.0 / (x * x);
        x += 1.0;
    }
    // B_2k / x^(2k+1)
    const C: [f64; 7] = [
        1.0 / 6.0,
        -1.0 / 30.0,
        1.0 / 42.0,
        -1.0 / 30.0,
        5.0 / 66.0,
        -691.0 / 2730.0,
        7.0 / 6.0,
    ];
    let inv = 1.0 / x;
    let inv2 = inv * inv;
    let mut series = 0.0;
    for c in C.iter().rev() {
        series = series * inv2 + c;
    }
    acc + inv + 0.5 * inv2 + series * inv2 * inv
}
