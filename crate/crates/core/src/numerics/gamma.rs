use rand::Rng;
use rand_distr::{Open01, StandardNormal};

use super::RngStream;
use crate::error::{Error, Result};

/// Draw from Gamma(shape, rate) (mean `shape / rate`).
pub fn sample_gamma(shape: f64, rate: f64, rng: &mut RngStream) -> Result<f64> {
    if !(shape > 0.0 && shape.is_finite()) {
        return Err(Error::Domain {
            what: "sample_gamma shape",
            value: shape,
        });
    }
    if !(rate > 0.0 && rate.is_finite()) {
        return Err(Error::Domain {
            what: "sample_gamma rate",
            value: rate,
        });
    }
    Ok(gamma_draw(shape, rate, rng))
}

/// Unchecked Gamma(shape, rate) draw.
///
/// Marsaglia-Tsang squeeze for shape >= 1; shape < 1 goes through
/// G(shape) = G(shape + 1) * U^(1/shape) in log space.
pub(crate) fn gamma_draw<R: Rng + ?Sized>(shape: f64, rate: f64, rng: &mut R) -> f64 {
    if shape < 1.0 {
        let u: f64 = rng.sample(Open01);
        let log_x = standard_gamma(shape + 1.0, rng).ln() + u.ln() / shape;
        return (log_x.exp() / rate).max(f64::MIN_POSITIVE);
    }
    standard_gamma(shape, rng) / rate
}

fn standard_gamma<R: Rng + ?Sized>(shape: f64, rng: &mut R) -> f64 {
    let d = shape - 1.0 / 3.0;
    let c = 1.0 / (9.0 * d).sqrt();
    loop {
        let x: f64 = rng.sample(StandardNormal);
        let v = 1.0 + c * x;
        if v <= 0.0 {
            continue;
        }
        let v = v * v * v;
        let u: f64 = rng.sample(Open01);
        let x2 = x * x;
        if u < 1.0 - 0.0331 * x2 * x2 {
            return d * v;
        }
        if u.ln() < 0.5 * x2 + d * (1.0 - v + v.ln()) {
            return d * v;
        }
    }
}
