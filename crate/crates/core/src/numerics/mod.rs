//! Special functions, seeded random streams, Gamma variates and generalized
//! Pareto tail fitting.

mod gamma;
mod gpd;
mod rng;
mod special;

pub use gamma::sample_gamma;
pub(crate) use gamma::gamma_draw;
pub use gpd::{fit_generalized_pareto, gpd_quantile, GpdFit};
pub use rng::RngStream;
pub use special::{digamma, log_gamma, trigamma};
pub(crate) use special::{lgamma, psi, psi1};

/// `ln(sum(exp(xs)))` without overflow. Returns `-inf` for an empty slice.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return max;
    }
    max + xs.iter().map(|x| (x - max).exp()).sum::<f64>().ln()
}

/// Index drawn with probability proportional to non-negative `weights`.
pub(crate) fn sample_index<R: rand::Rng + ?Sized>(weights: &[f64], rng: &mut R) -> usize {
    let total: f64 = weights.iter().sum();
    let mut u = rng.random::<f64>() * total;
    for (k, &w) in weights.iter().enumerate() {
        if u < w {
            return k;
        }
        u -= w;
    }
    // Rounding left u just above the last positive weight.
    weights.iter().rposition(|&w| w > 0.0).unwrap_or(0)
}
