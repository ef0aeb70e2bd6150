use crate::error::{Error, Result};

/// Fitted generalized Pareto distribution (shape `k`, scale `sigma`).
/// Positive `k` means a heavy tail.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct GpdFit {
    pub k: f64,
    pub sigma: f64,
}

const MIN_GRID_POINTS: usize = 30;
const PRIOR_SCALE: f64 = 3.0;
// Weakly informative shrinkage of k toward 0.5 worth this many pseudo-samples.
const PRIOR_WEIGHT: f64 = 10.0;

/// Fit a generalized Pareto distribution to non-negative exceedances.
///
/// Zhang-Stephens empirical-Bayes estimator: the profile likelihood of
/// θ = -k/σ is evaluated on a quantile-based grid and θ is taken as its
/// posterior mean; `k` is then shrunk slightly toward 0.5 as in PSIS.
pub fn fit_generalized_pareto(tail: &[f64]) -> Result<GpdFit> {
    const WHAT: &str = "fit_generalized_pareto";
    if tail.len() < 5 {
        return Err(Error::TooFewSamples {
            what: WHAT,
            needed: 5,
            got: tail.len(),
        });
    }
    if let Some(&bad) = tail.iter().find(|x| !(x.is_finite() && **x >= 0.0)) {
        return Err(Error::Domain {
            what: WHAT,
            value: bad,
        });
    }
    let mut x = tail.to_vec();
    x.sort_by(f64::total_cmp);
    let n = x.len();
    let x_max = x[n - 1];
    if x_max - x[0] <= f64::EPSILON * x_max.abs() {
        return Err(Error::Degenerate(WHAT));
    }

    let m = MIN_GRID_POINTS + (n as f64).sqrt().floor() as usize;
    let first_quartile = x[((n as f64) / 4.0 + 0.5).floor() as usize - 1];
    if first_quartile <= 0.0 {
        // More than a quarter of the exceedances are exactly zero.
        return Err(Error::Degenerate(WHAT));
    }

    let thetas: Vec<f64> = (1..=m)
        .map(|j| {
            1.0 / x_max
                + (1.0 - (m as f64 / (j as f64 - 0.5)).sqrt()) / PRIOR_SCALE / first_quartile
        })
        .collect();
    let log_lik: Vec<f64> = thetas
        .iter()
        .map(|&theta| n as f64 * profile_log_lik(theta, &x))
        .collect();
    let max_ll = log_lik
        .iter()
        .copied()
        .filter(|v| v.is_finite())
        .fold(f64::NEG_INFINITY, f64::max);
    if !max_ll.is_finite() {
        return Err(Error::Numeric("GPD profile likelihood not finite".into()));
    }
    let weights: Vec<f64> = log_lik
        .iter()
        .map(|&l| if l.is_finite() { (l - max_ll).exp() } else { 0.0 })
        .collect();
    let total: f64 = weights.iter().sum();
    let theta_hat = thetas
        .iter()
        .zip(&weights)
        .map(|(t, w)| t * w)
        .sum::<f64>()
        / total;

    let k_raw = x.iter().map(|&v| (-theta_hat * v).ln_1p()).sum::<f64>() / n as f64;
    let sigma = -k_raw / theta_hat;
    let k = (n as f64 * k_raw + PRIOR_WEIGHT * 0.5) / (n as f64 + PRIOR_WEIGHT);
    if !(sigma > 0.0 && sigma.is_finite() && k.is_finite()) {
        return Err(Error::Numeric(format!(
            "GPD fit produced k={k}, sigma={sigma}"
        )));
    }
    Ok(GpdFit { k, sigma })
}

// Profile log-likelihood per observation at θ.
fn profile_log_lik(theta: f64, x: &[f64]) -> f64 {
    let b = -theta;
    let k = x.iter().map(|&v| (b * v).ln_1p()).sum::<f64>() / x.len() as f64;
    (b / k).ln() - k - 1.0
}

/// Quantile function of GPD(k, sigma) at probability `p`.
pub fn gpd_quantile(p: f64, fit: GpdFit) -> f64 {
    if fit.k.abs() < 1e-12 {
        -fit.sigma * (-p).ln_1p()
    } else {
        fit.sigma * ((-fit.k * (-p).ln_1p()).exp() - 1.0) / fit.k
    }
}
