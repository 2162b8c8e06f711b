//! Predicted exponents of `n` in the weak-error bounds.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Regime {
    /// Bounded drift, `δ = α − 1 − β`.
    Bounded,
    /// Distributional drift, `β ∈ (0, (α−1)/2)`.
    DistI,
    /// Distributional drift with divergence in the same space, `β ∈ [(α−1)/2, α−1)`.
    DistIi,
}

/// Absolute tolerance at the interval ends, so that a decimal parameter
/// typed as a boundary value lands on the boundary.
pub const BOUNDARY_TOL: f64 = 1e-12;

fn require(cond: bool, name: &'static str, constraint: String) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, constraint })
    }
}

/// Dominant exponent of `n` in the error bound of the given regime.
///
/// * bounded: `−min(δ, δ/α, (α−1)/α)` with `δ = α − 1 − β`;
/// * dist_i: `max(−(α−1)/α + β(γ + max(γ, 1/α)), −γ(θ − β))`;
/// * dist_ii: `max(−(α−1)/α + β(γ + 1/α), −γ(α − 1 − β) + ε)`.
pub fn theoretical_exponent(alpha: f64, beta: f64, gamma: f64, theta: f64, eps: f64, regime: Regime) -> Result<f64> {
    require(alpha > 1.0 && alpha < 2.0, "alpha", format!("1 < α < 2 violated: α = {alpha}"))?;
    let a1 = alpha - 1.0;
    match regime {
        Regime::Bounded => {
            require(beta >= 0.0 && beta < a1 - BOUNDARY_TOL, "beta", format!("0 ≤ β < α − 1 = {a1} violated: β = {beta}"))?;
            let delta = a1 - beta;
            Ok(-(delta.min(delta / alpha).min(a1 / alpha)))
        }
        Regime::DistI => {
            require(beta > 0.0 && beta < a1 / 2.0 - BOUNDARY_TOL, "beta", format!("0 < β < (α−1)/2 = {} violated: β = {beta}", a1 / 2.0))?;
            let g_max = a1 / (2.0 * alpha * beta);
            require(gamma > 0.0 && gamma < g_max - BOUNDARY_TOL, "gamma", format!("0 < γ < (α−1)/(2αβ) = {g_max} violated: γ = {gamma}"))?;
            require(theta > beta && theta < a1 - beta - BOUNDARY_TOL, "theta", format!(
                "β < θ < α − 1 − β violated: need {beta} < θ < {}, got θ = {theta}",
                a1 - beta
            ))?;
            require(eps >= 0.0, "eps", format!("ε ≥ 0 violated: ε = {eps}"))?;
            let first = -a1 / alpha + beta * (gamma + gamma.max(1.0 / alpha));
            Ok(first.max(-gamma * (theta - beta)))
        }
        Regime::DistIi => {
            require(beta >= a1 / 2.0 - BOUNDARY_TOL && beta < a1 - BOUNDARY_TOL, "beta", format!(
                "(α−1)/2 ≤ β < α − 1 violated: need {} ≤ β < {a1}, got β = {beta}",
                a1 / 2.0
            ))?;
            let g_max = (a1 - beta) / (alpha * beta);
            require(gamma > 0.0 && gamma < g_max - BOUNDARY_TOL, "gamma", format!("0 < γ < (α−1−β)/(αβ) = {g_max} violated: γ = {gamma}"))?;
            require(eps > 0.0, "eps", format!("ε > 0 violated: ε = {eps}"))?;
            let first = -a1 / alpha + beta * (gamma + 1.0 / alpha);
            Ok(first.max(-gamma * (a1 - beta) + eps))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bounded_beta_zero() {
        let e = theoretical_exponent(1.5, 0.0, 0.0, 0.0, 0.0, Regime::Bounded).unwrap();
        assert!((e + 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn example_two_rate() {
        let (alpha, beta, eps) = (1.6, 0.1, 0.01);
        let e = theoretical_exponent(alpha, beta, 1.0 / alpha, alpha - 1.0 - beta - alpha * eps, 0.0, Regime::DistI).unwrap();
        let want = -(alpha - 1.0 - 2.0 * beta) / alpha + eps;
        assert!((e - want).abs() < 1e-12, "{e} vs {want}");
    }

    #[test]
    fn gamma_boundary_rejected_and_first_branch_vanishes() {
        let (alpha, beta) = (1.6, 0.1);
        let g = (alpha - 1.0) / (2.0 * alpha * beta);
        let err = theoretical_exponent(alpha, beta, g, 0.3, 0.0, Regime::DistI).unwrap_err();
        assert!(err.to_string().contains("γ"));
        // approaching the boundary from inside, the first branch tends to 0
        let first = -(alpha - 1.0) / alpha + beta * 2.0 * (g - 1e-9);
        assert!(first.abs() < 1e-8);
    }

    #[test]
    fn regime_two_closed_left_endpoint() {
        let alpha = 1.6;
        let beta = (alpha - 1.0) / 2.0;
        assert!(theoretical_exponent(alpha, beta, 0.5, 0.0, 0.01, Regime::DistIi).is_ok());
        assert!(theoretical_exponent(alpha, beta, 0.5, 0.4, 0.01, Regime::DistI).is_err());
        // 0.3 as typed differs from (1.6 − 1)/2 in the last bit
        assert!(theoretical_exponent(1.6, 0.3, 0.5, 0.0, 0.01, Regime::DistIi).is_ok());
        assert!(theoretical_exponent(1.6, 0.3, 0.5, 0.4, 0.01, Regime::DistI).is_err());
    }
}
