//! Exact closed forms: Bachelier vanilla/quadratic prices and the exact
//! normal-SABR quadratic swap. These serve both as the constant-volatility
//! base of the expansions and as oracles for them.

use serde::{Deserialize, Serialize};

use crate::error::{require_non_negative, require_positive, PricingError, Result};
use crate::mathcore::{g_call, norm_cdf, norm_pdf};

/// Vanilla payoff side.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OptionKind {
    Call,
    Put,
}

/// Quadratic payoff side: `((F−K)⁺)²`, `((K−F)⁺)²` or `(F−K)²`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum QuadKind {
    Call,
    Put,
    Swap,
}

/// Inputs for the Bachelier (arithmetic Brownian) pricers.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct BachelierInputs {
    forward: f64,
    strike: f64,
    sigma: f64,
    expiry: f64,
    numeraire: f64,
}

impl BachelierInputs {
    /// Validated constructor: `sigma ≥ 0`, `expiry > 0`, `numeraire > 0`.
    pub fn new(forward: f64, strike: f64, sigma: f64, expiry: f64, numeraire: f64) -> Result<Self> {
        crate::error::require_finite(forward, "forward")?;
        crate::error::require_finite(strike, "strike")?;
        require_non_negative(sigma, "sigma")?;
        require_positive(expiry, "expiry")?;
        require_positive(numeraire, "numeraire")?;
        Ok(Self {
            forward,
            strike,
            sigma,
            expiry,
            numeraire,
        })
    }

    pub fn forward(&self) -> f64 {
        self.forward
    }
    pub fn strike(&self) -> f64 {
        self.strike
    }
    pub fn sigma(&self) -> f64 {
        self.sigma
    }
    pub fn expiry(&self) -> f64 {
        self.expiry
    }
    pub fn numeraire(&self) -> f64 {
        self.numeraire
    }

    /// Same inputs at a different strike.
    pub fn with_strike(&self, strike: f64) -> Self {
        Self { strike, ..*self }
    }
}

/// Bachelier vanilla price `N_T·σ√T·G(±y)` with `y = (K − F₀)/(σ√T)`.
///
/// `σ = 0` degenerates to the discounted intrinsic value.
pub fn bachelier_vanilla(inputs: &BachelierInputs, kind: OptionKind) -> f64 {
    let s = inputs.sigma * inputs.expiry.sqrt();
    let intrinsic = match kind {
        OptionKind::Call => (inputs.forward - inputs.strike).max(0.0),
        OptionKind::Put => (inputs.strike - inputs.forward).max(0.0),
    };
    if s == 0.0 {
        return inputs.numeraire * intrinsic;
    }
    let y = (inputs.strike - inputs.forward) / s;
    let kernel = match kind {
        OptionKind::Call => g_call(y),
        OptionKind::Put => g_call(-y),
    };
    inputs.numeraire * s * kernel
}

/// Bachelier quadratic price.
///
/// With `μ = F₀ − K`, `s = σ√T` and `d = μ/s`:
///
/// ```text
/// qcall = N_T·[(μ² + s²)·Φ(d) + μ·s·φ(d)]
/// qput  = N_T·[(μ² + s²)·Φ(−d) − μ·s·φ(d)]
/// qswap = N_T·(μ² + s²)
/// ```
///
/// so `qswap = qcall + qput` holds exactly. The `d = (F₀−K)/(σ√T)` argument
/// reproduces `E[((F−K)⁺)²]` for `F ~ N(F₀, σ²T)` (deep in-the-money calls
/// tend to the full second moment, deep out-of-the-money calls to zero);
/// it is pinned against the quadrature oracle in the test suite.
pub fn bachelier_quadratic(inputs: &BachelierInputs, kind: QuadKind) -> f64 {
    let mu = inputs.forward - inputs.strike;
    let s = inputs.sigma * inputs.expiry.sqrt();
    if s == 0.0 {
        let intrinsic = match kind {
            QuadKind::Call => mu.max(0.0) * mu.max(0.0),
            QuadKind::Put => (-mu).max(0.0) * (-mu).max(0.0),
            QuadKind::Swap => mu * mu,
        };
        return inputs.numeraire * intrinsic;
    }
    let second_moment = mu * mu + s * s;
    let d = mu / s;
    let value = match kind {
        QuadKind::Call => second_moment * norm_cdf(d) + mu * s * norm_pdf(d),
        QuadKind::Put => second_moment * norm_cdf(-d) - mu * s * norm_pdf(d),
        QuadKind::Swap => second_moment,
    };
    inputs.numeraire * value
}

/// Exact undiscounted quadratic swap under normal SABR:
///
/// ```text
/// E[(F_T − K)²] = (F₀ − K)² + α²·(e^{ν²T} − 1)/ν²
/// ```
///
/// The variance term is the Itô isometry of `∫σ_t dW_t` with lognormal σ and
/// does not depend on ρ; `ν = 0` reduces to the constant-vol value `α²T`.
pub fn exact_quadratic_swap_normal_sabr(
    forward: f64,
    strike: f64,
    alpha: f64,
    nu: f64,
    expiry: f64,
) -> Result<f64> {
    crate::error::require_finite(forward, "forward")?;
    crate::error::require_finite(strike, "strike")?;
    require_non_negative(alpha, "alpha")?;
    require_non_negative(nu, "nu")?;
    require_positive(expiry, "expiry")?;

    let x = nu * nu * expiry;
    let variance = if x == 0.0 {
        alpha * alpha * expiry
    } else {
        alpha * alpha * x.exp_m1() / (nu * nu)
    };
    let mu = forward - strike;
    let value = mu * mu + variance;
    if !value.is_finite() {
        return Err(PricingError::Numerical {
            message: format!("second moment overflowed for nu={nu}, expiry={expiry}"),
        });
    }
    Ok(value)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};
    use rand_xoshiro::Xoshiro256PlusPlus;

    fn inputs(f0: f64, k: f64, sigma: f64, t: f64, n: f64) -> BachelierInputs {
        BachelierInputs::new(f0, k, sigma, t, n).unwrap()
    }

    #[test]
    fn rejects_bad_inputs() {
        assert!(BachelierInputs::new(0.02, 0.02, 0.0083, 0.0, 1.0).is_err());
        assert!(BachelierInputs::new(0.02, 0.02, 0.0083, -1.0, 1.0).is_err());
        assert!(BachelierInputs::new(0.02, 0.02, 0.0083, 1.0, 0.0).is_err());
        assert!(BachelierInputs::new(0.02, 0.02, -0.01, 1.0, 1.0).is_err());
        assert!(BachelierInputs::new(f64::NAN, 0.02, 0.01, 1.0, 1.0).is_err());
    }

    #[test]
    fn atm_call_is_sigma_sqrt_t_phi0() {
        let i = inputs(0.02, 0.02, 0.0083, 5.0, 1.0);
        let expected = 0.0083 * 5.0_f64.sqrt() * 0.398_942_280_4;
        assert!((bachelier_vanilla(&i, OptionKind::Call) - expected).abs() < 1e-7);
    }

    #[test]
    fn zero_vol_call_is_discounted_intrinsic() {
        let i = inputs(0.02, 0.01, 0.0, 5.0, 0.9);
        assert_eq!(bachelier_vanilla(&i, OptionKind::Call), 0.9 * 0.01);
        assert_eq!(bachelier_vanilla(&i, OptionKind::Put), 0.0);
    }

    #[test]
    fn vanilla_put_call_parity() {
        let i = inputs(0.021, 0.017, 0.009, 7.0, 0.85);
        let call = bachelier_vanilla(&i, OptionKind::Call);
        let put = bachelier_vanilla(&i, OptionKind::Put);
        let forward_leg = 0.85 * (0.021 - 0.017);
        assert!((call - put - forward_leg).abs() < 1e-16);
    }

    #[test]
    fn atm_quadratic_call_is_half_second_moment() {
        let i = inputs(0.02, 0.02, 0.0083, 5.0, 1.0);
        let s2 = 0.0083 * 0.0083 * 5.0;
        assert!((bachelier_quadratic(&i, QuadKind::Call) - 0.5 * s2).abs() < 1e-18);
    }

    #[test]
    fn quadratic_swap_is_mu2_plus_s2() {
        let i = inputs(0.02, 0.01, 0.0083, 5.0, 1.0);
        let expected = 0.01 * 0.01 + 0.0083 * 0.0083 * 5.0;
        assert!((bachelier_quadratic(&i, QuadKind::Swap) - expected).abs() < 1e-18);
    }

    #[test]
    fn quadratic_parity_random_inputs() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(7);
        for _ in 0..1000 {
            let f0 = rng.gen_range(-0.01..0.06);
            let k = rng.gen_range(-0.01..0.06);
            let sigma = rng.gen_range(1e-4..0.03);
            let t = rng.gen_range(0.1..30.0);
            let n = rng.gen_range(0.3..1.2);
            let i = inputs(f0, k, sigma, t, n);
            let qc = bachelier_quadratic(&i, QuadKind::Call);
            let qp = bachelier_quadratic(&i, QuadKind::Put);
            let qs = bachelier_quadratic(&i, QuadKind::Swap);
            assert!(
                (qs - (qc + qp)).abs() <= 1e-14 * qs.abs(),
                "parity failed: f0={f0} k={k} sigma={sigma} t={t}"
            );
        }
    }

    #[test]
    fn quadratic_call_limits() {
        // d → +∞: full second moment; d → −∞: zero. Checked at |d| = 12.
        let s = 0.0083 * 5.0_f64.sqrt();
        let deep_itm = inputs(0.02, 0.02 - 12.0 * s, 0.0083, 5.0, 1.0);
        let deep_otm = inputs(0.02, 0.02 + 12.0 * s, 0.0083, 5.0, 1.0);
        let mu = 12.0 * s;
        let m2 = mu * mu + s * s;
        let itm = bachelier_quadratic(&deep_itm, QuadKind::Call);
        assert!((itm - m2).abs() < 1e-12 * m2);
        let otm = bachelier_quadratic(&deep_otm, QuadKind::Call);
        assert!(otm < 1e-12 * m2);
        assert!(otm >= 0.0);
    }

    #[test]
    fn exact_swap_zero_nu_is_constant_vol() {
        let v = exact_quadratic_swap_normal_sabr(0.02, 0.01, 0.0083, 0.0, 5.0).unwrap();
        assert!((v - (1e-4 + 0.0083 * 0.0083 * 5.0)).abs() < 1e-18);
    }

    #[test]
    fn exact_swap_atm_formula() {
        let v = exact_quadratic_swap_normal_sabr(0.02, 0.02, 0.0083, 0.335, 5.0).unwrap();
        let expected = 0.0083 * 0.0083 * ((0.335f64 * 0.335 * 5.0).exp() - 1.0) / (0.335 * 0.335);
        assert!((v - expected).abs() < 1e-18);
    }

    #[test]
    fn exact_swap_continuous_in_nu_at_zero() {
        let at_zero = exact_quadratic_swap_normal_sabr(0.02, 0.015, 0.0083, 0.0, 5.0).unwrap();
        let near_zero = exact_quadratic_swap_normal_sabr(0.02, 0.015, 0.0083, 1e-8, 5.0).unwrap();
        assert!((at_zero - near_zero).abs() <= 1e-6 * at_zero);
    }

    #[test]
    fn exact_swap_dominates_intrinsic() {
        let mut rng = Xoshiro256PlusPlus::seed_from_u64(11);
        for _ in 0..200 {
            let f0 = rng.gen_range(-0.02..0.06);
            let k = rng.gen_range(-0.02..0.06);
            let alpha = rng.gen_range(0.0..0.02);
            let nu = rng.gen_range(0.0..0.6);
            let t = rng.gen_range(0.1..20.0);
            let v = exact_quadratic_swap_normal_sabr(f0, k, alpha, nu, t).unwrap();
            assert!(v >= (f0 - k) * (f0 - k));
        }
    }

    #[test]
    fn exact_swap_rejects_bad_inputs() {
        assert!(exact_quadratic_swap_normal_sabr(0.02, 0.02, -0.01, 0.3, 5.0).is_err());
        assert!(exact_quadratic_swap_normal_sabr(0.02, 0.02, 0.01, 0.3, 0.0).is_err());
        assert!(exact_quadratic_swap_normal_sabr(0.02, 0.02, 0.01, -0.3, 5.0).is_err());
    }
}
