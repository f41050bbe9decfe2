//! Industry comparators: Hagan's normal SABR implied volatility, Balland's
//! equivalent local volatility, and strike-grid replication of quadratic
//! payoffs.

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, PricingError, Result};
use crate::watanabe::{LocalVolPoint, SabrParams};

/// Uniform strike grid for replication, integrated with the trapezoid rule.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct StrikeGrid {
    lo: f64,
    hi: f64,
    n: usize,
}

impl StrikeGrid {
    pub fn new(lo: f64, hi: f64, n: usize) -> Result<Self> {
        require_finite(lo, "grid.lo")?;
        require_finite(hi, "grid.hi")?;
        if lo >= hi {
            return Err(PricingError::invalid(format!(
                "grid requires lo < hi, got lo={lo}, hi={hi}"
            )));
        }
        if n < 2 {
            return Err(PricingError::invalid(format!(
                "grid requires n >= 2, got {n}"
            )));
        }
        Ok(Self { lo, hi, n })
    }

    pub fn lo(&self) -> f64 {
        self.lo
    }
    pub fn hi(&self) -> f64 {
        self.hi
    }
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn step(&self) -> f64 {
        (self.hi - self.lo) / (self.n - 1) as f64
    }
}

/// Default replication truncation: `hi = K + 12·σ_ATM·√T`.
///
/// Quadratic payoffs are tail-sensitive, so the default upper strike is
/// deliberately generous; the truncation estimate is always reported so the
/// caller can see what the cut-off leaves behind.
pub fn default_replication_hi(strike: f64, sigma_atm: f64, expiry: f64) -> f64 {
    strike + 12.0 * sigma_atm * expiry.sqrt()
}

/// Hagan's normal (β = 0) SABR implied volatility:
///
/// ```text
/// σ_N = α · ζ/x̂(ζ) · (1 + (2 − 3ρ²)/24 · ν²T)
/// ζ    = ν(F₀ − K)/α
/// x̂(ζ) = ln( (√(1 − 2ρζ + ζ²) + ζ − ρ) / (1 − ρ) )
/// ```
///
/// with the small-ζ limit `ζ/x̂ → 1 − ρζ/2 + (2 − 3ρ²)/12·ζ²` applied below
/// |ζ| = 1e-6 so the formula is smooth through the money.
///
/// # References
/// Hagan, P. et al., "Managing Smile Risk", Wilmott Magazine, 2002.
pub fn hagan_normal_vol(params: &SabrParams, forward: f64, strike: f64, expiry: f64) -> Result<f64> {
    require_finite(forward, "forward")?;
    require_finite(strike, "strike")?;
    require_positive(expiry, "expiry")?;
    require_positive(params.alpha(), "alpha")?;
    let rho = params.rho();
    if rho.abs() >= 1.0 {
        return Err(PricingError::invalid(format!(
            "rho must be in (-1, 1), got {rho}"
        )));
    }

    let nu = params.nu();
    let alpha = params.alpha();
    let zeta = nu * (forward - strike) / alpha;
    let z_ratio = if zeta.abs() < 1e-6 {
        1.0 - 0.5 * rho * zeta + (2.0 - 3.0 * rho * rho) / 12.0 * zeta * zeta
    } else {
        // x̂ = ln1p((√(1−2ρζ+ζ²) − 1 + ζ)/(1−ρ)), with the square root
        // differenced through its conjugate so small ζ stays cancellation-free
        let u = zeta * (zeta - 2.0 * rho);
        let sqrt_m1 = u / ((1.0 + u).sqrt() + 1.0);
        let x_hat = ((sqrt_m1 + zeta) / (1.0 - rho)).ln_1p();
        zeta / x_hat
    };
    let correction = 1.0 + (2.0 - 3.0 * rho * rho) / 24.0 * nu * nu * expiry;
    let vol = alpha * z_ratio * correction;
    if !vol.is_finite() || vol <= 0.0 {
        return Err(PricingError::Numerical {
            message: format!("Hagan normal vol invalid at strike={strike}: {vol}"),
        });
    }
    Ok(vol)
}

/// Balland's equivalent local volatility for normal SABR:
///
/// ```text
/// σ(K) = α·√(1 + 2ρν·z + ν²·z²),   z = (K − F₀)/α
/// ```
///
/// Strictly positive for |ρ| < 1 (minimum α·√(1−ρ²)); equals α at K = F₀.
pub fn balland_equivalent_local_vol(params: &SabrParams, forward: f64, strike: f64) -> Result<f64> {
    require_positive(params.alpha(), "alpha")?;
    require_finite(forward, "forward")?;
    require_finite(strike, "strike")?;
    let z = (strike - forward) / params.alpha();
    let nu = params.nu();
    let rho = params.rho();
    Ok(params.alpha() * (1.0 + 2.0 * rho * nu * z + nu * nu * z * z).sqrt())
}

/// The equivalent local volatility and its first two strike derivatives at
/// the forward: `σ(F₀) = α`, `∂_Fσ(F₀) = ρν`, `∂²_Fσ(F₀) = ν²(1 − ρ²)/α`.
pub fn balland_vol_point(params: &SabrParams) -> Result<LocalVolPoint> {
    require_positive(params.alpha(), "alpha")?;
    let rho_hat_sq = 1.0 - params.rho() * params.rho();
    LocalVolPoint::new(
        params.alpha(),
        params.rho() * params.nu(),
        params.nu() * params.nu() * rho_hat_sq / params.alpha(),
    )
}

/// Result of a strike-grid replication: the integrated value and an estimate
/// of what the truncation at the top strike leaves out.
#[derive(Debug, Clone, Copy)]
pub struct ReplicationResult {
    pub value: f64,
    pub truncation_estimate: f64,
}

/// Replicate the quadratic call `((F_T − K)⁺)² = 2·∫_K^∞ (F_T − K′)⁺ dK′`
/// as a trapezoid sum of vanilla calls over the grid.
///
/// `grid.lo` must equal the quadratic strike `K`. The reported truncation
/// estimate is `2·C(hi)·(hi − lo)`, a crude but conservative gauge that the
/// grid reached far enough into the tail.
pub fn replicate_quadratic_call<F>(
    vanilla_pricer: F,
    strike: f64,
    grid: &StrikeGrid,
) -> Result<ReplicationResult>
where
    F: Fn(f64) -> f64,
{
    if (grid.lo - strike).abs() > 1e-12 * (1.0 + strike.abs()) {
        return Err(PricingError::invalid(format!(
            "grid.lo ({}) must equal the replication strike ({strike})",
            grid.lo
        )));
    }
    let h = grid.step();
    let mut sum = 0.0;
    let mut last = 0.0;
    for i in 0..grid.n {
        let k = grid.lo + h * i as f64;
        let price = vanilla_pricer(k);
        if !price.is_finite() {
            return Err(PricingError::Numerical {
                message: format!("vanilla pricer returned {price} at strike {k}"),
            });
        }
        let weight = if i == 0 || i == grid.n - 1 { 0.5 } else { 1.0 };
        sum += weight * price;
        last = price;
    }
    Ok(ReplicationResult {
        value: 2.0 * h * sum,
        truncation_estimate: 2.0 * last * (grid.hi - grid.lo),
    })
}
