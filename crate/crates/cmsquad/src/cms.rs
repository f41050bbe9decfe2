//! CMS convexity adjustments through the linear mapping model.
//!
//! The adjustment for a CMS caplet/floorlet/swaplet is assembled from vanilla
//! and quadratic prices of the swap rate under its annuity measure:
//!
//! ```text
//! CA_cap   = (M(S₀) − 1)·V^C  + (∂_S M(S₀) − 1)·V^QC
//! CA_floor = (M(S₀) − 1)·V^P  − (∂_S M(S₀) − 1)·V^QP
//! CA_swap  = (M(S₀) − 1)·(S₀ − K) + (∂_S M(S₀) − 1)·V^QS
//! ```
//!
//! The module never chooses a model: prices come in from whichever backend
//! the caller prefers (closed form, expansion, or Monte Carlo), supplied as
//! undiscounted annuity-measure expectations so the three formulas stay
//! mutually consistent (cap − floor = swap whenever the prices satisfy
//! vanilla and quadratic parity).

use serde::{Deserialize, Serialize};

use crate::error::{require_finite, require_positive, PricingError, Result};

/// Market inputs for one CMS fixing.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct CmsSetup {
    /// Spot swap rate S_{a,b}(0).
    pub s0: f64,
    /// Annuity factor 01(0, T_a, T_b).
    pub annuity0: f64,
    /// Discount factor to the payment date, P^d(0, T_p).
    pub dfp: f64,
    /// Fixing time T_a in years.
    pub t_fix: f64,
}

impl CmsSetup {
    pub fn new(s0: f64, annuity0: f64, dfp: f64, t_fix: f64) -> Result<Self> {
        require_finite(s0, "s0")?;
        require_positive(annuity0, "annuity0")?;
        require_positive(dfp, "dfp")?;
        require_positive(t_fix, "t_fix")?;
        Ok(Self {
            s0,
            annuity0,
            dfp,
            t_fix,
        })
    }
}

/// Linear mapping model `M(S) = M(S₀) + ∂_S M(S₀)·(S − S₀)`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LinearMapping {
    /// Level M(S₀).
    pub m0: f64,
    /// Frozen slope ∂_S M(S₀).
    pub dm: f64,
}

impl LinearMapping {
    pub fn new(m0: f64, dm: f64) -> Result<Self> {
        require_positive(m0, "m0")?;
        require_finite(dm, "dm")?;
        Ok(Self { m0, dm })
    }

    /// Identity mapping: kills every adjustment exactly.
    pub fn identity() -> Self {
        Self { m0: 1.0, dm: 1.0 }
    }

    /// Evaluate the mapping at a swap-rate level.
    pub fn value(&self, s: f64, s0: f64) -> f64 {
        self.m0 + self.dm * (s - s0)
    }

    /// Intercept β = M(S₀) − ∂_S M(S₀)·S₀ of the affine form α·S + β.
    pub fn intercept(&self, s0: f64) -> f64 {
        self.m0 - self.dm * s0
    }
}

/// One-factor annuity model: annuity and pay-date discount as functions of
/// the swap rate.
pub trait AnnuityModel {
    fn annuity(&self, s: f64) -> f64;
    fn discount_to_pay(&self, s: f64) -> f64;

    /// The mapping functional `M(S) = P(S, T_p) / 01(S)`.
    fn mapping(&self, s: f64) -> f64 {
        self.discount_to_pay(s) / self.annuity(s)
    }
}

/// Textbook flat-yield annuity: `n` fixed periods of accrual `delta`, the
/// curve flat at the swap rate, payment `pay_offset` periods after fixing.
///
/// ```text
/// 01(S)      = Σ_{i=1..n} Δ·(1 + ΔS)^{−i}
/// P(S, T_p)  = (1 + ΔS)^{−pay_offset}
/// ```
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct FlatYieldAnnuity {
    pub periods: usize,
    pub delta: f64,
    /// Payment offset measured in periods; fractional values allowed.
    pub pay_offset: f64,
}

impl FlatYieldAnnuity {
    pub fn new(periods: usize, delta: f64, pay_offset: f64) -> Result<Self> {
        if periods == 0 {
            return Err(PricingError::invalid("periods must be >= 1"));
        }
        require_positive(delta, "delta")?;
        require_finite(pay_offset, "pay_offset")?;
        Ok(Self {
            periods,
            delta,
            pay_offset,
        })
    }

    /// Annuity-weighted duration center (in periods): the pay offset at
    /// which the mapping slope vanishes.
    pub fn duration_center(&self, s: f64) -> f64 {
        let x = 1.0 + self.delta * s;
        let mut num = 0.0;
        let mut den = 0.0;
        for i in 1..=self.periods {
            let w = x.powi(-(i as i32));
            num += i as f64 * w;
            den += w;
        }
        num / den
    }

    /// Closed-form mapping slope ∂_S M(S).
    pub fn mapping_derivative(&self, s: f64) -> f64 {
        let x = 1.0 + self.delta * s;
        let mut a = 0.0;
        let mut da = 0.0;
        for i in 1..=self.periods {
            let w = self.delta * x.powi(-(i as i32));
            a += w;
            da += -(i as f64) * self.delta * w / x;
        }
        let p = x.powf(-self.pay_offset);
        let dp = -self.pay_offset * self.delta * p / x;
        (dp * a - p * da) / (a * a)
    }
}

impl AnnuityModel for FlatYieldAnnuity {
    fn annuity(&self, s: f64) -> f64 {
        let x = 1.0 + self.delta * s;
        (1..=self.periods)
            .map(|i| self.delta * x.powi(-(i as i32)))
            .sum()
    }

    fn discount_to_pay(&self, s: f64) -> f64 {
        (1.0 + self.delta * s).powf(-self.pay_offset)
    }
}

/// Build the linear mapping from market levels plus a one-factor annuity
/// model: the level comes from the supplied discount/annuity pair, the slope
/// from a Richardson central difference of the model mapping at S₀.
///
/// Rejects functionals whose difference quotients do not settle (a proxy for
/// non-differentiability at S₀).
pub fn mapping_from_annuity_model(setup: &CmsSetup, model: &dyn AnnuityModel) -> Result<LinearMapping> {
    let m0 = setup.dfp / setup.annuity0;
    let s0 = setup.s0;
    let h = 1e-4 * (1.0 + s0.abs());

    let slope = |h: f64| -> f64 {
        let f = |s: f64| model.mapping(s);
        (8.0 * (f(s0 + h) - f(s0 - h)) - (f(s0 + 2.0 * h) - f(s0 - 2.0 * h))) / (12.0 * h)
    };
    let d1 = slope(h);
    let d2 = slope(0.5 * h);
    if !d1.is_finite() || !d2.is_finite() {
        return Err(PricingError::Numerical {
            message: format!("mapping derivative not finite at s0={s0}"),
        });
    }
    if (d1 - d2).abs() > 1e-6 * (1.0 + d2.abs()) {
        return Err(PricingError::invalid(format!(
            "annuity functional does not look differentiable at s0={s0}: \
             difference quotients {d1} vs {d2}"
        )));
    }
    LinearMapping::new(m0, d2)
}

/// Caplet convexity adjustment from vanilla and quadratic call prices.
pub fn ca_caplet(
    _setup: &CmsSetup,
    map: &LinearMapping,
    _strike: f64,
    vanilla_price: f64,
    quadratic_price: f64,
) -> f64 {
    (map.m0 - 1.0) * vanilla_price + (map.dm - 1.0) * quadratic_price
}

/// Floorlet convexity adjustment from vanilla and quadratic put prices.
///
/// The quadratic term enters with a minus sign: the put-side payoff
/// identity `(K−S)⁺(S−S₀)|_{K=S₀} = −((K−S)⁺)²` flips it, and this is what
/// makes `ca_caplet − ca_floorlet = ca_swaplet` an algebraic identity under
/// payoff parity.
pub fn ca_floorlet(
    _setup: &CmsSetup,
    map: &LinearMapping,
    _strike: f64,
    vanilla_put_price: f64,
    quadratic_put_price: f64,
) -> f64 {
    (map.m0 - 1.0) * vanilla_put_price - (map.dm - 1.0) * quadratic_put_price
}

/// Swaplet convexity adjustment from the quadratic swap price.
pub fn ca_swaplet(
    setup: &CmsSetup,
    map: &LinearMapping,
    strike: f64,
    quadratic_swap_price: f64,
) -> f64 {
    (map.m0 - 1.0) * (setup.s0 - strike) + (map.dm - 1.0) * quadratic_swap_price
}

/// Forward CMS rate under the payment measure, from the at-the-money
/// quadratic call:
///
/// ```text
/// E^{T_p}[S] ≈ S₀ + 01(0)·(∂_S M − 1)·S₀² + (∂_S M − 1)·V^QC(T_a, S₀, S₀)
/// ```
///
/// `quadratic_atm_price` is the annuity-discounted V^QC at K = S₀; the
/// identity mapping returns S₀ unchanged.
pub fn cms_rate_expectation(setup: &CmsSetup, map: &LinearMapping, quadratic_atm_price: f64) -> f64 {
    setup.s0
        + setup.annuity0 * (map.dm - 1.0) * setup.s0 * setup.s0
        + (map.dm - 1.0) * quadratic_atm_price
}
