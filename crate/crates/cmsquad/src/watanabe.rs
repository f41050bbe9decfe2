//! Small-volatility expansion pricers.
//!
//! Prices are built from an expansion of the forward around its Gaussian
//! leading term: writing `F_T ≈ F₀ + σ₀√T·(ĝ₁ + ĝ₂ + ĝ₃ + …)` with
//! `ĝ₁ ~ N(0,1)` and `ĝ₂, ĝ₃` iterated Itô integrals, payoffs expand into
//! conditional moments of the ĝ's given ĝ₁, all of which reduce to
//! polynomial-times-Gaussian kernels in the standardized moneyness
//! `y = (K − F₀)/(σ₀√T)`.
//!
//! Three model families share the machinery:
//!
//! * normal SABR:            `dF = σ_t dW`,        `dσ = ν σ dB`
//! * local volatility:       `dF = σ(F) dW`
//! * stochastic local vol:   `dF = C(F) σ_t dW`,   `dσ = ν σ dB`
//!
//! with `<dW,dB> = ρ dt`. The vanilla call is expanded to second order, the
//! quadratic payoffs to third order. Each result carries its per-order
//! breakdown so the size of the corrections stays observable.

use serde::{Deserialize, Serialize};

use crate::analytic::QuadKind;
use crate::error::{require_finite, require_non_negative, require_positive, PricingError, Result};
use crate::mathcore::{g_call, g_quad_call, g_quad_put, norm_cdf, norm_cdf_bar, norm_pdf, Moneyness};

/// Expiries below this floor are treated as degenerate and priced at
/// intrinsic value.
pub const MIN_EXPIRY: f64 = 1e-10;

/// Normal SABR parameter triple (α, ν, ρ).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SabrParams {
    alpha: f64,
    nu: f64,
    rho: f64,
}

impl SabrParams {
    /// Validated constructor: `α ≥ 0`, `ν ≥ 0`, `|ρ| < 1`.
    pub fn new(alpha: f64, nu: f64, rho: f64) -> Result<Self> {
        require_non_negative(alpha, "alpha")?;
        require_non_negative(nu, "nu")?;
        require_finite(rho, "rho")?;
        if rho.abs() >= 1.0 {
            return Err(PricingError::invalid(format!(
                "rho must be in (-1, 1), got {rho}"
            )));
        }
        Ok(Self { alpha, nu, rho })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }

    /// ρ̂ = √(1 − ρ²) ∈ (0, 1].
    pub fn rho_hat(&self) -> f64 {
        (1.0 - self.rho * self.rho).sqrt()
    }
}

/// Local volatility evaluated at the expansion point: σ(F₀) and its first
/// two strike derivatives.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct LocalVolPoint {
    sigma0: f64,
    dsigma: f64,
    d2sigma: f64,
}

impl LocalVolPoint {
    pub fn new(sigma0: f64, dsigma: f64, d2sigma: f64) -> Result<Self> {
        require_positive(sigma0, "sigma0")?;
        require_finite(dsigma, "dsigma")?;
        require_finite(d2sigma, "d2sigma")?;
        Ok(Self {
            sigma0,
            dsigma,
            d2sigma,
        })
    }

    pub fn sigma0(&self) -> f64 {
        self.sigma0
    }
    pub fn dsigma(&self) -> f64 {
        self.dsigma
    }
    pub fn d2sigma(&self) -> f64 {
        self.d2sigma
    }
}

/// Stochastic-local-volatility expansion point: C(F₀) with derivatives,
/// plus the vol-process parameters (α, ν, ρ).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SlvPoint {
    c0: f64,
    dc: f64,
    d2c: f64,
    alpha: f64,
    nu: f64,
    rho: f64,
}

impl SlvPoint {
    pub fn new(c0: f64, dc: f64, d2c: f64, alpha: f64, nu: f64, rho: f64) -> Result<Self> {
        require_positive(c0, "c0")?;
        require_finite(dc, "dc")?;
        require_finite(d2c, "d2c")?;
        require_non_negative(alpha, "alpha")?;
        require_non_negative(nu, "nu")?;
        require_finite(rho, "rho")?;
        if rho.abs() >= 1.0 {
            return Err(PricingError::invalid(format!(
                "rho must be in (-1, 1), got {rho}"
            )));
        }
        Ok(Self {
            c0,
            dc,
            d2c,
            alpha,
            nu,
            rho,
        })
    }

    /// Backbone `C ≡ 1`: recovers the plain normal SABR model.
    pub fn normal_sabr(params: &SabrParams) -> Self {
        Self {
            c0: 1.0,
            dc: 0.0,
            d2c: 0.0,
            alpha: params.alpha,
            nu: params.nu,
            rho: params.rho,
        }
    }

    pub fn c0(&self) -> f64 {
        self.c0
    }
    pub fn dc(&self) -> f64 {
        self.dc
    }
    pub fn d2c(&self) -> f64 {
        self.d2c
    }
    pub fn alpha(&self) -> f64 {
        self.alpha
    }
    pub fn nu(&self) -> f64 {
        self.nu
    }
    pub fn rho(&self) -> f64 {
        self.rho
    }
    pub fn rho_hat_sq(&self) -> f64 {
        1.0 - self.rho * self.rho
    }
}

/// Expansion price with its per-order breakdown.
///
/// `value` is exactly `order0 + order1 + order2`; the orders are the ε⁰, ε¹
/// and ε² contributions of the expansion evaluated at ε = 1, all in price
/// units (numeraire included).
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PriceResult {
    pub value: f64,
    pub order0: f64,
    pub order1: f64,
    pub order2: f64,
    pub y: Moneyness,
}

impl PriceResult {
    fn assemble(order0: f64, order1: f64, order2: f64, y: f64) -> Result<Self> {
        let value = order0 + order1 + order2;
        if !value.is_finite() {
            return Err(PricingError::Numerical {
                message: format!(
                    "expansion produced non-finite price: orders = ({order0}, {order1}, {order2})"
                ),
            });
        }
        Ok(PriceResult {
            value,
            order0,
            order1,
            order2,
            y: Moneyness(y),
        })
    }

    fn intrinsic(value: f64, y: f64) -> Self {
        PriceResult {
            value,
            order0: value,
            order1: 0.0,
            order2: 0.0,
            y: Moneyness(y),
        }
    }
}

fn check_expiry(expiry: f64) -> Result<bool> {
    require_finite(expiry, "expiry")?;
    if expiry <= 0.0 {
        return Err(PricingError::invalid(format!(
            "expiry must be positive, got {expiry}"
        )));
    }
    Ok(expiry >= MIN_EXPIRY)
}

/// Second-order call price under normal SABR.
///
/// With `y = (K − F₀)/(α√T)` and `ρ̂² = 1 − ρ²`:
///
/// ```text
/// V/N_T = α√T·[ G(y)
///             + (ρν√T/2)·y·φ(y)
///             + ν²T·φ(y)·( (ρ²(2y²+1) + 3ρ̂² − 3)/12
///                        + (3ρ²(y²−1)² + 4ρ̂²y² + 2ρ̂²)/24 ) ]
/// ```
///
/// The first ε² summand is the indicator term `E[I(ĝ₁>y)ĝ₃]`, the second is
/// the delta term `½E[δ(ĝ₁−y)ĝ₂²]`; both evaluate the conditional moments of
/// the iterated integrals on `ĝ₁ = y`. At ν = 0 every correction vanishes and
/// the Bachelier call is recovered.
pub fn call_normal_sabr(
    params: &SabrParams,
    forward: f64,
    strike: f64,
    expiry: f64,
    numeraire: f64,
) -> Result<PriceResult> {
    require_finite(forward, "forward")?;
    require_finite(strike, "strike")?;
    require_positive(numeraire, "numeraire")?;
    let live = check_expiry(expiry)?;
    let scale = params.alpha * expiry.sqrt();
    if !live || scale == 0.0 {
        return Ok(PriceResult::intrinsic(
            numeraire * (forward - strike).max(0.0),
            0.0,
        ));
    }

    let y = (strike - forward) / scale;
    let rho = params.rho;
    let nu = params.nu;
    let rho_sq = rho * rho;
    let rho_hat_sq = 1.0 - rho_sq;
    let phi = norm_pdf(y);
    let sqrt_t = expiry.sqrt();
    let prefactor = numeraire * scale;

    let order0 = prefactor * g_call(y);
    let order1 = prefactor * 0.5 * rho * nu * sqrt_t * y * phi;
    let indicator_term = (rho_sq * (2.0 * y * y + 1.0) + 3.0 * rho_hat_sq - 3.0) / 12.0;
    let y2m1 = y * y - 1.0;
    let delta_term =
        (3.0 * rho_sq * y2m1 * y2m1 + 4.0 * rho_hat_sq * y * y + 2.0 * rho_hat_sq) / 24.0;
    let order2 = prefactor * nu * nu * expiry * phi * (indicator_term + delta_term);

    PriceResult::assemble(order0, order1, order2, y)
}

/// Second-order put price under normal SABR, by put-call parity
/// (`put = call + N_T·(K − F₀)`; the forward is driftless).
pub fn put_normal_sabr(
    params: &SabrParams,
    forward: f64,
    strike: f64,
    expiry: f64,
    numeraire: f64,
) -> Result<PriceResult> {
    let call = call_normal_sabr(params, forward, strike, expiry, numeraire)?;
    PriceResult::assemble(
        call.order0 + numeraire * (strike - forward),
        call.order1,
        call.order2,
        call.y.value(),
    )
}

// Shared ε-bracket assembly for the quadratic LV/SLV expansions.
//
// The generic third-order quadratic bracket has the shape
//   call:  G_q^c(y) + κ·φ√T + [ P/3·yφ + Q·(2yφ/3 + Φ̄)
//                             + κ²/4·((y³+y)φ + 2Φ̄) + R/6·(2yφ + 3Φ̄) ]·T
//   put:   G_q^p(y) − κ·φ√T − [ P/3·yφ + Q·(2yφ/3 − Φ)
//                             − κ²/4·(2Φ − (y³+y)φ) − R/6·(3Φ − 2yφ) ]·T
//   swap:  (1 + y²)   + [ κ²/2 + R/2 + Q ]·T
// where κ = E-slope of ĝ₂ on (ĝ₁²−1)/2·√T, (P, Q) collect the ĝ₃ conditional
// moments on the (ĝ₁³−3ĝ₁) and (2ĝ₁³−3ĝ₁) basis, and R is the conditional
// variance left in ĝ₂² beyond κ² (the ν²ρ̂² channel). Parity
// call + put = swap holds term by term.
struct QuadBracket {
    kappa: f64,
    p: f64,
    q: f64,
    r: f64,
}

impl QuadBracket {
    fn orders(&self, y: f64, expiry: f64, kind: QuadKind) -> (f64, f64, f64) {
        let sqrt_t = expiry.sqrt();
        let phi = norm_pdf(y);
        let kappa_sq = self.kappa * self.kappa;
        match kind {
            QuadKind::Call => {
                let cdf_bar = norm_cdf_bar(y);
                let b0 = g_quad_call(y);
                let b1 = self.kappa * phi * sqrt_t;
                let b2 = (self.p / 3.0 * y * phi
                    + self.q * (2.0 / 3.0 * y * phi + cdf_bar)
                    + kappa_sq / 4.0 * ((y * y * y + y) * phi + 2.0 * cdf_bar)
                    + self.r / 6.0 * (2.0 * y * phi + 3.0 * cdf_bar))
                    * expiry;
                (b0, b1, b2)
            }
            QuadKind::Put => {
                let cdf = norm_cdf(y);
                let b0 = g_quad_put(y);
                let b1 = -self.kappa * phi * sqrt_t;
                let b2 = (-self.p / 3.0 * y * phi
                    - self.q * (2.0 / 3.0 * y * phi - cdf)
                    + kappa_sq / 4.0 * (2.0 * cdf - (y * y * y + y) * phi)
                    + self.r / 6.0 * (3.0 * cdf - 2.0 * y * phi))
                    * expiry;
                (b0, b1, b2)
            }
            QuadKind::Swap => {
                let b0 = 1.0 + y * y;
                let b2 = (kappa_sq / 2.0 + self.r / 2.0 + self.q) * expiry;
                (b0, 0.0, b2)
            }
        }
    }
}

fn quadratic_intrinsic(forward: f64, strike: f64, numeraire: f64, kind: QuadKind) -> PriceResult {
    let mu = forward - strike;
    let v = match kind {
        QuadKind::Call => mu.max(0.0) * mu.max(0.0),
        QuadKind::Put => (-mu).max(0.0) * (-mu).max(0.0),
        QuadKind::Swap => mu * mu,
    };
    PriceResult::intrinsic(numeraire * v, 0.0)
}

/// Third-order quadratic price under local volatility `dF = σ(F) dW`.
///
/// With `y = (K − F₀)/(σ(F₀)√T)`, `σ′ = ∂_Fσ(F₀)`, `σ″ = ∂²_Fσ(F₀)`:
///
/// ```text
/// call/N_T = σ²(F₀)T·[ G_q^c(y) + σ′·φ√T
///                    + ( (σ″σ₀ + σ′²)/3·yφ + σ″σ₀/2·Φ̄
///                    +   σ′²/4·((y³+y)φ + 2Φ̄) )·T ]
/// swap/N_T = σ²(F₀)T·[ (1 + y²) + (σ″σ₀ + σ′²)/2·T ]
/// ```
///
/// the put mirrors the call, and the swap correction carries the factor T
/// so that call + put = swap exactly. Constant volatility (σ′ = σ″ = 0)
/// reduces to the Bachelier quadratic closed form.
pub fn quadratic_lv(
    point: &LocalVolPoint,
    forward: f64,
    strike: f64,
    expiry: f64,
    numeraire: f64,
    kind: QuadKind,
) -> Result<PriceResult> {
    require_finite(forward, "forward")?;
    require_finite(strike, "strike")?;
    require_positive(numeraire, "numeraire")?;
    let live = check_expiry(expiry)?;
    if !live {
        return Ok(quadratic_intrinsic(forward, strike, numeraire, kind));
    }

    let sigma0 = point.sigma0;
    let y = (strike - forward) / (sigma0 * expiry.sqrt());
    let curvature = point.d2sigma * sigma0;
    let slope_sq = point.dsigma * point.dsigma;
    let phi = norm_pdf(y);
    let y3py = (y * y + 1.0) * y;
    // Assembled in the local-vol grouping on purpose: the stochastic-local-vol
    // pricer reduces to this at (ν = 0, ρ = 0, α = 1) through a different
    // arrangement of the same terms, which keeps that identity a real
    // two-path check.
    let (b0, b1, b2) = match kind {
        QuadKind::Call => {
            let cdf_bar = norm_cdf_bar(y);
            (
                g_quad_call(y),
                point.dsigma * phi * expiry.sqrt(),
                ((curvature + slope_sq) / 3.0 * y * phi
                    + 0.5 * curvature * cdf_bar
                    + 0.25 * slope_sq * (y3py * phi + 2.0 * cdf_bar))
                    * expiry,
            )
        }
        QuadKind::Put => {
            let cdf = norm_cdf(y);
            (
                g_quad_put(y),
                -point.dsigma * phi * expiry.sqrt(),
                (-(curvature + slope_sq) / 3.0 * y * phi
                    + 0.5 * curvature * cdf
                    + 0.25 * slope_sq * (2.0 * cdf - y3py * phi))
                    * expiry,
            )
        }
        QuadKind::Swap => (
            1.0 + y * y,
            0.0,
            0.5 * (curvature + slope_sq) * expiry,
        ),
    };
    let prefactor = numeraire * sigma0 * sigma0 * expiry;
    PriceResult::assemble(prefactor * b0, prefactor * b1, prefactor * b2, y)
}

/// Third-order quadratic price under stochastic local volatility
/// `dF = C(F)σ_t dW`, `dσ = νσ dB`, `<dW,dB> = ρ dt`.
///
/// With `y = (K − F₀)/(αC(F₀)√T)`, `C′ = ∂_FC(F₀)`, `C″ = ∂²_FC(F₀)` and
/// `κ = νρ + αC′`:
///
/// ```text
/// call/N_T = α²C²(F₀)T·[ G_q^c(y) + κ·φ√T
///          + ( (ν²ρ² + ανρC′ + α²C′²)/3·yφ
///          +   (ανρC′ + α²C″C(F₀)/2)·(2yφ/3 + Φ̄)
///          +   κ²/4·((y³+y)φ + 2Φ̄)
///          +   ν²ρ̂²/6·(2yφ + 3Φ̄) )·T ]
/// swap/N_T = α²C²(F₀)T·[ (1 + y²) + ( ν²/2 + 2ανρC′
///          +   α²(C′² + C″C(F₀))/2 )·T ]
/// ```
///
/// Setting ν = 0, ρ = 0, α = 1 recovers the local-volatility expansion with
/// `C ↦ σ`; setting `C ≡ 1` recovers the normal SABR quadratic formula. Both
/// reductions are exact at the formula level.
pub fn quadratic_slv(
    point: &SlvPoint,
    forward: f64,
    strike: f64,
    expiry: f64,
    numeraire: f64,
    kind: QuadKind,
) -> Result<PriceResult> {
    require_finite(forward, "forward")?;
    require_finite(strike, "strike")?;
    require_positive(numeraire, "numeraire")?;
    let live = check_expiry(expiry)?;
    let scale = point.alpha * point.c0;
    if !live || scale == 0.0 {
        return Ok(quadratic_intrinsic(forward, strike, numeraire, kind));
    }

    let y = (strike - forward) / (scale * expiry.sqrt());
    let bracket = slv_bracket(point);
    let (b0, b1, b2) = bracket.orders(y, expiry, kind);
    let prefactor = numeraire * scale * scale * expiry;
    PriceResult::assemble(prefactor * b0, prefactor * b1, prefactor * b2, y)
}

fn slv_bracket(point: &SlvPoint) -> QuadBracket {
    let alpha_dc = point.alpha * point.dc;
    let nu_rho = point.nu * point.rho;
    QuadBracket {
        kappa: nu_rho + alpha_dc,
        p: nu_rho * nu_rho + nu_rho * alpha_dc + alpha_dc * alpha_dc,
        q: nu_rho * alpha_dc + 0.5 * point.alpha * point.alpha * point.d2c * point.c0,
        r: point.nu * point.nu * point.rho_hat_sq(),
    }
}

/// Third-order quadratic price under normal SABR.
///
/// Specialization of the stochastic-local-vol formula to `C ≡ 1`:
///
/// ```text
/// call/N_T = α²T·[ G_q^c(y) + ρν·φ√T
///          + ( (2yφ + 3ρ̂²Φ̄)/6·ν² + ρ²ν²/4·((y³+y)φ + 2Φ̄) )·T ]
/// ```
///
/// Identically equal to [`quadratic_slv`] with `C = 1`, and to
/// [`quadratic_lv`] fed with the equivalent-local-vol derivatives
/// `σ′ = ρν`, `σ″ = ν²ρ̂²/α` at the forward.
pub fn quadratic_normal_sabr(
    params: &SabrParams,
    forward: f64,
    strike: f64,
    expiry: f64,
    numeraire: f64,
    kind: QuadKind,
) -> Result<PriceResult> {
    require_finite(forward, "forward")?;
    require_finite(strike, "strike")?;
    require_positive(numeraire, "numeraire")?;
    let live = check_expiry(expiry)?;
    if !live || params.alpha == 0.0 {
        return Ok(quadratic_intrinsic(forward, strike, numeraire, kind));
    }

    let y = (strike - forward) / (params.alpha * expiry.sqrt());
    let nu_sq = params.nu * params.nu;
    let rho_sq = params.rho * params.rho;
    let bracket = QuadBracket {
        kappa: params.nu * params.rho,
        p: nu_sq * rho_sq,
        q: 0.0,
        r: nu_sq * (1.0 - rho_sq),
    };
    let (b0, b1, b2) = bracket.orders(y, expiry, kind);
    let prefactor = numeraire * params.alpha * params.alpha * expiry;
    PriceResult::assemble(prefactor * b0, prefactor * b1, prefactor * b2, y)
}

// ---------------------------------------------------------------------------
// Closed-form conditional moments of the iterated-integral terms.
// ---------------------------------------------------------------------------

/// Closed-form expectations of the ĝ functionals entering the expansions,
/// for the SLV coefficient set (normal SABR is `C₀ = 1, C′ = C″ = 0`).
///
/// These are the analytic counterparts of the Monte Carlo estimators in
/// [`crate::monte_carlo::estimate_g_functionals`]; the validation suites
/// check the two against each other.
#[derive(Debug, Clone, Copy)]
pub struct GFunctionalValues {
    /// `E[(ĝ₁−y)⁺ ĝ₂]`
    pub payoff_g2: f64,
    /// `E[I(ĝ₁>y) ĝ₂]`
    pub indicator_g2: f64,
    /// `E[(ĝ₁−y)⁺ ĝ₃]`
    pub payoff_g3: f64,
    /// `E[I(ĝ₁>y) ĝ₃]`
    pub indicator_g3: f64,
    /// `E[I(ĝ₁>y) ĝ₂²]`
    pub indicator_g2_sq: f64,
    /// `E[δ(ĝ₁−y) ĝ₂²]`
    pub delta_g2_sq: f64,
    /// `E[((ĝ₁−y)⁺)²]`
    pub quad_payoff_sq: f64,
}

/// Evaluate the closed forms at moneyness `y` and horizon `t`.
///
/// Built from the conditional moments
///
/// ```text
/// E[ĝ₂ | ĝ₁] = κ·(√T/2)(ĝ₁² − 1),                          κ = νρ + αC′
/// E[ĝ₃ | ĝ₁] = (T/6)·[P·(ĝ₁³ − 3ĝ₁) + Q·(2ĝ₁³ − 3ĝ₁)]
/// E[ĝ₂²| ĝ₁] = (T/4)·κ²(ĝ₁² − 1)² + (ν²ρ̂²T/6)(2ĝ₁² + 1)
/// ```
///
/// integrated against the Gaussian law of ĝ₁ over `{ĝ₁ > y}` or against the
/// payoff `(ĝ₁ − y)⁺`.
pub fn g_functional_closed_forms(point: &SlvPoint, t: f64, y: f64) -> GFunctionalValues {
    let bracket = slv_bracket(point);
    let (kappa, p, q) = (bracket.kappa, bracket.p, bracket.q);
    let r = bracket.r;
    let sqrt_t = t.sqrt();
    let phi = norm_pdf(y);
    let cdf_bar = norm_cdf_bar(y);
    let y2 = y * y;

    GFunctionalValues {
        payoff_g2: 0.5 * kappa * sqrt_t * phi,
        indicator_g2: 0.5 * kappa * sqrt_t * y * phi,
        payoff_g3: t / 6.0 * (p * y * phi + q * (2.0 * y * phi + 3.0 * cdf_bar)),
        indicator_g3: t / 6.0 * phi * (p * (y2 - 1.0) + q * (2.0 * y2 + 1.0)),
        indicator_g2_sq: t / 4.0 * kappa * kappa * (2.0 * cdf_bar + (y2 + 1.0) * y * phi)
            + r * t / 6.0 * (3.0 * cdf_bar + 2.0 * y * phi),
        delta_g2_sq: phi
            * (t / 4.0 * kappa * kappa * (y2 - 1.0) * (y2 - 1.0) + r * t / 6.0 * (2.0 * y2 + 1.0)),
        quad_payoff_sq: g_quad_call(y),
    }
}
