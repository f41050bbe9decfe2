//! Pricing library for quadratic payoffs and CMS convexity adjustments.
//!
//! Closed-form small-volatility expansions for vanilla and quadratic payoffs
//! under normal SABR, local volatility and stochastic local volatility, wired
//! into the linear-mapping CMS convexity formulas, with Monte Carlo and
//! strike-replication oracles for every closed form.
//!
//! Module map:
//!
//! * [`mathcore`] — normal pdf/cdf and the Gaussian payoff kernels
//! * [`analytic`] — Bachelier closed forms and the exact SABR second moment
//! * [`watanabe`] — the expansion pricers with per-order breakdowns
//! * [`reference`] — Hagan normal vol, Balland equivalent local vol, strike
//!   replication
//! * [`monte_carlo`] — correlated two-factor simulation and the
//!   iterated-integral functional estimators
//! * [`cms`] — convexity-adjustment assembly on top of any pricing backend
//! * [`validation`] — the named self-check suites driven by the CLI and the
//!   acceptance tests
//!
//! ```
//! use cmsquad::{call_normal_sabr, quadratic_normal_sabr, QuadKind, SabrParams};
//!
//! let params = SabrParams::new(0.0083, 0.335, 0.23)?;
//! let (f0, t) = (0.02, 5.0);
//!
//! let call = call_normal_sabr(&params, f0, f0, t, 1.0)?;
//! assert_eq!(call.value, call.order0 + call.order1 + call.order2);
//!
//! // quadratic parity holds exactly at the formula level
//! let qc = quadratic_normal_sabr(&params, f0, 0.021, t, 1.0, QuadKind::Call)?;
//! let qp = quadratic_normal_sabr(&params, f0, 0.021, t, 1.0, QuadKind::Put)?;
//! let qs = quadratic_normal_sabr(&params, f0, 0.021, t, 1.0, QuadKind::Swap)?;
//! assert!((qc.value + qp.value - qs.value).abs() < 1e-13 * qs.value);
//! # Ok::<(), cmsquad::PricingError>(())
//! ```

pub mod analytic;
pub mod cms;
pub mod error;
pub mod mathcore;
pub mod monte_carlo;
pub mod reference;
pub mod validation;
pub mod watanabe;

pub use analytic::{
    bachelier_quadratic, bachelier_vanilla, exact_quadratic_swap_normal_sabr, BachelierInputs,
    OptionKind, QuadKind,
};
pub use error::{PricingError, Result};
pub use mathcore::Moneyness;
pub use monte_carlo::{
    estimate_g_functionals, price_payoff, simulate_terminal, McConfig, McEstimate, McScheme,
    ModelSpec, PayoffKind, TerminalSamples,
};
pub use reference::{
    balland_equivalent_local_vol, balland_vol_point, hagan_normal_vol, replicate_quadratic_call,
    StrikeGrid,
};
pub use watanabe::{
    call_normal_sabr, put_normal_sabr, quadratic_lv, quadratic_normal_sabr, quadratic_slv,
    LocalVolPoint, PriceResult, SabrParams, SlvPoint,
};
