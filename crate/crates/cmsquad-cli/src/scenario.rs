//! Scenario files: JSON descriptions of a model, a product and the
//! comparators to run against it. Validation reports field-path messages so
//! a broken file points at its own problem.

use serde::Deserialize;

use cmsquad::analytic::QuadKind;
use cmsquad::monte_carlo::{McConfig, McScheme, PayoffKind};
use cmsquad::watanabe::{SabrParams, SlvPoint};

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelBlock {
    NormalSabr {
        f0: f64,
        alpha: f64,
        nu: f64,
        rho: f64,
    },
    Bachelier {
        f0: f64,
        sigma: f64,
    },
    Slv {
        f0: f64,
        c0: f64,
        dc: f64,
        d2c: f64,
        alpha: f64,
        nu: f64,
        rho: f64,
    },
}

impl ModelBlock {
    pub fn f0(&self) -> f64 {
        match self {
            ModelBlock::NormalSabr { f0, .. }
            | ModelBlock::Bachelier { f0, .. }
            | ModelBlock::Slv { f0, .. } => *f0,
        }
    }

    /// At-the-money normal vol scale σ₀ used for strike offsets and
    /// replication truncation.
    pub fn vol_scale(&self) -> f64 {
        match self {
            ModelBlock::NormalSabr { alpha, .. } => *alpha,
            ModelBlock::Bachelier { sigma, .. } => *sigma,
            ModelBlock::Slv { alpha, c0, .. } => alpha * c0,
        }
    }

    pub fn sabr_params(&self) -> Option<SabrParams> {
        match self {
            ModelBlock::NormalSabr { alpha, nu, rho, .. } => {
                Some(SabrParams::new(*alpha, *nu, *rho).expect("validated"))
            }
            _ => None,
        }
    }

    pub fn slv_point(&self) -> Option<SlvPoint> {
        match self {
            ModelBlock::Slv {
                c0,
                dc,
                d2c,
                alpha,
                nu,
                rho,
                ..
            } => Some(SlvPoint::new(*c0, *dc, *d2c, *alpha, *nu, *rho).expect("validated")),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Payoff {
    Call,
    Put,
    QuadCall,
    QuadPut,
    QuadSwap,
}

impl Payoff {
    pub fn to_payoff_kind(self) -> PayoffKind {
        match self {
            Payoff::Call => PayoffKind::Call,
            Payoff::Put => PayoffKind::Put,
            Payoff::QuadCall => PayoffKind::QuadCall,
            Payoff::QuadPut => PayoffKind::QuadPut,
            Payoff::QuadSwap => PayoffKind::QuadSwap,
        }
    }

    pub fn quad_kind(self) -> Option<QuadKind> {
        match self {
            Payoff::QuadCall => Some(QuadKind::Call),
            Payoff::QuadPut => Some(QuadKind::Put),
            Payoff::QuadSwap => Some(QuadKind::Swap),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridBlock {
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProductBlock {
    pub payoff: Payoff,
    #[serde(default)]
    pub strike: Option<f64>,
    #[serde(default)]
    pub strikes: Option<GridBlock>,
    /// Strike offsets from the forward in units of σ₀√T.
    #[serde(default)]
    pub strike_offsets: Option<Vec<f64>>,
    pub expiry: f64,
    #[serde(default = "default_numeraire")]
    pub numeraire: f64,
}

fn default_numeraire() -> f64 {
    1.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Comparator {
    Watanabe,
    Hagan,
    Mc,
    Replication,
    Exact,
}

impl Comparator {
    pub fn column(&self) -> &'static str {
        match self {
            Comparator::Watanabe => "watanabe",
            Comparator::Hagan => "hagan",
            Comparator::Mc => "mc",
            Comparator::Replication => "replication",
            Comparator::Exact => "exact",
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct McBlock {
    #[serde(default = "default_paths")]
    pub n_paths: usize,
    #[serde(default = "default_steps_per_year")]
    pub steps_per_year: usize,
    #[serde(default = "default_true")]
    pub antithetic: bool,
    #[serde(default = "default_scheme")]
    pub scheme: McScheme,
}

fn default_paths() -> usize {
    2_000_000
}
fn default_steps_per_year() -> usize {
    64
}
fn default_true() -> bool {
    true
}
fn default_scheme() -> McScheme {
    McScheme::LogEulerVol
}

impl Default for McBlock {
    fn default() -> Self {
        McBlock {
            n_paths: default_paths(),
            steps_per_year: default_steps_per_year(),
            antithetic: default_true(),
            scheme: default_scheme(),
        }
    }
}

impl McBlock {
    pub fn config(&self, expiry: f64, seed: u64) -> McConfig {
        McConfig {
            n_paths: self.n_paths,
            n_steps: ((self.steps_per_year as f64 * expiry).ceil() as usize).max(1),
            seed,
            scheme: self.scheme,
            antithetic: self.antithetic,
        }
    }
}

/// A pricing scenario: model + product + comparators (+ MC config).
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub model: ModelBlock,
    pub product: ProductBlock,
    #[serde(default)]
    pub comparators: Vec<Comparator>,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub output: Option<String>,
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Self, String> {
        let scenario: Scenario =
            serde_json::from_str(text).map_err(|e| format!("scenario: {e}"))?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), String> {
        match &self.model {
            ModelBlock::NormalSabr { alpha, nu, rho, f0 } => {
                require_finite(*f0, "model.f0")?;
                require_range(*alpha, 0.0, "model.alpha")?;
                require_range(*nu, 0.0, "model.nu")?;
                if !rho.is_finite() || rho.abs() >= 1.0 {
                    return Err(format!("model.rho: must be in (-1, 1), got {rho}"));
                }
            }
            ModelBlock::Bachelier { sigma, f0 } => {
                require_finite(*f0, "model.f0")?;
                require_range(*sigma, 0.0, "model.sigma")?;
            }
            ModelBlock::Slv {
                f0,
                c0,
                dc,
                d2c,
                alpha,
                nu,
                rho,
            } => {
                require_finite(*f0, "model.f0")?;
                if !(c0.is_finite() && *c0 > 0.0) {
                    return Err(format!("model.c0: must be positive, got {c0}"));
                }
                require_finite(*dc, "model.dc")?;
                require_finite(*d2c, "model.d2c")?;
                require_range(*alpha, 0.0, "model.alpha")?;
                require_range(*nu, 0.0, "model.nu")?;
                if !rho.is_finite() || rho.abs() >= 1.0 {
                    return Err(format!("model.rho: must be in (-1, 1), got {rho}"));
                }
            }
        }

        if !(self.product.expiry.is_finite() && self.product.expiry > 0.0) {
            return Err(format!(
                "product.expiry: must be positive, got {}",
                self.product.expiry
            ));
        }
        if !(self.product.numeraire.is_finite() && self.product.numeraire > 0.0) {
            return Err(format!(
                "product.numeraire: must be positive, got {}",
                self.product.numeraire
            ));
        }

        let strike_specs = self.product.strike.is_some() as u8
            + self.product.strikes.is_some() as u8
            + self.product.strike_offsets.is_some() as u8;
        if strike_specs != 1 {
            return Err(
                "product: exactly one of strike, strikes, strike_offsets must be given"
                    .to_string(),
            );
        }
        if let Some(grid) = &self.product.strikes {
            if grid.n == 0 {
                return Err("product.strikes.n: must be >= 1".to_string());
            }
            if grid.n > 1 && grid.lo >= grid.hi {
                return Err(format!(
                    "product.strikes: lo < hi required for n > 1, got lo={}, hi={}",
                    grid.lo, grid.hi
                ));
            }
        }
        if let Some(offsets) = &self.product.strike_offsets {
            if offsets.is_empty() {
                return Err("product.strike_offsets: must be non-empty".to_string());
            }
            if offsets.windows(2).any(|w| w[0] >= w[1]) {
                return Err("product.strike_offsets: must be strictly increasing".to_string());
            }
        }

        if matches!(self.model, ModelBlock::Slv { .. })
            && matches!(self.product.payoff, Payoff::Call | Payoff::Put)
        {
            return Err(
                "product.payoff: the slv model prices quadratic payoffs only".to_string(),
            );
        }

        for (i, c) in self.comparators.iter().enumerate() {
            let ok = match c {
                Comparator::Watanabe => !matches!(self.model, ModelBlock::Bachelier { .. }),
                Comparator::Hagan => matches!(self.model, ModelBlock::NormalSabr { .. }),
                Comparator::Mc => !matches!(self.model, ModelBlock::Slv { .. }),
                Comparator::Replication => {
                    self.product.payoff == Payoff::QuadCall
                        && !matches!(self.model, ModelBlock::Slv { .. })
                }
                Comparator::Exact => {
                    self.product.payoff == Payoff::QuadSwap
                        && !matches!(self.model, ModelBlock::Slv { .. })
                }
            };
            if !ok {
                return Err(format!(
                    "comparators[{i}]: {} not valid for this model/payoff",
                    c.column()
                ));
            }
        }

        if self.mc.n_paths < 2 {
            return Err(format!("mc.n_paths: must be >= 2, got {}", self.mc.n_paths));
        }
        if self.mc.steps_per_year == 0 {
            return Err("mc.steps_per_year: must be >= 1".to_string());
        }
        Ok(())
    }

    /// The strike list this scenario prices.
    pub fn strike_list(&self) -> Vec<f64> {
        if let Some(k) = self.product.strike {
            return vec![k];
        }
        if let Some(grid) = &self.product.strikes {
            if grid.n == 1 {
                return vec![grid.lo];
            }
            let h = (grid.hi - grid.lo) / (grid.n - 1) as f64;
            return (0..grid.n).map(|i| grid.lo + h * i as f64).collect();
        }
        let offsets = self.product.strike_offsets.as_ref().expect("validated");
        let scale = self.model.vol_scale() * self.product.expiry.sqrt();
        offsets
            .iter()
            .map(|o| self.model.f0() + o * scale)
            .collect()
    }

    pub fn wants(&self, c: Comparator) -> bool {
        self.comparators.contains(&c)
    }
}

/// CMS scenario: market setup + mapping + strike list + pricing backend.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmsScenario {
    pub cms: CmsBlock,
    pub mapping: MappingBlock,
    pub strikes: Vec<f64>,
    pub backend: BackendBlock,
    #[serde(default)]
    pub comparators: Vec<Comparator>,
    #[serde(default)]
    pub mc: McBlock,
    #[serde(default)]
    pub output: Option<String>,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CmsBlock {
    pub s0: f64,
    pub annuity0: f64,
    pub dfp: f64,
    pub t_fix: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum MappingBlock {
    Direct { m0: f64, dm: f64 },
    FlatYield { flat_yield: FlatYieldBlock },
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FlatYieldBlock {
    pub periods: usize,
    pub delta: f64,
    pub pay_offset: f64,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum BackendBlock {
    Bachelier { sigma: f64 },
    NormalSabr { alpha: f64, nu: f64, rho: f64 },
}

impl CmsScenario {
    pub fn parse(text: &str) -> Result<Self, String> {
        let scenario: CmsScenario =
            serde_json::from_str(text).map_err(|e| format!("scenario: {e}"))?;
        scenario.validate()?;
        Ok(scenario)
    }

    fn validate(&self) -> Result<(), String> {
        require_finite(self.cms.s0, "cms.s0")?;
        for (v, name) in [
            (self.cms.annuity0, "cms.annuity0"),
            (self.cms.dfp, "cms.dfp"),
            (self.cms.t_fix, "cms.t_fix"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(format!("{name}: must be positive, got {v}"));
            }
        }
        match &self.mapping {
            MappingBlock::Direct { m0, dm } => {
                if !(m0.is_finite() && *m0 > 0.0) {
                    return Err(format!("mapping.m0: must be positive, got {m0}"));
                }
                require_finite(*dm, "mapping.dm")?;
            }
            MappingBlock::FlatYield { flat_yield } => {
                if flat_yield.periods == 0 {
                    return Err("mapping.flat_yield.periods: must be >= 1".to_string());
                }
                if !(flat_yield.delta.is_finite() && flat_yield.delta > 0.0) {
                    return Err(format!(
                        "mapping.flat_yield.delta: must be positive, got {}",
                        flat_yield.delta
                    ));
                }
                require_finite(flat_yield.pay_offset, "mapping.flat_yield.pay_offset")?;
            }
        }
        if self.strikes.is_empty() {
            return Err("strikes: must be non-empty".to_string());
        }
        if self.strikes.windows(2).any(|w| w[0] >= w[1]) {
            return Err("strikes: must be strictly increasing".to_string());
        }
        match &self.backend {
            BackendBlock::Bachelier { sigma } => require_range(*sigma, 0.0, "backend.sigma")?,
            BackendBlock::NormalSabr { alpha, nu, rho } => {
                require_range(*alpha, 0.0, "backend.alpha")?;
                require_range(*nu, 0.0, "backend.nu")?;
                if !rho.is_finite() || rho.abs() >= 1.0 {
                    return Err(format!("backend.rho: must be in (-1, 1), got {rho}"));
                }
            }
        }
        for (i, c) in self.comparators.iter().enumerate() {
            if *c != Comparator::Mc {
                return Err(format!(
                    "comparators[{i}]: only mc is valid for the cms command"
                ));
            }
        }
        Ok(())
    }
}

fn require_finite(v: f64, name: &str) -> Result<(), String> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(format!("{name}: must be finite, got {v}"))
    }
}

fn require_range(v: f64, min: f64, name: &str) -> Result<(), String> {
    if v.is_finite() && v >= min {
        Ok(())
    } else {
        Err(format!("{name}: must be >= {min} and finite, got {v}"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_minimal_scenario() {
        let s = Scenario::parse(
            r#"{
                "model": {"kind": "normal_sabr", "f0": 0.02, "alpha": 0.0083, "nu": 0.335, "rho": 0.23},
                "product": {"payoff": "call", "strike": 0.02, "expiry": 5.0},
                "comparators": ["watanabe", "hagan"]
            }"#,
        )
        .unwrap();
        assert_eq!(s.strike_list(), vec![0.02]);
        assert!(s.wants(Comparator::Hagan));
    }

    #[test]
    fn rejects_hagan_for_bachelier_with_field_path() {
        let err = Scenario::parse(
            r#"{
                "model": {"kind": "bachelier", "f0": 0.02, "sigma": 0.0083},
                "product": {"payoff": "call", "strike": 0.02, "expiry": 5.0},
                "comparators": ["hagan"]
            }"#,
        )
        .unwrap_err();
        assert!(err.starts_with("comparators[0]"), "{err}");
    }

    #[test]
    fn rejects_two_strike_specs() {
        let err = Scenario::parse(
            r#"{
                "model": {"kind": "bachelier", "f0": 0.02, "sigma": 0.0083},
                "product": {"payoff": "call", "strike": 0.02, "strikes": {"lo": 0.01, "hi": 0.03, "n": 5}, "expiry": 5.0}
            }"#,
        )
        .unwrap_err();
        assert!(err.contains("exactly one"), "{err}");
    }

    #[test]
    fn rejects_decreasing_offsets() {
        let err = Scenario::parse(
            r#"{
                "model": {"kind": "normal_sabr", "f0": 0.02, "alpha": 0.0083, "nu": 0.335, "rho": 0.23},
                "product": {"payoff": "call", "strike_offsets": [1.0, -1.0], "expiry": 5.0}
            }"#,
        )
        .unwrap_err();
        assert!(err.contains("strictly increasing"), "{err}");
    }

    #[test]
    fn offsets_expand_around_forward() {
        let s = Scenario::parse(
            r#"{
                "model": {"kind": "normal_sabr", "f0": 0.02, "alpha": 0.0083, "nu": 0.335, "rho": 0.23},
                "product": {"payoff": "call", "strike_offsets": [-1.0, 0.0, 1.0], "expiry": 4.0}
            }"#,
        )
        .unwrap();
        let ks = s.strike_list();
        assert_eq!(ks.len(), 3);
        assert!((ks[1] - 0.02).abs() < 1e-18);
        assert!((ks[2] - (0.02 + 0.0083 * 2.0)).abs() < 1e-18);
    }

    #[test]
    fn parses_cms_scenario_with_flat_yield() {
        let s = CmsScenario::parse(
            r#"{
                "cms": {"s0": 0.02, "annuity0": 8.0, "dfp": 0.82, "t_fix": 5.0},
                "mapping": {"flat_yield": {"periods": 10, "delta": 1.0, "pay_offset": 0.0}},
                "strikes": [0.015, 0.02, 0.025],
                "backend": {"kind": "bachelier", "sigma": 0.0083}
            }"#,
        )
        .unwrap();
        assert!(matches!(s.mapping, MappingBlock::FlatYield { .. }));
    }

    #[test]
    fn rejects_unknown_suite_fields() {
        let err = Scenario::parse(r#"{"model": {"kind": "bachelier", "f0": 0.02, "sigma": 0.01, "beta": 1.0}, "product": {"payoff": "call", "strike": 0.02, "expiry": 1.0}}"#)
            .unwrap_err();
        assert!(err.contains("beta"), "{err}");
    }
}
