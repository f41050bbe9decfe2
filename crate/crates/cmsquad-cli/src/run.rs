//! Command implementations: pricing rows, smile tables, validation reports
//! and CMS adjustment tables, all rendered with round-trip-exact numerics.

use cmsquad::analytic::{
    bachelier_quadratic, bachelier_vanilla, exact_quadratic_swap_normal_sabr, BachelierInputs,
    OptionKind,
};
use cmsquad::cms::{
    ca_caplet, ca_floorlet, ca_swaplet, mapping_from_annuity_model, CmsSetup, FlatYieldAnnuity,
    LinearMapping,
};
use cmsquad::monte_carlo::{price_payoff, simulate_terminal, ModelSpec, TerminalSamples};
use cmsquad::reference::{
    default_replication_hi, hagan_normal_vol, replicate_quadratic_call, StrikeGrid,
};
use cmsquad::watanabe::{call_normal_sabr, put_normal_sabr, quadratic_normal_sabr, quadratic_slv};
use cmsquad::{PayoffKind, PricingError};

use crate::scenario::{
    BackendBlock, CmsScenario, Comparator, MappingBlock, ModelBlock, Payoff, Scenario,
};

/// CLI failure: scenario/flag problems exit with 2, numerical ones with 3.
#[derive(Debug)]
pub enum CliError {
    Scenario(String),
    Numerical(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Scenario(_) => 2,
            CliError::Numerical(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Scenario(m) | CliError::Numerical(m) => m,
        }
    }
}

impl From<PricingError> for CliError {
    fn from(e: PricingError) -> Self {
        match e {
            PricingError::InvalidInput { .. } => CliError::Scenario(e.to_string()),
            _ => CliError::Numerical(e.to_string()),
        }
    }
}

/// Full-precision cell: 17 significant digits, round-trip exact.
pub fn fmt(v: f64) -> String {
    format!("{v:.16e}")
}

/// One priced strike: the primary value with its order breakdown plus the
/// requested comparator columns in scenario order.
pub struct PricedRow {
    pub strike: f64,
    pub value: f64,
    pub orders: [f64; 3],
    pub columns: Vec<(&'static str, f64)>,
}

/// Price every strike of the scenario.
pub fn price_scenario(scenario: &Scenario, seed: Option<u64>) -> Result<Vec<PricedRow>, CliError> {
    let strikes = scenario.strike_list();
    let expiry = scenario.product.expiry;
    let numeraire = scenario.product.numeraire;
    let payoff = scenario.product.payoff;

    let samples = if scenario.wants(Comparator::Mc) {
        let seed = seed.ok_or_else(|| {
            CliError::Scenario("seed: required when the mc comparator is requested".to_string())
        })?;
        let model = mc_model(&scenario.model)?;
        let cfg = scenario.mc.config(expiry, seed);
        Some(simulate_terminal(&model, expiry, &cfg)?)
    } else {
        None
    };

    let mut rows = Vec::with_capacity(strikes.len());
    for &strike in &strikes {
        let (value, orders) = primary_price(&scenario.model, payoff, strike, expiry, numeraire)?;
        let mut columns = Vec::new();
        for c in &scenario.comparators {
            match c {
                Comparator::Watanabe => columns.push(("watanabe", value)),
                Comparator::Hagan => {
                    columns.push(("hagan", hagan_price(&scenario.model, payoff, strike, expiry, numeraire)?))
                }
                Comparator::Mc => {
                    let est = price_payoff(
                        samples.as_ref().expect("mc simulated"),
                        payoff.to_payoff_kind(),
                        strike,
                        numeraire,
                    )?;
                    columns.push(("mc", est.mean));
                    columns.push(("mc_se", est.std_error));
                }
                Comparator::Replication => {
                    let (value, _trunc) =
                        replication_price(&scenario.model, strike, expiry, numeraire)?;
                    columns.push(("replication", value));
                }
                Comparator::Exact => {
                    columns.push(("exact", exact_price(&scenario.model, strike, expiry, numeraire)?))
                }
            }
        }
        rows.push(PricedRow {
            strike,
            value,
            orders,
            columns,
        });
    }
    Ok(rows)
}

fn mc_model(model: &ModelBlock) -> Result<ModelSpec, CliError> {
    match model {
        ModelBlock::NormalSabr { f0, .. } => Ok(ModelSpec::NormalSabr {
            params: model.sabr_params().expect("normal sabr"),
            f0: *f0,
        }),
        ModelBlock::Bachelier { f0, sigma } => Ok(ModelSpec::NormalSabr {
            params: cmsquad::watanabe::SabrParams::new(*sigma, 0.0, 0.0)?,
            f0: *f0,
        }),
        ModelBlock::Slv { .. } => Err(CliError::Scenario(
            "comparators: mc is not available for the slv model kind".to_string(),
        )),
    }
}

fn primary_price(
    model: &ModelBlock,
    payoff: Payoff,
    strike: f64,
    expiry: f64,
    numeraire: f64,
) -> Result<(f64, [f64; 3]), CliError> {
    match model {
        ModelBlock::NormalSabr { f0, .. } => {
            let params = model.sabr_params().expect("normal sabr");
            let r = match payoff {
                Payoff::Call => call_normal_sabr(&params, *f0, strike, expiry, numeraire)?,
                Payoff::Put => put_normal_sabr(&params, *f0, strike, expiry, numeraire)?,
                quad => quadratic_normal_sabr(
                    &params,
                    *f0,
                    strike,
                    expiry,
                    numeraire,
                    quad.quad_kind().expect("quadratic"),
                )?,
            };
            Ok((r.value, [r.order0, r.order1, r.order2]))
        }
        ModelBlock::Slv { f0, .. } => {
            let point = model.slv_point().expect("slv");
            let kind = payoff.quad_kind().ok_or_else(|| {
                CliError::Scenario(
                    "product.payoff: slv model prices quadratic payoffs only".to_string(),
                )
            })?;
            let r = quadratic_slv(&point, *f0, strike, expiry, numeraire, kind)?;
            Ok((r.value, [r.order0, r.order1, r.order2]))
        }
        ModelBlock::Bachelier { f0, sigma } => {
            let inputs = BachelierInputs::new(*f0, strike, *sigma, expiry, numeraire)?;
            let value = match payoff {
                Payoff::Call => bachelier_vanilla(&inputs, OptionKind::Call),
                Payoff::Put => bachelier_vanilla(&inputs, OptionKind::Put),
                quad => bachelier_quadratic(&inputs, quad.quad_kind().expect("quadratic")),
            };
            Ok((value, [value, 0.0, 0.0]))
        }
    }
}

fn hagan_price(
    model: &ModelBlock,
    payoff: Payoff,
    strike: f64,
    expiry: f64,
    numeraire: f64,
) -> Result<f64, CliError> {
    let f0 = model.f0();
    let params = model
        .sabr_params()
        .ok_or_else(|| CliError::Scenario("hagan requires the normal_sabr model".to_string()))?;
    let vol = hagan_normal_vol(&params, f0, strike, expiry)?;
    let inputs = BachelierInputs::new(f0, strike, vol, expiry, numeraire)?;
    Ok(match payoff {
        Payoff::Call => bachelier_vanilla(&inputs, OptionKind::Call),
        Payoff::Put => bachelier_vanilla(&inputs, OptionKind::Put),
        quad => bachelier_quadratic(&inputs, quad.quad_kind().expect("quadratic")),
    })
}

/// Replication of the quadratic call off the model's vanilla smile.
fn replication_price(
    model: &ModelBlock,
    strike: f64,
    expiry: f64,
    numeraire: f64,
) -> Result<(f64, f64), CliError> {
    let f0 = model.f0();
    let sigma_atm = model.vol_scale();
    let hi = default_replication_hi(strike, sigma_atm, expiry);
    let grid = StrikeGrid::new(strike, hi, 2000)?;
    let result = match model {
        ModelBlock::Bachelier { sigma, .. } => {
            let sigma = *sigma;
            replicate_quadratic_call(
                move |k| {
                    let inputs = BachelierInputs::new(f0, k, sigma, expiry, numeraire)
                        .expect("validated inputs");
                    bachelier_vanilla(&inputs, OptionKind::Call)
                },
                strike,
                &grid,
            )?
        }
        ModelBlock::NormalSabr { .. } => {
            let params = model.sabr_params().expect("normal sabr");
            replicate_quadratic_call(
                move |k| {
                    let vol = hagan_normal_vol(&params, f0, k, expiry).unwrap_or(f64::NAN);
                    match BachelierInputs::new(f0, k, vol, expiry, numeraire) {
                        Ok(inputs) => bachelier_vanilla(&inputs, OptionKind::Call),
                        Err(_) => f64::NAN,
                    }
                },
                strike,
                &grid,
            )?
        }
        ModelBlock::Slv { .. } => {
            return Err(CliError::Scenario(
                "replication is not available for the slv model kind".to_string(),
            ))
        }
    };
    Ok((result.value, result.truncation_estimate))
}

fn exact_price(
    model: &ModelBlock,
    strike: f64,
    expiry: f64,
    numeraire: f64,
) -> Result<f64, CliError> {
    let undiscounted = match model {
        ModelBlock::NormalSabr { f0, alpha, nu, .. } => {
            exact_quadratic_swap_normal_sabr(*f0, strike, *alpha, *nu, expiry)?
        }
        ModelBlock::Bachelier { f0, sigma } => {
            exact_quadratic_swap_normal_sabr(*f0, strike, *sigma, 0.0, expiry)?
        }
        ModelBlock::Slv { .. } => {
            return Err(CliError::Scenario(
                "exact is not available for the slv model kind".to_string(),
            ))
        }
    };
    Ok(numeraire * undiscounted)
}

/// `price` output: one `name = value` line per field.
pub fn render_price(rows: &[PricedRow]) -> String {
    let mut out = String::new();
    for row in rows {
        out.push_str(&format!("strike = {}\n", fmt(row.strike)));
        out.push_str(&format!("value = {}\n", fmt(row.value)));
        out.push_str(&format!("order0 = {}\n", fmt(row.orders[0])));
        out.push_str(&format!("order1 = {}\n", fmt(row.orders[1])));
        out.push_str(&format!("order2 = {}\n", fmt(row.orders[2])));
        for (name, value) in &row.columns {
            out.push_str(&format!("{name} = {}\n", fmt(*value)));
        }
    }
    out
}

/// `smile` output: CSV with one column per requested comparator.
pub fn render_smile(scenario: &Scenario, rows: &[PricedRow]) -> String {
    let mut header = vec!["strike"];
    if scenario.wants(Comparator::Watanabe) {
        header.push("watanabe");
    }
    if scenario.wants(Comparator::Hagan) {
        header.push("hagan");
    }
    if scenario.wants(Comparator::Mc) {
        header.push("mc");
        header.push("mc_se");
    }
    if scenario.wants(Comparator::Replication) {
        header.push("replication");
    }
    if scenario.wants(Comparator::Exact) {
        header.push("exact");
    }
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        let mut cells = vec![fmt(row.strike)];
        for name in header.iter().skip(1) {
            let value = row
                .columns
                .iter()
                .find(|(n, _)| n == name)
                .map(|(_, v)| *v)
                .expect("column priced");
            cells.push(fmt(value));
        }
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    out
}

/// One CMS table row: adjustments for a strike under a named backend.
pub struct CmsRow {
    pub strike: f64,
    pub backend: &'static str,
    pub ca: [f64; 3],
    pub se: [f64; 3],
}

pub fn run_cms(scenario: &CmsScenario, seed: Option<u64>) -> Result<Vec<CmsRow>, CliError> {
    let setup = CmsSetup::new(
        scenario.cms.s0,
        scenario.cms.annuity0,
        scenario.cms.dfp,
        scenario.cms.t_fix,
    )?;
    let mapping = match &scenario.mapping {
        MappingBlock::Direct { m0, dm } => LinearMapping::new(*m0, *dm)?,
        MappingBlock::FlatYield { flat_yield } => {
            let model = FlatYieldAnnuity::new(
                flat_yield.periods,
                flat_yield.delta,
                flat_yield.pay_offset,
            )?;
            mapping_from_annuity_model(&setup, &model)?
        }
    };

    let wants_mc = scenario.comparators.contains(&Comparator::Mc);
    let samples: Option<TerminalSamples> = if wants_mc {
        let seed = seed.ok_or_else(|| {
            CliError::Scenario("seed: required when the mc comparator is requested".to_string())
        })?;
        let cfg = scenario.mc.config(setup.t_fix, seed);
        let model = match &scenario.backend {
            BackendBlock::Bachelier { sigma } => ModelSpec::NormalSabr {
                params: cmsquad::watanabe::SabrParams::new(*sigma, 0.0, 0.0)?,
                f0: setup.s0,
            },
            BackendBlock::NormalSabr { alpha, nu, rho } => ModelSpec::NormalSabr {
                params: cmsquad::watanabe::SabrParams::new(*alpha, *nu, *rho)?,
                f0: setup.s0,
            },
        };
        Some(simulate_terminal(&model, setup.t_fix, &cfg)?)
    } else {
        None
    };

    let mut rows = Vec::new();
    for &strike in &scenario.strikes {
        let (name, prices) = backend_prices(&scenario.backend, &setup, strike)?;
        let [vc, vp, vqc, vqp, vqs] = prices;
        rows.push(CmsRow {
            strike,
            backend: name,
            ca: [
                ca_caplet(&setup, &mapping, strike, vc, vqc),
                ca_floorlet(&setup, &mapping, strike, vp, vqp),
                ca_swaplet(&setup, &mapping, strike, vqs),
            ],
            se: [0.0; 3],
        });
        if let Some(samples) = &samples {
            let legs = [
                PayoffKind::Call,
                PayoffKind::Put,
                PayoffKind::QuadCall,
                PayoffKind::QuadPut,
                PayoffKind::QuadSwap,
            ];
            let mut est = [0.0_f64; 5];
            let mut se = [0.0_f64; 5];
            for (i, leg) in legs.into_iter().enumerate() {
                let e = price_payoff(samples, leg, strike, 1.0)?;
                est[i] = e.mean;
                se[i] = e.std_error;
            }
            let (m0m1, dmm1) = (mapping.m0 - 1.0, mapping.dm - 1.0);
            rows.push(CmsRow {
                strike,
                backend: "mc",
                ca: [
                    ca_caplet(&setup, &mapping, strike, est[0], est[2]),
                    ca_floorlet(&setup, &mapping, strike, est[1], est[3]),
                    ca_swaplet(&setup, &mapping, strike, est[4]),
                ],
                se: [
                    (m0m1 * m0m1 * se[0] * se[0] + dmm1 * dmm1 * se[2] * se[2]).sqrt(),
                    (m0m1 * m0m1 * se[1] * se[1] + dmm1 * dmm1 * se[3] * se[3]).sqrt(),
                    (dmm1 * dmm1 * se[4] * se[4]).sqrt(),
                ],
            });
        }
    }
    Ok(rows)
}

fn backend_prices(
    backend: &BackendBlock,
    setup: &CmsSetup,
    strike: f64,
) -> Result<(&'static str, [f64; 5]), CliError> {
    match backend {
        BackendBlock::Bachelier { sigma } => {
            let inputs = BachelierInputs::new(setup.s0, strike, *sigma, setup.t_fix, 1.0)?;
            Ok((
                "bachelier",
                [
                    bachelier_vanilla(&inputs, OptionKind::Call),
                    bachelier_vanilla(&inputs, OptionKind::Put),
                    bachelier_quadratic(&inputs, cmsquad::analytic::QuadKind::Call),
                    bachelier_quadratic(&inputs, cmsquad::analytic::QuadKind::Put),
                    bachelier_quadratic(&inputs, cmsquad::analytic::QuadKind::Swap),
                ],
            ))
        }
        BackendBlock::NormalSabr { alpha, nu, rho } => {
            let params = cmsquad::watanabe::SabrParams::new(*alpha, *nu, *rho)?;
            let quad = |kind| {
                quadratic_normal_sabr(&params, setup.s0, strike, setup.t_fix, 1.0, kind)
                    .map(|r| r.value)
            };
            Ok((
                "normal_sabr",
                [
                    call_normal_sabr(&params, setup.s0, strike, setup.t_fix, 1.0)?.value,
                    put_normal_sabr(&params, setup.s0, strike, setup.t_fix, 1.0)?.value,
                    quad(cmsquad::analytic::QuadKind::Call)?,
                    quad(cmsquad::analytic::QuadKind::Put)?,
                    quad(cmsquad::analytic::QuadKind::Swap)?,
                ],
            ))
        }
    }
}

pub fn render_cms(rows: &[CmsRow]) -> String {
    let mut out =
        String::from("strike,backend,ca_caplet,ca_floorlet,ca_swaplet,se_caplet,se_floorlet,se_swaplet\n");
    for row in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{}\n",
            fmt(row.strike),
            row.backend,
            fmt(row.ca[0]),
            fmt(row.ca[1]),
            fmt(row.ca[2]),
            fmt(row.se[0]),
            fmt(row.se[1]),
            fmt(row.se[2]),
        ));
    }
    out
}

/// Run a named validation suite; the report has one line per check.
pub fn run_validate(suite: &str, seed: u64, paths: Option<usize>) -> Result<(String, bool), CliError> {
    use cmsquad::validation;
    if let Some(p) = paths {
        if p < 2 {
            return Err(CliError::Scenario(format!(
                "paths: must be >= 2, got {p}"
            )));
        }
    }
    let checks = match suite {
        "parity" => validation::parity_suite(seed),
        "reductions" => validation::reductions_suite(seed),
        "appendix" => validation::appendix_suite(seed, paths.unwrap_or(1_000_000)),
        "oracles" => validation::oracles_suite(seed),
        other => {
            return Err(CliError::Scenario(format!(
                "suite: unknown validation suite '{other}' \
                 (expected parity, reductions, appendix or oracles)"
            )))
        }
    };
    let all_pass = checks.iter().all(|c| c.pass);
    let mut report = String::from("check_name,measured,bound,verdict\n");
    for c in &checks {
        report.push_str(&c.report_line());
        report.push('\n');
    }
    Ok((report, all_pass))
}
