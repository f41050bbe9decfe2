//! CMS assembly against Monte Carlo of the same conditional-expectation
//! expressions under Bachelier swap-rate dynamics.

use cmsquad::analytic::{
    bachelier_quadratic, bachelier_vanilla, BachelierInputs, OptionKind, QuadKind,
};
use cmsquad::cms::{ca_caplet, ca_floorlet, ca_swaplet, cms_rate_expectation, CmsSetup, LinearMapping};
use cmsquad::monte_carlo::{
    estimate_fn, price_payoff, simulate_terminal, McConfig, McScheme, ModelSpec, PayoffKind,
};
use cmsquad::watanabe::SabrParams;

fn setup() -> CmsSetup {
    CmsSetup::new(0.02, 8.0, 0.82, 5.0).unwrap()
}

fn bachelier_samples(sigma: f64, seed: u64, n_paths: usize) -> cmsquad::TerminalSamples {
    let cfg = McConfig {
        n_paths,
        n_steps: 320,
        seed,
        scheme: McScheme::LogEulerVol,
        antithetic: true,
    };
    let model = ModelSpec::NormalSabr {
        params: SabrParams::new(sigma, 0.0, 0.0).unwrap(),
        f0: 0.02,
    };
    simulate_terminal(&model, 5.0, &cfg).unwrap()
}

#[test]
fn adjustments_match_direct_monte_carlo_of_the_expressions() {
    let s = setup();
    let sigma = 0.0083;
    let map = LinearMapping::new(1.01, 1.2).unwrap();
    let samples = bachelier_samples(sigma, 51, 200_000);
    let (m0m1, dmm1) = (map.m0 - 1.0, map.dm - 1.0);

    for strike in [0.015, 0.02, 0.026] {
        let inputs = BachelierInputs::new(s.s0, strike, sigma, s.t_fix, 1.0).unwrap();
        let analytic_cap = ca_caplet(
            &s,
            &map,
            strike,
            bachelier_vanilla(&inputs, OptionKind::Call),
            bachelier_quadratic(&inputs, QuadKind::Call),
        );
        let mc_cap = estimate_fn(
            &samples,
            |f| {
                let c = (f - strike).max(0.0);
                m0m1 * c + dmm1 * c * c
            },
            1.0,
        )
        .unwrap();
        assert!(
            (analytic_cap - mc_cap.mean).abs() <= 3.0 * mc_cap.std_error,
            "caplet at {strike}: {analytic_cap:e} vs {:e} (se {:e})",
            mc_cap.mean,
            mc_cap.std_error
        );

        let analytic_floor = ca_floorlet(
            &s,
            &map,
            strike,
            bachelier_vanilla(&inputs, OptionKind::Put),
            bachelier_quadratic(&inputs, QuadKind::Put),
        );
        let mc_floor = estimate_fn(
            &samples,
            |f| {
                let p = (strike - f).max(0.0);
                m0m1 * p - dmm1 * p * p
            },
            1.0,
        )
        .unwrap();
        assert!(
            (analytic_floor - mc_floor.mean).abs() <= 3.0 * mc_floor.std_error,
            "floorlet at {strike}: {analytic_floor:e} vs {:e}",
            mc_floor.mean
        );

        let analytic_swap = ca_swaplet(
            &s,
            &map,
            strike,
            bachelier_quadratic(&inputs, QuadKind::Swap),
        );
        let mc_swap = estimate_fn(
            &samples,
            |f| {
                let d = f - strike;
                m0m1 * (s.s0 - strike) + dmm1 * d * d
            },
            1.0,
        )
        .unwrap();
        assert!(
            (analytic_swap - mc_swap.mean).abs() <= 3.0 * mc_swap.std_error,
            "swaplet at {strike}: {analytic_swap:e} vs {:e}",
            mc_swap.mean
        );
    }
}

#[test]
fn rate_expectation_cross_checks_against_mc_quadratic() {
    // the forward CMS rate formula with its quadratic input replaced by the
    // Monte Carlo estimate moves by less than 3·(dm−1)·SE
    let s = setup();
    let sigma = 0.0083;
    let map = LinearMapping::new(1.01, 1.4).unwrap();
    let inputs = BachelierInputs::new(s.s0, s.s0, sigma, s.t_fix, s.annuity0).unwrap();
    let vqc_analytic = bachelier_quadratic(&inputs, QuadKind::Call);

    let samples = bachelier_samples(sigma, 57, 200_000);
    let vqc_mc = price_payoff(&samples, PayoffKind::QuadCall, s.s0, s.annuity0).unwrap();

    let rate_analytic = cms_rate_expectation(&s, &map, vqc_analytic);
    let rate_mc = cms_rate_expectation(&s, &map, vqc_mc.mean);
    assert!(
        (rate_analytic - rate_mc).abs() <= 3.0 * (map.dm - 1.0).abs() * vqc_mc.std_error,
        "rate expectation: {rate_analytic:e} vs {rate_mc:e}"
    );
    // identity slope keeps the spot rate regardless of the quadratic input
    let id = LinearMapping::new(0.9, 1.0).unwrap();
    assert_eq!(cms_rate_expectation(&s, &id, vqc_mc.mean), s.s0);
}
