//! Named self-check suites: parity, reductions, appendix functionals and
//! quadrature/replication oracles, plus the heavier benchmark-band and CMS
//! assembly checks. The CLI `validate` subcommand and the acceptance test
//! target both drive these.

use rand::{Rng, SeedableRng};
use rand_xoshiro::Xoshiro256PlusPlus;

use crate::analytic::{
    bachelier_quadratic, bachelier_vanilla, exact_quadratic_swap_normal_sabr, BachelierInputs,
    OptionKind, QuadKind,
};
use crate::monte_carlo::{
    estimate_fn, estimate_g_functionals, price_payoff, simulate_terminal, McConfig, ModelSpec,
    PayoffKind,
};
use crate::reference::{hagan_normal_vol, replicate_quadratic_call, StrikeGrid};
use crate::watanabe::{
    call_normal_sabr, g_functional_closed_forms, quadratic_lv, quadratic_normal_sabr,
    quadratic_slv, LocalVolPoint, SabrParams, SlvPoint,
};

/// One line of a validation report.
#[derive(Debug, Clone)]
pub struct CheckResult {
    pub name: String,
    pub measured: f64,
    pub bound: f64,
    pub pass: bool,
}

impl CheckResult {
    /// Passing means `measured <= bound`.
    pub fn upper(name: impl Into<String>, measured: f64, bound: f64) -> Self {
        CheckResult {
            name: name.into(),
            measured,
            bound,
            pass: measured.is_finite() && measured <= bound,
        }
    }

    /// `check_name,measured,bound,verdict` with full-precision numerics.
    pub fn report_line(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{}",
            self.name,
            self.measured,
            self.bound,
            if self.pass { "pass" } else { "FAIL" }
        )
    }
}

/// Swaption-calibrated normal SABR parameter sets used by the benchmark
/// comparisons, paired with their natural expiries.
pub fn benchmark_sets() -> [(&'static str, SabrParams, f64); 3] {
    [
        ("5y", SabrParams::new(0.0083, 0.335, 0.230).unwrap(), 5.0),
        ("10y", SabrParams::new(0.0075, 0.243, 0.235).unwrap(), 10.0),
        ("15y", SabrParams::new(0.0068, 0.215, 0.195).unwrap(), 15.0),
    ]
}

/// The stochastic-local-vol point exercised by the functional checks.
pub fn benchmark_slv_point() -> SlvPoint {
    SlvPoint::new(1.0, 0.5, -2.0, 0.0083, 0.335, 0.230).unwrap()
}

fn rel_err(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Relative error with a floor on the denominator. Deep out of the money the
/// quadratic kernels cancel to a value far below their own terms, so pure
/// value-relative comparisons amplify irreducible roundoff; the natural
/// price scale there is the second moment `σ₀²T·(1 + y²)`.
fn rel_err_floored(a: f64, b: f64, floor: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(floor)
}

struct Draw {
    params: SabrParams,
    slv: SlvPoint,
    lv: LocalVolPoint,
    forward: f64,
    y: f64,
    expiry: f64,
}

impl Draw {
    /// Strike at this draw's moneyness for a given vol scale σ₀.
    fn strike(&self, scale: f64) -> f64 {
        self.forward + self.y * scale * self.expiry.sqrt()
    }
}

fn random_draw(rng: &mut Xoshiro256PlusPlus) -> Draw {
    let alpha = rng.gen_range(1e-3..2e-2);
    let nu = rng.gen_range(0.0..0.6);
    let rho = rng.gen_range(-0.9..0.9);
    let expiry = rng.gen_range(1.0..20.0);
    let y = rng.gen_range(-4.0..4.0);
    let params = SabrParams::new(alpha, nu, rho).unwrap();
    let slv = SlvPoint::new(
        rng.gen_range(0.5..1.5),
        rng.gen_range(-1.0..1.0),
        rng.gen_range(-5.0..5.0),
        alpha,
        nu,
        rho,
    )
    .unwrap();
    let lv = LocalVolPoint::new(
        rng.gen_range(1e-3..2e-2),
        rng.gen_range(-0.5..0.5),
        rng.gen_range(-5.0..5.0),
    )
    .unwrap();
    Draw {
        params,
        slv,
        lv,
        forward: 0.02,
        y,
        expiry,
    }
}

/// Quadratic parity `V^QS = V^QC + V^QP` for the LV, SLV and normal-SABR
/// pricers over 1000 random draws; reports the worst relative error per
/// family against a 1e-13 bound.
pub fn parity_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut worst_slv = 0.0_f64;
    let mut worst_lv = 0.0_f64;
    let mut worst_sabr = 0.0_f64;
    let mut worst_bachelier = 0.0_f64;
    for _ in 0..1000 {
        let d = random_draw(&mut rng);
        let moment = |scale: f64| scale * scale * d.expiry * (1.0 + d.y * d.y);

        let slv_scale = d.params.alpha() * d.slv.c0();
        let slv_strike = d.strike(slv_scale);
        let slv_prices: Vec<f64> = [QuadKind::Call, QuadKind::Put, QuadKind::Swap]
            .iter()
            .map(|&k| {
                quadratic_slv(&d.slv, d.forward, slv_strike, d.expiry, 1.0, k)
                    .unwrap()
                    .value
            })
            .collect();
        worst_slv = worst_slv.max(rel_err_floored(
            slv_prices[2],
            slv_prices[0] + slv_prices[1],
            moment(slv_scale),
        ));

        let lv_strike = d.strike(d.lv.sigma0());
        let lv_prices: Vec<f64> = [QuadKind::Call, QuadKind::Put, QuadKind::Swap]
            .iter()
            .map(|&k| {
                quadratic_lv(&d.lv, d.forward, lv_strike, d.expiry, 1.0, k)
                    .unwrap()
                    .value
            })
            .collect();
        worst_lv = worst_lv.max(rel_err_floored(
            lv_prices[2],
            lv_prices[0] + lv_prices[1],
            moment(d.lv.sigma0()),
        ));

        let sabr_strike = d.strike(d.params.alpha());
        let sabr_prices: Vec<f64> = [QuadKind::Call, QuadKind::Put, QuadKind::Swap]
            .iter()
            .map(|&k| {
                quadratic_normal_sabr(&d.params, d.forward, sabr_strike, d.expiry, 1.0, k)
                    .unwrap()
                    .value
            })
            .collect();
        worst_sabr = worst_sabr.max(rel_err_floored(
            sabr_prices[2],
            sabr_prices[0] + sabr_prices[1],
            moment(d.params.alpha()),
        ));

        let inputs =
            BachelierInputs::new(d.forward, sabr_strike, d.params.alpha(), d.expiry, 1.0).unwrap();
        let qc = bachelier_quadratic(&inputs, QuadKind::Call);
        let qp = bachelier_quadratic(&inputs, QuadKind::Put);
        let qs = bachelier_quadratic(&inputs, QuadKind::Swap);
        worst_bachelier = worst_bachelier.max(rel_err(qs, qc + qp));
    }
    vec![
        CheckResult::upper("parity_slv", worst_slv, 1e-13),
        CheckResult::upper("parity_lv", worst_lv, 1e-13),
        CheckResult::upper("parity_normal_sabr", worst_sabr, 1e-13),
        CheckResult::upper("parity_bachelier_closed_form", worst_bachelier, 1e-14),
    ]
}

/// Model reductions: SLV(ν=0, ρ=0, α=1) against LV, SLV(C=1) against the
/// normal-SABR formula, and the Bachelier collapses, each over 1000 draws at
/// 1e-14 relative.
pub fn reductions_suite(seed: u64) -> Vec<CheckResult> {
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let kinds = [QuadKind::Call, QuadKind::Put, QuadKind::Swap];
    let mut worst_slv_lv = 0.0_f64;
    let mut worst_slv_sabr = 0.0_f64;
    let mut worst_call_bachelier = 0.0_f64;
    let mut worst_quad_bachelier = 0.0_f64;
    for _ in 0..1000 {
        let d = random_draw(&mut rng);
        let moment = |scale: f64| scale * scale * d.expiry * (1.0 + d.y * d.y);

        // SLV with ν = 0, ρ = 0, α = 1 degenerates to pure local vol.
        let as_slv = SlvPoint::new(
            d.lv.sigma0(),
            d.lv.dsigma(),
            d.lv.d2sigma(),
            1.0,
            0.0,
            0.0,
        )
        .unwrap();
        let lv_strike = d.strike(d.lv.sigma0());
        for &k in &kinds {
            let a = quadratic_slv(&as_slv, d.forward, lv_strike, d.expiry, 1.0, k)
                .unwrap()
                .value;
            let b = quadratic_lv(&d.lv, d.forward, lv_strike, d.expiry, 1.0, k)
                .unwrap()
                .value;
            worst_slv_lv = worst_slv_lv.max(rel_err_floored(a, b, moment(d.lv.sigma0())));
        }

        // SLV with C = 1 is the normal SABR formula.
        let unit_backbone = SlvPoint::normal_sabr(&d.params);
        let sabr_strike = d.strike(d.params.alpha());
        for &k in &kinds {
            let a = quadratic_slv(&unit_backbone, d.forward, sabr_strike, d.expiry, 1.0, k)
                .unwrap()
                .value;
            let b = quadratic_normal_sabr(&d.params, d.forward, sabr_strike, d.expiry, 1.0, k)
                .unwrap()
                .value;
            worst_slv_sabr =
                worst_slv_sabr.max(rel_err_floored(a, b, moment(d.params.alpha())));
        }

        // ν = 0 collapses the SABR call expansion onto the Bachelier call.
        let frozen = SabrParams::new(d.params.alpha(), 0.0, d.params.rho()).unwrap();
        let call = call_normal_sabr(&frozen, d.forward, sabr_strike, d.expiry, 1.0)
            .unwrap()
            .value;
        let inputs =
            BachelierInputs::new(d.forward, sabr_strike, d.params.alpha(), d.expiry, 1.0).unwrap();
        worst_call_bachelier =
            worst_call_bachelier.max(rel_err(call, bachelier_vanilla(&inputs, OptionKind::Call)));

        // σ′ = σ″ = 0 collapses the LV quadratics onto the closed form.
        let flat = LocalVolPoint::new(d.lv.sigma0(), 0.0, 0.0).unwrap();
        let flat_inputs =
            BachelierInputs::new(d.forward, lv_strike, d.lv.sigma0(), d.expiry, 1.0).unwrap();
        for &k in &kinds {
            let a = quadratic_lv(&flat, d.forward, lv_strike, d.expiry, 1.0, k)
                .unwrap()
                .value;
            let b = bachelier_quadratic(&flat_inputs, k);
            worst_quad_bachelier =
                worst_quad_bachelier.max(rel_err_floored(a, b, moment(d.lv.sigma0())));
        }
    }
    vec![
        CheckResult::upper("reduction_slv_to_lv", worst_slv_lv, 1e-14),
        CheckResult::upper("reduction_slv_to_normal_sabr", worst_slv_sabr, 1e-14),
        CheckResult::upper("reduction_call_to_bachelier", worst_call_bachelier, 1e-14),
        CheckResult::upper("reduction_quadratic_to_bachelier", worst_quad_bachelier, 1e-14),
    ]
}

/// Moneyness grid shared by the functional checks.
pub const FUNCTIONAL_YS: [f64; 3] = [-1.0, 0.0, 1.0];

/// Appendix functional oracle: Monte Carlo estimates of the ĝ functionals
/// (512 steps/year) against their closed forms, within 3 standard errors,
/// for the 5y normal SABR set and the benchmark SLV point.
pub fn appendix_suite(seed: u64, n_paths: usize) -> Vec<CheckResult> {
    let (_, params, expiry) = benchmark_sets()[0];
    let steps = (512.0 * expiry) as usize;
    let cfg = McConfig {
        n_paths,
        n_steps: steps,
        seed,
        scheme: crate::monte_carlo::McScheme::LogEulerVol,
        antithetic: false,
    };

    let mut out = Vec::new();
    let cases = [
        ("normal_sabr", SlvPoint::normal_sabr(&params)),
        ("slv", benchmark_slv_point()),
    ];
    for (label, point) in cases {
        let estimates = estimate_g_functionals(&point, expiry, &FUNCTIONAL_YS, &cfg)
            .expect("functional estimation failed");
        for est in estimates {
            let closed = g_functional_closed_forms(&point, expiry, est.y);
            let pairs = [
                ("payoff_g2", est.payoff_g2, closed.payoff_g2),
                ("indicator_g2", est.indicator_g2, closed.indicator_g2),
                ("payoff_g3", est.payoff_g3, closed.payoff_g3),
                ("indicator_g2_sq", est.indicator_g2_sq, closed.indicator_g2_sq),
                ("quad_payoff_sq", est.quad_payoff_sq, closed.quad_payoff_sq),
            ];
            for (fname, mc, exact) in pairs {
                out.push(CheckResult::upper(
                    format!("appendix_{label}_{fname}_y{:+.0}", est.y),
                    (mc.mean - exact).abs(),
                    3.0 * mc.std_error,
                ));
            }
        }
    }
    out
}

// ---------------------------------------------------------------------------
// Quadrature used by the oracle suite (independent of mathcore: only exp).
// ---------------------------------------------------------------------------

/// Gauss-Legendre nodes/weights on [-1, 1] by Newton iteration.
fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let m = n.div_ceil(2);
    for i in 0..m {
        let mut x = (std::f64::consts::PI * (i as f64 + 0.75) / (n as f64 + 0.5)).cos();
        loop {
            let mut p0 = 1.0;
            let mut p1 = 0.0;
            for j in 0..n {
                let p2 = p1;
                p1 = p0;
                p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
            }
            let dp = n as f64 * (x * p0 - p1) / (x * x - 1.0);
            let dx = p0 / dp;
            x -= dx;
            if dx.abs() < 1e-15 {
                let dp = {
                    let mut p0 = 1.0;
                    let mut p1 = 0.0;
                    for j in 0..n {
                        let p2 = p1;
                        p1 = p0;
                        p0 = ((2.0 * j as f64 + 1.0) * x * p1 - j as f64 * p2) / (j as f64 + 1.0);
                    }
                    n as f64 * (x * p0 - p1) / (x * x - 1.0)
                };
                nodes[i] = -x;
                nodes[n - 1 - i] = x;
                weights[i] = 2.0 / ((1.0 - x * x) * dp * dp);
                weights[n - 1 - i] = weights[i];
                break;
            }
        }
    }
    (nodes, weights)
}

/// ∫ f(z)·exp(−z²/2)/√(2π) dz over [lo, hi] by panelled Gauss-Legendre.
fn gaussian_quadrature<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    const NODES: usize = 48;
    const PANELS: usize = 12;
    let (xs, ws) = gauss_legendre(NODES);
    let width = (hi - lo) / PANELS as f64;
    let mut total = 0.0;
    for p in 0..PANELS {
        let a = lo + p as f64 * width;
        let half = 0.5 * width;
        let mid = a + half;
        let mut panel = 0.0;
        for (x, w) in xs.iter().zip(ws.iter()) {
            let z = mid + half * x;
            panel += w * f(z) * (-0.5 * z * z).exp();
        }
        total += panel * half;
    }
    total * 0.398_942_280_401_432_7
}

/// Quadrature value of the Bachelier expectation `E[payoff(F)]`,
/// `F ~ N(forward, sigma²·expiry)`, restricted to the region where the
/// payoff is nonzero so the integrand stays smooth.
pub fn bachelier_quadrature_price(
    forward: f64,
    strike: f64,
    sigma: f64,
    expiry: f64,
    numeraire: f64,
    payoff: PayoffKind,
) -> f64 {
    let s = sigma * expiry.sqrt();
    let y = (strike - forward) / s;
    let value = match payoff {
        PayoffKind::Call => gaussian_quadrature(|z| s * (z - y), y, y + 42.0),
        PayoffKind::QuadCall => gaussian_quadrature(|z| s * s * (z - y) * (z - y), y, y + 42.0),
        PayoffKind::Put => gaussian_quadrature(|z| s * (y - z), y - 42.0, y),
        PayoffKind::QuadPut => gaussian_quadrature(|z| s * s * (y - z) * (y - z), y - 42.0, y),
        PayoffKind::QuadSwap => {
            gaussian_quadrature(|z| s * s * (z - y) * (z - y), y - 42.0, y + 42.0)
        }
    };
    numeraire * value
}

/// Oracle suite: closed forms against quadrature, the exact-swap convergence
/// order, and strike-grid replication against the quadratic closed form.
pub fn oracles_suite(seed: u64) -> Vec<CheckResult> {
    let mut out = Vec::new();

    // Constant-vol quadratic closed form vs quadrature, 100 random inputs.
    let mut rng = Xoshiro256PlusPlus::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    for _ in 0..100 {
        let forward = rng.gen_range(-0.01..0.05);
        let sigma = rng.gen_range(1e-3..0.02);
        let expiry: f64 = rng.gen_range(0.5..20.0);
        let y = rng.gen_range(-3.0..3.0);
        let strike = forward + y * sigma * expiry.sqrt();
        let inputs = BachelierInputs::new(forward, strike, sigma, expiry, 1.0).unwrap();
        for (kind, payoff) in [
            (QuadKind::Call, PayoffKind::QuadCall),
            (QuadKind::Put, PayoffKind::QuadPut),
            (QuadKind::Swap, PayoffKind::QuadSwap),
        ] {
            let closed = bachelier_quadratic(&inputs, kind);
            let quad = bachelier_quadrature_price(forward, strike, sigma, expiry, 1.0, payoff);
            worst = worst.max(rel_err(closed, quad));
        }
    }
    out.push(CheckResult::upper("oracle_quadratic_vs_quadrature", worst, 1e-10));

    // Vanilla closed form vs quadrature on the same draws' scale.
    let inputs = BachelierInputs::new(0.02, 0.01, 0.0083, 5.0, 1.0).unwrap();
    let quad = bachelier_quadrature_price(0.02, 0.01, 0.0083, 5.0, 1.0, PayoffKind::Call);
    out.push(CheckResult::upper(
        "oracle_vanilla_vs_quadrature",
        rel_err(bachelier_vanilla(&inputs, OptionKind::Call), quad),
        1e-12,
    ));

    // Quadratic-swap convergence: relative error vs the exact second moment
    // shrinks ~4x as ν²T halves, and stays under 6% at ν²T = 0.6.
    let nu = 0.335;
    let alpha = 0.0083;
    let params = SabrParams::new(alpha, nu, 0.23).unwrap();
    let point = SlvPoint::normal_sabr(&params);
    let err_at = |x: f64| -> f64 {
        let t = x / (nu * nu);
        let approx = quadratic_slv(&point, 0.02, 0.02, t, 1.0, QuadKind::Swap)
            .unwrap()
            .value;
        let exact = exact_quadratic_swap_normal_sabr(0.02, 0.02, alpha, nu, t).unwrap();
        (approx - exact).abs() / exact
    };
    let (e06, e03, e015) = (err_at(0.6), err_at(0.3), err_at(0.15));
    out.push(CheckResult::upper("oracle_swap_error_at_nu2t_0p6", e06, 0.06));
    out.push(CheckResult::upper(
        "oracle_swap_halving_ratio_hi",
        (e06 / e03 - 4.0).abs(),
        0.5,
    ));
    out.push(CheckResult::upper(
        "oracle_swap_halving_ratio_lo",
        (e03 / e015 - 4.0).abs(),
        0.5,
    ));

    // Replication of the quadratic call under Bachelier.
    let (f0, k, sigma, t) = (0.02, 0.02, 0.0083, 5.0);
    let closed = bachelier_quadratic(
        &BachelierInputs::new(f0, k, sigma, t, 1.0).unwrap(),
        QuadKind::Call,
    );
    let pricer = |kp: f64| {
        bachelier_vanilla(
            &BachelierInputs::new(f0, kp, sigma, t, 1.0).unwrap(),
            OptionKind::Call,
        )
    };
    let hi = k + 12.0 * sigma * t.sqrt();
    let err_n = |n: usize| -> f64 {
        let grid = StrikeGrid::new(k, hi, n).unwrap();
        let r = replicate_quadratic_call(pricer, k, &grid).unwrap();
        (r.value - closed).abs() / closed
    };
    let e2000 = err_n(2000);
    out.push(CheckResult::upper("oracle_replication_n2000", e2000, 1e-6));
    // halving the step (n - 1 intervals doubled) cuts the error ~4x
    let e_halved = err_n(3999);
    out.push(CheckResult::upper(
        "oracle_replication_halving_ratio",
        (e2000 / e_halved - 4.0).abs(),
        1.0,
    ));

    out
}

/// Benchmark band: expansion call and quadratic call against Monte Carlo
/// across the three calibrated sets, five strikes each.
pub fn figure_band_suite(seed: u64, n_paths: usize, steps_per_year: usize) -> Vec<CheckResult> {
    let mut out = Vec::new();
    let forward = 0.02;
    for (label, params, expiry) in benchmark_sets() {
        let cfg = McConfig {
            n_paths,
            n_steps: (steps_per_year as f64 * expiry).ceil() as usize,
            seed,
            scheme: crate::monte_carlo::McScheme::LogEulerVol,
            antithetic: true,
        };
        let model = ModelSpec::NormalSabr { params, f0: forward };
        let samples = simulate_terminal(&model, expiry, &cfg).expect("simulation failed");
        let scale = params.alpha() * expiry.sqrt();
        for j in -2..=2 {
            let strike = forward + j as f64 * scale;
            let y_abs = (j as f64).abs();

            let mc_call = price_payoff(&samples, PayoffKind::Call, strike, 1.0).unwrap();
            let watanabe = call_normal_sabr(&params, forward, strike, expiry, 1.0)
                .unwrap()
                .value;
            let hagan_vol = hagan_normal_vol(&params, forward, strike, expiry).unwrap();
            let hagan_price = bachelier_vanilla(
                &BachelierInputs::new(forward, strike, hagan_vol, expiry, 1.0).unwrap(),
                OptionKind::Call,
            );
            let call_bound = (0.2 * (hagan_price - mc_call.mean).abs()
                + 3.0 * mc_call.std_error)
                .max(3.0 * mc_call.std_error);
            out.push(CheckResult::upper(
                format!("band_call_{label}_k{j:+}"),
                (watanabe - mc_call.mean).abs(),
                call_bound,
            ));

            let mc_quad = price_payoff(&samples, PayoffKind::QuadCall, strike, 1.0).unwrap();
            let quad = quadratic_normal_sabr(&params, forward, strike, expiry, 1.0, QuadKind::Call)
                .unwrap()
                .value;
            let widen = 0.01 * (y_abs - 1.0).max(0.0);
            let quad_bound = 5.0 * mc_quad.std_error + (0.02 + widen) * mc_quad.mean.abs();
            out.push(CheckResult::upper(
                format!("band_quad_{label}_k{j:+}"),
                (quad - mc_quad.mean).abs(),
                quad_bound,
            ));
        }
    }
    out
}

/// CMS assembly: analytic-backed adjustments against the Monte Carlo of the
/// same affine payoff expressions under Bachelier swap-rate dynamics, the
/// identity-mapping zero, and the swaplet expansion against the exact second
/// moment.
pub fn cms_assembly_suite(seed: u64, n_paths: usize) -> Vec<CheckResult> {
    use crate::cms::{ca_caplet, ca_floorlet, ca_swaplet, CmsSetup, LinearMapping};

    let mut out = Vec::new();
    let setup = CmsSetup::new(0.02, 8.0, 0.82, 5.0).unwrap();
    let map = LinearMapping::new(1.01, 1.2).unwrap();
    let sigma = 0.0083;

    let cfg = McConfig {
        n_paths,
        n_steps: (64.0 * setup.t_fix) as usize,
        seed,
        scheme: crate::monte_carlo::McScheme::LogEulerVol,
        antithetic: true,
    };
    let frozen = SabrParams::new(sigma, 0.0, 0.0).unwrap();
    let model = ModelSpec::NormalSabr {
        params: frozen,
        f0: setup.s0,
    };
    let samples = simulate_terminal(&model, setup.t_fix, &cfg).expect("simulation failed");

    for (idx, strike) in [0.015, 0.02, 0.025].into_iter().enumerate() {
        let inputs = BachelierInputs::new(setup.s0, strike, sigma, setup.t_fix, 1.0).unwrap();
        let vc = bachelier_vanilla(&inputs, OptionKind::Call);
        let vp = bachelier_vanilla(&inputs, OptionKind::Put);
        let vqc = bachelier_quadratic(&inputs, QuadKind::Call);
        let vqp = bachelier_quadratic(&inputs, QuadKind::Put);
        let vqs = bachelier_quadratic(&inputs, QuadKind::Swap);

        let analytic = [
            ca_caplet(&setup, &map, strike, vc, vqc),
            ca_floorlet(&setup, &map, strike, vp, vqp),
            ca_swaplet(&setup, &map, strike, vqs),
        ];
        // Monte Carlo of the same affine conditional-expectation expressions,
        // path by path so the standard error reflects the combination.
        let (m0m1, dmm1) = (map.m0 - 1.0, map.dm - 1.0);
        type Payoff = Box<dyn Fn(f64) -> f64>;
        let mc_exprs: [(&str, Payoff); 3] = [
            (
                "caplet",
                Box::new(move |f: f64| {
                    let c = (f - strike).max(0.0);
                    m0m1 * c + dmm1 * c * c
                }),
            ),
            (
                "floorlet",
                Box::new(move |f: f64| {
                    let p = (strike - f).max(0.0);
                    m0m1 * p - dmm1 * p * p
                }),
            ),
            (
                "swaplet",
                Box::new(move |f: f64| {
                    let d = f - strike;
                    m0m1 * (setup.s0 - strike) + dmm1 * d * d
                }),
            ),
        ];
        for (leg_idx, (leg, payoff)) in mc_exprs.into_iter().enumerate() {
            let est = estimate_fn(&samples, payoff, 1.0).unwrap();
            out.push(CheckResult::upper(
                format!("cms_{leg}_vs_mc_k{idx}"),
                (analytic[leg_idx] - est.mean).abs(),
                3.0 * est.std_error.max(1e-18),
            ));
        }
    }

    // Identity mapping yields exactly zero.
    let id = LinearMapping::identity();
    let zero = ca_caplet(&setup, &id, 0.02, 1.0, 1.0).abs()
        + ca_floorlet(&setup, &id, 0.02, 1.0, 1.0).abs()
        + ca_swaplet(&setup, &id, 0.015, 1.0).abs();
    out.push(CheckResult::upper("cms_identity_mapping_zero", zero, 0.0));

    // Swaplet through the expansion vs the exact SABR second moment: the
    // difference is bounded by the swap-expansion error band.
    let (_, params, expiry) = benchmark_sets()[0];
    let point = SlvPoint::normal_sabr(&params);
    let vqs_expansion = quadratic_slv(&point, setup.s0, setup.s0, expiry, 1.0, QuadKind::Swap)
        .unwrap()
        .value;
    let vqs_exact =
        exact_quadratic_swap_normal_sabr(setup.s0, setup.s0, params.alpha(), params.nu(), expiry)
            .unwrap();
    let ca_e = ca_swaplet(&setup, &map, setup.s0, vqs_expansion);
    let ca_x = ca_swaplet(&setup, &map, setup.s0, vqs_exact);
    out.push(CheckResult::upper(
        "cms_swaplet_expansion_band",
        (ca_e - ca_x).abs(),
        0.06 * (map.dm - 1.0).abs() * vqs_exact,
    ));

    out
}
