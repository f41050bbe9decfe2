//! Monte Carlo engine statistics: moments, martingale property, variance
//! reduction, standard-error scaling, scheme behavior and the fixed-seed
//! regression snapshot.

mod common;

use std::sync::Arc;

use cmsquad::analytic::exact_quadratic_swap_normal_sabr;
use cmsquad::monte_carlo::{
    estimate_fn, estimate_g_functionals, price_payoff, simulate_terminal, McConfig, McScheme,
    ModelSpec, PayoffKind,
};
use cmsquad::validation::FUNCTIONAL_YS;
use cmsquad::watanabe::{g_functional_closed_forms, SabrParams, SlvPoint};

fn sabr_5y() -> SabrParams {
    SabrParams::new(0.0083, 0.335, 0.230).unwrap()
}

fn cfg(n_paths: usize, n_steps: usize, seed: u64) -> McConfig {
    McConfig {
        n_paths,
        n_steps,
        seed,
        scheme: McScheme::LogEulerVol,
        antithetic: true,
    }
}

#[test]
fn constant_vol_moments() {
    // ν = 0: terminal mean F₀ and variance α²T, each within 3 SE. Plain
    // sampling here: antithetic pairs average to F₀ identically and leave
    // no standard error to test against.
    let params = SabrParams::new(0.0083, 0.0, 0.0).unwrap();
    let model = ModelSpec::NormalSabr { params, f0: 0.02 };
    let t = 5.0;
    let samples =
        simulate_terminal(&model, t, &cfg(200_000, 64, 11).with_antithetic(false)).unwrap();
    let mean = estimate_fn(&samples, |f| f, 1.0).unwrap();
    assert!(
        (mean.mean - 0.02).abs() < 3.0 * mean.std_error,
        "mean {} vs 0.02 (se {})",
        mean.mean,
        mean.std_error
    );
    let var = estimate_fn(&samples, |f| (f - 0.02) * (f - 0.02), 1.0).unwrap();
    let target = 0.0083 * 0.0083 * t;
    assert!(
        (var.mean - target).abs() < 3.0 * var.std_error,
        "variance {} vs {target} (se {})",
        var.mean,
        var.std_error
    );
    // at-the-money quadratic call is half the second moment
    let qcall = price_payoff(&samples, PayoffKind::QuadCall, 0.02, 1.0).unwrap();
    assert!(
        (qcall.mean - 0.5 * target).abs() < 3.0 * qcall.std_error,
        "atm qcall {} vs {} (se {})",
        qcall.mean,
        0.5 * target,
        qcall.std_error
    );
}

#[test]
fn martingale_under_stochastic_vol() {
    let model = ModelSpec::NormalSabr {
        params: sabr_5y(),
        f0: 0.02,
    };
    let samples = simulate_terminal(&model, 5.0, &cfg(400_000, 320, 13)).unwrap();
    let mean = estimate_fn(&samples, |f| f, 1.0).unwrap();
    assert!(
        (mean.mean - 0.02).abs() < 3.0 * mean.std_error,
        "drift detected: {} (se {})",
        mean.mean,
        mean.std_error
    );
}

#[test]
fn second_moment_matches_exact_swap() {
    let params = sabr_5y();
    let model = ModelSpec::NormalSabr { params, f0: 0.02 };
    let samples = simulate_terminal(&model, 5.0, &cfg(400_000, 320, 19)).unwrap();
    let est = estimate_fn(&samples, |f| (f - 0.02) * (f - 0.02), 1.0).unwrap();
    let exact = exact_quadratic_swap_normal_sabr(0.02, 0.02, 0.0083, 0.335, 5.0).unwrap();
    assert!(
        (est.mean - exact).abs() < 3.0 * est.std_error,
        "second moment {} vs exact {exact} (se {})",
        est.mean,
        est.std_error
    );
}

#[test]
fn antithetic_does_not_hurt_monotone_payoffs() {
    // SE with antithetic pairing at the same total path budget stays within
    // 5% of (and usually well below) the plain-sampling SE.
    let model = ModelSpec::NormalSabr {
        params: sabr_5y(),
        f0: 0.02,
    };
    let t = 5.0;
    let n = 200_000;
    let anti = simulate_terminal(&model, t, &cfg(n, 80, 23)).unwrap();
    let plain = simulate_terminal(&model, t, &cfg(n, 80, 23).with_antithetic(false)).unwrap();
    let se_anti = price_payoff(&anti, PayoffKind::Call, 0.02, 1.0).unwrap().std_error;
    let se_plain = price_payoff(&plain, PayoffKind::Call, 0.02, 1.0)
        .unwrap()
        .std_error;
    assert!(
        se_anti <= 1.05 * se_plain,
        "antithetic SE {se_anti} vs plain {se_plain}"
    );
}

#[test]
fn standard_error_halves_when_paths_quadruple() {
    let model = ModelSpec::NormalSabr {
        params: sabr_5y(),
        f0: 0.02,
    };
    let t = 5.0;
    let small = simulate_terminal(&model, t, &cfg(50_000, 80, 29)).unwrap();
    let large = simulate_terminal(&model, t, &cfg(200_000, 80, 31)).unwrap();
    let se_small = price_payoff(&small, PayoffKind::Call, 0.02, 1.0)
        .unwrap()
        .std_error;
    let se_large = price_payoff(&large, PayoffKind::Call, 0.02, 1.0)
        .unwrap()
        .std_error;
    let ratio = se_large / se_small;
    assert!(
        (ratio - 0.5).abs() <= 0.1,
        "quadrupling paths gave SE ratio {ratio}, expected 0.5 ± 0.1"
    );
}

#[test]
fn euler_scheme_agrees_with_exact_vol_stepping_at_fine_steps() {
    let model = ModelSpec::NormalSabr {
        params: sabr_5y(),
        f0: 0.02,
    };
    let t = 5.0;
    let exact_step = simulate_terminal(&model, t, &cfg(200_000, 640, 37)).unwrap();
    let euler = simulate_terminal(
        &model,
        t,
        &cfg(200_000, 640, 37).with_scheme(McScheme::Euler),
    )
    .unwrap();
    let a = price_payoff(&exact_step, PayoffKind::Call, 0.02, 1.0).unwrap();
    let b = price_payoff(&euler, PayoffKind::Call, 0.02, 1.0).unwrap();
    // same driving noise, different vol discretization: difference is the
    // Euler weak error, far below a standard error at 128 steps/year
    assert!(
        (a.mean - b.mean).abs() < 3.0 * a.std_error.max(b.std_error),
        "schemes disagree: {} vs {}",
        a.mean,
        b.mean
    );
}

#[test]
fn slv_with_backbone_function_is_a_martingale() {
    let params = sabr_5y();
    let f0 = 0.02;
    let c: cmsquad::monte_carlo::VolFn =
        Arc::new(move |f: f64| (1.0 + 0.5 * (f - 0.02)).max(0.2));
    let model = ModelSpec::Slv { c, params, f0 };
    let samples = simulate_terminal(&model, 5.0, &cfg(200_000, 320, 41)).unwrap();
    let mean = estimate_fn(&samples, |f| f, 1.0).unwrap();
    assert!(
        (mean.mean - f0).abs() < 3.0 * mean.std_error,
        "slv drift: {} (se {})",
        mean.mean,
        mean.std_error
    );
}

#[test]
fn regression_snapshot_10y_offset_call() {
    // Fixed-seed oracle snapshot: 10y parameters, K = F₀ + α√T, seed 42,
    // 200k antithetic paths at 64 steps/year.
    #[allow(clippy::excessive_precision)]
    const PINNED_MEAN: f64 = 3.098_173_237_682_870_0e-3;
    #[allow(clippy::excessive_precision)]
    const PINNED_SE: f64 = 2.564_473_085_106_314_1e-5;
    let params = SabrParams::new(0.0075, 0.243, 0.235).unwrap();
    let t = 10.0_f64;
    let k = 0.02 + params.alpha() * t.sqrt();
    let model = ModelSpec::NormalSabr { params, f0: 0.02 };
    let samples = simulate_terminal(&model, t, &cfg(200_000, 640, 42)).unwrap();
    let est = price_payoff(&samples, PayoffKind::Call, k, 1.0).unwrap();
    assert!(
        (est.mean - PINNED_MEAN).abs() < 1e-12,
        "snapshot drifted: {:e} vs {PINNED_MEAN:e}",
        est.mean
    );
    assert!((est.std_error - PINNED_SE).abs() < 1e-12);
    assert_eq!(est.n_paths, 200_000);
    assert_eq!(est.seed, 42);
}

#[test]
fn results_independent_of_worker_count() {
    // chunked streams + fixed aggregation order: the estimate is bitwise
    // stable no matter how many threads run the chunks
    let model = ModelSpec::NormalSabr {
        params: sabr_5y(),
        f0: 0.02,
    };
    let config = cfg(40_000, 64, 47);
    let run_with = |threads: usize| {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap();
        pool.install(|| {
            let samples = simulate_terminal(&model, 5.0, &config).unwrap();
            price_payoff(&samples, PayoffKind::QuadCall, 0.02, 1.0).unwrap()
        })
    };
    let single = run_with(1);
    let multi = run_with(4);
    assert_eq!(single.mean.to_bits(), multi.mean.to_bits());
    assert_eq!(single.std_error.to_bits(), multi.std_error.to_bits());
}

#[test]
fn functional_discretization_bias_is_below_noise() {
    // left-point sums: halving the step moves the estimates by less than
    // the joint statistical noise at this path count
    let point = SlvPoint::normal_sabr(&sabr_5y());
    let t = 5.0;
    let at_steps = |n_steps: usize, seed: u64| {
        let cfg = McConfig {
            n_paths: 150_000,
            n_steps,
            seed,
            scheme: McScheme::LogEulerVol,
            antithetic: false,
        };
        estimate_g_functionals(&point, t, &[0.0], &cfg).unwrap().remove(0)
    };
    let coarse = at_steps(1280, 53); // 256 steps/year
    let fine = at_steps(2560, 59); // 512 steps/year
    for (name, a, b) in [
        ("payoff_g2", coarse.payoff_g2, fine.payoff_g2),
        ("payoff_g3", coarse.payoff_g3, fine.payoff_g3),
        ("indicator_g2_sq", coarse.indicator_g2_sq, fine.indicator_g2_sq),
    ] {
        let joint_se = (a.std_error * a.std_error + b.std_error * b.std_error).sqrt();
        assert!(
            (a.mean - b.mean).abs() <= 3.0 * joint_se,
            "{name}: step-halving moved the estimate by more than noise: \
             {} vs {} (joint se {})",
            a.mean,
            b.mean,
            joint_se
        );
    }
}

#[test]
fn functional_estimates_match_closed_forms_reduced_size() {
    // reduced-path version of the appendix check: 100k paths, 512 steps/year
    let point = SlvPoint::normal_sabr(&sabr_5y());
    let t = 5.0;
    let cfg = McConfig {
        n_paths: 100_000,
        n_steps: 2560,
        seed: 43,
        scheme: McScheme::LogEulerVol,
        antithetic: false,
    };
    let estimates = estimate_g_functionals(&point, t, &FUNCTIONAL_YS, &cfg).unwrap();
    for est in estimates {
        let closed = g_functional_closed_forms(&point, t, est.y);
        for (name, mc, exact) in [
            ("payoff_g2", est.payoff_g2, closed.payoff_g2),
            ("indicator_g2", est.indicator_g2, closed.indicator_g2),
            ("payoff_g3", est.payoff_g3, closed.payoff_g3),
            ("indicator_g2_sq", est.indicator_g2_sq, closed.indicator_g2_sq),
            ("quad_payoff_sq", est.quad_payoff_sq, closed.quad_payoff_sq),
        ] {
            assert!(
                (mc.mean - exact).abs() <= 3.0 * mc.std_error,
                "{name} at y={}: mc {} vs closed {exact} (se {})",
                est.y,
                mc.mean,
                mc.std_error
            );
        }
    }
}
