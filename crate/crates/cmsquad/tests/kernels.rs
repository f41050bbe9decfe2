//! Kernel-level oracle tests: the cdf against an independent
//! series/continued-fraction evaluation, and the payoff kernels against
//! Gaussian quadrature.

mod common;

use cmsquad::mathcore::{g_call, g_quad_call, g_quad_put, norm_cdf, norm_cdf_bar, norm_pdf};
use common::{assert_close, gauss_expect, inv_sqrt_2pi, oracle_cdf, oracle_cdf_bar};

#[test]
fn cdf_matches_series_and_continued_fraction_oracle() {
    // The body holds to ~1 ulp. In the tails both evaluations (and any f64
    // method) carry the conditioning of exp(−x²/2): rounding the argument
    // alone moves the value by ~x²/2·ε relative, so the tolerance widens
    // with x² at that rate.
    let mut worst: f64 = 0.0;
    for i in 0..=1600 {
        let x = -8.0 + i as f64 / 100.0;
        let lib = norm_cdf(x);
        let oracle = oracle_cdf(x);
        let rel = (lib - oracle).abs() / oracle.abs().max(1e-300);
        let tol = 4e-15 + 2.5e-16 * x * x;
        worst = worst.max(rel);
        assert!(
            rel < tol,
            "cdf mismatch at x={x}: lib={lib:e}, oracle={oracle:e}, rel={rel:e}"
        );
    }
    assert!(worst > 0.0, "grids should not be bitwise identical everywhere");
}

#[test]
fn cdf_series_anchor() {
    // frozen from the erf Taylor series oracle
    let lib = norm_cdf(0.53885);
    assert_close(lib, 0.705_004_820_018_712_7, 1e-15, "cdf(0.53885)");
    assert_close(lib, oracle_cdf(0.53885), 1e-15, "cdf(0.53885) vs live oracle");
}

#[test]
fn cdf_bar_deep_tail_vs_oracle() {
    for &x in &[4.0, 6.0, 10.0, 20.0] {
        let lib = norm_cdf_bar(x);
        let oracle = oracle_cdf_bar(x);
        let tol = (4e-15 + 2.5e-16 * x * x) * oracle;
        assert!(
            (lib - oracle).abs() < tol,
            "tail mismatch at {x}: {lib:e} vs {oracle:e}"
        );
    }
}

#[test]
fn pdf_independent_evaluation() {
    // e^{-1/2} by Taylor and 1/√(2π) by Newton, frozen
    assert_close(norm_pdf(1.0), 2.419_707_245_191_432_8e-1, 5e-16, "pdf(1)");
    let mut e_half = 0.0_f64;
    let mut term = 1.0_f64;
    for n in 1..60 {
        e_half += term;
        term *= -0.5 / n as f64;
    }
    assert_close(norm_pdf(1.0), e_half * inv_sqrt_2pi(), 5e-16, "pdf(1) live oracle");
}

#[test]
fn g_call_matches_quadrature() {
    // E[(Z − y)⁺], including the deep in-the-money anchor at y = -5
    for &y in &[-5.0, -2.0, -0.5, 0.0, 0.7, 2.0, 4.0] {
        let quad = gauss_expect(|z| z - y, y, 12.0);
        assert_close(g_call(y), quad, 1e-12, &format!("g_call({y})"));
    }
    let anchor = 5.0 + norm_pdf(5.0) - 5.0 * norm_cdf(-5.0);
    assert_close(g_call(-5.0), anchor, 1e-13, "g_call(-5) closed identity");
}

#[test]
fn quad_kernels_match_quadrature_across_the_grid() {
    // E[((Z − y)⁺)²] against quadrature at 1e-10 over y ∈ [-6, 6]
    let mut y = -6.0;
    while y <= 6.0 {
        let quad = gauss_expect(|z| (z - y) * (z - y), y, 12.0);
        assert_close(g_quad_call(y), quad, 1e-10, &format!("g_quad_call({y})"));
        let quad_put = gauss_expect(|z| (y - z) * (y - z), -12.0, y);
        assert_close(g_quad_put(y), quad_put, 1e-10, &format!("g_quad_put({y})"));
        y += 0.25;
    }
}

#[test]
fn quad_kernel_anchors() {
    let call_at_1 = gauss_expect(|z| (z - 1.0) * (z - 1.0), 1.0, 12.0);
    assert_close(g_quad_call(1.0), call_at_1, 1e-12, "g_quad_call(1)");
    let put_at_m1 = gauss_expect(|z| (-1.0 - z) * (-1.0 - z), -12.0, -1.0);
    assert_close(g_quad_put(-1.0), put_at_m1, 1e-12, "g_quad_put(-1)");
}
