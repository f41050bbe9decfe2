//! Shared test oracles, independent of the library's implementation paths:
//! an erf series / continued-fraction cdf, and composite-Simpson Gaussian
//! quadrature. Only `exp`, `ln` and arithmetic are used.
//!
//! Each integration test binary compiles this module separately and uses a
//! different subset of it.
#![allow(dead_code)]

/// 1/√(2π) recomputed locally (Newton for the square root).
pub fn inv_sqrt_2pi() -> f64 {
    let two_pi = 2.0 * std::f64::consts::PI;
    let mut r = 2.5_f64;
    for _ in 0..60 {
        r = 0.5 * (r + two_pi / r);
    }
    1.0 / r
}

fn sqrt_pi() -> f64 {
    let mut r = 1.8_f64;
    for _ in 0..60 {
        r = 0.5 * (r + std::f64::consts::PI / r);
    }
    r
}

/// erf by Taylor series; accurate for |z| ≲ 2 where cancellation is mild.
fn erf_series(z: f64) -> f64 {
    let mut sum = 0.0_f64;
    let mut term = z;
    for n in 0..120 {
        sum += term / (2.0 * n as f64 + 1.0);
        term *= -z * z / (n as f64 + 1.0);
        if term.abs() < 1e-22 {
            break;
        }
    }
    2.0 / sqrt_pi() * sum
}

/// erfc by the Laplace continued fraction (modified Lentz); used for z ≥ 1
/// where the 1 − erf route would cancel.
fn erfc_cf(z: f64) -> f64 {
    let tiny = 1e-300;
    let mut f = z.max(tiny);
    let mut c = f;
    let mut d = 0.0_f64;
    for n in 1..2000 {
        let a = n as f64 / 2.0;
        // b = z for every level
        d = z + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = z + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = 1.0 / d;
        let delta = c * d;
        f *= delta;
        if (delta - 1.0).abs() < 1e-17 {
            break;
        }
    }
    // f now approximates z + K(a_n / z), and erfc = e^{-z²}/√π / f
    (-z * z).exp() / (sqrt_pi() * f)
}

/// Independent standard normal cdf oracle, relative accuracy ~1e-15 in the
/// body and conditioning-limited in the tails.
pub fn oracle_cdf(x: f64) -> f64 {
    let z = x.abs() / std::f64::consts::SQRT_2;
    let tail = if z < 1.0 {
        0.5 * (1.0 - erf_series(z))
    } else {
        0.5 * erfc_cf(z)
    };
    if x >= 0.0 {
        1.0 - tail
    } else {
        tail
    }
}

/// Right tail Φ̄(x) without the 1 − Φ cancellation.
pub fn oracle_cdf_bar(x: f64) -> f64 {
    oracle_cdf(-x)
}

/// ∫ f(z)·φ(z) dz over [lo, hi] (clipped to ±12) by composite Simpson.
pub fn gauss_expect<F: Fn(f64) -> f64>(f: F, lo: f64, hi: f64) -> f64 {
    let a = lo.max(-12.0);
    let b = hi.min(12.0);
    if a >= b {
        return 0.0;
    }
    let n = 24_000usize; // even
    let h = (b - a) / n as f64;
    let w = inv_sqrt_2pi();
    let g = |z: f64| f(z) * (-0.5 * z * z).exp();
    let mut sum = g(a) + g(b);
    for i in 1..n {
        let z = a + h * i as f64;
        sum += if i % 2 == 1 { 4.0 * g(z) } else { 2.0 * g(z) };
    }
    sum * h / 3.0 * w
}

/// E[payoff(F)] for F ~ N(forward, sigma²·expiry), restricted to z ≥ z_lo
/// (or ≤ z_hi) so the integrand stays smooth inside the panel.
pub fn bachelier_expect<F: Fn(f64) -> f64>(
    payoff: F,
    forward: f64,
    sigma: f64,
    expiry: f64,
    z_lo: f64,
    z_hi: f64,
) -> f64 {
    let s = sigma * expiry.sqrt();
    gauss_expect(|z| payoff(forward + s * z), z_lo, z_hi)
}

pub fn assert_close(actual: f64, expected: f64, tol: f64, what: &str) {
    assert!(
        (actual - expected).abs() <= tol,
        "{what}: actual {actual:e}, expected {expected:e}, diff {:e} > tol {tol:e}",
        (actual - expected).abs()
    );
}
