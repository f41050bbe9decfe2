//! Correlated two-factor Monte Carlo: terminal simulation of the SABR/LV/SLV
//! dynamics, payoff estimation, and pathwise estimation of the
//! iterated-integral functionals behind the expansion coefficients.
//!
//! Determinism contract: paths are partitioned into fixed-size chunks, each
//! chunk drawing from its own deterministically derived stream; partial
//! results are combined in chunk order. Estimates are therefore bit-identical
//! for a given `(seed, config, model)` regardless of how many worker threads
//! run the chunks.

use std::sync::{Arc, Mutex};

use rand::SeedableRng;
use rand_distr::{Distribution, StandardNormal};
use rand_xoshiro::Xoshiro256PlusPlus;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{require_positive, PricingError, Result};
use crate::mathcore::norm_pdf;
use crate::watanabe::{SabrParams, SlvPoint};

/// Paths (or antithetic pairs) per random stream.
const CHUNK: usize = 4096;

/// Kernel bandwidth for the smoothed delta functional `E[δ(ĝ₁−y)ĝ₂²]`;
/// bias is O(h²) against statistical error O(1/√n).
pub const DELTA_BANDWIDTH: f64 = 0.1;

/// Discretization scheme for the volatility factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum McScheme {
    /// Plain Euler for both factors.
    Euler,
    /// Exact lognormal step for σ (the lognormal SDE integrates exactly),
    /// Euler for the forward with the step-start vol. Default.
    LogEulerVol,
}

/// Monte Carlo configuration.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McConfig {
    pub n_paths: usize,
    pub n_steps: usize,
    pub seed: u64,
    pub scheme: McScheme,
    pub antithetic: bool,
}

impl McConfig {
    pub fn new(n_paths: usize, n_steps: usize, seed: u64) -> Result<Self> {
        let cfg = McConfig {
            n_paths,
            n_steps,
            seed,
            scheme: McScheme::LogEulerVol,
            antithetic: true,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn with_antithetic(mut self, antithetic: bool) -> Self {
        self.antithetic = antithetic;
        self
    }

    pub fn with_scheme(mut self, scheme: McScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_paths < 2 {
            return Err(PricingError::invalid(format!(
                "n_paths must be >= 2, got {}",
                self.n_paths
            )));
        }
        if self.antithetic && !self.n_paths.is_multiple_of(2) {
            return Err(PricingError::invalid(format!(
                "antithetic sampling requires an even path count, got {}",
                self.n_paths
            )));
        }
        if self.n_steps == 0 {
            return Err(PricingError::invalid("n_steps must be >= 1"));
        }
        Ok(())
    }
}

/// Payoffs priced off terminal samples.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PayoffKind {
    Call,
    Put,
    QuadCall,
    QuadPut,
    QuadSwap,
}

impl PayoffKind {
    pub fn evaluate(self, terminal: f64, strike: f64) -> f64 {
        let d = terminal - strike;
        match self {
            PayoffKind::Call => d.max(0.0),
            PayoffKind::Put => (-d).max(0.0),
            PayoffKind::QuadCall => d.max(0.0) * d.max(0.0),
            PayoffKind::QuadPut => (-d).max(0.0) * (-d).max(0.0),
            PayoffKind::QuadSwap => d * d,
        }
    }

    pub fn is_quadratic(self) -> bool {
        matches!(
            self,
            PayoffKind::QuadCall | PayoffKind::QuadPut | PayoffKind::QuadSwap
        )
    }
}

/// Monte Carlo estimate: sample mean, standard error and provenance.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub seed: u64,
}

/// Positive volatility function handle for the LV/SLV backbones.
pub type VolFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Model to simulate.
#[derive(Clone)]
pub enum ModelSpec {
    /// `dF = σ_t dW`, `dσ = νσ dB`.
    NormalSabr { params: SabrParams, f0: f64 },
    /// `dF = σ(F) dW`.
    LocalVol { sigma: VolFn, f0: f64 },
    /// `dF = C(F)σ_t dW`, `dσ = νσ dB`.
    Slv {
        c: VolFn,
        params: SabrParams,
        f0: f64,
    },
}

impl std::fmt::Debug for ModelSpec {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ModelSpec::NormalSabr { params, f0 } => f
                .debug_struct("NormalSabr")
                .field("params", params)
                .field("f0", f0)
                .finish(),
            ModelSpec::LocalVol { f0, .. } => {
                f.debug_struct("LocalVol").field("f0", f0).finish()
            }
            ModelSpec::Slv { params, f0, .. } => f
                .debug_struct("Slv")
                .field("params", params)
                .field("f0", f0)
                .finish(),
        }
    }
}

/// Terminal forward samples. With antithetic sampling on, entries `2i` and
/// `2i+1` form a mirrored pair and estimators average pairs first.
#[derive(Debug, Clone)]
pub struct TerminalSamples {
    values: Vec<f64>,
    antithetic: bool,
    seed: u64,
}

impl TerminalSamples {
    pub fn values(&self) -> &[f64] {
        &self.values
    }
    pub fn antithetic(&self) -> bool {
        self.antithetic
    }
    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// Build directly from samples (used by tests and the CMS oracles).
    pub fn from_values(values: Vec<f64>, antithetic: bool, seed: u64) -> Self {
        TerminalSamples {
            values,
            antithetic,
            seed,
        }
    }
}

fn stream_rng(seed: u64, chunk: u64) -> Xoshiro256PlusPlus {
    // seed_from_u64 runs SplitMix64 internally; offsetting by a golden-ratio
    // multiple gives well separated streams per chunk.
    Xoshiro256PlusPlus::seed_from_u64(seed ^ (chunk + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15))
}

struct PathFailure {
    path: usize,
    step: usize,
    message: String,
}

fn record_failure(slot: &Mutex<Option<PathFailure>>, failure: PathFailure) {
    let mut guard = slot.lock().expect("failure slot poisoned");
    let replace = match guard.as_ref() {
        None => true,
        Some(existing) => failure.path < existing.path,
    };
    if replace {
        *guard = Some(failure);
    }
}

/// Simulate terminal forwards `F_T` under `model`.
pub fn simulate_terminal(model: &ModelSpec, expiry: f64, cfg: &McConfig) -> Result<TerminalSamples> {
    cfg.validate()?;
    require_positive(expiry, "expiry")?;

    let dt = expiry / cfg.n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let per_unit = if cfg.antithetic { 2 } else { 1 };

    let mut values = vec![0.0_f64; cfg.n_paths];
    let failure: Mutex<Option<PathFailure>> = Mutex::new(None);

    values
        .par_chunks_mut(CHUNK * per_unit)
        .enumerate()
        .for_each(|(chunk_idx, out)| {
            let mut rng = stream_rng(cfg.seed, chunk_idx as u64);
            let unit_base = chunk_idx * CHUNK;
            let units_here = out.len() / per_unit;
            for u in 0..units_here {
                let path_idx = (unit_base + u) * per_unit;
                match simulate_one_unit(model, cfg, dt, sqrt_dt, &mut rng, path_idx) {
                    Ok((main, anti)) => {
                        out[u * per_unit] = main;
                        if cfg.antithetic {
                            out[u * per_unit + 1] = anti;
                        }
                    }
                    Err(f) => record_failure(&failure, f),
                }
            }
        });

    if let Some(f) = failure.into_inner().expect("failure slot poisoned") {
        return Err(PricingError::McPathFailure {
            path: f.path,
            step: f.step,
            message: f.message,
        });
    }

    Ok(TerminalSamples {
        values,
        antithetic: cfg.antithetic,
        seed: cfg.seed,
    })
}

/// Advance one path (and its antithetic mirror when enabled) to expiry.
fn simulate_one_unit(
    model: &ModelSpec,
    cfg: &McConfig,
    dt: f64,
    sqrt_dt: f64,
    rng: &mut Xoshiro256PlusPlus,
    path_idx: usize,
) -> std::result::Result<(f64, f64), PathFailure> {
    let fail = |step: usize, message: String| PathFailure {
        path: path_idx,
        step,
        message,
    };

    match model {
        ModelSpec::NormalSabr { params, f0 } => {
            let (rho, rho_hat, nu) = (params.rho(), params.rho_hat(), params.nu());
            let vol_drift = (-0.5 * nu * nu * dt).exp();
            let mut f_m = *f0;
            let mut s_m = params.alpha();
            let mut f_a = *f0;
            let mut s_a = params.alpha();
            for step in 0..cfg.n_steps {
                let zb: f64 = StandardNormal.sample(rng);
                let zp: f64 = StandardNormal.sample(rng);
                let dw = sqrt_dt * (rho * zb + rho_hat * zp);
                f_m += s_m * dw;
                if cfg.antithetic {
                    f_a -= s_a * dw;
                }
                match cfg.scheme {
                    McScheme::LogEulerVol => {
                        let e = (nu * sqrt_dt * zb).exp();
                        s_m *= vol_drift * e;
                        if cfg.antithetic {
                            s_a *= vol_drift / e;
                        }
                    }
                    McScheme::Euler => {
                        s_m *= 1.0 + nu * sqrt_dt * zb;
                        if cfg.antithetic {
                            s_a *= 1.0 - nu * sqrt_dt * zb;
                        }
                    }
                }
                if !f_m.is_finite() || !s_m.is_finite() {
                    return Err(fail(step, format!("state blew up: f={f_m}, sigma={s_m}")));
                }
            }
            Ok((f_m, f_a))
        }
        ModelSpec::LocalVol { sigma, f0 } => {
            let mut f_m = *f0;
            let mut f_a = *f0;
            for step in 0..cfg.n_steps {
                let z: f64 = StandardNormal.sample(rng);
                let _: f64 = StandardNormal.sample(rng); // keep the stream layout shared across models
                let v_m = sigma(f_m);
                if !(v_m.is_finite() && v_m > 0.0) {
                    return Err(fail(step, format!("vol function returned {v_m} at F={f_m}")));
                }
                f_m += v_m * sqrt_dt * z;
                if cfg.antithetic {
                    let v_a = sigma(f_a);
                    if !(v_a.is_finite() && v_a > 0.0) {
                        return Err(fail(step, format!("vol function returned {v_a} at F={f_a}")));
                    }
                    f_a -= v_a * sqrt_dt * z;
                }
                if !f_m.is_finite() {
                    return Err(fail(step, format!("state blew up: f={f_m}")));
                }
            }
            Ok((f_m, f_a))
        }
        ModelSpec::Slv { c, params, f0 } => {
            let (rho, rho_hat, nu) = (params.rho(), params.rho_hat(), params.nu());
            let vol_drift = (-0.5 * nu * nu * dt).exp();
            let mut f_m = *f0;
            let mut s_m = params.alpha();
            let mut f_a = *f0;
            let mut s_a = params.alpha();
            for step in 0..cfg.n_steps {
                let zb: f64 = StandardNormal.sample(rng);
                let zp: f64 = StandardNormal.sample(rng);
                let dw = sqrt_dt * (rho * zb + rho_hat * zp);
                let c_m = c(f_m);
                if !(c_m.is_finite() && c_m > 0.0) {
                    return Err(fail(step, format!("backbone returned {c_m} at F={f_m}")));
                }
                f_m += c_m * s_m * dw;
                if cfg.antithetic {
                    let c_a = c(f_a);
                    if !(c_a.is_finite() && c_a > 0.0) {
                        return Err(fail(step, format!("backbone returned {c_a} at F={f_a}")));
                    }
                    f_a -= c_a * s_a * dw;
                }
                match cfg.scheme {
                    McScheme::LogEulerVol => {
                        let e = (nu * sqrt_dt * zb).exp();
                        s_m *= vol_drift * e;
                        if cfg.antithetic {
                            s_a *= vol_drift / e;
                        }
                    }
                    McScheme::Euler => {
                        s_m *= 1.0 + nu * sqrt_dt * zb;
                        if cfg.antithetic {
                            s_a *= 1.0 - nu * sqrt_dt * zb;
                        }
                    }
                }
                if !f_m.is_finite() || !s_m.is_finite() {
                    return Err(fail(step, format!("state blew up: f={f_m}, sigma={s_m}")));
                }
            }
            Ok((f_m, f_a))
        }
    }
}

/// Estimate `E[g(F_T)]` over the samples (pair-averaged when antithetic),
/// discounted by `numeraire`.
pub fn estimate_fn<G>(samples: &TerminalSamples, payoff: G, numeraire: f64) -> Result<McEstimate>
where
    G: Fn(f64) -> f64,
{
    require_positive(numeraire, "numeraire")?;
    let per_unit = if samples.antithetic { 2 } else { 1 };
    let n = samples.values.len() / per_unit;
    if n < 2 {
        return Err(PricingError::invalid(
            "need at least two (pair-averaged) samples for a standard error",
        ));
    }

    let unit_value = |i: usize| -> f64 {
        if samples.antithetic {
            0.5 * (payoff(samples.values[2 * i]) + payoff(samples.values[2 * i + 1]))
        } else {
            payoff(samples.values[i])
        }
    };

    let mut sum = 0.0;
    for i in 0..n {
        sum += unit_value(i);
    }
    let mean = sum / n as f64;
    let mut m2 = 0.0;
    for i in 0..n {
        let d = unit_value(i) - mean;
        m2 += d * d;
    }
    let variance = m2 / (n as f64 - 1.0);
    Ok(McEstimate {
        mean: numeraire * mean,
        std_error: numeraire * (variance / n as f64).sqrt(),
        n_paths: samples.values.len(),
        seed: samples.seed,
    })
}

/// Discounted payoff estimate over terminal samples.
pub fn price_payoff(
    samples: &TerminalSamples,
    payoff: PayoffKind,
    strike: f64,
    numeraire: f64,
) -> Result<McEstimate> {
    estimate_fn(samples, |f| payoff.evaluate(f, strike), numeraire)
}

// ---------------------------------------------------------------------------
// Iterated-integral functionals
// ---------------------------------------------------------------------------

/// Monte Carlo estimates of the expansion functionals at one moneyness.
///
/// Mirrors [`crate::watanabe::GFunctionalValues`] field by field.
#[derive(Debug, Clone, Copy)]
pub struct GFunctionalEstimates {
    pub y: f64,
    pub payoff_g2: McEstimate,
    pub indicator_g2: McEstimate,
    pub payoff_g3: McEstimate,
    pub indicator_g3: McEstimate,
    pub indicator_g2_sq: McEstimate,
    pub delta_g2_sq: McEstimate,
    pub quad_payoff_sq: McEstimate,
}

const N_FUNCTIONALS: usize = 7;

#[derive(Clone, Copy, Default)]
struct RunningStat {
    n: u64,
    mean: f64,
    m2: f64,
}

impl RunningStat {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(&mut self, other: &RunningStat) {
        if other.n == 0 {
            return;
        }
        if self.n == 0 {
            *self = *other;
            return;
        }
        let n1 = self.n as f64;
        let n2 = other.n as f64;
        let delta = other.mean - self.mean;
        let total = n1 + n2;
        self.mean += delta * n2 / total;
        self.m2 += other.m2 + delta * delta * n1 * n2 / total;
        self.n += other.n;
    }

    fn estimate(&self, n_paths: usize, seed: u64) -> McEstimate {
        let n = self.n as f64;
        McEstimate {
            mean: self.mean,
            std_error: (self.m2 / (n - 1.0) / n).sqrt(),
            n_paths,
            seed,
        }
    }
}

/// Pathwise simulation of `(ĝ₁, ĝ₂, ĝ₃)` and the expansion functionals at
/// each moneyness in `ys`, for the SLV coefficient set (normal SABR via
/// [`SlvPoint::normal_sabr`]).
///
/// The iterated integrals are discretized with left-point Itô sums over
/// `cfg.n_steps`; the scheme flag is ignored (the drivers are exact Brownian
/// increments). The delta functional uses a Gaussian kernel of bandwidth
/// [`DELTA_BANDWIDTH`].
pub fn estimate_g_functionals(
    point: &SlvPoint,
    expiry: f64,
    ys: &[f64],
    cfg: &McConfig,
) -> Result<Vec<GFunctionalEstimates>> {
    cfg.validate()?;
    require_positive(expiry, "expiry")?;
    if ys.is_empty() {
        return Err(PricingError::invalid("ys must be non-empty"));
    }

    let dt = expiry / cfg.n_steps as f64;
    let sqrt_dt = dt.sqrt();
    let sqrt_t = expiry.sqrt();
    let per_unit = if cfg.antithetic { 2 } else { 1 };
    let n_units = cfg.n_paths / per_unit;
    let n_chunks = n_units.div_ceil(CHUNK);

    let (rho, rho_hat, nu) = (point.rho(), point.rho_hat_sq().sqrt(), point.nu());
    let alpha_dc = point.alpha() * point.dc();
    let half_curv = 0.5 * point.alpha() * point.alpha() * point.d2c() * point.c0();
    let dc_sq = point.alpha() * point.alpha() * point.dc() * point.dc();
    let nu_sq = nu * nu;
    let anc = point.alpha() * nu * point.dc();

    let chunk_stats: Vec<Vec<[RunningStat; N_FUNCTIONALS]>> = (0..n_chunks)
        .into_par_iter()
        .map(|chunk_idx| {
            let mut rng = stream_rng(cfg.seed, chunk_idx as u64);
            let units_here = CHUNK.min(n_units - chunk_idx * CHUNK);
            let mut stats = vec![[RunningStat::default(); N_FUNCTIONALS]; ys.len()];
            let mut g_pair = [[0.0_f64; 3]; 2];
            for _ in 0..units_here {
                // Draw the increments once; the antithetic mirror runs in
                // lockstep on the negated increments.
                let mut w = [0.0_f64; 2];
                let mut b = [0.0_f64; 2];
                let mut i11 = [0.0_f64; 2];
                let mut i111 = [0.0_f64; 2];
                let mut ibw = [0.0_f64; 2];
                let mut j1 = [0.0_f64; 2];
                let mut j2 = [0.0_f64; 2];
                let mut j3 = [0.0_f64; 2];
                let mut j4 = [0.0_f64; 2];
                let mut t = 0.0_f64;
                for _ in 0..cfg.n_steps {
                    let zb: f64 = StandardNormal.sample(&mut rng);
                    let zp: f64 = StandardNormal.sample(&mut rng);
                    let db0 = sqrt_dt * zb;
                    let dw0 = sqrt_dt * (rho * zb + rho_hat * zp);
                    for half in 0..per_unit {
                        let sgn = if half == 0 { 1.0 } else { -1.0 };
                        let (db, dw) = (sgn * db0, sgn * dw0);
                        j1[half] += 0.5 * (b[half] * b[half] - t) * dw;
                        j2[half] += b[half] * w[half] * dw;
                        j3[half] += w[half] * w[half] * dw;
                        j4[half] += ibw[half] * dw;
                        i11[half] += w[half] * dw;
                        i111[half] += 0.5 * (w[half] * w[half] - t) * dw;
                        ibw[half] += b[half] * dw;
                        b[half] += db;
                        w[half] += dw;
                    }
                    t += dt;
                }
                for half in 0..per_unit {
                    let g1 = w[half] / sqrt_t;
                    let g2 = (alpha_dc * i11[half] + nu * ibw[half]) / sqrt_t;
                    let g3 = (nu_sq * j1[half]
                        + anc * (j2[half] + j4[half])
                        + half_curv * j3[half]
                        + dc_sq * i111[half])
                        / sqrt_t;
                    g_pair[half] = [g1, g2, g3];
                }
                for (yi, &y) in ys.iter().enumerate() {
                    let mut f = [0.0_f64; N_FUNCTIONALS];
                    for g in g_pair.iter().take(per_unit) {
                        let [g1, g2, g3] = *g;
                        let payoff = (g1 - y).max(0.0);
                        let ind = if g1 > y { 1.0 } else { 0.0 };
                        let kernel =
                            norm_pdf((g1 - y) / DELTA_BANDWIDTH) / DELTA_BANDWIDTH;
                        f[0] += payoff * g2;
                        f[1] += ind * g2;
                        f[2] += payoff * g3;
                        f[3] += ind * g3;
                        f[4] += ind * g2 * g2;
                        f[5] += kernel * g2 * g2;
                        f[6] += payoff * payoff;
                    }
                    let scale = 1.0 / per_unit as f64;
                    for (k, stat) in stats[yi].iter_mut().enumerate() {
                        stat.push(f[k] * scale);
                    }
                }
            }
            stats
        })
        .collect();

    let mut merged = vec![[RunningStat::default(); N_FUNCTIONALS]; ys.len()];
    for chunk in &chunk_stats {
        for (yi, per_y) in chunk.iter().enumerate() {
            for (k, stat) in per_y.iter().enumerate() {
                merged[yi][k].merge(stat);
            }
        }
    }

    Ok(ys
        .iter()
        .enumerate()
        .map(|(yi, &y)| {
            let s = &merged[yi];
            let e = |k: usize| s[k].estimate(cfg.n_paths, cfg.seed);
            GFunctionalEstimates {
                y,
                payoff_g2: e(0),
                indicator_g2: e(1),
                payoff_g3: e(2),
                indicator_g3: e(3),
                indicator_g2_sq: e(4),
                delta_g2_sq: e(5),
                quad_payoff_sq: e(6),
            }
        })
        .collect())
}

/// Convenience wrapper for the plain normal SABR functionals.
pub fn estimate_g_functionals_normal_sabr(
    params: &SabrParams,
    expiry: f64,
    ys: &[f64],
    cfg: &McConfig,
) -> Result<Vec<GFunctionalEstimates>> {
    estimate_g_functionals(&SlvPoint::normal_sabr(params), expiry, ys, cfg)
}
