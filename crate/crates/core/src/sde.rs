//! Joint simulation of the dividend GBM and the state process Y on one
//! Brownian driver, and Monte Carlo checks of the expectation identities.

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::equilibrium::{g_prime, g_second, g_value, rate_and_mpr, EconomyParams, Equilibrium, RESIDUAL_MARGINS};
use crate::error::{Error, Result};
use crate::ode::fmt17;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimConfig {
    pub dt: f64,
    pub horizon: f64,
    pub n_paths: usize,
    pub seed: u64,
    /// Y is kept inside [ε_c, 1 − ε_c]
    pub clamp_margin: f64,
    /// Gaussian draws summed into each step's increment; a run with step
    /// 2·dt and 2 draws uses the same noise as a run with dt and 1 draw.
    pub draws_per_step: u32,
    /// keep every k-th state of each path for dumping (0 = none)
    pub record_every: usize,
    /// also run a 2·dt chain on the same noise and report 2·fine − coarse
    pub richardson: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            dt: 0.1,
            horizon: 300.0,
            n_paths: 100_000,
            seed: 0x5eed_2024,
            clamp_margin: 1e-10,
            draws_per_step: 1,
            record_every: 0,
            richardson: true,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::InvalidParam { name: "dt", value: self.dt, reason: "must be > 0" });
        }
        if !(self.horizon >= self.dt && self.horizon.is_finite()) {
            return Err(Error::InvalidParam { name: "horizon", value: self.horizon, reason: "must be >= dt" });
        }
        if self.n_paths < 1 {
            return Err(Error::InvalidParam { name: "n_paths", value: 0.0, reason: "must be >= 1" });
        }
        if !(self.clamp_margin > 0.0 && self.clamp_margin <= 1e-4) {
            return Err(Error::InvalidParam { name: "clamp_margin", value: self.clamp_margin, reason: "must lie in (0, 1e-4]" });
        }
        if self.draws_per_step < 1 {
            return Err(Error::InvalidParam { name: "draws_per_step", value: 0.0, reason: "must be >= 1" });
        }
        Ok(())
    }

    /// Step count (even when extrapolating) and the step that divides T.
    fn steps(&self) -> (usize, f64) {
        let mut n = (self.horizon / self.dt).round().max(1.0) as usize;
        if self.richardson && n % 2 == 1 {
            n += 1;
        }
        (n, self.horizon / n as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub std_error: f64,
    pub n_paths: usize,
    pub analytic: Option<f64>,
    pub z: Option<f64>,
}

impl McEstimate {
    pub fn from_samples(xs: &[f64], analytic: Option<f64>) -> Self {
        let n = xs.len();
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let std_error = (var / n as f64).sqrt();
        let z = analytic.map(|a| (mean - a) / std_error);
        Self { mean, std_error, n_paths: n, analytic, z }
    }

    pub fn within(&self, k: f64) -> bool {
        self.z.is_some_and(|z| z.abs() <= k)
    }
}

/// CSV `quantity,mean,std_error,analytic,z`.
pub fn write_summary<W: Write>(rows: &[(&str, McEstimate)], mut w: W) -> Result<()> {
    writeln!(w, "quantity,mean,std_error,analytic,z")?;
    for (name, e) in rows {
        let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
        writeln!(w, "{name},{},{},{},{}", fmt17(e.mean), fmt17(e.std_error), opt(e.analytic), opt(e.z))?;
    }
    Ok(())
}

/// Per-path results of a joint run.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSummary {
    pub d_final: f64,
    pub y_final: f64,
    /// trapezoid ∫₀^T e^{−βt}(D(1−Y))^{1−γ} dt
    pub fk_integral: f64,
    /// (Y_T, FK integral) of the 2·dt chain driven by pairwise summed
    /// increments, when Richardson extrapolation is on
    pub coarse: Option<(f64, f64)>,
    /// trapezoid ∫₀^T e^{−βt}D^{1−γ} dt
    pub dividend_integral: f64,
    pub clamps: u64,
    pub substeps: u64,
    /// (t, D, Y) every `record_every` steps
    pub trajectory: Vec<(f64, f64, f64)>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Ensemble {
    pub paths: Vec<PathSummary>,
    pub steps: u64,
    pub clamp_events: u64,
    pub horizon: f64,
}

impl Ensemble {
    /// CSV `path,t,D,Y` of the recorded trajectories.
    pub fn write_paths<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "path,t,D,Y")?;
        for (k, p) in self.paths.iter().enumerate() {
            for (t, d, y) in &p.trajectory {
                writeln!(w, "{k},{},{},{}", fmt17(*t), fmt17(*d), fmt17(*y))?;
            }
        }
        Ok(())
    }
}

/// (μ_Y, σ_Y) as a function of y.
pub(crate) trait StateCoefficients: Sync {
    fn drift_vol(&self, y: f64) -> (f64, f64);
}

/// h tabulated on a uniform grid with linear interpolation.
struct HTable {
    h: Vec<f64>,
    gamma: f64,
    sigma: f64,
}

const TABLE_SIZE: usize = 1 << 15;

impl HTable {
    fn new(eq: &Equilibrium) -> Self {
        let c = &eq.critical;
        let h = (0..=TABLE_SIZE).map(|k| c.h(k as f64 / TABLE_SIZE as f64)).collect();
        Self { h, gamma: eq.econ.gamma, sigma: eq.econ.sigma_d }
    }
}

impl StateCoefficients for HTable {
    #[inline]
    fn drift_vol(&self, y: f64) -> (f64, f64) {
        let x = y * TABLE_SIZE as f64;
        let k = (x as usize).min(TABLE_SIZE - 1);
        let f = x - k as f64;
        let h = self.h[k] + f * (self.h[k + 1] - self.h[k]);
        let g = self.gamma;
        let var = self.sigma * self.sigma;
        let mu = var * (1.0 - y) * (1.0 + g + 2.0 * g * y * h - 2.0 * y * (1.0 + g)) / (2.0 * y * h * h);
        (mu, self.sigma * (1.0 - y) / h)
    }
}

fn path_rng(seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

fn increment(rng: &mut ChaCha8Rng, draws: u32) -> f64 {
    let mut s = 0.0;
    for _ in 0..draws {
        s += rng.sample::<f64, _>(StandardNormal);
    }
    s / (draws as f64).sqrt()
}

const MAX_SUBSTEP_DEPTH: u32 = 80;

#[inline]
fn logistic(x: f64) -> f64 {
    1.0 / (1.0 + (-x).exp())
}

/// Drift and volatility of X = ln(Y/(1−Y)).
#[inline]
fn logit_coefficients<C: StateCoefficients>(coef: &C, x: f64) -> (f64, f64) {
    let y = logistic(x);
    let q = y * (1.0 - y);
    let (mu, sig) = coef.drift_vol(y);
    (mu / q + 0.5 * sig * sig * (2.0 * y - 1.0) / (q * q), sig / q)
}

/// Local step limits per unit of the base step: a sub-interval of length s
/// is accepted once s·|μ_X| ≤ DRIFT_BUDGET·dt and s·σ_X² ≤ VAR_BUDGET·dt.
const DRIFT_BUDGET: f64 = 1.0;
const VAR_BUDGET: f64 = 0.625;

/// Euler–Maruyama step of the logit of Y over `dt` with Brownian increment
/// `dw`, halved along a Brownian bridge until the local limits hold. The
/// limits scale with `base`, so every local step shrinks with the base step.
fn x_step<C: StateCoefficients>(
    coef: &C,
    x: f64,
    base: f64,
    dt: f64,
    dw: f64,
    depth: u32,
    bridge: &mut Option<ChaCha8Rng>,
    seed: u64,
    stream: u64,
) -> (f64, u64) {
    let (mu, sig) = logit_coefficients(coef, x);
    if !(mu.is_finite() && sig.is_finite()) {
        return (x, 0);
    }
    if depth >= MAX_SUBSTEP_DEPTH || (mu.abs() * dt <= DRIFT_BUDGET * base && sig * sig * dt <= VAR_BUDGET * base) {
        return (x + mu * dt + sig * dw, 0);
    }
    let rng = bridge.get_or_insert_with(|| path_rng(seed, stream));
    let z: f64 = rng.sample(StandardNormal);
    let w1 = 0.5 * dw + 0.5 * dt.sqrt() * z;
    let (xm, a) = x_step(coef, x, base, 0.5 * dt, w1, depth + 1, bridge, seed, stream);
    let (xe, b) = x_step(coef, xm, base, 0.5 * dt, dw - w1, depth + 1, bridge, seed, stream);
    (xe, a + b + 1)
}

/// Logit chain of Y with its clamp counters and trapezoid accumulator.
struct Chain {
    x: f64,
    y: f64,
    f_prev: f64,
    fk_int: f64,
    clamps: u64,
    substeps: u64,
    bridge: Option<ChaCha8Rng>,
}

impl Chain {
    fn new(y0: f64, f0: f64) -> Self {
        Self { x: (y0 / (1.0 - y0)).ln(), y: y0, f_prev: f0, fk_int: 0.0, clamps: 0, substeps: 0, bridge: None }
    }

    fn advance<C: StateCoefficients>(&mut self, coef: &C, dt: f64, dw: f64, x_lo: f64, seed: u64, stream: u64) {
        let (x, s) = x_step(coef, self.x, dt, dt, dw, 0, &mut self.bridge, seed, stream);
        self.substeps += s;
        self.x = if !(x >= x_lo) {
            self.clamps += 1;
            x_lo
        } else if x > -x_lo {
            self.clamps += 1;
            -x_lo
        } else {
            x
        };
        self.y = logistic(self.x);
    }

    fn accumulate(&mut self, dt: f64, f: f64) {
        self.fk_int += 0.5 * dt * (f + self.f_prev);
        self.f_prev = f;
    }
}

fn simulate_path<C: StateCoefficients>(coef: &C, econ: &EconomyParams, y0: f64, cfg: &SimConfig, index: u64) -> PathSummary {
    let (n, dt) = cfg.steps();
    let sq = dt.sqrt();
    let mut rng = path_rng(cfg.seed, 2 * index);
    let bridge_stream = 2 * index + 1;
    let g1 = 1.0 - econ.gamma;
    let drift = (econ.mu_d - 0.5 * econ.sigma_d * econ.sigma_d) * dt;
    let mut ln_d = econ.d0.ln();
    let x_lo = (cfg.clamp_margin / (1.0 - cfg.clamp_margin)).ln();
    let fk = |t: f64, ln_d: f64, y: f64| (g1 * (ln_d + (1.0 - y).ln()) - econ.beta * t).exp();
    let dv = |t: f64, ln_d: f64| (g1 * ln_d - econ.beta * t).exp();
    let f0 = fk(0.0, ln_d, y0);
    let mut fine = Chain::new(y0, f0);
    let mut coarse = cfg.richardson.then(|| Chain::new(y0, f0));
    let mut dw_pair = 0.0;
    let mut d_prev = dv(0.0, ln_d);
    let mut div_int = 0.0;
    let mut trajectory = Vec::new();
    if cfg.record_every > 0 {
        trajectory.push((0.0, econ.d0, y0));
    }
    for k in 1..=n {
        let dw = sq * increment(&mut rng, cfg.draws_per_step);
        fine.advance(coef, dt, dw, x_lo, cfg.seed, bridge_stream);
        ln_d += drift + econ.sigma_d * dw;
        let t = k as f64 * dt;
        fine.accumulate(dt, fk(t, ln_d, fine.y));
        let d = dv(t, ln_d);
        div_int += 0.5 * dt * (d + d_prev);
        d_prev = d;
        if let Some(c) = coarse.as_mut() {
            dw_pair += dw;
            if k % 2 == 0 {
                c.advance(coef, 2.0 * dt, dw_pair, x_lo, cfg.seed, bridge_stream);
                c.accumulate(2.0 * dt, fk(t, ln_d, c.y));
                dw_pair = 0.0;
            }
        }
        if cfg.record_every > 0 && k % cfg.record_every == 0 {
            trajectory.push((t, ln_d.exp(), fine.y));
        }
    }
    PathSummary {
        d_final: ln_d.exp(),
        y_final: fine.y,
        fk_integral: fine.fk_int,
        coarse: coarse.as_ref().map(|c| (c.y, c.fk_int)),
        dividend_integral: div_int,
        clamps: fine.clamps + coarse.as_ref().map_or(0, |c| c.clamps),
        substeps: fine.substeps + coarse.as_ref().map_or(0, |c| c.substeps),
        trajectory,
    }
}

pub(crate) fn simulate_with<C: StateCoefficients>(coef: &C, econ: &EconomyParams, y0: f64, cfg: &SimConfig) -> Result<Ensemble> {
    cfg.validate()?;
    if !(y0 > 0.0 && y0 < 1.0) {
        return Err(Error::Domain { what: "Y0", value: y0, domain: "(0, 1)" });
    }
    let paths: Vec<PathSummary> =
        (0..cfg.n_paths as u64).into_par_iter().map(|i| simulate_path(coef, econ, y0, cfg, i)).collect();
    let (n, _) = cfg.steps();
    let steps = n as u64 * cfg.n_paths as u64;
    let clamp_events = paths.iter().map(|p| p.clamps).sum();
    if clamp_events as f64 > 1e-3 * steps as f64 {
        return Err(Error::ClampRate { events: clamp_events, steps });
    }
    Ok(Ensemble { paths, steps, clamp_events, horizon: cfg.horizon })
}

/// Joint ensemble of (D, Y) started at (D₀, Y₀).
pub fn simulate_joint(eq: &Equilibrium, y0: f64, cfg: &SimConfig) -> Result<Ensemble> {
    simulate_with(&HTable::new(eq), &eq.econ, y0, cfg)
}

fn check_horizon(econ: &EconomyParams, horizon: f64, total: f64) -> Result<f64> {
    let c = econ.dividend_decay_rate();
    let tail = econ.d0.powf(1.0 - econ.gamma) * (-c * horizon).exp() / c;
    if tail > 0.01 * total {
        return Err(Error::HorizonTooShort { tail, total });
    }
    Ok(tail)
}

/// E[∫₀^∞ e^{−βt}D_t^{1−γ}dt] by trapezoid on exact GBM paths plus the
/// closed-form tail beyond T.
pub fn mc_dividend_integral(econ: &EconomyParams, cfg: &SimConfig) -> Result<McEstimate> {
    cfg.validate()?;
    let closed = econ.dividend_integral();
    let tail = check_horizon(econ, cfg.horizon, closed)?;
    let (n, dt) = cfg.steps();
    let sq = dt.sqrt();
    let g1 = 1.0 - econ.gamma;
    let drift = (econ.mu_d - 0.5 * econ.sigma_d * econ.sigma_d) * dt;
    let values: Vec<f64> = (0..cfg.n_paths as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = path_rng(cfg.seed, 2 * i);
            let mut ln_d = econ.d0.ln();
            let mut prev = (g1 * ln_d).exp();
            let mut acc = 0.0;
            for k in 1..=n {
                ln_d += drift + econ.sigma_d * sq * increment(&mut rng, cfg.draws_per_step);
                let f = (g1 * ln_d - econ.beta * k as f64 * dt).exp();
                acc += 0.5 * dt * (f + prev);
                prev = f;
            }
            acc + tail
        })
        .collect();
    Ok(McEstimate::from_samples(&values, Some(closed)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeynmanKacEstimate {
    /// truncated integral plus the Markov tail e^{−βT}g(Y_T)D_T^{1−γ},
    /// Richardson-extrapolated when enabled
    pub estimate: McEstimate,
    /// the same on the dt chain alone
    pub unextrapolated: McEstimate,
    /// truncated integral alone
    pub truncated: McEstimate,
    /// closed-form bound on the discarded tail
    pub tail_bound: f64,
    pub clamp_events: u64,
    pub steps: u64,
}

/// E[∫₀^∞ e^{−βu}(D_u(1−Y_u))^{1−γ}du] against g(Y₀)D₀^{1−γ}.
pub fn mc_feynman_kac(eq: &Equilibrium, y0: f64, cfg: &SimConfig) -> Result<FeynmanKacEstimate> {
    cfg.validate()?;
    if !(y0 > 0.0 && y0 < 1.0) {
        return Err(Error::Domain { what: "Y0", value: y0, domain: "(0, 1)" });
    }
    let econ = &eq.econ;
    let analytic = g_value(&eq.critical, y0)? * econ.d0.powf(1.0 - econ.gamma);
    let tail_bound = check_horizon(econ, cfg.horizon, analytic)?;
    let ens = simulate_joint(eq, y0, cfg)?;
    let disc = (-econ.beta * cfg.horizon).exp();
    let g1 = 1.0 - econ.gamma;
    let markov = |y: f64, d: f64| -> Result<f64> { Ok(disc * g_value(&eq.critical, y)? * d.powf(g1)) };
    let n = ens.paths.len();
    let (mut fine, mut extrapolated, mut truncated) = (Vec::with_capacity(n), Vec::with_capacity(n), Vec::with_capacity(n));
    for p in &ens.paths {
        let f = p.fk_integral + markov(p.y_final, p.d_final)?;
        fine.push(f);
        truncated.push(p.fk_integral);
        if let Some((yc, ic)) = p.coarse {
            extrapolated.push(2.0 * f - (ic + markov(yc, p.d_final)?));
        }
    }
    let unextrapolated = McEstimate::from_samples(&fine, Some(analytic));
    Ok(FeynmanKacEstimate {
        estimate: if cfg.richardson { McEstimate::from_samples(&extrapolated, Some(analytic)) } else { unextrapolated },
        unextrapolated,
        truncated: McEstimate::from_samples(&truncated, Some(analytic)),
        tail_bound,
        clamp_events: ens.clamp_events,
        steps: ens.steps,
    })
}

/// Relative drift and diffusion residuals of X = D·g(Y)(1−Y)^γ against
/// dX = (rX − D(1−Y))dt, per unit D.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct WealthResidual {
    pub drift: f64,
    pub diffusion: f64,
}

pub fn wealth_residuals(eq: &Equilibrium, y: f64) -> Result<WealthResidual> {
    if !(y >= RESIDUAL_MARGINS.0 && y <= 1.0 - RESIDUAL_MARGINS.1) {
        return Err(Error::Domain { what: "y", value: y, domain: "[1e-4, 1 - 1e-6]" });
    }
    let c = &eq.critical;
    let e = &eq.econ;
    let gam = e.gamma;
    let (g, g1, g2) = (g_value(c, y)?, g_prime(c, y)?, g_second(c, y)?);
    let r1 = 1.0 - y;
    let psi = r1.powf(gam);
    let psi1 = -gam * r1.powf(gam - 1.0);
    let psi2 = gam * (gam - 1.0) * r1.powf(gam - 2.0);
    let phi = g * psi;
    let phi1 = g1 * psi + g * psi1;
    let phi2 = g2 * psi + 2.0 * g1 * psi1 + g * psi2;
    let (mu_y, sig_y) = crate::equilibrium::drift_vol(c, y)?;
    let (r, _) = rate_and_mpr(c, e, y)?;
    let drift_terms = [e.mu_d * phi, mu_y * phi1, 0.5 * sig_y * sig_y * phi2, e.sigma_d * sig_y * phi1, -r * phi, r1];
    let diff_terms = [e.sigma_d * phi, sig_y * phi1];
    let rel = |t: &[f64]| t.iter().sum::<f64>().abs() / t.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    Ok(WealthResidual { drift: rel(&drift_terms), diffusion: rel(&diff_terms) })
}

/// Larger of the two relative residuals.
pub fn wealth_ode_residual(eq: &Equilibrium, y: f64) -> Result<f64> {
    let w = wealth_residuals(eq, y)?;
    Ok(w.drift.max(w.diffusion))
}
