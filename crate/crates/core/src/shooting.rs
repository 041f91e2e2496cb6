//! Sub/supercritical classification, bracketing and bisection for the
//! critical parameter ξ₀, and the critical solution with its diagnostics.

use std::io::Write;

use crate::error::{Error, Result};
use crate::extrap::Expansion;
use crate::ode::{fmt17, integrate, AugmentedState, IntegratorConfig, ModelParams, SolutionGrid, TrajectoryOutcome};

/// (γ, σ_D, A) without ξ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShootingParams {
    pub gamma: f64,
    pub sigma_d: f64,
    pub a: f64,
}

impl ShootingParams {
    pub fn new(gamma: f64, sigma_d: f64, a: f64) -> Result<Self> {
        ModelParams::new(gamma, sigma_d, a, 1.0)?;
        Ok(Self { gamma, sigma_d, a })
    }

    pub fn with_xi(&self, xi: f64) -> Result<ModelParams> {
        ModelParams::new(self.gamma, self.sigma_d, self.a, xi)
    }

    /// σ²(A−γ)/2, inside the provably subcritical range.
    pub fn xi_lo(&self) -> f64 {
        self.sigma_d * self.sigma_d * (self.a - self.gamma) / 2.0
    }

    /// σ²(A−γ)/ξ₀, the limit of e^I at y = 1.
    pub fn l0(&self, xi0: f64) -> f64 {
        self.sigma_d * self.sigma_d * (self.a - self.gamma) / xi0
    }

    /// (1−γ²)/(A−1)
    pub fn hprime1_exact(&self) -> f64 {
        (1.0 - self.gamma * self.gamma) / (self.a - 1.0)
    }

    /// Decay exponent of the stable mode at the saddle y = 1: deviations
    /// from the critical solution behave like (1−y)^p with
    /// p = (γ + √(γ² + 4(A−γ)))/2.
    pub fn stable_exponent(&self) -> f64 {
        let g = self.gamma;
        0.5 * (g + (g * g + 4.0 * (self.a - g)).sqrt())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Classification {
    /// Completed with h < 1 everywhere; carries h(1−ε).
    Subcritical { end_value: f64 },
    /// Reached h ≥ 1 or blew up at `y_term`.
    Supercritical { y_term: f64, exploded: bool },
}

impl Classification {
    pub fn is_subcritical(&self) -> bool {
        matches!(self, Self::Subcritical { .. })
    }
}

pub fn classify(params: &ModelParams, cfg: &IntegratorConfig) -> Result<Classification> {
    classify_outcome(params, cfg).map(|(c, _)| c)
}

fn classify_outcome(params: &ModelParams, cfg: &IntegratorConfig) -> Result<(Classification, TrajectoryOutcome)> {
    let out = match integrate(params, cfg) {
        Ok(out) => out,
        Err(e @ (Error::StepUnderflow { .. } | Error::TooManySteps(_))) => {
            return Err(Error::Indeterminate { xi: params.xi, reason: e.to_string() })
        }
        Err(e) => return Err(e),
    };
    let class = match &out {
        TrajectoryOutcome::Completed(g) if g.max_h() < 1.0 => Classification::Subcritical { end_value: g.last().h },
        TrajectoryOutcome::Completed(g) => Classification::Supercritical { y_term: g.last().y, exploded: false },
        TrajectoryOutcome::HitOne(y, _) => Classification::Supercritical { y_term: *y, exploded: false },
        TrajectoryOutcome::Exploded(y, _) => Classification::Supercritical { y_term: *y, exploded: true },
    };
    Ok((class, out))
}

/// h(1) of a subcritical trajectory, extrapolated from the nodes nearest
/// 1 − ε, 1 − 8ε and 1 − 64ε with correction exponents γ and min(2γ, 1).
pub fn subcritical_endpoint(params: &ModelParams, cfg: &IntegratorConfig) -> Result<f64> {
    match classify_outcome(params, cfg)? {
        (Classification::Subcritical { .. }, out) => {
            let g = params.gamma;
            Ok(crate::riccati::extrapolate_end(out.grid(), [g, (2.0 * g).min(1.0)], |s| s.h))
        }
        _ => Err(Error::Indeterminate { xi: params.xi, reason: "trajectory is not subcritical".into() }),
    }
}

/// Number of doublings tried before giving up.
pub const MAX_DOUBLINGS: u32 = 20;

/// (σ²(A−γ)/2, first doubling that is supercritical).
pub fn initial_bracket(sp: &ShootingParams, cfg: &IntegratorConfig) -> Result<(f64, f64)> {
    bracket_outcomes(sp, cfg).map(|b| (b.0, b.2))
}

fn bracket_outcomes(sp: &ShootingParams, cfg: &IntegratorConfig) -> Result<(f64, TrajectoryOutcome, f64, TrajectoryOutcome)> {
    let lo = sp.xi_lo();
    let (c, lo_out) = classify_outcome(&sp.with_xi(lo)?, cfg)?;
    if !c.is_subcritical() {
        return Err(Error::Indeterminate { xi: lo, reason: "lower bracket end is not subcritical".into() });
    }
    let mut hi = lo;
    for _ in 0..MAX_DOUBLINGS {
        hi *= 2.0;
        let (c, out) = classify_outcome(&sp.with_xi(hi)?, cfg)?;
        if !c.is_subcritical() {
            return Ok((lo, lo_out, hi, out));
        }
    }
    Err(Error::Bracket { xi_lo: lo, doublings: MAX_DOUBLINGS })
}

/// Relative agreement of the final sub- and supercritical trajectories that
/// marks an offset 1 − y as trustworthy for endpoint extrapolation.
pub const TRACKING_TOL: f64 = 1e-6;

#[derive(Debug, Clone)]
pub struct CriticalSolution {
    pub params: ShootingParams,
    pub xi0: f64,
    pub xi_tol: f64,
    /// trajectory at the subcritical end of the final bracket
    pub grid: SolutionGrid,
    /// trajectory at the supercritical end of the final bracket
    pub upper: SolutionGrid,
    /// extrapolated e^{I(1)}
    pub l: f64,
    /// extrapolated lim (1−h(y))/(1−y)
    pub hprime1: f64,
    /// smallest offset 1 − y where the bracket trajectories still agree;
    /// closer to 1 the tangent 1 − h'(1)(1−y) replaces the grid
    pub trusted_offset: f64,
    /// e^{I(1−r)} ≈ L + k₁r + k₂r^p near y = 1
    pub exp_i_tail: Expansion,
    /// (1−h(1−r))/r ≈ h'(1) + k₁r^{p−1} + k₂r
    pub quotient_tail: Expansion,
    /// raw quotients (r, (1−h(1−r))/r) at r = 10⁻¹, 10⁻², ... down to the trusted offset
    pub slope_sequence: Vec<(f64, f64)>,
    pub bracket_history: Vec<(f64, f64)>,
}

pub fn find_critical(sp: &ShootingParams, xi_tol: f64, cfg: &IntegratorConfig) -> Result<CriticalSolution> {
    if !(xi_tol >= 1e-12) {
        return Err(Error::InvalidParam { name: "xi_tol", value: xi_tol, reason: "must be >= 1e-12" });
    }
    cfg.validate()?;
    let (mut lo, mut lo_out, mut hi, mut hi_out) = bracket_outcomes(sp, cfg)?;
    let mut history = vec![(lo, hi)];
    let wrap = |e: Error, h: &Vec<(f64, f64)>| Error::Shooting { source: Box::new(e), history: h.clone() };
    // Bisection continues past xi_tol down to float resolution: the two
    // bracket trajectories separate like Δξ/(1−y), so a narrower final
    // bracket extends the region where the critical grid can be trusted.
    loop {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        let (c, out) = classify_outcome(&sp.with_xi(mid).map_err(|e| wrap(e, &history))?, cfg).map_err(|e| wrap(e, &history))?;
        if c.is_subcritical() {
            lo = mid;
            lo_out = out;
        } else {
            hi = mid;
            hi_out = out;
        }
        history.push((lo, hi));
    }
    CriticalSolution::from_bracket(*sp, lo, lo_out.into_grid(), hi_out.into_grid(), history, xi_tol)
        .map_err(|e| match e {
            Error::Certification(_) => e,
            other => Error::Shooting { source: Box::new(other), history: vec![] },
        })
}

impl CriticalSolution {
    fn from_bracket(
        params: ShootingParams,
        xi0: f64,
        grid: SolutionGrid,
        upper: SolutionGrid,
        bracket_history: Vec<(f64, f64)>,
        xi_tol: f64,
    ) -> Result<Self> {
        let g = params.gamma;
        if let Some(p) = grid.points().iter().find(|p| p.h < g - 1e-6 || p.h > 1.0 + 1e-9) {
            return Err(Error::Certification(format!("h({}) = {} outside [gamma - 1e-6, 1 + 1e-9]", p.y, p.h)));
        }
        let trusted_offset = tracking_offset(&grid, &upper);
        let r = [trusted_offset, 2.0 * trusted_offset, 4.0 * trusted_offset];
        let states = r.map(|x| grid.eval(1.0 - x).expect("offset inside the grid"));
        let p = params.stable_exponent();
        let exp_i_tail = Expansion::fit(r, states.map(|s| s.i.exp()), [1.0, p]);
        let quotient_tail = Expansion::fit(r, [0, 1, 2].map(|k| (1.0 - states[k].h) / r[k]), [p - 1.0, 1.0]);
        let l = exp_i_tail.c;
        let hprime1 = quotient_tail.c;
        let mut slope_sequence = Vec::new();
        let mut off = 0.1;
        while off >= trusted_offset {
            slope_sequence.push((off, (1.0 - grid.eval(1.0 - off)?.h) / off));
            off /= 10.0;
        }
        if !(l > 0.0 && l < 1.0) {
            return Err(Error::Certification(format!("L = {l} outside (0,1)")));
        }
        Ok(Self {
            params,
            xi0,
            xi_tol,
            grid,
            upper,
            l,
            hprime1,
            trusted_offset,
            exp_i_tail,
            quotient_tail,
            slope_sequence,
            bracket_history,
        })
    }

    pub fn model_params(&self) -> ModelParams {
        self.params.with_xi(self.xi0).expect("validated at construction")
    }

    fn series_slope(&self) -> f64 {
        self.grid.system().series_slope()
    }

    /// State on [0, 1]: series below δ, grid in between, fitted endpoint
    /// expansions within the trusted offset of y = 1.
    pub fn state(&self, y: f64) -> AugmentedState {
        let y = y.clamp(0.0, 1.0);
        let g = self.params.gamma;
        let r = 1.0 - y;
        if y < self.grid.first().y {
            AugmentedState { y, h: g + self.series_slope() * y, i: (g - 1.0) * y }
        } else if r <= self.trusted_offset {
            AugmentedState { y, h: 1.0 - r * self.quotient_tail.eval(r), i: self.exp_i_tail.eval(r).ln() }
        } else {
            self.grid.eval(y).expect("inside grid range")
        }
    }

    pub fn h(&self, y: f64) -> f64 {
        self.state(y).h
    }

    pub fn i(&self, y: f64) -> f64 {
        self.state(y).i
    }

    /// h'(y) consistent with `state`.
    pub fn h_prime(&self, y: f64) -> f64 {
        let s = self.state(y);
        if s.y < self.grid.first().y {
            self.series_slope()
        } else if 1.0 - s.y <= self.trusted_offset {
            let r = 1.0 - s.y;
            self.quotient_tail.eval(r) + r * self.quotient_tail.derivative(r)
        } else {
            self.grid.system().eval(s.y, s.h, s.i)[0]
        }
    }

    /// Key-value sidecar: xi0, L, hprime1, gamma, sigma_D, A, xi_tol.
    pub fn write_sidecar<W: Write>(&self, mut w: W) -> Result<()> {
        let p = &self.params;
        for (k, v) in [
            ("xi0", self.xi0),
            ("L", self.l),
            ("hprime1", self.hprime1),
            ("gamma", p.gamma),
            ("sigma_D", p.sigma_d),
            ("A", p.a),
            ("xi_tol", self.xi_tol),
        ] {
            writeln!(w, "{k}={}", fmt17(v))?;
        }
        Ok(())
    }
}

/// Scans offsets 10^{-k/4}; returns the smallest one such that it and every
/// larger offset keep the two trajectories within TRACKING_TOL·(1−h).
fn tracking_offset(lower: &SolutionGrid, upper: &SolutionGrid) -> f64 {
    let mut best = 0.1;
    for k in 4..=40 {
        let r = 10f64.powf(-(k as f64) / 4.0);
        let y = 1.0 - r;
        if !lower.contains(y) || !upper.contains(y) {
            break;
        }
        let (Ok(a), Ok(b)) = (lower.eval(y), upper.eval(y)) else { break };
        if (b.h - a.h).abs() > TRACKING_TOL * (1.0 - a.h) {
            break;
        }
        best = r;
    }
    best
}
