use super::{AugmentedState, ModelParams, RiccatiSystem, SolutionGrid};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub rel_tol: f64,
    pub abs_tol: f64,
    pub min_step: f64,
    pub explosion_cap: f64,
    /// δ, where the series start hands over to the integrator
    pub start_offset: f64,
    /// ε, the integrator stops at 1 − ε
    pub end_offset: f64,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self {
            rel_tol: 1e-10,
            abs_tol: 1e-10,
            min_step: 1e-14,
            explosion_cap: 1e3,
            start_offset: 1e-6,
            end_offset: 1e-8,
        }
    }
}

impl IntegratorConfig {
    pub fn validate(&self) -> Result<()> {
        let pos = [
            ("rel_tol", self.rel_tol),
            ("abs_tol", self.abs_tol),
            ("min_step", self.min_step),
            ("explosion_cap", self.explosion_cap),
            ("start_offset", self.start_offset),
            ("end_offset", self.end_offset),
        ];
        for (name, v) in pos {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::InvalidParam { name, value: v, reason: "must be > 0" });
            }
        }
        if self.start_offset >= 1e-2 {
            return Err(Error::InvalidParam { name: "start_offset", value: self.start_offset, reason: "must be < 1e-2" });
        }
        if self.end_offset >= 1e-2 {
            return Err(Error::InvalidParam { name: "end_offset", value: self.end_offset, reason: "must be < 1e-2" });
        }
        if self.explosion_cap < 10.0 {
            return Err(Error::InvalidParam { name: "explosion_cap", value: self.explosion_cap, reason: "must be >= 10" });
        }
        Ok(())
    }

    /// All four resolution knobs divided by two.
    pub fn halved(&self) -> Self {
        Self {
            rel_tol: self.rel_tol / 2.0,
            abs_tol: self.abs_tol / 2.0,
            start_offset: self.start_offset / 2.0,
            end_offset: self.end_offset / 2.0,
            ..*self
        }
    }
}

#[derive(Debug, Clone)]
pub enum TrajectoryOutcome {
    Completed(SolutionGrid),
    HitOne(f64, SolutionGrid),
    Exploded(f64, SolutionGrid),
}

impl TrajectoryOutcome {
    pub fn grid(&self) -> &SolutionGrid {
        match self {
            Self::Completed(g) | Self::HitOne(_, g) | Self::Exploded(_, g) => g,
        }
    }

    pub fn into_grid(self) -> SolutionGrid {
        match self {
            Self::Completed(g) | Self::HitOne(_, g) | Self::Exploded(_, g) => g,
        }
    }

    pub fn is_completed(&self) -> bool {
        matches!(self, Self::Completed(_))
    }
}

/// Series start at δ, then Dormand–Prince 5(4) up to 1 − ε.
pub fn integrate(params: &ModelParams, cfg: &IntegratorConfig) -> Result<TrajectoryOutcome> {
    cfg.validate()?;
    let sys = params.system();
    let start = sys.series_start(cfg.start_offset)?;
    integrate_from(&sys, start, cfg, true)
}

const MAX_STEPS: usize = 2_000_000;

// Dormand–Prince tableau
const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;
const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const B1: f64 = 35.0 / 384.0;
const B3: f64 = 500.0 / 1113.0;
const B4: f64 = 125.0 / 192.0;
const B5: f64 = -2187.0 / 6784.0;
const B6: f64 = 11.0 / 84.0;
const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

fn comb(u: [f64; 2], s: f64, terms: &[(f64, [f64; 2])]) -> [f64; 2] {
    let mut out = u;
    for (c, k) in terms {
        out[0] += s * c * k[0];
        out[1] += s * c * k[1];
    }
    out
}

/// Advances from an arbitrary interior state. `stop_at_one` enables the
/// HitOne termination (off for the constant-coefficient oracle).
pub fn integrate_from(
    sys: &RiccatiSystem,
    start: AugmentedState,
    cfg: &IntegratorConfig,
    stop_at_one: bool,
) -> Result<TrajectoryOutcome> {
    cfg.validate()?;
    let f = |y: f64, u: [f64; 2]| sys.eval(y, u[0], u[1]);
    let y_end = 1.0 - cfg.end_offset;
    if !(start.y > 0.0 && start.y < y_end) {
        return Err(Error::Domain { what: "start y", value: start.y, domain: "(0, 1 - end_offset)" });
    }
    let mut y = start.y;
    let mut u = [start.h, start.i];
    let mut k1 = f(y, u);
    let mut points = vec![start];
    let mut slopes = vec![k1];
    let mut step = 0.1 * y.min(1.0 - y);
    let finish = |points: Vec<AugmentedState>, slopes: Vec<[f64; 2]>| {
        SolutionGrid::with_slopes(*sys, points, slopes, start.y, cfg.end_offset)
    };

    for _ in 0..MAX_STEPS {
        if y >= y_end {
            return Ok(TrajectoryOutcome::Completed(finish(points, slopes)));
        }
        let mut landing = false;
        if y + step >= y_end || y_end - (y + step) < 1e-3 * step {
            step = y_end - y;
            landing = true;
        }
        if step < cfg.min_step {
            let growing = k1[0] > 0.0;
            if growing {
                return Ok(TrajectoryOutcome::Exploded(y, finish(points, slopes)));
            }
            return Err(Error::StepUnderflow { y, h: u[0], step });
        }

        let k2 = f(y + C2 * step, comb(u, step, &[(A21, k1)]));
        let k3 = f(y + C3 * step, comb(u, step, &[(A31, k1), (A32, k2)]));
        let k4 = f(y + C4 * step, comb(u, step, &[(A41, k1), (A42, k2), (A43, k3)]));
        let k5 = f(y + C5 * step, comb(u, step, &[(A51, k1), (A52, k2), (A53, k3), (A54, k4)]));
        let y_new = if landing { y_end } else { y + step };
        let k6 = f(y_new, comb(u, step, &[(A61, k1), (A62, k2), (A63, k3), (A64, k4), (A65, k5)]));
        let u_new = comb(u, step, &[(B1, k1), (B3, k3), (B4, k4), (B5, k5), (B6, k6)]);
        let k7 = f(y_new, u_new);
        let e = comb([0.0; 2], step, &[(E1, k1), (E3, k3), (E4, k4), (E5, k5), (E6, k6), (E7, k7)]);

        let mut err = 0.0;
        for j in 0..2 {
            let sc = cfg.abs_tol + cfg.rel_tol * u[j].abs().max(u_new[j].abs());
            err += (e[j] / sc).powi(2);
        }
        let err = (err / 2.0).sqrt();

        if !err.is_finite() || !u_new[0].is_finite() || !u_new[1].is_finite() {
            step *= 0.2;
            continue;
        }
        if err > 1.0 {
            step *= (0.9 * err.powf(-0.2)).max(0.2);
            continue;
        }

        y = y_new;
        u = u_new;
        k1 = k7;
        points.push(AugmentedState { y, h: u[0], i: u[1] });
        slopes.push(k1);

        if u[0] >= cfg.explosion_cap {
            return Ok(TrajectoryOutcome::Exploded(y, finish(points, slopes)));
        }
        if stop_at_one && u[0] >= 1.0 {
            return Ok(TrajectoryOutcome::HitOne(y, finish(points, slopes)));
        }
        let grow = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).min(5.0) };
        step *= grow;
    }
    Err(Error::TooManySteps(MAX_STEPS))
}
