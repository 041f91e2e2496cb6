//! Constant-coefficient Riccati family f' = a₀ + a₁f/(1−y) + a₃f²/(1−y),
//! solved with the same engine and used as a ground-truth oracle.

use crate::error::{Error, Result};
use crate::extrap::richardson3;
use crate::ode::{check_gamma, coeff_a0, coeff_a1, integrate_from, IntegratorConfig, Quadratic, RiccatiSystem, SolutionGrid, TrajectoryOutcome};
use crate::report::ReportRow;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConstantRiccatiParams {
    pub gamma: f64,
    pub a3: f64,
}

impl ConstantRiccatiParams {
    pub fn new(gamma: f64, a3: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(a3 <= -gamma && a3.is_finite()) {
            return Err(Error::InvalidParam { name: "a3", value: a3, reason: "must be <= -gamma" });
        }
        Ok(Self { gamma, a3 })
    }

    pub fn system(&self) -> RiccatiSystem {
        RiccatiSystem { gamma: self.gamma, quad: Quadratic::Constant(self.a3) }
    }

    /// −γ/a₃
    pub fn endpoint(&self) -> f64 {
        -self.gamma / self.a3
    }
}

#[derive(Debug, Clone)]
pub struct ConstantRiccatiSolution {
    pub grid: SolutionGrid,
    /// f(1) extrapolated from three nodes next to 1 − ε
    pub endpoint: f64,
}

pub fn solve_constant_riccati(p: &ConstantRiccatiParams, cfg: &IntegratorConfig) -> Result<ConstantRiccatiSolution> {
    let sys = p.system();
    let start = sys.series_start(cfg.start_offset)?;
    let grid = match integrate_from(&sys, start, cfg, false)? {
        TrajectoryOutcome::Completed(g) => g,
        TrajectoryOutcome::HitOne(y, _) | TrajectoryOutcome::Exploded(y, _) => return Err(Error::Incomplete { y }),
    };
    let g = p.gamma;
    let endpoint = extrapolate_end(&grid, [g, (2.0 * g).min(1.0)], |s| s.h);
    Ok(ConstantRiccatiSolution { grid, endpoint })
}

/// Extrapolates a node quantity to y = 1 using the nodes whose offsets
/// 1 − y are closest to ε, 8ε and 64ε.
pub(crate) fn extrapolate_end<F: Fn(&crate::ode::AugmentedState) -> f64>(grid: &SolutionGrid, p: [f64; 2], q: F) -> f64 {
    let eps = 1.0 - grid.last().y;
    let pick = |target: f64| {
        grid.points()
            .iter()
            .min_by(|a, b| {
                let da = ((1.0 - a.y) / target).ln().abs();
                let db = ((1.0 - b.y) / target).ln().abs();
                da.total_cmp(&db)
            })
            .copied()
            .unwrap()
    };
    let s = [pick(eps), pick(8.0 * eps), pick(64.0 * eps)];
    richardson3(s.map(|x| 1.0 - x.y), s.map(|x| q(&x)), p)
}

/// Positive root of a₀(1−y) + a₁f + a₃f² = 0 in the cancellation-free form.
pub fn stationary_value(gamma: f64, a3: f64, y: f64) -> Result<f64> {
    if !(y > 0.0 && y < 1.0) {
        return Err(Error::Domain { what: "y", value: y, domain: "(0, 1)" });
    }
    if !(a3 < 0.0) {
        return Err(Error::Domain { what: "a3", value: a3, domain: "(-inf, 0)" });
    }
    let c = coeff_a0(gamma, y)? * (1.0 - y);
    let b = coeff_a1(gamma, y)?;
    let disc = b * b - 4.0 * a3 * c;
    assert!(disc >= 0.0, "negative discriminant");
    Ok(2.0 * c / (-b + disc.sqrt()))
}

/// Diagnostics for a₃ = −γ, where f(1) = 1 and f' blows up at y = 1.
#[derive(Debug, Clone)]
pub struct AppendixReport {
    pub gamma: f64,
    /// (ε, f'(1−ε))
    pub slopes: Vec<(f64, f64)>,
    /// (ε, trapezoid ∫₀^{1−ε} (1−f)/(1−q) dq)
    pub gap_integrals: Vec<(f64, f64)>,
    /// (ε, trapezoid ∫₀^{1−ε} |f'| dq)
    pub variations: Vec<(f64, f64)>,
    /// f(1 − 10⁻⁶)
    pub end_value: f64,
}

pub const APPENDIX_OFFSETS: [f64; 5] = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6];

impl AppendixReport {
    pub fn slopes_increasing(&self) -> bool {
        self.slopes.windows(2).all(|w| w[1].1 > w[0].1)
    }

    /// |∫(1−f)/(1−q)| change between the two smallest offsets.
    pub fn gap_change(&self) -> f64 {
        let n = self.gap_integrals.len();
        (self.gap_integrals[n - 1].1 - self.gap_integrals[n - 2].1).abs()
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        let case = format!("appendix gamma={}", self.gamma);
        let mut rows = Vec::new();
        for (e, v) in &self.slopes {
            rows.push(ReportRow::new(&case, format!("f'(1-{e:e})"), *v, None));
        }
        for (e, v) in &self.gap_integrals {
            rows.push(ReportRow::new(&case, format!("int (1-f)/(1-q) to 1-{e:e}"), *v, None));
        }
        for (e, v) in &self.variations {
            rows.push(ReportRow::new(&case, format!("int |f'| to 1-{e:e}"), *v, None));
        }
        rows.push(ReportRow::new(&case, "f(1-1e-6)", self.end_value, Some(1.0)));
        rows
    }
}

pub fn appendix_diagnostics(gamma: f64, cfg: &IntegratorConfig) -> Result<AppendixReport> {
    let p = ConstantRiccatiParams::new(gamma, -gamma)?;
    let cfg = IntegratorConfig { end_offset: cfg.end_offset.min(1e-7), ..*cfg };
    let sol = solve_constant_riccati(&p, &cfg)?;
    let grid = &sol.grid;
    let sys = p.system();
    let mut slopes = Vec::new();
    let mut gap_integrals = Vec::new();
    let mut variations = Vec::new();
    for &e in &APPENDIX_OFFSETS {
        let s = grid.eval(1.0 - e)?;
        slopes.push((e, sys.eval(s.y, s.h, s.i)[0]));
        gap_integrals.push((e, trapezoid_to(grid, 1.0 - e, 1.0 - gamma, |y, h| (1.0 - h) / (1.0 - y))));
        variations.push((e, trapezoid_to(grid, 1.0 - e, sys.series_slope().abs(), |y, h| {
            let i = grid.eval(y).map(|s| s.i).unwrap_or(0.0);
            sys.eval(y, h, i)[0].abs()
        })));
    }
    let end_value = grid.eval(1.0 - 1e-6)?.h;
    Ok(AppendixReport { gamma, slopes, gap_integrals, variations, end_value })
}

/// Trapezoid over grid nodes from 0 (value `at_zero`) to `upper`.
fn trapezoid_to<F: Fn(f64, f64) -> f64>(grid: &SolutionGrid, upper: f64, at_zero: f64, f: F) -> f64 {
    let mut x0 = 0.0;
    let mut v0 = at_zero;
    let mut acc = 0.0;
    for p in grid.points() {
        if p.y >= upper {
            break;
        }
        let v = f(p.y, p.h);
        acc += 0.5 * (v + v0) * (p.y - x0);
        x0 = p.y;
        v0 = v;
    }
    let h = grid.eval(upper).map(|s| s.h).unwrap_or(grid.last().h);
    acc + 0.5 * (f(upper, h) + v0) * (upper - x0)
}

/// Endpoint and bound checks for a₃ ∈ {−0.5, −0.75, −1} plus the appendix rows.
pub fn oracle_report(gamma: f64, cfg: &IntegratorConfig) -> Result<Vec<ReportRow>> {
    let mut rows = Vec::new();
    for a3 in [-gamma, -0.75_f64.min(-gamma), -1.0] {
        let p = ConstantRiccatiParams::new(gamma, a3)?;
        let sol = solve_constant_riccati(&p, cfg)?;
        let case = format!("gamma={gamma} a3={a3}");
        rows.push(ReportRow::new(&case, "f(1)", sol.endpoint, Some(p.endpoint())));
        rows.push(ReportRow::new(&case, "max f", sol.grid.max_h(), None));
        rows.push(ReportRow::new(&case, "min f", sol.grid.min_h(), None));
    }
    rows.extend(appendix_diagnostics(gamma, cfg)?.rows());
    Ok(rows)
}
