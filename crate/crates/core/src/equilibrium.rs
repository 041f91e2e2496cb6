//! Economy parameters, the constant A, and the closed-form equilibrium
//! functions built from the critical solution.

use std::io::Write;

use crate::error::{Error, Result};
use crate::ode::{check_gamma, fmt17, IntegratorConfig};
use crate::shooting::{find_critical, CriticalSolution, ShootingParams};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EconomyParams {
    pub beta: f64,
    pub mu_d: f64,
    pub sigma_d: f64,
    pub gamma: f64,
    pub d0: f64,
}

impl EconomyParams {
    pub fn new(beta: f64, mu_d: f64, sigma_d: f64, gamma: f64, d0: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(beta > 0.0 && beta.is_finite()) {
            return Err(Error::InvalidParam { name: "beta", value: beta, reason: "must be > 0" });
        }
        if !mu_d.is_finite() {
            return Err(Error::InvalidParam { name: "mu_D", value: mu_d, reason: "must be finite" });
        }
        if !(sigma_d > 0.0 && sigma_d.is_finite()) {
            return Err(Error::InvalidParam { name: "sigma_D", value: sigma_d, reason: "must be > 0" });
        }
        if !(d0 > 0.0 && d0.is_finite()) {
            return Err(Error::InvalidParam { name: "D0", value: d0, reason: "must be > 0" });
        }
        let p = Self { beta, mu_d, sigma_d, gamma, d0 };
        compute_a(&p)?;
        Ok(p)
    }

    /// 2β − (1−γ)(2μ_D − γσ_D²); positive exactly when A > 1.
    fn excess(&self) -> f64 {
        2.0 * self.beta - (1.0 - self.gamma) * (2.0 * self.mu_d - self.gamma * self.sigma_d * self.sigma_d)
    }

    /// c = β − (1−γ)(μ_D − γσ_D²/2), the decay rate of E[e^{−βt}D_t^{1−γ}].
    pub fn dividend_decay_rate(&self) -> f64 {
        0.5 * self.excess()
    }

    /// E[∫₀^∞ e^{−βt}D_t^{1−γ}dt] = D₀^{1−γ}/c
    pub fn dividend_integral(&self) -> f64 {
        self.d0.powf(1.0 - self.gamma) / self.dividend_decay_rate()
    }

    pub fn shooting_params(&self) -> Result<ShootingParams> {
        ShootingParams::new(self.gamma, self.sigma_d, compute_a(self)?)
    }
}

/// A = (2β + σ_D² − (1−γ)(2μ_D − γσ_D²))/σ_D², required to exceed 1
/// (equivalently β > (1−γ)(2μ_D − γσ_D²)/2).
pub fn compute_a(econ: &EconomyParams) -> Result<f64> {
    let excess = econ.excess();
    let var = econ.sigma_d * econ.sigma_d;
    if !(excess > 0.0) {
        return Err(Error::InvalidParam {
            name: "beta",
            value: econ.beta,
            reason: "needs beta > (1-gamma)(2 mu_D - gamma sigma_D^2)/2, i.e. A > 1",
        });
    }
    Ok(1.0 + excess / var)
}

fn interior(y: f64) -> Result<()> {
    if y > 0.0 && y < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what: "y", value: y, domain: "(0, 1)" })
    }
}

/// (μ_Y, σ_Y) on (0, 1]; both vanish at y = 1.
pub fn drift_vol(critical: &CriticalSolution, y: f64) -> Result<(f64, f64)> {
    if !(y > 0.0 && y <= 1.0) {
        return Err(Error::Domain { what: "y", value: y, domain: "(0, 1]" });
    }
    if y == 1.0 {
        return Ok((0.0, 0.0));
    }
    let p = &critical.params;
    let g = p.gamma;
    let h = critical.h(y);
    let var = p.sigma_d * p.sigma_d;
    let mu = var * (1.0 - y) * (1.0 + g + 2.0 * g * y * h - 2.0 * y * (1.0 + g)) / (2.0 * y * h * h);
    Ok((mu, p.sigma_d * (1.0 - y) / h))
}

/// Interest rate r(y) and market price of risk κ(y).
pub fn rate_and_mpr(critical: &CriticalSolution, econ: &EconomyParams, y: f64) -> Result<(f64, f64)> {
    interior(y)?;
    let g = econ.gamma;
    let s = econ.sigma_d;
    let h = critical.h(y);
    let r = econ.beta + g * econ.mu_d
        - 0.5 * g * (g + 1.0) * s * s
        - g * (g + 1.0) * s * s * (1.0 - y) / (2.0 * y * h * h);
    let kappa = g * s * ((1.0 - y) / (y * h) + 1.0);
    Ok((r, kappa))
}

/// g(y) = (2/ξ₀)·e^{−I(y)}·(1−y)^{1−γ}.
pub fn g_value(critical: &CriticalSolution, y: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&y) {
        return Err(Error::Domain { what: "y", value: y, domain: "[0, 1]" });
    }
    let s = critical.state(y);
    Ok(2.0 / critical.xi0 * (-s.i).exp() * (1.0 - y).powf(1.0 - critical.params.gamma))
}

/// g'(y) = g(y)(γ − h(y))/(1−y) on [0, 1).
pub fn g_prime(critical: &CriticalSolution, y: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&y) {
        return Err(Error::Domain { what: "y", value: y, domain: "[0, 1)" });
    }
    Ok(g_value(critical, y)? * (critical.params.gamma - critical.h(y)) / (1.0 - y))
}

/// g'' from differentiating g' once more with h' taken from the ODE.
pub fn g_second(critical: &CriticalSolution, y: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&y) {
        return Err(Error::Domain { what: "y", value: y, domain: "[0, 1)" });
    }
    let g = g_value(critical, y)?;
    Ok(g * log_curvature(critical, y))
}

/// (G')² + G'' for G = ln g.
fn log_curvature(critical: &CriticalSolution, y: f64) -> f64 {
    let gam = critical.params.gamma;
    let h = critical.h(y);
    let r = 1.0 - y;
    let d1 = (gam - h) / r;
    let d2 = (-critical.h_prime(y) * r + (gam - h)) / (r * r);
    d1 * d1 + d2
}

/// Interior margins for residual checks: [1e-4, 1 − 1e-6].
pub const RESIDUAL_MARGINS: (f64, f64) = (1e-4, 1e-6);

fn check_margins(y: f64) -> Result<()> {
    if y >= RESIDUAL_MARGINS.0 && y <= 1.0 - RESIDUAL_MARGINS.1 {
        Ok(())
    } else {
        Err(Error::Domain { what: "y", value: y, domain: "[1e-4, 1 - 1e-6]" })
    }
}

/// β g − [(1−γ)μ_D g − ½(1−γ)γσ_D² g + μ_Y g' + ½σ_Y² g'' + (1−γ)σ_D σ_Y g' + (1−y)^{1−γ}].
pub fn g_ode_residual(critical: &CriticalSolution, econ: &EconomyParams, y: f64) -> Result<f64> {
    check_margins(y)?;
    residual_for(critical, econ, y, g_value(critical, y)?)
}

/// Residual of the same ODE when g is supplied externally; derivatives are
/// g·G' and g·((G')² + G'') so only the level of g differs.
fn residual_for(critical: &CriticalSolution, econ: &EconomyParams, y: f64, g: f64) -> Result<f64> {
    let gam = econ.gamma;
    let s = econ.sigma_d;
    let (mu_y, sig_y) = drift_vol(critical, y)?;
    let gp = g * (gam - critical.h(y)) / (1.0 - y);
    let gpp = g * log_curvature(critical, y);
    let rhs = (1.0 - gam) * econ.mu_d * g - 0.5 * (1.0 - gam) * gam * s * s * g
        + mu_y * gp
        + 0.5 * sig_y * sig_y * gpp
        + (1.0 - gam) * s * sig_y * gp
        + (1.0 - y).powf(1.0 - gam);
    Ok(econ.beta * g - rhs)
}

/// g from the defining formula (2/ξ₀)e^{−∫₀^y h/(1−q)dq}(1−y)^{−γ}, with the
/// divergent integral done by trapezoid over the grid nodes. Kept only to
/// compare against the stable form.
pub fn g_literal(critical: &CriticalSolution, y: f64) -> Result<f64> {
    check_margins(y)?;
    let grid = &critical.grid;
    let f = |q: f64, h: f64| h / (1.0 - q);
    let (mut x0, mut v0, mut acc) = (0.0, critical.params.gamma, 0.0);
    for p in grid.points() {
        if p.y >= y {
            break;
        }
        let v = f(p.y, p.h);
        acc += 0.5 * (v + v0) * (p.y - x0);
        x0 = p.y;
        v0 = v;
    }
    acc += 0.5 * (f(y, critical.h(y)) + v0) * (y - x0);
    Ok(2.0 / critical.xi0 * (-acc).exp() * (1.0 - y).powf(-critical.params.gamma))
}

/// ODE residual evaluated with `g_literal`.
pub fn g_ode_residual_literal(critical: &CriticalSolution, econ: &EconomyParams, y: f64) -> Result<f64> {
    residual_for(critical, econ, y, g_literal(critical, y)?)
}

/// Y₀ with g(Y₀)D₀(1−Y₀)^γ = θ₂.
///
/// θ₂ must lie in (0, g(0)·D₀).
pub fn solve_y0(critical: &CriticalSolution, econ: &EconomyParams, theta2: f64) -> Result<f64> {
    let upper = 2.0 / critical.xi0 * econ.d0;
    if !(theta2 > 0.0 && theta2 < upper) {
        return Err(Error::OutOfRange { theta2, upper });
    }
    // (2/ξ₀)e^{−I(y)}(1−y)D₀, strictly decreasing from g(0)D₀ to 0
    let m = |y: f64| 2.0 / critical.xi0 * (-critical.i(y)).exp() * (1.0 - y) * econ.d0;
    let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
    while hi - lo > 1e-14 {
        let mid = 0.5 * (lo + hi);
        if m(mid) > theta2 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Critical solution paired with a matching economy.
#[derive(Debug, Clone)]
pub struct Equilibrium {
    pub critical: CriticalSolution,
    pub econ: EconomyParams,
}

impl Equilibrium {
    pub fn new(critical: CriticalSolution, econ: EconomyParams) -> Result<Self> {
        let a = compute_a(&econ)?;
        let p = &critical.params;
        if (a - p.a).abs() > 1e-12 * a.max(1.0) || p.gamma != econ.gamma || p.sigma_d != econ.sigma_d {
            return Err(Error::Mismatch { economy: a, critical: p.a });
        }
        Ok(Self { critical, econ })
    }

    /// Computes A, then the critical solution.
    pub fn solve(econ: EconomyParams, xi_tol: f64, cfg: &IntegratorConfig) -> Result<Self> {
        let critical = find_critical(&econ.shooting_params()?, xi_tol, cfg)?;
        Self::new(critical, econ)
    }

    /// CSV `y,h,mu_Y,sigma_Y,r,kappa,g` at n uniform points of [y_min, y_max] ⊂ (0, 1).
    pub fn write_table<W: Write>(&self, y_min: f64, y_max: f64, n: usize, mut w: W) -> Result<()> {
        if !(y_min > 0.0 && y_max < 1.0 && y_min < y_max && n >= 2) {
            return Err(Error::Domain { what: "table range", value: y_min, domain: "0 < y_min < y_max < 1, n >= 2" });
        }
        writeln!(w, "y,h,mu_Y,sigma_Y,r,kappa,g")?;
        for k in 0..n {
            let y = y_min + (y_max - y_min) * k as f64 / (n - 1) as f64;
            let (mu, sig) = drift_vol(&self.critical, y)?;
            let (r, kappa) = rate_and_mpr(&self.critical, &self.econ, y)?;
            let g = g_value(&self.critical, y)?;
            let h = self.critical.h(y);
            let cols = [y, h, mu, sig, r, kappa, g].map(fmt17);
            writeln!(w, "{}", cols.join(","))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::sync::OnceLock;

    fn eq() -> &'static Equilibrium {
        static EQ: OnceLock<Equilibrium> = OnceLock::new();
        EQ.get_or_init(|| {
            let econ = EconomyParams::new(0.025, 0.02, 0.2, 0.5, 1.0).unwrap();
            Equilibrium::solve(econ, 1e-9, &IntegratorConfig::default()).unwrap()
        })
    }

    #[test]
    fn a_examples() {
        let e = EconomyParams::new(0.025, 0.02, 0.2, 0.5, 1.0).unwrap();
        assert!((compute_a(&e).unwrap() - 2.0).abs() < 1e-12);
        let e = EconomyParams::new(0.1, 0.05, 0.2, 0.5, 1.0).unwrap();
        assert!((compute_a(&e).unwrap() - 5.0).abs() < 1e-12);
        let beta = (1.0 - 0.5) * (2.0 * 0.05 - 0.5 * 0.04) / 2.0;
        assert!(EconomyParams::new(beta, 0.05, 0.2, 0.5, 1.0).is_err());
        assert!(EconomyParams::new(beta * 0.5, 0.05, 0.2, 0.5, 1.0).is_err());
    }

    #[test]
    fn dividend_closed_forms() {
        let e = EconomyParams::new(0.1, 0.05, 0.2, 0.5, 1.0).unwrap();
        assert!((e.dividend_integral() - 12.5).abs() < 1e-12);
        let e = EconomyParams::new(0.025, 0.02, 0.2, 0.5, 1.0).unwrap();
        assert!((e.dividend_integral() - 50.0).abs() < 1e-10);
        let e = EconomyParams::new(0.05, 0.02, 0.2, 1.0 - 1e-9, 1.0).unwrap();
        assert!((e.dividend_integral() - 20.0).abs() < 1e-6);
    }

    #[test]
    fn mismatched_economy_rejected() {
        let econ = EconomyParams::new(0.1, 0.05, 0.2, 0.5, 1.0).unwrap();
        assert!(matches!(Equilibrium::new(eq().critical.clone(), econ), Err(Error::Mismatch { .. })));
    }

    #[test]
    fn drift_vol_limits() {
        let c = &eq().critical;
        assert_eq!(drift_vol(c, 1.0).unwrap(), (0.0, 0.0));
        assert!(drift_vol(c, 0.0).is_err());
        let y = 1e-4;
        let (mu, s) = drift_vol(c, y).unwrap();
        assert!((y * mu / (s * s) / 0.75 - 1.0).abs() < 0.01);
        let y = 1.0 - 1e-4;
        let (mu, s) = drift_vol(c, y).unwrap();
        assert!(((1.0 - y) * mu / (s * s) / -0.25 - 1.0).abs() < 0.01);
        for k in 1..100 {
            let (_, s) = drift_vol(c, k as f64 / 100.0).unwrap();
            assert!(s > 0.0);
        }
    }

    #[test]
    fn rate_and_mpr_examples() {
        let Equilibrium { critical: c, econ } = eq();
        let (_, k) = rate_and_mpr(c, econ, 0.5).unwrap();
        assert!((k - 0.1 * (1.0 / c.h(0.5) + 1.0)).abs() < 1e-15);
        let (r, k) = rate_and_mpr(c, econ, 1.0 - 1e-9).unwrap();
        assert!((k - 0.1).abs() < 1e-8);
        assert!((r - (0.025 + 0.01 - 0.5 * 0.5 * 1.5 * 0.04)).abs() < 1e-8);
        assert!(rate_and_mpr(c, econ, 0.0).is_err() && rate_and_mpr(c, econ, 1.0).is_err());
        let rs: Vec<f64> = [1e-2, 1e-3, 1e-4, 1e-5].iter().map(|&y| rate_and_mpr(c, econ, y).unwrap().0).collect();
        assert!(rs.windows(2).all(|w| w[1] < w[0]) && rs[3] < -100.0);
        for k in 1..100 {
            let (_, kap) = rate_and_mpr(c, econ, k as f64 / 100.0).unwrap();
            assert!(kap > 0.1);
        }
        // r increasing near 0
        let r1 = rate_and_mpr(c, econ, 1e-3).unwrap().0;
        let r2 = rate_and_mpr(c, econ, 2e-3).unwrap().0;
        assert!(r2 > r1);
    }

    #[test]
    fn g_boundary_values() {
        let c = &eq().critical;
        assert!((g_value(c, 0.0).unwrap() - 2.0 / c.xi0).abs() < 1e-15);
        assert_eq!(g_value(c, 1.0).unwrap(), 0.0);
        assert!(g_value(c, 1.1).is_err());
        let mut prev = f64::INFINITY;
        for k in 0..=1000 {
            let v = g_value(c, k as f64 / 1000.0).unwrap();
            assert!(v <= prev);
            prev = v;
        }
        let g0 = g_value(c, 0.0).unwrap();
        let fd: Vec<f64> = [1e-2, 1e-3, 1e-4].iter().map(|&d| (g_value(c, d).unwrap() - g0) / d).collect();
        assert!(fd[0].abs() > fd[1].abs() && fd[1].abs() > fd[2].abs() && fd[2].abs() < 1e-3);
    }

    #[test]
    fn identity_chain() {
        let c = &eq().critical;
        for k in 1..50 {
            let y = k as f64 / 50.0;
            let lhs = g_value(c, y).unwrap() * (1.0 - y).powf(0.5) * c.xi0 / 2.0;
            let rhs = (-c.i(y)).exp() * (1.0 - y);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn ode_residual_small() {
        let Equilibrium { critical: c, econ } = eq();
        for y in [1e-3, 0.1, 0.5, 0.9, 0.999] {
            let g = g_value(c, y).unwrap();
            let res = g_ode_residual(c, econ, y).unwrap();
            assert!(res.abs() <= 1e-6 * (econ.beta * g).max(1.0), "y={y}: {res:e}");
        }
        assert!(g_ode_residual(c, econ, 1e-5).is_err());
        assert!(g_ode_residual(c, econ, 1.0 - 1e-7).is_err());
    }

    #[test]
    fn stable_form_beats_literal_near_one() {
        let Equilibrium { critical: c, econ } = eq();
        for y in [1.0 - 1e-3, 1.0 - 1e-5] {
            let stable = g_ode_residual(c, econ, y).unwrap().abs();
            let literal = g_ode_residual_literal(c, econ, y).unwrap().abs();
            assert!(literal > stable, "y={y}: literal {literal:e} stable {stable:e}");
        }
    }

    #[test]
    fn y0_calibration() {
        let Equilibrium { critical: c, econ } = eq();
        let top = g_value(c, 0.0).unwrap() * econ.d0;
        assert!(solve_y0(c, econ, top * (1.0 - 1e-9)).unwrap() < 1e-6);
        assert!(solve_y0(c, econ, 1e-9).unwrap() > 1.0 - 1e-6);
        assert!(solve_y0(c, econ, top).is_err() && solve_y0(c, econ, 0.0).is_err());
        let y0 = solve_y0(c, econ, 0.5 * top).unwrap();
        // scan oracle
        let n = 200_000;
        let f = |y: f64| (-c.i(y)).exp() * (1.0 - y) - 0.5;
        let k = (0..n).find(|&k| f((k + 1) as f64 / n as f64) <= 0.0).unwrap();
        let (a, b) = (k as f64 / n as f64, (k + 1) as f64 / n as f64);
        assert!(y0 >= a - 1e-12 && y0 <= b + 1e-12);
        assert!(f(y0).abs() < 1e-12);
    }

    #[test]
    fn table_csv() {
        let mut buf = Vec::new();
        eq().write_table(0.01, 0.99, 5, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert_eq!(text.lines().next(), Some("y,h,mu_Y,sigma_Y,r,kappa,g"));
        assert_eq!(text.lines().count(), 6);
        assert!(eq().write_table(0.0, 0.5, 5, Vec::new()).is_err());
    }
}
