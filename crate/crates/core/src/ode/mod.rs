//! The augmented Riccati system, its series start near y = 0, an adaptive
//! integrator on (0, 1) and a Picard oracle from the integral equation.

mod grid;
mod integrate;
mod picard;

pub use grid::{fmt17, AugmentedState, SolutionGrid};
pub use integrate::{integrate, integrate_from, IntegratorConfig, TrajectoryOutcome};
pub use picard::{picard_local, PicardSolution};

use crate::error::{Error, Result};

/// ODE-level parameters; `a` is the constant A.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    pub gamma: f64,
    pub sigma_d: f64,
    pub a: f64,
    pub xi: f64,
}

impl ModelParams {
    pub fn new(gamma: f64, sigma_d: f64, a: f64, xi: f64) -> Result<Self> {
        check_gamma(gamma)?;
        if !(sigma_d > 0.0 && sigma_d.is_finite()) {
            return Err(Error::InvalidParam { name: "sigma_D", value: sigma_d, reason: "must be > 0" });
        }
        if !(a > 1.0 && a.is_finite()) {
            return Err(Error::InvalidParam { name: "A", value: a, reason: "must be > 1" });
        }
        if !(xi > 0.0 && xi.is_finite()) {
            return Err(Error::InvalidParam { name: "xi", value: xi, reason: "must be > 0" });
        }
        Ok(Self { gamma, sigma_d, a, xi })
    }

    pub fn xi_over_var(&self) -> f64 {
        self.xi / (self.sigma_d * self.sigma_d)
    }

    pub fn system(&self) -> RiccatiSystem {
        RiccatiSystem {
            gamma: self.gamma,
            quad: Quadratic::PathDependent { xi_over_var: self.xi_over_var(), a: self.a },
        }
    }
}

pub(crate) fn check_gamma(gamma: f64) -> Result<()> {
    if gamma > 0.0 && gamma < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidParam { name: "gamma", value: gamma, reason: "must lie in (0,1)" })
    }
}

/// Coefficient of h²/(1−y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Quadratic {
    /// (ξ/σ²)·e^I − A
    PathDependent { xi_over_var: f64, a: f64 },
    /// constant a₃
    Constant(f64),
}

/// h' = a₀ + a₁h/(1−y) + a₂h²/(1−y), I' = (h−1)/(1−y).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RiccatiSystem {
    pub gamma: f64,
    pub quad: Quadratic,
}

impl RiccatiSystem {
    pub fn a2(&self, i: f64) -> f64 {
        match self.quad {
            Quadratic::PathDependent { xi_over_var, a } => xi_over_var * i.exp() - a,
            Quadratic::Constant(a3) => a3,
        }
    }

    /// Right-hand side for 0 < y < 1. The linear and constant terms are
    /// regrouped as (1+γ)(γ−h)/y + γh/(1−y), which is the same function.
    #[inline]
    pub fn eval(&self, y: f64, h: f64, i: f64) -> [f64; 2] {
        let g = self.gamma;
        let r = 1.0 - y;
        let dh = (1.0 + g) * (g - h) / y + h * (g + self.a2(i) * h) / r;
        [dh, (h - 1.0) / r]
    }

    /// h'(0) from matching the ODE at y = 0.
    pub fn series_slope(&self) -> f64 {
        let g = self.gamma;
        g * g * (1.0 + self.a2(0.0)) / (2.0 + g)
    }

    pub fn series_start(&self, delta: f64) -> Result<AugmentedState> {
        if !(delta > 0.0 && delta <= 1e-3) {
            return Err(Error::Domain { what: "delta", value: delta, domain: "(0, 1e-3]" });
        }
        Ok(AugmentedState {
            y: delta,
            h: self.gamma + self.series_slope() * delta,
            i: (self.gamma - 1.0) * delta,
        })
    }
}

pub fn coeff_a0(gamma: f64, y: f64) -> Result<f64> {
    check_y_right_closed(y)?;
    Ok(gamma * (1.0 + gamma) / y)
}

pub fn coeff_a1(gamma: f64, y: f64) -> Result<f64> {
    check_y_right_closed(y)?;
    Ok(((2.0 * gamma + 1.0) * y - (1.0 + gamma)) / y)
}

fn check_y_right_closed(y: f64) -> Result<()> {
    if y > 0.0 && y <= 1.0 {
        Ok(())
    } else {
        Err(Error::Domain { what: "y", value: y, domain: "(0, 1]" })
    }
}

/// (dh, dI) at an interior state.
pub fn rhs(params: &ModelParams, state: &AugmentedState) -> Result<(f64, f64)> {
    if !(state.y > 0.0 && state.y < 1.0) {
        return Err(Error::Domain { what: "y", value: state.y, domain: "(0, 1)" });
    }
    let [dh, di] = params.system().eval(state.y, state.h, state.i);
    Ok((dh, di))
}

/// First-order start (δ, γ + s₁δ, (γ−1)δ).
pub fn series_start(params: &ModelParams, delta: f64) -> Result<AugmentedState> {
    params.system().series_start(delta)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fig(xi: f64) -> ModelParams {
        ModelParams::new(0.5, 0.2, 2.0, xi).unwrap()
    }

    #[test]
    fn params_reject_bad_values() {
        assert!(ModelParams::new(0.0, 0.2, 2.0, 0.1).is_err());
        assert!(ModelParams::new(1.0, 0.2, 2.0, 0.1).is_err());
        assert!(ModelParams::new(0.5, 0.0, 2.0, 0.1).is_err());
        assert!(ModelParams::new(0.5, 0.2, 1.0, 0.1).is_err());
        assert!(ModelParams::new(0.5, 0.2, 2.0, 0.0).is_err());
        assert!(ModelParams::new(0.5, 0.2, 2.0, f64::NAN).is_err());
    }

    #[test]
    fn coefficients() {
        assert_eq!(coeff_a0(0.5, 1.0).unwrap(), 0.75);
        assert_eq!(coeff_a1(0.5, 1.0).unwrap(), 0.5);
        assert_eq!(coeff_a0(0.5, 0.5).unwrap(), 1.5);
        for g in [0.1, 0.5, 0.9] {
            assert!(coeff_a1(g, (1.0 + g) / (2.0 * g + 1.0)).unwrap().abs() < 1e-15);
        }
        assert!(coeff_a0(0.5, 0.0).is_err());
        assert!(coeff_a1(0.5, -0.1).is_err());
    }

    #[test]
    fn rhs_example_by_hand() {
        // a0 = 1.5, a1(0.5) = -1, a2 = 1.5 - 2 = -0.5
        let s = AugmentedState { y: 0.5, h: 0.5, i: 0.0 };
        let (dh, di) = rhs(&fig(0.06), &s).unwrap();
        assert!((dh - 0.25).abs() < 1e-15);
        assert!((di + 1.0).abs() < 1e-15);
    }

    #[test]
    fn rhs_matches_textbook_coefficients() {
        let p = fig(0.1);
        for &(y, h, i) in &[(0.01, 0.3, -0.01), (0.4, 0.7, -0.3), (0.97, 0.99, -0.5)] {
            let a0 = coeff_a0(0.5, y).unwrap();
            let a1 = coeff_a1(0.5, y).unwrap();
            let a2 = p.xi_over_var() * f64::exp(i) - p.a;
            let want = a0 + a1 * h / (1.0 - y) + a2 * h * h / (1.0 - y);
            let (dh, _) = rhs(&p, &AugmentedState { y, h, i }).unwrap();
            assert!((dh - want).abs() < 1e-12 * want.abs().max(1.0));
        }
    }

    #[test]
    fn di_vanishes_at_one() {
        for i in [-3.0, -0.1, 0.0] {
            let (_, di) = rhs(&fig(0.1), &AugmentedState { y: 0.3, h: 1.0, i }).unwrap();
            assert_eq!(di, 0.0);
        }
    }

    #[test]
    fn rhs_domain() {
        assert!(rhs(&fig(0.1), &AugmentedState { y: 0.0, h: 0.5, i: 0.0 }).is_err());
        assert!(rhs(&fig(0.1), &AugmentedState { y: 1.0, h: 0.5, i: 0.0 }).is_err());
    }

    #[test]
    fn series_slope_example() {
        assert!((fig(0.06).system().series_slope() - 0.05).abs() < 1e-15);
        let s = series_start(&fig(0.06), 1e-12).unwrap();
        assert!((s.h - 0.5).abs() < 1e-12 && s.i.abs() < 1e-11);
        assert!(series_start(&fig(0.06), 2e-3).is_err());
        assert!(series_start(&fig(0.06), 0.0).is_err());
    }
}
