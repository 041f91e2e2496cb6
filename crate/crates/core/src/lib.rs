//! Shooting solver for a singular path-dependent Riccati boundary-value
//! problem and the equilibrium quantities built on its critical solution.

pub mod boundary;
pub mod equilibrium;
pub mod error;
pub mod extrap;
pub mod interp;
pub mod ode;
pub mod quad;
pub mod report;
pub mod riccati;
pub mod sde;
pub mod shooting;
pub mod verify;

pub use boundary::{boundary_diagnostics, BoundaryConfig, BoundaryReport};
pub use equilibrium::{
    compute_a, drift_vol, g_ode_residual, g_value, rate_and_mpr, solve_y0, EconomyParams, Equilibrium,
};
pub use error::{Error, Result};
pub use ode::{
    coeff_a0, coeff_a1, integrate, picard_local, rhs, series_start, AugmentedState, IntegratorConfig, ModelParams,
    SolutionGrid, TrajectoryOutcome,
};
pub use report::ReportRow;
pub use riccati::{appendix_diagnostics, solve_constant_riccati, stationary_value, ConstantRiccatiParams};
pub use sde::{
    mc_dividend_integral, mc_feynman_kac, simulate_joint, wealth_ode_residual, Ensemble, McEstimate, SimConfig,
};
pub use shooting::{
    classify, find_critical, initial_bracket, subcritical_endpoint, Classification, CriticalSolution, ShootingParams,
};
pub use verify::{Battery, Check, VerifyConfig};
