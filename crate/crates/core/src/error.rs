use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter {name} = {value}: {reason}")]
    InvalidParam {
        name: &'static str,
        value: f64,
        reason: &'static str,
    },

    #[error("{what} = {value} outside {domain}")]
    Domain {
        what: &'static str,
        value: f64,
        domain: &'static str,
    },

    #[error("step underflow at y = {y} (h = {h}, step {step:e}) without growth in h")]
    StepUnderflow { y: f64, h: f64, step: f64 },

    #[error("trajectory terminated at y = {y} before reaching the right cutoff")]
    Incomplete { y: f64 },

    #[error("integration exceeded {0} steps")]
    TooManySteps(usize),

    #[error("Picard iteration not contracting at iteration {iteration}: sup distance {last:e} after {previous:e}")]
    NonContraction {
        iteration: usize,
        last: f64,
        previous: f64,
    },

    #[error("classification indeterminate at xi = {xi}: {reason}; tighten tolerances")]
    Indeterminate { xi: f64, reason: String },

    #[error("no supercritical xi after {doublings} doublings from xi_lo = {xi_lo}")]
    Bracket { xi_lo: f64, doublings: u32 },

    #[error("{source} (bracket history: {history:?})")]
    Shooting {
        source: Box<Error>,
        history: Vec<(f64, f64)>,
    },

    #[error("critical grid fails certification: {0}")]
    Certification(String),

    #[error("theta2 = {theta2} outside (0, {upper})")]
    OutOfRange { theta2: f64, upper: f64 },

    #[error("horizon too short: tail bound {tail} exceeds 1% of {total}")]
    HorizonTooShort { tail: f64, total: f64 },

    #[error("clamp rate too high: {events} clamp events in {steps} steps")]
    ClampRate { events: u64, steps: u64 },

    #[error("adaptive quadrature did not converge on [{a}, {b}]")]
    Quadrature { a: f64, b: f64 },

    #[error("economy has A = {economy} but the critical solution was computed for A = {critical}")]
    Mismatch { economy: f64, critical: f64 },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
