use std::io::Write;

use super::RiccatiSystem;
use crate::error::{Error, Result};
use crate::interp::MonotoneCubic;

/// One point (y, h, I) of the augmented trajectory.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AugmentedState {
    pub y: f64,
    pub h: f64,
    /// ∫₀^y (h−1)/(1−q) dq
    pub i: f64,
}

/// Sampled trajectory with monotone cubic interpolation of h and I.
#[derive(Debug, Clone)]
pub struct SolutionGrid {
    points: Vec<AugmentedState>,
    system: RiccatiSystem,
    start_offset: f64,
    end_offset: f64,
    h: MonotoneCubic,
    i: MonotoneCubic,
}

impl SolutionGrid {
    /// Nodes with known slopes (dh, dI), as produced by the integrator.
    pub fn with_slopes(
        system: RiccatiSystem,
        points: Vec<AugmentedState>,
        slopes: Vec<[f64; 2]>,
        start_offset: f64,
        end_offset: f64,
    ) -> Self {
        check_increasing(&points);
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        let h = MonotoneCubic::with_slopes(
            ys.clone(),
            points.iter().map(|p| p.h).collect(),
            slopes.iter().map(|s| s[0]).collect(),
        );
        let i = MonotoneCubic::with_slopes(
            ys,
            points.iter().map(|p| p.i).collect(),
            slopes.iter().map(|s| s[1]).collect(),
        );
        Self { points, system, start_offset, end_offset, h, i }
    }

    /// Nodes only; slopes are estimated.
    pub fn from_points(system: RiccatiSystem, points: Vec<AugmentedState>, start_offset: f64, end_offset: f64) -> Self {
        check_increasing(&points);
        let ys: Vec<f64> = points.iter().map(|p| p.y).collect();
        let h = MonotoneCubic::new(ys.clone(), points.iter().map(|p| p.h).collect());
        let i = MonotoneCubic::new(ys, points.iter().map(|p| p.i).collect());
        Self { points, system, start_offset, end_offset, h, i }
    }

    pub fn points(&self) -> &[AugmentedState] {
        &self.points
    }

    pub fn system(&self) -> &RiccatiSystem {
        &self.system
    }

    pub fn start_offset(&self) -> f64 {
        self.start_offset
    }

    pub fn end_offset(&self) -> f64 {
        self.end_offset
    }

    pub fn first(&self) -> &AugmentedState {
        &self.points[0]
    }

    pub fn last(&self) -> &AugmentedState {
        self.points.last().unwrap()
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn max_h(&self) -> f64 {
        self.points.iter().map(|p| p.h).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn min_h(&self) -> f64 {
        self.points.iter().map(|p| p.h).fold(f64::INFINITY, f64::min)
    }

    pub fn contains(&self, y: f64) -> bool {
        y >= self.first().y && y <= self.last().y
    }

    /// Interpolated state; errors outside [first y, last y].
    pub fn eval(&self, y: f64) -> Result<AugmentedState> {
        if !self.contains(y) {
            return Err(Error::Domain { what: "y", value: y, domain: "the grid range" });
        }
        Ok(AugmentedState { y, h: self.h.eval(y), i: self.i.eval(y) })
    }

    /// Derivative of the h interpolant.
    pub fn h_slope(&self, y: f64) -> f64 {
        self.h.derivative(y)
    }

    /// CSV `y,h,I,exp_I` with 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "y,h,I,exp_I")?;
        for p in &self.points {
            writeln!(w, "{},{},{},{}", fmt17(p.y), fmt17(p.h), fmt17(p.i), fmt17(p.i.exp()))?;
        }
        Ok(())
    }
}

fn check_increasing(points: &[AugmentedState]) {
    assert!(!points.is_empty(), "empty grid");
    assert!(points.windows(2).all(|w| w[1].y > w[0].y), "grid y must increase strictly");
}

/// Full double precision, 17 significant digits.
pub fn fmt17(v: f64) -> String {
    format!("{v:.16e}")
}
