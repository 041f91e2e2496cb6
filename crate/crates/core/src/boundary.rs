//! Scale density ρ and scale function s of the state process near both
//! endpoints.
//!
//! With ratio μ_Y/σ_Y² = b₀/y + b₁(y) near 0 (b₀ = (1+γ)/2) and
//! = −(1−γ)/(2(1−y)) + rem(y) near 1, the logarithmic parts of
//! ln ρ(y) = 2∫_y^a μ_Y/σ_Y² are integrated in closed form and only
//! bounded remainders go through quadrature.

use crate::equilibrium::drift_vol;
use crate::error::{Error, Result};
use crate::quad::adaptive;
use crate::report::ReportRow;
use crate::shooting::CriticalSolution;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoundaryConfig {
    /// anchor a of ρ and s
    pub anchor: f64,
    pub rel_tol: f64,
}

impl Default for BoundaryConfig {
    fn default() -> Self {
        Self { anchor: 0.5, rel_tol: 1e-12 }
    }
}

/// Dyadic exponents k of the left-end sequence y = 2⁻ᵏ.
pub const LEFT_EXPONENTS: std::ops::RangeInclusive<i32> = 4..=20;
/// Offsets ε of the right-end sequence y = 1 − ε.
pub const RIGHT_OFFSETS: [f64; 8] = [1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8];

#[derive(Debug, Clone)]
pub struct BoundaryReport {
    pub anchor: f64,
    /// (k, s(2⁻ᵏ))
    pub left: Vec<(i32, f64)>,
    /// (ε, s(1−ε))
    pub right: Vec<(f64, f64)>,
    /// lim s(y) as y → 1
    pub s_one: f64,
    /// (ε, ρ(1−ε)·ε^{1−γ})
    pub rho_scaled: Vec<(f64, f64)>,
    /// (ε, (s(1) − s(y))/(ρ(y)σ_Y(y)²)·(1−y)) at y = 1 − ε
    pub speed_lower: Vec<(f64, f64)>,
    /// (k, |s(2⁻ᵏ)|·2^{−kγ})
    pub left_scaled: Vec<(i32, f64)>,
}

impl BoundaryReport {
    /// |s(2⁻ᵏ)| strictly increasing in k.
    pub fn left_divergent(&self) -> bool {
        self.left.windows(2).all(|w| w[1].1.abs() > w[0].1.abs())
    }

    /// |s(1−ε₂) − s(1−ε₁)|/|s(1−ε₁)| for two offsets of the right sequence.
    pub fn right_cauchy(&self, e1: f64, e2: f64) -> Option<f64> {
        let find = |e: f64| self.right.iter().find(|p| p.0 == e).map(|p| p.1);
        let (a, b) = (find(e1)?, find(e2)?);
        Some((b - a).abs() / a.abs())
    }

    pub fn rho_scaled_bounds(&self) -> (f64, f64) {
        bounds(self.rho_scaled.iter().map(|p| p.1))
    }

    pub fn speed_lower_bounds(&self) -> (f64, f64) {
        bounds(self.speed_lower.iter().map(|p| p.1))
    }

    pub fn rows(&self) -> Vec<ReportRow> {
        let case = format!("boundary a={}", self.anchor);
        let mut rows = Vec::new();
        for (k, v) in &self.left {
            rows.push(ReportRow::new(&case, format!("s(2^-{k})"), *v, None));
        }
        for (k, v) in &self.left_scaled {
            rows.push(ReportRow::new(&case, format!("|s(2^-{k})|*2^(-{k}gamma)"), *v, None));
        }
        for (e, v) in &self.right {
            rows.push(ReportRow::new(&case, format!("s(1-{e:e})"), *v, Some(self.s_one)));
        }
        rows.push(ReportRow::new(&case, "s(1)", self.s_one, None));
        for (e, v) in &self.rho_scaled {
            rows.push(ReportRow::new(&case, format!("rho(1-{e:e})*{e:e}^(1-gamma)"), *v, None));
        }
        for (e, v) in &self.speed_lower {
            rows.push(ReportRow::new(&case, format!("(s(1)-s)/(rho sigma_Y^2)*(1-y) at 1-{e:e}"), *v, None));
        }
        rows
    }
}

fn bounds(it: impl Iterator<Item = f64>) -> (f64, f64) {
    it.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), v| (lo.min(v), hi.max(v)))
}

struct Scale<'a> {
    c: &'a CriticalSolution,
    a: f64,
    gamma: f64,
    tol: f64,
}

impl Scale<'_> {
    fn quad<F: FnMut(f64) -> f64>(&self, f: F, lo: f64, hi: f64) -> Result<f64> {
        adaptive(f, lo, hi, 1e-300, self.tol)
    }

    /// b₁(z) = (2γh − 1 − γ)/(2(1−z))
    fn b1(&self, z: f64) -> f64 {
        (2.0 * self.gamma * self.c.h(z) - 1.0 - self.gamma) / (2.0 * (1.0 - z))
    }

    /// rem(z) = (1+γ)/(2z) − γ(1−h)/(1−z)
    fn rem(&self, z: f64) -> f64 {
        (1.0 + self.gamma) / (2.0 * z) - self.gamma * (1.0 - self.c.h(z)) / (1.0 - z)
    }

    /// ln ρ(y) for y ≤ a
    fn ln_rho_left(&self, y: f64) -> Result<f64> {
        let tail = self.quad(|z| self.b1(z), y, self.a)?;
        Ok((1.0 + self.gamma) * (self.a / y).ln() + 2.0 * tail)
    }

    /// ln[ρ(y)(1−y)^{1−γ}] for y ≥ a
    fn ln_rho_scaled_right(&self, y: f64) -> Result<f64> {
        let tail = self.quad(|z| self.rem(z), self.a, y)?;
        Ok((1.0 - self.gamma) * (1.0 - self.a).ln() - 2.0 * tail)
    }

    fn rho(&self, y: f64) -> Result<f64> {
        if y <= self.a {
            self.ln_rho_left(y).map(f64::exp)
        } else {
            Ok(self.ln_rho_scaled_right(y)?.exp() * (1.0 - y).powf(self.gamma - 1.0))
        }
    }

    /// s(y) = −∫_y^a ρ for y < a, integrated in t = ln z.
    fn s_left(&self, y: f64) -> Result<f64> {
        let mut err = None;
        let v = self.quad(
            |t| {
                let z = t.exp();
                match self.ln_rho_left(z) {
                    Ok(l) => (l + t).exp(),
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                }
            },
            y.ln(),
            self.a.ln(),
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(-v?)
    }

    /// s(y) = ∫_a^y ρ for y ≥ a (y = 1 allowed), integrated in w = (1−z)^γ,
    /// which turns ρ dz into ρ(z)(1−z)^{1−γ} dw/γ.
    fn s_right(&self, y: f64) -> Result<f64> {
        let g = self.gamma;
        let mut err = None;
        let v = self.quad(
            |w| {
                let z = 1.0 - w.powf(1.0 / g);
                match self.ln_rho_scaled_right(z) {
                    Ok(l) => l.exp(),
                    Err(e) => {
                        err = Some(e);
                        f64::NAN
                    }
                }
            },
            (1.0 - y).powf(g),
            (1.0 - self.a).powf(g),
        );
        if let Some(e) = err {
            return Err(e);
        }
        Ok(v? / g)
    }
}

pub fn boundary_diagnostics(critical: &CriticalSolution, cfg: &BoundaryConfig) -> Result<BoundaryReport> {
    let a = cfg.anchor;
    if !(a > 0.0 && a < 1.0) {
        return Err(Error::Domain { what: "anchor", value: a, domain: "(0, 1)" });
    }
    let sc = Scale { c: critical, a, gamma: critical.params.gamma, tol: cfg.rel_tol };
    let g = sc.gamma;
    let mut left = Vec::new();
    let mut left_scaled = Vec::new();
    for k in LEFT_EXPONENTS {
        let y = 2f64.powi(-k);
        let s = sc.s_left(y)?;
        left.push((k, s));
        left_scaled.push((k, s.abs() * y.powf(g)));
    }
    let s_one = sc.s_right(1.0)?;
    let mut right = Vec::new();
    let mut rho_scaled = Vec::new();
    let mut speed_lower = Vec::new();
    for e in RIGHT_OFFSETS {
        let y = 1.0 - e;
        right.push((e, sc.s_right(y)?));
        rho_scaled.push((e, sc.ln_rho_scaled_right(y)?.exp()));
        let (_, sig) = drift_vol(critical, y)?;
        // s(1) − s(y) directly, to avoid cancellation
        let gap = {
            let mut err = None;
            let v = sc.quad(
                |w| match sc.ln_rho_scaled_right(1.0 - w.powf(1.0 / g)) {
                    Ok(l) => l.exp(),
                    Err(x) => {
                        err = Some(x);
                        f64::NAN
                    }
                },
                0.0,
                e.powf(g),
            );
            if let Some(x) = err {
                return Err(x);
            }
            v? / g
        };
        speed_lower.push((e, gap / (sc.rho(y)? * sig * sig) * e));
    }
    Ok(BoundaryReport { anchor: a, left, right, s_one, rho_scaled, speed_lower, left_scaled })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::IntegratorConfig;
    use crate::shooting::{find_critical, ShootingParams};

    #[test]
    fn figure_economy_boundaries() {
        let sp = ShootingParams::new(0.5, 0.2, 2.0).unwrap();
        let c = find_critical(&sp, 1e-9, &IntegratorConfig::default()).unwrap();
        let r = boundary_diagnostics(&c, &BoundaryConfig::default()).unwrap();
        assert!(r.left_divergent());
        // |s(y)|·y^γ settles to a constant
        let n = r.left_scaled.len();
        let (u, v) = (r.left_scaled[n - 2].1, r.left_scaled[n - 1].1);
        assert!((u / v - 1.0).abs() < 1e-3);
        let (lo, hi) = r.rho_scaled_bounds();
        assert!(lo > 0.0 && hi / lo < 2.0);
        // s(1−ε) increases toward s(1) with gap ~ ε^γ
        for w in r.right.windows(2) {
            assert!(w[1].1 > w[0].1 && w[1].1 < r.s_one);
        }
        let (lo, hi) = r.speed_lower_bounds();
        assert!(lo > 0.0 && hi.is_finite());
        // (s(1)−s)/(ρσ_Y²)·(1−y) → 1/(γσ²) = 50
        assert!((r.speed_lower.last().unwrap().1 - 50.0).abs() < 0.5);
        assert_eq!(r.rows().len(), 2 * 17 + 8 + 1 + 8 + 8);
    }

    #[test]
    fn anchor_domain() {
        let sp = ShootingParams::new(0.5, 0.2, 2.0).unwrap();
        let c = find_critical(&sp, 1e-9, &IntegratorConfig::default()).unwrap();
        assert!(boundary_diagnostics(&c, &BoundaryConfig { anchor: 1.0, ..Default::default() }).is_err());
    }
}
