use super::{AugmentedState, ModelParams, SolutionGrid};
use crate::error::{Error, Result};
use crate::quad::{fixed, gauss_legendre};

/// Final Picard iterate and the sup-distances between successive iterates.
#[derive(Debug, Clone)]
pub struct PicardSolution {
    pub grid: SolutionGrid,
    pub distances: Vec<f64>,
}

const NOISE_FLOOR: f64 = 1e-14;

/// Iterates f ← T(f) from f ≡ γ on a uniform grid over [0, δ].
///
/// T(f)(y) = φ(y)⁻¹ ∫₀^y φ(t)(a₀ + a₂f²/(1−t)) dt with φ = t^{1+γ}(1−t)^γ.
/// The integrand is written as t^γ·H(t) and integrated in u = t^{1+γ},
/// which absorbs the weight exactly.
pub fn picard_local(params: &ModelParams, delta: f64, n_iter: usize, n_grid: usize) -> Result<PicardSolution> {
    if !(delta > 0.0 && delta <= 0.5) {
        return Err(Error::Domain { what: "delta", value: delta, domain: "(0, 1/2]" });
    }
    if n_iter < 1 {
        return Err(Error::InvalidParam { name: "n_iter", value: n_iter as f64, reason: "must be >= 1" });
    }
    if n_grid < 4 {
        return Err(Error::InvalidParam { name: "n_grid", value: n_grid as f64, reason: "must be >= 4" });
    }
    let op = Operator::new(params, delta, n_grid);
    let mut f = vec![params.gamma; n_grid];
    let mut distances = Vec::with_capacity(n_iter);
    for k in 0..n_iter {
        let next = op.apply(&f);
        let d = next.iter().zip(&f).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        f = next;
        if let Some(&prev) = distances.last() {
            if d > prev && d > NOISE_FLOOR {
                return Err(Error::NonContraction { iteration: k + 1, last: d, previous: prev });
            }
        }
        distances.push(d);
    }
    let i_nodes = op.integral_nodes(&f);
    let sys = params.system();
    let mut points = Vec::with_capacity(n_grid);
    let mut slopes = Vec::with_capacity(n_grid);
    for ((&y, &h), &i) in op.nodes.iter().zip(&f).zip(&i_nodes) {
        points.push(AugmentedState { y, h, i });
        slopes.push(if y == 0.0 { [sys.series_slope(), params.gamma - 1.0] } else { sys.eval(y, h, i) });
    }
    let grid = SolutionGrid::with_slopes(sys, points, slopes, 0.0, 1.0 - delta);
    Ok(PicardSolution { grid, distances })
}

struct Operator {
    gamma: f64,
    xi_over_var: f64,
    a: f64,
    nodes: Vec<f64>,
    step: f64,
    outer: (Vec<f64>, Vec<f64>),
    inner: (Vec<f64>, Vec<f64>),
}

impl Operator {
    fn new(p: &ModelParams, delta: f64, n: usize) -> Self {
        let step = delta / (n - 1) as f64;
        Self {
            gamma: p.gamma,
            xi_over_var: p.xi_over_var(),
            a: p.a,
            nodes: (0..n).map(|j| j as f64 * step).collect(),
            step,
            outer: gauss_legendre(12),
            inner: gauss_legendre(8),
        }
    }

    /// Cubic Lagrange interpolation of node values.
    fn interp(&self, f: &[f64], t: f64) -> f64 {
        let n = f.len();
        let s = t / self.step;
        let j0 = (s.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
        let mut v = 0.0;
        for a in 0..4 {
            let mut w = 1.0;
            for b in 0..4 {
                if a != b {
                    w *= (s - (j0 + b) as f64) / ((a as f64) - (b as f64));
                }
            }
            v += w * f[j0 + a];
        }
        v
    }

    fn integral_nodes(&self, f: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; f.len()];
        for j in 1..f.len() {
            let (a, b) = (self.nodes[j - 1], self.nodes[j]);
            out[j] = out[j - 1] + fixed(&self.inner, a, b, |t| (self.interp(f, t) - 1.0) / (1.0 - t));
        }
        out
    }

    fn integral_at(&self, f: &[f64], i_nodes: &[f64], t: f64) -> f64 {
        let j = ((t / self.step).floor() as usize).min(f.len() - 1);
        let a = self.nodes[j];
        i_nodes[j] + fixed(&self.inner, a, t, |q| (self.interp(f, q) - 1.0) / (1.0 - q))
    }

    fn apply(&self, f: &[f64]) -> Vec<f64> {
        let g = self.gamma;
        let i_nodes = self.integral_nodes(f);
        let big_h = |t: f64| {
            let fv = self.interp(f, t);
            let a2 = self.xi_over_var * self.integral_at(f, &i_nodes, t).exp() - self.a;
            g * (1.0 + g) * (1.0 - t).powf(g) + t * (1.0 - t).powf(g - 1.0) * a2 * fv * fv
        };
        // ∫_a^b t^γ H(t) dt = (1+γ)⁻¹ ∫ H(u^{1/(1+γ)}) du
        let p = 1.0 + g;
        let cell = |a: f64, b: f64| fixed(&self.outer, a.powf(p), b.powf(p), |u| big_h(u.powf(1.0 / p))) / p;

        let n = f.len();
        let mut out = vec![g; n];
        let mut acc = 0.0;
        for j in 1..n {
            let (a, b) = (self.nodes[j - 1], self.nodes[j]);
            acc += if j == 1 {
                // geometric refinement toward the endpoint
                let mut s = 0.0;
                let mut hi = b;
                for _ in 0..40 {
                    let lo = 0.5 * hi;
                    s += cell(lo, hi);
                    hi = lo;
                }
                s + cell(0.0, hi)
            } else {
                cell(a, b)
            };
            out[j] = acc / (b.powf(p) * (1.0 - b).powf(g));
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ode::{integrate, IntegratorConfig, TrajectoryOutcome};

    #[test]
    fn value_at_zero_is_gamma() {
        for (g, xi) in [(0.5, 0.06), (0.3, 0.01), (0.8, 0.1)] {
            let p = ModelParams::new(g, 0.2, 2.0, xi).unwrap();
            let s = picard_local(&p, 1e-2, 3, 21).unwrap();
            assert_eq!(s.grid.first().h, g);
            assert_eq!(s.grid.first().y, 0.0);
        }
    }

    #[test]
    fn first_iterate_is_flat_to_first_order_when_a2_vanishes_at_zero() {
        // ξ/σ² = A − 1, so s₁ = 0
        let p = ModelParams::new(0.5, 0.2, 2.0, 0.04).unwrap();
        let s = picard_local(&p, 1e-2, 1, 101).unwrap();
        let pts = s.grid.points();
        let ratio = |k: usize| (pts[k].h - 0.5).abs() / pts[k].y;
        assert!(ratio(1) < 1.0 && ratio(10) < 1.0 && ratio(100) < 1.0);
        assert!(pts[1].h - 0.5 < 1e-3);
    }

    #[test]
    fn contracts_and_matches_series_slope() {
        let p = ModelParams::new(0.5, 0.2, 2.0, 0.06).unwrap();
        let s = picard_local(&p, 1e-3, 20, 101).unwrap();
        assert!(s.distances[0] > s.distances[1]);
        assert!(*s.distances.last().unwrap() < 1e-14);
        let slope = p.system().series_slope();
        for pt in &s.grid.points()[1..] {
            let resid = pt.h - 0.5 - slope * pt.y;
            assert!(resid.abs() < 5.0 * pt.y * pt.y, "y={} resid={resid}", pt.y);
        }
    }

    #[test]
    fn agrees_with_integrator_near_zero() {
        let p = ModelParams::new(0.5, 0.2, 2.0, 0.06).unwrap();
        let s = picard_local(&p, 1e-3, 20, 101).unwrap();
        let cfg = IntegratorConfig::default();
        let TrajectoryOutcome::Completed(g) = integrate(&p, &cfg).unwrap() else { panic!() };
        let mut worst: f64 = 0.0;
        for pt in g.points().iter().filter(|q| q.y <= 1e-3) {
            let q = s.grid.eval(pt.y).unwrap();
            worst = worst.max((q.h - pt.h).abs()).max((q.i - pt.i).abs());
        }
        assert!(worst <= 10.0 * cfg.rel_tol, "worst = {worst:e}");
    }

    #[test]
    fn rejects_bad_input() {
        let p = ModelParams::new(0.5, 0.2, 2.0, 0.06).unwrap();
        assert!(picard_local(&p, 0.6, 2, 10).is_err());
        assert!(picard_local(&p, 1e-3, 0, 10).is_err());
        assert!(picard_local(&p, 1e-3, 2, 3).is_err());
    }

    #[test]
    fn wide_interval_stops_contracting() {
        // far from the left endpoint the operator is no longer a contraction
        let p = ModelParams::new(0.5, 0.2, 2.0, 0.5).unwrap();
        assert!(matches!(picard_local(&p, 0.5, 40, 41), Err(Error::NonContraction { .. })));
    }
}
