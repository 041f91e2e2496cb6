use proptest::prelude::*;
use radner_core::{integrate, IntegratorConfig, ModelParams, ShootingParams, TrajectoryOutcome};

fn fig() -> ShootingParams {
    ShootingParams::new(0.5, 0.2, 2.0).unwrap()
}

fn cfg() -> IntegratorConfig {
    IntegratorConfig { rel_tol: 1e-9, abs_tol: 1e-9, ..IntegratorConfig::default() }
}

// xi0 for the figure parameters is about 0.1223
const XI_CRIT: f64 = 0.1223;

fn params(gamma: f64, sigma: f64, a: f64, xi: f64) -> ModelParams {
    ModelParams::new(gamma, sigma, a, xi).unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 48, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn completed_grids_stay_positive(gamma in 0.1f64..0.9, sigma in 0.1f64..0.4, extra in 0.2f64..2.0, frac in 0.05f64..0.95) {
        let a = 1.0 + extra;
        let sp = ShootingParams::new(gamma, sigma, a).unwrap();
        let xi = sp.xi_lo() * (1.0 + frac);
        if let Ok(TrajectoryOutcome::Completed(g)) = integrate(&params(gamma, sigma, a, xi), &cfg()) {
            prop_assert!(g.points().iter().all(|p| p.h > 0.0 && p.h.is_finite() && p.i.is_finite()));
            prop_assert!(g.points().windows(2).all(|w| w[1].y > w[0].y));
        }
    }

    #[test]
    fn larger_xi_gives_larger_h(x1 in 0.06f64..0.12, gap in 1e-4f64..2e-3) {
        let sp = fig();
        let x2 = (x1 + gap).min(XI_CRIT - 1e-4);
        prop_assume!(x2 > x1);
        let lo = integrate(&sp.with_xi(x1).unwrap(), &cfg()).unwrap();
        let hi = integrate(&sp.with_xi(x2).unwrap(), &cfg()).unwrap();
        let (gl, gh) = (lo.grid(), hi.grid());
        let end = gl.last().y.min(gh.last().y);
        for k in 1..200 {
            let y = end * k as f64 / 200.0;
            if gl.contains(y) && gh.contains(y) {
                prop_assert!(gh.eval(y).unwrap().h >= gl.eval(y).unwrap().h - 1e-9, "y={y}");
            }
        }
    }

    #[test]
    fn exp_i_falls_while_h_below_one(xi in 0.03f64..0.2) {
        let o = integrate(&fig().with_xi(xi).unwrap(), &cfg()).unwrap();
        let pts = o.grid().points();
        for w in pts.windows(2) {
            if w[0].h <= 1.0 && w[1].h <= 1.0 {
                prop_assert!(w[1].i <= w[0].i + 1e-12, "I rose at y={}", w[1].y);
            }
        }
    }

    #[test]
    fn i_is_the_integral_of_its_rhs(xi in 0.05f64..0.12) {
        let o = integrate(&fig().with_xi(xi).unwrap(), &cfg()).unwrap();
        let g = o.grid();
        let (a, b, n) = (0.01, 0.9, 20_000);
        let dy = (b - a) / n as f64;
        let f = |y: f64| {
            let s = g.eval(y).unwrap();
            (s.h - 1.0) / (1.0 - y)
        };
        let acc: f64 = (0..n).map(|k| f(a + (k as f64 + 0.5) * dy) * dy).sum();
        let direct = g.eval(b).unwrap().i - g.eval(a).unwrap().i;
        prop_assert!((acc - direct).abs() < 1e-5 * (1.0 + direct.abs()), "{acc} vs {direct}");
    }
}

/// sup over y ≤ 0.9 of |h_ξ₁(y) − h_ξ₂(y)| / (y·|ξ₁ − ξ₂|) for consecutive ξ.
fn lipschitz_in_xi(c: &IntegratorConfig) -> f64 {
    let sp = fig();
    let xis: Vec<f64> = (0..8).map(|k| 0.06 + 0.008 * k as f64).collect();
    let grids: Vec<_> = xis.iter().map(|&xi| integrate(&sp.with_xi(xi).unwrap(), c).unwrap().into_grid()).collect();
    let mut worst: f64 = 0.0;
    for (w, x) in grids.windows(2).zip(xis.windows(2)) {
        for k in 1..=90 {
            let y = k as f64 / 100.0;
            let d = w[1].eval(y).unwrap().h - w[0].eval(y).unwrap().h;
            worst = worst.max(d.abs() / (y * (x[1] - x[0])));
        }
    }
    worst
}

#[test]
fn lipschitz_in_xi_is_finite_and_stable() {
    let c0 = IntegratorConfig::default();
    let a = lipschitz_in_xi(&c0);
    let b = lipschitz_in_xi(&c0.halved());
    assert!(a.is_finite() && a > 0.0);
    assert!((a - b).abs() < 1e-3 * a, "{a} vs {b}");
}

#[test]
fn refinement_changes_shrink() {
    let p = fig().with_xi(0.1).unwrap();
    let base = IntegratorConfig { rel_tol: 1e-7, abs_tol: 1e-7, start_offset: 1e-4, end_offset: 1e-5, ..IntegratorConfig::default() };
    let probe = [0.1, 0.3, 0.5, 0.7, 0.9];
    let sample = |c: &IntegratorConfig| -> Vec<f64> {
        let o = integrate(&p, c).unwrap();
        probe.iter().map(|&y| o.grid().eval(y).unwrap().h).collect()
    };
    let mut cfgs = vec![base];
    for _ in 0..4 {
        let next = cfgs.last().unwrap().halved();
        cfgs.push(next);
    }
    let vals: Vec<Vec<f64>> = cfgs.iter().map(sample).collect();
    let diffs: Vec<f64> =
        vals.windows(2).map(|w| w[0].iter().zip(&w[1]).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)).collect();
    for w in diffs.windows(2) {
        assert!(w[1] < 4.0 * w[0] + 1e-12, "{diffs:?}");
    }
    assert!(diffs.last().unwrap() < &1e-6, "{diffs:?}");
}
