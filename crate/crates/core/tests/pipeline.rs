use radner_core::{
    classify, drift_vol, find_critical, picard_local, rate_and_mpr, CriticalSolution, EconomyParams, Equilibrium,
    IntegratorConfig, ShootingParams,
};

fn critical(a: f64) -> CriticalSolution {
    let sp = ShootingParams::new(0.5, 0.2, a).unwrap();
    find_critical(&sp, 1e-9, &IntegratorConfig::default()).unwrap()
}

#[test]
fn bracket_history_stays_valid() {
    let c = critical(2.0);
    let cfg = IntegratorConfig::default();
    assert!(c.bracket_history.len() > 10);
    for w in c.bracket_history.windows(2) {
        let ((l0, h0), (l1, h1)) = (w[0], w[1]);
        assert!(l1 >= l0 && h1 <= h0 && l1 < h1);
        assert!((h1 - l1) <= 0.5 * (h0 - l0) + 2.0 * f64::EPSILON * h0);
    }
    // spot-check the ends of every fifth bracket
    for &(lo, hi) in c.bracket_history.iter().step_by(5) {
        assert!(classify(&c.params.with_xi(lo).unwrap(), &cfg).unwrap().is_subcritical());
        assert!(!classify(&c.params.with_xi(hi).unwrap(), &cfg).unwrap().is_subcritical());
    }
    let &(lo, hi) = c.bracket_history.last().unwrap();
    assert!(lo <= c.xi0 && c.xi0 <= hi && hi - lo <= 2e-9);
}

#[test]
fn critical_solution_bounds() {
    let c = critical(2.0);
    let g = c.params.gamma;
    for k in 0..=2000 {
        let y = k as f64 / 2000.0;
        let h = c.h(y);
        assert!(h >= g - 1e-9 && h <= 1.0 + 1e-9, "h({y})={h}");
        assert!(c.i(y).exp() >= c.l - 1e-6, "e^I({y}) below L");
    }
    assert!((c.h(1.0) - 1.0).abs() < 1e-9);
}

#[test]
fn slope_sequence_approaches_the_limit() {
    let c = critical(2.0);
    let s = &c.slope_sequence;
    assert!(s.len() >= 4);
    let errs: Vec<f64> = s.iter().map(|&(_, q)| (q - c.hprime1).abs()).collect();
    assert!(errs.windows(2).all(|w| w[1] < w[0]), "{errs:?}");
}

#[test]
fn xi0_stable_when_offsets_halve() {
    let sp = ShootingParams::new(0.5, 0.2, 2.0).unwrap();
    let base = IntegratorConfig::default();
    let finer = IntegratorConfig { start_offset: base.start_offset / 2.0, end_offset: base.end_offset / 2.0, ..base };
    let a = find_critical(&sp, 1e-9, &base).unwrap().xi0;
    let b = find_critical(&sp, 1e-9, &finer).unwrap().xi0;
    assert!((a - b).abs() <= 1e-8, "{a} vs {b}");
}

#[test]
fn picard_agrees_at_a_second_parameter_set() {
    let sp = ShootingParams::new(0.3, 0.15, 1.7).unwrap();
    let c = find_critical(&sp, 1e-9, &IntegratorConfig::default()).unwrap();
    let p = c.model_params();
    let pic = picard_local(&p, 0.1, 12, 128).unwrap();
    for k in 1..=10 {
        let y = 0.01 * k as f64;
        let a = pic.grid.eval(y).unwrap().h;
        assert!((a - c.h(y)).abs() < 1e-6, "y={y}: {a} vs {}", c.h(y));
    }
}

#[test]
fn equilibrium_mpr_and_rate() {
    let econ = EconomyParams::new(0.025, 0.02, 0.2, 0.5, 1.0).unwrap();
    let eq = Equilibrium::solve(econ, 1e-9, &IntegratorConfig::default()).unwrap();
    let floor = econ.gamma * econ.sigma_d;
    let mut prev = f64::NEG_INFINITY;
    for k in 1..1000 {
        let y = k as f64 / 1000.0;
        let (r, kappa) = rate_and_mpr(&eq.critical, &econ, y).unwrap();
        assert!(kappa >= floor - 1e-12, "kappa({y})={kappa}");
        if y < 0.05 {
            assert!(r > prev, "r not increasing at {y}");
        }
        prev = r;
        let (_, s) = drift_vol(&eq.critical, y).unwrap();
        assert!(s > 0.0);
    }
}
