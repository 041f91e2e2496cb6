//! Shape-preserving cubic Hermite interpolation.

/// Monotone piecewise cubic Hermite interpolant (Fritsch–Carlson).
#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
}

impl MonotoneCubic {
    /// Builds from node values and node slopes; slopes are limited so the
    /// interpolant stays monotone on every interval where the data are.
    pub fn with_slopes(x: Vec<f64>, y: Vec<f64>, mut d: Vec<f64>) -> Self {
        assert!(x.len() == y.len() && y.len() == d.len() && !x.is_empty());
        for k in 0..x.len().saturating_sub(1) {
            let delta = (y[k + 1] - y[k]) / (x[k + 1] - x[k]);
            if delta == 0.0 {
                d[k] = 0.0;
                d[k + 1] = 0.0;
                continue;
            }
            if d[k] * delta < 0.0 {
                d[k] = 0.0;
            }
            if d[k + 1] * delta < 0.0 {
                d[k + 1] = 0.0;
            }
            let a = d[k] / delta;
            let b = d[k + 1] / delta;
            let s = a * a + b * b;
            if s > 9.0 {
                let t = 3.0 / s.sqrt();
                d[k] = t * a * delta;
                d[k + 1] = t * b * delta;
            }
        }
        Self { x, y, d }
    }

    /// PCHIP slopes estimated from the data alone.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Self {
        let n = x.len();
        assert!(n == y.len() && n >= 1);
        if n == 1 {
            return Self::with_slopes(x, y, vec![0.0]);
        }
        let hs: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let del: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / hs[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = del[0];
            d[1] = del[0];
            return Self::with_slopes(x, y, d);
        }
        for k in 1..n - 1 {
            if del[k - 1] * del[k] > 0.0 {
                let w1 = 2.0 * hs[k] + hs[k - 1];
                let w2 = hs[k] + 2.0 * hs[k - 1];
                d[k] = (w1 + w2) / (w1 / del[k - 1] + w2 / del[k]);
            }
        }
        d[0] = end_slope(hs[0], hs[1], del[0], del[1]);
        d[n - 1] = end_slope(hs[n - 2], hs[n - 3], del[n - 2], del[n - 3]);
        Self::with_slopes(x, y, d)
    }

    pub fn x(&self) -> &[f64] {
        &self.x
    }

    fn locate(&self, t: f64) -> usize {
        let n = self.x.len();
        match self.x.partition_point(|&v| v <= t) {
            0 => 0,
            k if k >= n => n - 2,
            k => k - 1,
        }
    }

    /// Value at `t`; outside the node range the end cubic is extended.
    pub fn eval(&self, t: f64) -> f64 {
        if self.x.len() == 1 {
            return self.y[0];
        }
        let k = self.locate(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let (h00, h10, h01, h11) = hermite_basis(s);
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    pub fn derivative(&self, t: f64) -> f64 {
        if self.x.len() == 1 {
            return 0.0;
        }
        let k = self.locate(t);
        let h = self.x[k + 1] - self.x[k];
        let s = (t - self.x[k]) / h;
        let d00 = 6.0 * s * s - 6.0 * s;
        let d10 = 3.0 * s * s - 4.0 * s + 1.0;
        let d01 = -d00;
        let d11 = 3.0 * s * s - 2.0 * s;
        (d00 * self.y[k] + d01 * self.y[k + 1]) / h + d10 * self.d[k] + d11 * self.d[k + 1]
    }
}

fn hermite_basis(s: f64) -> (f64, f64, f64, f64) {
    let s2 = s * s;
    let s3 = s2 * s;
    (
        2.0 * s3 - 3.0 * s2 + 1.0,
        s3 - 2.0 * s2 + s,
        -2.0 * s3 + 3.0 * s2,
        s3 - s2,
    )
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if d * d0 <= 0.0 {
        0.0
    } else if d0 * d1 < 0.0 && d.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn reproduces_cubic_with_exact_slopes() {
        let f = |t: f64| t * t * t - t;
        let fp = |t: f64| 3.0 * t * t - 1.0;
        let x: Vec<f64> = (0..11).map(|i| 1.0 + i as f64 * 0.1).collect();
        let y = x.iter().map(|&t| f(t)).collect();
        let d = x.iter().map(|&t| fp(t)).collect();
        let m = MonotoneCubic::with_slopes(x, y, d);
        for t in [1.03, 1.47, 1.999] {
            assert!((m.eval(t) - f(t)).abs() < 1e-13);
            assert!((m.derivative(t) - fp(t)).abs() < 1e-11);
        }
    }

    #[test]
    fn hits_nodes() {
        let x = vec![0.0, 0.3, 0.5, 1.0];
        let y = vec![1.0, 2.0, 2.0, 5.0];
        let m = MonotoneCubic::new(x.clone(), y.clone());
        for (a, b) in x.iter().zip(&y) {
            assert_eq!(m.eval(*a), *b);
        }
        // flat interval stays flat
        assert_eq!(m.eval(0.4), 2.0);
    }

    proptest! {
        #[test]
        fn monotone_data_give_monotone_interpolant(
            steps in prop::collection::vec((0.01f64..1.0, 0.0f64..3.0), 3..20),
            seeds in prop::collection::vec(-50.0f64..50.0, 20),
        ) {
            let mut x = vec![0.0];
            let mut y = vec![0.0];
            for (dx, dy) in &steps {
                x.push(x.last().unwrap() + dx);
                y.push(y.last().unwrap() + dy);
            }
            let d: Vec<f64> = (0..x.len()).map(|i| seeds[i % seeds.len()]).collect();
            for m in [MonotoneCubic::new(x.clone(), y.clone()), MonotoneCubic::with_slopes(x.clone(), y.clone(), d)] {
                let n = 400;
                let hi = *x.last().unwrap();
                let mut prev = m.eval(0.0);
                for i in 1..=n {
                    let v = m.eval(hi * i as f64 / n as f64);
                    prop_assert!(v >= prev - 1e-12);
                    prev = v;
                }
            }
        }
    }
}
