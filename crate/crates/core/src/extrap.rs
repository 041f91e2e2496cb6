//! Richardson-type extrapolation to r = 0 for expansions c + k₁r^p₁ + k₂r^p₂.

/// c + k₁r^p₁ + k₂r^p₂
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Expansion {
    pub c: f64,
    pub k: [f64; 2],
    pub p: [f64; 2],
}

impl Expansion {
    /// Fits through three samples (r_i, v_i).
    pub fn fit(r: [f64; 3], v: [f64; 3], p: [f64; 2]) -> Self {
        let s = r[0];
        let mut m = [[0.0; 4]; 3];
        for i in 0..3 {
            let x = r[i] / s;
            m[i] = [1.0, x.powf(p[0]), x.powf(p[1]), v[i]];
        }
        // Gaussian elimination with partial pivoting on the scaled system
        for c in 0..3 {
            let piv = (c..3).max_by(|&a, &b| m[a][c].abs().total_cmp(&m[b][c].abs())).unwrap();
            m.swap(c, piv);
            for row in c + 1..3 {
                let f = m[row][c] / m[c][c];
                for k in c..4 {
                    m[row][k] -= f * m[c][k];
                }
            }
        }
        let mut x = [0.0; 3];
        for c in (0..3).rev() {
            let mut acc = m[c][3];
            for k in c + 1..3 {
                acc -= m[c][k] * x[k];
            }
            x[c] = acc / m[c][c];
        }
        Self { c: x[0], k: [x[1] / s.powf(p[0]), x[2] / s.powf(p[1])], p }
    }

    pub fn eval(&self, r: f64) -> f64 {
        self.c + self.k[0] * r.powf(self.p[0]) + self.k[1] * r.powf(self.p[1])
    }

    pub fn derivative(&self, r: f64) -> f64 {
        self.k[0] * self.p[0] * r.powf(self.p[0] - 1.0) + self.k[1] * self.p[1] * r.powf(self.p[1] - 1.0)
    }
}

/// Value at r = 0 of the expansion through three samples.
pub fn richardson3(r: [f64; 3], v: [f64; 3], p: [f64; 2]) -> f64 {
    Expansion::fit(r, v, p).c
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn exact_on_model_expansion(
            c in -5.0f64..5.0, k1 in -5.0f64..5.0, k2 in -5.0f64..5.0,
            p1 in 0.2f64..1.0, dp in 0.2f64..1.0, r0 in 1e-8f64..1e-2,
        ) {
            let p = [p1, p1 + dp];
            let r = [r0, 3.0 * r0, 9.0 * r0];
            let v = r.map(|x| c + k1 * x.powf(p[0]) + k2 * x.powf(p[1]));
            let e = Expansion::fit(r, v, p);
            let scale = 1.0 + c.abs() + k1.abs() + k2.abs();
            prop_assert!((e.c - c).abs() < 1e-9 * scale);
            for (x, want) in r.iter().zip(v) {
                prop_assert!((e.eval(*x) - want).abs() < 1e-9 * scale);
            }
        }
    }
}
