//! Monotone piecewise-cubic Hermite interpolation (Fritsch–Carlson slopes,
//! the same limiter as PCHIP). Never overshoots the data between nodes.

#[derive(Debug, Clone)]
pub struct MonotoneCubic {
    x: Vec<f64>,
    y: Vec<f64>,
    d: Vec<f64>,
    // cum[k] = integral from x[0] to x[k]
    cum: Vec<f64>,
}

impl MonotoneCubic {
    /// `x` must be strictly increasing and at least two points long.
    pub fn new(x: &[f64], y: &[f64]) -> Self {
        assert_eq!(x.len(), y.len());
        assert!(x.len() >= 2, "need at least two nodes");
        let n = x.len();
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|k| (y[k + 1] - y[k]) / h[k]).collect();
        let mut d = vec![0.0; n];
        if n == 2 {
            d[0] = delta[0];
            d[1] = delta[0];
        } else {
            for k in 1..n - 1 {
                if delta[k - 1] * delta[k] <= 0.0 {
                    d[k] = 0.0;
                } else {
                    // weighted harmonic mean
                    let w1 = 2.0 * h[k] + h[k - 1];
                    let w2 = h[k] + 2.0 * h[k - 1];
                    d[k] = (w1 + w2) / (w1 / delta[k - 1] + w2 / delta[k]);
                }
            }
            d[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            d[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        let mut this = Self {
            x: x.to_vec(),
            y: y.to_vec(),
            d,
            cum: Vec::new(),
        };
        this.accumulate();
        this
    }

    fn accumulate(&mut self) {
        let n = self.x.len();
        let mut cum = vec![0.0; n];
        for k in 0..n - 1 {
            let h = self.x[k + 1] - self.x[k];
            cum[k + 1] = cum[k]
                + h * 0.5 * (self.y[k] + self.y[k + 1])
                + h * h * (self.d[k] - self.d[k + 1]) / 12.0;
        }
        self.cum = cum;
    }

    /// Override the slope at the first node (e.g. zero for even functions at r = 0).
    pub fn with_start_slope(mut self, slope: f64) -> Self {
        self.d[0] = slope;
        self.accumulate();
        self
    }

    pub fn x_min(&self) -> f64 {
        self.x[0]
    }

    pub fn x_max(&self) -> f64 {
        self.x[self.x.len() - 1]
    }

    fn locate(&self, x: f64) -> usize {
        let n = self.x.len();
        match self.x.binary_search_by(|p| p.total_cmp(&x)) {
            Ok(i) => i.min(n - 2),
            Err(0) => 0,
            Err(i) => (i - 1).min(n - 2),
        }
    }

    /// Value at `x`; clamps to the end values outside the node range.
    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.x[0] {
            return self.y[0];
        }
        if x >= self.x_max() {
            return self.y[self.y.len() - 1];
        }
        let k = self.locate(x);
        let h = self.x[k + 1] - self.x[k];
        let s = (x - self.x[k]) / h;
        let s2 = s * s;
        let s3 = s2 * s;
        let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
        let h10 = s3 - 2.0 * s2 + s;
        let h01 = -2.0 * s3 + 3.0 * s2;
        let h11 = s3 - s2;
        h00 * self.y[k] + h10 * h * self.d[k] + h01 * self.y[k + 1] + h11 * h * self.d[k + 1]
    }

    /// `∫_{x_min}^{x} p(s) ds` for `x` inside the node range; the
    /// integral continues with the clamped end value beyond it.
    pub fn integral(&self, x: f64) -> f64 {
        let n = self.x.len();
        if x <= self.x[0] {
            return (x - self.x[0]) * self.y[0];
        }
        if x >= self.x_max() {
            return self.cum[n - 1] + (x - self.x_max()) * self.y[n - 1];
        }
        let k = self.locate(x);
        let h = self.x[k + 1] - self.x[k];
        let s = (x - self.x[k]) / h;
        let (s2, s3, s4) = (s * s, s * s * s, s * s * s * s);
        let i00 = s - s3 + 0.5 * s4;
        let i10 = 0.5 * s2 - 2.0 * s3 / 3.0 + 0.25 * s4;
        let i01 = s3 - 0.5 * s4;
        let i11 = 0.25 * s4 - s3 / 3.0;
        self.cum[k]
            + h * (i00 * self.y[k]
                + i10 * h * self.d[k]
                + i01 * self.y[k + 1]
                + i11 * h * self.d[k + 1])
    }

    /// First derivative at `x`; zero outside the node range.
    pub fn deriv(&self, x: f64) -> f64 {
        if x < self.x[0] || x > self.x_max() {
            return 0.0;
        }
        let k = self.locate(x);
        let h = self.x[k + 1] - self.x[k];
        let s = (x - self.x[k]) / h;
        let s2 = s * s;
        let dh00 = 6.0 * s2 - 6.0 * s;
        let dh10 = 3.0 * s2 - 4.0 * s + 1.0;
        let dh01 = -6.0 * s2 + 6.0 * s;
        let dh11 = 3.0 * s2 - 2.0 * s;
        (dh00 * self.y[k] + dh01 * self.y[k + 1]) / h + dh10 * self.d[k] + dh11 * self.d[k + 1]
    }
}

// Three-point end condition, limited to preserve shape.
fn end_slope(h0: f64, h1: f64, del0: f64, del1: f64) -> f64 {
    let d = ((2.0 * h0 + h1) * del0 - h0 * del1) / (h0 + h1);
    if d.signum() != del0.signum() {
        0.0
    } else if del0.signum() != del1.signum() && d.abs() > 3.0 * del0.abs() {
        3.0 * del0
    } else {
        d
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn reproduces_nodes() {
        let x: Vec<f64> = (0..10).map(|i| i as f64 * 0.3).collect();
        let y: Vec<f64> = x.iter().map(|v| (-v * v).exp()).collect();
        let p = MonotoneCubic::new(&x, &y);
        for (xi, yi) in x.iter().zip(&y) {
            assert_eq!(p.eval(*xi), *yi);
        }
    }

    #[test]
    fn no_overshoot_on_step() {
        let x = [0.0, 1.0, 2.0, 3.0, 4.0];
        let y = [0.0, 0.0, 1.0, 1.0, 1.0];
        let p = MonotoneCubic::new(&x, &y);
        for i in 0..=400 {
            let v = p.eval(i as f64 * 0.01);
            assert!((0.0..=1.0).contains(&v), "overshoot {v}");
        }
    }

    #[test]
    fn integral_of_cubic_data() {
        let x: Vec<f64> = (0..200).map(|i| i as f64 * 0.02).collect();
        let y: Vec<f64> = x.iter().map(|v| v * v).collect();
        let p = MonotoneCubic::new(&x, &y);
        assert!((p.integral(2.5) - 2.5f64.powi(3) / 3.0).abs() < 1e-5);
        assert!((p.integral(x[199]) - x[199].powi(3) / 3.0).abs() < 1e-5);
    }

    #[test]
    fn derivative_matches_difference() {
        let x: Vec<f64> = (0..50).map(|i| i as f64 * 0.1).collect();
        let y: Vec<f64> = x.iter().map(|v| v.sin()).collect();
        let p = MonotoneCubic::new(&x, &y);
        let h = 1e-6;
        for &t in &[0.55, 1.23, 2.9] {
            let fd = (p.eval(t + h) - p.eval(t - h)) / (2.0 * h);
            assert!((fd - p.deriv(t)).abs() < 1e-6);
        }
    }
}
