//! Piecewise cubic interpolation.

/// Locate the interval `[x[i], x[i+1]]` containing `t` (clamped to the ends).
pub(crate) fn bracket(x: &[f64], t: f64) -> usize {
    let n = x.len();
    debug_assert!(n >= 2);
    match x.binary_search_by(|v| v.partial_cmp(&t).unwrap_or(std::cmp::Ordering::Less)) {
        Ok(i) => i.min(n - 2),
        Err(0) => 0,
        Err(i) => (i - 1).min(n - 2),
    }
}

/// Cubic Hermite interpolation from values and slopes at the nodes.
pub fn hermite(x: &[f64], y: &[f64], dy: &[f64], t: f64) -> f64 {
    let i = bracket(x, t);
    let h = x[i + 1] - x[i];
    let s = (t - x[i]) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y[i] + h10 * h * dy[i] + h01 * y[i + 1] + h11 * h * dy[i + 1]
}

/// Monotone piecewise cubic interpolant (Fritsch-Carlson slopes).
#[derive(Debug, Clone)]
pub struct Pchip {
    x: Vec<f64>,
    y: Vec<f64>,
    slopes: Vec<f64>,
}

impl Pchip {
    /// Builds the interpolant. `x` must be strictly increasing with at least two nodes.
    pub fn new(x: Vec<f64>, y: Vec<f64>) -> Option<Self> {
        let n = x.len();
        if n < 2 || y.len() != n || x.windows(2).any(|w| !(w[1] > w[0])) {
            return None;
        }
        let h: Vec<f64> = x.windows(2).map(|w| w[1] - w[0]).collect();
        let delta: Vec<f64> = (0..n - 1).map(|i| (y[i + 1] - y[i]) / h[i]).collect();
        let mut m = vec![0.0; n];
        if n == 2 {
            m[0] = delta[0];
            m[1] = delta[0];
        } else {
            for i in 1..n - 1 {
                if delta[i - 1] * delta[i] > 0.0 {
                    let w1 = 2.0 * h[i] + h[i - 1];
                    let w2 = h[i] + 2.0 * h[i - 1];
                    m[i] = (w1 + w2) / (w1 / delta[i - 1] + w2 / delta[i]);
                }
            }
            m[0] = end_slope(h[0], h[1], delta[0], delta[1]);
            m[n - 1] = end_slope(h[n - 2], h[n - 3], delta[n - 2], delta[n - 3]);
        }
        Some(Self { x, y, slopes: m })
    }

    pub fn eval(&self, t: f64) -> f64 {
        hermite(&self.x, &self.y, &self.slopes, t)
    }

    pub fn domain(&self) -> (f64, f64) {
        (self.x[0], self.x[self.x.len() - 1])
    }
}

fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if m * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && m.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        m
    }
}

/// Cubic Lagrange interpolation of uniformly spaced samples at fractional index `u`.
pub(crate) fn lagrange_uniform(y: &[f64], u: f64) -> f64 {
    let n = y.len();
    if n < 4 {
        let i = (u.floor().max(0.0) as usize).min(n.saturating_sub(2));
        let s = u - i as f64;
        return y[i] * (1.0 - s) + y[(i + 1).min(n - 1)] * s;
    }
    let base = (u.floor() as isize - 1).clamp(0, n as isize - 4) as usize;
    let s = u - base as f64;
    let mut acc = 0.0;
    for k in 0..4 {
        let mut l = 1.0;
        for j in 0..4 {
            if j != k {
                l *= (s - j as f64) / (k as f64 - j as f64);
            }
        }
        acc += l * y[base + k];
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pchip_preserves_monotone_data() {
        let x: Vec<f64> = (0..10).map(|i| i as f64).collect();
        let y: Vec<f64> = x.iter().map(|&v| if v < 5.0 { 0.0 } else { 1.0 }).collect();
        let p = Pchip::new(x, y).unwrap();
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=900 {
            let v = p.eval(k as f64 * 0.01);
            assert!(v >= prev - 1e-15 && (-1e-15..=1.0 + 1e-15).contains(&v));
            prev = v;
        }
    }

    #[test]
    fn hermite_reproduces_cubics() {
        let x = [0.0, 0.7, 1.5];
        let f = |t: f64| 2.0 * t * t * t - t + 0.3;
        let df = |t: f64| 6.0 * t * t - 1.0;
        let y: Vec<f64> = x.iter().map(|&t| f(t)).collect();
        let dy: Vec<f64> = x.iter().map(|&t| df(t)).collect();
        for k in 0..30 {
            let t = k as f64 * 0.05;
            assert!((hermite(&x, &y, &dy, t) - f(t)).abs() < 1e-13);
        }
    }

    #[test]
    fn pchip_rejects_unsorted_nodes() {
        assert!(Pchip::new(vec![0.0, 0.0, 1.0], vec![1.0, 2.0, 3.0]).is_none());
    }
}
