//! Quadrature rules on uniform and non-uniform sample grids.

/// Running trapezoid integral `out[i] = ∫_{x_0}^{x_i} y`.
pub fn cumulative_trapezoid(x: &[f64], y: &[f64]) -> Vec<f64> {
    assert_eq!(x.len(), y.len());
    let mut out = Vec::with_capacity(x.len());
    let mut acc = 0.0;
    if !x.is_empty() {
        out.push(0.0);
    }
    for i in 1..x.len() {
        acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
        out.push(acc);
    }
    out
}

/// Running fourth-order integral on a uniform grid of spacing `h`.
///
/// Even nodes use composite Simpson from the origin; odd nodes `i >= 3`
/// close the last three intervals with the 3/8 rule. Node 1 uses the
/// three-point formula `h(5y0 + 8y1 - y2)/12`.
pub fn cumulative_simpson(h: f64, y: &[f64]) -> Vec<f64> {
    let n = y.len();
    let mut out = vec![0.0; n];
    if n < 2 {
        return out;
    }
    if n == 2 {
        out[1] = 0.5 * h * (y[0] + y[1]);
        return out;
    }
    // even prefix sums
    let mut even = vec![0.0; n];
    let mut i = 2;
    while i < n {
        even[i] = even[i - 2] + h / 3.0 * (y[i - 2] + 4.0 * y[i - 1] + y[i]);
        i += 2;
    }
    out[1] = h / 12.0 * (5.0 * y[0] + 8.0 * y[1] - y[2]);
    for i in 2..n {
        out[i] = if i % 2 == 0 {
            even[i]
        } else {
            even[i - 3] + 3.0 * h / 8.0 * (y[i - 3] + 3.0 * y[i - 2] + 3.0 * y[i - 1] + y[i])
        };
    }
    out
}

/// Composite Simpson integral of `y[0..=n]` on a uniform grid, with a 3/8
/// closure when the number of intervals is odd.
pub fn simpson(h: f64, y: &[f64]) -> f64 {
    let intervals = y.len().saturating_sub(1);
    match intervals {
        0 => 0.0,
        1 => 0.5 * h * (y[0] + y[1]),
        2 => h / 3.0 * (y[0] + 4.0 * y[1] + y[2]),
        _ => {
            let (head, tail) = if intervals.is_multiple_of(2) { (intervals, 0) } else { (intervals - 3, 3) };
            let mut s = 0.0;
            let mut i = 0;
            while i < head {
                s += y[i] + 4.0 * y[i + 1] + y[i + 2];
                i += 2;
            }
            s *= h / 3.0;
            if tail == 3 {
                let j = head;
                s += 3.0 * h / 8.0 * (y[j] + 3.0 * y[j + 1] + 3.0 * y[j + 2] + y[j + 3]);
            }
            s
        }
    }
}

/// Gauss-Legendre nodes and weights on `[-1, 1]` (Newton iteration on `P_n`).
pub fn gauss_legendre(n: usize) -> (Vec<f64>, Vec<f64>) {
    let mut nodes = vec![0.0; n];
    let mut weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut dp;
        loop {
            let (mut p1, mut p2) = (1.0, 0.0);
            for j in 1..=n {
                let jf = j as f64;
                let p3 = p2;
                p2 = p1;
                p1 = ((2.0 * jf - 1.0) * z * p2 - (jf - 1.0) * p3) / jf;
            }
            dp = nf * (z * p1 - p2) / (z * z - 1.0);
            let dz = p1 / dp;
            z -= dz;
            if dz.abs() < 1e-15 {
                break;
            }
        }
        nodes[i] = -z;
        nodes[n - 1 - i] = z;
        let w = 2.0 / ((1.0 - z * z) * dp * dp);
        weights[i] = w;
        weights[n - 1 - i] = w;
    }
    (nodes, weights)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn simpson_is_exact_for_cubics() {
        let h = 0.1;
        for n in 2..12 {
            let y: Vec<f64> = (0..=n).map(|i| (i as f64 * h).powi(3)).collect();
            let exact = (n as f64 * h).powi(4) / 4.0;
            assert!((simpson(h, &y) - exact).abs() < 1e-13, "n = {n}");
        }
    }

    #[test]
    fn cumulative_simpson_matches_cubic_primitive() {
        let h = 0.05;
        let y: Vec<f64> = (0..40).map(|i| (i as f64 * h).powi(3) - 2.0 * i as f64 * h).collect();
        let c = cumulative_simpson(h, &y);
        for (i, v) in c.iter().enumerate().skip(2) {
            let t = i as f64 * h;
            assert!((v - (t.powi(4) / 4.0 - t * t)).abs() < 1e-12, "i = {i}");
        }
    }

    #[test]
    fn gauss_legendre_integrates_degree_2n_minus_1() {
        let (x, w) = gauss_legendre(8);
        let s: f64 = x.iter().zip(&w).map(|(x, w)| w * x.powi(14)).sum();
        assert!((s - 2.0 / 15.0).abs() < 1e-14);
        assert!((w.iter().sum::<f64>() - 2.0).abs() < 1e-14);
    }
}
