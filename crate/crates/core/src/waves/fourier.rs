//! Discrete Fourier transform with the `e^{+i 2 pi nu t}` forward convention.
//!
//! For samples `f_n = f(n dt)`, `n < N`, the forward transform is
//! `F_k = dt * sum_n f_n e^{+i 2 pi k n / N}` at `nu_k = k / (N dt)` and the
//! inverse is `f_n = 1/(N dt) * sum_k F_k e^{-i 2 pi k n / N}`. With this
//! sign the derivative rule reads `F(f')(nu) = -i 2 pi nu F(f)(nu)`.

use num_complex::Complex64;
use rustfft::{FftDirection, FftPlanner};

fn transform(buf: &mut [Complex64], direction: FftDirection) {
    let mut planner = FftPlanner::new();
    planner.plan_fft(buf.len(), direction).process(buf);
}

pub fn forward(dt: f64, samples: &[f64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    // rustfft's inverse direction carries the positive exponent
    transform(&mut buf, FftDirection::Inverse);
    buf.iter_mut().for_each(|z| *z *= dt);
    buf
}

pub fn inverse(dt: f64, spectrum: &[Complex64]) -> Vec<Complex64> {
    let mut buf = spectrum.to_vec();
    transform(&mut buf, FftDirection::Forward);
    let scale = 1.0 / (buf.len() as f64 * dt);
    buf.iter_mut().for_each(|z| *z *= scale);
    buf
}

/// Frequencies in transform order: `0, 1, .., ceil(N/2)-1, -floor(N/2), .., -1` over `N dt`.
pub fn frequencies(n: usize, dt: f64) -> Vec<f64> {
    let df = 1.0 / (n as f64 * dt);
    (0..n).map(|k| if k < n.div_ceil(2) { k as f64 * df } else { (k as f64 - n as f64) * df }).collect()
}

/// Index of `-nu_k` in transform order.
#[inline]
pub fn mirror(k: usize, n: usize) -> usize {
    (n - k) % n
}

/// Transform-order indices sorted by ascending frequency.
pub fn ascending_order(n: usize) -> Vec<usize> {
    let half = n.div_ceil(2);
    (half..n).chain(0..half).collect()
}
