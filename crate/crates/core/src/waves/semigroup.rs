//! Numerical checks of the semigroup law and of support propagation.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::gauss_legendre;
use crate::waves::kernels::KernelFamily;
use crate::waves::SampledKernel;

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SemigroupReport {
    /// `max_n |(K_R1 * K_R2)(t_n) - K_{R1+R2}(t_n)|` over `n >= 1`, divided by `peak`.
    pub max_abs_defect: f64,
    /// `max_{n >= 1} |K_{R1+R2}(t_n)|`.
    pub peak: f64,
    pub dt: f64,
    pub samples: usize,
}

#[inline]
fn pow(x: f64, p: f64) -> f64 {
    if p == 0.0 {
        1.0
    } else if p.fract() == 0.0 && p.abs() < 64.0 {
        x.powi(p as i32)
    } else {
        x.powf(p)
    }
}

struct Rules {
    coarse: (Vec<f64>, Vec<f64>),
    fine: (Vec<f64>, Vec<f64>),
}

impl Rules {
    fn new() -> Self {
        let unit = |(x, w): (Vec<f64>, Vec<f64>)| {
            (x.iter().map(|v| 0.5 * (v + 1.0)).collect(), w.iter().map(|v| 0.5 * v).collect())
        };
        Self { coarse: unit(gauss_legendre(8)), fine: unit(gauss_legendre(16)) }
    }
}

/// `∫_a^b f(x) dx` with nodes on `[0, 1]`.
fn plain(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, f: impl Fn(f64) -> f64) -> f64 {
    let l = b - a;
    rule.0.iter().zip(&rule.1).map(|(u, w)| w * f(a + l * u)).sum::<f64>() * l
}

/// `∫_0^L y^e g(y) dy` for `e > -1`, via `y = L u^k` with integer `k`: the
/// exact inverse of `e + 1` when there is one, 8 otherwise.
fn power_weighted(rule: &(Vec<f64>, Vec<f64>), l: f64, e: f64, g: impl Fn(f64) -> f64) -> f64 {
    let inv = 1.0 / (e + 1.0);
    let k = if (inv - inv.round()).abs() < 1e-12 { inv.round() as i32 } else { 8 };
    let expo = k as f64 * (e + 1.0) - 1.0;
    let body: f64 = rule.0.iter().zip(&rule.1).map(|(u, w)| w * pow(*u, expo) * g(l * u.powi(k))).sum();
    k as f64 * l.powf(e + 1.0) * body
}

/// `∫_a^b (x-a)^p g(x) dx`.
fn left_singular(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, p: f64, g: impl Fn(f64) -> f64) -> f64 {
    power_weighted(rule, b - a, p, |y| g(a + y))
}

/// `∫_a^b (b-x)^q g(x) dx`.
fn right_singular(rule: &(Vec<f64>, Vec<f64>), a: f64, b: f64, q: f64, g: impl Fn(f64) -> f64) -> f64 {
    power_weighted(rule, b - a, q, |y| g(b - y))
}

/// Weights `(∫ x^p (m-x)^q (c+1-x) dx, ∫ x^p (m-x)^q (x-c) dx)` over `[c, c+1]`.
fn cell_weights(rules: &Rules, m: usize, c: usize, p: f64, q: f64) -> (f64, f64) {
    let mf = m as f64;
    let (a, b) = (c as f64, c as f64 + 1.0);
    let hat_l = move |x: f64| b - x;
    let hat_r = move |x: f64| x - a;
    let full = |x: f64| pow(x, p) * pow(mf - x, q);
    let sing_p = p.fract() != 0.0 && c == 0;
    let sing_q = q.fract() != 0.0 && c + 1 == m;
    if m == 1 && (sing_p || sing_q) {
        let mid = 0.5 * (a + b);
        let half = |hat: &dyn Fn(f64) -> f64| {
            let lo = if sing_p {
                left_singular(&rules.fine, a, mid, p, |x| pow(mf - x, q) * hat(x))
            } else {
                plain(&rules.fine, a, mid, |x| full(x) * hat(x))
            };
            let hi = if sing_q {
                right_singular(&rules.fine, mid, b, q, |x| pow(x, p) * hat(x))
            } else {
                plain(&rules.fine, mid, b, |x| full(x) * hat(x))
            };
            lo + hi
        };
        return (half(&hat_l), half(&hat_r));
    }
    if sing_p {
        (
            left_singular(&rules.fine, a, b, p, |x| pow(mf - x, q) * hat_l(x)),
            left_singular(&rules.fine, a, b, p, |x| pow(mf - x, q) * hat_r(x)),
        )
    } else if sing_q {
        (
            right_singular(&rules.fine, a, b, q, |x| pow(x, p) * hat_l(x)),
            right_singular(&rules.fine, a, b, q, |x| pow(x, p) * hat_r(x)),
        )
    } else {
        let r = if c == 0 || c + 1 == m { &rules.fine } else { &rules.coarse };
        (plain(r, a, b, |x| full(x) * hat_l(x)), plain(r, a, b, |x| full(x) * hat_r(x)))
    }
}

/// `∫_0^{m dt} s^p h1(s) (t-s)^q h2(t-s) ds` with `h1 h2` interpolated linearly
/// between nodes and the power factors integrated exactly per cell.
fn product_convolution(rules: &Rules, dt: f64, m: usize, p: f64, q: f64, h1: &[f64], h2: &[f64]) -> f64 {
    let mut acc = 0.0;
    for c in 0..m {
        let (wl, wr) = cell_weights(rules, m, c, p, q);
        acc += wl * h1[c] * h2[m - c] + wr * h1[c + 1] * h2[m - c - 1];
    }
    acc * dt.powf(p + q + 1.0)
}

/// Compares `K_R1 * K_R2` against `K_{R1+R2}` on `n` samples of step `dt`
/// (synthesized families use their own grid).
///
/// Analytic families are split as `K_R(t) = t^{R-1} h_R(t)` and convolved by
/// product integration, which is exact for the gamma family up to the
/// quadrature of the weights. Synthesized samples are convolved with the
/// trapezoid rule.
pub fn verify_semigroup(family: &KernelFamily, r1: f64, r2: f64, dt: f64, n: usize) -> Result<SemigroupReport> {
    if !(r1 >= 0.0 && r2 >= 0.0) {
        return Err(Error::InvalidInput("semigroup check needs R1, R2 >= 0".into()));
    }
    let target = family.sample(r1 + r2, dt, n)?;
    let (dt, n) = (target.dt, target.len());
    let peak = target.samples[1..].iter().filter(|x| x.is_finite()).fold(0.0f64, |m, x| m.max(x.abs()));
    if r1 == 0.0 || r2 == 0.0 {
        // convolution with the delta is the identity
        return Ok(SemigroupReport { max_abs_defect: 0.0, peak, dt, samples: n });
    }
    let rules = Rules::new();
    let conv: Vec<f64> = match (family.singular_split(r1), family.singular_split(r2)) {
        (Some((p, f1)), Some((q, f2))) => {
            let h1: Vec<f64> = (0..n).map(|i| f1(i as f64 * dt)).collect();
            let h2: Vec<f64> = (0..n).map(|i| f2(i as f64 * dt)).collect();
            (1..n).into_par_iter().map(|m| product_convolution(&rules, dt, m, p, q, &h1, &h2)).collect()
        }
        _ => {
            let k1 = family.sample(r1, dt, n)?;
            let k2 = family.sample(r2, dt, n)?;
            (1..n)
                .into_par_iter()
                .map(|m| product_convolution(&rules, dt, m, 0.0, 0.0, &k1.samples, &k2.samples))
                .collect()
        }
    };
    let defect = conv.iter().zip(&target.samples[1..]).fold(0.0f64, |d, (c, k)| d.max((c - k).abs()));
    Ok(SemigroupReport { max_abs_defect: defect / peak, peak, dt, samples: n })
}

#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct SupportReport {
    /// Time of the last sample above `floor * peak`.
    pub observed_support_end: f64,
    /// `R T` (infinite for unbounded seeds).
    pub expected_support_end: f64,
    /// No sample above the floor in the last eighth of the window, where
    /// acausal content of a periodic synthesis would wrap to.
    pub causal: bool,
    pub pass: bool,
}

/// Observed support of a sampled `K_R` against `[0, R T]`, with a slack of two steps.
pub fn verify_support(kernel: &SampledKernel, r: f64, support_end: f64, floor: f64) -> SupportReport {
    let peak = kernel.peak();
    let thr = floor * peak;
    let last = kernel.samples.iter().rposition(|x| x.is_finite() && x.abs() > thr).unwrap_or(0);
    let observed = last as f64 * kernel.dt;
    let expected = r * support_end;
    let n = kernel.len();
    let causal = kernel.samples[n - n / 8..].iter().all(|x| x.abs() <= thr);
    let pass = causal && (!expected.is_finite() || observed <= expected + 2.0 * kernel.dt);
    SupportReport { observed_support_end: observed, expected_support_end: expected, causal, pass }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::kernels::{gamma_kernel, sampled_gamma_seed, truncated_relaxation, Relaxation};
    use crate::waves::law::dissipation_from_kernel;

    #[test]
    fn product_weights_integrate_beta_functions() {
        // sum of weights = ∫_0^m x^p (m-x)^q dx = m^{p+q+1} B(p+1, q+1)
        let rules = Rules::new();
        for &(p, q) in &[(-0.5, -0.5), (0.0, 1.0), (-0.3, 0.7), (1.5, -0.2)] {
            for m in [1usize, 2, 7] {
                let total: f64 = (0..m)
                    .map(|c| {
                        let (a, b) = cell_weights(&rules, m, c, p, q);
                        a + b
                    })
                    .sum();
                let beta = (libm::lgamma(p + 1.0) + libm::lgamma(q + 1.0) - libm::lgamma(p + q + 2.0)).exp();
                let exact = (m as f64).powf(p + q + 1.0) * beta;
                assert!((total - exact).abs() < 1e-8 * exact, "p={p} q={q} m={m}: {total} vs {exact}");
            }
        }
    }

    #[test]
    fn gamma_semigroup_holds_to_roundoff() {
        let fam = KernelFamily::Gamma { tau: 1.0 };
        for (r1, r2) in [(1.0, 1.0), (1.0, 2.0), (0.5, 0.5)] {
            let rep = verify_semigroup(&fam, r1, r2, 0.05, 400).unwrap();
            assert!(rep.max_abs_defect < 1e-9, "({r1},{r2}): {}", rep.max_abs_defect);
        }
        assert_eq!(verify_semigroup(&fam, 0.0, 2.0, 0.05, 400).unwrap().max_abs_defect, 0.0);
    }

    #[test]
    fn synthesized_gamma_semigroup() {
        let law = dissipation_from_kernel(&sampled_gamma_seed(1.0, 0.02, 2500)).unwrap();
        let rep = verify_semigroup(&KernelFamily::Synthesized(law), 1.0, 2.0, 0.0, 0).unwrap();
        assert!(rep.max_abs_defect < 1e-3, "{}", rep.max_abs_defect);
    }

    #[test]
    fn gamma_support_is_unbounded_and_causal() {
        let k = SampledKernel::from_fn(0.01, 5000, f64::INFINITY, |t| gamma_kernel(1.0, 2.0, t));
        let rep = verify_support(&k, 2.0, f64::INFINITY, 1e-6);
        assert!(rep.pass && rep.causal);
        assert!(rep.observed_support_end > 15.0 && rep.observed_support_end < 25.0);
    }

    #[test]
    fn truncated_seed_recovers_its_support() {
        let k1 = truncated_relaxation(&Relaxation::Exponential { tau: 1.0 }, 1.0, 0, 0.01, 800).unwrap();
        let rep = verify_support(&k1, 1.0, 1.0, 1e-6);
        assert!(rep.pass && (rep.observed_support_end - 1.0).abs() <= 0.02, "{rep:?}");
    }
}
