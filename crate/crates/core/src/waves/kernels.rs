//! Analytic kernel families and seed relaxation functions.

use crate::error::{Error, Result};
use crate::waves::law::{kernel_at_distance, DissipationLaw};
use crate::waves::SampledKernel;

/// `K_R(t) = a0 (a0 t)^{R-1} e^{-a0 t} / Gamma(R)` with `a0 = 1/tau`, zero for `t < 0`.
///
/// At `t = 0` the value is `+inf` for `R < 1`, `a0` for `R = 1` and `0` for `R > 1`.
pub fn gamma_kernel(tau: f64, r: f64, t: f64) -> f64 {
    let a0 = 1.0 / tau;
    if t < 0.0 || r <= 0.0 {
        return 0.0;
    }
    if t == 0.0 {
        return if r < 1.0 {
            f64::INFINITY
        } else if r == 1.0 {
            a0
        } else {
            0.0
        };
    }
    let x = a0 * t;
    // log form keeps large R and large t finite
    a0 * ((r - 1.0) * x.ln() - x - libm::lgamma(r)).exp()
}

/// `K_R(t) = t^{R-1} e^{-t/tau0} cos(omega0 t) / (tau0^R Gamma(R))`.
pub fn modulated_gamma_kernel(tau0: f64, omega0: f64, r: f64, t: f64) -> f64 {
    gamma_kernel(tau0, r, t) * (omega0 * t).cos()
}

/// Gamma seed `a0 e^{-a0 t}` sampled on `n` points and scaled to unit
/// trapezoid mass `dt (K_0/2 + sum_{i>=1} K_i)`, so that its discrete
/// transform has modulus at most one with equality at `nu = 0`.
pub fn sampled_gamma_seed(tau: f64, dt: f64, n: usize) -> SampledKernel {
    let mut k = SampledKernel::from_fn(dt, n, f64::INFINITY, |t| gamma_kernel(tau, 1.0, t));
    let mass = dt * (0.5 * k.samples[0] + k.samples[1..].iter().sum::<f64>());
    k.samples.iter_mut().for_each(|x| *x /= mass);
    k
}

/// Relaxation functions used to seed truncated kernels.
#[derive(Debug, Clone, PartialEq)]
pub enum Relaxation {
    /// `e^{-t/tau} / tau`.
    Exponential { tau: f64 },
    /// Tabulated values; derivatives by one-sided differences.
    Sampled(SampledKernel),
}

impl Relaxation {
    pub fn value(&self, t: f64) -> f64 {
        match self {
            Relaxation::Exponential { tau } => gamma_kernel(*tau, 1.0, t),
            Relaxation::Sampled(k) => k.value_at(t),
        }
    }

    /// `m`-th derivative at `t`.
    pub fn derivative(&self, m: usize, t: f64) -> f64 {
        match self {
            Relaxation::Exponential { tau } => (-1.0 / tau).powi(m as i32) * self.value(t),
            Relaxation::Sampled(k) => {
                // first-order backward difference of order m
                let h = k.dt;
                let f = |j: usize| k.value_at(t - j as f64 * h);
                let mut acc = 0.0;
                let mut c = 1.0;
                for j in 0..=m {
                    acc += c * f(j);
                    c *= -((m - j) as f64) / (j + 1) as f64;
                }
                acc / h.powi(m as i32)
            }
        }
    }
}

/// `K_1(t) = [rho(t) - P_k(t)] / [1 - P_k(0)/rho(0+)]` on `[0, T]`, zero
/// beyond, where `P_k` is the degree-`k` Taylor polynomial of `rho` at `T`.
/// `K_1(0+) = rho(0+)` and the first `k` derivatives vanish at `T`.
pub fn truncated_relaxation(rho: &Relaxation, support_end: f64, k: usize, dt: f64, n: usize) -> Result<SampledKernel> {
    if !(support_end > 0.0) || !(dt > 0.0) {
        return Err(Error::InvalidInput("truncated relaxation needs T > 0 and dt > 0".into()));
    }
    let derivs: Vec<f64> = (0..=k).map(|m| rho.derivative(m, support_end)).collect();
    let taylor = |t: f64| {
        let mut acc = 0.0;
        let mut term = 1.0;
        for (m, d) in derivs.iter().enumerate() {
            if m > 0 {
                term *= (t - support_end) / m as f64;
            }
            acc += d * term;
        }
        acc
    };
    let rho0 = rho.value(0.0);
    let denom = 1.0 - taylor(0.0) / rho0;
    if !(denom.abs() >= 1e-12) {
        return Err(Error::DegenerateNormalizer { value: denom });
    }
    Ok(SampledKernel::from_fn(dt, n, support_end, |t| {
        if t > support_end {
            0.0
        } else {
            (rho.value(t) - taylor(t)) / denom
        }
    }))
}

pub(crate) type SmoothFactor = Box<dyn Fn(f64) -> f64 + Send + Sync>;

/// A semigroup `(K_R)` of causal kernels, analytic or synthesized from a law.
#[derive(Debug, Clone)]
pub enum KernelFamily {
    Gamma { tau: f64 },
    ModulatedGamma { tau0: f64, omega0: f64 },
    Synthesized(DissipationLaw),
}

impl KernelFamily {
    /// Analytic value; `None` for synthesized families.
    pub fn analytic(&self, r: f64, t: f64) -> Option<f64> {
        match *self {
            KernelFamily::Gamma { tau } => Some(gamma_kernel(tau, r, t)),
            KernelFamily::ModulatedGamma { tau0, omega0 } => Some(modulated_gamma_kernel(tau0, omega0, r, t)),
            KernelFamily::Synthesized(_) => None,
        }
    }

    /// `K_R` on `n` samples of step `dt`; synthesized families use the law's own grid.
    pub fn sample(&self, r: f64, dt: f64, n: usize) -> Result<SampledKernel> {
        if !(r >= 0.0) {
            return Err(Error::InvalidInput(format!("distance R must be >= 0, got {r}")));
        }
        match self {
            KernelFamily::Synthesized(law) => kernel_at_distance(law, r),
            _ if r == 0.0 => {
                let mut s = vec![0.0; n];
                s[0] = 1.0 / dt;
                Ok(SampledKernel::new(dt, s, 0.0))
            }
            _ => Ok(SampledKernel::from_fn(dt, n, f64::INFINITY, |t| self.analytic(r, t).unwrap())),
        }
    }

    /// `(p, h)` with `K_R(t) = t^p h(t)`, `h` smooth, for product integration.
    pub(crate) fn singular_split(&self, r: f64) -> Option<(f64, SmoothFactor)> {
        match *self {
            KernelFamily::Gamma { tau } => {
                let c = (-r * tau.ln() - libm::lgamma(r)).exp();
                Some((r - 1.0, Box::new(move |t: f64| c * (-t / tau).exp())))
            }
            KernelFamily::ModulatedGamma { tau0, omega0 } => {
                let c = (-r * tau0.ln() - libm::lgamma(r)).exp();
                Some((r - 1.0, Box::new(move |t: f64| c * (-t / tau0).exp() * (omega0 * t).cos())))
            }
            KernelFamily::Synthesized(_) => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::quadrature::gauss_legendre;

    #[test]
    fn gamma_values_at_the_origin() {
        assert_eq!(gamma_kernel(2.0, 1.0, 0.0), 0.5);
        assert_eq!(gamma_kernel(2.0, 0.5, 0.0), f64::INFINITY);
        assert_eq!(gamma_kernel(2.0, 3.0, 0.0), 0.0);
        assert_eq!(gamma_kernel(2.0, 3.0, -1.0), 0.0);
        assert!((gamma_kernel(2.0, 1.0, 1.0) - 0.5 * (-0.5f64).exp()).abs() < 1e-15);
    }

    #[test]
    fn gamma_kernels_have_unit_mass() {
        let (x, w) = gauss_legendre(64);
        for r in [0.3, 1.0, 2.5, 5.0] {
            // ∫_0^∞ substituting t = u^10 on [0, 1], plain nodes on [1, 60]
            let head: f64 = x
                .iter()
                .zip(&w)
                .map(|(xi, wi)| {
                    let u = 0.5 * (xi + 1.0);
                    0.5 * wi * 10.0 * u.powf(10.0 * r - 1.0) * (-u.powi(10)).exp() / libm::tgamma(r)
                })
                .sum();
            let tail: f64 = (0..59)
                .map(|c| {
                    x.iter()
                        .zip(&w)
                        .map(|(xi, wi)| 0.5 * wi * gamma_kernel(1.0, r, 1.0 + c as f64 + 0.5 * (xi + 1.0)))
                        .sum::<f64>()
                })
                .sum();
            assert!((head + tail - 1.0).abs() < 1e-10, "R = {r}: {}", head + tail);
        }
    }

    #[test]
    fn modulated_reduces_to_gamma() {
        for t in [0.1, 0.7, 3.0] {
            assert_eq!(modulated_gamma_kernel(0.5, 0.0, 2.0, t), gamma_kernel(0.5, 2.0, t));
        }
        let w0 = 3.0;
        let t0 = std::f64::consts::FRAC_PI_2 / w0;
        assert!(modulated_gamma_kernel(0.5, w0, 2.0, t0 - 1e-3) > 0.0);
        assert!(modulated_gamma_kernel(0.5, w0, 2.0, t0 + 1e-3) < 0.0);
    }

    #[test]
    fn truncated_exponential_closed_form() {
        let t_end = 2.0;
        let k = truncated_relaxation(&Relaxation::Exponential { tau: 1.0 }, t_end, 0, 0.01, 400).unwrap();
        for (i, v) in k.samples.iter().enumerate() {
            let t = i as f64 * 0.01;
            let expected = if t > t_end { 0.0 } else { ((-t).exp() - (-t_end).exp()) / (1.0 - (-t_end).exp()) };
            assert!((v - expected).abs() < 1e-14);
        }
        assert!(k.samples[..200].windows(2).all(|w| w[1] < w[0]));
    }

    #[test]
    fn first_order_contact_at_the_support_end() {
        let rho = Relaxation::Exponential { tau: 1.0 };
        let diff = |dt: f64| {
            let n = (3.0 / dt) as usize;
            let k = truncated_relaxation(&rho, 1.0, 1, dt, n).unwrap();
            let i = (1.0 / dt).round() as usize;
            (k.samples[i - 1] - k.samples[i]).abs()
        };
        let (d1, d2) = (diff(1e-2), diff(5e-3));
        assert!(d1 < 1e-3 && (d1 / d2 - 4.0).abs() < 0.1, "{d1} {d2}");
    }
}
