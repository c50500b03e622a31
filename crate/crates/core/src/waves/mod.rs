//! Dissipation laws, semigroups of causal kernels and spherical wave fields.

pub mod field;
pub mod fourier;
pub mod kernels;
pub mod law;
pub mod semigroup;

use std::io::Write;

use crate::export;

pub use field::{field_snapshot, spherical_field, FieldSample};
pub use kernels::{
    gamma_kernel, modulated_gamma_kernel, sampled_gamma_seed, truncated_relaxation, KernelFamily, Relaxation,
};
pub use law::{dissipation_from_kernel, dissipation_from_kernel_with, kernel_at_distance, DissipationLaw, LawOptions};
pub use semigroup::{verify_semigroup, verify_support, SemigroupReport, SupportReport};

/// Kernel samples `K(i dt)` on `[0, N dt)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SampledKernel {
    pub dt: f64,
    pub samples: Vec<f64>,
    /// End of the declared support; infinite when unbounded.
    pub support_end: f64,
}

impl SampledKernel {
    pub fn new(dt: f64, samples: Vec<f64>, support_end: f64) -> Self {
        Self { dt, samples, support_end }
    }

    /// Samples `f(i dt)` for `i < n`.
    pub fn from_fn(dt: f64, n: usize, support_end: f64, f: impl Fn(f64) -> f64) -> Self {
        Self::new(dt, (0..n).map(|i| f(i as f64 * dt)).collect(), support_end)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn times(&self) -> Vec<f64> {
        (0..self.len()).map(|i| i as f64 * self.dt).collect()
    }

    pub fn window(&self) -> f64 {
        self.len() as f64 * self.dt
    }

    /// Largest finite absolute sample.
    pub fn peak(&self) -> f64 {
        self.samples.iter().filter(|x| x.is_finite()).fold(0.0f64, |m, x| m.max(x.abs()))
    }

    /// `dt * sum |K_i|` over finite samples.
    pub fn l1_norm(&self) -> f64 {
        self.dt * self.samples.iter().filter(|x| x.is_finite()).map(|x| x.abs()).sum::<f64>()
    }

    /// Linear interpolation; zero outside `[0, N dt)`.
    pub fn value_at(&self, t: f64) -> f64 {
        if t < 0.0 || self.is_empty() {
            return 0.0;
        }
        let u = t / self.dt;
        let i = u.floor() as usize;
        if i + 1 >= self.len() {
            return if i + 1 == self.len() && u == i as f64 { self.samples[i] } else { 0.0 };
        }
        let w = u - i as f64;
        (1.0 - w) * self.samples[i] + w * self.samples[i + 1]
    }

    /// CSV with header `t,K`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        export::write_csv(w, &["t", "K"], &[&self.times(), &self.samples])
    }
}
