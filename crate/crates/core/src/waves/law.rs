//! Dissipation laws from seed kernels and Fourier synthesis of `K_R`.

use std::io::Write;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::export;
use crate::interp::lagrange_uniform;
use crate::waves::fourier::{ascending_order, forward, frequencies, inverse, mirror};
use crate::waves::SampledKernel;

/// Thresholds for [`dissipation_from_kernel_with`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LawOptions {
    /// `|K^|` below `ep_floor * max |K^|` counts as a zero of the transform.
    pub ep_floor: f64,
    /// Allowed excess of `max |K^|` over one.
    pub subunit_tol: f64,
}

impl Default for LawOptions {
    fn default() -> Self {
        Self { ep_floor: 1e-9, subunit_tol: 1e-9 }
    }
}

/// Imaginary residue allowed in a synthesized kernel, relative to its peak.
pub const REALITY_TOL: f64 = 1e-8;

/// Trailing-edge energy fraction that triggers [`Error::AliasingSuspected`].
pub const ALIASING_TOL: f64 = 1e-6;

/// Complex dissipation law `alpha(nu)` with `K^_1 = e^{-alpha}` on a DFT grid.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationLaw {
    dt: f64,
    freqs: Vec<f64>,
    alpha: Vec<Complex64>,
    seed_origin: f64,
    seed_support_end: f64,
}

impl DissipationLaw {
    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn len(&self) -> usize {
        self.alpha.len()
    }

    pub fn is_empty(&self) -> bool {
        self.alpha.is_empty()
    }

    /// Frequencies in transform order.
    pub fn frequencies(&self) -> &[f64] {
        &self.freqs
    }

    /// `alpha` in transform order.
    pub fn alpha(&self) -> &[Complex64] {
        &self.alpha
    }

    /// Seed value `K_1(0+)`.
    pub fn seed_origin(&self) -> f64 {
        self.seed_origin
    }

    pub fn seed_support_end(&self) -> f64 {
        self.seed_support_end
    }

    /// `(nu, alpha)` sorted by ascending frequency.
    pub fn ascending(&self) -> (Vec<f64>, Vec<Complex64>) {
        let ord = ascending_order(self.len());
        (ord.iter().map(|&k| self.freqs[k]).collect(), ord.iter().map(|&k| self.alpha[k]).collect())
    }

    /// Largest defects of `Re alpha` evenness and `Im alpha` oddness,
    /// relative to `max |alpha|`. An unpaired Nyquist bin is skipped.
    pub fn symmetry_defect(&self) -> (f64, f64) {
        let n = self.len();
        let scale = self.alpha.iter().map(|z| z.norm()).fold(0.0f64, f64::max).max(f64::MIN_POSITIVE);
        let (mut re, mut im) = (0.0f64, self.alpha[0].im.abs());
        for k in 1..n.div_ceil(2) {
            let (a, b) = (self.alpha[k], self.alpha[mirror(k, n)]);
            re = re.max((a.re - b.re).abs());
            im = im.max((a.im + b.im).abs());
        }
        (re / scale, im / scale)
    }

    pub fn min_re(&self) -> f64 {
        self.alpha.iter().map(|z| z.re).fold(f64::INFINITY, f64::min)
    }

    /// Largest jump of `Im alpha` between neighbouring frequencies.
    pub fn max_phase_jump(&self) -> f64 {
        let (_, a) = self.ascending();
        a.windows(2).map(|w| (w[1].im - w[0].im).abs()).fold(0.0, f64::max)
    }

    /// `|e^{-alpha R}|` at the highest frequency, a measure of how well the
    /// window resolves `K_R`.
    pub fn nyquist_decay(&self, r: f64) -> f64 {
        let k = self.len() / 2;
        (-self.alpha[k].re * r).exp()
    }

    /// CSV with header `nu,re_alpha,im_alpha`, ascending in `nu`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let (nu, a) = self.ascending();
        let re: Vec<f64> = a.iter().map(|z| z.re).collect();
        let im: Vec<f64> = a.iter().map(|z| z.im).collect();
        export::write_csv(w, &["nu", "re_alpha", "im_alpha"], &[&nu, &re, &im])
    }
}

/// Continuous phase of `z` along the transform-order axis, walking from
/// `nu = 0` outward in both directions and anchored at `arg z_0`.
fn unwrapped_phase(z: &[Complex64]) -> Vec<f64> {
    let n = z.len();
    let mut phase = vec![0.0; n];
    phase[0] = z[0].arg();
    let step = |prev: f64, from: Complex64, to: Complex64| prev + (to / from).arg();
    for k in 1..=n / 2 {
        phase[k] = step(phase[k - 1], z[k - 1], z[k]);
    }
    let mut prev = 0;
    for k in ((n / 2 + 1)..n).rev() {
        phase[k] = step(phase[prev], z[prev], z[k]);
        prev = k;
    }
    phase
}

/// Seed transform with the origin sample weighted by one half (trapezoid rule).
fn seed_transform(k1: &SampledKernel) -> Vec<Complex64> {
    let mut t = forward(k1.dt, &k1.samples);
    let half = 0.5 * k1.dt * k1.samples[0];
    t.iter_mut().for_each(|z| *z -= half);
    t
}

pub fn dissipation_from_kernel(k1: &SampledKernel) -> Result<DissipationLaw> {
    dissipation_from_kernel_with(k1, &LawOptions::default())
}

/// `alpha = -log K^_1` with `Re alpha = -log |K^_1|` and `Im alpha` the
/// negated, continuously unwrapped phase.
pub fn dissipation_from_kernel_with(k1: &SampledKernel, opts: &LawOptions) -> Result<DissipationLaw> {
    if k1.len() < 8 || !(k1.dt > 0.0) || k1.samples.iter().any(|x| !x.is_finite()) {
        return Err(Error::InvalidInput("seed kernel needs >= 8 finite samples and dt > 0".into()));
    }
    let t = seed_transform(k1);
    let freqs = frequencies(k1.len(), k1.dt);
    let max_mod = t.iter().map(|z| z.norm()).fold(0.0f64, f64::max);
    let (kmin, min_mod) =
        t.iter().map(|z| z.norm()).enumerate().fold((0, f64::INFINITY), |m, (k, a)| if a < m.1 { (k, a) } else { m });
    if !(min_mod > opts.ep_floor * max_mod) {
        return Err(Error::EpViolated { nu: freqs[kmin], modulus: min_mod });
    }
    if max_mod > 1.0 + opts.subunit_tol {
        return Err(Error::NotSubunit { max_modulus: max_mod });
    }
    let phase = unwrapped_phase(&t);
    let alpha = t.iter().zip(&phase).map(|(z, p)| Complex64::new(-z.norm().ln(), -p)).collect();
    Ok(DissipationLaw { dt: k1.dt, freqs, alpha, seed_origin: k1.samples[0], seed_support_end: k1.support_end })
}

fn finish(law: &DissipationLaw, mut spectrum: Vec<Complex64>) -> Result<Vec<f64>> {
    let n = spectrum.len();
    if n.is_multiple_of(2) {
        spectrum[n / 2] = Complex64::new(spectrum[n / 2].re, 0.0);
    }
    let out = inverse(law.dt, &spectrum);
    let peak = out.iter().map(|z| z.re.abs()).fold(0.0f64, f64::max);
    let residue = out.iter().map(|z| z.im.abs()).fold(0.0f64, f64::max);
    if residue > REALITY_TOL * peak {
        return Err(Error::NonRealSynthesis { residue: residue / peak });
    }
    let re: Vec<f64> = out.iter().map(|z| z.re).collect();
    let edge = (n / 32).max(8).min(n);
    let total: f64 = re.iter().map(|x| x * x).sum();
    let tail: f64 = re[n - edge..].iter().map(|x| x * x).sum();
    if total > 0.0 && tail > ALIASING_TOL * total {
        return Err(Error::AliasingSuspected { fraction: tail / total });
    }
    Ok(re)
}

/// `K_R = F^{-1}(e^{-alpha R})` on the law's time grid.
///
/// For `R >= 1` the seed's trapezoid transform is raised to the power `R`;
/// the origin sample, which the trapezoid rule halves, is doubled back for
/// `R = 1` and extrapolated from the right for `R > 1`. For `0 < R < 1`
/// with a nonzero seed origin the rectangle-rule transform is used instead,
/// normalized to the same mass, and the `R dt / 2` lag it carries is removed
/// by resampling at `n - R/2`.
pub fn kernel_at_distance(law: &DissipationLaw, r: f64) -> Result<SampledKernel> {
    if !(r >= 0.0) || !r.is_finite() {
        return Err(Error::InvalidInput(format!("distance R must be finite and >= 0, got {r}")));
    }
    let n = law.len();
    let dt = law.dt;
    let support_end = law.seed_support_end * r;
    if r == 0.0 {
        let mut s = vec![0.0; n];
        s[0] = 1.0 / dt;
        return Ok(SampledKernel::new(dt, s, 0.0));
    }
    if r < 1.0 && law.seed_origin != 0.0 {
        let shift = Complex64::new(0.5 * dt * law.seed_origin, 0.0);
        let p: Vec<Complex64> = law.alpha.iter().map(|a| (-a).exp() + shift).collect();
        let phase = unwrapped_phase(&p);
        let gain_log = (p[0].norm() / (-law.alpha[0]).exp().norm()).ln();
        let spectrum = p
            .iter()
            .zip(&phase)
            .map(|(z, ph)| Complex64::from_polar(((z.norm().ln() - gain_log) * r).exp(), ph * r))
            .collect();
        let raw = finish(law, spectrum)?;
        let mut s: Vec<f64> = (0..n).map(|i| lagrange_uniform(&raw, i as f64 - 0.5 * r)).collect();
        s[0] = raw[0];
        return Ok(SampledKernel::new(dt, s, support_end));
    }
    let spectrum = law.alpha.iter().map(|a| (-a * r).exp()).collect();
    let mut s = finish(law, spectrum)?;
    if r == 1.0 {
        s[0] *= 2.0;
    } else if n >= 4 {
        s[0] = 3.0 * s[1] - 3.0 * s[2] + s[3];
    }
    Ok(SampledKernel::new(dt, s, support_end))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waves::kernels::{gamma_kernel, sampled_gamma_seed};
    use std::f64::consts::PI;

    #[test]
    fn exponential_seed_law() {
        let tau = 1.0;
        let k1 = sampled_gamma_seed(tau, 0.01, 8192);
        let law = dissipation_from_kernel(&k1).unwrap();
        assert!(law.alpha()[0].norm() < 1e-12);
        for k in [1usize, 3, 20] {
            let nu = law.frequencies()[k];
            let expected = 0.5 * (1.0 + (2.0 * PI * nu * tau).powi(2)).ln();
            assert!((law.alpha()[k].re - expected).abs() < 1e-4, "{k}");
            assert!((law.alpha()[k].im + (2.0 * PI * nu * tau).atan()).abs() < 1e-4);
        }
        let (re, im) = law.symmetry_defect();
        assert!(re < 1e-12 && im < 1e-12);
        assert!(law.min_re() >= -1e-12);
    }

    #[test]
    fn round_trip_at_unit_distance() {
        let k1 = sampled_gamma_seed(1.0, 0.02, 4000);
        let law = dissipation_from_kernel(&k1).unwrap();
        let back = kernel_at_distance(&law, 1.0).unwrap();
        let peak = k1.peak();
        for (a, b) in k1.samples.iter().zip(&back.samples) {
            assert!((a - b).abs() < 1e-8 * peak);
        }
    }

    #[test]
    fn zero_distance_is_a_delta() {
        let law = dissipation_from_kernel(&sampled_gamma_seed(1.0, 0.1, 512)).unwrap();
        let d = kernel_at_distance(&law, 0.0).unwrap();
        assert_eq!(d.samples[0], 10.0);
        assert!(d.samples[1..].iter().all(|&x| x == 0.0));
    }

    #[test]
    fn interior_zero_violates_ep() {
        // two impulses 2 dt apart cancel at a quarter of the sampling rate
        let mut s = vec![0.0; 64];
        s[1] = 1.0;
        s[3] = 1.0;
        let k = SampledKernel::new(0.125, s, 0.5);
        assert!(matches!(dissipation_from_kernel(&k), Err(Error::EpViolated { .. })));
    }

    #[test]
    fn oversized_seed_is_not_subunit() {
        let k = SampledKernel::from_fn(0.01, 4096, f64::INFINITY, |t| 2.0 * gamma_kernel(1.0, 1.0, t));
        assert!(matches!(dissipation_from_kernel(&k), Err(Error::NotSubunit { .. })));
    }

    #[test]
    fn short_window_is_flagged_as_aliased() {
        let k1 = sampled_gamma_seed(1.0, 0.05, 200);
        let law = dissipation_from_kernel(&k1).unwrap();
        assert!(matches!(kernel_at_distance(&law, 4.0), Err(Error::AliasingSuspected { .. })));
    }
}
