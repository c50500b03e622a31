//! Spherical dissipative wave `G(r, t) = K_r(t - r/c0) / (4 pi r)`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::export;
use crate::waves::kernels::KernelFamily;
use crate::waves::law::kernel_at_distance;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FieldSample {
    pub r: f64,
    pub t: f64,
    pub g: f64,
}

fn check(c0: f64, radii: &[f64]) -> Result<()> {
    if !(c0 > 0.0) {
        return Err(Error::InvalidInput("wave speed c0 must be positive".into()));
    }
    if let Some(r) = radii.iter().find(|&&r| !(r > 0.0) || !r.is_finite()) {
        return Err(Error::InvalidInput(format!("radius must be positive, got {r}")));
    }
    Ok(())
}

/// `G(r, t)` for each radius at one time. The kernel distance is `R = r`;
/// synthesized kernels are interpolated linearly in time.
pub fn spherical_field(family: &KernelFamily, c0: f64, radii: &[f64], t: f64) -> Result<Vec<f64>> {
    Ok(field_snapshot(family, c0, radii, &[t])?.into_iter().map(|s| s.g).collect())
}

/// `G` on the product of `radii` and `times`, radius-major.
pub fn field_snapshot(family: &KernelFamily, c0: f64, radii: &[f64], times: &[f64]) -> Result<Vec<FieldSample>> {
    check(c0, radii)?;
    let rows: Result<Vec<Vec<FieldSample>>> = radii
        .par_iter()
        .map(|&r| {
            let front = r / c0;
            let scale = 1.0 / (4.0 * PI * r);
            let value: Box<dyn Fn(f64) -> f64> = match family {
                KernelFamily::Synthesized(law) => {
                    let k = kernel_at_distance(law, r)?;
                    Box::new(move |s| k.value_at(s))
                }
                _ => Box::new(move |s| family.analytic(r, s).unwrap()),
            };
            Ok(times
                .iter()
                .map(|&t| {
                    let s = t - front;
                    let g = if s < 0.0 { 0.0 } else { value(s) * scale };
                    FieldSample { r, t, g }
                })
                .collect())
        })
        .collect();
    Ok(rows?.into_iter().flatten().collect())
}

/// CSV with header `r,t,G`.
pub fn write_field_csv<W: Write>(w: W, samples: &[FieldSample]) -> std::io::Result<()> {
    let r: Vec<f64> = samples.iter().map(|s| s.r).collect();
    let t: Vec<f64> = samples.iter().map(|s| s.t).collect();
    let g: Vec<f64> = samples.iter().map(|s| s.g).collect();
    export::write_csv(w, &["r", "t", "G"], &[&r, &t, &g])
}
