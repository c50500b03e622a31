//! Closed-form evaluation of homogeneous and forced solutions from the
//! frequency function, and comparison against direct integration.

use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::export;
use crate::frequency::{
    build_auxiliary_solutions, dissipation_profile, frequency_from_aux, uniform_step, Branch, DissipationProfile,
    FrequencyFunction, OMEGA_FLOOR,
};
use crate::ode::{integrate_on_grid, integrate_rk4, CoefficientPair, Forcing, GridSpec, InitialData};
use crate::quadrature::simpson;

/// Solution values produced by the representation formula.
#[derive(Debug, Clone)]
pub struct FormulaSolution {
    pub freq: FrequencyFunction,
    pub diss: DissipationProfile,
    pub init: InitialData,
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
}

fn check_times(ts: &[f64], freq: &FrequencyFunction) -> Result<()> {
    let last = freq.grid()[freq.grid().len() - 1];
    if let Some(&t) = ts.iter().find(|&&t| !(0.0..=last).contains(&t)) {
        return Err(Error::InvalidInput(format!("evaluation time {t} outside [0, {last}]")));
    }
    Ok(())
}

/// `v = [phi cos W + (psi + alpha(0) phi) sin W / omega(0)] rho`, with the
/// hyperbolic pair on the imaginary branch.
pub fn evaluate_homogeneous(
    freq: &FrequencyFunction,
    diss: &DissipationProfile,
    init: InitialData,
    ts: &[f64],
) -> Result<FormulaSolution> {
    check_times(ts, freq)?;
    let w0 = freq.omega0();
    let c = init.psi + diss.alpha0() * init.phi;
    let values = ts
        .par_iter()
        .map(|&t| {
            let p = freq.phase(t);
            let (cs, sn) = match freq.branch() {
                Branch::Real => (p.cos(), p.sin()),
                Branch::Imaginary => (p.cosh(), p.sinh()),
            };
            (init.phi * cs + c * sn / w0) * diss.rho(t)
        })
        .collect();
    Ok(FormulaSolution { freq: freq.clone(), diss: diss.clone(), init, grid: ts.to_vec(), values })
}

/// Forced solution with zero initial data,
/// `v(t) = ∫_0^t f0(s) sin(W(t) - W(s)) / omega(s) exp(-(A(t) - A(s))) ds`,
/// by composite Simpson over the frequency grid.
pub fn evaluate_forced(
    freq: &FrequencyFunction,
    diss: &DissipationProfile,
    forcing: &Forcing,
    ts: &[f64],
) -> Result<FormulaSolution> {
    check_times(ts, freq)?;
    let grid = freq.grid();
    let w = freq.omega_samples();
    let phase = freq.phase_samples();
    let at = diss.alpha_tilde_samples();
    let f: Vec<f64> = grid.iter().map(|&s| forcing.eval(s)).collect();
    let start = grid.iter().rposition(|&s| s <= forcing.support_start()).unwrap_or(0);
    let w0 = freq.omega0().abs();
    if let Some(i) = (start..grid.len()).find(|&i| f[i] != 0.0 && w[i].abs() < OMEGA_FLOOR * w0) {
        return Err(Error::OmegaNearZero { t: grid[i], value: w[i].abs() });
    }
    let step = uniform_step(grid);
    let kernel = |pt: f64, att: f64, i: usize| -> f64 {
        let d = pt - phase[i];
        let s = match freq.branch() {
            Branch::Real => d.sin(),
            Branch::Imaginary => d.sinh(),
        };
        f[i] * s / w[i] * (at[i] - att).exp()
    };

    let values = ts
        .par_iter()
        .map(|&t| {
            if t <= grid[start] {
                return 0.0;
            }
            let pt = freq.phase(t);
            let att = diss.alpha_tilde(t);
            // last node not beyond t
            let m = grid.partition_point(|&s| s <= t) - 1;
            let ys: Vec<f64> = (start..=m).map(|i| kernel(pt, att, i)).collect();
            let mut acc = if ys.len() >= 2 {
                match step {
                    Some(h) => simpson(h, &ys),
                    None => {
                        (start..m).map(|i| 0.5 * (grid[i + 1] - grid[i]) * (ys[i - start] + ys[i + 1 - start])).sum()
                    }
                }
            } else {
                0.0
            };
            let tail = t - grid[m];
            if tail > 0.0 {
                // Simpson on [grid[m], t]; the integrand vanishes at s = t
                let sm = grid[m] + 0.5 * tail;
                let d = pt - freq.phase(sm);
                let s = match freq.branch() {
                    Branch::Real => d.sin(),
                    Branch::Imaginary => d.sinh(),
                };
                let mid = forcing.eval(sm) * s / freq.omega(sm) * (diss.alpha_tilde(sm) - att).exp();
                acc += tail / 6.0 * (ys[ys.len() - 1] + 4.0 * mid);
            }
            acc
        })
        .collect();
    Ok(FormulaSolution {
        freq: freq.clone(),
        diss: diss.clone(),
        init: InitialData::new(0.0, 0.0),
        grid: ts.to_vec(),
        values,
    })
}

/// Reference integrator for [`cross_validate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Oracle {
    /// Fixed-step RK4 with the given number of substeps per output interval.
    Rk4 { substeps: usize },
    /// The adaptive integrator at the grid tolerance.
    Adaptive,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidationOptions {
    /// Frequency at `t = 0`; defaults to `sqrt(|b(0) - a(0)^2/4|)`.
    pub omega0: Option<f64>,
    pub omega1: f64,
    pub branch: Branch,
    pub oracle: Oracle,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { omega0: None, omega1: 0.0, branch: Branch::Real, oracle: Oracle::Rk4 { substeps: 10 } }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationSummary {
    pub max_abs_err: f64,
    pub max_rel_err: f64,
    pub grid_size: usize,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub summary: ValidationSummary,
    pub grid: Vec<f64>,
    pub v_formula: Vec<f64>,
    pub v_direct: Vec<f64>,
    pub freq: FrequencyFunction,
    pub diss: DissipationProfile,
}

impl ValidationReport {
    pub fn max_abs_err(&self) -> f64 {
        self.summary.max_abs_err
    }

    pub fn max_rel_err(&self) -> f64 {
        self.summary.max_rel_err
    }

    pub fn abs_err(&self) -> Vec<f64> {
        self.v_formula.iter().zip(&self.v_direct).map(|(a, b)| (a - b).abs()).collect()
    }

    /// CSV with header `t,v_formula,v_direct,abs_err`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        let err = self.abs_err();
        export::write_csv(
            w,
            &["t", "v_formula", "v_direct", "abs_err"],
            &[&self.grid, &self.v_formula, &self.v_direct, &err],
        )
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&self.summary).expect("summary serializes")
    }
}

pub fn default_omega0(coeffs: &CoefficientPair) -> f64 {
    let a = coeffs.a(0.0);
    let w = (coeffs.b(0.0) - a * a / 4.0).abs().sqrt();
    if w > 0.0 {
        w
    } else {
        1.0
    }
}

/// Builds the frequency function, evaluates the formula solution and
/// compares it against direct integration on the grid of `spec`.
///
/// The relative error is `max |v_formula - v_direct| / max |v_direct|`.
pub fn cross_validate(
    coeffs: &CoefficientPair,
    init: InitialData,
    forcing: Option<&Forcing>,
    spec: &GridSpec,
    options: &ValidationOptions,
) -> Result<ValidationReport> {
    let omega0 = options.omega0.unwrap_or_else(|| default_omega0(coeffs));
    let (v1, v2) = build_auxiliary_solutions(coeffs, omega0, options.omega1, spec)?;
    let freq = frequency_from_aux(coeffs, &v1, &v2, options.branch)?;
    let diss = dissipation_profile(coeffs, &freq)?;
    let grid = spec.grid();
    let mut v_formula = evaluate_homogeneous(&freq, &diss, init, &grid)?.values;
    if let Some(f) = forcing {
        let forced = evaluate_forced(&freq, &diss, f, &grid)?;
        for (v, u) in v_formula.iter_mut().zip(forced.values) {
            *v += u;
        }
    }
    let direct = match options.oracle {
        Oracle::Rk4 { substeps } => integrate_rk4(coeffs, forcing, init, &grid, substeps)?,
        Oracle::Adaptive => integrate_on_grid(coeffs, forcing, init, &grid, spec.rtol, spec.atol)?,
    };
    let max_abs_err = v_formula.iter().zip(&direct.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
    let scale = direct.values.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let max_rel_err = if scale > 0.0 { max_abs_err / scale } else { max_abs_err };
    Ok(ValidationReport {
        summary: ValidationSummary { max_abs_err, max_rel_err, grid_size: grid.len() },
        grid,
        v_formula,
        v_direct: direct.values,
        freq,
        diss,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn harmonic() -> (CoefficientPair, FrequencyFunction, DissipationProfile) {
        let c = CoefficientPair::constant(0.0, 4.0 * PI * PI);
        let spec = GridSpec::new(1.0, 401, 1e-11);
        let (v1, v2) = build_auxiliary_solutions(&c, 2.0 * PI, 0.0, &spec).unwrap();
        let f = frequency_from_aux(&c, &v1, &v2, Branch::Real).unwrap();
        let d = dissipation_profile(&c, &f).unwrap();
        (c, f, d)
    }

    #[test]
    fn cosine_from_formula() {
        let (_, f, d) = harmonic();
        let ts: Vec<f64> = (0..50).map(|i| i as f64 * 0.0199).collect();
        let s = evaluate_homogeneous(&f, &d, InitialData::new(1.0, 0.0), &ts).unwrap();
        for (t, v) in ts.iter().zip(&s.values) {
            assert!((v - (2.0 * PI * t).cos()).abs() < 1e-8);
        }
        assert_eq!(s.values[0], 1.0);
    }

    #[test]
    fn formula_is_affine_in_initial_data() {
        let (_, f, d) = harmonic();
        let ts = f.grid().to_vec();
        let a = evaluate_homogeneous(&f, &d, InitialData::new(0.3, -1.2), &ts).unwrap();
        let b = evaluate_homogeneous(&f, &d, InitialData::new(-0.7, 2.5), &ts).unwrap();
        let s = evaluate_homogeneous(&f, &d, InitialData::new(-0.4, 1.3), &ts).unwrap();
        for i in 0..ts.len() {
            assert!((s.values[i] - a.values[i] - b.values[i]).abs() < 1e-14);
        }
    }

    #[test]
    fn zero_forcing_gives_zero() {
        let (_, f, d) = harmonic();
        let zero = Forcing::new(|_| 0.0, 0.1).unwrap();
        let s = evaluate_forced(&f, &d, &zero, f.grid()).unwrap();
        assert!(s.values.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn bump_forcing_matches_integrator() {
        let (c, f, d) = harmonic();
        let bump = Forcing::bump(0.1, 0.3, 1.0).unwrap();
        let s = evaluate_forced(&f, &d, &bump, f.grid()).unwrap();
        let direct = integrate_rk4(&c, Some(&bump), InitialData::new(0.0, 0.0), f.grid(), 10).unwrap();
        let err = s.values.iter().zip(&direct.values).fold(0.0f64, |m, (a, b)| m.max((a - b).abs()));
        assert!(err < 1e-5, "{err}");
        // off-grid evaluation agrees with on-grid
        let off = evaluate_forced(&f, &d, &bump, &[0.5013]).unwrap().values[0];
        let on = evaluate_forced(&f, &d, &bump, &[0.5]).unwrap().values[0];
        assert!((off - on).abs() < 0.0013 * 2.0 * PI * 0.1);
    }

    #[test]
    fn harmonic_cross_validation() {
        let c = CoefficientPair::constant(0.0, 4.0 * PI * PI);
        let r =
            cross_validate(&c, InitialData::new(1.0, 0.5), None, &GridSpec::new(2.0, 401, 1e-11), &Default::default())
                .unwrap();
        assert!(r.max_abs_err() < 1e-8, "{}", r.max_abs_err());
    }
}
