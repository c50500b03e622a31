//! Closed-form model families with analytic coefficients, frequency,
//! relaxation and solution.

use std::sync::Arc;

use crate::error::{Error, Result};
use crate::frequency::{Branch, FrequencyFunction};
use crate::ode::{CoefficientPair, InitialData, ScalarFn};
use crate::params::Config;

/// Increasing frequency shapes `w` for the pure-frequency family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum WShape {
    /// `w = omega0`.
    Constant { omega0: f64 },
    /// `w = omega0 T / (T - t)`.
    Hyperbolic { omega0: f64, horizon: f64 },
    /// `w = omega0 e^{rate t}` on `[0, ∞)`.
    Exponential { omega0: f64, rate: f64 },
}

/// Positive frequency shapes for the undamped family.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OmegaShape {
    Constant {
        omega0: f64,
    },
    /// `omega = omega0 (1 - t/T) e^{t/T}`, giving `a = 1/(T - t) - 1/T`.
    Stopping {
        omega0: f64,
        horizon: f64,
    },
}

/// Parameter record of a family; closed forms live in code.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Model {
    Constant { a0: f64, b0: f64 },
    FiniteStopFirstOrder { horizon: f64, a0: f64, b0: f64, a1: f64 },
    FiniteStopPowerN { horizon: f64, a0: f64, b0: f64, a1: f64, n: u32 },
    PureFrequency(WShape),
    UndampedNonconstant(OmegaShape),
}

/// A model family: coefficients plus analytic `omega`, phase, `alpha`, `rho`.
#[derive(Clone)]
pub struct ModelFamily {
    pub model: Model,
    pub branch: Branch,
    coeffs: CoefficientPair,
    omega: ScalarFn,
    omega_prime: ScalarFn,
    phase: ScalarFn,
    alpha: ScalarFn,
    rho: ScalarFn,
}

impl std::fmt::Debug for ModelFamily {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("ModelFamily").field("model", &self.model).field("branch", &self.branch).finish()
    }
}

fn arc<F: Fn(f64) -> f64 + Send + Sync + 'static>(f: F) -> ScalarFn {
    Arc::new(f)
}

fn positive(name: &str, x: f64) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::ParameterDomain(format!("{name} must be positive and finite, got {x}")))
    }
}

/// `sqrt(|r|)` after checking that the sign of `r` matches the branch.
fn branch_root(radicand: f64, branch: Branch) -> Result<f64> {
    match branch {
        Branch::Real if radicand > 0.0 => Ok(radicand.sqrt()),
        Branch::Imaginary if radicand < 0.0 => Ok((-radicand).sqrt()),
        _ => Err(Error::ParameterDomain(format!("omega0^2 = {radicand} does not match the {branch:?} branch"))),
    }
}

impl ModelFamily {
    /// Constant coefficients `a0`, `b0`.
    pub fn constant(a0: f64, b0: f64, branch: Branch) -> Result<Self> {
        let w0 = branch_root(b0 - a0 * a0 / 4.0, branch)?;
        Ok(Self {
            model: Model::Constant { a0, b0 },
            branch,
            coeffs: CoefficientPair::constant(a0, b0),
            omega: arc(move |_| w0),
            omega_prime: arc(|_| 0.0),
            phase: arc(move |t| w0 * t),
            alpha: arc(move |_| a0 / 2.0),
            rho: arc(move |t| (-a0 * t / 2.0).exp()),
        })
    }

    /// `a = a0 T/(T-t) - a1 t/T`, `omega = omega0 T/(T-t)` with
    /// `omega0 = sqrt(b0 - (a0/2 + 1/(2T))^2)`.
    pub fn finite_stop_first_order(horizon: f64, a0: f64, b0: f64, a1: f64, branch: Branch) -> Result<Self> {
        positive("T", horizon)?;
        positive("a0", a0)?;
        positive("b0", b0)?;
        if a1 > a0 {
            return Err(Error::ParameterDomain(format!("a1 = {a1} exceeds a0 = {a0}")));
        }
        let t_ = horizon;
        let c = a0 / 2.0 + 1.0 / (2.0 * t_);
        let w0 = branch_root(b0 - c * c, branch)?;
        let a = move |t: f64| a0 * t_ / (t_ - t) - a1 * t / t_;
        let b = move |t: f64| {
            b0 * t_ * t_ / ((t_ - t) * (t_ - t)) + a1 * a1 * t * t / (4.0 * t_ * t_)
                - a1 * a0 * t / (2.0 * (t_ - t))
                - a1 / (2.0 * t_)
        };
        let k = (1.0 + a0 * t_) / 2.0;
        Ok(Self {
            model: Model::FiniteStopFirstOrder { horizon, a0, b0, a1 },
            branch,
            coeffs: CoefficientPair::new(a, b, horizon)?.singular_at_horizon(true),
            omega: arc(move |t| w0 * t_ / (t_ - t)),
            omega_prime: arc(move |t| w0 * t_ / ((t_ - t) * (t_ - t))),
            phase: arc(move |t| -w0 * t_ * (-t / t_).ln_1p()),
            alpha: arc(move |t| k / (t_ - t) - a1 * t / (2.0 * t_)),
            rho: arc(move |t| (k * (-t / t_).ln_1p() + a1 * t * t / (4.0 * t_)).exp()),
        })
    }

    /// `a = a0 T^n/(T-t)^n - a1 t/T`, `omega = omega0 T^n/(T-t)^n` with
    /// `omega0 = sqrt(b0 - a0^2/4)`.
    pub fn finite_stop_power_n(horizon: f64, a0: f64, b0: f64, a1: f64, n: u32, branch: Branch) -> Result<Self> {
        positive("T", horizon)?;
        positive("a0", a0)?;
        positive("b0", b0)?;
        if n < 2 {
            return Err(Error::ParameterDomain(format!("n must be an integer >= 2, got {n}")));
        }
        let nf = n as f64;
        if a1 > nf * a0 {
            return Err(Error::ParameterDomain(format!("a1 = {a1} exceeds n a0 = {}", nf * a0)));
        }
        let t_ = horizon;
        let w0 = branch_root(b0 - a0 * a0 / 4.0, branch)?;
        // s = T/(T-t) = (1 - t/T)^{-1}
        let s = move |t: f64| t_ / (t_ - t);
        let a = move |t: f64| a0 * s(t).powf(nf) - a1 * t / t_;
        let b = move |t: f64| {
            let r = t_ - t;
            let sn = s(t).powf(nf);
            b0 * sn * sn + nf * a0 * sn / (2.0 * r) + nf * (2.0 - nf) / (4.0 * r * r) - a1 * a0 * sn * t / (2.0 * t_)
                + a1 * a1 * t * t / (4.0 * t_ * t_)
                - a1 / (2.0 * t_)
        };
        // (1 - t/T)^{1-n} - 1
        let g = move |t: f64| ((nf - 1.0) * -(-t / t_).ln_1p()).exp_m1();
        Ok(Self {
            model: Model::FiniteStopPowerN { horizon, a0, b0, a1, n },
            branch,
            coeffs: CoefficientPair::new(a, b, horizon)?.singular_at_horizon(true),
            omega: arc(move |t| w0 * s(t).powf(nf)),
            omega_prime: arc(move |t| w0 * nf * s(t).powf(nf) / (t_ - t)),
            phase: arc(move |t| w0 * t_ / (nf - 1.0) * g(t)),
            alpha: arc(move |t| a0 * s(t).powf(nf) / 2.0 - a1 * t / (2.0 * t_) + nf / (2.0 * (t_ - t))),
            rho: arc(move |t| {
                (nf / 2.0 * (-t / t_).ln_1p() + a1 * t * t / (4.0 * t_) - a0 * t_ / (2.0 * (nf - 1.0)) * g(t)).exp()
            }),
        })
    }

    /// `a = w'/w`, `b = w^2 + a'`; then `omega = w` and `rho = omega0/w`.
    pub fn pure_frequency_relaxation(shape: WShape) -> Result<Self> {
        let model = Model::PureFrequency(shape);
        let fam = match shape {
            WShape::Constant { omega0 } => {
                positive("omega0", omega0)?;
                Self {
                    model,
                    branch: Branch::Real,
                    coeffs: CoefficientPair::constant(0.0, omega0 * omega0),
                    omega: arc(move |_| omega0),
                    omega_prime: arc(|_| 0.0),
                    phase: arc(move |t| omega0 * t),
                    alpha: arc(|_| 0.0),
                    rho: arc(|_| 1.0),
                }
            }
            WShape::Hyperbolic { omega0, horizon } => {
                positive("omega0", omega0)?;
                positive("T", horizon)?;
                let t_ = horizon;
                let a = move |t: f64| 1.0 / (t_ - t);
                let b = move |t: f64| (omega0 * omega0 * t_ * t_ + 1.0) / ((t_ - t) * (t_ - t));
                Self {
                    model,
                    branch: Branch::Real,
                    coeffs: CoefficientPair::new(a, b, horizon)?.singular_at_horizon(true),
                    omega: arc(move |t| omega0 * t_ / (t_ - t)),
                    omega_prime: arc(move |t| omega0 * t_ / ((t_ - t) * (t_ - t))),
                    phase: arc(move |t| -omega0 * t_ * (-t / t_).ln_1p()),
                    alpha: arc(move |t| 1.0 / (t_ - t)),
                    rho: arc(move |t| 1.0 - t / t_),
                }
            }
            WShape::Exponential { omega0, rate } => {
                positive("omega0", omega0)?;
                positive("rate", rate)?;
                Self {
                    model,
                    branch: Branch::Real,
                    coeffs: CoefficientPair::new(
                        move |_| rate,
                        move |t| (omega0 * (rate * t).exp()).powi(2),
                        f64::INFINITY,
                    )?,
                    omega: arc(move |t| omega0 * (rate * t).exp()),
                    omega_prime: arc(move |t| omega0 * rate * (rate * t).exp()),
                    phase: arc(move |t| omega0 * (rate * t).exp_m1() / rate),
                    alpha: arc(move |_| rate),
                    rho: arc(move |t| (-rate * t).exp()),
                }
            }
        };
        Ok(fam)
    }

    /// `a = -omega'/omega`, `b = omega^2`; then `alpha = 0` and `rho = 1`.
    pub fn undamped_nonconstant(shape: OmegaShape) -> Result<Self> {
        let model = Model::UndampedNonconstant(shape);
        let fam = match shape {
            OmegaShape::Constant { omega0 } => {
                positive("omega0", omega0)?;
                Self {
                    model,
                    branch: Branch::Real,
                    coeffs: CoefficientPair::constant(0.0, omega0 * omega0),
                    omega: arc(move |_| omega0),
                    omega_prime: arc(|_| 0.0),
                    phase: arc(move |t| omega0 * t),
                    alpha: arc(|_| 0.0),
                    rho: arc(|_| 1.0),
                }
            }
            OmegaShape::Stopping { omega0, horizon } => {
                positive("omega0", omega0)?;
                positive("T", horizon)?;
                let t_ = horizon;
                let w = move |t: f64| omega0 * (1.0 - t / t_) * (t / t_).exp();
                Self {
                    model,
                    branch: Branch::Real,
                    coeffs: CoefficientPair::new(move |t| 1.0 / (t_ - t) - 1.0 / t_, move |t| w(t) * w(t), horizon)?
                        .singular_at_horizon(true),
                    omega: arc(w),
                    omega_prime: arc(move |t| -omega0 * t / (t_ * t_) * (t / t_).exp()),
                    phase: arc(move |t| omega0 * t_ * ((2.0 - t / t_) * (t / t_).exp() - 2.0)),
                    alpha: arc(|_| 0.0),
                    rho: arc(|_| 1.0),
                }
            }
        };
        Ok(fam)
    }

    /// Builds a family from a parameter file (`name`, `T`, `a0`, `b0`, `a1`,
    /// `n`, `omega0`, `rate`, `shape`, `branch`).
    pub fn from_config(cfg: &Config) -> Result<Self> {
        let name = cfg.str_or("name", "constant");
        let branch = match cfg.str_or("branch", "real").as_str() {
            "real" => Branch::Real,
            "imaginary" => Branch::Imaginary,
            other => return Err(Error::InvalidInput(format!("unknown branch '{other}'"))),
        };
        match name.as_str() {
            "constant" => Self::constant(cfg.f64_or("a0", 0.0)?, cfg.f64_req("b0")?, branch),
            "finite_stop_first_order" => Self::finite_stop_first_order(
                cfg.f64_req("T")?,
                cfg.f64_req("a0")?,
                cfg.f64_req("b0")?,
                cfg.f64_or("a1", 0.0)?,
                branch,
            ),
            "finite_stop_power_n" => Self::finite_stop_power_n(
                cfg.f64_req("T")?,
                cfg.f64_req("a0")?,
                cfg.f64_req("b0")?,
                cfg.f64_or("a1", 0.0)?,
                cfg.u32_or("n", 2)?,
                branch,
            ),
            "pure_frequency" => {
                let omega0 = cfg.f64_req("omega0")?;
                let shape = match cfg.str_or("shape", "hyperbolic").as_str() {
                    "constant" => WShape::Constant { omega0 },
                    "hyperbolic" => WShape::Hyperbolic { omega0, horizon: cfg.f64_req("T")? },
                    "exponential" => WShape::Exponential { omega0, rate: cfg.f64_or("rate", 1.0)? },
                    other => return Err(Error::InvalidInput(format!("unknown shape '{other}'"))),
                };
                Self::pure_frequency_relaxation(shape)
            }
            "undamped_nonconstant" => {
                let omega0 = cfg.f64_req("omega0")?;
                let shape = match cfg.str_or("shape", "stopping").as_str() {
                    "constant" => OmegaShape::Constant { omega0 },
                    "stopping" => OmegaShape::Stopping { omega0, horizon: cfg.f64_req("T")? },
                    other => return Err(Error::InvalidInput(format!("unknown shape '{other}'"))),
                };
                Self::undamped_nonconstant(shape)
            }
            other => Err(Error::InvalidInput(format!("unknown model '{other}'"))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self.model {
            Model::Constant { .. } => "constant",
            Model::FiniteStopFirstOrder { .. } => "finite_stop_first_order",
            Model::FiniteStopPowerN { .. } => "finite_stop_power_n",
            Model::PureFrequency(_) => "pure_frequency",
            Model::UndampedNonconstant(_) => "undamped_nonconstant",
        }
    }

    pub fn coefficients(&self) -> &CoefficientPair {
        &self.coeffs
    }

    pub fn horizon(&self) -> f64 {
        self.coeffs.horizon()
    }

    pub fn a(&self, t: f64) -> f64 {
        self.coeffs.a(t)
    }

    pub fn b(&self, t: f64) -> f64 {
        self.coeffs.b(t)
    }

    pub fn omega(&self, t: f64) -> f64 {
        (self.omega)(t)
    }

    pub fn omega_prime(&self, t: f64) -> f64 {
        (self.omega_prime)(t)
    }

    pub fn phase(&self, t: f64) -> f64 {
        (self.phase)(t)
    }

    pub fn alpha(&self, t: f64) -> f64 {
        (self.alpha)(t)
    }

    pub fn rho(&self, t: f64) -> f64 {
        (self.rho)(t)
    }

    pub fn omega0(&self) -> f64 {
        self.omega(0.0)
    }

    pub fn omega1(&self) -> f64 {
        self.omega_prime(0.0)
    }

    /// Analytic solution for initial data `init`.
    pub fn v(&self, t: f64, init: InitialData) -> f64 {
        let p = self.phase(t);
        let c = init.psi + self.alpha(0.0) * init.phi;
        let (cs, sn) = match self.branch {
            Branch::Real => (p.cos(), p.sin()),
            Branch::Imaginary => (p.cosh(), p.sinh()),
        };
        (init.phi * cs + c * sn / self.omega0()) * self.rho(t)
    }

    /// Envelope `(|phi| + |psi + alpha(0) phi| / omega0) rho(t)` bounding `|v|` on the real branch.
    pub fn envelope(&self, t: f64, init: InitialData) -> f64 {
        (init.phi.abs() + (init.psi + self.alpha(0.0) * init.phi).abs() / self.omega0()) * self.rho(t)
    }

    /// Frequency function sampled from the analytic `omega`, `omega'` on `grid`.
    pub fn frequency_function(&self, grid: &[f64]) -> Result<FrequencyFunction> {
        FrequencyFunction::from_samples(
            self.branch,
            grid.to_vec(),
            grid.iter().map(|&t| self.omega(t)).collect(),
            grid.iter().map(|&t| self.omega_prime(t)).collect(),
            self.horizon(),
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frequency::defomega_residual;
    use crate::ode::{integrate_ivp, uniform_grid, GridSpec};

    fn ode_residual(m: &ModelFamily, init: InitialData, t: f64) -> f64 {
        let h = 1e-4 * (1.0 + t);
        let v = |s| m.v(s, init);
        let d1 = (v(t + h) - v(t - h)) / (2.0 * h);
        let d2 = (v(t + h) - 2.0 * v(t) + v(t - h)) / (h * h);
        (d2 + m.a(t) * d1 + m.b(t) * v(t)) / m.b(t).abs().max(1.0)
    }

    fn families() -> Vec<ModelFamily> {
        vec![
            ModelFamily::constant(0.3, 2.0, Branch::Real).unwrap(),
            ModelFamily::constant(4.0, 1.0, Branch::Imaginary).unwrap(),
            ModelFamily::finite_stop_first_order(10.0, 0.01, 0.2, 0.0, Branch::Real).unwrap(),
            ModelFamily::finite_stop_first_order(10.0, 0.5, 10.0, 0.3, Branch::Real).unwrap(),
            ModelFamily::finite_stop_power_n(10.0, 0.5, 100.0, 0.0, 2, Branch::Real).unwrap(),
            ModelFamily::finite_stop_power_n(5.0, 0.2, 4.0, 0.5, 3, Branch::Real).unwrap(),
            ModelFamily::pure_frequency_relaxation(WShape::Hyperbolic { omega0: 2.0, horizon: 5.0 }).unwrap(),
            ModelFamily::pure_frequency_relaxation(WShape::Exponential { omega0: 1.0, rate: 0.5 }).unwrap(),
            ModelFamily::undamped_nonconstant(OmegaShape::Stopping { omega0: 3.0, horizon: 10.0 }).unwrap(),
        ]
    }

    #[test]
    fn analytic_solutions_satisfy_the_ode() {
        let init = InitialData::new(1.0, 1.0);
        for m in families() {
            let t_end = if m.horizon().is_finite() { 0.5 * m.horizon() } else { 3.0 };
            for k in 1..20 {
                let t = t_end * k as f64 / 20.0;
                let r = ode_residual(&m, init, t);
                assert!(r.abs() < 1e-4, "{} at t = {t}: {r}", m.name());
            }
        }
    }

    #[test]
    fn analytic_triples_satisfy_the_frequency_identity() {
        for m in families() {
            let t_end = if m.horizon().is_finite() { 0.9 * m.horizon() } else { 3.0 };
            let grid = uniform_grid(t_end, 4001);
            let f = m.frequency_function(&grid).unwrap();
            let r = defomega_residual(m.coefficients(), &f, &grid).unwrap();
            assert!(r.max_abs < 1e-6, "{}: {}", m.name(), r.max_abs);
        }
    }

    #[test]
    fn analytic_solutions_match_the_integrator() {
        let init = InitialData::new(1.0, 1.0);
        for m in families() {
            let t_end = if m.horizon().is_finite() { 0.99 * m.horizon() } else { 3.0 };
            let tr = integrate_ivp(m.coefficients(), None, init, &GridSpec::new(t_end, 400, 1e-11)).unwrap();
            let scale = tr.values.iter().fold(0.0f64, |s, v| s.max(v.abs()));
            for (t, v) in tr.grid.iter().zip(&tr.values) {
                assert!((m.v(*t, init) - v).abs() < 1e-5 * scale, "{} at {t}", m.name());
            }
        }
    }

    #[test]
    fn linear_relaxation_special_case() {
        let m = ModelFamily::finite_stop_first_order(10.0, 0.1, 1.0, 0.0, Branch::Real).unwrap();
        for k in 0..=1000 {
            let t = 9.99 * k as f64 / 1000.0;
            assert!((m.rho(t) - (1.0 - t / 10.0)).abs() < 1e-12);
        }
    }

    #[test]
    fn branch_mismatch_is_a_domain_error() {
        assert!(matches!(
            ModelFamily::finite_stop_first_order(10.0, 4.0, 1.0, 0.0, Branch::Real),
            Err(Error::ParameterDomain(_))
        ));
        assert!(ModelFamily::finite_stop_first_order(10.0, 4.0, 1.0, 0.0, Branch::Imaginary).is_ok());
        assert!(matches!(ModelFamily::constant(0.0, 1.0, Branch::Imaginary), Err(Error::ParameterDomain(_))));
    }

    #[test]
    fn power_n_relaxation_decreases_at_the_a1_boundary() {
        let m = ModelFamily::finite_stop_power_n(10.0, 0.5, 100.0, 1.0, 2, Branch::Real).unwrap();
        assert_eq!(m.rho(0.0), 1.0);
        let mut prev = 1.0;
        for k in 1..=2000 {
            let r = m.rho(9.9 * k as f64 / 2000.0);
            assert!(r < prev);
            prev = r;
        }
        assert!(m.rho(9.9) < 1e-100);
    }

    #[test]
    fn stopping_undamped_amplitude_does_not_decay() {
        let m = ModelFamily::undamped_nonconstant(OmegaShape::Stopping { omega0: 3.0, horizon: 10.0 }).unwrap();
        let init = InitialData::new(0.0, 1.0);
        let peak = (0..20000).map(|k| 5.0 + 4.99 * k as f64 / 20000.0).map(|t| m.v(t, init).abs()).fold(0.0, f64::max);
        assert!((peak - 1.0 / 3.0).abs() < 1e-3, "{peak}");
    }
}
