//! Frequency function, dissipation profile and classification of oscillations.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::interp::{bracket, hermite};
use crate::ode::{integrate_ivp, CoefficientPair, GridSpec, InitialData, Trajectory};
use crate::quadrature::{cumulative_simpson, cumulative_trapezoid};

/// Relative floor below which `|v2^2 - v1^2|` counts as vanished.
pub const DENOMINATOR_FLOOR: f64 = 1e-10;

/// Relative floor (to `|omega(0)|`) below which the frequency counts as zero.
pub const OMEGA_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Branch {
    /// `omega` is real.
    Real,
    /// `omega = i * eps`; the stored samples are `eps`.
    Imaginary,
}

/// Sampled frequency function with its derivative and running phase.
#[derive(Debug, Clone, PartialEq)]
pub struct FrequencyFunction {
    branch: Branch,
    grid: Vec<f64>,
    omega: Vec<f64>,
    omega_prime: Vec<f64>,
    phase: Vec<f64>,
    horizon: f64,
}

impl FrequencyFunction {
    /// Builds from samples of `omega` and `omega'` on a strictly increasing grid starting at 0.
    ///
    /// The phase is accumulated with the corrected trapezoid rule
    /// `h/2 (w0 + w1) + h^2/12 (w0' - w1')`, which is the exact integral of
    /// the cubic Hermite interpolant used for evaluation between nodes.
    pub fn from_samples(
        branch: Branch,
        grid: Vec<f64>,
        omega: Vec<f64>,
        omega_prime: Vec<f64>,
        horizon: f64,
    ) -> Result<Self> {
        let n = grid.len();
        if n < 2 || omega.len() != n || omega_prime.len() != n {
            return Err(Error::InvalidInput("frequency samples: need >= 2 samples of equal length".into()));
        }
        if grid[0] != 0.0 || grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidInput("frequency grid must start at 0 and increase strictly".into()));
        }
        if !(omega[0] > 0.0) {
            return Err(Error::InvalidInput("omega(0) must be positive".into()));
        }
        let mut phase = vec![0.0; n];
        for i in 1..n {
            let h = grid[i] - grid[i - 1];
            phase[i] = phase[i - 1]
                + 0.5 * h * (omega[i - 1] + omega[i])
                + h * h / 12.0 * (omega_prime[i - 1] - omega_prime[i]);
        }
        Ok(Self { branch, grid, omega, omega_prime, phase, horizon })
    }

    pub fn branch(&self) -> Branch {
        self.branch
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn omega_samples(&self) -> &[f64] {
        &self.omega
    }

    pub fn omega_prime_samples(&self) -> &[f64] {
        &self.omega_prime
    }

    pub fn phase_samples(&self) -> &[f64] {
        &self.phase
    }

    pub fn omega0(&self) -> f64 {
        self.omega[0]
    }

    pub fn omega1(&self) -> f64 {
        self.omega_prime[0]
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    fn last(&self) -> f64 {
        self.grid[self.grid.len() - 1]
    }

    /// `omega` on the whole real line: even reflection for `t < 0`,
    /// frozen at the last sample beyond the stored grid.
    pub fn omega(&self, t: f64) -> f64 {
        let t = t.abs();
        if t >= self.last() {
            return self.omega[self.omega.len() - 1];
        }
        hermite(&self.grid, &self.omega, &self.omega_prime, t)
    }

    /// Derivative of the extended `omega` (odd for `t < 0`, zero beyond the grid).
    pub fn omega_prime(&self, t: f64) -> f64 {
        let s = t.abs();
        if s > self.last() {
            return 0.0;
        }
        let i = bracket(&self.grid, s);
        let w = (s - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        let d = (1.0 - w) * self.omega_prime[i] + w * self.omega_prime[i + 1];
        if t < 0.0 {
            -d
        } else {
            d
        }
    }

    /// Running phase `∫_0^t omega` on `[0, last grid time]`.
    pub fn phase(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.last());
        hermite(&self.grid, &self.phase, &self.omega, t)
    }

    /// Signed `omega^2` per sample (negative on the imaginary branch).
    pub fn omega_squared(&self) -> Vec<f64> {
        let sign = match self.branch {
            Branch::Real => 1.0,
            Branch::Imaginary => -1.0,
        };
        self.omega.iter().map(|w| sign * w * w).collect()
    }
}

/// Solutions `v1`, `v2` of the homogeneous equation with data
/// `(0, 1)` and `(1/w0, -(a(0)/2 + w1/(2 w0))/w0)`.
pub fn build_auxiliary_solutions(
    coeffs: &CoefficientPair,
    omega0: f64,
    omega1: f64,
    spec: &GridSpec,
) -> Result<(Trajectory, Trajectory)> {
    if !(omega0 > 0.0) || !omega0.is_finite() {
        return Err(Error::InvalidInput(format!("omega0 must be positive, got {omega0}")));
    }
    let a0 = coeffs.a(0.0);
    let d1 = InitialData::new(0.0, 1.0);
    let d2 = InitialData::new(1.0 / omega0, -(a0 / 2.0 + omega1 / (2.0 * omega0)) / omega0);
    let v1 = integrate_ivp(coeffs, None, d1, spec)?;
    let v2 = integrate_ivp(coeffs, None, d2, spec)?;
    Ok((v1, v2))
}

/// Frequency function from the auxiliary solutions.
///
/// The derivative uses `omega'/(2 omega) = alpha - a/2` with `alpha` taken
/// from the logarithmic derivative of the amplitude, so `a` is required.
pub fn frequency_from_aux(
    coeffs: &CoefficientPair,
    v1: &Trajectory,
    v2: &Trajectory,
    branch: Branch,
) -> Result<FrequencyFunction> {
    if v1.grid != v2.grid {
        return Err(Error::InvalidInput("auxiliary solutions must share a grid".into()));
    }
    let n = v1.len();
    let mut omega = Vec::with_capacity(n);
    let mut omega_prime = Vec::with_capacity(n);
    for i in 0..n {
        let t = v1.grid[i];
        let (x, dx, y, dy) = (v1.values[i], v1.derivatives[i], v2.values[i], v2.derivatives[i]);
        let sum = x * x + y * y;
        let (den, amp) = match branch {
            Branch::Real => (sum, x * dx + y * dy),
            Branch::Imaginary => (y * y - x * x, y * dy - x * dx),
        };
        let vanished = match branch {
            Branch::Real => !(sum > f64::MIN_POSITIVE),
            Branch::Imaginary => !(den > DENOMINATOR_FLOOR * sum),
        };
        if vanished || !den.is_finite() {
            return Err(Error::DenominatorVanished { t, value: den });
        }
        let w = (dx * y - x * dy) / den;
        let alpha = -amp / den;
        omega.push(w);
        omega_prime.push(2.0 * w * (alpha - coeffs.a(t) / 2.0));
    }
    FrequencyFunction::from_samples(branch, v1.grid.clone(), omega, omega_prime, coeffs.horizon())
}

/// `alpha = a/2 + omega'/(2 omega)`, its running integral and `rho = exp(-alpha~)`.
#[derive(Debug, Clone, PartialEq)]
pub struct DissipationProfile {
    grid: Vec<f64>,
    alpha: Vec<f64>,
    alpha_tilde: Vec<f64>,
    rho: Vec<f64>,
}

impl DissipationProfile {
    /// Builds from samples of `alpha`. The running integral uses a
    /// fourth-order cumulative Simpson rule on uniform grids and the
    /// trapezoid rule otherwise.
    pub fn from_alpha(grid: Vec<f64>, alpha: Vec<f64>) -> Result<Self> {
        if grid.len() < 2 || grid.len() != alpha.len() {
            return Err(Error::InvalidInput("dissipation samples: length mismatch".into()));
        }
        let alpha_tilde = match uniform_step(&grid) {
            Some(h) => cumulative_simpson(h, &alpha),
            None => cumulative_trapezoid(&grid, &alpha),
        };
        let rho = alpha_tilde.iter().map(|x| (-x).exp()).collect();
        Ok(Self { grid, alpha, alpha_tilde, rho })
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn alpha_samples(&self) -> &[f64] {
        &self.alpha
    }

    pub fn alpha_tilde_samples(&self) -> &[f64] {
        &self.alpha_tilde
    }

    pub fn rho_samples(&self) -> &[f64] {
        &self.rho
    }

    pub fn alpha0(&self) -> f64 {
        self.alpha[0]
    }

    pub fn alpha(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.grid[self.grid.len() - 1]);
        let i = bracket(&self.grid, t);
        let w = (t - self.grid[i]) / (self.grid[i + 1] - self.grid[i]);
        (1.0 - w) * self.alpha[i] + w * self.alpha[i + 1]
    }

    pub fn alpha_tilde(&self, t: f64) -> f64 {
        let t = t.clamp(0.0, self.grid[self.grid.len() - 1]);
        hermite(&self.grid, &self.alpha_tilde, &self.alpha, t)
    }

    /// Relaxation `exp(-alpha~(t)) H(t)`.
    pub fn rho(&self, t: f64) -> f64 {
        if t < 0.0 {
            0.0
        } else {
            (-self.alpha_tilde(t)).exp()
        }
    }
}

pub(crate) fn uniform_step(grid: &[f64]) -> Option<f64> {
    let n = grid.len();
    if n < 3 {
        return None;
    }
    let h = (grid[n - 1] - grid[0]) / (n - 1) as f64;
    let uniform = grid.windows(2).all(|w| ((w[1] - w[0]) - h).abs() <= 1e-9 * h);
    uniform.then_some(h)
}

pub fn dissipation_profile(coeffs: &CoefficientPair, freq: &FrequencyFunction) -> Result<DissipationProfile> {
    let w0 = freq.omega0().abs();
    let mut alpha = Vec::with_capacity(freq.grid.len());
    for (i, &t) in freq.grid.iter().enumerate() {
        let w = freq.omega[i];
        if w.abs() < OMEGA_FLOOR * w0 {
            return Err(Error::OmegaNearZero { t, value: w.abs() });
        }
        alpha.push(coeffs.a(t) / 2.0 + freq.omega_prime[i] / (2.0 * w));
    }
    DissipationProfile::from_alpha(freq.grid.clone(), alpha)
}

/// Pointwise defect of the integral identity defining the frequency function.
#[derive(Debug, Clone, PartialEq)]
pub struct Residual {
    pub max_abs: f64,
    pub grid: Vec<f64>,
    pub profile: Vec<f64>,
}

/// Evaluates both sides of
/// `∫ w^2 = ∫ [b - a^2/4 + (w'/2w)^2] - a/2 + a(0)/2 - (w'/2w) + (w'/2w)(0)`
/// on `grid` with the same cumulative rule and returns their difference.
pub fn defomega_residual(coeffs: &CoefficientPair, freq: &FrequencyFunction, grid: &[f64]) -> Result<Residual> {
    if grid.len() < 2 || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("residual grid must be strictly increasing".into()));
    }
    let sign = match freq.branch {
        Branch::Real => 1.0,
        Branch::Imaginary => -1.0,
    };
    let n = grid.len();
    let mut integrand = Vec::with_capacity(n);
    let mut boundary = Vec::with_capacity(n);
    for &t in grid {
        let (a, b) = (coeffs.a(t), coeffs.b(t));
        let w = freq.omega(t);
        let q = freq.omega_prime(t) / (2.0 * w);
        integrand.push(sign * w * w - (b - a * a / 4.0 + q * q));
        boundary.push(a / 2.0 + q);
    }
    let cum = match uniform_step(grid) {
        Some(h) => cumulative_simpson(h, &integrand),
        None => cumulative_trapezoid(grid, &integrand),
    };
    let profile: Vec<f64> = (0..n).map(|i| cum[i] + boundary[i] - boundary[0]).collect();
    let max_abs = profile.iter().fold(0.0f64, |m, r| m.max(r.abs()));
    Ok(Residual { max_abs, grid: grid.to_vec(), profile })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum OscillationKind {
    WeaklyDissipative,
    AperiodicLimit,
    Creeping,
    Mixed,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interval {
    pub t0: f64,
    pub t1: f64,
    pub kind: OscillationKind,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Classification {
    pub kind: OscillationKind,
    pub intervals: Vec<Interval>,
    pub tol_zero: f64,
}

impl Classification {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("classification serializes")
    }
}

/// Default dead band for `omega^2 = 0`.
pub fn default_tol_zero(omega0: f64) -> f64 {
    1e-9 * omega0 * omega0
}

pub fn classify(freq: &FrequencyFunction, tol_zero: f64) -> Result<Classification> {
    classify_omega_squared(&freq.grid, &freq.omega_squared(), tol_zero)
}

/// Classifies by the sign of sampled `omega^2`, with `|omega^2| <= tol_zero`
/// mapped to the aperiodic limit. Runs of equal local kind become intervals;
/// each interval ends where the next begins.
pub fn classify_omega_squared(grid: &[f64], omega_sq: &[f64], tol_zero: f64) -> Result<Classification> {
    if !(tol_zero > 0.0) {
        return Err(Error::InvalidInput("tol_zero must be positive".into()));
    }
    if grid.is_empty() || grid.len() != omega_sq.len() {
        return Err(Error::InvalidInput("classification samples: length mismatch".into()));
    }
    let local = |w2: f64| {
        if w2 > tol_zero {
            OscillationKind::WeaklyDissipative
        } else if w2 < -tol_zero {
            OscillationKind::Creeping
        } else {
            OscillationKind::AperiodicLimit
        }
    };
    let mut intervals: Vec<Interval> = Vec::new();
    for (i, (&t, &w2)) in grid.iter().zip(omega_sq).enumerate() {
        let k = local(w2);
        match intervals.last_mut() {
            Some(last) if last.kind == k => last.t1 = t,
            Some(last) => {
                last.t1 = t;
                intervals.push(Interval { t0: t, t1: t, kind: k });
            }
            None => intervals.push(Interval { t0: t, t1: t, kind: k }),
        }
        if i == grid.len() - 1 {
            intervals.last_mut().unwrap().t1 = t;
        }
    }
    let kind = if intervals.len() == 1 { intervals[0].kind } else { OscillationKind::Mixed };
    Ok(Classification { kind, intervals, tol_zero })
}
