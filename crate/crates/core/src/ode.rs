//! Initial-value integration of `v'' + a(t) v' + b(t) v = f0(t)`.
//!
//! The main integrator is an adaptive Dormand-Prince 5(4) pair that lands
//! exactly on every requested output time. A fixed-step classical RK4
//! integrator is kept alongside it as an independent reference.

use std::fmt;
use std::io::Write;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::export;
use crate::interp::Pchip;

/// Shared scalar function of time.
pub type ScalarFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// Default guard distance from the horizon, as a fraction of the horizon.
pub const DEFAULT_GUARD_FRACTION: f64 = 1e-6;

/// Coefficient magnitudes above this are reported as a blow-up.
pub const COEFFICIENT_OVERFLOW: f64 = 1e150;

const MAX_STEPS: usize = 20_000_000;

/// Time-dependent coefficients `a(t)`, `b(t)` on `[0, T)`.
#[derive(Clone)]
pub struct CoefficientPair {
    a: ScalarFn,
    b: ScalarFn,
    horizon: f64,
    guard: f64,
    singular_at_horizon: bool,
}

impl fmt::Debug for CoefficientPair {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("CoefficientPair")
            .field("horizon", &self.horizon)
            .field("guard", &self.guard)
            .field("singular_at_horizon", &self.singular_at_horizon)
            .finish_non_exhaustive()
    }
}

impl CoefficientPair {
    /// Coefficients given as callables on `[0, horizon)`; `horizon` may be infinite.
    pub fn new<A, B>(a: A, b: B, horizon: f64) -> Result<Self>
    where
        A: Fn(f64) -> f64 + Send + Sync + 'static,
        B: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(horizon > 0.0) {
            return Err(Error::InvalidInput(format!("horizon must be positive, got {horizon}")));
        }
        let guard = if horizon.is_finite() { DEFAULT_GUARD_FRACTION * horizon } else { 0.0 };
        Ok(Self { a: Arc::new(a), b: Arc::new(b), horizon, guard, singular_at_horizon: false })
    }

    /// Constant coefficients on `[0, ∞)`.
    pub fn constant(a0: f64, b0: f64) -> Self {
        Self::new(move |_| a0, move |_| b0, f64::INFINITY).expect("infinite horizon is valid")
    }

    /// Tabulated coefficients, wrapped with monotone cubic interpolation.
    /// The horizon is the last tabulated time.
    pub fn from_samples(ts: &[f64], a: &[f64], b: &[f64]) -> Result<Self> {
        let pa = Pchip::new(ts.to_vec(), a.to_vec())
            .ok_or_else(|| Error::InvalidInput("coefficient table: need >= 2 strictly increasing times".into()))?;
        let pb = Pchip::new(ts.to_vec(), b.to_vec())
            .ok_or_else(|| Error::InvalidInput("coefficient table: need >= 2 strictly increasing times".into()))?;
        if ts[0] > 0.0 {
            return Err(Error::InvalidInput("coefficient table must start at t = 0".into()));
        }
        let horizon = ts[ts.len() - 1];
        let mut pair = Self::new(move |t| pa.eval(t), move |t| pb.eval(t), horizon)?;
        // the table is valid up to and including its last node
        pair.guard = 0.0;
        Ok(pair)
    }

    pub fn with_guard(mut self, guard: f64) -> Self {
        self.guard = guard.max(0.0);
        self
    }

    /// Sets the guard to `fraction * horizon` (no-op for an infinite horizon).
    pub fn with_guard_fraction(mut self, fraction: f64) -> Self {
        if self.horizon.is_finite() {
            self.guard = fraction.max(0.0) * self.horizon;
        }
        self
    }

    pub fn singular_at_horizon(mut self, flag: bool) -> Self {
        self.singular_at_horizon = flag;
        self
    }

    #[inline]
    pub fn a(&self, t: f64) -> f64 {
        (self.a)(t)
    }

    #[inline]
    pub fn b(&self, t: f64) -> f64 {
        (self.b)(t)
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    pub fn guard(&self) -> f64 {
        self.guard
    }

    pub fn is_singular_at_horizon(&self) -> bool {
        self.singular_at_horizon
    }

    /// Largest time at which coefficients may be evaluated.
    pub fn limit(&self) -> f64 {
        self.horizon - self.guard
    }

    fn checked(&self, t: f64) -> Result<(f64, f64)> {
        let (a, b) = (self.a(t), self.b(t));
        if !a.is_finite() || !b.is_finite() || a.abs() > COEFFICIENT_OVERFLOW || b.abs() > COEFFICIENT_OVERFLOW {
            return Err(Error::CoefficientBlowup { t, a: a.abs(), b: b.abs() });
        }
        Ok((a, b))
    }
}

/// Initial elongation and velocity.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialData {
    pub phi: f64,
    pub psi: f64,
}

impl InitialData {
    pub fn new(phi: f64, psi: f64) -> Self {
        Self { phi, psi }
    }
}

/// Source term with support in `(support_start, T)`.
#[derive(Clone)]
pub struct Forcing {
    f: ScalarFn,
    support_start: f64,
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Forcing").field("support_start", &self.support_start).finish_non_exhaustive()
    }
}

impl Forcing {
    pub fn new<F>(f: F, support_start: f64) -> Result<Self>
    where
        F: Fn(f64) -> f64 + Send + Sync + 'static,
    {
        if !(support_start > 0.0) {
            return Err(Error::InvalidInput("forcing support must start at t > 0".into()));
        }
        Ok(Self { f: Arc::new(f), support_start })
    }

    /// Smooth `C^∞` bump of height `amplitude` supported in `(t0, t1)`.
    pub fn bump(t0: f64, t1: f64, amplitude: f64) -> Result<Self> {
        if !(t1 > t0) {
            return Err(Error::InvalidInput("bump needs t1 > t0".into()));
        }
        let mid = 0.5 * (t0 + t1);
        let half = 0.5 * (t1 - t0);
        Self::new(
            move |t| {
                let x = (t - mid) / half;
                if x.abs() >= 1.0 {
                    0.0
                } else {
                    amplitude * (1.0 - 1.0 / (1.0 - x * x)).exp()
                }
            },
            t0,
        )
    }

    /// Forcing value, clamped to zero for `t <= support_start`.
    #[inline]
    pub fn eval(&self, t: f64) -> f64 {
        if t <= self.support_start {
            0.0
        } else {
            (self.f)(t)
        }
    }

    pub fn support_start(&self) -> f64 {
        self.support_start
    }
}

/// Output grid and error tolerances for the adaptive integrator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub t_end: f64,
    pub points: usize,
    pub rtol: f64,
    pub atol: f64,
}

impl GridSpec {
    /// Uniform grid of `points` samples on `[0, t_end]`; the absolute
    /// tolerance is set six orders below the relative one.
    pub fn new(t_end: f64, points: usize, tolerance: f64) -> Self {
        Self { t_end, points, rtol: tolerance, atol: tolerance * 1e-6 }
    }

    pub fn grid(&self) -> Vec<f64> {
        uniform_grid(self.t_end, self.points)
    }
}

pub fn uniform_grid(t_end: f64, points: usize) -> Vec<f64> {
    let n = points.max(2);
    let h = t_end / (n - 1) as f64;
    (0..n).map(|i| if i == n - 1 { t_end } else { i as f64 * h }).collect()
}

/// Sampled solution `(t, v, v')`.
#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub grid: Vec<f64>,
    pub values: Vec<f64>,
    pub derivatives: Vec<f64>,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// CSV with header `t,v,dv`.
    pub fn write_csv<W: Write>(&self, w: W) -> std::io::Result<()> {
        export::write_csv(w, &["t", "v", "dv"], &[&self.grid, &self.values, &self.derivatives])
    }
}

fn validate(coeffs: &CoefficientPair, init: &InitialData, grid: &[f64]) -> Result<()> {
    if grid.len() < 2 {
        return Err(Error::InvalidInput("output grid needs at least two samples".into()));
    }
    if grid[0] != 0.0 {
        return Err(Error::InvalidInput("output grid must start at t = 0".into()));
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidInput("output grid must be strictly increasing".into()));
    }
    if !init.phi.is_finite() || !init.psi.is_finite() {
        return Err(Error::InvalidInput("initial data must be finite".into()));
    }
    let t_end = grid[grid.len() - 1];
    if t_end >= coeffs.horizon() || t_end > coeffs.limit() {
        return Err(Error::HorizonExceeded { t_end, limit: coeffs.limit(), horizon: coeffs.horizon() });
    }
    Ok(())
}

#[inline]
fn rhs(coeffs: &CoefficientPair, forcing: Option<&Forcing>, t: f64, y: [f64; 2]) -> Result<[f64; 2]> {
    let (a, b) = coeffs.checked(t)?;
    let f = forcing.map_or(0.0, |f| f.eval(t));
    Ok([y[1], f - a * y[1] - b * y[0]])
}

/// Adaptive integration on the uniform grid described by `spec`.
pub fn integrate_ivp(
    coeffs: &CoefficientPair,
    forcing: Option<&Forcing>,
    init: InitialData,
    spec: &GridSpec,
) -> Result<Trajectory> {
    if !(spec.rtol > 0.0) {
        return Err(Error::InvalidInput("tolerance must be positive".into()));
    }
    integrate_on_grid(coeffs, forcing, init, &spec.grid(), spec.rtol, spec.atol)
}

// Dormand-Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
const B5: [f64; 7] = [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0, 0.0];
const B4: [f64; 7] =
    [5179.0 / 57600.0, 0.0, 7571.0 / 16695.0, 393.0 / 640.0, -92097.0 / 339200.0, 187.0 / 2100.0, 1.0 / 40.0];

/// Adaptive Dormand-Prince integration landing on every node of `grid`.
pub fn integrate_on_grid(
    coeffs: &CoefficientPair,
    forcing: Option<&Forcing>,
    init: InitialData,
    grid: &[f64],
    rtol: f64,
    atol: f64,
) -> Result<Trajectory> {
    validate(coeffs, &init, grid)?;
    let n = grid.len();
    let mut values = Vec::with_capacity(n);
    let mut derivatives = Vec::with_capacity(n);
    values.push(init.phi);
    derivatives.push(init.psi);

    let mut t = 0.0;
    let mut y = [init.phi, init.psi];
    let mut k1 = rhs(coeffs, forcing, t, y)?;
    let mut h = (grid[1] - grid[0]).min(1e-3 * grid[n - 1].max(1e-3));
    let mut steps = 0usize;

    for &target in &grid[1..] {
        while t < target {
            steps += 1;
            if steps > MAX_STEPS {
                return Err(Error::StepSizeUnderflow { t, h });
            }
            let remaining = target - t;
            let landing = h >= remaining * (1.0 - 1e-12);
            let step = if landing { remaining } else { h };

            let mut k = [[0.0; 2]; 7];
            k[0] = k1;
            for s in 1..7 {
                let mut ys = y;
                for (j, kj) in k.iter().enumerate().take(s) {
                    ys[0] += step * A[s][j] * kj[0];
                    ys[1] += step * A[s][j] * kj[1];
                }
                k[s] = rhs(coeffs, forcing, t + C[s] * step, ys)?;
            }
            let mut y5 = y;
            let mut e = [0.0; 2];
            for s in 0..7 {
                for d in 0..2 {
                    y5[d] += step * B5[s] * k[s][d];
                    e[d] += step * (B5[s] - B4[s]) * k[s][d];
                }
            }
            let err = (0..2)
                .map(|d| {
                    let sc = atol + rtol * y[d].abs().max(y5[d].abs());
                    (e[d] / sc).powi(2)
                })
                .sum::<f64>()
                .mul_add(0.5, 0.0)
                .sqrt();

            if err <= 1.0 {
                t = if landing { target } else { t + step };
                y = y5;
                k1 = k[6];
                let fac = if err == 0.0 { 5.0 } else { (0.9 * err.powf(-0.2)).clamp(0.2, 5.0) };
                let proposal = step * fac;
                h = if landing { h.max(proposal) } else { proposal };
            } else {
                h = step * (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
                if h < 1e-14 * (1.0 + t.abs()) {
                    return Err(Error::StepSizeUnderflow { t, h });
                }
            }
        }
        values.push(y[0]);
        derivatives.push(y[1]);
    }
    Ok(Trajectory { grid: grid.to_vec(), values, derivatives })
}

/// Fixed-step classical RK4 with `substeps` equal steps per output interval.
pub fn integrate_rk4(
    coeffs: &CoefficientPair,
    forcing: Option<&Forcing>,
    init: InitialData,
    grid: &[f64],
    substeps: usize,
) -> Result<Trajectory> {
    validate(coeffs, &init, grid)?;
    let substeps = substeps.max(1);
    let mut values = vec![init.phi];
    let mut derivatives = vec![init.psi];
    let mut y = [init.phi, init.psi];
    for w in grid.windows(2) {
        let h = (w[1] - w[0]) / substeps as f64;
        for s in 0..substeps {
            let t = w[0] + s as f64 * h;
            let k1 = rhs(coeffs, forcing, t, y)?;
            let k2 = rhs(coeffs, forcing, t + 0.5 * h, [y[0] + 0.5 * h * k1[0], y[1] + 0.5 * h * k1[1]])?;
            let k3 = rhs(coeffs, forcing, t + 0.5 * h, [y[0] + 0.5 * h * k2[0], y[1] + 0.5 * h * k2[1]])?;
            let k4 = rhs(coeffs, forcing, t + h, [y[0] + h * k3[0], y[1] + h * k3[1]])?;
            for d in 0..2 {
                y[d] += h / 6.0 * (k1[d] + 2.0 * k2[d] + 2.0 * k3[d] + k4[d]);
            }
        }
        values.push(y[0]);
        derivatives.push(y[1]);
    }
    Ok(Trajectory { grid: grid.to_vec(), values, derivatives })
}

/// Wronskian `v1' v2 - v1 v2'` of two trajectories on the same grid.
pub fn wronskian(v1: &Trajectory, v2: &Trajectory) -> Vec<f64> {
    (0..v1.len()).map(|i| v1.derivatives[i] * v2.values[i] - v1.values[i] * v2.derivatives[i]).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn zero_coefficients_give_a_straight_line() {
        let c = CoefficientPair::constant(0.0, 0.0);
        let tr = integrate_ivp(&c, None, InitialData::new(1.0, 2.0), &GridSpec::new(3.0, 31, 1e-10)).unwrap();
        for (t, v) in tr.grid.iter().zip(&tr.values) {
            assert!((v - (1.0 + 2.0 * t)).abs() < 1e-10);
        }
    }

    #[test]
    fn harmonic_oscillator_quarter_period() {
        let c = CoefficientPair::constant(0.0, (2.0 * PI).powi(2));
        let tr = integrate_ivp(&c, None, InitialData::new(1.0, 0.0), &GridSpec::new(1.0, 5, 1e-11)).unwrap();
        assert!((tr.grid[1] - 0.25).abs() < 1e-15);
        assert!(tr.values[1].abs() < 1e-8);
        assert!((tr.values[4] - 1.0).abs() < 1e-8);
    }

    #[test]
    fn horizon_is_guarded() {
        let c = CoefficientPair::new(|t| 1.0 / (10.0 - t), |_| 1.0, 10.0).unwrap();
        let err = integrate_ivp(&c, None, InitialData::new(1.0, 0.0), &GridSpec::new(10.0, 11, 1e-8)).unwrap_err();
        assert!(matches!(err, Error::HorizonExceeded { .. }));
        let err = integrate_ivp(&c, None, InitialData::new(1.0, 0.0), &GridSpec::new(10.0 - 1e-7, 11, 1e-8));
        assert!(matches!(err, Err(Error::HorizonExceeded { .. })));
    }

    #[test]
    fn blowup_inside_window_is_reported() {
        let c = CoefficientPair::new(|t| if t > 0.5 { f64::INFINITY } else { 0.0 }, |_| 1.0, 2.0).unwrap();
        let err = integrate_ivp(&c, None, InitialData::new(1.0, 0.0), &GridSpec::new(1.0, 11, 1e-8)).unwrap_err();
        assert!(matches!(err, Error::CoefficientBlowup { .. }));
    }

    #[test]
    fn forcing_is_clamped_before_support() {
        let f = Forcing::new(|_| 1.0, 0.5).unwrap();
        assert_eq!(f.eval(0.5), 0.0);
        assert_eq!(f.eval(0.25), 0.0);
        assert_eq!(f.eval(0.75), 1.0);
        assert!(Forcing::new(|_| 1.0, 0.0).is_err());
    }

    #[test]
    fn tabulated_coefficients_are_interpolated() {
        let ts: Vec<f64> = (0..=20).map(|i| i as f64 * 0.1).collect();
        let a: Vec<f64> = ts.iter().map(|_| 0.2).collect();
        let b: Vec<f64> = ts.iter().map(|_| 4.0).collect();
        let tab = CoefficientPair::from_samples(&ts, &a, &b).unwrap();
        let exact = CoefficientPair::constant(0.2, 4.0);
        let spec = GridSpec::new(1.9, 20, 1e-10);
        let x = integrate_ivp(&tab, None, InitialData::new(1.0, 0.0), &spec).unwrap();
        let y = integrate_ivp(&exact, None, InitialData::new(1.0, 0.0), &spec).unwrap();
        for (p, q) in x.values.iter().zip(&y.values) {
            assert!((p - q).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_reference_is_fourth_order() {
        // v = e^{-t/2} cos(2t) solves v'' + v' + (4 + 1/4) v = 0
        let c = CoefficientPair::constant(1.0, 4.25);
        let exact = |t: f64| (-0.5 * t).exp() * (2.0 * t).cos();
        let grid = uniform_grid(4.0, 41);
        let err = |sub: usize| {
            let tr = integrate_rk4(&c, None, InitialData::new(1.0, -0.5), &grid, sub).unwrap();
            tr.grid.iter().zip(&tr.values).map(|(t, v)| (v - exact(*t)).abs()).fold(0.0, f64::max)
        };
        let (e1, e2) = (err(2), err(4));
        assert!(e1 / e2 >= 8.0, "ratio {}", e1 / e2);
    }

    #[test]
    fn abel_identity_holds_for_smooth_coefficients() {
        let c = CoefficientPair::new(|t| 0.3 + 0.2 * t.sin(), |t| 5.0 + t, f64::INFINITY).unwrap();
        let spec = GridSpec::new(5.0, 101, 1e-11);
        let v1 = integrate_ivp(&c, None, InitialData::new(0.0, 1.0), &spec).unwrap();
        let v2 = integrate_ivp(&c, None, InitialData::new(1.0, 0.0), &spec).unwrap();
        let w = wronskian(&v1, &v2);
        for (t, wi) in spec.grid().iter().zip(&w) {
            // ∫ a = 0.3 t + 0.2 (1 - cos t)
            let expected = w[0] * (-(0.3 * t + 0.2 * (1.0 - t.cos()))).exp();
            assert!(((wi - expected) / expected).abs() < 1e-6);
        }
    }
}
