use std::f64::consts::PI;
use std::fs::File;
use std::io::BufWriter;

use dissipative_osc::export::write_csv;
use dissipative_osc::frequency::{
    classify as classify_freq, classify_omega_squared, default_tol_zero, defomega_residual, Branch, Classification,
    OscillationKind,
};
use dissipative_osc::models::ModelFamily;
use dissipative_osc::ode::{uniform_grid, CoefficientPair, Forcing, GridSpec, InitialData};
use dissipative_osc::params::Config;
use dissipative_osc::representation::{cross_validate, ValidationOptions};
use dissipative_osc::waves::field::write_field_csv;
use dissipative_osc::waves::{
    dissipation_from_kernel, field_snapshot, kernel_at_distance, modulated_gamma_kernel, sampled_gamma_seed,
    truncated_relaxation, verify_semigroup, verify_support, DissipationLaw, KernelFamily, Relaxation, SampledKernel,
};
use serde_json::{json, Value};

use crate::{CliError, Run};

type Outcome = Result<bool, CliError>;

fn create(run: &Run, name: &str) -> Result<BufWriter<File>, CliError> {
    Ok(BufWriter::new(File::create(run.out.join(name))?))
}

fn write_json(run: &Run, name: &str, value: &Value) -> Result<(), CliError> {
    let text = serde_json::to_string_pretty(value).expect("report serializes");
    std::fs::write(run.out.join(name), format!("{text}\n"))?;
    if run.json {
        println!("{text}");
    }
    Ok(())
}

fn points(cfg: &Config, default: u32) -> Result<usize, CliError> {
    let n = cfg.u32_or("points", default)? as usize;
    if n < 16 {
        return Err(CliError::Input(format!("points must be at least 16, got {n}")));
    }
    Ok(n)
}

fn positive(cfg: &Config, key: &str, default: f64) -> Result<f64, CliError> {
    let x = cfg.f64_or(key, default)?;
    if !(x > 0.0) {
        return Err(CliError::Input(format!("{key} must be positive, got {x}")));
    }
    Ok(x)
}

fn default_end(horizon: f64) -> f64 {
    if horizon.is_finite() {
        0.99 * horizon
    } else {
        10.0
    }
}

/// Coefficients and validation options for the configured model. Constant
/// coefficients bypass the family so that `omega0 = 0` configs stay valid.
fn model_setup(cfg: &Config) -> Result<(String, CoefficientPair, ValidationOptions), CliError> {
    let name = cfg.str_or("name", "constant");
    if name == "constant" {
        let a0 = cfg.f64_or("a0", 0.0)?;
        let b0 = cfg.f64_or("b0", 0.0)?;
        let branch = if b0 - a0 * a0 / 4.0 >= 0.0 { Branch::Real } else { Branch::Imaginary };
        let opts = ValidationOptions { branch, ..Default::default() };
        return Ok((name, CoefficientPair::constant(a0, b0), opts));
    }
    let fam = ModelFamily::from_config(cfg)?;
    let opts = ValidationOptions {
        omega0: Some(fam.omega0()),
        omega1: fam.omega1(),
        branch: fam.branch,
        ..Default::default()
    };
    Ok((fam.name().to_string(), fam.coefficients().clone(), opts))
}

pub fn solve(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    let (name, mut coeffs, opts) = model_setup(cfg)?;
    if let Some(f) = run.guard_fraction {
        coeffs = coeffs.with_guard_fraction(f);
    }
    let init = InitialData::new(cfg.f64_or("phi", 1.0)?, cfg.f64_or("psi", 0.0)?);
    let t_end = positive(cfg, "t_end", default_end(coeffs.horizon()))?;
    let spec = GridSpec::new(t_end, points(cfg, 10_000)?, positive(cfg, "tol", 1e-10)?);
    let forcing = match cfg.f64_opt("forcing_t0")? {
        Some(t0) => Some(Forcing::bump(t0, cfg.f64_req("forcing_t1")?, cfg.f64_or("forcing_amplitude", 1.0)?)?),
        None => None,
    };
    let bound = positive(cfg, "max_rel_err", 1e-4)?;
    let report = cross_validate(&coeffs, init, forcing.as_ref(), &spec, &opts)?;
    report.write_csv(create(run, "solution.csv")?)?;
    let pass = report.max_rel_err() <= bound;
    let value = json!({
        "model": name,
        "t_end": t_end,
        "points": report.summary.grid_size,
        "max_abs_err": report.max_abs_err(),
        "max_rel_err": report.max_rel_err(),
        "bound": bound,
        "pass": pass,
    });
    write_json(run, "solve.json", &value)?;
    if !run.json {
        println!("{name}: max_rel_err {:.3e} (bound {bound:e}) {}", report.max_rel_err(), verdict(pass));
    }
    Ok(pass)
}

fn verdict(pass: bool) -> &'static str {
    if pass {
        "PASS"
    } else {
        "FAIL"
    }
}

fn classification(cfg: &Config) -> Result<Classification, CliError> {
    let name = cfg.str_or("name", "constant");
    if name == "omega_squared_linear" {
        // omega^2 = 1 - t on [0, 2)
        let grid = uniform_grid(positive(cfg, "t_end", 1.999)?, points(cfg, 2_000)?);
        let w2: Vec<f64> = grid.iter().map(|t| 1.0 - t).collect();
        return Ok(classify_omega_squared(&grid, &w2, positive(cfg, "tol_zero", 1e-9)?)?);
    }
    let fam = ModelFamily::from_config(cfg)?;
    let grid = uniform_grid(positive(cfg, "t_end", default_end(fam.horizon()))?, points(cfg, 2_000)?);
    let freq = fam.frequency_function(&grid)?;
    Ok(classify_freq(&freq, positive(cfg, "tol_zero", default_tol_zero(fam.omega0()))?)?)
}

pub fn classify(run: &Run) -> Outcome {
    let c = classification(&run.cfg)?;
    let value = serde_json::to_value(&c).expect("classification serializes");
    write_json(run, "classification.json", &value)?;
    if !run.json {
        println!("{:?}", c.kind);
        for i in &c.intervals {
            println!("  [{:.6}, {:.6}] {:?}", i.t0, i.t1, i.kind);
        }
    }
    Ok(true)
}

/// Seed kernel, its law and the analytic family when one exists.
struct Seeded {
    family: String,
    law: DissipationLaw,
    analytic: Option<KernelFamily>,
    support_end: f64,
}

fn seeded(cfg: &Config, rs: &[f64]) -> Result<Seeded, CliError> {
    let family = cfg.str_or("family", "gamma");
    let tau = positive(cfg, "tau", 1.0)?;
    let n_for = |dt: f64, window: f64| (window / dt).round() as usize;
    let (seed, analytic, support_end) = match family.as_str() {
        "gamma" => {
            let dt = positive(cfg, "dt", tau / 100.0)?;
            let n = n_for(dt, positive(cfg, "window", 50.0 * tau)?);
            (sampled_gamma_seed(tau, dt, n), Some(KernelFamily::Gamma { tau }), f64::INFINITY)
        }
        "modulated" => {
            let omega0 = cfg.f64_req("omega0")?;
            let dt = positive(cfg, "dt", tau / 100.0)?;
            let n = n_for(dt, positive(cfg, "window", 50.0 * tau)?);
            let seed = SampledKernel::from_fn(dt, n, f64::INFINITY, |t| modulated_gamma_kernel(tau, omega0, 1.0, t));
            (seed, Some(KernelFamily::ModulatedGamma { tau0: tau, omega0 }), f64::INFINITY)
        }
        "truncated" => {
            let t_stop = positive(cfg, "T", 1.0)?;
            let k = cfg.u32_or("k", 0)? as usize;
            let dt = positive(cfg, "dt", t_stop / 100.0)?;
            let r_max = rs.iter().cloned().fold(1.0, f64::max);
            let n = n_for(dt, positive(cfg, "window", 1.5 * r_max * t_stop + t_stop)?);
            (truncated_relaxation(&Relaxation::Exponential { tau }, t_stop, k, dt, n)?, None, t_stop)
        }
        other => return Err(CliError::Input(format!("unknown kernel family '{other}'"))),
    };
    let law = dissipation_from_kernel(&seed)?;
    Ok(Seeded { family, law, analytic, support_end })
}

fn default_rs(cfg: &Config) -> Vec<f64> {
    match cfg.str_or("family", "gamma").as_str() {
        "truncated" => vec![1.0, 3.0, 5.0, 7.0],
        _ => vec![0.2, 0.4, 0.6, 0.8],
    }
}

fn analytic_rel_err(fam: &KernelFamily, k: &SampledKernel, r: f64) -> Option<f64> {
    if r == 0.0 {
        return None;
    }
    // skip the integrable pole at the origin
    let start = if r < 1.0 { 10 } else { 0 };
    let (mut err, mut peak) = (0.0f64, 0.0f64);
    for (i, &v) in k.samples.iter().enumerate().skip(start) {
        let exact = fam.analytic(r, i as f64 * k.dt)?;
        peak = peak.max(exact.abs());
        err = err.max((v - exact).abs());
    }
    Some(err / peak)
}

pub fn kernel(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    let rs = cfg.f64_list("R")?.unwrap_or_else(|| default_rs(cfg));
    if rs.iter().any(|r| !(*r >= 0.0)) {
        return Err(CliError::Input("R values must be non-negative".into()));
    }
    let s = seeded(cfg, &rs)?;
    let floor = positive(cfg, "floor", 1e-6)?;
    let kernels: Vec<SampledKernel> = rs.iter().map(|&r| kernel_at_distance(&s.law, r)).collect::<Result<_, _>>()?;

    let times = kernels[0].times();
    let mut header = vec!["t".to_string()];
    header.extend(rs.iter().map(|r| format!("K_{r}")));
    let header_refs: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut columns: Vec<&[f64]> = vec![&times];
    columns.extend(kernels.iter().map(|k| k.samples.as_slice()));
    write_csv(create(run, "kernels.csv")?, &header_refs, &columns)?;
    s.law.write_csv(create(run, "law.csv")?)?;

    let rows: Vec<Value> = rs
        .iter()
        .zip(&kernels)
        .map(|(&r, k)| {
            let support = verify_support(k, r, s.support_end, floor);
            json!({
                "R": r,
                "peak": k.peak(),
                "l1_norm": k.l1_norm(),
                "nyquist_decay": s.law.nyquist_decay(r),
                "support": support,
                "analytic_rel_err": s.analytic.as_ref().and_then(|f| analytic_rel_err(f, k, r)),
            })
        })
        .collect();

    let pair = cfg.f64_list("semigroup")?.unwrap_or_else(|| vec![1.0, 2.0]);
    if pair.len() != 2 {
        return Err(CliError::Input("semigroup takes two distances R1, R2".into()));
    }
    let semi_tol = positive(cfg, "semigroup_tol", 1e-4)?;
    let semi = verify_semigroup(&KernelFamily::Synthesized(s.law.clone()), pair[0], pair[1], 0.0, 0)?;
    let pass = semi.max_abs_defect <= semi_tol;
    let value = json!({
        "family": s.family,
        "dt": s.law.dt(),
        "samples": s.law.len(),
        "kernels": rows,
        "semigroup": { "R1": pair[0], "R2": pair[1], "defect": semi.max_abs_defect, "tol": semi_tol, "pass": pass },
    });
    write_json(run, "kernel.json", &value)?;
    if !run.json {
        for (r, k) in rs.iter().zip(&kernels) {
            println!("R = {r}: peak {:.6e}", k.peak());
        }
        println!(
            "semigroup ({}, {}): defect {:.3e} (tol {semi_tol:e}) {}",
            pair[0],
            pair[1],
            semi.max_abs_defect,
            verdict(pass)
        );
    }
    Ok(pass)
}

pub fn field(run: &Run) -> Outcome {
    let cfg = &run.cfg;
    let radii = cfg.f64_list("radii")?.unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let c0 = positive(cfg, "c0", 1481.0)?;
    let stride = cfg.u32_or("stride", 1)?.max(1) as usize;
    let s = seeded(cfg, &radii)?;
    let dt = s.law.dt();
    let n = s.law.len();
    let fam = KernelFamily::Synthesized(s.law.clone());
    let lead = 10usize;

    let mut samples = Vec::new();
    let mut table = Vec::new();
    let mut pass = true;
    for &r in &radii {
        let front = r / c0;
        let times: Vec<f64> = (0..n + lead).step_by(stride).map(|i| front + (i as f64 - lead as f64) * dt).collect();
        let snap = field_snapshot(&fam, c0, &[r], &times)?;
        let quiet = snap.iter().filter(|p| p.t < front).all(|p| p.g == 0.0);
        let peak_g = snap.iter().map(|p| p.g.abs()).fold(0.0, f64::max);
        let peak_k = kernel_at_distance(&s.law, r)?.peak();
        let rel = (peak_g * 4.0 * PI * r - peak_k).abs() / peak_k;
        pass &= quiet && (stride > 1 || rel <= 1e-6);
        table.push(json!({
            "r": r,
            "front": front,
            "quiet_before_front": quiet,
            "peak_G": peak_g,
            "peak_G_times_4_pi_r": peak_g * 4.0 * PI * r,
            "peak_K": peak_k,
            "rel_diff": rel,
        }));
        samples.extend(snap);
    }
    write_field_csv(create(run, "field.csv")?, &samples)?;
    let value = json!({ "family": s.family, "c0": c0, "dt": dt, "radii": table, "pass": pass });
    write_json(run, "field.json", &value)?;
    if !run.json {
        for row in &table {
            let num = |k: &str| row[k].as_f64().unwrap_or(f64::NAN);
            println!(
                "r = {}: peak G 4 pi r = {:.6e}, peak K = {:.6e}",
                row["r"],
                num("peak_G_times_4_pi_r"),
                num("peak_K")
            );
        }
        println!("{}", verdict(pass));
    }
    Ok(pass)
}

struct Check {
    name: &'static str,
    pass: bool,
    detail: String,
}

fn fig(a0: f64, b0: f64) -> Result<ModelFamily, CliError> {
    Ok(ModelFamily::finite_stop_first_order(10.0, a0, b0, 0.0, Branch::Real)?)
}

fn family_opts(m: &ModelFamily) -> ValidationOptions {
    ValidationOptions { omega0: Some(m.omega0()), omega1: m.omega1(), ..Default::default() }
}

fn checks() -> Result<Vec<Check>, CliError> {
    let mut out = Vec::new();
    let slow_stop = fig(0.01, 0.2)?;
    let fast_stop = fig(0.5, 10.0)?;
    let init = InitialData::new(1.0, 1.0);

    let spec = GridSpec::new(9.9, 10_000, 1e-11);
    let e1 = cross_validate(slow_stop.coefficients(), init, None, &spec, &family_opts(&slow_stop))?.max_rel_err();
    let e2 = cross_validate(fast_stop.coefficients(), init, None, &spec, &family_opts(&fast_stop))?.max_rel_err();
    out.push(Check {
        name: "formula vs integrator",
        pass: e1 < 1e-5 && e2 < 1e-4,
        detail: format!("slow_stop {e1:.2e}, fast_stop {e2:.2e}"),
    });

    let grid = uniform_grid(9.9, 10_000);
    let freq = slow_stop.frequency_function(&grid)?;
    let res = defomega_residual(slow_stop.coefficients(), &freq, &grid)?.max_abs;
    out.push(Check { name: "frequency residual", pass: res < 1e-8, detail: format!("{res:.2e} at 1e4 points") });

    let rho = slow_stop.rho(9.99);
    out.push(Check { name: "finite stopping", pass: rho < 1e-3, detail: format!("rho(0.999 T) = {rho:.3e}") });

    let lin = fig(0.1, 1.0)?;
    let dev = uniform_grid(10.0, 1_001).iter().map(|&t| (lin.rho(t) - (1.0 - t / 10.0)).abs()).fold(0.0, f64::max);
    out.push(Check { name: "linear relaxation", pass: dev < 1e-12, detail: format!("{dev:.2e}") });

    let bump = Forcing::bump(1.0, 3.0, 1.0)?;
    let zero = InitialData::new(0.0, 0.0);
    let ed = cross_validate(
        slow_stop.coefficients(),
        zero,
        Some(&bump),
        &GridSpec::new(9.0, 2_000, 1e-11),
        &family_opts(&slow_stop),
    )?
    .max_abs_err();
    out.push(Check { name: "duhamel consistency", pass: ed < 1e-4, detail: format!("{ed:.2e}") });

    let tau = 1.0;
    let law = dissipation_from_kernel(&sampled_gamma_seed(tau, tau / 100.0, 5_000))?;
    let gamma = KernelFamily::Gamma { tau };
    let mut worst = 0.0f64;
    let mut argmax_ok = true;
    for r in [0.5, 1.0, 2.0, 3.0, 5.0] {
        let k = kernel_at_distance(&law, r)?;
        if r <= 3.0 {
            worst = worst.max(analytic_rel_err(&gamma, &k, r).unwrap_or(f64::INFINITY));
        }
        if r >= 2.0 {
            let arg = k.samples.iter().enumerate().fold((0, f64::MIN), |m, (i, &v)| if v > m.1 { (i, v) } else { m }).0;
            argmax_ok &= (arg as f64 * law.dt() - (r - 1.0) * tau).abs() <= law.dt() + 1e-12;
        }
    }
    out.push(Check { name: "gamma synthesis", pass: worst < 1e-3, detail: format!("relative L-inf {worst:.2e}") });
    out.push(Check { name: "gamma maximum", pass: argmax_ok, detail: "argmax at (R-1) tau for R = 2, 3, 5".into() });

    let synth = verify_semigroup(&KernelFamily::Synthesized(law.clone()), 1.0, 2.0, 0.0, 0)?.max_abs_defect;
    let half = verify_semigroup(&gamma, 0.5, 0.5, tau / 100.0, 2_000)?.max_abs_defect;
    out.push(Check {
        name: "semigroup law",
        pass: synth < 1e-4 && half < 1e-4,
        detail: format!("synthesized (1,2) {synth:.2e}, analytic (0.5,0.5) {half:.2e}"),
    });

    let seed = truncated_relaxation(&Relaxation::Exponential { tau: 1.0 }, 1.0, 0, 0.01, 800)?;
    let tlaw = dissipation_from_kernel(&seed)?;
    let mut support_ok = true;
    let mut ends = Vec::new();
    for r in [1.0, 2.0, 3.0] {
        let rep = verify_support(&kernel_at_distance(&tlaw, r)?, r, 1.0, 1e-6);
        support_ok &= rep.causal && (rep.observed_support_end - r).abs() <= 0.02 + 1e-12;
        ends.push(format!("{:.3}", rep.observed_support_end));
    }
    out.push(Check { name: "support propagation", pass: support_ok, detail: format!("ends {}", ends.join(", ")) });

    let mut law_ok = true;
    for l in [&law, &tlaw] {
        let (re, im) = l.symmetry_defect();
        law_ok &= l.min_re() >= -1e-12 && re <= 1e-9 && im <= 1e-9 && l.max_phase_jump() <= PI / 2.0;
    }
    out.push(Check { name: "dissipation law structure", pass: law_ok, detail: "gamma and truncated seeds".into() });

    let c1 =
        classify_freq(&slow_stop.frequency_function(&uniform_grid(9.9, 2_000))?, default_tol_zero(slow_stop.omega0()))?;
    let over = ModelFamily::constant(4.0, 1.0, Branch::Imaginary)?;
    let c2 = classify_freq(&over.frequency_function(&uniform_grid(5.0, 500))?, default_tol_zero(over.omega0()))?;
    let g = uniform_grid(1.999, 2_000);
    let w2: Vec<f64> = g.iter().map(|t| 1.0 - t).collect();
    let c3 = classify_omega_squared(&g, &w2, 1e-9)?;
    out.push(Check {
        name: "classification",
        pass: c1.kind == OscillationKind::WeaklyDissipative
            && c2.kind == OscillationKind::Creeping
            && c3.kind == OscillationKind::Mixed
            && c3.intervals.first().map(|i| i.kind) == Some(OscillationKind::WeaklyDissipative),
        detail: format!("{:?}, {:?}, {:?}", c1.kind, c2.kind, c3.kind),
    });

    let fam = KernelFamily::Synthesized(law.clone());
    let mut field_ok = true;
    for r in [0.5, 2.0] {
        let times: Vec<f64> = (0..3_000).map(|i| r + (i as f64 - 100.0) * law.dt()).collect();
        let snap = field_snapshot(&fam, 1.0, &[r], &times)?;
        let quiet = snap.iter().filter(|p| p.t < r).all(|p| p.g == 0.0);
        let peak = snap.iter().map(|p| p.g.abs()).fold(0.0, f64::max) * 4.0 * PI * r;
        let pk = kernel_at_distance(&law, r)?.peak();
        field_ok &= quiet && (peak - pk).abs() <= 1e-6 * pk;
    }
    out.push(Check { name: "spherical field", pass: field_ok, detail: "front and 1/(4 pi r) peak scaling".into() });
    Ok(out)
}

pub fn validate_all(run: &Run) -> Outcome {
    let results = checks()?;
    let all = results.iter().all(|c| c.pass);
    let rows: Vec<Value> =
        results.iter().map(|c| json!({ "check": c.name, "pass": c.pass, "detail": c.detail })).collect();
    write_json(run, "validate.json", &json!({ "checks": rows, "pass": all }))?;
    if !run.json {
        for c in &results {
            println!("{} {}: {}", verdict(c.pass), c.name, c.detail);
        }
    }
    Ok(all)
}
