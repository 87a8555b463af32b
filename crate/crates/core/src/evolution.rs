//! Time integration of (θ, ϑ̂(0), L, z(0)) and run diagnostics.

use std::f64::consts::PI;
use std::io::Write;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::constraint::{solve_first_modes, ConstraintProblem, MAX_RADIUS};
use crate::error::{invalid, Error, Result};
use crate::geometry::{constraint_residual, enclosed_area, length_from_theta, reconstruct_curve, BubbleState, PhysicalParams};
use crate::operators::{ContourKernel, PicardOptions};
use crate::spectral::{forward_transform, inverse_transform, AnalyticWeight, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Time derivatives of the state.
#[derive(Clone, Debug, PartialEq)]
pub struct Rhs {
    pub dtheta: SpectralField,
    pub dmean: f64,
    pub dbase: Complex64,
    pub omega_iters: usize,
}

/// ϑ_t = (2π/L)(U_α + T(1+θ_α)) split into its mean and mean-free parts, plus dz(0)/dt.
pub fn full_rhs(state: &BubbleState, params: &PhysicalParams, opts: PicardOptions) -> Result<Rhs> {
    let kernel = ContourKernel::new(state)?;
    rhs_with_kernel(&kernel, state, params, opts)
}

fn rhs_with_kernel(k: &ContourKernel, state: &BubbleState, params: &PhysicalParams, opts: PicardOptions) -> Result<Rhs> {
    let g = k.grid();
    let band = k.band();
    let w = k.solve_vorticity(state, params, opts)?;
    let br = k.conj_br(&inverse_transform(&w.omega, g)?);
    let u = k.normal_samples(&br);
    let u_hat = forward_transform(&u, band)?;
    let t_hat = k.tangential_from_samples(&u, params);
    let u_a = inverse_transform(&u_hat.derivative(1), g)?;
    let t = inverse_transform(&t_hat, g)?;
    let scale = 2.0 * PI / state.length;
    let vt: Vec<f64> = (0..g)
        .map(|j| scale * (u_a[j] + t[j] * (1.0 + k.theta_alpha()[j])))
        .collect();
    let vt_hat = forward_transform(&vt, band)?;
    let mut dtheta = vt_hat.with_modes(state.n_modes());
    dtheta.set_coeff(0, Complex64::new(0.0, 0.0));
    // α = 0 is grid index g/2.
    let j0 = g / 2;
    let e0 = k.tangent()[j0];
    Ok(Rhs {
        dtheta,
        dmean: vt_hat.mean(),
        dbase: u[j0] * I * e0 + t[j0] * e0,
        omega_iters: w.iterations,
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ImexMode {
    #[default]
    IntegratingFactor,
    BackwardEulerDiag,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    pub n_modes: usize,
    /// Time step; `None` selects [`default_dt`].
    #[serde(default)]
    pub dt: Option<f64>,
    pub t_end: f64,
    #[serde(default = "default_omega_tol")]
    pub omega_tol: f64,
    #[serde(default = "default_omega_max_iter")]
    pub omega_max_iter: usize,
    #[serde(default)]
    pub imex_mode: ImexMode,
    #[serde(default = "default_record_every")]
    pub record_every: usize,
    #[serde(default)]
    pub nu0: f64,
    /// Re-solve θ̂(±1) from the closure constraint after every step.
    #[serde(default)]
    pub project_constraint: bool,
    /// Store reconstructed curves at every record point.
    #[serde(default)]
    pub curve_snapshots: bool,
}

fn default_omega_tol() -> f64 {
    PicardOptions::default().tol
}

fn default_omega_max_iter() -> usize {
    PicardOptions::default().max_iter
}

fn default_record_every() -> usize {
    10
}

impl SolverConfig {
    pub fn new(n_modes: usize, t_end: f64) -> Self {
        Self {
            n_modes,
            dt: None,
            t_end,
            omega_tol: default_omega_tol(),
            omega_max_iter: default_omega_max_iter(),
            imex_mode: ImexMode::default(),
            record_every: default_record_every(),
            nu0: 0.0,
            project_constraint: false,
            curve_snapshots: false,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_modes < 8 {
            return Err(invalid("n_modes", format!("{} is below the minimum of 8", self.n_modes)));
        }
        if let Some(dt) = self.dt {
            if !(dt > 0.0) {
                return Err(invalid("dt", format!("{dt} must be positive")));
            }
        }
        if !(self.t_end >= 0.0) {
            return Err(invalid("t_end", "must be nonnegative"));
        }
        if !(self.omega_tol > 0.0) {
            return Err(invalid("omega_tol", "must be positive"));
        }
        if self.record_every == 0 {
            return Err(invalid("record_every", "must be at least 1"));
        }
        if !(self.nu0 >= 0.0) {
            return Err(invalid("nu0", "must be nonnegative"));
        }
        Ok(())
    }

    pub fn picard(&self) -> PicardOptions {
        PicardOptions {
            tol: self.omega_tol,
            max_iter: self.omega_max_iter,
        }
    }

    pub fn time_step(&self, params: &PhysicalParams) -> f64 {
        self.dt.unwrap_or_else(|| default_dt(params, self.n_modes))
    }
}

/// min(0.5R³/(A_σN), 0.1R/(|A_ρ|N + ε)).
pub fn default_dt(params: &PhysicalParams, n: usize) -> f64 {
    let r = params.radius;
    let n = n as f64;
    let stiff = 0.5 * r.powi(3) / (params.a_sigma * n);
    let adv = 0.1 * r / (params.a_rho.abs() * n + 1e-12);
    stiff.min(adv)
}

/// Surface-tension rates A_σ(2π/L)³k(k²−1) for k = 0..=N.
fn stiff_rates(params: &PhysicalParams, length: f64, n: usize) -> Vec<f64> {
    let c = params.a_sigma * (2.0 * PI / length).powi(3);
    (0..=n)
        .map(|k| {
            let k = k as f64;
            c * k * (k * k - 1.0)
        })
        .collect()
}

fn combine(a: &SpectralField, fa: impl Fn(usize) -> f64, b: &SpectralField, fb: impl Fn(usize) -> f64) -> SpectralField {
    let coeffs = (0..=a.n_modes())
        .map(|k| a.nonnegative()[k] * fa(k) + b.nonnegative()[k] * fb(k))
        .collect();
    SpectralField::from_nonnegative(coeffs)
}

/// Result of one step, with the largest vorticity iteration count among its stages.
#[derive(Clone, Debug, PartialEq)]
pub struct StepOutcome {
    pub state: BubbleState,
    pub omega_iters: usize,
}

pub fn step(state: &BubbleState, params: &PhysicalParams, config: &SolverConfig) -> Result<BubbleState> {
    Ok(step_with_stats(state, params, config, config.time_step(params))?.state)
}

/// One IMEX step of size `dt` with L frozen, then L recomputed from the area constraint.
pub fn step_with_stats(state: &BubbleState, params: &PhysicalParams, config: &SolverConfig, dt: f64) -> Result<StepOutcome> {
    let opts = config.picard();
    let n = state.n_modes();
    let lam = stiff_rates(params, state.length, n);
    let r1 = full_rhs(state, params, opts)?;
    let th = &state.theta;
    // Explicit remainder F = RHS + λθ.
    let f1 = combine(&r1.dtheta, |_| 1.0, th, |k| lam[k]);

    let (mut theta, mean, base, iters) = match config.imex_mode {
        ImexMode::BackwardEulerDiag => {
            let theta = combine(th, |k| 1.0 / (1.0 + lam[k] * dt), &f1, |k| dt / (1.0 + lam[k] * dt));
            (theta, state.mean_angle + dt * r1.dmean, state.base_point + dt * r1.dbase, r1.omega_iters)
        }
        ImexMode::IntegratingFactor => {
            let half = |k: usize| (-lam[k] * 0.5 * dt).exp();
            let theta_half = combine(th, half, &f1, |k| 0.5 * dt * half(k));
            let mid = BubbleState {
                mean_angle: state.mean_angle + 0.5 * dt * r1.dmean,
                length: state.length,
                base_point: state.base_point + 0.5 * dt * r1.dbase,
                time: state.time + 0.5 * dt,
                theta: theta_half,
            };
            let r2 = full_rhs(&mid, params, opts)?;
            let f2 = combine(&r2.dtheta, |_| 1.0, &mid.theta, |k| lam[k]);
            let theta = combine(th, |k| (-lam[k] * dt).exp(), &f2, |k| dt * half(k));
            (
                theta,
                state.mean_angle + dt * r2.dmean,
                state.base_point + dt * r2.dbase,
                r1.omega_iters.max(r2.omega_iters),
            )
        }
    };
    theta.set_coeff(0, Complex64::new(0.0, 0.0));
    if config.project_constraint {
        theta = project_first_modes(&theta)?;
    }
    let length = length_from_theta(&theta, mean, params.radius)?;
    Ok(StepOutcome {
        state: BubbleState {
            mean_angle: mean,
            length,
            base_point: base,
            time: state.time + dt,
            theta,
        },
        omega_iters: iters,
    })
}

fn project_first_modes(theta: &SpectralField) -> Result<SpectralField> {
    let mut tilde = theta.clone();
    tilde.set_coeff(1, Complex64::new(0.0, 0.0));
    let norm = tilde.wiener_norm(0.0, None);
    let r = 0.5 * (norm + MAX_RADIUS);
    let sol = solve_first_modes(&ConstraintProblem::new(tilde.clone(), r)?, 1e-13, 100)?;
    tilde.set_coeff(1, Complex64::new(sol.x[0], sol.x[1]));
    Ok(tilde)
}

/// One recorded time sample; field names match the CSV header.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RecordRow {
    pub t: f64,
    pub norm_f01: f64,
    pub norm_f121: f64,
    pub norm_f121_nu: f64,
    pub length: f64,
    pub mean_angle: f64,
    pub base_re: f64,
    pub base_im: f64,
    pub area: f64,
    pub constraint_res: f64,
    pub omega_iters: usize,
}

pub const CSV_HEADER: &str = "t,norm_f01,norm_f121,norm_f121_nu,length,mean_angle,base_re,base_im,area,constraint_res,omega_iters";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurveSnapshot {
    pub t: f64,
    pub points: Vec<[f64; 2]>,
}

#[derive(Clone, Debug, PartialEq, Default, Serialize, Deserialize)]
pub struct TrajectoryRecord {
    pub rows: Vec<RecordRow>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub snapshots: Vec<CurveSnapshot>,
}

impl TrajectoryRecord {
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        for row in &self.rows {
            out.serialize(row).map_err(|e| Error::Serialization(e.to_string()))?;
        }
        if self.rows.is_empty() {
            out.write_record(CSV_HEADER.split(','))
                .map_err(|e| Error::Serialization(e.to_string()))?;
        }
        out.flush().map_err(|e| Error::Serialization(e.to_string()))
    }

    pub fn read_csv<R: std::io::Read>(r: R) -> Result<Self> {
        let mut rd = csv::Reader::from_reader(r);
        let rows = rd
            .deserialize()
            .collect::<std::result::Result<Vec<RecordRow>, _>>()
            .map_err(|e| Error::Serialization(e.to_string()))?;
        Ok(Self {
            rows,
            snapshots: Vec::new(),
        })
    }
}

pub fn record_row(state: &BubbleState, nu0: f64, omega_iters: usize) -> Result<RecordRow> {
    let w = AnalyticWeight::new(nu0, state.time)?;
    Ok(RecordRow {
        t: state.time,
        norm_f01: state.theta.wiener_norm(0.0, None),
        norm_f121: state.theta.wiener_norm(0.5, None),
        norm_f121_nu: state.theta.wiener_norm(0.5, Some(&w)),
        length: state.length,
        mean_angle: state.mean_angle,
        base_re: state.base_point.re,
        base_im: state.base_point.im,
        area: enclosed_area(state)?,
        constraint_res: constraint_residual(state)?.norm(),
        omega_iters,
    })
}

fn snapshot(state: &BubbleState) -> Result<CurveSnapshot> {
    let g = crate::spectral::default_grid(state.n_modes());
    Ok(CurveSnapshot {
        t: state.time,
        points: reconstruct_curve(state, g)?.into_iter().map(|z| [z.re, z.im]).collect(),
    })
}

/// A finished or aborted run: the record up to the last good state and the error, if any.
#[derive(Debug)]
pub struct RunOutcome {
    pub record: TrajectoryRecord,
    pub final_state: BubbleState,
    pub error: Option<Error>,
}

/// Steps from `initial` to `t_end`, recording every `record_every` steps and at the end.
pub fn run(initial: &BubbleState, params: &PhysicalParams, config: &SolverConfig) -> Result<RunOutcome> {
    config.validate()?;
    let mut state = initial.clone();
    if state.n_modes() != config.n_modes {
        state.theta = state.theta.with_modes(config.n_modes);
    }
    let dt_target = config.time_step(params);
    let remaining = (config.t_end - state.time).max(0.0);
    let n_steps = (remaining / dt_target).ceil() as usize;
    let dt = if n_steps > 0 { remaining / n_steps as f64 } else { dt_target };

    let mut record = TrajectoryRecord::default();
    let push = |record: &mut TrajectoryRecord, st: &BubbleState, iters: usize| -> Result<()> {
        record.rows.push(record_row(st, config.nu0, iters)?);
        if config.curve_snapshots {
            record.snapshots.push(snapshot(st)?);
        }
        Ok(())
    };
    push(&mut record, &state, 0)?;
    for i in 1..=n_steps {
        match step_with_stats(&state, params, config, dt) {
            Ok(out) => {
                state = out.state;
                if i % config.record_every == 0 || i == n_steps {
                    push(&mut record, &state, out.omega_iters)?;
                }
            }
            Err(e) => {
                return Ok(RunOutcome {
                    record,
                    final_state: state,
                    error: Some(e),
                })
            }
        }
    }
    Ok(RunOutcome {
        record,
        final_state: state,
        error: None,
    })
}

/// Least-squares decay rate of log ‖θ‖_{F^{1/2,1}} over `window`, and the fit's r².
pub fn fit_decay(record: &TrajectoryRecord, window: (f64, f64)) -> Result<(f64, f64)> {
    let pts: Vec<(f64, f64)> = record
        .rows
        .iter()
        .filter(|r| r.t >= window.0 && r.t <= window.1)
        .map(|r| (r.t, r.norm_f121))
        .collect();
    if pts.len() < 2 {
        return Err(Error::DegenerateWindow(format!("{} points in [{}, {}]", pts.len(), window.0, window.1)));
    }
    if pts.iter().any(|(_, v)| !(*v > 0.0)) {
        return Err(Error::DegenerateWindow("nonpositive norm in window".into()));
    }
    let n = pts.len() as f64;
    let mt = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let (mut stt, mut sty, mut syy) = (0.0, 0.0, 0.0);
    for (t, v) in &pts {
        let dt = t - mt;
        let dy = v.ln() - my;
        stt += dt * dt;
        sty += dt * dy;
        syy += dy * dy;
    }
    if stt == 0.0 {
        return Err(Error::DegenerateWindow("all samples at one time".into()));
    }
    let slope = sty / stt;
    let r2 = if syy == 0.0 { 1.0 } else { (sty * sty / (stt * syy)).clamp(0.0, 1.0) };
    Ok((-slope, r2))
}

/// (t, ‖θ(t)‖_{F^{1/2,1}_ν}) with ν(t) = ν₀t/(1+t) as recorded.
pub fn analytic_norm_series(record: &TrajectoryRecord) -> Vec<(f64, f64)> {
    record.rows.iter().map(|r| (r.t, r.norm_f121_nu)).collect()
}
