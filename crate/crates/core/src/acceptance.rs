//! Acceptance suites: each returns measured values with the bound it is held to.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::constraint::{ci_constant, solve_first_modes, ConstraintProblem};
use crate::diagonal::{build_transform, cs_bound, l1_norms, verify_diagonalizes, verify_inverse};
use crate::error::{Error, Result};
use crate::evolution::{fit_decay, full_rhs, run, SolverConfig, TrajectoryRecord};
use crate::geometry::{centroid, constraint_residual, length_bounds, BubbleState, PhysicalParams};
use crate::linear::{
    c1_coeff, integral_i1, integral_i2, integral_i_quadrature, verify_linearization, LinearCoefficients, WhichIntegral,
};
use crate::operators::{apply_r, apply_r_quadrature, PicardOptions};
use crate::spectral::SpectralField;

pub const DEFAULT_SEED: u64 = 20_240_917;

/// Suite names in criterion order.
pub const SUITES: [&str; 9] = [
    "integrals",
    "steady-state",
    "linearization",
    "diagonalization",
    "constraint",
    "conservation",
    "decay",
    "operators",
    "determinism",
];

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Check {
    pub label: String,
    pub value: f64,
    /// Human-readable bound, e.g. "< 1e-10" or "in [4.5, 7.5]".
    pub bound: String,
    pub passed: bool,
}

impl Check {
    pub fn below(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!("< {limit:e}"),
            passed: value < limit,
        }
    }

    pub fn at_most(label: impl Into<String>, value: f64, limit: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!("<= {limit}"),
            passed: value <= limit,
        }
    }

    pub fn within(label: impl Into<String>, value: f64, lo: f64, hi: f64) -> Self {
        Self {
            label: label.into(),
            value,
            bound: format!("in [{lo}, {hi}]"),
            passed: value >= lo && value <= hi,
        }
    }

    pub fn holds(label: impl Into<String>, ok: bool) -> Self {
        Self {
            label: label.into(),
            value: if ok { 1.0 } else { 0.0 },
            bound: "true".into(),
            passed: ok,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SuiteReport {
    pub criterion: usize,
    pub suite: String,
    pub seed: u64,
    pub checks: Vec<Check>,
    /// Error that stopped the suite early, if any.
    pub error: Option<String>,
}

impl SuiteReport {
    fn new(suite: &str, seed: u64) -> Self {
        Self {
            criterion: criterion_of(suite).unwrap_or(0),
            suite: suite.to_string(),
            seed,
            checks: Vec::new(),
            error: None,
        }
    }

    pub fn passed(&self) -> bool {
        self.error.is_none() && !self.checks.is_empty() && self.checks.iter().all(|c| c.passed)
    }

    fn push(&mut self, c: Check) {
        self.checks.push(c);
    }

    fn fail_with(mut self, e: Error) -> Self {
        self.error = Some(e.to_string());
        self
    }

    /// One line per criterion: `PASS criterion 3 (linearization): 14/14 checks`.
    pub fn summary_line(&self) -> String {
        let ok = self.checks.iter().filter(|c| c.passed).count();
        let status = if self.passed() { "PASS" } else { "FAIL" };
        let mut line = format!(
            "{status} criterion {} ({}): {ok}/{} checks",
            self.criterion,
            self.suite,
            self.checks.len()
        );
        if let Some(e) = &self.error {
            line.push_str(&format!("; error: {e}"));
        }
        if let Some(c) = self.checks.iter().find(|c| !c.passed) {
            line.push_str(&format!("; first failure {} = {:e} (want {})", c.label, c.value, c.bound));
        }
        line
    }

    /// Pretty JSON, byte-stable for a fixed seed.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

pub fn criterion_of(suite: &str) -> Option<usize> {
    SUITES.iter().position(|s| *s == suite).map(|i| i + 1)
}

/// Runs a suite by name; `None` for an unknown name.
pub fn run_suite(name: &str, seed: u64) -> Option<SuiteReport> {
    let r = match name {
        "integrals" => integrals(),
        "steady-state" => steady_state(),
        "linearization" => linearization(),
        "diagonalization" => diagonalization(),
        "constraint" => constraint(seed),
        "conservation" => conservation(),
        "decay" => decay(),
        "operators" => operators(seed),
        "determinism" => determinism(seed),
        _ => return None,
    };
    Some(r)
}

/// Criterion 1.
pub fn integrals() -> SuiteReport {
    let mut rep = SuiteReport::new("integrals", 0);
    let mut worst = [0.0f64; 2];
    for k in (-32i64..=32).filter(|&k| k != 0) {
        for (slot, which) in [WhichIntegral::I1, WhichIntegral::I2].into_iter().enumerate() {
            let closed = match which {
                WhichIntegral::I1 => integral_i1(k),
                WhichIntegral::I2 => integral_i2(k),
            };
            let diff = closed.and_then(|c| Ok((c - integral_i_quadrature(which, k)?).abs()));
            match diff {
                Ok(d) => worst[slot] = worst[slot].max(d),
                Err(e) => return rep.fail_with(e),
            }
        }
    }
    rep.push(Check::below("max |I1 closed - quadrature|, 1<=|k|<=32", worst[0], 1e-9));
    rep.push(Check::below("max |I2 closed - quadrature|, 1<=|k|<=32", worst[1], 1e-9));
    let i1_2 = integral_i1(2).unwrap_or(f64::NAN);
    let i2_2 = integral_i2(2).unwrap_or(f64::NAN);
    rep.push(Check::below("|I1(2) - pi(1/2 - log 4)|", (i1_2 - PI * (0.5 - 4f64.ln())).abs(), 1e-15));
    rep.push(Check::below("|I2(2) - pi(log 4 - 3/2)|", (i2_2 - PI * (4f64.ln() - 1.5)).abs(), 1e-15));
    rep
}

/// Criterion 2.
pub fn steady_state() -> SuiteReport {
    let mut rep = SuiteReport::new("steady-state", 0);
    let mut worst_theta = 0.0f64;
    let mut worst_base = 0.0f64;
    for a_mu in [-0.5, 0.0, 0.5] {
        for a_rho in [-1.0, 0.5, 2.0] {
            let p = match PhysicalParams::new(a_mu, 1.0, a_rho, 1.0) {
                Ok(p) => p,
                Err(e) => return rep.fail_with(e),
            };
            let st = BubbleState::circle(32, 1.0, 0.3, Complex64::new(0.2, -0.1));
            match full_rhs(&st, &p, PicardOptions::default()) {
                Ok(r) => {
                    worst_theta = worst_theta.max(r.dtheta.wiener_norm(0.0, None));
                    worst_base = worst_base.max((r.dbase - Complex64::new(0.0, a_rho)).norm());
                }
                Err(e) => return rep.fail_with(e),
            }
        }
    }
    rep.push(Check::below("max ||dtheta/dt||_F01 over 3x3 grid", worst_theta, 1e-10));
    rep.push(Check::below("max |dz(0)/dt - i A_rho| over 3x3 grid", worst_base, 1e-10));
    rep
}

/// Criterion 3.
pub fn linearization() -> SuiteReport {
    let mut rep = SuiteReport::new("linearization", 0);
    let p = PhysicalParams::new(0.3, 1.0, 1.0, 1.0).expect("valid parameters");
    let mean_angle = 0.3;
    let eps = [1e-2, 1e-3, 1e-4];
    for k in [2usize, 3, 5] {
        let report = match verify_linearization(&p, mean_angle, k, &eps, 32) {
            Ok(r) => r,
            Err(e) => return rep.fail_with(e),
        };
        for row in &report.rows {
            // err <= C eps with C fixed per mode by the largest amplitude.
            let c = report.rows[0].err / report.rows[0].eps;
            rep.push(Check::at_most(
                format!("k={k} eps={:e}: err/eps (C from eps=1e-2: {c:.3e})", row.eps),
                row.err / row.eps,
                1.5 * c,
            ));
        }
        rep.push(Check::within(format!("k={k} fitted slope"), report.slope(), 0.8, 1.2));
    }
    // Mode-1 input: row 2 of RHS/eps is the anomalous coefficient c(1).
    match anomaly_coefficient(&p, mean_angle, 128, 1e-5) {
        Ok(measured) => {
            let want = c1_coeff(&p, mean_angle);
            rep.push(Check::below(
                "k=2 anomaly (1-A_mu)A_rho(3/2)(3/4-log 2): relative error",
                (measured - want).norm() / want.norm(),
                5e-4,
            ));
        }
        Err(e) => return rep.fail_with(e),
    }
    rep
}

/// RHS(ε·2cos α)/ε in row 2, with L frozen at 2πR.
pub fn anomaly_coefficient(p: &PhysicalParams, mean_angle: f64, n: usize, eps: f64) -> Result<Complex64> {
    let st = BubbleState {
        mean_angle,
        length: 2.0 * PI * p.radius,
        base_point: Complex64::new(0.0, 0.0),
        time: 0.0,
        theta: SpectralField::cosine(n, 1, 2.0 * eps, 0.0),
    };
    let r = full_rhs(&st, p, PicardOptions { tol: 1e-14, max_iter: 300 })?;
    Ok(r.dtheta.coeff(2) / eps)
}

/// Criterion 4.
pub fn diagonalization() -> SuiteReport {
    let mut rep = SuiteReport::new("diagonalization", 0);
    let n = 64;
    for a_mu in [-0.9, 0.0, 0.9] {
        for x in [0.1, 1.0, 5.0] {
            let p = PhysicalParams::new(a_mu, 1.0, x, 1.0).expect("valid parameters");
            let c = LinearCoefficients::new(&p, 0.3, n);
            let t = match build_transform(&c, n) {
                Ok(t) => t,
                Err(e) => return rep.fail_with(e),
            };
            let tag = format!("A_mu={a_mu} x={x}");
            rep.push(Check::below(format!("{tag}: S S^-1 - I interior"), verify_inverse(&t), 1e-12));
            rep.push(Check::below(format!("{tag}: S^-1 M S off-diagonal interior"), verify_diagonalizes(&t, &c, n), 1e-11));
            let (ns, ns_inv) = l1_norms(&t);
            let cs = cs_bound(&p);
            rep.push(Check::at_most(format!("{tag}: ||S||_1"), ns, cs));
            rep.push(Check::at_most(format!("{tag}: ||S^-1||_1"), ns_inv, cs));
        }
    }
    rep
}

/// Random θ̃ supported on 2 ≤ |k| ≤ kmax with ‖θ̃‖_{F^{0,1}} = norm.
pub fn random_tilde(rng: &mut ChaCha8Rng, n: usize, kmax: usize, norm: f64) -> SpectralField {
    let mut th = SpectralField::zeros(n);
    for k in 2..=kmax.min(n) {
        let decay = 1.0 / (k * k) as f64;
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * decay;
        th.set_coeff(k as i64, c);
    }
    let current = th.wiener_norm(0.0, None);
    th.scale(norm / current)
}

/// Criterion 5.
pub fn constraint(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("constraint", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = 0.1;
    let ci = ci_constant(r).expect("r inside the admissible range");
    let (mut max_iter, mut max_res, mut worst_ratio) = (0usize, 0.0f64, 0.0f64);
    for _ in 0..100 {
        let n = 16;
        let kmax = rng.random_range(2..=12);
        let norm = rng.random_range(1e-3..=0.08);
        let tilde = random_tilde(&mut rng, n, kmax, norm);
        let problem = match ConstraintProblem::new(tilde.clone(), r) {
            Ok(p) => p,
            Err(e) => return rep.fail_with(e),
        };
        let sol = match solve_first_modes(&problem, 1e-14, 30) {
            Ok(s) => s,
            Err(e) => return rep.fail_with(e),
        };
        let assembled = sol.assemble(&tilde);
        let state = BubbleState {
            mean_angle: 0.0,
            length: 2.0 * PI,
            base_point: Complex64::new(0.0, 0.0),
            time: 0.0,
            theta: assembled,
        };
        let res = match constraint_residual(&state) {
            Ok(z) => z.norm(),
            Err(e) => return rep.fail_with(e),
        };
        let first = 2.0 * sol.x[0].hypot(sol.x[1]);
        let bound = ci * r * tilde.wiener_norm(0.0, None);
        max_iter = max_iter.max(sol.iterations);
        max_res = max_res.max(res);
        worst_ratio = worst_ratio.max(first / bound);
    }
    rep.push(Check::at_most("max iterations over 100 samples", max_iter as f64, 30.0));
    rep.push(Check::below("max assembled constraint residual", max_res, 1e-12));
    rep.push(Check::at_most(
        "max (|th(1)|+|th(-1)|) / (C_I(r) r sum_{|k|>=2}|th(k)|), r=0.1",
        worst_ratio,
        1.0,
    ));
    rep
}

/// The shared run for criteria 6 and 7.
#[derive(Clone, Debug)]
pub struct ReferenceRun {
    pub params: PhysicalParams,
    pub initial: BubbleState,
    pub record: TrajectoryRecord,
    pub final_state: BubbleState,
    /// Centroid velocity averaged over the second half of the run.
    pub late_velocity: Complex64,
}

pub const REFERENCE_MODES: usize = 128;
pub const REFERENCE_NU0: f64 = 0.05;

fn compute_reference() -> Result<ReferenceRun> {
    let params = PhysicalParams::new(0.3, 1.0, 1.0, 1.0)?;
    let initial = BubbleState::new(
        SpectralField::cosine(REFERENCE_MODES, 2, 0.1, 0.0),
        0.0,
        params.radius,
        Complex64::new(0.0, 0.0),
    )?;
    let t_end = 2.0 * params.radius.powi(3) / params.a_sigma;
    let mut cfg = SolverConfig::new(REFERENCE_MODES, 0.5 * t_end);
    cfg.nu0 = REFERENCE_NU0;
    cfg.record_every = 8;
    let first = run(&initial, &params, &cfg)?;
    if let Some(e) = first.error {
        return Err(e);
    }
    let mid_centroid = centroid(&first.final_state)?;
    cfg.t_end = t_end;
    let second = run(&first.final_state, &params, &cfg)?;
    if let Some(e) = second.error {
        return Err(e);
    }
    let end_centroid = centroid(&second.final_state)?;
    let mut record = first.record;
    record.rows.extend(second.record.rows.into_iter().skip(1));
    Ok(ReferenceRun {
        params,
        initial,
        record,
        late_velocity: (end_centroid - mid_centroid) / (0.5 * t_end),
        final_state: second.final_state,
    })
}

/// Computed once per process.
pub fn reference_run() -> std::result::Result<&'static ReferenceRun, Error> {
    static RUN: OnceLock<std::result::Result<ReferenceRun, Error>> = OnceLock::new();
    RUN.get_or_init(compute_reference).as_ref().map_err(Clone::clone)
}

/// Criterion 6.
pub fn conservation() -> SuiteReport {
    let mut rep = SuiteReport::new("conservation", 0);
    let run = match reference_run() {
        Ok(r) => r,
        Err(e) => return rep.fail_with(e),
    };
    let target = PI * run.params.radius * run.params.radius;
    let drift = run.record.rows.iter().map(|r| (r.area - target).abs() / target).fold(0.0, f64::max);
    let res = run.record.rows.iter().map(|r| r.constraint_res).fold(0.0, f64::max);
    let mut outside = 0usize;
    for r in &run.record.rows {
        match length_bounds(r.norm_f01, run.params.radius) {
            Some((lo, hi)) if r.length >= lo && r.length <= hi => {}
            _ => outside += 1,
        }
    }
    rep.push(Check::below("max relative area drift", drift, 1e-7));
    rep.push(Check::below("max constraint residual (no projection)", res, 1e-6));
    rep.push(Check::at_most("record points outside the length envelope", outside as f64, 0.0));
    rep
}

/// Criterion 7.
pub fn decay() -> SuiteReport {
    let mut rep = SuiteReport::new("decay", 0);
    let run = match reference_run() {
        Ok(r) => r,
        Err(e) => return rep.fail_with(e),
    };
    let p = &run.params;
    let t_end = run.final_state.time;
    let tail_start = 0.1 * t_end;
    let tail: Vec<f64> = run.record.rows.iter().filter(|r| r.t >= tail_start).map(|r| r.norm_f121).collect();
    let increases = tail.windows(2).filter(|w| w[1] > w[0]).count();
    rep.push(Check::at_most(
        format!("increases of ||theta||_F(1/2,1) for t >= {tail_start}"),
        increases as f64,
        0.0,
    ));
    let a2 = 6.0 * p.a_sigma / p.radius.powi(3);
    match fit_decay(&run.record, (0.25 * t_end, t_end)) {
        Ok((rate, _)) => rep.push(Check::within("fitted decay rate", rate, 0.75 * a2, 1.25 * a2)),
        Err(e) => return rep.fail_with(e),
    }
    let l0 = 2.0 * PI * p.radius;
    rep.push(Check::below("|L(t_end) - 2 pi R| / R", (run.final_state.length - l0).abs() / p.radius, 1e-3));
    let vy = run.late_velocity.im;
    rep.push(Check::below("late mean vertical velocity: |v - A_rho| / |A_rho|", (vy - p.a_rho).abs() / p.a_rho.abs(), 1e-2));
    let n0 = run.initial.theta.wiener_norm(0.5, None);
    let worst = run.record.rows.iter().map(|r| r.norm_f121_nu).fold(0.0, f64::max);
    rep.push(Check::at_most("max analytic norm (nu0=0.05) / ||theta0||_F(1/2,1)", worst / n0, 1.5));
    rep
}

fn random_field(rng: &mut ChaCha8Rng, n: usize, amp: f64) -> SpectralField {
    let mut f = SpectralField::zeros(n);
    for k in 1..=n {
        let c = Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0)) * (amp / k as f64);
        f.set_coeff(k as i64, c);
    }
    f
}

/// Criterion 8.
pub fn operators(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("operators", seed);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x0b5e_55ed);
    let mut worst = 0.0f64;
    for _ in 0..20 {
        let n = 6;
        let theta = random_field(&mut rng, n, 0.2);
        let f = random_field(&mut rng, n, 1.0);
        let state = BubbleState {
            mean_angle: 0.0,
            length: 2.0 * PI,
            base_point: Complex64::new(0.0, 0.0),
            time: 0.0,
            theta: theta.clone(),
        };
        let spectral = apply_r(&state, &f);
        for j in 0..8 {
            let alpha = -PI + (j as f64 + 0.37) * PI / 4.0;
            let direct = apply_r_quadrature(&theta, &f, alpha);
            worst = worst.max((spectral.eval(alpha) - direct).norm());
        }
    }
    rep.push(Check::below("max |R via multipliers - R via PV quadrature|, 20 pairs x 8 points", worst, 1e-8));

    let mean_angle: f64 = rng.random_range(-PI..PI);
    let theta = random_field(&mut rng, 6, 0.2);
    let state = BubbleState {
        mean_angle,
        length: 2.0 * PI,
        base_point: Complex64::new(0.0, 0.0),
        time: 0.0,
        theta: theta.clone(),
    };
    let r = apply_r(&state, &SpectralField::sine(1, 1, 1.0, mean_angle));
    let ep = Complex64::from_polar(1.0, mean_angle);
    let em = ep.conj();
    let i = Complex64::new(0.0, 1.0);
    for k in 1i64..=4 {
        let plus = r.coeff(k);
        let minus = r.coeff(-k).conj();
        let im_part = (plus - minus) / (2.0 * i);
        let re_part = (plus + minus) / 2.0;
        let kf = k as f64;
        let lower = if k == 2 { PI * (0.5 - 4f64.ln()) } else { -PI };
        let want_im = em / (2.0 * PI) * theta.coeff(k + 1) * (-kf * PI / (2.0 + kf)) - ep / (2.0 * PI) * theta.coeff(k - 1) * lower;
        let mut want_re = i * em / (2.0 * PI) * theta.coeff(k + 1) * (2.0 * PI / (2.0 + kf));
        if k == 2 {
            want_re -= i * ep / (2.0 * PI) * theta.coeff(1) * PI * (4f64.ln() - 1.5);
        }
        rep.push(Check::below(format!("k={k}: Im R(sin) Fourier entry error"), (im_part - want_im).norm(), 1e-10));
        rep.push(Check::below(format!("k={k}: Re R(sin) Fourier entry error"), (re_part - want_re).norm(), 1e-10));
    }
    rep
}

/// Bytes of a short deterministic simulation written as CSV.
fn short_simulation_csv() -> Result<Vec<u8>> {
    let p = PhysicalParams::new(0.3, 1.0, 1.0, 1.0)?;
    let init = BubbleState::new(SpectralField::cosine(16, 3, 0.06, 0.2), 0.1, 1.0, Complex64::new(0.0, 0.0))?;
    let mut cfg = SolverConfig::new(16, 0.05);
    cfg.record_every = 2;
    let out = run(&init, &p, &cfg)?;
    let mut buf = Vec::new();
    out.record.write_csv(&mut buf)?;
    Ok(buf)
}

/// Criterion 9: repeated runs with one seed give identical bytes.
pub fn determinism(seed: u64) -> SuiteReport {
    let mut rep = SuiteReport::new("determinism", seed);
    for name in ["constraint", "operators"] {
        let a = run_suite(name, seed).map(|r| r.to_json());
        let b = run_suite(name, seed).map(|r| r.to_json());
        rep.push(Check::holds(format!("{name} report identical"), a.is_some() && a == b));
    }
    match (short_simulation_csv(), short_simulation_csv()) {
        (Ok(a), Ok(b)) => rep.push(Check::holds("simulation CSV identical", a == b)),
        (Err(e), _) | (_, Err(e)) => return rep.fail_with(e),
    }
    rep
}
