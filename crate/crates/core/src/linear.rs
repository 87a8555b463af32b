//! Linearization about the circle in Fourier variables.

use std::f64::consts::{LN_2, PI};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evolution::full_rhs;
use crate::geometry::{BubbleState, PhysicalParams};
use crate::operators::PicardOptions;
use crate::quad::GaussLegendre;
use crate::spectral::{compensated_sum, SpectralField};

/// a(k) = (A_σ/R³)k(k²−1).
pub fn a_coeff(p: &PhysicalParams, k: usize) -> f64 {
    let k = k as f64;
    p.a_sigma / p.radius.powi(3) * k * (k * k - 1.0)
}

/// b(k) = −(1+A_μ)(A_ρ/R)(k²−1)(k+1)/(k(k+2)) e^{−iϑ̂(0)}.
pub fn b_coeff(p: &PhysicalParams, mean_angle: f64, k: usize) -> Complex64 {
    let k = k as f64;
    let m = -(1.0 + p.a_mu) * p.a_rho / p.radius * (k * k - 1.0) * (k + 1.0) / (k * (k + 2.0));
    Complex64::from_polar(1.0, -mean_angle) * m
}

/// c(1) = (1−A_μ)(A_ρ/R)(3/2)(3/4 − log 2) e^{iϑ̂(0)}.
pub fn c1_coeff(p: &PhysicalParams, mean_angle: f64) -> Complex64 {
    Complex64::from_polar(1.0, mean_angle) * ((1.0 - p.a_mu) * p.a_rho / p.radius * 1.5 * (0.75 - LN_2))
}

/// Entries of the linear mode system ż(k) = −a(k)z(k) + b(k)z(k+1) (+ c(1)z(1) at k = 2).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct LinearCoefficients {
    /// a(k) for k = 0..=N+1 (slot 0 unused).
    pub a: Vec<f64>,
    /// b(k) for k = 0..=N+1 (slot 0 unused).
    pub b: Vec<Complex64>,
    pub c1: Complex64,
}

impl LinearCoefficients {
    pub fn new(p: &PhysicalParams, mean_angle: f64, n: usize) -> Self {
        let mut a = vec![0.0; n + 2];
        let mut b = vec![Complex64::new(0.0, 0.0); n + 2];
        for k in 1..=n + 1 {
            a[k] = a_coeff(p, k);
            b[k] = b_coeff(p, mean_angle, k);
        }
        Self {
            a,
            b,
            c1: c1_coeff(p, mean_angle),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.a.len() - 2
    }
}

/// θ̂_t predicted by the linearization, for all k (negative modes by conjugation).
///
/// With s = 2π/L, row k ≥ 1 is −A_σ s³k(k²−1)θ̂(k) + s·B(k)θ̂(k+1), plus s·C θ̂(1) at k = 2,
/// where B and C are R·b(k) and R·c(1). At L = 2πR this is the mode system above.
pub fn linearized_rhs_hat(theta_hat: &SpectralField, p: &PhysicalParams, mean_angle: f64, length: f64) -> SpectralField {
    let n = theta_hat.n_modes();
    let s = 2.0 * PI / length;
    let unit = PhysicalParams { radius: 1.0, ..*p };
    let mut out = SpectralField::zeros(n);
    for k in 1..=n {
        let kf = k as f64;
        let ki = k as i64;
        let mut v = -p.a_sigma * s.powi(3) * kf * (kf * kf - 1.0) * theta_hat.coeff(ki)
            + s * b_coeff(&unit, mean_angle, k) * theta_hat.coeff(ki + 1);
        if k == 2 {
            v += s * c1_coeff(&unit, mean_angle) * theta_hat.coeff(1);
        }
        out.set_coeff(ki, v);
    }
    out
}

/// Closed form of ∫∫ β cos(βs)/(4sin²(β/2)) · sin((k−1)(s−1)β − β) ds dβ.
pub fn integral_i1(k: i64) -> Result<f64> {
    match k {
        0 => Err(Error::ZeroFrequency),
        2 => Ok(PI * (0.5 - 4f64.ln())),
        k if k >= 1 => Ok(-PI),
        k => Ok(-(k as f64) * PI / (2.0 - k as f64)),
    }
}

/// Closed form of ∫∫ β sin(βs)/(4sin²(β/2)) · cos((k−1)(s−1)β − β) ds dβ.
pub fn integral_i2(k: i64) -> Result<f64> {
    match k {
        0 => Err(Error::ZeroFrequency),
        2 => Ok(PI * (4f64.ln() - 1.5)),
        k if k >= 1 => Ok(0.0),
        k => Ok(2.0 * PI / (2.0 - k as f64)),
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum WhichIntegral {
    I1,
    I2,
}

/// Quadrature of the defining double integral over β ∈ (−π, π), s ∈ (0, 1).
///
/// The integrand is even in β and bounded at β = 0, so the β-range is folded onto (0, π).
pub fn integral_i_quadrature(which: WhichIntegral, k: i64) -> Result<f64> {
    if k == 0 {
        return Err(Error::ZeroFrequency);
    }
    let km = (k - 1) as f64;
    let s_rule = GaussLegendre::new(20);
    let s_panels = 2 + k.unsigned_abs() as usize / 2;
    let inner = |b: f64| -> f64 {
        let sh = (0.5 * b).sin();
        let w = b / (4.0 * sh * sh);
        let v: f64 = s_rule.panels(0.0, 1.0, s_panels, |s| {
            let arg = km * (s - 1.0) * b - b;
            match which {
                WhichIntegral::I1 => (b * s).cos() * arg.sin(),
                WhichIntegral::I2 => (b * s).sin() * arg.cos(),
            }
        });
        w * v
    };
    let outer = GaussLegendre::new(20);
    Ok(2.0 * outer.adaptive(0.0, PI, 1e-13, inner)?)
}

/// One line of a convergence table.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceRow {
    pub k: usize,
    pub eps: f64,
    pub err: f64,
    pub fitted_slope: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceReport {
    pub rows: Vec<ConvergenceRow>,
    /// RHS(ε)/ε in row 2, the coupling seen by mode 2 (used for the k = 1 input).
    pub row2: Vec<[f64; 2]>,
}

impl ConvergenceReport {
    pub fn slope(&self) -> f64 {
        self.rows.first().map_or(f64::NAN, |r| r.fitted_slope)
    }
}

/// Least-squares slope of log y against log x.
pub fn loglog_slope(x: &[f64], y: &[f64]) -> f64 {
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx) * (a - mx)).sum();
    sxy / sxx
}

/// Compare the nonlinear RHS at θ = ε·2cos(kα), L frozen at 2πR, with the linear prediction.
///
/// `err` is max over modes 1..=N of |RHS(ε)/ε − L̂|.
pub fn verify_linearization(p: &PhysicalParams, mean_angle: f64, k: usize, eps_list: &[f64], n_modes: usize) -> Result<ConvergenceReport> {
    let unit = SpectralField::cosine(n_modes, k, 2.0, 0.0);
    let length = 2.0 * PI * p.radius;
    let lin = linearized_rhs_hat(&unit, p, mean_angle, length);
    let opts = PicardOptions {
        tol: 1e-13,
        max_iter: 200,
    };
    let mut errs = Vec::with_capacity(eps_list.len());
    let mut row2 = Vec::with_capacity(eps_list.len());
    for &eps in eps_list {
        let st = BubbleState {
            mean_angle,
            length,
            base_point: Complex64::new(0.0, 0.0),
            time: 0.0,
            theta: unit.scale(eps),
        };
        let r = full_rhs(&st, p, opts)?;
        let scaled = r.dtheta.scale(1.0 / eps);
        let err = (1..=n_modes as i64)
            .map(|j| (scaled.coeff(j) - lin.coeff(j)).norm())
            .fold(0.0, f64::max);
        errs.push(err);
        let c = scaled.coeff(2);
        row2.push([c.re, c.im]);
    }
    let slope = if eps_list.len() >= 2 { loglog_slope(eps_list, &errs) } else { f64::NAN };
    Ok(ConvergenceReport {
        rows: eps_list
            .iter()
            .zip(&errs)
            .map(|(&eps, &err)| ConvergenceRow {
                k,
                eps,
                err,
                fitted_slope: slope,
            })
            .collect(),
        row2,
    })
}

/// Catalan's constant Σ(−1)ⁿ/(2n+1)².
pub fn catalan() -> f64 {
    const TERMS: usize = 200_000;
    let term = |n: usize| {
        let d = (2 * n + 1) as f64;
        1.0 / (d * d)
    };
    // Pair consecutive terms, then apply the half-term tail correction of an alternating series.
    let pairs = compensated_sum((0..TERMS / 2).rev().map(|m| term(2 * m) - term(2 * m + 1)));
    pairs + 0.5 * term(TERMS)
}

/// C_R = 1 + (4/π)V√(1+π²/4).
pub fn cr_constant() -> f64 {
    1.0 + 4.0 / PI * catalan() * (1.0 + PI * PI / 4.0).sqrt()
}
