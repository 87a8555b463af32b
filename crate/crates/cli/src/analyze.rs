//! JSON tables for the linear operator, its diagonalizing transform, and the I₁/I₂ integrals.

use anyhow::Result;
use muskat_core::diagonal::{l1_norms, verify_diagonalizes, verify_inverse};
use muskat_core::linear::{integral_i1, integral_i2, integral_i_quadrature, WhichIntegral};
use muskat_core::{build_transform, cs_bound, LinearCoefficients, PhysicalParams};
use serde::Serialize;

pub const INTEGRAL_KMAX: i64 = 32;

#[derive(Debug, Serialize)]
pub struct SpectrumRow {
    pub k: usize,
    pub a: f64,
    pub b: [f64; 2],
}

#[derive(Debug, Serialize)]
pub struct Spectrum {
    pub mean_angle: f64,
    pub rows: Vec<SpectrumRow>,
    pub c1: [f64; 2],
}

pub fn spectrum(p: &PhysicalParams, mean_angle: f64, n: usize) -> Spectrum {
    let c = LinearCoefficients::new(p, mean_angle, n);
    Spectrum {
        mean_angle,
        rows: (1..=n)
            .map(|k| SpectrumRow {
                k,
                a: c.a[k],
                b: [c.b[k].re, c.b[k].im],
            })
            .collect(),
        c1: [c.c1.re, c.c1.im],
    }
}

#[derive(Debug, Serialize)]
pub struct TransformSummary {
    pub n_modes: usize,
    /// Columns checked; the last ones carry truncation bias.
    pub interior: usize,
    pub inverse_residual: f64,
    pub diagonal_residual: f64,
    pub cs_bound: f64,
    pub s_l1: f64,
    pub s_inv_l1: f64,
    pub within_bound: bool,
}

pub fn transform(p: &PhysicalParams, mean_angle: f64, n: usize) -> Result<TransformSummary> {
    let c = LinearCoefficients::new(p, mean_angle, n);
    let t = build_transform(&c, n)?;
    let (s_l1, s_inv_l1) = l1_norms(&t);
    let cs = cs_bound(p);
    Ok(TransformSummary {
        n_modes: n,
        interior: t.interior(),
        inverse_residual: verify_inverse(&t),
        diagonal_residual: verify_diagonalizes(&t, &c, n),
        cs_bound: cs,
        s_l1,
        s_inv_l1,
        within_bound: s_l1 <= cs && s_inv_l1 <= cs,
    })
}

#[derive(Debug, Serialize)]
pub struct IntegralRow {
    pub k: i64,
    pub i1_closed: f64,
    pub i1_quadrature: f64,
    pub i2_closed: f64,
    pub i2_quadrature: f64,
}

#[derive(Debug, Serialize)]
pub struct IntegralTable {
    pub rows: Vec<IntegralRow>,
    pub max_abs_diff: f64,
}

pub fn integrals() -> Result<IntegralTable> {
    let mut rows = Vec::new();
    let mut worst = 0.0f64;
    for k in (-INTEGRAL_KMAX..=INTEGRAL_KMAX).filter(|&k| k != 0) {
        let row = IntegralRow {
            k,
            i1_closed: integral_i1(k)?,
            i1_quadrature: integral_i_quadrature(WhichIntegral::I1, k)?,
            i2_closed: integral_i2(k)?,
            i2_quadrature: integral_i_quadrature(WhichIntegral::I2, k)?,
        };
        worst = worst
            .max((row.i1_closed - row.i1_quadrature).abs())
            .max((row.i2_closed - row.i2_quadrature).abs());
        rows.push(row);
    }
    Ok(IntegralTable {
        rows,
        max_abs_diff: worst,
    })
}

#[derive(Debug, Default, Serialize)]
pub struct Analysis {
    pub params: Option<PhysicalParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub spectrum: Option<Spectrum>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub transform: Option<TransformSummary>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub integrals: Option<IntegralTable>,
}
