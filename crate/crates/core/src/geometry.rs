//! Physical parameters, the bubble state, and curve quantities derived from it.
//!
//! The interface is z_α = (L/2π) e^{i(α+ϑ(α))} with ϑ = ϑ̂(0) + θ and θ mean free.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectral::{default_grid, freq, grid_coeffs, grid_points, grid_samples, inverse_transform, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Size guard (1/2)log(1+2/π) on ‖θ‖_{F^{0,1}} for the two-sided length bound.
pub fn length_guard() -> f64 {
    0.5 * (1.0 + 2.0 / PI).ln()
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhysicalParams {
    /// Viscosity contrast (μ₂−μ₁)/(μ₂+μ₁).
    pub a_mu: f64,
    /// Surface tension group κσ/(μ₂+μ₁), length³/time.
    pub a_sigma: f64,
    /// Gravity group gκ(ρ₂−ρ₁)/(μ₂+μ₁), length/time.
    pub a_rho: f64,
    /// Radius R of the circle with the same area.
    pub radius: f64,
}

impl PhysicalParams {
    pub fn new(a_mu: f64, a_sigma: f64, a_rho: f64, radius: f64) -> Result<Self> {
        if !(a_mu.abs() <= 1.0) {
            return Err(invalid("a_mu", format!("{a_mu} is outside [-1, 1]")));
        }
        if !(a_sigma > 0.0) {
            return Err(invalid("a_sigma", format!("{a_sigma} must be positive")));
        }
        if !a_rho.is_finite() {
            return Err(invalid("a_rho", "must be finite"));
        }
        if !(radius > 0.0) {
            return Err(invalid("radius", format!("{radius} must be positive")));
        }
        Ok(Self {
            a_mu,
            a_sigma,
            a_rho,
            radius,
        })
    }

    /// x = |A_ρ|R²/A_σ, the gravity to surface tension ratio.
    pub fn gravity_ratio(&self) -> f64 {
        self.a_rho.abs() * self.radius * self.radius / self.a_sigma
    }
}

/// Dimensionless groups from raw fluid constants.
#[allow(clippy::too_many_arguments)]
pub fn derive_params(
    mu1: f64,
    mu2: f64,
    rho1: f64,
    rho2: f64,
    sigma: f64,
    kappa: f64,
    g: f64,
    radius: f64,
) -> Result<PhysicalParams> {
    if !(mu1 >= 0.0 && mu2 >= 0.0 && mu1 + mu2 > 0.0) {
        return Err(invalid("mu1 + mu2", "viscosities must be nonnegative with a positive sum"));
    }
    if !(sigma > 0.0) {
        return Err(invalid("sigma", "must be positive"));
    }
    if !(kappa > 0.0) {
        return Err(invalid("kappa", "must be positive"));
    }
    let s = mu1 + mu2;
    PhysicalParams::new((mu2 - mu1) / s, kappa * sigma / s, g * kappa * (rho2 - rho1) / s, radius)
}

mod pair {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(z: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [z.re, z.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BubbleState {
    /// ϑ̂(0), radians.
    pub mean_angle: f64,
    /// L, the total arclength.
    pub length: f64,
    /// z(0), the tracked point at α = 0.
    #[serde(with = "pair")]
    pub base_point: Complex64,
    pub time: f64,
    /// Mean-free tangent angle perturbation.
    pub theta: SpectralField,
}

impl BubbleState {
    /// State at t = 0 with L fixed by the area constraint.
    pub fn new(theta: SpectralField, mean_angle: f64, radius: f64, base_point: Complex64) -> Result<Self> {
        let mut theta = theta;
        theta.set_coeff(0, Complex64::new(0.0, 0.0));
        let length = length_from_theta(&theta, mean_angle, radius)?;
        Ok(Self {
            mean_angle,
            length,
            base_point,
            time: 0.0,
            theta,
        })
    }

    pub fn circle(n: usize, radius: f64, mean_angle: f64, base_point: Complex64) -> Self {
        Self {
            mean_angle,
            length: 2.0 * PI * radius,
            base_point,
            time: 0.0,
            theta: SpectralField::zeros(n),
        }
    }

    pub fn n_modes(&self) -> usize {
        self.theta.n_modes()
    }
}

/// Samples of the unit tangent E = e^{i(α+ϑ)} and the antiderivative data on one grid.
pub(crate) struct Frame {
    pub g: usize,
    pub alpha: Vec<f64>,
    pub e: Vec<Complex64>,
    pub e_hat: Vec<Complex64>,
    pub e0: Complex64,
    /// Samples of A[E](α) = ∫₀^α E − (α/2π)∫E.
    pub anti: Vec<Complex64>,
    anti_hat: Vec<Complex64>,
}

impl Frame {
    pub fn new(theta: &SpectralField, mean_angle: f64, g: usize) -> Result<Self> {
        let alpha = grid_points(g);
        let th = inverse_transform(theta, g)?;
        let e: Vec<Complex64> = alpha
            .iter()
            .zip(&th)
            .map(|(a, t)| Complex64::from_polar(1.0, a + mean_angle + t))
            .collect();
        let e_hat = grid_coeffs(&e);
        let e0 = e_hat[0];
        let mut anti_hat = vec![Complex64::new(0.0, 0.0); g];
        let mut c0 = Complex64::new(0.0, 0.0);
        for (i, c) in e_hat.iter().enumerate().skip(1) {
            if i == g / 2 {
                continue;
            }
            let k = freq(i, g) as f64;
            anti_hat[i] = -I * c / k;
            c0 += I * c / k;
        }
        anti_hat[0] = c0;
        let anti = grid_samples(&anti_hat);
        Ok(Self {
            g,
            alpha,
            e,
            e_hat,
            e0,
            anti,
            anti_hat,
        })
    }

    /// Q = Im ∫ conj(W) E dα with W(α) = ∫₀^α E.
    pub fn area_integral(&self) -> f64 {
        let g = self.g;
        let mut parseval = Complex64::new(0.0, 0.0);
        let mut linear = Complex64::new(0.0, 0.0);
        for i in 0..g {
            if i == g / 2 {
                continue;
            }
            parseval += self.anti_hat[i].conj() * self.e_hat[i];
            if i != 0 {
                let k = freq(i, g);
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                // ∫ α e^{ikα} dα = 2π(−1)^k/(ik)
                linear += self.e_hat[i] * sign / (I * k as f64);
            }
        }
        (2.0 * PI * (parseval + self.e0.conj() * linear)).im
    }
}

fn state_grid(theta: &SpectralField) -> usize {
    default_grid(theta.n_modes())
}

/// L from the area constraint V = πR²; independent of `mean_angle`.
pub fn length_from_theta(theta: &SpectralField, mean_angle: f64, radius: f64) -> Result<f64> {
    let frame = Frame::new(theta, mean_angle, state_grid(theta))?;
    let q = frame.area_integral();
    let ratio = q / (2.0 * PI);
    if !(ratio > 0.0) {
        return Err(Error::InadmissibleLength { value: ratio });
    }
    Ok(2.0 * PI * radius / ratio.sqrt())
}

/// Two-sided length envelope for ‖θ‖_{F^{0,1}} = m, or `None` beyond the size guard.
pub fn length_bounds(m: f64, radius: f64) -> Option<(f64, f64)> {
    let d = 0.5 * PI * ((2.0 * m).exp() - 1.0);
    if !(m >= 0.0) || d >= 1.0 {
        return None;
    }
    let l0 = 2.0 * PI * radius;
    Some((l0 / (1.0 + d).sqrt(), l0 / (1.0 - d).sqrt()))
}

/// V = (1/2) Im ∫ conj(z − z(0)) z_α dα.
pub fn enclosed_area(state: &BubbleState) -> Result<f64> {
    let frame = Frame::new(&state.theta, state.mean_angle, state_grid(&state.theta))?;
    let s = state.length / (2.0 * PI);
    Ok(0.5 * s * s * frame.area_integral())
}

/// z(α_j) = z(0) + (L/2π) ∫₀^{α_j} e^{i(η+ϑ(η))} dη on a grid of `g` points.
pub fn reconstruct_curve(state: &BubbleState, g: usize) -> Result<Vec<Complex64>> {
    let frame = Frame::new(&state.theta, state.mean_angle, g)?;
    let s = state.length / (2.0 * PI);
    Ok(frame
        .anti
        .iter()
        .zip(&frame.alpha)
        .map(|(a, al)| state.base_point + s * (a + frame.e0 * al))
        .collect())
}

/// Area centroid from ∬x = ∮x²/2 dy and ∬y = −∮y²/2 dx.
pub fn centroid(state: &BubbleState) -> Result<Complex64> {
    let g = state_grid(&state.theta);
    let frame = Frame::new(&state.theta, state.mean_angle, g)?;
    let s = state.length / (2.0 * PI);
    let (mut area, mut mx, mut my) = (0.0, 0.0, 0.0);
    for ((a, al), e) in frame.anti.iter().zip(&frame.alpha).zip(&frame.e) {
        let z = state.base_point + s * (a + frame.e0 * al);
        let dz = s * e;
        area += z.re * dz.im;
        mx += 0.5 * z.re * z.re * dz.im;
        my -= 0.5 * z.im * z.im * dz.re;
    }
    Ok(Complex64::new(mx / area, my / area))
}

/// K(α) = (2π/L)(1 + θ_α).
pub fn curvature(state: &BubbleState) -> SpectralField {
    let scale = 2.0 * PI / state.length;
    let mut k = state.theta.derivative(1).scale(scale);
    k.set_coeff(0, Complex64::new(scale, 0.0));
    k
}

/// (1/2π) ∫ e^{i(α+ϑ̂(0)+θ(α))} dα; zero for closed curves.
pub fn constraint_residual(state: &BubbleState) -> Result<Complex64> {
    Ok(Frame::new(&state.theta, state.mean_angle, state_grid(&state.theta))?.e0)
}
