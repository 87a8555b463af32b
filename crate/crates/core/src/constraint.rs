//! Recovery of θ̂(±1) from the higher modes through the closed-curve constraint.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::spectral::{default_grid, grid_points, inverse_transform, SpectralField};

/// (1/2)log(5/4).
pub const MAX_RADIUS: f64 = 0.111_571_775_657_104_88;

/// Higher-mode data θ̃ (modes 0 and ±1 removed) and the ball radius r.
#[derive(Clone, Debug, PartialEq)]
pub struct ConstraintProblem {
    theta_tilde: SpectralField,
    radius_r: f64,
}

impl ConstraintProblem {
    /// Modes 0 and ±1 of `theta_tilde` are discarded.
    pub fn new(theta_tilde: SpectralField, radius_r: f64) -> Result<Self> {
        if !(radius_r > 0.0 && radius_r < MAX_RADIUS) {
            return Err(Error::RadiusOutOfRange {
                r: radius_r,
                max: MAX_RADIUS,
            });
        }
        let mut theta_tilde = theta_tilde;
        theta_tilde.set_coeff(0, Complex64::new(0.0, 0.0));
        theta_tilde.set_coeff(1, Complex64::new(0.0, 0.0));
        let norm = theta_tilde.wiener_norm(0.0, None);
        if !(norm < radius_r) {
            return Err(Error::NotAdmissible { norm, r: radius_r });
        }
        Ok(Self {
            theta_tilde,
            radius_r,
        })
    }

    pub fn theta_tilde(&self) -> &SpectralField {
        &self.theta_tilde
    }

    pub fn radius(&self) -> f64 {
        self.radius_r
    }
}

/// g(u, x) = (∫cos ψ, ∫sin ψ) with ψ = α + 2(x₁cos α − x₂sin α) + u(α).
pub fn g_map(u: &SpectralField, x: [f64; 2]) -> [f64; 2] {
    let g = default_grid(u.n_modes());
    let us = inverse_transform(u, g).expect("default grid resolves the field");
    let (mut c, mut s) = (0.0, 0.0);
    for (a, uj) in grid_points(g).into_iter().zip(us) {
        let psi = a + 2.0 * (x[0] * a.cos() - x[1] * a.sin()) + uj;
        c += psi.cos();
        s += psi.sin();
    }
    let w = 2.0 * PI / g as f64;
    [w * c, w * s]
}

/// Converged (Re θ̂(1), Im θ̂(1)) with the iteration history.
#[derive(Clone, Debug, PartialEq)]
pub struct FirstModes {
    pub x: [f64; 2],
    pub iterations: usize,
    /// |g| at the returned x.
    pub residual: f64,
    /// |x_{m+1} − x_m| for each sweep.
    pub updates: Vec<f64>,
}

impl FirstModes {
    /// θ̃ with the solved ±1 modes inserted.
    pub fn assemble(&self, theta_tilde: &SpectralField) -> SpectralField {
        let mut th = theta_tilde.clone();
        th.set_coeff(1, Complex64::new(self.x[0], self.x[1]));
        th
    }
}

/// Frozen-Jacobian iteration x ← x − D_x g(0,0)⁻¹ g(θ̃, x) from x = 0, where
/// D_x g(0,0) = 2π[[0,1],[1,0]].
pub fn solve_first_modes(p: &ConstraintProblem, tol: f64, max_iter: usize) -> Result<FirstModes> {
    let u = &p.theta_tilde;
    let mut x = [0.0, 0.0];
    let mut updates = Vec::new();
    for it in 0..=max_iter {
        let g = g_map(u, x);
        let res = g[0].hypot(g[1]);
        if res < tol {
            return Ok(FirstModes {
                x,
                iterations: it,
                residual: res,
                updates,
            });
        }
        if it == max_iter {
            return Err(Error::NonConvergence {
                solver: "first-mode contraction",
                iterations: max_iter,
                last_update: updates.last().copied().unwrap_or(f64::NAN),
            });
        }
        let dx = [g[1] / (2.0 * PI), g[0] / (2.0 * PI)];
        x[0] -= dx[0];
        x[1] -= dx[1];
        updates.push(dx[0].hypot(dx[1]));
    }
    unreachable!("loop returns on its last pass")
}

/// C_I(r) = (1/r)·2e^r(e^r−1)/(1 − 4(e^{2r}−1)).
pub fn ci_constant(r: f64) -> Result<f64> {
    if !(r > 0.0 && r < MAX_RADIUS) {
        return Err(Error::RadiusOutOfRange { r, max: MAX_RADIUS });
    }
    let e = r.exp();
    Ok(2.0 * e * (e - 1.0) / (r * (1.0 - 4.0 * ((2.0 * r).exp() - 1.0))))
}
