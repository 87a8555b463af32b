//! Birkhoff–Rott velocities, the vorticity fixed point, and the linear R operator.

use std::collections::HashMap;
use std::f64::consts::PI;
use std::sync::{OnceLock, RwLock};

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::geometry::{BubbleState, Frame, PhysicalParams};
use crate::quad::GaussLegendre;
use crate::spectral::{default_grid, forward_transform, inverse_transform, ComplexField, SpectralField};

const I: Complex64 = Complex64::new(0.0, 1.0);

/// Smallest admissible |z(α) − z(α−β)| relative to the arc (L/2π)|β|.
const CHORD_RATIO_MIN: f64 = 1e-6;

/// Vorticity strength ω with ω̂(0) = 0, and the Picard sweeps used to get it.
#[derive(Clone, Debug, PartialEq)]
pub struct VorticityField {
    pub omega: SpectralField,
    pub iterations: usize,
}

/// Picard settings for the vorticity identity.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PicardOptions {
    pub tol: f64,
    pub max_iter: usize,
}

impl Default for PicardOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 200,
        }
    }
}

/// Alternating-point discretization of conj(BR) on the reconstructed curve.
///
/// conj(BR)(α_j) = (1/2πi) Σ_{m odd} 2h ω(α_j − β_m)/(z(α_j) − z(α_j − β_m)),
/// with β_m = mh, so the singular point β = 0 is never sampled.
pub struct ContourKernel {
    g: usize,
    length: f64,
    mean_angle: f64,
    tangent: Vec<Complex64>,
    theta_a: Vec<f64>,
    shifts: Vec<usize>,
    weights: Vec<Complex64>,
}

impl ContourKernel {
    pub fn new(state: &BubbleState) -> Result<Self> {
        Self::with_grid(state, default_grid(state.n_modes()))
    }

    pub fn with_grid(state: &BubbleState, g: usize) -> Result<Self> {
        let frame = Frame::new(&state.theta, state.mean_angle, g)?;
        let h = 2.0 * PI / g as f64;
        let s = state.length / (2.0 * PI);
        let half = g as i64 / 2;
        let offsets: Vec<i64> = (-(half - 1)..half).step_by(2).collect();
        let cnt = offsets.len();
        let coef = Complex64::new(2.0 * h, 0.0) / (2.0 * PI * I);
        let mut weights = vec![Complex64::new(0.0, 0.0); g * cnt];
        for j in 0..g {
            for (i, &m) in offsets.iter().enumerate() {
                let jm = (j as i64 - m).rem_euclid(g as i64) as usize;
                let beta = m as f64 * h;
                let dz = s * (frame.anti[j] - frame.anti[jm] + frame.e0 * beta);
                let ratio = dz.norm() / (s * beta.abs());
                if !(ratio >= CHORD_RATIO_MIN) {
                    return Err(Error::NearSelfIntersection { ratio, index: j });
                }
                weights[j * cnt + i] = coef / dz;
            }
        }
        let shifts = offsets.iter().map(|m| (-m).rem_euclid(g as i64) as usize).collect();
        let theta_a = inverse_transform(&state.theta.derivative(1), g)?;
        Ok(Self {
            g,
            length: state.length,
            mean_angle: state.mean_angle,
            tangent: frame.e,
            theta_a,
            shifts,
            weights,
        })
    }

    pub fn grid(&self) -> usize {
        self.g
    }

    /// Samples of e^{i(α+ϑ(α))}.
    pub fn tangent(&self) -> &[Complex64] {
        &self.tangent
    }

    /// Samples of θ_α.
    pub fn theta_alpha(&self) -> &[f64] {
        &self.theta_a
    }

    /// Band limit of fields sampled on this grid.
    pub fn band(&self) -> usize {
        self.g / 2 - 1
    }

    /// conj(BR)(ω) at every grid point from grid samples of ω.
    pub fn conj_br(&self, omega: &[f64]) -> Vec<Complex64> {
        let g = self.g;
        let cnt = self.shifts.len();
        (0..g)
            .map(|j| {
                let row = &self.weights[j * cnt..(j + 1) * cnt];
                let mut acc = Complex64::new(0.0, 0.0);
                for (w, &sh) in row.iter().zip(&self.shifts) {
                    let mut idx = j + sh;
                    if idx >= g {
                        idx -= g;
                    }
                    acc += w * omega[idx];
                }
                acc
            })
            .collect()
    }

    /// U = Re(conj(BR)·i e^{i(α+ϑ)}).
    pub fn normal_samples(&self, br: &[Complex64]) -> Vec<f64> {
        br.iter().zip(&self.tangent).map(|(b, e)| (b * I * e).re).collect()
    }

    /// D = −Re(conj(BR)·e^{i(α+ϑ)}).
    pub fn d_samples(&self, br: &[Complex64]) -> Vec<f64> {
        br.iter().zip(&self.tangent).map(|(b, e)| -(b * e).re).collect()
    }

    fn samples_of(&self, f: &SpectralField) -> Result<Vec<f64>> {
        inverse_transform(f, self.g)
    }

    fn field_of(&self, samples: &[f64]) -> SpectralField {
        forward_transform(samples, self.band()).expect("band fits the grid")
    }

    /// Forcing 2A_σ(2π/L)θ_αα − 2A_ρ(L/2π)sin(α+ϑ), mean removed.
    fn forcing(&self, state: &BubbleState, params: &PhysicalParams) -> Result<SpectralField> {
        let l = self.length;
        let th_aa = self.samples_of(&state.theta.derivative(2))?;
        let f: Vec<f64> = th_aa
            .iter()
            .zip(&self.tangent)
            .map(|(t, e)| 2.0 * params.a_sigma * (2.0 * PI / l) * t - 2.0 * params.a_rho * (l / (2.0 * PI)) * e.im)
            .collect();
        let mut f = self.field_of(&f);
        f.set_coeff(0, Complex64::new(0.0, 0.0));
        Ok(f)
    }

    fn sweep(&self, params: &PhysicalParams, forcing: &SpectralField, omega: &SpectralField) -> Result<SpectralField> {
        let br = self.conj_br(&self.samples_of(omega)?);
        let d = self.d_samples(&br);
        let mut next = &self.field_of(&d).scale(2.0 * params.a_mu * self.length / (2.0 * PI)) + forcing;
        next.set_coeff(0, Complex64::new(0.0, 0.0));
        Ok(next)
    }

    /// Right-hand side of the vorticity identity evaluated at `omega`.
    pub fn vorticity_map(&self, state: &BubbleState, params: &PhysicalParams, omega: &SpectralField) -> Result<SpectralField> {
        self.sweep(params, &self.forcing(state, params)?, &omega.with_modes(self.band()))
    }

    /// Picard iteration for ω = 2A_μ(L/2π)D(ω) + forcing.
    pub fn solve_vorticity(&self, state: &BubbleState, params: &PhysicalParams, opts: PicardOptions) -> Result<VorticityField> {
        let forcing = self.forcing(state, params)?;
        if params.a_mu == 0.0 {
            return Ok(VorticityField {
                omega: forcing,
                iterations: 0,
            });
        }
        let mut omega = forcing.clone();
        let mut last = f64::INFINITY;
        for it in 1..=opts.max_iter {
            let next = self.sweep(params, &forcing, &omega)?;
            last = (&next - &omega).wiener_norm(0.0, None);
            omega = next;
            if last < opts.tol {
                return Ok(VorticityField { omega, iterations: it });
            }
        }
        Err(Error::NonConvergence {
            solver: "vorticity Picard iteration",
            iterations: opts.max_iter,
            last_update: last,
        })
    }

    /// T = A[(1+θ_α)U] + A_ρ sin ϑ̂(0) from grid samples of U.
    pub fn tangential_from_samples(&self, u: &[f64], params: &PhysicalParams) -> SpectralField {
        let q: Vec<f64> = u.iter().zip(&self.theta_a).map(|(u, t)| (1.0 + t) * u).collect();
        let mut t = self.field_of(&q).mean_free_antiderivative();
        let c0 = t.mean() + params.a_rho * self.mean_angle.sin();
        t.set_coeff(0, Complex64::new(c0, 0.0));
        t
    }
}

fn kernel_for(state: &BubbleState, n_extra: usize) -> Result<ContourKernel> {
    let g = default_grid(state.n_modes()).max(2 * n_extra + 2);
    ContourKernel::with_grid(state, g + g % 2)
}

/// Samples of conj(BR)(ω) on the state's default grid.
pub fn birkhoff_rott(state: &BubbleState, w: &VorticityField) -> Result<Vec<Complex64>> {
    let k = kernel_for(state, w.omega.n_modes())?;
    Ok(k.conj_br(&inverse_transform(&w.omega, k.grid())?))
}

/// U(α) = Re(conj(BR)(ω) i e^{i(α+ϑ)}).
pub fn normal_velocity(state: &BubbleState, w: &VorticityField) -> Result<SpectralField> {
    let k = kernel_for(state, w.omega.n_modes())?;
    let br = k.conj_br(&inverse_transform(&w.omega, k.grid())?);
    Ok(k.field_of(&k.normal_samples(&br)))
}

/// D(ω)(α) = −Re(conj(BR)(ω) e^{i(α+ϑ)}).
pub fn d_operator(state: &BubbleState, w: &VorticityField) -> Result<SpectralField> {
    let k = kernel_for(state, w.omega.n_modes())?;
    let br = k.conj_br(&inverse_transform(&w.omega, k.grid())?);
    Ok(k.field_of(&k.d_samples(&br)))
}

pub fn solve_vorticity(state: &BubbleState, params: &PhysicalParams, tol: f64, max_iter: usize) -> Result<VorticityField> {
    ContourKernel::new(state)?.solve_vorticity(state, params, PicardOptions { tol, max_iter })
}

/// T(α) = ∫₀^α(1+θ_α)U − (α/2π)∫(1+θ_α)U + A_ρ sin ϑ̂(0).
pub fn tangential_velocity(state: &BubbleState, u: &SpectralField, params: &PhysicalParams) -> Result<SpectralField> {
    let k = kernel_for(state, u.n_modes())?;
    Ok(k.tangential_from_samples(&inverse_transform(u, k.grid())?, params))
}

/// ω₀ = −A_ρ(L/π) sin(α+ϑ̂(0)).
pub fn omega_zero(state: &BubbleState, params: &PhysicalParams) -> VorticityField {
    let amp = -params.a_rho * state.length / PI;
    VorticityField {
        omega: SpectralField::sine(state.n_modes().max(1), 1, amp, state.mean_angle),
        iterations: 0,
    }
}

/// 1 − e^{−iβ} = 2sin²(β/2) + i sin β, accurate as β → 0.
#[inline]
fn one_minus_exp(b: f64) -> Complex64 {
    let s = (0.5 * b).sin();
    Complex64::new(2.0 * s * s, b.sin())
}

fn neg_one_cache() -> &'static RwLock<HashMap<i64, Complex64>> {
    static CACHE: OnceLock<RwLock<HashMap<i64, Complex64>>> = OnceLock::new();
    CACHE.get_or_init(|| RwLock::new(HashMap::new()))
}

/// (1/π) pv∫ e^{−i(k+1)β} iβ/(1−e^{−iβ})² dβ, folded onto (0, π).
fn i_neg_one_quadrature(k: i64) -> Complex64 {
    let f = |b: f64| {
        let d = one_minus_exp(b);
        Complex64::from_polar(1.0, -((k + 1) as f64) * b) * I * b / (d * d)
    };
    let rule = GaussLegendre::new(20);
    let panels = 16 + 2 * (k + 1).unsigned_abs() as usize;
    rule.panels(0.0, PI, panels, |b| f(b) + f(-b)) / PI
}

fn i_neg_one(k: i64) -> Complex64 {
    if let Some(v) = neg_one_cache().read().expect("cache lock").get(&k) {
        return *v;
    }
    let v = i_neg_one_quadrature(k);
    neg_one_cache().write().expect("cache lock").insert(k, v);
    v
}

/// Fill the k₁ = −1 cache for |k| ≤ kmax.
pub fn prime_r_multiplier(kmax: usize) {
    let missing: Vec<i64> = {
        let c = neg_one_cache().read().expect("cache lock");
        (-(kmax as i64)..=kmax as i64).filter(|k| !c.contains_key(k)).collect()
    };
    if missing.is_empty() {
        return;
    }
    let vals: Vec<(i64, Complex64)> = missing.into_iter().map(|k| (k, i_neg_one_quadrature(k))).collect();
    neg_one_cache().write().expect("cache lock").extend(vals);
}

/// I(k, k₁), the Fourier multiplier of R.
pub fn r_multiplier(k: i64, k1: i64) -> Complex64 {
    // j₁(ℓ) = 1 for ℓ ≤ 0 and −1 for ℓ ≥ 1; both branches count the nonpositive arguments.
    if k1 > -1 {
        let terms = k1 + 1;
        let n_le = (k1 - k + 1).clamp(0, terms);
        Complex64::new((2 * n_le - terms) as f64 / terms as f64, 0.0)
    } else if k1 <= -2 {
        let terms = -1 - k1;
        let first = (k - k1).max(1);
        let n_le = (terms - first + 1).clamp(0, terms);
        Complex64::new((2 * n_le - terms) as f64 / terms as f64, 0.0)
    } else {
        i_neg_one(k)
    }
}

/// R̂(f)(k) = Σ_{k₁} f̂(k−k₁) θ̂(k₁) I(k,k₁), using θ from `state`.
pub fn apply_r(state: &BubbleState, f: &SpectralField) -> ComplexField {
    let nt = state.n_modes() as i64;
    let nf = f.n_modes() as i64;
    let n = nt + nf;
    prime_r_multiplier(n as usize);
    let mut out = ComplexField::zeros(n as usize);
    for k in -n..=n {
        let mut acc = Complex64::new(0.0, 0.0);
        for k1 in -nt..=nt {
            if k1 == 0 || (k - k1).abs() > nf {
                continue;
            }
            acc += f.coeff(k - k1) * state.theta.coeff(k1) * r_multiplier(k, k1);
        }
        out.set_coeff(k, acc);
    }
    out
}

/// Physical-space evaluation of
/// R(f)(α) = (i/π) pv∫ f(α−β) β/(1−e^{−iβ})² ∫₀¹ e^{i(s−1)β} θ(α+(s−1)β) ds dβ.
pub fn apply_r_quadrature(theta: &SpectralField, f: &SpectralField, alpha: f64) -> Complex64 {
    let nt = theta.n_modes();
    let beta_rule = GaussLegendre::new(20);
    let s_rule = GaussLegendre::new(16);
    let s_panels = 1 + nt / 2;
    let integrand = |b: f64| {
        let inner: Complex64 = s_rule.panels(0.0, 1.0, s_panels, |s| {
            let x = (s - 1.0) * b;
            Complex64::from_polar(1.0, x) * theta.eval(alpha + x)
        });
        let d = one_minus_exp(b);
        f.eval(alpha - b) * b / (d * d) * inner
    };
    let panels = 8 + nt + f.n_modes();
    let folded: Complex64 = beta_rule.panels(0.0, PI, panels, |b| integrand(b) + integrand(-b));
    I / PI * folded
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::BubbleState;
    use approx::assert_abs_diff_eq;

    fn params(a_mu: f64, a_rho: f64) -> PhysicalParams {
        PhysicalParams::new(a_mu, 1.0, a_rho, 1.0).unwrap()
    }

    #[test]
    fn circle_velocities() {
        let th0 = 0.3;
        let st = BubbleState::circle(16, 1.0, th0, Complex64::new(0.0, 0.0));
        let p = params(0.4, 1.3);
        let w = solve_vorticity(&st, &p, 1e-12, 200).unwrap();
        assert_eq!(w.iterations, 1);
        let w0 = omega_zero(&st, &p);
        assert!((&w.omega - &w0.omega).wiener_norm(0.0, None) < 1e-12);
        let u = normal_velocity(&st, &w).unwrap();
        let expect = SpectralField::cosine(1, 1, p.a_rho, th0);
        assert!((&u - &expect).wiener_norm(0.0, None) < 1e-12);
        let d = d_operator(&st, &w0).unwrap();
        assert!(d.wiener_norm(0.0, None) < 1e-12);
        let t = tangential_velocity(&st, &u, &p).unwrap();
        let expect = SpectralField::sine(1, 1, p.a_rho, th0);
        assert!((&t - &expect).wiener_norm(0.0, None) < 1e-12);
    }

    #[test]
    fn zero_vorticity_gives_zero_velocity() {
        let st = BubbleState::new(SpectralField::cosine(8, 2, 0.1, 0.0), 0.0, 1.0, Complex64::new(0.0, 0.0)).unwrap();
        let w = VorticityField {
            omega: SpectralField::zeros(8),
            iterations: 0,
        };
        assert!(birkhoff_rott(&st, &w).unwrap().iter().all(|z| z.norm() == 0.0));
        assert_eq!(normal_velocity(&st, &w).unwrap().wiener_norm(0.0, None), 0.0);
    }

    #[test]
    fn hilbert_on_circle() {
        let st = BubbleState::circle(16, 1.0, 0.0, Complex64::new(0.0, 0.0));
        for k in 1..6 {
            let w = VorticityField {
                omega: SpectralField::sine(16, k, 1.0, 0.0),
                iterations: 0,
            };
            let u = normal_velocity(&st, &w).unwrap();
            let expect = w.omega.hilbert().scale(PI / st.length);
            assert!((&u - &expect).wiener_norm(0.0, None) < 1e-10);
        }
    }

    #[test]
    fn tangential_frame_choices() {
        let st = BubbleState::circle(8, 1.0, 0.0, Complex64::new(0.0, 0.0));
        let zero = SpectralField::zeros(8);
        let p = params(0.0, 2.0);
        assert_eq!(tangential_velocity(&st, &zero, &p).unwrap().wiener_norm(0.0, None), 0.0);
        let st = BubbleState::circle(8, 1.0, 0.5 * PI, Complex64::new(0.0, 0.0));
        let t = tangential_velocity(&st, &zero, &p).unwrap();
        assert_abs_diff_eq!(t.mean(), 2.0, epsilon = 1e-15);
        assert!(t.wiener_norm(0.5, None) < 1e-15);
    }

    #[test]
    fn explicit_vorticity_without_viscosity_contrast() {
        let st = BubbleState::new(SpectralField::cosine(8, 2, 0.1, 0.0), 0.2, 1.0, Complex64::new(0.0, 0.0)).unwrap();
        let w = solve_vorticity(&st, &params(0.0, 1.0), 1e-12, 5).unwrap();
        assert_eq!(w.iterations, 0);
    }

    #[test]
    fn multiplier_values() {
        for k in -6..=6 {
            assert_abs_diff_eq!(r_multiplier(k, 0).re, if k <= 0 { 1.0 } else { -1.0 });
            for k1 in [-5, -3, -2, 1, 2, 4] {
                assert!(r_multiplier(k, k1).norm() <= 1.0 + 1e-15);
            }
        }
    }

    #[test]
    fn neg_one_quadrature_converged() {
        for k in [-7, -1, 0, 3, 20] {
            let fine: Complex64 = GaussLegendre::new(24)
                .adaptive(0.0, PI, 1e-14, |b| {
                    let f = |b: f64| {
                        let d = one_minus_exp(b);
                        Complex64::from_polar(1.0, -((k + 1) as f64) * b) * I * b / (d * d)
                    };
                    f(b) + f(-b)
                })
                .unwrap()
                / PI;
            assert!((r_multiplier(k, -1) - fine).norm() < 1e-12);
        }
    }
}
