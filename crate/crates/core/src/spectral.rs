//! Fourier representation of 2π-periodic fields on the grid α_j = −π + jh.
//!
//! Coefficients follow ĝ(k) = (1/2π)∫ g(α) e^{−ikα} dα, so a field is
//! g(α) = Σ_k ĝ(k) e^{ikα}.

use std::cell::RefCell;
use std::f64::consts::PI;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const I: Complex64 = Complex64::new(0.0, 1.0);

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

fn fft_in_place(buf: &mut [Complex64], inverse: bool) {
    let fft = PLANNER.with(|p| {
        let mut p = p.borrow_mut();
        if inverse {
            p.plan_fft_inverse(buf.len())
        } else {
            p.plan_fft_forward(buf.len())
        }
    });
    fft.process(buf);
}

/// Signed frequency of slot `i` in natural FFT order.
#[inline]
pub(crate) fn freq(i: usize, g: usize) -> i64 {
    if i < g / 2 {
        i as i64
    } else {
        i as i64 - g as i64
    }
}

#[inline]
fn slot(k: i64, g: usize) -> usize {
    k.rem_euclid(g as i64) as usize
}

#[inline]
fn parity(i: usize) -> f64 {
    if i % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// Full-grid coefficients of complex samples, natural FFT order.
pub(crate) fn grid_coeffs(samples: &[Complex64]) -> Vec<Complex64> {
    let g = samples.len();
    let mut buf = samples.to_vec();
    fft_in_place(&mut buf, false);
    let inv = 1.0 / g as f64;
    for (i, c) in buf.iter_mut().enumerate() {
        *c *= parity(i) * inv;
    }
    buf
}

/// Inverse of [`grid_coeffs`].
pub(crate) fn grid_samples(coeffs: &[Complex64]) -> Vec<Complex64> {
    let mut buf: Vec<Complex64> = coeffs
        .iter()
        .enumerate()
        .map(|(i, c)| c * parity(i))
        .collect();
    fft_in_place(&mut buf, true);
    buf
}

/// Uniform grid α_j = −π + 2πj/g.
pub fn grid_points(g: usize) -> Vec<f64> {
    let h = 2.0 * PI / g as f64;
    (0..g).map(|j| -PI + h * j as f64).collect()
}

/// Default physical grid for a field with `n` modes: 2M points with M = 2N.
pub fn default_grid(n: usize) -> usize {
    (4 * n).max(64)
}

fn check_grid(g: usize, n: usize) -> Result<()> {
    let needed = 2 * n + 2;
    if g % 2 != 0 || g < needed {
        return Err(Error::GridTooCoarse {
            grid: g,
            n_modes: n,
            needed,
        });
    }
    Ok(())
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// Time-dependent analytic weight e^{ν(t)|k|}.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnalyticWeight {
    pub nu0: f64,
    pub t: f64,
}

impl AnalyticWeight {
    pub fn new(nu0: f64, t: f64) -> Result<Self> {
        if !(nu0 >= 0.0) {
            return Err(crate::error::invalid("nu0", "must be nonnegative"));
        }
        if !(t >= 0.0) {
            return Err(crate::error::invalid("t", "must be nonnegative"));
        }
        Ok(Self { nu0, t })
    }

    /// ν(t) = ν₀ t/(1+t).
    pub fn nu(&self) -> f64 {
        self.nu0 * self.t / (1.0 + self.t)
    }
}

/// Fourier coefficients of a real 2π-periodic function, modes −N..N.
///
/// Only k ≥ 0 is stored; negative modes are conjugates, so the reality
/// condition holds by construction.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(into = "FieldRepr", try_from = "FieldRepr")]
pub struct SpectralField {
    coeffs: Vec<Complex64>,
}

#[derive(Serialize, Deserialize)]
struct FieldRepr {
    n_modes: usize,
    re: Vec<f64>,
    im: Vec<f64>,
}

impl From<SpectralField> for FieldRepr {
    fn from(f: SpectralField) -> Self {
        Self {
            n_modes: f.n_modes(),
            re: f.coeffs.iter().map(|c| c.re).collect(),
            im: f.coeffs.iter().map(|c| c.im).collect(),
        }
    }
}

impl TryFrom<FieldRepr> for SpectralField {
    type Error = Error;

    fn try_from(r: FieldRepr) -> Result<Self> {
        if r.re.len() != r.n_modes + 1 || r.im.len() != r.n_modes + 1 {
            return Err(Error::Serialization(format!(
                "expected {} coefficients, got re={} im={}",
                r.n_modes + 1,
                r.re.len(),
                r.im.len()
            )));
        }
        let coeffs = r
            .re
            .into_iter()
            .zip(r.im)
            .map(|(a, b)| Complex64::new(a, b))
            .collect();
        Ok(Self::from_nonnegative(coeffs))
    }
}

impl SpectralField {
    pub fn zeros(n: usize) -> Self {
        Self {
            coeffs: vec![Complex64::new(0.0, 0.0); n + 1],
        }
    }

    /// Build from coefficients k = 0..=N. The imaginary part of the mean is dropped.
    pub fn from_nonnegative(mut coeffs: Vec<Complex64>) -> Self {
        if coeffs.is_empty() {
            coeffs.push(Complex64::new(0.0, 0.0));
        }
        coeffs[0].im = 0.0;
        Self { coeffs }
    }

    pub fn constant(n: usize, c: f64) -> Self {
        let mut f = Self::zeros(n);
        f.coeffs[0] = Complex64::new(c, 0.0);
        f
    }

    /// amp·cos(kα + phase).
    pub fn cosine(n: usize, k: usize, amp: f64, phase: f64) -> Self {
        let mut f = Self::zeros(n);
        if k == 0 {
            f.coeffs[0] = Complex64::new(amp * phase.cos(), 0.0);
        } else if k <= n {
            f.coeffs[k] = 0.5 * amp * Complex64::from_polar(1.0, phase);
        }
        f
    }

    /// amp·sin(kα + phase).
    pub fn sine(n: usize, k: usize, amp: f64, phase: f64) -> Self {
        Self::cosine(n, k, amp, phase - 0.5 * PI)
    }

    pub fn n_modes(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Coefficients for k = 0..=N.
    pub fn nonnegative(&self) -> &[Complex64] {
        &self.coeffs
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        let a = k.unsigned_abs() as usize;
        match self.coeffs.get(a) {
            Some(c) if k >= 0 => *c,
            Some(c) => c.conj(),
            None => Complex64::new(0.0, 0.0),
        }
    }

    /// Set ĝ(k) and mirror ĝ(−k). Writes beyond N are ignored.
    pub fn set_coeff(&mut self, k: i64, v: Complex64) {
        let a = k.unsigned_abs() as usize;
        if a >= self.coeffs.len() {
            return;
        }
        let mut v = if k >= 0 { v } else { v.conj() };
        if a == 0 {
            v.im = 0.0;
        }
        self.coeffs[a] = v;
    }

    pub fn mean(&self) -> f64 {
        self.coeffs[0].re
    }

    /// Copy with storage for exactly `n` modes (pads with zeros or drops |k| > n).
    pub fn with_modes(&self, n: usize) -> Self {
        let mut coeffs = self.coeffs.clone();
        coeffs.resize(n + 1, Complex64::new(0.0, 0.0));
        Self { coeffs }
    }

    /// Point evaluation by direct summation.
    pub fn eval(&self, alpha: f64) -> f64 {
        let tail = compensated_sum(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .map(|(k, c)| 2.0 * (c * Complex64::from_polar(1.0, k as f64 * alpha)).re),
        );
        self.coeffs[0].re + tail
    }

    fn map_modes(&self, m: impl Fn(i64) -> Complex64) -> Self {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| m(k as i64) * c)
            .collect();
        Self::from_nonnegative(coeffs)
    }

    /// Periodic Hilbert transform, multiplier −i·sgn(k).
    pub fn hilbert(&self) -> Self {
        self.map_modes(|k| if k == 0 { 0.0.into() } else { -I })
    }

    /// Λ^s, multiplier |k|^s.
    pub fn lambda_pow(&self, s: f64) -> Self {
        self.map_modes(|k| (k as f64).powf(s).into())
    }

    /// ∂_α^order, multiplier (ik)^order.
    pub fn derivative(&self, order: u32) -> Self {
        self.map_modes(|k| (I * k as f64).powu(order))
    }

    /// α ↦ ∫₀^α f − (α/2π)∫_{−π}^{π} f.
    pub fn mean_free_antiderivative(&self) -> Self {
        let mut out = Self::zeros(self.n_modes());
        for k in 1..self.coeffs.len() {
            out.coeffs[k] = -I * self.coeffs[k] / k as f64;
        }
        // Σ_{j≠0} (i/j) f̂(j) = −2 Σ_{j≥1} Im f̂(j)/j, making the value at α = 0 vanish.
        let c0 = compensated_sum(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .rev()
                .map(|(j, c)| -2.0 * c.im / j as f64),
        );
        out.coeffs[0] = Complex64::new(c0, 0.0);
        out
    }

    /// Σ_{k≠0} e^{ν|k|}|k|^s|f̂(k)|, plus |f̂(0)| when s = 0.
    pub fn wiener_norm(&self, s: f64, weight: Option<&AnalyticWeight>) -> f64 {
        let nu = weight.map_or(0.0, AnalyticWeight::nu);
        let tail = compensated_sum(self.coeffs.iter().enumerate().skip(1).rev().map(|(k, c)| {
            let k = k as f64;
            2.0 * (nu * k).exp() * k.powf(s) * c.norm()
        }));
        if s == 0.0 {
            tail + self.coeffs[0].norm()
        } else {
            tail
        }
    }

    /// The cut-off J_{N_cut}: zero every |k| > n_cut. Storage size is unchanged.
    pub fn truncate(&self, n_cut: usize) -> Self {
        let mut out = self.clone();
        for c in out.coeffs.iter_mut().skip(n_cut + 1) {
            *c = Complex64::new(0.0, 0.0);
        }
        out
    }

    /// Pointwise product, computed alias-free and truncated to max(N_f, N_g).
    pub fn convolve(&self, other: &Self) -> Self {
        let n = self.n_modes().max(other.n_modes());
        let g = (2 * (2 * n + 1)).next_power_of_two();
        let a = inverse_transform(self, g).expect("grid sized for product");
        let b = inverse_transform(other, g).expect("grid sized for product");
        let prod: Vec<f64> = a.iter().zip(&b).map(|(x, y)| x * y).collect();
        forward_transform(&prod, n).expect("grid sized for product")
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            coeffs: self.coeffs.iter().map(|c| c * s).collect(),
        }
    }

    fn zip_with(&self, other: &Self, op: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        let n = self.n_modes().max(other.n_modes());
        let coeffs = (0..=n as i64)
            .map(|k| op(self.coeff(k), other.coeff(k)))
            .collect();
        Self::from_nonnegative(coeffs)
    }
}

impl Add for &SpectralField {
    type Output = SpectralField;
    fn add(self, rhs: Self) -> SpectralField {
        self.zip_with(rhs, |a, b| a + b)
    }
}

impl Sub for &SpectralField {
    type Output = SpectralField;
    fn sub(self, rhs: Self) -> SpectralField {
        self.zip_with(rhs, |a, b| a - b)
    }
}

impl Mul<f64> for &SpectralField {
    type Output = SpectralField;
    fn mul(self, rhs: f64) -> SpectralField {
        self.scale(rhs)
    }
}

impl Neg for &SpectralField {
    type Output = SpectralField;
    fn neg(self) -> SpectralField {
        self.scale(-1.0)
    }
}

/// coeff(k) = (1/2M) Σ_j samples_j e^{−ikα_j} for |k| ≤ n.
pub fn forward_transform(samples: &[f64], n: usize) -> Result<SpectralField> {
    let g = samples.len();
    check_grid(g, n)?;
    let buf: Vec<Complex64> = samples.iter().map(|&x| Complex64::new(x, 0.0)).collect();
    let full = grid_coeffs(&buf);
    Ok(SpectralField::from_nonnegative(full[..=n].to_vec()))
}

/// Samples of `f` on a grid of `g` points.
pub fn inverse_transform(f: &SpectralField, g: usize) -> Result<Vec<f64>> {
    check_grid(g, f.n_modes())?;
    let mut buf = vec![Complex64::new(0.0, 0.0); g];
    for (k, c) in f.coeffs.iter().enumerate() {
        buf[k] = *c;
        if k > 0 {
            buf[g - k] = c.conj();
        }
    }
    Ok(grid_samples(&buf).into_iter().map(|z| z.re).collect())
}

/// Fourier coefficients of a complex-valued periodic function, modes −N..N.
#[derive(Clone, Debug, PartialEq)]
pub struct ComplexField {
    n: usize,
    coeffs: Vec<Complex64>,
}

impl ComplexField {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            coeffs: vec![Complex64::new(0.0, 0.0); 2 * n + 1],
        }
    }

    pub fn from_real(f: &SpectralField) -> Self {
        let n = f.n_modes();
        let mut out = Self::zeros(n);
        for k in -(n as i64)..=n as i64 {
            out.set_coeff(k, f.coeff(k));
        }
        out
    }

    pub fn from_samples(samples: &[Complex64], n: usize) -> Result<Self> {
        let g = samples.len();
        check_grid(g, n)?;
        let full = grid_coeffs(samples);
        let mut out = Self::zeros(n);
        for k in -(n as i64)..=n as i64 {
            out.set_coeff(k, full[slot(k, g)]);
        }
        Ok(out)
    }

    pub fn to_samples(&self, g: usize) -> Result<Vec<Complex64>> {
        check_grid(g, self.n)?;
        let mut buf = vec![Complex64::new(0.0, 0.0); g];
        for k in -(self.n as i64)..=self.n as i64 {
            buf[slot(k, g)] = self.coeff(k);
        }
        Ok(grid_samples(&buf))
    }

    pub fn n_modes(&self) -> usize {
        self.n
    }

    pub fn coeff(&self, k: i64) -> Complex64 {
        if k.unsigned_abs() as usize > self.n {
            return Complex64::new(0.0, 0.0);
        }
        self.coeffs[(k + self.n as i64) as usize]
    }

    pub fn set_coeff(&mut self, k: i64, v: Complex64) {
        if k.unsigned_abs() as usize <= self.n {
            self.coeffs[(k + self.n as i64) as usize] = v;
        }
    }

    pub fn eval(&self, alpha: f64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for k in -(self.n as i64)..=self.n as i64 {
            acc += self.coeff(k) * Complex64::from_polar(1.0, k as f64 * alpha);
        }
        acc
    }

    /// Coefficients of Re f: (f̂(k) + conj f̂(−k))/2.
    pub fn real_part(&self) -> SpectralField {
        let coeffs = (0..=self.n as i64)
            .map(|k| 0.5 * (self.coeff(k) + self.coeff(-k).conj()))
            .collect();
        SpectralField::from_nonnegative(coeffs)
    }

    /// Coefficients of Im f: (f̂(k) − conj f̂(−k))/(2i).
    pub fn imag_part(&self) -> SpectralField {
        let coeffs = (0..=self.n as i64)
            .map(|k| (self.coeff(k) - self.coeff(-k).conj()) / (2.0 * I))
            .collect();
        SpectralField::from_nonnegative(coeffs)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn samples_of(g: usize, f: impl Fn(f64) -> f64) -> Vec<f64> {
        grid_points(g).into_iter().map(f).collect()
    }

    #[test]
    fn forward_single_modes() {
        let g = 64;
        let f = forward_transform(&samples_of(g, |a| 0.2 * (2.0 * a).cos()), 16).unwrap();
        assert_abs_diff_eq!(f.coeff(2).re, 0.1, epsilon = 1e-15);
        assert_abs_diff_eq!(f.coeff(-2).re, 0.1, epsilon = 1e-15);
        for k in [0, 1, 3, 7] {
            assert!(f.coeff(k).norm() < 1e-15);
        }

        let c = forward_transform(&samples_of(g, |_| 1.7), 16).unwrap();
        assert_abs_diff_eq!(c.coeff(0).re, 1.7, epsilon = 1e-15);
        assert!(c.wiener_norm(1.0, None) < 1e-14);

        let s = forward_transform(&samples_of(g, |a| (3.0 * a).sin()), 16).unwrap();
        assert_abs_diff_eq!(s.coeff(3).im, -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s.coeff(-3).im, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn grid_checks() {
        assert!(forward_transform(&[0.0; 16], 7).is_ok());
        assert!(matches!(
            forward_transform(&[0.0; 16], 8),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(inverse_transform(&SpectralField::zeros(4), 9).is_err());
    }

    #[test]
    fn inverse_cosine_and_zero() {
        let f = SpectralField::cosine(4, 1, 1.0, 0.0);
        let x = inverse_transform(&f, 32).unwrap();
        for (v, a) in x.iter().zip(grid_points(32)) {
            assert_abs_diff_eq!(*v, a.cos(), epsilon = 1e-15);
        }
        let z = inverse_transform(&SpectralField::zeros(4), 32).unwrap();
        assert!(z.iter().all(|v| *v == 0.0));
    }

    #[test]
    fn multipliers_on_modes() {
        let n = 8;
        let c = SpectralField::cosine(n, 3, 1.0, 0.0);
        let s = SpectralField::sine(n, 3, 1.0, 0.0);
        assert_abs_diff_eq!((&c.hilbert() - &s).wiener_norm(0.0, None), 0.0, epsilon = 1e-15);
        let s1 = SpectralField::sine(n, 1, 1.0, 0.0);
        let c1 = SpectralField::cosine(n, 1, 1.0, 0.0);
        assert_abs_diff_eq!((&s1.hilbert() + &c1).wiener_norm(0.0, None), 0.0, epsilon = 1e-15);
        assert_eq!(SpectralField::constant(n, 2.0).hilbert().wiener_norm(0.0, None), 0.0);

        let c2 = SpectralField::cosine(n, 2, 1.0, 0.0);
        assert_abs_diff_eq!((&c2.lambda_pow(3.0) - &c2.scale(8.0)).wiener_norm(0.0, None), 0.0, epsilon = 1e-14);
        assert_eq!(c2.lambda_pow(0.0), c2);

        assert_abs_diff_eq!((&s1.derivative(1) - &c1).wiener_norm(0.0, None), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            (&c.derivative(2) + &c.scale(9.0)).wiener_norm(0.0, None),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn antiderivative_examples() {
        let n = 6;
        let c1 = SpectralField::cosine(n, 1, 1.0, 0.0);
        let s1 = SpectralField::sine(n, 1, 1.0, 0.0);
        assert_abs_diff_eq!((&c1.mean_free_antiderivative() - &s1).wiener_norm(0.0, None), 0.0, epsilon = 1e-15);
        let expect = &SpectralField::constant(n, 1.0) - &c1;
        assert_abs_diff_eq!((&s1.mean_free_antiderivative() - &expect).wiener_norm(0.0, None), 0.0, epsilon = 1e-15);
        assert_eq!(SpectralField::zeros(n).mean_free_antiderivative(), SpectralField::zeros(n));
    }

    #[test]
    fn norm_of_two_modes() {
        let eps = 0.013;
        let th = SpectralField::cosine(4, 2, 2.0 * eps, 0.0);
        assert_abs_diff_eq!(th.wiener_norm(0.5, None), 2.0 * 2f64.sqrt() * eps, epsilon = 1e-16);
        assert_eq!(SpectralField::zeros(4).wiener_norm(0.5, None), 0.0);
    }

    #[test]
    fn weight_at_time_zero_is_flat() {
        let w = AnalyticWeight::new(0.3, 0.0).unwrap();
        assert_eq!(w.nu(), 0.0);
        let w = AnalyticWeight::new(0.3, 1.0).unwrap();
        assert_abs_diff_eq!(w.nu(), 0.15, epsilon = 1e-16);
        assert!(AnalyticWeight::new(-1.0, 0.0).is_err());
    }

    #[test]
    fn truncate_examples() {
        let f = SpectralField::cosine(8, 3, 1.0, 0.2);
        assert_eq!(f.truncate(0).wiener_norm(0.0, None), 0.0);
        assert_eq!(f.truncate(8), f);
        assert_eq!(f.truncate(9), f);
        assert_eq!(f.truncate(3).truncate(3), f.truncate(3));
    }

    #[test]
    fn convolve_examples() {
        let n = 6;
        let c1 = SpectralField::cosine(n, 1, 1.0, 0.0);
        let sq = c1.convolve(&c1);
        let expect = &SpectralField::constant(n, 0.5) + &SpectralField::cosine(n, 2, 0.5, 0.0);
        assert_abs_diff_eq!((&sq - &expect).wiener_norm(0.0, None), 0.0, epsilon = 1e-15);
        let one = SpectralField::constant(n, 1.0);
        let g = SpectralField::sine(n, 5, 0.3, 1.0);
        assert_abs_diff_eq!((&one.convolve(&g) - &g).wiener_norm(0.0, None), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn serde_round_trip() {
        let f = SpectralField::cosine(3, 2, 0.4, 0.7);
        let s = serde_json::to_string(&f).unwrap();
        assert!(s.starts_with("{\"n_modes\":3,"));
        let back: SpectralField = serde_json::from_str(&s).unwrap();
        assert_eq!(back, f);
        assert!(serde_json::from_str::<SpectralField>(r#"{"n_modes":2,"re":[0],"im":[0]}"#).is_err());
    }

    #[test]
    fn complex_parts() {
        let n = 5;
        let mut z = ComplexField::zeros(n);
        z.set_coeff(2, Complex64::new(0.3, -0.1));
        z.set_coeff(-1, Complex64::new(0.2, 0.4));
        let g = 32;
        let s = z.to_samples(g).unwrap();
        let re = inverse_transform(&z.real_part(), g).unwrap();
        let im = inverse_transform(&z.imag_part(), g).unwrap();
        for j in 0..g {
            assert_abs_diff_eq!(s[j].re, re[j], epsilon = 1e-15);
            assert_abs_diff_eq!(s[j].im, im[j], epsilon = 1e-15);
        }
        let back = ComplexField::from_samples(&s, n).unwrap();
        for k in -5..=5 {
            assert!((back.coeff(k) - z.coeff(k)).norm() < 1e-15);
        }
    }
}
