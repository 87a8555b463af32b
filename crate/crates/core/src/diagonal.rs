//! Upper-triangular change of basis diagonalizing the linear mode system.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::geometry::PhysicalParams;
use crate::linear::LinearCoefficients;

const LOG_SWITCH: usize = 40;

/// Dense N×N matrices on modes 1..=N, row-major.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TriangularTransform {
    n: usize,
    s: Vec<Complex64>,
    s_inv: Vec<Complex64>,
}

/// Product of ratios, switching to log-magnitude form after a fixed number of factors.
struct Running {
    steps: usize,
    direct: Complex64,
    log_mag: f64,
    phase: Complex64,
}

impl Running {
    fn one() -> Self {
        Self {
            steps: 0,
            direct: Complex64::new(1.0, 0.0),
            log_mag: 0.0,
            phase: Complex64::new(1.0, 0.0),
        }
    }

    fn mul(&mut self, f: Complex64) {
        self.steps += 1;
        if self.steps <= LOG_SWITCH {
            self.direct *= f;
            if self.steps == LOG_SWITCH {
                let m = self.direct.norm();
                self.log_mag = m.ln();
                self.phase = if m > 0.0 { self.direct / m } else { Complex64::new(0.0, 0.0) };
            }
        } else {
            let m = f.norm();
            self.log_mag += m.ln();
            self.phase = if m > 0.0 { self.phase * (f / m) } else { Complex64::new(0.0, 0.0) };
        }
    }

    fn value(&self) -> Complex64 {
        if self.steps < LOG_SWITCH {
            self.direct
        } else {
            self.phase * self.log_mag.exp()
        }
    }
}

impl TriangularTransform {
    pub fn n_modes(&self) -> usize {
        self.n
    }

    fn at(&self, m: &[Complex64], k: usize, j: usize) -> Complex64 {
        assert!((1..=self.n).contains(&k) && (1..=self.n).contains(&j), "mode index out of range");
        m[(k - 1) * self.n + (j - 1)]
    }

    /// S_{k,j}, 1-based.
    pub fn s(&self, k: usize, j: usize) -> Complex64 {
        self.at(&self.s, k, j)
    }

    /// S⁻¹_{k,j}, 1-based.
    pub fn s_inv(&self, k: usize, j: usize) -> Complex64 {
        self.at(&self.s_inv, k, j)
    }

    pub fn s_matrix(&self) -> &[Complex64] {
        &self.s
    }

    pub fn s_inv_matrix(&self) -> &[Complex64] {
        &self.s_inv
    }

    /// Columns 1..=N − max(4, N/16), free of truncation effects.
    pub fn interior(&self) -> usize {
        self.n.saturating_sub((self.n / 16).max(4))
    }
}

pub fn build_transform(c: &LinearCoefficients, n: usize) -> Result<TriangularTransform> {
    if n < 2 || c.n_modes() < n {
        return Err(invalid("n_modes", format!("need 2 ≤ N ≤ {}, got {n}", c.n_modes())));
    }
    if c.a[2] == 0.0 {
        return Err(invalid("a_sigma", "a(2) vanishes"));
    }
    let zero = Complex64::new(0.0, 0.0);
    let mut s = vec![zero; n * n];
    let mut s_inv = vec![zero; n * n];
    let idx = |k: usize, j: usize| (k - 1) * n + (j - 1);
    s[idx(1, 1)] = Complex64::new(1.0, 0.0);
    s_inv[idx(1, 1)] = Complex64::new(1.0, 0.0);
    for k in 2..=n {
        let mut p = Running::one();
        s_inv[idx(k, k)] = p.value();
        for j in k + 1..=n {
            p.mul(-c.b[j - 1] / (c.a[k] - c.a[j]));
            s_inv[idx(k, j)] = p.value();
        }
    }
    for j in 2..=n {
        let mut p = Running::one();
        s[idx(j, j)] = p.value();
        for k in (2..j).rev() {
            p.mul(c.b[k] / (c.a[k] - c.a[j]));
            s[idx(k, j)] = p.value();
        }
    }
    s_inv[idx(2, 1)] = -c.c1 / c.a[2];
    s[idx(2, 1)] = c.c1 / c.a[2];
    Ok(TriangularTransform { n, s, s_inv })
}

pub(crate) fn matmul(a: &[Complex64], b: &[Complex64], n: usize) -> Vec<Complex64> {
    let mut out = vec![Complex64::new(0.0, 0.0); n * n];
    for i in 0..n {
        for l in 0..n {
            let ail = a[i * n + l];
            if ail == Complex64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..n {
                out[i * n + j] += ail * b[l * n + j];
            }
        }
    }
    out
}

/// The truncated mode matrix: −a(k) on the diagonal, b(k) above it, c(1) at (2,1).
pub fn mode_matrix(c: &LinearCoefficients, n: usize) -> Vec<Complex64> {
    let mut m = vec![Complex64::new(0.0, 0.0); n * n];
    for k in 1..=n {
        m[(k - 1) * n + (k - 1)] = Complex64::new(-c.a[k], 0.0);
        if k < n {
            m[(k - 1) * n + k] = c.b[k];
        }
    }
    if n >= 2 {
        m[n] = c.c1;
    }
    m
}

fn interior_max(m: &[Complex64], n: usize, cols: usize, target: impl Fn(usize, usize) -> Complex64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..cols {
        for j in 0..cols {
            worst = worst.max((m[i * n + j] - target(i, j)).norm());
        }
    }
    worst
}

/// max |S·S⁻¹ − I| and |S⁻¹·S − I| over the interior block.
pub fn verify_inverse(t: &TriangularTransform) -> f64 {
    let n = t.n;
    let cols = t.interior();
    let id = |i: usize, j: usize| Complex64::new(if i == j { 1.0 } else { 0.0 }, 0.0);
    let r1 = interior_max(&matmul(&t.s, &t.s_inv, n), n, cols, id);
    let r2 = interior_max(&matmul(&t.s_inv, &t.s, n), n, cols, id);
    r1.max(r2)
}

/// max |S⁻¹·M·S − diag(−a)| over the interior block.
pub fn verify_diagonalizes(t: &TriangularTransform, c: &LinearCoefficients, n: usize) -> f64 {
    let m = mode_matrix(c, n);
    let conj = matmul(&matmul(&t.s_inv, &m, n), &t.s, n);
    interior_max(&conj, n, t.interior(), |i, j| {
        Complex64::new(if i == j { -c.a[i + 1] } else { 0.0 }, 0.0)
    })
}

/// Maximum column sum of moduli.
pub fn l1_operator_norm(m: &[Complex64], n: usize) -> f64 {
    (0..n)
        .map(|j| (0..n).map(|i| m[i * n + j].norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// (‖S‖, ‖S⁻¹‖) in the ℓ¹ operator norm.
pub fn l1_norms(t: &TriangularTransform) -> (f64, f64) {
    (l1_operator_norm(&t.s, t.n), l1_operator_norm(&t.s_inv, t.n))
}

/// Σ_j y^j/(j!(j+3)!), equal to I₃(2√y)/y^{3/2}.
fn bessel_series(y: f64) -> f64 {
    let mut term = 1.0 / 6.0;
    let mut sum = term;
    for j in 1..200 {
        let jf = j as f64;
        term *= y / (jf * (jf + 3.0));
        sum += term;
        if term <= 1e-17 * sum {
            break;
        }
    }
    sum
}

/// Modified Bessel function I₃ by its power series.
pub fn bessel_i3(z: f64) -> f64 {
    let h = 0.5 * z;
    h.powi(3) * bessel_series(h * h)
}

/// C_S = max{1 + ¼(1−A_μ)x(¾ − log 2), 6·I₃(2√y)/y^{3/2}} with y = (1+A_μ)x.
pub fn cs_bound(p: &PhysicalParams) -> f64 {
    let x = p.gravity_ratio();
    let first = 1.0 + 0.25 * (1.0 - p.a_mu) * x * (0.75 - std::f64::consts::LN_2);
    let second = 6.0 * bessel_series((1.0 + p.a_mu) * x);
    first.max(second)
}

/// Bound on |S⁻¹_{k,k+j}|: y^j·6/(j!(j+3)!).
pub fn entry_decay_bound(p: &PhysicalParams, j: usize) -> f64 {
    let y = (1.0 + p.a_mu) * p.gravity_ratio();
    let mut v = 1.0;
    for m in 1..=j {
        v *= y / (m * (m + 3)) as f64;
    }
    v
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn setup(a_mu: f64, x: f64, n: usize) -> (PhysicalParams, LinearCoefficients, TriangularTransform) {
        let p = PhysicalParams::new(a_mu, 1.0, x, 1.0).unwrap();
        let c = LinearCoefficients::new(&p, 0.3, n);
        let t = build_transform(&c, n).unwrap();
        (p, c, t)
    }

    #[test]
    fn unit_diagonal_and_first_entries() {
        let (_, c, t) = setup(0.5, 2.0, 32);
        for k in 1..=32 {
            assert_eq!(t.s(k, k), Complex64::new(1.0, 0.0));
            assert_eq!(t.s_inv(k, k), Complex64::new(1.0, 0.0));
        }
        let want = -c.b[2] / (c.a[2] - c.a[3]);
        assert!((t.s_inv(2, 3) - want).norm() < 1e-16);
        assert!((t.s_inv(2, 1) + c.c1 / c.a[2]).norm() < 1e-16);
        assert!((t.s(2, 1) - c.c1 / c.a[2]).norm() < 1e-16);
    }

    #[test]
    fn identity_without_gravity() {
        let p = PhysicalParams::new(0.2, 1.0, 0.0, 1.0).unwrap();
        let c = LinearCoefficients::new(&p, 0.0, 16);
        let t = build_transform(&c, 16).unwrap();
        assert_eq!(verify_inverse(&t), 0.0);
        assert_eq!(verify_diagonalizes(&t, &c, 16), 0.0);
    }

    #[test]
    fn inverse_and_diagonalization() {
        let (_, c, t) = setup(0.5, 2.0, 64);
        assert!(verify_inverse(&t) < 1e-12);
        assert!(verify_diagonalizes(&t, &c, 64) < 1e-11);
        let (_, c, t) = setup(0.0, 1.0, 64);
        assert!(verify_diagonalizes(&t, &c, 64) < 1e-11);
    }

    #[test]
    fn log_products_agree_with_direct() {
        let mut r = Running::one();
        let mut d = Complex64::new(1.0, 0.0);
        for i in 1..=60 {
            let f = Complex64::from_polar(0.5 / i as f64, 0.1 * i as f64);
            r.mul(f);
            d *= f;
            assert!((r.value() - d).norm() <= 1e-12 * d.norm());
        }
    }

    #[test]
    fn bessel_values() {
        assert_eq!(bessel_i3(0.0), 0.0);
        let z = 1e-3;
        assert_abs_diff_eq!(bessel_i3(z) / (z.powi(3) / 48.0), 1.0, epsilon = 1e-6);
        // tabulated I₃(2)
        assert_abs_diff_eq!(bessel_i3(2.0), 0.212_739_959_239_852_64, epsilon = 1e-15);
    }

    #[test]
    fn cs_limits() {
        let p = PhysicalParams::new(0.2, 1.0, 1e-12, 1.0).unwrap();
        assert_abs_diff_eq!(cs_bound(&p), 1.0, epsilon = 1e-10);
        let p = PhysicalParams::new(1.0, 1.0, 1e-12, 1.0).unwrap();
        assert_abs_diff_eq!(cs_bound(&p), 1.0, epsilon = 1e-10);
    }
}
