//! Gauss–Legendre quadrature: fixed composite panels and adaptive bisection.

use std::num::NonZeroUsize;
use std::ops::{Add, Mul, Sub};

use num_complex::Complex64;

use crate::error::{Error, Result};

pub trait Quadrand: Copy + Default + Add<Output = Self> + Sub<Output = Self> + Mul<f64, Output = Self> {
    fn magnitude(&self) -> f64;
}

impl Quadrand for f64 {
    fn magnitude(&self) -> f64 {
        self.abs()
    }
}

impl Quadrand for Complex64 {
    fn magnitude(&self) -> f64 {
        self.norm()
    }
}

/// n-point rule on [−1, 1].
#[derive(Clone, Debug)]
pub struct GaussLegendre {
    pairs: Vec<(f64, f64)>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        let n = NonZeroUsize::new(n.max(1)).unwrap();
        let rule = gauss_quad::legendre::GaussLegendre::new(n);
        Self {
            pairs: rule.as_node_weight_pairs().to_vec(),
        }
    }

    pub fn order(&self) -> usize {
        self.pairs.len()
    }

    pub fn integrate<T: Quadrand>(&self, a: f64, b: f64, mut f: impl FnMut(f64) -> T) -> T {
        self.rule(a, b, &mut f)
    }

    fn rule<T: Quadrand>(&self, a: f64, b: f64, f: &mut impl FnMut(f64) -> T) -> T {
        let half = 0.5 * (b - a);
        let mid = 0.5 * (b + a);
        let mut acc = T::default();
        for &(x, w) in &self.pairs {
            acc = acc + f(mid + half * x) * w;
        }
        acc * half
    }

    /// Composite rule on `panels` equal subintervals.
    pub fn panels<T: Quadrand>(&self, a: f64, b: f64, panels: usize, mut f: impl FnMut(f64) -> T) -> T {
        let panels = panels.max(1);
        let h = (b - a) / panels as f64;
        let mut acc = T::default();
        for p in 0..panels {
            let lo = a + h * p as f64;
            acc = acc + self.rule(lo, lo + h, &mut f);
        }
        acc
    }

    /// Adaptive bisection: accept a subinterval when the rule and its two halves agree to
    /// a share of `tol` proportional to the subinterval length.
    pub fn adaptive<T: Quadrand>(&self, a: f64, b: f64, tol: f64, mut f: impl FnMut(f64) -> T) -> Result<T> {
        const MAX_DEPTH: u32 = 40;
        let width = (b - a).abs();
        let mut total = T::default();
        let mut stack = vec![(a, b, self.rule(a, b, &mut f), 0u32)];
        while let Some((lo, hi, whole, depth)) = stack.pop() {
            let mid = 0.5 * (lo + hi);
            let left = self.rule(lo, mid, &mut f);
            let right = self.rule(mid, hi, &mut f);
            let split = left + right;
            let share = tol * (hi - lo).abs() / width;
            if (split - whole).magnitude() <= share.max(f64::EPSILON * split.magnitude()) {
                total = total + split;
            } else if depth >= MAX_DEPTH {
                // Endpoint singularities end here with a negligible piece left over.
                if (split - whole).magnitude() > tol {
                    return Err(Error::Quadrature { tol, a: lo, b: hi });
                }
                total = total + split;
            } else {
                stack.push((mid, hi, right, depth + 1));
                stack.push((lo, mid, left, depth + 1));
            }
        }
        Ok(total)
    }
}
