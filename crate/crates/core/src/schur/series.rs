use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numeric::{fit_power_tail, KahanSum, TailFit};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// Truncated power series `Σ_{n≤N} c_n z^n`. All arithmetic keeps the order
/// fixed by the caller; nothing is extended implicitly.
#[derive(Clone, Debug, PartialEq)]
pub struct PowerSeries {
    pub coeffs: Vec<C64>,
}

impl PowerSeries {
    pub fn new(coeffs: Vec<C64>) -> Self {
        assert!(!coeffs.is_empty(), "power series needs at least one coefficient");
        Self { coeffs }
    }

    pub fn zeros(order: usize) -> Self {
        Self { coeffs: vec![ZERO; order + 1] }
    }

    pub fn constant(c: C64, order: usize) -> Self {
        let mut s = Self::zeros(order);
        s.coeffs[0] = c;
        s
    }

    /// The monomial `z^k`, truncated at `order`.
    pub fn monomial(k: usize, order: usize) -> Self {
        let mut s = Self::zeros(order);
        if k <= order {
            s.coeffs[k] = ONE;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.coeffs.len() - 1
    }

    pub fn get(&self, n: usize) -> C64 {
        self.coeffs.get(n).copied().unwrap_or(ZERO)
    }

    pub fn truncate(&self, order: usize) -> Self {
        let mut c = self.coeffs.clone();
        c.resize(order + 1, ZERO);
        Self { coeffs: c }
    }

    pub fn eval(&self, z: C64) -> C64 {
        self.coeffs.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
    }

    pub fn add(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self { coeffs: (0..=n).map(|k| self.coeffs[k] + other.coeffs[k]).collect() }
    }

    pub fn sub(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        Self { coeffs: (0..=n).map(|k| self.coeffs[k] - other.coeffs[k]).collect() }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self { coeffs: self.coeffs.iter().map(|&c| c * s).collect() }
    }

    pub fn add_constant(&self, s: C64) -> Self {
        let mut out = self.clone();
        out.coeffs[0] += s;
        out
    }

    /// Multiplication by `z`, keeping the order.
    pub fn shift_up(&self) -> Self {
        let mut c = Vec::with_capacity(self.coeffs.len());
        c.push(ZERO);
        c.extend_from_slice(&self.coeffs[..self.coeffs.len() - 1]);
        Self { coeffs: c }
    }

    /// Division by `z` after dropping `c_0`; the order drops by one.
    pub fn shift_down(&self) -> Self {
        if self.coeffs.len() == 1 {
            return Self::zeros(0);
        }
        Self { coeffs: self.coeffs[1..].to_vec() }
    }

    /// Coefficient-wise conjugate: the series of `conj(f(z̄))`.
    pub fn conj_coeffs(&self) -> Self {
        Self { coeffs: self.coeffs.iter().map(|c| c.conj()).collect() }
    }

    pub fn mul(&self, other: &Self) -> Self {
        let n = self.order().min(other.order());
        let mut out = vec![ZERO; n + 1];
        for (i, &a) in self.coeffs.iter().take(n + 1).enumerate() {
            if a == ZERO {
                continue;
            }
            for (j, &b) in other.coeffs.iter().take(n + 1 - i).enumerate() {
                out[i + j] += a * b;
            }
        }
        Self { coeffs: out }
    }

    /// `self / den` to the common order; `den(0)` must not vanish.
    pub fn div(&self, den: &Self) -> Result<Self> {
        let d0 = den.coeffs[0];
        if d0.norm() < 1e-300 {
            return Err(Error::Pole("series division by a series vanishing at 0".into()));
        }
        let n = self.order().min(den.order());
        let inv0 = ONE / d0;
        let mut q = vec![ZERO; n + 1];
        for k in 0..=n {
            let mut acc = self.coeffs[k];
            for j in 1..=k {
                let dj = den.coeffs[j];
                if dj != ZERO {
                    acc -= dj * q[k - j];
                }
            }
            q[k] = acc * inv0;
        }
        Ok(Self { coeffs: q })
    }

    pub fn inverse(&self) -> Result<Self> {
        Self::constant(ONE, self.order()).div(self)
    }

    /// Partial Parseval sum `Σ |c_n|²` (compensated).
    pub fn l2_partial(&self) -> f64 {
        let mut s = KahanSum::new();
        for c in &self.coeffs {
            s.add(c.norm_sqr());
        }
        s.value()
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        let n = self.order().min(other.order());
        (0..=n).map(|k| (self.coeffs[k] - other.coeffs[k]).norm()).fold(0.0, f64::max)
    }
}

/// `Σ |c_n|²` with an interval for the unseen tail.
#[derive(Clone, Copy, Debug, PartialEq, serde::Serialize)]
pub struct NormEstimate {
    /// Partial sum over the available coefficients.
    pub partial: f64,
    /// Partial sum plus the fitted tail bound (capped at 1 for Schur functions).
    pub upper: f64,
    pub tail: Option<TailFit>,
    /// Set when the norm was fixed by an inner-function certificate instead of a sum.
    pub certified_inner: bool,
}

impl NormEstimate {
    pub fn interval(&self) -> crate::numeric::Interval {
        crate::numeric::Interval { lo: self.partial, hi: self.upper }
    }

    /// Midpoint of the interval; the value used when a single number is needed.
    pub fn estimate(&self) -> f64 {
        0.5 * (self.partial + self.upper)
    }
}

/// Safety factor applied to fitted tail bounds before they are reported.
pub const TAIL_SAFETY: f64 = 2.0;

pub fn l2_norm_sq_series(s: &PowerSeries) -> NormEstimate {
    let partial = s.l2_partial();
    let terms: Vec<f64> = s.coeffs.iter().map(|c| c.norm_sqr()).collect();
    let tail = fit_power_tail(&terms);
    let extra = tail.map(|t| TAIL_SAFETY * t.bound).unwrap_or(f64::INFINITY);
    NormEstimate { partial, upper: (partial + extra).min(1.0).max(partial), tail, certified_inner: false }
}

/// `τ_r = Σ n |c_n|² r^{2n}`.
pub fn tau_r(s: &PowerSeries, r: f64) -> Result<f64> {
    if !(r > 0.0 && r < 1.0) {
        return Err(Error::Domain(format!("tau_r needs 0 < r < 1, got {r}")));
    }
    let r2 = r * r;
    let mut w = 1.0;
    let mut acc = KahanSum::new();
    for (n, c) in s.coeffs.iter().enumerate() {
        if n > 0 {
            w *= r2;
            acc.add(n as f64 * c.norm_sqr() * w);
        }
    }
    Ok(acc.value())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[f64]) -> PowerSeries {
        PowerSeries::new(v.iter().map(|&x| C64::new(x, 0.0)).collect())
    }

    #[test]
    fn geometric_inverse() {
        let inv = s(&[1.0, -1.0, 0.0, 0.0, 0.0]).inverse().unwrap();
        assert_eq!(inv, s(&[1.0, 1.0, 1.0, 1.0, 1.0]));
    }

    #[test]
    fn mul_then_div_round_trips() {
        let a = s(&[0.3, -0.2, 0.7, 0.1, 0.05]);
        let b = s(&[1.0, 0.4, -0.3, 0.2, 0.0]);
        let back = a.mul(&b).div(&b).unwrap();
        assert!(back.max_abs_diff(&a) < 1e-15);
    }

    #[test]
    fn tau_r_of_z() {
        let v = tau_r(&s(&[0.0, 1.0]), 0.9).unwrap();
        assert!((v - 0.81).abs() < 1e-15);
    }

    #[test]
    fn shifts() {
        let a = s(&[1.0, 2.0, 3.0]);
        assert_eq!(a.shift_up(), s(&[0.0, 1.0, 2.0]));
        assert_eq!(a.shift_down(), s(&[2.0, 3.0]));
    }
}
