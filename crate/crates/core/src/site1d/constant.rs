use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::numeric::{fit_power_tail, inner};
use crate::schur::{l2_norm_sq_series, legendre_table, NormEstimate, PowerSeries, SchurParams};

/// Closed forms for a constant coin on the line.
#[derive(Clone, Debug)]
pub struct ConstantCoin {
    pub gamma: C64,
    pub rho: f64,
    /// `‖f_{2x+1}‖² = ‖f^{2x−1}‖²`.
    pub norm_sq: f64,
    /// `1 − 2|γ|²`, the Legendre argument.
    pub c: f64,
    /// `c_n` for `n ≤ n_max` (index 0 unused); `f_{2x+1} = Σ c̄_n zⁿ`.
    pub c_n: Vec<C64>,
    /// `d_n` for `1 ≤ n ≤ n_max / 2` (index 0 unused); `a_{2n} = d_n Υ`.
    pub d_n: Vec<f64>,
    pub upsilon: DMatrix<C64>,
    /// Fitted decay exponent `p` in `|d_n| ~ n^{−p}`.
    pub decay_exponent: f64,
}

impl ConstantCoin {
    /// Taylor coefficients of `f_{2x+1}` (`conj(c_n)`).
    pub fn right_series(&self) -> PowerSeries {
        PowerSeries::new(self.c_n.iter().map(|c| c.conj()).collect())
    }

    /// `a_n` for `n ≤ 2 · d_n.len()`.
    pub fn amplitude(&self, n: usize) -> DMatrix<C64> {
        if n % 2 == 1 || n == 0 || n / 2 >= self.d_n.len() {
            return DMatrix::zeros(2, 2);
        }
        &self.upsilon * C64::new(self.d_n[n / 2], 0.0)
    }
}

pub fn constant_coin_analytics(gamma: C64, n_max: usize) -> Result<ConstantCoin> {
    let g = gamma.norm();
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::DegenerateCoin(g));
    }
    let g2 = g * g;
    let rho = (1.0 - g2).sqrt();
    let c = 1.0 - 2.0 * g2;
    let norm_sq = 2.0 / (std::f64::consts::PI * g2) * (rho * g + (1.0 - 2.0 * rho * rho) * g.asin());

    let p = legendre_table(c, n_max / 2 + 1);
    let mut c_n = vec![C64::new(0.0, 0.0); n_max + 1];
    if n_max >= 1 {
        c_n[1] = gamma.conj();
    }
    let mut n = 1;
    while 2 * n + 1 <= n_max {
        c_n[2 * n + 1] = C64::new(p[n - 1] - c * p[n], 0.0) / (gamma * 2.0 * (n as f64 + 1.0));
        n += 1;
    }

    let half = n_max / 2;
    let mut d_n = vec![0.0; half + 1];
    for n in 1..=half {
        d_n[n] = if n == 1 { 1.0 } else { (p[n - 2] - c * p[n - 1]) / (2.0 * g2 * n as f64) };
    }
    let upsilon = DMatrix::from_row_slice(
        2,
        2,
        &[C64::new(-g2, 0.0), -gamma * rho, gamma.conj() * rho, C64::new(-g2, 0.0)],
    );
    let abs_d: Vec<f64> = d_n.iter().map(|d| d.abs()).collect();
    let decay_exponent = fit_power_tail(&abs_d).map(|t| t.exponent).unwrap_or(f64::NAN);
    Ok(ConstantCoin { gamma, rho, norm_sq, c, c_n, d_n, upsilon, decay_exponent })
}

/// State return probability `‖f(z,0) f(z,c)‖²` of `α|x,↑⟩ + β|x,↓⟩` for a
/// constant coin on the line, where `f(z, γ_0)` has parameters
/// `(γ_0, 0, γ, 0, γ, …)` and `c = γ − (2iρ/γ̄) Im(ᾱβγ)`.
pub fn constant_line_state_formula(gamma: C64, alpha: C64, beta: C64, order: usize) -> Result<(NormEstimate, C64)> {
    let g = gamma.norm();
    if !(g > 0.0 && g < 1.0) {
        return Err(Error::DegenerateCoin(g));
    }
    let psi = nalgebra::DVector::from_vec(vec![alpha, beta]);
    if (inner(&psi, &psi).re - 1.0).abs() > 1e-10 {
        return Err(Error::Domain("qubit is not normalized".into()));
    }
    let rho = (1.0 - g * g).sqrt();
    let im = (alpha.conj() * beta * gamma).im;
    let c = gamma - C64::new(0.0, 2.0 * rho) / gamma.conj() * im;
    if c.norm() > 1.0 + 1e-12 {
        return Err(Error::NotSchurClass(c.norm()));
    }
    let zero = C64::new(0.0, 0.0);
    let f0 = SchurParams::periodic(vec![zero], vec![zero, gamma])?.taylor_coeffs(order)?;
    // |c| = 1 makes f(z, c) the constant c
    let fc = if c.norm() > 1.0 - 1e-12 {
        SchurParams::terminated(Vec::new(), c / c.norm())?
    } else {
        SchurParams::periodic(vec![c], vec![zero, gamma])?
    }
    .taylor_coeffs(order)?;
    Ok((l2_norm_sq_series(&f0.mul(&fc)), c))
}
