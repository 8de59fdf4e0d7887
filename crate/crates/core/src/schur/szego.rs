//! Szegő and second-kind polynomials, Khrushchev's formula and the
//! off-diagonal functions `G_k`, `G̃_k` relating consecutive iterates.

use num_complex::Complex64 as C64;

use super::params::SchurParams;
use super::transforms::f_to_caratheodory;
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `φ_k, φ_k*` and their second-kind counterparts `Ω_k, Ω_k*` (ascending coefficients).
#[derive(Clone, Debug, PartialEq)]
pub struct PolynomialPair {
    pub degree: usize,
    pub phi: Vec<C64>,
    pub phi_star: Vec<C64>,
    pub omega: Vec<C64>,
    pub omega_star: Vec<C64>,
}

pub fn poly_eval(p: &[C64], z: C64) -> C64 {
    p.iter().rev().fold(ZERO, |acc, &c| acc * z + c)
}

/// Degree-`k` reversal `z^k conj(p(1/z̄))`.
pub fn reversal(p: &[C64], k: usize) -> Vec<C64> {
    let mut out = vec![ZERO; k + 1];
    for (j, c) in p.iter().enumerate() {
        if j <= k {
            out[k - j] = c.conj();
        }
    }
    out
}

fn step(p: &[C64], p_star: &[C64], g: C64) -> (Vec<C64>, Vec<C64>) {
    let rho = (1.0 - g.norm_sqr()).sqrt();
    let k = p.len() - 1;
    let mut next = vec![ZERO; k + 2];
    let mut next_star = vec![ZERO; k + 2];
    for j in 0..=k {
        // ρ φ_{k+1} = z φ_k − γ̄ φ_k*,  ρ φ*_{k+1} = −γ z φ_k + φ_k*
        next[j + 1] += p[j];
        next[j] -= g.conj() * p_star[j];
        next_star[j + 1] -= g * p[j];
        next_star[j] += p_star[j];
    }
    (next.into_iter().map(|x| x / rho).collect(), next_star.into_iter().map(|x| x / rho).collect())
}

/// Polynomials of degree 0..=k; needs `γ_0, …, γ_{k−1}` strictly inside the disk.
pub fn szego_polynomials(params: &SchurParams, k: usize) -> Result<Vec<PolynomialPair>> {
    let mut out = Vec::with_capacity(k + 1);
    let (mut phi, mut phi_s, mut om, mut om_s) = (vec![ONE], vec![ONE], vec![ONE], vec![ONE]);
    for j in 0..=k {
        out.push(PolynomialPair {
            degree: j,
            phi: phi.clone(),
            phi_star: phi_s.clone(),
            omega: om.clone(),
            omega_star: om_s.clone(),
        });
        if j == k {
            break;
        }
        let g = match params.gamma(j) {
            Some(g) if g.norm() < 1.0 => g,
            _ => return Err(Error::IndexOutOfRange { index: k, available: j }),
        };
        (phi, phi_s) = step(&phi, &phi_s, g);
        (om, om_s) = step(&om, &om_s, -g);
    }
    Ok(out)
}

fn eval_iterate(params: &SchurParams, k: usize, z: C64) -> Result<C64> {
    Ok(params.iterate(k)?.eval_adaptive(z)?.value)
}

/// `f^{k−1}` at `z`, with `f^{−1} ≡ 1`.
fn eval_inverse_iterate(params: &SchurParams, k: usize, z: C64) -> Result<C64> {
    Ok(params.inverse_iterate(k.checked_sub(1))?.eval(z, 0)?.value)
}

/// Khrushchev's formula `F_k = (1 + z f^{k−1} f_k)/(1 − z f^{k−1} f_k)`.
pub fn khrushchev_fk(params: &SchurParams, k: usize, z: C64) -> Result<C64> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("Khrushchev formula needs |z| < 1, got {}", z.norm())));
    }
    let w = z * eval_inverse_iterate(params, k, z)? * eval_iterate(params, k, z)?;
    let den = ONE - w;
    if den.norm() < 1e-12 {
        return Err(Error::Pole(format!("1 − z f^(k−1) f_k vanishes at z = {z}")));
    }
    Ok((ONE + w) / den)
}

/// `(G_k, G̃_k)` from iterates:
/// `G_k = 2ρ_k z f^{k−1} / D`, `G̃_k = 2ρ_k z f_{k+1} / D`,
/// `D = (1 − γ_k z f^{k−1})(1 − z f^k f_{k+1})`.
pub fn g_pair(params: &SchurParams, k: usize, z: C64) -> Result<(C64, C64)> {
    let g = params.gamma(k).filter(|g| g.norm() < 1.0).ok_or(Error::IndexOutOfRange { index: k, available: k })?;
    let rho = (1.0 - g.norm_sqr()).sqrt();
    let inv_prev = eval_inverse_iterate(params, k, z)?;
    let inv_k = params.inverse_iterate(Some(k))?.eval(z, 0)?.value;
    let f_next = eval_iterate(params, k + 1, z)?;
    let den = (ONE - g * z * inv_prev) * (ONE - z * inv_k * f_next);
    if den.norm() < 1e-12 {
        return Err(Error::Pole(format!("G_k denominator vanishes at z = {z}")));
    }
    let two_rho_z = z * (2.0 * rho);
    Ok((two_rho_z * inv_prev / den, two_rho_z * f_next / den))
}

/// The same pair from the polynomial definitions
/// `G_k = z^{−k} φ_k (φ_{k+1} F + Ω_{k+1})`, `G̃_k = z^{−k−1} φ_k* (φ*_{k+1} F − Ω*_{k+1})`.
pub fn g_pair_from_polynomials(params: &SchurParams, k: usize, z: C64) -> Result<(C64, C64)> {
    if z.norm() < 1e-14 {
        return Err(Error::Domain("polynomial form of G_k needs z ≠ 0".into()));
    }
    let polys = szego_polynomials(params, k + 1)?;
    let f0 = params.eval_adaptive(z)?.value;
    let big_f = f_to_caratheodory(f0, z)?;
    let (pk, pk1) = (&polys[k], &polys[k + 1]);
    let g = z.powi(-(k as i32))
        * poly_eval(&pk.phi, z)
        * (poly_eval(&pk1.phi, z) * big_f + poly_eval(&pk1.omega, z));
    let gt = z.powi(-(k as i32) - 1)
        * poly_eval(&pk.phi_star, z)
        * (poly_eval(&pk1.phi_star, z) * big_f - poly_eval(&pk1.omega_star, z));
    Ok((g, gt))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn free_case_polynomials_are_monomials() {
        let p = SchurParams::free_tail(vec![]).unwrap();
        let polys = szego_polynomials(&p, 4).unwrap();
        for (k, pp) in polys.iter().enumerate() {
            let mut mono = vec![ZERO; k + 1];
            mono[k] = ONE;
            assert_eq!(pp.phi, mono);
            assert_eq!(pp.omega, mono);
            assert_eq!(pp.phi_star[0], ONE);
            assert!(pp.phi_star[1..].iter().all(|c| *c == ZERO));
        }
    }

    #[test]
    fn star_is_reversal() {
        let p = SchurParams::free_tail(vec![C64::new(0.3, 0.2), C64::new(-0.5, 0.1), C64::new(0.0, 0.4)]).unwrap();
        for pp in szego_polynomials(&p, 3).unwrap() {
            let r = reversal(&pp.phi, pp.degree);
            for (a, b) in r.iter().zip(&pp.phi_star) {
                assert!((a - b).norm() < 1e-14);
            }
        }
    }

    #[test]
    fn khrushchev_at_zero_is_one() {
        let p = SchurParams::free_tail(vec![C64::new(0.3, 0.2), C64::new(-0.5, 0.1)]).unwrap();
        for k in 0..3 {
            assert!((khrushchev_fk(&p, k, ZERO).unwrap() - ONE).norm() < 1e-15);
        }
    }
}
