//! Carathéodory ↔ Schur transforms: `F = (1 + z f)/(1 − z f)` and
//! `f = z^{-1}(F − 1)(F + 1)^{-1}`, pointwise, on series and for matrices.

use nalgebra::DMatrix;
use num_complex::Complex64 as C64;

use super::series::PowerSeries;
use crate::error::{Error, Result};

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

pub fn f_to_caratheodory(f: C64, z: C64) -> Result<C64> {
    let den = ONE - z * f;
    if den.norm() < 1e-12 {
        return Err(Error::Pole(format!("1 − z f vanishes at z = {z}")));
    }
    Ok((ONE + z * f) / den)
}

pub fn caratheodory_to_f(big_f: C64, z: C64) -> Result<C64> {
    if z.norm() < 1e-14 {
        return Err(Error::Domain("pointwise F → f is undefined at z = 0; use the series form".into()));
    }
    let den = big_f + ONE;
    if den.norm() < 1e-12 {
        return Err(Error::Pole(format!("F + 1 vanishes at z = {z}")));
    }
    Ok((big_f - ONE) / (z * den))
}

pub fn f_to_caratheodory_series(f: &PowerSeries) -> Result<PowerSeries> {
    let zf = f.shift_up();
    zf.add_constant(ONE).div(&zf.scale(-ONE).add_constant(ONE))
}

/// Needs `F(0) = 1`; the result has one order less than the input.
pub fn caratheodory_to_f_series(big_f: &PowerSeries) -> Result<PowerSeries> {
    if (big_f.coeffs[0] - ONE).norm() > 1e-10 {
        return Err(Error::InvalidInput(format!("Carathéodory series must have F(0) = 1, got {}", big_f.coeffs[0])));
    }
    let num = big_f.add_constant(-ONE).shift_down();
    let den = big_f.add_constant(ONE).truncate(num.order());
    num.div(&den)
}

/// `F = (I + z f)(I − z f)^{-1}`.
pub fn f_to_caratheodory_matrix(f: &DMatrix<C64>, z: C64) -> Result<DMatrix<C64>> {
    let n = f.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let zf = f.scale_complex(z);
    let inv = (&id - &zf)
        .try_inverse()
        .ok_or_else(|| Error::Pole(format!("I − z f singular at z = {z}")))?;
    Ok((&id + zf) * inv)
}

/// `f = z^{-1}(F − I)(F + I)^{-1}`.
pub fn caratheodory_to_f_matrix(big_f: &DMatrix<C64>, z: C64) -> Result<DMatrix<C64>> {
    if z.norm() < 1e-14 {
        return Err(Error::Domain("pointwise F → f is undefined at z = 0".into()));
    }
    let n = big_f.nrows();
    let id = DMatrix::<C64>::identity(n, n);
    let inv = (big_f + &id)
        .try_inverse()
        .ok_or_else(|| Error::Pole(format!("F + I singular at z = {z}")))?;
    Ok(((big_f - &id) * inv).scale_complex(ONE / z))
}

trait ScaleComplex {
    fn scale_complex(&self, s: C64) -> Self;
}

impl ScaleComplex for DMatrix<C64> {
    fn scale_complex(&self, s: C64) -> Self {
        self.map(|x| x * s)
    }
}
