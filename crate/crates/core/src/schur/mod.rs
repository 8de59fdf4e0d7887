//! Scalar Schur-function machinery: parameter sequences, the Schur algorithm,
//! Carathéodory transforms, Szegő polynomials, Khrushchev's formula, norms and
//! winding numbers.

mod legendre;
mod params;
mod series;
mod szego;
mod transforms;
mod winding;

pub use legendre::legendre_table;
pub use params::{schur_params_from_taylor, schur_step_back, SchurParams, SchurTail, SchurValue};
pub use series::{l2_norm_sq_series, tau_r, NormEstimate, PowerSeries, TAIL_SAFETY};
pub use szego::{
    g_pair, g_pair_from_polynomials, khrushchev_fk, poly_eval, reversal, szego_polynomials, PolynomialPair,
};
pub use transforms::{
    caratheodory_to_f, caratheodory_to_f_matrix, caratheodory_to_f_series, f_to_caratheodory,
    f_to_caratheodory_matrix, f_to_caratheodory_series,
};
pub use winding::{winding_inner, winding_number, winding_number_fn, winding_number_inner_fn, winding_refined, Winding};

use num_complex::Complex64 as C64;

use crate::error::Result;

/// Grid on which inner-function certificates are checked.
pub const INNER_GRID: usize = 256;

/// `‖f‖² = Σ|c_n|²` for the Schur function of `params`.
///
/// Terminated sequences are certified inner on the unit circle (exact finite
/// evaluation, |f| = 1 within 1e-10 on a 256-point grid) and then have norm 1.
/// Infinite sequences are summed to `order` with a fitted tail interval.
pub fn l2_norm_sq(params: &SchurParams, order: usize) -> Result<NormEstimate> {
    if params.is_terminated() && certify_inner(params)? {
        return Ok(NormEstimate { partial: 1.0, upper: 1.0, tail: None, certified_inner: true });
    }
    Ok(l2_norm_sq_series(&params.taylor_coeffs(order)?))
}

/// `true` when `|f(e^{iθ})| = 1` within 1e-10 on the certification grid.
pub fn certify_inner(params: &SchurParams) -> Result<bool> {
    if !params.is_terminated() {
        return Ok(false);
    }
    for j in 0..INNER_GRID {
        let z = C64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / INNER_GRID as f64);
        if (params.eval(z, 0)?.value.norm() - 1.0).abs() > 1e-10 {
            return Ok(false);
        }
    }
    Ok(true)
}

/// Blaschke degree of a terminated sequence, by the winding number of its
/// boundary values (certifies rather than counts parameters).
pub fn blaschke_degree(params: &SchurParams) -> Result<Winding> {
    if !params.is_terminated() {
        return Err(crate::error::Error::NotRationalInner("infinite parameter sequence".into()));
    }
    winding_number_inner_fn(|t| params.eval(C64::from_polar(1.0, t), 0).map(|v| v.value).unwrap_or_default(), 64)
}
