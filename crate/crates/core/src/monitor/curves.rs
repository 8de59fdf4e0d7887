use nalgebra::DVector;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{renewal_a_to_mu, AmplitudeKind, AmplitudeSequence};
use crate::error::{Error, Result};
use crate::numeric::{inner, Interval};
use crate::schur::{caratheodory_to_f_series, l2_norm_sq_series, NormEstimate, PowerSeries};

/// Return probability of the single state `ψ ∈ V`: the scalar Carathéodory
/// function `ψ†F(z)ψ`, with `F(z) = 2 Σ μ_n† zⁿ − I`, is turned into a scalar
/// Schur function whose squared norm is the answer.
pub fn state_return_probability(mu: &AmplitudeSequence, psi: &DVector<C64>) -> Result<NormEstimate> {
    if mu.kind != AmplitudeKind::Mu {
        return Err(Error::InvalidInput("expected return amplitudes".into()));
    }
    if psi.len() != mu.dim_v {
        return Err(Error::Domain("state dimension does not match V".into()));
    }
    let mut coeffs: Vec<C64> = mu.mats.iter().map(|m| inner(psi, &(m * psi)).conj() * 2.0).collect();
    coeffs[0] = C64::new(1.0, 0.0);
    let f = caratheodory_to_f_series(&PowerSeries::new(coeffs))?;
    Ok(l2_norm_sq_series(&f))
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct CurvePoint {
    pub t: f64,
    /// Return probability of the state itself.
    pub state: f64,
    pub state_interval: Interval,
    /// `⟨ψ|Rψ⟩` for the whole subspace.
    pub subspace: f64,
}

/// State versus subspace return probability along a path of unit vectors of `V`
/// (frame coordinates), from first-return amplitudes up to their horizon.
pub fn state_vs_subspace_curve(a: &AmplitudeSequence, path: &[(f64, DVector<C64>)]) -> Result<Vec<CurvePoint>> {
    let mu = renewal_a_to_mu(a)?;
    let r = super::return_probability_operator(a, super::TailPolicy::None)?;
    path.iter()
        .map(|(t, psi)| {
            let n = crate::numeric::vec_norm_sq(psi).sqrt();
            if (n - 1.0).abs() > 1e-10 {
                return Err(Error::Domain(format!("path state at t = {t} is not normalized")));
            }
            let s = state_return_probability(&mu, psi)?;
            Ok(CurvePoint {
                t: *t,
                state: s.partial,
                state_interval: s.interval(),
                subspace: inner(psi, &(&r.matrix * psi)).re,
            })
        })
        .collect()
}

/// Weight `b = |β|²` in `(lo, hi)` where the state `√(1−b)|e₀⟩ + √b|e₁⟩` of a
/// two-dimensional `V` stops beating `⟨ψ|Rψ⟩`, found by bisection to `tol`.
/// The difference must change sign on the bracket.
pub fn state_subspace_crossover(a: &AmplitudeSequence, lo: f64, hi: f64, tol: f64) -> Result<f64> {
    if a.dim_v != 2 {
        return Err(Error::Domain("crossover needs a two-dimensional V".into()));
    }
    if !(0.0 <= lo && lo < hi && hi <= 1.0) || !(tol > 0.0) {
        return Err(Error::InvalidInput(format!("bad bracket [{lo}, {hi}] or tolerance {tol}")));
    }
    let mu = renewal_a_to_mu(a)?;
    let r = super::return_probability_operator(a, super::TailPolicy::None)?;
    let gap = |b: f64| -> Result<f64> {
        let psi = DVector::from_vec(vec![C64::new((1.0 - b).sqrt(), 0.0), C64::new(b.sqrt(), 0.0)]);
        Ok(state_return_probability(&mu, &psi)?.partial - inner(&psi, &(&r.matrix * &psi)).re)
    };
    let (mut lo, mut hi) = (lo, hi);
    let (g_lo, g_hi) = (gap(lo)?, gap(hi)?);
    if g_lo.signum() == g_hi.signum() {
        return Err(Error::NotApplicable(format!("no sign change: {g_lo:e} and {g_hi:e}")));
    }
    while hi - lo > tol {
        let mid = 0.5 * (lo + hi);
        if gap(mid)?.signum() == g_lo.signum() {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
