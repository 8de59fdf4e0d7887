use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Winding number about the origin of a closed sampled curve.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Winding {
    pub winding: i64,
    /// `(1/2π) Σ Δarg` before rounding.
    pub raw: f64,
    pub residue: f64,
    pub min_modulus: f64,
    /// Largest single phase increment, in radians.
    pub max_step: f64,
    pub samples: usize,
}

/// Samples are taken at `θ_j = 2πj/M`; the curve closes from the last back to the first.
pub fn winding_number(samples: &[C64]) -> Result<Winding> {
    winding_with(samples, false)
}

/// Phase increment between consecutive samples: principal value, or in
/// `[0, 2π)` when the phase is known to increase.
fn increments(samples: &[C64], monotone: bool) -> Vec<f64> {
    let m = samples.len();
    (0..m)
        .map(|j| {
            let d = (samples[(j + 1) % m] / samples[j]).arg();
            if monotone && d < 0.0 {
                d + 2.0 * std::f64::consts::PI
            } else {
                d
            }
        })
        .collect()
}

fn winding_with(samples: &[C64], monotone: bool) -> Result<Winding> {
    let m = samples.len();
    if m < 3 {
        return Err(Error::InvalidInput("winding number needs at least 3 samples".into()));
    }
    let min_modulus = samples.iter().map(|z| z.norm()).fold(f64::INFINITY, f64::min);
    if min_modulus < 1e-8 {
        return Err(Error::WindingUndefined { min_modulus });
    }
    let steps = increments(samples, monotone);
    let max_step = steps.iter().fold(0.0f64, |a, d| a.max(d.abs()));
    let raw = steps.iter().sum::<f64>() / (2.0 * std::f64::consts::PI);
    let w = raw.round();
    Ok(Winding { winding: w as i64, raw, residue: (raw - w).abs(), min_modulus, max_step, samples: m })
}

fn grid<F: Fn(f64) -> C64>(f: &F, m: usize) -> Vec<C64> {
    (0..m).map(|j| f(2.0 * std::f64::consts::PI * j as f64 / m as f64)).collect()
}

/// Samples `f(θ)` on a uniform grid and refines it, see [`winding_refined`].
pub fn winding_number_fn<F: Fn(f64) -> C64>(f: F, m0: usize) -> Result<Winding> {
    winding_refined(|m| Ok(grid(&f, m)), m0)
}

/// Winding of a boundary function whose phase increases, such as the
/// determinant of an inner function, see [`winding_inner`].
pub fn winding_number_inner_fn<F: Fn(f64) -> C64>(f: F, m0: usize) -> Result<Winding> {
    winding_inner(|m| Ok(grid(&f, m)), m0)
}

/// `sample(m)` returns the curve at `θ_j = 2πj/m`. The grid doubles from `m0`
/// until every phase increment is below π/2 and two successive refinements
/// reproduce each coarse increment as the sum of its halves (a coarse grid can
/// alias a fast phase into a small increment, which the refinement exposes).
pub fn winding_refined<S: Fn(usize) -> Result<Vec<C64>>>(sample: S, m0: usize) -> Result<Winding> {
    refine(sample, m0, false)
}

/// As [`winding_refined`] for a phase that increases along the circle. A zero
/// of an inner function within δ of the circle turns the phase by almost 2π
/// over an arc of width about δ; principal values hide that on grids coarser
/// than δ, whereas increments taken in `[0, 2π)` make the coarse step differ
/// from the sum of its halves until the arc is resolved.
pub fn winding_inner<S: Fn(usize) -> Result<Vec<C64>>>(sample: S, m0: usize) -> Result<Winding> {
    refine(sample, m0, true)
}

fn refine<S: Fn(usize) -> Result<Vec<C64>>>(sample: S, m0: usize, monotone: bool) -> Result<Winding> {
    let consistent = |coarse: &[f64], fine: &[f64]| {
        coarse.iter().enumerate().all(|(j, c)| (fine[2 * j] + fine[2 * j + 1] - c).abs() < 1e-6)
    };
    let mut m = m0.max(8);
    let mut cur = sample(m)?;
    winding_with(&cur, monotone)?;
    let mut streak = 0;
    loop {
        if m >= 1 << 22 {
            let hint = if monotone { "; the phase may not be monotone" } else { "" };
            return Err(Error::NotApplicable(format!("winding grid did not resolve the phase with {m} points{hint}")));
        }
        let next = sample(2 * m)?;
        let w = winding_with(&next, monotone)?;
        let ok = w.max_step < std::f64::consts::FRAC_PI_2
            && consistent(&increments(&cur, monotone), &increments(&next, monotone));
        streak = if ok { streak + 1 } else { 0 };
        if streak >= 2 {
            return Ok(w);
        }
        cur = next;
        m *= 2;
    }
}
