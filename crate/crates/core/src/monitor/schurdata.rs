use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{AmplitudeKind, AmplitudeSequence, SpectralMass};
use crate::error::{Error, Result};
use crate::numeric::{boundary_samples, inner, vec_norm_sq};

/// Matrix-valued power series `Σ coeffs[m] z^m`.
#[derive(Clone, Debug, PartialEq)]
pub struct MatrixSeries {
    pub coeffs: Vec<DMatrix<C64>>,
}

impl MatrixSeries {
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn dim(&self) -> usize {
        self.coeffs.first().map_or(0, |c| c.nrows())
    }

    /// Horner evaluation.
    pub fn eval(&self, z: C64) -> DMatrix<C64> {
        let d = self.dim();
        let mut acc = DMatrix::zeros(d, d);
        for c in self.coeffs.iter().rev() {
            acc = acc * z + c;
        }
        acc
    }

    /// Values at `e^{2πij/m}`, one FFT per entry.
    pub fn boundary_samples(&self, m: usize) -> Vec<DMatrix<C64>> {
        let d = self.dim();
        let mut out = vec![DMatrix::zeros(d, d); m];
        for i in 0..d {
            for j in 0..d {
                let c: Vec<C64> = self.coeffs.iter().map(|x| x[(i, j)]).collect();
                for (k, s) in boundary_samples(&c, m).into_iter().enumerate() {
                    out[k][(i, j)] = s;
                }
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &Self, terms: usize) -> f64 {
        let d = self.dim();
        let zero = DMatrix::zeros(d, d);
        (0..terms)
            .map(|m| {
                let a = self.coeffs.get(m).unwrap_or(&zero);
                let b = other.coeffs.get(m).unwrap_or(&zero);
                crate::numeric::max_abs_diff(a, b)
            })
            .fold(0.0, f64::max)
    }
}

/// `â(z) = Σ a_n z^n`.
pub fn a_hat_series(a: &AmplitudeSequence) -> MatrixSeries {
    MatrixSeries { coeffs: a.mats.clone() }
}

/// Schur function of the subspace: from `â(z) = z f†(z)`, `b_m = a_{m+1}†`.
pub fn matrix_schur_from_amplitudes(a: &AmplitudeSequence) -> Result<MatrixSeries> {
    if a.kind != AmplitudeKind::A {
        return Err(Error::InvalidInput("expected first-return amplitudes".into()));
    }
    Ok(MatrixSeries { coeffs: a.mats[1..].iter().map(|m| m.adjoint()).collect() })
}

fn pole_check(masses: &[SpectralMass], z: C64) -> Result<()> {
    if z.norm() > 1.0 - 1e-6 {
        return Err(Error::Domain(format!("|z| = {} too close to the circle", z.norm())));
    }
    for m in masses {
        if (m.lambda - z).norm() < 1e-9 {
            return Err(Error::Pole(format!("z within 1e-9 of the atom {}", m.lambda)));
        }
    }
    Ok(())
}

/// `F(z) = Σ_k (λ_k + z)/(λ_k − z) · mass_k`.
pub fn caratheodory_from_masses(masses: &[SpectralMass], z: C64) -> Result<DMatrix<C64>> {
    pole_check(masses, z)?;
    let d = masses.first().map_or(0, |m| m.mass.nrows());
    let mut f = DMatrix::zeros(d, d);
    for m in masses {
        f += &m.mass * ((m.lambda + z) / (m.lambda - z));
    }
    Ok(f)
}

/// `μ̂(z) = Σ_k mass_k / (1 − λ_k z)`.
pub fn stieltjes_from_masses(masses: &[SpectralMass], z: C64) -> Result<DMatrix<C64>> {
    pole_check(masses, z)?;
    let d = masses.first().map_or(0, |m| m.mass.nrows());
    let mut s = DMatrix::zeros(d, d);
    for m in masses {
        s += &m.mass / (C64::new(1.0, 0.0) - m.lambda * z);
    }
    Ok(s)
}

/// `F(z) = 2(I − z f(z))^{-1} − I` from a Schur series, `|z| < 1`.
pub fn caratheodory_from_schur(f: &MatrixSeries, z: C64) -> Result<DMatrix<C64>> {
    if z.norm() >= 1.0 {
        return Err(Error::Domain(format!("|z| = {} is not inside the disk", z.norm())));
    }
    crate::schur::f_to_caratheodory_matrix(&f.eval(z), z)
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct BerryPhase {
    /// Richardson-extrapolated loop integral, equal to the expected return time.
    pub tau: f64,
    /// Finest grid used.
    pub grid: usize,
    /// Difference between the last two extrapolations.
    pub change: f64,
}

/// Discrete loop sum `(1/2π) Σ_j arg⟨ψ_j|ψ_{j+1}⟩` on `m` points, or `None` if
/// the grid is too coarse to follow the phase.
fn loop_sum(coeffs: &[DVector<C64>], m: usize) -> Result<Option<f64>> {
    let d = coeffs[0].len();
    let mut states = vec![DVector::<C64>::zeros(d); m];
    for i in 0..d {
        let c: Vec<C64> = coeffs.iter().map(|v| v[i]).collect();
        for (j, s) in boundary_samples(&c, m).into_iter().enumerate() {
            states[j][i] = s;
        }
    }
    for s in &states {
        let n = vec_norm_sq(s).sqrt();
        if (n - 1.0).abs() >= 1e-8 {
            return Err(Error::NotApplicable(format!("loop leaves the unit sphere: ‖â ψ‖ = {n}")));
        }
    }
    let mut acc = crate::numeric::KahanSum::new();
    for j in 0..m {
        let ov = inner(&states[j], &states[(j + 1) % m]);
        if ov.norm() < 0.5 || ov.arg().abs() > std::f64::consts::FRAC_PI_2 {
            return Ok(None);
        }
        acc.add(ov.arg());
    }
    Ok(Some(acc.value() / (2.0 * std::f64::consts::PI)))
}

/// Loop integral of `θ ↦ ψ(θ) = Σ_n coeffs[n] e^{inθ}`, which must stay on the
/// unit sphere. Grid doubles from `m0` until successive Richardson values
/// agree to 1e-8.
pub fn berry_phase_from_coeffs(coeffs: &[DVector<C64>], m0: usize) -> Result<BerryPhase> {
    if coeffs.is_empty() {
        return Err(Error::InvalidInput("empty loop".into()));
    }
    let mut m = m0.max(16);
    let mut prev_sum: Option<f64> = None;
    let mut prev_rich: Option<f64> = None;
    while m <= 1 << 22 {
        let s = loop_sum(coeffs, m)?;
        if let Some(s) = s {
            if let Some(p) = prev_sum {
                let rich = (4.0 * s - p) / 3.0;
                if let Some(r) = prev_rich {
                    let change = (rich - r).abs();
                    if change < 1e-8 {
                        return Ok(BerryPhase { tau: rich, grid: m, change });
                    }
                }
                prev_rich = Some(rich);
            }
        }
        prev_sum = s;
        m *= 2;
    }
    Err(Error::NotApplicable("loop integral did not converge".into()))
}

/// Loop integral along `θ ↦ â(e^{iθ})ψ` for a state in frame coordinates.
pub fn berry_phase_loop(a: &AmplitudeSequence, psi: &DVector<C64>, m0: usize) -> Result<BerryPhase> {
    if a.kind != AmplitudeKind::A {
        return Err(Error::InvalidInput("expected first-return amplitudes".into()));
    }
    if psi.len() != a.dim_v {
        return Err(Error::Domain("state dimension does not match V".into()));
    }
    berry_phase_from_coeffs(&a.apply_to(psi), m0)
}
