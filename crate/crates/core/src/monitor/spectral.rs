use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{first_return_converged, AmplitudeKind, AmplitudeSequence};
use crate::error::{Error, Result};
use crate::linops::{Subspace, UnitaryStep};
use crate::numeric::{frobenius_sq, hermitian_eigen, kahan_sum, max_abs_diff};
use crate::schur::winding_inner;

/// Eigenvalues closer than this are merged into one spectral projector.
pub const CLUSTER_TOL: f64 = 1e-9;
/// Singular-value threshold for ranks of spectral masses.
pub const RANK_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct SpectralDecomposition {
    pub eigenvalues: Vec<C64>,
    pub projectors: Vec<DMatrix<C64>>,
    pub multiplicities: Vec<usize>,
    /// Orthonormal eigenvectors of each cluster, as columns.
    pub bases: Vec<DMatrix<C64>>,
}

/// Unitary Schur form `U = Q T Q†`; `T` is diagonal up to roundoff for a normal matrix.
pub fn spectral_decompose(u: &UnitaryStep) -> Result<SpectralDecomposition> {
    if u.is_truncated() {
        return Err(Error::TruncatedModel);
    }
    let m = u.to_dense();
    let n = m.nrows();
    let (q, t) = nalgebra::Schur::new(m.clone()).unpack();
    let off: f64 = (0..n).flat_map(|i| (0..i).map(move |j| (i, j))).map(|(i, j)| t[(j, i)].norm()).fold(0.0, f64::max);
    if off > 1e-8 {
        return Err(Error::NotApplicable(format!("step is not normal: off-diagonal Schur entry {off:e}")));
    }
    let mut reps: Vec<C64> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for i in 0..n {
        let l = t[(i, i)];
        match reps.iter().position(|r| (r - l).norm() < CLUSTER_TOL) {
            Some(k) => members[k].push(i),
            None => {
                reps.push(l);
                members.push(vec![i]);
            }
        }
    }
    let mut eigenvalues = Vec::new();
    let mut projectors = Vec::new();
    let mut multiplicities = Vec::new();
    let mut bases = Vec::new();
    for idx in &members {
        let mut basis = DMatrix::zeros(n, idx.len());
        let mut mean = C64::new(0.0, 0.0);
        for (c, &i) in idx.iter().enumerate() {
            basis.set_column(c, &q.column(i));
            mean += t[(i, i)];
        }
        mean /= idx.len() as f64;
        eigenvalues.push(mean / mean.norm());
        projectors.push(&basis * basis.adjoint());
        multiplicities.push(idx.len());
        bases.push(basis);
    }
    Ok(SpectralDecomposition { eigenvalues, projectors, multiplicities, bases })
}

#[derive(Clone, Debug)]
pub struct SpectralMass {
    pub lambda: C64,
    /// `P E_k P` in the frame of `V`.
    pub mass: DMatrix<C64>,
    pub rank: usize,
}

fn check_dims(dec: &SpectralDecomposition, v: &Subspace) -> Result<()> {
    let n = dec.projectors.first().map_or(0, |p| p.nrows());
    if n != v.space_dim() {
        return Err(Error::InvalidInput(format!("subspace in dimension {}, decomposition in {n}", v.space_dim())));
    }
    Ok(())
}

fn psd_rank(m: &DMatrix<C64>) -> usize {
    hermitian_eigen(m).0.iter().filter(|&&e| e > RANK_TOL).count()
}

/// Atoms of the spectral measure of `V`; masses with zero rank are dropped.
pub fn subspace_spectral_measure(dec: &SpectralDecomposition, v: &Subspace) -> Result<Vec<SpectralMass>> {
    check_dims(dec, v)?;
    let f = v.frame();
    let mut out = Vec::new();
    for (k, b) in dec.bases.iter().enumerate() {
        let x = f.adjoint() * b;
        let mass = &x * x.adjoint();
        let rank = psd_rank(&mass);
        if rank > 0 {
            out.push(SpectralMass { lambda: dec.eigenvalues[k], mass, rank });
        }
    }
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum KMethod {
    EigenRanks,
    FrobeniusSurvival,
    Winding,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct KValue {
    pub k: usize,
    /// Unrounded value of the method's sum.
    pub raw: f64,
    pub residue: f64,
}

pub fn k_eigen_ranks(dec: &SpectralDecomposition, v: &Subspace) -> Result<KValue> {
    let k: usize = subspace_spectral_measure(dec, v)?.iter().map(|m| m.rank).sum();
    Ok(KValue { k, raw: k as f64, residue: 0.0 })
}

/// `Σ_{n≥0} ‖Ũⁿ P‖²_F`, summed until the geometric tail estimate is below 1e-12.
pub fn k_frobenius_survival(u: &UnitaryStep, v: &Subspace) -> Result<KValue> {
    let (_, t) = first_return_converged(u, v, 1e-14, 1_000_000)?;
    let raw = kahan_sum(t.iter().copied());
    // The loop above stops at ‖ŨⁿP‖² < 1e-14; bound what is left by the
    // observed contraction ratio over the last steps.
    let n = t.len() - 1;
    let w = n.min(10);
    let tail = if t[n] == 0.0 || w == 0 {
        0.0
    } else {
        let q = (t[n] / t[n - w]).powf(1.0 / w as f64).min(1.0 - 1e-3);
        t[n] * q / (1.0 - q)
    };
    if tail > 1e-12 {
        return Err(Error::NotApplicable(format!("survival tail {tail:e} above 1e-12")));
    }
    let k = raw.round();
    Ok(KValue { k: k as usize, raw, residue: (raw - k).abs() })
}

/// Winding number of `det â` on the unit circle, with the rational-inner
/// certificate: `â` unitary on the grid and `Σ n‖a_n‖²_F` equal to the winding.
pub fn k_winding(a: &AmplitudeSequence) -> Result<KValue> {
    if a.kind != AmplitudeKind::A {
        return Err(Error::InvalidInput("expected first-return amplitudes".into()));
    }
    let d = a.dim_v;
    let m0 = (4 * d * a.horizon).next_power_of_two().max(256);
    let series = super::schurdata::a_hat_series(a);
    let id = DMatrix::identity(d, d);
    let samples = winding_inner(
        |m| {
            let mats = series.boundary_samples(m);
            let dev = mats.iter().map(|s| max_abs_diff(&(s.adjoint() * s), &id)).fold(0.0, f64::max);
            if dev >= 1e-8 {
                return Err(Error::NotRationalInner(format!("â is not unitary on the circle: deviation {dev:e}")));
            }
            Ok(mats.iter().map(|s| s.determinant()).collect())
        },
        m0,
    )?;
    if samples.residue >= 1e-6 {
        return Err(Error::NotRationalInner(format!("winding residue {:e}", samples.residue)));
    }
    let raw = kahan_sum((1..=a.horizon).map(|n| n as f64 * frobenius_sq(&a.mats[n])));
    let residue = (raw - samples.winding as f64).abs();
    if residue >= 1e-6 {
        return Err(Error::NotRationalInner(format!(
            "Σ n‖a_n‖² = {raw} does not match the winding {}",
            samples.winding
        )));
    }
    let k = usize::try_from(samples.winding).map_err(|_| Error::NotRationalInner("negative winding".into()))?;
    Ok(KValue { k, raw, residue: residue.max(samples.residue) })
}

/// `dim H − ν`, with `ν` the number of eigenvectors (counted per eigenspace)
/// lying in `V^⊥`.
pub fn k_dim_minus_nu(dec: &SpectralDecomposition, v: &Subspace) -> Result<usize> {
    check_dims(dec, v)?;
    let f = v.frame();
    let mut nu = 0;
    let mut dim = 0;
    for b in &dec.bases {
        dim += b.ncols();
        let x = f.adjoint() * b;
        let h = x.adjoint() * x;
        nu += hermitian_eigen(&h).0.iter().filter(|&&e| e <= RANK_TOL).count();
    }
    Ok(dim - nu)
}

/// `K` by the chosen method, starting from the step operator of a finite model.
pub fn k_invariant(method: KMethod, u: &UnitaryStep, v: &Subspace) -> Result<KValue> {
    match method {
        KMethod::EigenRanks => k_eigen_ranks(&spectral_decompose(u)?, v),
        KMethod::FrobeniusSurvival => k_frobenius_survival(u, v),
        KMethod::Winding => {
            let (a, _) = first_return_converged(u, v, 1e-28, 1_000_000)?;
            k_winding(&a)
        }
    }
}
