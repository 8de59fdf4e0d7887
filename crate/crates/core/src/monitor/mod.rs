//! Monitored recurrence of a subspace `V`: return amplitudes `μ_n = P Uⁿ P`,
//! first-return amplitudes `a_n = P U Ũ^{n−1} P` with `Ũ = (I − P) U`, the
//! renewal equations between them, survival probabilities, the return
//! probability and return time operators, spectral data and the integer `K`.

mod curves;
mod operators;
mod report;
mod schurdata;
mod spectral;

pub use curves::{state_return_probability, state_subspace_crossover, state_vs_subspace_curve, CurvePoint};
pub use operators::{
    expected_return_time, return_probability_operator, tau_operator, transition_probability, ReturnOperator,
    ReturnTime, TailPolicy, TauOperator, ValueWithTail,
};
pub use report::{
    complex_json, matrix_json, recurrence_report, report_from_amplitudes, Classification, RecurrenceReport, ReportOptions,
    REPORT_SCHEMA,
};
pub use schurdata::{
    a_hat_series, berry_phase_loop, berry_phase_from_coeffs, caratheodory_from_masses, caratheodory_from_schur,
    matrix_schur_from_amplitudes, stieltjes_from_masses, BerryPhase, MatrixSeries,
};
pub use spectral::{
    k_dim_minus_nu, k_eigen_ranks, k_frobenius_survival, k_invariant, k_winding, spectral_decompose,
    subspace_spectral_measure, KMethod, KValue, SpectralDecomposition, SpectralMass, CLUSTER_TOL, RANK_TOL,
};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{StateVector, Subspace, UnitaryStep};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum AmplitudeKind {
    Mu,
    A,
}

/// `mats[n]` for `n = 0..=horizon`; `mats[0]` is `I` for return amplitudes and
/// `0` for first-return amplitudes.
#[derive(Clone, Debug, PartialEq)]
pub struct AmplitudeSequence {
    pub kind: AmplitudeKind,
    pub mats: Vec<DMatrix<C64>>,
    pub horizon: usize,
    pub dim_v: usize,
}

impl AmplitudeSequence {
    pub fn new(kind: AmplitudeKind, mats: Vec<DMatrix<C64>>) -> Result<Self> {
        let dim_v = mats.first().map(|m| m.nrows()).ok_or_else(|| Error::InvalidInput("empty amplitude sequence".into()))?;
        if mats.iter().any(|m| m.shape() != (dim_v, dim_v)) {
            return Err(Error::InvalidInput("amplitude matrices of mixed shapes".into()));
        }
        let horizon = mats.len() - 1;
        Ok(Self { kind, mats, horizon, dim_v })
    }

    pub fn get(&self, n: usize) -> &DMatrix<C64> {
        &self.mats[n]
    }

    /// Keeps `n ≤ horizon`.
    pub fn truncated(&self, horizon: usize) -> Self {
        let h = horizon.min(self.horizon);
        Self { kind: self.kind, mats: self.mats[..=h].to_vec(), horizon: h, dim_v: self.dim_v }
    }

    /// `V`-coordinates `a_n ψ` for `n = 0..=horizon`.
    pub fn apply_to(&self, psi: &DVector<C64>) -> Vec<DVector<C64>> {
        self.mats.iter().map(|m| m * psi).collect()
    }

    /// Compression to a subspace of `V` given by an orthonormal `dim_v × k` frame.
    pub fn compress(&self, w: &DMatrix<C64>) -> Self {
        let mats: Vec<_> = self.mats.iter().map(|m| w.adjoint() * m * w).collect();
        Self { kind: self.kind, horizon: self.horizon, dim_v: w.ncols(), mats }
    }
}

fn check_subspace(u: &UnitaryStep, v: &Subspace) -> Result<()> {
    if v.space_dim() != u.dim() {
        return Err(Error::InvalidInput(format!("subspace lives in dimension {}, step in {}", v.space_dim(), u.dim())));
    }
    Ok(())
}

/// `μ_n = P Uⁿ P` in the frame of `V`, for `n ≤ n_max`.
pub fn mu_sequence(u: &UnitaryStep, v: &Subspace, n_max: usize) -> Result<AmplitudeSequence> {
    check_subspace(u, v)?;
    u.check_horizon(n_max)?;
    let d = v.dim_v();
    let mut mats = vec![DMatrix::zeros(d, d); n_max + 1];
    mats[0] = DMatrix::identity(d, d);
    for k in 0..d {
        let mut w = v.vector(k);
        for n in 1..=n_max {
            w = u.apply_at(&w, n)?;
            mats[n].set_column(k, &v.coords(&w));
        }
    }
    AmplitudeSequence::new(AmplitudeKind::Mu, mats)
}

/// `a_n = P U Ũ^{n−1} P` by iterating `Ũ` on the frame vectors.
pub fn first_return_direct(u: &UnitaryStep, v: &Subspace, n_max: usize) -> Result<AmplitudeSequence> {
    Ok(first_return_with_survival(u, v, n_max)?.0)
}

/// First-return amplitudes together with `t_n = ‖Ũⁿ P‖²_F` for `n = 0..=n_max`.
pub fn first_return_with_survival(
    u: &UnitaryStep,
    v: &Subspace,
    n_max: usize,
) -> Result<(AmplitudeSequence, Vec<f64>)> {
    check_subspace(u, v)?;
    u.check_horizon(n_max)?;
    let d = v.dim_v();
    let mut mats = vec![DMatrix::zeros(d, d); n_max + 1];
    let mut t = vec![0.0; n_max + 1];
    t[0] = d as f64;
    for k in 0..d {
        let mut w = v.vector(k);
        for n in 1..=n_max {
            w = u.apply_at(&w, n)?;
            let c = v.project_out(&mut w);
            mats[n].set_column(k, &c);
            t[n] += crate::numeric::vec_norm_sq(&w);
        }
    }
    Ok((AmplitudeSequence::new(AmplitudeKind::A, mats)?, t))
}

/// At least this many steps are kept so that tail fits have data.
const MIN_CONVERGED_STEPS: usize = 32;

/// For genuinely finite models: first-return amplitudes, iterated until
/// `‖Ũⁿ P‖²_F < tol` (the surviving part then decays geometrically), or fails
/// after `max_n` steps.
pub fn first_return_converged(
    u: &UnitaryStep,
    v: &Subspace,
    tol: f64,
    max_n: usize,
) -> Result<(AmplitudeSequence, Vec<f64>)> {
    check_subspace(u, v)?;
    if u.is_truncated() {
        return Err(Error::TruncatedModel);
    }
    let d = v.dim_v();
    let mut ws: Vec<DVector<C64>> = (0..d).map(|k| v.vector(k)).collect();
    let mut mats = vec![DMatrix::zeros(d, d)];
    let mut t = vec![d as f64];
    for n in 1..=max_n {
        let mut m = DMatrix::zeros(d, d);
        let mut tn = 0.0;
        for (k, w) in ws.iter_mut().enumerate() {
            *w = u.apply_at(w, n)?;
            let c = v.project_out(w);
            m.set_column(k, &c);
            tn += crate::numeric::vec_norm_sq(w);
        }
        mats.push(m);
        t.push(tn);
        if tn < tol && n >= MIN_CONVERGED_STEPS {
            return Ok((AmplitudeSequence::new(AmplitudeKind::A, mats)?, t));
        }
    }
    Err(Error::NotApplicable(format!("surviving weight {} still above {tol:e} after {max_n} steps", t[max_n])))
}

/// Forward recursion `a_n = μ_n − Σ_{k=1}^{n−1} μ_k a_{n−k}`.
pub fn renewal_mu_to_a(mu: &AmplitudeSequence) -> Result<AmplitudeSequence> {
    if mu.kind != AmplitudeKind::Mu {
        return Err(Error::InvalidInput("renewal_mu_to_a expects return amplitudes".into()));
    }
    let d = mu.dim_v;
    let mut a: Vec<DMatrix<C64>> = vec![DMatrix::zeros(d, d); mu.horizon + 1];
    let one = C64::new(1.0, 0.0);
    for n in 1..=mu.horizon {
        let mut acc = mu.mats[n].clone();
        for k in 1..n {
            acc.gemm(-one, &mu.mats[k], &a[n - k], one);
        }
        a[n] = acc;
    }
    AmplitudeSequence::new(AmplitudeKind::A, a)
}

/// Inverse recursion `μ_n = a_n + Σ_{k=1}^{n−1} μ_k a_{n−k}`, `μ_0 = I`.
pub fn renewal_a_to_mu(a: &AmplitudeSequence) -> Result<AmplitudeSequence> {
    if a.kind != AmplitudeKind::A {
        return Err(Error::InvalidInput("renewal_a_to_mu expects first-return amplitudes".into()));
    }
    let d = a.dim_v;
    let mut mu: Vec<DMatrix<C64>> = vec![DMatrix::zeros(d, d); a.horizon + 1];
    mu[0] = DMatrix::identity(d, d);
    let one = C64::new(1.0, 0.0);
    for n in 1..=a.horizon {
        let mut acc = a.mats[n].clone();
        for k in 1..n {
            acc.gemm(one, &mu[k], &a.mats[n - k], one);
        }
        mu[n] = acc;
    }
    AmplitudeSequence::new(AmplitudeKind::Mu, mu)
}

/// Survival probabilities `s_n = ‖Ũⁿψ‖²` for a state of `V`.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Survival {
    pub s: Vec<f64>,
    /// `1 − s_{n_max}`, the horizon estimate of the return probability.
    pub return_estimate: f64,
    /// Partial sums `Σ_{k<n} s_k`, whose limit is the expected return time.
    pub tau_partial: Vec<f64>,
}

pub fn survival(u: &UnitaryStep, v: &Subspace, psi: &StateVector, n_max: usize) -> Result<Survival> {
    check_subspace(u, v)?;
    u.check_horizon(n_max)?;
    let res = v.residual(&psi.coeffs);
    if res > 1e-10 {
        return Err(Error::Domain(format!("state is not in V: residual {res:e}")));
    }
    let nrm = psi.norm();
    if (nrm - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("state is not normalized: ‖ψ‖ = {nrm}")));
    }
    let mut w = psi.coeffs.clone();
    let mut s = vec![1.0];
    for n in 1..=n_max {
        w = u.apply_at(&w, n)?;
        v.project_out(&mut w);
        s.push(crate::numeric::vec_norm_sq(&w));
    }
    let mut acc = crate::numeric::KahanSum::new();
    let mut tau_partial = Vec::with_capacity(s.len());
    for &x in &s {
        acc.add(x);
        tau_partial.push(acc.value());
    }
    Ok(Survival { return_estimate: 1.0 - s[n_max], s, tau_partial })
}

#[cfg(test)]
mod tests;
