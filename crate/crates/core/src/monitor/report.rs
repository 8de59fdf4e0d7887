use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use super::{
    first_return_converged, first_return_direct, k_dim_minus_nu, k_eigen_ranks, k_frobenius_survival, k_winding,
    return_probability_operator, spectral_decompose, tau_operator, AmplitudeSequence, KMethod, KValue, TailPolicy,
    TauOperator,
};
use crate::error::{Error, Result};
use crate::linops::{Subspace, UnitaryStep};
use crate::numeric::{Interval, TailFit};

pub const REPORT_SCHEMA: &str = "subrec.report/1";

/// Spectral decomposition is skipped above this dimension.
const SPECTRAL_LIMIT: usize = 1500;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReportOptions {
    pub tail: TailPolicy,
    pub recurrence_tol: f64,
    /// Steps for truncated models; defaults to the exactness horizon.
    pub horizon: Option<usize>,
}

impl Default for ReportOptions {
    fn default() -> Self {
        Self { tail: TailPolicy::PowerLaw, recurrence_tol: 1e-6, horizon: None }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    RecurrentFiniteTau,
    Recurrent,
    NotRecurrent,
}

#[derive(Clone, Debug)]
pub struct RecurrenceReport {
    pub dim_v: usize,
    pub horizon: usize,
    pub r_op: DMatrix<C64>,
    pub r_eigenvalues: Vec<f64>,
    pub r_intervals: Vec<Interval>,
    pub r_tail: Option<TailFit>,
    pub tau: TauOperator,
    /// `K` when every method that ran agrees.
    pub k: Option<usize>,
    pub k_methods: Vec<(KMethod, std::result::Result<KValue, String>)>,
    /// `dim H − ν`, when a spectral decomposition was available.
    pub k_dim_minus_nu: Option<usize>,
    pub avg_return_prob: f64,
    pub classification: Classification,
}

impl RecurrenceReport {
    pub fn avg_tau(&self) -> Option<f64> {
        self.tau.average()
    }

    pub fn to_json(&self) -> Value {
        let (tau_op, tau_interval, tau_tail) = match &self.tau {
            TauOperator::Finite { matrix, interval, tail, .. } => (matrix_json(matrix), json!(interval), json!(tail)),
            TauOperator::Divergent { tail, .. } => (json!("divergent"), Value::Null, json!(tail)),
        };
        let r_deficit = match &self.tau {
            TauOperator::Divergent { r_deficit, .. } => json!(r_deficit),
            _ => json!(1.0 - self.r_eigenvalues.last().copied().unwrap_or(1.0)),
        };
        let k_methods: Vec<Value> = self
            .k_methods
            .iter()
            .map(|(m, r)| match r {
                Ok(k) => json!({"method": m, "k": k.k, "raw": k.raw, "residue": k.residue}),
                Err(e) => json!({"method": m, "error": e}),
            })
            .collect();
        json!({
            "schema_version": REPORT_SCHEMA,
            "dim_v": self.dim_v,
            "horizon": self.horizon,
            "R_op": matrix_json(&self.r_op),
            "R_eigenvalues": self.r_eigenvalues,
            "R_intervals": self.r_intervals,
            "tau_op": tau_op,
            "K": self.k.map_or(json!("divergent"), |k| json!(k)),
            "avg_return_prob": self.avg_return_prob,
            "avg_tau": self.avg_tau().map_or(json!("divergent"), |t| json!(t)),
            "avg_tau_rational": self.k.filter(|_| self.avg_tau().is_some()).map(|k| format!("{k}/{}", self.dim_v)),
            "classification": self.classification,
            "diagnostics": {
                "R_tail": self.r_tail,
                "R_deficit": r_deficit,
                "tau_interval": tau_interval,
                "tau_tail": tau_tail,
                "K_methods": k_methods,
                "K_dim_minus_nu": self.k_dim_minus_nu,
            }
        })
    }
}

/// `[re, im]`.
pub fn complex_json(z: C64) -> Value {
    json!([z.re, z.im])
}

/// Row-major nested arrays of `[re, im]` pairs.
pub fn matrix_json(m: &DMatrix<C64>) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| complex_json(m[(i, j)])).collect())).collect())
}

/// Full report. Finite models iterate `Ũ` until the surviving weight vanishes
/// and compute `K` three ways; truncated models use the horizon.
pub fn recurrence_report(u: &UnitaryStep, v: &Subspace, opts: &ReportOptions) -> Result<RecurrenceReport> {
    if !u.is_truncated() {
        let (a, _) = first_return_converged(u, v, 1e-28, 1_000_000)?;
        let mut ks = Vec::new();
        let mut nu = None;
        if u.dim() <= SPECTRAL_LIMIT {
            let dec = spectral_decompose(u)?;
            ks.push((KMethod::EigenRanks, k_eigen_ranks(&dec, v).map_err(|e| e.to_string())));
            nu = Some(k_dim_minus_nu(&dec, v)?);
        }
        ks.push((KMethod::FrobeniusSurvival, k_frobenius_survival(u, v).map_err(|e| e.to_string())));
        ks.push((KMethod::Winding, k_winding(&a).map_err(|e| e.to_string())));
        let mut rep = report_from_amplitudes(&a, opts, ks)?;
        rep.k_dim_minus_nu = nu;
        if nu.is_some() && rep.k.is_some() && nu != rep.k {
            rep.k = None;
        }
        return Ok(rep);
    }
    let n = opts.horizon.or(u.horizon()).ok_or(Error::TruncatedModel)?;
    let a = first_return_direct(u, v, n)?;
    let ks = vec![(KMethod::Winding, k_winding(&a).map_err(|e| e.to_string()))];
    report_from_amplitudes(&a, opts, ks)
}

pub fn report_from_amplitudes(
    a: &AmplitudeSequence,
    opts: &ReportOptions,
    k_methods: Vec<(KMethod, std::result::Result<KValue, String>)>,
) -> Result<RecurrenceReport> {
    let r = return_probability_operator(a, opts.tail)?;
    let tau = tau_operator(a, opts.recurrence_tol)?;
    let deficit = 1.0 - r.eigenvalues.last().copied().unwrap_or(1.0);
    let classification = match (&tau, deficit <= opts.recurrence_tol) {
        (TauOperator::Finite { .. }, true) => Classification::RecurrentFiniteTau,
        (_, true) => Classification::Recurrent,
        _ => Classification::NotRecurrent,
    };
    let oks: Vec<usize> = k_methods.iter().filter_map(|(_, r)| r.as_ref().ok().map(|k| k.k)).collect();
    let all_ok = oks.len() == k_methods.len() && !oks.is_empty();
    let k = if all_ok && oks.iter().all(|&k| k == oks[0]) { Some(oks[0]) } else { None };
    Ok(RecurrenceReport {
        dim_v: a.dim_v,
        horizon: a.horizon,
        avg_return_prob: r.average(),
        r_op: r.matrix,
        r_eigenvalues: r.eigenvalues,
        r_intervals: r.intervals,
        r_tail: r.tail,
        tau,
        k,
        k_methods,
        k_dim_minus_nu: None,
        classification,
    })
}
