use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use super::{AmplitudeKind, AmplitudeSequence};
use crate::error::{Error, Result};
use crate::numeric::{fit_power_tail, frobenius_sq, hermitian_eigen, vec_norm_sq, Interval, KahanSum, MatrixSum, TailFit};
use crate::schur::TAIL_SAFETY;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Default)]
pub enum TailPolicy {
    /// Partial sums only; intervals collapse to points.
    None,
    /// Power-law fit of the last decade, reported as an upper interval end.
    #[default]
    PowerLaw,
}

impl std::str::FromStr for TailPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "none" => Ok(Self::None),
            "powerlaw" | "power-law" => Ok(Self::PowerLaw),
            _ => Err(Error::InvalidInput(format!("unknown tail policy '{s}'"))),
        }
    }
}

/// `R = Σ a_n† a_n` with its spectrum, descending.
#[derive(Clone, Debug)]
pub struct ReturnOperator {
    pub matrix: DMatrix<C64>,
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: DMatrix<C64>,
    pub tail: Option<TailFit>,
    /// `[λ, min(λ + 2·bound, 1)]`: the unseen tail is positive semidefinite
    /// with trace at most the fitted bound.
    pub intervals: Vec<Interval>,
}

impl ReturnOperator {
    /// Mean return probability `Tr R / dim V`.
    pub fn average(&self) -> f64 {
        self.matrix.trace().re / self.matrix.nrows() as f64
    }

    pub fn tail_bound(&self) -> f64 {
        self.tail.map_or(0.0, |t| TAIL_SAFETY * t.bound)
    }
}

fn require_a(a: &AmplitudeSequence) -> Result<()> {
    if a.kind != AmplitudeKind::A {
        return Err(Error::InvalidInput("expected first-return amplitudes".into()));
    }
    Ok(())
}

/// Frame coordinates of a unit vector of `V`.
fn check_state(psi: &DVector<C64>, dim_v: usize) -> Result<()> {
    if psi.len() != dim_v {
        return Err(Error::Domain(format!("state has {} coordinates, V has dimension {dim_v}", psi.len())));
    }
    let n = vec_norm_sq(psi).sqrt();
    if (n - 1.0).abs() > 1e-10 {
        return Err(Error::Domain(format!("state is not normalized: ‖ψ‖ = {n}")));
    }
    Ok(())
}

pub fn return_probability_operator(a: &AmplitudeSequence, policy: TailPolicy) -> Result<ReturnOperator> {
    require_a(a)?;
    let d = a.dim_v;
    let mut acc = MatrixSum::new(d, d);
    let mut terms = vec![0.0; a.horizon + 1];
    for n in 1..=a.horizon {
        acc.add(&(a.mats[n].adjoint() * &a.mats[n]));
        terms[n] = frobenius_sq(&a.mats[n]);
    }
    let matrix = crate::numeric::hermitian_part(&acc.value());
    let (eigenvalues, eigenvectors) = hermitian_eigen(&matrix);
    let tail = match policy {
        TailPolicy::None => None,
        TailPolicy::PowerLaw => fit_power_tail(&terms),
    };
    let intervals = eigenvalues
        .iter()
        .map(|&l| match (policy, tail) {
            (TailPolicy::None, _) => Interval::point(l),
            (_, Some(t)) => Interval { lo: l, hi: (l + TAIL_SAFETY * t.bound).min(1.0).max(l) },
            (_, None) => Interval { lo: l, hi: 1.0f64.max(l) },
        })
        .collect();
    Ok(ReturnOperator { matrix, eigenvalues, eigenvectors, tail, intervals })
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ValueWithTail {
    pub value: f64,
    pub interval: Interval,
}

/// `Prob(ψ → φ) = Σ |⟨φ|a_nψ⟩|²`. The upper end is the fitted tail of
/// `‖a_nψ‖²`, never more than the rigorous mass deficit `1 − Σ‖a_nψ‖²`.
pub fn transition_probability(a: &AmplitudeSequence, psi: &DVector<C64>, phi: &DVector<C64>) -> Result<ValueWithTail> {
    require_a(a)?;
    check_state(psi, a.dim_v)?;
    check_state(phi, a.dim_v)?;
    let mut value = KahanSum::new();
    let mut mass = KahanSum::new();
    let mut terms = vec![0.0; a.horizon + 1];
    for n in 1..=a.horizon {
        let w = &a.mats[n] * psi;
        value.add(crate::numeric::inner(phi, &w).norm_sqr());
        terms[n] = vec_norm_sq(&w);
        mass.add(terms[n]);
    }
    let v = value.value();
    let deficit = (1.0 - mass.value()).max(0.0);
    let extra = fit_power_tail(&terms).map_or(deficit, |t| (TAIL_SAFETY * t.bound).min(deficit));
    Ok(ValueWithTail { value: v, interval: Interval { lo: v, hi: v + extra } })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub enum ReturnTime {
    Finite { value: f64, interval: Interval, mass: f64, tail: Option<TailFit> },
    /// The state is not recurrent to the given tolerance, or `Σ n‖a_nψ‖²`
    /// does not converge according to the tail fit.
    Divergent { mass: f64, deficit: f64, tail: Option<TailFit> },
}

impl ReturnTime {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite { value, .. } => Some(*value),
            Self::Divergent { .. } => None,
        }
    }
}

/// Tail bound of a non-negative sequence, zero when it has already vanished.
fn sequence_tail(terms: &[f64]) -> (Option<TailFit>, f64) {
    match fit_power_tail(terms) {
        Some(t) => (Some(t), TAIL_SAFETY * t.bound),
        None => {
            let vanished = terms.last().is_some_and(|&t| t == 0.0);
            (None, if vanished { 0.0 } else { f64::INFINITY })
        }
    }
}

/// Expected return time `τ(ψ) = Σ n‖a_nψ‖²` of a state given in frame coordinates.
pub fn expected_return_time(a: &AmplitudeSequence, psi: &DVector<C64>, recurrence_tol: f64) -> Result<ReturnTime> {
    require_a(a)?;
    check_state(psi, a.dim_v)?;
    let mut mass = KahanSum::new();
    let mut tau = KahanSum::new();
    let mut weighted = vec![0.0; a.horizon + 1];
    for n in 1..=a.horizon {
        let t = vec_norm_sq(&(&a.mats[n] * psi));
        mass.add(t);
        tau.add(n as f64 * t);
        weighted[n] = n as f64 * t;
    }
    let mass = mass.value();
    let deficit = 1.0 - mass;
    let (tail, bound) = sequence_tail(&weighted);
    if deficit > recurrence_tol || !bound.is_finite() {
        return Ok(ReturnTime::Divergent { mass, deficit, tail });
    }
    let value = tau.value();
    Ok(ReturnTime::Finite { value, interval: Interval { lo: value, hi: value + bound }, mass, tail })
}

#[derive(Clone, Debug, PartialEq)]
pub enum TauOperator {
    Finite { matrix: DMatrix<C64>, average: f64, interval: Interval, tail: Option<TailFit> },
    /// `‖R − I‖` exceeds the tolerance, or the weighted tail is not summable.
    Divergent { r_deficit: f64, tail: Option<TailFit> },
}

impl TauOperator {
    pub fn average(&self) -> Option<f64> {
        match self {
            Self::Finite { average, .. } => Some(*average),
            Self::Divergent { .. } => None,
        }
    }
}

/// `τ = Σ n a_n† a_n`, defined when `V` is recurrent (`R = I`).
pub fn tau_operator(a: &AmplitudeSequence, recurrence_tol: f64) -> Result<TauOperator> {
    require_a(a)?;
    let d = a.dim_v;
    let r = return_probability_operator(a, TailPolicy::None)?;
    let r_deficit = 1.0 - r.eigenvalues.last().copied().unwrap_or(1.0);
    let mut acc = MatrixSum::new(d, d);
    let mut weighted = vec![0.0; a.horizon + 1];
    for n in 1..=a.horizon {
        let m = a.mats[n].adjoint() * &a.mats[n];
        acc.add(&m.scale(n as f64));
        weighted[n] = n as f64 * frobenius_sq(&a.mats[n]);
    }
    let (tail, bound) = sequence_tail(&weighted);
    if r_deficit > recurrence_tol || !bound.is_finite() {
        return Ok(TauOperator::Divergent { r_deficit, tail });
    }
    let matrix = crate::numeric::hermitian_part(&acc.value());
    let average = matrix.trace().re / d as f64;
    Ok(TauOperator::Finite { matrix, average, interval: Interval { lo: average, hi: average + bound / d as f64 }, tail })
}
