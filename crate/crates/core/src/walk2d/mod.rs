//! Return amplitudes of the origin site of two-dimensional coined walks with a
//! constant coin, and the return-probability operator built from them.
//!
//! `μ_n = P Uⁿ P` is obtained by evolving the site frame on a box, one step at a
//! time, without ever forming `U`. Only cells reachable in `n` steps that can
//! still return by step `n_max` are kept, and only the class of cells occupied
//! at the current step is touched.

mod config;

pub use config::{parse_config, Walk2DConfig};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::linops::{build_coined_2d, CoinSpec2D, Label, Lattice2D, Subspace};
use crate::monitor::{
    mu_sequence, renewal_mu_to_a, return_probability_operator, state_return_probability, AmplitudeKind,
    AmplitudeSequence, ReturnOperator, TailPolicy,
};
use crate::numeric::{inner, max_abs_diff, vec_norm_sq, Interval};

/// Default memory budget for the streaming evolution (bytes).
pub const DEFAULT_MEMORY_BUDGET: u64 = 2 << 30;
/// Eigenvalues closer than this are reported as a degenerate pair.
pub const DEGENERACY_TOL: f64 = 1e-3;
pub const WALK2D_SCHEMA: &str = "subrec.walk2d/1";

#[derive(Clone, Debug, PartialEq)]
pub struct Walk2DJob {
    pub spec: CoinSpec2D,
    pub n_max: usize,
    pub tail: TailPolicy,
    pub memory_budget: u64,
}

impl Walk2DJob {
    pub fn new(spec: CoinSpec2D, n_max: usize) -> Result<Self> {
        if n_max == 0 {
            return Err(Error::InvalidInput("n_max must be at least 1".into()));
        }
        Ok(Self { spec, n_max, tail: TailPolicy::PowerLaw, memory_budget: DEFAULT_MEMORY_BUDGET })
    }

    pub fn named(lattice: Lattice2D, coin: &str, n_max: usize) -> Result<Self> {
        let c = crate::linops::named::by_name(lattice, coin)
            .ok_or_else(|| Error::InvalidInput(format!("unknown coin '{coin}' for {lattice:?}")))?;
        Self::new(CoinSpec2D::new(lattice, c)?, n_max)
    }

    /// Bytes held by the evolution buffers.
    pub fn required_bytes(&self) -> u64 {
        required_bytes(self.spec.lattice, self.n_max, 0)
    }
}

/// Positions after `n` steps satisfy `x + y ≡ n (mod period)`.
fn period(lattice: Lattice2D) -> usize {
    match lattice {
        Lattice2D::Square => 2,
        Lattice2D::Hexagonal => 3,
    }
}

/// Fewest steps from the origin to `(x, y)`.
fn steps_from_origin(lattice: Lattice2D, x: i64, y: i64) -> i64 {
    match lattice {
        Lattice2D::Square => x.abs() + y.abs(),
        Lattice2D::Hexagonal => 3 * 0.max(-x).max(-y) + x + y,
    }
}

/// Box half-width holding every cell that is reachable by step `n` and can
/// still return by step `n_max + extra`, plus a margin for the sources.
fn half_width(lattice: Lattice2D, n_max: usize, extra: usize) -> usize {
    let m = n_max + extra;
    match lattice {
        Lattice2D::Square => m / 2 + 2,
        Lattice2D::Hexagonal => m / 3 + 2,
    }
}

fn required_bytes(lattice: Lattice2D, n_max: usize, extra: usize) -> u64 {
    let d = lattice.internal_dim() as u64;
    let side = (2 * half_width(lattice, n_max, extra) + 1) as u64;
    period(lattice) as u64 * side * side * d * d * std::mem::size_of::<C64>() as u64
}

/// Exact `μ_n` for `n ≤ n_max` at the origin site, in the internal basis.
pub fn origin_mu_sequence(job: &Walk2DJob) -> Result<AmplitudeSequence> {
    let d = job.spec.lattice.internal_dim();
    let disp: Vec<_> = (0..d).map(|s| job.spec.lattice.displacement(s)).collect();
    stream_mu(job, 0, &disp)
}

/// As [`origin_mu_sequence`], keeping cells up to `extra` steps further from
/// the origin; used to check that the light-cone truncation is exact.
pub fn origin_mu_sequence_padded(job: &Walk2DJob, extra: usize) -> Result<AmplitudeSequence> {
    let d = job.spec.lattice.internal_dim();
    let disp: Vec<_> = (0..d).map(|s| job.spec.lattice.displacement(s)).collect();
    stream_mu(job, extra, &disp)
}

/// `disp[s]` is the move of internal state `s`; it must be a relabeling of
/// the lattice's own directions.
fn stream_mu(job: &Walk2DJob, extra: usize, disp: &[(i64, i64)]) -> Result<AmplitudeSequence> {
    let spec = CoinSpec2D::new(job.spec.lattice, job.spec.coin.clone())?;
    let n_max = job.n_max;
    if n_max == 0 {
        return Err(Error::InvalidInput("n_max must be at least 1".into()));
    }
    let lattice = spec.lattice;
    let need = required_bytes(lattice, n_max, extra);
    if need > job.memory_budget {
        return Err(Error::MemoryBudget { required: need, budget: job.memory_budget });
    }
    let d = lattice.internal_dim();
    let p = period(lattice);
    let l = half_width(lattice, n_max, extra) as i64;
    let side = 2 * l + 1;
    let block = d * d;
    let zero = C64::new(0.0, 0.0);
    // ring of buffers: step n lives in buffer n mod p, which last held step n − p
    // on the same class of cells
    let mut bufs = vec![vec![zero; (side * side) as usize * block]; p];
    let cell = |x: i64, y: i64| ((y + l) * side + (x + l)) as usize;
    let origin = cell(0, 0);
    for s in 0..d {
        bufs[0][origin * block + s * d + s] = C64::new(1.0, 0.0);
    }
    let coin: Vec<C64> = (0..d).flat_map(|s| (0..d).map(move |j| (s, j))).map(|(s, j)| spec.coin[(s, j)]).collect();
    let horizon = (n_max + extra) as i64;
    let in_cone = |n: i64, x: i64, y: i64| {
        n >= 0 && steps_from_origin(lattice, x, y) <= n && steps_from_origin(lattice, -x, -y) <= horizon - n
    };

    let mut mats = Vec::with_capacity(n_max + 1);
    mats.push(DMatrix::identity(d, d));
    let mut tmp = vec![zero; block];
    for n in 1..=n_max {
        let ni = n as i64;
        let (before, rest) = bufs.split_at_mut(n % p);
        let (dst_buf, after) = rest.split_first_mut().expect("ring has p buffers");
        let src_buf: &Vec<C64> = if n % p == 0 { &after[p - 2] } else { &before[n % p - 1] };
        for y in -(l - 1)..=(l - 1) {
            let first = -(l - 1) + (ni - y - (-(l - 1))).rem_euclid(p as i64);
            let mut x = first;
            while x <= l - 1 {
                let now = in_cone(ni, x, y);
                if now || in_cone(ni - p as i64, x, y) {
                    let t = cell(x, y);
                    let dst = &mut dst_buf[t * block..(t + 1) * block];
                    if !now {
                        dst.fill(zero);
                    } else {
                        for s in 0..d {
                            let (dx, dy) = disp[s];
                            let src = cell(x - dx, y - dy) * block;
                            let row = &mut tmp[s * d..(s + 1) * d];
                            row.fill(zero);
                            for j in 0..d {
                                let cij = coin[s * d + j];
                                if cij == zero {
                                    continue;
                                }
                                let from = &src_buf[src + j * d..src + (j + 1) * d];
                                for k in 0..d {
                                    row[k] += cij * from[k];
                                }
                            }
                        }
                        dst.copy_from_slice(&tmp);
                    }
                }
                x += p as i64;
            }
        }
        let o = &dst_buf[origin * block..(origin + 1) * block];
        mats.push(DMatrix::from_row_slice(d, d, o));
    }
    AmplitudeSequence::new(AmplitudeKind::Mu, mats)
}

/// The same sequence from an assembled step operator (the generic path).
pub fn origin_mu_generic(spec: &CoinSpec2D, n_max: usize) -> Result<AmplitudeSequence> {
    let u = build_coined_2d(spec, n_max)?;
    let labels: Vec<Label> = (0..spec.lattice.internal_dim()).map(|s| Label::site2(0, 0, s as u8)).collect();
    let v = Subspace::from_labels(u.space(), &labels)?;
    mu_sequence(&u, &v, n_max)
}

#[derive(Clone, Debug, Serialize)]
pub struct DegeneratePair {
    pub i: usize,
    pub j: usize,
    pub gap: f64,
}

#[derive(Clone, Debug)]
pub struct R2D {
    pub n_max: usize,
    pub eigenvalues: Vec<f64>,
    pub intervals: Vec<Interval>,
    pub degenerate: Vec<DegeneratePair>,
    pub operator: ReturnOperator,
}

impl R2D {
    pub fn from_mu(mu: &AmplitudeSequence, tail: TailPolicy) -> Result<Self> {
        let a = renewal_mu_to_a(mu)?;
        let operator = return_probability_operator(&a, tail)?;
        let eigenvalues = operator.eigenvalues.clone();
        let degenerate = eigenvalues
            .windows(2)
            .enumerate()
            .filter(|(_, w)| (w[0] - w[1]).abs() < DEGENERACY_TOL)
            .map(|(i, w)| DegeneratePair { i, j: i + 1, gap: (w[0] - w[1]).abs() })
            .collect();
        Ok(Self { n_max: mu.horizon, intervals: operator.intervals.clone(), eigenvalues, degenerate, operator })
    }

    pub fn to_json(&self, job: &Walk2DJob) -> Value {
        json!({
            "schema_version": WALK2D_SCHEMA,
            "lattice": format!("{:?}", job.spec.lattice).to_lowercase(),
            "n_max": self.n_max,
            "tail": format!("{:?}", job.tail).to_lowercase(),
            "eigenvalues": self.eigenvalues,
            "intervals": self.intervals.iter().map(|i| [i.lo, i.hi]).collect::<Vec<_>>(),
            "degenerate_pairs": self.degenerate,
            "tail_fit": self.operator.tail,
        })
    }
}

pub fn r_eigenvalues(job: &Walk2DJob) -> Result<R2D> {
    R2D::from_mu(&origin_mu_sequence(job)?, job.tail)
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct Curve2DRow {
    pub t: f64,
    pub state: f64,
    /// `⟨ψ|R_Wψ⟩` for each nested subspace `W`.
    pub subspaces: Vec<f64>,
}

/// Return probabilities along `ψ(t)` for each of the given subspaces of the
/// site (orthonormal frames in internal coordinates). Every path state must
/// lie in every subspace.
pub fn subspace_curves_2d(
    mu: &AmplitudeSequence,
    subspaces: &[Vec<DVector<C64>>],
    path: &[(f64, DVector<C64>)],
) -> Result<Vec<Curve2DRow>> {
    let d = mu.dim_v;
    let mut ops = Vec::with_capacity(subspaces.len());
    let mut frames = Vec::with_capacity(subspaces.len());
    for vs in subspaces {
        let w = Subspace::new(d, vs)?.frame().clone();
        let a = renewal_mu_to_a(&mu.compress(&w))?;
        ops.push(return_probability_operator(&a, TailPolicy::None)?.matrix);
        frames.push(w);
    }
    path.iter()
        .map(|(t, psi)| {
            if (vec_norm_sq(psi) - 1.0).abs() > 1e-10 {
                return Err(Error::Domain(format!("path state at t = {t} is not normalized")));
            }
            let state = state_return_probability(mu, psi)?.partial;
            let subspaces = frames
                .iter()
                .zip(&ops)
                .map(|(w, r)| {
                    let c = w.adjoint() * psi;
                    if (vec_norm_sq(&c) - 1.0).abs() > 1e-9 {
                        return Err(Error::Domain(format!("path state at t = {t} leaves a subspace")));
                    }
                    Ok(inner(&c, &(r * &c)).re)
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(Curve2DRow { t: *t, state, subspaces })
        })
        .collect()
}

pub fn curves_csv(rows: &[Curve2DRow], names: &[&str]) -> String {
    let mut out = format!("# schema={} {}\nt,state_return_prob", crate::site1d::CURVE_SCHEMA, "walk2d");
    for n in names {
        out.push(',');
        out.push_str(n);
    }
    out.push('\n');
    for r in rows {
        out.push_str(&format!("{:.12},{:.12}", r.t, r.state));
        for v in &r.subspaces {
            out.push_str(&format!(",{v:.12}"));
        }
        out.push('\n');
    }
    out
}

/// Largest entry difference between two `μ` sequences over their common range.
pub fn mu_difference(a: &AmplitudeSequence, b: &AmplitudeSequence) -> f64 {
    a.mats.iter().zip(&b.mats).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max)
}
