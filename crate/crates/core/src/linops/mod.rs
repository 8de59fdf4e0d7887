//! State spaces, strictly local step operators and the lattice builders.
//!
//! Basis conventions: on 1D lattices `e_{2x} = |x,↑⟩`, `e_{2x+1} = |x,↓⟩` (offset
//! by the leftmost site of a truncation); on 2D lattices the internal states of a
//! site are consecutive, in the order of [`Lattice2D`].

mod builders;
mod coins;

pub use builders::{
    build_coined_1d, build_coined_2d, build_cyclic_shift, build_shift_plus_flip, ShiftFlipModel, DENSE_LIMIT,
};
pub use coins::{named, CoinSpec1D, CoinSpec2D, Lattice1D, Lattice2D};

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;

use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Basis-state label: an optional lattice site and an internal index.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Label {
    pub site: Option<[i64; 2]>,
    pub internal: u8,
}

impl Label {
    pub fn site1(x: i64, internal: u8) -> Self {
        Self { site: Some([x, 0]), internal }
    }

    pub fn site2(x: i64, y: i64, internal: u8) -> Self {
        Self { site: Some([x, y]), internal }
    }

    /// A state not attached to a lattice site.
    pub fn aux(internal: u8) -> Self {
        Self { site: None, internal }
    }
}

#[derive(Clone, Debug)]
pub struct StateSpace {
    labels: Vec<Label>,
    index: HashMap<Label, usize>,
    /// `adjacency[k]`: states reachable from `k` in one step.
    adjacency: Vec<Vec<usize>>,
}

impl StateSpace {
    fn new(labels: Vec<Label>) -> Result<Self> {
        if labels.is_empty() {
            return Err(Error::InvalidDimension("empty state space".into()));
        }
        let mut index = HashMap::with_capacity(labels.len());
        for (k, l) in labels.iter().enumerate() {
            if index.insert(*l, k).is_some() {
                return Err(Error::InvalidInput(format!("duplicate label {l:?}")));
            }
        }
        let adjacency = vec![Vec::new(); labels.len()];
        Ok(Self { labels, index, adjacency })
    }

    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[Label] {
        &self.labels
    }

    pub fn index_of(&self, label: &Label) -> Option<usize> {
        self.index.get(label).copied()
    }

    pub fn neighbors(&self, k: usize) -> &[usize] {
        &self.adjacency[k]
    }

    /// Unit vector on a labelled state.
    pub fn basis(&self, label: &Label) -> Result<DVector<C64>> {
        let k = self.index_of(label).ok_or_else(|| Error::InvalidInput(format!("unknown label {label:?}")))?;
        let mut v = DVector::zeros(self.dim());
        v[k] = C64::new(1.0, 0.0);
        Ok(v)
    }
}

#[derive(Clone, Debug)]
enum Action {
    Dense(DMatrix<C64>),
    /// `cols[k]` lists the nonzero entries `(row, value)` of column `k`.
    Sparse(Vec<Vec<(usize, C64)>>),
}

/// A strictly local step operator on a finite state space, possibly the
/// truncation of an infinite lattice.
#[derive(Clone, Debug)]
pub struct UnitaryStep {
    space: StateSpace,
    action: Action,
    locality_radius: usize,
    truncation_margin: usize,
    /// States in the outer `truncation_margin` layers; an amplitude there cannot
    /// be stepped forward exactly.
    boundary: Vec<usize>,
    /// Steps that stay exact for states in the region of interest; `None` for
    /// genuinely finite models.
    horizon: Option<usize>,
}

impl UnitaryStep {
    fn from_columns(
        mut space: StateSpace,
        cols: Vec<Vec<(usize, C64)>>,
        locality_radius: usize,
        truncation_margin: usize,
        boundary: Vec<usize>,
        horizon: Option<usize>,
    ) -> Self {
        let n = space.dim();
        for (k, col) in cols.iter().enumerate() {
            let mut adj: Vec<usize> = col.iter().map(|&(r, _)| r).collect();
            adj.sort_unstable();
            adj.dedup();
            space.adjacency[k] = adj;
        }
        let action = if n < DENSE_LIMIT {
            let mut m = DMatrix::zeros(n, n);
            for (k, col) in cols.iter().enumerate() {
                for &(r, v) in col {
                    m[(r, k)] += v;
                }
            }
            Action::Dense(m)
        } else {
            Action::Sparse(cols)
        };
        Self { space, action, locality_radius, truncation_margin, boundary, horizon }
    }

    /// A genuinely finite model from a dense unitary matrix on unlabelled states.
    pub fn from_dense(m: DMatrix<C64>) -> Result<Self> {
        let n = m.nrows();
        if n == 0 || m.ncols() != n {
            return Err(Error::InvalidDimension(format!("{}×{} step matrix", m.nrows(), m.ncols())));
        }
        let dev = crate::numeric::max_abs_diff(&(m.adjoint() * &m), &DMatrix::identity(n, n));
        if dev > 1e-12 {
            return Err(Error::InvalidInput(format!("step matrix is not unitary: ‖U†U − I‖_max = {dev:e}")));
        }
        let labels = (0..n).map(|k| Label::site1(k as i64, 0)).collect();
        let space = StateSpace::new(labels)?;
        let cols = (0..n)
            .map(|k| (0..n).filter(|&r| m[(r, k)] != ZERO).map(|r| (r, m[(r, k)])).collect())
            .collect();
        Ok(Self::from_columns(space, cols, 1, 0, Vec::new(), None))
    }

    pub fn space(&self) -> &StateSpace {
        &self.space
    }

    pub fn dim(&self) -> usize {
        self.space.dim()
    }

    pub fn locality_radius(&self) -> usize {
        self.locality_radius
    }

    pub fn truncation_margin(&self) -> usize {
        self.truncation_margin
    }

    pub fn horizon(&self) -> Option<usize> {
        self.horizon
    }

    pub fn is_truncated(&self) -> bool {
        self.horizon.is_some()
    }

    pub fn is_dense(&self) -> bool {
        matches!(self.action, Action::Dense(_))
    }

    pub fn boundary(&self) -> &[usize] {
        &self.boundary
    }

    /// Fails with [`Error::HorizonExceeded`] if `n` steps are beyond the exactness horizon.
    pub fn check_horizon(&self, n: usize) -> Result<()> {
        match self.horizon {
            Some(h) if n > h => Err(Error::HorizonExceeded { requested: n, horizon: h }),
            _ => Ok(()),
        }
    }

    pub fn entry(&self, row: usize, col: usize) -> C64 {
        match &self.action {
            Action::Dense(m) => m[(row, col)],
            Action::Sparse(cols) => cols[col].iter().filter(|(r, _)| *r == row).map(|(_, v)| *v).sum(),
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        match &self.action {
            Action::Dense(m) => m.clone(),
            Action::Sparse(cols) => {
                let n = self.dim();
                let mut m = DMatrix::zeros(n, n);
                for (k, col) in cols.iter().enumerate() {
                    for &(r, v) in col {
                        m[(r, k)] += v;
                    }
                }
                m
            }
        }
    }

    /// One application of `U`. `step` is only used to label a contamination error.
    pub fn apply_at(&self, psi: &DVector<C64>, step: usize) -> Result<DVector<C64>> {
        if psi.len() != self.dim() {
            return Err(Error::InvalidInput(format!("vector of length {} on a space of dimension {}", psi.len(), self.dim())));
        }
        if self.boundary.iter().any(|&b| psi[b] != ZERO) {
            return Err(Error::Contaminated { step });
        }
        Ok(match &self.action {
            Action::Dense(m) => m * psi,
            Action::Sparse(cols) => {
                let mut out = DVector::zeros(self.dim());
                for (k, &a) in psi.iter().enumerate() {
                    if a != ZERO {
                        for &(r, v) in &cols[k] {
                            out[r] += v * a;
                        }
                    }
                }
                out
            }
        })
    }

    pub fn apply(&self, psi: &DVector<C64>) -> Result<DVector<C64>> {
        self.apply_at(psi, 1)
    }

    /// `Uⁿψ` by repeated application.
    pub fn apply_power(&self, psi: &StateVector, n: usize) -> Result<StateVector> {
        self.check_horizon(n)?;
        let mut v = psi.coeffs.clone();
        for step in 1..=n {
            v = self.apply_at(&v, step)?;
        }
        Ok(StateVector { coeffs: v, normalized: psi.normalized })
    }
}

/// Orthonormal frame spanning the absorbing subspace `V`.
#[derive(Clone, Debug)]
pub struct Subspace {
    frame: DMatrix<C64>,
    /// Rows where some frame vector is nonzero.
    support: Vec<usize>,
}

impl Subspace {
    pub fn new(space_dim: usize, vectors: &[DVector<C64>]) -> Result<Self> {
        if vectors.is_empty() {
            return Err(Error::InvalidDimension("subspace needs at least one vector".into()));
        }
        if vectors.len() > space_dim {
            return Err(Error::InvalidDimension(format!("{} frame vectors in dimension {space_dim}", vectors.len())));
        }
        let mut frame = DMatrix::zeros(space_dim, vectors.len());
        for (j, v) in vectors.iter().enumerate() {
            if v.len() != space_dim {
                return Err(Error::InvalidInput(format!("frame vector of length {} in dimension {space_dim}", v.len())));
            }
            frame.set_column(j, v);
        }
        let gram = frame.adjoint() * &frame;
        let dev = crate::numeric::max_abs_diff(&gram, &DMatrix::identity(vectors.len(), vectors.len()));
        if dev > 1e-12 {
            return Err(Error::InvalidInput(format!("frame is not orthonormal: ‖G − I‖_max = {dev:e}")));
        }
        let support = (0..space_dim).filter(|&r| frame.row(r).iter().any(|z| *z != ZERO)).collect();
        Ok(Self { frame, support })
    }

    /// Span of labelled basis states.
    pub fn from_labels(space: &StateSpace, labels: &[Label]) -> Result<Self> {
        let vs: Result<Vec<_>> = labels.iter().map(|l| space.basis(l)).collect();
        Self::new(space.dim(), &vs?)
    }

    pub fn dim_v(&self) -> usize {
        self.frame.ncols()
    }

    pub fn space_dim(&self) -> usize {
        self.frame.nrows()
    }

    pub fn frame(&self) -> &DMatrix<C64> {
        &self.frame
    }

    pub fn vector(&self, j: usize) -> DVector<C64> {
        self.frame.column(j).into_owned()
    }

    /// Frame coordinates `F†w`.
    pub fn coords(&self, w: &DVector<C64>) -> DVector<C64> {
        let mut out = DVector::zeros(self.dim_v());
        for j in 0..self.dim_v() {
            let mut s = ZERO;
            for &r in &self.support {
                s += self.frame[(r, j)].conj() * w[r];
            }
            out[j] = s;
        }
        out
    }

    /// `F c`.
    pub fn embed(&self, c: &DVector<C64>) -> DVector<C64> {
        &self.frame * c
    }

    /// `w ← (I − P) w`, returning the removed coordinates.
    pub fn project_out(&self, w: &mut DVector<C64>) -> DVector<C64> {
        let c = self.coords(w);
        for &r in &self.support {
            let mut s = ZERO;
            for j in 0..self.dim_v() {
                s += self.frame[(r, j)] * c[j];
            }
            w[r] -= s;
        }
        c
    }

    /// `‖(I − P) ψ‖`.
    pub fn residual(&self, psi: &DVector<C64>) -> f64 {
        let mut w = psi.clone();
        self.project_out(&mut w);
        crate::numeric::vec_norm_sq(&w).sqrt()
    }
}

/// Vector over the labels of a state space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    pub coeffs: DVector<C64>,
    pub normalized: bool,
}

impl StateVector {
    pub fn normalized(coeffs: DVector<C64>) -> Result<Self> {
        let n = crate::numeric::vec_norm_sq(&coeffs).sqrt();
        if (n - 1.0).abs() > 1e-12 {
            return Err(Error::Domain(format!("state is not normalized: ‖ψ‖ = {n}")));
        }
        Ok(Self { coeffs, normalized: true })
    }

    pub fn raw(coeffs: DVector<C64>) -> Self {
        Self { coeffs, normalized: false }
    }

    pub fn norm(&self) -> f64 {
        crate::numeric::vec_norm_sq(&self.coeffs).sqrt()
    }
}
