use nalgebra::DVector;
use num_complex::Complex64 as C64;

use super::coins::{CoinSpec1D, CoinSpec2D, Lattice1D};
use super::{Label, StateSpace, UnitaryStep};
use crate::error::{Error, Result};

/// Spaces of at least this dimension store the step column-sparse.
pub const DENSE_LIMIT: usize = 4096;

const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// `|k⟩ → |k+1 mod N⟩`.
pub fn build_cyclic_shift(n: usize) -> Result<UnitaryStep> {
    if n == 0 {
        return Err(Error::InvalidDimension("cyclic shift needs N ≥ 1".into()));
    }
    let space = StateSpace::new((0..n as i64).map(|k| Label::site1(k, 0)).collect())?;
    let cols = (0..n).map(|k| vec![((k + 1) % n, ONE)]).collect();
    Ok(UnitaryStep::from_columns(space, cols, 1, 0, Vec::new(), None))
}

/// Swap on `C²` plus the shift on `ℓ²(ℤ)`, truncated to `|x| ≤ W`, with the two
/// named states `ψ = |↑⟩` and `φ = (|↓⟩ + |0⟩)/√2`.
pub struct ShiftFlipModel {
    pub step: UnitaryStep,
    pub psi: DVector<C64>,
    pub phi: DVector<C64>,
}

pub const UP: Label = Label { site: None, internal: 0 };
pub const DOWN: Label = Label { site: None, internal: 1 };

pub fn build_shift_plus_flip(half_width: usize) -> Result<ShiftFlipModel> {
    if half_width < 2 {
        return Err(Error::TruncationTooSmall { got: half_width, min: 2 });
    }
    let w = half_width as i64;
    let mut labels = vec![UP, DOWN];
    labels.extend((-w..=w).map(|x| Label::site1(x, 0)));
    let space = StateSpace::new(labels)?;
    let idx = |x: i64| (x + w) as usize + 2;
    let mut cols = vec![vec![(1, ONE)], vec![(0, ONE)]];
    for x in -w..=w {
        cols.push(if x < w { vec![(idx(x + 1), ONE)] } else { Vec::new() });
    }
    let boundary = vec![idx(-w), idx(w)];
    let step = UnitaryStep::from_columns(space, cols, 1, 1, boundary, Some(half_width - 1));
    let mut psi = DVector::zeros(step.dim());
    psi[0] = ONE;
    let mut phi = DVector::zeros(step.dim());
    let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
    phi[1] = s;
    phi[idx(0)] = s;
    Ok(ShiftFlipModel { step, psi, phi })
}

/// `U = S C` for a 1D coined walk. Finite lattices are built exactly; the
/// half-line and the line are truncated `horizon + 2` sites beyond the coin
/// window, which keeps `Uⁿ` exact for window states while `n ≤ horizon`.
pub fn build_coined_1d(spec: &CoinSpec1D, horizon: usize) -> Result<UnitaryStep> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    for (k, g) in spec.window.iter().enumerate() {
        if !(g.norm() < 1.0) {
            return Err(Error::InvalidCoin(format!("|γ| = {} ≥ 1 at site {}", g.norm(), spec.start + k as i64)));
        }
    }
    if !(spec.default.norm() < 1.0) {
        return Err(Error::InvalidCoin(format!("default |γ| = {} ≥ 1", spec.default.norm())));
    }
    let reach = horizon as i64 + 2;
    let (lo_w, hi_w) = spec.window_range();
    let (lo, hi, reflect_left, reflect_right, truncated) = match spec.lattice {
        Lattice1D::Finite(n) => (0, n as i64 - 1, true, true, false),
        Lattice1D::HalfLine => (0, hi_w.max(0) + reach, true, false, true),
        Lattice1D::Line => (lo_w - reach, hi_w + reach, false, false, true),
    };
    let labels: Vec<Label> = (lo..=hi).flat_map(|x| [Label::site1(x, 0), Label::site1(x, 1)]).collect();
    let space = StateSpace::new(labels)?;
    let up = |x: i64| 2 * (x - lo) as usize;
    let down = |x: i64| 2 * (x - lo) as usize + 1;
    let mut cols = Vec::with_capacity(space.dim());
    for x in lo..=hi {
        let c = spec.coin(x);
        for s in 0..2 {
            let mut col = Vec::with_capacity(2);
            // C e_s = c[0][s] |x,↑⟩ + c[1][s] |x,↓⟩, then shift.
            let a_up = c[0][s];
            let a_down = c[1][s];
            if x < hi {
                col.push((up(x + 1), a_up));
            } else if reflect_right {
                col.push((down(x), a_up));
            }
            if x > lo {
                col.push((down(x - 1), a_down));
            } else if reflect_left {
                col.push((up(x), a_down));
            }
            cols.push(col);
        }
    }
    let mut boundary = Vec::new();
    if truncated {
        boundary.extend([up(hi), down(hi)]);
        if !reflect_left {
            boundary.extend([up(lo), down(lo)]);
        }
    }
    let (margin, h) = if truncated { (1, Some(horizon)) } else { (0, None) };
    Ok(UnitaryStep::from_columns(space, cols, 1, margin, boundary, h))
}

/// Index of `(x, y, s)` in the 2D box of half-width `l` with `d` internal states.
pub(crate) fn box_index(l: i64, d: usize, x: i64, y: i64, s: usize) -> usize {
    let side = (2 * l + 1) as usize;
    (((y + l) as usize) * side + (x + l) as usize) * d + s
}

/// `U = S C` on the box `|x|, |y| ≤ horizon + 2` around the origin.
pub fn build_coined_2d(spec: &CoinSpec2D, horizon: usize) -> Result<UnitaryStep> {
    if horizon == 0 {
        return Err(Error::InvalidInput("horizon must be at least 1".into()));
    }
    let spec = CoinSpec2D::new(spec.lattice, spec.coin.clone())?;
    let d = spec.lattice.internal_dim();
    let l = horizon as i64 + 2;
    let mut labels = Vec::new();
    for y in -l..=l {
        for x in -l..=l {
            for s in 0..d {
                labels.push(Label::site2(x, y, s as u8));
            }
        }
    }
    let space = StateSpace::new(labels)?;
    let mut cols = Vec::with_capacity(space.dim());
    let mut boundary = Vec::new();
    for y in -l..=l {
        for x in -l..=l {
            let edge = x.abs() == l || y.abs() == l;
            for k in 0..d {
                if edge {
                    boundary.push(box_index(l, d, x, y, k));
                }
                let mut col = Vec::with_capacity(d);
                for s in 0..d {
                    let (dx, dy) = spec.lattice.displacement(s);
                    let (nx, ny) = (x + dx, y + dy);
                    if nx.abs() <= l && ny.abs() <= l {
                        let v = spec.coin[(s, k)];
                        if v != C64::new(0.0, 0.0) {
                            col.push((box_index(l, d, nx, ny, s), v));
                        }
                    }
                }
                cols.push(col);
            }
        }
    }
    Ok(UnitaryStep::from_columns(space, cols, 1, 1, boundary, Some(horizon)))
}
