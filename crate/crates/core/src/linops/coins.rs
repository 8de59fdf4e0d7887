use nalgebra::DMatrix;
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Which one-dimensional lattice the coins live on.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Lattice1D {
    /// Sites `0, 1, 2, …` reflecting at 0.
    HalfLine,
    /// Sites `0, …, N−1` reflecting at both ends.
    Finite(usize),
    /// All integers.
    Line,
}

/// Site coins `C_x = [[ρ, −γ], [γ̄, ρ]]` in the basis `(↑, ↓)`, given by `γ_{2x}`
/// on an explicit window and a default value elsewhere.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinSpec1D {
    pub lattice: Lattice1D,
    /// First site of the window.
    pub start: i64,
    pub window: Vec<C64>,
    /// `γ` outside the window (unused on finite lattices).
    pub default: C64,
}

impl CoinSpec1D {
    pub fn half_line(window: Vec<C64>, default: C64) -> Result<Self> {
        Self { lattice: Lattice1D::HalfLine, start: 0, window, default }.validated()
    }

    pub fn finite(gammas: Vec<C64>) -> Result<Self> {
        let n = gammas.len();
        if n == 0 {
            return Err(Error::InvalidDimension("finite lattice needs at least one site".into()));
        }
        Self { lattice: Lattice1D::Finite(n), start: 0, window: gammas, default: C64::new(0.0, 0.0) }.validated()
    }

    pub fn line(start: i64, window: Vec<C64>, default: C64) -> Result<Self> {
        Self { lattice: Lattice1D::Line, start, window, default }.validated()
    }

    pub fn constant_line(gamma: C64) -> Result<Self> {
        Self::line(0, Vec::new(), gamma)
    }

    fn validated(self) -> Result<Self> {
        for (k, g) in self.window.iter().enumerate() {
            if !(g.norm() < 1.0) {
                return Err(Error::InvalidCoin(format!("|γ| = {} ≥ 1 at site {}", g.norm(), self.start + k as i64)));
            }
        }
        if !(self.default.norm() < 1.0) {
            return Err(Error::InvalidCoin(format!("default |γ| = {} ≥ 1", self.default.norm())));
        }
        if self.lattice == Lattice1D::HalfLine && self.start != 0 {
            return Err(Error::InvalidInput("half-line window starts at site 0".into()));
        }
        Ok(self)
    }

    /// Lowest and highest window sites (site 0 when the window is empty).
    pub fn window_range(&self) -> (i64, i64) {
        if self.window.is_empty() {
            (self.start, self.start)
        } else {
            (self.start, self.start + self.window.len() as i64 - 1)
        }
    }

    pub fn site_valid(&self, x: i64) -> bool {
        match self.lattice {
            Lattice1D::HalfLine => x >= 0,
            Lattice1D::Finite(n) => x >= 0 && x < n as i64,
            Lattice1D::Line => true,
        }
    }

    /// `γ_{2x}`.
    pub fn gamma(&self, x: i64) -> C64 {
        let k = x - self.start;
        if k >= 0 && (k as usize) < self.window.len() {
            self.window[k as usize]
        } else {
            self.default
        }
    }

    pub fn rho(&self, x: i64) -> f64 {
        (1.0 - self.gamma(x).norm_sqr()).sqrt()
    }

    pub fn coin(&self, x: i64) -> [[C64; 2]; 2] {
        let g = self.gamma(x);
        let r = C64::new(self.rho(x), 0.0);
        [[r, -g], [g.conj(), r]]
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum Lattice2D {
    /// Internal states →, ↑, ←, ↓ moving by +e₁, +e₂, −e₁, −e₂.
    Square,
    /// Three internal states moving along `e₁ = (1, 0)`, `e₂ = (0, 1)` and
    /// `e₃ = (−1, −1)` in oblique coordinates, i.e. three directions 120° apart
    /// taken counterclockwise. Returns to a site need a multiple of 3 steps.
    Hexagonal,
}

impl Lattice2D {
    pub fn internal_dim(self) -> usize {
        match self {
            Lattice2D::Square => 4,
            Lattice2D::Hexagonal => 3,
        }
    }

    /// Displacement of internal state `s`.
    pub fn displacement(self, s: usize) -> (i64, i64) {
        match self {
            Lattice2D::Square => [(1, 0), (0, 1), (-1, 0), (0, -1)][s],
            Lattice2D::Hexagonal => [(1, 0), (0, 1), (-1, -1)][s],
        }
    }
}

/// Constant coin on a two-dimensional lattice.
#[derive(Clone, Debug, PartialEq)]
pub struct CoinSpec2D {
    pub lattice: Lattice2D,
    pub coin: DMatrix<C64>,
}

impl CoinSpec2D {
    pub fn new(lattice: Lattice2D, coin: DMatrix<C64>) -> Result<Self> {
        let d = lattice.internal_dim();
        if coin.shape() != (d, d) {
            return Err(Error::InvalidCoin(format!("coin must be {d}×{d}, got {:?}", coin.shape())));
        }
        let dev = crate::numeric::max_abs_diff(&(coin.adjoint() * &coin), &DMatrix::identity(d, d));
        if dev > 1e-12 {
            return Err(Error::InvalidCoin(format!("coin is not unitary: ‖C†C − I‖_max = {dev:e}")));
        }
        Ok(Self { lattice, coin })
    }
}

fn real(rows: usize, v: &[f64]) -> DMatrix<C64> {
    DMatrix::from_row_iterator(rows, rows, v.iter().map(|&x| C64::new(x, 0.0)))
}

/// Named coins of the two-dimensional walks.
pub mod named {
    use super::*;

    pub fn grover4() -> DMatrix<C64> {
        real(4, &[-1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0, -1.0, 1.0, 1.0, 1.0, 1.0, -1.0]).scale(0.5)
    }

    pub fn fourier4() -> DMatrix<C64> {
        let o = C64::new(1.0, 0.0);
        let i = C64::new(0.0, 1.0);
        DMatrix::from_row_slice(4, 4, &[o, o, o, o, o, i, -o, -i, o, -o, o, -o, o, -i, -o, i]).scale(0.5)
    }

    pub fn grover3() -> DMatrix<C64> {
        real(3, &[-1.0, 2.0, 2.0, 2.0, -1.0, 2.0, 2.0, 2.0, -1.0]).scale(1.0 / 3.0)
    }

    pub fn fourier3() -> DMatrix<C64> {
        let o = C64::new(1.0, 0.0);
        let w = C64::from_polar(1.0, 2.0 * std::f64::consts::PI / 3.0);
        DMatrix::from_row_slice(3, 3, &[o, o, o, o, w, w.conj(), o, w.conj(), w]).scale(1.0 / 3f64.sqrt())
    }

    pub fn c0_3() -> DMatrix<C64> {
        let s = 2f64.sqrt();
        real(3, &[0.0, 0.0, s, 1.0, 1.0, 0.0, 1.0, -1.0, 0.0]).scale(1.0 / s)
    }

    /// Looks a coin up by its short name (`grover`, `fourier`, `c0`).
    pub fn by_name(lattice: Lattice2D, name: &str) -> Option<DMatrix<C64>> {
        match (lattice, name) {
            (Lattice2D::Square, "grover") => Some(grover4()),
            (Lattice2D::Square, "fourier") => Some(fourier4()),
            (Lattice2D::Hexagonal, "grover") => Some(grover3()),
            (Lattice2D::Hexagonal, "fourier") => Some(fourier3()),
            (Lattice2D::Hexagonal, "c0") => Some(c0_3()),
            _ => None,
        }
    }
}
