//! Site recurrence for coined walks on the half-line, a finite lattice and the
//! line. The 2×2 Schur function of a site `x` is
//!
//! ```text
//! f_x(z) = [[γ f^{2x−1}(z),  ρ f_{2x+1}(z)],
//!           [ρ f^{2x−1}(z), −γ̄ f_{2x+1}(z)]]
//! ```
//!
//! with a right function `f_{2x+1}` built from the coins at sites `> x` and a
//! left function `f^{2x−1}` from the coins at sites `< x`.

mod constant;

pub use constant::{constant_coin_analytics, constant_line_state_formula, ConstantCoin};

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::linops::{build_coined_1d, CoinSpec1D, Label, Lattice1D, Subspace, UnitaryStep};
use crate::monitor::{first_return_direct, state_vs_subspace_curve, AmplitudeKind, AmplitudeSequence, CurvePoint, MatrixSeries};
use crate::numeric::Interval;
use crate::schur::{blaschke_degree, g_pair, khrushchev_fk, l2_norm_sq, NormEstimate, SchurParams};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

/// Verblunsky parameters `(γ_0, 0, γ_2, 0, …)` of the half-line walk, or
/// `(γ_0, 0, …, γ_{2N−2}, 1)` on `N` sites.
pub fn cmv_params(spec: &CoinSpec1D) -> Result<SchurParams> {
    match spec.lattice {
        Lattice1D::HalfLine => {
            let mut prefix = Vec::with_capacity(2 * spec.window.len());
            for &g in &spec.window {
                prefix.push(g);
                prefix.push(ZERO);
            }
            SchurParams::periodic(prefix, vec![spec.default, ZERO])
        }
        Lattice1D::Finite(n) => {
            let mut prefix = Vec::with_capacity(2 * n - 1);
            for x in 0..n as i64 {
                prefix.push(spec.gamma(x));
                if x + 1 < n as i64 {
                    prefix.push(ZERO);
                }
            }
            SchurParams::terminated(prefix, C64::new(1.0, 0.0))
        }
        Lattice1D::Line => Err(Error::NotApplicable("the line has no one-sided parameter sequence".into())),
    }
}

fn check_site(spec: &CoinSpec1D, x: i64) -> Result<()> {
    if !spec.site_valid(x) {
        return Err(Error::InvalidInput(format!("site {x} is not on the lattice")));
    }
    Ok(())
}

/// Parameters `(0, γ_{2x+2}, 0, γ_{2x+4}, …)` of `f_{2x+1}`.
pub fn right_params(spec: &CoinSpec1D, x: i64) -> Result<SchurParams> {
    check_site(spec, x)?;
    match spec.lattice {
        Lattice1D::HalfLine | Lattice1D::Finite(_) => cmv_params(spec)?.iterate(2 * x as usize + 1),
        Lattice1D::Line => {
            let (_, hi) = spec.window_range();
            let mut prefix = Vec::new();
            for y in x + 1..=hi {
                prefix.push(ZERO);
                prefix.push(spec.gamma(y));
            }
            SchurParams::periodic(prefix, vec![ZERO, spec.default])
        }
    }
}

/// Parameters `(0, −γ̄_{2x−2}, 0, −γ̄_{2x−4}, …)` of `f^{2x−1}`, terminated by 1
/// after `−γ̄_0` on reflecting lattices, continued with the default coin on the line.
pub fn left_params(spec: &CoinSpec1D, x: i64) -> Result<SchurParams> {
    check_site(spec, x)?;
    match spec.lattice {
        Lattice1D::HalfLine | Lattice1D::Finite(_) => {
            cmv_params(spec)?.inverse_iterate((x > 0).then(|| 2 * x as usize - 1))
        }
        Lattice1D::Line => {
            let (lo, _) = spec.window_range();
            let mut prefix = Vec::new();
            for y in (lo..x).rev() {
                prefix.push(ZERO);
                prefix.push(-spec.gamma(y).conj());
            }
            SchurParams::periodic(prefix, vec![ZERO, -spec.default.conj()])
        }
    }
}

/// Left function of site `x` when the line is cut with a reflecting wall at
/// `x0 < x`: `(0, −γ̄_{2x−2}, …, 0, −γ̄_{2x0}, 1)`. As `x0 → −∞` these converge
/// to [`left_params`] uniformly on compacts; the first `2(x − x0)` Taylor
/// coefficients already agree exactly.
pub fn left_reversal(spec: &CoinSpec1D, x: i64, x0: i64) -> Result<SchurParams> {
    if x0 >= x {
        return Err(Error::InvalidInput(format!("wall at {x0} is not left of site {x}")));
    }
    let mut prefix = Vec::new();
    for y in (x0..x).rev() {
        prefix.push(ZERO);
        prefix.push(-spec.gamma(y).conj());
    }
    SchurParams::terminated(prefix, C64::new(1.0, 0.0))
}

/// The projectors `Γ_x` (onto `ψ⁽²⁾`) and `Γ^x` (onto `ψ⁽¹⁾`).
#[derive(Clone, Debug, PartialEq)]
pub struct GammaProjectors {
    pub lower: DMatrix<C64>,
    pub upper: DMatrix<C64>,
}

impl GammaProjectors {
    pub fn new(gamma: C64) -> Self {
        let rho = C64::new((1.0 - gamma.norm_sqr()).sqrt(), 0.0);
        let g2 = C64::new(gamma.norm_sqr(), 0.0);
        let lower = DMatrix::from_row_slice(2, 2, &[rho * rho, -rho * gamma, -rho * gamma.conj(), g2]);
        let upper = DMatrix::from_row_slice(2, 2, &[g2, rho * gamma, rho * gamma.conj(), rho * rho]);
        Self { lower, upper }
    }
}

#[derive(Clone, Debug)]
pub struct SiteSchur {
    pub site: i64,
    pub gamma: C64,
    pub rho: f64,
    pub lattice: Lattice1D,
    /// `f_{2x+1}`.
    pub right: SchurParams,
    /// `f^{2x−1}`.
    pub left: SchurParams,
}

pub fn site_schur(spec: &CoinSpec1D, x: i64) -> Result<SiteSchur> {
    check_site(spec, x)?;
    let gamma = spec.gamma(x);
    Ok(SiteSchur {
        site: x,
        gamma,
        rho: spec.rho(x),
        lattice: spec.lattice,
        right: right_params(spec, x)?,
        left: left_params(spec, x)?,
    })
}

impl SiteSchur {
    fn assemble(&self, l: C64, r: C64) -> DMatrix<C64> {
        let rho = C64::new(self.rho, 0.0);
        DMatrix::from_row_slice(2, 2, &[self.gamma * l, rho * r, rho * l, -self.gamma.conj() * r])
    }

    /// `f_x(z)` for `|z| ≤ 1` (exact for terminated sides, adaptive otherwise).
    pub fn eval(&self, z: C64) -> Result<DMatrix<C64>> {
        let l = self.left.eval_adaptive(z)?.value;
        let r = self.right.eval_adaptive(z)?.value;
        Ok(self.assemble(l, r))
    }

    /// Taylor coefficients of `f_x` up to `order`.
    pub fn taylor(&self, order: usize) -> Result<MatrixSeries> {
        let l = self.left.taylor_coeffs(order)?;
        let r = self.right.taylor_coeffs(order)?;
        Ok(MatrixSeries { coeffs: (0..=order).map(|m| self.assemble(l.get(m), r.get(m))).collect() })
    }

    /// First-return amplitudes `a_n = b_{n−1}†` for `n ≤ n_max`.
    pub fn amplitudes(&self, n_max: usize) -> Result<AmplitudeSequence> {
        if n_max == 0 {
            return AmplitudeSequence::new(AmplitudeKind::A, vec![DMatrix::zeros(2, 2)]);
        }
        let f = self.taylor(n_max - 1)?;
        let mut mats = vec![DMatrix::zeros(2, 2)];
        mats.extend(f.coeffs.iter().map(|b| b.adjoint()));
        AmplitudeSequence::new(AmplitudeKind::A, mats)
    }

    pub fn projectors(&self) -> GammaProjectors {
        GammaProjectors::new(self.gamma)
    }

    /// `ψ⁽¹⁾ = (γ, ρ)` and `ψ⁽²⁾ = (ρ, −γ̄)`.
    pub fn extreme_qubits(&self) -> (DVector<C64>, DVector<C64>) {
        let rho = C64::new(self.rho, 0.0);
        (DVector::from_vec(vec![self.gamma, rho]), DVector::from_vec(vec![rho, -self.gamma.conj()]))
    }
}

#[derive(Clone, Debug)]
pub struct SiteReturn {
    pub matrix: DMatrix<C64>,
    pub left_norm: NormEstimate,
    pub right_norm: NormEstimate,
    /// Eigenvalue `‖f^{2x−1}‖²` at `ψ⁽¹⁾`, with its interval.
    pub at_psi1: (f64, Interval),
    /// Eigenvalue `‖f_{2x+1}‖²` at `ψ⁽²⁾`, with its interval.
    pub at_psi2: (f64, Interval),
    pub psi1: DVector<C64>,
    pub psi2: DVector<C64>,
}

impl SiteReturn {
    pub fn max(&self) -> f64 {
        self.at_psi1.0.max(self.at_psi2.0)
    }

    pub fn min(&self) -> f64 {
        self.at_psi1.0.min(self.at_psi2.0)
    }

    pub fn average(&self) -> f64 {
        (self.at_psi1.0 + self.at_psi2.0) / 2.0
    }
}

/// `R_x = ‖f^{2x−1}‖² Γ^x + ‖f_{2x+1}‖² Γ_x`; on reflecting lattices the left
/// norm is 1 and this is `I − (1 − ‖f_{2x+1}‖²) Γ_x`. Norms of infinite sides
/// are summed to `order` terms.
pub fn site_return_matrix(s: &SiteSchur, order: usize) -> Result<SiteReturn> {
    let left_norm = l2_norm_sq(&s.left, order)?;
    let right_norm = l2_norm_sq(&s.right, order)?;
    let p = s.projectors();
    let matrix = &p.upper * C64::new(left_norm.partial, 0.0) + &p.lower * C64::new(right_norm.partial, 0.0);
    let (psi1, psi2) = s.extreme_qubits();
    Ok(SiteReturn {
        matrix,
        at_psi1: (left_norm.partial, left_norm.interval()),
        at_psi2: (right_norm.partial, right_norm.interval()),
        left_norm,
        right_norm,
        psi1,
        psi2,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub enum SiteTau {
    /// Both sides rational inner: `τ_x = I + deg f^{2x−1} I + (deg f_{2x+1} − deg f^{2x−1}) Γ_x`.
    Finite { matrix: DMatrix<C64>, deg_left: usize, deg_right: usize, extremes: (f64, f64), average: f64 },
    /// Only the left side is rational inner: `ψ⁽¹⁾` returns with `τ = 1 + deg f^{2x−1}`,
    /// every other qubit has infinite expected return time.
    LeftOnly { psi1: DVector<C64>, tau: f64, deg_left: usize },
    Divergent,
}

fn degree(p: &SchurParams) -> Result<usize> {
    let w = blaschke_degree(p)?;
    if w.residue >= 1e-6 || w.winding < 0 {
        return Err(Error::NotRationalInner(format!("winding {} with residue {:e}", w.raw, w.residue)));
    }
    Ok(w.winding as usize)
}

pub fn site_tau_matrix(s: &SiteSchur) -> Result<SiteTau> {
    if s.lattice == Lattice1D::Line || !s.left.is_terminated() {
        return Ok(SiteTau::Divergent);
    }
    let deg_left = degree(&s.left)?;
    if !s.right.is_terminated() {
        let (psi1, _) = s.extreme_qubits();
        return Ok(SiteTau::LeftOnly { psi1, tau: 1.0 + deg_left as f64, deg_left });
    }
    let deg_right = degree(&s.right)?;
    let p = s.projectors();
    let id = DMatrix::<C64>::identity(2, 2);
    let matrix = &id * C64::new(1.0 + deg_left as f64, 0.0) + &p.lower * C64::new(deg_right as f64 - deg_left as f64, 0.0);
    let average = matrix.trace().re / 2.0;
    Ok(SiteTau::Finite {
        matrix,
        deg_left,
        deg_right,
        extremes: (1.0 + deg_left as f64, 1.0 + deg_right as f64),
        average,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct SiteCurveRow {
    pub t: f64,
    pub state_return_prob: f64,
    pub state_interval: Interval,
    pub site_return_prob: f64,
}

/// State versus site return probability along `ψ(t) = α(t)|x,↑⟩ + β(t)|x,↓⟩`.
/// The state value goes through the scalar Carathéodory function of `ψ`; the
/// site value is `⟨ψ|R_xψ⟩` from the closed form.
pub fn state_vs_site_curve(
    spec: &CoinSpec1D,
    x: i64,
    path: &[(f64, C64, C64)],
    order: usize,
) -> Result<Vec<SiteCurveRow>> {
    let s = site_schur(spec, x)?;
    let a = s.amplitudes(order)?;
    let r = site_return_matrix(&s, order.max(4096))?;
    let states: Vec<(f64, DVector<C64>)> =
        path.iter().map(|&(t, al, be)| (t, DVector::from_vec(vec![al, be]))).collect();
    let pts: Vec<CurvePoint> = state_vs_subspace_curve(&a, &states)?;
    Ok(pts
        .into_iter()
        .zip(&states)
        .map(|(p, (_, psi))| SiteCurveRow {
            t: p.t,
            state_return_prob: p.state,
            state_interval: p.state_interval,
            site_return_prob: crate::numeric::inner(psi, &(&r.matrix * psi)).re,
        })
        .collect())
}

pub const CURVE_SCHEMA: &str = "subrec.curve/1";

/// CSV with a leading `#` schema line.
pub fn curve_csv(rows: &[SiteCurveRow], note: &str) -> String {
    let mut out = format!("# schema={CURVE_SCHEMA} {note}\nt,state_return_prob,site_return_prob,state_upper\n");
    for r in rows {
        out.push_str(&format!("{:.12},{:.12},{:.12},{:.12}\n", r.t, r.state_return_prob, r.site_return_prob, r.state_interval.hi));
    }
    out
}

/// `F_x(z)` from Khrushchev's formula and the off-diagonal functions of the
/// CMV parameters: `[[F_{2x}, G̃_{2x}], [G_{2x}, F_{2x+1}]]`. Reflecting lattices only.
pub fn site_caratheodory_khrushchev(spec: &CoinSpec1D, x: i64, z: C64) -> Result<DMatrix<C64>> {
    check_site(spec, x)?;
    let params = cmv_params(spec)?;
    let k = 2 * x as usize;
    let (g, gt) = g_pair(&params, k, z)?;
    Ok(DMatrix::from_row_slice(2, 2, &[khrushchev_fk(&params, k, z)?, gt, g, khrushchev_fk(&params, k + 1, z)?]))
}

/// Site subspace `span{|x,↑⟩, |x,↓⟩}` of a walk built by [`build_coined_1d`].
pub fn site_subspace(u: &UnitaryStep, x: i64) -> Result<Subspace> {
    Subspace::from_labels(u.space(), &[Label::site1(x, 0), Label::site1(x, 1)])
}

/// First-return amplitudes of site `x` obtained from the walk operator itself
/// (truncated far enough to be exact up to `n_max`).
pub fn walk_site_amplitudes(spec: &CoinSpec1D, x: i64, n_max: usize) -> Result<AmplitudeSequence> {
    check_site(spec, x)?;
    let u = build_coined_1d(spec, n_max.max(1))?;
    let v = site_subspace(&u, x)?;
    first_return_direct(&u, &v, n_max)
}
