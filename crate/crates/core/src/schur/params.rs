use num_complex::Complex64 as C64;

use super::series::PowerSeries;
use crate::error::{Error, Result};

const ZERO: C64 = C64 { re: 0.0, im: 0.0 };
const ONE: C64 = C64 { re: 1.0, im: 0.0 };

/// How a Schur parameter sequence continues after its explicit prefix.
#[derive(Clone, Debug, PartialEq)]
pub enum SchurTail {
    /// A unimodular final parameter: the function is a finite Blaschke product
    /// (times a unimodular constant).
    Terminated(C64),
    /// The block repeats forever. `Periodic(vec![0])` is the free tail; constant
    /// coins give blocks `[0, γ]`.
    Periodic(Vec<C64>),
}

/// Schur (Verblunsky) parameters `γ_0, γ_1, …` as an explicit prefix plus a closed rule.
#[derive(Clone, Debug, PartialEq)]
pub struct SchurParams {
    pub prefix: Vec<C64>,
    pub tail: SchurTail,
}

/// Value of a Schur function with the truncation error bound of the evaluation.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SchurValue {
    pub value: C64,
    pub error_bound: f64,
}

impl SchurParams {
    pub fn terminated(prefix: Vec<C64>, zeta: C64) -> Result<Self> {
        if (zeta.norm() - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidInput(format!("terminator must be unimodular, |ζ| = {}", zeta.norm())));
        }
        Self::checked(prefix, SchurTail::Terminated(zeta))
    }

    pub fn periodic(prefix: Vec<C64>, block: Vec<C64>) -> Result<Self> {
        if block.is_empty() {
            return Err(Error::InvalidInput("empty periodic block".into()));
        }
        if let Some(g) = block.iter().find(|g| g.norm() >= 1.0) {
            return Err(Error::InvalidInput(format!("periodic parameter with |γ| = {} ≥ 1", g.norm())));
        }
        Self::checked(prefix, SchurTail::Periodic(block))
    }

    /// Finitely many parameters followed by zeros.
    pub fn free_tail(prefix: Vec<C64>) -> Result<Self> {
        Self::periodic(prefix, vec![ZERO])
    }

    fn checked(prefix: Vec<C64>, tail: SchurTail) -> Result<Self> {
        if let Some((k, g)) = prefix.iter().enumerate().find(|(_, g)| g.norm() >= 1.0) {
            return Err(Error::InvalidInput(format!("parameter {k} has |γ| = {} ≥ 1", g.norm())));
        }
        Ok(Self { prefix, tail })
    }

    pub fn is_terminated(&self) -> bool {
        matches!(self.tail, SchurTail::Terminated(_))
    }

    /// Number of parameters, counting the terminator; `None` for infinite sequences.
    pub fn len(&self) -> Option<usize> {
        match self.tail {
            SchurTail::Terminated(_) => Some(self.prefix.len() + 1),
            SchurTail::Periodic(_) => None,
        }
    }

    /// `γ_k`; `None` past the terminator.
    pub fn gamma(&self, k: usize) -> Option<C64> {
        if k < self.prefix.len() {
            return Some(self.prefix[k]);
        }
        match &self.tail {
            SchurTail::Terminated(z) => (k == self.prefix.len()).then_some(*z),
            SchurTail::Periodic(b) => Some(b[(k - self.prefix.len()) % b.len()]),
        }
    }

    /// Drops the first `k` parameters.
    pub fn iterate(&self, k: usize) -> Result<Self> {
        let n = self.prefix.len();
        match &self.tail {
            SchurTail::Terminated(z) => {
                if k > n {
                    return Err(Error::IndexOutOfRange { index: k, available: n });
                }
                Ok(Self { prefix: self.prefix[k..].to_vec(), tail: SchurTail::Terminated(*z) })
            }
            SchurTail::Periodic(b) => {
                if k <= n {
                    return Ok(Self { prefix: self.prefix[k..].to_vec(), tail: self.tail.clone() });
                }
                let r = (k - n) % b.len();
                let mut rot = b[r..].to_vec();
                rot.extend_from_slice(&b[..r]);
                Ok(Self { prefix: Vec::new(), tail: SchurTail::Periodic(rot) })
            }
        }
    }

    /// `(−γ̄_k, −γ̄_{k−1}, …, −γ̄_0)` terminated by 1. `k = -1` (passed as `None`)
    /// gives the constant 1.
    pub fn inverse_iterate(&self, k: Option<usize>) -> Result<Self> {
        let Some(k) = k else {
            return Ok(Self { prefix: Vec::new(), tail: SchurTail::Terminated(ONE) });
        };
        let mut rev = Vec::with_capacity(k + 1);
        for j in (0..=k).rev() {
            let g = match self.gamma(j) {
                Some(g) if g.norm() < 1.0 => g,
                _ => return Err(Error::IndexOutOfRange { index: k, available: self.prefix.len() }),
            };
            rev.push(-g.conj());
        }
        Ok(Self { prefix: rev, tail: SchurTail::Terminated(ONE) })
    }

    /// Backward continued-fraction evaluation to a fixed depth. Terminated
    /// sequences are evaluated exactly (the depth is ignored); infinite ones are
    /// seeded with 0 at `depth` and carry the bound `2|z|^depth`.
    pub fn eval(&self, z: C64, depth: usize) -> Result<SchurValue> {
        if z.norm() > 1.0 + 1e-12 {
            return Err(Error::Domain(format!("Schur evaluation outside the closed disk, |z| = {}", z.norm())));
        }
        let (levels, seed, bound) = match &self.tail {
            SchurTail::Terminated(zeta) => (self.prefix.len(), *zeta, 0.0),
            SchurTail::Periodic(b) if b.iter().all(|g| *g == ZERO) => (self.prefix.len(), ZERO, 0.0),
            SchurTail::Periodic(_) => (depth.max(self.prefix.len()), ZERO, 2.0 * z.norm().powi(depth as i32)),
        };
        let mut w = seed;
        for k in (0..levels).rev() {
            let g = self.gamma(k).expect("level within sequence");
            w = (g + z * w) / (ONE + g.conj() * z * w);
        }
        Ok(SchurValue { value: w, error_bound: bound })
    }

    /// Evaluation with depth doubling until successive values agree to 1e-12
    /// (or depth 2^14 is reached).
    pub fn eval_adaptive(&self, z: C64) -> Result<SchurValue> {
        let mut depth = 64usize.max(self.prefix.len());
        let mut prev = self.eval(z, depth)?;
        if prev.error_bound == 0.0 {
            return Ok(prev);
        }
        while depth < (1 << 14) {
            depth *= 2;
            let next = self.eval(z, depth)?;
            let change = (next.value - prev.value).norm();
            prev = next;
            if change < 1e-12 {
                prev.error_bound = prev.error_bound.min(change.max(1e-16));
                break;
            }
        }
        Ok(prev)
    }

    /// Taylor coefficients up to `order`, by composing the backward recursion
    /// `f_k = (γ_k + z f_{k+1})/(1 + γ̄_k z f_{k+1})` on truncated series.
    /// An infinite periodic tail is seeded with its own fixed-point series.
    pub fn taylor_coeffs(&self, order: usize) -> Result<PowerSeries> {
        let mut f = match &self.tail {
            SchurTail::Terminated(z) => PowerSeries::constant(*z, order),
            SchurTail::Periodic(b) => periodic_fixed_point(b, order),
        };
        for k in (0..self.prefix.len()).rev() {
            f = schur_step_back(self.prefix[k], &f)?;
        }
        Ok(f)
    }
}

/// One level of the backward recursion on series.
pub fn schur_step_back(g: C64, f: &PowerSeries) -> Result<PowerSeries> {
    let zf = f.shift_up();
    let num = zf.add_constant(g);
    let den = zf.scale(g.conj()).add_constant(ONE);
    num.div(&den)
}

fn poly_mul(a: &[C64], b: &[C64]) -> Vec<C64> {
    let mut out = vec![ZERO; a.len() + b.len() - 1];
    for (i, &x) in a.iter().enumerate() {
        for (j, &y) in b.iter().enumerate() {
            out[i + j] += x * y;
        }
    }
    out
}

fn poly_add(a: &[C64], b: &[C64]) -> Vec<C64> {
    let n = a.len().max(b.len());
    (0..n).map(|k| a.get(k).copied().unwrap_or(ZERO) + b.get(k).copied().unwrap_or(ZERO)).collect()
}

/// Series of the Schur function whose parameters repeat `block` forever.
///
/// Writing one period of the recursion as a Möbius map with polynomial matrix
/// `[[a, b], [c, d]]`, the function solves `c g² + (d − a) g − b = 0`. Since
/// `c(0) = 0` and `d(0) − a(0) = 1`, the coefficients follow from an explicit
/// recurrence in O(order²).
fn periodic_fixed_point(block: &[C64], order: usize) -> PowerSeries {
    if block.iter().all(|g| *g == ZERO) {
        return PowerSeries::zeros(order);
    }
    // M_j = [[z, γ_j], [γ̄_j z, 1]]
    let mut a = vec![ONE];
    let mut b = vec![ZERO];
    let mut c = vec![ZERO];
    let mut d = vec![ONE];
    for &g in block {
        let m11 = [ZERO, ONE];
        let m12 = [g];
        let m21 = [ZERO, g.conj()];
        let m22 = [ONE];
        let na = poly_add(&poly_mul(&a, &m11), &poly_mul(&b, &m21));
        let nb = poly_add(&poly_mul(&a, &m12), &poly_mul(&b, &m22));
        let nc = poly_add(&poly_mul(&c, &m11), &poly_mul(&d, &m21));
        let nd = poly_add(&poly_mul(&c, &m12), &poly_mul(&d, &m22));
        a = na;
        b = nb;
        c = nc;
        d = nd;
    }
    let e: Vec<C64> = {
        let mut e = poly_add(&d, &a.iter().map(|x| -x).collect::<Vec<_>>());
        e[0] -= ONE;
        e
    };
    debug_assert!(c[0].norm() < 1e-15 && e[0].norm() < 1e-15);
    let mut g = vec![ZERO; order + 1];
    let mut sq = vec![ZERO; order + 1];
    for n in 0..=order {
        let mut v = b.get(n).copied().unwrap_or(ZERO);
        for (j, &cj) in c.iter().enumerate().skip(1) {
            if j <= n {
                v -= cj * sq[n - j];
            }
        }
        for (j, &ej) in e.iter().enumerate().skip(1) {
            if j <= n {
                v -= ej * g[n - j];
            }
        }
        g[n] = v;
        let mut s = ZERO;
        for i in 0..=n {
            s += g[i] * g[n - i];
        }
        sq[n] = s;
    }
    PowerSeries::new(g)
}

/// Forward Schur algorithm on a truncated series: `γ_k = f_k(0)`,
/// `f_{k+1} = (f_k − γ_k)/(z(1 − γ̄_k f_k))`. Stops at a parameter of modulus
/// ≥ 1 − 1e-10, which is returned as the unimodular terminator. Otherwise the
/// extracted prefix is returned with a free tail (the continuation is unknown).
pub fn schur_params_from_taylor(series: &PowerSeries, k_max: usize) -> Result<SchurParams> {
    let c0 = series.coeffs[0].norm();
    if c0 > 1.0 + 1e-10 {
        return Err(Error::NotSchurClass(c0));
    }
    let mut f = series.clone();
    let mut prefix = Vec::new();
    for _ in 0..=k_max {
        let g = f.coeffs[0];
        if g.norm() >= 1.0 - 1e-10 {
            return Ok(SchurParams { prefix, tail: SchurTail::Terminated(g / g.norm()) });
        }
        prefix.push(g);
        if f.order() == 0 {
            break;
        }
        let num = f.add_constant(-g).shift_down();
        let den = f.scale(-g.conj()).add_constant(ONE).truncate(num.order());
        f = num.div(&den)?;
    }
    Ok(SchurParams { prefix, tail: SchurTail::Periodic(vec![ZERO]) })
}
