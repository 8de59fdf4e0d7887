//! Small numerical helpers shared by the modules: compensated sums,
//! matrix norms, Hermitian eigen-decomposition and power-law tail fits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use serde::Serialize;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

/// Neumaier-compensated accumulator.
#[derive(Clone, Copy, Debug, Default)]
pub struct KahanSum {
    sum: f64,
    comp: f64,
}

impl KahanSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

pub fn kahan_sum<I: IntoIterator<Item = f64>>(it: I) -> f64 {
    let mut s = KahanSum::new();
    for x in it {
        s.add(x);
    }
    s.value()
}

/// Compensated accumulator for complex matrices of a fixed shape.
#[derive(Clone, Debug)]
pub struct MatrixSum {
    re: Vec<KahanSum>,
    im: Vec<KahanSum>,
    rows: usize,
    cols: usize,
}

impl MatrixSum {
    pub fn new(rows: usize, cols: usize) -> Self {
        Self {
            re: vec![KahanSum::new(); rows * cols],
            im: vec![KahanSum::new(); rows * cols],
            rows,
            cols,
        }
    }

    pub fn add(&mut self, m: &DMatrix<C64>) {
        for (k, z) in m.iter().enumerate() {
            self.re[k].add(z.re);
            self.im[k].add(z.im);
        }
    }

    pub fn value(&self) -> DMatrix<C64> {
        DMatrix::from_iterator(
            self.rows,
            self.cols,
            self.re.iter().zip(&self.im).map(|(r, i)| C64::new(r.value(), i.value())),
        )
    }
}

pub fn frobenius_sq(m: &DMatrix<C64>) -> f64 {
    m.iter().map(|z| z.norm_sqr()).sum()
}

pub fn max_abs_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    a.iter().zip(b.iter()).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

pub fn vec_norm_sq(v: &DVector<C64>) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum()
}

/// `Σ conj(a_i) b_i`.
pub fn inner(a: &DVector<C64>, b: &DVector<C64>) -> C64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Hermitian part `(m + m†)/2`.
pub fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()).scale(0.5)
}

/// Eigen-decomposition of a Hermitian matrix, eigenvalues sorted in descending order.
pub fn hermitian_eigen(m: &DMatrix<C64>) -> (Vec<f64>, DMatrix<C64>) {
    let h = hermitian_part(m);
    let eig = nalgebra::SymmetricEigen::new(h);
    let n = eig.eigenvalues.len();
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[j].total_cmp(&eig.eigenvalues[i]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let mut vecs = DMatrix::zeros(n, n);
    for (col, &i) in order.iter().enumerate() {
        vecs.set_column(col, &eig.eigenvectors.column(i));
    }
    (values, vecs)
}

pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    let g = m.adjoint() * m;
    let (vals, _) = hermitian_eigen(&g);
    vals.first().copied().unwrap_or(0.0).max(0.0).sqrt()
}

/// Least-squares slope and intercept of `y` against `x`.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = x.iter().map(|a| (a - mx) * (a - mx)).sum();
    let slope = sxy / sxx;
    (slope, my - slope * mx)
}

/// Unitary from the QR factorization of a matrix with uniform entries in the unit square.
pub fn random_unitary<R: rand::Rng>(n: usize, rng: &mut R) -> DMatrix<C64> {
    let m = DMatrix::from_fn(n, n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    m.qr().q()
}

/// Uniform point of the open disk of the given radius.
pub fn random_disk_point<R: rand::Rng>(radius: f64, rng: &mut R) -> C64 {
    let r = radius * rng.gen::<f64>().sqrt();
    C64::from_polar(r, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Unit vector with uniform complex entries, normalized.
pub fn random_unit_vector<R: rand::Rng>(n: usize, rng: &mut R) -> DVector<C64> {
    let v = DVector::from_fn(n, |_, _| c(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)));
    let nrm = vec_norm_sq(&v).sqrt();
    v / C64::new(nrm, 0.0)
}

/// Power-law fit `t_n ≈ C n^{-p}` over the last decade of a non-negative sequence,
/// together with the bound it implies on the unseen tail `Σ_{n>N} t_n`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct TailFit {
    pub exponent: f64,
    pub prefactor: f64,
    /// Estimated upper bound on the remaining sum; `f64::INFINITY` when the fit
    /// does not decay fast enough to be summable.
    pub bound: f64,
}

/// Fit on block averages so that oscillating or sparse sequences (every other
/// term vanishing) still give a stable exponent. `terms[n]` is the n-th term;
/// index 0 is ignored.
pub fn fit_power_tail(terms: &[f64]) -> Option<TailFit> {
    let n_max = terms.len().checked_sub(1)?;
    if n_max < 20 {
        return None;
    }
    let lo = (n_max / 10).max(1);
    let window = &terms[lo..=n_max];
    if window.iter().all(|&t| t <= 1e-300) {
        return Some(TailFit { exponent: f64::INFINITY, prefactor: 0.0, bound: 0.0 });
    }
    let blocks = 10usize;
    let ratio = (n_max as f64 / lo as f64).powf(1.0 / blocks as f64);
    let mut xs = Vec::new();
    let mut ys = Vec::new();
    let mut start = lo as f64;
    for _ in 0..blocks {
        let end = start * ratio;
        let a = start.ceil() as usize;
        let b = (end.floor() as usize).min(n_max);
        if b >= a {
            let mean = terms[a..=b].iter().sum::<f64>() / (b - a + 1) as f64;
            if mean > 1e-300 {
                xs.push((((a * b) as f64).sqrt()).ln());
                ys.push(mean.ln());
            }
        }
        start = end;
    }
    if xs.len() < 3 {
        // Too few populated blocks: fall back to the crude bound "the last
        // decade repeats once more".
        let s: f64 = window.iter().sum();
        return Some(TailFit { exponent: f64::NAN, prefactor: 0.0, bound: s });
    }
    let (slope, icpt) = linear_fit(&xs, &ys);
    let p = -slope;
    let cpref = icpt.exp();
    let bound = if p > 1.0 {
        cpref * (n_max as f64).powf(1.0 - p) / (p - 1.0)
    } else {
        f64::INFINITY
    };
    Some(TailFit { exponent: p, prefactor: cpref, bound })
}

/// Real interval `[lo, hi]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct Interval {
    pub lo: f64,
    pub hi: f64,
}

impl Interval {
    pub fn point(x: f64) -> Self {
        Self { lo: x, hi: x }
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.lo && x <= self.hi
    }

    pub fn contains_tol(&self, x: f64, tol: f64) -> bool {
        x >= self.lo - tol && x <= self.hi + tol
    }

    pub fn width(&self) -> f64 {
        self.hi - self.lo
    }
}

/// Samples of `Σ_n coeffs[n] z^n` at `z = e^{2πij/m}`, j = 0..m, by FFT.
/// Coefficients beyond `m` are folded (aliasing is exact for sampling).
pub fn boundary_samples(coeffs: &[C64], m: usize) -> Vec<C64> {
    let mut buf = vec![C64::new(0.0, 0.0); m];
    for (n, &c) in coeffs.iter().enumerate() {
        buf[n % m] += c;
    }
    // e^{+iθ n}: inverse transform without normalisation.
    let mut planner = rustfft::FftPlanner::new();
    let fft = planner.plan_fft_inverse(m);
    fft.process(&mut buf);
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn kahan_recovers_small_terms() {
        let mut v = vec![1.0];
        v.extend(std::iter::repeat(1e-16).take(10_000));
        let s = kahan_sum(v.iter().copied());
        assert!((s - (1.0 + 1e-12)).abs() < 1e-15);
    }

    #[test]
    fn inner_is_conjugate_linear_in_first_slot() {
        let a = DVector::from_vec(vec![c(0.0, 1.0)]);
        let b = DVector::from_vec(vec![c(1.0, 0.0)]);
        assert_eq!(inner(&a, &b), c(0.0, -1.0));
    }

    #[test]
    fn boundary_samples_of_monomial() {
        let s = boundary_samples(&[c(0.0, 0.0), c(0.0, 0.0), c(1.0, 0.0)], 8);
        for (j, v) in s.iter().enumerate() {
            let th = 2.0 * std::f64::consts::PI * j as f64 / 8.0;
            assert!((v - C64::from_polar(1.0, 2.0 * th)).norm() < 1e-14);
        }
    }

    #[test]
    fn power_tail_fit_recovers_exponent() {
        let t: Vec<f64> = (0..2000).map(|n| if n == 0 { 0.0 } else { 3.0 / (n as f64).powi(3) }).collect();
        let f = fit_power_tail(&t).unwrap();
        assert!((f.exponent - 3.0).abs() < 0.02, "{f:?}");
        let exact: f64 = (2000..2_000_000).map(|n| 3.0 / (n as f64).powi(3)).sum();
        assert!(f.bound > 0.9 * exact && f.bound < 1.2 * exact, "{} vs {}", f.bound, exact);
    }

    #[test]
    fn hermitian_eigen_sorted_descending() {
        let m = DMatrix::from_row_slice(2, 2, &[c(0.25, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(0.75, 0.0)]);
        let (v, _) = hermitian_eigen(&m);
        assert!((v[0] - 0.75).abs() < 1e-15 && (v[1] - 0.25).abs() < 1e-15);
    }
}
