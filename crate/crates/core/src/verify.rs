//! Invariant suites shared by the `verify` command and the acceptance tests.
//! Every check reports its largest deviation against a tolerance.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64 as C64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::Result;
use crate::linops::{build_coined_1d, CoinSpec1D, Label, Lattice2D, StateVector, Subspace, UnitaryStep};
use crate::monitor::{
    first_return_direct, first_return_with_survival, mu_sequence, renewal_a_to_mu, renewal_mu_to_a,
    return_probability_operator, survival, TailPolicy,
};
use crate::numeric::{frobenius_sq, max_abs_diff, random_disk_point, random_unit_vector, random_unitary, vec_norm_sq};
use crate::schur::{
    caratheodory_to_f_series, g_pair, g_pair_from_polynomials, khrushchev_fk, poly_eval, schur_params_from_taylor,
    szego_polynomials, PowerSeries, SchurParams,
};
use crate::site1d::{cmv_params, constant_coin_analytics, site_schur, site_tau_matrix, walk_site_amplitudes, SiteTau};
use crate::walk2d::{mu_difference, origin_mu_sequence, origin_mu_sequence_padded, r_eigenvalues, Walk2DJob};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Suite {
    Fast,
    Full,
}

impl std::str::FromStr for Suite {
    type Err = crate::Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "fast" => Ok(Self::Fast),
            "full" => Ok(Self::Full),
            _ => Err(crate::Error::InvalidInput(format!("unknown suite '{s}'"))),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    /// Largest deviation seen.
    pub deviation: f64,
    pub tolerance: f64,
    pub detail: String,
    #[serde(skip)]
    pub seconds: f64,
}

#[derive(Clone, Debug, Serialize)]
pub struct VerifySummary {
    pub schema_version: &'static str,
    pub suite: Suite,
    pub seed: u64,
    pub checks: Vec<Check>,
    #[serde(skip)]
    pub seconds: f64,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    pub suite: Suite,
    pub seed: u64,
    /// Test hook: replaces every tolerance by a negative number so that all
    /// checks fail.
    pub inject_failure: bool,
}

struct Runner {
    rng: ChaCha8Rng,
    checks: Vec<Check>,
    inject: bool,
}

impl Runner {
    fn run<F>(&mut self, name: &str, tolerance: f64, f: F)
    where
        F: FnOnce(&mut ChaCha8Rng) -> Result<(f64, String)>,
    {
        let t0 = Instant::now();
        let tol = if self.inject { -1.0 } else { tolerance };
        let (deviation, detail, ok) = match f(&mut self.rng) {
            Ok((d, detail)) => (d, detail, d <= tol),
            Err(e) => (f64::INFINITY, format!("error: {e}"), false),
        };
        self.checks.push(Check {
            name: name.to_string(),
            passed: ok,
            deviation,
            tolerance: tol,
            detail,
            seconds: t0.elapsed().as_secs_f64(),
        });
    }
}

fn random_coins(rng: &mut ChaCha8Rng, n: usize) -> Vec<C64> {
    (0..n).map(|_| random_disk_point(0.9, rng)).collect()
}

fn random_model(rng: &mut ChaCha8Rng, n: usize, k: usize) -> Result<(UnitaryStep, Subspace)> {
    let u = UnitaryStep::from_dense(random_unitary(n, rng))?;
    let vs: Vec<DVector<C64>> = (0..k).map(|j| DVector::from_fn(n, |i, _| C64::new((i == j) as u8 as f64, 0.0))).collect();
    let v = Subspace::new(n, &vs)?;
    Ok((u, v))
}

fn unit(rng: &mut ChaCha8Rng) -> C64 {
    C64::from_polar(1.0, rng.gen_range(0.0..std::f64::consts::TAU))
}

/// Runs the suite. `fast` covers the property checks; `full` adds more trials
/// and the 2D table at a reduced horizon.
pub fn run_verify(opts: &VerifyOptions) -> VerifySummary {
    let t0 = Instant::now();
    let trials = match opts.suite {
        Suite::Fast => 10,
        Suite::Full => 40,
    };
    let mut r = Runner { rng: ChaCha8Rng::seed_from_u64(opts.seed), checks: Vec::new(), inject: opts.inject_failure };

    r.run("unitarity", 1e-12, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let n = rng.gen_range(1..=6);
            let u = build_coined_1d(&CoinSpec1D::finite(random_coins(rng, n))?, 1)?.to_dense();
            worst = worst.max(max_abs_diff(&(u.adjoint() * &u), &DMatrix::identity(2 * n, 2 * n)));
        }
        Ok((worst, format!("{trials} finite coined walks")))
    });

    r.run("renewal round trip", 1e-11, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let (u, v) = { let n = rng.gen_range(3..10); random_model(rng, n, 2)? };
            let mu = mu_sequence(&u, &v, 60)?;
            let a = renewal_mu_to_a(&mu)?;
            let direct = first_return_direct(&u, &v, 60)?;
            let back = renewal_a_to_mu(&a)?;
            for n in 0..=60 {
                worst = worst.max(max_abs_diff(&a.mats[n], &direct.mats[n]));
                worst = worst.max(max_abs_diff(&back.mats[n], &mu.mats[n]));
            }
        }
        Ok((worst, "μ → a → μ and renewal vs direct a_n, 60 steps".into()))
    });

    r.run("Schur bound on disk grids", 1e-10, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let spec = CoinSpec1D::line(-2, random_coins(rng, 4), random_disk_point(0.9, rng))?;
            let s = site_schur(&spec, rng.gen_range(-3..3))?;
            for j in 0..16 {
                for k in 0..8 {
                    let z = C64::from_polar(k as f64 / 8.0, std::f64::consts::TAU * j as f64 / 16.0);
                    let f = s.eval(z)?;
                    worst = worst.max(crate::numeric::operator_norm(&f) - 1.0);
                }
            }
        }
        Ok((worst.max(0.0), "‖f_x(z)‖ − 1 on 128 points per model".into()))
    });

    r.run("0 ≤ R ≤ I", 1e-12, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let (u, v) = { let (n, k) = (rng.gen_range(3..10), rng.gen_range(1..3)); random_model(rng, n, k)? };
            let a = first_return_direct(&u, &v, 200)?;
            let op = return_probability_operator(&a, TailPolicy::None)?;
            for &l in &op.eigenvalues {
                worst = worst.max(-l).max(l - 1.0);
            }
        }
        Ok((worst.max(0.0), "eigenvalues of partial R".into()))
    });

    r.run("survival monotone", 1e-14, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let (u, v) = { let n = rng.gen_range(3..10); random_model(rng, n, 2)? };
            let c = random_unit_vector(2, rng);
            let psi = StateVector::normalized(v.embed(&c))?;
            let s = survival(&u, &v, &psi, 100)?;
            for w in s.s.windows(2) {
                worst = worst.max(w[1] - w[0]);
            }
        }
        Ok((worst.max(0.0), "s_{n+1} − s_n over 100 steps".into()))
    });

    r.run("first-return / survival identity", 1e-12, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let (u, v) = { let n = rng.gen_range(3..10); random_model(rng, n, 2)? };
            let c = random_unit_vector(2, rng);
            let psi = StateVector::normalized(v.embed(&c))?;
            let s = survival(&u, &v, &psi, 80)?;
            let (a, t) = first_return_with_survival(&u, &v, 80)?;
            for n in 1..=80 {
                worst = worst.max((vec_norm_sq(&(&a.mats[n] * &c)) - (s.s[n - 1] - s.s[n])).abs());
                // frame version: ‖a_n‖²_F = t_{n−1} − t_n
                worst = worst.max((frobenius_sq(&a.mats[n]) - (t[n - 1] - t[n])).abs());
            }
        }
        Ok((worst, "‖a_nψ‖² = s_{n−1} − s_n".into()))
    });

    r.run("truncation doubling", 1e-14, |rng| {
        let mut worst: f64 = 0.0;
        let spec = CoinSpec1D::line(-2, random_coins(rng, 5), random_disk_point(0.9, rng))?;
        let short = walk_site_amplitudes(&spec, 0, 40)?;
        let u = build_coined_1d(&spec, 80)?;
        let v = Subspace::from_labels(u.space(), &[Label::site1(0, 0), Label::site1(0, 1)])?;
        let long = first_return_direct(&u, &v, 40)?;
        worst = worst.max(short.mats.iter().zip(&long.mats).map(|(x, y)| max_abs_diff(x, y)).fold(0.0, f64::max));
        for lat in [Lattice2D::Square, Lattice2D::Hexagonal] {
            let job = Walk2DJob::named(lat, "grover", 48)?;
            worst = worst.max(mu_difference(&origin_mu_sequence(&job)?, &origin_mu_sequence_padded(&job, 48)?));
        }
        Ok((worst, "1D line and 2D origin amplitudes on doubled boxes".into()))
    });

    r.run("Geronimus parameters", 1e-9, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials.min(10) {
            let spec = CoinSpec1D::half_line(random_coins(rng, 7), random_disk_point(0.5, rng))?;
            let u = build_coined_1d(&spec, 200)?;
            let v = Subspace::from_labels(u.space(), &[Label::site1(0, 0)])?;
            let mu = mu_sequence(&u, &v, 200)?;
            let mut coeffs: Vec<C64> = mu.mats.iter().map(|m| m[(0, 0)].conj() * 2.0).collect();
            coeffs[0] = C64::new(1.0, 0.0);
            let f = caratheodory_to_f_series(&PowerSeries::new(coeffs))?;
            let got = schur_params_from_taylor(&f.truncate(30), 12)?;
            let want = cmv_params(&spec)?;
            for k in 0..=12 {
                let (g, w) = (got.gamma(k).unwrap_or_default(), want.gamma(k).unwrap_or_default());
                worst = worst.max((g - w).norm());
            }
        }
        Ok((worst, "parameters of the e₀ measure, k ≤ 12".into()))
    });

    r.run("Khrushchev formula", 1e-9, |rng| {
        let mut worst: f64 = 0.0;
        let spec = CoinSpec1D::half_line(random_coins(rng, 6), random_disk_point(0.5, rng))?;
        let params = cmv_params(&spec)?;
        let u = build_coined_1d(&spec, 400)?;
        for k in 0..6usize {
            let label = Label::site1((k / 2) as i64, (k % 2) as u8);
            let v = Subspace::from_labels(u.space(), &[label])?;
            let mu = mu_sequence(&u, &v, 400)?;
            for _ in 0..4 {
                let z = random_disk_point(0.8, rng);
                let series: C64 = mu.mats.iter().rev().fold(C64::new(0.0, 0.0), |acc, m| acc * z + m[(0, 0)].conj());
                let from_walk = series * 2.0 - C64::new(1.0, 0.0);
                worst = worst.max((khrushchev_fk(&params, k, z)? - from_walk).norm());
            }
        }
        Ok((worst, "F_k from iterates vs the e_k measure, k < 6".into()))
    });

    r.run("Szegő and second-kind identities", 1e-9, |rng| {
        let mut worst: f64 = 0.0;
        let params = SchurParams::periodic(random_coins(rng, 8), vec![random_disk_point(0.7, rng), C64::new(0.0, 0.0)])?;
        let polys = szego_polynomials(&params, 8)?;
        for _ in 0..20 {
            let z = random_disk_point(0.95, rng);
            for p in &polys {
                // φ_k* Ω_k + Ω_k* φ_k = 2 z^k
                let w = poly_eval(&p.phi_star, z) * poly_eval(&p.omega, z) + poly_eval(&p.omega_star, z) * poly_eval(&p.phi, z);
                worst = worst.max((w - z.powi(p.degree as i32) * 2.0).norm());
            }
            for k in 0..4 {
                let (g1, gt1) = g_pair(&params, k, z)?;
                let (g2, gt2) = g_pair_from_polynomials(&params, k, z)?;
                worst = worst.max((g1 - g2).norm()).max((gt1 - gt2).norm());
            }
        }
        Ok((worst, "20 random disk points".into()))
    });

    r.run("winding integrality", 1e-6, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let n = rng.gen_range(2..=6usize);
            let spec = CoinSpec1D::finite(random_coins(rng, n))?;
            let x = rng.gen_range(0..n as i64);
            let s = site_schur(&spec, x)?;
            let w = crate::schur::winding_number_inner_fn(
                |t| {
                    let z = C64::from_polar(1.0, t);
                    // â(z) = z f_x(z̄)† on the circle
                    s.eval(z.conj()).map(|f| (f.adjoint() * z).determinant()).unwrap_or_default()
                },
                64,
            )?;
            worst = worst.max(w.residue);
            if w.winding != 2 * n as i64 {
                return Ok((f64::INFINITY, format!("det â winding {} on {n} sites", w.winding)));
            }
        }
        Ok((worst, "det â winds 2N times on finite lattices".into()))
    });

    r.run("site Schur vs walk amplitudes", 1e-9, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials.min(12) {
            let spec = match rng.gen_range(0..3) {
                0 => CoinSpec1D::half_line(random_coins(rng, 4), random_disk_point(0.9, rng))?,
                1 => CoinSpec1D::finite({ let n = rng.gen_range(1..=6); random_coins(rng, n) })?,
                _ => CoinSpec1D::line(-2, random_coins(rng, 4), random_disk_point(0.9, rng))?,
            };
            let x = match spec.lattice {
                crate::linops::Lattice1D::Finite(n) => rng.gen_range(0..n as i64),
                crate::linops::Lattice1D::HalfLine => rng.gen_range(0..4),
                crate::linops::Lattice1D::Line => rng.gen_range(-3..3),
            };
            let ours = site_schur(&spec, x)?.amplitudes(30)?;
            let walk = walk_site_amplitudes(&spec, x, 30)?;
            worst = worst.max(ours.mats.iter().zip(&walk.mats).map(|(p, q)| max_abs_diff(p, q)).fold(0.0, f64::max));
        }
        Ok((worst, "30 coefficients".into()))
    });

    r.run("unimodular rotation of parameters", 1e-12, |rng| {
        // f(λz) has parameters λ^k γ_k
        let lam = unit(rng);
        let g: Vec<C64> = random_coins(rng, 5);
        let p = SchurParams::terminated(g.clone(), C64::new(1.0, 0.0))?;
        let rot: Vec<C64> = g.iter().enumerate().map(|(k, c)| c * lam.powi(k as i32)).collect();
        let q = SchurParams::terminated(rot, lam.powi(g.len() as i32))?;
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let z = random_disk_point(1.0, rng);
            let a = p.eval(z * lam, 0)?.value;
            let b = q.eval(z, 0)?.value;
            worst = worst.max((a - b).norm());
        }
        Ok((worst, "f(λz) from rotated parameters".into()))
    });

    r.run("finite τ average equals N", 1e-9, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..trials {
            let n = rng.gen_range(1..=6usize);
            let spec = CoinSpec1D::finite(random_coins(rng, n))?;
            let x = rng.gen_range(0..n as i64);
            match site_tau_matrix(&site_schur(&spec, x)?)? {
                SiteTau::Finite { average, .. } => worst = worst.max((average - n as f64).abs()),
                _ => return Ok((f64::INFINITY, "finite lattice reported a divergent τ".into())),
            }
        }
        Ok((worst, "tr τ_x / 2 on finite lattices".into()))
    });

    r.run("constant coin closed forms", 1e-10, |rng| {
        let mut worst: f64 = 0.0;
        for _ in 0..3 {
            let g = random_disk_point(0.95, rng);
            let cc = constant_coin_analytics(g, 60)?;
            let spec = CoinSpec1D::constant_line(g)?;
            let a = walk_site_amplitudes(&spec, 0, 60)?;
            for n in 0..=60 {
                worst = worst.max(max_abs_diff(&cc.amplitude(n), &a.mats[n]));
            }
        }
        Ok((worst, "Legendre amplitudes vs the walk, 60 steps".into()))
    });

    if opts.suite == Suite::Full {
        r.run("2D table at n_max = 256", 1e-2, |_| {
            let rows = [
                (Lattice2D::Square, "grover", vec![0.6593, 0.4069, 0.4069, 0.2878]),
                (Lattice2D::Square, "fourier", vec![0.5517, 0.3882, 0.3882, 0.2880]),
                (Lattice2D::Hexagonal, "grover", vec![0.8017, 0.2411, 0.2411]),
                (Lattice2D::Hexagonal, "c0", vec![0.6365, 0.6365, 0.5462]),
            ];
            let mut worst: f64 = 0.0;
            for (lat, coin, want) in rows {
                let res = r_eigenvalues(&Walk2DJob::named(lat, coin, 256)?)?;
                for ((l, iv), w) in res.eigenvalues.iter().zip(&res.intervals).zip(&want) {
                    let _ = l;
                    let dist = if iv.contains(*w) { 0.0 } else { (iv.lo - w).abs().min((iv.hi - w).abs()) };
                    worst = worst.max(dist);
                }
            }
            Ok((worst, "distance of printed values from the eigenvalue intervals".into()))
        });
    }

    VerifySummary { schema_version: "subrec.verify/1", suite: opts.suite, seed: opts.seed, checks: r.checks, seconds: t0.elapsed().as_secs_f64() }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fast_suite_passes_and_injection_fails() {
        let s = run_verify(&VerifyOptions { suite: Suite::Fast, seed: 0, inject_failure: false });
        for c in &s.checks {
            eprintln!("{} {:e} {:.1}s", c.name, c.deviation, c.seconds);
            assert!(c.passed, "{}: {:e} ({})", c.name, c.deviation, c.detail);
        }
        let bad = run_verify(&VerifyOptions { suite: Suite::Fast, seed: 0, inject_failure: true });
        assert!(!bad.passed());
    }
}
