use super::*;
use crate::linops::{build_cyclic_shift, build_shift_plus_flip, Label, Subspace, UnitaryStep};
use crate::numeric::{c, max_abs_diff, random_unit_vector, random_unitary};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const S2: f64 = std::f64::consts::SQRT_2;

fn dm(rows: &[&[C64]]) -> DMatrix<C64> {
    DMatrix::from_fn(rows.len(), rows[0].len(), |i, j| rows[i][j])
}

fn r(x: f64) -> C64 {
    c(x, 0.0)
}

fn shift_flip(w: usize) -> (UnitaryStep, Subspace) {
    let m = build_shift_plus_flip(w).unwrap();
    let v = Subspace::new(m.step.dim(), &[m.psi.clone(), m.phi.clone()]).unwrap();
    (m.step, v)
}

fn cyclic3() -> (UnitaryStep, Subspace) {
    let u = build_cyclic_shift(3).unwrap();
    let v = Subspace::from_labels(u.space(), &[Label::site1(0, 0), Label::site1(1, 0)]).unwrap();
    (u, v)
}

#[test]
fn shift_flip_return_amplitudes() {
    let (u, v) = shift_flip(12);
    let mu = mu_sequence(&u, &v, 6).unwrap();
    let h = 1.0 / S2;
    assert!(max_abs_diff(&mu.mats[1], &dm(&[&[r(0.0), r(h)], &[r(h), r(0.0)]])) < 1e-14);
    assert!(max_abs_diff(&mu.mats[2], &dm(&[&[r(1.0), r(0.0)], &[r(0.0), r(0.5)]])) < 1e-14);
}

#[test]
fn shift_flip_first_returns_and_r() {
    let (u, v) = shift_flip(320);
    let a = first_return_direct(&u, &v, 319).unwrap();
    let h = 1.0 / S2;
    // â(z) = [[z²/2, z/√2], [z/√2, 0]]
    assert!(max_abs_diff(&a.mats[1], &dm(&[&[r(0.0), r(h)], &[r(h), r(0.0)]])) < 1e-14);
    assert!(max_abs_diff(&a.mats[2], &dm(&[&[r(0.5), r(0.0)], &[r(0.0), r(0.0)]])) < 1e-14);
    for n in 3..=10 {
        assert!(a.mats[n].iter().all(|z| z.norm() < 1e-15));
    }
    let rop = return_probability_operator(&a, TailPolicy::None).unwrap();
    assert!(max_abs_diff(&rop.matrix, &dm(&[&[r(0.75), r(0.0)], &[r(0.0), r(0.5)]])) < 1e-14);
    assert_eq!(rop.eigenvalues.len(), 2);
    assert!((rop.eigenvalues[0] - 0.75).abs() < 1e-14 && (rop.eigenvalues[1] - 0.5).abs() < 1e-14);
}

#[test]
fn shift_flip_renewal_matches_direct() {
    let (u, v) = shift_flip(20);
    let mu = mu_sequence(&u, &v, 19).unwrap();
    let a = first_return_direct(&u, &v, 19).unwrap();
    let a2 = renewal_mu_to_a(&mu).unwrap();
    for n in 0..=19 {
        assert!(max_abs_diff(&a.mats[n], &a2.mats[n]) < 1e-13, "n = {n}");
    }
}

#[test]
fn shift_flip_survival_and_transition() {
    let m = build_shift_plus_flip(12).unwrap();
    let v = Subspace::new(m.step.dim(), &[m.psi.clone(), m.phi.clone()]).unwrap();
    let psi = StateVector::normalized(m.psi.clone()).unwrap();
    let s = survival(&m.step, &v, &psi, 10).unwrap();
    assert!((s.s[1] - 0.5).abs() < 1e-15);
    for n in 2..=10 {
        assert!((s.s[n] - 0.25).abs() < 1e-15);
    }
    let a = first_return_direct(&m.step, &v, 10).unwrap();
    let e0 = DVector::from_vec(vec![r(1.0), r(0.0)]);
    let e1 = DVector::from_vec(vec![r(0.0), r(1.0)]);
    for n in 1..=10 {
        let t = crate::numeric::vec_norm_sq(&(&a.mats[n] * &e0));
        assert!((t - (s.s[n - 1] - s.s[n])).abs() < 1e-12);
    }
    let p = transition_probability(&a, &e0, &e1).unwrap();
    let q = transition_probability(&a, &e1, &e0).unwrap();
    assert!((p.value - 0.5).abs() < 1e-14 && (q.value - 0.5).abs() < 1e-14);
}

#[test]
fn survival_rejects_state_outside_v() {
    let (u, v) = cyclic3();
    let psi = StateVector::normalized(DVector::from_vec(vec![r(0.0), r(0.0), r(1.0)])).unwrap();
    assert!(matches!(survival(&u, &v, &psi, 3), Err(Error::Domain(_))));
}

#[test]
fn cyclic_amplitudes_and_tau() {
    let (u, v) = cyclic3();
    let mu = mu_sequence(&u, &v, 9).unwrap();
    let low = dm(&[&[r(0.0), r(0.0)], &[r(1.0), r(0.0)]]);
    let up = dm(&[&[r(0.0), r(1.0)], &[r(0.0), r(0.0)]]);
    assert!(max_abs_diff(&mu.mats[1], &low) < 1e-15);
    let a = first_return_direct(&u, &v, 9).unwrap();
    assert!(max_abs_diff(&a.mats[1], &low) < 1e-15);
    assert!(max_abs_diff(&a.mats[2], &up) < 1e-15);
    assert!(a.mats[3..].iter().all(|m| m.iter().all(|z| z.norm() == 0.0)));
    let mu2 = renewal_a_to_mu(&a).unwrap();
    for k in 0..3 {
        assert!(max_abs_diff(&mu2.mats[3 * k + 1], &low) < 1e-15);
        assert!(max_abs_diff(&mu2.mats[3 * k], &DMatrix::identity(2, 2)) < 1e-15);
    }
    match tau_operator(&a, 1e-9).unwrap() {
        TauOperator::Finite { matrix, average, .. } => {
            assert!(max_abs_diff(&matrix, &dm(&[&[r(1.0), r(0.0)], &[r(0.0), r(2.0)]])) < 1e-14);
            assert_eq!(average, 1.5);
        }
        t => panic!("{t:?}"),
    }
    // τ(α|0⟩ + β|1⟩) = 1 + |β|²
    let beta = c(0.6, 0.0);
    let psi = DVector::from_vec(vec![c(0.0, 0.8), beta]);
    let t = expected_return_time(&a, &psi, 1e-9).unwrap().value().unwrap();
    assert!((t - 1.36).abs() < 1e-14);
}

#[test]
fn cyclic_k_three_ways() {
    let (u, v) = cyclic3();
    for m in [KMethod::EigenRanks, KMethod::FrobeniusSurvival, KMethod::Winding] {
        let k = k_invariant(m, &u, &v).unwrap();
        assert_eq!(k.k, 3, "{m:?}");
        assert!(k.residue < 1e-6);
    }
    let dec = spectral_decompose(&u).unwrap();
    assert_eq!(k_dim_minus_nu(&dec, &v).unwrap(), 3);
    assert_eq!(dec.eigenvalues.len(), 3);
    let mut sum = DMatrix::zeros(3, 3);
    for p in &dec.projectors {
        sum += p;
    }
    assert!(max_abs_diff(&sum, &DMatrix::identity(3, 3)) < 1e-10);
    for l in &dec.eigenvalues {
        assert!((l.powu(3) - r(1.0)).norm() < 1e-10);
    }
}

#[test]
fn cyclic_berry_phase() {
    let (u, v) = cyclic3();
    let a = first_return_direct(&u, &v, 6).unwrap();
    let psi = DVector::from_vec(vec![r(1.0 / S2), r(1.0 / S2)]);
    let b = berry_phase_loop(&a, &psi, 16).unwrap();
    assert!((b.tau - 1.5).abs() < 1e-6, "{b:?}");
}

#[test]
fn whole_space_is_returned_in_one_step() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let m = random_unitary(4, &mut rng);
    let u = UnitaryStep::from_dense(m.clone()).unwrap();
    let labels: Vec<_> = (0..4).map(|k| Label::site1(k, 0)).collect();
    let v = Subspace::from_labels(u.space(), &labels).unwrap();
    let a = first_return_direct(&u, &v, 4).unwrap();
    assert!(max_abs_diff(&a.mats[1], &m) < 1e-14);
    assert!(a.mats[2].iter().all(|z| z.norm() < 1e-15));
    for meth in [KMethod::EigenRanks, KMethod::FrobeniusSurvival, KMethod::Winding] {
        assert_eq!(k_invariant(meth, &u, &v).unwrap().k, 4);
    }
    let psi = random_unit_vector(4, &mut rng);
    let t = expected_return_time(&a, &psi, 1e-9).unwrap().value().unwrap();
    assert!((t - 1.0).abs() < 1e-13);
}

fn random_model(seed: u64, n: usize, d: usize) -> (UnitaryStep, Subspace, ChaCha8Rng) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let u = UnitaryStep::from_dense(random_unitary(n, &mut rng)).unwrap();
    let q = random_unitary(n, &mut rng);
    let vs: Vec<_> = (0..d).map(|j| q.column(j).into_owned()).collect();
    let v = Subspace::new(n, &vs).unwrap();
    (u, v, rng)
}

#[test]
fn renewal_round_trip_random() {
    for seed in 0..5 {
        let (u, v, _) = random_model(seed, 3 + seed as usize, 2);
        let mu = mu_sequence(&u, &v, 30).unwrap();
        let a = first_return_direct(&u, &v, 30).unwrap();
        let a2 = renewal_mu_to_a(&mu).unwrap();
        let mu2 = renewal_a_to_mu(&a).unwrap();
        for n in 0..=30 {
            assert!(max_abs_diff(&a.mats[n], &a2.mats[n]) < 1e-11);
            assert!(max_abs_diff(&mu.mats[n], &mu2.mats[n]) < 1e-11);
        }
    }
}

#[test]
fn random_finite_model_is_recurrent_with_consistent_k() {
    for seed in 10..16 {
        let (u, v, mut rng) = random_model(seed, 6, 2);
        let rep = recurrence_report(&u, &v, &ReportOptions::default()).unwrap();
        assert_eq!(rep.classification, Classification::RecurrentFiniteTau);
        assert_eq!(rep.k, Some(6), "{:?}", rep.k_methods);
        assert_eq!(rep.k_dim_minus_nu, Some(6));
        assert!((rep.avg_tau().unwrap() - 3.0).abs() < 1e-8);
        let (a, _) = first_return_converged(&u, &v, 1e-28, 100_000).unwrap();
        let psi = random_unit_vector(2, &mut rng);
        let t = expected_return_time(&a, &psi, 1e-9).unwrap().value().unwrap();
        let b = berry_phase_loop(&a, &psi, 64).unwrap();
        assert!((t - b.tau).abs() < 1e-6, "{t} vs {b:?}");
        // R(ψ) = Σ_k Prob(ψ, e_k)
        let rop = return_probability_operator(&a, TailPolicy::None).unwrap();
        let rpsi = crate::numeric::inner(&psi, &(&rop.matrix * &psi)).re;
        let e: Vec<DVector<C64>> = (0..2).map(|k| DVector::from_fn(2, |i, _| r((i == k) as u8 as f64))).collect();
        let sum: f64 = e.iter().map(|ek| transition_probability(&a, &psi, ek).unwrap().value).sum();
        assert!((rpsi - sum).abs() < 1e-10);
    }
}

#[test]
fn k_counts_minimal_invariant_subspace() {
    // Block-diagonal U: V lives in the first block of size 3, K = 3 although dim H = 5.
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let b1 = random_unitary(3, &mut rng);
    let b2 = random_unitary(2, &mut rng);
    let mut m = DMatrix::zeros(5, 5);
    m.view_mut((0, 0), (3, 3)).copy_from(&b1);
    m.view_mut((3, 3), (2, 2)).copy_from(&b2);
    let u = UnitaryStep::from_dense(m).unwrap();
    let v = Subspace::from_labels(u.space(), &[Label::site1(0, 0)]).unwrap();
    let dec = spectral_decompose(&u).unwrap();
    let k1 = k_eigen_ranks(&dec, &v).unwrap().k;
    let k2 = k_frobenius_survival(&u, &v).unwrap().k;
    let k3 = k_invariant(KMethod::Winding, &u, &v).unwrap().k;
    assert_eq!((k1, k2, k3), (3, 3, 3));
    assert_eq!(k_dim_minus_nu(&dec, &v).unwrap(), 3);
}

#[test]
fn spectral_data_of_truncated_model_is_refused() {
    let (u, _) = shift_flip(5);
    assert!(matches!(spectral_decompose(&u), Err(Error::TruncatedModel)));
}

/// `C² ⊕ C`: swap on the first two states, a phase on the third.
fn swap_plus_phase(alpha: f64) -> (UnitaryStep, Subspace) {
    let mut m = DMatrix::zeros(3, 3);
    m[(1, 0)] = r(1.0);
    m[(0, 1)] = r(1.0);
    m[(2, 2)] = C64::from_polar(1.0, alpha);
    let u = UnitaryStep::from_dense(m).unwrap();
    let psi = DVector::from_vec(vec![r(1.0), r(0.0), r(0.0)]);
    let phi = DVector::from_vec(vec![r(0.0), r(1.0 / S2), r(1.0 / S2)]);
    let v = Subspace::new(3, &[psi, phi]).unwrap();
    (u, v)
}

#[test]
fn swap_block_masses() {
    let (u, v) = swap_plus_phase(0.7);
    let dec = spectral_decompose(&u).unwrap();
    let masses = subspace_spectral_measure(&dec, &v).unwrap();
    assert_eq!(masses.len(), 3);
    let h = 1.0 / (2.0 * S2);
    for s in [1.0, -1.0] {
        let m = masses.iter().find(|m| (m.lambda - r(s)).norm() < 1e-9).unwrap();
        let want = dm(&[&[r(0.5), r(s * h)], &[r(s * h), r(0.25)]]);
        assert!(max_abs_diff(&m.mass, &want) < 1e-12);
        assert_eq!(m.rank, 1);
    }
    let mut total = DMatrix::zeros(2, 2);
    for m in &masses {
        total += &m.mass;
    }
    assert!(max_abs_diff(&total, &DMatrix::identity(2, 2)) < 1e-9);
}

#[test]
fn caratheodory_routes_agree() {
    let (u, v) = swap_plus_phase(0.7);
    let dec = spectral_decompose(&u).unwrap();
    let masses = subspace_spectral_measure(&dec, &v).unwrap();
    let (a, _) = first_return_converged(&u, &v, 1e-30, 10_000).unwrap();
    let f = matrix_schur_from_amplitudes(&a).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for _ in 0..10 {
        let z = crate::numeric::random_disk_point(0.9, &mut rng);
        let f1 = caratheodory_from_masses(&masses, z).unwrap();
        let f2 = caratheodory_from_schur(&f, z).unwrap();
        assert!(max_abs_diff(&f1, &f2) < 1e-10);
        // F(z̄)† = 2μ̂(z) − I
        let s = stieltjes_from_masses(&masses, z).unwrap();
        let lhs = caratheodory_from_masses(&masses, z.conj()).unwrap().adjoint();
        assert!(max_abs_diff(&lhs, &(s * r(2.0) - DMatrix::identity(2, 2))) < 1e-10);
        // (I − z f)(F + I) = 2I
        let fz = f.eval(z);
        let prod = (DMatrix::identity(2, 2) - fz * z) * (f1 + DMatrix::identity(2, 2));
        assert!(max_abs_diff(&prod, &(DMatrix::identity(2, 2) * r(2.0))) < 1e-10);
    }
    assert!(max_abs_diff(&caratheodory_from_masses(&masses, r(0.0)).unwrap(), &DMatrix::identity(2, 2)) < 1e-12);
}

#[test]
fn shift_flip_schur_and_caratheodory() {
    let (u, v) = shift_flip(12);
    let a = first_return_direct(&u, &v, 10).unwrap();
    let f = matrix_schur_from_amplitudes(&a).unwrap();
    let h = 1.0 / S2;
    let z = c(0.3, -0.4);
    let want_f = dm(&[&[z / 2.0, r(h)], &[r(h), r(0.0)]]);
    assert!(max_abs_diff(&f.eval(z), &want_f) < 1e-15);
    let big_f = caratheodory_from_schur(&f, z).unwrap();
    let den = r(1.0) - z * z;
    let want = dm(&[&[(r(1.0) + z * z) / den, z * S2 / den], &[z * S2 / den, r(1.0) / den]]);
    assert!(max_abs_diff(&big_f, &want) < 1e-14);
}

#[test]
fn single_mass_scalar() {
    let m = SpectralMass { lambda: r(1.0), mass: DMatrix::identity(1, 1), rank: 1 };
    let z = c(0.2, 0.5);
    let f = caratheodory_from_masses(std::slice::from_ref(&m), z).unwrap();
    assert!((f[(0, 0)] - (r(1.0) + z) / (r(1.0) - z)).norm() < 1e-15);
    assert!(matches!(caratheodory_from_masses(&[m], r(1.0 - 1e-7)), Err(Error::Domain(_))));
}

#[test]
fn pure_winding_berry_phase() {
    // â = zW with W unitary: every eigenvector of W returns at step 1.
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let w = random_unitary(3, &mut rng);
    let mats = vec![DMatrix::zeros(3, 3), w];
    let a = AmplitudeSequence::new(AmplitudeKind::A, mats).unwrap();
    let psi = random_unit_vector(3, &mut rng);
    let b = berry_phase_loop(&a, &psi, 16).unwrap();
    assert!((b.tau - 1.0).abs() < 1e-9);
    assert_eq!(k_winding(&a).unwrap().k, 3);
}

#[test]
fn berry_refuses_non_inner_loop() {
    let mats = vec![DMatrix::zeros(1, 1), DMatrix::from_element(1, 1, r(0.5))];
    let a = AmplitudeSequence::new(AmplitudeKind::A, mats).unwrap();
    let psi = DVector::from_element(1, r(1.0));
    assert!(matches!(berry_phase_loop(&a, &psi, 16), Err(Error::NotApplicable(_))));
    assert!(matches!(k_winding(&a), Err(Error::NotRationalInner(_))));
}

#[test]
fn report_json_shape() {
    let (u, v) = cyclic3();
    let rep = recurrence_report(&u, &v, &ReportOptions::default()).unwrap();
    let j = rep.to_json();
    assert_eq!(j["schema_version"], REPORT_SCHEMA);
    assert_eq!(j["K"], 3);
    assert_eq!(j["avg_tau_rational"], "3/2");
    assert_eq!(j["classification"], "recurrent_finite_tau");
    assert_eq!(j["R_op"][1][1], serde_json::json!([1.0, 0.0]));
}

#[test]
fn not_recurrent_on_open_line() {
    let (u, v) = shift_flip(40);
    let opts = ReportOptions { horizon: Some(30), ..Default::default() };
    let rep = recurrence_report(&u, &v, &opts).unwrap();
    assert_eq!(rep.classification, Classification::NotRecurrent);
    assert!(rep.k.is_none());
    assert!(matches!(rep.tau, TauOperator::Divergent { .. }));
}

#[test]
fn shift_flip_crossover() {
    let (u, v) = shift_flip(160);
    let a = first_return_direct(&u, &v, 159).unwrap();
    let b = state_subspace_crossover(&a, 1e-6, 1.0, 1e-12).unwrap();
    assert!((b - (5.0 - 17f64.sqrt()) / 2.0).abs() < 1e-9, "{b}");
    // closed form R_{α,β} = (1 − b/2)/(1 + b/2) at a sample point
    let mu = renewal_a_to_mu(&a).unwrap();
    let psi = DVector::from_vec(vec![r(0.8f64.sqrt()), r(0.2f64.sqrt())]);
    let s = state_return_probability(&mu, &psi).unwrap();
    assert!((s.partial - 0.9 / 1.1).abs() < 1e-10, "{}", s.partial);
}
