use super::*;
use crate::krein::{is_krein_selfadjoint, EstimatorMethod, Window};
use rand_chacha::ChaCha8Rng;

fn sig(n: usize, k: usize) -> Signature {
    Signature::new(n, k).unwrap()
}

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Entries `√p mod 1` for successive primes `p`.
fn generic_theta(n: usize) -> Theta {
    let primes = [2.0f64, 3.0, 5.0, 7.0, 11.0, 13.0, 17.0, 19.0, 23.0, 29.0];
    let mut m = crate::linalg::RMat::zeros(n, n);
    let mut next = primes.iter();
    for i in 0..n {
        for j in i + 1..n {
            let t = next.next().unwrap().sqrt().fract();
            m[(i, j)] = t;
            m[(j, i)] = -t;
        }
    }
    Theta::new(m).unwrap()
}

fn random_mode(rng: &mut impl Rng, n: usize, m: i64) -> Vec<i64> {
    (0..n).map(|_| rng.gen_range(-m..=m)).collect()
}

#[test]
fn integration_constants() {
    assert!((integration_constant(2) - 2.0 * PI).abs() < 1e-13);
    assert!((integration_constant(3) - 3.0 * PI * PI).abs() < 1e-12);
    assert!((integration_constant(4) - 8.0 * PI * PI).abs() < 1e-12);
    assert!((volume_target(2) - 0.159_154_943_091_895_3).abs() < 1e-12);
    assert!((volume_target(3) - 0.033_773_727_2).abs() < 1e-9);
}

#[test]
fn signature_targets() {
    assert_eq!(signature_target(sig(2, 0)), 1.0);
    assert_eq!(signature_target(sig(2, 1)), 0.0);
    assert!((signature_target(sig(3, 1)) + 1.0 / 3.0).abs() < 1e-15);
    assert_eq!(signature_target(sig(4, 1)), -0.5);
}

#[test]
fn zero_mode() {
    let m = TorusModel::standard(sig(3, 1), 2).unwrap();
    assert_eq!(linalg::max_abs(&m.dirac_block(&[0, 0, 0]).unwrap()), 0.0);
    assert_eq!(m.delta_eigenvalue(&[0, 0, 0]).unwrap(), 1.0);
}

#[test]
fn lorentzian_plane_modes() {
    let m = TorusModel::standard(sig(2, 1), 3).unwrap();
    let e = m.delta_eigenvalue(&[1, 0]).unwrap();
    assert!((e - (1.0 + 4.0 * PI * PI).sqrt()).abs() < 1e-14);
    assert!((e - 6.3622).abs() < 1e-4);
    let d = m.dirac_block(&[1, 0]).unwrap();
    let sq = &d * &d;
    assert!(linalg::max_diff(&sq, &linalg::identity(2).map(|z| z * 4.0 * PI * PI)) < 1e-12);
    // lightlike mode: D² = 0 while Δ_J sees g^r
    let d = m.dirac_block(&[1, 1]).unwrap();
    assert!(linalg::max_abs(&(&d * &d)) < 1e-12);
    let e = m.delta_eigenvalue(&[1, 1]).unwrap();
    assert!((e - (1.0 + 8.0 * PI * PI).sqrt()).abs() < 1e-13);
    assert!(matches!(m.dirac_block(&[4, 0]), Err(TorusError::ModeOutsideCutoff(_))));
}

#[test]
fn dirac_square_closed_form_and_selfadjointness() {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for (n, k) in [(2, 0), (2, 1), (3, 1), (4, 1), (4, 2), (5, 2)] {
        let s = sig(n, k);
        let m = TorusModel::standard(s, 3).unwrap();
        for _ in 0..20 {
            let y = random_mode(&mut rng, n, 3);
            let d = m.dirac_block(&y).unwrap();
            let yf: Vec<f64> = y.iter().map(|&x| x as f64).collect();
            let expect = s.parity() * 4.0 * PI * PI * s.quadratic_form(&yf);
            let diff = linalg::max_diff(&(&d * &d), &linalg::identity(m.spinor_dim()).map(|z| z * expect));
            assert!(diff < 1e-10 * expect.abs().max(1.0));
            assert!(is_krein_selfadjoint(&d, m.krein_space(), 1e-10 * linalg::max_abs(&d).max(1.0)));
        }
    }
}

#[test]
fn modulus_closed_form_random_reflections() {
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    for (n, k) in [(2, 1), (3, 1), (4, 1), (4, 2)] {
        let s = sig(n, k);
        for _ in 0..5 {
            let r = clifford::random_spacelike_reflection(s, &mut rng, 0.7);
            let m = TorusModel::new(Theta::zero(n), r.clone(), 3).unwrap();
            for _ in 0..10 {
                let y = random_mode(&mut rng, n, 3);
                let yf: Vec<f64> = y.iter().map(|&x| x as f64).collect();
                let expect = 4.0 * PI * PI * r.riemannian_norm_sq(&yf);
                let sq = m.modulus_squared_block(&y).unwrap();
                let eig = krein::j_selfadjoint_eigenvalues(&sq, m.j_tilde()).unwrap();
                for e in eig {
                    assert!((e - expect).abs() <= 1e-10 * expect.max(1.0), "{e} vs {expect}");
                }
                let delta = m.delta_block(&y).unwrap();
                let de = m.delta_eigenvalue(&y).unwrap();
                let diff = linalg::max_diff(&delta, &linalg::identity(m.spinor_dim()).map(|z| z * de));
                assert!(diff < 1e-9 * de);
            }
        }
    }
}

#[test]
fn dirac_is_block_diagonal() {
    let m = TorusModel::standard(sig(2, 1), 2).unwrap();
    let dim = m.spinor_dim();
    let len = m.lattice().len();
    for pos in [0usize, 3, 11, len - 1] {
        for s in 0..dim {
            let mut psi = CMat::zeros(len, dim);
            psi[(pos, s)] = c(1.0, 0.0);
            let out = m.apply_dirac(&psi);
            let y: Vec<i64> = m.lattice().mode(pos).iter().map(|&x| x as i64).collect();
            let block = m.dirac_block(&y).unwrap();
            for row in 0..len {
                for col in 0..dim {
                    let expect = if row == pos { block[(col, s)] } else { c(0.0, 0.0) };
                    assert_eq!(out[(row, col)], expect);
                }
            }
        }
    }
}

#[test]
fn off_diagonal_modes_trace_exactly_zero() {
    let th = Theta::plane(2, 1.0 / 2f64.sqrt());
    let m = TorusModel::new(th, sig(2, 1).standard_reflection(), 16).unwrap();
    let a = AlgebraElement::parse("u:1,0+u:0,1-2i*u:3,-1", 2).unwrap();
    for obs in [Observable::Volume, Observable::Signature] {
        let sums = m.partial_traces(&a, obs).unwrap();
        assert!(sums.iter().all(|z| *z == c(0.0, 0.0)));
    }
}

#[test]
fn trace_linearity() {
    let th = Theta::plane(2, 1.0 / 2f64.sqrt());
    let m = TorusModel::new(th, sig(2, 0).standard_reflection(), 24).unwrap();
    let a = AlgebraElement::parse("3*u:0,0+u:1,0+u:0,1", 2).unwrap();
    let est = Estimator::default();
    let ta = m.trace_functional(&a, Observable::Volume, est).unwrap();
    let t1 = m.trace_functional(&AlgebraElement::one(2), Observable::Volume, est).unwrap();
    assert!((ta.re.value - 3.0 * t1.re.value).abs() < 1e-12 * t1.re.value);
    assert_eq!(ta.im.value, 0.0);
    let unit = m.unit_partial_sums(Observable::Volume);
    let sums = m.partial_traces(&a, Observable::Volume).unwrap();
    for (s, u) in sums.iter().zip(&unit) {
        assert!((s.re - 3.0 * u).abs() <= 1e-13 * u.abs());
    }
}

#[test]
fn theta_independent_spectrum() {
    let r = sig(2, 1).standard_reflection();
    let a = TorusModel::new(Theta::zero(2), r.clone(), 6).unwrap();
    let b = TorusModel::new(Theta::plane(2, 0.61803), r, 6).unwrap();
    let sa: Vec<_> = a.spectrum().map(|(y, e, m)| (y.to_vec(), e, m)).collect();
    let sb: Vec<_> = b.spectrum().map(|(y, e, m)| (y.to_vec(), e, m)).collect();
    assert_eq!(sa, sb);
}

#[test]
fn commutative_spectrum_matches_flat_torus() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let s = sig(3, 1);
    let r = clifford::random_spacelike_reflection(s, &mut rng, 0.6);
    let m = TorusModel::new(Theta::zero(3), r.clone(), 3).unwrap();
    for (y, e, _) in m.spectrum() {
        let yf: Vec<f64> = y.iter().map(|&x| x as f64).collect();
        let flat = 2.0 * PI * r.riemannian_norm_sq(&yf).sqrt();
        assert!((e - (1.0 + flat * flat).sqrt()).abs() < 1e-12 * e);
    }
}

#[test]
fn volume_and_signature_small_cutoff() {
    let est = Estimator::default();
    for (k, target_ratio) in [(0usize, 1.0), (1, 0.0)] {
        let m = TorusModel::standard(sig(2, k), 48).unwrap();
        let t = m.trace_functional(&AlgebraElement::one(2), Observable::Volume, est).unwrap();
        assert!((t.re.value / volume_target(2) - 1.0).abs() < 0.01, "{:?}", t.re);
        assert!(t.re.converged);
        let ratio = m.signature_ratio(est).unwrap();
        assert!((ratio.value - target_ratio).abs() < 0.01, "{ratio:?}");
    }
}

#[test]
fn tail_estimator_is_biased_on_the_torus() {
    let m = TorusModel::standard(sig(2, 0), 32).unwrap();
    let one = AlgebraElement::one(2);
    let slope = m.trace_functional(&one, Observable::Volume, Estimator::default()).unwrap();
    let tail = m
        .trace_functional(
            &one,
            Observable::Volume,
            Estimator {
                method: EstimatorMethod::Tail,
                window: Window::default(),
            },
        )
        .unwrap();
    let target = volume_target(2);
    assert!((tail.re.value - target).abs() > 10.0 * (slope.re.value - target).abs());
}

#[test]
fn dimension_fit() {
    let m = TorusModel::standard(sig(2, 1), 64).unwrap();
    let d = m.dimension_estimate().unwrap();
    assert!((d.value - 2.0).abs() < 0.05, "{d:?}");
    let tiny = TorusModel::standard(sig(2, 1), 1).unwrap();
    assert!(matches!(tiny.dimension_estimate(), Err(TorusError::TooFewEigenvalues(_))));
}

#[test]
fn j_independence_of_volume() {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let s = sig(2, 1);
    let one = AlgebraElement::one(2);
    let mut values = Vec::new();
    for _ in 0..2 {
        let r = clifford::random_spacelike_reflection(s, &mut rng, 0.5);
        let m = TorusModel::new(Theta::zero(2), r, 48).unwrap();
        values.push(m.trace_functional(&one, Observable::Volume, Estimator::default()).unwrap().re.value);
    }
    assert!((values[0] - values[1]).abs() < 0.02 * volume_target(2), "{values:?}");
}

#[test]
fn admissible_reflections_pass_and_classify() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    for (n, k) in [(2, 1), (3, 1), (4, 2)] {
        let s = sig(n, k);
        let th = generic_theta(n);
        let model = TorusModel::new(th, s.standard_reflection(), 2).unwrap();
        for _ in 0..5 {
            let r = clifford::random_spacelike_reflection(s, &mut rng, 0.8);
            let j = clifford::fundamental_symmetry_from_reflection(model.rep(), &r).unwrap();
            let rep = model.admissibility_check(&j);
            assert!(rep.admissible(), "{:?}", rep.report.failures().collect::<Vec<_>>());
            assert!(rep.theta_generic);
            let back = rep.reflection.unwrap();
            for i in 0..n {
                for l in 0..n {
                    assert!((back[i][l] - r.matrix()[(i, l)]).abs() < 1e-10);
                }
            }
        }
    }
}

#[test]
fn riemannian_identity_is_admissible() {
    let model = TorusModel::standard(sig(3, 0), 1).unwrap();
    let rep = model.admissibility_check(&linalg::identity(2));
    assert!(rep.admissible());
    assert!(!rep.theta_generic);
}

#[test]
fn generic_symmetry_fails_gamma_span() {
    let s = sig(2, 1);
    let model = TorusModel::standard(s, 1).unwrap();
    let v = CMat::from_column_slice(2, 1, &[c(1.0, 0.0), c(-0.7, 0.25)]);
    let j = FundamentalSymmetry::from_positive_subspace(model.krein_space(), &v).unwrap();
    let rep = model.admissibility_check(j.matrix());
    assert!(!rep.admissible());
    assert!(rep.report.get("a_positive_product").unwrap().passed);
    assert!(!rep.report.get("d_gamma_span").unwrap().passed);
    assert!(rep.reflection.is_none());
}

#[test]
fn wrong_shape_reported() {
    let model = TorusModel::standard(sig(2, 1), 1).unwrap();
    let rep = model.admissibility_check(&linalg::identity(3));
    assert!(!rep.admissible());
}
