use std::sync::Arc;

use nalgebra::SymmetricEigen;
use num_complex::Complex64;
use proptest::prelude::*;
use qeilab::fock::*;
use qeilab::qei_bounds::worldline_bound_from_kernel;
use qeilab::sampling::{GridSpec, SamplerKind, SamplingFunction};
use qeilab::Error;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn small_space() -> Arc<TruncatedFockSpace> {
    let model = FockModel { length: 10.0, mass: 0.0, n_min: -3, n_max: 3, occupation_cap: 3, zero_mode: ZeroMode::Exclude };
    Arc::new(model.build(DEFAULT_DIMENSION_CAP).unwrap())
}

fn lowest_dense(a: &FieldOperatorMatrix) -> f64 {
    let d = a.to_dense().unwrap();
    let h = (&d + d.adjoint()) * Complex64::new(0.5, 0.0);
    SymmetricEigen::new(h).eigenvalues.iter().copied().fold(f64::INFINITY, f64::min)
}

#[test]
fn space_construction_examples() {
    let one = ModeBasis::new(10.0, 0.0, 1, 1, ZeroMode::Exclude).unwrap();
    assert_eq!(build_space(one, 2, 100).unwrap().dimension(), 3);
    assert!(ModeBasis::new(10.0, 0.0, 0, 0, ZeroMode::Exclude).is_err());
    assert!(ModeBasis::new(10.0, 0.0, 0, 0, ZeroMode::Include).is_err());
    let big = FockModel { length: 50.0, mass: 0.0, n_min: -20, n_max: 20, occupation_cap: 5, zero_mode: ZeroMode::Exclude };
    assert!(matches!(big.build(DEFAULT_DIMENSION_CAP), Err(Error::DimensionCap { .. })));
}

#[test]
fn spatial_average_equals_mode_energy() {
    let space = small_space();
    let l = space.basis().length();
    let nx = 64;
    let dx = l / nx as f64;
    let ops: Vec<_> = (0..nx).map(|i| energy_density_matrix(&space, 0.0, i as f64 * dx).unwrap()).collect();
    for s in [1usize, 5, 17, 40, space.dimension() - 1] {
        let mut psi = vec![Complex64::new(0.0, 0.0); space.dimension()];
        psi[s] = Complex64::new(1.0, 0.0);
        // periodic trapezoid is exact for the trigonometric polynomial in x
        let avg: f64 = ops.iter().map(|a| a.expectation(&psi)).sum::<f64>() * dx;
        let occ = space.occupation_vector(s);
        let expect: f64 = occ.iter().zip(space.basis().modes()).map(|(&n, m)| n as f64 * m.omega).sum();
        assert!((avg - expect).abs() < 1e-10, "state {s}: {avg} vs {expect}");
    }
}

#[test]
fn egj_family_endpoints() {
    let space = small_space();
    let a = smeared_energy(&space, &SamplingFunction::gaussian(1.0).unwrap(), 0.0, VacuumEnergy::NormalOrdered).unwrap();
    let p = egj_parameters(&a).unwrap();
    let v0 = p.state(0.0).unwrap();
    assert!((v0.coeffs()[space.vacuum_index()] - 1.0).norm() < 1e-15);
    let v1 = p.state(std::f64::consts::FRAC_PI_2).unwrap();
    let img = a.apply(StateVector::vacuum(&space).coeffs());
    let nrm = img.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for (x, y) in v1.coeffs().iter().zip(&img) {
        assert!((x - y / nrm).norm() < 1e-14);
    }
    assert!((p.zeta - nrm).abs() < 1e-14);
    let b = egj_bound(p.zeta, p.eta).unwrap();
    assert!(b < 0.0);
    assert!(lowest_dense(&a) <= b + 1e-12);
}

#[test]
fn egj_scan_matches_closed_form() {
    let space = small_space();
    let a = smeared_energy(&space, &SamplingFunction::gaussian(1.0).unwrap(), 0.0, VacuumEnergy::NormalOrdered).unwrap();
    let p = egj_parameters(&a).unwrap();
    let d = a.to_dense().unwrap();
    let v0 = space.vacuum_index();
    let a3 = (&d * &d * &d)[(v0, v0)].re;
    assert!((p.eta - a3 / (2.0 * p.zeta * p.zeta)).abs() < 1e-12 * p.eta.abs().max(1.0));
    for i in 0..32 {
        let alpha = std::f64::consts::PI * i as f64 / 32.0;
        let e = a.expectation(p.state(alpha).unwrap().coeffs());
        assert!((e - p.predicted(alpha)).abs() < 1e-12, "α={alpha}: {e} vs {}", p.predicted(alpha));
        assert!((e - p.direct(alpha)).abs() < 1e-12);
    }
}

#[test]
fn zero_weight_annihilates_vacuum() {
    let space = small_space();
    let g = SamplingFunction::gaussian(1.0).unwrap().scaled_by(0.0);
    let a = smeared_energy(&space, &g, 0.0, VacuumEnergy::NormalOrdered).unwrap();
    assert!(a.number_conserving().iter().chain(a.pair()).all(|z| z.norm() == 0.0));
    assert!(matches!(egj_parameters(&a), Err(Error::AnnihilatesVacuum)));
}

#[test]
fn lanczos_agrees_with_dense_spectrum() {
    let space = small_space();
    let a = smeared_energy(&space, &SamplingFunction::gaussian(0.8).unwrap(), 1.0, VacuumEnergy::NormalOrdered).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let start = random_state(&space, &mut rng);
    let opts = LanczosOptions { rel_tol: 1e-10, ..LanczosOptions::default() };
    let e = lowest_eigenpair(&a, start.coeffs(), opts).unwrap();
    assert!((e.value - lowest_dense(&a)).abs() < 1e-8, "{} vs {}", e.value, lowest_dense(&a));
}

#[test]
fn verification_report_on_small_model() {
    let space = small_space();
    let g = SamplingFunction::gaussian(1.5).unwrap();
    let a = smeared_energy(&space, &g, 0.0, VacuumEnergy::NormalOrdered).unwrap();
    let (bound, _) = worldline_bound_from_kernel(&space.basis().vacuum_kernel(), &g).unwrap();
    let sample = StateSample { random: 50, seed: 11, include_vacuum: true, include_lowest: true, egj_alphas: 64 };
    let rep = verify_qei(&a, &bound, sample).unwrap();
    assert!(rep.pass, "{:?}", rep.min_expectation);
    assert_eq!(rep.states.len(), 1 + 50 + 64 + 1);
    assert!(rep.lowest_eigenvalue.unwrap() >= bound.value);
    assert!(rep.lowest_eigenvalue.unwrap() < 0.0);
    let again = verify_qei(&a, &bound, sample).unwrap();
    assert_eq!(rep.to_json(), again.to_json());
    let mut csv = Vec::new();
    rep.write_csv(&mut csv).unwrap();
    assert_eq!(String::from_utf8(csv).unwrap().lines().count(), rep.states.len() + 1);
}

#[test]
fn model_file_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("box.json");
    std::fs::write(&path, r#"{"L": 50, "mass": 0, "n_min": -20, "n_max": 20, "N_max": 2}"#).unwrap();
    let m = FockModel::from_json(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(m.zero_mode, ZeroMode::Exclude);
    let s = m.build(DEFAULT_DIMENSION_CAP).unwrap();
    assert_eq!(s.dimension(), 1 + 40 + 40 * 41 / 2);
}

proptest! {
    #![proptest_config(ProptestConfig { cases: 24, failure_persistence: None, ..ProptestConfig::default() })]

    #[test]
    fn density_is_hermitian_and_normal_ordered(t in -5.0f64..5.0, x in 0.0f64..10.0) {
        let space = small_space();
        let a = energy_density_matrix(&space, t, x).unwrap();
        prop_assert!(a.hermiticity_defect() < 1e-12);
        prop_assert!(a.vacuum_expectation().abs() < 1e-12);
    }

    #[test]
    fn smeared_energy_has_negative_states(tau in 0.3f64..4.0, c in 3.0f64..7.0, x0 in 0.0f64..10.0) {
        let space = small_space();
        let gc = SamplingFunction::new(SamplerKind::Gaussian { tau }, c, GridSpec::Default).unwrap();
        let a = smeared_energy(&space, &gc, x0, VacuumEnergy::NormalOrdered).unwrap();
        prop_assert!(a.hermiticity_defect() < 1e-12);
        prop_assert!(a.vacuum_expectation().abs() < 1e-12);
        let low = lowest_dense(&a);
        prop_assert!(low < 0.0);
        let (bound, _) = worldline_bound_from_kernel(&space.basis().vacuum_kernel(), &gc).unwrap();
        prop_assert!(low >= bound.value - bound.error_estimate - 1e-8 * bound.value.abs(), "{} < {}", low, bound.value);
    }
}
