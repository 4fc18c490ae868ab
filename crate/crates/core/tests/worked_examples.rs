//! Small hand-checkable cases for each module, exercised through the
//! public API only.

use std::collections::BTreeMap;

use num_traits::Zero;
use rewit::detection::{
    bell_expectations, bell_expectations_all, decomposability_verdict, detector_state,
    modulated_bell, ppt_all, separable_part, sigma_state_report, varpi, BellFamilyParams, Verdict,
};
use rewit::exact::{rat, Rational};
use rewit::lp::{assemble_lp, classify, min_over_apexes, solve, LpProblem};
use rewit::region::{coordinates_of, halfspaces, verify_simplex, Layout};
use rewit::tensor::{c64, is_psd, partial_transpose, Operator, StateVector};
use rewit::witness::{
    build_witness, decompose, max_entangled, params_b_from_a, sigma, spectrum,
};
use rewit::{Shape, Subset, WitnessParams};

fn shape(d: &[usize]) -> Shape {
    Shape::new(d.to_vec()).unwrap()
}

fn sub(m: &[usize]) -> Subset {
    Subset::from_members(m).unwrap()
}

fn basis(d: usize, i: usize) -> Vec<num_complex::Complex64> {
    (0..d).map(|k| c64((k == i) as u8 as f64)).collect()
}

/// Three qubits with `a1 = a2 = a3 = 1`, `a23 = 0`.
fn ghz3() -> WitnessParams {
    let s = shape(&[2, 2, 2]);
    let a: BTreeMap<Subset, Rational> =
        [(sub(&[]), rat(1)), (sub(&[2]), rat(1)), (sub(&[3]), rat(1))].into();
    WitnessParams::new(s, a, rat(0), BTreeMap::new()).unwrap()
}

fn three_qubit(a1: i64, a2: i64, a3: i64, a23: i64) -> WitnessParams {
    let a: BTreeMap<Subset, Rational> =
        [(sub(&[]), rat(a1)), (sub(&[2]), rat(a2)), (sub(&[3]), rat(a3))].into();
    WitnessParams::new(shape(&[2, 2, 2]), a, rat(a23), BTreeMap::new()).unwrap()
}

#[test]
fn ghz_witness_is_identity_minus_twice_ghz() {
    let p = ghz3();
    let psi = Operator::projector(&max_entangled(p.shape()));
    let want = Operator::identity(p.shape().dims()).add_scaled(-2.0, &psi).unwrap();
    assert!(build_witness(&p).unwrap().max_abs_diff(&want).unwrap() < 1e-15);
    let sp = spectrum(&p);
    assert_eq!((sp.omega1.clone(), sp.omega2.clone()), (rat(1), rat(-1)));
    let (e0, e1) = bell_expectations(&p).unwrap();
    assert!((e0 + 1.0).abs() < 1e-12 && (e1 - 1.0).abs() < 1e-12);
}

#[test]
fn reduction_witness_two_qutrits() {
    let s = shape(&[3, 3]);
    let a: BTreeMap<Subset, Rational> = [(sub(&[]), rat(1))].into();
    let p = WitnessParams::new(s.clone(), a, rat(0), p_prime(&s)).unwrap();
    let psi = Operator::projector(&max_entangled(&s));
    let want = Operator::identity(s.dims()).add_scaled(-3.0, &psi).unwrap();
    assert!(build_witness(&p).unwrap().max_abs_diff(&want).unwrap() < 1e-14);
    let b = params_b_from_a(&p);
    assert_eq!(b[&sub(&[])], rat(1));
    assert_eq!(b[&sub(&[2])], rat(-1));
}

fn p_prime(s: &Shape) -> BTreeMap<Subset, Rational> {
    WitnessParams::zeros(s.clone()).a_prime
}

#[test]
fn three_qubit_mobius_coefficients() {
    let p = three_qubit(2, 3, 5, 11);
    let b = params_b_from_a(&p);
    assert_eq!(b[&sub(&[])], rat(2));
    assert_eq!(b[&sub(&[2])], rat(1));
    assert_eq!(b[&sub(&[3])], rat(3));
    assert_eq!(b[&sub(&[2, 3])], rat(11 + 2 - 3 - 5));
    let sp = spectrum(&p);
    assert_eq!(sp.omega1, rat(3 + 5 - 2));
    assert_eq!(sp.omega2, rat(2 * 11 - 6));
}

#[test]
fn sigma_examples() {
    let s = shape(&[2, 2, 2]);
    assert_eq!(sigma(&s, sub(&[])).unwrap(), Operator::identity(s.dims()));
    let g = sigma(&s, sub(&[2, 3])).unwrap();
    assert_eq!(g, Operator::basis_projector(s.dims(), &[0, 7]));
    let t = shape(&[2, 3, 4]);
    assert_eq!(sigma(&t, sub(&[3])).unwrap().trace().re, 6.0);
}

#[test]
fn coordinate_examples() {
    let s = shape(&[2, 2, 2]);
    let at = |d: [usize; 3]| coordinates_of(&s, &d.map(|i| basis(2, i))).unwrap();
    assert_eq!(at([0, 1, 1]), [0.0, 0.0, 0.0]);
    assert_eq!(at([0, 0, 0]), [1.0, 1.0, 1.0]);
    let t = shape(&[2, 3, 4]);
    let p = coordinates_of(&t, &[basis(2, 0), basis(3, 0), basis(4, 2)]).unwrap();
    assert_eq!(p, [1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
}

#[test]
fn constraint_listings() {
    let render = |d: &[usize]| -> Vec<String> {
        let s = shape(d);
        let names = Layout::new(&s).names();
        halfspaces(&s).iter().map(|h| h.render(&names)).collect()
    };
    let h = render(&[2, 2, 2]);
    assert_eq!(h.len(), 4);
    assert!(h.contains(&"1 - P2 - P3 + P23 >= 0".to_string()), "{h:?}");
    assert!(h.contains(&"P2 - P23 >= 0".to_string()), "{h:?}");
    assert!(h.contains(&"P23 >= 0".to_string()), "{h:?}");
    let h = render(&[2, 3, 4]);
    assert_eq!(h.len(), 7);
    assert!(h.contains(&"1 - P2 - P3 + P23 - P'1 >= 0".to_string()), "{h:?}");
    assert_eq!(render(&[2, 2]).len(), 2);
    for d in [&[2, 2, 2][..], &[2, 3, 4], &[2, 2, 2, 2]] {
        let r = verify_simplex(&shape(d));
        assert!(r.ok(), "{d:?} {r:?}");
        assert_eq!(r.apexes, r.facets);
    }
}

#[test]
fn lp_examples() {
    let lp = assemble_lp(&ghz3());
    assert_eq!(lp.objective, [rat(0), rat(0), rat(-1)]);
    assert_eq!(lp.constant, rat(1));
    let sol = solve(&lp).unwrap();
    assert!(sol.value.is_zero());
    assert_eq!(sol.vertex, [rat(1), rat(1), rat(1)]);

    let s = shape(&[2, 2]);
    let a: BTreeMap<Subset, Rational> = [(sub(&[]), rat(1))].into();
    let p = WitnessParams::new(s, a, rat(0), BTreeMap::new()).unwrap();
    let sol = solve(&assemble_lp(&p)).unwrap();
    assert!(sol.value.is_zero());
    assert_eq!(sol.vertex, [rat(1)]);

    let flat = LpProblem { objective: vec![rat(0); 3], constant: rat(7), ..assemble_lp(&ghz3()) };
    assert_eq!(solve(&flat).unwrap().value, rat(7));
}

#[test]
fn enumeration_example_2x3x4() {
    let mut p = WitnessParams::zeros(shape(&[2, 3, 4]));
    p.a.insert(sub(&[]), rat(2));
    p.a.insert(sub(&[2]), rat(1));
    p.a.insert(sub(&[3]), rat(1));
    p.a_full = rat(1);
    let lp = assemble_lp(&p);
    let (v, _) = min_over_apexes(&lp.objective, &lp.constant, lp.apexes.as_ref().unwrap()).unwrap();
    assert_eq!(v, rat(1));
    assert_eq!(solve(&lp).unwrap().value, v);
}

#[test]
fn classification_examples() {
    let c = classify(&ghz3()).unwrap();
    assert!(c.is_ew && c.positive_on_separables && c.negative_eigenvalue);
    let c = classify(&three_qubit(1, 1, 1, 50)).unwrap();
    assert!(c.positive_on_separables && !c.negative_eigenvalue && !c.is_ew);
    let c = classify(&three_qubit(1, -1, 1, 1)).unwrap();
    assert!(!c.positive_on_separables);
}

#[test]
fn decomposition_examples() {
    let mut p = WitnessParams::zeros(shape(&[2, 3, 4]));
    p.a_full = rat(1);
    let d = decompose(&p);
    assert_eq!(d.psi_coefficient, rat(2));
    assert_eq!(d.omega2, rat(2));
    let psi = Operator::projector(&max_entangled(p.shape())).scale(2.0);
    assert!(build_witness(&p).unwrap().max_abs_diff(&psi).unwrap() < 1e-15);
    let d = decompose(&three_qubit(1, 1, 1, 3));
    assert!(d.omega2_nonnegative && d.certified_decomposable);
}

#[test]
fn modulated_bell_states() {
    let s = shape(&[2, 2, 2]);
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let z = modulated_bell(&s, 1).unwrap();
    assert!((z.amplitudes()[0].re - h).abs() < 1e-15);
    assert!((z.amplitudes()[7].re + h).abs() < 1e-15);
    let t = shape(&[3, 3, 4]);
    for i in 0..3 {
        for j in 0..3 {
            let ip = modulated_bell(&t, i).unwrap().inner(&modulated_bell(&t, j).unwrap()).unwrap();
            assert!((ip.norm() - (i == j) as u8 as f64).abs() < 1e-12);
        }
    }
    let mut p = WitnessParams::zeros(t);
    p.a_full = rat(2);
    p.a.insert(sub(&[2]), rat(3));
    let e = bell_expectations_all(&p).unwrap();
    assert!((e[1] - e[2]).abs() < 1e-12);
}

#[test]
fn detector_state_limits() {
    let s = shape(&[2, 2, 2]);
    let rho = detector_state(&s, BellFamilyParams { i: 1, b: 0.0, d: 1.0 }).unwrap();
    let psi = Operator::projector(&modulated_bell(&s, 1).unwrap());
    assert!(rho.max_abs_diff(&psi).unwrap() < 1e-15);
    let rho = detector_state(&s, BellFamilyParams { i: 0, b: 1.0, d: 0.0 }).unwrap();
    let rs = separable_part(&s);
    assert!(rho.max_abs_diff(&rs.scale(1.0 / rs.trace().re)).unwrap() < 1e-15);
    let rho = detector_state(&s, BellFamilyParams { i: 0, b: 1.0, d: 1.0 }).unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-12 && is_psd(&rho, 1e-12).unwrap());
}

#[test]
fn ppt_examples() {
    let s = shape(&[2, 2]);
    let prod = Operator::projector(&StateVector::basis(s.dims(), &[0, 1]).unwrap());
    assert!(ppt_all(&prod).unwrap().iter().all(|(_, f)| *f));
    let bell = Operator::projector(&max_entangled(&s));
    assert!(ppt_all(&bell).unwrap().iter().all(|(_, f)| !*f));
    assert!(!is_psd(&partial_transpose(&bell, &[2]).unwrap(), 1e-9).unwrap());
}

#[test]
fn varpi_examples() {
    assert_eq!(varpi(&WitnessParams::zeros(shape(&[2, 2, 2]))).unwrap(), 0.0);
    let p = ghz3();
    let v = varpi(&p).unwrap();
    assert_eq!(v, -3.0);
    let v5 = varpi(&p.scaled(&rat(5))).unwrap();
    assert!((v5 - 5.0 * v).abs() < 1e-12);
}

#[test]
fn verdicts() {
    assert_eq!(decomposability_verdict(&three_qubit(2, 0, 0, 0)).unwrap().verdict, Verdict::Decomposable);
    let r = decomposability_verdict(&ghz3()).unwrap();
    assert_eq!(r.verdict, Verdict::Undetermined);
    assert!(decomposability_verdict(&three_qubit(1, -1, 1, 0)).is_err());
}

#[test]
fn sigma_state_examples() {
    let r = sigma_state_report(&ghz3(), 1.0, 0.0).unwrap();
    assert!(r.expectation >= 0.0 && r.expectation_prime >= 0.0);
    let r = sigma_state_report(&ghz3(), 1.0, 1.0).unwrap();
    assert_eq!(r.detection_value, 0.0);
    assert!(r.expectation.abs() < 1e-12);
    // Below the boundary the state is detected.
    let r = sigma_state_report(&ghz3(), 0.5, 1.0).unwrap();
    assert!(r.expectation < 0.0);
}
