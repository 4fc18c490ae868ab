//! Detector states for reduction-type witnesses and the three-valued
//! decomposability verdict.

use num_complex::Complex64;
use num_traits::Signed;

use crate::error::{Error, Result};
use crate::exact::{rat, to_f64, Rational};
use crate::lp::classify;
use crate::tensor::{
    c64, expectation, expectation_rho, min_eigenvalue, partial_transpose, CMatrix, Operator,
    Shape, StateVector, PSD_TOL,
};
use crate::witness::{build_witness, spectrum, WitnessParams};

/// Number of `B/D` ratios tried when searching for a PPT certificate.
pub const CERTIFICATE_GRID: usize = 64;

/// Detection threshold for a certificate's expectation value.
pub const DETECTION_TOL: f64 = 1e-10;

/// `(Z^i ⊗ I ⊗ ... ⊗ I)|ψ>` with `Z = diag(1, ζ, ..., ζ^{d1-1})`,
/// `ζ = exp(2πi / d1)`.
pub fn modulated_bell(shape: &Shape, i: usize) -> Result<StateVector> {
    let d1 = shape.d1();
    if i >= d1 {
        return Err(Error::InvalidParams(format!(
            "Bell index {i} must be below d1 = {d1}"
        )));
    }
    let dims = shape.dims();
    let amp = 1.0 / (d1 as f64).sqrt();
    let mut amps = vec![c64(0.0); dims.total()];
    for k in 0..d1 {
        let phase = 2.0 * std::f64::consts::PI * ((i * k) % d1) as f64 / d1 as f64;
        amps[dims.index(&vec![k; shape.n()])] = Complex64::from_polar(amp, phase);
    }
    StateVector::new(dims.clone(), amps)
}

/// `Tr(W ψ_i)` for every `i < d1`.
pub fn bell_expectations_all(params: &WitnessParams) -> Result<Vec<f64>> {
    let w = build_witness(params)?;
    (0..params.shape().d1())
        .map(|i| expectation(&w, &modulated_bell(params.shape(), i)?))
        .collect()
}

/// `(Tr(W ψ_0), Tr(W ψ_1))`; these equal `(ω2, ω1)`.
pub fn bell_expectations(params: &WitnessParams) -> Result<(f64, f64)> {
    let all = bell_expectations_all(params)?;
    Ok((all[0], all[1]))
}

/// Indices of the kets `|k k ... k>`, `k < d1`.
fn ghz_indices(shape: &Shape) -> Vec<usize> {
    (0..shape.d1())
        .map(|k| shape.dims().index(&vec![k; shape.n()]))
        .collect()
}

/// Unnormalized separable part `ρ_s = I - Σ_j ψ_j`, the diagonal projector
/// onto every ket outside `span{|k k ... k>}`.
pub fn separable_part(shape: &Shape) -> Operator {
    let ghz = ghz_indices(shape);
    let support: Vec<usize> = (0..shape.total()).filter(|i| !ghz.contains(i)).collect();
    Operator::basis_projector(shape.dims(), &support)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BellFamilyParams {
    pub i: usize,
    pub b: f64,
    pub d: f64,
}

/// `ρ = [B ρ_s + D d1 ψ_i] / (B Tr ρ_s + D d1)`.
pub fn detector_state(shape: &Shape, fam: BellFamilyParams) -> Result<Operator> {
    if fam.b < 0.0 || fam.d < 0.0 {
        return Err(Error::InvalidParams(format!(
            "B = {} and D = {} must both be non-negative",
            fam.b, fam.d
        )));
    }
    let d1 = shape.d1() as f64;
    let rho_s = separable_part(shape);
    let norm = fam.b * rho_s.trace().re + fam.d * d1;
    if norm <= 0.0 {
        return Err(Error::InvalidParams(
            "normalization B Tr(ρ_s) + D d1 must be positive".into(),
        ));
    }
    let psi = Operator::projector(&modulated_bell(shape, fam.i)?);
    let rho = rho_s
        .scale(fam.b)
        .add_scaled(fam.d * d1, &psi)?
        .scale(1.0 / norm);
    let m = min_eigenvalue(&rho)?;
    if m < -PSD_TOL {
        return Err(Error::NotPositive(m));
    }
    Ok(rho)
}

/// PSD flag of the partial transpose over every non-empty proper subset of
/// particles, ordered by subset bitmask. `PT_X` and `PT_{X^c}` are
/// transposes of each other, so only subsets without particle 1 are
/// diagonalized.
pub fn ppt_all(rho: &Operator) -> Result<Vec<(Vec<usize>, bool)>> {
    let n = rho.dims().len();
    let full = (1u64 << n) - 1;
    let mut cache = std::collections::HashMap::new();
    let mut out = Vec::new();
    for mask in 1..full {
        let key = if mask & 1 == 1 { full ^ mask } else { mask };
        let members = |m: u64| -> Vec<usize> { (0..n).filter(|k| m & (1 << k) != 0).map(|k| k + 1).collect() };
        let flag = match cache.get(&key) {
            Some(&f) => f,
            None => {
                let pt = partial_transpose(rho, &members(key))?;
                let f = min_eigenvalue(&pt)? >= -PSD_TOL;
                cache.insert(key, f);
                f
            }
        };
        out.push((members(mask), flag));
    }
    Ok(out)
}

/// `Tr(W ρ_s)` in exact arithmetic: the sum of the diagonal eigenvalues.
pub fn separable_trace_exact(params: &WitnessParams) -> Rational {
    let sp = spectrum(params);
    sp.a_values
        .iter()
        .chain(&sp.a_plus_aprime)
        .map(|e| &e.value * rat(e.multiplicity as i64))
        .sum()
}

/// `ϖ = -Tr(W ρ_s) / d1`, exact.
pub fn varpi_exact(params: &WitnessParams) -> Rational {
    -separable_trace_exact(params) / rat(params.shape().d1() as i64)
}

/// `ϖ` from the dense operators.
pub fn varpi(params: &WitnessParams) -> Result<f64> {
    let w = build_witness(params)?;
    let rho_s = separable_part(params.shape());
    let t = crate::tensor::trace_product(&w, &rho_s).re;
    Ok(-t / params.shape().d1() as f64)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Verdict {
    Decomposable,
    NonDecomposable,
    Undetermined,
}

impl Verdict {
    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Decomposable => "decomposable",
            Verdict::NonDecomposable => "non-decomposable",
            Verdict::Undetermined => "undetermined",
        }
    }
}

/// A PPT detector state on which the witness is negative.
#[derive(Clone, Debug, PartialEq)]
pub struct Certificate {
    pub b: f64,
    pub d: f64,
    pub ppt_flags: Vec<(Vec<usize>, bool)>,
    pub expectation: f64,
}

impl Certificate {
    pub fn is_valid(&self) -> bool {
        self.b >= self.d
            && self.d > 0.0
            && self.ppt_flags.iter().all(|(_, f)| *f)
            && self.expectation < -DETECTION_TOL
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DetectionReport {
    pub omega1: Rational,
    pub omega2: Rational,
    pub varpi: Rational,
    /// `Tr(W ψ_0)`.
    pub expectation: f64,
    /// PPT flags of the boundary detector state `B = D = 1`, `i = 0`.
    pub ppt_flags: Vec<(Vec<usize>, bool)>,
    pub verdict: Verdict,
    pub certificate: Option<Certificate>,
    /// `B/D` ratios tried in the certificate search.
    pub ratios_tried: usize,
}

/// `ω2 >= 0`: decomposable; `ω2 < ϖ`: non-decomposable, with a searched
/// certificate; otherwise undetermined. Requires a valid witness.
pub fn decomposability_verdict(params: &WitnessParams) -> Result<DetectionReport> {
    let c = classify(params)?;
    if !c.is_ew {
        return Err(Error::InvalidParams(format!(
            "not an entanglement witness (LP minimum {}, negative eigenvalue: {})",
            crate::exact::format_rational(&c.lp_min),
            c.negative_eigenvalue
        )));
    }
    let shape = params.shape();
    let sp = spectrum(params);
    let varpi = varpi_exact(params);
    let w = build_witness(params)?;
    let boundary = detector_state(shape, BellFamilyParams { i: 0, b: 1.0, d: 1.0 })?;
    let ppt_flags = ppt_all(&boundary)?;
    let expectation = expectation(&w, &modulated_bell(shape, 0)?)?;

    let mut certificate = None;
    let mut ratios_tried = 0;
    let verdict = if !sp.omega2.is_negative() {
        Verdict::Decomposable
    } else if sp.omega2 < varpi {
        let t = separable_trace_exact(params);
        let d1 = rat(shape.d1() as i64);
        // Tr(Wρ) < 0 iff B/D < -d1 ω2 / Tr(W ρ_s).
        let upper = if t.is_positive() {
            to_f64(&(-(d1 * &sp.omega2) / t))
        } else {
            2.0
        };
        for k in 0..CERTIFICATE_GRID {
            ratios_tried += 1;
            let r = 1.0 + (upper - 1.0) * k as f64 / CERTIFICATE_GRID as f64;
            let fam = BellFamilyParams { i: 0, b: r, d: 1.0 };
            let rho = detector_state(shape, fam)?;
            let cand = Certificate {
                b: r,
                d: 1.0,
                ppt_flags: ppt_all(&rho)?,
                expectation: expectation_rho(&w, &rho)?,
            };
            if cand.is_valid() {
                certificate = Some(cand);
                break;
            }
        }
        Verdict::NonDecomposable
    } else {
        Verdict::Undetermined
    };
    Ok(DetectionReport {
        omega1: sp.omega1,
        omega2: sp.omega2,
        varpi,
        expectation,
        ppt_flags,
        verdict,
        certificate,
        ratios_tried,
    })
}

/// Three-qubit states `ρ = (B σ_2 + 2D ψ)/(4B + 2D)` and
/// `ρ' = (B σ_3 + 2D ψ)/(4B + 2D)`.
pub fn three_qubit_sigma_states(b: f64, d: f64) -> Result<(Operator, Operator)> {
    if b < 0.0 || b + 2.0 * d < 0.0 || 4.0 * b + 2.0 * d <= 0.0 {
        return Err(Error::InvalidParams(format!(
            "need B >= 0, B + 2D >= 0 and 4B + 2D > 0 (B = {b}, D = {d})"
        )));
    }
    let shape = Shape::new(vec![2, 2, 2])?;
    let psi = Operator::projector(&modulated_bell(&shape, 0)?);
    let norm = 4.0 * b + 2.0 * d;
    let build = |s: &[usize]| -> Result<Operator> {
        let sub = crate::subset::Subset::from_members(s)?;
        Ok(crate::witness::sigma(&shape, sub)?
            .scale(b)
            .add_scaled(2.0 * d, &psi)?
            .scale(1.0 / norm))
    };
    Ok((build(&[2])?, build(&[3])?))
}

#[derive(Clone, Debug, PartialEq)]
pub struct SigmaStateReport {
    /// `ρ^{T_3} >= 0`.
    pub rho_pt3_psd: bool,
    /// `ρ'^{T_2} >= 0`.
    pub rho_prime_pt2_psd: bool,
    /// `B(a_23 + a_2) + D ω2`; negative means `ρ` is detected.
    pub detection_value: f64,
    /// `B(a_23 + a_3) + D ω2`; negative means `ρ'` is detected.
    pub detection_value_prime: f64,
    pub expectation: f64,
    pub expectation_prime: f64,
}

pub fn sigma_state_report(params: &WitnessParams, b: f64, d: f64) -> Result<SigmaStateReport> {
    if params.shape().dims().as_slice() != [2, 2, 2] {
        return Err(Error::InvalidDims(format!(
            "three-qubit witness required, got {}",
            params.shape().dims()
        )));
    }
    let (rho, rho_p) = three_qubit_sigma_states(b, d)?;
    let w = build_witness(params)?;
    let s2 = crate::subset::Subset::from_members(&[2])?;
    let s3 = crate::subset::Subset::from_members(&[3])?;
    let omega2 = to_f64(&spectrum(params).omega2);
    let a23 = to_f64(&params.a_full);
    Ok(SigmaStateReport {
        rho_pt3_psd: min_eigenvalue(&partial_transpose(&rho, &[3])?)? >= -PSD_TOL,
        rho_prime_pt2_psd: min_eigenvalue(&partial_transpose(&rho_p, &[2])?)? >= -PSD_TOL,
        detection_value: b * (a23 + to_f64(&params.a_of(s2))) + d * omega2,
        detection_value_prime: b * (a23 + to_f64(&params.a_of(s3))) + d * omega2,
        expectation: expectation_rho(&w, &rho)?,
        expectation_prime: expectation_rho(&w, &rho_p)?,
    })
}

/// Dense `Σ_j ψ_j` for cross-checking [`separable_part`].
pub fn bell_span_projector(shape: &Shape) -> Result<Operator> {
    let mut m = CMatrix::zeros(shape.total());
    for i in 0..shape.d1() {
        let v = modulated_bell(shape, i)?;
        m = &m + &CMatrix::outer(v.amplitudes(), v.amplitudes());
    }
    Operator::new(shape.dims().clone(), m)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::subset::Subset;
    use crate::tensor::{is_psd, Dims};

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn reduction3() -> WitnessParams {
        let mut p = WitnessParams::zeros(shape(&[2, 2, 2]));
        for v in p.a.values_mut() {
            *v = rat(1);
        }
        p
    }

    #[test]
    fn modulated_bell_family() {
        for d in [vec![2, 2, 2], vec![3, 3, 3], vec![2, 3, 4]] {
            let s = shape(&d);
            let states: Vec<StateVector> =
                (0..s.d1()).map(|i| modulated_bell(&s, i).unwrap()).collect();
            for (i, u) in states.iter().enumerate() {
                for (j, v) in states.iter().enumerate() {
                    let z = u.inner(v).unwrap();
                    let expect = if i == j { 1.0 } else { 0.0 };
                    assert!((z - c64(expect)).norm() < 1e-12);
                }
            }
            let pi = bell_span_projector(&s).unwrap();
            let diff = Operator::identity(s.dims()).sub(&pi).unwrap();
            assert!(diff.max_abs_diff(&separable_part(&s)).unwrap() < 1e-12);
        }
        let s = shape(&[2, 2, 2]);
        let v = modulated_bell(&s, 1).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        assert!((v.amplitudes()[0] - c64(h)).norm() < 1e-15);
        assert!((v.amplitudes()[7] - c64(-h)).norm() < 1e-15);
        assert!(modulated_bell(&s, 2).is_err());
    }

    #[test]
    fn bell_expectations_are_omegas() {
        let (e0, e1) = bell_expectations(&reduction3()).unwrap();
        assert!((e0 + 1.0).abs() < 1e-12 && (e1 - 1.0).abs() < 1e-12);
        let s = shape(&[3, 3, 3]);
        let mut p = WitnessParams::zeros(s);
        for (v, x) in p.a.values_mut().zip([1, 2, 3]) {
            *v = rat(x);
        }
        p.a_full = rat(-2);
        let sp = spectrum(&p);
        let all = bell_expectations_all(&p).unwrap();
        assert!((all[0] - to_f64(&sp.omega2)).abs() < 1e-10);
        for e in &all[1..] {
            assert!((e - to_f64(&sp.omega1)).abs() < 1e-10);
        }
    }

    #[test]
    fn detector_state_limits() {
        let s = shape(&[2, 2, 2]);
        let rho = detector_state(&s, BellFamilyParams { i: 1, b: 0.0, d: 1.0 }).unwrap();
        let psi = Operator::projector(&modulated_bell(&s, 1).unwrap());
        assert!(rho.max_abs_diff(&psi).unwrap() < 1e-15);
        let rho = detector_state(&s, BellFamilyParams { i: 0, b: 1.0, d: 0.0 }).unwrap();
        let expect = separable_part(&s).scale(1.0 / 6.0);
        assert!(rho.max_abs_diff(&expect).unwrap() < 1e-15);
        let rho = detector_state(&s, BellFamilyParams { i: 0, b: 1.0, d: 1.0 }).unwrap();
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
        assert!(is_psd(&rho, 1e-12).unwrap());
        assert!(detector_state(&s, BellFamilyParams { i: 0, b: -1.0, d: 1.0 }).is_err());
    }

    #[test]
    fn ppt_flags() {
        let s = shape(&[2, 2]);
        let psi = Operator::projector(&modulated_bell(&s, 0).unwrap());
        let flags = ppt_all(&psi).unwrap();
        assert_eq!(flags.len(), 2);
        assert!(flags.iter().all(|(_, f)| !f));
        let prod = Operator::basis_projector(&Dims::new(vec![2, 2, 2]).unwrap(), &[3]);
        assert!(ppt_all(&prod).unwrap().iter().all(|(_, f)| *f));
        for d in [vec![2, 2, 2], vec![2, 3, 4], vec![3, 3, 3]] {
            let rho =
                detector_state(&shape(&d), BellFamilyParams { i: 0, b: 2.0, d: 1.0 }).unwrap();
            assert!(ppt_all(&rho).unwrap().iter().all(|(_, f)| *f), "{d:?}");
        }
        // B < D breaks PPT.
        let rho = detector_state(&shape(&[2, 2, 2]), BellFamilyParams { i: 0, b: 0.5, d: 1.0 })
            .unwrap();
        assert!(ppt_all(&rho).unwrap().iter().any(|(_, f)| !f));
    }

    #[test]
    fn varpi_values() {
        // ρ_s covers six kets, each with eigenvalue 1, so ϖ = -6/2.
        let p = reduction3();
        assert_eq!(varpi_exact(&p), rat(-3));
        assert!((varpi(&p).unwrap() + 3.0).abs() < 1e-12);
        assert_eq!(varpi_exact(&WitnessParams::zeros(shape(&[2, 3, 4]))), rat(0));
        let twice = p.scaled(&rat(2));
        assert_eq!(varpi_exact(&twice), rat(-6));
    }

    #[test]
    fn verdicts() {
        let r = decomposability_verdict(&reduction3()).unwrap();
        // ω2 = -1 lies between ϖ = -3 and 0.
        assert_eq!(r.verdict, Verdict::Undetermined);
        assert!(r.certificate.is_none());
        let mut p = reduction3();
        p.a_full = rat(10);
        assert!(decomposability_verdict(&p).is_err());
    }

    #[test]
    fn sigma_states() {
        let p = reduction3();
        let r = sigma_state_report(&p, 1.0, 0.0).unwrap();
        assert!(r.expectation >= 0.0 && r.rho_pt3_psd);
        let r = sigma_state_report(&p, 1.0, 1.0).unwrap();
        assert_eq!(r.detection_value, 0.0);
        assert!(r.expectation.abs() < 1e-12);
        let mut q = WitnessParams::zeros(shape(&[2, 2, 2]));
        q.a.insert(Subset::from_members(&[2]).unwrap(), rat(1));
        q.a.insert(Subset::from_members(&[3]).unwrap(), rat(1));
        let r = sigma_state_report(&q, 1.0, 1.0).unwrap();
        assert!(r.detection_value < 0.0 && r.expectation < 0.0);
        assert!(three_qubit_sigma_states(-1.0, 1.0).is_err());
    }
}
