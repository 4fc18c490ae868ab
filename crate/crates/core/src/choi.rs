//! Witness/map correspondence. A witness on the interleaved space
//! `d1 ⊗ d1' ⊗ d2 ⊗ d2' ⊗ ...` (odd factors = map input, even = output)
//! defines `E(ρ) = Tr_odd[W (ρ^T ⊗ I)]`, and `W = (Π d_i) (I ⊗ E)|ψ+><ψ+|`.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::oracle::{random_density, random_unit_vector, restart_rng};
use crate::tensor::{c64, min_eigenvalue, partial_trace, CMatrix, Dims, Operator, StateVector};

/// Scale in `W = PREFACTOR (I ⊗ E)ψ+`: the product of input dimensions only.
pub fn prefactor(input: &Dims) -> usize {
    input.total()
}

pub fn interleaved(input: &Dims, output: &Dims) -> Result<Dims> {
    if input.len() != output.len() {
        return Err(Error::InvalidDims(format!(
            "input {input} and output {output} have different party counts"
        )));
    }
    if let Some(k) = (0..input.len()).find(|&k| input.as_slice()[k] > output.as_slice()[k]) {
        return Err(Error::InvalidDims(format!(
            "input dimension exceeds output dimension at party {}",
            k + 1
        )));
    }
    let v = input
        .as_slice()
        .iter()
        .zip(output.as_slice())
        .flat_map(|(&a, &b)| [a, b])
        .collect();
    Dims::new(v)
}

#[derive(Clone, Debug, PartialEq)]
pub struct MapSpec {
    input: Dims,
    output: Dims,
    witness: Operator,
}

impl MapSpec {
    pub fn new(input: Dims, output: Dims, witness: Operator) -> Result<Self> {
        let dims = interleaved(&input, &output)?;
        if witness.dims() != &dims {
            return Err(Error::ShapeMismatch {
                expected: dims.to_string(),
                found: witness.dims().to_string(),
            });
        }
        let dev = witness.matrix().hermitian_deviation();
        if dev > crate::tensor::HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        Ok(MapSpec {
            input,
            output,
            witness,
        })
    }

    pub fn input(&self) -> &Dims {
        &self.input
    }

    pub fn output(&self) -> &Dims {
        &self.output
    }

    pub fn witness(&self) -> &Operator {
        &self.witness
    }

    pub fn apply(&self, x: &Operator) -> Result<Operator> {
        apply_map(self, x)
    }
}

/// Interleaved index of input digits `i` and output digits `o`.
fn joint_index(spec: &MapSpec, i: &[usize], o: &[usize]) -> usize {
    let mut idx = 0;
    for k in 0..i.len() {
        idx = idx * spec.input.dim(k + 1) + i[k];
        idx = idx * spec.output.dim(k + 1) + o[k];
    }
    idx
}

/// `|ψ+> = Σ_I |i1 i1 i2 i2 ...> / sqrt(Π d_i)` on the interleaved space.
pub fn witness_from_map_state(input: &Dims, output: &Dims) -> Result<StateVector> {
    let dims = interleaved(input, output)?;
    let mut amps = vec![c64(0.0); dims.total()];
    let norm = 1.0 / (input.total() as f64).sqrt();
    for m in 0..input.total() {
        let i = input.digits(m);
        let digits: Vec<usize> = i.iter().flat_map(|&x| [x, x]).collect();
        amps[dims.index(&digits)] = c64(norm);
    }
    StateVector::new(dims, amps)
}

/// `E(X)_{o,o'} = Σ_{i,i'} W_{(i,o),(i',o')} X_{i,i'}`, which is
/// `Tr_odd[W (X^T ⊗ I)]` written out. Linear, so `X` need not be Hermitian.
pub fn apply_map(spec: &MapSpec, x: &Operator) -> Result<Operator> {
    if x.dims() != &spec.input {
        return Err(Error::ShapeMismatch {
            expected: spec.input.to_string(),
            found: x.dims().to_string(),
        });
    }
    let (din, dout) = (spec.input.total(), spec.output.total());
    let ins: Vec<Vec<usize>> = (0..din).map(|m| spec.input.digits(m)).collect();
    let outs: Vec<Vec<usize>> = (0..dout).map(|m| spec.output.digits(m)).collect();
    let mut out = CMatrix::zeros(dout);
    for (a, i) in ins.iter().enumerate() {
        for (b, i2) in ins.iter().enumerate() {
            let xv = x.get(a, b);
            if xv == c64(0.0) {
                continue;
            }
            for (r, o) in outs.iter().enumerate() {
                let row = joint_index(spec, i, o);
                for (c, o2) in outs.iter().enumerate() {
                    out[(r, c)] += spec.witness.get(row, joint_index(spec, i2, o2)) * xv;
                }
            }
        }
    }
    Operator::new(spec.output.clone(), out)
}

/// `(Π d_i)(I ⊗ E)|ψ+><ψ+| = Σ_{I,J} |I><J| ⊗ E(|I><J|)`, interleaved.
pub fn map_to_witness(
    input: &Dims,
    output: &Dims,
    map: impl Fn(&Operator) -> Result<Operator>,
) -> Result<Operator> {
    let dims = interleaved(input, output)?;
    let (din, dout) = (input.total(), output.total());
    let mut w = CMatrix::zeros(dims.total());
    for a in 0..din {
        for b in 0..din {
            let mut e = CMatrix::zeros(din);
            e[(a, b)] = c64(1.0);
            let img = map(&Operator::new(input.clone(), e)?)?;
            if img.dims() != output {
                return Err(Error::ShapeMismatch {
                    expected: output.to_string(),
                    found: img.dims().to_string(),
                });
            }
            let (ia, ib) = (input.digits(a), input.digits(b));
            for r in 0..dout {
                for c in 0..dout {
                    let z = img.get(r, c);
                    if z == c64(0.0) {
                        continue;
                    }
                    let row = interleave(&ia, &output.digits(r));
                    let col = interleave(&ib, &output.digits(c));
                    w[(dims.index(&row), dims.index(&col))] = z;
                }
            }
        }
    }
    Operator::new(dims, w)
}

fn interleave(i: &[usize], o: &[usize]) -> Vec<usize> {
    i.iter().zip(o).flat_map(|(&a, &b)| [a, b]).collect()
}

/// Kronecker product of witnesses. Each factor's parties already sit in
/// consecutive (input, output) pairs, so the plain product stays interleaved.
pub fn tensor_witness(specs: &[MapSpec]) -> Result<MapSpec> {
    let (first, rest) = specs
        .split_first()
        .ok_or_else(|| Error::InvalidParams("no factors".into()))?;
    let mut acc = first.clone();
    for s in rest {
        acc = MapSpec {
            input: acc.input.concat(&s.input),
            output: acc.output.concat(&s.output),
            witness: acc.witness.kron(&s.witness),
        };
    }
    Ok(acc)
}

/// Two-party factor `a1 (I ⊗ P_low) + d(a2 - a1)|ψ00><ψ00| + a1' (I ⊗ P_high)`
/// on `d ⊗ d'`, where `P_low` projects on `|0>..|d-1>`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FactorParams {
    pub d: usize,
    pub d_out: usize,
    pub a1: f64,
    pub a2: f64,
    pub a1_prime: f64,
}

impl FactorParams {
    pub fn reduction(d: usize, d_out: usize) -> Self {
        FactorParams {
            d,
            d_out,
            a1: 1.0,
            a2: 0.0,
            a1_prime: 0.0,
        }
    }

    fn local(&self, k: usize) -> f64 {
        if k < self.d {
            self.a1
        } else {
            self.a1_prime
        }
    }
}

pub fn factor_witness(p: &FactorParams) -> Result<MapSpec> {
    let input = Dims::new(vec![p.d])?;
    let output = Dims::new(vec![p.d_out])?;
    let dims = interleaved(&input, &output)?;
    let g = p.a2 - p.a1;
    let w = CMatrix::from_fn(dims.total(), |r, c| {
        let (i, k) = (r / p.d_out, r % p.d_out);
        let (j, l) = (c / p.d_out, c % p.d_out);
        let mut z = 0.0;
        if r == c {
            z += p.local(k);
        }
        if i == k && j == l {
            z += g;
        }
        c64(z)
    });
    MapSpec::new(input, output, Operator::new(dims, w)?)
}

/// `Σ_S Γ_S O_S` with `Γ_S = Π_{j∉S}(a2 - a1)` and
/// `O_S = ⊗_{j∈S}(a1 I + a1' P_high) ⊗ Tr_S(ρ)`, the reduced state embedded
/// into the low block of each remaining output factor.
pub fn closed_form_map(factors: &[FactorParams], rho: &Operator) -> Result<Operator> {
    let n = factors.len();
    let input = Dims::new(factors.iter().map(|f| f.d).collect())?;
    let output = Dims::new(factors.iter().map(|f| f.d_out).collect())?;
    interleaved(&input, &output)?;
    if rho.dims() != &input {
        return Err(Error::ShapeMismatch {
            expected: input.to_string(),
            found: rho.dims().to_string(),
        });
    }
    let dout = output.total();
    let outs: Vec<Vec<usize>> = (0..dout).map(|m| output.digits(m)).collect();
    let mut acc = CMatrix::zeros(dout);
    for mask in 0..(1usize << n) {
        let in_s = |j: usize| mask >> j & 1 == 1;
        let gamma: f64 = (0..n)
            .filter(|&j| !in_s(j))
            .map(|j| factors[j].a2 - factors[j].a1)
            .product();
        if gamma == 0.0 {
            continue;
        }
        let traced: Vec<usize> = (0..n).filter(|&j| in_s(j)).map(|j| j + 1).collect();
        let kept: Vec<usize> = (0..n).filter(|&j| !in_s(j)).collect();
        let reduced: Option<Operator> = if kept.is_empty() {
            None
        } else {
            Some(partial_trace(rho, &traced)?)
        };
        let tr = rho.trace();
        for r in 0..dout {
            for c in 0..dout {
                let (o, o2) = (&outs[r], &outs[c]);
                let mut z = c64(gamma);
                for &j in &traced {
                    let j = j - 1;
                    if o[j] != o2[j] {
                        z = c64(0.0);
                        break;
                    }
                    z *= factors[j].local(o[j]);
                }
                if z == c64(0.0) {
                    continue;
                }
                let v = match &reduced {
                    None => tr,
                    Some(red) => {
                        if kept.iter().any(|&j| o[j] >= factors[j].d || o2[j] >= factors[j].d) {
                            continue;
                        }
                        let idx = |dg: &[usize]| kept.iter().fold(0, |a, &j| a * factors[j].d + dg[j]);
                        red.get(idx(o), idx(o2))
                    }
                };
                acc[(r, c)] += z * v;
            }
        }
    }
    Operator::new(output, acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct ReductionReport {
    pub factors: Vec<FactorParams>,
    pub samples: usize,
    pub max_deviation: f64,
    pub tol: f64,
}

impl ReductionReport {
    pub fn ok(&self) -> bool {
        self.max_deviation <= self.tol
    }
}

/// Applies the tensor-product witness's map to random states and compares
/// it with [`closed_form_map`].
pub fn generalized_reduction_check(
    factors: &[FactorParams],
    samples: usize,
    seed: u64,
) -> Result<ReductionReport> {
    let specs = factors.iter().map(factor_witness).collect::<Result<Vec<_>>>()?;
    let spec = tensor_witness(&specs)?;
    let mut max_deviation: f64 = 0.0;
    for k in 0..samples {
        let rho = random_density(spec.input(), &mut restart_rng(seed, k as u64))?;
        let a = apply_map(&spec, &rho)?;
        let b = closed_form_map(factors, &rho)?;
        max_deviation = max_deviation.max(a.max_abs_diff(&b)?);
    }
    Ok(ReductionReport {
        factors: factors.to_vec(),
        samples,
        max_deviation,
        tol: 1e-10,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct PositivityReport {
    pub samples: usize,
    pub violations: usize,
    pub min_eigenvalue: f64,
}

/// Pushes random pure states (even samples) and random mixed states (odd
/// samples) through the map and counts outputs with an eigenvalue below
/// `-1e-9`.
pub fn positivity_sample_check(spec: &MapSpec, samples: usize, seed: u64) -> Result<PositivityReport> {
    let mut violations = 0;
    let mut min_ev = f64::INFINITY;
    for k in 0..samples {
        let mut rng = restart_rng(seed, k as u64);
        let rho = if k % 2 == 0 {
            let v: Vec<Complex64> = random_unit_vector(spec.input().total(), &mut rng);
            Operator::projector(&StateVector::new(spec.input().clone(), v)?)
        } else {
            random_density(spec.input(), &mut rng)?
        };
        let out = apply_map(spec, &rho)?;
        // Hermitian up to round-off; symmetrize before the eigensolver.
        let m = out.matrix();
        let sym = CMatrix::from_fn(m.dim(), |r, c| (m[(r, c)] + m[(c, r)].conj()) * 0.5);
        let ev = min_eigenvalue(&Operator::new(out.dims().clone(), sym)?)?;
        min_ev = min_ev.min(ev);
        if ev < -1e-9 {
            violations += 1;
        }
    }
    Ok(PositivityReport {
        samples,
        violations,
        min_eigenvalue: min_ev,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::kron;

    fn dims(v: &[usize]) -> Dims {
        Dims::new(v.to_vec()).unwrap()
    }

    fn rho(d: &Dims, seed: u64) -> Operator {
        random_density(d, &mut restart_rng(seed, 0)).unwrap()
    }

    #[test]
    fn psi_plus() {
        let s = witness_from_map_state(&dims(&[2]), &dims(&[3])).unwrap();
        let h = std::f64::consts::FRAC_1_SQRT_2;
        for (k, z) in s.amplitudes().iter().enumerate() {
            let want = if k == 0 || k == 4 { h } else { 0.0 };
            assert!((z.re - want).abs() < 1e-15 && z.im == 0.0);
        }
        let s = witness_from_map_state(&dims(&[2, 2]), &dims(&[2, 2])).unwrap();
        assert_eq!(s.amplitudes().iter().filter(|z| (z.re - 0.5).abs() < 1e-15).count(), 4);
        assert!(witness_from_map_state(&dims(&[3]), &dims(&[2])).is_err());
    }

    #[test]
    fn identity_and_reduction() {
        let d = dims(&[3]);
        let psi = witness_from_map_state(&d, &d).unwrap();
        let w = Operator::projector(&psi).scale(3.0);
        let id = MapSpec::new(d.clone(), d.clone(), w).unwrap();
        let r = rho(&d, 1);
        assert!(apply_map(&id, &r).unwrap().max_abs_diff(&r).unwrap() < 1e-14);

        let red = factor_witness(&FactorParams::reduction(3, 3)).unwrap();
        let want = Operator::identity(&d).scale(r.trace().re).sub(&r).unwrap();
        assert!(apply_map(&red, &r).unwrap().max_abs_diff(&want).unwrap() < 1e-14);

        let q = dims(&[2]);
        let red2 = factor_witness(&FactorParams::reduction(2, 2)).unwrap();
        let zero = Operator::basis_projector(&q, &[0]);
        assert_eq!(apply_map(&red2, &zero).unwrap(), Operator::basis_projector(&q, &[1]));
        assert_eq!(apply_map(&red2, &Operator::zeros(&q)).unwrap(), Operator::zeros(&q));
    }

    #[test]
    fn round_trip() {
        let (i, o) = (dims(&[2]), dims(&[3]));
        let spec = MapSpec::new(i.clone(), o.clone(), rho(&interleaved(&i, &o).unwrap(), 7)).unwrap();
        let w = map_to_witness(&i, &o, |x| apply_map(&spec, x)).unwrap();
        assert!(w.max_abs_diff(spec.witness()).unwrap() < 1e-15);
        // The same identity through the maximally entangled state.
        let psi = Operator::projector(&witness_from_map_state(&i, &o).unwrap());
        assert_eq!(prefactor(&i), 2);
        assert!((psi.trace().re - 1.0).abs() < 1e-15);
    }

    #[test]
    fn tensor_products() {
        let f = FactorParams::reduction(2, 2);
        let two = tensor_witness(&[factor_witness(&f).unwrap(), factor_witness(&f).unwrap()]).unwrap();
        assert_eq!(two.witness().dim(), 16);
        let r = rho(&dims(&[2, 2]), 3);
        let got = apply_map(&two, &r).unwrap();
        let i2 = Operator::identity(&dims(&[2]));
        let want = Operator::identity(&dims(&[2, 2]))
            .scale(r.trace().re)
            .sub(&kron(&i2, &partial_trace(&r, &[1]).unwrap()))
            .unwrap()
            .sub(&kron(&partial_trace(&r, &[2]).unwrap(), &i2))
            .unwrap()
            .add(&r)
            .unwrap();
        assert!(got.max_abs_diff(&want).unwrap() < 1e-14);

        let one = factor_witness(&f).unwrap();
        assert_eq!(tensor_witness(std::slice::from_ref(&one)).unwrap(), one);

        // witness ⊗ identity: E ⊗ (ρ -> Tr(ρ) I).
        let idw = MapSpec::new(dims(&[2]), dims(&[3]), Operator::identity(&dims(&[2, 3]))).unwrap();
        let mixed = tensor_witness(&[one.clone(), idw]).unwrap();
        let a = rho(&dims(&[2]), 4);
        let b = rho(&dims(&[2]), 5);
        let got = apply_map(&mixed, &kron(&a, &b)).unwrap();
        let want = kron(&apply_map(&one, &a).unwrap(), &Operator::identity(&dims(&[3])));
        assert!(got.max_abs_diff(&want).unwrap() < 1e-14);
    }

    #[test]
    fn closed_form_agrees() {
        let cases = [
            vec![FactorParams::reduction(2, 2), FactorParams::reduction(2, 2)],
            vec![
                FactorParams { d: 2, d_out: 3, a1: 1.0, a2: 0.0, a1_prime: -1.0 },
                FactorParams { d: 2, d_out: 4, a1: 1.0, a2: 0.0, a1_prime: -1.0 },
            ],
            vec![
                FactorParams { d: 2, d_out: 2, a1: 0.7, a2: 1.9, a1_prime: 0.0 },
                FactorParams { d: 2, d_out: 3, a1: -0.4, a2: 0.3, a1_prime: 2.5 },
                FactorParams { d: 2, d_out: 2, a1: 1.1, a2: 1.1, a1_prime: 0.2 },
            ],
        ];
        for (k, f) in cases.iter().enumerate() {
            let rep = generalized_reduction_check(f, 5, k as u64).unwrap();
            assert!(rep.ok(), "{rep:?}");
        }
    }

    #[test]
    fn positivity() {
        let red = factor_witness(&FactorParams::reduction(3, 3)).unwrap();
        assert_eq!(positivity_sample_check(&red, 200, 1).unwrap().violations, 0);
        let bad = factor_witness(&FactorParams { d: 2, d_out: 2, a1: 1.0, a2: -1.0, a1_prime: 0.0 }).unwrap();
        assert!(positivity_sample_check(&bad, 50, 1).unwrap().violations > 0);
    }
}
