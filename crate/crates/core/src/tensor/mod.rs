//! Dense multipartite linear algebra: operators and state vectors tagged with
//! their tensor-factor dimensions, Kronecker products, partial transposes and
//! traces, and a Hermitian eigensolver.

mod dims;
pub mod eigen;
mod matrix;

use num_complex::Complex64;

pub use dims::{Dims, Shape};
pub use matrix::CMatrix;

use crate::error::{Error, Result};

/// Absolute tolerance for the Hermiticity checks.
pub const HERMITIAN_TOL: f64 = 1e-12;
/// Default tolerance for positive-semidefiniteness tests.
pub const PSD_TOL: f64 = 1e-9;
/// Tolerance on the norm of a state vector.
pub const NORM_TOL: f64 = 1e-12;

pub fn c64(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

/// A square operator on the space described by `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct Operator {
    dims: Dims,
    mat: CMatrix,
    hermitian: bool,
}

impl Operator {
    pub fn new(dims: Dims, mat: CMatrix) -> Result<Self> {
        if mat.dim() != dims.total() {
            return Err(Error::ShapeMismatch {
                expected: format!("{0}x{0} matrix for dims {dims}", dims.total()),
                found: format!("{0}x{0}", mat.dim()),
            });
        }
        let hermitian = mat.hermitian_deviation() <= HERMITIAN_TOL;
        Ok(Operator {
            dims,
            mat,
            hermitian,
        })
    }

    pub fn zeros(dims: &Dims) -> Self {
        Self::from_parts(dims.clone(), CMatrix::zeros(dims.total()))
    }

    pub fn identity(dims: &Dims) -> Self {
        Self::from_parts(dims.clone(), CMatrix::identity(dims.total()))
    }

    /// Diagonal 0/1 projector onto the listed computational basis indices.
    pub fn basis_projector(dims: &Dims, support: &[usize]) -> Self {
        let mut diag = vec![0.0; dims.total()];
        for &i in support {
            diag[i] = 1.0;
        }
        Self::from_parts(dims.clone(), CMatrix::from_real_diagonal(&diag))
    }

    /// `|psi><psi|`
    pub fn projector(state: &StateVector) -> Self {
        let m = CMatrix::outer(state.amplitudes(), state.amplitudes());
        Self::from_parts(state.dims().clone(), m)
    }

    /// `|u><v|` for two vectors on the same space (not necessarily normalized).
    pub fn outer(dims: &Dims, u: &[Complex64], v: &[Complex64]) -> Result<Self> {
        if u.len() != dims.total() || v.len() != dims.total() {
            return Err(Error::ShapeMismatch {
                expected: format!("vectors of length {}", dims.total()),
                found: format!("{} and {}", u.len(), v.len()),
            });
        }
        Ok(Self::from_parts(dims.clone(), CMatrix::outer(u, v)))
    }

    pub(crate) fn from_parts(dims: Dims, mat: CMatrix) -> Self {
        debug_assert_eq!(mat.dim(), dims.total());
        let hermitian = mat.hermitian_deviation() <= HERMITIAN_TOL;
        Operator {
            dims,
            mat,
            hermitian,
        }
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn dim(&self) -> usize {
        self.mat.dim()
    }

    /// Whether the entries are Hermitian within [`HERMITIAN_TOL`].
    pub fn is_hermitian(&self) -> bool {
        self.hermitian
    }

    pub fn trace(&self) -> Complex64 {
        self.mat.trace()
    }

    pub fn get(&self, r: usize, c: usize) -> Complex64 {
        self.mat[(r, c)]
    }

    pub fn scale(&self, s: f64) -> Operator {
        Self::from_parts(self.dims.clone(), self.mat.scale_real(s))
    }

    pub fn add(&self, other: &Operator) -> Result<Operator> {
        self.same_dims(other)?;
        Ok(Self::from_parts(self.dims.clone(), &self.mat + &other.mat))
    }

    pub fn sub(&self, other: &Operator) -> Result<Operator> {
        self.same_dims(other)?;
        Ok(Self::from_parts(self.dims.clone(), &self.mat - &other.mat))
    }

    /// `self + s * other`
    pub fn add_scaled(&self, s: f64, other: &Operator) -> Result<Operator> {
        self.same_dims(other)?;
        Ok(Self::from_parts(
            self.dims.clone(),
            &self.mat + &other.mat.scale_real(s),
        ))
    }

    pub fn mul(&self, other: &Operator) -> Result<Operator> {
        self.same_dims(other)?;
        Ok(Self::from_parts(self.dims.clone(), &self.mat * &other.mat))
    }

    pub fn kron(&self, other: &Operator) -> Operator {
        Self::from_parts(self.dims.concat(&other.dims), self.mat.kron(&other.mat))
    }

    pub fn max_abs_diff(&self, other: &Operator) -> Result<f64> {
        self.same_dims(other)?;
        Ok(self.mat.max_abs_diff(&other.mat))
    }

    fn same_dims(&self, other: &Operator) -> Result<()> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch {
                expected: self.dims.to_string(),
                found: other.dims.to_string(),
            });
        }
        Ok(())
    }

    fn require_hermitian(&self) -> Result<()> {
        if !self.hermitian {
            return Err(Error::NotHermitian(self.mat.hermitian_deviation()));
        }
        Ok(())
    }
}

/// A normalized pure state on the space described by `dims`.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    dims: Dims,
    amps: Vec<Complex64>,
}

impl StateVector {
    pub fn new(dims: Dims, amps: Vec<Complex64>) -> Result<Self> {
        if amps.len() != dims.total() {
            return Err(Error::ShapeMismatch {
                expected: format!("{} amplitudes for dims {dims}", dims.total()),
                found: amps.len().to_string(),
            });
        }
        let norm = norm(&amps);
        if (norm - 1.0).abs() > NORM_TOL {
            return Err(Error::NotNormalized(norm));
        }
        Ok(StateVector { dims, amps })
    }

    /// Normalizes `amps`; fails on the zero vector.
    pub fn normalized(dims: Dims, mut amps: Vec<Complex64>) -> Result<Self> {
        let n = norm(&amps);
        if n == 0.0 || !n.is_finite() {
            return Err(Error::NotNormalized(n));
        }
        for a in &mut amps {
            *a /= n;
        }
        Self::new(dims, amps)
    }

    /// Computational basis ket `|i1 i2 ... in>`.
    pub fn basis(dims: &Dims, digits: &[usize]) -> Result<Self> {
        if digits.len() != dims.len()
            || digits.iter().zip(dims.as_slice()).any(|(&i, &d)| i >= d)
        {
            return Err(Error::ShapeMismatch {
                expected: format!("digits within {dims}"),
                found: format!("{digits:?}"),
            });
        }
        let mut amps = vec![Complex64::new(0.0, 0.0); dims.total()];
        amps[dims.index(digits)] = c64(1.0);
        Ok(StateVector {
            dims: dims.clone(),
            amps,
        })
    }

    /// Tensor product of normalized local vectors.
    pub fn product(locals: &[Vec<Complex64>]) -> Result<Self> {
        let dims = Dims::new(locals.iter().map(Vec::len).collect())?;
        let mut amps = vec![c64(1.0)];
        for local in locals {
            amps = kron_vec(&amps, local);
        }
        Self::new(dims, amps)
    }

    pub fn dims(&self) -> &Dims {
        &self.dims
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amps
    }

    pub fn kron(&self, other: &StateVector) -> StateVector {
        StateVector {
            dims: self.dims.concat(&other.dims),
            amps: kron_vec(&self.amps, &other.amps),
        }
    }

    /// `<self|other>`
    pub fn inner(&self, other: &StateVector) -> Result<Complex64> {
        if self.dims != other.dims {
            return Err(Error::ShapeMismatch {
                expected: self.dims.to_string(),
                found: other.dims.to_string(),
            });
        }
        Ok(self
            .amps
            .iter()
            .zip(&other.amps)
            .map(|(a, b)| a.conj() * b)
            .sum())
    }
}

fn norm(v: &[Complex64]) -> f64 {
    v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

pub(crate) fn kron_vec(a: &[Complex64], b: &[Complex64]) -> Vec<Complex64> {
    let mut out = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            out.push(x * y);
        }
    }
    out
}

/// Values with a Kronecker product.
pub trait Kron {
    fn kron_with(&self, other: &Self) -> Self;
}

impl Kron for Operator {
    fn kron_with(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

impl Kron for StateVector {
    fn kron_with(&self, other: &Self) -> Self {
        self.kron(other)
    }
}

/// `a ⊗ b`, first factor most significant.
pub fn kron<T: Kron>(a: &T, b: &T) -> T {
    a.kron_with(b)
}

/// Transpose on the listed (1-based) tensor factors only.
pub fn partial_transpose(op: &Operator, particles: &[usize]) -> Result<Operator> {
    let dims = op.dims();
    let set = dims.check_particles(particles)?;
    if set.is_empty() {
        return Ok(op.clone());
    }
    let d = dims.total();
    let strides = dims.strides();
    let digits: Vec<Vec<usize>> = (0..d).map(|i| dims.digits(i)).collect();
    let mut out = CMatrix::zeros(d);
    for r in 0..d {
        for c in 0..d {
            let z = op.mat[(r, c)];
            if z.re == 0.0 && z.im == 0.0 {
                continue;
            }
            let (mut r2, mut c2) = (r, c);
            for &k in &set {
                let (ir, ic) = (digits[r][k - 1], digits[c][k - 1]);
                let s = strides[k - 1];
                r2 = r2 - ir * s + ic * s;
                c2 = c2 - ic * s + ir * s;
            }
            out[(r2, c2)] = z;
        }
    }
    Ok(Operator::from_parts(dims.clone(), out))
}

/// Trace out the listed (1-based) tensor factors. Tracing every factor is
/// rejected; use [`Operator::trace`] for that.
pub fn partial_trace(op: &Operator, particles: &[usize]) -> Result<Operator> {
    let dims = op.dims();
    let set = dims.check_particles(particles)?;
    if set.is_empty() {
        return Ok(op.clone());
    }
    let rest = dims.without(&set).ok_or_else(|| {
        Error::InvalidDims("partial trace over every subsystem leaves no factor".into())
    })?;
    let keep: Vec<usize> = (1..=dims.len()).filter(|k| !set.contains(k)).collect();
    let d = dims.total();
    let digits: Vec<Vec<usize>> = (0..d).map(|i| dims.digits(i)).collect();
    let reduced_index: Vec<usize> = digits
        .iter()
        .map(|dg| keep.iter().fold(0, |acc, &k| acc * dims.dim(k) + dg[k - 1]))
        .collect();
    let mut out = CMatrix::zeros(rest.total());
    for r in 0..d {
        for c in 0..d {
            if set.iter().all(|&k| digits[r][k - 1] == digits[c][k - 1]) {
                out[(reduced_index[r], reduced_index[c])] += op.mat[(r, c)];
            }
        }
    }
    Ok(Operator::from_parts(rest, out))
}

/// Ascending eigenvalues of a Hermitian operator.
pub fn hermitian_eigenvalues(op: &Operator) -> Result<Vec<f64>> {
    op.require_hermitian()?;
    Ok(eigen::eigenvalues(&op.mat))
}

pub fn min_eigenvalue(op: &Operator) -> Result<f64> {
    Ok(hermitian_eigenvalues(op)?[0])
}

/// True iff the smallest eigenvalue is at least `-tol`.
pub fn is_psd(op: &Operator, tol: f64) -> Result<bool> {
    Ok(min_eigenvalue(op)? >= -tol)
}

/// `<psi|op|psi>` (real part; exact for Hermitian `op`).
pub fn expectation(op: &Operator, state: &StateVector) -> Result<f64> {
    if op.dims() != state.dims() {
        return Err(Error::ShapeMismatch {
            expected: op.dims().to_string(),
            found: state.dims().to_string(),
        });
    }
    let v = op.mat.mul_vec(state.amplitudes());
    let z: Complex64 = state
        .amplitudes()
        .iter()
        .zip(&v)
        .map(|(a, b)| a.conj() * b)
        .sum();
    Ok(z.re)
}

/// `Tr(op rho)` for a unit-trace density operator `rho` (real part).
pub fn expectation_rho(op: &Operator, rho: &Operator) -> Result<f64> {
    op.same_dims(rho)?;
    let tr = rho.trace();
    if (tr.re - 1.0).abs() > 1e-9 || tr.im.abs() > 1e-9 {
        return Err(Error::InvalidParams(format!(
            "density operator must have unit trace, found {tr}"
        )));
    }
    Ok(trace_product(op, rho).re)
}

/// `Tr(a b)` without normalization requirements.
pub fn trace_product(a: &Operator, b: &Operator) -> Complex64 {
    let n = a.dim();
    let mut s = Complex64::new(0.0, 0.0);
    for r in 0..n {
        for c in 0..n {
            s += a.mat[(r, c)] * b.mat[(c, r)];
        }
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dims(v: &[usize]) -> Dims {
        Dims::new(v.to_vec()).unwrap()
    }

    fn bell2() -> StateVector {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        StateVector::new(dims(&[2, 2]), vec![c64(s), c64(0.0), c64(0.0), c64(s)]).unwrap()
    }

    #[test]
    fn kron_examples() {
        let i2 = Operator::identity(&dims(&[2]));
        assert_eq!(kron(&i2, &i2), Operator::identity(&dims(&[2, 2])));
        let k0 = StateVector::basis(&dims(&[2]), &[0]).unwrap();
        let k1 = StateVector::basis(&dims(&[2]), &[1]).unwrap();
        let v = kron(&k0, &k1);
        assert_eq!(v.amplitudes()[1], c64(1.0));
        let p = kron(&Operator::projector(&k0), &Operator::projector(&k1));
        assert_eq!(
            p.matrix().diagonal(),
            vec![c64(0.0), c64(1.0), c64(0.0), c64(0.0)]
        );
    }

    #[test]
    fn pt_of_bell_is_swap() {
        let p = Operator::projector(&bell2()).scale(2.0);
        let pt = partial_transpose(&p, &[2]).unwrap();
        let swap = CMatrix::from_fn(4, |r, c| {
            let (a, b) = (r / 2, r % 2);
            c64(if c == b * 2 + a { 1.0 } else { 0.0 })
        });
        assert!(pt.matrix().max_abs_diff(&swap) < 1e-15);
        let ev = hermitian_eigenvalues(&pt).unwrap();
        let expect = [-1.0, 1.0, 1.0, 1.0];
        for (a, b) in ev.iter().zip(expect) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(partial_transpose(&p, &[]).unwrap(), p);
        assert!(partial_transpose(&p, &[3]).is_err());
    }

    #[test]
    fn partial_trace_examples() {
        let i4 = Operator::identity(&dims(&[2, 2]));
        let r = partial_trace(&i4, &[1]).unwrap();
        assert_eq!(r, Operator::identity(&dims(&[2])).scale(2.0));
        let p = Operator::projector(&bell2()).scale(2.0);
        let r = partial_trace(&p, &[1]).unwrap();
        assert!(r.max_abs_diff(&Operator::identity(&dims(&[2]))).unwrap() < 1e-15);
        assert_eq!(partial_trace(&p, &[]).unwrap(), p);
        assert!(partial_trace(&p, &[1, 2]).is_err());
    }

    #[test]
    fn eigen_and_psd() {
        let d = dims(&[2, 2, 2]);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let mut amps = vec![c64(0.0); 8];
        amps[0] = c64(s);
        amps[7] = c64(s);
        let ghz = StateVector::new(d.clone(), amps).unwrap();
        let w = Operator::identity(&d)
            .add_scaled(-2.0, &Operator::projector(&ghz))
            .unwrap();
        let ev = hermitian_eigenvalues(&w).unwrap();
        assert!((ev[0] + 1.0).abs() < 1e-12);
        assert!(ev[1..].iter().all(|x| (x - 1.0).abs() < 1e-12));
        assert!(!is_psd(&w, PSD_TOL).unwrap());
        assert!(is_psd(&Operator::identity(&d), PSD_TOL).unwrap());
        assert!(is_psd(&Operator::zeros(&d), PSD_TOL).unwrap());
        assert!((expectation(&w, &ghz).unwrap() + 1.0).abs() < 1e-12);

        let x = CMatrix::from_fn(2, |r, c| c64(if r != c { 1.0 } else { 0.0 }));
        let xi = Operator::new(dims(&[2]), x)
            .unwrap()
            .kron(&Operator::identity(&dims(&[2])));
        let ev = hermitian_eigenvalues(&xi).unwrap();
        for (a, b) in ev.iter().zip([-1.0, -1.0, 1.0, 1.0]) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_fn(2, |r, c| c64((r * 2 + c) as f64));
        let op = Operator::new(dims(&[2]), m).unwrap();
        assert!(matches!(hermitian_eigenvalues(&op), Err(Error::NotHermitian(_))));
        assert!(is_psd(&op, PSD_TOL).is_err());
    }

    #[test]
    fn expectation_examples() {
        let d = dims(&[2]);
        let k0 = StateVector::basis(&d, &[0]).unwrap();
        let k1 = StateVector::basis(&d, &[1]).unwrap();
        assert_eq!(expectation(&Operator::projector(&k0), &k1).unwrap(), 0.0);
        let rho = Operator::identity(&d).scale(0.5);
        assert_eq!(expectation_rho(&Operator::identity(&d), &rho).unwrap(), 1.0);
        assert!(expectation_rho(&Operator::identity(&d), &Operator::identity(&d)).is_err());
        assert!(expectation(&Operator::identity(&dims(&[3])), &k0).is_err());
    }
}
