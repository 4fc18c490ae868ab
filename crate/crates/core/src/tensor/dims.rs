use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Local dimensions of a multipartite Hilbert space, first factor most
/// significant in the computational basis.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Dims(Vec<usize>);

impl Dims {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::InvalidDims("no subsystems".into()));
        }
        if let Some(d) = dims.iter().find(|&&d| d < 2) {
            return Err(Error::InvalidDims(format!(
                "local dimension {d} is below 2 in {dims:?}"
            )));
        }
        Ok(Dims(dims))
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    /// Number of subsystems.
    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Local dimension of particle `k` (1-based).
    pub fn dim(&self, k: usize) -> usize {
        self.0[k - 1]
    }

    /// Total Hilbert-space dimension.
    pub fn total(&self) -> usize {
        self.0.iter().product()
    }

    pub fn concat(&self, other: &Dims) -> Dims {
        let mut v = self.0.clone();
        v.extend_from_slice(&other.0);
        Dims(v)
    }

    /// Row-major strides per factor.
    pub fn strides(&self) -> Vec<usize> {
        let mut strides = vec![1; self.0.len()];
        for k in (0..self.0.len().saturating_sub(1)).rev() {
            strides[k] = strides[k + 1] * self.0[k + 1];
        }
        strides
    }

    /// Decompose a flat basis index into per-factor digits.
    pub fn digits(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.0.len()];
        for k in (0..self.0.len()).rev() {
            out[k] = index % self.0[k];
            index /= self.0[k];
        }
        out
    }

    pub fn index(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.0)
            .fold(0, |acc, (&i, &d)| acc * d + i)
    }

    /// Validate a 1-based particle set and return it sorted, deduplicated.
    pub fn check_particles(&self, particles: &[usize]) -> Result<Vec<usize>> {
        let n = self.len();
        let mut v: Vec<usize> = particles.to_vec();
        v.sort_unstable();
        v.dedup();
        if let Some(&bad) = v.iter().find(|&&k| k == 0 || k > n) {
            return Err(Error::ParticleOutOfRange { index: bad, n });
        }
        Ok(v)
    }

    /// Dimensions with the listed (1-based) particles removed. `None` if
    /// nothing would remain.
    pub fn without(&self, particles: &[usize]) -> Option<Dims> {
        let rest: Vec<usize> = (1..=self.len())
            .filter(|k| !particles.contains(k))
            .map(|k| self.dim(k))
            .collect();
        if rest.is_empty() {
            None
        } else {
            Some(Dims(rest))
        }
    }
}

impl TryFrom<Vec<usize>> for Dims {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Dims::new(v)
    }
}

impl From<Dims> for Vec<usize> {
    fn from(d: Dims) -> Self {
        d.0
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.0.iter().map(|d| d.to_string()).collect();
        write!(f, "{}", parts.join("x"))
    }
}

/// Particle dimensions of a reduction-type witness, ordered so that
/// `d1 <= d2 <= ... <= dn`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<usize>", into = "Vec<usize>")]
pub struct Shape(Dims);

impl Shape {
    pub fn new(dims: Vec<usize>) -> Result<Self> {
        let dims = Dims::new(dims)?;
        if dims.as_slice().windows(2).any(|w| w[0] > w[1]) {
            return Err(Error::InvalidDims(format!(
                "dimensions must be non-decreasing, got {:?}",
                dims.as_slice()
            )));
        }
        Ok(Shape(dims))
    }

    pub fn dims(&self) -> &Dims {
        &self.0
    }

    /// Particle count.
    pub fn n(&self) -> usize {
        self.0.len()
    }

    /// Smallest local dimension.
    pub fn d1(&self) -> usize {
        self.0.dim(1)
    }

    pub fn total(&self) -> usize {
        self.0.total()
    }

    pub fn is_multi_qubit(&self) -> bool {
        self.0.as_slice().iter().all(|&d| d == 2)
    }
}

impl TryFrom<Vec<usize>> for Shape {
    type Error = Error;

    fn try_from(v: Vec<usize>) -> Result<Self> {
        Shape::new(v)
    }
}

impl From<Shape> for Vec<usize> {
    fn from(s: Shape) -> Self {
        s.0.into()
    }
}

impl fmt::Display for Shape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}
