//! Cyclic Jacobi diagonalization of Hermitian matrices.
//!
//! A Hermitian `A = X + iY` is embedded as the real symmetric matrix
//! `[[X, -Y], [Y, X]]`, whose spectrum is that of `A` with every eigenvalue
//! doubled. Real Jacobi rotations are then applied until the off-diagonal
//! Frobenius norm falls below `1e-12 * ||A||_F`.

use num_complex::Complex64;

use super::matrix::CMatrix;

const MAX_SWEEPS: usize = 100;
const REL_TOL: f64 = 1e-12;

struct RealSym {
    n: usize,
    a: Vec<f64>,
}

impl RealSym {
    fn embed(m: &CMatrix) -> Self {
        let d = m.dim();
        let n = 2 * d;
        let mut a = vec![0.0; n * n];
        for r in 0..d {
            for c in 0..d {
                let z = m[(r, c)];
                a[r * n + c] = z.re;
                a[(r + d) * n + (c + d)] = z.re;
                a[r * n + (c + d)] = -z.im;
                a[(r + d) * n + c] = z.im;
            }
        }
        // Symmetrize to absorb sub-tolerance Hermiticity defects.
        for r in 0..n {
            for c in r + 1..n {
                let s = 0.5 * (a[r * n + c] + a[c * n + r]);
                a[r * n + c] = s;
                a[c * n + r] = s;
            }
        }
        RealSym { n, a }
    }

    fn off_norm(&self) -> f64 {
        let n = self.n;
        let mut s = 0.0;
        for r in 0..n {
            for c in 0..n {
                if r != c {
                    s += self.a[r * n + c] * self.a[r * n + c];
                }
            }
        }
        s.sqrt()
    }

    fn norm(&self) -> f64 {
        self.a.iter().map(|x| x * x).sum::<f64>().sqrt()
    }

    /// Diagonalizes in place; returns the accumulated rotation (columns are
    /// eigenvectors) if requested.
    fn diagonalize(&mut self, want_vectors: bool) -> Option<Vec<f64>> {
        let n = self.n;
        let mut v = want_vectors.then(|| {
            let mut v = vec![0.0; n * n];
            for i in 0..n {
                v[i * n + i] = 1.0;
            }
            v
        });
        let target = REL_TOL * self.norm();
        for _ in 0..MAX_SWEEPS {
            let off = self.off_norm();
            if off == 0.0 || off < target {
                break;
            }
            for p in 0..n {
                for q in p + 1..n {
                    let apq = self.a[p * n + q];
                    if apq == 0.0 {
                        continue;
                    }
                    let app = self.a[p * n + p];
                    let aqq = self.a[q * n + q];
                    let theta = (aqq - app) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    self.a[p * n + p] = app - t * apq;
                    self.a[q * n + q] = aqq + t * apq;
                    self.a[p * n + q] = 0.0;
                    self.a[q * n + p] = 0.0;
                    for r in 0..n {
                        if r == p || r == q {
                            continue;
                        }
                        let arp = self.a[r * n + p];
                        let arq = self.a[r * n + q];
                        let np = c * arp - s * arq;
                        let nq = s * arp + c * arq;
                        self.a[r * n + p] = np;
                        self.a[p * n + r] = np;
                        self.a[r * n + q] = nq;
                        self.a[q * n + r] = nq;
                    }
                    if let Some(v) = v.as_mut() {
                        for r in 0..n {
                            let vrp = v[r * n + p];
                            let vrq = v[r * n + q];
                            v[r * n + p] = c * vrp - s * vrq;
                            v[r * n + q] = s * vrp + c * vrq;
                        }
                    }
                }
            }
        }
        v
    }

    fn diag(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.a[i * self.n + i]).collect()
    }
}

/// Ascending eigenvalues of a Hermitian matrix. The caller is responsible
/// for checking Hermiticity.
pub fn eigenvalues(m: &CMatrix) -> Vec<f64> {
    let mut sym = RealSym::embed(m);
    sym.diagonalize(false);
    let mut doubled = sym.diag();
    doubled.sort_by(f64::total_cmp);
    // Eigenvalues of the embedding come in equal pairs.
    doubled.chunks(2).map(|p| 0.5 * (p[0] + p[1])).collect()
}

/// Smallest eigenvalue and a unit eigenvector for it.
pub fn min_eigenpair(m: &CMatrix) -> (f64, Vec<Complex64>) {
    let d = m.dim();
    let mut sym = RealSym::embed(m);
    let v = sym.diagonalize(true).expect("vectors requested");
    let diag = sym.diag();
    let n = sym.n;
    let (best, &lambda) = diag
        .iter()
        .enumerate()
        .min_by(|a, b| a.1.total_cmp(b.1))
        .expect("non-empty matrix");
    // Column `best` of V is (x, y) with x + iy an eigenvector of `m`.
    let mut vec: Vec<Complex64> = (0..d)
        .map(|i| Complex64::new(v[i * n + best], v[(i + d) * n + best]))
        .collect();
    let norm = vec.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    for z in &mut vec {
        *z /= norm;
    }
    (lambda, vec)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_input() {
        let m = CMatrix::from_real_diagonal(&[3.0, 1.0, 2.0]);
        assert_eq!(eigenvalues(&m), vec![1.0, 2.0, 3.0]);
    }

    #[test]
    fn complex_two_by_two() {
        // [[2, i], [-i, 2]] has eigenvalues 1 and 3.
        let m = CMatrix::from_fn(2, |r, c| match (r, c) {
            (0, 0) | (1, 1) => Complex64::new(2.0, 0.0),
            (0, 1) => Complex64::new(0.0, 1.0),
            _ => Complex64::new(0.0, -1.0),
        });
        let ev = eigenvalues(&m);
        assert!((ev[0] - 1.0).abs() < 1e-14 && (ev[1] - 3.0).abs() < 1e-14);
        let (l, v) = min_eigenpair(&m);
        assert!((l - 1.0).abs() < 1e-14);
        let mv = m.mul_vec(&v);
        for (a, b) in mv.iter().zip(&v) {
            assert!((a - b * l).norm() < 1e-13);
        }
    }

    #[test]
    fn zero_matrix() {
        assert_eq!(eigenvalues(&CMatrix::zeros(3)), vec![0.0; 3]);
    }
}
