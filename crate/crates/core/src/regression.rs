//! Worked-example fixtures and the regression runner behind `reproduce`.

use crate::bell_diagonal::{build_w1, w1_apexes, w1_optimal_certificate, W1Params};
use crate::choi::{apply_map, closed_form_map, factor_witness, tensor_witness, FactorParams};
use crate::error::Result;
use crate::exact::{rat, Rational};
use crate::oracle::{random_density, restart_rng};
use crate::region::enumerate_apexes;
use crate::subset::Subset;
use crate::tensor::{hermitian_eigenvalues, kron, partial_trace, Dims, Operator, Shape, StateVector};
use crate::witness::{optimal_pt_certificate, sigma_prime_support};

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Check {
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

impl Check {
    fn new(name: &str, passed: bool, detail: impl Into<String>) -> Self {
        Check {
            name: name.into(),
            passed,
            detail: detail.into(),
        }
    }
}

/// Three-qubit apex rows in `(P2, P3, P23)`.
pub const APEXES_222: [[i64; 3]; 4] = [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 1]];

/// `2 ⊗ 3 ⊗ 4` apex rows in `(P2, P3, P23, P'1, P'2, P'3)`.
pub const APEXES_234: [[i64; 6]; 7] = [
    [0, 0, 0, 0, 0, 0],
    [1, 0, 0, 0, 0, 0],
    [0, 1, 0, 0, 0, 0],
    [1, 1, 1, 0, 0, 0],
    [0, 0, 0, 1, 0, 0],
    [1, 0, 0, 0, 1, 0],
    [0, 1, 0, 0, 0, 1],
];

/// Supports of `σ'_1`, `σ'_2`, `σ'_3` on `2 ⊗ 3 ⊗ 4`.
pub const SIGMA_PRIME_234: [(&[usize], &[&str]); 3] = [
    (&[], &["012", "013", "021", "022", "023", "102", "103", "120", "122", "123"]),
    (&[2], &["002", "003", "112", "113"]),
    (&[3], &["020", "121"]),
];

/// Kets `(u, v)` of the rank-one certificates `(|u> + s|v>)(<u| + s<v|)`
/// for `S = {}, {2}, {3}` on three qubits, with the sign `s` each one
/// actually carries. A `+` on `S = {2}, {3}` would not match the partial
/// transpose.
pub type CertificateRow = (&'static [usize], [usize; 3], [usize; 3], f64);

pub const CERTIFICATES_222: [CertificateRow; 3] = [
    (&[], [1, 0, 0], [0, 1, 1], 1.0),
    (&[2], [0, 0, 1], [1, 1, 0], -1.0),
    (&[3], [0, 1, 0], [1, 0, 1], -1.0),
];

pub fn ket_string(shape: &Shape, index: usize) -> String {
    shape.dims().digits(index).iter().map(|d| d.to_string()).collect()
}

pub fn rank_one(dims: &Dims, u: &[usize], v: &[usize], sign: f64) -> Result<Operator> {
    let a = StateVector::basis(dims, u)?;
    let b = StateVector::basis(dims, v)?;
    let amps: Vec<_> = a
        .amplitudes()
        .iter()
        .zip(b.amplitudes())
        .map(|(x, y)| x + y * sign)
        .collect();
    Operator::outer(dims, &amps, &amps)
}

fn int_rows(rows: impl Iterator<Item = Vec<Rational>>) -> Vec<Vec<i64>> {
    rows.map(|r| {
        r.iter()
            .map(|q| if q.is_integer() { q.to_integer().try_into().unwrap_or(i64::MIN) } else { i64::MIN })
            .collect()
    })
    .collect()
}

fn apex_check(name: &str, dims: Vec<usize>, want: Vec<Vec<i64>>) -> Result<Check> {
    let shape = Shape::new(dims)?;
    let got = int_rows(enumerate_apexes(&shape).into_iter().map(|a| a.point));
    Ok(Check::new(name, got == want, format!("{got:?}")))
}

fn sigma_prime_check() -> Result<Check> {
    let shape = Shape::new(vec![2, 3, 4])?;
    let mut ok = true;
    let mut detail = Vec::new();
    for (members, want) in SIGMA_PRIME_234 {
        let s = Subset::from_members(members)?;
        let got: Vec<String> = sigma_prime_support(&shape, s)?
            .into_iter()
            .map(|i| ket_string(&shape, i))
            .collect();
        ok &= got == want;
        detail.push(format!("{}: {}", s.label(), got.join(" ")));
    }
    Ok(Check::new("sigma' supports 2x3x4", ok, detail.join("; ")))
}

fn certificate_check() -> Result<Check> {
    let shape = Shape::new(vec![2, 2, 2])?;
    let mut ok = true;
    for (members, u, v, sign) in CERTIFICATES_222 {
        let s = Subset::from_members(members)?;
        ok &= optimal_pt_certificate(&shape, s)? == rank_one(shape.dims(), &u, &v, sign)?;
    }
    Ok(Check::new(
        "optimal-witness PT certificates 2x2x2",
        ok,
        "S={2},{3} carry a relative minus sign",
    ))
}

fn reduction_map_check() -> Result<Check> {
    let f = FactorParams::reduction(2, 2);
    let spec = tensor_witness(&[factor_witness(&f)?, factor_witness(&f)?])?;
    let i2 = Operator::identity(&Dims::new(vec![2])?);
    let mut worst: f64 = 0.0;
    for k in 0..20 {
        let rho = random_density(spec.input(), &mut restart_rng(38, k))?;
        let want = Operator::identity(spec.input())
            .scale(rho.trace().re)
            .sub(&kron(&i2, &partial_trace(&rho, &[1])?))?
            .sub(&kron(&partial_trace(&rho, &[2])?, &i2))?
            .add(&rho)?;
        worst = worst.max(apply_map(&spec, &rho)?.max_abs_diff(&want)?);
        worst = worst.max(closed_form_map(&[f, f], &rho)?.max_abs_diff(&want)?);
    }
    Ok(Check::new(
        "two-party generalized reduction map",
        worst <= 1e-10,
        format!("max deviation {worst:e}"),
    ))
}

fn w1_check() -> Result<Check> {
    let mut ok = true;
    let mut detail = Vec::new();
    for n in [3, 4] {
        let c = w1_optimal_certificate(n)?;
        ok &= c.exact_match();
        // At n = 3 the σ block is empty and the second apex collapses.
        if n > 3 {
            let rows = int_rows(w1_apexes(n)?.into_iter());
            ok &= rows == [[0, 0, 0], [0, 0, 1], [1, 0, 0], [0, 1, 0]];
        }
        let p = W1Params {
            n,
            a: rat(3),
            b: rat(-1),
            c: rat(2),
            d: rat(5),
        };
        let ev = hermitian_eigenvalues(&build_w1(&p)?)?;
        let distinct = [-5.0, 1.0, 3.0, 5.0];
        let present: Vec<bool> = distinct
            .iter()
            .map(|x| ev.iter().any(|e| (e - x).abs() < 1e-10))
            .collect();
        let all_known = ev.iter().all(|e| distinct.iter().any(|x| (e - x).abs() < 1e-10));
        // d only shows up once σ is non-empty (n > 3).
        ok &= all_known && present[..3].iter().all(|&b| b) && (n == 3 || present[3]);
        detail.push(format!("n={n}: certificate exact {}", c.exact_match()));
    }
    Ok(Check::new("Bell-diagonal W1", ok, detail.join(", ")))
}

pub fn run_regressions() -> Result<Vec<Check>> {
    Ok(vec![
        apex_check(
            "apexes 2x2x2",
            vec![2, 2, 2],
            APEXES_222.iter().map(|r| r.to_vec()).collect(),
        )?,
        apex_check(
            "apexes 2x3x4",
            vec![2, 3, 4],
            APEXES_234.iter().map(|r| r.to_vec()).collect(),
        )?,
        sigma_prime_check()?,
        certificate_check()?,
        reduction_map_check()?,
        w1_check()?,
    ])
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_regressions_pass() {
        for c in run_regressions().unwrap() {
            assert!(c.passed, "{c:?}");
        }
    }
}
