//! Multi-qubit Bell-diagonal witnesses: `W1`, whose validity is an exact
//! LP over a tetrahedron, and `W2`, whose curved constraints are only
//! sampled.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exact::{from_f64, rat, to_f64, Rational};
use crate::lp::{solve, LpProblem, LpSolution};
use crate::oracle::{random_product_state, restart_rng};
use crate::region::HalfSpace;
use crate::tensor::{c64, expectation, CMatrix, partial_transpose, Dims, Operator, Shape, StateVector};

/// Bit string `i1 i2 ... in` labelling
/// `(σ_z)^{i1} ⊗ (σ_x)^{i2} ⊗ ... ⊗ (σ_x)^{in} |ψ_{00...0}>`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BellLabel(Vec<u8>);

impl BellLabel {
    pub fn new(bits: Vec<u8>) -> Result<Self> {
        if bits.len() < 2 || bits.iter().any(|&b| b > 1) {
            return Err(Error::parse("label", "need at least two bits, each 0 or 1"));
        }
        Ok(BellLabel(bits))
    }

    pub fn bits(&self) -> &[u8] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }
}

impl FromStr for BellLabel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let bits = s
            .chars()
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(Error::parse("label", format!("`{c}` is not a bit"))),
            })
            .collect::<Result<Vec<u8>>>()?;
        BellLabel::new(bits)
    }
}

impl fmt::Display for BellLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for b in &self.0 {
            write!(f, "{b}")?;
        }
        Ok(())
    }
}

fn qubits(n: usize) -> Result<Dims> {
    Dims::new(vec![2; n])
}

pub fn bell_state(n: usize, label: &BellLabel) -> Result<StateVector> {
    if label.len() != n {
        return Err(Error::InvalidParams(format!(
            "label {label} has {} bits for {n} qubits",
            label.len()
        )));
    }
    let dims = qubits(n)?;
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut amps = vec![c64(0.0); dims.total()];
    for x in 0..2usize {
        let digits: Vec<usize> = (0..n)
            .map(|k| if k == 0 { x } else { x ^ label.bits()[k] as usize })
            .collect();
        let sign = if x == 1 && label.bits()[0] == 1 { -1.0 } else { 1.0 };
        amps[dims.index(&digits)] = c64(sign * h);
    }
    StateVector::new(dims, amps)
}

fn label(s: String) -> BellLabel {
    s.parse().expect("generated label")
}

fn ones(k: usize) -> String {
    "1".repeat(k)
}

fn zeros(k: usize) -> String {
    "0".repeat(k)
}

/// The eight labels removed from the identity to form `σ`, grouped in
/// pairs: `(011..110, 11..10)`, `(011..1, 11..11)`, `(00..0, 10..0)`,
/// `(00..01, 10..01)`.
pub fn sigma_labels(n: usize) -> Vec<BellLabel> {
    vec![
        label(format!("0{}0", ones(n - 2))),
        label(format!("{}0", ones(n - 1))),
        label(format!("0{}", ones(n - 1))),
        label(ones(n)),
        label(zeros(n)),
        label(format!("1{}", zeros(n - 1))),
        label(format!("{}1", zeros(n - 1))),
        label(format!("1{}1", zeros(n - 2))),
    ]
}

/// Built from the two kets directly so every entry is exactly 0 or ±1/2.
fn bell_projector(n: usize, l: &BellLabel) -> Result<Operator> {
    if l.len() != n {
        return Err(Error::InvalidParams(format!("label {l} has {} bits for {n} qubits", l.len())));
    }
    let dims = qubits(n)?;
    let ket = |x: usize| -> usize {
        let digits: Vec<usize> = (0..n)
            .map(|k| if k == 0 { x } else { x ^ l.bits()[k] as usize })
            .collect();
        dims.index(&digits)
    };
    let (u, v) = (ket(0), ket(1));
    let s = if l.bits()[0] == 1 { -0.5 } else { 0.5 };
    let mat = CMatrix::from_fn(dims.total(), |r, c| match (r, c) {
        _ if (r == u || r == v) && r == c => c64(0.5),
        _ if (r, c) == (u, v) || (r, c) == (v, u) => c64(s),
        _ => c64(0.0),
    });
    Operator::new(dims, mat)
}

/// `σ = I - Σ` over [`sigma_labels`]. Repeated labels (small `n`) are
/// counted once, as the set notation intends.
pub fn w1_sigma(n: usize) -> Result<Operator> {
    check_n(n)?;
    let mut labels = sigma_labels(n);
    labels.sort_by(|a, b| a.0.cmp(&b.0));
    labels.dedup();
    let mut acc = Operator::identity(&qubits(n)?);
    for l in &labels {
        acc = acc.sub(&bell_projector(n, l)?)?;
    }
    Ok(acc)
}

#[derive(Clone, Debug, PartialEq)]
pub struct W1Params {
    pub n: usize,
    pub a: Rational,
    pub b: Rational,
    pub c: Rational,
    pub d: Rational,
}

fn check_n(n: usize) -> Result<()> {
    if n < 3 {
        return Err(Error::InvalidDims(format!("W1 needs at least three qubits, got {n}")));
    }
    Ok(())
}

impl W1Params {
    fn check(&self) -> Result<()> {
        check_n(self.n)
    }
}

fn psi0(n: usize) -> BellLabel {
    label(zeros(n))
}

fn psi01(n: usize) -> BellLabel {
    label(format!("{}1", zeros(n - 1)))
}

/// `a I + 2(b-a) ψ_{0..0} + 2(c-a) ψ_{0..01} + (d-a) σ`.
pub fn build_w1(p: &W1Params) -> Result<Operator> {
    p.check()?;
    let n = p.n;
    let f = |q: Rational| to_f64(&q);
    Operator::identity(&qubits(n)?)
        .scale(f(p.a.clone()))
        .add_scaled(f(rat(2) * (&p.b - &p.a)), &bell_projector(n, &psi0(n))?)?
        .add_scaled(f(rat(2) * (&p.c - &p.a)), &bell_projector(n, &psi01(n))?)?
        .add_scaled(f(&p.d - &p.a), &w1_sigma(n)?)
}

/// `(P_{0..0}, P_{0..01}, P)` with `P_x = 2|<ψ_x|γ>|²` and `P = <γ|σ|γ>`.
pub fn w1_coordinates(n: usize, locals: &[Vec<Complex64>]) -> Result<[f64; 3]> {
    check_n(n)?;
    let g = StateVector::product(locals)?;
    if g.dims() != &qubits(n)? {
        return Err(Error::ShapeMismatch {
            expected: qubits(n)?.to_string(),
            found: g.dims().to_string(),
        });
    }
    let p0 = 2.0 * expectation(&bell_projector(n, &psi0(n))?, &g)?;
    let p1 = 2.0 * expectation(&bell_projector(n, &psi01(n))?, &g)?;
    let p = expectation(&w1_sigma(n)?, &g)?;
    Ok([p0, p1, p])
}

/// Generating kets of the four apexes.
pub fn w1_apex_generators(n: usize) -> Vec<Vec<usize>> {
    let mut a = vec![1; n];
    a[0] = 0;
    let mut b = vec![0; n];
    b[1] = 1;
    let c = vec![0; n];
    let mut d = vec![0; n];
    d[n - 1] = 1;
    vec![a, b, c, d]
}

fn basis_locals(digits: &[usize]) -> Vec<Vec<Complex64>> {
    digits
        .iter()
        .map(|&i| {
            let mut v = vec![c64(0.0); 2];
            v[i] = c64(1.0);
            v
        })
        .collect()
}

/// Apex coordinates evaluated from the generators. Basis kets give exact
/// 0/1 values in floating point, which are converted exactly.
pub fn w1_apexes(n: usize) -> Result<Vec<Vec<Rational>>> {
    check_n(n)?;
    w1_apex_generators(n)
        .iter()
        .map(|g| {
            let c = w1_coordinates(n, &basis_locals(g))?;
            c.iter()
                .map(|&x| from_f64(x).ok_or_else(|| Error::InvalidParams("non-finite".into())))
                .collect()
        })
        .collect()
}

pub fn w1_lp_problem(p: &W1Params) -> Result<LpProblem> {
    p.check()?;
    let h = |coeffs: [i64; 3], offset: i64, label: &str| HalfSpace {
        coeffs: coeffs.iter().map(|&c| rat(c)).collect(),
        offset: rat(offset),
        label: label.into(),
    };
    Ok(LpProblem {
        names: vec!["P0..0".into(), "P0..01".into(), "P".into()],
        objective: vec![&p.b - &p.a, &p.c - &p.a, &p.d - &p.a],
        constant: p.a.clone(),
        halfspaces: vec![
            h([-1, -1, -1], 1, "1 - P0..0 - P0..01 - P >= 0"),
            h([1, 0, 0], 0, "P0..0 >= 0"),
            h([0, 1, 0], 0, "P0..01 >= 0"),
            h([0, 0, 1], 0, "P >= 0"),
        ],
        apexes: Some(w1_apexes(p.n)?),
    })
}

pub fn w1_lp(p: &W1Params) -> Result<LpSolution> {
    solve(&w1_lp_problem(p)?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct W1Certificate {
    /// `I - 2ψ_{0..0} - 2ψ_{0..01} - σ`.
    pub witness: Operator,
    /// Its partial transpose on particle 1.
    pub partial_transpose: Operator,
    /// `2(ψ_{1..10} + ψ_{1..11})`.
    pub expected: Operator,
}

impl W1Certificate {
    pub fn exact_match(&self) -> bool {
        self.partial_transpose == self.expected
    }
}

pub fn w1_optimal_certificate(n: usize) -> Result<W1Certificate> {
    check_n(n)?;
    let witness = build_w1(&W1Params {
        n,
        a: rat(1),
        b: rat(0),
        c: rat(0),
        d: rat(0),
    })?;
    let pt = partial_transpose(&witness, &[1])?;
    let expected = bell_projector(n, &label(format!("{}0", ones(n - 1))))?
        .add(&bell_projector(n, &label(ones(n)))?)?
        .scale(2.0);
    Ok(W1Certificate {
        witness,
        partial_transpose: pt,
        expected,
    })
}

/// `a I + 2^{n-1}(b-a) ψ_{0..0} + 2^{n-1}(c-a) ψ_{10..0}`.
pub fn build_w2(n: usize, a: f64, b: f64, c: f64) -> Result<Operator> {
    if n < 2 {
        return Err(Error::InvalidDims(format!("need n >= 2, got {n}")));
    }
    let k = 2f64.powi(n as i32 - 1);
    Operator::identity(&qubits(n)?)
        .scale(a)
        .add_scaled(k * (b - a), &bell_projector(n, &psi0(n))?)?
        .add_scaled(k * (c - a), &bell_projector(n, &label(format!("1{}", zeros(n - 1))))?)
}

#[derive(Clone, Debug, PartialEq)]
pub struct W2Report {
    pub n: usize,
    pub samples: usize,
    pub violations: usize,
    /// Smallest slack of the two curved constraints.
    pub min_slack: [f64; 2],
}

/// Slacks of `1/2^{n-2} - P_{0..0} + (1 - 1/2^{n-2}) P_{10..0} >= 0` and
/// its mirror.
pub fn w2_slacks(n: usize, p00: f64, p10: f64) -> [f64; 2] {
    let q = 1.0 / 2f64.powi(n as i32 - 2);
    [q - p00 + (1.0 - q) * p10, q - p10 + (1.0 - q) * p00]
}

pub fn w2_coordinates(n: usize, locals: &[Vec<Complex64>]) -> Result<(f64, f64)> {
    let g = StateVector::product(locals)?;
    let p00 = 2.0 * expectation(&bell_projector(n, &psi0(n))?, &g)?;
    let p10 = 2.0 * expectation(&bell_projector(n, &label(format!("1{}", zeros(n - 1))))?, &g)?;
    Ok((p00, p10))
}

pub fn w2_constraint_check(n: usize, samples: usize, seed: u64) -> Result<W2Report> {
    if n < 2 {
        return Err(Error::InvalidDims(format!("need n >= 2, got {n}")));
    }
    let shape = Shape::new(vec![2; n])?;
    let mut min_slack = [f64::INFINITY; 2];
    let mut violations = 0;
    for k in 0..samples {
        let locals = random_product_state(&shape, &mut restart_rng(seed, k as u64));
        let (p00, p10) = w2_coordinates(n, &locals)?;
        let s = w2_slacks(n, p00, p10);
        for i in 0..2 {
            min_slack[i] = min_slack[i].min(s[i]);
        }
        if s.iter().any(|&x| x < -1e-9) {
            violations += 1;
        }
    }
    Ok(W2Report {
        n,
        samples,
        violations,
        min_slack,
    })
}
