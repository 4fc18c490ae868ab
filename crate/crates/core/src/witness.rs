//! The reduction-type witness family
//!
//! ```text
//! W = Σ_{S ⊊ N'} b_S σ_S + d1 b_{N'} |ψ><ψ| + Σ_S a'_S σ'_S
//! ```
//!
//! with `σ_S`, `σ'_S` diagonal 0/1 projectors and `|ψ>` the maximally
//! entangled state on the first `d1` levels of every particle. Parameters are
//! stored in the `a` form (`a_S = Σ_{S' ⊆ S} b_{S'}`) as exact rationals.

use std::collections::BTreeMap;

use num_traits::{Signed, Zero};
use rand::Rng;

use crate::error::{Error, Result};
use crate::exact::{rat, to_f64, Rational};
use crate::subset::Subset;
use crate::tensor::{c64, partial_transpose, CMatrix, Operator, Shape, StateVector};

fn sign(exp: usize) -> Rational {
    if exp.is_multiple_of(2) {
        rat(1)
    } else {
        rat(-1)
    }
}

/// `i_k == i_1` for every `k ∈ s`.
fn matches_first(digits: &[usize], s: Subset) -> bool {
    s.members().iter().all(|&k| digits[k - 1] == digits[0])
}

/// Set of `k ∈ N'` whose index equals the first particle's.
pub fn agreement_set(digits: &[usize]) -> Subset {
    let mut bits = 0u64;
    for (k, &i) in digits.iter().enumerate().skip(1) {
        if i == digits[0] {
            bits |= 1 << (k + 1);
        }
    }
    Subset::from_members(
        &(2..=digits.len())
            .filter(|k| bits & (1 << k) != 0)
            .collect::<Vec<_>>(),
    )
    .expect("labels in range")
}

/// Basis indices in the support of `σ_S`.
pub fn sigma_support(shape: &Shape, s: Subset) -> Result<Vec<usize>> {
    s.check_within(shape.n())?;
    let dims = shape.dims();
    Ok((0..dims.total())
        .filter(|&i| matches_first(&dims.digits(i), s))
        .collect())
}

/// `σ_S = Σ_{i<d1} |i><i| ⊗ O_i^(2) ⊗ ... ⊗ O_i^(n)`, with `O_i^(k) = |i><i|`
/// for `k ∈ S` and the identity otherwise. `S = N'` is allowed.
pub fn sigma(shape: &Shape, s: Subset) -> Result<Operator> {
    let support = sigma_support(shape, s)?;
    Ok(Operator::basis_projector(shape.dims(), &support))
}

/// Membership of a basis ket in the support of `σ'_S`.
///
/// The "low block" condition (every `i_2..i_n <= d1 - 1`) is evaluated on
/// the whole ket. Inside the low block the free indices must be pairwise
/// distinct and differ from `i_1`, and only `|S| <= n - 3` contributes;
/// outside it every free index must differ from `i_1`.
pub fn in_sigma_prime(shape: &Shape, s: Subset, digits: &[usize]) -> bool {
    let n = shape.n();
    let d1 = shape.d1();
    if !matches_first(digits, s) {
        return false;
    }
    let free: Vec<usize> = (2..=n).filter(|&k| !s.contains(k)).collect();
    if free.is_empty() {
        return false;
    }
    let low = digits[1..].iter().all(|&i| i < d1);
    if low {
        if s.len() + 3 > n {
            return false;
        }
        let vals: Vec<usize> = free.iter().map(|&k| digits[k - 1]).collect();
        if vals.contains(&digits[0]) {
            return false;
        }
        let mut sorted = vals.clone();
        sorted.sort_unstable();
        sorted.dedup();
        sorted.len() == vals.len()
    } else {
        free.iter().all(|&k| digits[k - 1] != digits[0])
    }
}

/// Basis indices in the support of `σ'_S` (possibly empty).
pub fn sigma_prime_support(shape: &Shape, s: Subset) -> Result<Vec<usize>> {
    s.check_within(shape.n())?;
    if s == Subset::full(shape.n()) {
        return Err(Error::InvalidSubset {
            subset: s.to_string(),
            reason: "σ' is not defined for the full set N'".into(),
        });
    }
    let dims = shape.dims();
    Ok((0..dims.total())
        .filter(|&i| in_sigma_prime(shape, s, &dims.digits(i)))
        .collect())
}

/// `σ'_S`, or `None` when its support is empty.
pub fn sigma_prime(shape: &Shape, s: Subset) -> Result<Option<Operator>> {
    let support = sigma_prime_support(shape, s)?;
    Ok((!support.is_empty()).then(|| Operator::basis_projector(shape.dims(), &support)))
}

/// Subsets `S ⊊ N'` for which `σ'_S` is non-zero, ascending.
pub fn admissible_prime_subsets(shape: &Shape) -> Vec<Subset> {
    Subset::proper_subsets(shape.n())
        .into_iter()
        .filter(|&s| {
            sigma_prime_support(shape, s)
                .map(|v| !v.is_empty())
                .unwrap_or(false)
        })
        .collect()
}

/// `(1/√d1) Σ_{i<d1} |i i ... i>`
pub fn max_entangled(shape: &Shape) -> StateVector {
    let dims = shape.dims();
    let d1 = shape.d1();
    let amp = c64(1.0 / (d1 as f64).sqrt());
    let mut amps = vec![c64(0.0); dims.total()];
    for i in 0..d1 {
        amps[dims.index(&vec![i; shape.n()])] = amp;
    }
    StateVector::normalized(dims.clone(), amps).expect("non-zero vector")
}

/// `c |ψ><ψ|` with entries `c / d1` evaluated exactly before rounding, so
/// integer-valued witnesses come out bit-exact.
fn ghz_block(shape: &Shape, c: &Rational) -> Operator {
    let dims = shape.dims();
    let d1 = shape.d1();
    let v = c64(to_f64(&(c / rat(d1 as i64))));
    let idx: Vec<usize> = (0..d1).map(|i| dims.index(&vec![i; shape.n()])).collect();
    let mut m = CMatrix::zeros(dims.total());
    for &r in &idx {
        for &col in &idx {
            m[(r, col)] = v;
        }
    }
    Operator::new(dims.clone(), m).expect("square block")
}

/// Linear combination of `σ_S` (`S ⊊ N'`), `|ψ><ψ|` and `σ'_S` with exact
/// coefficients.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct WitnessExpr {
    pub sigma: BTreeMap<Subset, Rational>,
    /// Coefficient of the projector `|ψ><ψ|` (not of `d1 |ψ><ψ|`).
    pub psi: Rational,
    pub sigma_prime: BTreeMap<Subset, Rational>,
}

impl WitnessExpr {
    fn add_sigma(&mut self, s: Subset, c: Rational) {
        *self.sigma.entry(s).or_insert_with(Rational::zero) += c;
    }

    fn add_prime(&mut self, s: Subset, c: Rational) {
        *self.sigma_prime.entry(s).or_insert_with(Rational::zero) += c;
    }

    pub fn add_scaled(&mut self, c: &Rational, other: &WitnessExpr) {
        for (s, v) in &other.sigma {
            self.add_sigma(*s, c * v);
        }
        self.psi += c * &other.psi;
        for (s, v) in &other.sigma_prime {
            self.add_prime(*s, c * v);
        }
    }

    /// Drops zero coefficients so that equal operators compare equal.
    pub fn normalized(mut self) -> Self {
        self.sigma.retain(|_, v| !v.is_zero());
        self.sigma_prime.retain(|_, v| !v.is_zero());
        self
    }

    pub fn to_operator(&self, shape: &Shape) -> Result<Operator> {
        let mut acc = Operator::zeros(shape.dims());
        for (s, c) in &self.sigma {
            if !c.is_zero() {
                acc = acc.add_scaled(to_f64(c), &sigma(shape, *s)?)?;
            }
        }
        if !self.psi.is_zero() {
            acc = acc.add(&ghz_block(shape, &self.psi))?;
        }
        for (s, c) in &self.sigma_prime {
            if c.is_zero() {
                continue;
            }
            if let Some(p) = sigma_prime(shape, *s)? {
                acc = acc.add_scaled(to_f64(c), &p)?;
            }
        }
        Ok(acc)
    }
}

/// Witness coefficients in the `a` parameterization.
#[derive(Clone, Debug, PartialEq)]
pub struct WitnessParams {
    shape: Shape,
    /// `a_S` for every `S ⊊ N'` (the empty set is `a_1`).
    pub a: BTreeMap<Subset, Rational>,
    /// `a_{N'}`.
    pub a_full: Rational,
    /// `a'_S` for every admissible `σ'_S`.
    pub a_prime: BTreeMap<Subset, Rational>,
}

impl WitnessParams {
    pub fn new(
        shape: Shape,
        a: BTreeMap<Subset, Rational>,
        a_full: Rational,
        a_prime: BTreeMap<Subset, Rational>,
    ) -> Result<Self> {
        let expected: Vec<Subset> = Subset::proper_subsets(shape.n());
        let got: Vec<Subset> = a.keys().copied().collect();
        if got != expected {
            return Err(Error::InvalidParams(format!(
                "`a` keys must be exactly the proper subsets of N' {:?}, got {:?}",
                expected, got
            )));
        }
        let expected_prime = admissible_prime_subsets(&shape);
        let got_prime: Vec<Subset> = a_prime.keys().copied().collect();
        if got_prime != expected_prime {
            return Err(Error::InvalidParams(format!(
                "`a_prime` keys must be exactly the admissible σ' subsets {:?}, got {:?}",
                expected_prime, got_prime
            )));
        }
        Ok(WitnessParams {
            shape,
            a,
            a_full,
            a_prime,
        })
    }

    pub fn zeros(shape: Shape) -> Self {
        let a = Subset::proper_subsets(shape.n())
            .into_iter()
            .map(|s| (s, Rational::zero()))
            .collect();
        let a_prime = admissible_prime_subsets(&shape)
            .into_iter()
            .map(|s| (s, Rational::zero()))
            .collect();
        WitnessParams {
            shape,
            a,
            a_full: Rational::zero(),
            a_prime,
        }
    }

    /// Independent uniform integers in `lo..=hi` for every coefficient.
    pub fn random_integers<R: Rng + ?Sized>(shape: Shape, rng: &mut R, lo: i64, hi: i64) -> Self {
        let mut p = Self::zeros(shape);
        for v in p.a.values_mut() {
            *v = rat(rng.random_range(lo..=hi));
        }
        p.a_full = rat(rng.random_range(lo..=hi));
        for v in p.a_prime.values_mut() {
            *v = rat(rng.random_range(lo..=hi));
        }
        p
    }

    /// Integer parameters satisfying `a_S >= 0`, `a_{N'} >= 0` and
    /// `a_S + a'_S >= 0`, drawn from `0..=hi`.
    pub fn random_nonnegative<R: Rng + ?Sized>(shape: Shape, rng: &mut R, hi: i64) -> Self {
        let mut p = Self::zeros(shape);
        for v in p.a.values_mut() {
            *v = rat(rng.random_range(0..=hi));
        }
        p.a_full = rat(rng.random_range(0..=hi));
        let keys: Vec<Subset> = p.a_prime.keys().copied().collect();
        for s in keys {
            let floor = -p.a[&s].clone();
            let lo = floor.to_integer().try_into().unwrap_or(0i64);
            p.a_prime.insert(s, rat(rng.random_range(lo..=hi)));
        }
        p
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    /// `a_S` for any `S ⊆ N'`.
    pub fn a_of(&self, s: Subset) -> Rational {
        if s == Subset::full(self.shape.n()) {
            self.a_full.clone()
        } else {
            self.a[&s].clone()
        }
    }

    pub fn a_prime_of(&self, s: Subset) -> Rational {
        self.a_prime.get(&s).cloned().unwrap_or_else(Rational::zero)
    }

    pub fn scaled(&self, c: &Rational) -> Self {
        WitnessParams {
            shape: self.shape.clone(),
            a: self.a.iter().map(|(k, v)| (*k, v * c)).collect(),
            a_full: &self.a_full * c,
            a_prime: self.a_prime.iter().map(|(k, v)| (*k, v * c)).collect(),
        }
    }
}

/// Möbius inversion `b_S = Σ_{S' ⊆ S} (-1)^{|S|-|S'|} a_{S'}` for every
/// `S ⊆ N'` (including `N'` itself).
pub fn params_b_from_a(params: &WitnessParams) -> BTreeMap<Subset, Rational> {
    let full = Subset::full(params.shape.n());
    full.subsets()
        .into_iter()
        .map(|s| {
            let b = s
                .subsets()
                .into_iter()
                .map(|t| sign(s.len() - t.len()) * params.a_of(t))
                .fold(Rational::zero(), |acc, x| acc + x);
            (s, b)
        })
        .collect()
}

/// Forward map `a_S = Σ_{S' ⊆ S} b_{S'}`; `b` must hold every `S ⊆ N'`.
pub fn params_a_from_b(
    shape: &Shape,
    b: &BTreeMap<Subset, Rational>,
    a_prime: BTreeMap<Subset, Rational>,
) -> Result<WitnessParams> {
    let full = Subset::full(shape.n());
    let sum_below = |s: Subset| -> Result<Rational> {
        s.subsets().into_iter().try_fold(Rational::zero(), |acc, t| {
            b.get(&t).map(|v| acc + v).ok_or_else(|| {
                Error::InvalidParams(format!("missing b coefficient for {{{t}}}"))
            })
        })
    };
    let mut a = BTreeMap::new();
    for s in Subset::proper_subsets(shape.n()) {
        a.insert(s, sum_below(s)?);
    }
    let a_full = sum_below(full)?;
    WitnessParams::new(shape.clone(), a, a_full, a_prime)
}

/// Symbolic form of the witness.
pub fn witness_expr(params: &WitnessParams) -> WitnessExpr {
    let shape = params.shape();
    let full = Subset::full(shape.n());
    let b = params_b_from_a(params);
    let mut e = WitnessExpr::default();
    for s in Subset::proper_subsets(shape.n()) {
        e.add_sigma(s, b[&s].clone());
    }
    e.psi = rat(shape.d1() as i64) * &b[&full];
    for (s, v) in &params.a_prime {
        e.add_prime(*s, v.clone());
    }
    e
}

pub fn build_witness(params: &WitnessParams) -> Result<Operator> {
    witness_expr(params).to_operator(params.shape())
}

/// One distinct eigenvalue with its multiplicity.
#[derive(Clone, Debug, PartialEq)]
pub struct Eigenvalue {
    pub subset: Option<Subset>,
    pub value: Rational,
    pub multiplicity: usize,
}

/// Closed-form spectrum of a reduction-type witness.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectrumSummary {
    /// `a_S` on kets whose agreement set is `S` and which lie outside `σ'_S`.
    pub a_values: Vec<Eigenvalue>,
    /// `a_S + a'_S` on the support of `σ'_S`.
    pub a_plus_aprime: Vec<Eigenvalue>,
    pub omega1: Rational,
    pub omega1_multiplicity: usize,
    pub omega2: Rational,
}

impl SpectrumSummary {
    /// All eigenvalues with multiplicity, ascending.
    pub fn multiset(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for e in self.a_values.iter().chain(&self.a_plus_aprime) {
            out.extend(std::iter::repeat_n(to_f64(&e.value), e.multiplicity));
        }
        out.extend(std::iter::repeat_n(
            to_f64(&self.omega1),
            self.omega1_multiplicity,
        ));
        out.push(to_f64(&self.omega2));
        out.sort_by(f64::total_cmp);
        out
    }

    pub fn min_omega(&self) -> Rational {
        if self.omega1_multiplicity > 0 && self.omega1 < self.omega2 {
            self.omega1.clone()
        } else {
            self.omega2.clone()
        }
    }
}

/// `ω1 = a_{N'} - b_{N'}` (multiplicity `d1 - 1`), `ω2 = d1 a_{N'} - (d1-1) ω1`,
/// and the diagonal eigenvalues `a_S`, `a_S + a'_S` with multiplicities
/// counted over the computational basis.
pub fn spectrum(params: &WitnessParams) -> SpectrumSummary {
    let shape = params.shape();
    let dims = shape.dims();
    let n = shape.n();
    let full = Subset::full(n);
    let d1 = shape.d1() as i64;
    let b = params_b_from_a(params);
    let omega1 = &params.a_full - &b[&full];
    let omega2 = rat(d1) * &params.a_full - rat(d1 - 1) * &omega1;

    let mut plain: BTreeMap<Subset, usize> = BTreeMap::new();
    let mut primed: BTreeMap<Subset, usize> = BTreeMap::new();
    for i in 0..dims.total() {
        let digits = dims.digits(i);
        let t = agreement_set(&digits);
        if t == full {
            continue;
        }
        if in_sigma_prime(shape, t, &digits) {
            *primed.entry(t).or_default() += 1;
        } else {
            *plain.entry(t).or_default() += 1;
        }
    }
    let a_values = plain
        .into_iter()
        .map(|(s, m)| Eigenvalue {
            subset: Some(s),
            value: params.a_of(s),
            multiplicity: m,
        })
        .collect();
    let a_plus_aprime = primed
        .into_iter()
        .map(|(s, m)| Eigenvalue {
            subset: Some(s),
            value: params.a_of(s) + params.a_prime_of(s),
            multiplicity: m,
        })
        .collect();
    SpectrumSummary {
        a_values,
        a_plus_aprime,
        omega1,
        omega1_multiplicity: shape.d1() - 1,
        omega2,
    }
}

/// Symbolic optimal witness for facet `S` (unit scale):
/// `σ_S + Σ_{S ⊊ S' ≠ N'} (-1)^{|S|+|S'|} σ_{S'} + d1 (-1)^{|S|+|N'|} |ψ><ψ| - σ'_S`.
pub fn optimal_expr(shape: &Shape, s: Subset) -> Result<WitnessExpr> {
    let n = shape.n();
    let full = Subset::full(n);
    s.check_within(n)?;
    if s == full {
        return Err(Error::InvalidSubset {
            subset: s.to_string(),
            reason: "optimal witnesses are indexed by proper subsets of N'".into(),
        });
    }
    let mut e = WitnessExpr::default();
    for t in full.subsets() {
        if t != full && s.is_subset_of(t) {
            e.add_sigma(t, sign(s.len() + t.len()));
        }
    }
    e.psi = rat(shape.d1() as i64) * sign(s.len() + full.len());
    if !sigma_prime_support(shape, s)?.is_empty() {
        e.add_prime(s, rat(-1));
    }
    Ok(e)
}

pub fn optimal_witness(shape: &Shape, s: Subset, scale: f64) -> Result<Operator> {
    Ok(optimal_expr(shape, s)?.to_operator(shape)?.scale(scale))
}

/// Partial transpose of the unit-scale optimal witness over `N' \ S`.
pub fn optimal_pt_certificate(shape: &Shape, s: Subset) -> Result<Operator> {
    let w = optimal_witness(shape, s, 1.0)?;
    let over = Subset::full(shape.n()).minus(s).members();
    partial_transpose(&w, &over)
}

/// Explicit positive form of [`optimal_pt_certificate`]:
/// `Σ_{i<j<d1} |Ψ_ij><Ψ_ij|` plus a diagonal 0/1 remainder, where
/// `|Ψ_ij> = |α_ij> + sign |β_ij>`, `α_ij` carries `i` on `{1} ∪ S` and `j`
/// elsewhere, `β_ij` the reverse, and `sign = (-1)^{|N' \ S|}`.
#[derive(Clone, Debug)]
pub struct CertificateParts {
    pub sign: i32,
    pub pairs: Vec<(Vec<usize>, Vec<usize>)>,
    pub pair_sum: Operator,
    pub residual_support: Vec<usize>,
}

impl CertificateParts {
    pub fn total(&self) -> Operator {
        let res = Operator::basis_projector(self.pair_sum.dims(), &self.residual_support);
        self.pair_sum.add(&res).expect("same dims")
    }
}

pub fn certificate_parts(shape: &Shape, s: Subset) -> Result<CertificateParts> {
    let n = shape.n();
    let full = Subset::full(n);
    optimal_expr(shape, s)?;
    let dims = shape.dims();
    let free = full.minus(s);
    let sgn = if free.len().is_multiple_of(2) { 1 } else { -1 };
    let mut pairs = Vec::new();
    let mut m = CMatrix::zeros(dims.total());
    let mut covered = Vec::new();
    let ket = |i: usize, j: usize| -> Vec<usize> {
        (1..=n)
            .map(|k| if k == 1 || s.contains(k) { i } else { j })
            .collect()
    };
    for i in 0..shape.d1() {
        for j in i + 1..shape.d1() {
            let (a, b) = (ket(i, j), ket(j, i));
            let (ia, ib) = (dims.index(&a), dims.index(&b));
            m[(ia, ia)] += c64(1.0);
            m[(ib, ib)] += c64(1.0);
            m[(ia, ib)] += c64(sgn as f64);
            m[(ib, ia)] += c64(sgn as f64);
            covered.push(ia);
            covered.push(ib);
            pairs.push((a, b));
        }
    }
    let residual_support = (0..dims.total())
        .filter(|i| !covered.contains(i))
        .filter(|&i| {
            let d = dims.digits(i);
            agreement_set(&d) == s && !in_sigma_prime(shape, s, &d)
        })
        .collect();
    Ok(CertificateParts {
        sign: sgn,
        pairs,
        pair_sum: Operator::new(dims.clone(), m)?,
        residual_support,
    })
}

/// Expansion of a witness over optimal witnesses and positive operators:
/// `W = Σ_S a_S W_opt(S) + ψ_coefficient |ψ><ψ| + Σ_S (a_S + a'_S) σ'_S`.
#[derive(Clone, Debug, PartialEq)]
pub struct Decomposition {
    pub optimal_terms: Vec<(Subset, Rational)>,
    /// `d1 a_{N'}`.
    pub psi_coefficient: Rational,
    pub prime_terms: Vec<(Subset, Rational)>,
    pub omega2: Rational,
    /// `ω2 >= 0`.
    pub omega2_nonnegative: bool,
    /// All expansion coefficients are non-negative, so the expansion itself
    /// is a decomposition into partial transposes of positive operators plus
    /// a positive remainder.
    pub certified_decomposable: bool,
}

impl Decomposition {
    pub fn expr(&self, shape: &Shape) -> Result<WitnessExpr> {
        let mut e = WitnessExpr::default();
        for (s, c) in &self.optimal_terms {
            e.add_scaled(c, &optimal_expr(shape, *s)?);
        }
        e.psi += &self.psi_coefficient;
        for (s, c) in &self.prime_terms {
            e.add_prime(*s, c.clone());
        }
        Ok(e)
    }

    pub fn reconstruct(&self, shape: &Shape) -> Result<Operator> {
        self.expr(shape)?.to_operator(shape)
    }
}

pub fn decompose(params: &WitnessParams) -> Decomposition {
    let shape = params.shape();
    let optimal_terms: Vec<(Subset, Rational)> =
        params.a.iter().map(|(s, v)| (*s, v.clone())).collect();
    let psi_coefficient = rat(shape.d1() as i64) * &params.a_full;
    let prime_terms: Vec<(Subset, Rational)> = params
        .a_prime
        .iter()
        .map(|(s, v)| (*s, params.a_of(*s) + v))
        .collect();
    let omega2 = spectrum(params).omega2;
    let certified_decomposable = optimal_terms.iter().all(|(_, c)| !c.is_negative())
        && !psi_coefficient.is_negative()
        && prime_terms.iter().all(|(_, c)| !c.is_negative());
    Decomposition {
        optimal_terms,
        psi_coefficient,
        prime_terms,
        omega2_nonnegative: !omega2.is_negative(),
        omega2,
        certified_decomposable,
    }
}

/// Exact check that the expansion reproduces the witness coefficients.
pub fn decomposition_is_exact(params: &WitnessParams) -> Result<bool> {
    let lhs = witness_expr(params).normalized();
    let rhs = decompose(params).expr(params.shape())?.normalized();
    Ok(lhs == rhs)
}
