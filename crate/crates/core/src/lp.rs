//! Exact rational simplex method over inequality-form polytopes and the
//! witness-validity classification built on it.
//!
//! Problems are `minimize c·x + c0` subject to `A x + b >= 0`. The solver
//! walks vertices: at each one the active rows `A_B` define multipliers
//! `y` with `A_B^T y = c`; all `y >= 0` certifies optimality, otherwise the
//! lowest-index row with `y < 0` is released (Bland's rule) and a ratio test
//! picks the entering row, again by lowest index on ties.

use num_traits::{Signed, Zero};

use crate::error::{Error, Result};
use crate::exact::{dot, null_vector, rank, rat, solve_square, Rational};
use crate::region::{enumerate_apexes, halfspaces, Coord, HalfSpace, Layout};
use crate::subset::Subset;
use crate::witness::{params_b_from_a, spectrum, WitnessParams};

const MAX_PIVOTS: usize = 100_000;

#[derive(Clone, Debug, PartialEq)]
pub struct LpProblem {
    pub names: Vec<String>,
    pub objective: Vec<Rational>,
    pub constant: Rational,
    pub halfspaces: Vec<HalfSpace>,
    /// Known vertices, for cross-checking by enumeration.
    pub apexes: Option<Vec<Vec<Rational>>>,
}

impl LpProblem {
    pub fn dimension(&self) -> usize {
        self.objective.len()
    }

    pub fn value_at(&self, x: &[Rational]) -> Rational {
        dot(&self.objective, x) + &self.constant
    }

    pub fn is_feasible(&self, x: &[Rational]) -> bool {
        self.halfspaces.iter().all(|h| !h.slack(x).is_negative())
    }

    fn check(&self) -> Result<()> {
        let n = self.dimension();
        if self.names.len() != n {
            return Err(Error::InvalidParams(format!(
                "{} coordinate names for {n} variables",
                self.names.len()
            )));
        }
        if let Some(h) = self.halfspaces.iter().find(|h| h.coeffs.len() != n) {
            return Err(Error::InvalidParams(format!(
                "half-space `{}` has {} coefficients, expected {n}",
                h.label,
                h.coeffs.len()
            )));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct LpSolution {
    pub value: Rational,
    pub vertex: Vec<Rational>,
    /// Indices of the half-spaces forming the final basis (all active).
    pub basis: Vec<usize>,
    /// Non-negative multipliers on `basis` with `Σ y_i a_i = c`.
    pub duals: Vec<Rational>,
    pub pivots: usize,
}

impl LpSolution {
    /// Re-derives optimality from the dual certificate: the vertex is
    /// feasible, every basis row is active, the multipliers are non-negative
    /// and reproduce the objective.
    pub fn certify(&self, lp: &LpProblem) -> bool {
        if !lp.is_feasible(&self.vertex) || lp.value_at(&self.vertex) != self.value {
            return false;
        }
        if self.duals.iter().any(|y| y.is_negative()) || self.duals.len() != self.basis.len() {
            return false;
        }
        if self
            .basis
            .iter()
            .any(|&i| !lp.halfspaces[i].slack(&self.vertex).is_zero())
        {
            return false;
        }
        (0..lp.dimension()).all(|j| {
            let s: Rational = self
                .basis
                .iter()
                .zip(&self.duals)
                .map(|(&i, y)| y * &lp.halfspaces[i].coeffs[j])
                .sum();
            s == lp.objective[j]
        })
    }
}

fn transpose(rows: &[Vec<Rational>]) -> Vec<Vec<Rational>> {
    let n = rows.len();
    (0..n)
        .map(|j| rows.iter().map(|r| r[j].clone()).collect())
        .collect()
}

/// Moves along `dir` from `x` until a half-space outside `skip` becomes
/// tight; returns the step and the lowest-index blocking row.
fn ratio_test(
    lp: &LpProblem,
    x: &[Rational],
    dir: &[Rational],
    skip: &[usize],
) -> Option<(Rational, usize)> {
    let mut best: Option<(Rational, usize)> = None;
    for (i, h) in lp.halfspaces.iter().enumerate() {
        if skip.contains(&i) {
            continue;
        }
        let rate = dot(&h.coeffs, dir);
        if !rate.is_negative() {
            continue;
        }
        let step = h.slack(x) / -rate;
        if best.as_ref().is_none_or(|(b, _)| step < *b) {
            best = Some((step, i));
        }
    }
    best
}

fn axpy(x: &[Rational], t: &Rational, d: &[Rational]) -> Vec<Rational> {
    x.iter().zip(d).map(|(a, b)| a + t * b).collect()
}

/// From a feasible point, slides along null directions of the active rows
/// (never increasing the objective) until `n` independent rows are active.
fn find_vertex(lp: &LpProblem, mut x: Vec<Rational>) -> Result<(Vec<Rational>, Vec<usize>)> {
    let n = lp.dimension();
    loop {
        let mut basis: Vec<usize> = Vec::new();
        let mut rows: Vec<Vec<Rational>> = Vec::new();
        for (i, h) in lp.halfspaces.iter().enumerate() {
            if basis.len() == n {
                break;
            }
            if !h.slack(&x).is_zero() {
                continue;
            }
            rows.push(h.coeffs.clone());
            if rank(&rows) == rows.len() {
                basis.push(i);
            } else {
                rows.pop();
            }
        }
        if basis.len() == n {
            return Ok((x, basis));
        }
        let mut d = null_vector(&rows, n).ok_or(Error::Unbounded)?;
        if dot(&lp.objective, &d).is_positive() {
            d = d.into_iter().map(|v| -v).collect();
        }
        let flat = dot(&lp.objective, &d).is_zero();
        match ratio_test(lp, &x, &d, &basis) {
            Some((t, _)) => x = axpy(&x, &t, &d),
            None if flat => {
                let back: Vec<Rational> = d.iter().map(|v| -v.clone()).collect();
                match ratio_test(lp, &x, &back, &basis) {
                    Some((t, _)) => x = axpy(&x, &t, &back),
                    None => return Err(Error::Unbounded),
                }
            }
            None => return Err(Error::Unbounded),
        }
    }
}

/// Exact minimum of a bounded LP. The origin must be feasible, which holds
/// for every problem produced in this crate.
pub fn solve(lp: &LpProblem) -> Result<LpSolution> {
    lp.check()?;
    let n = lp.dimension();
    let origin = vec![Rational::zero(); n];
    if let Some(h) = lp.halfspaces.iter().find(|h| h.slack(&origin).is_negative()) {
        return Err(Error::Infeasible(format!(
            "the origin violates `{}`; a feasible starting point is required",
            h.label
        )));
    }
    if n == 0 {
        return Ok(LpSolution {
            value: lp.constant.clone(),
            vertex: origin,
            basis: Vec::new(),
            duals: Vec::new(),
            pivots: 0,
        });
    }
    let (mut x, mut basis) = find_vertex(lp, origin)?;
    for pivots in 0..MAX_PIVOTS {
        basis.sort_unstable();
        let rows: Vec<Vec<Rational>> = basis
            .iter()
            .map(|&i| lp.halfspaces[i].coeffs.clone())
            .collect();
        let duals = solve_square(&transpose(&rows), &lp.objective)
            .ok_or_else(|| Error::Infeasible("singular basis".into()))?;
        let Some(leave) = duals.iter().position(|y| y.is_negative()) else {
            return Ok(LpSolution {
                value: lp.value_at(&x),
                vertex: x,
                basis,
                duals,
                pivots,
            });
        };
        // Direction keeping the other basis rows tight and increasing row
        // `leave`; the objective drops at rate `y_leave`.
        let mut e = vec![Rational::zero(); n];
        e[leave] = rat(1);
        let d = solve_square(&rows, &e).expect("non-singular basis");
        let Some((t, enter)) = ratio_test(lp, &x, &d, &basis) else {
            return Err(Error::Unbounded);
        };
        x = axpy(&x, &t, &d);
        basis[leave] = enter;
    }
    Err(Error::Infeasible(format!(
        "no convergence within {MAX_PIVOTS} pivots"
    )))
}

/// Exact minimum over a list of vertices: `(value, index of first minimizer)`.
pub fn min_over_apexes(
    objective: &[Rational],
    constant: &Rational,
    apexes: &[Vec<Rational>],
) -> Option<(Rational, usize)> {
    apexes
        .iter()
        .map(|p| dot(objective, p) + constant)
        .enumerate()
        .fold(None, |best: Option<(Rational, usize)>, (i, v)| match best {
            Some((b, j)) if b <= v => Some((b, j)),
            _ => Some((v, i)),
        })
}

/// `F(P) = b_∅ + Σ b_S P_S + b_{N'} P_{N'} + Σ a'_S P'_S` over the
/// feasible simplex of the witness's shape.
pub fn assemble_lp(params: &WitnessParams) -> LpProblem {
    let shape = params.shape();
    let layout = Layout::new(shape);
    let b = params_b_from_a(params);
    let objective = layout
        .coords()
        .iter()
        .map(|c| match c {
            Coord::P(s) => b[s].clone(),
            Coord::Prime(s) => params.a_prime_of(*s),
        })
        .collect();
    LpProblem {
        names: layout.names(),
        objective,
        constant: b[&Subset::EMPTY].clone(),
        halfspaces: halfspaces(shape),
        apexes: Some(enumerate_apexes(shape).into_iter().map(|a| a.point).collect()),
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Classification {
    pub lp_min: Rational,
    pub minimizer: Vec<Rational>,
    /// LP minimum is non-negative.
    pub positive_on_separables: bool,
    /// Every `a_S` (including `a_{N'}`) and every `a_S + a'_S` is non-negative.
    pub coefficient_condition: bool,
    pub negative_eigenvalue: bool,
    pub is_ew: bool,
}

pub fn coefficient_condition(params: &WitnessParams) -> bool {
    params.a.values().all(|v| !v.is_negative())
        && !params.a_full.is_negative()
        && params
            .a_prime
            .iter()
            .all(|(s, v)| !(params.a_of(*s) + v).is_negative())
}

pub fn classify(params: &WitnessParams) -> Result<Classification> {
    let sol = solve(&assemble_lp(params))?;
    let sp = spectrum(params);
    let negative_eigenvalue = sp.min_omega().is_negative();
    let positive_on_separables = !sol.value.is_negative();
    Ok(Classification {
        positive_on_separables,
        coefficient_condition: coefficient_condition(params),
        negative_eigenvalue,
        is_ew: positive_on_separables && negative_eigenvalue,
        lp_min: sol.value,
        minimizer: sol.vertex,
    })
}
