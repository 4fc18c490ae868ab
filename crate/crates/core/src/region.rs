//! Feasible region of a reduction-type witness: product-state coordinates,
//! the simplex apexes and the facet inequalities.

use std::fmt;

use num_complex::Complex64;
use num_traits::{One, Zero};

use crate::error::{Error, Result};
use crate::exact::{dot, format_rational, rank, rat, Rational};
use crate::subset::Subset;
use crate::tensor::{c64, Shape};
use crate::witness::{
    admissible_prime_subsets, agreement_set, in_sigma_prime, sigma_prime_support,
};

/// One coordinate of the feasible region.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coord {
    /// `P_S = <γ|σ_S|γ>` for non-empty `S ⊊ N'`, or `d1 |<ψ|γ>|²` for `S = N'`.
    P(Subset),
    /// `P'_S = <γ|σ'_S|γ>`.
    Prime(Subset),
}

impl fmt::Display for Coord {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Coord::P(s) => write!(f, "P{}", s.label()),
            Coord::Prime(s) => write!(f, "P'{}", s.label()),
        }
    }
}

/// Coordinate order: `P_S` for non-empty proper `S` ascending, then
/// `P_{N'}`, then `P'_S` ascending.
#[derive(Clone, Debug, PartialEq)]
pub struct Layout {
    shape: Shape,
    coords: Vec<Coord>,
}

impl Layout {
    pub fn new(shape: &Shape) -> Self {
        let n = shape.n();
        let mut coords: Vec<Coord> = Subset::proper_subsets(n)
            .into_iter()
            .filter(|s| !s.is_empty())
            .map(Coord::P)
            .collect();
        coords.push(Coord::P(Subset::full(n)));
        coords.extend(admissible_prime_subsets(shape).into_iter().map(Coord::Prime));
        Layout {
            shape: shape.clone(),
            coords,
        }
    }

    pub fn shape(&self) -> &Shape {
        &self.shape
    }

    pub fn coords(&self) -> &[Coord] {
        &self.coords
    }

    pub fn len(&self) -> usize {
        self.coords.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coords.is_empty()
    }

    pub fn position(&self, c: Coord) -> Option<usize> {
        self.coords.iter().position(|&x| x == c)
    }

    pub fn names(&self) -> Vec<String> {
        self.coords.iter().map(|c| c.to_string()).collect()
    }
}

/// `coeffs · P + offset >= 0`.
#[derive(Clone, Debug, PartialEq)]
pub struct HalfSpace {
    pub coeffs: Vec<Rational>,
    pub offset: Rational,
    pub label: String,
}

impl HalfSpace {
    pub fn slack(&self, p: &[Rational]) -> Rational {
        dot(&self.coeffs, p) + &self.offset
    }

    pub fn slack_f64(&self, p: &[f64]) -> f64 {
        self.coeffs
            .iter()
            .zip(p)
            .map(|(c, x)| crate::exact::to_f64(c) * x)
            .sum::<f64>()
            + crate::exact::to_f64(&self.offset)
    }

    pub fn render(&self, names: &[String]) -> String {
        let mut out = String::new();
        if !self.offset.is_zero() {
            out.push_str(&format_rational(&self.offset));
        }
        for (c, name) in self.coeffs.iter().zip(names) {
            if c.is_zero() {
                continue;
            }
            let neg = *c < Rational::zero();
            let mag = if neg { -c.clone() } else { c.clone() };
            if out.is_empty() {
                out.push_str(if neg { "-" } else { "" });
            } else {
                out.push_str(if neg { " - " } else { " + " });
            }
            if !mag.is_one() {
                out.push_str(&format_rational(&mag));
            }
            out.push_str(name);
        }
        if out.is_empty() {
            out.push('0');
        }
        out.push_str(" >= 0");
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ApexKind {
    Origin,
    Subset(Subset),
    AllOnes,
    Prime(Subset),
}

/// A vertex of the feasible simplex with a computational-basis generator.
#[derive(Clone, Debug, PartialEq)]
pub struct Apex {
    pub kind: ApexKind,
    pub point: Vec<Rational>,
    /// Basis index of each particle in the generating product state.
    pub generator: Vec<usize>,
}

impl Apex {
    pub fn generator_states(&self, shape: &Shape) -> Vec<Vec<Complex64>> {
        self.generator
            .iter()
            .zip(shape.dims().as_slice())
            .map(|(&i, &d)| {
                let mut v = vec![c64(0.0); d];
                v[i] = c64(1.0);
                v
            })
            .collect()
    }

    pub fn ket(&self) -> String {
        let sep = if self.generator.iter().any(|&i| i >= 10) { "," } else { "" };
        let body: Vec<String> = self.generator.iter().map(|i| i.to_string()).collect();
        format!("|{}>", body.join(sep))
    }
}

/// Exact coordinates of a computational basis ket.
pub fn basis_coordinates(layout: &Layout, digits: &[usize]) -> Vec<Rational> {
    let shape = layout.shape();
    let n = shape.n();
    let t = agreement_set(digits);
    let ghz = t == Subset::full(n) && digits[0] < shape.d1();
    layout
        .coords()
        .iter()
        .map(|c| match c {
            Coord::P(s) if *s == Subset::full(n) => {
                if ghz {
                    rat(1)
                } else {
                    rat(0)
                }
            }
            Coord::P(s) => rat(s.is_subset_of(t) as i64),
            Coord::Prime(s) => rat(in_sigma_prime(shape, *s, digits) as i64),
        })
        .collect()
}

/// Coordinates of a product state given by its local vectors.
pub struct CoordinateMap {
    layout: Layout,
    /// Supports of each `σ'_S` coordinate, as digit strings.
    prime_supports: Vec<Vec<Vec<usize>>>,
}

impl CoordinateMap {
    pub fn new(shape: &Shape) -> Self {
        let layout = Layout::new(shape);
        let dims = shape.dims();
        let prime_supports = layout
            .coords()
            .iter()
            .filter_map(|c| match c {
                Coord::Prime(s) => Some(
                    sigma_prime_support(shape, *s)
                        .expect("admissible subset")
                        .into_iter()
                        .map(|i| dims.digits(i))
                        .collect(),
                ),
                Coord::P(_) => None,
            })
            .collect();
        CoordinateMap {
            layout,
            prime_supports,
        }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// `P_S`, `P_{N'}` and `P'_S` for the product of normalized local vectors.
    pub fn coordinates(&self, locals: &[Vec<Complex64>]) -> Result<Vec<f64>> {
        let shape = self.layout.shape();
        let dims = shape.dims().as_slice();
        if locals.len() != dims.len() || locals.iter().zip(dims).any(|(v, &d)| v.len() != d) {
            return Err(Error::ShapeMismatch {
                expected: shape.dims().to_string(),
                found: locals
                    .iter()
                    .map(|v| v.len().to_string())
                    .collect::<Vec<_>>()
                    .join("x"),
            });
        }
        for v in locals {
            let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>();
            if (norm - 1.0).abs() > 1e-9 {
                return Err(Error::NotNormalized(norm.sqrt()));
            }
        }
        let n = shape.n();
        let d1 = shape.d1();
        let probs: Vec<Vec<f64>> = locals
            .iter()
            .map(|v| v.iter().map(|z| z.norm_sqr()).collect())
            .collect();
        let mut out = Vec::with_capacity(self.layout.len());
        let mut prime_idx = 0;
        for c in self.layout.coords() {
            let v = match c {
                Coord::P(s) if *s == Subset::full(n) => {
                    let amp: Complex64 = (0..d1)
                        .map(|i| locals.iter().map(|v| v[i]).product::<Complex64>())
                        .sum();
                    amp.norm_sqr()
                }
                Coord::P(s) => (0..d1)
                    .map(|i| {
                        probs[0][i] * s.members().iter().map(|&k| probs[k - 1][i]).product::<f64>()
                    })
                    .sum(),
                Coord::Prime(_) => {
                    let sup = &self.prime_supports[prime_idx];
                    prime_idx += 1;
                    sup.iter()
                        .map(|d| d.iter().enumerate().map(|(k, &i)| probs[k][i]).product::<f64>())
                        .sum()
                }
            };
            out.push(v);
        }
        Ok(out)
    }
}

pub fn coordinates_of(shape: &Shape, locals: &[Vec<Complex64>]) -> Result<Vec<f64>> {
    CoordinateMap::new(shape).coordinates(locals)
}

/// Smallest basis ket in the support of `σ'_S`.
fn smallest_prime_ket(shape: &Shape, s: Subset) -> Vec<usize> {
    let support = sigma_prime_support(shape, s).expect("admissible subset");
    shape.dims().digits(support[0])
}

/// Apexes in the order: origin, one per non-empty `S ⊊ N'`, all-ones, one
/// per admissible `σ'_S`. Generators are computational-basis kets and every
/// coordinate row is evaluated from its generator.
pub fn enumerate_apexes(shape: &Shape) -> Vec<Apex> {
    let layout = Layout::new(shape);
    let n = shape.n();
    let mut out = Vec::new();
    let mut push = |kind, generator: Vec<usize>| {
        let point = basis_coordinates(&layout, &generator);
        out.push(Apex {
            kind,
            point,
            generator,
        });
    };
    let mut origin = vec![1; n];
    origin[0] = 0;
    push(ApexKind::Origin, origin);
    for s in Subset::proper_subsets(n).into_iter().filter(|s| !s.is_empty()) {
        let g = (1..=n)
            .map(|k| if k == 1 || s.contains(k) { 0 } else { 1 })
            .collect();
        push(ApexKind::Subset(s), g);
    }
    push(ApexKind::AllOnes, vec![0; n]);
    for s in admissible_prime_subsets(shape) {
        push(ApexKind::Prime(s), smallest_prime_ket(shape, s));
    }
    out
}

/// Facet inequalities: for every `S ⊊ N'`
/// `P_S - P'_S + Σ_{S ⊊ S'} (-1)^{|S|+|S'|} P_{S'} >= 0` (with `P_∅ = 1`),
/// then `P_{N'} >= 0`, then `P'_S >= 0` for admissible `S`.
pub fn halfspaces(shape: &Shape) -> Vec<HalfSpace> {
    let layout = Layout::new(shape);
    let n = shape.n();
    let full = Subset::full(n);
    let names = layout.names();
    let zero = || vec![Rational::zero(); layout.len()];
    let mut out = Vec::new();
    for s in Subset::proper_subsets(n) {
        let mut coeffs = zero();
        let mut offset = Rational::zero();
        for t in full.subsets() {
            if !s.is_subset_of(t) {
                continue;
            }
            let c = if (s.len() + t.len()) % 2 == 0 { rat(1) } else { rat(-1) };
            if t.is_empty() {
                offset += c;
            } else {
                coeffs[layout.position(Coord::P(t)).expect("coordinate")] += c;
            }
        }
        if let Some(i) = layout.position(Coord::Prime(s)) {
            coeffs[i] -= rat(1);
        }
        let mut h = HalfSpace {
            coeffs,
            offset,
            label: format!("facet {}", s.label()),
        };
        h.label = format!("{}: {}", h.label, h.render(&names));
        out.push(h);
    }
    let mut coeffs = zero();
    coeffs[layout.position(Coord::P(full)).expect("coordinate")] = rat(1);
    out.push(HalfSpace {
        coeffs,
        offset: Rational::zero(),
        label: format!("{} >= 0", Coord::P(full)),
    });
    for s in admissible_prime_subsets(shape) {
        let mut coeffs = zero();
        coeffs[layout.position(Coord::Prime(s)).expect("coordinate")] = rat(1);
        out.push(HalfSpace {
            coeffs,
            offset: Rational::zero(),
            label: format!("{} >= 0", Coord::Prime(s)),
        });
    }
    out
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimplexReport {
    pub apexes: usize,
    pub facets: usize,
    pub dimension: usize,
    pub violations: Vec<String>,
}

impl SimplexReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Exact check that apexes and facets describe a full-dimensional simplex.
pub fn verify_simplex(shape: &Shape) -> SimplexReport {
    let layout = Layout::new(shape);
    let apexes = enumerate_apexes(shape);
    let facets = halfspaces(shape);
    let dim = layout.len();
    let mut violations = Vec::new();
    if apexes.len() != dim + 1 {
        violations.push(format!("{} apexes for dimension {dim}", apexes.len()));
    }
    if facets.len() != apexes.len() {
        violations.push(format!(
            "{} facets but {} apexes",
            facets.len(),
            apexes.len()
        ));
    }
    let mut saturated_by = vec![0usize; facets.len()];
    for a in &apexes {
        let mut tight = 0;
        for (j, h) in facets.iter().enumerate() {
            let s = h.slack(&a.point);
            if s < Rational::zero() {
                violations.push(format!("apex {} violates {}", a.ket(), h.label));
            } else if s.is_zero() {
                tight += 1;
                saturated_by[j] += 1;
            }
        }
        if tight + 1 != facets.len() {
            violations.push(format!(
                "apex {} saturates {tight} of {} facets",
                a.ket(),
                facets.len()
            ));
        }
    }
    for (h, &k) in facets.iter().zip(&saturated_by) {
        if k + 1 != apexes.len() {
            violations.push(format!("{} is saturated by {k} apexes", h.label));
        }
    }
    if let Some(first) = apexes.first() {
        let diffs: Vec<Vec<Rational>> = apexes[1..]
            .iter()
            .map(|a| a.point.iter().zip(&first.point).map(|(x, y)| x - y).collect())
            .collect();
        let r = if diffs.is_empty() { 0 } else { rank(&diffs) };
        if r != dim {
            violations.push(format!("apexes span an affine space of dimension {r}, not {dim}"));
        }
    }
    SimplexReport {
        apexes: apexes.len(),
        facets: facets.len(),
        dimension: dim,
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tensor::{expectation, Operator, StateVector};
    use crate::witness::{max_entangled, optimal_witness, sigma, sigma_prime};

    fn shape(d: &[usize]) -> Shape {
        Shape::new(d.to_vec()).unwrap()
    }

    fn rows(apexes: &[Apex]) -> Vec<Vec<i64>> {
        apexes
            .iter()
            .map(|a| {
                a.point
                    .iter()
                    .map(|x| x.to_integer().try_into().unwrap())
                    .collect()
            })
            .collect()
    }

    fn basis(d: usize, i: usize) -> Vec<Complex64> {
        let mut v = vec![c64(0.0); d];
        v[i] = c64(1.0);
        v
    }

    #[test]
    fn layout_names() {
        assert_eq!(Layout::new(&shape(&[2, 2, 2])).names(), ["P2", "P3", "P23"]);
        assert_eq!(
            Layout::new(&shape(&[2, 3, 4])).names(),
            ["P2", "P3", "P23", "P'1", "P'2", "P'3"]
        );
        assert_eq!(Layout::new(&shape(&[2, 2])).names(), ["P2"]);
    }

    #[test]
    fn apexes_three_qubits() {
        let a = enumerate_apexes(&shape(&[2, 2, 2]));
        assert_eq!(rows(&a), [[0, 0, 0], [1, 0, 0], [0, 1, 0], [1, 1, 1]]);
    }

    #[test]
    fn apexes_2x3x4() {
        let a = enumerate_apexes(&shape(&[2, 3, 4]));
        assert_eq!(
            rows(&a),
            [
                [0, 0, 0, 0, 0, 0],
                [1, 0, 0, 0, 0, 0],
                [0, 1, 0, 0, 0, 0],
                [1, 1, 1, 0, 0, 0],
                [0, 0, 0, 1, 0, 0],
                [1, 0, 0, 0, 1, 0],
                [0, 1, 0, 0, 0, 1],
            ]
        );
        assert_eq!(a[5].ket(), "|002>");
        assert_eq!(a[6].ket(), "|020>");
    }

    #[test]
    fn apexes_two_qubits() {
        let a = enumerate_apexes(&shape(&[2, 2]));
        assert_eq!(rows(&a), [[0], [1]]);
    }

    #[test]
    fn coordinates_examples() {
        let s = shape(&[2, 2, 2]);
        let p = coordinates_of(&s, &[basis(2, 0), basis(2, 1), basis(2, 1)]).unwrap();
        assert_eq!(p, [0.0, 0.0, 0.0]);
        let p = coordinates_of(&s, &[basis(2, 0), basis(2, 0), basis(2, 0)]).unwrap();
        assert_eq!(p, [1.0, 1.0, 1.0]);
        let t = shape(&[2, 3, 4]);
        let p = coordinates_of(&t, &[basis(2, 0), basis(3, 0), basis(4, 2)]).unwrap();
        assert_eq!(p, [1.0, 0.0, 0.0, 0.0, 1.0, 0.0]);
        assert!(coordinates_of(&t, &[basis(2, 0), basis(3, 0)]).is_err());
    }

    #[test]
    fn coordinates_match_operator_expectations() {
        let s = shape(&[2, 3, 4]);
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let locals = vec![
            vec![c64(h), Complex64::new(0.0, h)],
            vec![c64(0.6), c64(0.0), c64(0.8)],
            vec![c64(0.5), c64(0.5), c64(0.5), Complex64::new(0.0, 0.5)],
        ];
        let p = coordinates_of(&s, &locals).unwrap();
        let g = StateVector::product(&locals).unwrap();
        let layout = Layout::new(&s);
        for (c, v) in layout.coords().iter().zip(&p) {
            let op = match c {
                Coord::P(t) if *t == Subset::full(3) => {
                    Operator::projector(&max_entangled(&s)).scale(2.0)
                }
                Coord::P(t) => sigma(&s, *t).unwrap(),
                Coord::Prime(t) => sigma_prime(&s, *t).unwrap().unwrap(),
            };
            assert!((expectation(&op, &g).unwrap() - v).abs() < 1e-12, "{c}");
        }
    }

    #[test]
    fn halfspace_rendering() {
        let names = Layout::new(&shape(&[2, 2, 2])).names();
        let h: Vec<String> = halfspaces(&shape(&[2, 2, 2]))
            .iter()
            .map(|h| h.render(&names))
            .collect();
        assert_eq!(
            h,
            [
                "1 - P2 - P3 + P23 >= 0",
                "P2 - P23 >= 0",
                "P3 - P23 >= 0",
                "P23 >= 0"
            ]
        );
        let names = Layout::new(&shape(&[2, 3, 4])).names();
        let h: Vec<String> = halfspaces(&shape(&[2, 3, 4]))
            .iter()
            .map(|h| h.render(&names))
            .collect();
        assert_eq!(
            h,
            [
                "1 - P2 - P3 + P23 - P'1 >= 0",
                "P2 - P23 - P'2 >= 0",
                "P3 - P23 - P'3 >= 0",
                "P23 >= 0",
                "P'1 >= 0",
                "P'2 >= 0",
                "P'3 >= 0"
            ]
        );
        let names = Layout::new(&shape(&[2, 2])).names();
        let h: Vec<String> = halfspaces(&shape(&[2, 2]))
            .iter()
            .map(|h| h.render(&names))
            .collect();
        assert_eq!(h, ["1 - P2 >= 0", "P2 >= 0"]);
    }

    #[test]
    fn simplex_checks() {
        for (d, count) in [
            (vec![2, 2], 2),
            (vec![2, 2, 2], 4),
            (vec![2, 3, 4], 7),
            (vec![2, 2, 2, 2], 8),
            (vec![3, 3, 3], 5),
            (vec![3, 3, 3, 3], 11),
        ] {
            let r = verify_simplex(&shape(&d));
            assert!(r.ok(), "{d:?}: {:?}", r.violations);
            assert_eq!(r.apexes, count, "{d:?}");
        }
    }

    #[test]
    fn facet_value_is_optimal_witness_expectation() {
        // The facet for S evaluated at γ equals <γ|W_opt(S)|γ>.
        let s = shape(&[2, 3, 4]);
        let locals = vec![
            vec![c64(0.8), c64(0.6)],
            vec![c64(0.0), Complex64::new(0.6, 0.0), c64(0.8)],
            vec![c64(0.5), c64(-0.5), c64(0.5), Complex64::new(0.0, 0.5)],
        ];
        let p = coordinates_of(&s, &locals).unwrap();
        let g = StateVector::product(&locals).unwrap();
        for (h, sub) in halfspaces(&s).iter().zip(Subset::proper_subsets(3)) {
            let w = optimal_witness(&s, sub, 1.0).unwrap();
            let e = expectation(&w, &g).unwrap();
            assert!((h.slack_f64(&p) - e).abs() < 1e-12);
        }
    }
}
