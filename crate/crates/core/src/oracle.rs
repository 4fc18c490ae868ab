//! Brute-force product-state oracle: random sampling and see-saw
//! minimization of `<γ|W|γ>` over pure product states.
//!
//! Restart `k` of a run with seed `s` draws from ChaCha8 seeded with `s` on
//! stream `k`, so results do not depend on scheduling.

use num_complex::Complex64;
use num_traits::Zero;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::exact::{to_f64, Rational};
use crate::lp::{assemble_lp, solve};
use crate::region::{halfspaces, CoordinateMap, HalfSpace};
use crate::subset::Subset;
use crate::tensor::{eigen, CMatrix, Operator, Shape, HERMITIAN_TOL};
use crate::witness::{build_witness, optimal_witness, WitnessParams};

/// Identifier recorded in reports.
pub const RNG_ALGORITHM: &str = "chacha8/seed+stream-per-restart";

/// Slack allowed when checking that a sweep did not increase the objective.
const MONOTONE_SLACK: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SampleConfig {
    pub seed: u64,
    /// Number of random restarts (or samples).
    pub samples: usize,
    /// Maximum see-saw sweeps per restart.
    pub seesaw_iters: usize,
    /// Stop a restart once a sweep improves by less than this.
    pub tol: f64,
}

impl Default for SampleConfig {
    fn default() -> Self {
        SampleConfig {
            seed: 0,
            samples: 1000,
            seesaw_iters: 200,
            tol: 1e-12,
        }
    }
}

/// Generator for restart `index`.
pub fn restart_rng(seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

/// Local vectors with independent standard complex Gaussian components,
/// normalized.
pub fn random_product_state<R: Rng + ?Sized>(shape: &Shape, rng: &mut R) -> Vec<Vec<Complex64>> {
    shape
        .dims()
        .as_slice()
        .iter()
        .map(|&d| random_unit_vector(d, rng))
        .collect()
}

pub fn random_unit_vector<R: Rng + ?Sized>(d: usize, rng: &mut R) -> Vec<Complex64> {
    loop {
        let v: Vec<Complex64> = (0..d)
            .map(|_| Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 1e-300 {
            return v.into_iter().map(|z| z / norm).collect();
        }
    }
}

/// Random density matrix `G G† / Tr(G G†)` with Gaussian `G`.
pub fn random_density<R: Rng + ?Sized>(dims: &crate::tensor::Dims, rng: &mut R) -> Result<Operator> {
    let d = dims.total();
    let g = CMatrix::from_fn(d, |_, _| {
        Complex64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let m = &g * &g.adjoint();
    let t = m.trace().re;
    Operator::new(dims.clone(), m.scale_real(1.0 / t))
}

/// Non-zero entries of a Hermitian operator, with the row and column digit
/// strings precomputed.
pub struct SparseOperator {
    dims: Vec<usize>,
    entries: Vec<(Vec<usize>, Vec<usize>, Complex64)>,
}

impl SparseOperator {
    pub fn new(op: &Operator) -> Result<Self> {
        let dev = op.matrix().hermitian_deviation();
        if dev > HERMITIAN_TOL {
            return Err(Error::NotHermitian(dev));
        }
        let dims = op.dims();
        let d = dims.total();
        let mut entries = Vec::new();
        for r in 0..d {
            for c in 0..d {
                let z = op.get(r, c);
                if !z.is_zero() {
                    entries.push((dims.digits(r), dims.digits(c), z));
                }
            }
        }
        Ok(SparseOperator {
            dims: dims.as_slice().to_vec(),
            entries,
        })
    }

    pub fn expectation(&self, locals: &[Vec<Complex64>]) -> f64 {
        let mut acc = Complex64::zero();
        for (r, c, z) in &self.entries {
            let mut w = *z;
            for (k, v) in locals.iter().enumerate() {
                w *= v[r[k]].conj() * v[c[k]];
            }
            acc += w;
        }
        acc.re
    }

    /// `<γ_{-k}| W |γ_{-k}>` as a `d_k × d_k` matrix.
    pub fn conditioned(&self, locals: &[Vec<Complex64>], k: usize) -> CMatrix {
        let dk = self.dims[k];
        let mut m = CMatrix::zeros(dk);
        for (r, c, z) in &self.entries {
            let mut w = *z;
            for (j, v) in locals.iter().enumerate() {
                if j != k {
                    w *= v[r[j]].conj() * v[c[j]];
                }
            }
            m[(r[k], c[k])] += w;
        }
        m
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeesawRun {
    pub value: f64,
    pub locals: Vec<Vec<Complex64>>,
    pub sweeps: usize,
    /// No sweep increased the objective by more than round-off.
    pub monotone: bool,
}

/// Alternating minimization from `start`: each local vector in turn becomes
/// the minimal eigenvector of the operator conditioned on the others.
pub fn seesaw_from(w: &SparseOperator, start: Vec<Vec<Complex64>>, cfg: &SampleConfig) -> SeesawRun {
    let mut locals = start;
    let mut value = w.expectation(&locals);
    let mut monotone = true;
    let mut sweeps = 0;
    for _ in 0..cfg.seesaw_iters {
        sweeps += 1;
        let before = value;
        for k in 0..locals.len() {
            let m = w.conditioned(&locals, k);
            let (_, v) = eigen::min_eigenpair(&m);
            locals[k] = v;
        }
        value = w.expectation(&locals);
        if value > before + MONOTONE_SLACK * (1.0 + before.abs()) {
            monotone = false;
        }
        if before - value < cfg.tol {
            break;
        }
    }
    SeesawRun {
        value,
        locals,
        sweeps,
        monotone,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct OracleReport {
    pub rng: &'static str,
    pub restarts: usize,
    pub min_value: f64,
    pub argmin: Vec<Vec<Complex64>>,
    /// Smallest slack of each feasible-region half-space over all sampled
    /// and converged states (empty when no constraints were supplied).
    pub constraint_min_slack: Vec<f64>,
    /// Smallest and largest coordinate seen.
    pub coordinate_range: Option<(f64, f64)>,
    pub violations: Vec<String>,
}

/// Optional feasible-region bookkeeping during a run.
pub struct RegionProbe<'a> {
    pub map: &'a CoordinateMap,
    pub halfspaces: &'a [HalfSpace],
}

/// Best see-saw value over `cfg.samples` random restarts.
pub fn seesaw_min(w: &Operator, shape: &Shape, cfg: &SampleConfig) -> Result<OracleReport> {
    seesaw_min_probed(w, shape, cfg, None)
}

pub fn seesaw_min_probed(
    w: &Operator,
    shape: &Shape,
    cfg: &SampleConfig,
    probe: Option<RegionProbe<'_>>,
) -> Result<OracleReport> {
    if w.dims() != shape.dims() {
        return Err(Error::ShapeMismatch {
            expected: shape.dims().to_string(),
            found: w.dims().to_string(),
        });
    }
    let sparse = SparseOperator::new(w)?;
    let mut best: Option<SeesawRun> = None;
    let mut violations = Vec::new();
    let mut slack = probe
        .as_ref()
        .map(|p| vec![f64::INFINITY; p.halfspaces.len()])
        .unwrap_or_default();
    let mut range: Option<(f64, f64)> = None;
    let mut record = |locals: &[Vec<Complex64>], what: &str, violations: &mut Vec<String>| {
        let Some(p) = probe.as_ref() else { return };
        let coords = match p.map.coordinates(locals) {
            Ok(c) => c,
            Err(e) => {
                violations.push(format!("{what}: {e}"));
                return;
            }
        };
        for &x in &coords {
            range = Some(match range {
                Some((lo, hi)) => (lo.min(x), hi.max(x)),
                None => (x, x),
            });
        }
        for (i, h) in p.halfspaces.iter().enumerate() {
            let s = h.slack_f64(&coords);
            slack[i] = slack[i].min(s);
            if s < -1e-9 {
                violations.push(format!("{what} violates {} (slack {s:e})", h.label));
            }
        }
    };
    for k in 0..cfg.samples {
        let mut rng = restart_rng(cfg.seed, k as u64);
        let start = random_product_state(shape, &mut rng);
        record(&start, &format!("restart {k} start"), &mut violations);
        let run = seesaw_from(&sparse, start, cfg);
        record(&run.locals, &format!("restart {k} end"), &mut violations);
        if !run.monotone {
            violations.push(format!("restart {k}: see-saw objective increased"));
        }
        if best.as_ref().is_none_or(|b| run.value < b.value) {
            best = Some(run);
        }
    }
    let best = best.ok_or_else(|| Error::InvalidParams("at least one restart is required".into()))?;
    if let Some((lo, hi)) = range {
        if lo < -1e-12 || hi > 1.0 + 1e-12 {
            violations.push(format!("coordinates leave [0, 1]: range [{lo}, {hi}]"));
        }
    }
    Ok(OracleReport {
        rng: RNG_ALGORITHM,
        restarts: cfg.samples,
        min_value: best.value,
        argmin: best.locals,
        constraint_min_slack: slack,
        coordinate_range: range,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct CrossReport {
    pub lp_min: Rational,
    pub oracle: OracleReport,
    /// `seesaw_min - lp_min`.
    pub gap: f64,
    /// `seesaw_min >= lp_min - tol`.
    pub lower_bound_ok: bool,
    /// `|seesaw_min - lp_min| <= tol`.
    pub tight: bool,
    pub violations: Vec<String>,
}

impl CrossReport {
    pub fn ok(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Compares the exact LP minimum with the see-saw minimum and checks every
/// visited product state against the feasible-region half-spaces.
pub fn cross_validate(params: &WitnessParams, cfg: &SampleConfig, tol: f64) -> Result<CrossReport> {
    cross_validate_with(params, cfg, tol, &halfspaces(params.shape()))
}

/// As [`cross_validate`], against a caller-supplied constraint set.
pub fn cross_validate_with(
    params: &WitnessParams,
    cfg: &SampleConfig,
    tol: f64,
    constraints: &[HalfSpace],
) -> Result<CrossReport> {
    let shape = params.shape();
    let lp_min = solve(&assemble_lp(params))?.value;
    let w = build_witness(params)?;
    let map = CoordinateMap::new(shape);
    let probe = RegionProbe {
        map: &map,
        halfspaces: constraints,
    };
    let oracle = seesaw_min_probed(&w, shape, cfg, Some(probe))?;
    let lp = to_f64(&lp_min);
    let gap = oracle.min_value - lp;
    let lower_bound_ok = gap >= -tol;
    let tight = gap.abs() <= tol;
    let mut violations = oracle.violations.clone();
    if !lower_bound_ok {
        violations.push(format!(
            "see-saw found {} below the exact minimum {lp}",
            oracle.min_value
        ));
    }
    if !tight {
        violations.push(format!(
            "see-saw minimum {} differs from the exact minimum {lp} by {gap:e}",
            oracle.min_value
        ));
    }
    Ok(CrossReport {
        lp_min,
        oracle,
        gap,
        lower_bound_ok,
        tight,
        violations,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct Probe {
    pub label: String,
    pub min_value: f64,
    /// The perturbation is a positive multiple of the witness itself, so a
    /// non-negative minimum is expected rather than a failure.
    pub allowed_direction: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OptimalityReport {
    pub subset: Subset,
    pub eps: f64,
    /// Unperturbed see-saw minimum.
    pub base_min: f64,
    /// Converged restarts with `<γ|W_opt|γ> < tol`.
    pub zero_set_hits: usize,
    pub probes: Vec<Probe>,
}

impl OptimalityReport {
    /// Every random-PSD probe outside the allowed direction went negative.
    pub fn all_destroyed(&self) -> bool {
        self.probes
            .iter()
            .filter(|p| !p.allowed_direction && p.label.starts_with("random"))
            .all(|p| p.min_value < 0.0)
    }
}

/// `|<A, B>| / (|A| |B|)` close to one.
fn proportional(a: &Operator, b: &Operator) -> bool {
    let (x, y) = (a.matrix(), b.matrix());
    let ip: Complex64 = x
        .as_slice()
        .iter()
        .zip(y.as_slice())
        .map(|(p, q)| p.conj() * q)
        .sum();
    let denom = x.frobenius_norm() * y.frobenius_norm();
    denom > 0.0 && (ip.norm() / denom - 1.0).abs() < 1e-9
}

/// Subtracting `eps P` from an optimal witness, for `n_random` random
/// density matrices `P`, should leave an operator that is negative on some
/// product state. Also probes `P = 0` and the scaling direction `P ∝ W_opt`.
pub fn seesaw_optimality(
    shape: &Shape,
    s: Subset,
    cfg: &SampleConfig,
    eps: f64,
    n_random: usize,
) -> Result<OptimalityReport> {
    let w = optimal_witness(shape, s, 1.0)?;
    let base = seesaw_min(&w, shape, cfg)?;
    let sparse = SparseOperator::new(&w)?;
    let mut zero_set_hits = 0;
    for k in 0..cfg.samples {
        let mut rng = restart_rng(cfg.seed, k as u64);
        let run = seesaw_from(&sparse, random_product_state(shape, &mut rng), cfg);
        if run.value < 1e-9 {
            zero_set_hits += 1;
        }
    }
    let mut probes = Vec::new();
    probes.push(Probe {
        label: "zero".into(),
        min_value: base.min_value,
        allowed_direction: true,
    });
    let unit_w = w.scale(1.0 / w.matrix().frobenius_norm());
    let scaled = w.add_scaled(-eps, &unit_w)?;
    probes.push(Probe {
        label: "scaling".into(),
        min_value: seesaw_min(&scaled, shape, cfg)?.min_value,
        allowed_direction: true,
    });
    let mut prng = restart_rng(cfg.seed ^ 0x5eed_0f9d, s.bits());
    for j in 0..n_random {
        let p = random_density(shape.dims(), &mut prng)?;
        let perturbed = w.add_scaled(-eps, &p)?;
        let sub_cfg = SampleConfig {
            seed: cfg.seed.wrapping_add(j as u64 + 1),
            ..*cfg
        };
        probes.push(Probe {
            label: format!("random {j}"),
            min_value: seesaw_min(&perturbed, shape, &sub_cfg)?.min_value,
            allowed_direction: proportional(&p, &w),
        });
    }
    Ok(OptimalityReport {
        subset: s,
        eps,
        base_min: base.min_value,
        zero_set_hits,
        probes,
    })
}
