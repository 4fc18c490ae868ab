use std::fmt;
use std::path::Path;

use rewit::bell_diagonal::{
    build_w2, w1_apexes, w1_lp, w1_lp_problem, w1_optimal_certificate, w2_constraint_check,
    W1Params,
};
use rewit::choi::{closed_form_map, factor_witness, positivity_sample_check, tensor_witness, FactorParams, MapSpec};
use rewit::detection::{decomposability_verdict, ppt_all};
use rewit::exact::{format_rational, parse_rational};
use rewit::io::{operator_from_json, operator_to_json, params_from_json, state_from_json};
use rewit::lp::{assemble_lp, classify, min_over_apexes, solve};
use rewit::oracle::{cross_validate, seesaw_min, SampleConfig};
use rewit::region::{enumerate_apexes, halfspaces, Layout};
use rewit::regression::run_regressions;
use rewit::tensor::{expectation, expectation_rho, hermitian_eigenvalues, Operator};
use rewit::witness::{build_witness, decompose, spectrum};
use rewit::{Dims, Error, Shape, WitnessParams};
use serde_json::{json, Value};

use crate::report::{approx, exact, exact_vec, ha, hvec, hx, Report};
use crate::{BdMode, Command, MapArgs};

/// Largest Hilbert-space dimension for which `spectrum` cross-checks with
/// the dense eigensolver.
const NUMERIC_SPECTRUM_LIMIT: usize = 512;

#[derive(Debug)]
pub enum CliError {
    Input(String),
    Assertion(String),
}

impl CliError {
    pub fn code(&self) -> u8 {
        match self {
            CliError::Assertion(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Input(s) | CliError::Assertion(s) => f.write_str(s),
        }
    }
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::Infeasible(_) | Error::Unbounded | Error::NotPositive(_) => {
                CliError::Assertion(e.to_string())
            }
            _ => CliError::Input(e.to_string()),
        }
    }
}

type CliResult<T> = std::result::Result<T, CliError>;

fn read(path: &Path) -> CliResult<String> {
    std::fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))
}

fn load_params(path: &Path) -> CliResult<WitnessParams> {
    Ok(params_from_json(&read(path)?)?)
}

/// A state file holds either a ket (`d` entries) or a density matrix
/// (`d*d` entries); both use the operator file layout.
enum Loaded {
    Ket(rewit::StateVector),
    Rho(Operator),
}

fn load_state(path: &Path) -> CliResult<Loaded> {
    let text = read(path)?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::Input(format!("parse error in `{}`: {e}", path.display())))?;
    let n = v["entries"].as_array().map_or(0, |a| a.len());
    let total: usize = v["dims"]
        .as_array()
        .map_or(0, |d| d.iter().filter_map(|x| x.as_u64()).product::<u64>() as usize);
    if n == total {
        Ok(Loaded::Ket(state_from_json(&text)?))
    } else {
        Ok(Loaded::Rho(operator_from_json(&text)?))
    }
}

fn shape_label(shape: &Shape) -> String {
    shape.to_string()
}

fn ppt_json(flags: &[(Vec<usize>, bool)]) -> Value {
    Value::Array(
        flags
            .iter()
            .map(|(p, ok)| json!({ "transposed": p, "psd": ok }))
            .collect(),
    )
}

fn ppt_human(flags: &[(Vec<usize>, bool)]) -> String {
    flags
        .iter()
        .map(|(p, ok)| format!("{p:?}:{}", if *ok { "psd" } else { "not psd" }))
        .collect::<Vec<_>>()
        .join(" ")
}

pub fn run(cmd: &Command) -> CliResult<Report> {
    match cmd {
        Command::Build { params } => build(&load_params(params)?),
        Command::Spectrum { params } => spectrum_cmd(&load_params(params)?),
        Command::Apexes { dims } => apexes(dims),
        Command::Lp { params } => lp(&load_params(params)?),
        Command::Classify { params } => classify_cmd(&load_params(params)?),
        Command::Detect { params, state } => detect(&load_params(params)?, state.as_deref()),
        Command::Bd { mode } => bd(mode),
        Command::Map(args) => map(args),
        Command::Oracle { params, knobs } => oracle(
            &load_params(params)?,
            &SampleConfig {
                seed: knobs.seed,
                samples: knobs.samples,
                seesaw_iters: knobs.seesaw_iters,
                tol: knobs.tol,
            },
            knobs.tol,
        ),
        Command::Reproduce => reproduce(),
    }
}

fn build(p: &WitnessParams) -> CliResult<Report> {
    let w = build_witness(p)?;
    let mut r = Report::new("build");
    r.line(format!("witness on {} (dimension {})", shape_label(p.shape()), w.dim()));
    r.line(format!("trace {}", ha(w.trace().re)));
    for row in 0..w.dim() {
        for col in 0..w.dim() {
            let z = w.get(row, col);
            if z.norm() > 0.0 {
                r.line(format!("  [{row},{col}] {:+.12} {:+.12}i", z.re, z.im));
            }
        }
    }
    let file: Value = serde_json::from_str(&operator_to_json(&w)).expect("own output");
    r.raw(file);
    Ok(r)
}

fn spectrum_cmd(p: &WitnessParams) -> CliResult<Report> {
    let sp = spectrum(p);
    let mut r = Report::new("spectrum");
    let mut rows = Vec::new();
    r.line(format!("spectrum of the witness on {}", shape_label(p.shape())));
    let blocks = [("a", &sp.a_values), ("a+a'", &sp.a_plus_aprime)];
    for (kind, list) in blocks {
        for e in list {
            let s = e.subset.map_or("-".to_string(), |s| s.label());
            r.line(format!("  {kind:<5} S={s:<6} {} x{}", hx(&e.value), e.multiplicity));
            rows.push(json!({
                "kind": kind,
                "subset": e.subset.map(|s| s.to_string()),
                "value": exact(&e.value),
                "multiplicity": e.multiplicity,
            }));
        }
    }
    r.line(format!("  omega1 {} x{}", hx(&sp.omega1), sp.omega1_multiplicity));
    r.line(format!("  omega2 {} x1", hx(&sp.omega2)));
    r.field("eigenvalues", Value::Array(rows))
        .field("omega1", exact(&sp.omega1))
        .field("omega1_multiplicity", json!(sp.omega1_multiplicity))
        .field("omega2", exact(&sp.omega2));

    if p.shape().total() <= NUMERIC_SPECTRUM_LIMIT {
        let mut numeric = hermitian_eigenvalues(&build_witness(p)?)?;
        numeric.sort_by(f64::total_cmp);
        let want = sp.multiset();
        let dev = if numeric.len() == want.len() {
            numeric.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max)
        } else {
            f64::INFINITY
        };
        r.line(format!("numeric eigensolver deviation {}", ha(dev)));
        r.field("numeric_deviation", approx(dev));
        r.check(dev <= 1e-9, format!("closed-form spectrum deviates from numeric by {dev:e}"));
    }
    Ok(r)
}

fn apexes(dims: &[usize]) -> CliResult<Report> {
    let shape = Shape::new(dims.to_vec())?;
    let names = Layout::new(&shape).names();
    let list = enumerate_apexes(&shape);
    let mut r = Report::new("apexes");
    r.line(format!("{:<10} {}", "generator", names.join(" ")));
    let mut rows = Vec::new();
    for a in &list {
        let pt: Vec<String> = a.point.iter().map(format_rational).collect();
        r.line(format!("{:<10} {}", a.ket(), pt.join(" ")));
        rows.push(json!({ "generator": a.generator, "point": exact_vec(&a.point) }));
    }
    let facets: Vec<String> = halfspaces(&shape).iter().map(|h| h.render(&names)).collect();
    r.line("facets:");
    for f in &facets {
        r.line(format!("  {f}"));
    }
    r.field("dims", json!(dims))
        .field("coordinates", json!(names))
        .field("apexes", Value::Array(rows))
        .field("facets", json!(facets));
    Ok(r)
}

fn lp(p: &WitnessParams) -> CliResult<Report> {
    let problem = assemble_lp(p);
    let sol = solve(&problem)?;
    let c = classify(p)?;
    let mut r = Report::new("lp");
    r.line(format!("minimum {}", hx(&sol.value)));
    r.line(format!("vertex {} over ({})", hvec(&sol.vertex), problem.names.join(", ")));
    r.line(format!("pivots {}", sol.pivots));
    r.line(format!(
        "entanglement witness: {} (min >= 0: {}, negative eigenvalue: {})",
        c.is_ew, c.positive_on_separables, c.negative_eigenvalue
    ));
    r.field("minimum", exact(&sol.value))
        .field("vertex", exact_vec(&sol.vertex))
        .field("coordinates", json!(problem.names))
        .field("duals", exact_vec(&sol.duals))
        .field("pivots", json!(sol.pivots))
        .field("is_ew", json!(c.is_ew));
    r.check(sol.certify(&problem), "dual certificate does not verify");
    if let Some(ap) = &problem.apexes {
        if let Some((v, _)) = min_over_apexes(&problem.objective, &problem.constant, ap) {
            r.check(v == sol.value, format!("apex enumeration gives {}", format_rational(&v)));
        }
    }
    Ok(r)
}

fn classify_cmd(p: &WitnessParams) -> CliResult<Report> {
    let c = classify(p)?;
    let d = decompose(p);
    let mut r = Report::new("classify");
    r.line(format!("product-state minimum {} at {}", hx(&c.lp_min), hvec(&c.minimizer)));
    r.line(format!("positive on separable states: {}", c.positive_on_separables));
    r.line(format!("coefficient condition: {}", c.coefficient_condition));
    r.line(format!("negative eigenvalue: {}", c.negative_eigenvalue));
    r.line(format!("entanglement witness: {}", c.is_ew));
    r.line(format!(
        "decomposition: psi coefficient {}, omega2 {}, certified decomposable {}",
        hx(&d.psi_coefficient),
        hx(&d.omega2),
        d.certified_decomposable
    ));
    let terms = |t: &[(rewit::Subset, rewit::Rational)]| -> Value {
        Value::Array(t.iter().map(|(s, q)| json!({ "subset": s.to_string(), "coefficient": exact(q) })).collect())
    };
    r.field("lp_min", exact(&c.lp_min))
        .field("minimizer", exact_vec(&c.minimizer))
        .field("positive_on_separables", json!(c.positive_on_separables))
        .field("coefficient_condition", json!(c.coefficient_condition))
        .field("negative_eigenvalue", json!(c.negative_eigenvalue))
        .field("is_ew", json!(c.is_ew))
        .field(
            "decomposition",
            json!({
                "optimal_terms": terms(&d.optimal_terms),
                "psi_coefficient": exact(&d.psi_coefficient),
                "prime_terms": terms(&d.prime_terms),
                "omega2": exact(&d.omega2),
                "certified_decomposable": d.certified_decomposable,
            }),
        );
    Ok(r)
}

fn detect(p: &WitnessParams, state: Option<&Path>) -> CliResult<Report> {
    let d = decomposability_verdict(p)?;
    let mut r = Report::new("detect");
    r.line(format!("omega1 {}  omega2 {}  varpi {}", hx(&d.omega1), hx(&d.omega2), hx(&d.varpi)));
    r.line(format!("<psi_0|W|psi_0> {}", ha(d.expectation)));
    r.line(format!("boundary state PPT flags: {}", ppt_human(&d.ppt_flags)));
    r.line(format!("verdict: {} ({} ratios tried)", d.verdict.as_str(), d.ratios_tried));
    let cert = d.certificate.as_ref().map(|c| {
        r.line(format!(
            "certificate: B={} D={} Tr(W rho)={} PPT {}",
            c.b,
            c.d,
            ha(c.expectation),
            ppt_human(&c.ppt_flags)
        ));
        json!({
            "b": approx(c.b),
            "d": approx(c.d),
            "ppt_flags": ppt_json(&c.ppt_flags),
            "expectation": approx(c.expectation),
        })
    });
    if let Some(c) = &d.certificate {
        r.check(c.is_valid(), "certificate is not a PPT state with negative expectation");
    }
    r.field("omega1", exact(&d.omega1))
        .field("omega2", exact(&d.omega2))
        .field("varpi", exact(&d.varpi))
        .field("expectation", approx(d.expectation))
        .field("ppt_flags", ppt_json(&d.ppt_flags))
        .field("verdict", json!(d.verdict.as_str()))
        .field("certificate", cert.unwrap_or(Value::Null))
        .field("ratios_tried", json!(d.ratios_tried));

    if let Some(path) = state {
        let w = build_witness(p)?;
        let (value, flags) = match load_state(path)? {
            Loaded::Ket(v) => (expectation(&w, &v)?, ppt_all(&Operator::projector(&v))?),
            Loaded::Rho(rho) => (expectation_rho(&w, &rho)?, ppt_all(&rho)?),
        };
        r.line(format!("supplied state: Tr(W rho) {} PPT {}", ha(value), ppt_human(&flags)));
        r.field(
            "state",
            json!({ "expectation": approx(value), "ppt_flags": ppt_json(&flags), "detected": value < 0.0 }),
        );
    }
    Ok(r)
}

fn bd(mode: &BdMode) -> CliResult<Report> {
    match mode {
        BdMode::W1 { n, a, b, c, d } => {
            let q = |field: &str, s: &str| {
                parse_rational(s).map_err(|e| CliError::Input(format!("parse error in field `{field}`: {e}")))
            };
            let p = W1Params { n: *n, a: q("a", a)?, b: q("b", b)?, c: q("c", c)?, d: q("d", d)? };
            let problem = w1_lp_problem(&p)?;
            let sol = w1_lp(&p)?;
            let ap = w1_apexes(*n)?;
            let (enum_min, _) = min_over_apexes(&problem.objective, &problem.constant, &ap)
                .ok_or_else(|| CliError::Assertion("no apexes".into()))?;
            let cert = w1_optimal_certificate(*n)?;
            let mut r = Report::new("bd");
            r.line(format!("W1 on {n} qubits"));
            r.line(format!("product-state minimum {} at {}", hx(&sol.value), hvec(&sol.vertex)));
            r.line(format!("apex enumeration minimum {}", hx(&enum_min)));
            r.line(format!("optimal-witness certificate exact: {}", cert.exact_match()));
            r.field("mode", json!("w1"))
                .field("n", json!(n))
                .field("minimum", exact(&sol.value))
                .field("vertex", exact_vec(&sol.vertex))
                .field("coordinates", json!(problem.names))
                .field("apex_minimum", exact(&enum_min))
                .field("certificate_exact", json!(cert.exact_match()));
            r.check(enum_min == sol.value, "simplex and apex enumeration disagree");
            r.check(cert.exact_match(), "optimal-witness certificate mismatch");
            Ok(r)
        }
        BdMode::W2 { n, a, b, c, samples, seed } => {
            let rep = w2_constraint_check(*n, *samples, *seed)?;
            let mut r = Report::new("bd");
            r.line(format!("W2 region on {n} qubits: {} samples, {} violations", rep.samples, rep.violations));
            r.line(format!("min slack {} / {}", ha(rep.min_slack[0]), ha(rep.min_slack[1])));
            r.field("mode", json!("w2"))
                .field("n", json!(n))
                .field("samples", json!(rep.samples))
                .field("violations", json!(rep.violations))
                .field("min_slack", json!([approx(rep.min_slack[0]), approx(rep.min_slack[1])]));
            r.check(rep.violations == 0, format!("{} sampled points outside the region", rep.violations));
            if let (Some(a), Some(b), Some(c)) = (a, b, c) {
                let w = build_w2(*n, *a, *b, *c)?;
                let shape = Shape::new(vec![2; *n])?;
                let cfg = SampleConfig { seed: *seed, samples: (*samples).min(200), ..SampleConfig::default() };
                let o = seesaw_min(&w, &shape, &cfg)?;
                r.line(format!("see-saw product minimum {}", ha(o.min_value)));
                r.field("seesaw_min", approx(o.min_value));
            }
            Ok(r)
        }
    }
}

fn parse_factor(s: &str) -> CliResult<FactorParams> {
    let bad = |why: String| CliError::Input(format!("parse error in field `factor` ({s}): {why}"));
    let parts: Vec<&str> = s.split(',').map(str::trim).collect();
    if parts.len() != 5 {
        return Err(bad("expected d,d_out,a1,a2,a1'".into()));
    }
    let int = |x: &str| x.parse::<usize>().map_err(|e| bad(e.to_string()));
    let float = |x: &str| x.parse::<f64>().map_err(|e| bad(e.to_string()));
    Ok(FactorParams {
        d: int(parts[0])?,
        d_out: int(parts[1])?,
        a1: float(parts[2])?,
        a2: float(parts[3])?,
        a1_prime: float(parts[4])?,
    })
}

fn map(args: &MapArgs) -> CliResult<Report> {
    let factors = args.factors.iter().map(|s| parse_factor(s)).collect::<CliResult<Vec<_>>>()?;
    let spec = match &args.witness {
        Some(path) => {
            let w = operator_from_json(&read(path)?)?;
            let input = Dims::new(args.input_dims.clone().unwrap_or_default())?;
            let output = Dims::new(args.output_dims.clone().unwrap_or_default())?;
            MapSpec::new(input, output, w)?
        }
        None if !factors.is_empty() => {
            let specs = factors.iter().map(factor_witness).collect::<Result<Vec<_>, _>>()?;
            tensor_witness(&specs)?
        }
        None => return Err(CliError::Input("map needs --witness or at least one --factor".into())),
    };
    let rho = operator_from_json(&read(&args.rho)?)?;
    let out = spec.apply(&rho)?;
    let mut r = Report::new("map");
    r.line(format!("map {} -> {}", spec.input(), spec.output()));
    r.line(format!("Tr E(rho) {}", ha(out.trace().re)));
    let min_ev = hermitian_eigenvalues(&out)?.into_iter().fold(f64::INFINITY, f64::min);
    r.line(format!("min eigenvalue of E(rho) {}", ha(min_ev)));
    let image: Value = serde_json::from_str(&operator_to_json(&out)).expect("own output");
    r.field("image", image).field("min_eigenvalue", approx(min_ev));
    if !factors.is_empty() {
        let closed = closed_form_map(&factors, &rho)?;
        let dev = closed.max_abs_diff(&out)?;
        r.line(format!("closed-form deviation {}", ha(dev)));
        r.field("closed_form_deviation", approx(dev));
        r.check(dev <= args.tol, format!("closed form deviates by {dev:e}"));
    }
    if args.samples > 0 {
        let pos = positivity_sample_check(&spec, args.samples, args.seed)?;
        r.line(format!(
            "positivity: {} samples, {} violations, min eigenvalue {}",
            pos.samples,
            pos.violations,
            ha(pos.min_eigenvalue)
        ));
        r.field(
            "positivity",
            json!({ "samples": pos.samples, "violations": pos.violations, "min_eigenvalue": approx(pos.min_eigenvalue) }),
        );
        r.check(pos.violations == 0, format!("{} states mapped to non-positive output", pos.violations));
    }
    Ok(r)
}

fn oracle(p: &WitnessParams, cfg: &SampleConfig, tol: f64) -> CliResult<Report> {
    let x = cross_validate(p, cfg, tol)?;
    let o = &x.oracle;
    let mut r = Report::new("oracle");
    r.line(format!("rng {} seed {}, {} restarts", o.rng, cfg.seed, o.restarts));
    r.line(format!("see-saw minimum {}", ha(o.min_value)));
    r.line(format!("exact minimum {}", hx(&x.lp_min)));
    r.line(format!("gap {}  lower bound ok {}  tight {}", ha(x.gap), x.lower_bound_ok, x.tight));
    for v in x.violations.iter().chain(&o.violations) {
        r.line(format!("  violation: {v}"));
    }
    let argmin: Vec<Vec<[f64; 2]>> = o
        .argmin
        .iter()
        .map(|v| v.iter().map(|z| [z.re, z.im]).collect())
        .collect();
    r.field("rng", json!(o.rng))
        .field("seed", json!(cfg.seed))
        .field("restarts", json!(o.restarts))
        .field("seesaw_min", approx(o.min_value))
        .field("argmin", json!(argmin))
        .field("lp_min", exact(&x.lp_min))
        .field("gap", approx(x.gap))
        .field("lower_bound_ok", json!(x.lower_bound_ok))
        .field("tight", json!(x.tight))
        .field("constraint_min_slack", json!(o.constraint_min_slack.iter().map(|&s| approx(s)).collect::<Vec<_>>()))
        .field("violations", json!(x.violations.iter().chain(&o.violations).collect::<Vec<_>>()));
    r.check(x.lower_bound_ok, "see-saw went below the exact minimum");
    r.check(o.violations.is_empty(), "sampled coordinates left the feasible region");
    Ok(r)
}

fn reproduce() -> CliResult<Report> {
    let checks = run_regressions()?;
    let mut r = Report::new("reproduce");
    let mut rows = Vec::new();
    for c in &checks {
        r.line(format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        rows.push(json!({ "name": c.name, "passed": c.passed, "detail": c.detail }));
        r.check(c.passed, c.name.clone());
    }
    r.field("checks", Value::Array(rows));
    Ok(r)
}
