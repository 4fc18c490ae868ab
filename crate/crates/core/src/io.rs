//! JSON file formats (schema version 1).
//!
//! Witness parameters:
//! ```json
//! {"version": 1, "dims": [2, 2, 2],
//!  "a": {"": "1", "2": "1", "3": "1"}, "a_full": "1", "a_prime": {}}
//! ```
//! `a` and `a_prime` are keyed by comma-joined particle labels (`""` is the
//! empty set). Values are exact rationals written as `"p/q"` or decimals.
//!
//! Operators and states share one layout: `dims` plus row-major `entries`
//! of `[re, im]` pairs.

use std::collections::BTreeMap;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::exact::{format_rational, parse_rational, Rational};
use crate::subset::Subset;
use crate::tensor::{CMatrix, Dims, Operator, Shape, StateVector};
use crate::witness::WitnessParams;

pub const SCHEMA_VERSION: u32 = 1;

fn version() -> u32 {
    SCHEMA_VERSION
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ParamsFile {
    #[serde(default = "version")]
    pub version: u32,
    pub dims: Vec<usize>,
    pub a: BTreeMap<String, String>,
    pub a_full: String,
    #[serde(default)]
    pub a_prime: BTreeMap<String, String>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MatrixFile {
    #[serde(default = "version")]
    pub version: u32,
    pub dims: Vec<usize>,
    pub entries: Vec<[f64; 2]>,
}

fn check_version(v: u32) -> Result<()> {
    if v != SCHEMA_VERSION {
        return Err(Error::parse("version", format!("unsupported schema version {v}")));
    }
    Ok(())
}

fn json_err(e: serde_json::Error) -> Error {
    Error::parse("json", e.to_string())
}

fn rational_map(
    field: &str,
    m: &BTreeMap<String, String>,
) -> Result<BTreeMap<Subset, Rational>> {
    m.iter()
        .map(|(k, v)| {
            let s: Subset = k
                .parse()
                .map_err(|e: Error| Error::parse(format!("{field}[{k}]"), e.to_string()))?;
            let q = parse_rational(v)
                .map_err(|e| Error::parse(format!("{field}[{k}]"), e.to_string()))?;
            Ok((s, q))
        })
        .collect()
}

impl ParamsFile {
    pub fn from_params(p: &WitnessParams) -> Self {
        let enc = |m: &BTreeMap<Subset, Rational>| {
            m.iter()
                .map(|(s, q)| (s.to_string(), format_rational(q)))
                .collect()
        };
        ParamsFile {
            version: SCHEMA_VERSION,
            dims: p.shape().dims().as_slice().to_vec(),
            a: enc(&p.a),
            a_full: format_rational(&p.a_full),
            a_prime: enc(&p.a_prime),
        }
    }

    pub fn to_params(&self) -> Result<WitnessParams> {
        check_version(self.version)?;
        let shape = Shape::new(self.dims.clone()).map_err(|e| Error::parse("dims", e.to_string()))?;
        let a_full =
            parse_rational(&self.a_full).map_err(|e| Error::parse("a_full", e.to_string()))?;
        WitnessParams::new(
            shape,
            rational_map("a", &self.a)?,
            a_full,
            rational_map("a_prime", &self.a_prime)?,
        )
    }
}

pub fn params_to_json(p: &WitnessParams) -> String {
    serde_json::to_string_pretty(&ParamsFile::from_params(p)).expect("plain data")
}

pub fn params_from_json(s: &str) -> Result<WitnessParams> {
    serde_json::from_str::<ParamsFile>(s)
        .map_err(json_err)?
        .to_params()
}

fn encode(z: &[Complex64]) -> Vec<[f64; 2]> {
    z.iter().map(|c| [c.re, c.im]).collect()
}

fn decode(e: &[[f64; 2]]) -> Vec<Complex64> {
    e.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
}

pub fn operator_to_json(op: &Operator) -> String {
    let f = MatrixFile {
        version: SCHEMA_VERSION,
        dims: op.dims().as_slice().to_vec(),
        entries: encode(op.matrix().as_slice()),
    };
    serde_json::to_string(&f).expect("plain data")
}

pub fn operator_from_json(s: &str) -> Result<Operator> {
    let f: MatrixFile = serde_json::from_str(s).map_err(json_err)?;
    check_version(f.version)?;
    let dims = Dims::new(f.dims).map_err(|e| Error::parse("dims", e.to_string()))?;
    let d = dims.total();
    if f.entries.len() != d * d {
        return Err(Error::parse(
            "entries",
            format!("expected {} entries for dims {dims}, found {}", d * d, f.entries.len()),
        ));
    }
    let mat = CMatrix::from_row_major(decode(&f.entries)).expect("square length checked");
    Operator::new(dims, mat)
}

pub fn state_to_json(v: &StateVector) -> String {
    let f = MatrixFile {
        version: SCHEMA_VERSION,
        dims: v.dims().as_slice().to_vec(),
        entries: encode(v.amplitudes()),
    };
    serde_json::to_string(&f).expect("plain data")
}

pub fn state_from_json(s: &str) -> Result<StateVector> {
    let f: MatrixFile = serde_json::from_str(s).map_err(json_err)?;
    check_version(f.version)?;
    let dims = Dims::new(f.dims).map_err(|e| Error::parse("dims", e.to_string()))?;
    if f.entries.len() != dims.total() {
        return Err(Error::parse(
            "entries",
            format!("expected {} amplitudes, found {}", dims.total(), f.entries.len()),
        ));
    }
    StateVector::new(dims, decode(&f.entries))
}
