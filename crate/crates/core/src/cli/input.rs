//! Input files: `basis.json` and `instance.json`.

use std::path::Path;

use num_bigint::{BigInt, BigUint};
use num_rational::BigRational;
use num_traits::{One, Signed};
use serde::Deserialize;
use serde_json::Value;

use super::{CliError, InstanceArgs};
use crate::construction::{Beta, ConstructionParams, Variant};
use crate::exact::ExactMatrix;

/// A basis given as a list of columns, each entry an integer, `p/q` or a decimal string.
#[derive(Clone, Debug)]
pub struct BasisFile {
    pub matrix: ExactMatrix,
    pub delta: Option<BigRational>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBasis {
    n: Option<usize>,
    e: Option<usize>,
    basis: Vec<Vec<Value>>,
    delta: Option<Value>,
}

/// Parses `7`, `-3/4` or `1.25` exactly.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let t = text.trim();
    if let Some((p, q)) = t.split_once('/') {
        let p: BigInt = p.trim().parse().ok()?;
        let q: BigInt = q.trim().parse().ok()?;
        return (q != BigInt::from(0)).then(|| BigRational::new(p, q));
    }
    match t.split_once('.') {
        Some((int, frac)) if !frac.is_empty() && frac.bytes().all(|b| b.is_ascii_digit()) => {
            let negative = int.starts_with('-');
            let int = if int.is_empty() || int == "-" { BigInt::from(0) } else { int.parse::<BigInt>().ok()? };
            let scale = num_traits::pow(BigInt::from(10), frac.len());
            let f = BigRational::new(frac.parse().ok()?, scale);
            let whole = BigRational::from_integer(int.abs()) + f;
            Some(if negative { -whole } else { whole })
        }
        Some(_) => None,
        None => Some(BigRational::from_integer(t.parse().ok()?)),
    }
}

fn entry(v: &Value) -> Option<BigRational> {
    match v {
        Value::String(s) => parse_rational(s),
        Value::Number(n) if n.is_i64() || n.is_u64() => parse_rational(&n.to_string()),
        _ => None,
    }
}

fn usage(path: &Path, msg: impl std::fmt::Display) -> CliError {
    CliError::Usage(format!("{}: {msg}", path.display()))
}

pub fn read_basis(path: &Path) -> Result<BasisFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(path, e))?;
    let raw: RawBasis = serde_json::from_str(&text).map_err(|e| usage(path, e))?;
    let columns = raw
        .basis
        .iter()
        .map(|col| col.iter().map(entry).collect::<Option<Vec<_>>>())
        .collect::<Option<Vec<_>>>()
        .ok_or_else(|| usage(path, "entries must be integers, p/q or decimal strings"))?;
    let matrix = ExactMatrix::from_columns(&columns).map_err(|e| usage(path, e))?;
    if raw.n.is_some_and(|n| n != matrix.rows()) || raw.e.is_some_and(|e| e != matrix.cols()) {
        return Err(usage(
            path,
            format!("declared shape does not match {} columns of length {}", matrix.cols(), matrix.rows()),
        ));
    }
    if matrix.rank() != matrix.cols() {
        return Err(usage(path, "basis columns are linearly dependent"));
    }
    let delta = match &raw.delta {
        None => None,
        Some(v) => Some(
            entry(v).filter(|d| !d.is_negative()).ok_or_else(|| usage(path, "delta must be a nonnegative rational"))?,
        ),
    };
    Ok(BasisFile { matrix, delta })
}

impl BasisFile {
    pub fn is_integral(&self) -> bool {
        self.matrix.entries().iter().all(|x| x.denom().is_one())
    }
}

/// Construction instance: {ell, beta, theta?, seed?, variant?}.
#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceFile {
    pub ell: usize,
    pub beta: Value,
    pub theta: Option<Value>,
    pub seed: Option<u64>,
    pub variant: Option<Variant>,
}

pub fn read_instance(path: &Path) -> Result<InstanceFile, CliError> {
    let text = std::fs::read_to_string(path).map_err(|e| usage(path, e))?;
    serde_json::from_str(&text).map_err(|e| usage(path, e))
}

fn text(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Flags override the file.
pub(super) fn instance_params(
    file: Option<&InstanceFile>,
    args: &InstanceArgs,
) -> Result<ConstructionParams, CliError> {
    let ell =
        args.ell.or(file.map(|f| f.ell)).ok_or_else(|| CliError::Usage("--ell or --instance is required".into()))?;
    let beta_text = args
        .beta
        .clone()
        .or_else(|| file.map(|f| text(&f.beta)))
        .ok_or_else(|| CliError::Usage("--beta or --instance is required".into()))?;
    let beta: Beta = beta_text.parse()?;
    if let Some(v) = file.and_then(|f| f.variant) {
        if (v == Variant::Infinite) != (beta == Beta::Infinite) {
            return Err(CliError::Usage(format!("variant {v:?} does not match beta = {beta}")));
        }
    }
    let theta_text = args.theta.clone().or_else(|| file.and_then(|f| f.theta.as_ref().map(text)));
    let theta = theta_text
        .map(|t| {
            t.trim()
                .parse::<BigUint>()
                .map_err(|_| CliError::Usage(format!("theta must be a positive integer, got '{t}'")))
        })
        .transpose()?;
    let seed = args.seed.or(file.and_then(|f| f.seed)).unwrap_or(0);
    Ok(ConstructionParams::new(ell, beta, theta, seed)?)
}
