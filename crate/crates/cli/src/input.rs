//! Reading matrices, mappings and vectors from files or inline arguments.

use std::fs;
use std::path::{Path, PathBuf};

use prefgame::mapping::MappingSpec;
use prefgame::model::{PayoffMatrix, Policy, PreferenceMatrix};
use serde::de::DeserializeOwned;
use serde::Deserialize;

use crate::error::{CliError, CliResult};

/// Builtin mapping names accepted by `--psi`.
pub const BUILTIN_MAPPINGS: &[&str] =
    &["identity", "log_odds", "square", "quadratic", "steep_lower", "example1", "example2"];

pub fn builtin_mapping(name: &str) -> Option<MappingSpec> {
    let spec = match name {
        "identity" => MappingSpec::identity(),
        "log_odds" => MappingSpec::log_odds(),
        "square" => MappingSpec::power(2.0).ok()?,
        // t + 4 (t - 1/2)^2
        "quadratic" => MappingSpec::polynomial(vec![1.0, -3.0, 4.0]).ok()?,
        // t above 1/2, slope 10 below
        "steep_lower" => MappingSpec::piecewise_linear(vec![(0.0, -4.5), (0.5, 0.5), (1.0, 1.0)]).ok()?,
        "example1" => MappingSpec::piecewise_constant(-1.0, 0.0, 1.0).ok()?,
        "example2" => MappingSpec::piecewise_constant(-1.0, 0.0, 2.0).ok()?,
        _ => return None,
    };
    Some(spec)
}

fn read(path: &Path) -> CliResult<String> {
    fs::read_to_string(path).map_err(|source| CliError::Io { path: path.to_path_buf(), source })
}

fn parse_json<T: DeserializeOwned>(text: &str, what: &str) -> CliResult<T> {
    serde_json::from_str(text).map_err(|source| CliError::Json { what: what.to_string(), source })
}

fn is_csv(path: &Path) -> bool {
    path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv"))
}

fn read_csv_rows(path: &Path) -> CliResult<Vec<Vec<f64>>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(false)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|source| CliError::Csv { path: path.to_path_buf(), source })?;
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|source| CliError::Csv { path: path.to_path_buf(), source })?;
        let row = record
            .iter()
            .map(|field| {
                field.parse::<f64>().map_err(|e| {
                    CliError::Usage(format!("{}: cannot parse {field:?} as a number: {e}", path.display()))
                })
            })
            .collect::<CliResult<Vec<f64>>>()?;
        rows.push(row);
    }
    Ok(rows)
}

/// `{"n":..,"p":[[..]]}` JSON, or a headerless square CSV.
pub fn load_preferences(path: &Path) -> CliResult<PreferenceMatrix> {
    if is_csv(path) {
        return Ok(PreferenceMatrix::new(read_csv_rows(path)?)?);
    }
    parse_json(&read(path)?, &path.display().to_string())
}

/// `{"n":..,"a":[[..]]}` JSON, or a headerless square CSV.
pub fn load_payoff(path: &Path) -> CliResult<PayoffMatrix> {
    if is_csv(path) {
        return Ok(PayoffMatrix::new(read_csv_rows(path)?)?);
    }
    parse_json(&read(path)?, &path.display().to_string())
}

/// A builtin name, an existing JSON file, or inline JSON.
pub fn load_mapping(arg: &str) -> CliResult<MappingSpec> {
    if let Some(spec) = builtin_mapping(arg) {
        return Ok(spec);
    }
    let path = PathBuf::from(arg);
    if path.is_file() {
        return parse_json(&read(&path)?, arg);
    }
    if arg.trim_start().starts_with('{') {
        return parse_json(arg, "--psi");
    }
    Err(CliError::Usage(format!(
        "--psi {arg:?} is neither a file, inline JSON, nor one of {}",
        BUILTIN_MAPPINGS.join(", ")
    )))
}

#[derive(Deserialize)]
#[serde(untagged)]
enum VectorJson {
    Plain(Vec<f64>),
    Policy { w: Vec<f64> },
    Rewards { rewards: Vec<f64> },
}

fn parse_inline_vector(text: &str, what: &str) -> CliResult<Vec<f64>> {
    let text = text.trim();
    if text.starts_with('[') || text.starts_with('{') {
        let v: VectorJson = parse_json(text, what)?;
        return Ok(match v {
            VectorJson::Plain(v) | VectorJson::Policy { w: v } | VectorJson::Rewards { rewards: v } => v,
        });
    }
    text.split(',')
        .map(|s| {
            s.trim()
                .parse::<f64>()
                .map_err(|e| CliError::Usage(format!("{what}: cannot parse {s:?} as a number: {e}")))
        })
        .collect()
}

/// A file (JSON array, policy or rewards object, or a one-row CSV), a JSON
/// literal, or a comma-separated list.
pub fn load_vector(arg: &str, what: &str) -> CliResult<Vec<f64>> {
    let path = PathBuf::from(arg);
    if path.is_file() {
        if is_csv(&path) {
            let rows = read_csv_rows(&path)?;
            return Ok(rows.into_iter().flatten().collect());
        }
        return parse_inline_vector(&read(&path)?, what);
    }
    parse_inline_vector(arg, what)
}

pub fn load_policy(arg: &str, what: &str) -> CliResult<Policy> {
    Ok(Policy::new(load_vector(arg, what)?)?)
}
