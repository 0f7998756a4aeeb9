//! Settings resolution: defaults < config file < flags.

use std::path::Path;

use charconst::group::GroupKind;
use charconst::padic::DEFAULT_PRECISION;
use charconst::{Error, Result};
use serde::Deserialize;
use serde_json::{Map, Value};

pub const PRECISION_ENV: &str = "CHARCONST_PRECISION";

/// Every key any subcommand understands. Which keys a subcommand accepts is
/// decided by the `allowed` list passed to [`resolve`].
#[derive(Debug, Deserialize)]
pub struct Settings {
    pub p: Option<u64>,
    pub precision: i64,
    pub group: GroupKind,
    pub n: Option<usize>,
    pub seed: u64,
    pub gamma: Option<Vec<Vec<String>>>,
    pub extension: Option<String>,
    pub rho_pi: Option<String>,
    pub candidate: Option<Vec<Vec<String>>>,
    pub trials: Option<usize>,
    pub x: Option<Vec<String>>,
    pub gammas: Option<Vec<Vec<Vec<String>>>>,
    pub depths: Option<Vec<String>>,
    pub r: Option<String>,
    pub t: Option<String>,
    pub cap: Option<u64>,
    pub search_bound: Option<usize>,
    pub samples: Option<usize>,
}

/// Keys whose values are scalar or rational literals; bare JSON integers are
/// accepted there and turned into strings.
const LITERAL_KEYS: &[&str] = &["gamma", "candidate", "x", "gammas", "depths", "rho_pi", "r", "t"];

fn stringify_numbers(v: &mut Value) {
    match v {
        Value::Number(n) if n.is_i64() || n.is_u64() => *v = Value::String(n.to_string()),
        Value::Array(items) => items.iter_mut().for_each(stringify_numbers),
        _ => {}
    }
}

pub fn default_precision() -> Result<i64> {
    match std::env::var(PRECISION_ENV) {
        Ok(s) => s
            .trim()
            .parse()
            .map_err(|_| Error::Config(format!("{PRECISION_ENV} = {s:?} is not an integer"))),
        Err(_) => Ok(DEFAULT_PRECISION),
    }
}

pub fn read_file(path: &Path) -> Result<Map<String, Value>> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    match serde_json::from_str(&text) {
        Ok(Value::Object(m)) => Ok(m),
        Ok(_) => Err(Error::Config(format!("{} must hold a JSON object", path.display()))),
        Err(e) => Err(Error::Parse { pos: e.column().saturating_sub(1), msg: format!("{}: {e}", path.display()) }),
    }
}

/// Parses the JSON text of a flag such as `--gamma`.
pub fn json_flag(name: &str, text: &str) -> Result<Value> {
    serde_json::from_str(text)
        .map_err(|e| Error::Parse { pos: e.column().saturating_sub(1), msg: format!("--{name}: {e}") })
}

/// Merges the layers, rejects keys outside `allowed`, and returns the
/// settings together with the merged object echoed in the output.
pub fn resolve(
    allowed: &[&str],
    defaults: Map<String, Value>,
    file: Map<String, Value>,
    flags: Map<String, Value>,
) -> Result<(Settings, Map<String, Value>)> {
    let mut merged = defaults;
    for (k, v) in file.into_iter().chain(flags) {
        if !allowed.contains(&k.as_str()) {
            return Err(Error::Config(format!("unknown setting {k:?} for this command")));
        }
        merged.insert(k, v);
    }
    for key in LITERAL_KEYS {
        if let Some(v) = merged.get_mut(*key) {
            stringify_numbers(v);
        }
    }
    let settings: Settings = serde_json::from_value(Value::Object(merged.clone()))
        .map_err(|e| Error::Config(e.to_string()))?;
    Ok((settings, merged))
}

impl Settings {
    pub fn p(&self) -> Result<u64> {
        self.p.ok_or_else(|| Error::Config("p is required (--p or the config file)".into()))
    }

    pub fn required<'a, T>(value: &'a Option<T>, name: &str) -> Result<&'a T> {
        value.as_ref().ok_or_else(|| Error::Config(format!("{name} is required")))
    }

    /// Checks `--n` against the size of a matrix or point.
    pub fn check_n(&self, actual: usize) -> Result<()> {
        match self.n {
            Some(n) if n != actual => Err(Error::Dimension(format!("--n is {n} but the input has size {actual}"))),
            _ => Ok(()),
        }
    }
}
