//! Flat `key = value` experiment files.
//!
//! ```text
//! # advection with once-integrated indicator data
//! p = 0
//! kind = auto
//! J_list = 800, 1600, 3200
//! datum.kind = indicator_integrated
//! datum.params = k=1; a=20; b=25
//! ```
//!
//! Lines starting with `#` and blank lines are ignored. `datum.params` holds
//! `;`-separated `name=value` pairs. With `datum.kind = sobolev` the `m`
//! parameter takes a comma list and describes an order sweep.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use crate::harness::{Comparison, ExperimentConfig, KindChoice};
use crate::initial_data::InitialDatum;

pub const KEYS: [&str; 12] = [
    "p",
    "kind",
    "theta",
    "domain_length",
    "T",
    "J_list",
    "alpha",
    "datum.kind",
    "datum.params",
    "comparison",
    "output_dir",
    "seed",
];

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub experiment: ExperimentConfig,
    pub output_dir: PathBuf,
    /// Regularities of an order sweep; empty for a single study.
    pub sweep: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConfigError(pub String);

impl std::fmt::Display for ConfigError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for ConfigError {}

fn err<T>(msg: impl Into<String>) -> Result<T, ConfigError> {
    Err(ConfigError(msg.into()))
}

pub fn load(path: &Path, overrides: &[String]) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| ConfigError(format!("cannot read config {}: {e}", path.display())))?;
    let mut entries = parse_entries(&text)?;
    for o in overrides {
        let (k, v) = split_pair(o, '=')
            .ok_or_else(|| ConfigError(format!("override '{o}' is not key=value")))?;
        check_key(k)?;
        entries.insert(k.to_string(), v.to_string());
    }
    build(&entries)
}

pub fn parse(text: &str) -> Result<RunConfig, ConfigError> {
    build(&parse_entries(text)?)
}

fn split_pair(line: &str, sep: char) -> Option<(&str, &str)> {
    let (k, v) = line.split_once(sep)?;
    Some((k.trim(), v.trim()))
}

fn check_key(key: &str) -> Result<(), ConfigError> {
    if KEYS.contains(&key) {
        Ok(())
    } else {
        err(format!("unknown key '{key}'"))
    }
}

fn parse_entries(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut entries = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let (k, v) = split_pair(line, '=')
            .ok_or_else(|| ConfigError(format!("line {}: expected key = value", n + 1)))?;
        check_key(k).map_err(|e| ConfigError(format!("line {}: {e}", n + 1)))?;
        if entries.insert(k.to_string(), v.to_string()).is_some() {
            return err(format!("line {}: duplicate key '{k}'", n + 1));
        }
    }
    Ok(entries)
}

fn number<T: std::str::FromStr>(key: &str, value: &str) -> Result<T, ConfigError> {
    value
        .parse()
        .map_err(|_| ConfigError(format!("{key}: cannot parse '{value}'")))
}

fn list<T: std::str::FromStr>(key: &str, value: &str) -> Result<Vec<T>, ConfigError> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| number(key, s))
        .collect()
}

fn datum_params(text: &str) -> Result<BTreeMap<String, String>, ConfigError> {
    let mut params = BTreeMap::new();
    for item in text.split(';').map(str::trim).filter(|s| !s.is_empty()) {
        let (k, v) = split_pair(item, '=')
            .ok_or_else(|| ConfigError(format!("datum.params: '{item}' is not name=value")))?;
        params.insert(k.to_string(), v.to_string());
    }
    Ok(params)
}

struct Params {
    values: BTreeMap<String, String>,
    kind: String,
}

impl Params {
    fn get<T: std::str::FromStr>(&mut self, name: &str, default: Option<T>) -> Result<T, ConfigError> {
        match self.values.remove(name) {
            Some(v) => number(&format!("datum.params.{name}"), &v),
            None => default.ok_or_else(|| {
                ConfigError(format!("datum kind '{}' needs parameter '{name}'", self.kind))
            }),
        }
    }

    fn finish(self) -> Result<(), ConfigError> {
        match self.values.keys().next() {
            Some(k) => err(format!("datum kind '{}' has no parameter '{k}'", self.kind)),
            None => Ok(()),
        }
    }
}

fn build(entries: &BTreeMap<String, String>) -> Result<RunConfig, ConfigError> {
    let mut exp = ExperimentConfig::default();
    let get = |k: &str| entries.get(k).map(String::as_str);
    if let Some(v) = get("p") {
        exp.p = number("p", v)?;
    }
    if let Some(v) = get("kind") {
        exp.kind = v.parse::<KindChoice>().map_err(|e| ConfigError(format!("kind: {e}")))?;
    }
    if let Some(v) = get("theta") {
        exp.theta = number("theta", v)?;
    }
    if let Some(v) = get("domain_length") {
        exp.domain_length = number("domain_length", v)?;
    }
    if let Some(v) = get("T") {
        exp.horizon = number("T", v)?;
    }
    if let Some(v) = get("J_list") {
        exp.j_list = list("J_list", v)?;
    }
    if let Some(v) = get("alpha") {
        exp.alpha = number("alpha", v)?;
    }
    if let Some(v) = get("comparison") {
        exp.comparison = v
            .parse::<Comparison>()
            .map_err(|e| ConfigError(format!("comparison: {e}")))?;
    }
    if let Some(v) = get("seed") {
        exp.seed = number("seed", v)?;
    }
    let output_dir = PathBuf::from(get("output_dir").unwrap_or("output"));

    let kind = get("datum.kind").unwrap_or("indicator_integrated").to_string();
    let mut params = Params {
        values: datum_params(get("datum.params").unwrap_or(""))?,
        kind: kind.clone(),
    };
    let length = exp.domain_length;
    let mut sweep = Vec::new();
    let invalid = |e: crate::Error| ConfigError(format!("datum: {e}"));
    exp.datum = match kind.as_str() {
        "indicator_integrated" => {
            let k = params.get("k", Some(1u32))?;
            let a = params.get("a", Some(20.0))?;
            let b = params.get("b", Some(25.0))?;
            InitialDatum::indicator_integrated_on(k, a, b).map_err(invalid)?
        }
        "fourier_synthetic" => {
            let m = params.get::<f64>("m", None)?;
            let modes = params.get("max_mode", Some(crate::initial_data::DEFAULT_MAX_MODE))?;
            InitialDatum::fourier_synthetic_with_modes(m, exp.seed, modes).map_err(invalid)?
        }
        "gaussian" => {
            let center = params.get("center", Some(0.5 * length))?;
            let width = params.get("width", Some(1.0))?;
            InitialDatum::gaussian(center, width).map_err(invalid)?
        }
        "single_mode" => InitialDatum::single_mode(params.get("mode", Some(1i64))?),
        "sobolev" => {
            let raw = params
                .values
                .remove("m")
                .ok_or_else(|| ConfigError("datum kind 'sobolev' needs parameter 'm'".into()))?;
            sweep = list("datum.params.m", &raw)?;
            if sweep.is_empty() {
                return err("datum.params.m is empty");
            }
            InitialDatum::for_regularity(sweep[0], exp.seed).map_err(invalid)?
        }
        other => return err(format!("unknown datum.kind '{other}'")),
    };
    params.finish()?;
    exp.validate().map_err(|e| ConfigError(e.to_string()))?;
    Ok(RunConfig {
        experiment: exp,
        output_dir,
        sweep,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stencil::StencilKind;

    #[test]
    fn full_file() {
        let c = parse(
            "# comment\np = 1\nkind = central\ntheta = 0.5\ndomain_length = 40\nT = 0.2\n\
             J_list = 100, 200\nalpha = 2\ndatum.kind = gaussian\ndatum.params = center=10; width=2\n\
             comparison = exact_reference\noutput_dir = out\nseed = 9\n",
        )
        .unwrap();
        let e = &c.experiment;
        assert_eq!(e.p, 1);
        assert_eq!(e.kind, KindChoice::Fixed(StencilKind::Central));
        assert_eq!((e.theta, e.domain_length, e.horizon, e.alpha), (0.5, 40.0, 0.2, 2.0));
        assert_eq!(e.j_list, vec![100, 200]);
        assert_eq!(e.datum, InitialDatum::gaussian(10.0, 2.0).unwrap());
        assert_eq!(e.comparison, Comparison::ExactReference);
        assert_eq!(e.seed, 9);
        assert_eq!(c.output_dir, PathBuf::from("out"));
        assert!(c.sweep.is_empty());
    }

    #[test]
    fn defaults_are_the_reference_experiment() {
        let c = parse("").unwrap();
        assert_eq!(c.experiment, ExperimentConfig::default());
    }

    #[test]
    fn sweep_list() {
        let c = parse("p = 1\ndatum.kind = sobolev\ndatum.params = m=1.5, 2.2, 3\n").unwrap();
        assert_eq!(c.sweep, vec![1.5, 2.2, 3.0]);
    }

    #[test]
    fn rejections() {
        assert!(parse("colour = blue\n").unwrap_err().0.contains("unknown key"));
        assert!(parse("p = one\n").is_err());
        assert!(parse("p = 1\np = 2\n").is_err());
        assert!(parse("just text\n").is_err());
        assert!(parse("datum.kind = gaussian\ndatum.params = radius=3\n").is_err());
        assert!(parse("datum.kind = fourier_synthetic\n").is_err());
        assert!(parse("J_list = 400, 200\n").is_err());
        assert!(parse("theta = 2\n").is_err());
    }
}
