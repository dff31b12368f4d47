//! Kernel spec parsing: flat inline grammar `name:key=value,...` or a JSON
//! file (path ending in `.json`). Unknown names and keys are rejected.

use mercerlab::kernels::{KernelSpec, TabulatedKernel};
use mercerlab::semigroup::{default_modes, Boundary, HeatSemigroupSpec};
use mercerlab::{io, Error, Result};
use serde::Deserialize;
use std::path::Path;

const DEFAULT_PATHOLOGICAL_DEPTH: usize = 6;
const DEFAULT_LEGENDRE_TERMS: usize = 100;
const DEFAULT_SLOW_TRACE_TERMS: usize = 1000;

fn default_depth() -> usize {
    DEFAULT_PATHOLOGICAL_DEPTH
}

fn default_legendre() -> usize {
    DEFAULT_LEGENDRE_TERMS
}

fn default_slow_trace() -> usize {
    DEFAULT_SLOW_TRACE_TERMS
}

/// JSON kernel description; field names match the inline grammar keys.
#[derive(Debug, Deserialize)]
#[serde(tag = "name", rename_all = "kebab-case", deny_unknown_fields)]
enum KernelFile {
    BrownianBridge,
    Pathological {
        #[serde(default = "default_depth", rename = "n-max")]
        n_max: usize,
    },
    Legendre {
        #[serde(default = "default_legendre")]
        terms: usize,
    },
    SlowTrace {
        #[serde(default = "default_slow_trace")]
        terms: usize,
    },
    Heat {
        boundary: String,
        t: f64,
        #[serde(default)]
        modes: Option<usize>,
    },
    Tabulated {
        file: String,
    },
}

fn heat_spec(boundary: &str, t: f64, modes: Option<usize>) -> Result<KernelSpec> {
    let boundary: Boundary = boundary.parse()?;
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::invalid(format!("heat kernel time must be positive, got {t}")));
    }
    let modes = modes.unwrap_or_else(|| default_modes(t));
    Ok(KernelSpec::Heat(HeatSemigroupSpec::new(boundary, t, modes)?))
}

fn tabulated_spec(file: &str) -> Result<KernelSpec> {
    let text = std::fs::read_to_string(file)
        .map_err(|e| Error::invalid(format!("cannot read tabulated kernel `{file}`: {e}")))?;
    let (rule, samples) = io::parse_tabulated_csv(&text)?;
    Ok(KernelSpec::Tabulated(TabulatedKernel::new(rule, samples)?))
}

fn parse_usize(key: &str, value: &str) -> Result<usize> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("`{key}` expects a positive integer, got `{value}`")))
}

fn parse_f64(key: &str, value: &str) -> Result<f64> {
    value
        .parse()
        .map_err(|_| Error::invalid(format!("`{key}` expects a number, got `{value}`")))
}

fn parse_inline(text: &str) -> Result<KernelSpec> {
    let (name, rest) = match text.split_once(':') {
        Some((n, r)) => (n, r),
        None => (text, ""),
    };
    let mut bare: Vec<&str> = Vec::new();
    let mut pairs: Vec<(&str, &str)> = Vec::new();
    for item in rest.split(',').filter(|s| !s.is_empty()) {
        match item.split_once('=') {
            Some((k, v)) => pairs.push((k, v)),
            None => bare.push(item),
        }
    }
    let reject_bare = |bare: &[&str]| -> Result<()> {
        match bare.first() {
            Some(extra) => Err(Error::invalid(format!("unexpected kernel argument `{extra}`"))),
            None => Ok(()),
        }
    };
    let single_key = |pairs: &[(&str, &str)], key: &str| -> Result<Option<String>> {
        let mut found = None;
        for (k, v) in pairs {
            if *k == key {
                found = Some((*v).to_string());
            } else {
                return Err(Error::invalid(format!("unknown kernel key `{k}` for this kernel")));
            }
        }
        Ok(found)
    };
    match name {
        "brownian-bridge" => {
            reject_bare(&bare)?;
            single_key(&pairs, "")?;
            Ok(KernelSpec::BrownianBridge)
        }
        "pathological" => {
            reject_bare(&bare)?;
            let depth = match single_key(&pairs, "n-max")? {
                Some(v) => parse_usize("n-max", &v)?,
                None => DEFAULT_PATHOLOGICAL_DEPTH,
            };
            KernelSpec::pathological(depth)
        }
        "legendre" => {
            reject_bare(&bare)?;
            let terms = match single_key(&pairs, "terms")? {
                Some(v) => parse_usize("terms", &v)?,
                None => DEFAULT_LEGENDRE_TERMS,
            };
            KernelSpec::legendre_decay(terms)
        }
        "slow-trace" => {
            reject_bare(&bare)?;
            let terms = match single_key(&pairs, "terms")? {
                Some(v) => parse_usize("terms", &v)?,
                None => DEFAULT_SLOW_TRACE_TERMS,
            };
            KernelSpec::slow_trace_decay(terms)
        }
        "heat" => {
            if bare.len() != 1 {
                return Err(Error::invalid(
                    "heat kernel needs a boundary condition, e.g. heat:dirichlet,t=1".to_string(),
                ));
            }
            let mut t = None;
            let mut modes = None;
            for (k, v) in &pairs {
                match *k {
                    "t" => t = Some(parse_f64("t", v)?),
                    "modes" => modes = Some(parse_usize("modes", v)?),
                    other => return Err(Error::invalid(format!("unknown heat kernel key `{other}`"))),
                }
            }
            let t = t.ok_or_else(|| Error::invalid("heat kernel needs t=<time>".to_string()))?;
            heat_spec(bare[0], t, modes)
        }
        "tabulated" => {
            reject_bare(&bare)?;
            let file = single_key(&pairs, "file")?
                .ok_or_else(|| Error::invalid("tabulated kernel needs file=<path.csv>".to_string()))?;
            tabulated_spec(&file)
        }
        other => Err(Error::invalid(format!("unknown kernel `{other}`"))),
    }
}

fn parse_json_file(path: &str) -> Result<KernelSpec> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::invalid(format!("cannot read kernel file `{path}`: {e}")))?;
    let file: KernelFile = serde_json::from_str(&text)
        .map_err(|e| Error::invalid(format!("invalid kernel file `{path}`: {e}")))?;
    match file {
        KernelFile::BrownianBridge => Ok(KernelSpec::BrownianBridge),
        KernelFile::Pathological { n_max } => KernelSpec::pathological(n_max),
        KernelFile::Legendre { terms } => KernelSpec::legendre_decay(terms),
        KernelFile::SlowTrace { terms } => KernelSpec::slow_trace_decay(terms),
        KernelFile::Heat { boundary, t, modes } => heat_spec(&boundary, t, modes),
        KernelFile::Tabulated { file } => tabulated_spec(&file),
    }
}

/// Parses `--kernel` values: a JSON file when the value ends in `.json`,
/// otherwise the inline grammar.
pub fn parse_kernel(text: &str) -> Result<KernelSpec> {
    if Path::new(text).extension().is_some_and(|e| e == "json") {
        parse_json_file(text)
    } else {
        parse_inline(text)
    }
}
