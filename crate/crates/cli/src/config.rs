//! Flat `key = value` run configuration.
//!
//! Values come from an optional config file and are overridden by command
//! line flags. Every key is validated; unknown keys are rejected.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use bcs_core::gap_solver::GridOptions;
use bcs_core::potentials::PotentialKind;

use crate::error::{CliError, Result};

pub const KEYS: &[(&str, &str)] = &[
    ("pipeline", "tc | gl | whh | landau | verify (or use a subcommand)"),
    ("tc", "switch: true/false"),
    ("gl", "switch: true/false"),
    ("whh", "switch: true/false"),
    ("landau", "switch: true/false"),
    ("verify", "switch: true/false"),
    ("potential", "kind:strength:range with kind gaussian or exponential, or 'tabulated'"),
    ("table", "two-column radius/value file for a tabulated potential"),
    ("mu", "chemical potential"),
    ("nodes_per_panel", "Gauss-Legendre nodes per momentum panel [16]"),
    ("refinement", "split every momentum panel into this many pieces [1]"),
    ("grading", "growth factor of panel widths away from the Fermi surface [3]"),
    ("p_max", "momentum cutoff [max(4 sqrt(mu+ + 4/a^2), 8/a)]"),
    ("beta_low", "lower end of the beta bracket [1e-2/sup V]"),
    ("beta_high", "upper end of the beta bracket [1e4 max(1, 1/mu+)]"),
    ("B", "field strengths for the T_c(B) line [0,0.001,0.01]"),
    ("landau_B", "positive field strengths for the Landau spectrum [0.001,0.01,0.1]"),
    ("k_max", "largest Landau index [500]"),
    ("n_p3", "number of p3 samples [48]"),
    ("density", "pair density for the Landau spectrum: paired or gaussian:sigma [paired]"),
    ("out", "output directory [results]"),
    ("format", "comma-separated subset of json,csv,svg; json is always written [json,csv]"),
];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Pipeline {
    Tc,
    Gl,
    Whh,
    Landau,
    Verify,
}

impl Pipeline {
    pub const ALL: [Pipeline; 5] = [Pipeline::Tc, Pipeline::Gl, Pipeline::Whh, Pipeline::Landau, Pipeline::Verify];

    pub fn name(self) -> &'static str {
        match self {
            Pipeline::Tc => "tc",
            Pipeline::Gl => "gl",
            Pipeline::Whh => "whh",
            Pipeline::Landau => "landau",
            Pipeline::Verify => "verify",
        }
    }
}

impl fmt::Display for Pipeline {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Pipeline {
    type Err = CliError;

    fn from_str(s: &str) -> Result<Self> {
        Pipeline::ALL
            .into_iter()
            .find(|p| p.name() == s.trim())
            .ok_or_else(|| CliError::Malformed(format!("unknown pipeline '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum PotentialSpec {
    Analytic { kind: PotentialKind, strength: f64, range: f64 },
    Table(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DensitySpec {
    Paired,
    Gaussian(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Formats {
    pub csv: bool,
    pub svg: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub pipeline: Pipeline,
    pub potential: Option<PotentialSpec>,
    pub mu: Option<f64>,
    pub grid: GridOptions,
    pub beta_low: Option<f64>,
    pub beta_high: Option<f64>,
    pub fields: Vec<f64>,
    pub landau_fields: Vec<f64>,
    pub k_max: usize,
    pub n_p3: usize,
    pub density: DensitySpec,
    pub out: PathBuf,
    pub formats: Formats,
}

/// Raw key/value pairs before validation.
#[derive(Debug, Clone, Default)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

fn known(key: &str) -> bool {
    KEYS.iter().any(|(k, _)| *k == key)
}

impl Settings {
    pub fn parse(text: &str) -> Result<Self> {
        let mut values = BTreeMap::new();
        for (n, line) in text.lines().enumerate() {
            let content = line.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| CliError::Malformed(format!("line {}: expected key = value", n + 1)))?;
            let (key, value) = (key.trim(), value.trim());
            if !known(key) {
                return Err(CliError::Malformed(format!("line {}: unknown key '{key}'", n + 1)));
            }
            if values.insert(key.to_string(), value.to_string()).is_some() {
                return Err(CliError::Conflict(format!("key '{key}' is given twice")));
            }
        }
        Ok(Self { values })
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| match e.kind() {
            std::io::ErrorKind::NotFound => CliError::MissingInput(format!("config file {} not found", path.display())),
            _ => CliError::Io(format!("{}: {e}", path.display())),
        })?;
        Self::parse(&text)
    }

    /// Flag values replace file values.
    pub fn set(&mut self, key: &str, value: impl Into<String>) {
        debug_assert!(known(key), "{key}");
        self.values.insert(key.to_string(), value.into());
    }

    fn get(&self, key: &str) -> Option<&str> {
        self.values.get(key).map(String::as_str)
    }

    fn number(&self, key: &str) -> Result<Option<f64>> {
        self.get(key).map(|v| parse_number(key, v)).transpose()
    }

    fn count(&self, key: &str) -> Result<Option<usize>> {
        self.get(key)
            .map(|v| {
                v.parse::<usize>()
                    .map_err(|_| CliError::Malformed(format!("{key}: '{v}' is not a non-negative integer")))
            })
            .transpose()
    }

    fn switch(&self, key: &str) -> Result<bool> {
        match self.get(key) {
            None | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(v) => Err(CliError::Malformed(format!("{key}: expected true or false, got '{v}'"))),
        }
    }

    /// Validate into a [`RunConfig`]. `command` is the subcommand, if any.
    pub fn resolve(&self, command: Option<Pipeline>) -> Result<RunConfig> {
        let pipeline = self.pipeline(command)?;
        let needs_model = pipeline != Pipeline::Verify;

        let density = match self.get("density") {
            None | Some("paired") => DensitySpec::Paired,
            Some(v) => match v.split_once(':') {
                Some(("gaussian", s)) => {
                    let sigma = parse_number("density", s)?;
                    if !(sigma > 0.0) {
                        return Err(CliError::Malformed(format!("density: sigma must be positive, got {sigma}")));
                    }
                    DensitySpec::Gaussian(sigma)
                }
                _ => return Err(CliError::Malformed(format!("density: expected paired or gaussian:sigma, got '{v}'"))),
            },
        };
        let needs_solve = needs_model && !(pipeline == Pipeline::Landau && matches!(density, DensitySpec::Gaussian(_)));

        let potential = self.potential()?;
        let mu = self.number("mu")?;
        if needs_solve {
            if potential.is_none() {
                return Err(CliError::MissingInput(format!("the {pipeline} pipeline needs a potential")));
            }
            if mu.is_none() {
                return Err(CliError::MissingInput(format!("the {pipeline} pipeline needs mu")));
            }
        }
        if pipeline == Pipeline::Whh && mu.is_some_and(|m| m <= 0.0) {
            return Err(CliError::Conflict("the whh pipeline needs mu > 0".into()));
        }

        let defaults = GridOptions::default();
        let grid = GridOptions {
            nodes_per_panel: self.count("nodes_per_panel")?.unwrap_or(defaults.nodes_per_panel),
            refinement: self.count("refinement")?.unwrap_or(defaults.refinement),
            p_max: self.number("p_max")?,
            grading: self.number("grading")?.unwrap_or(defaults.grading),
        };
        if grid.nodes_per_panel == 0 || grid.refinement == 0 {
            return Err(CliError::Malformed("nodes_per_panel and refinement must be positive".into()));
        }
        if !(grid.grading > 1.0) {
            return Err(CliError::Malformed(format!("grading must exceed 1, got {}", grid.grading)));
        }
        if grid.p_max.is_some_and(|p| !(p > 0.0)) {
            return Err(CliError::Malformed("p_max must be positive".into()));
        }

        let beta_low = self.number("beta_low")?;
        let beta_high = self.number("beta_high")?;
        for b in [beta_low, beta_high].into_iter().flatten() {
            if !(b > 0.0) {
                return Err(CliError::Malformed(format!("beta bracket ends must be positive, got {b}")));
            }
        }
        if let (Some(lo), Some(hi)) = (beta_low, beta_high) {
            if lo >= hi {
                return Err(CliError::Conflict(format!("beta_low = {lo} is not below beta_high = {hi}")));
            }
        }

        let fields = match self.get("B") {
            Some(v) => parse_list("B", v)?,
            None => vec![0.0, 1e-3, 1e-2],
        };
        if fields.iter().any(|b| *b < 0.0) {
            return Err(CliError::Malformed("B values must be non-negative".into()));
        }
        let landau_fields = match self.get("landau_B") {
            Some(v) => parse_list("landau_B", v)?,
            None => vec![1e-3, 1e-2, 1e-1],
        };
        if landau_fields.iter().any(|b| !(*b > 0.0)) {
            return Err(CliError::Malformed("landau_B values must be positive".into()));
        }

        let k_max = self.count("k_max")?.unwrap_or(bcs_core::landau::K_MAX_DEFAULT);
        let n_p3 = self.count("n_p3")?.unwrap_or(48);
        if n_p3 < 2 {
            return Err(CliError::Malformed("n_p3 must be at least 2".into()));
        }

        let mut formats = Formats { csv: false, svg: false };
        for f in self.get("format").unwrap_or("json,csv").split(',') {
            match f.trim() {
                "json" => {}
                "csv" => formats.csv = true,
                "svg" => formats.svg = true,
                other => return Err(CliError::Malformed(format!("format: unknown output format '{other}'"))),
            }
        }

        Ok(RunConfig {
            pipeline,
            potential,
            mu,
            grid,
            beta_low,
            beta_high,
            fields,
            landau_fields,
            k_max,
            n_p3,
            density,
            out: PathBuf::from(self.get("out").unwrap_or("results")),
            formats,
        })
    }

    fn pipeline(&self, command: Option<Pipeline>) -> Result<Pipeline> {
        let mut chosen: Vec<Pipeline> = command.into_iter().collect();
        if let Some(list) = self.get("pipeline") {
            for p in list.split(',') {
                chosen.push(p.parse()?);
            }
        }
        for p in Pipeline::ALL {
            if self.switch(p.name())? {
                chosen.push(p);
            }
        }
        chosen.sort();
        chosen.dedup();
        match chosen.as_slice() {
            [] => Err(CliError::MissingInput("no pipeline selected".into())),
            [one] => Ok(*one),
            many => {
                let names: Vec<&str> = many.iter().map(|p| p.name()).collect();
                Err(CliError::Conflict(format!("pipelines {} are all selected", names.join(" and "))))
            }
        }
    }

    fn potential(&self) -> Result<Option<PotentialSpec>> {
        let table = self.get("table").map(PathBuf::from);
        let spec = match self.get("potential") {
            None => None,
            Some(v) if v.trim() == "tabulated" => {
                return match table {
                    Some(p) => Ok(Some(PotentialSpec::Table(p))),
                    None => Err(CliError::MissingInput("potential = tabulated needs a table".into())),
                };
            }
            Some(v) => Some(parse_potential(v)?),
        };
        match (spec, table) {
            (Some(_), Some(_)) => Err(CliError::Conflict("both an analytic potential and a table are given".into())),
            (Some(s), None) => Ok(Some(s)),
            (None, Some(p)) => Ok(Some(PotentialSpec::Table(p))),
            (None, None) => Ok(None),
        }
    }
}

fn parse_number(key: &str, v: &str) -> Result<f64> {
    match v.trim().parse::<f64>() {
        Ok(x) if x.is_finite() => Ok(x),
        _ => Err(CliError::Malformed(format!("{key}: '{v}' is not a finite number"))),
    }
}

fn parse_list(key: &str, v: &str) -> Result<Vec<f64>> {
    let list: Vec<f64> = v
        .split(',')
        .filter(|s| !s.trim().is_empty())
        .map(|s| parse_number(key, s))
        .collect::<Result<_>>()?;
    if list.is_empty() {
        return Err(CliError::Malformed(format!("{key}: empty list")));
    }
    Ok(list)
}

/// `kind:strength:range`
pub fn parse_potential(v: &str) -> Result<PotentialSpec> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let [kind, strength, range] = parts.as_slice() else {
        return Err(CliError::Malformed(format!("potential: expected kind:strength:range, got '{v}'")));
    };
    let kind = match *kind {
        "gaussian" => PotentialKind::Gaussian,
        "exponential" => PotentialKind::Exponential,
        other => return Err(CliError::Malformed(format!("potential: unknown kind '{other}'"))),
    };
    let strength = parse_number("potential strength", strength)?;
    let range = parse_number("potential range", range)?;
    if !(strength > 0.0 && range > 0.0) {
        return Err(CliError::Malformed(format!(
            "potential: strength and range must be positive, got {strength} and {range}"
        )));
    }
    Ok(PotentialSpec::Analytic { kind, strength, range })
}
