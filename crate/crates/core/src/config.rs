//! Run configuration: a flat TOML document, optionally overridden key by key
//! through `HARTMANN_<KEY>` environment variables. Unknown keys are errors.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{HartmannModel, QuantumState, UnitName, UnitSystem};
use crate::quad::{QuadratureSpec, Scheme};

pub const ENV_PREFIX: &str = "HARTMANN_";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunConfig {
    pub mu: f64,
    pub e2: f64,
    pub hbar: f64,
    pub eta: f64,
    pub sigma: f64,
    pub q: f64,
    pub beta: f64,
    pub units: UnitName,
    pub unit_length: Option<f64>,
    pub unit_energy: Option<f64>,
    pub unit_mass: Option<f64>,
    pub unit_action: Option<f64>,

    /// Largest N + n in scans.
    pub max_level: u32,
    /// Largest |m| in scans.
    pub max_m: u32,
    pub s_min: i32,
    pub s_max: i32,
    pub t_max: u32,
    /// (N, n, m) used by `recurrence-table`.
    pub state: (u32, u32, i32),

    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_levels: u32,
    pub node_budget: usize,
    pub scheme: Scheme,

    pub format: OutputFormat,
    pub out: Option<PathBuf>,
    /// Round floats to 6 significant digits.
    pub display: bool,
}

impl Default for RunConfig {
    fn default() -> Self {
        let quad = QuadratureSpec::default();
        Self {
            mu: 1.0,
            e2: 1.0,
            hbar: 1.0,
            eta: 1.0,
            sigma: 1.0,
            q: 0.0,
            beta: 0.0,
            units: UnitName::Atomic,
            unit_length: None,
            unit_energy: None,
            unit_mass: None,
            unit_action: None,
            max_level: 2,
            max_m: 1,
            s_min: -4,
            s_max: 2,
            t_max: 2,
            state: (0, 0, 0),
            abs_tol: quad.abs_tol,
            rel_tol: quad.rel_tol,
            max_levels: quad.max_levels,
            node_budget: quad.node_budget,
            scheme: quad.scheme,
            format: OutputFormat::Csv,
            out: None,
            display: false,
        }
    }
}

fn config_error(line: Option<usize>, message: impl Into<String>) -> Error {
    Error::Config { line, message: message.into() }
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn from_toml_error(text: &str, e: &toml::de::Error) -> Error {
    config_error(e.span().map(|s| line_of(text, s.start)), e.message().to_string())
}

/// Reads a TOML value; anything that does not parse is taken as a string.
fn env_value(raw: &str) -> toml::Value {
    format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| toml::Value::String(raw.to_string()))
}

impl RunConfig {
    /// Parses `text` and applies `HARTMANN_*` entries from `env`.
    pub fn parse<I>(text: &str, env: I) -> Result<Self>
    where
        I: IntoIterator<Item = (String, String)>,
    {
        let base: RunConfig = toml::from_str(text).map_err(|e| from_toml_error(text, &e))?;
        let overrides: Vec<(String, String)> = env
            .into_iter()
            .filter_map(|(k, v)| k.strip_prefix(ENV_PREFIX).map(|key| (key.to_ascii_lowercase(), v)))
            .collect();
        let config = if overrides.is_empty() {
            base
        } else {
            let mut table: toml::Table = text.parse().map_err(|e| from_toml_error(text, &e))?;
            let mut names = Vec::new();
            for (key, raw) in overrides {
                names.push(format!("{ENV_PREFIX}{}", key.to_ascii_uppercase()));
                table.insert(key, env_value(&raw));
            }
            table
                .try_into::<RunConfig>()
                .map_err(|e| config_error(None, format!("{} (environment overrides: {})", e.message(), names.join(", "))))?
        };
        config.validate()?;
        Ok(config)
    }

    pub fn load(path: Option<&Path>) -> Result<Self> {
        let text = match path {
            Some(p) => std::fs::read_to_string(p)
                .map_err(|e| config_error(None, format!("cannot read {}: {e}", p.display())))?,
            None => String::new(),
        };
        Self::parse(&text, std::env::vars())
    }

    pub fn validate(&self) -> Result<()> {
        if self.s_min > self.s_max {
            return Err(config_error(None, format!("s_min = {} exceeds s_max = {}", self.s_min, self.s_max)));
        }
        self.model()?;
        self.quadrature()?;
        Ok(())
    }

    pub fn units(&self) -> Result<UnitSystem> {
        let scales = [self.unit_length, self.unit_energy, self.unit_mass, self.unit_action];
        match self.units {
            UnitName::Custom => match scales {
                [Some(l), Some(e), Some(m), Some(a)] => UnitSystem::custom(l, e, m, a),
                _ => Err(config_error(
                    None,
                    "units = \"custom\" needs unit_length, unit_energy, unit_mass and unit_action",
                )),
            },
            name if scales.iter().any(Option::is_some) => Err(config_error(
                None,
                format!("unit_* scales are only allowed with units = \"custom\" (got {name:?})"),
            )),
            UnitName::Atomic => Ok(UnitSystem::atomic()),
            UnitName::Si => Ok(UnitSystem::si()),
        }
    }

    pub fn model(&self) -> Result<HartmannModel> {
        let model = HartmannModel {
            mu: self.mu,
            e2: self.e2,
            hbar: self.hbar,
            eta: self.eta,
            sigma: self.sigma,
            q: self.q,
            beta: self.beta,
            units: self.units()?,
        };
        model.validate().map_err(|e| config_error(None, e.to_string()))?;
        Ok(model)
    }

    /// Soft warnings about the model (out-of-range parameters).
    pub fn warnings(&self) -> Vec<String> {
        self.model().and_then(|m| m.validate()).unwrap_or_default()
    }

    pub fn quadrature(&self) -> Result<QuadratureSpec> {
        let spec = QuadratureSpec {
            scheme: self.scheme,
            abs_tol: self.abs_tol,
            rel_tol: self.rel_tol,
            max_levels: self.max_levels,
            node_budget: self.node_budget,
        };
        spec.validate().map_err(|e| config_error(None, e.to_string()))?;
        Ok(spec)
    }

    pub fn selected_state(&self) -> Result<QuantumState> {
        let (n_rad, n_ang, m) = self.state;
        self.model()?.state(n_rad, n_ang, m)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn no_env() -> Vec<(String, String)> {
        Vec::new()
    }

    #[test]
    fn empty_is_hydrogen_default() {
        let c = RunConfig::parse("", no_env()).unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.model().unwrap(), HartmannModel::hydrogenic(1.0));
    }

    #[test]
    fn parses_comments_and_values() {
        let text = "# ring\nq = 8.0\nbeta = 1e-4 # deformation\nstate = [1, 0, 0]\nscheme = \"gauss_legendre_composite\"\nformat = \"json\"\n";
        let c = RunConfig::parse(text, no_env()).unwrap();
        assert_eq!(c.q, 8.0);
        assert_eq!(c.beta, 1e-4);
        assert_eq!(c.state, (1, 0, 0));
        assert_eq!(c.scheme, Scheme::GaussLegendreComposite);
        assert_eq!(c.format, OutputFormat::Json);
    }

    #[test]
    fn unknown_key_reports_line() {
        let err = RunConfig::parse("q = 1.0\n\netaa = 2.0\n", no_env()).unwrap_err();
        match err {
            Error::Config { line: Some(3), message } => assert!(message.contains("etaa"), "{message}"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn type_error_reports_line() {
        let err = RunConfig::parse("q = 1.0\nmax_level = \"three\"\n", no_env()).unwrap_err();
        assert!(matches!(err, Error::Config { line: Some(2), .. }), "{err:?}");
    }

    #[test]
    fn invalid_physics_is_config_error() {
        assert!(matches!(RunConfig::parse("mu = -1.0\n", no_env()), Err(Error::Config { .. })));
        assert!(matches!(RunConfig::parse("s_min = 3\ns_max = 1\n", no_env()), Err(Error::Config { .. })));
        assert!(matches!(RunConfig::parse("unit_mass = 2.0\n", no_env()), Err(Error::Config { .. })));
        assert!(matches!(RunConfig::parse("units = \"custom\"\n", no_env()), Err(Error::Config { .. })));
    }

    #[test]
    fn env_overrides() {
        let env = vec![
            ("HARTMANN_Q".to_string(), "2".to_string()),
            ("HARTMANN_FORMAT".to_string(), "json".to_string()),
            ("PATH".to_string(), "/bin".to_string()),
        ];
        let c = RunConfig::parse("q = 8.0\n", env).unwrap();
        assert_eq!(c.q, 2.0);
        assert_eq!(c.format, OutputFormat::Json);
        let bad = vec![("HARTMANN_NOPE".to_string(), "1".to_string())];
        assert!(matches!(RunConfig::parse("", bad), Err(Error::Config { line: None, .. })));
    }

    #[test]
    fn custom_units() {
        let text = "units = \"custom\"\nunit_length = 1e-10\nunit_energy = 1.6e-19\nunit_mass = 9.1e-31\nunit_action = 1.05e-34\n";
        let c = RunConfig::parse(text, no_env()).unwrap();
        assert_eq!(c.model().unwrap().units.name, UnitName::Custom);
    }
}
