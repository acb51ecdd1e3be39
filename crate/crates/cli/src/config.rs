//! TOML run configuration.
//!
//! Every section is optional; omitted keys fall back to the builtin porous
//! example analysed in 2-D and solved with the Dirichlet velocity.

use std::fs;
use std::path::{Path, PathBuf};

use fbplab::exact_linalg::{int, parse_rational, Rational};
use fbplab::interface::InterfaceSystem;
use fbplab::porous::PorousParams;
use fbplab::solver::{ResidualChoice, RunConfig};
use fbplab::stability::{SpectralMode, VelocityChoice};
use serde::Deserialize;

use crate::error::CliError;

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    system: RawSystem,
    #[serde(default)]
    analysis: RawAnalysis,
    #[serde(default)]
    solver: RawSolver,
    #[serde(default)]
    output: RawOutput,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSystem {
    builtin: Option<String>,
    matrix: Option<PathBuf>,
    #[serde(rename = "K_plus")]
    k_plus: Option<RationalValue>,
    #[serde(rename = "K_minus")]
    k_minus: Option<RationalValue>,
}

/// A rational written as an integer or a `"p/q"` string. Floats are
/// rejected so exact inputs never pass through binary decimals.
#[derive(Debug, Clone, Deserialize)]
#[serde(untagged)]
enum RationalValue {
    Integer(i64),
    Text(String),
}

impl RationalValue {
    fn resolve(&self, key: &str) -> Result<Rational, CliError> {
        match self {
            RationalValue::Integer(v) => Ok(int(*v)),
            RationalValue::Text(t) => {
                parse_rational(t).map_err(|e| CliError::Config(format!("{key}: {e}")))
            }
        }
    }
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawAnalysis {
    mode: Option<String>,
    q: Option<RawFluxes>,
    candidates: Option<Vec<RawCandidate>>,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawFluxes {
    Keyword(String),
    Values(Vec<RationalValue>),
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum RawCandidate {
    Unit(String),
    Custom(CustomCandidate),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct CustomCandidate {
    label: String,
    v: Vec<RationalValue>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSolver {
    #[serde(rename = "N")]
    n: Option<usize>,
    dt: Option<f64>,
    t_end: Option<f64>,
    residual_choice: Option<String>,
    stop_tolerance: Option<f64>,
    solver_tolerance: Option<f64>,
}

#[derive(Debug, Default, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutput {
    directory: Option<PathBuf>,
    formats: Option<Vec<String>>,
}

/// Where the interface conditions come from.
#[derive(Clone, Debug)]
pub enum SystemSource {
    Porous,
    MatrixFile(PathBuf),
}

#[derive(Clone, Debug)]
pub enum Fluxes {
    FromData,
    Explicit(Vec<Rational>),
}

#[derive(Clone, Debug)]
pub struct OutputSettings {
    pub directory: Option<PathBuf>,
    pub text: bool,
    pub csv: bool,
}

/// Validated configuration.
#[derive(Clone, Debug)]
pub struct Config {
    pub source: SystemSource,
    pub system: InterfaceSystem,
    pub params: PorousParams,
    pub mode: SpectralMode,
    pub fluxes: Fluxes,
    pub candidates: Vec<VelocityChoice>,
    pub run: RunConfig,
    pub output: OutputSettings,
}

impl Config {
    pub fn load(path: Option<&Path>) -> Result<Self, CliError> {
        match path {
            Some(p) => {
                let text = fs::read_to_string(p).map_err(|e| CliError::Io(p.to_path_buf(), e))?;
                Self::parse(&text, p.parent().unwrap_or(Path::new(".")))
            }
            None => Self::parse("", Path::new(".")),
        }
    }

    /// Parses a TOML document. Relative paths resolve against `base`.
    pub fn parse(text: &str, base: &Path) -> Result<Self, CliError> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| CliError::Config(e.message().to_string()))?;

        let mut params = PorousParams::reference();
        if raw.system.k_plus.is_some() || raw.system.k_minus.is_some() {
            let kp = raw
                .system
                .k_plus
                .as_ref()
                .map_or(Ok(int(1)), |v| v.resolve("K_plus"))?;
            let km = raw
                .system
                .k_minus
                .as_ref()
                .map_or(Ok(int(1)), |v| v.resolve("K_minus"))?;
            params = params
                .with_conductivities(kp, km)
                .map_err(|e| CliError::Config(e.to_string()))?;
        }
        let (source, system) = match (&raw.system.builtin, &raw.system.matrix) {
            (Some(_), Some(_)) => {
                return Err(CliError::Config(
                    "[system] takes either `builtin` or `matrix`, not both".into(),
                ))
            }
            (Some(name), None) if name != "porous" => {
                return Err(CliError::Config(format!(
                    "unknown builtin system `{name}` (expected \"porous\")"
                )))
            }
            (_, Some(file)) => {
                let path = base.join(file);
                let text = fs::read_to_string(&path).map_err(|e| CliError::Io(path.clone(), e))?;
                let sys = text
                    .parse::<InterfaceSystem>()
                    .map_err(|e| CliError::Matrix(path.clone(), e.to_string()))?;
                sys.validate()
                    .map_err(|e| CliError::Matrix(path.clone(), e.to_string()))?;
                (SystemSource::MatrixFile(path), sys)
            }
            _ => (
                SystemSource::Porous,
                fbplab::porous::build_porous_system(&params),
            ),
        };

        let mode = match raw.analysis.mode.as_deref().unwrap_or("2d") {
            "2d" | "2D" => SpectralMode::TwoD,
            "3d" | "3D" => SpectralMode::ThreeD,
            other => {
                return Err(CliError::Config(format!(
                    "mode must be \"2d\" or \"3d\", got `{other}`"
                )))
            }
        };
        let fluxes = match raw.analysis.q {
            None => Fluxes::FromData,
            Some(RawFluxes::Keyword(k)) if k == "from-data" => Fluxes::FromData,
            Some(RawFluxes::Keyword(k)) => {
                return Err(CliError::Config(format!(
                    "q must be \"from-data\" or a list of 3 rationals, got `{k}`"
                )))
            }
            Some(RawFluxes::Values(v)) => {
                if v.len() != 3 {
                    return Err(CliError::Config(format!(
                        "q needs 3 entries, got {}",
                        v.len()
                    )));
                }
                Fluxes::Explicit(v.iter().map(|r| r.resolve("q")).collect::<Result<_, _>>()?)
            }
        };
        let candidates = match raw.analysis.candidates {
            None => VelocityChoice::units(),
            Some(list) => list.iter().map(candidate).collect::<Result<_, _>>()?,
        };
        if candidates.is_empty() {
            return Err(CliError::Config("candidates must not be empty".into()));
        }

        let s = &raw.solver;
        let choice = match &s.residual_choice {
            Some(c) => c
                .parse::<ResidualChoice>()
                .map_err(|e| CliError::Config(e.to_string()))?,
            None => ResidualChoice::Dirichlet,
        };
        let mut run = RunConfig::new(s.n.unwrap_or(20), s.dt.unwrap_or(0.2), choice);
        run.params = params.clone();
        if let Some(t) = s.t_end {
            run.t_end = t;
        }
        if let Some(t) = s.stop_tolerance {
            run.stop_tolerance = t;
        }
        if let Some(t) = s.solver_tolerance {
            run.solver_tolerance = t;
        }
        run.validate()
            .map_err(|e| CliError::Config(e.to_string()))?;

        let formats = raw
            .output
            .formats
            .unwrap_or_else(|| vec!["text".into(), "csv".into()]);
        let mut output = OutputSettings {
            directory: raw.output.directory.map(|d| base.join(d)),
            text: false,
            csv: false,
        };
        for f in &formats {
            match f.as_str() {
                "text" => output.text = true,
                "csv" => output.csv = true,
                other => return Err(CliError::Config(format!("unknown output format `{other}`"))),
            }
        }

        Ok(Config {
            source,
            system,
            params,
            mode,
            fluxes,
            candidates,
            run,
            output,
        })
    }
}

fn candidate(raw: &RawCandidate) -> Result<VelocityChoice, CliError> {
    match raw {
        RawCandidate::Unit(label) => label
            .strip_prefix('e')
            .and_then(|k| k.parse::<usize>().ok())
            .filter(|k| (1..=5).contains(k))
            .map(|k| VelocityChoice::unit(k - 1))
            .ok_or_else(|| CliError::Config(format!("candidate `{label}` is not one of e1..e5"))),
        RawCandidate::Custom(c) => {
            let v =
                c.v.iter()
                    .map(|r| r.resolve("v"))
                    .collect::<Result<Vec<_>, _>>()?;
            VelocityChoice::new(c.label.clone(), v)
                .map_err(|e| CliError::Config(format!("{}: {e}", c.label)))
        }
    }
}
