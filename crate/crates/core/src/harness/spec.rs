use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::construct::Resource;
use crate::ascent::AscentConfig;
use crate::bounds::LowerBoundMethod;
use crate::error::{Error, Result};
use crate::sdp::DEFAULT_TOLERANCE;

/// The sweepable state families.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Experiment {
    /// 3⊗3 PPT entangled family over `a`.
    Horodecki,
    /// GHZ/W mixture over the GHZ weight `p`.
    GhzWMix,
    /// Three-site XX ring over `beta`.
    XxThermal,
    /// As `xx-thermal`, evaluating bounds only where the state is PPT.
    XxPptWindow,
    /// Three-site XXX ring over the field `h` at fixed `beta`.
    XxxField,
    /// Three-site XXX ring over `beta` at fixed `h`.
    XxxBeta,
    /// Six-site XX ring in a field over `h`, reduced to sites B:D:F.
    Hexagon,
    /// Local amplitude damping of GHZ₃ or W₃ over `q`.
    NoiseAd,
    /// Local depolarizing noise on GHZ₃ or W₃ over `p`.
    NoiseDep,
    /// Matrix files, one per grid value.
    CustomFile,
}

impl Experiment {
    pub const ALL: [Experiment; 10] = [
        Experiment::Horodecki,
        Experiment::GhzWMix,
        Experiment::XxThermal,
        Experiment::XxPptWindow,
        Experiment::XxxField,
        Experiment::XxxBeta,
        Experiment::Hexagon,
        Experiment::NoiseAd,
        Experiment::NoiseDep,
        Experiment::CustomFile,
    ];

    pub fn tag(self) -> &'static str {
        match self {
            Experiment::Horodecki => "horodecki",
            Experiment::GhzWMix => "ghz-w-mix",
            Experiment::XxThermal => "xx-thermal",
            Experiment::XxPptWindow => "xx-ppt-window",
            Experiment::XxxField => "xxx-field",
            Experiment::XxxBeta => "xxx-beta",
            Experiment::Hexagon => "hexagon",
            Experiment::NoiseAd => "noise-ad",
            Experiment::NoiseDep => "noise-dep",
            Experiment::CustomFile => "custom-file",
        }
    }

    /// Name of the swept parameter.
    pub fn parameter(self) -> &'static str {
        match self {
            Experiment::Horodecki => "a",
            Experiment::GhzWMix | Experiment::NoiseDep => "p",
            Experiment::XxThermal | Experiment::XxPptWindow | Experiment::XxxBeta => "beta",
            Experiment::XxxField | Experiment::Hexagon => "h",
            Experiment::NoiseAd => "q",
            Experiment::CustomFile => "index",
        }
    }

    /// Grid used when the spec gives none.
    pub fn default_grid(self) -> Option<Grid> {
        let r = |start, stop, step| GridPoints::Range(Range { start, stop, step });
        let points = match self {
            Experiment::Horodecki => r(0.01, 1.0, 0.01),
            Experiment::GhzWMix => r(0.0, 1.0, 0.05),
            Experiment::XxThermal => r(0.05, 5.0, 0.05),
            Experiment::XxPptWindow => r(0.6, 0.8, 0.005),
            Experiment::XxxField => r(-3.0, 3.0, 0.05),
            Experiment::XxxBeta => GridPoints::Segments {
                segments: vec![
                    Range {
                        start: 0.3,
                        stop: 6.0,
                        step: 0.05,
                    },
                    Range {
                        start: 6.0,
                        stop: 10.0,
                        step: 0.1,
                    },
                ],
            },
            Experiment::Hexagon => r(0.0, 2.0, 0.05),
            Experiment::NoiseAd | Experiment::NoiseDep => r(0.0, 1.0, 0.05),
            Experiment::CustomFile => return None,
        };
        Some(Grid {
            parameter: None,
            points,
        })
    }
}

impl fmt::Display for Experiment {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

impl FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.tag() == s)
            .ok_or_else(|| {
                let names: Vec<&str> = Experiment::ALL.iter().map(|e| e.tag()).collect();
                Error::usage(format!(
                    "unknown experiment `{s}` (expected one of {})",
                    names.join(", ")
                ))
            })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Range {
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl Range {
    fn validate(&self) -> Result<()> {
        if !(self.step > 0.0 && self.step.is_finite()) {
            return Err(Error::usage(format!(
                "grid step must be positive, got {}",
                self.step
            )));
        }
        if !(self.start.is_finite() && self.stop.is_finite()) || self.stop < self.start {
            return Err(Error::usage(format!(
                "grid range {}..{} is empty",
                self.start, self.stop
            )));
        }
        Ok(())
    }

    /// `start, start + step, …` up to and including `stop` (with a relative
    /// allowance of 1e-9 steps), rounded to 12 decimals so that decimal
    /// steps give clean values.
    fn points(&self) -> Vec<f64> {
        let n = ((self.stop - self.start) / self.step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| round12(self.start + i as f64 * self.step))
            .collect()
    }
}

fn round12(x: f64) -> f64 {
    let r = (x * 1e12).round() / 1e12;
    if r == 0.0 {
        0.0
    } else {
        r
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum GridPoints {
    Values { values: Vec<f64> },
    Segments { segments: Vec<Range> },
    Range(Range),
}

/// Swept values, optionally naming the parameter. A named parameter must
/// match the experiment's.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub parameter: Option<String>,
    #[serde(flatten)]
    pub points: GridPoints,
}

impl Grid {
    pub fn values(values: Vec<f64>) -> Self {
        Self {
            parameter: None,
            points: GridPoints::Values { values },
        }
    }

    pub fn range(start: f64, stop: f64, step: f64) -> Self {
        Self {
            parameter: None,
            points: GridPoints::Range(Range { start, stop, step }),
        }
    }

    /// Expands the grid, dropping a segment's first value when it repeats
    /// the previous segment's last.
    pub fn expand(&self) -> Result<Vec<f64>> {
        let out = match &self.points {
            GridPoints::Values { values } => {
                if let Some(x) = values.iter().find(|x| !x.is_finite()) {
                    return Err(Error::usage(format!("grid value {x} is not finite")));
                }
                values.clone()
            }
            GridPoints::Range(r) => {
                r.validate()?;
                r.points()
            }
            GridPoints::Segments { segments } => {
                let mut out: Vec<f64> = Vec::new();
                for r in segments {
                    r.validate()?;
                    for x in r.points() {
                        if out.last().is_none_or(|&l| (x - l).abs() > 1e-12) {
                            out.push(x);
                        }
                    }
                }
                out
            }
        };
        if out.is_empty() {
            return Err(Error::usage("grid is empty"));
        }
        Ok(out)
    }
}

/// Fixed parameters of an experiment; unset fields take the experiment's
/// default.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentParams {
    /// Coupling `J` (XX: 1, XXX: −1, hexagon: 1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub j: Option<f64>,
    /// Field for `xxx-beta` (1).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub h: Option<f64>,
    /// Inverse temperature for `xxx-field` (10) and `hexagon` (5).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    /// Number of qubits for `ghz-w-mix` (3).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub parties: Option<usize>,
    /// Resource state for the noise experiments (GHZ).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub state: Option<Resource>,
    /// Path pattern for `custom-file`; `{}` is replaced by the grid value.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub file: Option<String>,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            _ => Err(Error::usage(format!(
                "unknown format `{s}` (expected csv or json)"
            ))),
        }
    }
}

fn default_lb() -> LowerBoundMethod {
    LowerBoundMethod::PurityFull
}

fn default_tolerance() -> f64 {
    DEFAULT_TOLERANCE
}

fn one() -> usize {
    1
}

fn yes() -> bool {
    true
}

/// A complete sweep description; the JSON config file deserializes into it.
#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub experiment: Experiment,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<Grid>,
    #[serde(default = "default_lb")]
    pub lb_method: LowerBoundMethod,
    /// SDP solver tolerance.
    #[serde(default = "default_tolerance")]
    pub tolerance: f64,
    #[serde(default)]
    pub ascent: AscentConfig,
    #[serde(default)]
    pub params: ExperimentParams,
    /// Skip the ascent and report lower bounds only.
    #[serde(default)]
    pub lower_only: bool,
    /// When false, wall times are written as 0 so that output is
    /// byte-identical between runs.
    #[serde(default = "yes")]
    pub record_timings: bool,
    #[serde(default = "one")]
    pub workers: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub format: OutputFormat,
}

impl SweepSpec {
    pub fn new(experiment: Experiment) -> Self {
        Self {
            experiment,
            grid: None,
            lb_method: default_lb(),
            tolerance: default_tolerance(),
            ascent: AscentConfig::mixed(),
            params: ExperimentParams::default(),
            lower_only: false,
            record_timings: true,
            workers: 1,
            output: None,
            format: OutputFormat::Csv,
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text)?;
        spec.validate()?;
        Ok(spec)
    }

    /// The grid in effect, falling back to the experiment default.
    pub fn effective_grid(&self) -> Result<Grid> {
        match &self.grid {
            Some(g) => Ok(g.clone()),
            None => self.experiment.default_grid().ok_or_else(|| {
                Error::usage(format!(
                    "experiment {} needs an explicit grid",
                    self.experiment
                ))
            }),
        }
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        self.effective_grid()?.expand()
    }

    pub fn validate(&self) -> Result<()> {
        let grid = self.effective_grid()?;
        if let Some(name) = &grid.parameter {
            if name != self.experiment.parameter() {
                return Err(Error::usage(format!(
                    "experiment {} sweeps `{}`, grid names `{name}`",
                    self.experiment,
                    self.experiment.parameter()
                )));
            }
        }
        grid.expand()?;
        if !(self.tolerance > 0.0) {
            return Err(Error::usage("solver tolerance must be positive"));
        }
        if self.workers == 0 {
            return Err(Error::usage("worker count must be at least 1"));
        }
        if self.experiment == Experiment::CustomFile && self.params.file.is_none() {
            return Err(Error::usage("custom-file needs params.file"));
        }
        Ok(())
    }
}
