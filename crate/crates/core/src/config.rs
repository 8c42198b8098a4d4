//! Scenario configuration documents.
//!
//! A config is a JSON object; unknown fields are rejected and every
//! validation failure names the offending field.

use serde::{Deserialize, Serialize};

use crate::error::{QrfError, Result};
use crate::grid::{GridBasis, GridCase, GridScenario, Labels, Wavepacket};
use crate::qubit::{QubitCase, QubitScenario};
use crate::C64;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum System {
    Qubit,
    Grid,
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub enum OutputFormat {
    #[default]
    #[serde(rename = "json")]
    Json,
    #[serde(rename = "csv-summary")]
    CsvSummary,
}

impl OutputFormat {
    pub fn parse(s: &str) -> Option<OutputFormat> {
        match s {
            "json" => Some(OutputFormat::Json),
            "csv-summary" => Some(OutputFormat::CsvSummary),
            _ => None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Angles {
    #[serde(default)]
    pub theta: f64,
    #[serde(default)]
    pub zeta: f64,
    #[serde(default)]
    pub zeta_prime: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridParams {
    pub n: usize,
    #[serde(default = "unit_spacing")]
    pub h: f64,
    #[serde(default)]
    pub wrap_guard: usize,
}

fn unit_spacing() -> f64 {
    1.0
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelParams {
    pub x_o: Option<f64>,
    pub y_o: Option<f64>,
    pub x_1: Option<f64>,
    pub x_2: Option<f64>,
    pub y_1: Option<f64>,
    pub y_2: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaussianParams {
    pub center: f64,
    pub width: f64,
    #[serde(default)]
    pub momentum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SampleParams {
    pub re: Vec<f64>,
    #[serde(default)]
    pub im: Vec<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PlaneWaveParams {
    pub momentum: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum WavepacketParams {
    Gaussian(GaussianParams),
    Samples(SampleParams),
    PlaneWave(PlaneWaveParams),
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputParams {
    #[serde(default)]
    pub format: OutputFormat,
    /// Record wall time in the report; off by default so reports stay
    /// byte-identical across runs.
    #[serde(default)]
    pub wall_time: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    #[serde(default)]
    pub scenario_id: Option<String>,
    pub system: System,
    pub case: String,
    #[serde(default)]
    pub angles: Angles,
    #[serde(default)]
    pub grid: Option<GridParams>,
    #[serde(default)]
    pub labels: LabelParams,
    #[serde(default)]
    pub wavepacket: Option<WavepacketParams>,
    /// Append the momentum checks (grid case `a` only).
    #[serde(default)]
    pub appendix: bool,
    #[serde(default)]
    pub output: OutputParams,
}

/// A validated scenario ready to run.
#[derive(Clone, Debug, PartialEq)]
pub enum Scenario {
    Qubit(QubitScenario),
    Grid { scenario: GridScenario, appendix: bool },
}

fn invalid(field: &str, message: impl Into<String>) -> QrfError {
    QrfError::ConfigInvalid {
        field: field.into(),
        message: message.into(),
    }
}

/// Dotted path of the field a serde error refers to. Missing keys are
/// reported against their parent, so the key name is appended.
fn serde_field(path: &str, msg: &str) -> String {
    let parent = if path == "." || path == "?" { "" } else { path };
    if let Some(name) = msg.split("missing field `").nth(1).and_then(|r| r.split('`').next()) {
        return if parent.is_empty() { name.to_string() } else { format!("{parent}.{name}") };
    }
    if parent.is_empty() { "<document>".into() } else { parent.to_string() }
}

impl ScenarioConfig {
    pub fn from_json(text: &str) -> Result<ScenarioConfig> {
        let de = &mut serde_json::Deserializer::from_str(text);
        serde_path_to_error::deserialize(de).map_err(|e| {
            let path = e.path().to_string();
            let msg = e.into_inner().to_string();
            invalid(&serde_field(&path, &msg), msg)
        })
    }

    pub fn from_path(path: &std::path::Path) -> Result<ScenarioConfig> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| QrfError::IoFailure(format!("{}: {e}", path.display())))?;
        ScenarioConfig::from_json(&text)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<Scenario> {
        let a = self.angles;
        for (name, v, hi) in [
            ("angles.theta", a.theta, std::f64::consts::PI),
            ("angles.zeta", a.zeta, 2.0 * std::f64::consts::PI),
            ("angles.zeta_prime", a.zeta_prime, 2.0 * std::f64::consts::PI),
        ] {
            if !(v.is_finite() && (0.0..hi).contains(&v)) {
                return Err(invalid(name, format!("{v} outside [0, {hi})")));
            }
        }
        match self.system {
            System::Qubit => self.validate_qubit(),
            System::Grid => self.validate_grid(),
        }
    }

    fn validate_qubit(&self) -> Result<Scenario> {
        let case = QubitCase::parse(&self.case)
            .ok_or_else(|| invalid("case", format!("`{}` is not a qubit case (a_prime, b_prime, c)", self.case)))?;
        for (name, present) in [
            ("grid", self.grid.is_some()),
            ("wavepacket", self.wavepacket.is_some()),
            ("labels", self.labels != LabelParams::default()),
            ("appendix", self.appendix),
        ] {
            if present {
                return Err(invalid(name, "not used by qubit scenarios"));
            }
        }
        let a = self.angles;
        QubitScenario::new(case, a.theta, a.zeta, a.zeta_prime)
            .map(Scenario::Qubit)
            .map_err(|e| invalid("angles", e.to_string()))
    }

    fn validate_grid(&self) -> Result<Scenario> {
        let case = GridCase::parse(&self.case)
            .ok_or_else(|| invalid("case", format!("`{}` is not a grid case (a, a_prime, b, b_prime, c, d)", self.case)))?;
        let gp = self.grid.ok_or_else(|| invalid("grid", "grid scenarios need grid parameters"))?;
        let grid = GridBasis::new(gp.n, gp.h).map_err(|e| invalid("grid", e.to_string()))?;
        if 2 * gp.wrap_guard >= gp.n {
            return Err(invalid("grid.wrap_guard", "guard band covers the whole window"));
        }

        let lp = self.labels;
        let required: &[(&str, Option<f64>)] = match case {
            GridCase::A => &[("x_o", lp.x_o)],
            GridCase::APrime => &[("x_o", lp.x_o), ("y_1", lp.y_1), ("y_2", lp.y_2)],
            GridCase::B => &[("x_1", lp.x_1), ("x_2", lp.x_2)],
            GridCase::BPrime => &[("x_1", lp.x_1), ("x_2", lp.x_2), ("y_1", lp.y_1), ("y_2", lp.y_2)],
            GridCase::C => &[("x_1", lp.x_1), ("x_2", lp.x_2), ("y_o", lp.y_o)],
            GridCase::D => &[("y_o", lp.y_o)],
        };
        for (name, v) in required {
            let v = v.ok_or_else(|| invalid(&format!("labels.{name}"), "required for this case"))?;
            grid.index_of(v)
                .map_err(|_| invalid(&format!("labels.{name}"), format!("{v} is not a grid label")))?;
        }
        for (name, v) in [
            ("x_o", lp.x_o),
            ("y_o", lp.y_o),
            ("x_1", lp.x_1),
            ("x_2", lp.x_2),
            ("y_1", lp.y_1),
            ("y_2", lp.y_2),
        ] {
            if v.is_some() && !required.iter().any(|(r, _)| *r == name) {
                return Err(invalid(&format!("labels.{name}"), "not used by this case"));
            }
        }

        let needs_packet = matches!(case, GridCase::A | GridCase::B | GridCase::D);
        let packet = match (&self.wavepacket, needs_packet) {
            (None, true) => return Err(invalid("wavepacket", "required for this case")),
            (Some(_), false) => return Err(invalid("wavepacket", "not used by this case")),
            (None, false) => None,
            (Some(w), true) => Some(self.packet(w, &grid)?),
        };
        if self.appendix && case != GridCase::A {
            return Err(invalid("appendix", "momentum checks apply to case a only"));
        }

        Ok(Scenario::Grid {
            scenario: GridScenario {
                case,
                grid,
                wrap_guard: gp.wrap_guard,
                labels: Labels {
                    x_o: lp.x_o,
                    y_o: lp.y_o,
                    x_1: lp.x_1,
                    x_2: lp.x_2,
                    y_1: lp.y_1,
                    y_2: lp.y_2,
                },
                packet,
                theta: self.angles.theta,
                zeta: self.angles.zeta,
                zeta_prime: self.angles.zeta_prime,
            },
            appendix: self.appendix,
        })
    }

    fn packet(&self, w: &WavepacketParams, grid: &GridBasis) -> Result<Wavepacket> {
        let packet = match w {
            WavepacketParams::Gaussian(g) => Wavepacket::Gaussian {
                center: g.center,
                width: g.width,
                momentum: g.momentum,
            },
            WavepacketParams::Samples(s) => {
                if !s.im.is_empty() && s.im.len() != s.re.len() {
                    return Err(invalid("wavepacket.samples.im", "length differs from re"));
                }
                let im = |i: usize| s.im.get(i).copied().unwrap_or(0.0);
                Wavepacket::Samples((0..s.re.len()).map(|i| C64::new(s.re[i], im(i))).collect())
            }
            WavepacketParams::PlaneWave(p) => Wavepacket::PlaneWave { momentum: p.momentum },
        };
        let field = match w {
            WavepacketParams::Gaussian(_) => "wavepacket.gaussian",
            WavepacketParams::Samples(_) => "wavepacket.samples",
            WavepacketParams::PlaneWave(_) => "wavepacket.plane_wave",
        };
        packet.sample(grid).map_err(|e| invalid(field, e.to_string()))?;
        Ok(packet)
    }
}
