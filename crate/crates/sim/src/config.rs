//! Experiment configuration (JSON, unknown keys rejected).

use std::path::{Path, PathBuf};

use hybridbf::channel::ChannelConfig;
use hybridbf::ici::{IciMode, IciProfile};
use hybridbf::precoding::PipelineSettings;
use serde::{Deserialize, Serialize};

use crate::HarnessError;

/// Precoder design / evaluation combination run per realization.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum MethodName {
    /// Rate-maximizing alternation, optimized and evaluated with ICI.
    Conventional,
    /// Interference minimization then ZF, optimized and evaluated with ICI.
    Reduced,
    /// Optimized ignoring ICI, evaluated with the configured ICI.
    NoIci,
    /// Optimized and evaluated ignoring ICI.
    NoIciIdeal,
}

impl MethodName {
    pub const ALL: [MethodName; 4] = [Self::Conventional, Self::Reduced, Self::NoIci, Self::NoIciIdeal];

    pub fn as_str(self) -> &'static str {
        match self {
            Self::Conventional => "conventional",
            Self::Reduced => "reduced",
            Self::NoIci => "no-ici",
            Self::NoIciIdeal => "no-ici-ideal",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.as_str() == s)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepAxis {
    Snr,
    NT,
    NRf,
    Users,
    IciS,
    Distance,
}

impl SweepAxis {
    pub fn as_str(self) -> &'static str {
        match self {
            Self::Snr => "snr",
            Self::NT => "n_t",
            Self::NRf => "n_rf",
            Self::Users => "users",
            Self::IciS => "ici_s",
            Self::Distance => "distance",
        }
    }

    fn is_integer(self) -> bool {
        matches!(self, Self::NT | Self::NRf | Self::Users)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Sweep {
    pub axis: SweepAxis,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub channel: ChannelConfig,
    /// Ignored when sweeping over `snr`.
    #[serde(default = "default_snr")]
    pub snr_db: Vec<f64>,
    #[serde(default = "default_ici")]
    pub ici: IciMode,
    #[serde(default = "default_methods")]
    pub methods: Vec<MethodName>,
    /// Defaults to an `snr` sweep over `snr_db`.
    #[serde(default)]
    pub sweep: Option<Sweep>,
    #[serde(default = "default_realizations")]
    pub realizations: usize,
    #[serde(default)]
    pub seed: u64,
    /// `pipeline.method` is ignored; `methods` decides what runs.
    #[serde(default)]
    pub pipeline: PipelineSettings,
    #[serde(default)]
    pub output: Option<PathBuf>,
    /// Fill the `time_ms_mean` column. Off by default so that output files
    /// are reproducible byte for byte.
    #[serde(default)]
    pub timing: bool,
    /// Design each precoder once on the unswept configuration and only
    /// evaluate it at every sweep point (`distance` and `ici_s` axes).
    #[serde(default)]
    pub fixed_precoders: bool,
}

fn default_snr() -> Vec<f64> {
    vec![10.0]
}

fn default_ici() -> IciMode {
    IciMode::Scalar { s: 0.3 }
}

fn default_methods() -> Vec<MethodName> {
    vec![MethodName::Conventional, MethodName::Reduced]
}

fn default_realizations() -> usize {
    20
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            channel: ChannelConfig::default(),
            snr_db: default_snr(),
            ici: default_ici(),
            methods: default_methods(),
            sweep: None,
            realizations: default_realizations(),
            seed: 0,
            pipeline: PipelineSettings::default(),
            output: None,
            timing: false,
            fixed_precoders: false,
        }
    }
}

/// Scenario at one sweep value.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepPoint {
    pub value: f64,
    pub channel: ChannelConfig,
    pub ici: IciMode,
    pub pipeline: PipelineSettings,
    pub snr_db: Vec<f64>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self, HarnessError> {
        serde_json::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path).map_err(|source| HarnessError::Io { path: path.into(), source })?;
        Self::from_json(&text).map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
    }

    pub fn effective_sweep(&self) -> Sweep {
        self.sweep.clone().unwrap_or_else(|| Sweep { axis: SweepAxis::Snr, values: self.snr_db.clone() })
    }

    /// The configuration with no sweep value applied.
    pub fn base_point(&self) -> SweepPoint {
        SweepPoint {
            value: f64::NAN,
            channel: self.channel.clone(),
            ici: self.ici,
            pipeline: self.pipeline,
            snr_db: self.snr_db.clone(),
        }
    }

    pub fn point(&self, value: f64) -> Result<SweepPoint, HarnessError> {
        let sweep = self.effective_sweep();
        let mut p = SweepPoint { value, ..self.base_point() };
        if sweep.axis.is_integer() && !(value >= 1.0 && value.fract() == 0.0) {
            return Err(HarnessError::Config(format!("{} sweep needs positive integers, got {value}", sweep.axis.as_str())));
        }
        match sweep.axis {
            SweepAxis::Snr => p.snr_db = vec![value],
            SweepAxis::NT => p.channel.tx_antennas = value as usize,
            SweepAxis::NRf => p.pipeline.rf_chains = value as usize,
            SweepAxis::Users => p.channel.num_users = value as usize,
            SweepAxis::Distance => p.channel.link_distance_m = value,
            SweepAxis::IciS => {
                p.ici = match self.ici {
                    IciMode::Scalar { .. } => IciMode::Scalar { s: value },
                    IciMode::Cfo { .. } => IciMode::Cfo { epsilon: value },
                    IciMode::None => {
                        return Err(HarnessError::Config("ici_s sweep needs a scalar or cfo ICI mode".into()));
                    }
                }
            }
        }
        Ok(p)
    }

    pub fn points(&self) -> Result<Vec<SweepPoint>, HarnessError> {
        self.effective_sweep().values.iter().map(|&v| self.point(v)).collect()
    }

    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |msg: String| Err(HarnessError::Config(msg));
        let sweep = self.effective_sweep();
        if sweep.values.is_empty() {
            return bad("sweep values must not be empty".into());
        }
        if sweep.axis != SweepAxis::Snr && self.snr_db.is_empty() {
            return bad("snr_db must not be empty".into());
        }
        if self.methods.is_empty() {
            return bad("methods must not be empty".into());
        }
        let mut seen = self.methods.clone();
        seen.sort();
        seen.dedup();
        if seen.len() != self.methods.len() {
            return bad("methods must not repeat".into());
        }
        if self.realizations == 0 {
            return bad("realizations must be at least 1".into());
        }
        if self.fixed_precoders && !matches!(sweep.axis, SweepAxis::Distance | SweepAxis::IciS) {
            return bad("fixed_precoders needs a distance or ici_s sweep".into());
        }
        let mut points = self.points()?;
        if self.fixed_precoders {
            points.push(self.base_point());
        }
        for p in &points {
            if let Some(snr) = p.snr_db.iter().find(|s| !s.is_finite()) {
                return bad(format!("snr_db entries must be finite, got {snr}"));
            }
            p.channel.validate()?;
            p.pipeline.validate()?;
            IciProfile::<f64>::from_mode(p.channel.num_subcarriers, p.ici)?;
            let (u, n_rf, n_t) = (p.channel.num_users, p.pipeline.rf_chains, p.channel.tx_antennas);
            if !(u <= n_rf && n_rf <= n_t) {
                return bad(format!("need users <= rf_chains <= tx_antennas, got {u} <= {n_rf} <= {n_t}"));
            }
        }
        Ok(())
    }
}
