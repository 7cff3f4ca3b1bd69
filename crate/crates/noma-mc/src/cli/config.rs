//! Experiment configuration: strict TOML with full validation at parse
//! time.
//!
//! Unknown keys are rejected with the offending key named; numeric
//! constraints are checked against the simulator preconditions and
//! reported with the key path (e.g. `outage.trials_per_point: trials ≥ 1
//! required`).

use std::path::PathBuf;

use serde::Deserialize;
use thiserror::Error;

use crate::channel::FadingModel;
use crate::downlink::{BroadbandProfile, SensorProfile};
use crate::semigf::PowerPool;
use crate::sic::{sinr_threshold, DecodingPolicy};

#[derive(Debug, Error)]
pub enum ConfigError {
    /// Malformed TOML or an unknown/mistyped key; the message carries the
    /// line number and, for unknown fields, the key name.
    #[error("config parse error: {0}")]
    Parse(#[from] toml::de::Error),
    #[error("config validation error at {path}: {constraint}")]
    Validation { path: String, constraint: String },
}

fn invalid(path: &str, constraint: impl Into<String>) -> ConfigError {
    ConfigError::Validation {
        path: path.to_string(),
        constraint: constraint.into(),
    }
}

// --- raw serde layer -------------------------------------------------------

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    scenario: RawScenarioKind,
    seed: u64,
    output_dir: PathBuf,
    outage: Option<RawOutage>,
    connectivity: Option<RawConnectivity>,
    downlink: Option<RawDownlink>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawScenarioKind {
    OutageSweep,
    SemigfConnectivity,
    DownlinkPlan,
}

#[derive(Debug, Clone, Copy, Deserialize)]
#[serde(rename_all = "snake_case")]
enum RawPolicy {
    CsiBased,
    QosBased,
    Hybrid,
}

impl From<RawPolicy> for DecodingPolicy {
    fn from(p: RawPolicy) -> Self {
        match p {
            RawPolicy::CsiBased => DecodingPolicy::CsiBased,
            RawPolicy::QosBased => DecodingPolicy::QosBased,
            RawPolicy::Hybrid => DecodingPolicy::Hybrid,
        }
    }
}

#[derive(Debug, Clone, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum RawFading {
    Rayleigh { mean_gain: f64 },
    Deterministic { gains: Vec<f64> },
}

impl RawFading {
    fn build(&self, path: &str) -> Result<FadingModel, ConfigError> {
        match self {
            RawFading::Rayleigh { mean_gain } => FadingModel::rayleigh(*mean_gain),
            RawFading::Deterministic { gains } => FadingModel::deterministic(gains.clone()),
        }
        .map_err(|e| invalid(path, e.to_string()))
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawOutage {
    snr_db: Vec<f64>,
    trials_per_point: u64,
    policies: Vec<RawPolicy>,
    rate_primary: f64,
    rate_secondary: f64,
    fading_primary: RawFading,
    fading_secondary: RawFading,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConnectivity {
    orbs: usize,
    slots_per_point: u64,
    activation_prob: f64,
    k_pgfu: Vec<usize>,
    variants: Vec<RawVariant>,
    gb_rate: f64,
    gb_power_db: f64,
    gb_fading: RawFading,
    gf_rate: f64,
    gf_power_db: [f64; 2],
    gf_fading: RawFading,
    pool_levels: Option<Vec<f64>>,
    barring_factor: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum VariantKind {
    GbOnly,
    Plain,
    PowerPool,
    PowerPoolAcb,
}

impl VariantKind {
    pub fn name(&self) -> &'static str {
        match self {
            VariantKind::GbOnly => "gb_only",
            VariantKind::Plain => "plain",
            VariantKind::PowerPool => "power_pool",
            VariantKind::PowerPoolAcb => "power_pool_acb",
        }
    }
}

type RawVariant = VariantKind;

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawDownlink {
    power_budget: f64,
    sensors: Vec<RawSensor>,
    broadbands: Vec<RawBroadband>,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSensor {
    payload_bits: f64,
    blocklength: u64,
    error_prob: f64,
    gain: f64,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawBroadband {
    target_rate: f64,
    gain: f64,
}

// --- validated configuration ----------------------------------------------

/// A fully validated experiment.
#[derive(Debug, Clone)]
pub struct ExperimentConfig {
    pub seed: u64,
    pub output_dir: PathBuf,
    pub scenario: ScenarioSpec,
}

#[derive(Debug, Clone)]
pub enum ScenarioSpec {
    OutageSweep(OutageConfig),
    SemigfConnectivity(ConnectivityConfig),
    DownlinkPlan(DownlinkConfig),
}

impl ScenarioSpec {
    pub fn name(&self) -> &'static str {
        match self {
            ScenarioSpec::OutageSweep(_) => "outage_sweep",
            ScenarioSpec::SemigfConnectivity(_) => "semigf_connectivity",
            ScenarioSpec::DownlinkPlan(_) => "downlink_plan",
        }
    }
}

#[derive(Debug, Clone)]
pub struct OutageConfig {
    pub snr_db: Vec<f64>,
    pub trials_per_point: u64,
    pub policies: Vec<DecodingPolicy>,
    /// `[primary, secondary]` target rates.
    pub rates: [f64; 2],
    pub fading: [FadingModel; 2],
}

#[derive(Debug, Clone)]
pub struct ConnectivityConfig {
    pub orbs: usize,
    pub slots_per_point: u64,
    pub activation_prob: f64,
    pub k_pgfu: Vec<usize>,
    pub variants: Vec<VariantKind>,
    pub gb_rate: f64,
    pub gb_power: f64,
    pub gb_fading: FadingModel,
    pub gf_rate: f64,
    pub gf_power_range: (f64, f64),
    pub gf_fading: FadingModel,
    pub pool: PowerPool,
    /// `None` selects the "ideal" factor per sweep point: the best of a
    /// small candidate set that always includes no barring.
    pub barring_factor: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct DownlinkConfig {
    pub power_budget: f64,
    pub sensors: Vec<SensorProfile>,
    pub broadbands: Vec<BroadbandProfile>,
}

/// Parses and validates TOML configuration text.
pub fn parse_config(text: &str) -> Result<ExperimentConfig, ConfigError> {
    let raw: RawConfig = toml::from_str(text)?;

    let scenario = match raw.scenario {
        RawScenarioKind::OutageSweep => {
            let section = raw
                .outage
                .ok_or_else(|| invalid("outage", "section required for scenario outage_sweep"))?;
            forbid(raw.connectivity.is_some(), "connectivity")?;
            forbid(raw.downlink.is_some(), "downlink")?;
            ScenarioSpec::OutageSweep(validate_outage(section)?)
        }
        RawScenarioKind::SemigfConnectivity => {
            let section = raw.connectivity.ok_or_else(|| {
                invalid(
                    "connectivity",
                    "section required for scenario semigf_connectivity",
                )
            })?;
            forbid(raw.outage.is_some(), "outage")?;
            forbid(raw.downlink.is_some(), "downlink")?;
            ScenarioSpec::SemigfConnectivity(validate_connectivity(section)?)
        }
        RawScenarioKind::DownlinkPlan => {
            let section = raw.downlink.ok_or_else(|| {
                invalid("downlink", "section required for scenario downlink_plan")
            })?;
            forbid(raw.outage.is_some(), "outage")?;
            forbid(raw.connectivity.is_some(), "connectivity")?;
            ScenarioSpec::DownlinkPlan(validate_downlink(section)?)
        }
    };

    Ok(ExperimentConfig {
        seed: raw.seed,
        output_dir: raw.output_dir,
        scenario,
    })
}

fn forbid(present: bool, section: &str) -> Result<(), ConfigError> {
    if present {
        Err(invalid(
            section,
            "section does not belong to the selected scenario",
        ))
    } else {
        Ok(())
    }
}

fn require_increasing(values: &[f64], path: &str) -> Result<(), ConfigError> {
    if values.is_empty() {
        return Err(invalid(path, "at least one grid point required"));
    }
    if values.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(path, "grid must be strictly increasing"));
    }
    Ok(())
}

fn validate_outage(raw: RawOutage) -> Result<OutageConfig, ConfigError> {
    require_increasing(&raw.snr_db, "outage.snr_db")?;
    if raw.trials_per_point < 1 {
        return Err(invalid("outage.trials_per_point", "trials ≥ 1 required"));
    }
    if raw.policies.is_empty() {
        return Err(invalid("outage.policies", "at least one policy required"));
    }
    for (key, rate) in [
        ("outage.rate_primary", raw.rate_primary),
        ("outage.rate_secondary", raw.rate_secondary),
    ] {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(invalid(key, "target rate must be > 0"));
        }
    }
    Ok(OutageConfig {
        snr_db: raw.snr_db,
        trials_per_point: raw.trials_per_point,
        policies: raw.policies.into_iter().map(Into::into).collect(),
        rates: [raw.rate_primary, raw.rate_secondary],
        fading: [
            raw.fading_primary.build("outage.fading_primary")?,
            raw.fading_secondary.build("outage.fading_secondary")?,
        ],
    })
}

fn validate_connectivity(raw: RawConnectivity) -> Result<ConnectivityConfig, ConfigError> {
    if raw.orbs < 1 {
        return Err(invalid("connectivity.orbs", "at least one ORB required"));
    }
    if raw.slots_per_point < 1 {
        return Err(invalid(
            "connectivity.slots_per_point",
            "slots ≥ 1 required",
        ));
    }
    if !(0.0..=1.0).contains(&raw.activation_prob) {
        return Err(invalid("connectivity.activation_prob", "must be in [0, 1]"));
    }
    if raw.k_pgfu.is_empty() {
        return Err(invalid(
            "connectivity.k_pgfu",
            "at least one grid point required",
        ));
    }
    if raw.k_pgfu.iter().any(|k| *k < 1) {
        return Err(invalid("connectivity.k_pgfu", "PGFU counts must be ≥ 1"));
    }
    if raw.k_pgfu.windows(2).any(|w| w[0] >= w[1]) {
        return Err(invalid(
            "connectivity.k_pgfu",
            "grid must be strictly increasing",
        ));
    }
    if raw.variants.is_empty() {
        return Err(invalid(
            "connectivity.variants",
            "at least one variant required",
        ));
    }
    for (key, rate) in [
        ("connectivity.gb_rate", raw.gb_rate),
        ("connectivity.gf_rate", raw.gf_rate),
    ] {
        if !(rate > 0.0) || !rate.is_finite() {
            return Err(invalid(key, "target rate must be > 0"));
        }
    }
    if raw.gf_power_db[0] > raw.gf_power_db[1] {
        return Err(invalid(
            "connectivity.gf_power_db",
            "range must satisfy min ≤ max",
        ));
    }
    if let Some(q) = raw.barring_factor {
        if !(0.0..=1.0).contains(&q) {
            return Err(invalid("connectivity.barring_factor", "must be in [0, 1]"));
        }
    }

    let eps_gf = sinr_threshold(raw.gf_rate).expect("rate checked above");
    let pool = match &raw.pool_levels {
        Some(levels) => PowerPool::new(levels.clone(), eps_gf)
            .map_err(|e| invalid("connectivity.pool_levels", e.to_string()))?,
        None => PowerPool::layered(eps_gf, 1.1, 4),
    };

    Ok(ConnectivityConfig {
        orbs: raw.orbs,
        slots_per_point: raw.slots_per_point,
        activation_prob: raw.activation_prob,
        k_pgfu: raw.k_pgfu,
        variants: raw.variants,
        gb_rate: raw.gb_rate,
        gb_power: crate::channel::db_to_linear(raw.gb_power_db),
        gb_fading: raw.gb_fading.build("connectivity.gb_fading")?,
        gf_rate: raw.gf_rate,
        gf_power_range: (
            crate::channel::db_to_linear(raw.gf_power_db[0]),
            crate::channel::db_to_linear(raw.gf_power_db[1]),
        ),
        gf_fading: raw.gf_fading.build("connectivity.gf_fading")?,
        pool,
        barring_factor: raw.barring_factor,
    })
}

fn validate_downlink(raw: RawDownlink) -> Result<DownlinkConfig, ConfigError> {
    if !(raw.power_budget >= 0.0) || !raw.power_budget.is_finite() {
        return Err(invalid(
            "downlink.power_budget",
            "budget must be finite and ≥ 0",
        ));
    }
    let mut sensors = Vec::with_capacity(raw.sensors.len());
    for (i, s) in raw.sensors.iter().enumerate() {
        let profile = SensorProfile {
            payload_bits: s.payload_bits,
            blocklength: s.blocklength,
            decoding_error: s.error_prob,
            channel_gain: s.gain,
        };
        profile
            .validate()
            .map_err(|e| invalid(&format!("downlink.sensors[{i}]"), e.to_string()))?;
        sensors.push(profile);
    }
    let mut broadbands = Vec::with_capacity(raw.broadbands.len());
    for (i, b) in raw.broadbands.iter().enumerate() {
        let profile = BroadbandProfile {
            target_rate: b.target_rate,
            channel_gain: b.gain,
        };
        profile
            .validate()
            .map_err(|e| invalid(&format!("downlink.broadbands[{i}]"), e.to_string()))?;
        broadbands.push(profile);
    }
    Ok(DownlinkConfig {
        power_budget: raw.power_budget,
        sensors,
        broadbands,
    })
}
