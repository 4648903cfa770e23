//! Network configuration: TOML schema, defaults, presets and validation.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::Path;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::blockage::{aleph, delta_coeff, BlockageParams};
use crate::channel::{link_budget, ChannelParams, LinkBudget};
use crate::delay_analytics::{
    tx_delay_moments, z_param, Availability, C2Form, DelayOptions, QueueParams, SecondMomentForm,
};
use crate::error::{Error, Result};
use crate::evt_risk::{Identification, MIN_BLOCK};

const PRESETS: [(&str, &str); 2] = [
    ("table2_1thz", include_str!("../presets/table2_1thz.toml")),
    (
        "table2_0p2thz",
        include_str!("../presets/table2_0p2thz.toml"),
    ),
];

/// Blockage parameters that are not shared with the channel section.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BlockageSection {
    /// Self-blockage angle in radians, used when the orientation is fixed.
    pub omega_self: f64,
    pub iota_b: f64,
    pub v_b: f64,
    pub nu: f64,
    pub h_b: f64,
    pub h_r: f64,
    pub h_t: f64,
}

impl Default for BlockageSection {
    fn default() -> Self {
        BlockageSection {
            omega_self: PI,
            iota_b: 0.125,
            v_b: 1.5,
            nu: 2.0,
            h_b: 1.8,
            h_r: 1.4,
            h_t: 3.0,
        }
    }
}

/// How the self-blockage angle evolves in the simulator.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrientationModel {
    /// Redrawn uniformly on `[0, 2π]` at every reorientation.
    #[default]
    Uniform,
    /// Held at `omega_self` for the whole session.
    Fixed,
}

/// Which SBSs a given orientation shadows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SelfBlockRule {
    /// Each SBS independently with probability `ω/2π`.
    #[default]
    Bernoulli,
    /// SBSs whose bearing falls in the body sector behind the heading.
    Sector,
}

/// Source of the interference seen by each transmission.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum InterferenceMode {
    /// Gaussian draw per service, truncated at zero.
    #[default]
    PerService,
    /// Sum over the session's deployment, each interferer active half the time.
    Geometric,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSettings {
    /// Side of the square room in m; the user stands at its centre.
    pub region_side: f64,
    /// Session length in s.
    pub session_length: f64,
    pub runs: usize,
    pub seed: u64,
    /// Rate of head reorientations in 1/s.
    pub reorientation_rate: f64,
    pub orientation: OrientationModel,
    pub self_blockage: SelfBlockRule,
    pub interference: InterferenceMode,
    pub guaranteed_los: bool,
    /// Reliability thresholds in s.
    pub deltas: Vec<f64>,
    /// Requests per block for the tail model; derived from the session when absent.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub block_size: Option<usize>,
    pub grid_points: usize,
    /// Grid end as a multiple of the mean end-to-end delay.
    pub grid_span: f64,
    pub tolerance: f64,
    pub c2_form: C2Form,
    pub second_moment_form: SecondMomentForm,
    pub identification: Identification,
}

impl Default for SimSettings {
    fn default() -> Self {
        SimSettings {
            region_side: 20.0,
            session_length: 600.0,
            runs: 2500,
            seed: 1,
            reorientation_rate: 90.0,
            orientation: OrientationModel::default(),
            self_blockage: SelfBlockRule::default(),
            interference: InterferenceMode::default(),
            guaranteed_los: false,
            deltas: vec![0.005, 0.010, 0.020],
            block_size: None,
            grid_points: 1 << 14,
            grid_span: 20.0,
            tolerance: 1e-8,
            c2_form: C2Form::default(),
            second_moment_form: SecondMomentForm::default(),
            identification: Identification::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NetworkConfig {
    pub channel: ChannelParams,
    pub blockage: BlockageSection,
    pub queues: QueueParams,
    pub sim: SimSettings,
}

fn line_of(text: &str, offset: usize) -> usize {
    text[..offset.min(text.len())].matches('\n').count() + 1
}

fn parse_error(text: &str, err: toml::de::Error) -> Error {
    let line = err.span().map(|s| line_of(text, s.start)).unwrap_or(0);
    Error::Parse {
        line,
        message: err.message().trim().to_string(),
    }
}

impl NetworkConfig {
    /// Parses and validates TOML text.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let table: toml::Table = toml::from_str(text).map_err(|e| parse_error(text, e))?;
        if table.is_empty() {
            return Err(Error::Parse {
                line: 1,
                message: "configuration is empty".into(),
            });
        }
        let config: NetworkConfig = toml::from_str(text).map_err(|e| parse_error(text, e))?;
        log_defaults(&table);
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Io(format!("cannot read {}: {e}", path.display())))?;
        Self::from_toml_str(&text)
    }

    /// Shipped configuration by name.
    pub fn preset(name: &str) -> Result<Self> {
        let text = PRESETS
            .iter()
            .find(|(n, _)| *n == name)
            .map(|(_, t)| *t)
            .ok_or_else(|| {
                Error::Config(format!(
                    "unknown preset {name:?}; available: {}",
                    preset_names().join(", ")
                ))
            })?;
        Self::from_toml_str(text)
    }

    pub fn validate(&self) -> Result<()> {
        self.channel.validate()?;
        self.blockage_params().validate()?;
        self.queues.validate()?;
        let s = &self.sim;
        if !(s.region_side >= 2.0 * self.channel.omega) {
            return Err(Error::Config(format!(
                "region side {} must be at least 2 Omega = {} so the user's disc fits",
                s.region_side,
                2.0 * self.channel.omega
            )));
        }
        if !(s.session_length > 0.0 && s.session_length.is_finite()) {
            return Err(Error::Config(format!(
                "session_length must be positive, got {}",
                s.session_length
            )));
        }
        if s.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if !(s.reorientation_rate > 0.0 && s.reorientation_rate.is_finite()) {
            return Err(Error::Config(format!(
                "reorientation_rate must be positive, got {}",
                s.reorientation_rate
            )));
        }
        if s.deltas.iter().any(|d| !(*d >= 0.0 && d.is_finite())) {
            return Err(Error::Config("deltas must be nonnegative".into()));
        }
        if let Some(b) = s.block_size {
            if b < MIN_BLOCK {
                return Err(Error::Config(format!(
                    "block_size must be at least {MIN_BLOCK}, got {b}"
                )));
            }
        }
        if s.grid_points < 16 || !(s.grid_span > 1.0) {
            return Err(Error::Config(format!(
                "grid needs at least 16 points and span above 1, got {} and {}",
                s.grid_points, s.grid_span
            )));
        }
        if !(s.tolerance > 0.0 && s.tolerance < 1.0) {
            return Err(Error::Config(format!(
                "tolerance must lie in (0, 1), got {}",
                s.tolerance
            )));
        }
        let link = link_budget(&self.channel)?;
        let tx = tx_delay_moments(&link, &self.queues, self.availability()?, s.c2_form)?;
        let rho = self.queues.lambda2 * tx.e_alpha;
        if !(rho < 1.0) {
            return Err(Error::Config(format!(
                "SBS queue is unstable: rho2 = lambda2 E[alpha] = {rho:.4} must be below 1"
            )));
        }
        Ok(())
    }

    pub fn blockage_params(&self) -> BlockageParams {
        let b = &self.blockage;
        BlockageParams {
            omega_self: b.omega_self,
            iota_b: b.iota_b,
            v_b: b.v_b,
            nu: b.nu,
            h_b: b.h_b,
            h_r: b.h_r,
            h_t: b.h_t,
            omega_radius: self.channel.omega,
            eta_p: self.channel.eta,
        }
    }

    pub fn link_budget(&self) -> Result<LinkBudget> {
        link_budget(&self.channel)
    }

    /// `Z = ℵ η_P Ω²` for the blockage model.
    pub fn z(&self) -> Result<f64> {
        let b = self.blockage_params();
        let a = aleph(delta_coeff(&b)?, b.nu, b.omega_radius);
        Ok(z_param(a, b.eta_p, b.omega_radius))
    }

    pub fn availability(&self) -> Result<Availability> {
        if self.sim.guaranteed_los {
            Ok(Availability::Guaranteed)
        } else {
            Ok(Availability::Blockage { z: self.z()? })
        }
    }

    pub fn delay_options(&self) -> DelayOptions {
        DelayOptions {
            c2_form: self.sim.c2_form,
            second_moment_form: self.sim.second_moment_form,
        }
    }

    /// Requests per block: configured, or the expected requests per session.
    pub fn block_size(&self) -> usize {
        self.sim.block_size.unwrap_or_else(|| {
            ((self.sim.session_length * self.queues.lambda1).round() as usize).max(MIN_BLOCK)
        })
    }

    /// Canonical TOML rendering; field order is fixed by the schema.
    pub fn canonical_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// First 16 hex digits of the SHA-256 of the canonical rendering.
    pub fn params_hash(&self) -> String {
        let digest = Sha256::digest(self.canonical_toml().as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

pub fn preset_names() -> Vec<&'static str> {
    PRESETS.iter().map(|(n, _)| *n).collect()
}

fn log_defaults(table: &toml::Table) {
    let defaults = toml::Table::try_from(NetworkConfig::default()).expect("defaults serialize");
    for (section, values) in &defaults {
        let given: BTreeMap<&str, ()> = table
            .get(section)
            .and_then(|v| v.as_table())
            .map(|t| t.keys().map(|k| (k.as_str(), ())).collect())
            .unwrap_or_default();
        if let Some(values) = values.as_table() {
            for (key, value) in values {
                if !given.contains_key(key.as_str()) {
                    log::info!("{section}.{key} not set; using default {value}");
                }
            }
        }
    }
}
