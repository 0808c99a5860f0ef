use std::f64::consts::PI;
use std::path::Path;

use anyhow::{anyhow, Context as _};
use qubit_scatter::dynamics::{PulseSequence, Segment};
use qubit_scatter::experiment::{PolarizationMode, SweepSpec};
use qubit_scatter::levels::{build_levels, LevelStructure, PhysicalConfig, Qubit, BERYLLIUM_QUBIT_SPLITTING_HZ};
use qubit_scatter::scattering::{LaserField, LaserFrequency, DEFAULT_RESONANCE_FLOOR_HZ};
use serde::{Deserialize, Serialize};
use serde_json::Value;
use sha2::{Digest, Sha256};

/// Raised for anything wrong with the configuration itself; maps to exit 2.
#[derive(Debug, thiserror::Error)]
#[error("{0}")]
pub struct ConfigError(pub String);

fn config_err(msg: impl Into<String>) -> anyhow::Error {
    ConfigError(msg.into()).into()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub physical: PhysicalConfig,
    pub field: FieldConfig,
    pub laser: LaserConfig,
    pub sweep: SweepConfig,
    pub sequence: SequenceConfig,
    pub trajectories: TrajectoriesConfig,
    pub stark: StarkConfig,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldConfig {
    /// When set, `physical.magnetic_field` is replaced by the field giving
    /// this qubit splitting (Hz).
    pub qubit_splitting_hz: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LaserConfig {
    /// GHz from the cycling transition. Exactly one of this and `frequency_hz`.
    pub detuning_ghz: Option<f64>,
    pub frequency_hz: Option<f64>,
    /// Rabi frequency on the cycling transition, rad/s.
    pub rabi: f64,
    pub polarization: PolarizationConfig,
    pub resonance_floor_hz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum PolarizationConfig {
    Keyword(PolarizationKeyword),
    Angle { angle_deg: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolarizationKeyword {
    #[serde(rename = "auto-null")]
    AutoNull,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub start_ghz: f64,
    pub stop_ghz: f64,
    pub n_points: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SequenceKind {
    SpinEcho,
    Segments,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SequenceConfig {
    pub initial: Qubit,
    pub kind: SequenceKind,
    /// Total light-on time of the spin echo, s.
    pub tau: f64,
    /// Used when `kind` is `segments`.
    pub segments: Vec<SegmentConfig>,
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum SegmentConfig {
    Rotate { theta_deg: f64, phase_deg: f64 },
    Wait { duration: f64, light: bool },
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TrajectoriesConfig {
    pub enabled: bool,
    pub n_trajectories: usize,
    pub seed: u64,
    /// s; `null` picks `0.005 / max rate`.
    pub dt: Option<f64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StarkConfig {
    pub step_deg: f64,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            physical: PhysicalConfig::default(),
            field: FieldConfig { qubit_splitting_hz: Some(BERYLLIUM_QUBIT_SPLITTING_HZ) },
            laser: LaserConfig {
                detuning_ghz: Some(-56.0),
                frequency_hz: None,
                rabi: 2.0 * PI * 1e6,
                polarization: PolarizationConfig::Keyword(PolarizationKeyword::AutoNull),
                resonance_floor_hz: DEFAULT_RESONANCE_FLOOR_HZ,
            },
            sweep: SweepConfig { start_ghz: -95.0, stop_ghz: -30.0, n_points: 651 },
            sequence: SequenceConfig {
                initial: Qubit::Up,
                kind: SequenceKind::SpinEcho,
                tau: 1e-3,
                segments: Vec::new(),
            },
            trajectories: TrajectoriesConfig { enabled: false, n_trajectories: 10_000, seed: 1, dt: None },
            stark: StarkConfig { step_deg: 1.0 },
        }
    }
}

/// Recursively overlays `patch` onto `base`; objects merge key by key, any
/// other value replaces.
fn merge(base: &mut Value, patch: Value) {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                match b.get_mut(&k) {
                    Some(slot) => merge(slot, v),
                    None => {
                        b.insert(k, v);
                    }
                }
            }
        }
        (slot, v) => *slot = v,
    }
}

/// Applies `a.b.c=VALUE`. The value is parsed as JSON when possible and taken
/// as a string otherwise.
fn apply_set(root: &mut Value, assignment: &str) -> anyhow::Result<()> {
    let (path, raw) =
        assignment.split_once('=').ok_or_else(|| config_err(format!("--set expects KEY=VALUE, got `{assignment}`")))?;
    let value = serde_json::from_str(raw).unwrap_or_else(|_| Value::String(raw.to_string()));
    let mut node = root;
    let keys: Vec<&str> = path.split('.').collect();
    for (i, key) in keys.iter().enumerate() {
        if key.is_empty() {
            return Err(config_err(format!("--set {path}: empty path segment")));
        }
        let Value::Object(map) = node else {
            return Err(config_err(format!("--set {path}: `{}` is not an object", keys[..i].join("."))));
        };
        if i + 1 == keys.len() {
            map.insert(key.to_string(), value);
            return Ok(());
        }
        node = map.entry(key.to_string()).or_insert_with(|| Value::Object(Default::default()));
    }
    unreachable!("split yields at least one segment")
}

pub fn load(path: Option<&Path>, sets: &[String], seed: Option<u64>) -> anyhow::Result<RunConfig> {
    let mut root = serde_json::to_value(RunConfig::default()).expect("default config serializes");
    if let Some(path) = path {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        let file: Value =
            serde_json::from_str(&text).map_err(|e| config_err(format!("{}: malformed JSON: {e}", path.display())))?;
        if !file.is_object() {
            return Err(config_err(format!("{}: top level must be a JSON object", path.display())));
        }
        merge(&mut root, file);
    }
    for s in sets {
        apply_set(&mut root, s)?;
    }
    let mut cfg: RunConfig = serde_path_to_error::deserialize(root)
        .map_err(|e| config_err(format!("config error at `{}`: {}", e.path(), e.inner())))?;
    if let Some(seed) = seed {
        cfg.trajectories.seed = seed;
    }
    cfg.validate()?;
    Ok(cfg)
}

impl RunConfig {
    fn validate(&self) -> anyhow::Result<()> {
        match (self.laser.detuning_ghz, self.laser.frequency_hz) {
            (Some(d), None) if d.is_finite() => {}
            (None, Some(f)) if f > 0.0 && f.is_finite() => {}
            _ => return Err(config_err("set exactly one of laser.detuning_ghz and laser.frequency_hz (finite)")),
        }
        if !(self.laser.rabi >= 0.0 && self.laser.rabi.is_finite()) {
            return Err(config_err(format!("laser.rabi must be finite and >= 0, got {}", self.laser.rabi)));
        }
        if self.laser.resonance_floor_hz.is_nan() || self.laser.resonance_floor_hz < 0.0 {
            return Err(config_err("laser.resonance_floor_hz must be >= 0"));
        }
        if let PolarizationConfig::Angle { angle_deg } = self.laser.polarization {
            if !angle_deg.is_finite() {
                return Err(config_err("laser.polarization.angle_deg must be finite"));
            }
        }
        if !(self.stark.step_deg > 0.0 && self.stark.step_deg <= 90.0) {
            return Err(config_err("stark.step_deg must lie in (0, 90]"));
        }
        if let Some(dt) = self.trajectories.dt {
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(config_err(format!("trajectories.dt must be positive, got {dt}")));
            }
        }
        if self.trajectories.n_trajectories == 0 {
            return Err(config_err("trajectories.n_trajectories must be at least 1"));
        }
        Ok(())
    }

    /// SHA-256 of the resolved configuration as compact JSON.
    pub fn hash(&self) -> String {
        let json = serde_json::to_string(self).expect("config serializes");
        hex::encode(Sha256::digest(json.as_bytes()))
    }

    pub fn physical_resolved(&self) -> anyhow::Result<PhysicalConfig> {
        let mut p = self.physical.clone();
        if let Some(target) = self.field.qubit_splitting_hz {
            p.magnetic_field = p.field_for_qubit_splitting(target)?;
        }
        Ok(p)
    }

    pub fn levels(&self) -> anyhow::Result<LevelStructure> {
        Ok(build_levels(&self.physical_resolved()?)?)
    }

    pub fn laser_frequency(&self) -> LaserFrequency {
        match (self.laser.detuning_ghz, self.laser.frequency_hz) {
            (Some(d), _) => LaserFrequency::FromCycling(d * 1e9),
            (None, Some(f)) => LaserFrequency::Absolute(f),
            (None, None) => unreachable!("validated"),
        }
    }

    /// Laser template at angle 0; the caller fixes the polarization.
    pub fn laser_template(&self) -> LaserField {
        LaserField {
            resonance_floor: self.laser.resonance_floor_hz,
            ..LaserField::linear(self.laser_frequency(), self.laser.rabi, 0.0)
        }
    }

    pub fn polarization_mode(&self) -> PolarizationMode {
        match self.laser.polarization {
            PolarizationConfig::Keyword(PolarizationKeyword::AutoNull) => PolarizationMode::AutoNull,
            PolarizationConfig::Angle { angle_deg } => PolarizationMode::Fixed(angle_deg.to_radians()),
        }
    }

    pub fn sweep_spec(&self) -> anyhow::Result<SweepSpec> {
        let spec = SweepSpec {
            detuning_start: self.sweep.start_ghz * 1e9,
            detuning_stop: self.sweep.stop_ghz * 1e9,
            n_points: self.sweep.n_points,
            rabi: self.laser.rabi,
            polarization: self.polarization_mode(),
            resonance_floor: self.laser.resonance_floor_hz,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn pulse_sequence(&self) -> anyhow::Result<PulseSequence> {
        let seq = match self.sequence.kind {
            SequenceKind::SpinEcho => PulseSequence::spin_echo(self.sequence.tau)?,
            SequenceKind::Segments => {
                if self.sequence.segments.is_empty() {
                    return Err(anyhow!(ConfigError("sequence.segments is empty".into())));
                }
                let segs = self
                    .sequence
                    .segments
                    .iter()
                    .map(|s| match *s {
                        SegmentConfig::Rotate { theta_deg, phase_deg } => {
                            Segment::Rotate { theta: theta_deg.to_radians(), phase: phase_deg.to_radians() }
                        }
                        SegmentConfig::Wait { duration, light } => Segment::Wait { duration, light },
                    })
                    .collect();
                PulseSequence::new(segs)?
            }
        };
        Ok(seq)
    }
}
