//! Scenario configuration: one human-editable TOML file per experiment,
//! resolved against the reference hardware presets.
//!
//! A scenario pins everything a run needs — pose, sweep settings, bridge
//! overrides, noise profile, input script and the RNG seed — so every
//! emitted table is reproducible from the file alone. The seed is mandatory:
//! there are no wall-clock defaults anywhere.

use anyhow::{anyhow, Context, Result};
use semipit_core::channel::{ChannelError, CouplingCalibration, TILTED_RING_DEG};
use semipit_core::circuit::AngularFrequency;
use semipit_core::presets;
use semipit_core::readout::{BridgeConfig, SweepConfig, SweepSimulator};
use semipit_core::ring::{CarrierTable, InputScript};
use semipit_core::{InductiveLink, LinkGeometry};
use serde::{Deserialize, Serialize};
use std::path::{Path, PathBuf};

/// Noise environment of a run. The noisy variant models electromagnetically
/// loud surroundings as a +20 dB detector-floor offset.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseProfile {
    #[default]
    Nominal,
    NoisyEnvironment,
}

/// Extra noise floor applied by [`NoiseProfile::NoisyEnvironment`], dB.
pub const NOISY_ENVIRONMENT_FLOOR_OFFSET_DB: f64 = 20.0;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GeometryConfig {
    pub distance_m: f64,
    pub bend_angle_deg: f64,
    pub ring_tilt_deg: f64,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            distance_m: 0.14,
            bend_angle_deg: 30.0,
            ring_tilt_deg: TILTED_RING_DEG,
        }
    }
}

impl GeometryConfig {
    pub fn link_geometry(&self) -> Result<LinkGeometry, ChannelError> {
        LinkGeometry::new(self.distance_m, self.bend_angle_deg, self.ring_tilt_deg)
    }
}

/// Partial overrides applied on top of the calibrated bridge defaults.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BridgeOverrides {
    pub input_power_dbm: Option<f64>,
    pub saturation_power_dbm: Option<f64>,
    pub r_amp: Option<f64>,
    pub baseline_floor_db: Option<f64>,
}

impl BridgeOverrides {
    fn apply(&self, mut bridge: BridgeConfig) -> BridgeConfig {
        if let Some(v) = self.input_power_dbm {
            bridge.v_in_power_dbm = v;
        }
        if let Some(v) = self.saturation_power_dbm {
            bridge.saturation_power_dbm = v;
        }
        if let Some(v) = self.r_amp {
            bridge.r_amp = v;
        }
        if let Some(v) = self.baseline_floor_db {
            bridge.baseline_floor_db = v;
        }
        bridge
    }
}

/// Partial overrides applied on top of the default sweep settings.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepOverrides {
    pub f_start_hz: Option<f64>,
    pub f_stop_hz: Option<f64>,
    pub n_points: Option<usize>,
    pub frame_rate_fps: Option<f64>,
    pub noise_std_db: Option<f64>,
}

impl SweepOverrides {
    fn apply(&self, mut sweep: SweepConfig) -> SweepConfig {
        if let Some(v) = self.f_start_hz {
            sweep.f_start_hz = v;
        }
        if let Some(v) = self.f_stop_hz {
            sweep.f_stop_hz = v;
        }
        if let Some(v) = self.n_points {
            sweep.n_points = v;
        }
        if let Some(v) = self.frame_rate_fps {
            sweep.frame_rate_fps = v;
        }
        if let Some(v) = self.noise_std_db {
            sweep.noise_std_db = v;
        }
        sweep
    }
}

/// Which quantity an SNR sweep walks.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "kebab-case")]
pub enum SweepAxis {
    #[default]
    Distance,
    Angle,
    Power,
}

/// SNR-sweep grid specification. Defaults follow the reference
/// characterization: 10–20 cm in 1 cm steps, −30°–60° in 30° steps,
/// −30–+10 dBm in 5 dB steps, 100 frames per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SnrSweepSpec {
    pub axis: SweepAxis,
    pub frames_per_point: usize,
    /// Ring tuning the SNR is probed at.
    pub probe_frequency_hz: f64,
    pub distance_start_m: f64,
    pub distance_stop_m: f64,
    pub distance_step_m: f64,
    /// Bend angles for the distance sweep's tilted-ring series.
    pub angles_deg: Vec<f64>,
    pub power_start_dbm: f64,
    pub power_stop_dbm: f64,
    pub power_step_db: f64,
}

impl Default for SnrSweepSpec {
    fn default() -> Self {
        Self {
            axis: SweepAxis::Distance,
            frames_per_point: 100,
            probe_frequency_hz: presets::SNR_PROBE_HZ,
            distance_start_m: 0.10,
            distance_stop_m: 0.20,
            distance_step_m: 0.01,
            angles_deg: vec![-30.0, 0.0, 30.0, 60.0],
            power_start_dbm: -30.0,
            power_stop_dbm: 10.0,
            power_step_db: 5.0,
        }
    }
}

impl SnrSweepSpec {
    pub fn distance_grid(&self) -> Vec<f64> {
        grid(
            self.distance_start_m,
            self.distance_stop_m,
            self.distance_step_m,
        )
    }

    pub fn power_grid(&self) -> Vec<f64> {
        grid(
            self.power_start_dbm,
            self.power_stop_dbm,
            self.power_step_db,
        )
    }
}

fn grid(start: f64, stop: f64, step: f64) -> Vec<f64> {
    let mut out = Vec::new();
    if step <= 0.0 {
        return out;
    }
    let n = ((stop - start) / step).round() as i64;
    for i in 0..=n.max(0) {
        let v = start + i as f64 * step;
        if v <= stop + 1e-9 {
            out.push(v);
        }
    }
    out
}

/// Pipeline-run settings.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelineSpec {
    /// Seconds of slack simulated after the last script event.
    pub tail_s: f64,
    /// Debounce frames for the host-action stream.
    pub debounce_frames: usize,
}

impl Default for PipelineSpec {
    fn default() -> Self {
        Self {
            tail_s: 0.5,
            debounce_frames: 1,
        }
    }
}

/// Battery table settings for `power-report`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PowerReportSpec {
    pub capacities_mah: Vec<f64>,
    pub duties_hours_per_day: Vec<f64>,
}

impl Default for PowerReportSpec {
    fn default() -> Self {
        Self {
            capacities_mah: vec![20.0, 27.0],
            duties_hours_per_day: vec![24.0, 8.0, 4.0],
        }
    }
}

/// One experiment configuration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    /// RNG seed; mandatory so every run is reproducible.
    pub seed: u64,
    #[serde(default)]
    pub noise_profile: NoiseProfile,
    /// Input script path, relative to the scenario file.
    #[serde(default)]
    pub event_script: Option<PathBuf>,
    /// Coupling calibration file, relative to the scenario file; defaults to
    /// the built-in anchors.
    #[serde(default)]
    pub calibration_file: Option<PathBuf>,
    #[serde(default)]
    pub geometry: GeometryConfig,
    #[serde(default)]
    pub sweep: SweepOverrides,
    #[serde(default)]
    pub bridge: BridgeOverrides,
    #[serde(default)]
    pub snr_sweep: SnrSweepSpec,
    #[serde(default)]
    pub pipeline: PipelineSpec,
    #[serde(default)]
    pub power_report: PowerReportSpec,
    /// Directory the scenario was loaded from; resolves relative paths.
    #[serde(skip)]
    pub base_dir: PathBuf,
}

impl Default for Scenario {
    fn default() -> Self {
        Self {
            seed: 0,
            noise_profile: NoiseProfile::default(),
            event_script: None,
            calibration_file: None,
            geometry: GeometryConfig::default(),
            sweep: SweepOverrides::default(),
            bridge: BridgeOverrides::default(),
            snr_sweep: SnrSweepSpec::default(),
            pipeline: PipelineSpec::default(),
            power_report: PowerReportSpec::default(),
            base_dir: PathBuf::from("."),
        }
    }
}

impl Scenario {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading scenario {}", path.display()))?;
        let mut scenario: Scenario = toml::from_str(&text)
            .with_context(|| format!("parsing scenario {}", path.display()))?;
        scenario.base_dir = path
            .parent()
            .map(Path::to_path_buf)
            .unwrap_or_else(|| PathBuf::from("."));
        Ok(scenario)
    }

    pub fn calibration(&self) -> Result<CouplingCalibration> {
        match &self.calibration_file {
            None => Ok(CouplingCalibration::default()),
            Some(rel) => {
                let path = self.base_dir.join(rel);
                let text = std::fs::read_to_string(&path)
                    .with_context(|| format!("reading calibration {}", path.display()))?;
                CouplingCalibration::parse(&text)
                    .map_err(|e| anyhow!("parsing calibration {}: {e}", path.display()))
            }
        }
    }

    pub fn sweep_config(&self) -> SweepConfig {
        self.sweep.apply(SweepConfig::default())
    }

    pub fn bridge_config(&self) -> BridgeConfig {
        let mut bridge = self.bridge.apply(BridgeConfig::nominal());
        if self.noise_profile == NoiseProfile::NoisyEnvironment {
            bridge.baseline_floor_db += NOISY_ENVIRONMENT_FLOOR_OFFSET_DB;
        }
        bridge
    }

    /// Link at the scenario pose, under the scenario calibration.
    pub fn link(&self) -> Result<InductiveLink> {
        let calibration = self.calibration()?;
        let geometry = self.geometry.link_geometry()?;
        Ok(calibration.link_for_geometry(
            &geometry,
            presets::RING_INDUCTANCE_H,
            presets::WRIST_INDUCTANCE_H,
        )?)
    }

    /// Full simulator for this scenario, ring at the SNR probe tuning.
    pub fn build_system(&self) -> Result<SweepSimulator> {
        let ring = presets::ring_coil()
            .retuned(self.snr_sweep.probe_frequency_hz)
            .map_err(|e| anyhow!("probe tuning: {e}"))?;
        Ok(SweepSimulator::new(
            ring,
            presets::wristband_coil(),
            self.link()?,
            self.bridge_config(),
            self.sweep_config(),
        )?)
    }

    pub fn load_script(&self) -> Result<InputScript> {
        let rel = self
            .event_script
            .as_ref()
            .ok_or_else(|| anyhow!("scenario has no event_script"))?;
        let path = self.base_dir.join(rel);
        let text = std::fs::read_to_string(&path)
            .with_context(|| format!("reading script {}", path.display()))?;
        InputScript::parse(&text).map_err(|e| anyhow!("{}: {e}", path.display()))
    }

    /// Collects every configuration violation. An empty list means the
    /// scenario is runnable; nothing is simulated before this passes.
    pub fn validate(&self) -> Vec<String> {
        let mut violations = Vec::new();
        let sweep = self.sweep_config();
        if let Err(e) = sweep.validate() {
            violations.push(e.to_string());
        }

        // Carrier table vs sweep grid: every carrier inside the band and the
        // minimum carrier spacing comfortably above the grid step.
        let carriers = CarrierTable::default();
        if sweep.validate().is_ok() {
            let step = sweep.step_hz();
            if carriers.min_spacing_hz() <= 2.0 * step {
                violations.push(format!(
                    "carrier spacing {:.0} Hz must exceed twice the sweep step {:.0} Hz",
                    carriers.min_spacing_hz(),
                    step
                ));
            }
            for (symbol, f) in semipit_core::ring::MouseSymbol::ALL
                .iter()
                .zip(carriers.carriers_hz())
            {
                if !sweep.contains(*f) {
                    violations.push(format!(
                        "carrier {symbol:?} at {f} Hz lies outside the sweep band"
                    ));
                }
            }
        }

        if let Err(e) = self.geometry.link_geometry() {
            violations.push(e.to_string());
        }
        if let Err(e) = self.calibration() {
            violations.push(e.to_string());
        }

        // Bridge must actually be balanced against the wristband coil.
        let bridge = self.bridge_config();
        if let Err(e) = bridge.validate_balance(
            &presets::wristband_coil(),
            presets::WRIST_RESONANCE_HZ,
            1e-6,
        ) {
            violations.push(e.to_string());
        }
        if AngularFrequency::from_hz(self.snr_sweep.probe_frequency_hz).is_err() {
            violations.push("snr probe frequency must be positive".into());
        }

        // SNR grids must stay inside the calibrated envelope.
        match self.snr_sweep.axis {
            SweepAxis::Distance => {
                let offenders: Vec<String> = self
                    .snr_sweep
                    .distance_grid()
                    .iter()
                    .filter(|d| **d <= 0.0)
                    .map(|d| format!("{d} m"))
                    .collect();
                if !offenders.is_empty() {
                    violations.push(format!(
                        "distance grid points outside envelope: {}",
                        offenders.join(", ")
                    ));
                }
                for angle in &self.snr_sweep.angles_deg {
                    if LinkGeometry::new(0.14, *angle, TILTED_RING_DEG).is_err() {
                        violations.push(format!("bend angle {angle}° outside envelope"));
                    }
                }
            }
            SweepAxis::Angle => {
                let offenders: Vec<String> = self
                    .snr_sweep
                    .angles_deg
                    .iter()
                    .filter(|a| LinkGeometry::new(self.geometry.distance_m, **a, 0.0).is_err())
                    .map(|a| format!("{a}°"))
                    .collect();
                if !offenders.is_empty() {
                    violations.push(format!(
                        "angle grid points outside envelope: {}",
                        offenders.join(", ")
                    ));
                }
            }
            SweepAxis::Power => {
                if self.snr_sweep.power_grid().is_empty() {
                    violations.push("power grid is empty".into());
                }
            }
        }
        violations
    }
}
