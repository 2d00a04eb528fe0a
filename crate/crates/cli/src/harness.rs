//! Experiment runners: SNR parameter sweeps, the full encode→decode
//! pipeline replay, and the power/battery report.

use crate::scenario::{Scenario, SweepAxis};
use anyhow::{anyhow, Result};
use semipit_core::channel::TILTED_RING_DEG;
use semipit_core::decoder::{DecodedEvent, Decoder, HostAction, PeakDetector, PeakDetectorConfig};
use semipit_core::power::{
    average_current_ua, discharge_runtime_hours, lifespan_hours, BatteryModel, DutyCycle,
    LoadSegment, PowerProfile,
};
use semipit_core::presets;
use semipit_core::readout::{compute_snr, SpectrumFrame, SweepSimulator};
use semipit_core::ring::{
    symbol_tuning, CarrierTable, MouseSymbol, RingEncoder, ScriptReplayer, ACTIVE_FRAME_RATE_FPS,
};
use semipit_core::LinkGeometry;
use std::collections::BTreeMap;
use std::fmt::Write as _;

// ---------------------------------------------------------------------------
// SNR sweeps
// ---------------------------------------------------------------------------

/// One table of SNR values over a swept axis. `series` names the columns,
/// `rows` holds `(axis value, one SNR per series)`.
#[derive(Debug, Clone, PartialEq)]
pub struct SnrTable {
    pub axis: SweepAxis,
    pub axis_label: String,
    pub series: Vec<String>,
    pub rows: Vec<(f64, Vec<f64>)>,
}

impl SnrTable {
    pub fn to_csv(&self) -> String {
        let mut out = self.axis_label.clone();
        for s in &self.series {
            out.push(',');
            out.push_str(s);
        }
        out.push('\n');
        for (x, values) in &self.rows {
            let _ = write!(out, "{x}");
            for v in values {
                let _ = write!(out, ",{v}");
            }
            out.push('\n');
        }
        out
    }

    pub fn to_ndjson(&self) -> String {
        let mut out = String::new();
        for (x, values) in &self.rows {
            let mut map = serde_json::Map::new();
            map.insert(self.axis_label.clone(), serde_json::json!(x));
            for (name, v) in self.series.iter().zip(values) {
                map.insert(name.clone(), serde_json::json!(v));
            }
            out.push_str(&serde_json::Value::Object(map).to_string());
            out.push('\n');
        }
        out
    }

    /// SNR column by name.
    pub fn column(&self, series: &str) -> Option<Vec<f64>> {
        let idx = self.series.iter().position(|s| s == series)?;
        Some(self.rows.iter().map(|(_, v)| v[idx]).collect())
    }

    pub fn axis_values(&self) -> Vec<f64> {
        self.rows.iter().map(|(x, _)| *x).collect()
    }
}

/// Stream-index block reserved for the shared baseline population.
const BASELINE_STREAM_BASE: u64 = 0;

fn point_stream_base(point_index: usize, frames_per_point: usize) -> u64 {
    // Baseline occupies block 0; grid points get disjoint blocks after it.
    ((point_index as u64) + 1) * frames_per_point as u64 + BASELINE_STREAM_BASE
}

fn population(
    system: &SweepSimulator,
    seed: u64,
    stream_base: u64,
    n: usize,
) -> Vec<SpectrumFrame> {
    (0..n)
        .map(|i| {
            system.frame(
                seed,
                stream_base + i as u64,
                i as f64 / system.sweep_config().frame_rate_fps,
            )
        })
        .collect()
}

/// Runs the SNR statistic over the scenario's configured axis.
///
/// For the distance and angle axes the instrument settings are constant
/// across the grid, so every point is measured against one shared
/// without-ring baseline population (one baseline per sweep run, as the
/// physical instrument would see). The power axis changes the instrument
/// noise itself, so there each point carries its own baseline.
pub fn run_snr_sweep(scenario: &Scenario, axis: SweepAxis) -> Result<SnrTable> {
    let violations = scenario.validate();
    if !violations.is_empty() {
        return Err(anyhow!("scenario invalid:\n  {}", violations.join("\n  ")));
    }
    let spec = &scenario.snr_sweep;
    let calibration = scenario.calibration()?;
    let base_system = scenario.build_system()?;
    let probe = spec.probe_frequency_hz;
    let seed = scenario.seed;
    let frames = spec.frames_per_point;

    let link_at = |distance_m: f64, bend_deg: f64, tilt_deg: f64| -> Result<_> {
        let geometry = LinkGeometry::new(distance_m, bend_deg, tilt_deg)?;
        Ok(calibration.link_for_geometry(
            &geometry,
            presets::RING_INDUCTANCE_H,
            presets::WRIST_INDUCTANCE_H,
        )?)
    };

    match axis {
        SweepAxis::Distance => {
            let baseline = population(
                &base_system.with_link(semipit_core::InductiveLink::open()),
                seed,
                BASELINE_STREAM_BASE,
                frames,
            );
            // One tilted-ring series per bend angle, plus the straight ring
            // at the reference 30° bend.
            let mut series: Vec<(String, f64, f64)> = spec
                .angles_deg
                .iter()
                .map(|a| (format!("snr_tilted_bend_{a}"), *a, TILTED_RING_DEG))
                .collect();
            series.push(("snr_straight_bend_30".into(), 30.0, 0.0));

            let grid = spec.distance_grid();
            let mut rows = Vec::with_capacity(grid.len());
            for (pi, d) in grid.iter().enumerate() {
                let mut values = Vec::with_capacity(series.len());
                for (si, (_, bend, tilt)) in series.iter().enumerate() {
                    let link = link_at(*d, *bend, *tilt)?;
                    let system = base_system.with_link(link);
                    let stream = point_stream_base(pi * series.len() + si + 1, frames);
                    let with_ring = population(&system, seed, stream, frames);
                    values.push(compute_snr(&with_ring, &baseline, probe)?.snr);
                }
                rows.push((*d, values));
            }
            Ok(SnrTable {
                axis,
                axis_label: "distance_m".into(),
                series: series.into_iter().map(|(n, _, _)| n).collect(),
                rows,
            })
        }
        SweepAxis::Angle => {
            let baseline = population(
                &base_system.with_link(semipit_core::InductiveLink::open()),
                seed,
                BASELINE_STREAM_BASE,
                frames,
            );
            let d = scenario.geometry.distance_m;
            let mut rows = Vec::new();
            for (pi, angle) in spec.angles_deg.iter().enumerate() {
                let tilted = base_system.with_link(link_at(d, *angle, TILTED_RING_DEG)?);
                let straight = base_system.with_link(link_at(d, *angle, 0.0)?);
                let s_t = point_stream_base(2 * pi + 1, frames);
                let s_s = point_stream_base(2 * pi + 2, frames);
                let snr_tilted =
                    compute_snr(&population(&tilted, seed, s_t, frames), &baseline, probe)?.snr;
                let snr_straight =
                    compute_snr(&population(&straight, seed, s_s, frames), &baseline, probe)?.snr;
                rows.push((*angle, vec![snr_tilted, snr_straight]));
            }
            Ok(SnrTable {
                axis,
                axis_label: "bend_angle_deg".into(),
                series: vec!["snr_tilted".into(), "snr_straight".into()],
                rows,
            })
        }
        SweepAxis::Power => {
            let mut rows = Vec::new();
            for (pi, power_dbm) in spec.power_grid().iter().enumerate() {
                let system = base_system.with_input_power_dbm(*power_dbm);
                let stream = point_stream_base(2 * pi + 1, frames);
                let with_ring = population(&system, seed, stream, frames);
                // The amplifier noise tracks the drive power, so the
                // baseline must be measured at the same setting.
                let without = population(
                    &system.with_link(semipit_core::InductiveLink::open()),
                    seed,
                    point_stream_base(2 * pi + 2, frames),
                    frames,
                );
                rows.push((
                    *power_dbm,
                    vec![compute_snr(&with_ring, &without, probe)?.snr],
                ));
            }
            Ok(SnrTable {
                axis,
                axis_label: "input_power_dbm".into(),
                series: vec!["snr".into()],
                rows,
            })
        }
    }
}

// ---------------------------------------------------------------------------
// Pipeline replay
// ---------------------------------------------------------------------------

/// Result of replaying an input script through the full chain.
#[derive(Debug, Clone)]
pub struct PipelineReport {
    pub events: Vec<DecodedEvent>,
    pub actions: Vec<HostAction>,
    /// truth symbol → decoded symbol (or `None` for rejected) → count,
    /// over frames where the ring was transmitting.
    pub confusion: BTreeMap<&'static str, BTreeMap<&'static str, usize>>,
    pub frames_total: usize,
    pub frames_transmitting: usize,
    pub frames_correct: usize,
    /// Frames where the ring slept; the decoder should reject these.
    pub standby_frames: usize,
    pub standby_false_events: usize,
}

impl PipelineReport {
    pub fn accuracy(&self) -> f64 {
        if self.frames_transmitting == 0 {
            return 1.0;
        }
        self.frames_correct as f64 / self.frames_transmitting as f64
    }

    pub fn confusion_csv(&self) -> String {
        let mut cols: Vec<&'static str> = MouseSymbol::ALL.iter().map(|s| s.label()).collect();
        cols.push("rejected");
        let mut out = String::from("truth");
        for c in &cols {
            let _ = write!(out, ",decoded_{c}");
        }
        out.push('\n');
        for symbol in MouseSymbol::ALL {
            let row = self.confusion.get(symbol.label());
            let _ = write!(out, "{}", symbol.label());
            for c in &cols {
                let n = row.and_then(|r| r.get(c)).copied().unwrap_or(0);
                let _ = write!(out, ",{n}");
            }
            out.push('\n');
        }
        out
    }

    pub fn summary(&self) -> String {
        format!(
            "frames: {} total, {} transmitting, {} correct (accuracy {:.4}); \
             standby: {} frames, {} false events; {} host actions",
            self.frames_total,
            self.frames_transmitting,
            self.frames_correct,
            self.accuracy(),
            self.standby_frames,
            self.standby_false_events,
            self.actions.len()
        )
    }
}

/// Replays the scenario's input script through ring encoder → channel →
/// sweep readout → decoder, collecting events, host actions and a
/// per-symbol confusion matrix.
pub fn run_pipeline(scenario: &Scenario) -> Result<PipelineReport> {
    let violations = scenario.validate();
    if !violations.is_empty() {
        return Err(anyhow!("scenario invalid:\n  {}", violations.join("\n  ")));
    }
    let script = scenario.load_script()?;
    let system = scenario.build_system()?;
    let carriers = CarrierTable::default();
    let detector = PeakDetector::for_system(&system, PeakDetectorConfig::default())?;
    let mut decoder = Decoder::new(
        detector,
        carriers.clone(),
        scenario.pipeline.debounce_frames,
    );

    let duration = script.duration_s() + scenario.pipeline.tail_s;
    let replayer = ScriptReplayer::new(script);
    let mut encoder = RingEncoder::new(carriers, 0.0);

    let frame_period = 1.0 / system.sweep_config().frame_rate_fps;
    let encoder_tick = 1.0 / ACTIVE_FRAME_RATE_FPS;

    let mut report = PipelineReport {
        events: Vec::new(),
        actions: Vec::new(),
        confusion: BTreeMap::new(),
        frames_total: 0,
        frames_transmitting: 0,
        frames_correct: 0,
        standby_frames: 0,
        standby_false_events: 0,
    };

    let mut t_encoder = 0.0;
    let mut t_frame = 0.0;
    let mut frame_index: u64 = 0;
    while t_frame <= duration {
        // March the ring forward to the readout instant at its own tick.
        while t_encoder < t_frame {
            t_encoder = (t_encoder + encoder_tick).min(t_frame);
            encoder.step(replayer.input_at(t_encoder), t_encoder)?;
        }
        let truth = encoder.transmitting();
        let tuned = system.with_ring_tuned(encoder.tuning_hz())?;
        let frame = tuned.frame(scenario.seed, frame_index, t_frame);
        let (event, actions) = decoder.process_frame(&frame)?;

        report.frames_total += 1;
        match truth {
            Some(symbol) => {
                report.frames_transmitting += 1;
                let decoded_label = event.map(|e| e.symbol.label()).unwrap_or("rejected");
                if event.map(|e| e.symbol) == Some(symbol) {
                    report.frames_correct += 1;
                }
                *report
                    .confusion
                    .entry(symbol.label())
                    .or_default()
                    .entry(decoded_label)
                    .or_default() += 1;
            }
            None => {
                report.standby_frames += 1;
                if event.is_some() {
                    report.standby_false_events += 1;
                }
            }
        }
        report.events.extend(event);
        report.actions.extend(actions);

        frame_index += 1;
        t_frame += frame_period;
    }
    Ok(report)
}

// ---------------------------------------------------------------------------
// Power report
// ---------------------------------------------------------------------------

/// Component power table plus the battery-lifespan matrix.
#[derive(Debug, Clone)]
pub struct PowerReport {
    pub profile: PowerProfile,
    /// (active hours/day, capacity mAh) → lifespan hours.
    pub lifespans: Vec<(f64, Vec<(f64, f64)>)>,
    /// Continuous-ACTIVE coulomb-counter runtimes per capacity, hours.
    pub discharge_runtimes: Vec<(f64, f64)>,
    pub average_current_active_ua: f64,
}

pub fn run_power_report(capacities_mah: &[f64], duties_hours: &[f64]) -> Result<PowerReport> {
    let profile = PowerProfile::default();
    profile.validate()?;

    let mut lifespans = Vec::new();
    for hours in duties_hours {
        let duty = DutyCycle::new(*hours)?;
        let mut row = Vec::new();
        for capacity in capacities_mah {
            let battery = BatteryModel::with_capacity(*capacity)?;
            row.push((*capacity, lifespan_hours(&battery, &duty, &profile)));
        }
        lifespans.push((*hours, row));
    }

    let mut discharge_runtimes = Vec::new();
    for capacity in capacities_mah {
        let battery = BatteryModel::with_capacity(*capacity)?;
        let runtime = discharge_runtime_hours(
            &battery,
            &[LoadSegment {
                duration_h: 1.0,
                load_uw: profile.measured_active_uw,
            }],
        )?;
        discharge_runtimes.push((*capacity, runtime));
    }

    let average_current_active_ua = average_current_ua(
        &profile,
        profile.reference_voltage_v,
        &DutyCycle::new(24.0)?,
    )?;

    Ok(PowerReport {
        profile,
        lifespans,
        discharge_runtimes,
        average_current_active_ua,
    })
}

impl PowerReport {
    /// Component table: rows per component plus estimated and measured
    /// totals, µW.
    pub fn component_table_csv(&self) -> String {
        let mut out = String::from("component,standby_uw,active_uw\n");
        for c in &self.profile.components {
            let _ = writeln!(out, "{},{},{}", c.name, c.standby_uw, c.active_uw);
        }
        let _ = writeln!(
            out,
            "Estimated total,{},{}",
            self.profile.estimated_standby_uw(),
            self.profile.estimated_active_uw()
        );
        let _ = writeln!(
            out,
            "Measured total,{},{}",
            self.profile.measured_standby_uw, self.profile.measured_active_uw
        );
        out
    }

    /// Lifespan matrix: one row per duty, one column per capacity.
    pub fn lifespan_table_csv(&self) -> String {
        let capacities: Vec<f64> = self
            .lifespans
            .first()
            .map(|(_, row)| row.iter().map(|(c, _)| *c).collect())
            .unwrap_or_default();
        let mut out = String::from("active_hours_per_day");
        for c in &capacities {
            let _ = write!(out, ",lifespan_{c}mah_h");
        }
        out.push('\n');
        for (hours, row) in &self.lifespans {
            let _ = write!(out, "{hours}");
            for (_, lifespan) in row {
                let _ = write!(out, ",{lifespan:.1}");
            }
            out.push('\n');
        }
        out
    }

    pub fn lifespan_cell(&self, hours: f64, capacity: f64) -> Option<f64> {
        self.lifespans
            .iter()
            .find(|(h, _)| *h == hours)?
            .1
            .iter()
            .find(|(c, _)| *c == capacity)
            .map(|(_, l)| *l)
    }
}

// ---------------------------------------------------------------------------
// Round-trip accuracy (shared by the acceptance suite and the CLI)
// ---------------------------------------------------------------------------

/// Decodes `n` random symbols through sweep frames at the given link and
/// returns the fraction recovered. Symbol `i` draws noise substream `i`.
pub fn symbol_round_trip_accuracy(system: &SweepSimulator, seed: u64, n: usize) -> Result<f64> {
    use rand::{Rng, SeedableRng};
    let decoder = Decoder::for_system(system)?;
    let mut picker = rand_chacha::ChaCha8Rng::seed_from_u64(seed ^ 0x5ca1ab1e);
    let mut correct = 0usize;
    for i in 0..n {
        let symbol = MouseSymbol::ALL[picker.gen_range(0..6)];
        let tuning = symbol_tuning(symbol, decoder.carriers(), system.ring().inductance_h())?;
        let tuned = system.with_ring_tuned(tuning.resonant_frequency_hz)?;
        let frame = tuned.frame(seed, i as u64, 0.0);
        if decoder.decode_frame(&frame)?.map(|e| e.symbol) == Some(symbol) {
            correct += 1;
        }
    }
    Ok(correct as f64 / n as f64)
}

/// Scales the nominal coupling so the sweep peak sits `target_snr` noise
/// deviations above the baseline, i.e. a link "calibrated to SNR = target".
pub fn link_for_target_snr(
    system: &SweepSimulator,
    target_snr: f64,
) -> semipit_core::InductiveLink {
    let sigma = system.sweep_config().noise_std_db;
    let nominal_peak = system.response_db(system.ring().resonant_frequency_hz())
        - system.bridge().baseline_floor_db;
    let target_peak = target_snr * sigma;
    // Peak height in dB moves as 40·log10(k); solve for the scale factor.
    let scale = 10f64.powf((target_peak - nominal_peak) / 40.0);
    semipit_core::InductiveLink::from_coupling(
        system.link().coupling_k() * scale,
        system.ring().inductance_h(),
        system.wrist().inductance_h(),
    )
    .expect("scaled coupling stays physical")
}
