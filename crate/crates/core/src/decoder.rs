//! Wristband-side decoding: peak detection over sweep frames and
//! classification of detected peaks into mouse events.
//!
//! The ring's resonance is broad compared to the sweep step (the line shape
//! spans tens of bins), so locating the peak by the single highest bin is
//! fragile under per-point dB noise. The detector instead correlates each
//! candidate position against the predicted line shape of a ring tuned
//! there (a matched filter over the sweep; the shape in dB is independent
//! of coupling strength above the noise floor) and keeps the
//! maximum-prominence local maximum of that score. Classification assigns
//! the nearest carrier within a guard band of half the minimum carrier
//! spacing; exact midpoints are rejected rather than guessed.

use crate::readout::{ReadoutError, SpectrumFrame, SweepSimulator};
use crate::ring::{CarrierTable, MouseSymbol};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum DecoderError {
    #[error("frame does not match the detector's sweep grid: {reason}")]
    GridMismatch { reason: String },
    #[error(transparent)]
    Frame(#[from] ReadoutError),
    #[error("decoded-event stream line {line}: {reason}")]
    StreamParse { line: usize, reason: String },
    #[error("frame {index} breaks timestamp ordering ({timestamp_s} s after {previous_s} s)")]
    UnorderedFrames {
        index: usize,
        timestamp_s: f64,
        previous_s: f64,
    },
}

// ---------------------------------------------------------------------------
// Peak detection
// ---------------------------------------------------------------------------

/// Detector tuning knobs. All of these are deliberately configuration, not
/// constants: the reference hardware's peak-picking algorithm is not public,
/// so this reconstruction keeps its parameters adjustable.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakDetectorConfig {
    /// Minimum peak height above the median frame level, dB.
    pub prominence_threshold_db: f64,
    /// Half-width of the matched-template window, bins.
    pub template_half_width_bins: usize,
    /// Half-width of the window averaged for the height estimate, bins.
    pub top_half_width_bins: usize,
    /// Candidates must correlate at least this well with the line shape.
    pub min_correlation: f64,
    /// Optional 3-point parabolic sub-bin refinement of the peak frequency.
    pub parabolic_refinement: bool,
}

impl Default for PeakDetectorConfig {
    fn default() -> Self {
        Self {
            prominence_threshold_db: 6.0,
            template_half_width_bins: 12,
            top_half_width_bins: 2,
            min_correlation: 0.0,
            parabolic_refinement: false,
        }
    }
}

/// One detected spectrum peak.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PeakDetection {
    pub peak_frequency_hz: f64,
    /// Height above the median frame level, dB.
    pub peak_height_db: f64,
    /// Median frame level the height is measured against, dB.
    pub baseline_db: f64,
    pub prominence_threshold_db: f64,
}

/// Matched-template peak detector bound to one sweep grid.
#[derive(Debug, Clone)]
pub struct PeakDetector {
    frequencies_hz: Vec<f64>,
    /// `templates[c]` is the predicted noiseless dB profile, over the
    /// clipped window around bin `c`, of a ring resonating at bin `c`.
    templates: Vec<Vec<f64>>,
    config: PeakDetectorConfig,
}

impl PeakDetector {
    /// Precomputes line-shape templates from the receiver's system model by
    /// retuning the ring across every sweep bin.
    ///
    /// Templates are rendered at the reference coupling rather than the
    /// system's current link: the dB line shape does not depend on coupling
    /// strength above the noise floor, and a detector must not degenerate
    /// just because the ring happens to be out of range right now.
    pub fn for_system(
        system: &SweepSimulator,
        config: PeakDetectorConfig,
    ) -> Result<Self, DecoderError> {
        let reference = system.with_link(crate::presets::nominal_link());
        let frequencies_hz = reference.frequencies();
        let n = frequencies_hz.len();
        let w = config.template_half_width_bins as isize;
        let mut templates = Vec::with_capacity(n);
        for c in 0..n {
            let tuned = reference
                .with_ring_tuned(frequencies_hz[c])
                .map_err(DecoderError::Frame)?;
            let lo = (c as isize - w).max(0) as usize;
            let hi = ((c as isize + w) as usize).min(n - 1);
            let profile: Vec<f64> = (lo..=hi)
                .map(|j| tuned.response_db(frequencies_hz[j]))
                .collect();
            templates.push(profile);
        }
        Ok(Self {
            frequencies_hz,
            templates,
            config,
        })
    }

    pub fn config(&self) -> &PeakDetectorConfig {
        &self.config
    }

    pub fn frequencies_hz(&self) -> &[f64] {
        &self.frequencies_hz
    }

    fn check_grid(&self, frame: &SpectrumFrame) -> Result<(), DecoderError> {
        frame.validate().map_err(DecoderError::Frame)?;
        if frame.frequencies_hz.len() != self.frequencies_hz.len() {
            return Err(DecoderError::GridMismatch {
                reason: format!(
                    "frame has {} points, detector expects {}",
                    frame.frequencies_hz.len(),
                    self.frequencies_hz.len()
                ),
            });
        }
        let step = self.frequencies_hz[1] - self.frequencies_hz[0];
        for (a, b) in frame.frequencies_hz.iter().zip(&self.frequencies_hz) {
            if (a - b).abs() > 0.01 * step {
                return Err(DecoderError::GridMismatch {
                    reason: format!("frame frequency {a} deviates from grid point {b}"),
                });
            }
        }
        Ok(())
    }

    /// Matched correlation score per bin: Pearson correlation between the
    /// frame values and the line-shape template over the clipped window.
    fn scores(&self, p_out_db: &[f64]) -> Vec<f64> {
        let n = self.frequencies_hz.len();
        let w = self.config.template_half_width_bins as isize;
        (0..n)
            .map(|c| {
                let lo = (c as isize - w).max(0) as usize;
                let hi = ((c as isize + w) as usize).min(n - 1);
                pearson(&p_out_db[lo..=hi], &self.templates[c])
            })
            .collect()
    }

    /// Runs detection with the configured prominence threshold.
    pub fn detect(&self, frame: &SpectrumFrame) -> Result<Option<PeakDetection>, DecoderError> {
        self.detect_with_threshold(frame, self.config.prominence_threshold_db)
    }

    /// Runs detection with an explicit prominence threshold in dB above the
    /// median frame level. Returns `None` when no point qualifies.
    pub fn detect_with_threshold(
        &self,
        frame: &SpectrumFrame,
        threshold_db: f64,
    ) -> Result<Option<PeakDetection>, DecoderError> {
        self.check_grid(frame)?;
        let baseline_db = frame.median_db();
        let scores = self.scores(&frame.p_out_db);
        let n = scores.len();

        // Local maxima of the matched score are the peak candidates; among
        // them the tallest (by height above baseline) wins.
        let mut best: Option<(usize, f64)> = None;
        for c in 0..n {
            let s = scores[c];
            if !s.is_finite() || s < self.config.min_correlation {
                continue;
            }
            let left_ok = c == 0 || scores[c - 1] <= s;
            let right_ok = c == n - 1 || scores[c + 1] <= s;
            if !(left_ok && right_ok) {
                continue;
            }
            let height = self.height_above(&frame.p_out_db, c, baseline_db);
            if best.is_none_or(|(_, h)| height > h) {
                best = Some((c, height));
            }
        }
        let Some((bin, height)) = best else {
            return Ok(None);
        };
        if height <= threshold_db {
            return Ok(None);
        }
        let mut peak_frequency_hz = self.frequencies_hz[bin];
        if self.config.parabolic_refinement && bin > 0 && bin < n - 1 {
            let (a, b, c) = (
                frame.p_out_db[bin - 1],
                frame.p_out_db[bin],
                frame.p_out_db[bin + 1],
            );
            let denom = a - 2.0 * b + c;
            if denom < 0.0 {
                let delta = (0.5 * (a - c) / denom).clamp(-0.5, 0.5);
                let step = self.frequencies_hz[1] - self.frequencies_hz[0];
                peak_frequency_hz += delta * step;
            }
        }
        Ok(Some(PeakDetection {
            peak_frequency_hz,
            peak_height_db: height,
            baseline_db,
            prominence_threshold_db: threshold_db,
        }))
    }

    /// Height estimate: mean of the points around `bin`, relative to the
    /// baseline. Averaging over a few bins keeps the estimate stable against
    /// per-point noise.
    fn height_above(&self, p_out_db: &[f64], bin: usize, baseline_db: f64) -> f64 {
        let w = self.config.top_half_width_bins as isize;
        let lo = (bin as isize - w).max(0) as usize;
        let hi = ((bin as isize + w) as usize).min(p_out_db.len() - 1);
        let m = p_out_db[lo..=hi].iter().sum::<f64>() / (hi - lo + 1) as f64;
        m - baseline_db
    }
}

fn pearson(xs: &[f64], ts: &[f64]) -> f64 {
    debug_assert_eq!(xs.len(), ts.len());
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let mt = ts.iter().sum::<f64>() / n;
    let mut num = 0.0;
    let mut den_x = 0.0;
    let mut den_t = 0.0;
    for (x, t) in xs.iter().zip(ts) {
        let dx = x - mx;
        let dt = t - mt;
        num += dx * dt;
        den_x += dx * dx;
        den_t += dt * dt;
    }
    if den_x <= 0.0 || den_t <= 0.0 {
        return f64::NAN;
    }
    num / (den_x * den_t).sqrt()
}

// ---------------------------------------------------------------------------
// Classification
// ---------------------------------------------------------------------------

/// One classified mouse event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecodedEvent {
    pub symbol: MouseSymbol,
    /// Peak height over the detection threshold.
    pub confidence: f64,
    pub frame_timestamp_s: f64,
}

/// Distances closer than this are treated as a tie between carriers.
const TIE_EPSILON_HZ: f64 = 1.0;

/// Nearest-carrier classification with a guard band. A peak farther than the
/// guard from every carrier is rejected, as is a peak sitting exactly midway
/// between two carriers.
pub fn classify(
    peak: &PeakDetection,
    carriers: &CarrierTable,
    frame_timestamp_s: f64,
) -> Option<DecodedEvent> {
    let mut distances: Vec<(MouseSymbol, f64)> = MouseSymbol::ALL
        .iter()
        .map(|s| (*s, (carriers.carrier_hz(*s) - peak.peak_frequency_hz).abs()))
        .collect();
    distances.sort_by(|a, b| a.1.partial_cmp(&b.1).unwrap());
    let (symbol, nearest) = distances[0];
    let runner_up = distances[1].1;
    if nearest > carriers.guard_hz() + TIE_EPSILON_HZ {
        return None;
    }
    if (runner_up - nearest).abs() <= TIE_EPSILON_HZ {
        // Exact midpoint: refuse to guess.
        return None;
    }
    Some(DecodedEvent {
        symbol,
        confidence: peak.peak_height_db / peak.prominence_threshold_db,
        frame_timestamp_s,
    })
}

// ---------------------------------------------------------------------------
// Event stream (debounce into host actions)
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum HostActionKind {
    Scroll,
    Press,
    Release,
}

/// One host-side action derived from the decoded symbol stream.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct HostAction {
    pub t: f64,
    pub action: HostActionKind,
    pub dx: i32,
    pub dy: i32,
}

/// Debounces per-frame symbols into host actions.
///
/// Sustained scroll symbols emit one unit delta per frame; a press asserts
/// once at onset and releases when the stream reverts to the idle carrier
/// (or the ring disappears). `None` frames produce no actions of their own.
#[derive(Debug, Clone)]
pub struct EventStream {
    debounce_frames: usize,
    press_held: bool,
    candidate: Option<MouseSymbol>,
    candidate_run: usize,
    asserted: Option<MouseSymbol>,
}

impl EventStream {
    pub fn new(debounce_frames: usize) -> Self {
        Self {
            debounce_frames: debounce_frames.max(1),
            press_held: false,
            candidate: None,
            candidate_run: 0,
            asserted: None,
        }
    }

    /// Feeds one frame's decode result (or `None` when nothing was
    /// detected) and returns the host actions it triggers.
    pub fn process(&mut self, decoded: Option<&DecodedEvent>, t: f64) -> Vec<HostAction> {
        // No detection counts as the idle state for debounce purposes.
        let symbol = decoded.map(|d| d.symbol);
        if symbol == self.candidate {
            self.candidate_run += 1;
        } else {
            self.candidate = symbol;
            self.candidate_run = 1;
        }
        if self.candidate_run >= self.debounce_frames {
            self.asserted = self.candidate;
        } else if self.asserted != self.candidate {
            // Between assertion changes nothing fires.
            return Vec::new();
        }

        let mut actions = Vec::new();
        match self.asserted {
            Some(MouseSymbol::Press) => {
                if !self.press_held {
                    self.press_held = true;
                    actions.push(HostAction {
                        t,
                        action: HostActionKind::Press,
                        dx: 0,
                        dy: 0,
                    });
                }
            }
            Some(MouseSymbol::ScrollUp) => actions.push(scroll(t, 0, 1)),
            Some(MouseSymbol::ScrollDown) => actions.push(scroll(t, 0, -1)),
            Some(MouseSymbol::ScrollLeft) => actions.push(scroll(t, -1, 0)),
            Some(MouseSymbol::ScrollRight) => actions.push(scroll(t, 1, 0)),
            Some(MouseSymbol::None) | None => {
                if self.press_held {
                    self.press_held = false;
                    actions.push(HostAction {
                        t,
                        action: HostActionKind::Release,
                        dx: 0,
                        dy: 0,
                    });
                }
            }
        }
        actions
    }
}

fn scroll(t: f64, dx: i32, dy: i32) -> HostAction {
    HostAction {
        t,
        action: HostActionKind::Scroll,
        dx,
        dy,
    }
}

// ---------------------------------------------------------------------------
// Decoder facade
// ---------------------------------------------------------------------------

/// Full decode result of a frame sequence.
#[derive(Debug, Clone, Default)]
pub struct DecodeRun {
    pub events: Vec<DecodedEvent>,
    pub actions: Vec<HostAction>,
}

/// Detector + carrier table + debouncer, the whole wristband-side chain.
#[derive(Debug, Clone)]
pub struct Decoder {
    detector: PeakDetector,
    carriers: CarrierTable,
    stream: EventStream,
}

impl Decoder {
    pub fn new(detector: PeakDetector, carriers: CarrierTable, debounce_frames: usize) -> Self {
        Self {
            detector,
            carriers,
            stream: EventStream::new(debounce_frames),
        }
    }

    /// Reference decoder for the given system model.
    pub fn for_system(system: &SweepSimulator) -> Result<Self, DecoderError> {
        let detector = PeakDetector::for_system(system, PeakDetectorConfig::default())?;
        Ok(Self::new(detector, CarrierTable::default(), 1))
    }

    pub fn detector(&self) -> &PeakDetector {
        &self.detector
    }

    pub fn carriers(&self) -> &CarrierTable {
        &self.carriers
    }

    /// Stateless per-frame decode: detect, then classify.
    pub fn decode_frame(
        &self,
        frame: &SpectrumFrame,
    ) -> Result<Option<DecodedEvent>, DecoderError> {
        let peak = self.detector.detect(frame)?;
        Ok(peak.and_then(|p| classify(&p, &self.carriers, frame.timestamp_s)))
    }

    /// Stateful decode of one frame, returning the event (if any) and the
    /// host actions the debouncer fires.
    pub fn process_frame(
        &mut self,
        frame: &SpectrumFrame,
    ) -> Result<(Option<DecodedEvent>, Vec<HostAction>), DecoderError> {
        let event = self.decode_frame(frame)?;
        let actions = self.stream.process(event.as_ref(), frame.timestamp_s);
        Ok((event, actions))
    }

    /// Decodes an ordered frame sequence into events plus host actions.
    pub fn decode_stream(&mut self, frames: &[SpectrumFrame]) -> Result<DecodeRun, DecoderError> {
        let mut run = DecodeRun::default();
        let mut previous_s = f64::NEG_INFINITY;
        for (index, frame) in frames.iter().enumerate() {
            if frame.timestamp_s < previous_s {
                return Err(DecoderError::UnorderedFrames {
                    index,
                    timestamp_s: frame.timestamp_s,
                    previous_s,
                });
            }
            previous_s = frame.timestamp_s;
            let (event, actions) = self.process_frame(frame)?;
            run.events.extend(event);
            run.actions.extend(actions);
        }
        Ok(run)
    }
}

// ---------------------------------------------------------------------------
// NDJSON serialization of decode results
// ---------------------------------------------------------------------------

#[derive(Serialize, Deserialize)]
struct EventLine {
    t: f64,
    symbol: MouseSymbol,
    confidence: f64,
}

/// NDJSON lines `{"t": …, "symbol": …, "confidence": …}`.
pub fn events_to_ndjson(events: &[DecodedEvent]) -> String {
    let mut out = String::new();
    for e in events {
        let line = EventLine {
            t: e.frame_timestamp_s,
            symbol: e.symbol,
            confidence: e.confidence,
        };
        out.push_str(&serde_json::to_string(&line).expect("events serialize"));
        out.push('\n');
    }
    out
}

pub fn events_from_ndjson(text: &str) -> Result<Vec<DecodedEvent>, DecoderError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, line)| {
            let parsed: EventLine =
                serde_json::from_str(line).map_err(|e| DecoderError::StreamParse {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            Ok(DecodedEvent {
                symbol: parsed.symbol,
                confidence: parsed.confidence,
                frame_timestamp_s: parsed.t,
            })
        })
        .collect()
}

/// NDJSON lines `{"t": …, "action": …, "dx": …, "dy": …}`.
pub fn actions_to_ndjson(actions: &[HostAction]) -> String {
    let mut out = String::new();
    for a in actions {
        out.push_str(&serde_json::to_string(a).expect("actions serialize"));
        out.push('\n');
    }
    out
}

pub fn actions_from_ndjson(text: &str) -> Result<Vec<HostAction>, DecoderError> {
    text.lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(idx, line)| {
            serde_json::from_str(line).map_err(|e| DecoderError::StreamParse {
                line: idx + 1,
                reason: e.to_string(),
            })
        })
        .collect()
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
