//! Ring-side encoder: the mouse input alphabet, varactor-based
//! frequency-shift keying, diagonal-scroll decomposition, and the
//! ACTIVE/STANDBY duty-cycle state machine.
//!
//! Each of the six input states owns one carrier frequency; transmitting a
//! symbol means retuning the ring's resonance to that carrier. Diagonal
//! scrolls have no carrier of their own — the encoder alternates the
//! vertical and horizontal components frame by frame, vertical first.

use crate::circuit::{capacitance_for_frequency, CircuitError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Varactor capacitance range of the tuning diode, farads.
pub const VARACTOR_C_MIN_F: f64 = 27e-12;
pub const VARACTOR_C_MAX_F: f64 = 69e-12;
/// Control voltage at which the varactor reaches its minimum capacitance.
pub const VARACTOR_V_MAX: f64 = 3.0;

/// Effective series capacitances outside this window are treated as
/// inconsistent with the lumped single-capacitor coil model.
pub const EFFECTIVE_C_RANGE_F: (f64, f64) = (1e-12, 1e-9);

/// Streaming rate in ACTIVE mode, frames per second.
pub const ACTIVE_FRAME_RATE_FPS: f64 = 200.0;
/// Inactivity timeout before falling back to STANDBY, seconds.
pub const STANDBY_TIMEOUT_S: f64 = 30.0;
/// MCU clock per mode, Hz.
pub const ACTIVE_CLOCK_HZ: f64 = 524e3;
pub const STANDBY_CLOCK_HZ: f64 = 32e3;
/// How often the STANDBY timer wakes to poll the input switches, seconds.
pub const STANDBY_WAKE_PERIOD_S: f64 = 0.010;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum RingError {
    #[error("time went backwards: step at {now} s after {last} s")]
    TimeRegression { now: f64, last: f64 },
    #[error("symbol {symbol:?} needs effective capacitance {capacitance_f:e} F outside the consistent range")]
    TuningOutOfRange {
        symbol: MouseSymbol,
        capacitance_f: f64,
    },
    #[error("scroll components must be -1, 0 or +1, got ({horizontal}, {vertical})")]
    BadScrollComponent { horizontal: i8, vertical: i8 },
    #[error(transparent)]
    Circuit(#[from] CircuitError),
    #[error("input script line {line}: {reason}")]
    ScriptParse { line: usize, reason: String },
}

// ---------------------------------------------------------------------------
// Input alphabet
// ---------------------------------------------------------------------------

/// The six-valued input alphabet. `None` is the idle carrier the ring keeps
/// transmitting while awake with no input.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MouseSymbol {
    None,
    ScrollDown,
    ScrollUp,
    ScrollLeft,
    ScrollRight,
    Press,
}

impl MouseSymbol {
    pub const ALL: [MouseSymbol; 6] = [
        MouseSymbol::None,
        MouseSymbol::ScrollDown,
        MouseSymbol::ScrollUp,
        MouseSymbol::ScrollLeft,
        MouseSymbol::ScrollRight,
        MouseSymbol::Press,
    ];

    /// Index into the carrier table (frequency-ascending order).
    pub fn index(self) -> usize {
        Self::ALL.iter().position(|s| *s == self).unwrap()
    }

    pub fn label(self) -> &'static str {
        match self {
            MouseSymbol::None => "none",
            MouseSymbol::ScrollDown => "scroll_down",
            MouseSymbol::ScrollUp => "scroll_up",
            MouseSymbol::ScrollLeft => "scroll_left",
            MouseSymbol::ScrollRight => "scroll_right",
            MouseSymbol::Press => "press",
        }
    }
}

/// Bijective symbol ↔ carrier map with the guard band used on the decode
/// side.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CarrierTable {
    /// Carrier per symbol, Hz, in `MouseSymbol::ALL` order.
    carriers_hz: [f64; 6],
    /// Largest |detected − carrier| accepted for a symbol, Hz.
    guard_hz: f64,
}

impl Default for CarrierTable {
    fn default() -> Self {
        Self {
            carriers_hz: [27.32e6, 27.46e6, 27.60e6, 27.83e6, 28.23e6, 28.47e6],
            guard_hz: 70e3,
        }
    }
}

impl CarrierTable {
    pub fn carrier_hz(&self, symbol: MouseSymbol) -> f64 {
        self.carriers_hz[symbol.index()]
    }

    pub fn carriers_hz(&self) -> &[f64; 6] {
        &self.carriers_hz
    }

    pub fn guard_hz(&self) -> f64 {
        self.guard_hz
    }

    /// Smallest spacing between adjacent carriers, Hz.
    pub fn min_spacing_hz(&self) -> f64 {
        let mut sorted = self.carriers_hz;
        sorted.sort_by(|a, b| a.partial_cmp(b).unwrap());
        sorted
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }

    /// Nearest carrier to a frequency plus the distance to it.
    pub fn nearest(&self, frequency_hz: f64) -> (MouseSymbol, f64) {
        let mut best = (MouseSymbol::None, f64::INFINITY);
        for symbol in MouseSymbol::ALL {
            let d = (self.carrier_hz(symbol) - frequency_hz).abs();
            if d < best.1 {
                best = (symbol, d);
            }
        }
        best
    }
}

// ---------------------------------------------------------------------------
// Varactor tuning
// ---------------------------------------------------------------------------

/// Effective ring tuning for one symbol.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingTuning {
    pub effective_capacitance_f: f64,
    pub resonant_frequency_hz: f64,
}

/// Effective series capacitance and resulting resonance for a symbol's
/// carrier on a ring of the given inductance.
pub fn symbol_tuning(
    symbol: MouseSymbol,
    carriers: &CarrierTable,
    ring_inductance_h: f64,
) -> Result<RingTuning, RingError> {
    let f = carriers.carrier_hz(symbol);
    let c = capacitance_for_frequency(ring_inductance_h, f)?;
    let (lo, hi) = EFFECTIVE_C_RANGE_F;
    if !(c >= lo && c <= hi) {
        return Err(RingError::TuningOutOfRange {
            symbol,
            capacitance_f: c,
        });
    }
    Ok(RingTuning {
        effective_capacitance_f: c,
        resonant_frequency_hz: f,
    })
}

/// One row of the varactor drive table.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VaractorSetting {
    pub symbol: MouseSymbol,
    /// Control voltage, volts. Informational: follows a documented linear
    /// C(V) between the device's capacitance endpoints.
    pub control_voltage_v: f64,
    /// Varactor capacitance, farads, within the device range.
    pub varactor_capacitance_f: f64,
    /// Effective series capacitance of the whole ring, farads.
    pub effective_capacitance_f: f64,
    pub resonant_frequency_hz: f64,
}

/// Per-symbol varactor drive map. The simulation consumes only the effective
/// capacitance; voltage and device capacitance are informational and placed
/// by normalized linear interpolation across the device range.
#[derive(Debug, Clone, PartialEq)]
pub struct VaractorMap {
    settings: [VaractorSetting; 6],
}

impl VaractorMap {
    pub fn build(carriers: &CarrierTable, ring_inductance_h: f64) -> Result<Self, RingError> {
        let tunings: Vec<RingTuning> = MouseSymbol::ALL
            .iter()
            .map(|s| symbol_tuning(*s, carriers, ring_inductance_h))
            .collect::<Result<_, _>>()?;
        let c_min = tunings
            .iter()
            .map(|t| t.effective_capacitance_f)
            .fold(f64::INFINITY, f64::min);
        let c_max = tunings
            .iter()
            .map(|t| t.effective_capacitance_f)
            .fold(0.0, f64::max);
        let span = (c_max - c_min).max(f64::MIN_POSITIVE);

        let settings = std::array::from_fn(|i| {
            let t = tunings[i];
            // Largest effective C (lowest carrier) maps to the varactor's
            // largest capacitance, preserving monotonicity.
            let frac = (t.effective_capacitance_f - c_min) / span;
            let varactor_c = VARACTOR_C_MIN_F + frac * (VARACTOR_C_MAX_F - VARACTOR_C_MIN_F);
            let voltage = VARACTOR_V_MAX * (VARACTOR_C_MAX_F - varactor_c)
                / (VARACTOR_C_MAX_F - VARACTOR_C_MIN_F);
            VaractorSetting {
                symbol: MouseSymbol::ALL[i],
                control_voltage_v: voltage,
                varactor_capacitance_f: varactor_c,
                effective_capacitance_f: t.effective_capacitance_f,
                resonant_frequency_hz: t.resonant_frequency_hz,
            }
        });
        Ok(Self { settings })
    }

    pub fn settings(&self) -> &[VaractorSetting; 6] {
        &self.settings
    }

    pub fn setting(&self, symbol: MouseSymbol) -> &VaractorSetting {
        &self.settings[symbol.index()]
    }
}

// ---------------------------------------------------------------------------
// Scroll events and symbol encoding
// ---------------------------------------------------------------------------

/// One physical input state: a scroll direction and the press switch.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ScrollEvent {
    /// −1 = left, +1 = right.
    pub horizontal: i8,
    /// −1 = down, +1 = up.
    pub vertical: i8,
    pub pressed: bool,
}

impl ScrollEvent {
    pub fn new(horizontal: i8, vertical: i8, pressed: bool) -> Result<Self, RingError> {
        if !(-1..=1).contains(&horizontal) || !(-1..=1).contains(&vertical) {
            return Err(RingError::BadScrollComponent {
                horizontal,
                vertical,
            });
        }
        Ok(Self {
            horizontal,
            vertical,
            pressed,
        })
    }

    pub fn idle() -> Self {
        Self::default()
    }

    pub fn is_idle(&self) -> bool {
        self.horizontal == 0 && self.vertical == 0 && !self.pressed
    }
}

/// Maps one input state to the symbol sequence the ring cycles through while
/// the input persists.
///
/// A press wins over any simultaneous scroll (one carrier at a time); a
/// diagonal scroll decomposes into its vertical and horizontal symbols in
/// alternation, vertical first.
pub fn encode(event: &ScrollEvent) -> Vec<MouseSymbol> {
    if event.pressed {
        return vec![MouseSymbol::Press];
    }
    let vertical = match event.vertical {
        1 => Some(MouseSymbol::ScrollUp),
        -1 => Some(MouseSymbol::ScrollDown),
        _ => None,
    };
    let horizontal = match event.horizontal {
        1 => Some(MouseSymbol::ScrollRight),
        -1 => Some(MouseSymbol::ScrollLeft),
        _ => None,
    };
    match (vertical, horizontal) {
        (Some(v), Some(h)) => vec![v, h],
        (Some(v), None) => vec![v],
        (None, Some(h)) => vec![h],
        (None, None) => vec![MouseSymbol::None],
    }
}

// ---------------------------------------------------------------------------
// Duty-cycle state machine
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RingMode {
    Active,
    Standby,
}

/// ACTIVE/STANDBY state machine with 200 fps emission pacing.
///
/// The timeout re-arms on *changes* of the physical input state, not on its
/// level: a magnet held perfectly still produces no switch edges, so a
/// constant input eventually times out just like no input.
#[derive(Debug, Clone, PartialEq)]
pub struct RingFsm {
    mode: RingMode,
    last_input_change_s: f64,
    last_step_s: f64,
    next_emission_s: f64,
    next_wake_s: f64,
    prev_input: ScrollEvent,
}

impl RingFsm {
    /// Starts in STANDBY at `start_s` with an idle input level and a wake
    /// tick due immediately.
    pub fn new(start_s: f64) -> Self {
        Self {
            mode: RingMode::Standby,
            last_input_change_s: start_s,
            last_step_s: start_s,
            next_emission_s: start_s,
            next_wake_s: start_s,
            prev_input: ScrollEvent::idle(),
        }
    }

    pub fn mode(&self) -> RingMode {
        self.mode
    }

    pub fn clock_hz(&self) -> f64 {
        match self.mode {
            RingMode::Active => ACTIVE_CLOCK_HZ,
            RingMode::Standby => STANDBY_CLOCK_HZ,
        }
    }

    pub fn last_input_change_s(&self) -> f64 {
        self.last_input_change_s
    }

    /// Advances the machine to `now` with the current input level, returning
    /// the timestamps of symbol frames emitted since the previous step.
    ///
    /// `now` must be non-decreasing across calls.
    pub fn step(&mut self, input: ScrollEvent, now: f64) -> Result<Vec<f64>, RingError> {
        if now < self.last_step_s {
            return Err(RingError::TimeRegression {
                now,
                last: self.last_step_s,
            });
        }
        self.last_step_s = now;
        let changed = input != self.prev_input;
        let mut emissions = Vec::new();

        match self.mode {
            RingMode::Standby => {
                if changed && now >= self.next_wake_s {
                    // The change is observed at this step, so it is stamped
                    // at the poll tick in effect now: the latest tick ≤ now.
                    let periods = ((now - self.next_wake_s) / STANDBY_WAKE_PERIOD_S).floor();
                    let wake_at = self.next_wake_s + periods * STANDBY_WAKE_PERIOD_S;
                    self.mode = RingMode::Active;
                    self.last_input_change_s = wake_at;
                    self.next_emission_s = wake_at;
                    self.prev_input = input;
                    self.drain_emissions(now, &mut emissions);
                } else if !changed {
                    self.advance_wake(now);
                }
                // A change observed between poll ticks stays latched
                // (prev_input is left untouched) and wakes the machine at the
                // next step that reaches the pending tick.
            }
            RingMode::Active => {
                if changed {
                    self.last_input_change_s = now;
                    self.prev_input = input;
                }
                let timeout_at = self.last_input_change_s + STANDBY_TIMEOUT_S;
                if now >= timeout_at {
                    // Stream frames up to (not including) the timeout instant,
                    // then fall back to STANDBY. The poll clock resumes from
                    // the timeout and catches up to now: the input is known
                    // unchanged through this step, so those polls saw nothing.
                    self.drain_emissions_until(timeout_at, &mut emissions);
                    self.mode = RingMode::Standby;
                    self.next_wake_s = timeout_at;
                    self.advance_wake(now);
                } else {
                    self.drain_emissions(now, &mut emissions);
                }
            }
        }
        Ok(emissions)
    }

    fn advance_wake(&mut self, now: f64) {
        while self.next_wake_s <= now {
            self.next_wake_s += STANDBY_WAKE_PERIOD_S;
        }
    }

    fn drain_emissions(&mut self, now: f64, out: &mut Vec<f64>) {
        let frame = 1.0 / ACTIVE_FRAME_RATE_FPS;
        while self.next_emission_s <= now {
            out.push(self.next_emission_s);
            self.next_emission_s += frame;
        }
    }

    fn drain_emissions_until(&mut self, end_exclusive: f64, out: &mut Vec<f64>) {
        let frame = 1.0 / ACTIVE_FRAME_RATE_FPS;
        while self.next_emission_s < end_exclusive {
            out.push(self.next_emission_s);
            self.next_emission_s += frame;
        }
    }
}

// ---------------------------------------------------------------------------
// Continuous encoder (FSM + alternation + tuning)
// ---------------------------------------------------------------------------

/// Couples the FSM with symbol selection: paces frames at 200 fps, holds the
/// current symbol while an input persists, and alternates the two components
/// of a diagonal scroll frame by frame.
#[derive(Debug, Clone)]
pub struct RingEncoder {
    fsm: RingFsm,
    carriers: CarrierTable,
    current_input: ScrollEvent,
    alternation_phase: usize,
    /// Symbol of the most recent emitted frame; defines the ring tuning
    /// between frames.
    held_symbol: MouseSymbol,
}

/// One emitted ring frame.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RingFrame {
    pub timestamp_s: f64,
    pub symbol: MouseSymbol,
}

impl RingEncoder {
    pub fn new(carriers: CarrierTable, start_s: f64) -> Self {
        Self {
            fsm: RingFsm::new(start_s),
            carriers,
            current_input: ScrollEvent::idle(),
            alternation_phase: 0,
            held_symbol: MouseSymbol::None,
        }
    }

    pub fn mode(&self) -> RingMode {
        self.fsm.mode()
    }

    /// Steps to `now` with the current physical input, emitting symbol
    /// frames.
    pub fn step(&mut self, input: ScrollEvent, now: f64) -> Result<Vec<RingFrame>, RingError> {
        if input != self.current_input {
            self.alternation_phase = 0;
            self.current_input = input;
        }
        let cycle = encode(&self.current_input);
        let times = self.fsm.step(input, now)?;
        let frames = times
            .into_iter()
            .map(|timestamp_s| {
                let symbol = cycle[self.alternation_phase % cycle.len()];
                self.alternation_phase += 1;
                self.held_symbol = symbol;
                RingFrame {
                    timestamp_s,
                    symbol,
                }
            })
            .collect();
        Ok(frames)
    }

    /// Resonant frequency the ring presents at this instant: the held
    /// symbol's carrier in ACTIVE, or the unpowered-tuning fallback in
    /// STANDBY.
    pub fn tuning_hz(&self) -> f64 {
        match self.fsm.mode() {
            RingMode::Active => self.carriers.carrier_hz(self.held_symbol),
            RingMode::Standby => crate::presets::STANDBY_RESONANCE_HZ,
        }
    }

    /// Symbol the ring is transmitting right now, `None` in STANDBY.
    pub fn transmitting(&self) -> Option<MouseSymbol> {
        match self.fsm.mode() {
            RingMode::Active => Some(self.held_symbol),
            RingMode::Standby => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Replayable input scripts
// ---------------------------------------------------------------------------

/// One line of an input script: NDJSON
/// `{"t": seconds, "kind": "scroll"|"press"|"release", "dx": int, "dy": int}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScriptEvent {
    pub t: f64,
    pub kind: ScriptEventKind,
    #[serde(default)]
    pub dx: i8,
    #[serde(default)]
    pub dy: i8,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScriptEventKind {
    Scroll,
    Press,
    Release,
}

/// A parsed, time-ordered input script.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct InputScript {
    events: Vec<ScriptEvent>,
}

impl InputScript {
    pub fn new(mut events: Vec<ScriptEvent>) -> Self {
        events.sort_by(|a, b| a.t.partial_cmp(&b.t).unwrap());
        Self { events }
    }

    /// Parses NDJSON, reporting the 1-based line number of any bad line.
    pub fn parse(text: &str) -> Result<Self, RingError> {
        let mut events = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() {
                continue;
            }
            let event: ScriptEvent =
                serde_json::from_str(line).map_err(|e| RingError::ScriptParse {
                    line: idx + 1,
                    reason: e.to_string(),
                })?;
            if !(-1..=1).contains(&event.dx) || !(-1..=1).contains(&event.dy) {
                return Err(RingError::ScriptParse {
                    line: idx + 1,
                    reason: format!(
                        "dx/dy must be -1, 0 or +1, got ({}, {})",
                        event.dx, event.dy
                    ),
                });
            }
            events.push(event);
        }
        Ok(Self::new(events))
    }

    pub fn to_ndjson(&self) -> String {
        self.events
            .iter()
            .map(|e| serde_json::to_string(e).expect("script events serialize"))
            .fold(String::new(), |mut acc, line| {
                acc.push_str(&line);
                acc.push('\n');
                acc
            })
    }

    pub fn events(&self) -> &[ScriptEvent] {
        &self.events
    }

    pub fn duration_s(&self) -> f64 {
        self.events.last().map(|e| e.t).unwrap_or(0.0)
    }
}

/// Replays a script as a physical input level over time.
///
/// Scroll lines are transient deltas held for one ACTIVE frame (5 ms);
/// press/release lines are level edges. Each script line is an input
/// *change* for the FSM timeout.
#[derive(Debug, Clone)]
pub struct ScriptReplayer {
    script: InputScript,
    scroll_dwell_s: f64,
}

impl ScriptReplayer {
    pub fn new(script: InputScript) -> Self {
        Self {
            script,
            scroll_dwell_s: 1.0 / ACTIVE_FRAME_RATE_FPS,
        }
    }

    /// Input level at time `t`.
    pub fn input_at(&self, t: f64) -> ScrollEvent {
        let mut pressed = false;
        let mut scroll = (0i8, 0i8);
        let mut scroll_expires = f64::NEG_INFINITY;
        for e in &self.script.events {
            if e.t > t {
                break;
            }
            match e.kind {
                ScriptEventKind::Press => pressed = true,
                ScriptEventKind::Release => pressed = false,
                ScriptEventKind::Scroll => {
                    scroll = (e.dx, e.dy);
                    scroll_expires = e.t + self.scroll_dwell_s;
                }
            }
        }
        let (dx, dy) = if t < scroll_expires { scroll } else { (0, 0) };
        ScrollEvent {
            horizontal: dx,
            vertical: dy,
            pressed,
        }
    }

    pub fn script(&self) -> &InputScript {
        &self.script
    }
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
