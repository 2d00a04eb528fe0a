//! Simulation and codec library for a semi-passive inductive telemetry link
//! between a ring-worn mouse and a wristband reader.
//!
//! The ring encodes mouse inputs as shifts of its resonant frequency; the
//! wristband drives a balanced bridge through a frequency sweep, and the peak
//! the ring reflects into the sweep is detected and classified back into
//! mouse events. The crate covers:
//!
//! - [`circuit`] — series-RLC impedance and resonance math
//! - [`channel`] — geometry → coupling-coefficient model with file-backed
//!   calibration
//! - [`ring`] — input alphabet, frequency-shift keying, varactor tuning and
//!   the ACTIVE/STANDBY duty-cycle state machine
//! - [`readout`] — balanced-bridge output, synthetic sweep frames with
//!   seeded noise, and the sweep-population SNR statistic
//! - [`decoder`] — peak detection over sweep frames and classification into
//!   host scroll/press actions
//! - [`power`] — component power accounting, duty-cycled battery-lifetime
//!   estimation and a discharge-threshold runtime model

pub mod channel;
pub mod circuit;
pub mod decoder;
pub mod power;
pub mod presets;
pub mod readout;
pub mod ring;

pub use num_complex;

pub use channel::{CouplingCalibration, InductiveLink, LinkGeometry};
pub use circuit::{AngularFrequency, CoilRole, ComplexImpedance, ResonantCoil};
pub use decoder::{DecodedEvent, Decoder, HostAction, PeakDetection, PeakDetector};
pub use power::{BatteryModel, DutyCycle, PowerProfile};
pub use readout::{BridgeConfig, SnrResult, SpectrumFrame, SweepConfig, SweepSimulator};
pub use ring::{CarrierTable, MouseSymbol, RingFsm, ScrollEvent};
