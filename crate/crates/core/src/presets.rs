//! Reference hardware constants for the prototype ring/wristband pair.
//!
//! These are the measured coil parameters the rest of the crate defaults to;
//! every simulation entry point also accepts explicitly constructed values.

use crate::channel::{CouplingCalibration, InductiveLink, LinkGeometry};
use crate::circuit::{CoilRole, ResonantCoil};

/// Ring coil inductance, henries.
pub const RING_INDUCTANCE_H: f64 = 2.6e-6;
/// Ring coil series resistance, ohms (measured at 28.2 MHz, treated as flat
/// across the narrow sweep band).
pub const RING_RESISTANCE_OHM: f64 = 3.5;
/// Wristband coil inductance, henries.
pub const WRIST_INDUCTANCE_H: f64 = 4.2e-6;
/// Wristband coil series resistance, ohms.
pub const WRIST_RESISTANCE_OHM: f64 = 49.0;
/// Wristband coil resonant frequency, Hz.
pub const WRIST_RESONANCE_HZ: f64 = 27.0e6;

/// Resonance the ring falls back to when its tuning circuit is unpowered
/// (STANDBY, digital voltage divider off).
pub const STANDBY_RESONANCE_HZ: f64 = 27.0e6;

/// Probe tuning used for the SNR characterization sweeps.
pub const SNR_PROBE_HZ: f64 = 28.0e6;

/// Ring coil tuned at the SNR probe frequency.
pub fn ring_coil() -> ResonantCoil {
    ResonantCoil::tuned(
        CoilRole::Ring,
        RING_INDUCTANCE_H,
        RING_RESISTANCE_OHM,
        SNR_PROBE_HZ,
    )
    .expect("reference ring coil parameters are valid")
}

/// Wristband coil resonant at 27 MHz.
pub fn wristband_coil() -> ResonantCoil {
    ResonantCoil::tuned(
        CoilRole::Wristband,
        WRIST_INDUCTANCE_H,
        WRIST_RESISTANCE_OHM,
        WRIST_RESONANCE_HZ,
    )
    .expect("reference wristband coil parameters are valid")
}

/// Link at the nominal operating pose: 14 cm, 30° bend, tilted ring.
pub fn nominal_link() -> InductiveLink {
    let geometry = LinkGeometry::new(0.14, 30.0, crate::channel::TILTED_RING_DEG)
        .expect("nominal pose is inside the calibration envelope");
    CouplingCalibration::default()
        .link_for_geometry(&geometry, RING_INDUCTANCE_H, WRIST_INDUCTANCE_H)
        .expect("nominal pose produces a physical coupling")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn nominal_link_uses_the_tilted_anchor_coupling() {
        assert!((nominal_link().coupling_k() - 0.0039).abs() < 1e-15);
    }

    #[test]
    fn reference_coils_resonate_where_expected() {
        assert!((ring_coil().resonant_frequency_hz() - 28.0e6).abs() < 1.0);
        assert!((wristband_coil().resonant_frequency_hz() - 27.0e6).abs() < 1.0);
    }
}
