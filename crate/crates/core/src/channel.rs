//! Geometry-to-coupling model for the ring/wristband inductive link.
//!
//! The link strength is summarized by the coupling coefficient `k` (and the
//! mutual inductance `M = k√(L_ring·L_wrist)` it implies). Only two measured
//! anchor points are available — k = 0.0039 for the tilted-coil ring and
//! k = 0.0031 for the straight one, both at 14 cm and 30° finger bend — so
//! the model between them is a small-coil magnetic-dipole approximation:
//!
//! ```text
//! k(d, θ, tilt) = k_ref(tilt) · (d_ref/d)³ · max(cos(θ − tilt), cos_floor)
//! ```
//!
//! `k_ref` is derived per tilt so that both anchors are reproduced exactly;
//! for tilts between the two anchor builds it interpolates linearly. The
//! anchor table lives in a flat key-value calibration file so it can be
//! re-fitted against new measurements without code changes.

use crate::circuit::{AngularFrequency, ResonantCoil};
use serde::{Deserialize, Serialize};
use std::fmt::Write as _;
use thiserror::Error;

/// Tilt angle of the tilted-type ring coil, in degrees.
pub const TILTED_RING_DEG: f64 = 20.0;
/// Tilt angle of the straight-type ring coil, in degrees.
pub const STRAIGHT_RING_DEG: f64 = 0.0;

/// Finger-bend envelope the calibration covers, in degrees.
pub const BEND_ANGLE_RANGE_DEG: (f64, f64) = (-30.0, 60.0);

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ChannelError {
    /// Geometry outside the calibrated envelope; values are not extrapolated.
    #[error("geometry outside calibration envelope: {reason}")]
    OutOfCalibration { reason: String },
    /// Coupling coefficient left the physical range [0, 1).
    #[error("coupling coefficient {k} outside [0, 1)")]
    UnphysicalCoupling { k: f64 },
    /// Calibration file could not be parsed.
    #[error("calibration file line {line}: {reason}")]
    CalibrationParse { line: usize, reason: String },
}

// ---------------------------------------------------------------------------
// Geometry and link values
// ---------------------------------------------------------------------------

/// Relative pose of the ring coil with respect to the wristband coil.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinkGeometry {
    /// Ring-to-wristband distance along the forearm, metres.
    pub distance_m: f64,
    /// Finger-bend angle, degrees.
    pub bend_angle_deg: f64,
    /// Coil tilt relative to the ring axis, degrees (0 = straight type).
    pub ring_tilt_deg: f64,
}

impl LinkGeometry {
    pub fn new(
        distance_m: f64,
        bend_angle_deg: f64,
        ring_tilt_deg: f64,
    ) -> Result<Self, ChannelError> {
        let geom = Self {
            distance_m,
            bend_angle_deg,
            ring_tilt_deg,
        };
        geom.validate()?;
        Ok(geom)
    }

    pub fn validate(&self) -> Result<(), ChannelError> {
        if !(self.distance_m.is_finite() && self.distance_m > 0.0) {
            return Err(ChannelError::OutOfCalibration {
                reason: format!("distance {} m must be positive", self.distance_m),
            });
        }
        let (lo, hi) = BEND_ANGLE_RANGE_DEG;
        if !(self.bend_angle_deg >= lo && self.bend_angle_deg <= hi) {
            return Err(ChannelError::OutOfCalibration {
                reason: format!(
                    "bend angle {}° outside calibrated range [{lo}°, {hi}°]",
                    self.bend_angle_deg
                ),
            });
        }
        if !self.ring_tilt_deg.is_finite() {
            return Err(ChannelError::OutOfCalibration {
                reason: "ring tilt must be finite".into(),
            });
        }
        Ok(())
    }
}

/// Coupling between the two coils: the coefficient `k` together with the
/// mutual inductance it implies for a specific coil pair.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct InductiveLink {
    coupling_k: f64,
    mutual_inductance_h: f64,
}

impl InductiveLink {
    /// Builds a link from `k` and the two coil inductances, keeping the
    /// invariant `M = k√(L_ring·L_wrist)` exact by construction.
    pub fn from_coupling(
        coupling_k: f64,
        ring_inductance_h: f64,
        wrist_inductance_h: f64,
    ) -> Result<Self, ChannelError> {
        if !(coupling_k.is_finite() && (0.0..1.0).contains(&coupling_k)) {
            return Err(ChannelError::UnphysicalCoupling { k: coupling_k });
        }
        Ok(Self {
            coupling_k,
            mutual_inductance_h: coupling_k * (ring_inductance_h * wrist_inductance_h).sqrt(),
        })
    }

    /// A fully decoupled link (ring absent or out of range).
    pub fn open() -> Self {
        Self {
            coupling_k: 0.0,
            mutual_inductance_h: 0.0,
        }
    }

    pub fn coupling_k(&self) -> f64 {
        self.coupling_k
    }

    pub fn mutual_inductance_h(&self) -> f64 {
        self.mutual_inductance_h
    }
}

// ---------------------------------------------------------------------------
// Calibration
// ---------------------------------------------------------------------------

/// Anchor data for the coupling model. Serialized as a flat key-value file
/// (`key = value`, `#` comments), see [`CouplingCalibration::parse`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CouplingCalibration {
    /// Distance at which the anchor couplings were measured, metres.
    pub distance_ref_m: f64,
    /// Finger-bend angle of the anchor measurement, degrees.
    pub angle_ref_deg: f64,
    /// Measured k for the tilted-type ring at the anchor pose.
    pub k_tilted: f64,
    /// Measured k for the straight-type ring at the anchor pose.
    pub k_straight: f64,
    /// Lower bound on the misalignment cosine, preventing the model from
    /// collapsing to zero coupling at 90° misalignment.
    pub cos_floor: f64,
}

impl Default for CouplingCalibration {
    fn default() -> Self {
        Self {
            distance_ref_m: 0.14,
            angle_ref_deg: 30.0,
            k_tilted: 0.0039,
            k_straight: 0.0031,
            cos_floor: 0.2,
        }
    }
}

impl CouplingCalibration {
    fn misalignment_factor(&self, bend_angle_deg: f64, ring_tilt_deg: f64) -> f64 {
        let misalignment = (bend_angle_deg - ring_tilt_deg).to_radians();
        misalignment.cos().max(self.cos_floor)
    }

    /// Reference coupling at (distance_ref, on-axis alignment) for a given
    /// tilt, linear in tilt between the straight and tilted anchor builds.
    fn k_ref(&self, ring_tilt_deg: f64) -> f64 {
        let ref_straight =
            self.k_straight / self.misalignment_factor(self.angle_ref_deg, STRAIGHT_RING_DEG);
        let ref_tilted =
            self.k_tilted / self.misalignment_factor(self.angle_ref_deg, TILTED_RING_DEG);
        let t = (ring_tilt_deg - STRAIGHT_RING_DEG) / (TILTED_RING_DEG - STRAIGHT_RING_DEG);
        ref_straight + t * (ref_tilted - ref_straight)
    }

    /// Coupling coefficient for a pose inside the calibrated envelope.
    pub fn coupling_k(&self, geometry: &LinkGeometry) -> Result<f64, ChannelError> {
        geometry.validate()?;
        let distance_factor = (self.distance_ref_m / geometry.distance_m).powi(3);
        let k = self.k_ref(geometry.ring_tilt_deg)
            * distance_factor
            * self.misalignment_factor(geometry.bend_angle_deg, geometry.ring_tilt_deg);
        if !(k.is_finite() && (0.0..1.0).contains(&k)) {
            return Err(ChannelError::UnphysicalCoupling { k });
        }
        Ok(k)
    }

    /// Full geometry → link mapping for a concrete coil pair.
    pub fn link_for_geometry(
        &self,
        geometry: &LinkGeometry,
        ring_inductance_h: f64,
        wrist_inductance_h: f64,
    ) -> Result<InductiveLink, ChannelError> {
        let k = self.coupling_k(geometry)?;
        InductiveLink::from_coupling(k, ring_inductance_h, wrist_inductance_h)
    }

    /// Parses the flat key-value calibration format. Unknown keys are
    /// rejected so typos fail loudly.
    pub fn parse(text: &str) -> Result<Self, ChannelError> {
        let mut calib = Self::default();
        for (idx, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or(ChannelError::CalibrationParse {
                line: idx + 1,
                reason: "expected `key = value`".into(),
            })?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|e| ChannelError::CalibrationParse {
                    line: idx + 1,
                    reason: format!("bad number: {e}"),
                })?;
            match key.trim() {
                "distance_ref_m" => calib.distance_ref_m = value,
                "angle_ref_deg" => calib.angle_ref_deg = value,
                "k_tilted" => calib.k_tilted = value,
                "k_straight" => calib.k_straight = value,
                "cos_floor" => calib.cos_floor = value,
                other => {
                    return Err(ChannelError::CalibrationParse {
                        line: idx + 1,
                        reason: format!("unknown key `{other}`"),
                    })
                }
            }
        }
        Ok(calib)
    }

    /// Renders the calibration in the same flat key-value format `parse`
    /// accepts.
    pub fn to_file_string(&self) -> String {
        let mut out = String::from("# inductive-link coupling calibration\n");
        let _ = writeln!(out, "distance_ref_m = {}", self.distance_ref_m);
        let _ = writeln!(out, "angle_ref_deg = {}", self.angle_ref_deg);
        let _ = writeln!(out, "k_tilted = {}", self.k_tilted);
        let _ = writeln!(out, "k_straight = {}", self.k_straight);
        let _ = writeln!(out, "cos_floor = {}", self.cos_floor);
        out
    }
}

// ---------------------------------------------------------------------------
// Link budget
// ---------------------------------------------------------------------------

/// Peak impedance change the ring reflects into the wristband coil at the
/// ring's resonance: `(ω₀M)²/R_ring`. This is the height the readout stage
/// turns into a spectrum peak.
pub fn link_budget(link: &InductiveLink, ring: &ResonantCoil) -> f64 {
    if link.mutual_inductance_h() == 0.0 {
        return 0.0;
    }
    let w0 = AngularFrequency::from_hz(ring.resonant_frequency_hz())
        .expect("resonant frequency of a valid coil is positive")
        .radians_per_second();
    (w0 * link.mutual_inductance_h()).powi(2) / ring.series_resistance_ohm()
}
