//! Complex-impedance arithmetic and resonance math for series-resonant coils
//! and the inductively coupled ring/wristband pair.
//!
//! A coil is modelled as a series RLC branch: the distributed capacitors of
//! the physical winding are lumped into one effective series capacitance, so
//! the impedance seen at its terminals is `R + j(ωL − 1/(ωC))` and the coil
//! resonates at `f₀ = 1/(2π√(LC))`. Coupling to a second coil reflects
//! `(ωM)²/Z` back into the primary.

use num_complex::Complex64;
use std::f64::consts::PI;
use thiserror::Error;

/// Errors from constructing circuit values with non-physical parameters.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CircuitError {
    /// A parameter that must be strictly positive and finite was not.
    #[error("{name} must be positive and finite, got {value}")]
    NonPositive { name: &'static str, value: f64 },
}

fn require_positive(name: &'static str, value: f64) -> Result<f64, CircuitError> {
    if value.is_finite() && value > 0.0 {
        Ok(value)
    } else {
        Err(CircuitError::NonPositive { name, value })
    }
}

// ---------------------------------------------------------------------------
// Domain values
// ---------------------------------------------------------------------------

/// Complex impedance in ohms: resistance (real) plus reactance (imaginary).
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct ComplexImpedance {
    /// Resistive part in ohms.
    pub resistance: f64,
    /// Reactive part in ohms (positive inductive, negative capacitive).
    pub reactance: f64,
}

impl ComplexImpedance {
    pub const ZERO: ComplexImpedance = ComplexImpedance {
        resistance: 0.0,
        reactance: 0.0,
    };

    pub fn new(resistance: f64, reactance: f64) -> Self {
        Self {
            resistance,
            reactance,
        }
    }

    pub fn from_complex(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.resistance, self.reactance)
    }

    /// |Z| in ohms.
    pub fn magnitude(self) -> f64 {
        self.to_complex().norm()
    }

    /// True when both components are finite (no NaN/Inf).
    pub fn is_finite(self) -> bool {
        self.resistance.is_finite() && self.reactance.is_finite()
    }
}

impl std::ops::Add for ComplexImpedance {
    type Output = ComplexImpedance;
    fn add(self, rhs: Self) -> Self {
        Self::new(
            self.resistance + rhs.resistance,
            self.reactance + rhs.reactance,
        )
    }
}

impl std::ops::Sub for ComplexImpedance {
    type Output = ComplexImpedance;
    fn sub(self, rhs: Self) -> Self {
        Self::new(
            self.resistance - rhs.resistance,
            self.reactance - rhs.reactance,
        )
    }
}

/// Angular frequency ω = 2πf, guaranteed strictly positive.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd)]
pub struct AngularFrequency(f64);

impl AngularFrequency {
    pub fn new(radians_per_second: f64) -> Result<Self, CircuitError> {
        require_positive("angular frequency", radians_per_second).map(Self)
    }

    pub fn from_hz(frequency_hz: f64) -> Result<Self, CircuitError> {
        require_positive("frequency", frequency_hz).map(|f| Self(2.0 * PI * f))
    }

    pub fn radians_per_second(self) -> f64 {
        self.0
    }

    pub fn hz(self) -> f64 {
        self.0 / (2.0 * PI)
    }
}

/// Which side of the link a coil sits on.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoilRole {
    Ring,
    Wristband,
}

/// A series-resonant coil: inductance, series resistance and effective
/// series capacitance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResonantCoil {
    inductance_h: f64,
    series_resistance_ohm: f64,
    capacitance_f: f64,
    role: CoilRole,
}

impl ResonantCoil {
    /// Builds a coil from its lumped parameters. All three must be
    /// strictly positive and finite.
    pub fn new(
        role: CoilRole,
        inductance_h: f64,
        series_resistance_ohm: f64,
        capacitance_f: f64,
    ) -> Result<Self, CircuitError> {
        Ok(Self {
            inductance_h: require_positive("inductance", inductance_h)?,
            series_resistance_ohm: require_positive("series resistance", series_resistance_ohm)?,
            capacitance_f: require_positive("capacitance", capacitance_f)?,
            role,
        })
    }

    /// Builds a coil whose effective capacitance is chosen so it resonates
    /// at `resonant_frequency_hz`.
    pub fn tuned(
        role: CoilRole,
        inductance_h: f64,
        series_resistance_ohm: f64,
        resonant_frequency_hz: f64,
    ) -> Result<Self, CircuitError> {
        let c = capacitance_for_frequency(inductance_h, resonant_frequency_hz)?;
        Self::new(role, inductance_h, series_resistance_ohm, c)
    }

    /// Returns a copy retuned to a new resonant frequency (same L and R).
    pub fn retuned(&self, resonant_frequency_hz: f64) -> Result<Self, CircuitError> {
        Self::tuned(
            self.role,
            self.inductance_h,
            self.series_resistance_ohm,
            resonant_frequency_hz,
        )
    }

    pub fn role(&self) -> CoilRole {
        self.role
    }

    pub fn inductance_h(&self) -> f64 {
        self.inductance_h
    }

    pub fn series_resistance_ohm(&self) -> f64 {
        self.series_resistance_ohm
    }

    pub fn capacitance_f(&self) -> f64 {
        self.capacitance_f
    }

    /// f₀ = 1/(2π√(LC)).
    pub fn resonant_frequency_hz(&self) -> f64 {
        1.0 / (2.0 * PI * (self.inductance_h * self.capacitance_f).sqrt())
    }

    /// Series impedance `R + j(ωL − 1/(ωC))` at the given frequency.
    ///
    /// The reactance vanishes at ω = 1/√(LC), leaving exactly `R`.
    pub fn impedance(&self, omega: AngularFrequency) -> ComplexImpedance {
        let w = omega.radians_per_second();
        let reactance = w * self.inductance_h - 1.0 / (w * self.capacitance_f);
        ComplexImpedance::new(self.series_resistance_ohm, reactance)
    }
}

// ---------------------------------------------------------------------------
// Operations
// ---------------------------------------------------------------------------

/// Inverts the resonance formula: the series capacitance that makes an
/// inductance `L` resonate at `f`, i.e. `C = 1/((2πf)²L)`.
pub fn capacitance_for_frequency(
    inductance_h: f64,
    frequency_hz: f64,
) -> Result<f64, CircuitError> {
    let l = require_positive("inductance", inductance_h)?;
    let f = require_positive("frequency", frequency_hz)?;
    let w = 2.0 * PI * f;
    Ok(1.0 / (w * w * l))
}

/// Impedance the secondary coil reflects into the primary through mutual
/// inductance M: `(ωM)²/Z(ω)`.
///
/// At the secondary's resonance this collapses to the purely real
/// `(ω₀M)²/R`; with M = 0 it is exactly zero everywhere.
pub fn reflected_impedance(
    secondary: &ResonantCoil,
    mutual_inductance_h: f64,
    omega: AngularFrequency,
) -> ComplexImpedance {
    if mutual_inductance_h == 0.0 {
        return ComplexImpedance::ZERO;
    }
    let w = omega.radians_per_second();
    let wm = w * mutual_inductance_h;
    let z = secondary.impedance(omega).to_complex();
    ComplexImpedance::from_complex(Complex64::new(wm * wm, 0.0) / z)
}

// ---------------------------------------------------------------------------
// Tests
// ---------------------------------------------------------------------------
