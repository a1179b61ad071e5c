//! Physical parameters, unit conversions, and pinned SI constants.
//!
//! Every frequency-like quantity is stored internally as an angular frequency
//! in rad/s. External interfaces (JSON files, CLI flags) speak Hz or MHz and
//! convert through [`hz_to_angular`] / [`angular_to_hz`] only, so a factor of
//! 2π can never be applied twice or dropped.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// CODATA 2018 values. `h` and `e` are exact under the 2019 SI redefinition;
/// the Bohr radius carries the CODATA 2018 uncertainty (relative 1.5e-10).
pub mod constants {
    /// Reduced Planck constant ħ in J·s.
    pub const HBAR: f64 = 1.054_571_817e-34;
    /// Elementary charge e in C (exact).
    pub const ELEMENTARY_CHARGE: f64 = 1.602_176_634e-19;
    /// Bohr radius a₀ in m.
    pub const BOHR_RADIUS: f64 = 5.291_772_109_03e-11;
}

/// Convert an ordinary frequency in Hz to an angular frequency in rad/s.
#[inline]
pub fn hz_to_angular(f_hz: f64) -> f64 {
    TAU * f_hz
}

/// Convert an angular frequency in rad/s back to an ordinary frequency in Hz.
#[inline]
pub fn angular_to_hz(omega: f64) -> f64 {
    omega / TAU
}

/// Electric field magnitude |E| = 2πħ·Δf/μ in V/m for a splitting Δf in Hz
/// and a transition dipole moment given in units of e·a₀.
///
/// This is the SI-traceable conversion: it involves only a frequency, the
/// Planck constant, and a computed dipole moment.
pub fn field_from_splitting(delta_f_hz: f64, dipole_moment_ea0: f64) -> Result<f64> {
    if !(dipole_moment_ea0 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "dipole moment must be positive, got {dipole_moment_ea0}"
        )));
    }
    if !(delta_f_hz >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "splitting must be non-negative, got {delta_f_hz}"
        )));
    }
    let mu = dipole_moment_ea0 * constants::ELEMENTARY_CHARGE * constants::BOHR_RADIUS;
    Ok(TAU * constants::HBAR * delta_f_hz / mu)
}

/// Inverse of [`field_from_splitting`]: the splitting in Hz that corresponds
/// to a field in V/m.
pub fn splitting_from_field(field_v_per_m: f64, dipole_moment_ea0: f64) -> Result<f64> {
    if !(dipole_moment_ea0 > 0.0) {
        return Err(Error::InvalidParams(format!(
            "dipole moment must be positive, got {dipole_moment_ea0}"
        )));
    }
    if !(field_v_per_m >= 0.0) {
        return Err(Error::InvalidParams(format!(
            "field must be non-negative, got {field_v_per_m}"
        )));
    }
    let mu = dipole_moment_ea0 * constants::ELEMENTARY_CHARGE * constants::BOHR_RADIUS;
    Ok(field_v_per_m * mu / (TAU * constants::HBAR))
}

/// Complete physical configuration of the MW-dressed four-level cascade
/// system for one spectrum.
///
/// All rates and Rabi frequencies are angular frequencies in rad/s; `od` is
/// the dimensionless optical depth of the bare probe transition. Values are
/// immutable once validated; the `with_*` helpers return modified copies.
///
/// `gamma2` is the total dephasing of the intermediate excited state,
/// Γ/2 for pure radiative decay. `gamma3` and `gamma4` are the total
/// dephasings of the two Rydberg states; each is the sum of half the
/// spontaneous decay rate and a pure-dephasing rate (γ/2 + γ_d and
/// γ'/2 + γ_d'). Only the sums enter the weak-probe response, so only the
/// sums are stored; the Lindblad solver takes the decomposition separately.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SystemParamsHz", into = "SystemParamsHz")]
pub struct SystemParams {
    /// Probe Rabi frequency Ω_p (rad/s).
    pub omega_p: f64,
    /// Coupling Rabi frequency Ω_c (rad/s).
    pub omega_c: f64,
    /// Microwave Rabi frequency Ω_MW (rad/s).
    pub omega_mw: f64,
    /// Coupling detuning Δ_c (rad/s). May be negative.
    pub delta_c: f64,
    /// Microwave detuning Δ_MW (rad/s). May be negative.
    pub delta_mw: f64,
    /// Total dephasing of the excited state (rad/s), Γ/2.
    pub gamma2: f64,
    /// Total dephasing of the lower Rydberg state (rad/s).
    pub gamma3: f64,
    /// Total dephasing of the upper Rydberg state (rad/s).
    pub gamma4: f64,
    /// Optical depth of the bare probe transition.
    pub od: f64,
}

impl SystemParams {
    /// Build and validate a parameter set from angular frequencies (rad/s).
    #[allow(clippy::too_many_arguments)]
    pub fn new(
        omega_p: f64,
        omega_c: f64,
        omega_mw: f64,
        delta_c: f64,
        delta_mw: f64,
        gamma2: f64,
        gamma3: f64,
        gamma4: f64,
        od: f64,
    ) -> Result<Self> {
        let p = Self {
            omega_p,
            omega_c,
            omega_mw,
            delta_c,
            delta_mw,
            gamma2,
            gamma3,
            gamma4,
            od,
        };
        p.validate()?;
        Ok(p)
    }

    /// Check the construction invariants: rates, Rabi frequencies and the
    /// optical depth must be finite and non-negative, and the excited state
    /// must decay (`gamma2 > 0`). Detunings may take either sign.
    pub fn validate(&self) -> Result<()> {
        let nonneg = [
            ("omega_p", self.omega_p),
            ("omega_c", self.omega_c),
            ("omega_mw", self.omega_mw),
            ("gamma2", self.gamma2),
            ("gamma3", self.gamma3),
            ("gamma4", self.gamma4),
            ("od", self.od),
        ];
        for (name, v) in nonneg {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::InvalidParams(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, v) in [("delta_c", self.delta_c), ("delta_mw", self.delta_mw)] {
            if !v.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {v}")));
            }
        }
        if self.gamma2 <= 0.0 {
            return Err(Error::InvalidParams(format!(
                "gamma2 must be positive (the excited state always decays), got {}",
                self.gamma2
            )));
        }
        Ok(())
    }

    /// Bare excited-state decay rate Γ = 2γ₂ (rad/s).
    #[inline]
    pub fn gamma_bare(&self) -> f64 {
        2.0 * self.gamma2
    }

    pub fn with_omega_p(mut self, omega_p: f64) -> Self {
        self.omega_p = omega_p;
        self
    }

    pub fn with_omega_c(mut self, omega_c: f64) -> Self {
        self.omega_c = omega_c;
        self
    }

    pub fn with_omega_mw(mut self, omega_mw: f64) -> Self {
        self.omega_mw = omega_mw;
        self
    }

    pub fn with_delta_c(mut self, delta_c: f64) -> Self {
        self.delta_c = delta_c;
        self
    }

    pub fn with_delta_mw(mut self, delta_mw: f64) -> Self {
        self.delta_mw = delta_mw;
        self
    }

    pub fn with_od(mut self, od: f64) -> Self {
        self.od = od;
        self
    }
}

/// Flat JSON representation with all frequencies in Hz (non-angular).
#[derive(Debug, Clone, Serialize, Deserialize)]
struct SystemParamsHz {
    omega_p_hz: f64,
    omega_c_hz: f64,
    omega_mw_hz: f64,
    delta_c_hz: f64,
    delta_mw_hz: f64,
    gamma2_hz: f64,
    gamma3_hz: f64,
    gamma4_hz: f64,
    od: f64,
}

impl From<SystemParams> for SystemParamsHz {
    fn from(p: SystemParams) -> Self {
        Self {
            omega_p_hz: angular_to_hz(p.omega_p),
            omega_c_hz: angular_to_hz(p.omega_c),
            omega_mw_hz: angular_to_hz(p.omega_mw),
            delta_c_hz: angular_to_hz(p.delta_c),
            delta_mw_hz: angular_to_hz(p.delta_mw),
            gamma2_hz: angular_to_hz(p.gamma2),
            gamma3_hz: angular_to_hz(p.gamma3),
            gamma4_hz: angular_to_hz(p.gamma4),
            od: p.od,
        }
    }
}

impl TryFrom<SystemParamsHz> for SystemParams {
    type Error = Error;

    fn try_from(h: SystemParamsHz) -> Result<Self> {
        SystemParams::new(
            hz_to_angular(h.omega_p_hz),
            hz_to_angular(h.omega_c_hz),
            hz_to_angular(h.omega_mw_hz),
            hz_to_angular(h.delta_c_hz),
            hz_to_angular(h.delta_mw_hz),
            hz_to_angular(h.gamma2_hz),
            hz_to_angular(h.gamma3_hz),
            hz_to_angular(h.gamma4_hz),
            h.od,
        )
    }
}

/// A microwave transition between adjacent Rydberg levels, identified by its
/// radial dipole moment and nominal frequency. The dipole moment converts a
/// measured splitting into a field strength; the frequency is informational.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DipoleTransition {
    /// Dipole moment in units of e·a₀.
    pub dipole_moment_ea0: f64,
    /// Transition frequency in Hz.
    pub mw_frequency_hz: f64,
}

impl DipoleTransition {
    pub fn new(dipole_moment_ea0: f64, mw_frequency_hz: f64) -> Result<Self> {
        if !(dipole_moment_ea0 > 0.0) {
            return Err(Error::InvalidParams(format!(
                "dipole moment must be positive, got {dipole_moment_ea0}"
            )));
        }
        Ok(Self {
            dipole_moment_ea0,
            mw_frequency_hz,
        })
    }

    /// The 39D_{5/2} ↔ 40P_{3/2} transition of ⁸⁷Rb near 36.9 GHz, with a
    /// radial dipole moment of 1926 e·a₀.
    pub fn rb87_39d52_40p32() -> Self {
        Self {
            dipole_moment_ea0: 1926.0,
            mw_frequency_hz: 36.8961e9,
        }
    }

    /// Field strength in V/m that corresponds to a splitting in Hz on this
    /// transition.
    pub fn field_from_splitting(&self, delta_f_hz: f64) -> Result<f64> {
        field_from_splitting(delta_f_hz, self.dipole_moment_ea0)
    }
}
