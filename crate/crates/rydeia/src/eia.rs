//! Effective three-level description of the EIA regime.
//!
//! For a coupling detuning large against both the coupling Rabi frequency and
//! the excited-state width, the intermediate state can be adiabatically
//! eliminated. What remains is a ground state coupled to the two Rydberg
//! states with an effective Rabi frequency Ω_eff = Ω_pΩ_c/(2Δ_c) and an AC
//! Stark shift Δ_AC = (Ω_p² + Ω_c²)/(4Δ_c). The two-photon coherence then has
//! exactly two absorption poles, and in the limit Ω_MW ≫ |γ₃−γ₄|, Δ_AC the
//! response is a pair of equal-width Lorentzians split by exactly Ω_MW.
//!
//! The asymptotic conditions are enforced as explicit validity gates so that
//! out-of-regime use is loud; `*_unchecked` constructors bypass the gate but
//! never the Δ_c ≠ 0 requirement.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::susceptibility::ComplexDetunings;

/// Validity gate for the adiabatic elimination: |Δ_c| ≥ 10·max(Ω_c, Γ).
pub const ADIABATIC_GATE_FACTOR: f64 = 10.0;

/// Validity gate for the double-Lorentzian limit:
/// Ω_MW > 10·max(|γ₃−γ₄|, |Δ_AC|).
pub const DOUBLE_LORENTZIAN_GATE_FACTOR: f64 = 10.0;

/// Derived couplings of the adiabatically eliminated system.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EffectiveParams {
    /// Ω_eff = Ω_pΩ_c/(2Δ_c) (rad/s). Carries the sign of Δ_c.
    pub omega_eff: f64,
    /// Δ_AC = (Ω_p² + Ω_c²)/(4Δ_c) (rad/s). Carries the sign of Δ_c.
    pub delta_ac: f64,
}

impl EffectiveParams {
    /// Compute the effective couplings, enforcing the validity gate
    /// |Δ_c| ≥ 10·max(Ω_c, Γ).
    pub fn from_params(params: &SystemParams) -> Result<Self> {
        let gate = ADIABATIC_GATE_FACTOR * params.omega_c.max(params.gamma_bare());
        if params.delta_c.abs() < gate {
            return Err(Error::GateViolation(format!(
                "adiabatic elimination needs |delta_c| >= {gate:.3e} rad/s, got {:.3e}",
                params.delta_c.abs()
            )));
        }
        Self::from_params_unchecked(params)
    }

    /// Compute the effective couplings without the asymptotic gate. Still
    /// rejects Δ_c = 0, where the elimination is undefined.
    pub fn from_params_unchecked(params: &SystemParams) -> Result<Self> {
        if params.delta_c == 0.0 {
            return Err(Error::InvalidParams(
                "effective parameters are undefined at delta_c = 0".into(),
            ));
        }
        Ok(Self {
            omega_eff: params.omega_p * params.omega_c / (2.0 * params.delta_c),
            delta_ac: (params.omega_p * params.omega_p + params.omega_c * params.omega_c)
                / (4.0 * params.delta_c),
        })
    }
}

fn denominator(params: &SystemParams, eff: &EffectiveParams, delta: f64) -> Complex64 {
    let d = ComplexDetunings::at(params, delta);
    d.d4() * (d.d3() + eff.delta_ac) - 0.25 * params.omega_mw * params.omega_mw
}

/// Two-photon coherence of the effective system,
/// ρ₃₁(δ) = (Ω_eff/2)·d₄ / (d₄(d₃ + Δ_AC) − Ω_MW²/4).
pub fn rho31(params: &SystemParams, eff: &EffectiveParams, delta: f64) -> Result<Complex64> {
    let d = ComplexDetunings::at(params, delta);
    let den = denominator(params, eff, delta);
    let scale = d.d4().norm() * (d.d3().norm() + eff.delta_ac.abs())
        + 0.25 * params.omega_mw * params.omega_mw;
    if den.norm() <= 1e-12 * scale {
        return Err(Error::DegenerateDenominator { delta });
    }
    Ok(0.5 * eff.omega_eff * d.d4() / den)
}

/// The two absorption poles of the effective response and their strengths.
#[derive(Debug, Clone, Copy)]
pub struct EiaPoles {
    /// Pole taking the `+` branch of the radical (larger real part for
    /// Ω_MW well above the EIT–ATS threshold).
    pub plus: Complex64,
    pub minus: Complex64,
    pub strength_plus: Complex64,
    pub strength_minus: Complex64,
}

impl EiaPoles {
    /// δ₊ + δ₋, which equals Δ_MW − Δ_AC + i(γ₃ + γ₄) identically.
    pub fn trace(&self) -> Complex64 {
        self.plus + self.minus
    }

    /// S₊ + S₋ = 1 by construction.
    pub fn strength_sum(&self) -> Complex64 {
        self.strength_plus + self.strength_minus
    }

    /// Two-pole reconstruction of ρ₃₁.
    pub fn rho31(&self, eff: &EffectiveParams, delta: f64) -> Complex64 {
        let d = Complex64::new(delta, 0.0);
        0.5 * eff.omega_eff
            * (self.strength_plus / (d - self.plus) + self.strength_minus / (d - self.minus))
    }
}

/// Poles of the quadratic denominator of the effective coherence:
///
/// δ± = ½[Δ_MW − Δ_AC + i(γ₃+γ₄) ± √(Ω_MW² + (Δ_MW + Δ_AC − iγ₃ + iγ₄)²)]
///
/// and strengths S± = ±(δ± − Δ_MW − iγ₄)/(δ₊ − δ₋). For Δ_MW = 0 this is the
/// textbook form; keeping Δ_MW makes the poles exact roots of the denominator
/// for any microwave detuning. In the regime Ω_MW ≫ |γ₃−γ₄|, Δ_AC the poles
/// approach [±Ω_MW + i(γ₃+γ₄)]/2 with S± → 1/2.
pub fn eia_poles(params: &SystemParams, eff: &EffectiveParams) -> EiaPoles {
    let i = Complex64::i();
    let a = Complex64::new(params.delta_mw, params.gamma4);
    let b = Complex64::new(-eff.delta_ac, params.gamma3);
    let mean = 0.5 * (a + b);
    let half_diff = 0.5 * (a - b);
    let rad = (Complex64::new(params.omega_mw, 0.0).powu(2) + (2.0 * half_diff).powu(2)).sqrt();
    let plus = mean + 0.5 * rad;
    let minus = mean - 0.5 * rad;
    let sep = plus - minus;
    let (sp, sm) = if sep.norm() == 0.0 {
        // Exactly coincident poles: split the unit strength evenly.
        (Complex64::new(0.5, 0.0), Complex64::new(0.5, 0.0))
    } else {
        (
            (plus - params.delta_mw - i * params.gamma4) / sep,
            -(minus - params.delta_mw - i * params.gamma4) / sep,
        )
    };
    EiaPoles {
        plus,
        minus,
        strength_plus: sp,
        strength_minus: sm,
    }
}

/// True when the double-Lorentzian limit applies:
/// Ω_MW > 10·max(|γ₃ − γ₄|, |Δ_AC|).
pub fn double_lorentzian_valid(params: &SystemParams, eff: &EffectiveParams) -> bool {
    params.omega_mw
        > DOUBLE_LORENTZIAN_GATE_FACTOR * (params.gamma3 - params.gamma4).abs().max(eff.delta_ac.abs())
}

/// Sum of two equal-width Lorentzians shifted from the two-photon resonance
/// by ±Ω_MW/2, each of half-width (γ₃+γ₄)/2:
///
/// ρ₃₁(δ) ≈ (Ω_eff/4)·[1/((δ+Ω_MW/2) − i(γ₃+γ₄)/2) + 1/((δ−Ω_MW/2) − i(γ₃+γ₄)/2)]
///
/// The separation of the two absorption minima of this form is exactly Ω_MW.
/// Enforces the validity gate; see [`double_lorentzian_unchecked`].
pub fn double_lorentzian(
    params: &SystemParams,
    eff: &EffectiveParams,
    delta: f64,
) -> Result<Complex64> {
    if !double_lorentzian_valid(params, eff) {
        return Err(Error::GateViolation(format!(
            "double-Lorentzian limit needs omega_mw > {:.3e} rad/s, got {:.3e}",
            DOUBLE_LORENTZIAN_GATE_FACTOR
                * (params.gamma3 - params.gamma4).abs().max(eff.delta_ac.abs()),
            params.omega_mw
        )));
    }
    Ok(double_lorentzian_unchecked(params, eff, delta))
}

/// The double-Lorentzian form without the validity gate.
pub fn double_lorentzian_unchecked(
    params: &SystemParams,
    eff: &EffectiveParams,
    delta: f64,
) -> Complex64 {
    let hw = Complex64::new(0.0, 0.5 * (params.gamma3 + params.gamma4));
    let half_mw = 0.5 * params.omega_mw;
    0.25 * eff.omega_eff
        * (1.0 / (Complex64::new(delta + half_mw, 0.0) - hw)
            + 1.0 / (Complex64::new(delta - half_mw, 0.0) - hw))
}
