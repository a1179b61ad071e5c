//! Closed-form weak-probe coherence of the four-level cascade system and its
//! decomposition into three resonant poles with residues.
//!
//! The probe-transition coherence is
//!
//! ρ₂₁(δ) = (Ω_p/2) · (d₃d₄ − Ω_MW²/4) / (d₂d₃d₄ − d₂Ω_MW²/4 − d₄Ω_c²/4)
//!
//! with complex detunings d₂ = δ − Δ_c − iγ₂, d₃ = δ − iγ₃ and
//! d₄ = δ − Δ_MW − iγ₄. Viewed as a rational function of δ it is a monic
//! quadratic over a monic cubic, so it splits into three simple resonances
//! ρ₂₁ = (Ω_p/2) Σᵢ Sᵢ/(δ − δᵢ) whose strengths always sum to one.
//!
//! Poles are found with a branch-safe depressed-cubic solver polished by
//! Newton iteration, not by transcribing the printed radical expressions;
//! those are kept in [`poles_closed_form`] purely as a cross-check, since a
//! naive evaluation is exposed to cube-root branch ambiguity.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::params::SystemParams;

/// Relative denominator magnitude below which the closed form is considered
/// degenerate. Unreachable while any dephasing rate is positive.
const DEGENERATE_DENOM_REL: f64 = 1e-12;

/// Relative pole separation below which a partial-fraction decomposition is
/// refused rather than returned with enormous residues.
pub const DEGENERATE_POLE_REL: f64 = 1e-10;

/// The three complex detunings of the probe response at one value of the
/// two-photon detuning δ. Only constructible through [`ComplexDetunings::at`]
/// so the sign conventions cannot drift.
#[derive(Debug, Clone, Copy)]
pub struct ComplexDetunings {
    d2: Complex64,
    d3: Complex64,
    d4: Complex64,
}

impl ComplexDetunings {
    /// d₂ = δ − Δ_c − iγ₂, d₃ = δ − iγ₃, d₄ = δ − Δ_MW − iγ₄.
    pub fn at(params: &SystemParams, delta: f64) -> Self {
        Self {
            d2: Complex64::new(delta - params.delta_c, -params.gamma2),
            d3: Complex64::new(delta, -params.gamma3),
            d4: Complex64::new(delta - params.delta_mw, -params.gamma4),
        }
    }

    pub fn d2(&self) -> Complex64 {
        self.d2
    }

    pub fn d3(&self) -> Complex64 {
        self.d3
    }

    pub fn d4(&self) -> Complex64 {
        self.d4
    }
}

/// Uncoupled pole positions: a₂ = Δ_c + iγ₂, a₃ = iγ₃, a₄ = Δ_MW + iγ₄.
/// The complex detunings are dᵢ(δ) = δ − aᵢ.
fn bare_poles(params: &SystemParams) -> (Complex64, Complex64, Complex64) {
    (
        Complex64::new(params.delta_c, params.gamma2),
        Complex64::new(0.0, params.gamma3),
        Complex64::new(params.delta_mw, params.gamma4),
    )
}

/// Weak-probe coherence ρ₂₁(δ) of the probe transition.
pub fn rho21(params: &SystemParams, delta: f64) -> Result<Complex64> {
    Ok(params.omega_p * rho21_per_rabi(params, delta)?)
}

/// ρ₂₁(δ)/Ω_p, the coherence per unit probe Rabi frequency. The weak-probe
/// response is strictly linear in Ω_p, so everything downstream (transmission,
/// fitting) uses this form and stays well defined as Ω_p → 0.
pub fn rho21_per_rabi(params: &SystemParams, delta: f64) -> Result<Complex64> {
    let d = ComplexDetunings::at(params, delta);
    let mw2_4 = 0.25 * params.omega_mw * params.omega_mw;
    let c2_4 = 0.25 * params.omega_c * params.omega_c;
    let num = d.d3 * d.d4 - mw2_4;
    let den = d.d2 * d.d3 * d.d4 - d.d2 * mw2_4 - d.d4 * c2_4;
    // Scale of the denominator's constituent terms, for the cancellation test.
    let scale = d.d2.norm() * d.d3.norm() * d.d4.norm()
        + d.d2.norm() * mw2_4
        + d.d4.norm() * c2_4;
    if den.norm() <= DEGENERATE_DENOM_REL * scale {
        return Err(Error::DegenerateDenominator { delta });
    }
    Ok(0.5 * num / den)
}

/// Coefficients [c₂, c₁, c₀] of the monic cubic denominator
/// δ³ + c₂δ² + c₁δ + c₀ of the probe response.
pub fn denominator_cubic(params: &SystemParams) -> [Complex64; 3] {
    let (a2, a3, a4) = bare_poles(params);
    let mw2_4 = 0.25 * params.omega_mw * params.omega_mw;
    let c2_4 = 0.25 * params.omega_c * params.omega_c;
    [
        -(a2 + a3 + a4),
        a2 * a3 + a2 * a4 + a3 * a4 - mw2_4 - c2_4,
        -(a2 * a3 * a4) + a2 * mw2_4 + a4 * c2_4,
    ]
}

/// Monic quadratic numerator evaluated at `x`: (x − a₃)(x − a₄) − Ω_MW²/4.
fn numerator_at(params: &SystemParams, x: Complex64) -> Complex64 {
    let (_, a3, a4) = bare_poles(params);
    (x - a3) * (x - a4) - 0.25 * params.omega_mw * params.omega_mw
}

/// Three complex poles δᵢ of the probe response, ordered by ascending real
/// part with ties broken by ascending imaginary part.
///
/// Every pole has positive imaginary part whenever all dephasing rates are
/// positive (each resonance decays).
pub fn solve_poles(params: &SystemParams) -> [Complex64; 3] {
    let [c2, c1, c0] = denominator_cubic(params);
    let mut roots = solve_monic_cubic(c2, c1, c0);
    roots.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    roots
}

/// Residues Sᵢ of ρ₂₁/(Ω_p/2) at the given poles:
/// Sᵢ = N(δᵢ)/∏_{j≠i}(δᵢ − δⱼ) with N the monic quadratic numerator.
///
/// Because the numerator and denominator are both monic, S₁+S₂+S₃ = 1.
/// Fails if any two poles are closer than [`DEGENERATE_POLE_REL`] relative to
/// the largest pole magnitude; callers must then fall back to [`rho21`].
pub fn residues(params: &SystemParams, poles: &[Complex64; 3]) -> Result<[Complex64; 3]> {
    let scale = poles.iter().map(|p| p.norm()).fold(0.0, f64::max);
    let mut min_sep = f64::INFINITY;
    for i in 0..3 {
        for j in (i + 1)..3 {
            min_sep = min_sep.min((poles[i] - poles[j]).norm());
        }
    }
    if min_sep <= DEGENERATE_POLE_REL * scale || min_sep == 0.0 {
        return Err(Error::DegeneratePoles {
            separation: min_sep,
            scale,
        });
    }
    let mut s = [Complex64::new(0.0, 0.0); 3];
    for i in 0..3 {
        let mut denom = Complex64::new(1.0, 0.0);
        for j in 0..3 {
            if j != i {
                denom *= poles[i] - poles[j];
            }
        }
        s[i] = numerator_at(params, poles[i]) / denom;
    }
    Ok(s)
}

/// Poles and residues of the probe response, bundled.
#[derive(Debug, Clone, Copy)]
pub struct PoleDecomposition {
    pub poles: [Complex64; 3],
    pub residues: [Complex64; 3],
}

impl PoleDecomposition {
    pub fn solve(params: &SystemParams) -> Result<Self> {
        let poles = solve_poles(params);
        let residues = residues(params, &poles)?;
        Ok(Self { poles, residues })
    }

    /// Partial-fraction evaluation Σᵢ Sᵢ/(δ − δᵢ), equal to ρ₂₁·2/Ω_p.
    pub fn response_per_half_rabi(&self, delta: f64) -> Complex64 {
        let d = Complex64::new(delta, 0.0);
        self.poles
            .iter()
            .zip(self.residues.iter())
            .map(|(p, s)| s / (d - p))
            .sum()
    }

    /// ρ₂₁(δ) reconstructed from the pole decomposition.
    pub fn rho21(&self, omega_p: f64, delta: f64) -> Complex64 {
        0.5 * omega_p * self.response_per_half_rabi(delta)
    }

    pub fn residue_sum(&self) -> Complex64 {
        self.residues.iter().sum()
    }
}

/// Roots of the monic cubic x³ + c₂x² + c₁x + c₀ with complex coefficients.
///
/// Depressed-cubic Cardano with the cube-root argument chosen to avoid
/// cancellation, followed by two Newton polish steps on the original cubic.
fn solve_monic_cubic(c2: Complex64, c1: Complex64, c0: Complex64) -> [Complex64; 3] {
    let third = 1.0 / 3.0;
    let shift = -c2 * third;
    // x = t + shift gives t³ + p t + q.
    let p = c1 - c2 * c2 * third;
    let q = c2 * (2.0 * c2 * c2 / 27.0 - c1 * third) + c0;

    let mut roots = if p.norm() == 0.0 && q.norm() == 0.0 {
        [shift; 3]
    } else {
        let half_q = 0.5 * q;
        let disc = half_q * half_q + (p * third) * (p * third) * (p * third);
        let sq = disc.sqrt();
        // Keep the branch with the larger magnitude so u³ never cancels.
        let u3 = if (-half_q + sq).norm() >= (-half_q - sq).norm() {
            -half_q + sq
        } else {
            -half_q - sq
        };
        let u = u3.cbrt();
        let omega = Complex64::new(-0.5, 0.5 * 3f64.sqrt());
        let mut out = [Complex64::new(0.0, 0.0); 3];
        for (k, slot) in out.iter_mut().enumerate() {
            let uk = u * omega.powu(k as u32);
            // v chosen so that uv = -p/3; t = u + v.
            let vk = if uk.norm() > 0.0 {
                -p * third / uk
            } else {
                Complex64::new(0.0, 0.0)
            };
            *slot = uk + vk + shift;
        }
        out
    };

    // Newton polish on the full cubic.
    for r in roots.iter_mut() {
        for _ in 0..3 {
            let f = ((*r + c2) * *r + c1) * *r + c0;
            let fp = (3.0 * *r + 2.0 * c2) * *r + c1;
            if fp.norm() == 0.0 {
                break;
            }
            let step = f / fp;
            *r -= step;
            if step.norm() <= 1e-16 * r.norm().max(1e-300) {
                break;
            }
        }
    }
    roots
}

/// Literal evaluation of the printed closed-form pole expressions, with the
/// square-root sign and the cube-root branch (0, 1, 2 multiplying by the
/// principal cube roots of unity) made explicit.
///
/// In exact arithmetic every branch choice yields the same three poles up to
/// permutation; numerically the expression can lose accuracy when the cube
/// root argument nearly cancels. Retained as a cross-check against
/// [`solve_poles`] only — never used in the evaluation path.
pub fn poles_closed_form(
    params: &SystemParams,
    principal_sqrt: bool,
    cbrt_branch: u8,
) -> [Complex64; 3] {
    let i = Complex64::i();
    // The printed intermediates use the δ = 0 values of the complex detunings.
    let e2 = -Complex64::new(params.delta_c, params.gamma2);
    let e3 = -Complex64::new(0.0, params.gamma3);
    let e4 = -Complex64::new(params.delta_mw, params.gamma4);
    let oc2 = params.omega_c * params.omega_c;
    let omw2 = params.omega_mw * params.omega_mw;

    let big_d = -(e2 + e3 + e4);
    let l1 = -e2 * e2 + e2 * e3 - e3 * e3 + e2 * e4 + e3 * e4 - e4 * e4
        - 0.75 * oc2
        - 0.75 * omw2;
    let l2 = 2.0 * e2 * e2 * e2 - 3.0 * e2 * e2 * e3 - 3.0 * e3 * e3 * e2 - 3.0 * e2 * e2 * e4
        - 3.0 * e3 * e3 * e4
        - 3.0 * e4 * e4 * e2
        - 3.0 * e4 * e4 * e3
        + 2.0 * e3 * e3 * e3
        + 12.0 * e2 * e3 * e4
        + 2.0 * e4 * e4 * e4
        + 2.25 * e2 * oc2
        + 2.25 * e3 * oc2
        + 2.25 * e3 * omw2
        + 2.25 * e4 * omw2
        - 4.5 * e4 * oc2
        - 4.5 * e2 * omw2;
    let mut sq = (4.0 * l1 * l1 * l1 + l2 * l2).sqrt();
    if !principal_sqrt {
        sq = -sq;
    }
    let omega = Complex64::new(-0.5, 0.5 * 3f64.sqrt());
    let l3 = (l2 + sq).cbrt() * omega.powu(u32::from(cbrt_branch % 3));

    let cbrt2 = 2f64.cbrt();
    let cbrt4 = 4f64.cbrt();
    let sqrt3 = 3f64.sqrt();
    let third = 1.0 / 3.0;

    let d1 = third * (big_d + cbrt2 * l1 / l3 - l3 / cbrt2);
    let d2 = third
        * (big_d - (1.0 + i * sqrt3) * l1 / (cbrt4 * l3) + (1.0 - i * sqrt3) * l3 / (2.0 * cbrt2));
    let d3 = third
        * (big_d - (1.0 - i * sqrt3) * l1 / (cbrt4 * l3) + (1.0 + i * sqrt3) * l3 / (2.0 * cbrt2));
    [d1, d2, d3]
}
