//! Transmission spectra: synthesis on detuning grids, factorization into the
//! three resonances, calibrated noise injection, and the pinned CSV format.
//!
//! The probe transmission follows the Beer–Lambert form
//! P_t/P_0 = exp{−OD·(Γ/Ω_p)·Im ρ₂₁(δ)}, normalized so that the bare
//! two-level line at resonance transmits exactly exp(−OD). Synthesis always
//! evaluates the direct closed form; the equivalent product of per-resonance
//! factors Rᵢ = exp{−(OD·Γ/2)·Im[Sᵢ/(δ−δᵢ)]} is a cross-check path that
//! requires distinct poles.

use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::params::SystemParams;
use crate::rng::SplitMix64;
use crate::susceptibility::{self, PoleDecomposition};

/// Sampling grid for the two-photon detuning axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Center of the scan (rad/s).
    pub center: f64,
    /// Half-span of the scan (rad/s); the grid covers center ± half_span.
    pub half_span: f64,
    /// Number of points, at least 2.
    pub points: usize,
}

impl GridSpec {
    pub fn new(center: f64, half_span: f64, points: usize) -> Result<Self> {
        if !(half_span > 0.0) || points < 2 {
            return Err(Error::InvalidParams(format!(
                "grid needs positive span and at least 2 points, got span {half_span}, {points} points"
            )));
        }
        Ok(Self {
            center,
            half_span,
            points,
        })
    }

    /// The default scan: 801 points over ±2π×20 MHz around zero detuning.
    pub fn default_scan() -> Self {
        Self {
            center: 0.0,
            half_span: crate::params::hz_to_angular(20.0e6),
            points: 801,
        }
    }

    /// Evenly spaced grid. The offsets are computed from the signed integer
    /// 2k − (n−1), so a zero-centered grid is mirror-exact bit for bit.
    pub fn build(&self) -> Vec<f64> {
        let n = self.points;
        let denom = (n - 1) as f64;
        (0..n)
            .map(|k| {
                let num = (2 * k as i64 - (n as i64 - 1)) as f64;
                self.center + self.half_span * num / denom
            })
            .collect()
    }
}

/// Synthetic noise channels: additive Gaussian transmission noise and
/// Gaussian jitter of the two-photon detuning, both seeded.
///
/// Jitter is applied to the evaluation point, not to the recorded grid,
/// modeling two-photon frequency noise: it broadens the line without moving
/// the recorded axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NoiseModel {
    /// RMS of the additive transmission noise (dimensionless).
    pub additive_rms: f64,
    /// RMS two-photon detuning jitter (rad/s).
    pub two_photon_jitter: f64,
    /// Master seed; each grid point draws from a stream keyed by
    /// (seed, point index) so evaluation order cannot matter.
    pub seed: u64,
}

impl NoiseModel {
    pub fn new(additive_rms: f64, two_photon_jitter: f64, seed: u64) -> Result<Self> {
        if additive_rms < 0.0 || two_photon_jitter < 0.0 {
            return Err(Error::InvalidParams(
                "noise magnitudes must be non-negative".into(),
            ));
        }
        Ok(Self {
            additive_rms,
            two_photon_jitter,
            seed,
        })
    }
}

/// Provenance carried alongside a spectrum.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct SpectrumMeta {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<SystemParams>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
}

/// A sampled transmission spectrum over an ascending detuning grid.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    grid: Vec<f64>,
    transmission: Vec<f64>,
    pub meta: SpectrumMeta,
}

impl Spectrum {
    pub fn new(grid: Vec<f64>, transmission: Vec<f64>, meta: SpectrumMeta) -> Result<Self> {
        if grid.len() != transmission.len() || grid.len() < 2 {
            return Err(Error::InvalidParams(format!(
                "grid and transmission must have equal length >= 2, got {} and {}",
                grid.len(),
                transmission.len()
            )));
        }
        if grid.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::InvalidParams("grid must be strictly ascending".into()));
        }
        Ok(Self {
            grid,
            transmission,
            meta,
        })
    }

    pub fn len(&self) -> usize {
        self.grid.len()
    }

    pub fn is_empty(&self) -> bool {
        self.grid.is_empty()
    }

    /// Detuning grid in rad/s.
    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    pub fn transmission(&self) -> &[f64] {
        &self.transmission
    }

    /// Index of the global transmission minimum.
    pub fn argmin(&self) -> usize {
        self.transmission
            .iter()
            .enumerate()
            .min_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0)
    }

    /// Write the pinned CSV format: header `delta_hz,transmission`, one row
    /// per point, LF line endings, 17 significant digits.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(b"delta_hz,transmission\n")?;
        for (d, t) in self.grid.iter().zip(self.transmission.iter()) {
            writeln!(
                w,
                "{:.16e},{:.16e}",
                crate::params::angular_to_hz(*d),
                t
            )?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("write to Vec cannot fail");
        String::from_utf8(buf).expect("CSV output is ASCII")
    }

    /// Read a spectrum from the pinned CSV format. `meta` is attached as
    /// given (typically read from the JSON sidecar, or empty).
    pub fn read_csv<R: BufRead>(r: R, meta: SpectrumMeta) -> Result<Self> {
        let mut lines = r.lines().enumerate();
        let header = match lines.next() {
            Some((_, Ok(h))) => h,
            Some((_, Err(e))) => return Err(e.into()),
            None => {
                return Err(Error::CsvParse {
                    line: 1,
                    message: "empty file".into(),
                })
            }
        };
        if header.trim() != "delta_hz,transmission" {
            return Err(Error::CsvParse {
                line: 1,
                message: format!("expected header 'delta_hz,transmission', got '{header}'"),
            });
        }
        let mut grid = Vec::new();
        let mut transmission = Vec::new();
        for (idx, line) in lines {
            let line = line?;
            let line_no = idx + 1;
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let (a, b) = match (fields.next(), fields.next(), fields.next()) {
                (Some(a), Some(b), None) => (a, b),
                _ => {
                    return Err(Error::CsvParse {
                        line: line_no,
                        message: format!("expected 2 comma-separated fields, got '{line}'"),
                    })
                }
            };
            let delta_hz: f64 = a.trim().parse().map_err(|e| Error::CsvParse {
                line: line_no,
                message: format!("bad delta_hz '{a}': {e}"),
            })?;
            let t: f64 = b.trim().parse().map_err(|e| Error::CsvParse {
                line: line_no,
                message: format!("bad transmission '{b}': {e}"),
            })?;
            grid.push(crate::params::hz_to_angular(delta_hz));
            transmission.push(t);
        }
        Spectrum::new(grid, transmission, meta)
    }
}

/// Noise-free transmission P_t/P_0 at one detuning.
pub fn transmit(params: &SystemParams, delta: f64) -> Result<f64> {
    let per_rabi = susceptibility::rho21_per_rabi(params, delta)?;
    Ok((-params.od * params.gamma_bare() * per_rabi.im).exp())
}

/// The three per-resonance transmission factors Rᵢ. Their product equals
/// [`transmit`] wherever the poles are distinct; a factor above one marks the
/// destructive-interference (EIT) character of that resonance.
pub fn resonance_factors(params: &SystemParams, delta: f64) -> Result<[f64; 3]> {
    let dec = PoleDecomposition::solve(params)?;
    Ok(resonance_factors_from(params, &dec, delta))
}

/// Same as [`resonance_factors`] with a precomputed decomposition.
pub fn resonance_factors_from(
    params: &SystemParams,
    dec: &PoleDecomposition,
    delta: f64,
) -> [f64; 3] {
    let prefactor = 0.5 * params.od * params.gamma_bare();
    let d = num_complex::Complex64::new(delta, 0.0);
    let mut out = [0.0; 3];
    for (slot, (residue, pole)) in out.iter_mut().zip(dec.residues.iter().zip(dec.poles.iter())) {
        let term = residue / (d - pole);
        *slot = (-prefactor * term.im).exp();
    }
    out
}

/// Synthesize a spectrum on the given grid, optionally with noise.
///
/// Deterministic: the same parameters, grid, and noise model (same seed)
/// produce bit-identical output, independent of evaluation order.
pub fn synthesize(
    params: &SystemParams,
    grid_spec: &GridSpec,
    noise: Option<&NoiseModel>,
) -> Result<Spectrum> {
    params.validate()?;
    if !(params.omega_p > 0.0) {
        return Err(Error::InvalidParams(
            "synthesis needs a probe: omega_p > 0".into(),
        ));
    }
    let grid = grid_spec.build();
    let mut transmission = Vec::with_capacity(grid.len());
    match noise {
        None => {
            for &delta in &grid {
                transmission.push(transmit(params, delta)?);
            }
        }
        Some(n) => {
            let cap = 1.0 + 5.0 * n.additive_rms;
            for (idx, &delta) in grid.iter().enumerate() {
                let mut stream = SplitMix64::for_point(n.seed, idx as u64);
                let (g_jitter, g_add) = stream.next_normal_pair();
                let delta_eval = delta + n.two_photon_jitter * g_jitter;
                let clean = transmit(params, delta_eval)?;
                let noisy = clean + n.additive_rms * g_add;
                transmission.push(noisy.clamp(0.0, cap));
            }
        }
    }
    Spectrum::new(
        grid,
        transmission,
        SpectrumMeta {
            params: Some(*params),
            noise: noise.copied(),
        },
    )
}

/// Percent transmission difference at the line center of the reference
/// (microwave-free) spectrum: 100·(T_mw − T_ref) evaluated at the detuning
/// where the reference spectrum is deepest.
///
/// Grows from zero as the microwave field fills in the single absorption
/// dip, which makes it a field observable below the splitting-resolution
/// threshold.
pub fn transmission_difference(with_mw: &Spectrum, without_mw: &Spectrum) -> Result<f64> {
    if with_mw.grid() != without_mw.grid() {
        return Err(Error::GridMismatch);
    }
    let at = without_mw.argmin();
    Ok(100.0 * (with_mw.transmission()[at] - without_mw.transmission()[at]))
}
