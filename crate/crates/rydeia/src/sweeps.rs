//! Parameter-sweep orchestration: regime classification, microwave power
//! conversion, and per-point runs of both extraction pipelines with
//! deterministic seeding and machine-readable reports.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{
    extract_ats, fit_global, seed_initial, splitting_from_model, ExtractionResult, FixedMask,
};
use crate::params::{angular_to_hz, DipoleTransition, SystemParams};
use crate::spectrum::{synthesize, GridSpec, NoiseModel};

/// Interference regime of the MW-dressed four-level system.
///
/// Classification thresholds (Γ = 2γ₂):
/// * `EiaAts` when |Δ_c| ≥ 10·max(Ω_c, Γ) — far-detuned coupling;
/// * otherwise `Deit` when Ω_c < 0.5·Γ, `Dats` when Ω_c > 2·Γ,
///   and `Crossover` in between.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "SCREAMING_SNAKE_CASE")]
pub enum RegimeLabel {
    Deit,
    Crossover,
    Dats,
    EiaAts,
}

impl std::fmt::Display for RegimeLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            RegimeLabel::Deit => "DEIT",
            RegimeLabel::Crossover => "CROSSOVER",
            RegimeLabel::Dats => "DATS",
            RegimeLabel::EiaAts => "EIA_ATS",
        };
        f.write_str(s)
    }
}

/// Classify a parameter set into its interference regime. Total: every
/// parameter set maps to exactly one label.
pub fn classify(params: &SystemParams) -> RegimeLabel {
    let gamma = params.gamma_bare();
    if params.delta_c.abs() >= 10.0 * params.omega_c.max(gamma) {
        RegimeLabel::EiaAts
    } else if params.omega_c < 0.5 * gamma {
        RegimeLabel::Deit
    } else if params.omega_c > 2.0 * gamma {
        RegimeLabel::Dats
    } else {
        RegimeLabel::Crossover
    }
}

/// Convert a generator power in dBm to a microwave Rabi frequency through a
/// calibration constant in rad/s per √mW: Ω_MW = cal·√(10^(P/10)).
/// The field, and with it the Rabi frequency, scales as the square root of
/// the emitted power.
pub fn mw_power_to_rabi(power_dbm: f64, cal: f64) -> Result<f64> {
    if !(cal > 0.0) {
        return Err(Error::InvalidParams(format!(
            "calibration constant must be positive, got {cal}"
        )));
    }
    Ok(cal * 10f64.powf(power_dbm / 20.0))
}

/// The quantity stepped by a sweep. Frequency-like values are external Hz.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "axis", rename_all = "snake_case")]
pub enum SweepAxis {
    /// Microwave Rabi frequency, values in Hz.
    OmegaMw,
    /// Generator power in dBm with a calibration constant (rad/s per √mW).
    MwPower { cal: f64 },
    /// Optical depth, dimensionless values.
    Od,
    /// Coupling Rabi frequency, values in Hz.
    OmegaC,
    /// Coupling detuning, values in Hz.
    DeltaC,
}

impl SweepAxis {
    fn apply(&self, base: &SystemParams, value: f64) -> Result<SystemParams> {
        let p = match self {
            SweepAxis::OmegaMw => base.with_omega_mw(crate::params::hz_to_angular(value)),
            SweepAxis::MwPower { cal } => base.with_omega_mw(mw_power_to_rabi(value, *cal)?),
            SweepAxis::Od => base.with_od(value),
            SweepAxis::OmegaC => base.with_omega_c(crate::params::hz_to_angular(value)),
            SweepAxis::DeltaC => base.with_delta_c(crate::params::hz_to_angular(value)),
        };
        p.validate()?;
        Ok(p)
    }

    fn name(&self) -> &'static str {
        match self {
            SweepAxis::OmegaMw => "omega_mw",
            SweepAxis::MwPower { .. } => "mw_power",
            SweepAxis::Od => "od",
            SweepAxis::OmegaC => "omega_c",
            SweepAxis::DeltaC => "delta_c",
        }
    }
}

/// How each sweep point is synthesized and fitted.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub grid: GridSpec,
    /// Noise magnitudes applied per point; the per-point seed is derived
    /// from `master_seed` and the point index.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub noise: Option<NoiseModel>,
    pub master_seed: u64,
    /// Prominence threshold for dip finding.
    pub min_prominence: f64,
    /// Transition used for the SI field conversion.
    pub dipole: DipoleTransition,
    /// Worker threads; 1 runs serially. Scheduling cannot affect results,
    /// so this execution detail stays out of serialized reports.
    #[serde(skip, default = "default_jobs")]
    pub jobs: usize,
}

fn default_jobs() -> usize {
    1
}

impl SweepConfig {
    pub fn new(grid: GridSpec, dipole: DipoleTransition) -> Self {
        Self {
            grid,
            noise: None,
            master_seed: 0,
            min_prominence: 0.02,
            dipole,
            jobs: 1,
        }
    }
}

/// One sweep point: the swept value, the regime of the full parameter set,
/// and either an extraction result or the error that stopped this point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepPoint {
    pub value: f64,
    pub regime: RegimeLabel,
    /// Ω_MW actually used for synthesis at this point (Hz), the ground truth
    /// for deviation studies.
    pub omega_mw_true_hz: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub result: Option<ExtractionResult>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// A complete sweep: configuration snapshot plus one row per point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepReport {
    pub axis: String,
    pub base: SystemParams,
    pub config: SweepConfig,
    pub points: Vec<SweepPoint>,
}

impl SweepReport {
    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Flat CSV, one row per point, for external plotting.
    pub fn to_csv(&self) -> String {
        let mut out = String::from(
            "value,regime,omega_mw_true_hz,delta_f_hz,delta_f_prime_hz,omega_mw_hz,deviation_pct,deviation_prime_pct,field_v_per_m,error\n",
        );
        let fmt = |v: Option<f64>| v.map(|x| format!("{x:.16e}")).unwrap_or_default();
        for p in &self.points {
            let r = p.result.unwrap_or_default();
            out.push_str(&format!(
                "{:.16e},{},{:.16e},{},{},{},{},{},{},{}\n",
                p.value,
                p.regime,
                p.omega_mw_true_hz,
                fmt(r.delta_f_hz),
                fmt(r.delta_f_prime_hz),
                fmt(r.omega_mw_hz),
                fmt(r.deviation_pct),
                fmt(r.deviation_prime_pct),
                fmt(r.field_v_per_m),
                p.error.as_deref().unwrap_or(""),
            ));
        }
        out
    }
}

fn run_point(
    axis: &SweepAxis,
    value: f64,
    base: &SystemParams,
    config: &SweepConfig,
    index: usize,
) -> SweepPoint {
    let params = match axis.apply(base, value) {
        Ok(p) => p,
        Err(e) => {
            return SweepPoint {
                value,
                regime: classify(base),
                omega_mw_true_hz: angular_to_hz(base.omega_mw),
                result: None,
                error: Some(e.to_string()),
            }
        }
    };
    let regime = classify(&params);
    let omega_mw_true_hz = angular_to_hz(params.omega_mw);

    let noise = config.noise.map(|n| NoiseModel {
        seed: crate::rng::SplitMix64::for_point(config.master_seed, index as u64).next_u64(),
        ..n
    });

    let outcome = (|| -> Result<ExtractionResult> {
        let spec = synthesize(&params, &config.grid, noise.as_ref())?;
        let local = extract_ats(&spec, config.min_prominence);
        let delta_f_hz = local.as_ref().ok().map(|a| a.delta_f_hz);

        let initial = seed_initial(&spec, &params, config.min_prominence);
        let fit = fit_global(&spec, &initial, FixedMask::default())?;
        let (omega_mw_rec, delta_f_prime_hz) = if fit.converged {
            let dfp = splitting_from_model(&fit.model, &config.grid).ok();
            (Some(fit.model.omega_mw), dfp)
        } else {
            (None, None)
        };

        // A point where neither pipeline produced a splitting is a failure.
        if delta_f_hz.is_none() && omega_mw_rec.is_none() {
            local?;
        }
        ExtractionResult::assemble(
            delta_f_hz,
            delta_f_prime_hz,
            omega_mw_rec,
            Some(&config.dipole),
        )
    })();

    match outcome {
        Ok(result) => SweepPoint {
            value,
            regime,
            omega_mw_true_hz,
            result: Some(result),
            error: None,
        },
        Err(e) => SweepPoint {
            value,
            regime,
            omega_mw_true_hz,
            result: None,
            error: Some(e.to_string()),
        },
    }
}

/// Run both pipelines at every value of the swept axis. Per-point failures
/// are recorded in the report, not fatal. Points are independent; with
/// `config.jobs > 1` they run on that many worker threads, and the report is
/// ordered by point index either way.
pub fn run_sweep(
    axis: SweepAxis,
    values: &[f64],
    base: &SystemParams,
    config: &SweepConfig,
) -> Result<SweepReport> {
    if values.is_empty() {
        return Err(Error::InvalidParams("sweep needs at least one value".into()));
    }
    if values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParams(
            "sweep values must be strictly increasing".into(),
        ));
    }
    base.validate()?;

    let jobs = config.jobs.max(1).min(values.len());
    let points: Vec<SweepPoint> = if jobs == 1 {
        values
            .iter()
            .enumerate()
            .map(|(i, &v)| run_point(&axis, v, base, config, i))
            .collect()
    } else {
        let mut slots: Vec<Option<SweepPoint>> = vec![None; values.len()];
        let next = std::sync::atomic::AtomicUsize::new(0);
        let slots_mutex = std::sync::Mutex::new(&mut slots);
        std::thread::scope(|scope| {
            for _ in 0..jobs {
                scope.spawn(|| loop {
                    let i = next.fetch_add(1, std::sync::atomic::Ordering::SeqCst);
                    if i >= values.len() {
                        break;
                    }
                    let point = run_point(&axis, values[i], base, config, i);
                    slots_mutex.lock().unwrap()[i] = Some(point);
                });
            }
        });
        slots.into_iter().map(|s| s.expect("all points filled")).collect()
    };

    Ok(SweepReport {
        axis: axis.name().to_string(),
        base: *base,
        config: *config,
        points,
    })
}
