//! Command-line front end: simulate spectra, run the extraction pipelines,
//! orchestrate sweeps, classify regimes, and self-validate the numerics.
//!
//! Exit codes: 0 success, 1 runtime failure, 2 usage or parse error,
//! 3 fit non-convergence. Machine-readable output is always JSON written to
//! files; standard output carries human summaries only.

mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};

use rydeia::fitting::{
    extract_ats, fit_global, seed_initial, splitting_from_model, ExtractionResult, FixedMask,
};
use rydeia::params::{angular_to_hz, hz_to_angular, DipoleTransition, SystemParams};
use rydeia::spectrum::{synthesize, GridSpec, NoiseModel, Spectrum, SpectrumMeta};
use rydeia::sweeps::{classify, run_sweep, SweepAxis, SweepConfig};
use rydeia::Error;

#[derive(Parser)]
#[command(
    name = "rydeia",
    about = "Probe-transmission simulation and Autler-Townes splitting extraction \
             for MW-dressed four-level cascade atoms",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a transmission spectrum and write it as CSV plus a JSON
    /// metadata sidecar.
    Simulate(SimulateArgs),
    /// Run the extraction pipelines on a spectrum CSV and write the result
    /// as JSON.
    Fit(FitArgs),
    /// Sweep one parameter, running both pipelines at every point.
    Sweep(SweepArgs),
    /// Print the interference regime of a parameter set.
    Classify(ParamArgs),
    /// Run the built-in numerical cross-checks (closed form vs. pole
    /// decomposition vs. Lindblad steady state) and exit nonzero on failure.
    Validate(ValidateArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum Preset {
    /// Resonant weak coupling: Ωc/2π = 2 MHz, Δc = 0, OD = 2.
    DeitFig2a,
    /// Resonant coupling at the decay rate: Ωc/2π = 6 MHz, Δc = 0, OD = 2.
    CrossoverFig2b,
    /// Resonant strong coupling: Ωc/2π = 16 MHz, Δc = 0, OD = 2.
    DatsFig2c,
    /// Far-detuned coupling: Δc/2π = 100 MHz, Ωc/2π = 6 MHz, OD = 100.
    EiaFig2d,
}

impl Preset {
    fn params(self) -> SystemParams {
        let mhz = |v: f64| hz_to_angular(v * 1e6);
        let (omega_c, delta_c, od) = match self {
            Preset::DeitFig2a => (2.0, 0.0, 2.0),
            Preset::CrossoverFig2b => (6.0, 0.0, 2.0),
            Preset::DatsFig2c => (16.0, 0.0, 2.0),
            Preset::EiaFig2d => (6.0, 100.0, 100.0),
        };
        SystemParams {
            omega_p: mhz(0.4),
            omega_c: mhz(omega_c),
            omega_mw: 0.0,
            delta_c: mhz(delta_c),
            delta_mw: 0.0,
            gamma2: mhz(3.0),
            gamma3: mhz(0.05),
            gamma4: mhz(0.05),
            od,
        }
    }
}

/// Physical-parameter flags; all frequencies in MHz. Flags override the
/// preset or parameter file they are combined with.
#[derive(Args)]
struct ParamArgs {
    /// Named parameter set to start from.
    #[arg(long, value_enum)]
    preset: Option<Preset>,
    /// JSON file with a full parameter set (keys in Hz) to start from.
    #[arg(long, value_name = "FILE")]
    params_json: Option<PathBuf>,
    /// Probe Rabi frequency Ω_p/2π in MHz.
    #[arg(long)]
    omega_p_mhz: Option<f64>,
    /// Coupling Rabi frequency Ω_c/2π in MHz.
    #[arg(long)]
    omega_c_mhz: Option<f64>,
    /// Microwave Rabi frequency Ω_MW/2π in MHz.
    #[arg(long)]
    omega_mw_mhz: Option<f64>,
    /// Coupling detuning Δ_c/2π in MHz.
    #[arg(long)]
    delta_c_mhz: Option<f64>,
    /// Microwave detuning Δ_MW/2π in MHz.
    #[arg(long)]
    delta_mw_mhz: Option<f64>,
    /// Excited-state dephasing γ₂/2π in MHz (Γ = 2γ₂).
    #[arg(long)]
    gamma2_mhz: Option<f64>,
    /// Rydberg dephasing γ₃/2π in MHz.
    #[arg(long)]
    gamma3_mhz: Option<f64>,
    /// Rydberg dephasing γ₄/2π in MHz.
    #[arg(long)]
    gamma4_mhz: Option<f64>,
    /// Optical depth.
    #[arg(long)]
    od: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self) -> anyhow::Result<SystemParams> {
        let mut p = match (&self.params_json, self.preset) {
            (Some(path), _) => {
                let text = std::fs::read_to_string(path)
                    .with_context(|| format!("reading {}", path.display()))?;
                serde_json::from_str::<SystemParams>(&text)
                    .with_context(|| format!("parsing {}", path.display()))?
            }
            (None, Some(preset)) => preset.params(),
            (None, None) => SystemParams {
                omega_p: hz_to_angular(0.4e6),
                omega_c: 0.0,
                omega_mw: 0.0,
                delta_c: 0.0,
                delta_mw: 0.0,
                gamma2: hz_to_angular(3.0e6),
                gamma3: hz_to_angular(0.05e6),
                gamma4: hz_to_angular(0.05e6),
                od: 1.0,
            },
        };
        let mhz = |v: f64| hz_to_angular(v * 1e6);
        if let Some(v) = self.omega_p_mhz {
            p.omega_p = mhz(v);
        }
        if let Some(v) = self.omega_c_mhz {
            p.omega_c = mhz(v);
        }
        if let Some(v) = self.omega_mw_mhz {
            p.omega_mw = mhz(v);
        }
        if let Some(v) = self.delta_c_mhz {
            p.delta_c = mhz(v);
        }
        if let Some(v) = self.delta_mw_mhz {
            p.delta_mw = mhz(v);
        }
        if let Some(v) = self.gamma2_mhz {
            p.gamma2 = mhz(v);
        }
        if let Some(v) = self.gamma3_mhz {
            p.gamma3 = mhz(v);
        }
        if let Some(v) = self.gamma4_mhz {
            p.gamma4 = mhz(v);
        }
        if let Some(v) = self.od {
            p.od = v;
        }
        p.validate()?;
        Ok(p)
    }
}

#[derive(Args)]
struct GridArgs {
    /// Scan half-span in MHz: the grid covers center ± span.
    #[arg(long, default_value_t = 20.0)]
    span_mhz: f64,
    /// Scan center in MHz.
    #[arg(long, default_value_t = 0.0)]
    center_mhz: f64,
    /// Number of grid points.
    #[arg(long, default_value_t = 801)]
    points: usize,
}

impl GridArgs {
    fn resolve(&self) -> anyhow::Result<GridSpec> {
        Ok(GridSpec::new(
            hz_to_angular(self.center_mhz * 1e6),
            hz_to_angular(self.span_mhz * 1e6),
            self.points,
        )?)
    }
}

/// Grid flags for the sweep subcommand, where `--points` counts sweep
/// values instead.
#[derive(Args)]
struct SweepGridArgs {
    /// Scan half-span in MHz: each spectrum covers center ± span.
    #[arg(long, default_value_t = 20.0)]
    span_mhz: f64,
    /// Scan center in MHz.
    #[arg(long, default_value_t = 0.0)]
    center_mhz: f64,
    /// Number of detuning grid points per spectrum.
    #[arg(long, default_value_t = 801)]
    grid_points: usize,
}

impl SweepGridArgs {
    fn resolve(&self) -> anyhow::Result<GridSpec> {
        Ok(GridSpec::new(
            hz_to_angular(self.center_mhz * 1e6),
            hz_to_angular(self.span_mhz * 1e6),
            self.grid_points,
        )?)
    }
}

#[derive(Args)]
struct NoiseArgs {
    /// RMS of additive Gaussian transmission noise.
    #[arg(long, default_value_t = 0.0)]
    noise_rms: f64,
    /// RMS two-photon detuning jitter in kHz.
    #[arg(long, default_value_t = 0.0)]
    jitter_khz: f64,
    /// Seed for all stochastic paths.
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

impl NoiseArgs {
    fn resolve(&self) -> anyhow::Result<Option<NoiseModel>> {
        if self.noise_rms == 0.0 && self.jitter_khz == 0.0 {
            return Ok(None);
        }
        Ok(Some(NoiseModel::new(
            self.noise_rms,
            hz_to_angular(self.jitter_khz * 1e3),
            self.seed,
        )?))
    }
}

#[derive(Args)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    grid: GridArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Prominence threshold used for the dip count in the summary.
    #[arg(long, default_value_t = 0.02)]
    min_prominence: f64,
    /// Output CSV path; a `<stem>.meta.json` sidecar is written next to it.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum Pipeline {
    Local,
    Global,
    Both,
}

#[derive(Args)]
struct FitArgs {
    /// Input spectrum CSV.
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Which extraction pipeline(s) to run.
    #[arg(long, value_enum, default_value_t = Pipeline::Both)]
    pipeline: Pipeline,
    /// Output JSON path for the extraction result.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Fixed coupling detuning Δ_c/2π in MHz (read from the metadata sidecar
    /// when omitted).
    #[arg(long)]
    delta_c_mhz: Option<f64>,
    /// Fixed excited-state dephasing γ₂/2π in MHz (sidecar default).
    #[arg(long)]
    gamma2_mhz: Option<f64>,
    /// Initial guess for Ω_c/2π in MHz (sidecar default).
    #[arg(long)]
    omega_c_mhz: Option<f64>,
    /// Dip prominence threshold.
    #[arg(long, default_value_t = 0.02)]
    min_prominence: f64,
    /// Dipole moment in e·a₀ for the field conversion.
    #[arg(long, default_value_t = 1926.0)]
    dipole_ea0: f64,
}

#[derive(Clone, Copy, ValueEnum)]
enum AxisArg {
    OmegaMw,
    MwPower,
    Od,
    OmegaC,
    DeltaC,
}

#[derive(Args)]
struct SweepArgs {
    #[command(flatten)]
    params: ParamArgs,
    #[command(flatten)]
    grid: SweepGridArgs,
    #[command(flatten)]
    noise: NoiseArgs,
    /// Swept quantity.
    #[arg(long, value_enum)]
    axis: AxisArg,
    /// Sweep start for frequency axes, in MHz.
    #[arg(long)]
    from_mhz: Option<f64>,
    /// Sweep end for frequency axes, in MHz.
    #[arg(long)]
    to_mhz: Option<f64>,
    /// Sweep start for dimensionless/dBm axes.
    #[arg(long)]
    from: Option<f64>,
    /// Sweep end for dimensionless/dBm axes.
    #[arg(long)]
    to: Option<f64>,
    /// Number of sweep points.
    #[arg(long, default_value_t = 10)]
    points: usize,
    /// Calibration constant for the mw-power axis, in MHz Rabi frequency
    /// per √mW.
    #[arg(long)]
    cal_mhz_per_sqrt_mw: Option<f64>,
    /// Dip prominence threshold.
    #[arg(long, default_value_t = 0.02)]
    min_prominence: f64,
    /// Dipole moment in e·a₀ for the field conversion.
    #[arg(long, default_value_t = 1926.0)]
    dipole_ea0: f64,
    /// Worker threads for sweep points.
    #[arg(long, default_value_t = 1)]
    jobs: usize,
    /// Output JSON report path.
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    /// Optional flat CSV report path.
    #[arg(long, value_name = "FILE")]
    csv_out: Option<PathBuf>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Seed for the randomized cross-check parameter draws.
    #[arg(long, default_value_t = 7)]
    seed: u64,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Simulate(args) => cmd_simulate(args),
        Command::Fit(args) => cmd_fit(args),
        Command::Sweep(args) => cmd_sweep(args),
        Command::Classify(args) => cmd_classify(args),
        Command::Validate(args) => validate::run(args.seed),
    };
    match outcome {
        Ok(code) => code,
        Err(err) => {
            eprintln!("error: {err:#}");
            ExitCode::from(classify_error(&err))
        }
    }
}

/// Map library errors onto the documented exit codes.
fn classify_error(err: &anyhow::Error) -> u8 {
    if let Some(lib) = err.downcast_ref::<Error>() {
        match lib {
            Error::InvalidParams(_) | Error::CsvParse { .. } | Error::Json(_) => 2,
            Error::NonConvergence { .. } => 3,
            _ => 1,
        }
    } else if err.downcast_ref::<serde_json::Error>().is_some() {
        2
    } else {
        1
    }
}

fn meta_path(out: &Path) -> PathBuf {
    out.with_extension("meta.json")
}

fn cmd_simulate(args: SimulateArgs) -> anyhow::Result<ExitCode> {
    let params = args.params.resolve()?;
    let grid = args.grid.resolve()?;
    let noise = args.noise.resolve()?;
    let spectrum = synthesize(&params, &grid, noise.as_ref())?;

    let mut csv = Vec::new();
    spectrum.write_csv(&mut csv)?;
    std::fs::write(&args.out, &csv).with_context(|| format!("writing {}", args.out.display()))?;
    let meta = meta_path(&args.out);
    std::fs::write(&meta, serde_json::to_string_pretty(&spectrum.meta)?)
        .with_context(|| format!("writing {}", meta.display()))?;

    // For the summary, keep the dip threshold above the injected noise so
    // the count reflects spectral structure rather than noise wiggles.
    let summary_prominence = args.min_prominence.max(6.0 * args.noise.noise_rms);
    let dips = rydeia::fitting::find_dips(&spectrum, summary_prominence);
    let at = spectrum.argmin();
    println!(
        "wrote {} ({} points), dips: {}, min transmission {:.6} at {:.4} MHz",
        args.out.display(),
        spectrum.len(),
        dips.len(),
        spectrum.transmission()[at],
        angular_to_hz(spectrum.grid()[at]) / 1e6,
    );
    Ok(ExitCode::SUCCESS)
}

fn read_spectrum(path: &Path) -> anyhow::Result<Spectrum> {
    let file = std::fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    let meta = match std::fs::read_to_string(meta_path(path)) {
        Ok(text) => serde_json::from_str::<SpectrumMeta>(&text).unwrap_or_default(),
        Err(_) => SpectrumMeta::default(),
    };
    Ok(Spectrum::read_csv(std::io::BufReader::new(file), meta)?)
}

fn cmd_fit(args: FitArgs) -> anyhow::Result<ExitCode> {
    let spectrum = read_spectrum(&args.input)?;
    let dipole = DipoleTransition::new(args.dipole_ea0, 0.0)?;

    let run_local = matches!(args.pipeline, Pipeline::Local | Pipeline::Both);
    let run_global = matches!(args.pipeline, Pipeline::Global | Pipeline::Both);

    let delta_f_hz = if run_local {
        Some(extract_ats(&spectrum, args.min_prominence)?.delta_f_hz)
    } else {
        None
    };

    let (omega_mw_rec, delta_f_prime_hz) = if run_global {
        // Fixed parameters and the Ω_c guess come from flags, falling back
        // to the sidecar metadata.
        let meta_params = spectrum.meta.params;
        let need = |flag: Option<f64>, from_meta: Option<f64>, name: &str| -> anyhow::Result<f64> {
            flag.map(|v| hz_to_angular(v * 1e6))
                .or(from_meta)
                .ok_or_else(|| {
                    anyhow!(Error::InvalidParams(format!(
                        "global fit needs --{name} (no metadata sidecar found)"
                    )))
                })
        };
        let delta_c = need(args.delta_c_mhz, meta_params.map(|p| p.delta_c), "delta-c-mhz")?;
        let gamma2 = need(args.gamma2_mhz, meta_params.map(|p| p.gamma2), "gamma2-mhz")?;
        let omega_c = need(args.omega_c_mhz, meta_params.map(|p| p.omega_c), "omega-c-mhz")?;
        let template = SystemParams {
            omega_p: meta_params.map(|p| p.omega_p).unwrap_or(hz_to_angular(0.4e6)),
            omega_c,
            omega_mw: 0.0,
            delta_c,
            delta_mw: 0.0,
            gamma2,
            gamma3: hz_to_angular(50e3),
            gamma4: hz_to_angular(50e3),
            od: 1.0,
        };
        let initial = seed_initial(&spectrum, &template, args.min_prominence);
        let fit = fit_global(&spectrum, &initial, FixedMask::default())?;
        if !fit.converged {
            bail!(Error::NonConvergence {
                iterations: fit.iterations,
                residual_rms: fit.residual_rms,
            });
        }
        let grid = spectrum.grid();
        let scan = GridSpec::new(
            0.5 * (grid[0] + grid[grid.len() - 1]),
            0.5 * (grid[grid.len() - 1] - grid[0]),
            grid.len(),
        )?;
        let dfp = splitting_from_model(&fit.model, &scan).ok();
        (Some(fit.model.omega_mw), dfp)
    } else {
        (None, None)
    };

    let result =
        ExtractionResult::assemble(delta_f_hz, delta_f_prime_hz, omega_mw_rec, Some(&dipole))?;
    std::fs::write(&args.out, serde_json::to_string_pretty(&result)?)
        .with_context(|| format!("writing {}", args.out.display()))?;

    let show = |v: Option<f64>| {
        v.map(|x| format!("{:.6} MHz", x / 1e6))
            .unwrap_or_else(|| "-".into())
    };
    println!(
        "delta_f: {}, delta_f': {}, omega_mw: {}, wrote {}",
        show(result.delta_f_hz),
        show(result.delta_f_prime_hz),
        show(result.omega_mw_hz),
        args.out.display(),
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_sweep(args: SweepArgs) -> anyhow::Result<ExitCode> {
    let base = args.params.resolve()?;
    let grid = args.grid.resolve()?;
    let noise = args.noise.resolve()?;

    let axis = match args.axis {
        AxisArg::OmegaMw => SweepAxis::OmegaMw,
        AxisArg::Od => SweepAxis::Od,
        AxisArg::OmegaC => SweepAxis::OmegaC,
        AxisArg::DeltaC => SweepAxis::DeltaC,
        AxisArg::MwPower => {
            let cal = args.cal_mhz_per_sqrt_mw.ok_or_else(|| {
                anyhow!(Error::InvalidParams(
                    "mw-power axis needs --cal-mhz-per-sqrt-mw".into()
                ))
            })?;
            SweepAxis::MwPower {
                cal: hz_to_angular(cal * 1e6),
            }
        }
    };

    let (from, to) = match args.axis {
        AxisArg::OmegaMw | AxisArg::OmegaC | AxisArg::DeltaC => {
            let (f, t) = match (args.from_mhz, args.to_mhz) {
                (Some(f), Some(t)) => (f, t),
                _ => bail!(Error::InvalidParams(
                    "frequency axes need --from-mhz and --to-mhz".into()
                )),
            };
            (f * 1e6, t * 1e6)
        }
        AxisArg::Od | AxisArg::MwPower => match (args.from, args.to) {
            (Some(f), Some(t)) => (f, t),
            _ => bail!(Error::InvalidParams(
                "this axis needs --from and --to".into()
            )),
        },
    };
    if args.points < 1 {
        bail!(Error::InvalidParams("need at least one sweep point".into()));
    }
    let values: Vec<f64> = if args.points == 1 {
        vec![from]
    } else {
        (0..args.points)
            .map(|k| from + (to - from) * k as f64 / (args.points - 1) as f64)
            .collect()
    };

    let mut config = SweepConfig::new(grid, DipoleTransition::new(args.dipole_ea0, 0.0)?);
    config.noise = noise;
    config.master_seed = args.noise.seed;
    config.min_prominence = args.min_prominence;
    config.jobs = args.jobs;

    let report = run_sweep(axis, &values, &base, &config)?;
    std::fs::write(&args.out, report.to_json()?)
        .with_context(|| format!("writing {}", args.out.display()))?;
    if let Some(csv_path) = &args.csv_out {
        std::fs::write(csv_path, report.to_csv())
            .with_context(|| format!("writing {}", csv_path.display()))?;
    }

    let failures = report.points.iter().filter(|p| p.error.is_some()).count();
    for p in &report.points {
        let dev = p
            .result
            .and_then(|r| r.deviation_pct)
            .map(|d| format!("{d:+.3}%"))
            .unwrap_or_else(|| "-".into());
        println!("{:>14.6}  {:<9}  deviation {}", p.value, p.regime.to_string(), dev);
    }
    println!(
        "{} points ({} failed), wrote {}",
        report.points.len(),
        failures,
        args.out.display()
    );
    Ok(ExitCode::SUCCESS)
}

fn cmd_classify(args: ParamArgs) -> anyhow::Result<ExitCode> {
    let params = args.resolve()?;
    println!("{}", classify(&params));
    Ok(ExitCode::SUCCESS)
}
