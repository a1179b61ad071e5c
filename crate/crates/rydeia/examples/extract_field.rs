//! Synthesize an EIA spectrum, run both extraction pipelines, and convert
//! the splitting into an SI-traceable field value.
//!
//! Run with: cargo run --example extract_field

use rydeia::fitting::{extract_ats, fit_global, seed_initial, splitting_from_model, FixedMask};
use rydeia::params::{angular_to_hz, hz_to_angular, DipoleTransition};
use rydeia::spectrum::{synthesize, GridSpec};
use rydeia::sweeps::classify;
use rydeia::{NoiseModel, SystemParams};

fn main() -> rydeia::Result<()> {
    let mhz = |v: f64| hz_to_angular(v * 1e6);

    // Far-detuned coupling, 5 MHz microwave dressing, optically thick cloud.
    let truth = SystemParams::new(
        mhz(0.4),   // probe Rabi frequency
        mhz(6.0),   // coupling Rabi frequency
        mhz(5.0),   // microwave Rabi frequency
        mhz(100.0), // coupling detuning
        0.0,        // microwave detuning
        mhz(3.0),   // excited-state dephasing (Γ/2)
        mhz(0.05),  // Rydberg dephasings
        mhz(0.05),
        100.0, // optical depth
    )?;
    println!("regime: {}", classify(&truth));

    let grid = GridSpec::default_scan();
    let noise = NoiseModel::new(0.005, hz_to_angular(30e3), 7)?;
    let spectrum = synthesize(&truth, &grid, Some(&noise))?;

    // Local pipeline: Lorentzian dip fits.
    let ats = extract_ats(&spectrum, 0.05)?;
    println!("local  Δf  = {:.4} MHz", ats.delta_f_hz / 1e6);

    // Global pipeline: whole-spectrum model fit.
    let initial = seed_initial(&spectrum, &truth.with_omega_c(1.1 * truth.omega_c), 0.05);
    let fit = fit_global(&spectrum, &initial, FixedMask::default())?;
    let delta_f_prime = splitting_from_model(&fit.model, &grid)?;
    println!("global Δf' = {:.4} MHz", delta_f_prime / 1e6);
    println!(
        "global Ω_MW/2π = {:.4} MHz (truth {:.4} MHz)",
        angular_to_hz(fit.model.omega_mw) / 1e6,
        angular_to_hz(truth.omega_mw) / 1e6
    );

    // SI-traceable field from the local splitting.
    let transition = DipoleTransition::rb87_39d52_40p32();
    let field = transition.field_from_splitting(ats.delta_f_hz)?;
    println!("|E| = {:.3} µV/cm", field * 1e4);
    Ok(())
}
