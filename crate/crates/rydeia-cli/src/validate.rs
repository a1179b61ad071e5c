//! Built-in numerical cross-checks behind `rydeia validate`.
//!
//! Each check compares two independent routes to the same quantity (direct
//! closed form vs. pole decomposition, analytic weak-probe coherence vs.
//! Lindblad steady state, formulas vs. pinned reference values) on
//! deterministic randomized parameter sets. One pass/fail line per check;
//! nonzero exit if anything fails.

use std::process::ExitCode;

use rydeia::lindblad::{steady_state, GammaSplit};
use rydeia::params::{field_from_splitting, hz_to_angular, SystemParams};
use rydeia::rng::SplitMix64;
use rydeia::spectrum::transmit;
use rydeia::susceptibility::{rho21, PoleDecomposition};

fn mhz(v: f64) -> f64 {
    hz_to_angular(v * 1e6)
}

/// Random parameter set in the regime where the weak-probe analytics are
/// valid: ordinary excited-state widths, sub-MHz Rydberg dephasings, and
/// couplings well above the probe.
fn draw_params(rng: &mut SplitMix64) -> SystemParams {
    SystemParams {
        omega_p: 0.0, // set per check
        omega_c: rng.next_log_uniform(mhz(1.0), mhz(20.0)),
        omega_mw: rng.next_log_uniform(mhz(0.2), mhz(20.0)),
        delta_c: rng.next_in_range(-mhz(50.0), mhz(50.0)),
        delta_mw: rng.next_in_range(-mhz(5.0), mhz(5.0)),
        gamma2: rng.next_log_uniform(mhz(1.0), mhz(10.0)),
        gamma3: rng.next_log_uniform(mhz(0.02), mhz(1.0)),
        gamma4: rng.next_log_uniform(mhz(0.02), mhz(1.0)),
        od: rng.next_in_range(0.5, 120.0),
    }
}

struct Summary {
    failures: usize,
}

impl Summary {
    fn check(&mut self, name: &str, worst: f64, tolerance: f64) {
        let ok = worst <= tolerance;
        if !ok {
            self.failures += 1;
        }
        println!(
            "{}  {name}: worst {worst:.3e} (tolerance {tolerance:.1e})",
            if ok { "ok  " } else { "FAIL" },
        );
    }
}

pub fn run(seed: u64) -> anyhow::Result<ExitCode> {
    let mut rng = SplitMix64::new(seed);
    let mut summary = Summary { failures: 0 };

    // Partial-fraction sum against the direct closed form, and residue sums.
    let mut worst_pf = 0.0f64;
    let mut worst_sum = 0.0f64;
    let mut worst_pole_im = 0.0f64;
    for _ in 0..20 {
        let p = draw_params(&mut rng).with_omega_p(mhz(0.4));
        let dec = PoleDecomposition::solve(&p).expect("random poles distinct");
        worst_sum = worst_sum.max((dec.residue_sum() - 1.0).norm());
        for pole in dec.poles {
            worst_pole_im = worst_pole_im.max(-pole.im);
        }
        for k in 0..201 {
            let delta = -mhz(20.0) + mhz(0.2) * k as f64;
            let direct = rho21(&p, delta).unwrap();
            let via = dec.rho21(p.omega_p, delta);
            worst_pf = worst_pf.max((direct - via).norm() / direct.norm());
        }
    }
    summary.check("pole decomposition vs direct form (20 sets x 201 pts)", worst_pf, 1e-9);
    summary.check("residue sums S1+S2+S3 = 1", worst_sum, 1e-9);
    summary.check("poles decay upward (negative Im excess)", worst_pole_im, 0.0);

    // Analytic weak-probe coherence against the Lindblad steady state.
    let mut worst_oracle = 0.0f64;
    for _ in 0..5 {
        let mut p = draw_params(&mut rng);
        p.omega_p = 1e-3 * p.gamma_bare();
        for k in 0..11 {
            let delta = -mhz(20.0) + mhz(4.0) * k as f64;
            let full = steady_state(&p, &GammaSplit::all_dephasing(), delta)
                .expect("steady state exists");
            let analytic = rho21(&p, delta).unwrap();
            let rel = (full.probe_coherence() - analytic).norm() / analytic.norm();
            worst_oracle = worst_oracle.max(rel);
        }
    }
    summary.check(
        "Lindblad steady state vs closed form at weak probe (5 sets x 11 pts)",
        worst_oracle,
        1e-3,
    );

    // Dephasing-split independence of the weak-probe coherence.
    let mut worst_split = 0.0f64;
    for _ in 0..3 {
        let mut p = draw_params(&mut rng);
        p.omega_p = 1e-5 * p.gamma_bare();
        let delta = mhz(1.3);
        let a = steady_state(&p, &GammaSplit::all_dephasing(), delta).unwrap();
        let routed = GammaSplit {
            gamma3_spontaneous: p.gamma3,
            gamma4_spontaneous: p.gamma4,
        };
        let b = steady_state(&p, &routed, delta).unwrap();
        worst_split = worst_split
            .max((a.probe_coherence() - b.probe_coherence()).norm() / a.probe_coherence().norm());
    }
    summary.check("weak-probe coherence independent of decay/dephasing split", worst_split, 1e-9);

    // Two-level anchor: resonant transmission is exactly exp(-OD).
    let two_level = SystemParams {
        omega_p: mhz(0.4),
        omega_c: 0.0,
        omega_mw: 0.0,
        delta_c: mhz(2.0),
        delta_mw: mhz(-1.0),
        gamma2: mhz(3.0),
        gamma3: mhz(0.05),
        gamma4: mhz(0.07),
        od: 3.7,
    };
    let t = transmit(&two_level, two_level.delta_c).unwrap();
    summary.check(
        "two-level resonant transmission = exp(-OD)",
        (t - (-two_level.od).exp()).abs() / (-two_level.od).exp(),
        1e-10,
    );

    // Mirror symmetry for a symmetric configuration.
    let sym = SystemParams {
        omega_p: mhz(0.4),
        omega_c: mhz(4.0),
        omega_mw: mhz(5.0),
        delta_c: 0.0,
        delta_mw: 0.0,
        gamma2: mhz(3.0),
        gamma3: mhz(0.05),
        gamma4: mhz(0.05),
        od: 2.0,
    };
    let mut worst_mirror = 0.0f64;
    for k in 1..=100 {
        let delta = mhz(0.2) * k as f64;
        let plus = transmit(&sym, delta).unwrap();
        let minus = transmit(&sym, -delta).unwrap();
        worst_mirror = worst_mirror.max((plus - minus).abs() / plus.max(minus));
    }
    summary.check("mirror symmetry of symmetric spectra", worst_mirror, 1e-10);

    // SI field conversion reference point.
    let field = field_from_splitting(250e3, 1926.0)?;
    summary.check(
        "field conversion 250 kHz @ 1926 e*a0 -> 101.4 uV/cm",
        (field - 1.014e-2).abs() / 1.014e-2,
        2e-3,
    );

    if summary.failures == 0 {
        println!("all checks passed");
        Ok(ExitCode::SUCCESS)
    } else {
        println!("{} check(s) failed", summary.failures);
        Ok(ExitCode::FAILURE)
    }
}
