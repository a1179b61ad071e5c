//! Shared test oracles and deterministic parameter samplers.
//!
//! Everything here must stay independent of the library's evaluation paths:
//! the companion-matrix eigensolver below finds the response poles through
//! complex QR iteration, sharing nothing with the crate's Cardano solver.

#![allow(dead_code)]

use nalgebra::SMatrix;
use num_complex::Complex64;

use rydeia::params::hz_to_angular;
use rydeia::rng::SplitMix64;
use rydeia::SystemParams;

type M3 = SMatrix<Complex64, 3, 3>;

pub fn mhz(v: f64) -> f64 {
    hz_to_angular(v * 1e6)
}

pub fn khz(v: f64) -> f64 {
    hz_to_angular(v * 1e3)
}

/// Eigenvalues of the 2×2 complex matrix [[a, b], [c, d]], cancellation-safe.
fn eig2(a: Complex64, b: Complex64, c: Complex64, d: Complex64) -> (Complex64, Complex64) {
    let tr = a + d;
    let det = a * d - b * c;
    let disc = (tr * tr - 4.0 * det).sqrt();
    let big = if (tr + disc).norm() >= (tr - disc).norm() {
        tr + disc
    } else {
        tr - disc
    };
    let l1 = 0.5 * big;
    let l2 = if l1.norm() > 0.0 { det / l1 } else { 0.5 * (tr - disc) };
    (l1, l2)
}

/// Eigenvalues of the companion matrix of x³ + c₂x² + c₁x + c₀ by shifted
/// complex QR iteration with bottom deflation. Independent oracle for the
/// cubic pole solver.
///
/// The polynomial is rescaled (x = s·y with s the coefficient-implied root
/// magnitude) so the companion matrix is balanced before iterating;
/// raw angular-frequency coefficients span ~17 orders of magnitude and would
/// cost the eigenvalues half their digits otherwise.
pub fn companion_eigenvalues(c2: Complex64, c1: Complex64, c0: Complex64) -> [Complex64; 3] {
    let s = c2
        .norm()
        .max(c1.norm().sqrt())
        .max(c0.norm().cbrt())
        .max(f64::MIN_POSITIVE);
    let (c2, c1, c0) = (c2 / s, c1 / (s * s), c0 / (s * s * s));

    let one = Complex64::new(1.0, 0.0);
    let mut a = M3::zeros();
    a[(1, 0)] = one;
    a[(2, 1)] = one;
    a[(0, 2)] = -c0;
    a[(1, 2)] = -c1;
    a[(2, 2)] = -c2;

    let mut eigs: Vec<Complex64> = Vec::new();
    let eps = 1e-15;
    let mut iters = 0;
    loop {
        iters += 1;
        assert!(iters < 500, "QR iteration did not converge");

        if a[(2, 1)].norm() <= eps * (a[(1, 1)].norm() + a[(2, 2)].norm()) {
            // Bottom 1x1 deflates; finish with the leading 2x2.
            eigs.push(a[(2, 2)]);
            let (l1, l2) = eig2(a[(0, 0)], a[(0, 1)], a[(1, 0)], a[(1, 1)]);
            eigs.push(l1);
            eigs.push(l2);
            break;
        }
        if a[(1, 0)].norm() <= eps * (a[(0, 0)].norm() + a[(1, 1)].norm()) {
            // Leading 1x1 splits off; finish with the trailing 2x2.
            eigs.push(a[(0, 0)]);
            let (l1, l2) = eig2(a[(1, 1)], a[(1, 2)], a[(2, 1)], a[(2, 2)]);
            eigs.push(l1);
            eigs.push(l2);
            break;
        }

        // Wilkinson shift: trailing-2x2 eigenvalue nearest the corner.
        let (l1, l2) = eig2(a[(1, 1)], a[(1, 2)], a[(2, 1)], a[(2, 2)]);
        let mu = if (l1 - a[(2, 2)]).norm() <= (l2 - a[(2, 2)]).norm() {
            l1
        } else {
            l2
        };

        for k in 0..3 {
            a[(k, k)] -= mu;
        }
        // Hessenberg QR step with two complex Givens rotations.
        let mut rots = [(one, Complex64::new(0.0, 0.0)); 2];
        for (k, rot) in rots.iter_mut().enumerate() {
            let f = a[(k, k)];
            let g = a[(k + 1, k)];
            let r = (f.norm_sqr() + g.norm_sqr()).sqrt();
            if r == 0.0 {
                continue;
            }
            let c = f / r;
            let s = g / r;
            for col in 0..3 {
                let x = a[(k, col)];
                let y = a[(k + 1, col)];
                a[(k, col)] = c.conj() * x + s.conj() * y;
                a[(k + 1, col)] = -s * x + c * y;
            }
            *rot = (c, s);
        }
        for (k, (c, s)) in rots.iter().enumerate() {
            for row in 0..3 {
                let x = a[(row, k)];
                let y = a[(row, k + 1)];
                a[(row, k)] = x * c + y * s;
                a[(row, k + 1)] = -x * s.conj() + y * c.conj();
            }
        }
        for k in 0..3 {
            a[(k, k)] += mu;
        }
    }

    let mut out = [eigs[0] * s, eigs[1] * s, eigs[2] * s];
    out.sort_by(|a, b| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im)));
    out
}

/// Largest distance between matched elements of two three-element sets,
/// minimized over all pairings.
pub fn set_distance(a: &[Complex64; 3], b: &[Complex64; 3]) -> f64 {
    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    PERMS
        .iter()
        .map(|perm| {
            (0..3)
                .map(|i| (a[i] - b[perm[i]]).norm())
                .fold(0.0, f64::max)
        })
        .fold(f64::INFINITY, f64::min)
}

/// Wide randomized parameter set: rates and Rabi frequencies log-uniform in
/// [2π×10 kHz, 2π×50 MHz], detunings uniform in ±2π×200 MHz.
pub fn draw_wide(rng: &mut SplitMix64) -> SystemParams {
    let lo = khz(10.0);
    let hi = mhz(50.0);
    SystemParams {
        omega_p: rng.next_log_uniform(lo, hi),
        omega_c: rng.next_log_uniform(lo, hi),
        omega_mw: rng.next_log_uniform(lo, hi),
        delta_c: rng.next_in_range(-mhz(200.0), mhz(200.0)),
        delta_mw: rng.next_in_range(-mhz(200.0), mhz(200.0)),
        gamma2: rng.next_log_uniform(lo, hi),
        gamma3: rng.next_log_uniform(lo, hi),
        gamma4: rng.next_log_uniform(lo, hi),
        od: rng.next_in_range(1.0, 100.0),
    }
}

/// Randomized parameter set inside the weak-probe validity regime: ordinary
/// excited-state widths, Rydberg dephasings well below them, couplings far
/// above the probe so ground-state depletion stays quadratic and small.
pub fn draw_weak_probe_regime(rng: &mut SplitMix64) -> SystemParams {
    SystemParams {
        omega_p: 0.0, // callers set Ω_p relative to Γ
        omega_c: rng.next_log_uniform(mhz(1.0), mhz(20.0)),
        omega_mw: rng.next_log_uniform(mhz(0.2), mhz(20.0)),
        delta_c: rng.next_in_range(-mhz(50.0), mhz(50.0)),
        delta_mw: rng.next_in_range(-mhz(5.0), mhz(5.0)),
        gamma2: rng.next_log_uniform(mhz(1.0), mhz(6.0)),
        gamma3: rng.next_log_uniform(khz(20.0), mhz(1.0)),
        gamma4: rng.next_log_uniform(khz(20.0), mhz(1.0)),
        od: rng.next_in_range(1.0, 100.0),
    }
}

/// Randomized EIA-regime parameter set (far-detuned coupling, split dips).
pub fn draw_eia_regime(rng: &mut SplitMix64) -> SystemParams {
    SystemParams {
        omega_p: mhz(0.4),
        omega_c: rng.next_in_range(mhz(4.0), mhz(8.0)),
        omega_mw: rng.next_in_range(mhz(3.0), mhz(8.0)),
        delta_c: rng.next_in_range(mhz(90.0), mhz(150.0)),
        delta_mw: rng.next_in_range(khz(50.0), khz(200.0))
            * if rng.next_f64() < 0.5 { -1.0 } else { 1.0 },
        gamma2: mhz(3.0),
        gamma3: rng.next_in_range(khz(20.0), khz(100.0)),
        gamma4: rng.next_in_range(khz(20.0), khz(100.0)),
        od: rng.next_in_range(50.0, 140.0),
    }
}
