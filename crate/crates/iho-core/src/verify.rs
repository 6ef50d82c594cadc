//! Verification scenarios: every check pits the production route against an
//! independent one and reports the measured discrepancy against a pinned
//! tolerance. [`run_all`] is the single entry point used by the acceptance
//! suite and the command line; check names are stable identifiers that
//! appear in report files.
//!
//! A check that errors internally reports an infinite discrepancy (and the
//! error text on stderr) rather than aborting the run, so one broken route
//! cannot hide the state of the others.

use std::time::Instant;

use num_complex::Complex64;

use crate::corpus;
use crate::error::Result;
use crate::gamow::{
    biorthonormality_deviation, evolve_packet, evolve_scaling, survival_amplitude, time_reverse,
    time_reverse_packet,
};
use crate::grid::{GridFunction1D, Representation};
use crate::oracle::{
    chi_square_blocks, mc_transport, propagator_evolve, slow_pairing, splitstep_evolve,
};
use crate::phase::{evolve_classical, time_reverse_classical, FiberPoint};
use crate::quad::packet_moment;
use crate::report::CheckReport;
use crate::reps::{transform_onto, TargetAxis, DEFAULT_MASS_FRACTION};
use crate::stat::{
    stat_biorthonormality, stat_eigen_check, stat_pairing, time_reverse_stat, PhaseDensity2D,
    StatFamily,
};
use crate::wigner::{
    dynamics_residual, mirror_residual, off_support_max, row_decay_exponent, wigner,
};

/// Working axis in the expanding representation.
const V_LO: f64 = -20.0;
const V_HI: f64 = 20.0;
const V_N: usize = 4096;

/// Position-representation axis, sized so the kernel oracle resolves the
/// chirp phase at the shortest checked time.
const Q_LO: f64 = -40.0;
const Q_HI: f64 = 40.0;
const Q_N: usize = 8192;

/// Phase-space window for the statistical scenarios. 256 nodes per side
/// keep the Monte Carlo chi-square free of resolution bias: the sampler
/// transports the initial grid's reconstruction detail, which no model
/// built from transported node values can express, and that mismatch
/// scales like samples * dx^4.
const STAT_LO: f64 = -8.0;
const STAT_HI: f64 = 8.0;
const STAT_N: usize = 256;

/// Run `body`, timing it and folding errors into an infinite discrepancy.
fn timed(name: &str, tolerance: f64, body: impl FnOnce() -> Result<f64>) -> CheckReport {
    let start = Instant::now();
    let discrepancy = match body() {
        Ok(d) => d,
        Err(e) => {
            eprintln!("check '{name}' errored: {e}");
            f64::INFINITY
        }
    };
    CheckReport::new(name, discrepancy, tolerance, start.elapsed().as_secs_f64())
}

/// Long-time decay slopes of the survival amplitude: -1/2 for a generic
/// pair, -3/2 when the prepared state's leading coefficient vanishes.
pub fn check_decay_slope() -> Vec<CheckReport> {
    let pairs = corpus::survival_pairs();
    let times: Vec<f64> = (0..=32).map(|k| 4.0 + 0.125 * k as f64).collect();
    let scenarios = [
        ("decay slope generic", &pairs[0], -0.5),
        ("decay slope odd", &pairs[1], -1.5),
    ];
    scenarios
        .iter()
        .map(|&(name, (minus, plus), target)| {
            timed(name, 1e-3, || {
                let series =
                    survival_amplitude(&minus.packet, &plus.packet, 32, &times, 1e-9)?;
                Ok((series.log_slope(4.0, 8.0)? - target).abs())
            })
        })
        .collect()
}

/// Truncated tower sums against brute-force pairing quadrature of the
/// evolved prepared state, over every corpus pair and a spread of times.
/// The prepared state broadens under evolution, but the integrand is cut
/// off by the reference state's compact support, so sampling it on the
/// fixed window loses nothing.
pub fn check_series_vs_quadrature() -> Vec<CheckReport> {
    vec![timed("survival series vs quadrature", 1e-6, || {
        let times = [0.0, 0.25, 0.5, 1.0, 2.0];
        let (x0, dx) = GridFunction1D::axis_points(V_LO, V_HI, V_N);
        let mut worst: f64 = 0.0;
        for (minus, plus) in corpus::survival_pairs() {
            let minus_grid =
                GridFunction1D::sample_packet(&minus.packet, Representation::V, x0, dx, V_N)?;
            let series = survival_amplitude(&minus.packet, &plus.packet, 32, &times, 1e-9)?;
            for (k, &t) in times.iter().enumerate() {
                let moved = evolve_packet(&plus.packet, Representation::V, t)?;
                let plus_grid = GridFunction1D::sample_fn(Representation::V, x0, dx, V_N, |x| {
                    Complex64::new(moved.eval(x), 0.0)
                })?;
                let quad = slow_pairing(&minus_grid, &plus_grid)?;
                worst = worst.max((series.amplitudes[k] - quad).norm() / quad.norm());
            }
        }
        Ok(worst)
    })]
}

/// The exact scaling evolution against the integral-kernel oracle (round
/// trip through the position representation), and the kernel against the
/// split-step integrator. Both comparisons share the kernel evolutions, so
/// they are timed together.
pub fn check_scaling_vs_kernel() -> Vec<CheckReport> {
    let start = Instant::now();
    let run = || -> Result<(f64, f64)> {
        let (vx0, vdx) = GridFunction1D::axis_points(V_LO, V_HI, V_N);
        let raw = GridFunction1D::sample_packet(
            &corpus::member("gauss-wide").unwrap().packet,
            Representation::V,
            vx0,
            vdx,
            V_N,
        )?;
        let psi_v = raw.scaled(Complex64::new(1.0 / raw.norm(), 0.0));
        let (qx0, qdx) = GridFunction1D::axis_points(Q_LO, Q_HI, Q_N);
        let psi_q = transform_onto(
            &psi_v,
            Representation::Q,
            TargetAxis::new(qx0, qdx, Q_N),
            DEFAULT_MASS_FRACTION,
        )?;
        let mut worst_scaling: f64 = 0.0;
        let mut worst_split: f64 = 0.0;
        for &t in &[0.25, 0.7, 1.5] {
            let direct = evolve_scaling(&psi_v, t)?;
            let kernel_q = propagator_evolve(&psi_q, t)?;
            // The mass-fraction guard measures image-window truncation, not
            // error in the computed values; the evolved state's Gaussian
            // tail at the window edge reaches ~1e-8 of the norm at t = 1.5.
            let kernel_v = transform_onto(
                &kernel_q,
                Representation::V,
                TargetAxis::like(&psi_v),
                1e-6,
            )?;
            worst_scaling = worst_scaling.max(direct.sup_diff(&kernel_v)?);
            let split = splitstep_evolve(&psi_q, t, 1e-3)?;
            worst_split = worst_split.max(split.sup_diff(&kernel_q)?);
        }
        Ok((worst_scaling, worst_split))
    };
    let (ws, wsplit) = match run() {
        Ok(pair) => pair,
        Err(e) => {
            eprintln!("check 'scaling evolution vs kernel' errored: {e}");
            (f64::INFINITY, f64::INFINITY)
        }
    };
    let dt = start.elapsed().as_secs_f64();
    vec![
        CheckReport::new("scaling evolution vs kernel", ws, 1e-5, dt),
        CheckReport::new("kernel vs split-step", wsplit, 1e-5, dt),
    ]
}

/// Kronecker pattern of the dual pairings: near-monomial probes against the
/// decaying tower on the quantum side, formal factorial atoms on the
/// statistical side.
pub fn check_biorthonormality() -> Vec<CheckReport> {
    vec![
        timed("biorthonormality quantum", 1e-9, || {
            biorthonormality_deviation(12)
        }),
        timed("biorthonormality statistical", 1e-12, || {
            stat_biorthonormality(8, 8)
        }),
    ]
}

/// Liouville transport against the particle-pushing Monte Carlo oracle
/// (chi-square over coarse blocks), plus exact mass conservation through
/// the analytic tensor route. Grid sums are no use for the mass gate: a
/// Riemann sum of the bump factor carries ~1e-6 quadrature error, while the
/// factorized moments are exact to rounding.
pub fn check_liouville_vs_monte_carlo() -> Vec<CheckReport> {
    const SAMPLES: usize = 100_000;
    const SEED: u64 = 42;
    const BLOCKS: usize = 12;
    let t = 0.5;
    let start = Instant::now();
    let run = || -> Result<(f64, f64, f64)> {
        let (a, b) = corpus::stat_density_factors();
        let (w0, dw) = GridFunction1D::axis_points(STAT_LO, STAT_HI, STAT_N);
        let rho = PhaseDensity2D::from_tensor(&a, &b, w0, dw, STAT_N, w0, dw, STAT_N)?;
        let moved = crate::stat::evolve_liouville(&rho, t)?;
        let hist = mc_transport(&rho, t, SAMPLES, SEED)?;
        let (x2, dof) = chi_square_blocks(&hist, &moved, SAMPLES, BLOCKS)?;
        let (at, bt) = moved
            .tensor
            .as_ref()
            .expect("tensor transport preserves the factorization");
        let mass0 = packet_moment(&a, 0) * packet_moment(&b, 0);
        let mass_t = packet_moment(at, 0) * packet_moment(bt, 0);
        Ok((
            (x2 - dof as f64).abs(),
            3.0 * (2.0 * dof as f64).sqrt(),
            (mass_t / mass0 - 1.0).abs(),
        ))
    };
    let (chi_dev, chi_tol, mass_dev) = match run() {
        Ok(triple) => triple,
        Err(e) => {
            eprintln!("check 'liouville vs monte carlo' errored: {e}");
            (f64::INFINITY, 1.0, f64::INFINITY)
        }
    };
    let dt = start.elapsed().as_secs_f64();
    vec![
        CheckReport::new("liouville vs monte carlo", chi_dev, chi_tol, dt),
        CheckReport::new("liouville mass conservation", mass_dev, 1e-10, dt),
    ]
}

/// Fitted pairing growth rates of the mixed towers against the prescribed
/// eigenvalue rates +-(m+n+1), for all orders up to 2 on both sides.
pub fn check_stat_rates() -> Vec<CheckReport> {
    vec![timed("stat eigen rates", 1e-4, || {
        let (a, b) = corpus::stat_density_factors();
        let n_grid = 128;
        let (w0, dw) = GridFunction1D::axis_points(STAT_LO, STAT_HI, n_grid);
        let rho = PhaseDensity2D::from_tensor(&a, &b, w0, dw, n_grid, w0, dw, n_grid)?;
        let mut worst: f64 = 0.0;
        for n in 0..3 {
            for m in 0..3 {
                for f in [
                    StatFamily::DeltaVPolyU { n, m },
                    StatFamily::DeltaUPolyV { n, m },
                ] {
                    worst = worst.max(stat_eigen_check(f, &rho, 0.6, 12, 1e-4).discrepancy);
                }
            }
        }
        Ok(worst)
    })]
}

/// The phase-space bridge for a compact-support state: support confinement
/// of the field, dual-direction decay, the mirrored field of the reversed
/// state, and the commuting square of the two evolutions.
///
/// The dual-direction decay is graded on the far band u in [20, 80], where
/// the asymptotic power law has set in; the near band [5, 20] still shows
/// the pre-asymptotic envelope (exponent ~3.7), so it is checked for
/// steepening rather than against the asymptotic bound.
///
/// The commuting square is driven in each state's controlled direction:
/// positive times for the expanding-representation state, negative for the
/// reversed one. Against those directions the flow stretches the dual
/// coordinate, carrying a measured ~1.4% of the |W| integral across the
/// window edge by |t| = 2 (edge-adjacent rows of a compact-support state
/// spread widest in the dual direction), and the transport correctly
/// refuses to drop it.
pub fn check_wigner_bridge() -> Vec<CheckReport> {
    let start = Instant::now();
    struct Bridge {
        support: f64,
        decay: f64,
        steepen: f64,
        mirror: f64,
        square: f64,
    }
    let run = || -> Result<Bridge> {
        let p = corpus::member("bump-offset").unwrap().packet;
        let n = 2048;
        let (x0, dx) = GridFunction1D::axis_points(V_LO, V_HI, n);
        let raw = GridFunction1D::sample_packet(&p, Representation::V, x0, dx, n)?;
        let f = raw.scaled(Complex64::new(1.0 / raw.norm(), 0.0));
        let w = wigner(&f)?;
        let peak = w.max_abs();
        let (lo, hi) = p.effective_support();
        let support = off_support_max(&w, lo - dx, hi + dx) / peak;
        let inner = row_decay_exponent(&w, 0.4, 5.0, 20.0)?;
        let outer = row_decay_exponent(&w, 0.4, 20.0, 80.0)?;
        let rev = time_reverse(&f)?;
        let w_rev = wigner(&rev)?;
        let mirror = mirror_residual(&w, &w_rev)? / peak;
        let mut square: f64 = 0.0;
        for &t in &[0.5, 2.0] {
            square = square.max(dynamics_residual(&f, t)?);
        }
        for &t in &[-0.5, -2.0] {
            square = square.max(dynamics_residual(&rev, t)?);
        }
        Ok(Bridge {
            support,
            decay: 5.0 - outer,
            steepen: (inner + 1.0) - outer,
            mirror,
            square,
        })
    };
    let b = match run() {
        Ok(b) => b,
        Err(e) => {
            eprintln!("check 'wigner bridge' errored: {e}");
            Bridge {
                support: f64::INFINITY,
                decay: f64::INFINITY,
                steepen: f64::INFINITY,
                mirror: f64::INFINITY,
                square: f64::INFINITY,
            }
        }
    };
    let dt = start.elapsed().as_secs_f64();
    vec![
        CheckReport::new("wigner support", b.support, 1e-12, dt),
        CheckReport::new("wigner u-decay", b.decay, 0.0, dt),
        CheckReport::new("wigner u-decay steepening", b.steepen, 0.0, dt),
        CheckReport::new("wigner mirror", b.mirror, 1e-12, dt),
        CheckReport::new("wigner commuting square", b.square, 1e-6, dt),
    ]
}

/// Time reversal on all three levels.
///
/// * Quantum: for every corpus member the reversed grid lands in the other
///   representation and equals the phase times the reflected family member,
///   and reversing twice is the identity.
/// * Statistical: reversal pairs the growing mixed tower against the
///   decaying one with the parity sign, (T rho, DeltaVPolyU{n,m}) =
///   (-1)^(n+m) (rho, DeltaUPolyV{m,n}); reversing twice is exact.
/// * Classical: conjugating the flow, evolve(T x, t) = T evolve(x, -t),
///   holds to the bit, so the gate is exact zero.
pub fn check_time_reversal() -> Vec<CheckReport> {
    let quantum = timed("time reversal quantum", 1e-12, || {
        let (x0, dx) = GridFunction1D::axis_points(V_LO, V_HI, V_N);
        let mut worst: f64 = 0.0;
        for entry in corpus::members() {
            let f =
                GridFunction1D::sample_packet(&entry.packet, Representation::V, x0, dx, V_N)?;
            let reversed = time_reverse(&f)?;
            if reversed.rep != Representation::U {
                return Ok(f64::INFINITY);
            }
            let (phase, rp) = time_reverse_packet(&entry.packet);
            let expected =
                GridFunction1D::sample_fn(Representation::U, reversed.x0, reversed.dx, V_N, |x| {
                    phase * rp.eval(x)
                })?;
            worst = worst.max(reversed.sup_diff(&expected)? / f.max_abs());
            let back = time_reverse(&reversed)?;
            if back.rep != Representation::V {
                return Ok(f64::INFINITY);
            }
            worst = worst.max(back.sup_diff(&f)? / f.max_abs());
        }
        Ok(worst)
    });

    let statistical = timed("time reversal statistical", 1e-12, || {
        let (a, b) = corpus::stat_density_factors();
        let n_grid = 128;
        let (w0, dw) = GridFunction1D::axis_points(STAT_LO, STAT_HI, n_grid);
        let rho = PhaseDensity2D::from_tensor(&a, &b, w0, dw, n_grid, w0, dw, n_grid)?;
        let rev = time_reverse_stat(&rho);
        let mut worst: f64 = 0.0;
        for n in 0..3 {
            for m in 0..3 {
                let lhs = stat_pairing(StatFamily::DeltaVPolyU { n, m }, &rev)?;
                let rhs = stat_pairing(StatFamily::DeltaUPolyV { n: m, m: n }, &rho)?;
                let sign = if (n + m) % 2 == 0 { 1.0 } else { -1.0 };
                worst = worst.max((lhs - sign * rhs).norm() / rhs.norm());
            }
        }
        let twice = time_reverse_stat(&rev);
        for (x, y) in twice.values.iter().zip(&rho.values) {
            worst = worst.max((x - y).norm());
        }
        Ok(worst)
    });

    let classical = timed("time reversal classical", 0.0, || {
        let coords = [-3.0, -1.5, 0.0, 1.5, 3.0];
        let mut worst: f64 = 0.0;
        for &v in &coords {
            for &u in &coords {
                let x = FiberPoint::new(v, u);
                for &t in &[0.35, 1.2, 2.0] {
                    let lhs = evolve_classical(time_reverse_classical(x), t)?;
                    let rhs = time_reverse_classical(evolve_classical(x, -t)?);
                    worst = worst.max((lhs.v - rhs.v).abs()).max((lhs.u - rhs.u).abs());
                }
            }
        }
        Ok(worst)
    });

    vec![quantum, statistical, classical]
}

/// Every check in criteria order.
pub fn run_all() -> Vec<CheckReport> {
    let mut reports = Vec::new();
    reports.extend(check_decay_slope());
    reports.extend(check_series_vs_quadrature());
    reports.extend(check_scaling_vs_kernel());
    reports.extend(check_biorthonormality());
    reports.extend(check_liouville_vs_monte_carlo());
    reports.extend(check_stat_rates());
    reports.extend(check_wigner_bridge());
    reports.extend(check_time_reversal());
    reports
}
