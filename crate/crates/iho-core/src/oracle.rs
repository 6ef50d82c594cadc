//! Brute-force reference routes used only for cross-checking.
//!
//! Every function here recomputes a quantity that the main machinery obtains
//! by a structurally different method: the exact propagator kernel is summed
//! directly at O(n^2) cost, a split-step integrator discretizes the
//! Schroedinger equation itself, pairings use a hand-rolled end-corrected
//! trapezoid instead of the quad module, Taylor coefficients come from a
//! Cauchy circle instead of the derivative recurrences, and Liouville
//! transport is re-enacted by pushing sampled particles through the classical
//! flow one by one. None of these routes call into the modules they check.
//!
//! The oracles are deliberately conservative: they accept |t| <= 2 only, they
//! refuse states that touch the grid boundary, and they refuse grids that
//! undersample the kernel oscillation, surfacing typed errors instead of
//! silently wrong numbers.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::grid::{GridFunction1D, Representation};
use crate::packet::{AnalyticPacket, PacketFamily};
use crate::phase::{evolve_classical, FiberPoint};
use crate::stat::PhaseDensity2D;

/// Largest |t| any oracle accepts; beyond this the hyperbolic stretch pushes
/// realistic states into the grid boundary and every route degrades at once.
pub const MAX_ORACLE_TIME: f64 = 2.0;

/// Below this |t| the kernel prefactor (2 pi i sinh t)^(-1/2) is effectively
/// singular on any fixed grid; callers should use t = 0 (identity) instead.
pub const SINGULAR_TIME: f64 = 1e-6;

/// Fraction of the L2 mass allowed in the outer 32-sample bands. A clean
/// evolution of a state that lives inside the window leaves ~1e-20 there;
/// escaping or wrapped-around mass shows up at the 1e-2 level.
pub const EDGE_MASS_FRACTION: f64 = 1e-8;

fn check_time(t: f64) -> Result<()> {
    if !t.is_finite() || t.abs() > MAX_ORACLE_TIME {
        return Err(Error::Domain(format!(
            "oracle evolution restricted to |t| <= {MAX_ORACLE_TIME}, got {t}"
        )));
    }
    Ok(())
}

/// L2 fraction sitting in the outermost 32 samples on each side.
fn edge_mass_fraction(f: &GridFunction1D) -> f64 {
    let n = f.n();
    let band = 32.min(n / 8).max(1);
    let total: f64 = f.values.iter().map(|z| z.norm_sqr()).sum();
    if total == 0.0 {
        return 0.0;
    }
    let edge: f64 = f.values[..band]
        .iter()
        .chain(&f.values[n - band..])
        .map(|z| z.norm_sqr())
        .sum();
    edge / total
}

fn require_interior(f: &GridFunction1D, stage: &str) -> Result<()> {
    let frac = edge_mass_fraction(f);
    if frac > EDGE_MASS_FRACTION {
        return Err(Error::MassLeak(format!(
            "{stage}: fraction {frac:.3e} of the state sits in the boundary band \
             (limit {EDGE_MASS_FRACTION:.0e})"
        )));
    }
    Ok(())
}

/// Evolve a position-representation state with the exact kernel
///
///   K(q, q'; t) = (2 pi i sinh t)^(-1/2)
///                 exp( i [ (q^2 + q'^2) cosh t  -  2 q q' ] / (2 sinh t) )
///
/// by direct trapezoid summation over the input grid. Writing the phase as
/// a (q^2 + q'^2) - b q q' with a = cosh t / (2 sinh t), b = 1 / sinh t, the
/// inner sum over q' is a chirp-weighted exponential sum; the unit-modulus
/// factor exp(-i b q dq') advances by a running multiply, so the O(n^2) loop
/// contains no transcendental calls. The accumulated phase drift of the
/// recurrence is n*eps ~ 1e-12 rad, far below the 1e-6 gates downstream.
///
/// Errors: `Rep` off the Q representation, `Domain` for |t| > 2,
/// `SingularTime` for 0 < |t| < 1e-6, `MassLeak` when the input touches the
/// boundary band or when the output norm drops (mass left the window), and
/// `Alias` when the grid undersamples the kernel oscillation over the
/// region where the state actually lives.
pub fn propagator_evolve(psi: &GridFunction1D, t: f64) -> Result<GridFunction1D> {
    if psi.rep != Representation::Q {
        return Err(Error::Rep(format!(
            "propagator oracle works in the Q representation, got {}",
            psi.rep.label()
        )));
    }
    check_time(t)?;
    if t == 0.0 {
        return Ok(psi.clone());
    }
    if t.abs() < SINGULAR_TIME {
        return Err(Error::SingularTime(format!(
            "kernel prefactor diverges like |sinh t|^(-1/2) as t -> 0; got t = {t:e}"
        )));
    }
    require_interior(psi, "propagator input")?;

    let n = psi.n();
    let dx = psi.dx;
    let s = t.sinh();
    let c = t.cosh();
    let a = c / (2.0 * s);
    let b = 1.0 / s;

    // Sampling check: along q' the integrand phase has slope 2a q' - b q,
    // largest where the state still has support and q sits at the far edge.
    let peak = psi.max_abs();
    let q_sup = psi
        .values
        .iter()
        .enumerate()
        .filter(|(_, z)| z.norm() > 1e-14 * peak)
        .map(|(k, _)| psi.x(k).abs())
        .fold(0.0, f64::max);
    let q_edge = psi.x0.abs().max(psi.x_end().abs());
    let slope = (c / s.abs()) * q_sup + b.abs() * q_edge;
    if slope * dx > std::f64::consts::PI {
        return Err(Error::Alias(format!(
            "kernel oscillates at {slope:.1} rad per unit but the grid resolves only \
             {:.1}; refine the grid or shorten the step",
            std::f64::consts::PI / dx
        )));
    }

    // (2 pi i sinh t)^(-1/2) with the branch that recovers the free
    // propagator (2 pi i t)^(-1/2) as t -> 0+.
    let prefactor = Complex64::from_polar(
        1.0 / (2.0 * std::f64::consts::PI * s.abs()).sqrt(),
        -s.signum() * std::f64::consts::FRAC_PI_4,
    );

    // Chirped, trapezoid-weighted source samples.
    let weights: Vec<Complex64> = psi
        .values
        .iter()
        .enumerate()
        .map(|(j, &z)| {
            let q = psi.x(j);
            let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            z * Complex64::from_polar(w * dx, a * q * q)
        })
        .collect();

    let mut out = Vec::with_capacity(n);
    for k in 0..n {
        let qk = psi.x(k);
        let step = Complex64::from_polar(1.0, -b * qk * dx);
        let mut phase = Complex64::from_polar(1.0, -b * qk * psi.x0);
        let mut acc = Complex64::new(0.0, 0.0);
        for w in &weights {
            acc += w * phase;
            phase *= step;
        }
        out.push(prefactor * Complex64::from_polar(1.0, a * qk * qk) * acc);
    }

    let result = GridFunction1D::new(Representation::Q, psi.x0, dx, out)?;
    // The exact kernel is unitary; on a finite window any norm deficit is
    // mass that crossed the boundary.
    let n_in = psi.norm();
    let n_out = result.norm();
    if n_in > 0.0 && (n_out - n_in).abs() > 1e-6 * n_in {
        return Err(Error::MassLeak(format!(
            "propagation changed the norm from {n_in:.12e} to {n_out:.12e}; \
             mass crossed the window boundary"
        )));
    }
    Ok(result)
}

/// Evolve a position-representation state by Strang-split steps
///
///   exp(-i V dt/2) . F^-1 exp(-i k^2 dt/2) F . exp(-i V dt/2),
///
/// with V(q) = -q^2/2 on the periodic extension of the grid. The step count
/// is ceil(|t| / dt) with the step stretched to land exactly on t, so dt is
/// an upper bound on the actual step. Second-order accurate in the step;
/// dt <= 1e-3 keeps the splitting error below the 1e-5 comparison gates for
/// |t| <= 2.
///
/// Errors: `Rep`, `Domain`, `Invalid` for dt outside (0, 1e-3], `MassLeak`
/// when the input or the output loads the boundary band (wrap-around).
pub fn splitstep_evolve(psi: &GridFunction1D, t: f64, dt: f64) -> Result<GridFunction1D> {
    if psi.rep != Representation::Q {
        return Err(Error::Rep(format!(
            "split-step oracle works in the Q representation, got {}",
            psi.rep.label()
        )));
    }
    check_time(t)?;
    if !(dt > 0.0 && dt <= 1e-3) {
        return Err(Error::Invalid(format!(
            "split-step requires 0 < dt <= 1e-3, got {dt:e}"
        )));
    }
    if t == 0.0 {
        return Ok(psi.clone());
    }
    require_interior(psi, "split-step input")?;

    let n = psi.n();
    let dx = psi.dx;
    let steps = (t.abs() / dt).ceil() as usize;
    let dt_eff = t / steps as f64;

    // exp(-i V dt/2) with V = -q^2/2 is exp(+i q^2 dt/4).
    let half_potential: Vec<Complex64> = (0..n)
        .map(|k| {
            let q = psi.x(k);
            Complex64::from_polar(1.0, 0.25 * q * q * dt_eff)
        })
        .collect();
    let dk = 2.0 * std::f64::consts::PI / (n as f64 * dx);
    let kinetic: Vec<Complex64> = (0..n)
        .map(|m| {
            let idx = if m <= n / 2 { m as f64 } else { m as f64 - n as f64 };
            let k = idx * dk;
            Complex64::from_polar(1.0, -0.5 * k * k * dt_eff)
        })
        .collect();

    let mut planner = FftPlanner::new();
    let forward = planner.plan_fft_forward(n);
    let inverse = planner.plan_fft_inverse(n);
    let scale = 1.0 / n as f64;

    let mut buf = psi.values.clone();
    for _ in 0..steps {
        for (z, p) in buf.iter_mut().zip(&half_potential) {
            *z *= p;
        }
        forward.process(&mut buf);
        for (z, k) in buf.iter_mut().zip(&kinetic) {
            *z *= k;
        }
        inverse.process(&mut buf);
        for (z, p) in buf.iter_mut().zip(&half_potential) {
            *z *= p * scale;
        }
    }

    let result = GridFunction1D::new(Representation::Q, psi.x0, dx, buf)?;
    require_interior(&result, "split-step output")?;
    Ok(result)
}

// Fourth-order one-sided first derivative at the left end, h = 1.
fn end_derivative(v: &[Complex64]) -> Complex64 {
    (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2] + 16.0 * v[3] - 3.0 * v[4]) / 12.0
}

// Second-order one-sided third derivative at the left end, h = 1.
fn end_third_derivative(v: &[Complex64]) -> Complex64 {
    -2.5 * v[0] + 9.0 * v[1] - 12.0 * v[2] + 7.0 * v[3] - 1.5 * v[4]
}

/// Pairing integral conj(f) . g on a shared axis by the trapezoid rule with
/// explicit Euler-Maclaurin end corrections,
///
///   T  -  h^2/12 [h' (b) - h'(a)]  +  h^4/720 [h'''(b) - h'''(a)],
///
/// the end derivatives taken by one-sided finite differences. For states
/// that vanish at the window edge the corrections are zero and the trapezoid
/// value is already spectrally accurate; for integrands that do not vanish
/// the correction restores sixth-order convergence. Hand-rolled on purpose:
/// this route shares nothing with the quad module used by the main pairing
/// machinery.
pub fn slow_pairing(f: &GridFunction1D, g: &GridFunction1D) -> Result<Complex64> {
    if !f.same_axis(g) {
        return Err(Error::GridMismatch(format!(
            "pairing needs a shared axis: {} n={} x0={} dx={} vs {} n={} x0={} dx={}",
            f.rep.label(),
            f.n(),
            f.x0,
            f.dx,
            g.rep.label(),
            g.n(),
            g.x0,
            g.dx
        )));
    }
    let n = f.n();
    if n < 8 {
        return Err(Error::Invalid(format!(
            "end-corrected trapezoid needs at least 8 samples, got {n}"
        )));
    }
    let h: Vec<Complex64> = f
        .values
        .iter()
        .zip(&g.values)
        .map(|(a, b)| a.conj() * b)
        .collect();
    let dx = f.dx;
    let mut trap = Complex64::new(0.0, 0.0);
    for (j, z) in h.iter().enumerate() {
        let w = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
        trap += w * z;
    }
    trap *= dx;

    let head = &h[..5];
    let mut rev: Vec<Complex64> = h[n - 5..].to_vec();
    rev.reverse();
    // One-sided stencils on unit spacing; reversal flips the sign of odd
    // derivatives, so f'(b) = -D1(rev)/dx and f'''(b) = -D3(rev)/dx^3.
    let d1_a = end_derivative(head) / dx;
    let d1_b = -end_derivative(&rev) / dx;
    let d3_a = end_third_derivative(head) / dx.powi(3);
    let d3_b = -end_third_derivative(&rev) / dx.powi(3);
    Ok(trap - dx * dx / 12.0 * (d1_b - d1_a) + dx.powi(4) / 720.0 * (d3_b - d3_a))
}

/// Taylor coefficients f^(n)(0)/n! of a packet by trapezoid quadrature of
/// the Cauchy integral over a circle |z| = r,
///
///   c_n = (1 / (K r^n)) sum_k f(r e^(i theta_k)) e^(-i n theta_k),
///
/// with K = 512 nodes. The radius balances the growth of |f| on the circle
/// against the r^n gain: half the distance to the nearest singularity for
/// Bump, width * sqrt(n_max) for the entire Gauss-Hermite family. The
/// trapezoid rule on a circle is exponentially accurate, and the alias terms
/// c_(n+mK) r^(mK) are negligible for both families at K = 512.
pub fn cauchy_coeffs(p: &AnalyticPacket, n_max: usize) -> Result<Vec<f64>> {
    if n_max > 48 {
        return Err(Error::Order(format!(
            "circle quadrature loses too much mantissa beyond order 48, got {n_max}"
        )));
    }
    let r = match p.family {
        PacketFamily::Bump { .. } => 0.5 * p.radius_at(0.0),
        PacketFamily::GaussHermite { width, .. } => width * (n_max.max(1) as f64).sqrt(),
    };
    if !(r > 0.0 && r.is_finite()) {
        return Err(Error::Invalid(format!(
            "degenerate evaluation radius {r} for {}",
            p.describe()
        )));
    }
    const K: usize = 512;
    let samples: Vec<Complex64> = (0..K)
        .map(|k| {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / K as f64;
            p.eval_complex(Complex64::from_polar(r, theta))
        })
        .collect();
    let mut coeffs = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max {
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &fz) in samples.iter().enumerate() {
            let theta = 2.0 * std::f64::consts::PI * k as f64 / K as f64;
            acc += fz * Complex64::from_polar(1.0, -(n as f64) * theta);
        }
        // Real packets have real coefficients; the imaginary part is noise.
        coeffs.push(acc.re / (K as f64 * r.powi(n as i32)));
    }
    Ok(coeffs)
}

/// Monte Carlo transport: draw `samples` points from the density by
/// rejection sampling against its bilinear interpolant, push each point
/// through the classical flow, and histogram the survivors on the same
/// axes. Cells are centered on grid nodes; values are empirical probability
/// density, counts / (samples * dv * du), so the returned mass is exactly
/// the retained fraction. Fully deterministic for a fixed seed (single
/// sequential ChaCha8 stream).
///
/// Errors: `Domain` for |t| > 2, `Invalid` for fewer than 1000 samples or a
/// density that is not real and nonnegative, `Convergence` if the acceptance
/// rate collapses below ~1e-4.
pub fn mc_transport(
    rho: &PhaseDensity2D,
    t: f64,
    samples: usize,
    seed: u64,
) -> Result<PhaseDensity2D> {
    check_time(t)?;
    if samples < 1000 {
        return Err(Error::Invalid(format!(
            "need at least 1000 samples for a meaningful histogram, got {samples}"
        )));
    }
    let peak = rho.values.iter().map(|z| z.re).fold(0.0, f64::max);
    let floor = rho.values.iter().map(|z| z.re).fold(0.0, f64::min);
    let max_im = rho.values.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    if peak <= 0.0 || floor < -1e-9 * peak || max_im > 1e-12 * peak {
        return Err(Error::Invalid(format!(
            "sampling needs a real nonnegative density; peak {peak:.3e}, \
             most-negative value {floor:.3e}, max |Im| {max_im:.3e}"
        )));
    }

    let (v_lo, u_lo) = (rho.v0, rho.u0);
    let v_span = (rho.nv - 1) as f64 * rho.dv;
    let u_span = (rho.nu - 1) as f64 * rho.du;

    // Bilinear interpolant; never exceeds the largest node value, so the
    // flat envelope `peak` is a valid rejection bound.
    let density_at = |v: f64, u: f64| -> f64 {
        let ti = ((v - rho.v0) / rho.dv).clamp(0.0, (rho.nv - 2) as f64);
        let tj = ((u - rho.u0) / rho.du).clamp(0.0, (rho.nu - 2) as f64);
        let (i, j) = (ti.floor() as usize, tj.floor() as usize);
        let (fi, fj) = (ti - i as f64, tj - j as f64);
        let g = |a: usize, b: usize| rho.at(a, b).re.max(0.0);
        let val = g(i, j) * (1.0 - fi) * (1.0 - fj)
            + g(i + 1, j) * fi * (1.0 - fj)
            + g(i, j + 1) * (1.0 - fi) * fj
            + g(i + 1, j + 1) * fi * fj;
        val
    };

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut counts = vec![0.0f64; rho.nv * rho.nu];
    let max_draws = samples.saturating_mul(10_000);
    let mut draws = 0usize;
    for _ in 0..samples {
        let (v, u) = loop {
            draws += 1;
            if draws > max_draws {
                return Err(Error::Convergence(format!(
                    "rejection sampling accepted too rarely ({samples} samples \
                     not reached after {draws} draws)"
                )));
            }
            let v = v_lo + rng.gen::<f64>() * v_span;
            let u = u_lo + rng.gen::<f64>() * u_span;
            if rng.gen::<f64>() * peak <= density_at(v, u) {
                break (v, u);
            }
        };
        let moved = evolve_classical(FiberPoint::new(v, u), t)?;
        let i = ((moved.v - rho.v0) / rho.dv + 0.5).floor();
        let j = ((moved.u - rho.u0) / rho.du + 0.5).floor();
        if i >= 0.0 && (i as usize) < rho.nv && j >= 0.0 && (j as usize) < rho.nu {
            counts[i as usize * rho.nu + j as usize] += 1.0;
        }
    }

    let norm = 1.0 / (samples as f64 * rho.dv * rho.du);
    let values = counts
        .iter()
        .map(|&c| Complex64::new(c * norm, 0.0))
        .collect();
    PhaseDensity2D::new(rho.v0, rho.u0, rho.dv, rho.du, rho.nv, rho.nu, values, true)
}

// Weights of the exact integral of a piecewise-linear reconstruction over
// the nearest-node cell of node k (offsets -1, 0, +1; edge cells are
// half-width and one-sided).
fn cell_stencil(k: usize, n: usize) -> [f64; 3] {
    if k == 0 {
        [0.0, 3.0 / 8.0, 1.0 / 8.0]
    } else if k == n - 1 {
        [1.0 / 8.0, 3.0 / 8.0, 0.0]
    } else {
        [1.0 / 8.0, 6.0 / 8.0, 1.0 / 8.0]
    }
}

/// Block chi-square comparison of a Monte Carlo histogram against an
/// expected density on the same axes. The window is partitioned into
/// `blocks` x `blocks` index blocks; observed counts are hist * cell area *
/// samples, expectations are the expected-mass shares scaled to the retained
/// count (the test conditions on retention, so escape is assessed
/// separately).
///
/// The expected mass of a cell integrates the piecewise-bilinear
/// reconstruction of the reference density over the nearest-node cell - the
/// same resolution model the sampler and the histogram use. Comparing raw
/// node values instead biases the statistic upward wherever the density
/// curves within a cell (measured +1.5 sigma at 1e5 samples on a 128^2 grid
/// with a compactly supported factor). One resolution artifact remains for
/// t != 0: the particles carry the initial grid's reconstruction detail
/// through the flow, which no model built from the transported field's nodes
/// can express. That bias scales like samples * dx^4; at 1e5 samples it is
/// +2 sigma on a 128^2 window but central at 192^2 and finer.
///
/// Blocks with expectation below 10 are pooled; a pooled tail with
/// expectation below one count is folded into the smallest surviving block.
/// Returns (statistic, degrees of freedom), dof = bins - 1.
pub fn chi_square_blocks(
    hist: &PhaseDensity2D,
    expected: &PhaseDensity2D,
    samples: usize,
    blocks: usize,
) -> Result<(f64, usize)> {
    let same_axes = hist.v0 == expected.v0
        && hist.u0 == expected.u0
        && hist.dv == expected.dv
        && hist.du == expected.du
        && hist.nv == expected.nv
        && hist.nu == expected.nu;
    if !same_axes {
        return Err(Error::GridMismatch(format!(
            "chi-square needs identical axes: {} vs {}",
            hist.describe(),
            expected.describe()
        )));
    }
    if blocks < 2 || blocks > hist.nv.min(hist.nu) {
        return Err(Error::Invalid(format!(
            "block count {blocks} outside [2, min(nv, nu) = {}]",
            hist.nv.min(hist.nu)
        )));
    }

    let cell = hist.dv * hist.du;
    let edge = |k: usize, n: usize| k * n / blocks;
    let node = |i: usize, j: usize| expected.at(i, j).re.max(0.0);
    let cell_mass = |i: usize, j: usize| -> f64 {
        let sv = cell_stencil(i, expected.nv);
        let su = cell_stencil(j, expected.nu);
        let mut m = 0.0;
        for (a, &wv) in sv.iter().enumerate() {
            if wv == 0.0 {
                continue;
            }
            for (b, &wu) in su.iter().enumerate() {
                if wu == 0.0 {
                    continue;
                }
                m += wv * wu * node((i + a) - 1, (j + b) - 1);
            }
        }
        m * cell
    };
    let mut observed = Vec::new();
    let mut weight = Vec::new();
    for bi in 0..blocks {
        for bj in 0..blocks {
            let mut o = 0.0;
            let mut w = 0.0;
            for i in edge(bi, hist.nv)..edge(bi + 1, hist.nv) {
                for j in edge(bj, hist.nu)..edge(bj + 1, hist.nu) {
                    o += hist.at(i, j).re * cell * samples as f64;
                    w += cell_mass(i, j);
                }
            }
            if o != 0.0 || w != 0.0 {
                observed.push(o);
                weight.push(w);
            }
        }
    }
    let retained: f64 = observed.iter().sum();
    let total_weight: f64 = weight.iter().sum();
    if retained <= 0.0 || total_weight <= 0.0 {
        return Err(Error::Invalid(
            "chi-square comparison of empty distributions".into(),
        ));
    }

    let mut kept: Vec<(f64, f64)> = Vec::new();
    let (mut pool_o, mut pool_e) = (0.0f64, 0.0f64);
    for (o, w) in observed.iter().zip(&weight) {
        let e = retained * w / total_weight;
        if e >= 10.0 {
            kept.push((*o, e));
        } else {
            pool_o += o;
            pool_e += e;
        }
    }
    if kept.is_empty() {
        return Err(Error::Invalid(format!(
            "no block reaches an expectation of 10 counts; {samples} samples \
             are too few for {blocks}x{blocks} blocks"
        )));
    }
    if pool_e >= 1.0 {
        kept.push((pool_o, pool_e));
    } else if pool_e > 0.0 || pool_o > 0.0 {
        let smallest = kept
            .iter_mut()
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .expect("non-empty");
        smallest.0 += pool_o;
        smallest.1 += pool_e;
    }

    let statistic: f64 = kept.iter().map(|(o, e)| (o - e) * (o - e) / e).sum();
    Ok((statistic, kept.len() - 1))
}
