//! Quadrature: trapezoid sums on uniform samples, adaptive Simpson on
//! callables, and moment integrals of analytic packets.
//!
//! The trapezoid rule is the workhorse: every integrand in this crate is
//! either compactly supported and C-infinity or decays like a Gaussian, and
//! for such functions the uniform trapezoid rule converges faster than any
//! power of the spacing. Adaptive Simpson serves as the structurally
//! independent second opinion in the oracle layer.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::packet::AnalyticPacket;

/// Trapezoid rule on uniform samples (endpoints half-weighted).
pub fn trapezoid(values: &[f64], dx: f64) -> f64 {
    if values.len() < 2 {
        return 0.0;
    }
    let interior: f64 = values[1..values.len() - 1].iter().sum();
    dx * (interior + 0.5 * (values[0] + values[values.len() - 1]))
}

/// Trapezoid rule on uniform complex samples.
pub fn trapezoid_complex(values: &[Complex64], dx: f64) -> Complex64 {
    if values.len() < 2 {
        return Complex64::new(0.0, 0.0);
    }
    let mut acc = 0.5 * (values[0] + values[values.len() - 1]);
    for z in &values[1..values.len() - 1] {
        acc += z;
    }
    dx * acc
}

const MAX_DEPTH: usize = 48;

fn simpson_step(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    fa: Complex64,
    b: f64,
    fb: Complex64,
    m: f64,
    fm: Complex64,
    whole: Complex64,
    tol: f64,
    depth: usize,
) -> Result<Complex64> {
    let lm = 0.5 * (a + m);
    let rm = 0.5 * (m + b);
    let flm = f(lm);
    let frm = f(rm);
    let h6 = (b - a) / 12.0;
    let left = h6 * (fa + 4.0 * flm + fm);
    let right = h6 * (fm + 4.0 * frm + fb);
    let delta = left + right - whole;
    if delta.norm() <= 15.0 * tol {
        // Richardson correction of the composite estimate.
        return Ok(left + right + delta / 15.0);
    }
    if depth == 0 {
        return Err(Error::Convergence(format!(
            "adaptive Simpson failed to converge on [{a}, {b}] at depth {MAX_DEPTH}"
        )));
    }
    let l = simpson_step(f, a, fa, m, fm, lm, flm, left, 0.5 * tol, depth - 1)?;
    let r = simpson_step(f, m, fm, b, fb, rm, frm, right, 0.5 * tol, depth - 1)?;
    Ok(l + r)
}

/// Adaptive Simpson quadrature with a global absolute tolerance.
pub fn adaptive_simpson_complex(
    f: &dyn Fn(f64) -> Complex64,
    a: f64,
    b: f64,
    tol: f64,
) -> Result<Complex64> {
    assert!(a < b && tol > 0.0);
    // Seed with a few panels so that symmetric integrands cannot fool the
    // first Richardson estimate.
    let panels = 8;
    let h = (b - a) / panels as f64;
    let mut total = Complex64::new(0.0, 0.0);
    for k in 0..panels {
        let pa = a + k as f64 * h;
        let pb = pa + h;
        let pm = 0.5 * (pa + pb);
        let (fa, fb, fm) = (f(pa), f(pb), f(pm));
        let whole = (pb - pa) / 6.0 * (fa + 4.0 * fm + fb);
        total += simpson_step(
            f,
            pa,
            fa,
            pb,
            fb,
            pm,
            fm,
            whole,
            tol / panels as f64,
            MAX_DEPTH,
        )?;
    }
    Ok(total)
}

/// Real-valued adaptive Simpson.
pub fn adaptive_simpson(f: &dyn Fn(f64) -> f64, a: f64, b: f64, tol: f64) -> Result<f64> {
    let g = |x: f64| Complex64::new(f(x), 0.0);
    Ok(adaptive_simpson_complex(&g, a, b, tol)?.re)
}

/// Integration window for ∫ x^n p(x) dx: the exact support for Bump, and a
/// center ± width·(√(2(n+degree)) + 12) window for GaussHermite (wide enough
/// that the discarded tail of x^n·p(x) is below 1e−16 relative).
pub fn moment_domain(p: &AnalyticPacket, n: usize) -> (f64, f64) {
    use crate::packet::PacketFamily::*;
    match p.family {
        Bump { center, half_width } => (center - half_width, center + half_width),
        GaussHermite { center, width, degree } => {
            let r = width * ((2.0 * (n + degree) as f64).sqrt() + 12.0);
            (center - r, center + r)
        }
    }
}

const MOMENT_SAMPLES: usize = 1 << 14;

/// ∫ x^n p(x) dx by the trapezoid rule on the moment domain.
pub fn packet_moment(p: &AnalyticPacket, n: usize) -> f64 {
    let (a, b) = moment_domain(p, n);
    let dx = (b - a) / MOMENT_SAMPLES as f64;
    let vals: Vec<f64> = (0..=MOMENT_SAMPLES)
        .map(|k| {
            let x = a + k as f64 * dx;
            x.powi(n as i32) * p.eval(x)
        })
        .collect();
    trapezoid(&vals, dx)
}

/// ∫ x^n p(x)² dx (used for expectation values of evolved packets).
pub fn packet_weighted_moment(p: &AnalyticPacket, n: usize) -> f64 {
    let (a, b) = moment_domain(p, n);
    let dx = (b - a) / MOMENT_SAMPLES as f64;
    let vals: Vec<f64> = (0..=MOMENT_SAMPLES)
        .map(|k| {
            let x = a + k as f64 * dx;
            let f = p.eval(x);
            x.powi(n as i32) * f * f
        })
        .collect();
    trapezoid(&vals, dx)
}

fn mollifier(t: f64) -> f64 {
    if t <= 0.0 {
        0.0
    } else {
        (-1.0 / t).exp()
    }
}

/// C-infinity step: 0 for t ≤ 0, 1 for t ≥ 1, strictly monotone between.
pub fn smooth_step(t: f64) -> f64 {
    let g = mollifier(t);
    let h = mollifier(1.0 - t);
    if g == 0.0 {
        0.0
    } else if h == 0.0 {
        1.0
    } else {
        g / (g + h)
    }
}

/// C-infinity plateau window: 1 on [a+rise, b−rise], 0 outside [a, b].
/// Multiplying a truncated oscillatory integrand by this window removes the
/// algebraic boundary error of bare truncation without touching the bulk.
pub fn plateau_window(x: f64, a: f64, b: f64, rise: f64) -> f64 {
    assert!(b - a > 2.0 * rise && rise > 0.0);
    smooth_step((x - a) / rise) * smooth_step((b - x) / rise)
}

#[cfg(test)]
mod tests {
    use super::*;

    // 40-digit reference values for the unit bump exp(-1/(1-x^2)).
    const BUMP_MASS: f64 = 0.4439938161680794378;
    const BUMP_L2SQ: f64 = 0.13308612084499427156;

    #[test]
    fn bump_mass_pins() {
        let b = AnalyticPacket::bump(0.0, 1.0);
        assert!((packet_moment(&b, 0) - BUMP_MASS).abs() < 1e-13);
        let l2 = packet_weighted_moment(&b, 0);
        assert!((l2 - BUMP_L2SQ).abs() < 1e-13);
        // Translation invariance of the mass.
        let b2 = AnalyticPacket::bump(0.4, 1.0);
        assert!((packet_moment(&b2, 0) - BUMP_MASS).abs() < 1e-13);
    }

    #[test]
    fn adaptive_matches_trapezoid_on_bump() {
        let b = AnalyticPacket::bump(0.3, 1.1);
        let via_adaptive =
            adaptive_simpson(&|x| b.eval(x), -0.9, 1.5, 1e-13).unwrap();
        assert!((via_adaptive - packet_moment(&b, 0)).abs() < 1e-11);
    }

    #[test]
    fn gaussian_moments_match_closed_form() {
        // ∫ x^2 e^{-x^2} dx = sqrt(pi)/2 with width 1/sqrt(2).
        let g = AnalyticPacket::gauss_hermite(0.0, std::f64::consts::FRAC_1_SQRT_2, 0);
        let want = std::f64::consts::PI.sqrt() / 2.0;
        assert!((packet_moment(&g, 2) - want).abs() < 1e-12);
        // Odd moment vanishes.
        assert!(packet_moment(&g, 3).abs() < 1e-13);
        // High moment: ∫ x^20 e^{-x^2} = Gamma(10.5).
        let want20 = crate::special::gamma_half(10);
        assert!((packet_moment(&g, 20) - want20).abs() < 1e-10 * want20);
    }

    #[test]
    fn adaptive_handles_oscillation() {
        // ∫_0^pi sin = 2 and ∫_0^{2pi} e^{i x} dx = 0.
        let s = adaptive_simpson(&f64::sin, 0.0, std::f64::consts::PI, 1e-12).unwrap();
        assert!((s - 2.0).abs() < 1e-11);
        let c = adaptive_simpson_complex(
            &|x| Complex64::new(0.0, x).exp(),
            0.0,
            2.0 * std::f64::consts::PI,
            1e-12,
        )
        .unwrap();
        assert!(c.norm() < 1e-11);
    }

    #[test]
    fn plateau_window_is_flat_inside() {
        assert_eq!(plateau_window(-5.0, -4.0, 4.0, 1.0), 0.0);
        assert_eq!(plateau_window(0.0, -4.0, 4.0, 1.0), 1.0);
        assert_eq!(plateau_window(2.9, -4.0, 4.0, 1.0), 1.0);
        let v = plateau_window(3.7, -4.0, 4.0, 1.0);
        assert!(v > 0.0 && v < 1.0);
    }
}
