//! End-to-end scenarios strung together through the public API only, the
//! way downstream code consumes the crate.

use iho_core::corpus;
use iho_core::gamow::{evolve_scaling, survival_amplitude, time_reverse};
use iho_core::grid::{GridFunction1D, Representation};
use iho_core::reps::transform;
use iho_core::wigner::wigner;
use num_complex::Complex64;

fn normalized(name: &str, rep: Representation, n: usize) -> GridFunction1D {
    let p = corpus::member(name).unwrap().packet;
    let (x0, dx) = GridFunction1D::axis_points(-20.0, 20.0, n);
    let raw = GridFunction1D::sample_packet(&p, rep, x0, dx, n).unwrap();
    let scale = Complex64::new(1.0 / raw.norm(), 0.0);
    raw.scaled(scale)
}

#[test]
fn survival_amplitude_decays_monotonically() {
    let (minus, plus) = corpus::survival_pairs().remove(0);
    let times: Vec<f64> = (0..=32).map(|k| 0.25 * k as f64).collect();
    let series = survival_amplitude(&minus.packet, &plus.packet, 32, &times, 1e-9).unwrap();
    let mags: Vec<f64> = series.amplitudes.iter().map(|a| a.norm()).collect();
    for w in mags.windows(2) {
        assert!(w[1] < w[0], "|A| must decrease: {} -> {}", w[0], w[1]);
    }
    // Slope -1/2 over eight time units: four e-foldings, with room for the
    // subleading tower terms still present near t = 0.
    assert!(mags[32] < mags[0] * (-3.5f64).exp());
}

#[test]
fn transform_legs_compose_around_the_triangle() {
    let f = normalized("gauss-excited", Representation::Q, 2048);
    let v = transform(&f, Representation::V).unwrap();
    let u = transform(&v, Representation::U).unwrap();
    let back = transform(&u, Representation::Q).unwrap();
    // Composing all three legs is the identity up to quadrature error; a
    // sign or phase slip in any single kernel would show at order one.
    let sup = back.sup_diff(&f).unwrap() / f.max_abs();
    assert!(sup < 1e-9, "triangle composition residual {sup:e}");
}

#[test]
fn wigner_mass_is_the_squared_norm() {
    let f = normalized("bump-offset", Representation::V, 1024);
    let w = wigner(&f).unwrap();
    assert!((w.mass() - 1.0).abs() < 1e-9, "mass {}", w.mass());
}

#[test]
fn reversed_state_evolves_backwards() {
    // T U(t) f computed two ways: reverse-then-evolve must equal
    // evolve-then-reverse with the opposite time.
    let f = normalized("bump-narrow", Representation::V, 2048);
    for &t in &[0.4, 1.1] {
        let lhs = time_reverse(&evolve_scaling(&f, t).unwrap()).unwrap();
        let rhs = evolve_scaling(&time_reverse(&f).unwrap(), -t).unwrap();
        let sup = lhs.sup_diff(&rhs).unwrap() / f.max_abs();
        assert!(sup < 1e-9, "conjugation residual {sup:e} at t = {t}");
    }
}
