//! Chirp-factored oscillating sums (Bluestein's algorithm).
//!
//! Everything the representation maps need reduces to
//!     y_k = Σ_{j<N} x_j · exp(i·sign·α·j·k),   k = 0..M−1,
//! with arbitrary real α and output count M. Writing jk = (j² + k² − (k−j)²)/2
//! turns this into a single linear convolution with the fixed chirp
//! exp(−i·sign·α·m²/2), evaluated by zero-padded FFTs in O((N+M) log(N+M)).

use num_complex::Complex64;
use rustfft::FftPlanner;

fn chirp(alpha_half: f64, m: i64) -> Complex64 {
    // m² ≤ ~2^26 here, exactly representable; libm reduces the argument.
    let phase = alpha_half * (m * m) as f64;
    Complex64::new(phase.cos(), phase.sin())
}

fn next_pow2(n: usize) -> usize {
    n.next_power_of_two()
}

/// y_k = Σ_j x_j exp(i·sign·α·j·k) for k = 0..m-1, sign = ±1.
pub fn oscillating_sum(x: &[Complex64], m: usize, alpha: f64, sign: f64) -> Vec<Complex64> {
    assert!(sign == 1.0 || sign == -1.0);
    assert!(alpha.is_finite() && m >= 1 && !x.is_empty());
    let n = x.len();
    let half = 0.5 * sign * alpha;
    let l = next_pow2(n + m - 1);

    // a_j = x_j e^{i·half·j²}, zero-padded.
    let mut a = vec![Complex64::new(0.0, 0.0); l];
    for (j, &xv) in x.iter().enumerate() {
        a[j] = xv * chirp(half, j as i64);
    }
    // b holds the conjugate chirp at lags −(N−1)..(M−1), wrapped mod L.
    let mut b = vec![Complex64::new(0.0, 0.0); l];
    for lag in 0..m as i64 {
        b[lag as usize] = chirp(-half, lag);
    }
    for lag in 1..n as i64 {
        b[l - lag as usize] = chirp(-half, lag);
    }

    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(l);
    let ifft = planner.plan_fft_inverse(l);
    fft.process(&mut a);
    fft.process(&mut b);
    for (av, bv) in a.iter_mut().zip(&b) {
        *av *= bv;
    }
    ifft.process(&mut a);

    let scale = 1.0 / l as f64;
    (0..m)
        .map(|k| a[k] * scale * chirp(half, k as i64))
        .collect()
}

/// O(N·M) reference of the same sum, for cross-checks and tiny inputs.
pub fn oscillating_sum_direct(x: &[Complex64], m: usize, alpha: f64, sign: f64) -> Vec<Complex64> {
    (0..m)
        .map(|k| {
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &xv) in x.iter().enumerate() {
                let phase = sign * alpha * (j * k) as f64;
                acc += xv * Complex64::new(phase.cos(), phase.sin());
            }
            acc
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pseudo_random(n: usize) -> Vec<Complex64> {
        // Deterministic fixture; no RNG dependency needed here.
        (0..n)
            .map(|k| {
                let a = (k as f64 * 0.7341 + 0.21).sin();
                let b = (k as f64 * 1.9173 - 1.4).cos();
                Complex64::new(a, 0.5 * b)
            })
            .collect()
    }

    #[test]
    fn matches_direct_sum_both_signs() {
        let x = pseudo_random(33);
        for &sign in &[1.0, -1.0] {
            for &(m, alpha) in &[(17usize, 0.1377), (65, 0.9), (33, 2.3e-3)] {
                let fast = oscillating_sum(&x, m, alpha, sign);
                let slow = oscillating_sum_direct(&x, m, alpha, sign);
                for (f, s) in fast.iter().zip(&slow) {
                    assert!((f - s).norm() < 1e-11, "m={m} alpha={alpha} sign={sign}");
                }
            }
        }
    }

    #[test]
    fn reduces_to_plain_dft() {
        // alpha = 2π/N, sign = −1 is the standard DFT.
        let n = 64;
        let x = pseudo_random(n);
        let alpha = 2.0 * std::f64::consts::PI / n as f64;
        let via_czt = oscillating_sum(&x, n, alpha, -1.0);
        let mut via_fft = x.clone();
        FftPlanner::new()
            .plan_fft_forward(n)
            .process(&mut via_fft);
        for (a, b) in via_czt.iter().zip(&via_fft) {
            assert!((a - b).norm() < 1e-11);
        }
    }

    #[test]
    fn large_phase_arguments_stay_accurate() {
        // Exercise j² up to ~1.6e7 where naive phase accumulation would drift.
        let n = 4096;
        let x = pseudo_random(n);
        let alpha = 0.0138;
        let fast = oscillating_sum(&x, 8, alpha, 1.0);
        let slow = oscillating_sum_direct(&x, 8, alpha, 1.0);
        for (f, s) in fast.iter().zip(&slow) {
            assert!((f - s).norm() < 1e-9 * (1.0 + s.norm()));
        }
    }
}
