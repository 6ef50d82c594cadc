//! High-order numerical differentiation from point evaluations only.
//!
//! Used by the oracle layer as an independent route to derivative values
//! that the production code obtains from exact Taylor recurrences. Weights
//! come from Fornberg's recursion, which is stable for the stencil sizes
//! used here (≤ 40 nodes).

/// Finite-difference weights on arbitrary nodes `xs` approximating the
/// m-th derivative at `z`. Returns rows 0..=m (row k weights the k-th
/// derivative); xs must be pairwise distinct.
pub fn fornberg_weights(z: f64, xs: &[f64], m: usize) -> Vec<Vec<f64>> {
    let n = xs.len();
    assert!(n > m, "need more nodes than the derivative order");
    let mut c = vec![vec![0.0; n]; m + 1];
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    c[0][0] = 1.0;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[k][i] = c1 * (k as f64 * c[k - 1][i - 1] - c5 * c[k][i - 1]) / c2;
                }
                c[0][i] = -c1 * c5 * c[0][i - 1] / c2;
            }
            for k in (1..=mn).rev() {
                c[k][j] = (c4 * c[k][j] - k as f64 * c[k - 1][j]) / c3;
            }
            c[0][j] = c4 * c[0][j] / c3;
        }
        c1 = c2;
    }
    c
}

/// n-th derivative of f at x from a centered uniform stencil of `points`
/// nodes spaced h (points must exceed n; odd counts center exactly).
pub fn derivative_stencil(f: &dyn Fn(f64) -> f64, x: f64, n: usize, h: f64, points: usize) -> f64 {
    assert!(points > n && h > 0.0);
    let half = (points - 1) as f64 / 2.0;
    let xs: Vec<f64> = (0..points).map(|j| x + (j as f64 - half) * h).collect();
    let w = fornberg_weights(x, &xs, n);
    xs.iter().zip(&w[n]).map(|(&xj, &wj)| wj * f(xj)).sum()
}

/// Richardson extrapolation of `derivative_stencil` over h, h/2, … h/2^levels.
/// The point count is forced odd so the centered stencil truncation error is
/// a series in h² and successive eliminations use the factor 4.
pub fn derivative_richardson(
    f: &dyn Fn(f64) -> f64,
    x: f64,
    n: usize,
    h: f64,
    points: usize,
    levels: usize,
) -> f64 {
    let points = points | 1;
    let mut row: Vec<f64> = (0..=levels)
        .map(|l| derivative_stencil(f, x, n, h / (1u64 << l) as f64, points))
        .collect();
    let p0 = points - n; // leading truncation order of the base stencil
    let mut factor = 4.0f64.powi(((p0 + 1) / 2) as i32);
    for _ in 0..levels {
        for i in 0..row.len() - 1 {
            row[i] = (factor * row[i + 1] - row[i]) / (factor - 1.0);
        }
        row.pop();
        factor *= 4.0;
    }
    row[0]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn classic_stencils_reproduced() {
        // Second derivative, 3-point central: (1, -2, 1)/h².
        let h = 0.5;
        let xs = [-h, 0.0, h];
        let w = fornberg_weights(0.0, &xs, 2);
        let want = [1.0 / (h * h), -2.0 / (h * h), 1.0 / (h * h)];
        for (a, b) in w[2].iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
        // First derivative, 5-point central: (1, -8, 0, 8, -1)/(12h).
        let xs5: Vec<f64> = (-2..=2).map(|k| k as f64 * h).collect();
        let w5 = fornberg_weights(0.0, &xs5, 1);
        let want5 = [1.0, -8.0, 0.0, 8.0, -1.0].map(|c| c / (12.0 * h));
        for (a, b) in w5[1].iter().zip(&want5) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn trig_derivatives_high_order() {
        // Steps sit near the roundoff/truncation optimum: high-order FD in
        // doubles bottoms out around 1e-10 relative for n ~ 5.
        let x = 0.3;
        let d5 = derivative_stencil(&f64::sin, x, 5, 0.2, 17);
        assert!((d5 - x.cos()).abs() < 1e-9);
        let d8 = derivative_stencil(&f64::sin, x, 8, 0.4, 19);
        assert!((d8 - x.sin()).abs() < 1e-7);
    }

    #[test]
    fn richardson_beats_single_stencil() {
        let f = |x: f64| (-x * x).exp();
        // e^{-x^2} has x^6 coefficient -1/3!, so f^(6)(0) = -720/6 = -120.
        let exact = -120.0;
        let plain = derivative_stencil(&f, 0.0, 6, 0.12, 13);
        let extrap = derivative_richardson(&f, 0.0, 6, 0.12, 13, 1);
        assert!((extrap - exact).abs() < 1e-6 * exact.abs(), "{extrap}");
        assert!((extrap - exact).abs() < 0.05 * (plain - exact).abs());
    }
}
