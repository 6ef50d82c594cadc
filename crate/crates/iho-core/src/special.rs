//! Small special-function helpers shared across modules.

/// n! as f64. Exact through 20!; log-gamma beyond that to avoid
/// accumulating product rounding and to survive large arguments.
pub fn factorial(n: usize) -> f64 {
    const TABLE: [f64; 21] = [
        1.0,
        1.0,
        2.0,
        6.0,
        24.0,
        120.0,
        720.0,
        5040.0,
        40320.0,
        362880.0,
        3628800.0,
        39916800.0,
        479001600.0,
        6227020800.0,
        87178291200.0,
        1307674368000.0,
        20922789888000.0,
        355687428096000.0,
        6402373705728000.0,
        121645100408832000.0,
        2432902008176640000.0,
    ];
    if n < TABLE.len() {
        TABLE[n]
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0).exp()
    }
}

/// ln(n!).
pub fn ln_factorial(n: usize) -> f64 {
    if n <= 20 {
        factorial(n).ln()
    } else {
        statrs::function::gamma::ln_gamma(n as f64 + 1.0)
    }
}

/// Gamma(d + 1/2) = sqrt(pi) (2d-1)!! / 2^d, for integer d >= 0.
pub fn gamma_half(d: usize) -> f64 {
    let mut g = std::f64::consts::PI.sqrt();
    for k in 0..d {
        g *= k as f64 + 0.5;
    }
    g
}
