//! Truncated real Taylor-series arithmetic.
//!
//! Packets expose derivatives at arbitrary points through these series:
//! each coefficient is produced by a finite recurrence (no discretization),
//! so the values are exact up to floating-point rounding.

/// Coefficients c[k] of sum_k c[k] (x - x0)^k, truncated at `len() - 1`.
#[derive(Debug, Clone)]
pub struct Series(pub Vec<f64>);

impl Series {
    pub fn zero(order: usize) -> Self {
        Series(vec![0.0; order + 1])
    }

    pub fn constant(c: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.0[0] = c;
        s
    }

    /// The affine series a + b*(x - x0).
    pub fn affine(a: f64, b: f64, order: usize) -> Self {
        let mut s = Self::zero(order);
        s.0[0] = a;
        if order >= 1 {
            s.0[1] = b;
        }
        s
    }

    pub fn order(&self) -> usize {
        self.0.len() - 1
    }

    pub fn add(&self, rhs: &Series) -> Series {
        assert_eq!(self.0.len(), rhs.0.len());
        Series(self.0.iter().zip(&rhs.0).map(|(a, b)| a + b).collect())
    }

    pub fn scale(&self, c: f64) -> Series {
        Series(self.0.iter().map(|a| a * c).collect())
    }

    /// Cauchy product truncated to the common order.
    pub fn mul(&self, rhs: &Series) -> Series {
        let n = self.0.len();
        assert_eq!(n, rhs.0.len());
        let mut out = vec![0.0; n];
        for i in 0..n {
            if self.0[i] == 0.0 {
                continue;
            }
            for j in 0..n - i {
                out[i + j] += self.0[i] * rhs.0[j];
            }
        }
        Series(out)
    }

    /// exp of the series: g = exp(f) via g_k = (1/k) sum_{j=1..k} j f_j g_{k-j}.
    pub fn exp(&self) -> Series {
        let n = self.0.len();
        let mut g = vec![0.0; n];
        g[0] = self.0[0].exp();
        for k in 1..n {
            let mut acc = 0.0;
            for j in 1..=k {
                acc += (j as f64) * self.0[j] * g[k - j];
            }
            g[k] = acc / k as f64;
        }
        Series(g)
    }

    /// Derivative values f^(k)(x0) = k! * c_k for k = 0..=order.
    pub fn derivatives(&self) -> Vec<f64> {
        let mut fact = 1.0;
        self.0
            .iter()
            .enumerate()
            .map(|(k, c)| {
                if k > 0 {
                    fact *= k as f64;
                }
                c * fact
            })
            .collect()
    }
}

/// Taylor series of 1/(d - (x - x0)) = sum_k (x - x0)^k / d^(k+1), |d| > 0.
pub fn reciprocal_linear(d: f64, order: usize) -> Series {
    let mut out = vec![0.0; order + 1];
    let mut p = 1.0 / d;
    for c in out.iter_mut() {
        *c = p;
        p /= d;
    }
    Series(out)
}
