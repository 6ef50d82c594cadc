//! Analytic wave packets: the two proxy families used throughout.
//!
//! * `Bump` — compactly supported C-infinity profile
//!   A * exp(-1/(1 - s^2)), s = (x - center)/half_width, identically zero
//!   for |s| >= 1. Stands in for compact-support test functions.
//! * `GaussHermite` — entire functions of rapid decrease,
//!   A * (x - center)^degree * exp(-(x - center)^2 / (2 width^2)).
//!   Stands in for entire test functions. The prefactor is the plain
//!   monomial so that probes like v^n * exp(-eps v^2) are family members.
//!
//! Both families evaluate in closed form at real and complex arguments and
//! expose exact Taylor expansions (finite recurrences, no discretization) at
//! any point up to [`MAX_EXACT_ORDER`]. Both are closed under the scaling
//! maps x -> s*x and reflection, which is what makes the exact evolution
//! checks in the rest of the crate possible.

use num_complex::Complex64;

use crate::series::{reciprocal_linear, Series};
use crate::special::gamma_half;

/// Highest derivative order guaranteed exact (closed-form recurrences).
pub const MAX_EXACT_ORDER: usize = 64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PacketFamily {
    /// Support [center - half_width, center + half_width].
    Bump { center: f64, half_width: f64 },
    /// Monomial-times-Gaussian; entire, rapidly decreasing.
    GaussHermite { center: f64, width: f64, degree: usize },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticPacket {
    pub family: PacketFamily,
    pub amplitude: f64,
}

impl AnalyticPacket {
    pub fn bump(center: f64, half_width: f64) -> Self {
        assert!(half_width > 0.0 && half_width.is_finite() && center.is_finite());
        AnalyticPacket {
            family: PacketFamily::Bump { center, half_width },
            amplitude: 1.0,
        }
    }

    pub fn gauss_hermite(center: f64, width: f64, degree: usize) -> Self {
        assert!(width > 0.0 && width.is_finite() && center.is_finite());
        AnalyticPacket {
            family: PacketFamily::GaussHermite { center, width, degree },
            amplitude: 1.0,
        }
    }

    /// Gauss-Hermite member with unit L2 norm:
    /// integral A^2 y^(2d) exp(-y^2/w^2) dy = A^2 w^(2d+1) Gamma(d + 1/2).
    pub fn gauss_hermite_normalized(center: f64, width: f64, degree: usize) -> Self {
        let mut p = Self::gauss_hermite(center, width, degree);
        p.amplitude = 1.0 / (width.powi(2 * degree as i32 + 1) * gamma_half(degree)).sqrt();
        p
    }

    pub fn with_amplitude(mut self, amplitude: f64) -> Self {
        assert!(amplitude.is_finite());
        self.amplitude = amplitude;
        self
    }

    /// Closed-form evaluation at a real point. Bump is exactly zero outside
    /// its support.
    pub fn eval(&self, x: f64) -> f64 {
        match self.family {
            PacketFamily::Bump { center, half_width } => {
                let s = (x - center) / half_width;
                if s.abs() >= 1.0 {
                    0.0
                } else {
                    self.amplitude * (-1.0 / (1.0 - s * s)).exp()
                }
            }
            PacketFamily::GaussHermite { center, width, degree } => {
                let y = x - center;
                self.amplitude * y.powi(degree as i32) * (-y * y / (2.0 * width * width)).exp()
            }
        }
    }

    /// Analytic continuation at a complex point. For the bump this is the
    /// continuation of the interior branch; callers must stay inside the
    /// analyticity disk around a real interior point (singularities sit at
    /// the support edges).
    pub fn eval_complex(&self, z: Complex64) -> Complex64 {
        match self.family {
            PacketFamily::Bump { center, half_width } => {
                let s = (z - center) / half_width;
                self.amplitude * (-1.0 / (1.0 - s * s)).exp()
            }
            PacketFamily::GaussHermite { center, width, degree } => {
                let y = z - center;
                self.amplitude * y.powi(degree as u32 as i32) * (-y * y / (2.0 * width * width)).exp()
            }
        }
    }

    /// Exact Taylor expansion around `x0`, coefficients of (x - x0)^k for
    /// k = 0..=order. Exact up to floating-point rounding for both families.
    pub fn taylor(&self, x0: f64, order: usize) -> Series {
        assert!(
            order <= MAX_EXACT_ORDER,
            "derivative order {order} exceeds exact order {MAX_EXACT_ORDER}"
        );
        match self.family {
            PacketFamily::Bump { center, half_width } => {
                let s0 = (x0 - center) / half_width;
                if s0.abs() >= 1.0 {
                    // Identically zero component (all one-sided derivatives
                    // vanish at the support edge as well).
                    return Series::zero(order);
                }
                // -1/(1-s^2) = -(1/2) [ 1/(1-s) + 1/(1+s) ] expanded at s0.
                let minus = reciprocal_linear(1.0 - s0, order); // 1/(1-s)
                let mut plus = Series::zero(order); // 1/(1+s): (-1)^k/(1+s0)^(k+1)
                let mut p = 1.0 / (1.0 + s0);
                for (k, c) in plus.0.iter_mut().enumerate() {
                    *c = if k % 2 == 0 { p } else { -p };
                    p /= 1.0 + s0;
                }
                let exponent = minus.add(&plus).scale(-0.5);
                let mut f = exponent.exp().scale(self.amplitude);
                // Chain rule from s to x: divide coefficient k by half_width^k.
                let mut scale = 1.0;
                for c in f.0.iter_mut() {
                    *c *= scale;
                    scale /= half_width;
                }
                f
            }
            PacketFamily::GaussHermite { center, width, degree } => {
                let y0 = x0 - center;
                let w2 = width * width;
                // exp(-(y0+h)^2/(2w^2)) = exp(quadratic in h).
                let mut expo = Series::zero(order);
                expo.0[0] = -y0 * y0 / (2.0 * w2);
                if order >= 1 {
                    expo.0[1] = -y0 / w2;
                }
                if order >= 2 {
                    expo.0[2] = -1.0 / (2.0 * w2);
                }
                let gauss = expo.exp();
                // (y0 + h)^degree via binomial coefficients.
                let mut poly = Series::zero(order);
                let d = degree;
                let mut binom = 1.0;
                for k in 0..=d.min(order) {
                    poly.0[k] = binom * y0.powi((d - k) as i32);
                    binom *= (d - k) as f64 / (k as f64 + 1.0);
                }
                if d > order && y0 == 0.0 {
                    // Monomial of degree beyond the truncation at its root:
                    // all retained coefficients are zero; poly is already 0.
                }
                gauss.mul(&poly).scale(self.amplitude)
            }
        }
    }

    /// k-th derivative at x, from the exact Taylor expansion.
    pub fn derivative(&self, k: usize, x: f64) -> f64 {
        self.taylor(x, k).derivatives()[k]
    }

    /// Exact support for Bump; effective support (center +- n_widths) wide
    /// enough for 1e-16-level quadrature for GaussHermite.
    pub fn effective_support(&self) -> (f64, f64) {
        match self.family {
            PacketFamily::Bump { center, half_width } => {
                (center - half_width, center + half_width)
            }
            PacketFamily::GaussHermite { center, width, degree } => {
                let r = width * (14.0 + (2.0 * degree as f64).sqrt() * 2.0);
                (center - r, center + r)
            }
        }
    }

    /// The interval a sampling grid must cover: the support itself for Bump,
    /// at least 8 widths on each side of the center for GaussHermite.
    pub fn coverage_requirement(&self) -> (f64, f64) {
        match self.family {
            PacketFamily::Bump { center, half_width } => {
                (center - half_width, center + half_width)
            }
            PacketFamily::GaussHermite { center, width, degree } => {
                let r = width * (8.0 + (degree as f64).sqrt());
                (center - r, center + r)
            }
        }
    }

    /// Radius of convergence of the Taylor expansion at x: the distance to
    /// the nearest complex singularity (support edges) for Bump, infinite
    /// for the entire family.
    pub fn radius_at(&self, x: f64) -> f64 {
        match self.family {
            PacketFamily::Bump { center, half_width } => {
                let lo = center - half_width;
                let hi = center + half_width;
                (x - lo).abs().min((x - hi).abs())
            }
            PacketFamily::GaussHermite { .. } => f64::INFINITY,
        }
    }

    pub fn is_entire(&self) -> bool {
        matches!(self.family, PacketFamily::GaussHermite { .. })
    }

    /// New packet equal to `prefactor * self(arg_scale * x)`. Both families
    /// are closed under this map; it realizes the exact scaling evolution.
    pub fn scaled(&self, arg_scale: f64, prefactor: f64) -> Self {
        assert!(arg_scale > 0.0 && arg_scale.is_finite() && prefactor.is_finite());
        match self.family {
            PacketFamily::Bump { center, half_width } => AnalyticPacket {
                family: PacketFamily::Bump {
                    center: center / arg_scale,
                    half_width: half_width / arg_scale,
                },
                amplitude: prefactor * self.amplitude,
            },
            PacketFamily::GaussHermite { center, width, degree } => AnalyticPacket {
                family: PacketFamily::GaussHermite {
                    center: center / arg_scale,
                    width: width / arg_scale,
                    degree,
                },
                amplitude: prefactor * self.amplitude * arg_scale.powi(degree as i32),
            },
        }
    }

    /// New packet equal to `self(-x)`.
    pub fn reflected(&self) -> Self {
        match self.family {
            PacketFamily::Bump { center, half_width } => AnalyticPacket {
                family: PacketFamily::Bump { center: -center, half_width },
                amplitude: self.amplitude,
            },
            PacketFamily::GaussHermite { center, width, degree } => AnalyticPacket {
                family: PacketFamily::GaussHermite { center: -center, width, degree },
                amplitude: if degree % 2 == 0 { self.amplitude } else { -self.amplitude },
            },
        }
    }

    /// Human-readable descriptor for provenance records.
    pub fn describe(&self) -> String {
        match self.family {
            PacketFamily::Bump { center, half_width } => format!(
                "Bump(center={center}, half_width={half_width}, amplitude={})",
                self.amplitude
            ),
            PacketFamily::GaussHermite { center, width, degree } => format!(
                "GaussHermite(center={center}, width={width}, degree={degree}, amplitude={})",
                self.amplitude
            ),
        }
    }
}
