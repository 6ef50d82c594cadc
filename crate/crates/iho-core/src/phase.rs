//! Classical phase space of the inverted oscillator.
//!
//! Everything here is dimensionless: H = (p^2 - q^2)/2. The canonical map
//! v = (p+q)/sqrt(2), u = (p-q)/sqrt(2) factorizes the Hamiltonian into
//! H = v*u and diagonalizes the flow, v(t) = v0*e^t, u(t) = u0*e^(-t).
//! Physical-unit conversions are provided for I/O only; no internal routine
//! carries units.

use crate::error::{Error, Result};

pub const SQRT_2: f64 = std::f64::consts::SQRT_2;

/// A point in the (q, p) phase plane. Components are finite reals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhasePoint {
    pub q: f64,
    pub p: f64,
}

/// The same point in the expanding/contracting coordinates (v, u).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FiberPoint {
    pub v: f64,
    pub u: f64,
}

impl PhasePoint {
    /// Panics on NaN/infinite components; finiteness is a structural invariant.
    pub fn new(q: f64, p: f64) -> Self {
        assert!(q.is_finite() && p.is_finite(), "PhasePoint must be finite");
        Self { q, p }
    }
}

impl FiberPoint {
    pub fn new(v: f64, u: f64) -> Self {
        assert!(v.is_finite() && u.is_finite(), "FiberPoint must be finite");
        Self { v, u }
    }
}

/// v = (p+q)/sqrt(2), u = (p-q)/sqrt(2).
pub fn to_fiber(x: PhasePoint) -> FiberPoint {
    FiberPoint {
        v: (x.p + x.q) / SQRT_2,
        u: (x.p - x.q) / SQRT_2,
    }
}

/// Inverse of [`to_fiber`]: q = (v-u)/sqrt(2), p = (v+u)/sqrt(2).
pub fn to_phase(x: FiberPoint) -> PhasePoint {
    PhasePoint {
        q: (x.v - x.u) / SQRT_2,
        p: (x.v + x.u) / SQRT_2,
    }
}

/// H = (p^2 - q^2)/2.
pub fn hamiltonian_qp(x: PhasePoint) -> f64 {
    0.5 * (x.p * x.p - x.q * x.q)
}

/// H = v*u; equal to [`hamiltonian_qp`] on corresponding points.
pub fn hamiltonian_vu(x: FiberPoint) -> f64 {
    x.v * x.u
}

/// Exact flow of the inverted oscillator: (v, u) -> (v e^t, u e^(-t)).
///
/// The flow is reported as an error (not saturated) when it leaves the
/// representable range.
pub fn evolve_classical(x: FiberPoint, t: f64) -> Result<FiberPoint> {
    if !t.is_finite() {
        return Err(Error::Overflow(format!("non-finite time {t}")));
    }
    let v = x.v * t.exp();
    let u = x.u * (-t).exp();
    if !(v.is_finite() && u.is_finite()) {
        return Err(Error::Overflow(format!(
            "flow at t = {t} from (v, u) = ({}, {}) leaves f64 range",
            x.v, x.u
        )));
    }
    Ok(FiberPoint { v, u })
}

/// Classical time reversal: (v, u) -> (-u, -v); equivalently p -> -p.
pub fn time_reverse_classical(x: FiberPoint) -> FiberPoint {
    FiberPoint { v: -x.u, u: -x.v }
}

/// Physical scales for converting laboratory data to the dimensionless
/// variables used everywhere else. I/O only.
///
/// Lengths divide by sqrt(hbar/(m*omega)), momenta by sqrt(m*omega*hbar),
/// times multiply by omega.
#[derive(Debug, Clone, Copy)]
pub struct UnitScales {
    pub mass: f64,
    pub omega: f64,
    pub hbar: f64,
}

impl UnitScales {
    pub fn length(&self) -> f64 {
        (self.hbar / (self.mass * self.omega)).sqrt()
    }
    pub fn momentum(&self) -> f64 {
        (self.mass * self.omega * self.hbar).sqrt()
    }
    pub fn time(&self) -> f64 {
        1.0 / self.omega
    }
    pub fn to_dimensionless(&self, q: f64, p: f64, t: f64) -> (PhasePoint, f64) {
        (
            PhasePoint::new(q / self.length(), p / self.momentum()),
            t / self.time(),
        )
    }
    pub fn from_dimensionless(&self, x: PhasePoint, t: f64) -> (f64, f64, f64) {
        (x.q * self.length(), x.p * self.momentum(), t * self.time())
    }
}
