//! Sampled wavefunctions: a complex-valued function on a uniform grid,
//! tagged with the representation (q, v, or u) it lives in.
//!
//! CSV layout (pinned, round-trips f64 exactly at 17 significant digits):
//!   # rep=<Q|V|U> x0=<…> dx=<…> n=<…>
//!   x,re,im
//!   <x>,<re>,<im>

use std::fmt::Write as _;
use std::str::FromStr;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::interp::interp_uniform;
use crate::packet::AnalyticPacket;
use crate::quad::trapezoid;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Representation {
    Q,
    V,
    U,
}

impl Representation {
    pub fn label(self) -> &'static str {
        match self {
            Representation::Q => "Q",
            Representation::V => "V",
            Representation::U => "U",
        }
    }
}

impl FromStr for Representation {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_uppercase().as_str() {
            "Q" => Ok(Representation::Q),
            "V" => Ok(Representation::V),
            "U" => Ok(Representation::U),
            other => Err(Error::Rep(format!("unknown representation {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GridFunction1D {
    pub rep: Representation,
    pub x0: f64,
    pub dx: f64,
    pub values: Vec<Complex64>,
}

impl GridFunction1D {
    pub fn new(rep: Representation, x0: f64, dx: f64, values: Vec<Complex64>) -> Result<Self> {
        if !(dx.is_finite() && dx > 0.0) {
            return Err(Error::Invalid(format!("dx must be finite and positive, got {dx}")));
        }
        if !x0.is_finite() {
            return Err(Error::Invalid(format!("x0 must be finite, got {x0}")));
        }
        if values.len() < 2 {
            return Err(Error::Invalid(format!(
                "grid needs at least 2 samples, got {}",
                values.len()
            )));
        }
        Ok(GridFunction1D { rep, x0, dx, values })
    }

    pub fn n(&self) -> usize {
        self.values.len()
    }

    pub fn x(&self, k: usize) -> f64 {
        self.x0 + k as f64 * self.dx
    }

    pub fn x_end(&self) -> f64 {
        self.x(self.n() - 1)
    }

    /// Largest |x| on the grid (the extent that enters Nyquist bounds).
    pub fn extent(&self) -> f64 {
        self.x0.abs().max(self.x_end().abs())
    }

    /// Sample an arbitrary function on an explicit axis.
    pub fn sample_fn(
        rep: Representation,
        x0: f64,
        dx: f64,
        n: usize,
        f: impl Fn(f64) -> Complex64,
    ) -> Result<Self> {
        let values = (0..n).map(|k| f(x0 + k as f64 * dx)).collect();
        GridFunction1D::new(rep, x0, dx, values)
    }

    /// Sample an analytic packet; the grid must cover the packet's declared
    /// coverage interval (the support for Bump, ≥ 8 widths for GaussHermite).
    pub fn sample_packet(
        p: &AnalyticPacket,
        rep: Representation,
        x0: f64,
        dx: f64,
        n: usize,
    ) -> Result<Self> {
        let (lo, hi) = p.coverage_requirement();
        let x_end = x0 + (n - 1) as f64 * dx;
        if x0 > lo || x_end < hi {
            return Err(Error::Domain(format!(
                "grid [{x0}, {x_end}] does not cover packet requirement [{lo}, {hi}] for {}",
                p.describe()
            )));
        }
        Self::sample_fn(rep, x0, dx, n, |x| Complex64::new(p.eval(x), 0.0))
    }

    /// Evenly spaced grid over [lo, hi] inclusive.
    pub fn axis_points(lo: f64, hi: f64, n: usize) -> (f64, f64) {
        assert!(n >= 2 && hi > lo);
        (lo, (hi - lo) / (n - 1) as f64)
    }

    pub fn same_axis(&self, other: &Self) -> bool {
        self.rep == other.rep
            && self.x0 == other.x0
            && self.dx == other.dx
            && self.n() == other.n()
    }

    fn require_same_axis(&self, other: &Self) -> Result<()> {
        if !self.same_axis(other) {
            return Err(Error::GridMismatch(format!(
                "axes differ: ({} x0={} dx={} n={}) vs ({} x0={} dx={} n={})",
                self.rep.label(),
                self.x0,
                self.dx,
                self.n(),
                other.rep.label(),
                other.x0,
                other.dx,
                other.n()
            )));
        }
        Ok(())
    }

    /// Trapezoid L² norm squared.
    pub fn norm_sq(&self) -> f64 {
        let sq: Vec<f64> = self.values.iter().map(|z| z.norm_sqr()).collect();
        trapezoid(&sq, self.dx)
    }

    pub fn norm(&self) -> f64 {
        self.norm_sq().sqrt()
    }

    /// Trapezoid inner product ∫ conj(self)·other dx on a shared axis.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        self.require_same_axis(other)?;
        let prod: Vec<Complex64> = self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| a.conj() * b)
            .collect();
        Ok(crate::quad::trapezoid_complex(&prod, self.dx))
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Sup-norm distance on a shared axis.
    pub fn sup_diff(&self, other: &Self) -> Result<f64> {
        self.require_same_axis(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }

    /// Barycentric interpolation at x (zero outside the grid).
    pub fn interp_at(&self, x: f64) -> Complex64 {
        interp_uniform(&self.values, self.x0, self.dx, x)
    }

    pub fn map(&self, f: impl Fn(f64, Complex64) -> Complex64) -> Self {
        let values = self
            .values
            .iter()
            .enumerate()
            .map(|(k, &z)| f(self.x(k), z))
            .collect();
        GridFunction1D { rep: self.rep, x0: self.x0, dx: self.dx, values }
    }

    pub fn scaled(&self, c: Complex64) -> Self {
        self.map(|_, z| c * z)
    }

    pub fn conjugated(&self) -> Self {
        self.map(|_, z| z.conj())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.n() * 64 + 80);
        writeln!(
            out,
            "# rep={} x0={:.16e} dx={:.16e} n={}",
            self.rep.label(),
            self.x0,
            self.dx,
            self.n()
        )
        .unwrap();
        out.push_str("x,re,im\n");
        for (k, z) in self.values.iter().enumerate() {
            writeln!(out, "{:.16e},{:.16e},{:.16e}", self.x(k), z.re, z.im).unwrap();
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self> {
        let mut lines = text.lines();
        let header = lines
            .next()
            .ok_or_else(|| Error::Invalid("empty CSV".into()))?;
        let header = header
            .strip_prefix("# ")
            .ok_or_else(|| Error::Invalid("missing `# rep=…` header".into()))?;
        let mut rep = None;
        let mut x0 = None;
        let mut dx = None;
        let mut n = None;
        for kv in header.split_whitespace() {
            let (key, val) = kv
                .split_once('=')
                .ok_or_else(|| Error::Invalid(format!("bad header field {kv:?}")))?;
            match key {
                "rep" => rep = Some(val.parse::<Representation>()?),
                "x0" => x0 = Some(parse_f64(val)?),
                "dx" => dx = Some(parse_f64(val)?),
                "n" => {
                    n = Some(val.parse::<usize>().map_err(|_| {
                        Error::Invalid(format!("bad n in header: {val:?}"))
                    })?)
                }
                other => return Err(Error::Invalid(format!("unknown header key {other:?}"))),
            }
        }
        let (rep, x0, dx, n) = match (rep, x0, dx, n) {
            (Some(r), Some(a), Some(d), Some(m)) => (r, a, d, m),
            _ => return Err(Error::Invalid("incomplete CSV header".into())),
        };
        let cols = lines
            .next()
            .ok_or_else(|| Error::Invalid("missing column header".into()))?;
        if cols.trim() != "x,re,im" {
            return Err(Error::Invalid(format!("unexpected columns {cols:?}")));
        }
        let mut values = Vec::with_capacity(n);
        for line in lines {
            if line.trim().is_empty() {
                continue;
            }
            let mut parts = line.split(',');
            let _x = parts.next();
            let re = parse_f64(parts.next().unwrap_or(""))?;
            let im = parse_f64(parts.next().unwrap_or(""))?;
            values.push(Complex64::new(re, im));
        }
        if values.len() != n {
            return Err(Error::Invalid(format!(
                "header declares n={n} but found {} rows",
                values.len()
            )));
        }
        GridFunction1D::new(rep, x0, dx, values)
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    f64::from_str(s.trim()).map_err(|_| Error::Invalid(format!("bad float {s:?}")))
}
