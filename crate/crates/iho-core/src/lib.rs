//! Verified numerical laboratory for the inverted harmonic oscillator.
//!
//! The crate is organised around one Hamiltonian, H = (p^2 - q^2)/2, written
//! in the canonical light-cone pair v = (p+q)/sqrt(2), u = (p-q)/sqrt(2)
//! where H = v*u and the flow is the exact scaling v -> v e^t, u -> u e^-t.
//! Everything else — the oscillator representations and the generalized
//! (Gamow) eigenfunction expansions built on them, the survival amplitude,
//! the statistical Liouville evolution, and the Wigner-function bridge —
//! is implemented twice: once through the structured fast path and once
//! through slow independent oracles, and the two are compared in the test
//! suites rather than trusted.
//!
//! Layering, bottom up:
//! * [`error`], [`phase`] — shared error type; points, canonical maps, flow.
//! * [`series`], [`special`], [`packet`] — exact Taylor arithmetic and the
//!   two closed analytic packet families built on it.
//! * [`grid`], [`quad`], [`interp`], [`czt`] — sampled functions with
//!   provenance, quadrature, local interpolation, chirp-z transforms.
//! * [`reps`] — unitary maps between the q, v, u representations.
//! * [`fdiff`] — high-order numerical differentiation (oracle side).
//! * [`gamow`] — the quantum expansion: coefficients, survival amplitude,
//!   scaling evolution, time reversal, eigenfunction residual checks.
//! * [`stat`] — the classical-statistical expansion over phase-space
//!   densities and the Liouville evolution.
//! * [`wigner`] — Wigner functions connecting the two pictures.
//! * [`oracle`] — independent slow references (direct propagator, split
//!   step, brute-force quadrature, Cauchy-integral derivatives, Monte
//!   Carlo transport) with machine-readable reports.
//! * [`corpus`] — the named packet corpus used by the regression suites.
//! * [`verify`] — end-to-end verification scenarios used by the binary.

pub mod error;
pub mod fdiff;
pub mod phase;
pub mod series;
pub mod special;
pub mod packet;
pub mod report;
pub mod quad;
pub mod interp;
pub mod grid;
pub mod czt;
pub mod gamow;
pub mod reps;
pub mod stat;
pub mod wigner;
pub mod oracle;
pub mod corpus;
pub mod verify;

pub use error::{Error, Result};
