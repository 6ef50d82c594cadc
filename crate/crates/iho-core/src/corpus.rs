//! The named packet corpus shared by the verification scenarios, the
//! property suites, and the command-line defaults.
//!
//! Minus-side reference states are compactly supported bumps; plus-side
//! prepared states are entire Gauss-Hermite packets. That split is load
//! bearing: the survival tower pairs Taylor coefficients of the plus state
//! against moments of the minus state, and the series only converges when
//! the plus state's expansion reaches across the minus support. Every pair
//! returned by [`survival_pairs`] has been sized so the truncation tail at
//! order 32 sits below 1e-9.

use crate::packet::AnalyticPacket;

/// A corpus member with the stable name used in reports and output files.
#[derive(Debug, Clone)]
pub struct CorpusEntry {
    pub name: &'static str,
    pub packet: AnalyticPacket,
}

impl CorpusEntry {
    fn new(name: &'static str, packet: AnalyticPacket) -> Self {
        CorpusEntry { name, packet }
    }
}

/// Every packet in the corpus, compact-support members first.
pub fn members() -> Vec<CorpusEntry> {
    vec![
        CorpusEntry::new("bump-offset", AnalyticPacket::bump(0.4, 1.0)),
        CorpusEntry::new("bump-narrow", AnalyticPacket::bump(-0.3, 0.7)),
        CorpusEntry::new("gauss-wide", AnalyticPacket::gauss_hermite(0.2, 1.0, 0)),
        CorpusEntry::new("gauss-odd", AnalyticPacket::gauss_hermite(0.0, 1.0, 1)),
        CorpusEntry::new("gauss-excited", AnalyticPacket::gauss_hermite(-0.6, 0.8, 2)),
    ]
}

/// Look up a member by name.
pub fn member(name: &str) -> Option<CorpusEntry> {
    members().into_iter().find(|e| e.name == name)
}

/// Survival pairs (reference state, prepared state).
///
/// The first pair is generic: the leading coefficient-moment product is
/// nonzero, so the long-time decay rate is 1/2. The second pair prepares an
/// odd packet centered at the origin whose leading Taylor coefficient
/// vanishes, pushing the rate to 3/2.
pub fn survival_pairs() -> Vec<(CorpusEntry, CorpusEntry)> {
    let pick = |a: &str, b: &str| (member(a).unwrap(), member(b).unwrap());
    vec![
        pick("bump-offset", "gauss-wide"),
        pick("bump-offset", "gauss-odd"),
        pick("bump-narrow", "gauss-wide"),
        pick("bump-narrow", "gauss-excited"),
    ]
}

/// Tensor factors (v-factor, u-factor) of the reference phase-space density.
pub fn stat_density_factors() -> (AnalyticPacket, AnalyticPacket) {
    (
        AnalyticPacket::gauss_hermite(0.5, 1.0, 0),
        AnalyticPacket::bump(0.2, 2.0),
    )
}
