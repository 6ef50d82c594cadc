//! Declarative experiment configuration.
//!
//! One structured text file (section headers, key = value lines) plus the
//! subcommand name fully determines a run. Every field has a default, every
//! flag overrides the file, and the resolved result is echoed into the run
//! manifest, so a manifest alone is enough to reproduce any output. The
//! output destination is deliberately not part of the experiment identity.

use std::fs;
use std::path::Path;

use iho_core::grid::Representation;
use iho_core::packet::AnalyticPacket;
use serde::{Deserialize, Serialize};

/// Whole-run configuration in resolved form.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ExperimentSpec {
    pub run: RunSection,
    pub grid: GridSection,
    pub packets: PacketsSection,
    pub time: TimeSection,
    pub truncation: TruncationSection,
    pub tolerances: ToleranceSection,
    pub classical: ClassicalSection,
    pub transform: TransformSection,
    pub coeffs: CoeffsSection,
    pub survival: SurvivalSection,
    pub liouville: LiouvilleSection,
    pub wigner: WignerSection,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
    /// Output directory; stripped from manifests (destination is not data).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<String>,
}

impl Default for RunSection {
    fn default() -> Self {
        RunSection { seed: 42, output: None }
    }
}

/// Shared 1-d axis for sampled states: `n` points spanning [lo, hi].
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GridSection {
    pub rep: String,
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
}

impl Default for GridSection {
    fn default() -> Self {
        GridSection { rep: "V".into(), lo: -16.0, hi: 16.0, n: 1024 }
    }
}

impl GridSection {
    pub fn spacing(&self) -> f64 {
        (self.hi - self.lo) / (self.n.max(2) - 1) as f64
    }

    pub fn representation(&self) -> Result<Representation, String> {
        parse_rep(&self.rep, "grid.rep")
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketsSection {
    pub minus: PacketSpec,
    pub plus: PacketSpec,
}

// Role-aware defaults: a compactly supported minus against an entire plus,
// the canonical admissible pair.
impl Default for PacketsSection {
    fn default() -> Self {
        PacketsSection {
            minus: PacketSpec {
                family: "bump".into(),
                center: 0.4,
                half_width: Some(1.0),
                width: None,
                degree: None,
            },
            plus: PacketSpec {
                family: "gauss-hermite".into(),
                center: 0.2,
                half_width: None,
                width: Some(1.0),
                degree: Some(0),
            },
        }
    }
}

/// One analytic packet: `family` is "bump" (compactly supported, needs
/// `half_width`) or "gauss-hermite" (entire, needs `width` and optionally
/// `degree`).
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PacketSpec {
    pub family: String,
    pub center: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub half_width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub width: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub degree: Option<usize>,
}

// Neutral: a partially written packet section must spell out its own
// parameters rather than inherit another role's.
impl Default for PacketSpec {
    fn default() -> Self {
        PacketSpec {
            family: "bump".into(),
            center: 0.0,
            half_width: None,
            width: None,
            degree: None,
        }
    }
}

impl PacketSpec {
    /// Build the packet, or explain which field is wrong. `role` is the
    /// config path ("packets.minus") used in diagnostics.
    pub fn build(&self, role: &str) -> Result<AnalyticPacket, String> {
        if !self.center.is_finite() {
            return Err(format!("{role}.center: must be finite (got {})", self.center));
        }
        match self.family.as_str() {
            "bump" => {
                if self.width.is_some() || self.degree.is_some() {
                    return Err(format!(
                        "{role}: width/degree apply to family \"gauss-hermite\", not \"bump\""
                    ));
                }
                let hw = self
                    .half_width
                    .ok_or_else(|| format!("{role}.half_width: required for family \"bump\""))?;
                if !(hw.is_finite() && hw > 0.0) {
                    return Err(format!("{role}.half_width: must be positive (got {hw})"));
                }
                Ok(AnalyticPacket::bump(self.center, hw))
            }
            "gauss-hermite" => {
                if self.half_width.is_some() {
                    return Err(format!(
                        "{role}.half_width: applies to family \"bump\", not \"gauss-hermite\""
                    ));
                }
                let w = self
                    .width
                    .ok_or_else(|| format!("{role}.width: required for family \"gauss-hermite\""))?;
                if !(w.is_finite() && w > 0.0) {
                    return Err(format!("{role}.width: must be positive (got {w})"));
                }
                let degree = self.degree.unwrap_or(0);
                if degree > 16 {
                    return Err(format!("{role}.degree: must be at most 16 (got {degree})"));
                }
                Ok(AnalyticPacket::gauss_hermite_normalized(self.center, w, degree))
            }
            other => Err(format!(
                "{role}.family: unknown family {other:?} (expected \"bump\" or \"gauss-hermite\")"
            )),
        }
    }
}

/// Uniform time grid: `steps` samples from t0 to t1 inclusive.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TimeSection {
    pub t0: f64,
    pub t1: f64,
    pub steps: usize,
}

impl Default for TimeSection {
    fn default() -> Self {
        TimeSection { t0: 0.0, t1: 8.0, steps: 33 }
    }
}

impl TimeSection {
    pub fn times(&self) -> Vec<f64> {
        if self.steps <= 1 {
            return vec![self.t0];
        }
        let dt = (self.t1 - self.t0) / (self.steps - 1) as f64;
        (0..self.steps).map(|k| self.t0 + dt * k as f64).collect()
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncationSection {
    pub order: usize,
}

impl Default for TruncationSection {
    fn default() -> Self {
        TruncationSection { order: 32 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ToleranceSection {
    /// Truncation-tail budget for series evaluations.
    pub tail: f64,
    /// Captured-mass deficit allowed when a transform lands on a finite window.
    pub mass_fraction: f64,
}

impl Default for ToleranceSection {
    fn default() -> Self {
        ToleranceSection { tail: 1e-9, mass_fraction: 1e-10 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ClassicalSection {
    /// Initial (v, u) points.
    pub points: Vec<[f64; 2]>,
}

impl Default for ClassicalSection {
    fn default() -> Self {
        ClassicalSection {
            points: vec![[1.0, 0.5], [-2.0, 0.25], [0.3, -1.4]],
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TransformSection {
    /// Which packet to transform: "plus" or "minus".
    pub source: String,
    pub to: String,
}

impl Default for TransformSection {
    fn default() -> Self {
        TransformSection { source: "plus".into(), to: "Q".into() }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CoeffsSection {
    /// Radius the recorded tail estimate refers to.
    pub eval_radius: f64,
}

impl Default for CoeffsSection {
    fn default() -> Self {
        CoeffsSection { eval_radius: 3.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SurvivalSection {
    /// Window for the fitted log-slope recorded in the metadata.
    pub fit_lo: f64,
    pub fit_hi: f64,
}

impl Default for SurvivalSection {
    fn default() -> Self {
        SurvivalSection { fit_lo: 4.0, fit_hi: 8.0 }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LiouvilleSection {
    /// Square phase-space window [lo, hi] x [lo, hi] with n points per axis.
    pub lo: f64,
    pub hi: f64,
    pub n: usize,
    pub t: f64,
    /// Cross-check the transported density against seeded Monte-Carlo
    /// transport (requires a nonnegative density: plus degree 0).
    pub mc_check: bool,
    pub mc_samples: usize,
    pub mc_blocks: usize,
}

impl Default for LiouvilleSection {
    fn default() -> Self {
        LiouvilleSection {
            lo: -8.0,
            hi: 8.0,
            n: 256,
            t: 0.5,
            mc_check: true,
            mc_samples: 100_000,
            mc_blocks: 12,
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct WignerSection {
    /// Time for the transport-consistency residual.
    pub t: f64,
    /// Row probed for the dual-direction decay exponent; defaults to the
    /// minus packet's center.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub v_probe: Option<f64>,
    pub band_lo: f64,
    pub band_hi: f64,
}

impl Default for WignerSection {
    fn default() -> Self {
        WignerSection { t: 0.5, v_probe: None, band_lo: 10.0, band_hi: 40.0 }
    }
}

/// Flag-level overrides; each one, when present, replaces the file value.
#[derive(Debug, Clone, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub tol: Option<f64>,
    pub order: Option<usize>,
    pub grid: Option<(f64, f64, usize)>,
    pub output: Option<String>,
}

/// Parse "LO:HI:N" for the --grid flag.
pub fn parse_grid_flag(s: &str) -> Result<(f64, f64, usize), String> {
    let parts: Vec<&str> = s.split(':').map(str::trim).collect();
    if parts.len() != 3 {
        return Err(format!("--grid: expected LO:HI:N, got {s:?}"));
    }
    let lo: f64 = parts[0]
        .parse()
        .map_err(|_| format!("--grid: LO must be a number, got {:?}", parts[0]))?;
    let hi: f64 = parts[1]
        .parse()
        .map_err(|_| format!("--grid: HI must be a number, got {:?}", parts[1]))?;
    let n: usize = parts[2]
        .parse()
        .map_err(|_| format!("--grid: N must be a positive integer, got {:?}", parts[2]))?;
    Ok((lo, hi, n))
}

pub fn load(path: Option<&Path>) -> Result<ExperimentSpec, String> {
    match path {
        None => Ok(ExperimentSpec::default()),
        Some(p) => {
            let text = fs::read_to_string(p)
                .map_err(|e| format!("config {}: {e}", p.display()))?;
            toml::from_str(&text).map_err(|e| format!("config {}: {e}", p.display()))
        }
    }
}

pub fn apply_overrides(spec: &mut ExperimentSpec, ov: &Overrides) {
    if let Some(seed) = ov.seed {
        spec.run.seed = seed;
    }
    if let Some(tol) = ov.tol {
        spec.tolerances.tail = tol;
        spec.tolerances.mass_fraction = tol;
    }
    if let Some(order) = ov.order {
        spec.truncation.order = order;
    }
    if let Some((lo, hi, n)) = ov.grid {
        spec.grid.lo = lo;
        spec.grid.hi = hi;
        spec.grid.n = n;
    }
    if let Some(out) = &ov.output {
        spec.run.output = Some(out.clone());
    }
}

impl ExperimentSpec {
    /// Validate everything the given subcommand will read; the first
    /// failure names the offending field.
    pub fn validate_for(&self, command: &str) -> Result<(), String> {
        self.validate_common()?;
        match command {
            "classical" => self.validate_classical(),
            "transform" => self.validate_transform(),
            "coeffs" => self.validate_coeffs(),
            "survival" => self.validate_survival(),
            "evolve" => self.validate_evolve(),
            "liouville" => self.validate_liouville(),
            "wigner" => self.validate_wigner(),
            "verify" => Ok(()),
            other => Err(format!("unknown command {other:?}")),
        }
    }

    fn validate_common(&self) -> Result<(), String> {
        let g = &self.grid;
        if !(g.lo.is_finite() && g.hi.is_finite()) {
            return Err(format!("grid: lo/hi must be finite (got {}, {})", g.lo, g.hi));
        }
        if g.hi <= g.lo {
            return Err(format!(
                "grid.hi: must exceed grid.lo so the spacing is positive (got lo = {}, hi = {})",
                g.lo, g.hi
            ));
        }
        if !(8..=65_536).contains(&g.n) {
            return Err(format!("grid.n: must be between 8 and 65536 (got {})", g.n));
        }
        g.representation()?;
        self.packets.minus.build("packets.minus")?;
        self.packets.plus.build("packets.plus")?;
        let t = &self.time;
        if !(t.t0.is_finite() && t.t1.is_finite()) {
            return Err(format!("time: t0/t1 must be finite (got {}, {})", t.t0, t.t1));
        }
        if t.t0.abs() > 50.0 || t.t1.abs() > 50.0 {
            return Err(format!(
                "time: |t0| and |t1| must be at most 50 (got {}, {})",
                t.t0, t.t1
            ));
        }
        if !(1..=100_000).contains(&t.steps) {
            return Err(format!("time.steps: must be between 1 and 100000 (got {})", t.steps));
        }
        if !(1..=60).contains(&self.truncation.order) {
            return Err(format!(
                "truncation.order: must be between 1 and 60, leaving tail-window room \
                 below the exact-series limit (got {})",
                self.truncation.order
            ));
        }
        let tol = &self.tolerances;
        if !(tol.tail.is_finite() && tol.tail > 0.0 && tol.tail < 1.0) {
            return Err(format!("tolerances.tail: must be in (0, 1) (got {})", tol.tail));
        }
        if !(tol.mass_fraction.is_finite() && tol.mass_fraction > 0.0 && tol.mass_fraction < 1.0) {
            return Err(format!(
                "tolerances.mass_fraction: must be in (0, 1) (got {})",
                tol.mass_fraction
            ));
        }
        Ok(())
    }

    fn validate_classical(&self) -> Result<(), String> {
        let pts = &self.classical.points;
        if pts.is_empty() || pts.len() > 10_000 {
            return Err(format!(
                "classical.points: need between 1 and 10000 points (got {})",
                pts.len()
            ));
        }
        for (k, p) in pts.iter().enumerate() {
            if !(p[0].is_finite() && p[1].is_finite()) {
                return Err(format!(
                    "classical.points[{k}]: coordinates must be finite (got [{}, {}])",
                    p[0], p[1]
                ));
            }
        }
        Ok(())
    }

    fn validate_transform(&self) -> Result<(), String> {
        source_packet(&self.transform.source)?;
        let to = parse_rep(&self.transform.to, "transform.to")?;
        if to == self.grid.representation()? {
            return Err(format!(
                "transform.to: must differ from grid.rep (both are {:?})",
                self.transform.to
            ));
        }
        Ok(())
    }

    fn validate_coeffs(&self) -> Result<(), String> {
        let r = self.coeffs.eval_radius;
        if !(r.is_finite() && r > 0.0 && r <= 100.0) {
            return Err(format!("coeffs.eval_radius: must be in (0, 100] (got {r})"));
        }
        Ok(())
    }

    fn validate_survival(&self) -> Result<(), String> {
        let s = &self.survival;
        if !(s.fit_lo.is_finite() && s.fit_hi.is_finite() && s.fit_hi > s.fit_lo) {
            return Err(format!(
                "survival.fit_hi: fit window must be finite with fit_hi > fit_lo \
                 (got [{}, {}])",
                s.fit_lo, s.fit_hi
            ));
        }
        Ok(())
    }

    fn validate_evolve(&self) -> Result<(), String> {
        if self.grid.representation()? == Representation::Q {
            return Err(
                "grid.rep: scaling evolution is closed in V and U; use those \
                 representations for evolve"
                    .into(),
            );
        }
        Ok(())
    }

    fn validate_liouville(&self) -> Result<(), String> {
        let l = &self.liouville;
        if !(l.lo.is_finite() && l.hi.is_finite() && l.hi > l.lo) {
            return Err(format!(
                "liouville.hi: must exceed liouville.lo (got lo = {}, hi = {})",
                l.lo, l.hi
            ));
        }
        if !(16..=1024).contains(&l.n) {
            return Err(format!("liouville.n: must be between 16 and 1024 (got {})", l.n));
        }
        if !(l.t.is_finite() && l.t.abs() <= 12.0) {
            return Err(format!("liouville.t: must satisfy |t| <= 12 (got {})", l.t));
        }
        if l.mc_check {
            if l.mc_samples < 10_000 {
                return Err(format!(
                    "liouville.mc_samples: Monte-Carlo check needs at least 10000 samples \
                     (got {})",
                    l.mc_samples
                ));
            }
            if !(2..=64).contains(&l.mc_blocks) {
                return Err(format!(
                    "liouville.mc_blocks: must be between 2 and 64 (got {})",
                    l.mc_blocks
                ));
            }
            if self.packets.plus.degree.unwrap_or(0) > 0 {
                return Err(format!(
                    "packets.plus.degree: the Monte-Carlo check needs a nonnegative \
                     density, so degree must be 0 when liouville.mc_check is set \
                     (got {})",
                    self.packets.plus.degree.unwrap_or(0)
                ));
            }
        }
        Ok(())
    }

    fn validate_wigner(&self) -> Result<(), String> {
        if self.grid.representation()? == Representation::Q {
            return Err(
                "grid.rep: the phase-space bridge reads V or U data; transform \
                 Q-representation states first"
                    .into(),
            );
        }
        let w = &self.wigner;
        if !(w.t.is_finite() && w.t.abs() <= 12.0) {
            return Err(format!("wigner.t: must satisfy |t| <= 12 (got {})", w.t));
        }
        if !(w.band_lo.is_finite() && w.band_hi.is_finite() && 0.0 < w.band_lo && w.band_lo < w.band_hi)
        {
            return Err(format!(
                "wigner.band_hi: decay band must satisfy 0 < band_lo < band_hi \
                 (got [{}, {}])",
                w.band_lo, w.band_hi
            ));
        }
        let dual_extent = std::f64::consts::PI / (2.0 * self.grid.spacing());
        if w.band_hi > dual_extent {
            return Err(format!(
                "wigner.band_hi: exceeds the dual-axis extent {dual_extent:.3} set by the \
                 grid spacing (got {})",
                w.band_hi
            ));
        }
        if let Some(v) = w.v_probe {
            if !(v.is_finite() && v >= self.grid.lo && v <= self.grid.hi) {
                return Err(format!(
                    "wigner.v_probe: must lie inside [grid.lo, grid.hi] (got {v})"
                ));
            }
        }
        Ok(())
    }
}

pub fn source_packet(source: &str) -> Result<bool, String> {
    match source {
        "minus" => Ok(false),
        "plus" => Ok(true),
        other => Err(format!(
            "transform.source: expected \"minus\" or \"plus\", got {other:?}"
        )),
    }
}

pub fn parse_rep(s: &str, field: &str) -> Result<Representation, String> {
    match s {
        "Q" | "q" => Ok(Representation::Q),
        "V" | "v" => Ok(Representation::V),
        "U" | "u" => Ok(Representation::U),
        other => Err(format!("{field}: expected one of Q, V, U (got {other:?})")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_validate_for_every_command() {
        let spec = load(None).unwrap();
        for cmd in [
            "classical",
            "transform",
            "coeffs",
            "survival",
            "evolve",
            "liouville",
            "wigner",
            "verify",
        ] {
            spec.validate_for(cmd).unwrap_or_else(|e| panic!("{cmd}: {e}"));
        }
    }

    #[test]
    fn default_plus_is_entire() {
        let spec = load(None).unwrap();
        assert_eq!(spec.packets.plus.family, "gauss-hermite");
        assert!(spec.packets.plus.build("packets.plus").unwrap().is_entire());
        assert!(!spec.packets.minus.build("packets.minus").unwrap().is_entire());
    }

    #[test]
    fn inverted_window_names_the_grid_fields() {
        let mut spec = load(None).unwrap();
        spec.grid.lo = 5.0;
        spec.grid.hi = -5.0;
        let err = spec.validate_for("classical").unwrap_err();
        assert!(err.contains("grid.hi"), "{err}");
    }

    #[test]
    fn packet_field_mixups_name_the_role() {
        let mut spec = load(None).unwrap();
        spec.packets.minus.half_width = Some(-1.0);
        let err = spec.validate_for("classical").unwrap_err();
        assert!(err.contains("packets.minus.half_width"), "{err}");

        let mut spec = load(None).unwrap();
        spec.packets.plus.width = None;
        let err = spec.validate_for("classical").unwrap_err();
        assert!(err.contains("packets.plus.width"), "{err}");
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let dir = std::env::temp_dir().join("iho-cli-config-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("bad.toml");
        fs::write(&path, "[grid]\nspacing = 0.1\n").unwrap();
        let err = load(Some(&path)).unwrap_err();
        assert!(err.contains("spacing"), "{err}");
    }

    #[test]
    fn overrides_replace_file_values() {
        let mut spec = load(None).unwrap();
        let ov = Overrides {
            seed: Some(7),
            tol: Some(1e-6),
            order: Some(12),
            grid: Some((-10.0, 10.0, 512)),
            output: Some("x".into()),
        };
        apply_overrides(&mut spec, &ov);
        assert_eq!(spec.run.seed, 7);
        assert_eq!(spec.tolerances.tail, 1e-6);
        assert_eq!(spec.tolerances.mass_fraction, 1e-6);
        assert_eq!(spec.truncation.order, 12);
        assert_eq!((spec.grid.lo, spec.grid.hi, spec.grid.n), (-10.0, 10.0, 512));
        assert_eq!(spec.run.output.as_deref(), Some("x"));
    }

    #[test]
    fn grid_flag_parses_and_rejects() {
        assert_eq!(parse_grid_flag("-4:4:64").unwrap(), (-4.0, 4.0, 64));
        assert!(parse_grid_flag("1:2").unwrap_err().contains("--grid"));
        assert!(parse_grid_flag("a:2:3").unwrap_err().contains("LO"));
    }

    #[test]
    fn explicit_plus_bump_survives_loading() {
        let dir = std::env::temp_dir().join("iho-cli-config-test");
        fs::create_dir_all(&dir).unwrap();
        let path = dir.join("plusbump.toml");
        fs::write(
            &path,
            "[packets.plus]\nfamily = \"bump\"\ncenter = -0.3\nhalf_width = 0.7\n",
        )
        .unwrap();
        let spec = load(Some(&path)).unwrap();
        assert_eq!(spec.packets.plus.family, "bump");
        assert_eq!(spec.packets.plus.center, -0.3);
    }
}
