//! Subcommand implementations.
//!
//! Each command runs one pipeline, writes its data files (CSV at full f64
//! round-trip precision, binary for 2-d fields) plus a metadata JSON, and
//! finishes with a run manifest listing every output and echoing the
//! resolved spec. Nothing time- or machine-dependent lands in the files, so
//! identical specs produce byte-identical output directories; wall-clock
//! figures only ever go to the verify JSONL stream on stdout.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use iho_core::gamow::{
    decaying_coeffs, evolve_packet, evolve_scaling, growing_coeffs, survival_amplitude,
    time_reverse,
};
use iho_core::grid::GridFunction1D;
use iho_core::oracle::{chi_square_blocks, mc_transport};
use iho_core::phase::{evolve_classical, hamiltonian_vu, to_phase, FiberPoint};
use iho_core::quad::packet_moment;
use iho_core::reps::{transform_onto, TargetAxis};
use iho_core::stat::{evolve_liouville, stat_coeffs, PhaseDensity2D};
use iho_core::verify;
use iho_core::wigner::{
    dynamics_residual, mirror_residual, off_support_max, row_decay_exponent, wigner,
};
use num_complex::Complex64;
use serde_json::json;

use crate::config::{parse_rep, source_packet, ExperimentSpec};

type CmdResult = Result<(), String>;

fn fail<E: std::fmt::Display>(e: E) -> String {
    e.to_string()
}

/// Collects written files so the manifest can list them.
struct Out<'a> {
    dir: &'a Path,
    files: Vec<String>,
}

impl<'a> Out<'a> {
    fn new(dir: &'a Path) -> Self {
        Out { dir, files: Vec::new() }
    }

    fn put(&mut self, name: &str, contents: impl AsRef<[u8]>) -> CmdResult {
        fs::write(self.dir.join(name), contents.as_ref())
            .map_err(|e| format!("writing {name}: {e}"))?;
        self.files.push(name.to_string());
        Ok(())
    }

    fn put_json(&mut self, name: &str, value: &serde_json::Value) -> CmdResult {
        let text = serde_json::to_string_pretty(value).map_err(fail)? + "\n";
        self.put(name, text)
    }

    /// Write the manifest (which lists itself) and close the run.
    fn finish(mut self, command: &str, spec: &ExperimentSpec) -> CmdResult {
        self.files.push("manifest.json".into());
        self.files.sort();
        // The destination is not part of the experiment identity.
        let mut canonical = spec.clone();
        canonical.run.output = None;
        let manifest = json!({
            "command": command,
            "spec": canonical,
            "outputs": self.files,
        });
        let text = serde_json::to_string_pretty(&manifest).map_err(fail)? + "\n";
        fs::write(self.dir.join("manifest.json"), text)
            .map_err(|e| format!("writing manifest.json: {e}"))
    }
}

fn sampled_grid(
    spec: &ExperimentSpec,
    packet: &iho_core::packet::AnalyticPacket,
) -> Result<GridFunction1D, String> {
    let rep = spec.grid.representation()?;
    let (x0, dx) = GridFunction1D::axis_points(spec.grid.lo, spec.grid.hi, spec.grid.n);
    GridFunction1D::sample_packet(packet, rep, x0, dx, spec.grid.n).map_err(fail)
}

pub fn classical(spec: &ExperimentSpec, dir: &Path) -> CmdResult {
    let mut out = Out::new(dir);
    let times = spec.time.times();
    let mut csv = String::from("point,t,v,u,q,p,h\n");
    let mut drift: f64 = 0.0;
    for (idx, p) in spec.classical.points.iter().enumerate() {
        let x0 = FiberPoint::new(p[0], p[1]);
        let h0 = hamiltonian_vu(x0);
        for &t in &times {
            let x = evolve_classical(x0, t).map_err(fail)?;
            let qp = to_phase(x);
            let h = hamiltonian_vu(x);
            drift = drift.max((h - h0).abs());
            let _ = writeln!(
                csv,
                "{idx},{t:.16e},{:.16e},{:.16e},{:.16e},{:.16e},{:.16e}",
                x.v, x.u, qp.q, qp.p, h
            );
        }
    }
    out.put("trajectories.csv", &csv)?;
    out.put_json(
        "metadata.json",
        &json!({
            "points": spec.classical.points.len(),
            "times": times.len(),
            "energy_drift_max": drift,
        }),
    )?;
    out.finish("classical", spec)
}

pub fn transform(spec: &ExperimentSpec, dir: &Path) -> CmdResult {
    let mut out = Out::new(dir);
    let packet = if source_packet(&spec.transform.source)? {
        spec.packets.plus.build("packets.plus")?
    } else {
        spec.packets.minus.build("packets.minus")?
    };
    let from = spec.grid.representation()?;
    let to = parse_rep(&spec.transform.to, "transform.to")?;
    let budget = spec.tolerances.mass_fraction;
    let f = sampled_grid(spec, &packet)?;
    let g = transform_onto(&f, to, TargetAxis::like(&f), budget).map_err(fail)?;
    let back = transform_onto(&g, from, TargetAxis::like(&f), budget).map_err(fail)?;
    let round_trip = back.sup_diff(&f).map_err(fail)?;
    out.put("input.csv", f.to_csv())?;
    out.put("output.csv", g.to_csv())?;
    out.put_json(
        "metadata.json",
        &json!({
            "source": packet.describe(),
            "from": from.label(),
            "to": to.label(),
            "norm_in": f.norm(),
            "norm_out": g.norm(),
            "round_trip_sup": round_trip,
        }),
    )?;
    out.finish("transform", spec)
}

pub fn coeffs(spec: &ExperimentSpec, dir: &Path) -> CmdResult {
    let mut out = Out::new(dir);
    let plus = spec.packets.plus.build("packets.plus")?;
    let order = spec.truncation.order;
    let radius = spec.coeffs.eval_radius;
    let dec = decaying_coeffs(&plus, order, radius).map_err(fail)?;
    let gro = growing_coeffs(&plus, order, radius).map_err(fail)?;
    out.put("decaying.csv", dec.to_csv())?;
    out.put("growing.csv", gro.to_csv())?;
    // An entire packet has infinite Taylor radius; record that as null
    // rather than relying on JSON's silent NaN/Inf mapping. The raw tail
    // estimates are |c_N| R^N; whether a series converges is decided where
    // the coefficients meet moments, not here.
    let taylor_radius = dec.radius.is_finite().then_some(dec.radius);
    out.put_json(
        "metadata.json",
        &json!({
            "packet": plus.describe(),
            "order": order,
            "eval_radius": radius,
            "taylor_radius": taylor_radius,
            "tail_estimate": { "decaying": dec.tail_estimate, "growing": gro.tail_estimate },
        }),
    )?;
    out.finish("coeffs", spec)
}

pub fn survival(spec: &ExperimentSpec, dir: &Path) -> CmdResult {
    let mut out = Out::new(dir);
    let minus = spec.packets.minus.build("packets.minus")?;
    let plus = spec.packets.plus.build("packets.plus")?;
    let times = spec.time.times();
    let series =
        survival_amplitude(&minus, &plus, spec.truncation.order, &times, spec.tolerances.tail)
            .map_err(fail)?;
    out.put("survival.csv", series.to_csv())?;
    let mut terms = String::from("n,re_term,im_term\n");
    for (n, c) in series.terms.iter().enumerate() {
        let _ = writeln!(terms, "{n},{:.16e},{:.16e}", c.re, c.im);
    }
    out.put("terms.csv", &terms)?;
    // The fitted slope is the headline observable: -1/2 generically, -3/2
    // when the leading coefficient vanishes by parity.
    let slope = series.log_slope(spec.survival.fit_lo, spec.survival.fit_hi).ok();
    let tail_max = series.tail_bounds.iter().cloned().fold(0.0_f64, f64::max);
    out.put_json(
        "metadata.json",
        &json!({
            "provenance": series.provenance,
            "truncation": series.truncation,
            "fit_window": [spec.survival.fit_lo, spec.survival.fit_hi],
            "log_slope": slope,
            "tail_bound_max": tail_max,
        }),
    )?;
    out.finish("survival", spec)
}

pub fn evolve(spec: &ExperimentSpec, dir: &Path) -> CmdResult {
    let mut out = Out::new(dir);
    let plus = spec.packets.plus.build("packets.plus")?;
    let rep = spec.grid.representation()?;
    let f0 = sampled_grid(spec, &plus)?;
    let times = spec.time.times();
    let mut rows = Vec::with_capacity(times.len());
    for (k, &t) in times.iter().enumerate() {
        let g = evolve_scaling(&f0, t).map_err(fail)?;
        out.put(&format!("state_{k:03}.csv"), g.to_csv())?;
        // Closed-form route for the same packet; the sup difference is pure
        // interpolation error. Once the rescaled packet outgrows the window
        // the comparison is recorded as null rather than refusing the run.
        let pe = evolve_packet(&plus, rep, t).map_err(fail)?;
        let (x0, dx) = GridFunction1D::axis_points(spec.grid.lo, spec.grid.hi, spec.grid.n);
        let sup = match GridFunction1D::sample_packet(&pe, rep, x0, dx, spec.grid.n) {
            Ok(exact) => Some(g.sup_diff(&exact).map_err(fail)?),
            Err(_) => None,
        };
        rows.push(json!({ "t": t, "norm": g.norm(), "packet_route_sup": sup }));
    }
    out.put_json(
        "metadata.json",
        &json!({
            "packet": plus.describe(),
            "rep": rep.label(),
            "states": times.len(),
            "packet_route_note":
                "null once the rescaled closed form no longer fits the window",
            "per_time": rows,
        }),
    )?;
    out.finish("evolve", spec)
}

pub fn liouville(spec: &ExperimentSpec, dir: &Path) -> CmdResult {
    let mut out = Out::new(dir);
    let a = spec.packets.plus.build("packets.plus")?;
    let b = spec.packets.minus.build("packets.minus")?;
    let l = &spec.liouville;
    let (w0, dw) = GridFunction1D::axis_points(l.lo, l.hi, l.n);
    let rho0 =
        PhaseDensity2D::from_tensor(&a, &b, w0, dw, l.n, w0, dw, l.n).map_err(fail)?;
    let moved = evolve_liouville(&rho0, l.t).map_err(fail)?;
    let order = spec.truncation.order.min(8);
    let sc = stat_coeffs(&rho0, order, order).map_err(fail)?;
    out.put("rho_initial.csv", rho0.to_csv().map_err(fail)?)?;
    out.put("rho_final.csv", moved.to_csv().map_err(fail)?)?;
    out.put("stat_coeffs.csv", sc.to_csv())?;
    let (m0, m1) = (rho0.mass(), moved.mass());
    // Grid sums drift at the requadrature level when the factors rescale;
    // the analytic factorization gives the exact conserved mass.
    let mass_exact = packet_moment(&a, 0) * packet_moment(&b, 0);
    let mass_exact_final = moved
        .tensor
        .as_ref()
        .map(|(at, bt)| packet_moment(at, 0) * packet_moment(bt, 0));
    let mut meta = json!({
        "t": l.t,
        "density": rho0.describe(),
        "coefficient_order": order,
        "mass_grid_initial": [m0.re, m0.im],
        "mass_grid_final": [m1.re, m1.im],
        "mass_exact_initial": mass_exact,
        "mass_exact_final": mass_exact_final,
        "l1_initial": rho0.l1(),
        "l1_final": moved.l1(),
    });
    if l.mc_check {
        let hist = mc_transport(&rho0, l.t, l.mc_samples, spec.run.seed).map_err(fail)?;
        let (chi2, dof) = chi_square_blocks(&hist, &moved, l.mc_samples, l.mc_blocks)
            .map_err(fail)?;
        let margin = 3.0 * (2.0 * dof as f64).sqrt();
        meta["monte_carlo"] = json!({
            "samples": l.mc_samples,
            "seed": spec.run.seed,
            "blocks": l.mc_blocks,
            "chi_square": chi2,
            "dof": dof,
            "consistent": (chi2 - dof as f64).abs() <= margin,
        });
    }
    out.put_json("metadata.json", &meta)?;
    out.finish("liouville", spec)
}

pub fn wigner_cmd(spec: &ExperimentSpec, dir: &Path) -> CmdResult {
    let mut out = Out::new(dir);
    let minus = spec.packets.minus.build("packets.minus")?;
    let raw = sampled_grid(spec, &minus)?;
    let norm = raw.norm();
    if norm == 0.0 {
        return Err("packets.minus: state vanishes on the grid".into());
    }
    let f = raw.scaled(Complex64::new(1.0 / norm, 0.0));
    let w = wigner(&f).map_err(fail)?;
    let rev = time_reverse(&f).map_err(fail)?;
    let w_rev = wigner(&rev).map_err(fail)?;
    let peak = w.max_abs();
    let (s_lo, s_hi) = minus.effective_support();
    let dx = spec.grid.spacing();
    let support = off_support_max(&w, s_lo - dx, s_hi + dx) / peak;
    let v_probe = spec.wigner.v_probe.unwrap_or(spec.packets.minus.center);
    let decay =
        row_decay_exponent(&w, v_probe, spec.wigner.band_lo, spec.wigner.band_hi).map_err(fail)?;
    let mirror = mirror_residual(&w, &w_rev).map_err(fail)? / peak;
    let transport = dynamics_residual(&f, spec.wigner.t).map_err(fail)?;
    out.put("wigner.bin", w.to_binary())?;
    let mut mv = String::from("v,weight\n");
    for (i, m) in w.marginal_v().iter().enumerate() {
        let _ = writeln!(mv, "{:.16e},{:.16e}", w.v(i), m);
    }
    out.put("marginal_v.csv", &mv)?;
    let mut mu = String::from("u,weight\n");
    for (j, m) in w.marginal_u().iter().enumerate() {
        let _ = writeln!(mu, "{:.16e},{:.16e}", w.u(j), m);
    }
    out.put("marginal_u.csv", &mu)?;
    out.put_json(
        "metadata.json",
        &json!({
            "state": minus.describe(),
            "field": w.describe(),
            "mass": w.mass(),
            "max_abs": peak,
            "support_window": [s_lo, s_hi],
            "support_residual": support,
            "v_probe": v_probe,
            "decay_band": [spec.wigner.band_lo, spec.wigner.band_hi],
            "decay_exponent": decay,
            "mirror_residual": mirror,
            "t": spec.wigner.t,
            "transport_residual": transport,
        }),
    )?;
    out.finish("wigner", spec)
}

/// Run the pinned verification suite: JSONL stream (with runtimes) to
/// stdout, deterministic reports.csv to the output directory. Returns
/// whether every check passed.
pub fn verify_cmd(spec: &ExperimentSpec, dir: &Path) -> Result<bool, String> {
    let mut out = Out::new(dir);
    let reports = verify::run_all();
    let mut csv = String::from("name,discrepancy,tolerance,passed\n");
    for r in &reports {
        println!("{}", r.jsonl());
        csv.push_str(&r.csv_line());
        csv.push('\n');
    }
    out.put("reports.csv", &csv)?;
    out.finish("verify", spec)?;
    let passed = reports.iter().filter(|r| r.passed).count();
    eprintln!("verify: {passed}/{} checks passed", reports.len());
    Ok(passed == reports.len())
}
