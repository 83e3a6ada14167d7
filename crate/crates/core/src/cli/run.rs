//! Workflow execution. Every workflow writes its artifacts under
//! `config.output` and a short summary to `out`.

use std::io::Write;
use std::path::Path;

use serde_json::json;

use super::config::{RunConfig, Workflow};
use super::plot::{emit_plot_script, tail_guides};
use crate::bands::{
    sandwich_check, sweep, sweep_meta, write_bands_csv, write_json, BandDiagnostics, BandProblem,
    BandSweep, SweepOptions, XiEnd,
};
use crate::comparison::convergence_study;
use crate::error::{Error, Result};
use crate::gauge::{turning_points, GaugeFunction};
use crate::layer::{effective_profile, layer_ac_check, layer_potential_v};
use crate::profiles::{AcDecision, Profile};

/// Execute the workflow named in `cfg`, which must already be validated.
pub fn run(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    match cfg.workflow() {
        Workflow::Bands => run_bands(cfg, out),
        Workflow::Accheck => run_accheck(cfg, out),
        Workflow::Comparison => run_comparison(cfg, out),
        Workflow::Layer => run_layer(cfg, out),
        Workflow::GaugeDebug => run_gauge_debug(cfg, out),
    }
}

fn problem(cfg: &RunConfig) -> Result<BandProblem> {
    let (b, w) = cfg.profiles()?;
    BandProblem::new(b, w)
}

fn ac_line(d: &AcDecision) -> String {
    let cond = serde_json::to_value(d.matched_condition).unwrap_or_default();
    format!(
        "ac: verdict={} condition={} margin={:.6}{}",
        d.verdict,
        cond.as_str().unwrap_or("?"),
        d.margin,
        if d.heuristic { " (sampled tails)" } else { "" }
    )
}

fn summary(out: &mut dyn Write, s: &BandSweep, d: &BandDiagnostics) -> Result<()> {
    for n in 1..=s.k {
        let mut parts = vec![format!("band {n}:")];
        for e in d.tail_report.iter().filter(|e| e.band == n) {
            let end = match e.end {
                XiEnd::XiMinus => "xi_min",
                XiEnd::XiPlus => "xi_max",
            };
            let status = match e.within {
                Some(true) => "ok",
                Some(false) => "OUT",
                None => "n/a",
            };
            parts.push(format!(
                "{end}={:.6} in [{:.6}, {:.6}] {status};",
                e.value, e.interval.0, e.interval.1
            ));
        }
        let c = &d.nonconstancy[n - 1];
        let why = if c.disjoint_tails == Some(true) {
            "disjoint tails"
        } else if c.divergent {
            "divergent"
        } else if c.observed {
            "observed"
        } else {
            "flat"
        };
        parts.push(format!(
            "nonconstant={} ({why}, oscillation {:.3e})",
            c.nonconstant, c.oscillation
        ));
        writeln!(out, "{}", parts.join(" "))?;
    }
    if let Some(g) = d.min_gap {
        writeln!(out, "min gap: {g:.6e}")?;
    }
    Ok(())
}

fn export(
    cfg: &RunConfig,
    s: &BandSweep,
    d: &BandDiagnostics,
    p: &BandProblem,
    opts: &SweepOptions,
    extra: Vec<(&str, serde_json::Value)>,
) -> Result<()> {
    let dir = &cfg.output;
    std::fs::create_dir_all(dir)?;
    let csv = dir.join("bands.csv");
    write_bands_csv(s, &csv)?;
    let mut meta = sweep_meta(s, d, p, opts);
    meta["config"] = serde_json::to_value(cfg)?;
    for (key, value) in extra {
        meta[key] = value;
    }
    write_json(&meta, &dir.join("meta.json"))?;
    if cfg.plot {
        emit_plot_script(&csv, &dir.join("bands.gp"), &tail_guides(&p.tails, s.k))?;
    }
    Ok(())
}

fn run_bands(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let p = problem(cfg)?;
    let opts = cfg.sweep_options();
    let s = sweep(&p, &cfg.xi.points()?, cfg.k, &opts)?;
    let mut d = BandDiagnostics::compute(&s, &p.tails, &opts);
    let mut extra = Vec::new();
    if let Some(sw) = &cfg.sandwich {
        let report = sandwich_check(&p, sw.xi, sw.eps, cfg.k, &opts.solver)?;
        d.sandwich_ok = Some(report.holds);
        writeln!(out, "sandwich at xi={}: {}", sw.xi, report.holds)?;
        extra.push(("sandwich", serde_json::to_value(&report)?));
    }
    export(cfg, &s, &d, &p, &opts, extra)?;
    summary(out, &s, &d)?;
    writeln!(out, "{}", ac_line(&p.ac_decision()))?;
    Ok(())
}

fn run_accheck(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let p = problem(cfg)?;
    let d = p.ac_decision();
    let doc = json!({
        "verdict": d.verdict,
        "matched_condition": d.matched_condition,
        "margin": d.margin,
        "all_matches": d.all_matches,
        "heuristic": d.heuristic,
        "tail_bounds": p.tails,
    });
    writeln!(out, "{}", serde_json::to_string(&doc)?)?;
    Ok(())
}

fn run_comparison(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let c = cfg.comparison.clone().unwrap_or_default();
    let study = convergence_study(c.omega, c.omega_tilde, c.x0, &c.alphas, cfg.k, &cfg.solver)?;
    std::fs::create_dir_all(&cfg.output)?;
    study.write_csv(&cfg.output.join("convergence.csv"))?;
    let meta = json!({
        "config": cfg,
        "study": study,
    });
    write_json(&meta, &cfg.output.join("meta.json"))?;
    for n in 0..study.k() {
        let errs = study.error_column(n);
        writeln!(
            out,
            "sigma_{}: error {:.3e} at alpha={} -> {:.3e} at alpha={}, non-increasing from alpha={}",
            n + 1,
            errs[0],
            study.alphas[0],
            errs[errs.len() - 1],
            study.alphas[errs.len() - 1],
            study.alphas[study.monotone_from[n]]
        )?;
    }
    Ok(())
}

fn run_layer(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let l = cfg
        .layer
        .as_ref()
        .ok_or_else(|| Error::Config("layer: missing `layer` section".into()))?;
    let e = effective_profile(&l.curve, l.b0)?;
    let dir = &cfg.output;
    std::fs::create_dir_all(dir)?;
    l.curve.sampled()?.write_csv(&dir.join("curve.csv"))?;
    e.write_csv(&dir.join("effective_profile.csv"))?;
    let report = layer_ac_check(&e);
    let clause = serde_json::to_value(report.clause)?;
    writeln!(
        out,
        "layer: verdict={} clause={} scaled_margin={:.6}",
        report.decision.verdict,
        clause.as_str().unwrap_or("?"),
        report.scaled_margin
    )?;
    if let Some(geom) = &l.geometry {
        write_layer_potential(&e.curvature, geom, &dir.join("layer_potential.csv"))?;
    }
    let mut extra = vec![("layer", serde_json::to_value(&report)?)];
    if l.skip_bands {
        let meta = json!({ "config": cfg, "layer": report, "tail_bounds": e.tails });
        write_json(&meta, &dir.join("meta.json"))?;
        return Ok(());
    }
    let p = e.band_problem()?;
    let opts = cfg.sweep_options();
    let s = sweep(&p, &cfg.xi.points()?, cfg.k, &opts)?;
    let d = BandDiagnostics::compute(&s, &p.tails, &opts);
    extra.push(("curve", serde_json::to_value(&l.curve)?));
    export(cfg, &s, &d, &p, &opts, extra)?;
    summary(out, &s, &d)?;
    Ok(())
}

fn write_layer_potential(
    c: &crate::layer::CurvatureTable,
    geom: &crate::layer::LayerGeometry,
    path: &Path,
) -> Result<()> {
    let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
    writeln!(w, "s,v,near_join")?;
    for &s in &c.s {
        let v = layer_potential_v(c, geom, s, geom.u)?;
        writeln!(w, "{s:.16e},{:.16e},{}", v.value, u8::from(v.near_join))?;
    }
    w.flush()?;
    Ok(())
}

fn run_gauge_debug(cfg: &RunConfig, out: &mut dyn Write) -> Result<()> {
    let (b, _) = cfg.profiles()?;
    let g_cfg = cfg.gauge.clone().unwrap_or_default();
    let g = GaugeFunction::with_base(Profile::new(b)?, g_cfg.base_point);
    writeln!(out, "x,a_y")?;
    let n = g_cfg.count - 1;
    for i in 0..=n {
        let x = if i == n {
            g_cfg.x_max
        } else {
            g_cfg.x_min + (g_cfg.x_max - g_cfg.x_min) * (i as f64 / n as f64)
        };
        writeln!(out, "{x:.16e},{:.16e}", g.eval(x))?;
    }
    for xi in [cfg.xi.min, cfg.xi.max] {
        let tp = turning_points(&g, xi, (g_cfg.x_min, g_cfg.x_max));
        let roots: Vec<String> = tp.roots.iter().map(|r| format!("{r:.6}")).collect();
        eprintln!("turning points at xi={xi}: [{}]", roots.join(", "));
    }
    Ok(())
}
