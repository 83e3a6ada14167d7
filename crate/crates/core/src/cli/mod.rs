//! Command-line front end: `iwatsuka <workflow> [--config FILE] [flags]`.
//!
//! Exit codes: 0 on success, 1 on numerical failure, 2 on configuration or
//! usage errors.

pub mod config;
pub mod plot;
pub mod run;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

pub use config::{parse_config, parse_config_str, RunConfig, Workflow};
pub use plot::emit_plot_script;
pub use run::run;

use crate::error::{Error, Result};
use crate::layer::{CurveSpec, LayerGeometry};
use config::{ComparisonConfig, GaugeConfig, LayerConfig, SandwichConfig};

#[derive(Debug, Parser)]
#[command(
    name = "iwatsuka",
    version,
    about = "Band functions of magnetic fiber operators"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Sweep the lowest bands over a xi grid and write bands.csv/meta.json.
    Bands(BandsArgs),
    /// Print the absolute-continuity verdict as JSON.
    Accheck(CommonArgs),
    /// Convergence of the comparison operator eigenvalues as alpha grows.
    Comparison(ComparisonArgs),
    /// Effective profile, verdict and bands of a curved layer.
    Layer(LayerArgs),
    /// Print A_y on a grid as CSV.
    GaugeDebug(GaugeArgs),
}

#[derive(Debug, Clone, Default, Args)]
pub struct CommonArgs {
    /// JSON run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Profile from the builtin catalog.
    #[arg(long)]
    pub builtin: Option<String>,
    /// Number of bands.
    #[arg(long)]
    pub k: Option<usize>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub xi_max: Option<f64>,
    #[arg(long)]
    pub xi_count: Option<usize>,
    /// Largest grid spacing.
    #[arg(long, visible_alias = "h")]
    pub h_max: Option<f64>,
    /// Potential margin above the eigenvalue level at the box edges.
    #[arg(long)]
    pub margin: Option<f64>,
    /// Fixed box "L,R" instead of the adaptive one.
    #[arg(long = "box", value_parser = parse_box, allow_hyphen_values = true)]
    pub box_override: Option<(f64, f64)>,
    /// Also write a gnuplot script next to bands.csv.
    #[arg(long)]
    pub plot: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct BandsArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Run the bracketing check at this xi.
    #[arg(long, allow_hyphen_values = true, requires = "sandwich_eps")]
    pub sandwich_xi: Option<f64>,
    #[arg(long, requires = "sandwich_xi")]
    pub sandwich_eps: Option<f64>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct ComparisonArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long)]
    pub omega: Option<f64>,
    #[arg(long)]
    pub omega_tilde: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x0: Option<f64>,
    /// Comma-separated, increasing.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    pub alphas: Option<Vec<f64>>,
}

#[derive(Debug, Clone, Default, Args)]
pub struct LayerArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    /// Circular bend radius; with --angle-in/--angle-out replaces the curve.
    #[arg(long)]
    pub radius: Option<f64>,
    /// Tangent angle in degrees before the bend.
    #[arg(long, allow_hyphen_values = true, requires = "radius")]
    pub angle_in: Option<f64>,
    /// Tangent angle in degrees after the bend.
    #[arg(long, allow_hyphen_values = true, requires = "radius")]
    pub angle_out: Option<f64>,
    #[arg(long)]
    pub b0: Option<f64>,
    /// Sample V(s, u) with this half width.
    #[arg(long, requires = "u")]
    pub half_width: Option<f64>,
    #[arg(long, allow_hyphen_values = true, requires = "half_width")]
    pub u: Option<f64>,
    /// Only write the geometry files and the verdict.
    #[arg(long)]
    pub skip_bands: bool,
}

#[derive(Debug, Clone, Default, Args)]
pub struct GaugeArgs {
    #[command(flatten)]
    pub common: CommonArgs,
    #[arg(long, allow_hyphen_values = true)]
    pub base_point: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_min: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub x_max: Option<f64>,
    #[arg(long)]
    pub count: Option<usize>,
}

fn parse_box(s: &str) -> std::result::Result<(f64, f64), String> {
    let (l, r) = s
        .split_once(',')
        .ok_or_else(|| format!("expected \"L,R\", got {s:?}"))?;
    let parse = |t: &str| t.trim().parse::<f64>().map_err(|e| format!("{t:?}: {e}"));
    Ok((parse(l)?, parse(r)?))
}

fn base_config(common: &CommonArgs, workflow: Workflow) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => config::read_config(path, Some(workflow))?,
        None => RunConfig::new(workflow),
    };
    if let Some(v) = &common.out {
        cfg.output = v.clone();
    }
    if let Some(v) = &common.builtin {
        cfg.builtin = Some(v.clone());
        cfg.b = None;
        cfg.w = None;
    }
    if let Some(v) = common.k {
        cfg.k = v;
    }
    if let Some(v) = common.xi_min {
        cfg.xi.min = v;
    }
    if let Some(v) = common.xi_max {
        cfg.xi.max = v;
    }
    if let Some(v) = common.xi_count {
        cfg.xi.count = v;
    }
    if let Some(v) = common.h_max {
        cfg.solver.h_max = Some(v);
    }
    if let Some(v) = common.margin {
        cfg.solver.margin = v;
    }
    if let Some(v) = common.box_override {
        cfg.solver.box_override = Some(v);
    }
    cfg.plot |= common.plot;
    Ok(cfg)
}

/// Merge the config file (if any) with the flags of `cmd`.
pub fn resolve(cmd: &Command) -> Result<RunConfig> {
    let cfg = match cmd {
        Command::Bands(a) => {
            let mut cfg = base_config(&a.common, Workflow::Bands)?;
            if let (Some(xi), Some(eps)) = (a.sandwich_xi, a.sandwich_eps) {
                cfg.sandwich = Some(SandwichConfig { xi, eps });
            }
            cfg
        }
        Command::Accheck(a) => base_config(a, Workflow::Accheck)?,
        Command::Comparison(a) => {
            let mut cfg = base_config(&a.common, Workflow::Comparison)?;
            let mut c = cfg
                .comparison
                .take()
                .unwrap_or_else(ComparisonConfig::default);
            if let Some(v) = a.omega {
                c.omega = v;
            }
            if let Some(v) = a.omega_tilde {
                c.omega_tilde = v;
            }
            if let Some(v) = a.x0 {
                c.x0 = v;
            }
            if let Some(v) = &a.alphas {
                c.alphas = v.clone();
            }
            cfg.comparison = Some(c);
            cfg
        }
        Command::Layer(a) => {
            let mut cfg = base_config(&a.common, Workflow::Layer)?;
            let flag_curve = a.radius.map(|r| {
                CurveSpec::circular_bend(r, a.angle_in.unwrap_or(0.0), a.angle_out.unwrap_or(0.0))
            });
            let mut l = match (cfg.layer.take(), flag_curve) {
                (Some(mut l), Some(c)) => {
                    l.curve = c;
                    l
                }
                (Some(l), None) => l,
                (None, Some(curve)) => LayerConfig {
                    curve,
                    b0: 1.0,
                    geometry: None,
                    skip_bands: false,
                },
                (None, None) => {
                    return Err(Error::Config(
                        "layer: give a config with a `layer` section or --radius/--angle-in/--angle-out"
                            .into(),
                    ))
                }
            };
            if let Some(v) = a.b0 {
                l.b0 = v;
            }
            if let (Some(half_width), Some(u)) = (a.half_width, a.u) {
                l.geometry = Some(LayerGeometry { half_width, u });
            }
            l.skip_bands |= a.skip_bands;
            cfg.layer = Some(l);
            cfg
        }
        Command::GaugeDebug(a) => {
            let mut cfg = base_config(&a.common, Workflow::GaugeDebug)?;
            let mut g = cfg.gauge.take().unwrap_or_else(GaugeConfig::default);
            if let Some(v) = a.base_point {
                g.base_point = v;
            }
            if let Some(v) = a.x_min {
                g.x_min = v;
            }
            if let Some(v) = a.x_max {
                g.x_max = v;
            }
            if let Some(v) = a.count {
                g.count = v;
            }
            cfg.gauge = Some(g);
            cfg
        }
    };
    cfg.validate()?;
    Ok(cfg)
}

/// Exit status for a failed run.
pub fn exit_code(e: &Error) -> u8 {
    if e.is_config() {
        2
    } else {
        1
    }
}

/// Entry point of the binary.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = resolve(&cli.command).and_then(|cfg| {
        let stdout = std::io::stdout();
        let mut lock = stdout.lock();
        run(&cfg, &mut lock)
    });
    match result {
        Ok(()) => ExitCode::SUCCESS,
        // reader went away (`| head`)
        Err(Error::Io(e)) if e.kind() == std::io::ErrorKind::BrokenPipe => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(exit_code(&e))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cli(args: &[&str]) -> Command {
        let mut full = vec!["iwatsuka"];
        full.extend_from_slice(args);
        Cli::try_parse_from(full).unwrap().command
    }

    #[test]
    fn flags_fill_a_config() {
        let cfg = resolve(&cli(&[
            "bands",
            "--builtin",
            "iwatsuka-step",
            "--k",
            "2",
            "--xi-min",
            "-5",
            "--xi-max",
            "5",
            "--xi-count",
            "3",
            "--h",
            "0.01",
            "--box",
            "-8,8",
        ]))
        .unwrap();
        assert_eq!(cfg.k, 2);
        assert_eq!((cfg.xi.min, cfg.xi.max, cfg.xi.count), (-5.0, 5.0, 3));
        assert_eq!(cfg.solver.h_max, Some(0.01));
        assert_eq!(cfg.solver.box_override, Some((-8.0, 8.0)));
    }

    #[test]
    fn flag_errors_are_config_errors() {
        let err = resolve(&cli(&[
            "bands",
            "--builtin",
            "iwatsuka-step",
            "--xi-count",
            "0",
        ]))
        .unwrap_err();
        assert_eq!(exit_code(&err), 2);
        let err = resolve(&cli(&["bands"])).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        let err = resolve(&cli(&["layer"])).unwrap_err();
        assert_eq!(exit_code(&err), 2);
        assert!(Cli::try_parse_from(["iwatsuka", "bands", "--box", "3"]).is_err());
    }

    #[test]
    fn layer_flags_build_a_bend() {
        let cfg = resolve(&cli(&[
            "layer",
            "--radius",
            "2",
            "--angle-in",
            "0",
            "--angle-out",
            "60",
            "--b0",
            "1.5",
        ]))
        .unwrap();
        let l = cfg.layer.unwrap();
        assert_eq!(l.curve, CurveSpec::circular_bend(2.0, 0.0, 60.0));
        assert_eq!(l.b0, 1.5);
    }

    #[test]
    fn accheck_prints_json() {
        let cfg = resolve(&cli(&["accheck", "--builtin", "iwatsuka-step"])).unwrap();
        let mut buf = Vec::new();
        run(&cfg, &mut buf).unwrap();
        let v: serde_json::Value = serde_json::from_slice(&buf).unwrap();
        assert_eq!(v["verdict"], true);
        assert_eq!(v["matched_condition"], "cond_1_3");
    }
}
