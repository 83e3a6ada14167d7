use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::bands::{xi_linspace, SweepOptions};
use crate::error::{Error, Result};
use crate::fiber::SolverOptions;
use crate::layer::{CurveSpec, LayerGeometry};
use crate::profiles::ProfileSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Workflow {
    Bands,
    Accheck,
    Comparison,
    Layer,
    GaugeDebug,
}

impl Workflow {
    pub fn name(self) -> &'static str {
        match self {
            Workflow::Bands => "bands",
            Workflow::Accheck => "accheck",
            Workflow::Comparison => "comparison",
            Workflow::Layer => "layer",
            Workflow::GaugeDebug => "gauge-debug",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct XiGrid {
    #[serde(default = "XiGrid::default_min")]
    pub min: f64,
    #[serde(default = "XiGrid::default_max")]
    pub max: f64,
    #[serde(default = "XiGrid::default_count")]
    pub count: usize,
}

impl XiGrid {
    fn default_min() -> f64 {
        -40.0
    }

    fn default_max() -> f64 {
        40.0
    }

    fn default_count() -> usize {
        161
    }

    pub fn points(&self) -> Result<Vec<f64>> {
        xi_linspace(self.min, self.max, self.count)
    }
}

impl Default for XiGrid {
    fn default() -> Self {
        XiGrid {
            min: Self::default_min(),
            max: Self::default_max(),
            count: Self::default_count(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Tolerances {
    #[serde(default = "Tolerances::default_gap")]
    pub gap_tol: f64,
    #[serde(default = "Tolerances::default_tail")]
    pub tail_tol: f64,
    #[serde(default = "Tolerances::default_osc")]
    pub osc_tol: f64,
}

impl Tolerances {
    fn default_gap() -> f64 {
        SweepOptions::default().gap_tol
    }

    fn default_tail() -> f64 {
        SweepOptions::default().tail_tol
    }

    fn default_osc() -> f64 {
        SweepOptions::default().osc_tol
    }
}

impl Default for Tolerances {
    fn default() -> Self {
        Tolerances {
            gap_tol: Self::default_gap(),
            tail_tol: Self::default_tail(),
            osc_tol: Self::default_osc(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SandwichConfig {
    pub xi: f64,
    pub eps: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    #[serde(default = "ComparisonConfig::default_omega")]
    pub omega: f64,
    #[serde(default = "ComparisonConfig::default_omega_tilde")]
    pub omega_tilde: f64,
    #[serde(default)]
    pub x0: f64,
    #[serde(default = "ComparisonConfig::default_alphas")]
    pub alphas: Vec<f64>,
}

impl ComparisonConfig {
    fn default_omega() -> f64 {
        1.0
    }

    fn default_omega_tilde() -> f64 {
        0.5
    }

    fn default_alphas() -> Vec<f64> {
        vec![2.0, 4.0, 8.0, 16.0]
    }
}

impl Default for ComparisonConfig {
    fn default() -> Self {
        ComparisonConfig {
            omega: Self::default_omega(),
            omega_tilde: Self::default_omega_tilde(),
            x0: 0.0,
            alphas: Self::default_alphas(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    pub curve: CurveSpec,
    #[serde(default = "LayerConfig::default_b0")]
    pub b0: f64,
    /// Samples `V(s, u)` along the curve when present.
    #[serde(default)]
    pub geometry: Option<LayerGeometry>,
    /// Skip the band sweep and only write the geometry files.
    #[serde(default)]
    pub skip_bands: bool,
}

impl LayerConfig {
    fn default_b0() -> f64 {
        1.0
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeConfig {
    #[serde(default)]
    pub base_point: f64,
    #[serde(default = "GaugeConfig::default_x_min")]
    pub x_min: f64,
    #[serde(default = "GaugeConfig::default_x_max")]
    pub x_max: f64,
    #[serde(default = "GaugeConfig::default_count")]
    pub count: usize,
}

impl GaugeConfig {
    fn default_x_min() -> f64 {
        -20.0
    }

    fn default_x_max() -> f64 {
        20.0
    }

    fn default_count() -> usize {
        401
    }
}

impl Default for GaugeConfig {
    fn default() -> Self {
        GaugeConfig {
            base_point: 0.0,
            x_min: Self::default_x_min(),
            x_max: Self::default_x_max(),
            count: Self::default_count(),
        }
    }
}

/// A complete run description, as read from a JSON file and adjusted by
/// command-line flags.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub schema: u32,
    #[serde(default)]
    pub workflow: Option<Workflow>,
    /// Name from the builtin profile catalog; exclusive with `b`/`w`.
    #[serde(default)]
    pub builtin: Option<String>,
    #[serde(default)]
    pub b: Option<ProfileSpec>,
    #[serde(default)]
    pub w: Option<ProfileSpec>,
    #[serde(default)]
    pub xi: XiGrid,
    #[serde(default = "RunConfig::default_k")]
    pub k: usize,
    #[serde(default)]
    pub solver: SolverOptions,
    #[serde(default)]
    pub tolerances: Tolerances,
    #[serde(default)]
    pub sandwich: Option<SandwichConfig>,
    #[serde(default)]
    pub comparison: Option<ComparisonConfig>,
    #[serde(default)]
    pub layer: Option<LayerConfig>,
    #[serde(default)]
    pub gauge: Option<GaugeConfig>,
    #[serde(default = "RunConfig::default_output")]
    pub output: PathBuf,
    #[serde(default)]
    pub plot: bool,
}

impl RunConfig {
    fn default_k() -> usize {
        3
    }

    fn default_output() -> PathBuf {
        PathBuf::from("out")
    }

    /// Defaults for a run configured only through flags.
    pub fn new(workflow: Workflow) -> Self {
        RunConfig {
            schema: SCHEMA_VERSION,
            workflow: Some(workflow),
            builtin: None,
            b: None,
            w: None,
            xi: XiGrid::default(),
            k: Self::default_k(),
            solver: SolverOptions::default(),
            tolerances: Tolerances::default(),
            sandwich: None,
            comparison: None,
            layer: None,
            gauge: None,
            output: Self::default_output(),
            plot: false,
        }
    }

    pub fn workflow(&self) -> Workflow {
        self.workflow.unwrap_or(Workflow::Bands)
    }

    pub fn sweep_options(&self) -> SweepOptions {
        SweepOptions {
            solver: self.solver.clone(),
            gap_tol: self.tolerances.gap_tol,
            tail_tol: self.tolerances.tail_tol,
            osc_tol: self.tolerances.osc_tol,
            parallel: true,
        }
    }

    /// Field and potential, from the catalog or given explicitly. `W`
    /// defaults to zero.
    pub fn profiles(&self) -> Result<(ProfileSpec, ProfileSpec)> {
        if self.builtin.is_some() && (self.b.is_some() || self.w.is_some()) {
            return Err(Error::Config(
                "`builtin` excludes `b` and `w`; give one or the other".into(),
            ));
        }
        if let Some(name) = &self.builtin {
            let entry = crate::profiles::builtin(name).ok_or_else(|| {
                let names: Vec<_> = crate::profiles::builtin_catalog()
                    .iter()
                    .map(|e| e.name)
                    .collect();
                Error::Config(format!(
                    "unknown builtin {name:?}, expected one of {}",
                    names.join(", ")
                ))
            })?;
            return Ok((entry.b, entry.w));
        }
        match &self.b {
            Some(b) => Ok((
                b.clone(),
                self.w.clone().unwrap_or(ProfileSpec::constant(0.0)),
            )),
            None => Err(Error::Config(
                "no field given: set `builtin` or `b` (and optionally `w`)".into(),
            )),
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.schema != SCHEMA_VERSION {
            return Err(Error::Config(format!(
                "schema: expected {SCHEMA_VERSION}, got {}",
                self.schema
            )));
        }
        if self.xi.count == 0 {
            return Err(Error::Config(
                "xi.count: expected an integer >= 1, got 0".into(),
            ));
        }
        if self.xi.count > 1 && !(self.xi.min < self.xi.max) {
            return Err(Error::Config(format!(
                "xi: expected min < max, got min = {}, max = {}",
                self.xi.min, self.xi.max
            )));
        }
        if self.k == 0 {
            return Err(Error::Config("k: expected an integer >= 1, got 0".into()));
        }
        self.sweep_options()
            .validate()
            .map_err(|e| Error::Config(e.to_string()))?;
        for p in [&self.b, &self.w].into_iter().flatten() {
            p.validate().map_err(|e| Error::Config(e.to_string()))?;
        }
        match self.workflow() {
            Workflow::Bands | Workflow::Accheck | Workflow::GaugeDebug => {
                self.profiles()?;
            }
            Workflow::Comparison => {
                let c = self.comparison.clone().unwrap_or_default();
                if !(c.omega > 0.0 && c.omega_tilde > 0.0) {
                    return Err(Error::Config(
                        "comparison: omega and omega_tilde must be positive".into(),
                    ));
                }
                if c.alphas.is_empty() || c.alphas.windows(2).any(|p| !(p[0] < p[1])) {
                    return Err(Error::Config(
                        "comparison.alphas: expected a non-empty strictly increasing list".into(),
                    ));
                }
            }
            Workflow::Layer => {
                let l = self.layer.as_ref().ok_or_else(|| {
                    Error::Config("layer: expected a `layer` section with a `curve`".into())
                })?;
                if !(l.b0 > 0.0) {
                    return Err(Error::Config("layer.b0: expected a positive number".into()));
                }
                l.curve
                    .validate()
                    .map_err(|e| Error::Config(e.to_string()))?;
            }
        }
        if let Some(g) = &self.gauge {
            if g.count < 2 || !(g.x_min < g.x_max) {
                return Err(Error::Config(
                    "gauge: expected x_min < x_max and count >= 2".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Replace `"csv": path` in tabulated profiles by the `x`/`y` columns of
/// that file, resolved relative to `base`.
fn inline_tabulated(value: &mut Value, base: &Path) -> Result<()> {
    for key in ["b", "w"] {
        let Some(Value::Object(p)) = value.get_mut(key) else {
            continue;
        };
        let Some(csv_path) = p.remove("csv") else {
            continue;
        };
        let rel = csv_path
            .as_str()
            .ok_or_else(|| Error::Config(format!("{key}.csv: expected a path string")))?;
        let path = base.join(rel);
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(true)
            .trim(csv::Trim::All)
            .from_path(&path)
            .map_err(|e| Error::Config(format!("{key}.csv: {}: {e}", path.display())))?;
        let (mut xs, mut ys) = (Vec::new(), Vec::new());
        for rec in reader.deserialize::<(f64, f64)>() {
            let (x, y) = rec.map_err(|e| Error::Config(format!("{key}.csv: {e}")))?;
            xs.push(x);
            ys.push(y);
        }
        p.insert("x".into(), xs.into());
        p.insert("y".into(), ys.into());
    }
    Ok(())
}

/// Deserialize without validating, so that flags can still adjust the
/// result. A `workflow` given by the caller must agree with the file.
pub fn read_config_str(text: &str, base: &Path, workflow: Option<Workflow>) -> Result<RunConfig> {
    let mut value: Value =
        serde_json::from_str(text).map_err(|e| Error::Config(format!("invalid JSON: {e}")))?;
    inline_tabulated(&mut value, base)?;
    let mut cfg: RunConfig =
        serde_json::from_value(value).map_err(|e| Error::Config(e.to_string()))?;
    match (cfg.workflow, workflow) {
        (Some(file), Some(cmd)) if file != cmd => {
            return Err(Error::Config(format!(
                "workflow: config says {:?} but the command is {:?}",
                file.name(),
                cmd.name()
            )))
        }
        (None, Some(cmd)) => cfg.workflow = Some(cmd),
        _ => {}
    }
    Ok(cfg)
}

pub fn read_config(path: &Path, workflow: Option<Workflow>) -> Result<RunConfig> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    read_config_str(&text, path.parent().unwrap_or(Path::new(".")), workflow)
}

pub fn parse_config_str(text: &str, base: &Path) -> Result<RunConfig> {
    let cfg = read_config_str(text, base, None)?;
    cfg.validate()?;
    Ok(cfg)
}

/// Read and validate a config file.
pub fn parse_config(path: &Path) -> Result<RunConfig> {
    let cfg = read_config(path, None)?;
    cfg.validate()?;
    Ok(cfg)
}
