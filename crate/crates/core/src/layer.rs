//! Thin curved layers in a homogeneous field: planar unit-speed curves
//! `s ↦ (x(s), z(s))`, their curvature, and the effective field
//! `B₀ẋ(s)` and potential `−κ(s)²/4` fed to the band solver.

use std::io::Write;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bands::{sweep, BandProblem, BandSweep, SweepOptions};
use crate::error::{Error, Result};
use crate::profiles::{
    ac_condition, tail_bounds, AcCondition, AcDecision, Profile, ProfileSpec, TailBounds,
};

/// Length of the straight pieces sampled on each side of a bend.
const LEAD: f64 = 20.0;

fn default_arc_tol() -> f64 {
    1e-8
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum CurveSpec {
    /// Unit-speed samples of an arbitrary curve.
    Samples {
        s: Vec<f64>,
        x: Vec<f64>,
        z: Vec<f64>,
        #[serde(default = "default_arc_tol")]
        arc_tol: f64,
    },
    /// Straight line at `angle` degrees from the x axis.
    Line {
        angle: f64,
    },
    Circle {
        radius: f64,
    },
    /// Arc of `radius` turning from `angle_in` to `angle_out` (degrees) with
    /// straight lead-in and lead-out.
    CircularBend {
        radius: f64,
        angle_in: f64,
        angle_out: f64,
    },
    /// Two arcs joined by a straight piece of length `straight`.
    DoubleBend {
        radius: f64,
        angle_in: f64,
        angle_mid: f64,
        angle_out: f64,
        straight: f64,
    },
    /// `θ(s) = θ_in + (θ_out − θ_in)(1 + tanh(s/width))/2`.
    SmoothBend {
        angle_in: f64,
        angle_out: f64,
        width: f64,
    },
}

/// Tangent angle `θ` and its first three derivatives at `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
struct Tangent {
    theta: f64,
    d1: f64,
    d2: f64,
    d3: f64,
}

impl Tangent {
    fn straight(theta: f64) -> Self {
        Tangent {
            theta,
            d1: 0.0,
            d2: 0.0,
            d3: 0.0,
        }
    }
}

/// Piece of a curve built from straights and arcs: on `[start, end]` the
/// angle moves linearly from `from` to `to`.
#[derive(Debug, Clone, Copy)]
struct Arc {
    start: f64,
    end: f64,
    from: f64,
    to: f64,
}

impl CurveSpec {
    pub fn line(angle_deg: f64) -> Self {
        CurveSpec::Line { angle: angle_deg }
    }

    pub fn circle(radius: f64) -> Self {
        CurveSpec::Circle { radius }
    }

    pub fn circular_bend(radius: f64, angle_in_deg: f64, angle_out_deg: f64) -> Self {
        CurveSpec::CircularBend {
            radius,
            angle_in: angle_in_deg,
            angle_out: angle_out_deg,
        }
    }

    pub fn smooth_bend(angle_in_deg: f64, angle_out_deg: f64, width: f64) -> Self {
        CurveSpec::SmoothBend {
            angle_in: angle_in_deg,
            angle_out: angle_out_deg,
            width,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            CurveSpec::Samples { .. } => "samples",
            CurveSpec::Line { .. } => "line",
            CurveSpec::Circle { .. } => "circle",
            CurveSpec::CircularBend { .. } => "circular_bend",
            CurveSpec::DoubleBend { .. } => "double_bend",
            CurveSpec::SmoothBend { .. } => "smooth_bend",
        }
    }

    pub fn is_builtin(&self) -> bool {
        !matches!(self, CurveSpec::Samples { .. })
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::Geometry(format!("{name} must be positive, got {v}")))
            }
        };
        let finite = |vals: &[f64]| {
            if vals.iter().all(|v| v.is_finite()) {
                Ok(())
            } else {
                Err(Error::Geometry("curve parameters must be finite".into()))
            }
        };
        match self {
            CurveSpec::Samples { s, x, z, arc_tol } => {
                positive("arc_tol", *arc_tol)?;
                validate_samples(s, x, z, *arc_tol)
            }
            CurveSpec::Line { angle } => finite(&[*angle]),
            CurveSpec::Circle { radius } => positive("radius", *radius),
            CurveSpec::CircularBend {
                radius,
                angle_in,
                angle_out,
            } => {
                positive("radius", *radius)?;
                finite(&[*angle_in, *angle_out])
            }
            CurveSpec::DoubleBend {
                radius,
                angle_in,
                angle_mid,
                angle_out,
                straight,
            } => {
                positive("radius", *radius)?;
                finite(&[*angle_in, *angle_mid, *angle_out])?;
                if !(*straight >= 0.0) {
                    return Err(Error::Geometry("straight must be non-negative".into()));
                }
                Ok(())
            }
            CurveSpec::SmoothBend {
                angle_in,
                angle_out,
                width,
            } => {
                positive("width", *width)?;
                finite(&[*angle_in, *angle_out])
            }
        }
    }

    /// Arcs of piecewise builtins, in order.
    fn arcs(&self) -> Vec<Arc> {
        let rad = f64::to_radians;
        match *self {
            CurveSpec::CircularBend {
                radius,
                angle_in,
                angle_out,
            } => {
                let len = radius * rad(angle_out - angle_in).abs();
                vec![Arc {
                    start: -0.5 * len,
                    end: 0.5 * len,
                    from: rad(angle_in),
                    to: rad(angle_out),
                }]
            }
            CurveSpec::DoubleBend {
                radius,
                angle_in,
                angle_mid,
                angle_out,
                straight,
            } => {
                let l1 = radius * rad(angle_mid - angle_in).abs();
                let l2 = radius * rad(angle_out - angle_mid).abs();
                let start = -0.5 * (l1 + straight + l2);
                vec![
                    Arc {
                        start,
                        end: start + l1,
                        from: rad(angle_in),
                        to: rad(angle_mid),
                    },
                    Arc {
                        start: start + l1 + straight,
                        end: start + l1 + straight + l2,
                        from: rad(angle_mid),
                        to: rad(angle_out),
                    },
                ]
            }
            _ => Vec::new(),
        }
    }

    /// Points where the curvature of a builtin jumps.
    pub fn joins(&self) -> Vec<f64> {
        let mut j: Vec<f64> = self
            .arcs()
            .iter()
            .filter(|a| a.end > a.start)
            .flat_map(|a| [a.start, a.end])
            .collect();
        j.dedup();
        j
    }

    /// Closed-form tangent angle of a builtin.
    fn tangent(&self, s: f64) -> Option<Tangent> {
        let rad = f64::to_radians;
        Some(match *self {
            CurveSpec::Samples { .. } => return None,
            CurveSpec::Line { angle } => Tangent::straight(rad(angle)),
            CurveSpec::Circle { radius } => Tangent {
                theta: s / radius,
                d1: 1.0 / radius,
                d2: 0.0,
                d3: 0.0,
            },
            CurveSpec::CircularBend { .. } | CurveSpec::DoubleBend { .. } => {
                let arcs = self.arcs();
                let mut theta = arcs[0].from;
                for a in &arcs {
                    if s < a.start {
                        break;
                    }
                    if s <= a.end && a.end > a.start {
                        let rate = (a.to - a.from) / (a.end - a.start);
                        return Some(Tangent {
                            theta: a.from + rate * (s - a.start),
                            d1: rate,
                            d2: 0.0,
                            d3: 0.0,
                        });
                    }
                    theta = a.to;
                }
                Tangent::straight(theta)
            }
            CurveSpec::SmoothBend {
                angle_in,
                angle_out,
                width,
            } => {
                let d = rad(angle_out - angle_in);
                let t = (s / width).tanh();
                let sech2 = 1.0 - t * t;
                Tangent {
                    theta: rad(angle_in) + 0.5 * d * (1.0 + t),
                    d1: 0.5 * d / width * sech2,
                    d2: -d / (width * width) * sech2 * t,
                    d3: d / width.powi(3) * (2.0 * sech2 * t * t - sech2 * sech2),
                }
            }
        })
    }

    /// `(ẋ, ż)` at `±∞` for curves with straight ends.
    pub fn asymptotic_tangent(&self) -> Option<((f64, f64), (f64, f64))> {
        let pair = |a: f64| (cos_deg(a), cos_deg(a - 90.0));
        match *self {
            CurveSpec::Line { angle } => Some((pair(angle), pair(angle))),
            CurveSpec::CircularBend {
                angle_in,
                angle_out,
                ..
            }
            | CurveSpec::DoubleBend {
                angle_in,
                angle_out,
                ..
            }
            | CurveSpec::SmoothBend {
                angle_in,
                angle_out,
                ..
            } => Some((pair(angle_in), pair(angle_out))),
            _ => None,
        }
    }

    /// Sample points of a builtin: uniform pieces with the joins as nodes.
    fn builtin_grid(&self) -> Vec<f64> {
        let (lo, hi, step) = match *self {
            CurveSpec::Circle { radius } => {
                let half = std::f64::consts::PI * radius;
                (-half, half, (radius * 5e-3).min(1e-2))
            }
            CurveSpec::SmoothBend { width, .. } => (
                -LEAD - 10.0 * width,
                LEAD + 10.0 * width,
                (width * 5e-3).min(1e-2),
            ),
            CurveSpec::CircularBend { radius, .. } | CurveSpec::DoubleBend { radius, .. } => {
                let joins = self.joins();
                let a = joins.first().copied().unwrap_or(0.0).min(0.0);
                let b = joins.last().copied().unwrap_or(0.0).max(0.0);
                (a - LEAD, b + LEAD, (radius * 5e-3).min(1e-2))
            }
            _ => (-LEAD, LEAD, 1e-2),
        };
        let mut breaks = vec![lo, 0.0, hi];
        breaks.extend(self.joins().into_iter().filter(|j| *j > lo && *j < hi));
        breaks.sort_by(f64::total_cmp);
        breaks.dedup();
        let mut s = vec![lo];
        for w in breaks.windows(2) {
            let n = ((w[1] - w[0]) / step).ceil().max(1.0) as usize;
            s.extend((1..n).map(|i| w[0] + (w[1] - w[0]) * (i as f64 / n as f64)));
            s.push(w[1]);
        }
        s
    }

    /// `(s, x, z)` samples. Builtins are integrated from the tangent angle
    /// with the origin at `s = 0`.
    pub fn sampled(&self) -> Result<SampledCurve> {
        self.validate()?;
        if let CurveSpec::Samples { s, x, z, .. } = self {
            return Ok(SampledCurve {
                s: s.clone(),
                x: x.clone(),
                z: z.clone(),
            });
        }
        let s = self.builtin_grid();
        let origin = s.iter().position(|v| *v == 0.0).expect("grid contains 0");
        let mut x = vec![0.0; s.len()];
        let mut z = vec![0.0; s.len()];
        let step = |a: f64, b: f64| {
            let theta = |t: f64| self.tangent(t).expect("builtin").theta;
            (
                gauss_legendre(|t| theta(t).cos(), a, b),
                gauss_legendre(|t| theta(t).sin(), a, b),
            )
        };
        for i in origin + 1..s.len() {
            let (dx, dz) = step(s[i - 1], s[i]);
            x[i] = x[i - 1] + dx;
            z[i] = z[i - 1] + dz;
        }
        for i in (0..origin).rev() {
            let (dx, dz) = step(s[i], s[i + 1]);
            x[i] = x[i + 1] - dx;
            z[i] = z[i + 1] - dz;
        }
        Ok(SampledCurve { s, x, z })
    }
}

/// Cosine of an angle in degrees, exact at multiples of 90°.
fn cos_deg(a: f64) -> f64 {
    let r = a.rem_euclid(360.0);
    match r {
        0.0 => 1.0,
        90.0 | 270.0 => 0.0,
        180.0 => -1.0,
        _ => r.to_radians().cos(),
    }
}

/// Five-point Gauss–Legendre rule on `[a, b]`.
fn gauss_legendre(f: impl Fn(f64) -> f64, a: f64, b: f64) -> f64 {
    const NODES: [(f64, f64); 5] = [
        (0.0, 0.568_888_888_888_888_9),
        (-0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (0.538_469_310_105_683_1, 0.478_628_670_499_366_5),
        (-0.906_179_845_938_664, 0.236_926_885_056_189_1),
        (0.906_179_845_938_664, 0.236_926_885_056_189_1),
    ];
    let (mid, half) = (0.5 * (a + b), 0.5 * (b - a));
    half * NODES
        .iter()
        .map(|(t, w)| w * f(mid + half * t))
        .sum::<f64>()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SampledCurve {
    pub s: Vec<f64>,
    pub x: Vec<f64>,
    pub z: Vec<f64>,
}

impl SampledCurve {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "s,x,z")?;
        for i in 0..self.s.len() {
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e}",
                self.s[i], self.x[i], self.z[i]
            )?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Three-point first and second derivatives on a nonuniform grid. The ends
/// use one-sided first derivatives and copy the neighbouring second
/// derivative.
pub fn differentiate(s: &[f64], f: &[f64]) -> (Vec<f64>, Vec<f64>) {
    let n = s.len();
    let mut d1 = vec![0.0; n];
    let mut d2 = vec![0.0; n];
    for i in 1..n - 1 {
        let (h1, h2) = (s[i] - s[i - 1], s[i + 1] - s[i]);
        d1[i] = -h2 / (h1 * (h1 + h2)) * f[i - 1]
            + (h2 - h1) / (h1 * h2) * f[i]
            + h1 / (h2 * (h1 + h2)) * f[i + 1];
        d2[i] =
            2.0 * (f[i - 1] / (h1 * (h1 + h2)) - f[i] / (h1 * h2) + f[i + 1] / (h2 * (h1 + h2)));
    }
    let one_sided = |i0: usize, i1: usize, i2: usize| {
        let (h1, h2) = (s[i1] - s[i0], s[i2] - s[i0]);
        // quadratic through the three points, derivative at s[i0]
        let c1 = (h1 + h2) / (h1 * h2);
        let c2 = h2 / (h1 * (h2 - h1));
        let c3 = h1 / (h2 * (h2 - h1));
        -c1 * f[i0] + c2 * f[i1] - c3 * f[i2]
    };
    d1[0] = one_sided(0, 1, 2);
    d1[n - 1] = one_sided(n - 1, n - 2, n - 3);
    d2[0] = d2[1];
    d2[n - 1] = d2[n - 2];
    (d1, d2)
}

fn validate_samples(s: &[f64], x: &[f64], z: &[f64], arc_tol: f64) -> Result<()> {
    if s.len() < 5 {
        return Err(Error::Geometry("curve needs at least 5 samples".into()));
    }
    if x.len() != s.len() || z.len() != s.len() {
        return Err(Error::Geometry(format!(
            "sample lengths differ: s {}, x {}, z {}",
            s.len(),
            x.len(),
            z.len()
        )));
    }
    if s.iter().chain(x).chain(z).any(|v| !v.is_finite()) {
        return Err(Error::Geometry("curve samples must be finite".into()));
    }
    if let Some(i) = s.windows(2).position(|w| !(w[0] < w[1])) {
        return Err(Error::Geometry(format!(
            "arc-length samples must increase strictly (index {})",
            i + 1
        )));
    }
    let kappa = fd_curvature(s, x, z);
    let mut worst: Option<(f64, f64)> = None;
    for i in 0..s.len() - 1 {
        let ds = s[i + 1] - s[i];
        let chord = (x[i + 1] - x[i]).hypot(z[i + 1] - z[i]);
        // a unit-speed arc of curvature κ has chord ds − κ²ds³/24 + …
        let k = kappa[i].max(kappa[i + 1]);
        let sag = 1.5 * k * k * ds.powi(3) / 24.0;
        let excess = if chord > ds {
            (chord - ds) / ds
        } else {
            ((ds - chord - sag) / ds).max(0.0)
        };
        if excess > arc_tol && worst.is_none_or(|(_, e)| excess > e) {
            worst = Some((s[i], excess));
        }
    }
    match worst {
        Some((at, e)) => Err(Error::Geometry(format!(
            "curve is not unit speed: relative chord/arc mismatch {e:.3e} at s = {at}"
        ))),
        None => Ok(()),
    }
}

fn fd_curvature(s: &[f64], x: &[f64], z: &[f64]) -> Vec<f64> {
    let (_, xdd) = differentiate(s, x);
    let (_, zdd) = differentiate(s, z);
    xdd.iter().zip(&zdd).map(|(a, b)| a.hypot(*b)).collect()
}

/// Curvature and its derivatives on the sample grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurvatureTable {
    pub s: Vec<f64>,
    pub kappa: Vec<f64>,
    pub kappa_dot: Vec<f64>,
    pub kappa_ddot: Vec<f64>,
    pub x_dot: Vec<f64>,
    /// Points where `κ̇` or `κ̈` do not exist.
    pub joins: Vec<f64>,
    /// Closed-form values rather than finite differences.
    pub exact: bool,
}

impl CurvatureTable {
    pub fn kappa_max(&self) -> f64 {
        self.kappa.iter().fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// Linear interpolation of `(κ, κ̇, κ̈)`, constant beyond the samples.
    pub fn at(&self, s: f64) -> (f64, f64, f64) {
        let n = self.s.len();
        if s <= self.s[0] {
            return (self.kappa[0], self.kappa_dot[0], self.kappa_ddot[0]);
        }
        if s >= self.s[n - 1] {
            return (
                self.kappa[n - 1],
                self.kappa_dot[n - 1],
                self.kappa_ddot[n - 1],
            );
        }
        let j = self.s.partition_point(|v| *v <= s) - 1;
        let t = (s - self.s[j]) / (self.s[j + 1] - self.s[j]);
        let lerp = |v: &[f64]| v[j] + t * (v[j + 1] - v[j]);
        (
            lerp(&self.kappa),
            lerp(&self.kappa_dot),
            lerp(&self.kappa_ddot),
        )
    }
}

/// `κ = sqrt(ẍ² + z̈²)` and its derivatives. Builtins use closed forms;
/// sampled curves use second-order differences.
pub fn curvature(c: &CurveSpec) -> Result<CurvatureTable> {
    let sampled = c.sampled()?;
    if c.is_builtin() {
        let tangents: Vec<Tangent> = sampled
            .s
            .iter()
            .map(|&s| c.tangent(s).expect("builtin"))
            .collect();
        let sign = |t: &Tangent| if t.d1 < 0.0 { -1.0 } else { 1.0 };
        return Ok(CurvatureTable {
            kappa: tangents.iter().map(|t| t.d1.abs()).collect(),
            kappa_dot: tangents.iter().map(|t| sign(t) * t.d2).collect(),
            kappa_ddot: tangents.iter().map(|t| sign(t) * t.d3).collect(),
            x_dot: tangents.iter().map(|t| t.theta.cos()).collect(),
            joins: c.joins(),
            exact: true,
            s: sampled.s,
        });
    }
    let SampledCurve { s, x, z } = sampled;
    let kappa = fd_curvature(&s, &x, &z);
    let (kappa_dot, kappa_ddot) = differentiate(&s, &kappa);
    let (x_dot, _) = differentiate(&s, &x);
    Ok(CurvatureTable {
        s,
        kappa,
        kappa_dot,
        kappa_ddot,
        x_dot,
        joins: Vec::new(),
        exact: false,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffectiveProfile {
    pub curve: CurveSpec,
    pub b0: f64,
    /// Tabulated `B₀ẋ(s)`.
    pub b_eff: ProfileSpec,
    /// Tabulated `−κ(s)²/4`.
    pub w_eff: ProfileSpec,
    pub kappa: ProfileSpec,
    pub tails: TailBounds,
    pub curvature: CurvatureTable,
}

impl EffectiveProfile {
    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let c = &self.curvature;
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(out, "s,b_eff,w_eff,kappa")?;
        for i in 0..c.s.len() {
            let k = c.kappa[i];
            writeln!(
                out,
                "{:.16e},{:.16e},{:.16e},{:.16e}",
                c.s[i],
                self.b0 * c.x_dot[i],
                -0.25 * k * k,
                k
            )?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn band_problem(&self) -> Result<BandProblem> {
        Ok(BandProblem::with_tails(
            Profile::new(self.b_eff.clone())?,
            Profile::new(self.w_eff.clone())?,
            self.tails.clone(),
        ))
    }
}

/// Effective field and potential of the layer over `c` in field `b0`.
pub fn effective_profile(c: &CurveSpec, b0: f64) -> Result<EffectiveProfile> {
    if !(b0 > 0.0 && b0.is_finite()) {
        return Err(Error::validation(format!("B0 must be positive, got {b0}")));
    }
    let table = curvature(c)?;
    let n = table.s.len();
    let b: Vec<f64> = table.x_dot.iter().map(|v| b0 * v).collect();
    let w: Vec<f64> = table.kappa.iter().map(|k| -0.25 * k * k).collect();
    let exact = c.asymptotic_tangent();
    let (b_tails, w_tails) = match exact {
        Some(((xm, _), (xp, _))) => ((b0 * xm, b0 * xp), (0.0, 0.0)),
        None => ((b[0], b[n - 1]), (w[0], w[n - 1])),
    };
    let b_eff = ProfileSpec::tabulated(table.s.clone(), b, b_tails.0, b_tails.1);
    let w_eff = ProfileSpec::tabulated(table.s.clone(), w, w_tails.0, w_tails.1);
    let kappa = ProfileSpec::tabulated(
        table.s.clone(),
        table.kappa.clone(),
        table.kappa[0],
        table.kappa[n - 1],
    );
    let tails = match exact {
        Some(_) => TailBounds::from_limits(b_tails, w_tails),
        None => tail_bounds(&Profile::new(b_eff.clone())?, &Profile::new(w_eff.clone())?),
    };
    Ok(EffectiveProfile {
        curve: c.clone(),
        b0,
        b_eff,
        w_eff,
        kappa,
        tails,
        curvature: table,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerClause {
    /// Positive tangent tails with the curvature gap below `4B₀` times the
    /// tangent gap.
    CurvatureGap,
    /// `ẋ` tails of opposite sign.
    SignSplit,
    CurvatureGapSwapped,
    SignSplitSwapped,
    None,
}

impl From<AcCondition> for LayerClause {
    fn from(c: AcCondition) -> Self {
        match c {
            AcCondition::Cond1_3 => LayerClause::CurvatureGap,
            AcCondition::Cond1_4 => LayerClause::SignSplit,
            AcCondition::Cond1_3Swapped => LayerClause::CurvatureGapSwapped,
            AcCondition::Cond1_4Swapped => LayerClause::SignSplitSwapped,
            AcCondition::None => LayerClause::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerAcReport {
    pub decision: AcDecision,
    pub clause: LayerClause,
    /// Slack of the matched clause multiplied by 4, i.e. in units of the
    /// `κ²`-versus-`4B₀ ẋ` inequality.
    pub scaled_margin: f64,
}

pub fn layer_ac_check(e: &EffectiveProfile) -> LayerAcReport {
    let decision = ac_condition(&e.tails);
    let scaled_margin = match decision.matched_condition {
        AcCondition::Cond1_3 | AcCondition::Cond1_3Swapped => 4.0 * decision.margin,
        _ => decision.margin,
    };
    LayerAcReport {
        clause: decision.matched_condition.into(),
        decision,
        scaled_margin,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerGeometry {
    pub half_width: f64,
    pub u: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LayerPotentialValue {
    pub value: f64,
    /// `s` is within two sample spacings of a curvature jump.
    pub near_join: bool,
}

/// `V(s,u) = −κ²/(4f²) − a u κ̈/(2f³) − (5/4) a² u² κ̇²/f⁴` with
/// `f = 1 − a u κ`.
pub fn layer_potential_from(kappa: (f64, f64, f64), a: f64, u: f64) -> Result<f64> {
    let (k, kd, kdd) = kappa;
    let f = 1.0 - a * u * k;
    if !(f > 0.0) {
        return Err(Error::Geometry(format!("f_a = {f} is not positive")));
    }
    Ok(-0.25 * k * k / (f * f)
        - 0.5 * a * u * kdd / f.powi(3)
        - 1.25 * a * a * u * u * kd * kd / f.powi(4))
}

pub fn layer_potential_v(
    c: &CurvatureTable,
    geom: &LayerGeometry,
    s: f64,
    u: f64,
) -> Result<LayerPotentialValue> {
    let a = geom.half_width;
    if !(a > 0.0) {
        return Err(Error::Geometry(format!(
            "half width must be positive, got {a}"
        )));
    }
    if !(u > -1.0 && u < 1.0) {
        return Err(Error::Geometry(format!("u must lie in (-1, 1), got {u}")));
    }
    if a * c.kappa_max() >= 1.0 {
        return Err(Error::Geometry(format!(
            "half width {a} is not below 1/max(kappa) = {}",
            1.0 / c.kappa_max()
        )));
    }
    let spacing = c.s.windows(2).map(|w| w[1] - w[0]).fold(0.0_f64, f64::max);
    let near_join = c.joins.iter().any(|j| (s - j).abs() <= 2.0 * spacing);
    Ok(LayerPotentialValue {
        value: layer_potential_from(c.at(s), a, u)?,
        near_join,
    })
}

/// Bands of the effective Hamiltonian.
pub fn layer_bands(
    e: &EffectiveProfile,
    xi_grid: &[f64],
    k: usize,
    opts: &SweepOptions,
) -> Result<BandSweep> {
    sweep(&e.band_problem()?, xi_grid, k, opts)
}
