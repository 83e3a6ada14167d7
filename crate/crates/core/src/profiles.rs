//! Magnetic-field and electric-potential profiles on the real line.
//!
//! A [`ProfileSpec`] is the serializable description; [`Profile`] is the
//! validated, immutable form that every numerical routine consumes. Tail
//! bounds follow the half-line sup-essinf / inf-esssup envelopes, and
//! [`ac_condition`] decides the absolute-continuity criteria from them.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Largest bump exponent accepted; the closed-form antiderivative expands
/// `(1 - u^2)^m` and loses digits to cancellation beyond this.
pub const MAX_BUMP_EXPONENT: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum ProfileSpec {
    Constant {
        value: f64,
    },
    /// `left` for `x < x_jump`, `right` for `x >= x_jump`.
    Step {
        left: f64,
        right: f64,
        x_jump: f64,
    },
    /// Smooth monotone transition `mid + half * tanh((x - center) / width)`.
    TanhStep {
        left: f64,
        right: f64,
        center: f64,
        width: f64,
    },
    /// `base + amplitude * (4 t (1 - t))^exponent` on the support, `t` the
    /// relative position inside `[support_left, support_right]`; `base`
    /// elsewhere. Near either support edge the excursion behaves like
    /// `c (x - a)^exponent`.
    Bump {
        base: f64,
        amplitude: f64,
        support_left: f64,
        support_right: f64,
        exponent: u32,
    },
    /// `values[0]` below `breakpoints[0]`, `values[i + 1]` on
    /// `[breakpoints[i], breakpoints[i + 1])`, `values.last()` beyond.
    PiecewiseConstant {
        breakpoints: Vec<f64>,
        values: Vec<f64>,
    },
    /// Linear interpolation inside the sample range, constant declared tail
    /// values outside it.
    Tabulated {
        x: Vec<f64>,
        y: Vec<f64>,
        left_tail: f64,
        right_tail: f64,
    },
}

impl ProfileSpec {
    pub fn constant(value: f64) -> Self {
        ProfileSpec::Constant { value }
    }

    pub fn step(left: f64, right: f64, x_jump: f64) -> Self {
        ProfileSpec::Step {
            left,
            right,
            x_jump,
        }
    }

    pub fn tanh_step(left: f64, right: f64, center: f64, width: f64) -> Self {
        ProfileSpec::TanhStep {
            left,
            right,
            center,
            width,
        }
    }

    pub fn bump(base: f64, amplitude: f64, support: (f64, f64), exponent: u32) -> Self {
        ProfileSpec::Bump {
            base,
            amplitude,
            support_left: support.0,
            support_right: support.1,
            exponent,
        }
    }

    pub fn tabulated(x: Vec<f64>, y: Vec<f64>, left_tail: f64, right_tail: f64) -> Self {
        ProfileSpec::Tabulated {
            x,
            y,
            left_tail,
            right_tail,
        }
    }

    pub fn kind_name(&self) -> &'static str {
        match self {
            ProfileSpec::Constant { .. } => "constant",
            ProfileSpec::Step { .. } => "step",
            ProfileSpec::TanhStep { .. } => "tanh_step",
            ProfileSpec::Bump { .. } => "bump",
            ProfileSpec::PiecewiseConstant { .. } => "piecewise_constant",
            ProfileSpec::Tabulated { .. } => "tabulated",
        }
    }

    pub fn validate(&self) -> Result<()> {
        let finite = |name: &str, v: f64| {
            if v.is_finite() {
                Ok(())
            } else {
                Err(Error::validation(format!(
                    "{}: `{name}` must be finite",
                    self.kind_name()
                )))
            }
        };
        match self {
            ProfileSpec::Constant { value } => finite("value", *value),
            ProfileSpec::Step {
                left,
                right,
                x_jump,
            } => {
                finite("left", *left)?;
                finite("right", *right)?;
                finite("x_jump", *x_jump)
            }
            ProfileSpec::TanhStep {
                left,
                right,
                center,
                width,
            } => {
                finite("left", *left)?;
                finite("right", *right)?;
                finite("center", *center)?;
                finite("width", *width)?;
                if *width <= 0.0 {
                    return Err(Error::validation("tanh_step: `width` must be positive"));
                }
                Ok(())
            }
            ProfileSpec::Bump {
                base,
                amplitude,
                support_left,
                support_right,
                exponent,
            } => {
                finite("base", *base)?;
                finite("amplitude", *amplitude)?;
                finite("support_left", *support_left)?;
                finite("support_right", *support_right)?;
                if support_left >= support_right {
                    return Err(Error::validation(
                        "bump: `support_left` must be below `support_right`",
                    ));
                }
                if *exponent < 1 || *exponent > MAX_BUMP_EXPONENT {
                    return Err(Error::validation(format!(
                        "bump: `exponent` must be an integer in [1, {MAX_BUMP_EXPONENT}]"
                    )));
                }
                Ok(())
            }
            ProfileSpec::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if values.len() != breakpoints.len() + 1 {
                    return Err(Error::validation(format!(
                        "piecewise_constant: expected {} values for {} breakpoints, got {}",
                        breakpoints.len() + 1,
                        breakpoints.len(),
                        values.len()
                    )));
                }
                if breakpoints.iter().chain(values).any(|v| !v.is_finite()) {
                    return Err(Error::validation(
                        "piecewise_constant: breakpoints and values must be finite",
                    ));
                }
                if breakpoints.windows(2).any(|w| w[0] >= w[1]) {
                    return Err(Error::validation(
                        "piecewise_constant: breakpoints must be strictly increasing",
                    ));
                }
                Ok(())
            }
            ProfileSpec::Tabulated {
                x,
                y,
                left_tail,
                right_tail,
            } => {
                if x.is_empty() {
                    return Err(Error::validation("tabulated: no samples"));
                }
                if x.len() != y.len() {
                    return Err(Error::validation(format!(
                        "tabulated: {} x samples but {} y samples",
                        x.len(),
                        y.len()
                    )));
                }
                if x.iter().chain(y).any(|v| !v.is_finite()) {
                    return Err(Error::validation("tabulated: samples must be finite"));
                }
                if let Some(i) = x.windows(2).position(|w| w[0] >= w[1]) {
                    return Err(Error::validation(format!(
                        "tabulated: x samples must be strictly increasing (x[{}] = {} >= x[{}] = {})",
                        i,
                        x[i],
                        i + 1,
                        x[i + 1]
                    )));
                }
                finite("left_tail", *left_tail)?;
                finite("right_tail", *right_tail)
            }
        }
    }
}

/// A validated profile. Cheap to clone for analytic kinds.
#[derive(Debug, Clone, PartialEq)]
pub struct Profile {
    spec: ProfileSpec,
}

impl Profile {
    pub fn new(spec: ProfileSpec) -> Result<Self> {
        spec.validate()?;
        Ok(Profile { spec })
    }

    pub fn constant(value: f64) -> Self {
        Profile {
            spec: ProfileSpec::constant(value),
        }
    }

    pub fn spec(&self) -> &ProfileSpec {
        &self.spec
    }

    pub fn is_analytic(&self) -> bool {
        !matches!(self.spec, ProfileSpec::Tabulated { .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match &self.spec {
            ProfileSpec::Constant { value } => *value,
            ProfileSpec::Step {
                left,
                right,
                x_jump,
            } => {
                if x < *x_jump {
                    *left
                } else {
                    *right
                }
            }
            ProfileSpec::TanhStep {
                left,
                right,
                center,
                width,
            } => {
                let mid = 0.5 * (left + right);
                let half = 0.5 * (right - left);
                mid + half * ((x - center) / width).tanh()
            }
            ProfileSpec::Bump {
                base,
                amplitude,
                support_left,
                support_right,
                exponent,
            } => {
                if x <= *support_left || x >= *support_right {
                    return *base;
                }
                let u = 2.0 * (x - support_left) / (support_right - support_left) - 1.0;
                base + amplitude * (1.0 - u * u).powi(*exponent as i32)
            }
            ProfileSpec::PiecewiseConstant {
                breakpoints,
                values,
            } => values[breakpoints.partition_point(|&b| b <= x)],
            ProfileSpec::Tabulated {
                x: xs,
                y: ys,
                left_tail,
                right_tail,
            } => {
                let n = xs.len();
                if x < xs[0] {
                    return *left_tail;
                }
                if x > xs[n - 1] {
                    return *right_tail;
                }
                if n == 1 {
                    return ys[0];
                }
                let j = xs.partition_point(|&s| s <= x).clamp(1, n - 1);
                let (x0, x1) = (xs[j - 1], xs[j]);
                let t = (x - x0) / (x1 - x0);
                ys[j - 1] + t * (ys[j] - ys[j - 1])
            }
        }
    }

    /// Exact limiting tail bounds for analytic kinds as
    /// `(minus, plus)` pairs of `(under, over)`.
    fn exact_tails(&self) -> Option<((f64, f64), (f64, f64))> {
        let (l, r) = match &self.spec {
            ProfileSpec::Constant { value } => (*value, *value),
            ProfileSpec::Step { left, right, .. } => (*left, *right),
            ProfileSpec::TanhStep { left, right, .. } => (*left, *right),
            ProfileSpec::Bump { base, .. } => (*base, *base),
            ProfileSpec::PiecewiseConstant { values, .. } => (values[0], values[values.len() - 1]),
            ProfileSpec::Tabulated { .. } => return None,
        };
        Some(((l, l), (r, r)))
    }

    fn sampled_tails(&self, window: &TailWindow) -> ((f64, f64), (f64, f64)) {
        let (first, last) = match &self.spec {
            ProfileSpec::Tabulated { x, .. } => (x[0], x[x.len() - 1]),
            _ => (0.0, 0.0),
        };
        let plus_start = window.plus_start.unwrap_or(last);
        let minus_end = window.minus_end.unwrap_or(first);
        let n = window.n_points.max(1);
        let step = window.length / n as f64;
        let envelope = |points: &mut dyn Iterator<Item = f64>| {
            points.fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), x| {
                let v = self.eval(x);
                (lo.min(v), hi.max(v))
            })
        };
        let plus = envelope(&mut (1..=n).map(|i| plus_start + step * i as f64));
        let minus = envelope(&mut (1..=n).map(|i| minus_end - step * i as f64));
        (minus, plus)
    }
}

/// Sampling window for tail bounds of tabulated profiles. The `+` window is
/// `(plus_start, plus_start + length]`, the `-` window mirrors it below
/// `minus_end`. Unset anchors default to the last / first sample.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailWindow {
    #[serde(default)]
    pub plus_start: Option<f64>,
    #[serde(default)]
    pub minus_end: Option<f64>,
    #[serde(default = "TailWindow::default_length")]
    pub length: f64,
    #[serde(default = "TailWindow::default_points")]
    pub n_points: usize,
}

impl TailWindow {
    fn default_length() -> f64 {
        100.0
    }

    fn default_points() -> usize {
        100_000
    }
}

impl Default for TailWindow {
    fn default() -> Self {
        TailWindow {
            plus_start: None,
            minus_end: None,
            length: Self::default_length(),
            n_points: Self::default_points(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Provenance {
    Exact,
    /// At least one profile was tabulated; the bounds are sample extrema.
    Sampled {
        window_length: f64,
        n_points: usize,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBounds {
    pub b_under_plus: f64,
    pub b_over_plus: f64,
    pub b_under_minus: f64,
    pub b_over_minus: f64,
    pub w_under_plus: f64,
    pub w_over_plus: f64,
    pub w_under_minus: f64,
    pub w_over_minus: f64,
    pub provenance: Provenance,
}

impl TailBounds {
    /// Exact bounds from limiting values `(minus, plus)` of B and W.
    pub fn from_limits(b: (f64, f64), w: (f64, f64)) -> Self {
        TailBounds {
            b_under_plus: b.1,
            b_over_plus: b.1,
            b_under_minus: b.0,
            b_over_minus: b.0,
            w_under_plus: w.1,
            w_over_plus: w.1,
            w_under_minus: w.0,
            w_over_minus: w.0,
            provenance: Provenance::Exact,
        }
    }

    /// Interchange every `+` and `-` field.
    pub fn swapped(&self) -> Self {
        TailBounds {
            b_under_plus: self.b_under_minus,
            b_over_plus: self.b_over_minus,
            b_under_minus: self.b_under_plus,
            b_over_minus: self.b_over_plus,
            w_under_plus: self.w_under_minus,
            w_over_plus: self.w_over_minus,
            w_under_minus: self.w_under_plus,
            w_over_minus: self.w_over_plus,
            provenance: self.provenance.clone(),
        }
    }

    pub fn is_exact(&self) -> bool {
        self.provenance == Provenance::Exact
    }

    pub fn validate(&self) -> Result<()> {
        let pairs = [
            ("b+", self.b_under_plus, self.b_over_plus),
            ("b-", self.b_under_minus, self.b_over_minus),
            ("w+", self.w_under_plus, self.w_over_plus),
            ("w-", self.w_under_minus, self.w_over_minus),
        ];
        for (name, under, over) in pairs {
            if !(under.is_finite() && over.is_finite()) {
                return Err(Error::validation(format!("tail bounds {name} not finite")));
            }
            if under > over {
                return Err(Error::validation(format!(
                    "tail bounds {name}: under {under} exceeds over {over}"
                )));
            }
        }
        Ok(())
    }

    /// Largest absolute tail value of the field.
    pub fn b_scale(&self) -> f64 {
        [
            self.b_under_plus,
            self.b_over_plus,
            self.b_under_minus,
            self.b_over_minus,
        ]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()))
    }

    /// |A_y| grows without bound on both half-lines.
    pub fn is_confining(&self) -> bool {
        let right = self.b_under_plus > 0.0 || self.b_over_plus < 0.0;
        let left = self.b_under_minus > 0.0 || self.b_over_minus < 0.0;
        right && left
    }

    pub fn both_fields_positive(&self) -> bool {
        self.b_under_plus > 0.0 && self.b_under_minus > 0.0
    }
}

pub fn tail_bounds(b: &Profile, w: &Profile) -> TailBounds {
    tail_bounds_with(b, w, &TailWindow::default())
}

pub fn tail_bounds_with(b: &Profile, w: &Profile, window: &TailWindow) -> TailBounds {
    let side = |p: &Profile| p.exact_tails().ok_or_else(|| p.sampled_tails(window));
    let (b_tails, b_exact) = match side(b) {
        Ok(t) => (t, true),
        Err(t) => (t, false),
    };
    let (w_tails, w_exact) = match side(w) {
        Ok(t) => (t, true),
        Err(t) => (t, false),
    };
    let provenance = if b_exact && w_exact {
        Provenance::Exact
    } else {
        Provenance::Sampled {
            window_length: window.length,
            n_points: window.n_points,
        }
    };
    TailBounds {
        b_under_plus: b_tails.1 .0,
        b_over_plus: b_tails.1 .1,
        b_under_minus: b_tails.0 .0,
        b_over_minus: b_tails.0 .1,
        w_under_plus: w_tails.1 .0,
        w_over_plus: w_tails.1 .1,
        w_under_minus: w_tails.0 .0,
        w_over_minus: w_tails.0 .1,
        provenance,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AcCondition {
    /// Both tails positive, right field dominates, W gap smaller than B gap.
    #[serde(rename = "cond_1_3")]
    Cond1_3,
    /// Field positive on the right tail and negative on the left.
    #[serde(rename = "cond_1_4")]
    Cond1_4,
    #[serde(rename = "cond_1_3_swapped")]
    Cond1_3Swapped,
    #[serde(rename = "cond_1_4_swapped")]
    Cond1_4Swapped,
    None,
}

impl AcCondition {
    pub fn is_swapped(self) -> bool {
        matches!(
            self,
            AcCondition::Cond1_3Swapped | AcCondition::Cond1_4Swapped
        )
    }

    /// The same condition with the `+`/`-` roles exchanged.
    pub fn mirrored(self) -> Self {
        match self {
            AcCondition::Cond1_3 => AcCondition::Cond1_3Swapped,
            AcCondition::Cond1_3Swapped => AcCondition::Cond1_3,
            AcCondition::Cond1_4 => AcCondition::Cond1_4Swapped,
            AcCondition::Cond1_4Swapped => AcCondition::Cond1_4,
            AcCondition::None => AcCondition::None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcDecision {
    pub verdict: bool,
    pub matched_condition: AcCondition,
    /// Slack of the deciding strict inequality, 0 when nothing matched.
    pub margin: f64,
    /// Every condition that holds, in evaluation order.
    pub all_matches: Vec<AcCondition>,
    /// Set when the tail bounds were sampled rather than exact.
    pub heuristic: bool,
}

/// Slack of the `(1.3)`-type condition on `t` as given, if it holds.
fn gap_condition(t: &TailBounds) -> Option<f64> {
    let positive = t.b_under_plus > 0.0 && t.b_under_minus > 0.0;
    let dominates = t.b_under_plus >= t.b_over_minus;
    let slack = (t.b_under_plus - t.b_over_minus) - (t.w_over_minus - t.w_under_plus);
    let w_gap = t.w_over_minus - t.w_under_plus < t.b_under_plus - t.b_over_minus;
    (positive && dominates && w_gap).then_some(slack)
}

/// Slack of the `(1.4)`-type sign-split condition on `t`, if it holds.
fn sign_split_condition(t: &TailBounds) -> Option<f64> {
    (t.b_under_plus > 0.0 && t.b_over_minus < 0.0).then(|| t.b_under_plus.min(-t.b_over_minus))
}

pub fn ac_condition(t: &TailBounds) -> AcDecision {
    let swapped = t.swapped();
    let checks = [
        (AcCondition::Cond1_3, gap_condition(t)),
        (AcCondition::Cond1_4, sign_split_condition(t)),
        (AcCondition::Cond1_3Swapped, gap_condition(&swapped)),
        (AcCondition::Cond1_4Swapped, sign_split_condition(&swapped)),
    ];
    let all_matches: Vec<_> = checks
        .iter()
        .filter(|(_, m)| m.is_some())
        .map(|(c, _)| *c)
        .collect();
    let first = checks.iter().find_map(|(c, m)| m.map(|slack| (*c, slack)));
    let (matched_condition, margin) = first.unwrap_or((AcCondition::None, 0.0));
    AcDecision {
        verdict: matched_condition != AcCondition::None,
        matched_condition,
        margin,
        all_matches,
        heuristic: !t.is_exact(),
    }
}

pub fn eval_profile(p: &ProfileSpec, x: f64) -> Result<f64> {
    Ok(Profile::new(p.clone())?.eval(x))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CatalogEntry {
    pub name: &'static str,
    pub b: ProfileSpec,
    pub w: ProfileSpec,
    pub note: &'static str,
}

pub fn builtin_catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "landau",
            b: ProfileSpec::constant(1.0),
            w: ProfileSpec::constant(0.0),
            note: "constant unit field without electric potential; flat Landau bands 2n-1",
        },
        CatalogEntry {
            name: "iwatsuka-step",
            b: ProfileSpec::step(1.0, 2.0, 0.0),
            w: ProfileSpec::constant(0.0),
            note: "magnetic step 1 -> 2; limsup on the left below liminf on the right",
        },
        CatalogEntry {
            name: "sign-change",
            b: ProfileSpec::tanh_step(-1.0, 1.0, 0.0, 1.0),
            w: ProfileSpec::constant(0.0),
            note: "field changes sign between the tails (sign-split condition)",
        },
        CatalogEntry {
            name: "bump-negative",
            b: ProfileSpec::bump(1.0, -3.0, (-1.0, 1.0), 1),
            w: ProfileSpec::constant(0.0),
            note: "compactly supported perturbation of B0 = 1 that drives the field negative on [-1, 1]",
        },
        CatalogEntry {
            name: "bump-positive",
            b: ProfileSpec::bump(1.0, 0.5, (-1.0, 1.0), 2),
            w: ProfileSpec::constant(0.0),
            note: "non-negative compactly supported perturbation of B0 = 1 with quadratic edge onset",
        },
        CatalogEntry {
            name: "electric-step",
            b: ProfileSpec::step(1.0, 2.0, 0.0),
            w: ProfileSpec::step(0.5, 0.0, 0.0),
            note: "magnetic step 1 -> 2 with electric step 0.5 -> 0; W gap 0.5 below B gap 1",
        },
    ]
}

pub fn builtin(name: &str) -> Option<CatalogEntry> {
    builtin_catalog().into_iter().find(|e| e.name == name)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn tb(b: [f64; 4], w: [f64; 4]) -> TailBounds {
        // order: under_plus, over_plus, under_minus, over_minus
        TailBounds {
            b_under_plus: b[0],
            b_over_plus: b[1],
            b_under_minus: b[2],
            b_over_minus: b[3],
            w_under_plus: w[0],
            w_over_plus: w[1],
            w_under_minus: w[2],
            w_over_minus: w[3],
            provenance: Provenance::Exact,
        }
    }

    #[test]
    fn eval_examples() {
        assert_eq!(
            eval_profile(&ProfileSpec::constant(2.0), 17.3).unwrap(),
            2.0
        );
        let step = ProfileSpec::step(1.0, 2.0, 0.0);
        assert_eq!(eval_profile(&step, -0.5).unwrap(), 1.0);
        assert_eq!(eval_profile(&step, 0.5).unwrap(), 2.0);
        let tab = ProfileSpec::tabulated(vec![0.0, 1.0], vec![0.0, 2.0], 0.0, 2.0);
        assert_eq!(eval_profile(&tab, 0.5).unwrap(), 1.0);
        assert_eq!(eval_profile(&tab, -3.0).unwrap(), 0.0);
        assert_eq!(eval_profile(&tab, 9.0).unwrap(), 2.0);
    }

    #[test]
    fn tabulated_rejects_non_increasing() {
        let tab = ProfileSpec::tabulated(vec![0.0, 1.0, 1.0], vec![0.0, 2.0, 3.0], 0.0, 2.0);
        assert!(matches!(eval_profile(&tab, 0.5), Err(Error::Validation(_))));
        let short = ProfileSpec::tabulated(vec![0.0, 1.0], vec![0.0], 0.0, 2.0);
        assert!(short.validate().is_err());
    }

    #[test]
    fn other_validation_paths() {
        assert!(ProfileSpec::tanh_step(0.0, 1.0, 0.0, 0.0)
            .validate()
            .is_err());
        assert!(ProfileSpec::bump(1.0, 1.0, (1.0, -1.0), 1)
            .validate()
            .is_err());
        assert!(ProfileSpec::bump(1.0, 1.0, (-1.0, 1.0), 0)
            .validate()
            .is_err());
        let pc = ProfileSpec::PiecewiseConstant {
            breakpoints: vec![0.0, 1.0],
            values: vec![1.0, 2.0],
        };
        assert!(pc.validate().is_err());
    }

    #[test]
    fn piecewise_and_bump_values() {
        let pc = Profile::new(ProfileSpec::PiecewiseConstant {
            breakpoints: vec![0.0, 1.0],
            values: vec![1.0, 2.0, 3.0],
        })
        .unwrap();
        assert_eq!(pc.eval(-1.0), 1.0);
        assert_eq!(pc.eval(0.0), 2.0);
        assert_eq!(pc.eval(0.5), 2.0);
        assert_eq!(pc.eval(1.0), 3.0);
        let bump = Profile::new(ProfileSpec::bump(1.0, -3.0, (-1.0, 1.0), 1)).unwrap();
        assert_eq!(bump.eval(0.0), -2.0);
        assert_eq!(bump.eval(-1.0), 1.0);
        assert_eq!(bump.eval(5.0), 1.0);
    }

    #[test]
    fn tail_bound_examples() {
        let t = tail_bounds(
            &Profile::new(ProfileSpec::step(1.0, 2.0, 0.0)).unwrap(),
            &Profile::constant(0.0),
        );
        assert_eq!((t.b_under_plus, t.b_over_plus), (2.0, 2.0));
        assert_eq!((t.b_under_minus, t.b_over_minus), (1.0, 1.0));
        assert_eq!(
            [
                t.w_under_plus,
                t.w_over_plus,
                t.w_under_minus,
                t.w_over_minus
            ],
            [0.0; 4]
        );
        assert!(t.is_exact());

        let t = tail_bounds(
            &Profile::new(ProfileSpec::bump(1.0, -3.0, (-1.0, 1.0), 1)).unwrap(),
            &Profile::constant(0.0),
        );
        assert_eq!(
            [
                t.b_under_plus,
                t.b_over_plus,
                t.b_under_minus,
                t.b_over_minus
            ],
            [1.0; 4]
        );
    }

    #[test]
    fn tanh_tail_bounds_match_sampled_envelopes() {
        let b = Profile::new(ProfileSpec::tanh_step(1.0, 2.0, 0.0, 1.0)).unwrap();
        let t = tail_bounds(&b, &Profile::constant(0.0));
        assert_eq!(t.b_under_plus, 2.0);
        assert_eq!(t.b_over_plus, 2.0);
        assert_eq!(t.provenance, Provenance::Exact);

        // Sampled essinf over (a, a + 200) approaches the reported bound from
        // below as a grows, and never exceeds it.
        let mut prev_gap = f64::INFINITY;
        for a in [1.0, 4.0, 8.0, 16.0, 32.0] {
            let inf = (1..=20_000)
                .map(|i| b.eval(a + 200.0 * i as f64 / 20_000.0))
                .fold(f64::INFINITY, f64::min);
            let gap = t.b_under_plus - inf;
            assert!(gap >= -1e-12);
            assert!(gap <= prev_gap);
            prev_gap = gap;
        }
        assert!(prev_gap < 1e-12);
    }

    #[test]
    fn tabulated_tail_bounds_are_sampled() {
        let b = Profile::new(ProfileSpec::tabulated(
            vec![0.0, 1.0, 2.0],
            vec![1.0, 3.0, 2.0],
            1.0,
            2.0,
        ))
        .unwrap();
        let t = tail_bounds(&b, &Profile::constant(0.0));
        assert!(!t.is_exact());
        assert_eq!((t.b_under_plus, t.b_over_plus), (2.0, 2.0));
        assert_eq!((t.b_under_minus, t.b_over_minus), (1.0, 1.0));

        let window = TailWindow {
            plus_start: Some(0.5),
            ..TailWindow::default()
        };
        let t = tail_bounds_with(&b, &Profile::constant(0.0), &window);
        assert_eq!(t.b_over_plus, 3.0);
        assert_eq!(t.b_under_plus, 2.0);
        assert!(ac_condition(&t).heuristic);
    }

    #[test]
    fn ac_condition_examples() {
        let d = ac_condition(&tb([2.0, 2.0, 1.0, 1.0], [0.0, 0.0, 0.5, 0.5]));
        assert!(d.verdict);
        assert_eq!(d.matched_condition, AcCondition::Cond1_3);
        assert!((d.margin - 0.5).abs() < 1e-15);

        let d = ac_condition(&tb([1.0, 1.0, -1.0, -1.0], [0.0; 4]));
        assert!(d.verdict);
        assert_eq!(d.matched_condition, AcCondition::Cond1_4);

        let d = ac_condition(&tb([1.0; 4], [0.0; 4]));
        assert!(!d.verdict);
        assert_eq!(d.matched_condition, AcCondition::None);
        assert_eq!(d.margin, 0.0);
        assert!(d.all_matches.is_empty());
    }

    #[test]
    fn ac_condition_boundaries() {
        // B gap equal to the W gap: strict inequality fails.
        let d = ac_condition(&tb([2.0, 2.0, 1.0, 1.0], [0.0, 0.0, 1.0, 1.0]));
        assert!(!d.verdict);
        // b_under_plus == b_over_minus is allowed when W helps.
        let d = ac_condition(&tb([1.0, 1.0, 1.0, 1.0], [0.5, 0.5, 0.0, 0.0]));
        assert_eq!(d.matched_condition, AcCondition::Cond1_3);
        assert!((d.margin - 0.5).abs() < 1e-15);
        // A step down from the left is caught by the swapped condition.
        let d = ac_condition(&tb([1.0, 1.0, 2.0, 2.0], [0.0; 4]));
        assert_eq!(d.matched_condition, AcCondition::Cond1_3Swapped);
    }

    #[test]
    fn catalog_entries() {
        let landau = builtin("landau").unwrap();
        assert_eq!(landau.b, ProfileSpec::constant(1.0));
        assert_eq!(landau.w, ProfileSpec::constant(0.0));
        assert_eq!(
            builtin("iwatsuka-step").unwrap().b,
            ProfileSpec::step(1.0, 2.0, 0.0)
        );
        assert_eq!(
            builtin("sign-change").unwrap().b,
            ProfileSpec::tanh_step(-1.0, 1.0, 0.0, 1.0)
        );
        for entry in builtin_catalog() {
            assert!(!entry.note.is_empty());
            entry.b.validate().unwrap();
            entry.w.validate().unwrap();
        }
        let step = builtin("iwatsuka-step").unwrap();
        let t = tail_bounds(
            &Profile::new(step.b).unwrap(),
            &Profile::new(step.w).unwrap(),
        );
        assert_eq!(ac_condition(&t).matched_condition, AcCondition::Cond1_3);
        let sc = builtin("sign-change").unwrap();
        let t = tail_bounds(&Profile::new(sc.b).unwrap(), &Profile::new(sc.w).unwrap());
        assert_eq!(ac_condition(&t).matched_condition, AcCondition::Cond1_4);
    }

    #[test]
    fn serde_schema() {
        let p: ProfileSpec =
            serde_json::from_str(r#"{"kind":"step","left":1.0,"right":2.0,"x_jump":0.0}"#).unwrap();
        assert_eq!(p, ProfileSpec::step(1.0, 2.0, 0.0));
        let err = serde_json::from_str::<ProfileSpec>(r#"{"kind":"ramp","left":1.0}"#)
            .unwrap_err()
            .to_string();
        assert!(
            err.contains("tanh_step") && err.contains("tabulated"),
            "{err}"
        );
        assert!(serde_json::from_str::<ProfileSpec>(
            r#"{"kind":"constant","value":1.0,"extra":2}"#
        )
        .is_err());
    }

    /// Tail quadruple generator on a dyadic grid so shifts stay exact.
    fn quad() -> impl Strategy<Value = [f64; 4]> {
        prop::array::uniform4(-16i32..16).prop_map(|v| {
            let v = v.map(|i| i as f64 / 4.0);
            [
                v[0].min(v[1]),
                v[0].max(v[1]),
                v[2].min(v[3]),
                v[2].max(v[3]),
            ]
        })
    }

    proptest! {
        #[test]
        fn verdict_depends_on_w_differences_only(b in quad(), w in quad(), c in -16i32..16) {
            let c = c as f64 / 4.0;
            let t = tb(b, w);
            let shifted = tb(b, w.map(|v| v + c));
            let (d0, d1) = (ac_condition(&t), ac_condition(&shifted));
            prop_assert_eq!(d0.verdict, d1.verdict);
            prop_assert_eq!(d0.matched_condition, d1.matched_condition);
        }

        #[test]
        fn swapping_tails_mirrors_the_condition(b in quad(), w in quad()) {
            let t = tb(b, w);
            let d = ac_condition(&t);
            let s = ac_condition(&t.swapped());
            prop_assert_eq!(d.verdict, s.verdict);
            let mirrored: Vec<_> = d.all_matches.iter().map(|c| c.mirrored()).collect();
            for c in &mirrored {
                prop_assert!(s.all_matches.contains(c));
            }
            prop_assert_eq!(mirrored.len(), s.all_matches.len());
        }

        #[test]
        fn analytic_tail_bounds_are_envelopes(
            left in -3.0f64..3.0, right in -3.0f64..3.0, a in 0.0f64..20.0
        ) {
            let b = Profile::new(ProfileSpec::tanh_step(left, right, 0.0, 1.0)).unwrap();
            let t = tail_bounds(&b, &Profile::constant(0.0));
            let mut inf = f64::INFINITY;
            for i in 0..2000 {
                let x = a + 0.05 * i as f64;
                let v = b.eval(x);
                inf = inf.min(v);
                // tails are approached monotonically
                if right >= left {
                    prop_assert!(v <= t.b_over_plus + 1e-12);
                } else {
                    prop_assert!(v >= t.b_under_plus - 1e-12);
                }
            }
            prop_assert!(inf <= t.b_under_plus + 1e-12);
        }
    }
}
