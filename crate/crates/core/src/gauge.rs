//! Landau-gauge vector potential `A_y(x) = ∫_{x_b}^x B(t) dt` and turning
//! points of `ξ + A_y`.

use serde::Serialize;

use crate::profiles::{Profile, ProfileSpec};

/// Hard cap on the half-width of the turning-point search box.
pub const SEARCH_CAP: f64 = 65_536.0;

#[derive(Debug, Clone)]
pub struct GaugeFunction {
    source: Profile,
    base_point: f64,
    /// Anchored primitive evaluated at `base_point`.
    base_value: f64,
    /// Cumulative integrals at the knots of piecewise kinds.
    cache: Vec<f64>,
}

impl GaugeFunction {
    pub fn new(source: Profile) -> Self {
        Self::with_base(source, 0.0)
    }

    pub fn with_base(source: Profile, base_point: f64) -> Self {
        let cache = build_cache(source.spec());
        let mut g = GaugeFunction {
            source,
            base_point,
            base_value: 0.0,
            cache,
        };
        g.base_value = g.primitive(base_point);
        g
    }

    pub fn source(&self) -> &Profile {
        &self.source
    }

    pub fn base_point(&self) -> f64 {
        self.base_point
    }

    /// Field value `B(x)`.
    pub fn field(&self, x: f64) -> f64 {
        self.source.eval(x)
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.primitive(x) - self.base_value
    }

    /// Antiderivative of the field with a kind-specific anchor; only
    /// differences of it are meaningful.
    fn primitive(&self, x: f64) -> f64 {
        match self.source.spec() {
            ProfileSpec::Constant { value } => value * x,
            ProfileSpec::Step {
                left,
                right,
                x_jump,
            } => {
                if x < *x_jump {
                    left * (x - x_jump)
                } else {
                    right * (x - x_jump)
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
                mid * x + half * width * ln_cosh((x - center) / width)
            }
            ProfileSpec::Bump {
                base,
                amplitude,
                support_left,
                support_right,
                exponent,
            } => {
                let len = support_right - support_left;
                let u = (2.0 * (x - support_left) / len - 1.0).clamp(-1.0, 1.0);
                base * x + amplitude * 0.5 * len * bump_integral(u, *exponent)
            }
            ProfileSpec::PiecewiseConstant {
                breakpoints,
                values,
            } => {
                if breakpoints.is_empty() {
                    return values[0] * x;
                }
                if x < breakpoints[0] {
                    return values[0] * (x - breakpoints[0]);
                }
                let i = breakpoints.partition_point(|&b| b <= x) - 1;
                self.cache[i] + values[i + 1] * (x - breakpoints[i])
            }
            ProfileSpec::Tabulated {
                x: xs,
                y: ys,
                left_tail,
                right_tail,
            } => {
                let n = xs.len();
                if x < xs[0] {
                    return left_tail * (x - xs[0]);
                }
                if x >= xs[n - 1] {
                    return self.cache[n - 1] + right_tail * (x - xs[n - 1]);
                }
                let j = xs.partition_point(|&s| s <= x);
                let (x0, x1) = (xs[j - 1], xs[j]);
                let t = (x - x0) / (x1 - x0);
                let yx = ys[j - 1] + t * (ys[j] - ys[j - 1]);
                self.cache[j - 1] + 0.5 * (x - x0) * (ys[j - 1] + yx)
            }
        }
    }
}

fn build_cache(spec: &ProfileSpec) -> Vec<f64> {
    match spec {
        ProfileSpec::PiecewiseConstant {
            breakpoints,
            values,
        } => {
            let mut cum = Vec::with_capacity(breakpoints.len());
            let mut acc = 0.0;
            for (i, b) in breakpoints.iter().enumerate() {
                if i > 0 {
                    acc += values[i] * (b - breakpoints[i - 1]);
                }
                cum.push(acc);
            }
            cum
        }
        ProfileSpec::Tabulated { x, y, .. } => {
            let mut cum = Vec::with_capacity(x.len());
            let mut acc = 0.0;
            cum.push(acc);
            for i in 1..x.len() {
                acc += 0.5 * (x[i] - x[i - 1]) * (y[i] + y[i - 1]);
                cum.push(acc);
            }
            cum
        }
        _ => Vec::new(),
    }
}

/// `ln cosh t` without overflow.
fn ln_cosh(t: f64) -> f64 {
    let a = t.abs();
    a + (-2.0 * a).exp().ln_1p() - std::f64::consts::LN_2
}

/// `∫_{-1}^{u} (1 - s^2)^m ds` by binomial expansion.
fn bump_integral(u: f64, m: u32) -> f64 {
    let mut binom = 1.0;
    let mut sum = 0.0;
    for j in 0..=m {
        let p = 2 * j + 1;
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        sum += sign * binom * (u.powi(p as i32) + 1.0) / p as f64;
        binom = binom * (m - j) as f64 / (j + 1) as f64;
    }
    sum
}

/// `A_y(x)` for the gauge.
pub fn vector_potential(g: &GaugeFunction, x: f64) -> f64 {
    g.eval(x)
}

/// Same field, integration origin moved to `new_base`.
pub fn rebase_gauge(g: &GaugeFunction, new_base: f64) -> GaugeFunction {
    GaugeFunction::with_base(g.source.clone(), new_base)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TurningPoints {
    pub xi: f64,
    pub roots: Vec<f64>,
    pub uniqueness: bool,
    /// Box in which the roots were finally searched.
    pub search_box: (f64, f64),
}

impl TurningPoints {
    /// Turning point relevant for `ξ → -∞` (largest root) or `ξ → +∞`
    /// (smallest root).
    pub fn for_tail(&self, xi_to_minus_infinity: bool) -> Option<f64> {
        if xi_to_minus_infinity {
            self.roots.last().copied()
        } else {
            self.roots.first().copied()
        }
    }
}

pub fn default_root_tol(xi: f64) -> f64 {
    1e-12 * (1.0 + xi.abs())
}

/// Sign-change roots of `ξ + A_y` inside `search_box`, doubling the box about
/// its center while no root is found, up to [`SEARCH_CAP`].
pub fn turning_points(g: &GaugeFunction, xi: f64, search_box: (f64, f64)) -> TurningPoints {
    let tol = default_root_tol(xi);
    let f = |x: f64| xi + g.eval(x);
    let (mut lo, mut hi) = search_box;
    if lo > hi {
        std::mem::swap(&mut lo, &mut hi);
    }
    loop {
        let roots = scan_roots(&f, lo, hi, tol);
        let half = 0.5 * (hi - lo);
        if !roots.is_empty() || half >= SEARCH_CAP {
            return TurningPoints {
                xi,
                uniqueness: roots.len() == 1,
                roots,
                search_box: (lo, hi),
            };
        }
        let center = 0.5 * (lo + hi);
        let next = (2.0 * half).clamp(1.0, SEARCH_CAP);
        lo = center - next;
        hi = center + next;
    }
}

fn scan_roots(f: &impl Fn(f64) -> f64, lo: f64, hi: f64, tol: f64) -> Vec<f64> {
    let n = (((hi - lo) / 0.01).ceil() as usize).clamp(2048, 1 << 18);
    let step = (hi - lo) / n as f64;
    let mut roots = Vec::new();
    let mut x_prev = lo;
    let mut f_prev = f(lo);
    if f_prev == 0.0 {
        roots.push(lo);
    }
    for i in 1..=n {
        let x = if i == n { hi } else { lo + step * i as f64 };
        let fx = f(x);
        if fx == 0.0 {
            roots.push(x);
        } else if f_prev != 0.0 && (f_prev < 0.0) != (fx < 0.0) {
            roots.push(bisect(f, x_prev, x, f_prev, tol));
        }
        x_prev = x;
        f_prev = fx;
    }
    roots
}

fn bisect(f: &impl Fn(f64) -> f64, mut a: f64, mut b: f64, fa: f64, tol: f64) -> f64 {
    let neg_at_a = fa < 0.0;
    let mut best = (a, fa.abs());
    for _ in 0..200 {
        let m = 0.5 * (a + b);
        let fm = f(m);
        if fm.abs() < best.1 {
            best = (m, fm.abs());
        }
        if fm.abs() <= tol || m == a || m == b {
            break;
        }
        if (fm < 0.0) == neg_at_a {
            a = m;
        } else {
            b = m;
        }
    }
    let fb = f(b).abs();
    if fb < best.1 {
        best = (b, fb);
    }
    best.0
}
