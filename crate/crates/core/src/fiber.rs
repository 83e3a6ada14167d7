//! Finite-difference fiber operators `−d²/dx² + (ξ + A_y(x))² + W(x)` on a
//! Dirichlet-truncated uniform grid.

use serde::{Deserialize, Serialize};

use crate::eigensolve::{lowest_eigenvalues, SymTridiagonal, Tridiagonal};
use crate::error::{Error, Result};
use crate::gauge::{turning_points, GaugeFunction, SEARCH_CAP};
use crate::profiles::{Profile, TailBounds};

const MAX_BOX_REFINEMENTS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub left: f64,
    pub right: f64,
    pub n_interior: usize,
}

impl GridSpec {
    pub fn new(left: f64, right: f64, n_interior: usize) -> Result<Self> {
        let g = GridSpec {
            left,
            right,
            n_interior,
        };
        g.validate()?;
        Ok(g)
    }

    /// Finest grid on `[left, right]` with spacing at most `h_max`.
    pub fn covering(left: f64, right: f64, h_max: f64) -> Result<Self> {
        if !(h_max > 0.0) {
            return Err(Error::validation("h_max must be positive"));
        }
        let cells = ((right - left) / h_max).ceil();
        if !cells.is_finite() || cells > 5e7 {
            return Err(Error::validation(format!(
                "grid on [{left}, {right}] with h_max {h_max} is too large"
            )));
        }
        Self::new(left, right, (cells as usize).saturating_sub(1).max(3))
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.left.is_finite() && self.right.is_finite()) || self.left >= self.right {
            return Err(Error::validation(format!(
                "grid needs left < right, got [{}, {}]",
                self.left, self.right
            )));
        }
        if self.n_interior < 3 {
            return Err(Error::validation("grid needs at least 3 interior nodes"));
        }
        Ok(())
    }

    pub fn h(&self) -> f64 {
        (self.right - self.left) / (self.n_interior + 1) as f64
    }

    /// Interior node `x_j`, `j = 1..=n_interior`.
    pub fn node(&self, j: usize) -> f64 {
        self.left + j as f64 * self.h()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..=self.n_interior).map(move |j| self.node(j))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberMatrix {
    pub grid: GridSpec,
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
    pub xi: f64,
}

impl Tridiagonal for FiberMatrix {
    fn diag(&self) -> &[f64] {
        &self.diag
    }

    fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }
}

/// `(ξ + A_y(x))² + W(x)`.
pub fn effective_potential(g: &GaugeFunction, w: &Profile, xi: f64, x: f64) -> f64 {
    let shift = xi + g.eval(x);
    shift * shift + w.eval(x)
}

/// Second-order Dirichlet discretization of `−d² + V` on `grid`.
pub fn assemble(potential: impl Fn(f64) -> f64, grid: &GridSpec) -> SymTridiagonal {
    let h = grid.h();
    let kinetic = 1.0 / (h * h);
    let diag = grid.nodes().map(|x| 2.0 * kinetic + potential(x)).collect();
    SymTridiagonal {
        diag,
        offdiag: vec![-kinetic; grid.n_interior - 1],
    }
}

pub fn assemble_fiber(g: &GaugeFunction, w: &Profile, xi: f64, grid: &GridSpec) -> FiberMatrix {
    let m = assemble(|x| effective_potential(g, w, xi, x), grid);
    FiberMatrix {
        grid: *grid,
        diag: m.diag,
        offdiag: m.offdiag,
        xi,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverOptions {
    /// Largest grid spacing; `None` picks `1e-2` characteristic lengths.
    #[serde(default)]
    pub h_max: Option<f64>,
    /// Required excess of the potential over the eigenvalue estimate at the
    /// box ends.
    #[serde(default = "SolverOptions::default_margin")]
    pub margin: f64,
    /// WKB decay exponent `∫ sqrt(V − λ)` demanded beyond the classically
    /// allowed region before truncating.
    #[serde(default = "SolverOptions::default_decay")]
    pub decay_action: f64,
    /// Fixed truncation box; disables adaptive selection.
    #[serde(default, rename = "box")]
    pub box_override: Option<(f64, f64)>,
    /// Absolute bisection tolerance; `None` uses `1e-14` times the matrix
    /// scale.
    #[serde(default)]
    pub eig_tol: Option<f64>,
}

impl SolverOptions {
    fn default_margin() -> f64 {
        10.0
    }

    fn default_decay() -> f64 {
        18.0
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(h) = self.h_max {
            if !(h > 0.0) {
                return Err(Error::validation("solver.h_max must be positive"));
            }
        }
        if !(self.margin > 0.0) || !(self.decay_action >= 0.0) {
            return Err(Error::validation(
                "solver.margin must be positive and solver.decay_action non-negative",
            ));
        }
        if let Some(tol) = self.eig_tol {
            if !(tol > 0.0) {
                return Err(Error::validation("solver.eig_tol must be positive"));
            }
        }
        if let Some((l, r)) = self.box_override {
            if !(l < r) {
                return Err(Error::validation("solver.box must satisfy left < right"));
            }
        }
        Ok(())
    }

    /// Grid spacing for a problem whose narrowest well has length scale
    /// `char_len`.
    pub fn h_for(&self, char_len: f64) -> f64 {
        self.h_max.unwrap_or_else(|| (1e-2 * char_len).max(1e-3))
    }

    pub fn tol_for<M: Tridiagonal + ?Sized>(&self, m: &M) -> f64 {
        self.eig_tol
            .unwrap_or_else(|| (1e-14 * m.scale()).max(1e-13))
    }
}

impl Default for SolverOptions {
    fn default() -> Self {
        SolverOptions {
            h_max: None,
            margin: Self::default_margin(),
            decay_action: Self::default_decay(),
            box_override: None,
            eig_tol: None,
        }
    }
}

/// Scan outward from the outermost seeds until the potential exceeds
/// `level + margin` and the accumulated decay action reaches
/// `decay_action`.
pub fn confining_box(
    potential: &dyn Fn(f64) -> f64,
    seeds: &[f64],
    level: f64,
    margin: f64,
    decay_action: f64,
    step: f64,
) -> std::result::Result<(f64, f64), String> {
    let lo_seed = seeds.iter().copied().fold(f64::INFINITY, f64::min);
    let hi_seed = seeds.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !(lo_seed.is_finite() && hi_seed.is_finite()) {
        return Err("no seed point for the potential well".into());
    }
    let walk = |start: f64, dir: f64| -> std::result::Result<f64, String> {
        let mut x = start;
        let mut action = 0.0;
        loop {
            x += dir * step;
            let v = potential(x);
            if v > level {
                action += (v - level).sqrt() * step;
            }
            if v >= level + margin && action >= decay_action {
                return Ok(x);
            }
            if (x - start).abs() > SEARCH_CAP || !v.is_finite() {
                return Err(format!(
                    "potential stays below {:.6} within distance {SEARCH_CAP} of x = {start}; \
                     supply an explicit box",
                    level + margin
                ));
            }
        }
    };
    Ok((walk(lo_seed, -1.0)?, walk(hi_seed, 1.0)?))
}

/// Lowest eigenvalues of `−d² + V` with an adaptively chosen truncation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConfinedSolution {
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// Eigenvalue estimate the final box was built for.
    pub level: f64,
    pub refinements: usize,
    /// Scale of the final matrix, see [`Tridiagonal::scale`].
    pub scale: f64,
}

/// Solve on a box grown until the box ends clear the `k`-th eigenvalue.
/// `char_len` sets the scan step and default grid spacing.
pub fn solve_confined(
    potential: &(dyn Fn(f64) -> f64 + Sync),
    seeds: &[f64],
    k: usize,
    initial_level: f64,
    char_len: f64,
    opts: &SolverOptions,
) -> std::result::Result<ConfinedSolution, String> {
    let h_max = opts.h_for(char_len);
    let step = (char_len / 20.0).max(h_max);
    let mut level = initial_level;
    for refinements in 0..MAX_BOX_REFINEMENTS {
        let (left, right) = match opts.box_override {
            Some(b) => b,
            None => confining_box(
                potential,
                seeds,
                level,
                opts.margin,
                opts.decay_action,
                step,
            )?,
        };
        let grid = GridSpec::covering(left, right, h_max).map_err(|e| e.to_string())?;
        let m = assemble(potential, &grid);
        let tol = opts.tol_for(&m);
        let values = lowest_eigenvalues(&m, k, Some(tol))
            .map_err(|e| e.to_string())?
            .values;
        let top = values[k - 1];
        if opts.box_override.is_some() || top <= level {
            return Ok(ConfinedSolution {
                grid,
                values,
                level,
                refinements,
                scale: m.scale(),
            });
        }
        level = top + (0.1 * top.abs()).max(1.0);
    }
    Err(format!(
        "truncation box did not stabilize after {MAX_BOX_REFINEMENTS} refinements"
    ))
}

/// Characteristic magnetic length `1/sqrt(max |B tail|)`.
pub fn characteristic_length(tails: &TailBounds) -> f64 {
    let b = tails.b_scale();
    if b > 0.0 {
        1.0 / b.sqrt()
    } else {
        1.0
    }
}

/// Eigenvalue estimate `(2n − 1) max(b̄₊, b̄₋) + max(w̄₊, w̄₋)`.
pub fn level_estimate(tails: &TailBounds, n_bands: usize) -> f64 {
    let b = tails.b_over_plus.max(tails.b_over_minus);
    let w = tails.w_over_plus.max(tails.w_over_minus);
    (2 * n_bands - 1) as f64 * b + w
}

/// Well centers of the fiber potential: turning points of `ξ + A_y`, or the
/// minimizer of `|ξ + A_y|` when there are none.
pub fn fiber_seeds(g: &GaugeFunction, xi: f64, tails: &TailBounds) -> Vec<f64> {
    let side = |under: f64, over: f64| if under > 0.0 { under } else { (-over).max(0.0) };
    let weakest = side(tails.b_under_plus, tails.b_over_plus)
        .min(side(tails.b_under_minus, tails.b_over_minus))
        .max(0.05);
    let reach = (2.0 * xi.abs() / weakest + 20.0).min(SEARCH_CAP);
    let tp = turning_points(g, xi, (-reach, reach));
    if !tp.roots.is_empty() {
        return tp.roots;
    }
    let n = 20_000;
    let (lo, hi) = (-reach, reach);
    let best = (0..=n)
        .map(|i| lo + (hi - lo) * i as f64 / n as f64)
        .map(|x| (x, (xi + g.eval(x)).abs()))
        .fold((0.0, f64::INFINITY), |b, c| if c.1 < b.1 { c } else { b });
    vec![best.0]
}

/// Truncation grid for `H[ξ]` such that the potential exceeds the
/// eigenvalue estimate by `margin` at both ends.
pub fn select_box(
    g: &GaugeFunction,
    w: &Profile,
    xi: f64,
    n_bands: usize,
    margin: f64,
    tails: &TailBounds,
    opts: &SolverOptions,
) -> Result<GridSpec> {
    if n_bands == 0 {
        return Err(Error::validation("n_bands must be at least 1"));
    }
    if !tails.is_confining() {
        return Err(Error::NotConfining {
            xi,
            detail: "tail bounds do not force |A_y| to grow on both sides".into(),
        });
    }
    let char_len = characteristic_length(tails);
    let seeds = fiber_seeds(g, xi, tails);
    let level = level_estimate(tails, n_bands);
    let v = |x: f64| effective_potential(g, w, xi, x);
    let step = char_len / 20.0;
    let (left, right) = confining_box(&v, &seeds, level, margin, opts.decay_action, step)
        .map_err(|detail| Error::NotConfining { xi, detail })?;
    GridSpec::covering(left, right, opts.h_for(char_len))
}
