//! Band functions `λ_n(ξ)` over a grid of quasi-momenta and the checks run
//! on them: simplicity, tail intervals, non-constancy and the bracketing of
//! one fiber between two comparison potentials.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::comparison::{lemma_potential_eval, Envelope, LemmaPotential, Side};
use crate::eigensolve::lowest_eigenvalues;
use crate::error::{Error, Result};
use crate::fiber::{
    assemble, characteristic_length, effective_potential, fiber_seeds, level_estimate,
    solve_confined, GridSpec, SolverOptions,
};
use crate::gauge::{rebase_gauge, turning_points, GaugeFunction, SEARCH_CAP};
use crate::profiles::{ac_condition, tail_bounds, AcDecision, Profile, ProfileSpec, TailBounds};

/// Printed into every metadata file so readers know which tail each end of
/// the sweep is compared against.
pub const SIDE_CONVENTION: &str =
    "xi -> -inf is compared with the + (x -> +inf) tail bounds, xi -> +inf with the - tail bounds";

/// A field/potential pair with its gauge and tail bounds.
#[derive(Debug, Clone)]
pub struct BandProblem {
    pub b: Profile,
    pub w: Profile,
    pub tails: TailBounds,
    pub gauge: GaugeFunction,
}

impl BandProblem {
    pub fn new(b: ProfileSpec, w: ProfileSpec) -> Result<Self> {
        let (b, w) = (Profile::new(b)?, Profile::new(w)?);
        let tails = tail_bounds(&b, &w);
        Ok(Self::with_tails(b, w, tails))
    }

    /// Use externally known tail bounds instead of sampling them.
    pub fn with_tails(b: Profile, w: Profile, tails: TailBounds) -> Self {
        let gauge = GaugeFunction::new(b.clone());
        BandProblem { b, w, tails, gauge }
    }

    pub fn builtin(name: &str) -> Result<Self> {
        let entry = crate::profiles::builtin(name)
            .ok_or_else(|| Error::Config(format!("unknown builtin profile {name:?}")))?;
        Self::new(entry.b, entry.w)
    }

    /// Same problem with the vector potential anchored at `x0`.
    pub fn rebased(&self, x0: f64) -> Self {
        BandProblem {
            gauge: rebase_gauge(&self.gauge, x0),
            ..self.clone()
        }
    }

    pub fn potential(&self, xi: f64, x: f64) -> f64 {
        effective_potential(&self.gauge, &self.w, xi, x)
    }

    pub fn ac_decision(&self) -> AcDecision {
        ac_condition(&self.tails)
    }

    /// Lowest `k` eigenvalues of `H[ξ]` on an adaptive box.
    pub fn solve_fiber(&self, xi: f64, k: usize, opts: &SolverOptions) -> Result<FiberSolve> {
        if k == 0 {
            return Err(Error::validation("k must be at least 1"));
        }
        if !self.tails.is_confining() && opts.box_override.is_none() {
            return Err(Error::NotConfining {
                xi,
                detail: "tail bounds do not force |A_y| to grow on both sides".into(),
            });
        }
        let seeds = fiber_seeds(&self.gauge, xi, &self.tails);
        let v = |x: f64| self.potential(xi, x);
        let sol = solve_confined(
            &v,
            &seeds,
            k,
            level_estimate(&self.tails, k),
            characteristic_length(&self.tails),
            opts,
        )
        .map_err(|detail| Error::NotConfining { xi, detail })?;
        let max_shift = sol
            .grid
            .nodes()
            .fold(0.0_f64, |m, x| m.max((xi + self.gauge.eval(x)).abs()));
        Ok(FiberSolve {
            xi,
            grid: sol.grid,
            values: sol.values,
            max_shift,
            refinements: sol.refinements,
            scale: sol.scale,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FiberSolve {
    pub xi: f64,
    pub grid: GridSpec,
    pub values: Vec<f64>,
    /// `max |ξ + A_y|` over the grid nodes.
    pub max_shift: f64,
    pub refinements: usize,
    pub scale: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepOptions {
    #[serde(default)]
    pub solver: SolverOptions,
    /// Collision threshold relative to the matrix scale.
    #[serde(default = "SweepOptions::default_gap_tol")]
    pub gap_tol: f64,
    #[serde(default = "SweepOptions::default_tail_tol")]
    pub tail_tol: f64,
    /// Oscillation above which a band counts as observably non-constant.
    #[serde(default = "SweepOptions::default_osc_tol")]
    pub osc_tol: f64,
    #[serde(default = "SweepOptions::default_parallel")]
    pub parallel: bool,
}

impl SweepOptions {
    fn default_gap_tol() -> f64 {
        1e-9
    }

    fn default_tail_tol() -> f64 {
        5e-2
    }

    fn default_osc_tol() -> f64 {
        1e-6
    }

    fn default_parallel() -> bool {
        true
    }

    pub fn validate(&self) -> Result<()> {
        self.solver.validate()?;
        for (name, v) in [
            ("gap_tol", self.gap_tol),
            ("tail_tol", self.tail_tol),
            ("osc_tol", self.osc_tol),
        ] {
            if !(v > 0.0) {
                return Err(Error::validation(format!("{name} must be positive")));
            }
        }
        Ok(())
    }
}

impl Default for SweepOptions {
    fn default() -> Self {
        SweepOptions {
            solver: SolverOptions::default(),
            gap_tol: Self::default_gap_tol(),
            tail_tol: Self::default_tail_tol(),
            osc_tol: Self::default_osc_tol(),
            parallel: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct XiMeta {
    pub xi: f64,
    pub left: f64,
    pub right: f64,
    pub n_interior: usize,
    pub h: f64,
    pub max_shift: f64,
    pub refinements: usize,
    pub min_gap: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandSweep {
    pub xi_grid: Vec<f64>,
    /// `bands[n][i]` is `λ_{n+1}(xi_grid[i])`.
    pub bands: Vec<Vec<f64>>,
    pub solver_meta: Vec<XiMeta>,
    pub k: usize,
}

impl BandSweep {
    pub fn band(&self, n: usize) -> &[f64] {
        &self.bands[n - 1]
    }

    /// Smallest `λ_{n+1} − λ_n` over the sweep; `None` for a single band.
    pub fn min_gap(&self) -> Option<f64> {
        self.solver_meta
            .iter()
            .filter_map(|m| m.min_gap)
            .reduce(f64::min)
    }

    /// `max − min` of each band.
    pub fn oscillation(&self) -> Vec<f64> {
        self.bands
            .iter()
            .map(|b| {
                let hi = b.iter().copied().fold(f64::NEG_INFINITY, f64::max);
                let lo = b.iter().copied().fold(f64::INFINITY, f64::min);
                hi - lo
            })
            .collect()
    }
}

/// `xi_grid[0], ..., xi_grid[count-1]` evenly spaced on `[min, max]`.
pub fn xi_linspace(min: f64, max: f64, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return Err(Error::validation("xi grid needs at least one point"));
    }
    if count == 1 {
        return Ok(vec![min]);
    }
    if !(min < max) {
        return Err(Error::validation(format!(
            "xi grid needs min < max, got [{min}, {max}]"
        )));
    }
    let mut grid: Vec<f64> = (0..count - 1)
        .map(|i| min + (max - min) * (i as f64 / (count - 1) as f64))
        .collect();
    grid.push(max);
    Ok(grid)
}

/// Lowest `k` bands at every `ξ` of a strictly increasing grid.
pub fn sweep(
    problem: &BandProblem,
    xi_grid: &[f64],
    k: usize,
    opts: &SweepOptions,
) -> Result<BandSweep> {
    opts.validate()?;
    problem.tails.validate()?;
    if xi_grid.is_empty() {
        return Err(Error::validation("xi grid is empty"));
    }
    if xi_grid.iter().any(|x| !x.is_finite()) || xi_grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::validation(
            "xi grid must be finite and strictly increasing",
        ));
    }
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    let solve = |&xi: &f64| problem.solve_fiber(xi, k, &opts.solver);
    let solves: Vec<FiberSolve> = if opts.parallel {
        xi_grid.par_iter().map(solve).collect::<Result<_>>()?
    } else {
        xi_grid.iter().map(solve).collect::<Result<_>>()?
    };

    let mut bands = vec![Vec::with_capacity(xi_grid.len()); k];
    let mut solver_meta = Vec::with_capacity(xi_grid.len());
    for s in solves {
        let min_gap = s.values.windows(2).map(|p| p[1] - p[0]).reduce(f64::min);
        if let Some(gap) = min_gap {
            let tol = opts.gap_tol * s.scale;
            if gap <= tol {
                return Err(Error::EigenCollision { xi: s.xi, gap, tol });
            }
        }
        for (n, v) in s.values.iter().enumerate() {
            if !v.is_finite() {
                return Err(Error::NonConvergence {
                    iterations: 0,
                    residual: f64::NAN,
                });
            }
            bands[n].push(*v);
        }
        solver_meta.push(XiMeta {
            xi: s.xi,
            left: s.grid.left,
            right: s.grid.right,
            n_interior: s.grid.n_interior,
            h: s.grid.h(),
            max_shift: s.max_shift,
            refinements: s.refinements,
            min_gap,
        });
    }
    Ok(BandSweep {
        xi_grid: xi_grid.to_vec(),
        bands,
        solver_meta,
        k,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum XiEnd {
    /// Smallest `ξ` of the sweep, paired with the `+` tails.
    XiMinus,
    XiPlus,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TailEntry {
    pub band: usize,
    pub end: XiEnd,
    pub xi: f64,
    pub value: f64,
    /// `[b̲(2n−1)+w̲, b̄(2n−1)+w̄]` of the paired tail.
    pub interval: (f64, f64),
    pub tol: f64,
    /// `None` when no limit is asserted for this end (a field tail that is
    /// not positive on both sides).
    pub within: Option<bool>,
}

/// Landau interval of band `n` for the `+` (`plus = true`) or `−` tail.
pub fn tail_interval(t: &TailBounds, n: usize, plus: bool) -> (f64, f64) {
    let m = (2 * n - 1) as f64;
    if plus {
        (
            t.b_under_plus * m + t.w_under_plus,
            t.b_over_plus * m + t.w_over_plus,
        )
    } else {
        (
            t.b_under_minus * m + t.w_under_minus,
            t.b_over_minus * m + t.w_over_minus,
        )
    }
}

/// Compare the band values at the extreme `ξ` with the tail intervals.
pub fn tail_check(s: &BandSweep, t: &TailBounds, tol: f64) -> Vec<TailEntry> {
    let asserted = t.both_fields_positive();
    let last = s.xi_grid.len() - 1;
    let mut out = Vec::with_capacity(2 * s.k);
    for n in 1..=s.k {
        for (end, i, plus) in [(XiEnd::XiMinus, 0, true), (XiEnd::XiPlus, last, false)] {
            let interval = tail_interval(t, n, plus);
            let value = s.band(n)[i];
            let within = asserted.then_some(value >= interval.0 - tol && value <= interval.1 + tol);
            out.push(TailEntry {
                band: n,
                end,
                xi: s.xi_grid[i],
                value,
                interval,
                tol,
                within,
            });
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NonConstancy {
    pub band: usize,
    /// Tail intervals are disjoint, which forces the band to vary; `None`
    /// when the intervals are not asserted.
    pub disjoint_tails: Option<bool>,
    /// Sign-split field: the band diverges at one end.
    pub divergent: bool,
    pub oscillation: f64,
    pub observed: bool,
    pub nonconstant: bool,
}

pub fn nonconstancy_check(s: &BandSweep, t: &TailBounds, osc_tol: f64) -> Vec<NonConstancy> {
    let divergent = (t.b_under_plus > 0.0 && t.b_over_minus < 0.0)
        || (t.b_under_minus > 0.0 && t.b_over_plus < 0.0);
    s.oscillation()
        .into_iter()
        .enumerate()
        .map(|(i, oscillation)| {
            let n = i + 1;
            let disjoint_tails = t.both_fields_positive().then(|| {
                let (lo_p, hi_p) = tail_interval(t, n, true);
                let (lo_m, hi_m) = tail_interval(t, n, false);
                hi_m < lo_p || hi_p < lo_m
            });
            let observed = oscillation > osc_tol;
            NonConstancy {
                band: n,
                disjoint_tails,
                divergent,
                oscillation,
                observed,
                nonconstant: disjoint_tails == Some(true) || divergent || observed,
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BandDiagnostics {
    pub min_gap: Option<f64>,
    pub oscillation: Vec<f64>,
    pub tail_report: Vec<TailEntry>,
    pub nonconstancy: Vec<NonConstancy>,
    /// Largest `|Δλ_n/Δξ|` between neighbouring grid points.
    pub lipschitz_max: f64,
    /// Largest per-segment bound `2(max|ξ+A_y| + Δξ)`.
    pub lipschitz_bound: f64,
    pub lipschitz_ok: bool,
    pub sandwich_ok: Option<bool>,
    pub side_convention: &'static str,
}

impl BandDiagnostics {
    pub fn compute(s: &BandSweep, t: &TailBounds, opts: &SweepOptions) -> Self {
        let mut lipschitz_max = 0.0_f64;
        let mut lipschitz_bound = 0.0_f64;
        let mut lipschitz_ok = true;
        for i in 0..s.xi_grid.len().saturating_sub(1) {
            let dxi = s.xi_grid[i + 1] - s.xi_grid[i];
            let shift = s.solver_meta[i]
                .max_shift
                .max(s.solver_meta[i + 1].max_shift);
            let bound = 2.0 * (shift + dxi);
            lipschitz_bound = lipschitz_bound.max(bound);
            for b in &s.bands {
                let slope = (b[i + 1] - b[i]).abs() / dxi;
                lipschitz_max = lipschitz_max.max(slope);
                lipschitz_ok &= slope <= bound * (1.0 + 1e-9);
            }
        }
        BandDiagnostics {
            min_gap: s.min_gap(),
            oscillation: s.oscillation(),
            tail_report: tail_check(s, t, opts.tail_tol),
            nonconstancy: nonconstancy_check(s, t, opts.osc_tol),
            lipschitz_max,
            lipschitz_bound,
            lipschitz_ok,
            sandwich_ok: None,
            side_convention: SIDE_CONVENTION,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichViolation {
    pub x: f64,
    pub under: f64,
    pub actual: f64,
    pub over: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SandwichReport {
    pub holds: bool,
    pub xi: f64,
    pub eps: f64,
    pub side: Side,
    pub x_xi: Option<f64>,
    /// Smallest `K` for which the ε-tail inequalities hold on the sampled
    /// window.
    pub k_eps: f64,
    /// `x_ξ` lies beyond `K_ε` on its side.
    pub beyond_k: bool,
    pub pointwise_ok: bool,
    pub violation: Option<SandwichViolation>,
    pub ordering_ok: bool,
    pub under: Vec<f64>,
    pub actual: Vec<f64>,
    pub over: Vec<f64>,
    pub grid: Option<GridSpec>,
    pub note: Option<String>,
}

/// Smallest `K > 0` such that every sample with `x > K` satisfies the strict
/// `ε`-inequalities for the `+` tails and every sample with `x < −K` those
/// for the `−` tails.
pub fn k_eps_witness(problem: &BandProblem, eps: f64, reach: f64, samples: usize) -> f64 {
    let t = &problem.tails;
    let inside = |v: f64, lo: f64, hi: f64| lo - eps < v && v < hi + eps;
    let dx = 2.0 * reach / (samples - 1) as f64;
    let mut worst = 0.0_f64;
    for i in 0..samples {
        let x = -reach + i as f64 * dx;
        let (b, w) = (problem.b.eval(x), problem.w.eval(x));
        let ok = if x > 0.0 {
            inside(b, t.b_under_plus, t.b_over_plus) && inside(w, t.w_under_plus, t.w_over_plus)
        } else {
            inside(b, t.b_under_minus, t.b_over_minus) && inside(w, t.w_under_minus, t.w_over_minus)
        };
        if !ok {
            worst = worst.max(x.abs());
        }
    }
    worst + dx
}

/// Bracket `H[ξ]` between the two comparison potentials of the tail that
/// `ξ` escapes to and check both the pointwise and the eigenvalue order on
/// the solver grid.
pub fn sandwich_check(
    problem: &BandProblem,
    xi: f64,
    eps: f64,
    k: usize,
    opts: &SolverOptions,
) -> Result<SandwichReport> {
    let t = &problem.tails;
    if !t.both_fields_positive() {
        return Err(Error::validation(
            "bracketing potentials need positive field tails on both sides",
        ));
    }
    let cap = 0.5 * t.b_under_plus.min(t.b_under_minus);
    if !(eps > 0.0 && eps < cap) {
        return Err(Error::validation(format!(
            "eps must lie in (0, {cap}), got {eps}"
        )));
    }
    let side = if xi < 0.0 { Side::Plus } else { Side::Minus };
    let solve = problem.solve_fiber(xi, k, opts)?;
    let grid = solve.grid;
    let reach = (2.0 * grid.left.abs().max(grid.right.abs()) + 100.0).min(SEARCH_CAP);
    let k_eps = k_eps_witness(problem, eps, reach, 200_001);

    let mut report = SandwichReport {
        holds: false,
        xi,
        eps,
        side,
        x_xi: None,
        k_eps,
        beyond_k: false,
        pointwise_ok: false,
        violation: None,
        ordering_ok: false,
        under: Vec::new(),
        actual: solve.values.clone(),
        over: Vec::new(),
        grid: Some(grid),
        note: None,
    };

    let tp = turning_points(&problem.gauge, xi, (grid.left, grid.right));
    if !tp.uniqueness || tp.roots.len() != 1 {
        report.note = Some(format!("{} turning points at xi = {xi}", tp.roots.len()));
        return Ok(report);
    }
    let x_xi = tp.roots[0];
    report.x_xi = Some(x_xi);
    report.beyond_k = match side {
        Side::Plus => x_xi > k_eps,
        Side::Minus => x_xi < -k_eps,
    };

    let under = LemmaPotential {
        side,
        envelope: Envelope::Under,
        eps,
        k_eps,
        x_xi,
    };
    let over = LemmaPotential {
        envelope: Envelope::Over,
        ..under
    };
    let (w_under, w_over) = (under.w_offset(t), over.w_offset(t));
    let v_under = |x: f64| lemma_potential_eval(&under, t, x).map(|v| v + w_under);
    let v_over = |x: f64| lemma_potential_eval(&over, t, x).map(|v| v + w_over);

    for x in grid.nodes() {
        let (lo, mid, hi) = (v_under(x)?, problem.potential(xi, x), v_over(x)?);
        let slack = 1e-12 * (1.0 + mid.abs());
        if lo > mid + slack || mid > hi + slack {
            report.violation = Some(SandwichViolation {
                x,
                under: lo,
                actual: mid,
                over: hi,
            });
            return Ok(report);
        }
    }
    report.pointwise_ok = true;

    let tol = |m: &crate::eigensolve::SymTridiagonal| opts.tol_for(m);
    let m_under = assemble(|x| v_under(x).unwrap_or(f64::NAN), &grid);
    let m_over = assemble(|x| v_over(x).unwrap_or(f64::NAN), &grid);
    report.under = lowest_eigenvalues(&m_under, k, Some(tol(&m_under)))?.values;
    report.over = lowest_eigenvalues(&m_over, k, Some(tol(&m_over)))?.values;
    let slack = 2.0 * tol(&m_over);
    report.ordering_ok = (0..k).all(|n| {
        report.under[n] <= report.actual[n] + slack && report.actual[n] <= report.over[n] + slack
    });
    report.holds = report.pointwise_ok && report.ordering_ok;
    Ok(report)
}

pub fn write_bands_csv(s: &BandSweep, path: &Path) -> Result<()> {
    let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
    let mut header = vec!["xi".to_string()];
    header.extend((1..=s.k).map(|n| format!("lambda_{n}")));
    writeln!(out, "{}", header.join(","))?;
    for (i, xi) in s.xi_grid.iter().enumerate() {
        let mut row = vec![format!("{xi:.16e}")];
        row.extend(s.bands.iter().map(|b| format!("{:.16e}", b[i])));
        writeln!(out, "{}", row.join(","))?;
    }
    out.flush()?;
    Ok(())
}

/// Metadata document for a sweep: tails, verdict, options, diagnostics and
/// the per-`ξ` truncation data.
pub fn sweep_meta(
    s: &BandSweep,
    d: &BandDiagnostics,
    problem: &BandProblem,
    opts: &SweepOptions,
) -> serde_json::Value {
    serde_json::json!({
        "b": problem.b.spec(),
        "w": problem.w.spec(),
        "tail_bounds": problem.tails,
        "ac": problem.ac_decision(),
        "k": s.k,
        "options": opts,
        "diagnostics": d,
        "tail_report": d.tail_report,
        "per_xi": s.solver_meta,
    })
}

pub fn write_json(value: &serde_json::Value, path: &Path) -> Result<()> {
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    std::fs::write(path, text)?;
    Ok(())
}

/// Write `bands.csv` and `meta.json` into `dir`.
pub fn export_sweep(
    s: &BandSweep,
    d: &BandDiagnostics,
    problem: &BandProblem,
    opts: &SweepOptions,
    dir: &Path,
) -> Result<()> {
    if s.xi_grid.is_empty() {
        return Err(Error::validation("cannot export an empty sweep"));
    }
    std::fs::create_dir_all(dir)?;
    write_bands_csv(s, &dir.join("bands.csv"))?;
    write_json(&sweep_meta(s, d, problem, opts), &dir.join("meta.json"))
}
