//! Glued harmonic comparison operators `H_{ω,ω̃}[α]`, their eigenvalues, and
//! the piecewise quadratic potentials that bracket a fiber potential far out
//! in one tail.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::eigensolve::lowest_eigenvalues;
use crate::error::{Error, Result};
use crate::fiber::{assemble, solve_confined, ConfinedSolution, GridSpec, SolverOptions};
use crate::profiles::TailBounds;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonSpec {
    pub omega: f64,
    pub omega_tilde: f64,
    pub x0: f64,
    pub alpha: f64,
}

impl ComparisonSpec {
    pub fn new(omega: f64, omega_tilde: f64, x0: f64, alpha: f64) -> Result<Self> {
        let s = ComparisonSpec {
            omega,
            omega_tilde,
            x0,
            alpha,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega > 0.0 && self.omega_tilde > 0.0) {
            return Err(Error::validation(format!(
                "comparison frequencies must be positive, got omega = {}, omega_tilde = {}",
                self.omega, self.omega_tilde
            )));
        }
        if !(self.x0.is_finite() && self.alpha.is_finite()) {
            return Err(Error::validation("comparison x0 and alpha must be finite"));
        }
        Ok(())
    }

    /// The operator conjugated by the translation `ψ(x) ↦ ψ(x − α)`: well
    /// centered at the origin, join moved to `x0 − α`.
    pub fn shifted(&self) -> Self {
        ComparisonSpec {
            x0: self.x0 - self.alpha,
            alpha: 0.0,
            ..*self
        }
    }

    /// Minimizer of the potential, where it vanishes.
    pub fn well_center(&self) -> f64 {
        if self.alpha >= self.x0 {
            self.alpha
        } else {
            self.x0 + self.omega * (self.alpha - self.x0) / self.omega_tilde
        }
    }

    /// `min(1, ω̃/ω)²`, the lower-bound constant.
    pub fn lower_bound_factor(&self) -> f64 {
        let c = (self.omega_tilde / self.omega).min(1.0);
        c * c
    }
}

/// `ω²(x−α)²` for `x ≥ x0`, `(ω̃(x−x0) + ω(x0−α))²` for `x < x0`.
pub fn comparison_potential(spec: &ComparisonSpec, x: f64) -> f64 {
    let r = if x >= spec.x0 {
        spec.omega * (x - spec.alpha)
    } else {
        spec.omega_tilde * (x - spec.x0) + spec.omega * (spec.x0 - spec.alpha)
    };
    r * r
}

/// Lowest `k` eigenvalues of the discretized comparison operator.
pub fn comparison_eigs(spec: &ComparisonSpec, k: usize, opts: &SolverOptions) -> Result<Vec<f64>> {
    spec.validate()?;
    opts.validate()?;
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    solve_comparison(spec, k, opts).map(|s| s.values)
}

fn char_length(omega: f64, omega_tilde: f64) -> f64 {
    1.0 / omega.max(omega_tilde).sqrt()
}

fn solve_comparison(
    spec: &ComparisonSpec,
    k: usize,
    opts: &SolverOptions,
) -> Result<ConfinedSolution> {
    let v = |x: f64| comparison_potential(spec, x);
    let level = (2 * k - 1) as f64 * spec.omega;
    let char_len = char_length(spec.omega, spec.omega_tilde);
    solve_confined(&v, &[spec.well_center()], k, level, char_len, opts).map_err(|detail| {
        Error::NotConfining {
            xi: spec.alpha,
            detail,
        }
    })
}

/// Adaptive truncation grid the solver settles on for `spec`.
pub fn comparison_box(spec: &ComparisonSpec, k: usize, opts: &SolverOptions) -> Result<GridSpec> {
    spec.validate()?;
    opts.validate()?;
    if k == 0 {
        return Err(Error::validation("k must be at least 1"));
    }
    solve_comparison(spec, k, opts).map(|s| s.grid)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceStudy {
    pub omega: f64,
    pub omega_tilde: f64,
    pub x0: f64,
    pub alphas: Vec<f64>,
    /// Grid shared by every `α`, in coordinates `x − α`.
    pub grid: GridSpec,
    /// `sigma[i][n]` is the `(n+1)`-th eigenvalue at `alphas[i]`.
    pub sigma: Vec<Vec<f64>>,
    /// `|σ_n(α) − (2n−1)ω|`, same layout as `sigma`.
    pub errors: Vec<Vec<f64>>,
    /// Per band, first index from which the error column is non-increasing
    /// up to `slack`.
    pub monotone_from: Vec<usize>,
    /// Per band and consecutive pair, `log(e_i/e_{i+1}) / log(α_{i+1}/α_i)`.
    pub rates: Vec<Vec<Option<f64>>>,
    pub slack: f64,
}

impl ConvergenceStudy {
    pub fn k(&self) -> usize {
        self.monotone_from.len()
    }

    /// Error column of band `n` (0-based).
    pub fn error_column(&self, n: usize) -> Vec<f64> {
        self.errors.iter().map(|row| row[n]).collect()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut out = std::io::BufWriter::new(std::fs::File::create(path)?);
        let k = self.k();
        let mut header = vec!["alpha".to_string()];
        header.extend((1..=k).map(|n| format!("sigma_{n}")));
        header.extend((1..=k).map(|n| format!("err_{n}")));
        writeln!(out, "{}", header.join(","))?;
        for (i, alpha) in self.alphas.iter().enumerate() {
            let mut row = vec![format!("{alpha:.16e}")];
            row.extend(self.sigma[i].iter().map(|v| format!("{v:.16e}")));
            row.extend(self.errors[i].iter().map(|v| format!("{v:.16e}")));
            writeln!(out, "{}", row.join(","))?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Tabulate `σ_n(α)` for increasing `alphas` and the distance to the
/// harmonic levels.
pub fn convergence_study(
    omega: f64,
    omega_tilde: f64,
    x0: f64,
    alphas: &[f64],
    k: usize,
    opts: &SolverOptions,
) -> Result<ConvergenceStudy> {
    if alphas.is_empty() {
        return Err(Error::validation("alpha list is empty"));
    }
    if alphas.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::validation("alpha list must be strictly increasing"));
    }
    let specs = alphas
        .iter()
        .map(|&a| ComparisonSpec::new(omega, omega_tilde, x0, a))
        .collect::<Result<Vec<_>>>()?;
    // one grid in the frame co-moving with the well, so that the columns
    // differ only through the operator
    let boxes = specs
        .par_iter()
        .map(|s| comparison_box(&s.shifted(), k, opts))
        .collect::<Result<Vec<_>>>()?;
    let left = boxes.iter().map(|g| g.left).fold(f64::INFINITY, f64::min);
    let right = boxes
        .iter()
        .map(|g| g.right)
        .fold(f64::NEG_INFINITY, f64::max);
    let grid = GridSpec::covering(left, right, opts.h_for(char_length(omega, omega_tilde)))?;
    let solved = specs
        .par_iter()
        .map(|s| {
            let shifted = s.shifted();
            let m = assemble(|y| comparison_potential(&shifted, y), &grid);
            let tol = opts.tol_for(&m);
            Ok((lowest_eigenvalues(&m, k, Some(tol))?.values, tol))
        })
        .collect::<Result<Vec<_>>>()?;
    // changes below the bisection bracket are not resolved
    let slack = solved.iter().map(|r| r.1).fold(0.0, f64::max);
    let sigma: Vec<Vec<f64>> = solved.into_iter().map(|r| r.0).collect();
    let errors: Vec<Vec<f64>> = sigma
        .iter()
        .map(|row| {
            row.iter()
                .enumerate()
                .map(|(n, s)| (s - (2 * n + 1) as f64 * omega).abs())
                .collect()
        })
        .collect();
    let mut monotone_from = Vec::with_capacity(k);
    let mut rates = Vec::with_capacity(k);
    for n in 0..k {
        let col: Vec<f64> = errors.iter().map(|r| r[n]).collect();
        let mut start = col.len() - 1;
        while start > 0 && col[start] <= col[start - 1] + slack {
            start -= 1;
        }
        monotone_from.push(start);
        rates.push(
            (0..col.len() - 1)
                .map(|i| {
                    let (a, b) = (col[i], col[i + 1]);
                    (a > 0.0 && b > 0.0)
                        .then(|| (a / b).ln() / (alphas[i + 1] / alphas[i]).abs().ln())
                        .filter(|r| r.is_finite())
                })
                .collect(),
        );
    }
    Ok(ConvergenceStudy {
        omega,
        omega_tilde,
        x0,
        alphas: alphas.to_vec(),
        grid,
        sigma,
        errors,
        monotone_from,
        rates,
        slack,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LowerBoundReport {
    pub holds: bool,
    pub factor: f64,
    /// First node where `factor·ω²x² > potential`, with both sides.
    pub violation: Option<(f64, f64, f64)>,
    pub nodes_checked: usize,
}

/// Pointwise check of `min(1, ω̃/ω)² ω² x² ≤ Ṽ(x)` for the shifted operator
/// on a dense grid. Requires `α > x0`.
pub fn operator_lower_bound_check(spec: &ComparisonSpec) -> Result<LowerBoundReport> {
    spec.validate()?;
    if !(spec.alpha > spec.x0) {
        return Err(Error::validation(format!(
            "lower bound requires alpha > x0, got alpha = {}, x0 = {}",
            spec.alpha, spec.x0
        )));
    }
    let shifted = spec.shifted();
    let factor = spec.lower_bound_factor();
    let reach = 30.0 / spec.omega.min(spec.omega_tilde).sqrt();
    let (lo, hi) = (shifted.x0 - reach, reach);
    let n = 200_001;
    let mut violation = None;
    for i in 0..n {
        let x = lo + (hi - lo) * i as f64 / (n - 1) as f64;
        let lhs = factor * spec.omega * spec.omega * x * x;
        let rhs = comparison_potential(&shifted, x);
        if lhs > rhs + 1e-12 * (1.0 + rhs) {
            violation = Some((x, lhs, rhs));
            break;
        }
    }
    Ok(LowerBoundReport {
        holds: violation.is_none(),
        factor,
        violation,
        nodes_checked: n,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Side {
    /// Well escaping to `+∞` (ξ → −∞ for positive fields).
    Plus,
    Minus,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Envelope {
    Under,
    Over,
}

/// One of the four piecewise quadratic bracketing potentials.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct LemmaPotential {
    pub side: Side,
    pub envelope: Envelope,
    pub eps: f64,
    pub k_eps: f64,
    pub x_xi: f64,
}

impl LemmaPotential {
    pub fn validate(&self, t: &TailBounds) -> Result<()> {
        let cap = 0.5 * t.b_under_plus.min(t.b_under_minus);
        if !(self.eps > 0.0 && self.eps < cap) {
            return Err(Error::validation(format!(
                "eps must lie in (0, {cap}), got {}",
                self.eps
            )));
        }
        if !(self.k_eps > 0.0 && self.k_eps.is_finite()) || !self.x_xi.is_finite() {
            return Err(Error::validation("k_eps must be positive and x_xi finite"));
        }
        Ok(())
    }

    /// `(inner, outer)` slopes: inner near the well, outer beyond `∓K_ε`.
    pub fn slopes(&self, t: &TailBounds) -> (f64, f64) {
        let e = self.eps;
        let (under, over) = match self.side {
            Side::Plus => (t.b_under_plus, t.b_over_plus),
            Side::Minus => (t.b_under_minus, t.b_over_minus),
        };
        match self.envelope {
            Envelope::Under => (under - 2.0 * e, t.b_under_plus.min(t.b_under_minus) - e),
            Envelope::Over => (over + 2.0 * e, t.b_over_plus.max(t.b_over_minus) + e),
        }
    }

    /// Constant added to the quadratic part: `W̲ − ε` or `W̄ + ε` of the
    /// selected side.
    pub fn w_offset(&self, t: &TailBounds) -> f64 {
        match (self.side, self.envelope) {
            (Side::Plus, Envelope::Under) => t.w_under_plus - self.eps,
            (Side::Plus, Envelope::Over) => t.w_over_plus + self.eps,
            (Side::Minus, Envelope::Under) => t.w_under_minus - self.eps,
            (Side::Minus, Envelope::Over) => t.w_over_minus + self.eps,
        }
    }
}

/// Quadratic part of the bracketing potential at `x`. The minus side is the
/// plus formula under `x ↦ −x`.
pub fn lemma_potential_eval(p: &LemmaPotential, t: &TailBounds, x: f64) -> Result<f64> {
    p.validate(t)?;
    let (inner, outer) = p.slopes(t);
    let (x, x_xi) = match p.side {
        Side::Plus => (x, p.x_xi),
        Side::Minus => (-x, -p.x_xi),
    };
    let k = p.k_eps;
    let r = if x >= -k {
        inner * (x - x_xi)
    } else {
        outer * (x + k) + inner * (-k - x_xi)
    };
    Ok(r * r)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::profiles::{tail_bounds, Profile, ProfileSpec};
    use proptest::prelude::*;

    fn spec(omega: f64, omega_tilde: f64, x0: f64, alpha: f64) -> ComparisonSpec {
        ComparisonSpec::new(omega, omega_tilde, x0, alpha).unwrap()
    }

    fn tails(b: ProfileSpec, w: ProfileSpec) -> TailBounds {
        tail_bounds(&Profile::new(b).unwrap(), &Profile::new(w).unwrap())
    }

    #[test]
    fn potential_examples() {
        assert_eq!(comparison_potential(&spec(1.0, 1.0, 0.0, 2.0), 3.0), 1.0);
        assert_eq!(comparison_potential(&spec(1.0, 0.5, 0.0, 2.0), -2.0), 9.0);
        let s = spec(1.3, 0.4, 0.7, 2.5);
        let left = s.omega_tilde * 0.0 + s.omega * (s.x0 - s.alpha);
        assert_eq!(
            comparison_potential(&s, s.x0),
            (s.omega * (s.x0 - s.alpha)).powi(2)
        );
        assert!((comparison_potential(&s, s.x0 - 1e-12) - left * left).abs() < 1e-9);
        for s in [spec(1.0, 0.5, 0.0, 2.0), spec(1.0, 0.5, 3.0, 1.0)] {
            assert_eq!(comparison_potential(&s, s.well_center()), 0.0);
        }
    }

    #[test]
    fn frequencies_must_be_positive() {
        assert!(ComparisonSpec::new(0.0, 1.0, 0.0, 1.0).is_err());
        assert!(ComparisonSpec::new(1.0, -1.0, 0.0, 1.0).is_err());
    }

    #[test]
    fn harmonic_cases() {
        let opts = SolverOptions::default();
        for (alpha, x0) in [(0.0, 0.0), (3.0, -1.0), (-2.0, 5.0)] {
            let s = comparison_eigs(&spec(1.0, 1.0, x0, alpha), 3, &opts).unwrap();
            for (n, v) in s.iter().enumerate() {
                assert!((v - (2 * n + 1) as f64).abs() < 1e-4, "{s:?}");
            }
        }
        let s = comparison_eigs(&spec(2.0, 2.0, 0.0, 0.0), 1, &opts).unwrap();
        assert!((s[0] - 2.0).abs() < 1e-4);
        let s = comparison_eigs(&spec(1.0, 0.5, 0.0, 16.0), 1, &opts).unwrap();
        assert!((s[0] - 1.0).abs() < 1e-3);
    }

    #[test]
    fn softer_left_branch_lowers_levels() {
        let opts = SolverOptions::default();
        let soft = comparison_eigs(&spec(1.0, 0.5, 0.0, 1.0), 2, &opts).unwrap();
        let hard = comparison_eigs(&spec(1.0, 2.0, 0.0, 1.0), 2, &opts).unwrap();
        for n in 0..2 {
            assert!(soft[n] < (2 * n + 1) as f64 && hard[n] > (2 * n + 1) as f64);
        }
    }

    #[test]
    fn study_examples() {
        let opts = SolverOptions::default();
        let study = convergence_study(1.0, 0.5, 0.0, &[2.0, 4.0, 8.0, 16.0], 2, &opts).unwrap();
        for n in 0..2 {
            assert_eq!(study.monotone_from[n], 0);
            assert!(study.error_column(n)[3] < 1e-3);
        }
        let flat = convergence_study(1.0, 1.0, 0.0, &[1.0, 2.0, 4.0], 2, &opts).unwrap();
        assert!(flat.errors.iter().flatten().all(|e| *e < 1e-4));
        let stiff = convergence_study(1.0, 2.0, 0.0, &[2.0, 4.0, 8.0], 1, &opts).unwrap();
        assert!(stiff.errors[2][0] < 1e-3);
        assert!(convergence_study(1.0, 0.5, 0.0, &[4.0, 2.0], 1, &opts).is_err());
    }

    #[test]
    fn study_csv_layout() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("convergence.csv");
        let study =
            convergence_study(1.0, 0.5, 0.0, &[2.0, 4.0], 2, &SolverOptions::default()).unwrap();
        study.write_csv(&path).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("alpha,sigma_1,sigma_2,err_1,err_2"));
        assert_eq!(lines.count(), 2);
    }

    #[test]
    fn shift_equivalence() {
        let opts = SolverOptions::default();
        let s = spec(1.0, 0.5, 0.0, 1.5);
        let a = comparison_eigs(&s, 3, &opts).unwrap();
        let b = comparison_eigs(&s.shifted(), 3, &opts).unwrap();
        for (x, y) in a.iter().zip(&b) {
            assert!((x - y).abs() < 1e-8, "{x} vs {y}");
        }
    }

    #[test]
    fn lower_bound_examples() {
        assert!(
            operator_lower_bound_check(&spec(1.0, 0.5, 0.0, 3.0))
                .unwrap()
                .holds
        );
        let eq = operator_lower_bound_check(&spec(1.0, 1.0, 0.0, 3.0)).unwrap();
        assert!(eq.holds);
        assert_eq!(eq.factor, 1.0);
        for x in [-3.0, 0.0, 2.5] {
            let s = spec(1.0, 1.0, 0.0, 3.0).shifted();
            assert_eq!(comparison_potential(&s, x), x * x);
        }
        assert!(operator_lower_bound_check(&spec(1.0, 0.5, 1.0, 1.0)).is_err());
    }

    #[test]
    fn lemma_examples() {
        let t = tails(ProfileSpec::constant(2.0), ProfileSpec::constant(0.0));
        let under = LemmaPotential {
            side: Side::Plus,
            envelope: Envelope::Under,
            eps: 0.25,
            k_eps: 3.0,
            x_xi: 10.0,
        };
        assert_eq!(lemma_potential_eval(&under, &t, 12.0).unwrap(), 9.0);
        let over = LemmaPotential {
            envelope: Envelope::Over,
            ..under
        };
        assert_eq!(lemma_potential_eval(&over, &t, 10.0).unwrap(), 0.0);

        // join at −K: both branches give (inner·(−K − x_ξ))²
        let (inner, _) = under.slopes(&t);
        let at_join = lemma_potential_eval(&under, &t, -3.0).unwrap();
        let just_left = lemma_potential_eval(&under, &t, -3.0 - 1e-10).unwrap();
        assert_eq!(at_join, (inner * 13.0).powi(2));
        assert!((at_join - just_left).abs() < 1e-6);

        let bad = LemmaPotential { eps: 1.0, ..under };
        assert!(lemma_potential_eval(&bad, &t, 0.0).is_err());
    }

    #[test]
    fn minus_side_mirrors_plus_side() {
        let t = tails(ProfileSpec::step(1.0, 2.0, 0.0), ProfileSpec::constant(0.0));
        let plus = LemmaPotential {
            side: Side::Plus,
            envelope: Envelope::Under,
            eps: 0.1,
            k_eps: 1.0,
            x_xi: 7.0,
        };
        let minus = LemmaPotential {
            side: Side::Minus,
            x_xi: -7.0,
            ..plus
        };
        let ts = t.swapped();
        for x in [-20.0, -1.5, 0.0, 3.0, 9.0] {
            let a = lemma_potential_eval(&minus, &t, x).unwrap();
            let b = lemma_potential_eval(&plus, &ts, -x).unwrap();
            assert!((a - b).abs() < 1e-12);
        }
    }

    proptest! {
        #[test]
        fn under_never_exceeds_over(
            b_minus in 0.5f64..3.0, b_plus in 0.5f64..3.0,
            eps_frac in 0.01f64..0.99, k in 0.1f64..10.0,
            beyond in 0.0f64..20.0, x in -50.0f64..50.0,
            minus in any::<bool>(),
        ) {
            // the well sits beyond K_ε on its own side
            let x_xi = if minus { -(k + beyond) } else { k + beyond };
            let t = TailBounds::from_limits((b_minus, b_plus), (0.0, 0.0));
            let eps = eps_frac * 0.5 * b_minus.min(b_plus);
            let side = if minus { Side::Minus } else { Side::Plus };
            let under = LemmaPotential { side, envelope: Envelope::Under, eps, k_eps: k, x_xi };
            let over = LemmaPotential { envelope: Envelope::Over, ..under };
            let u = lemma_potential_eval(&under, &t, x).unwrap();
            let o = lemma_potential_eval(&over, &t, x).unwrap();
            prop_assert!(u <= o + 1e-9 * (1.0 + o));
        }

        #[test]
        fn softer_left_branch_gives_monotone_columns(
            ratio in 0.2f64..0.9,
            a0 in 0.5f64..3.0,
            growth in 1.2f64..2.5,
        ) {
            // the shifted potential rises pointwise with α, so the discrete
            // levels on the shared grid can only go up
            let alphas = [a0, a0 * growth, a0 * growth * growth];
            let study = convergence_study(1.0, ratio, 0.0, &alphas, 2, &SolverOptions::default()).unwrap();
            for n in 0..2 {
                prop_assert_eq!(study.monotone_from[n], 0, "{:?}", study.errors);
                for i in 0..2 {
                    prop_assert!(study.sigma[i + 1][n] >= study.sigma[i][n] - study.slack);
                }
            }
        }

        #[test]
        fn sigma_respects_lower_bound(omega in 0.5f64..2.0, ratio in 0.3f64..3.0, alpha in 0.5f64..6.0) {
            let s = spec(omega, ratio * omega, 0.0, alpha);
            let sig = comparison_eigs(&s, 2, &SolverOptions { h_max: Some(2e-2), ..Default::default() }).unwrap();
            for (n, v) in sig.iter().enumerate() {
                let floor = s.lower_bound_factor() * (2 * n + 1) as f64 * omega;
                prop_assert!(*v >= floor - 1e-3 * floor, "{} < {}", v, floor);
            }
        }
    }
}
