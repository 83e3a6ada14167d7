//! Lowest eigenpairs of real symmetric tridiagonal matrices.
//!
//! Eigenvalues come from Sturm-sequence bisection, eigenvectors from inverse
//! iteration on a pivoted tridiagonal LU factorization. [`oracle`] holds an
//! independent dense Jacobi solver used to cross-check both.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};

/// Replacement magnitude for vanishing Sturm pivots.
const PIVOT_FLOOR: f64 = 1e-300;
const INVERSE_ITERATION_SEED: u64 = 0x5EED;
const MAX_INVERSE_ITERATIONS: usize = 50;
/// Sweeps always taken before testing the residual, so that components
/// outside the target eigenspace have decayed and not just dropped below the
/// residual tolerance.
const MIN_INVERSE_ITERATIONS: usize = 3;

pub trait Tridiagonal {
    fn diag(&self) -> &[f64];
    /// Sub/super-diagonal, one shorter than [`Tridiagonal::diag`].
    fn offdiag(&self) -> &[f64];

    fn dim(&self) -> usize {
        self.diag().len()
    }

    /// `max|d| + 2 max|e|`, the reference magnitude for tolerances.
    fn scale(&self) -> f64 {
        let d = self.diag().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        let e = self.offdiag().iter().fold(0.0_f64, |m, v| m.max(v.abs()));
        d + 2.0 * e
    }

    /// Gershgorin enclosure of the spectrum.
    fn gershgorin(&self) -> (f64, f64) {
        let (d, e) = (self.diag(), self.offdiag());
        let n = d.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let r =
                if i > 0 { e[i - 1].abs() } else { 0.0 } + if i + 1 < n { e[i].abs() } else { 0.0 };
            lo = lo.min(d[i] - r);
            hi = hi.max(d[i] + r);
        }
        (lo, hi)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SymTridiagonal {
    pub diag: Vec<f64>,
    pub offdiag: Vec<f64>,
}

impl SymTridiagonal {
    pub fn new(diag: Vec<f64>, offdiag: Vec<f64>) -> Result<Self> {
        if diag.is_empty() {
            return Err(Error::validation("tridiagonal matrix has dimension 0"));
        }
        if offdiag.len() + 1 != diag.len() {
            return Err(Error::validation(format!(
                "tridiagonal matrix: {} diagonal entries need {} off-diagonal entries, got {}",
                diag.len(),
                diag.len() - 1,
                offdiag.len()
            )));
        }
        Ok(SymTridiagonal { diag, offdiag })
    }
}

impl Tridiagonal for SymTridiagonal {
    fn diag(&self) -> &[f64] {
        &self.diag
    }

    fn offdiag(&self) -> &[f64] {
        &self.offdiag
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EigenResult {
    pub values: Vec<f64>,
    pub vectors: Option<Vec<Vec<f64>>>,
    /// Final bisection bracket widths for values-only solves, `‖(M − λ)v‖`
    /// when vectors were requested.
    pub residuals: Vec<f64>,
}

impl EigenResult {
    /// Smallest spacing between consecutive returned eigenvalues.
    pub fn min_gap(&self) -> f64 {
        self.values
            .windows(2)
            .map(|w| w[1] - w[0])
            .fold(f64::INFINITY, f64::min)
    }
}

/// Number of eigenvalues strictly below `lambda`.
pub fn count_below<M: Tridiagonal + ?Sized>(m: &M, lambda: f64) -> usize {
    let (d, e) = (m.diag(), m.offdiag());
    let mut count = 0;
    let mut q = 1.0;
    for i in 0..d.len() {
        let coupling = if i == 0 { 0.0 } else { e[i - 1] * e[i - 1] / q };
        q = d[i] - lambda - coupling;
        if q < 0.0 {
            count += 1;
        } else if q == 0.0 {
            // a zero pivot counts as non-negative: the eigenvalue sits at
            // lambda, which is not strictly below it
            q = PIVOT_FLOOR;
        }
        if q.abs() < PIVOT_FLOOR {
            q = PIVOT_FLOOR.copysign(q);
        }
    }
    count
}

pub fn default_tol<M: Tridiagonal + ?Sized>(m: &M) -> f64 {
    1e-10 * m.scale().max(f64::MIN_POSITIVE)
}

/// The `k` lowest eigenvalues, each bisected to a bracket of width `tol`
/// (default [`default_tol`]).
pub fn lowest_eigenvalues<M: Tridiagonal + ?Sized>(
    m: &M,
    k: usize,
    tol: Option<f64>,
) -> Result<EigenResult> {
    let n = m.dim();
    if k > n {
        return Err(Error::TooManyEigenvalues {
            requested: k,
            dimension: n,
        });
    }
    let tol = tol.unwrap_or_else(|| default_tol(m));
    if !(tol > 0.0) {
        return Err(Error::validation("eigenvalue tolerance must be positive"));
    }
    let (lo, hi) = m.gershgorin();
    let pad = tol.max(f64::EPSILON * m.scale());
    let (lo, hi) = (lo - pad, hi + pad);
    let mut values = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for j in 0..k {
        // eigenvalue j lies above eigenvalue j - 1 up to its bracket
        let mut a = values.last().map_or(lo, |&v: &f64| (v - tol).max(lo));
        let mut b = hi;
        while b - a > tol {
            let mid = 0.5 * (a + b);
            if mid <= a || mid >= b {
                break;
            }
            if count_below(m, mid) > j {
                b = mid;
            } else {
                a = mid;
            }
        }
        values.push(0.5 * (a + b));
        residuals.push(b - a);
    }
    Ok(EigenResult {
        values,
        vectors: None,
        residuals,
    })
}

/// Partially pivoted LU factors of `T − λI` in LAPACK `gttrf` layout.
struct TridiagonalLu {
    dl: Vec<f64>,
    d: Vec<f64>,
    du: Vec<f64>,
    du2: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagonalLu {
    fn factor<M: Tridiagonal + ?Sized>(m: &M, shift: f64, pivot_min: f64) -> Self {
        let n = m.dim();
        let mut d: Vec<f64> = m.diag().iter().map(|v| v - shift).collect();
        let mut dl = m.offdiag().to_vec();
        let mut du = m.offdiag().to_vec();
        let mut du2 = vec![0.0; n.saturating_sub(2)];
        let mut swapped = vec![false; n.saturating_sub(1)];
        for i in 0..n.saturating_sub(1) {
            if d[i].abs() >= dl[i].abs() {
                if d[i] != 0.0 {
                    let fact = dl[i] / d[i];
                    dl[i] = fact;
                    d[i + 1] -= fact * du[i];
                }
            } else {
                let fact = d[i] / dl[i];
                d[i] = dl[i];
                dl[i] = fact;
                let temp = du[i];
                du[i] = d[i + 1];
                d[i + 1] = temp - fact * d[i + 1];
                if i + 2 < n {
                    du2[i] = du[i + 1];
                    du[i + 1] *= -fact;
                }
                swapped[i] = true;
            }
        }
        for p in d.iter_mut() {
            if p.abs() < pivot_min {
                *p = if *p < 0.0 { -pivot_min } else { pivot_min };
            }
        }
        TridiagonalLu {
            dl,
            d,
            du,
            du2,
            swapped,
        }
    }

    fn solve_in_place(&self, b: &mut [f64]) {
        let n = self.d.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                let temp = b[i];
                b[i] = b[i + 1];
                b[i + 1] = temp - self.dl[i] * b[i];
            } else {
                b[i + 1] -= self.dl[i] * b[i];
            }
        }
        b[n - 1] /= self.d[n - 1];
        if n > 1 {
            b[n - 2] = (b[n - 2] - self.du[n - 2] * b[n - 1]) / self.d[n - 2];
        }
        for i in (0..n.saturating_sub(2)).rev() {
            b[i] = (b[i] - self.du[i] * b[i + 1] - self.du2[i] * b[i + 2]) / self.d[i];
        }
    }
}

/// `‖(M − λ)v‖₂`.
pub fn residual_norm<M: Tridiagonal + ?Sized>(m: &M, lambda: f64, v: &[f64]) -> f64 {
    let (d, e) = (m.diag(), m.offdiag());
    let n = d.len();
    (0..n)
        .map(|i| {
            let mut r = (d[i] - lambda) * v[i];
            if i > 0 {
                r += e[i - 1] * v[i - 1];
            }
            if i + 1 < n {
                r += e[i] * v[i + 1];
            }
            r * r
        })
        .sum::<f64>()
        .sqrt()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    if norm > 0.0 {
        v.iter_mut().for_each(|x| *x /= norm);
    }
    norm
}

/// Flip `v` so that its first largest-magnitude entry is positive.
fn fix_sign(v: &mut [f64]) {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    if let Some(lead) = v.iter().find(|x| x.abs() >= max * (1.0 - 1e-8)) {
        if *lead < 0.0 {
            v.iter_mut().for_each(|x| *x = -*x);
        }
    }
}

/// Unit eigenvector for an eigenvalue approximation `lambda` by inverse
/// iteration. Returns the vector and its residual `‖(M − λ)v‖`.
pub fn eigenvector<M: Tridiagonal + ?Sized>(
    m: &M,
    lambda: f64,
    resid_tol: Option<f64>,
) -> Result<(Vec<f64>, f64)> {
    let n = m.dim();
    let scale = m.scale().max(f64::MIN_POSITIVE);
    let resid_tol = resid_tol.unwrap_or(1e-8 * scale);
    let lu = TridiagonalLu::factor(m, lambda, f64::EPSILON * scale);
    let mut rng = ChaCha8Rng::seed_from_u64(INVERSE_ITERATION_SEED);
    let mut v: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
    normalize(&mut v);
    let mut residual = f64::INFINITY;
    for it in 0..MAX_INVERSE_ITERATIONS {
        lu.solve_in_place(&mut v);
        if normalize(&mut v) == 0.0 || v.iter().any(|x| !x.is_finite()) {
            break;
        }
        residual = residual_norm(m, lambda, &v);
        if it + 1 >= MIN_INVERSE_ITERATIONS && residual <= resid_tol {
            fix_sign(&mut v);
            return Ok((v, residual));
        }
    }
    Err(Error::NonConvergence {
        iterations: MAX_INVERSE_ITERATIONS,
        residual,
    })
}

/// Lowest `k` eigenvalues together with their unit eigenvectors.
pub fn lowest_eigenpairs<M: Tridiagonal + ?Sized>(
    m: &M,
    k: usize,
    tol: Option<f64>,
) -> Result<EigenResult> {
    let mut result = lowest_eigenvalues(m, k, tol)?;
    let mut vectors = Vec::with_capacity(k);
    let mut residuals = Vec::with_capacity(k);
    for &lambda in &result.values {
        let (v, r) = eigenvector(m, lambda, None)?;
        vectors.push(v);
        residuals.push(r);
    }
    result.vectors = Some(vectors);
    result.residuals = residuals;
    Ok(result)
}

/// Number of sign changes along `v`, ignoring entries below `rel_floor`
/// times the largest magnitude.
pub fn sign_changes(v: &[f64], rel_floor: f64) -> usize {
    let max = v.iter().fold(0.0_f64, |m, x| m.max(x.abs()));
    let mut last = 0.0_f64;
    let mut changes = 0;
    for &x in v.iter().filter(|x| x.abs() > rel_floor * max) {
        if last != 0.0 && (x < 0.0) != (last < 0.0) {
            changes += 1;
        }
        last = x;
    }
    changes
}

/// Dense reference solver, independent of the Sturm/bisection path.
pub mod oracle {
    use super::Tridiagonal;
    use crate::error::{Error, Result};

    pub const DIMENSION_CAP: usize = 64;

    /// Full sorted spectrum by cyclic Jacobi rotations on the dense matrix.
    pub fn dense_oracle<M: Tridiagonal + ?Sized>(m: &M) -> Result<Vec<f64>> {
        let n = m.dim();
        if n > DIMENSION_CAP {
            return Err(Error::DimensionCap {
                dimension: n,
                cap: DIMENSION_CAP,
            });
        }
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            a[i][i] = m.diag()[i];
            if i + 1 < n {
                a[i][i + 1] = m.offdiag()[i];
                a[i + 1][i] = m.offdiag()[i];
            }
        }
        let frob: f64 = a.iter().flatten().map(|x| x * x).sum::<f64>().sqrt();
        for _sweep in 0..100 {
            let off: f64 = (0..n)
                .flat_map(|i| (0..n).filter(move |&j| j != i).map(move |j| (i, j)))
                .map(|(i, j)| a[i][j] * a[i][j])
                .sum::<f64>()
                .sqrt();
            if off <= 1e-17 * frob || off == 0.0 {
                break;
            }
            for p in 0..n {
                for q in (p + 1)..n {
                    let apq = a[p][q];
                    if apq == 0.0 {
                        continue;
                    }
                    let theta = (a[q][q] - a[p][p]) / (2.0 * apq);
                    let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                    let t = if theta == 0.0 { 1.0 } else { t };
                    let c = 1.0 / (t * t + 1.0).sqrt();
                    let s = t * c;
                    for row in a.iter_mut() {
                        let (akp, akq) = (row[p], row[q]);
                        row[p] = c * akp - s * akq;
                        row[q] = s * akp + c * akq;
                    }
                    for k in 0..n {
                        let (apk, aqk) = (a[p][k], a[q][k]);
                        a[p][k] = c * apk - s * aqk;
                        a[q][k] = s * apk + c * aqk;
                    }
                }
            }
        }
        let mut values: Vec<f64> = (0..n).map(|i| a[i][i]).collect();
        values.sort_by(f64::total_cmp);
        Ok(values)
    }
}
