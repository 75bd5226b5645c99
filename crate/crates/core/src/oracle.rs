//! Ground truth by brute force: exponentiate the truncated generator and grow
//! the cutoff until the requested elements stop moving.
//!
//! Note that this is `exp` of the truncated generator, not a truncation of
//! the exact operator. The two differ near the cutoff, which is why the
//! oracle only reports elements whose value is stable under doubling.

use nalgebra::{DMatrix, SymmetricEigen};
use serde::{Deserialize, Serialize};

use crate::closed_form::ElementQuery;
use crate::error::{Error, Result};
use crate::repr::{ladder_matrices, AlgebraSpec, TruncatedOperator};
use crate::C64;

/// Allowed `max |G + G^H|` for [`expm_antihermitian`].
pub const ANTI_HERMITIAN_TOL: f64 = 1e-13;

pub const DEFAULT_DIM_MAX: usize = 2048;
pub const DIM_MAX_ENV: &str = "ORACLE_DIM_MAX";

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OracleConfig {
    /// Required agreement between the last two cutoffs.
    pub tol: f64,
    /// Starting cutoff; `None` means `n + m + 32` for the requested block.
    pub dim0: Option<usize>,
    pub dim_max: usize,
    pub growth: usize,
}

impl Default for OracleConfig {
    fn default() -> Self {
        Self { tol: 1e-10, dim0: None, dim_max: DEFAULT_DIM_MAX, growth: 2 }
    }
}

impl OracleConfig {
    /// Default configuration with `ORACLE_DIM_MAX` applied when set.
    pub fn from_env() -> Self {
        let mut cfg = Self::default();
        if let Some(d) = std::env::var(DIM_MAX_ENV).ok().and_then(|s| s.trim().parse().ok()) {
            cfg.dim_max = d;
        }
        cfg
    }

    fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0) {
            return Err(Error::Domain(format!("oracle tol must be positive, got {}", self.tol)));
        }
        if self.growth < 2 {
            return Err(Error::Domain(format!("cutoff growth must be >= 2, got {}", self.growth)));
        }
        Ok(())
    }
}

/// Cutoff `dim` together with `max |value(dim) - value(previous dim)|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CutoffStep {
    pub dim: usize,
    pub delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OracleResult {
    pub value: C64,
    pub dim_used: usize,
    pub est_error: f64,
    pub history: Vec<CutoffStep>,
}

/// Top-left `rows x cols` block of the exponential at a converged cutoff.
#[derive(Debug, Clone, PartialEq)]
pub struct OracleBlock {
    pub values: DMatrix<C64>,
    pub dim_used: usize,
    pub est_error: f64,
    pub history: Vec<CutoffStep>,
}

impl OracleBlock {
    pub fn get(&self, n: usize, m: usize) -> C64 {
        self.values[(n, m)]
    }

    /// Whether the cutoff differences shrank monotonically.
    pub fn monotone(&self) -> bool {
        self.history.windows(2).all(|w| w[1].delta <= w[0].delta)
    }
}

fn anti_hermitian_defect(g: &DMatrix<C64>) -> f64 {
    let d = g.nrows();
    let mut worst: f64 = 0.0;
    for c in 0..d {
        for r in 0..=c {
            worst = worst.max((g[(r, c)] + g[(c, r)].conj()).norm());
        }
    }
    worst
}

/// `exp(G)` for anti-Hermitian `G`, through the eigendecomposition of the
/// Hermitian `H = -iG`: `exp(G) = V diag(e^{i lambda}) V^H`.
pub fn expm_antihermitian(g: &TruncatedOperator) -> Result<TruncatedOperator> {
    let defect = anti_hermitian_defect(g.entries());
    if defect > ANTI_HERMITIAN_TOL {
        return Err(Error::NotAntiHermitian(defect));
    }
    let mut h = g.entries() * C64::new(0.0, -1.0);
    // symmetrize away the admitted defect so the solver sees an exact Hermitian input
    let d = h.nrows();
    for c in 0..d {
        h[(c, c)].im = 0.0;
        for r in 0..c {
            let avg = (h[(r, c)] + h[(c, r)].conj()) * 0.5;
            h[(r, c)] = avg;
            h[(c, r)] = avg.conj();
        }
    }
    let eig = SymmetricEigen::new(h);
    let v = eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, lambda) in eig.eigenvalues.iter().enumerate() {
        let phase = C64::from_polar(1.0, *lambda);
        for x in scaled.column_mut(j).iter_mut() {
            *x *= phase;
        }
    }
    Ok(TruncatedOperator::new(scaled * v.adjoint()))
}

/// `exp(X)` for strictly upper or strictly lower triangular `X` by the
/// terminating power series.
pub fn expm_nilpotent(x: &TruncatedOperator) -> Result<TruncatedOperator> {
    let d = x.dim();
    let e = x.entries();
    let upper = (0..d).all(|c| (c..d).all(|r| e[(r, c)] == C64::new(0.0, 0.0)));
    let lower = (0..d).all(|c| (0..=c).all(|r| e[(r, c)] == C64::new(0.0, 0.0)));
    if !(upper || lower) {
        return Err(Error::Domain("expm_nilpotent needs a strictly triangular matrix".into()));
    }
    if let Some(e) = expm_single_band(e) {
        return Ok(TruncatedOperator::new(e));
    }
    let mut acc = DMatrix::<C64>::identity(d, d);
    let mut term = DMatrix::<C64>::identity(d, d);
    for p in 1..d {
        term = (&term * e) / C64::new(p as f64, 0.0);
        if term.iter().all(|v| *v == C64::new(0.0, 0.0)) {
            break;
        }
        acc += &term;
    }
    Ok(TruncatedOperator::new(acc))
}

/// Closed form for a matrix supported on the first sub- or superdiagonal:
/// `exp(X)[i, j] = x_j x_{j+1} ... x_{i-1} / (i - j)!` in the lower case.
fn expm_single_band(e: &DMatrix<C64>) -> Option<DMatrix<C64>> {
    let d = e.nrows();
    let zero = C64::new(0.0, 0.0);
    let off_band = |r: usize, c: usize| r != c + 1 && c != r + 1;
    if (0..d).any(|c| (0..d).any(|r| off_band(r, c) && e[(r, c)] != zero)) {
        return None;
    }
    let sub = (0..d.saturating_sub(1)).all(|i| e[(i, i + 1)] == zero);
    let sup = (0..d.saturating_sub(1)).all(|i| e[(i + 1, i)] == zero);
    if !(sub || sup) {
        return None;
    }
    let mut out = DMatrix::<C64>::identity(d, d);
    for j in 0..d {
        let mut v = C64::new(1.0, 0.0);
        for i in j + 1..d {
            let x = if sub { e[(i, i - 1)] } else { e[(i - 1, i)] };
            v = v * x / (i - j) as f64;
            if sub {
                out[(i, j)] = v;
            } else {
                out[(j, i)] = v;
            }
        }
    }
    Some(out)
}

/// `exp(X)` for diagonal `X`.
pub fn expm_diagonal(x: &TruncatedOperator) -> Result<TruncatedOperator> {
    if !x.is_diagonal() {
        return Err(Error::Domain("expm_diagonal needs a diagonal matrix".into()));
    }
    let diag: Vec<C64> = (0..x.dim()).map(|i| x.get(i, i).exp()).collect();
    Ok(TruncatedOperator::from_diagonal(&diag))
}

/// `max |U U^H - I|`.
pub fn unitarity_defect(u: &TruncatedOperator) -> f64 {
    let d = u.dim();
    let p = u.entries() * u.entries().adjoint();
    let mut worst: f64 = 0.0;
    for c in 0..d {
        for r in 0..d {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((p[(r, c)] - C64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// `exp(z X+ - conj(z) X- + 2 i t X3)` on a cutoff of size `dim`.
pub fn exp_generator(spec: &AlgebraSpec, dim: usize, z: C64, t: f64) -> Result<TruncatedOperator> {
    Ok(TruncatedOperator::new(exp_generator_block(spec, dim, z, t, dim, dim)?))
}

/// Top-left `rows x cols` block of [`exp_generator`].
///
/// The generator is tridiagonal with ladder entries on the off-diagonals.
/// Conjugating by `P = diag((i z/|z|)^n)` turns it into `i T` with `T` real
/// symmetric tridiagonal, so only a real eigenproblem is solved:
/// `exp(G) = P Q diag(e^{i lambda}) Q^T P^H`.
pub fn exp_generator_block(
    spec: &AlgebraSpec,
    dim: usize,
    z: C64,
    t: f64,
    rows: usize,
    cols: usize,
) -> Result<DMatrix<C64>> {
    let ladder = ladder_matrices(spec, dim)?;
    if rows > dim || cols > dim {
        return Err(Error::DimensionMismatch { expected: dim, got: rows.max(cols) });
    }
    let r = z.norm();
    let u = if r == 0.0 { C64::new(1.0, 0.0) } else { z / r };
    let mut tri = DMatrix::<f64>::zeros(dim, dim);
    for n in 0..dim {
        tri[(n, n)] = 2.0 * t * ladder.diag.get(n, n).re;
        if n + 1 < dim {
            let off = -r * ladder.raise.get(n + 1, n).re;
            tri[(n + 1, n)] = off;
            tri[(n, n + 1)] = off;
        }
    }
    let eig = SymmetricEigen::new(tri);
    let q = &eig.eigenvectors;
    let phases: Vec<C64> = eig.eigenvalues.iter().map(|l| C64::from_polar(1.0, *l)).collect();
    let p: Vec<C64> = (0..dim.max(1))
        .scan(C64::new(1.0, 0.0), |acc, _| {
            let cur = *acc;
            *acc *= C64::new(0.0, 1.0) * u;
            Some(cur)
        })
        .collect();
    let mut out = DMatrix::<C64>::zeros(rows, cols);
    for k in 0..cols {
        for j in 0..rows {
            let mut re = 0.0;
            let mut im = 0.0;
            for (l, ph) in phases.iter().enumerate() {
                let w = q[(j, l)] * q[(k, l)];
                re += w * ph.re;
                im += w * ph.im;
            }
            out[(j, k)] = p[j] * C64::new(re, im) * p[k].conj();
        }
    }
    Ok(out)
}

/// Converge the top-left `rows x cols` block of the exponential.
///
/// For su(2) the representation is finite and the block is exact at
/// `2J + 1`; otherwise cutoffs `dim0, growth*dim0, ...` are tried until the
/// largest change in the block is at most `cfg.tol`.
pub fn oracle_block(
    spec: &AlgebraSpec,
    z: C64,
    t: f64,
    rows: usize,
    cols: usize,
    cfg: &OracleConfig,
) -> Result<OracleBlock> {
    cfg.validate()?;
    if rows == 0 || cols == 0 {
        return Err(Error::Domain("empty oracle block".into()));
    }
    spec.check_index(rows - 1)?;
    spec.check_index(cols - 1)?;
    let take = |d: usize| exp_generator_block(spec, d, z, t, rows, cols);

    if let Some(d) = spec.exact_dim() {
        return Ok(OracleBlock { values: take(d)?, dim_used: d, est_error: 0.0, history: vec![] });
    }

    let needed = rows + cols;
    let dim0 = cfg.dim0.unwrap_or(needed + 30);
    if dim0 < needed {
        return Err(Error::Domain(format!(
            "dim0 = {dim0} is below the block requirement n + m + 2 = {needed}"
        )));
    }
    if cfg.dim_max < dim0 {
        return Err(Error::Domain(format!("dim_max = {} is below dim0 = {dim0}", cfg.dim_max)));
    }

    let mut dim = dim0;
    let mut prev = take(dim)?;
    let mut history = Vec::new();
    let mut est = f64::INFINITY;
    while dim < cfg.dim_max {
        let next = (dim * cfg.growth).min(cfg.dim_max);
        let cur = take(next)?;
        est = (&cur - &prev).iter().fold(0.0, |m: f64, d| m.max(d.norm()));
        history.push(CutoffStep { dim: next, delta: est });
        dim = next;
        prev = cur;
        if est <= cfg.tol {
            let block = OracleBlock { values: prev, dim_used: dim, est_error: est, history };
            if !block.monotone() {
                log::warn!("non-monotone cutoff convergence for {spec} at z = {z}: {:?}", block.history);
            }
            return Ok(block);
        }
    }
    Err(Error::NoConvergence { dim, est_error: est, tol: cfg.tol })
}

/// Oracle value of a single element; the only evaluator for `t != 0`.
pub fn oracle_element(q: &ElementQuery, cfg: &OracleConfig) -> Result<OracleResult> {
    q.validate()?;
    let block = oracle_block(&q.algebra, q.z, q.t, q.n + 1, q.m + 1, cfg)?;
    Ok(OracleResult {
        value: block.get(q.n, q.m),
        dim_used: block.dim_used,
        est_error: block.est_error,
        history: block.history,
    })
}
