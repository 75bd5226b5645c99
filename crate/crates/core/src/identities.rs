//! Numerical checks of operator identities: exchange relations, disentangling
//! formulas, the Baker-Campbell-Hausdorff special case, the displacement
//! group law and the Laguerre factorization formulas.
//!
//! Every check returns an [`IdentityCheck`] record. Identities involving an
//! infinite-dimensional representation are compared on a small top-left block
//! of the truncated matrices, well inside the cutoff.

use std::collections::BTreeMap;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::closed_form::{frame, u_element, v_element};
use crate::error::{Error, Result};
use crate::oracle::{expm_diagonal, expm_nilpotent, oracle_block, OracleConfig};
use crate::repr::{fundamental, ladder_matrices, AlgebraKind, AlgebraSpec, Ladder, TruncatedOperator};
use crate::special::{laguerre, ln_factorial, ln_pochhammer};
use crate::C64;

/// `|f|` at or below this is treated as a singular exchange.
pub const SINGULAR_EPS: f64 = 1e-12;
/// Block size used for truncated representations.
pub const TRUNCATED_BLOCK: usize = 16;
/// Smallest cutoff used when a truncated product has to converge.
pub const MIN_PRODUCT_DIM: usize = 8 * TRUNCATED_BLOCK;

pub const EXCHANGE_TOL: f64 = 1e-8;
pub const DISENTANGLING_TOL: f64 = 1e-8;
pub const BCH_TOL: f64 = 1e-9;
pub const FACTORIZATION_TOL: f64 = 1e-8;
pub const GROUP_LAW_TOL: f64 = 1e-10;
pub const ZETA_SERIES_TOL: f64 = 1e-12;
/// A factorization tail counts as converged when its last three terms are
/// below this.
pub const TAIL_EPS: f64 = 1e-14;

/// A parameter value recorded in an [`IdentityCheck`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ParamValue {
    Int(i64),
    Real(f64),
    /// `[re, im]`
    Complex([f64; 2]),
    Text(String),
}

impl From<usize> for ParamValue {
    fn from(v: usize) -> Self {
        ParamValue::Int(v as i64)
    }
}

impl From<u32> for ParamValue {
    fn from(v: u32) -> Self {
        ParamValue::Int(v.into())
    }
}

impl From<f64> for ParamValue {
    fn from(v: f64) -> Self {
        ParamValue::Real(v)
    }
}

impl From<C64> for ParamValue {
    fn from(v: C64) -> Self {
        ParamValue::Complex([v.re, v.im])
    }
}

impl From<&str> for ParamValue {
    fn from(v: &str) -> Self {
        ParamValue::Text(v.to_owned())
    }
}

impl From<String> for ParamValue {
    fn from(v: String) -> Self {
        ParamValue::Text(v)
    }
}

/// Outcome of one identity evaluated at one parameter point.
///
/// `passed` is true exactly when `residual <= tol`; a NaN residual fails.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IdentityCheck {
    pub name: String,
    pub params: BTreeMap<String, ParamValue>,
    /// NaN (serialized as `null`) when the evaluation itself failed.
    #[serde(with = "nan_as_null")]
    pub residual: f64,
    pub tol: f64,
    pub passed: bool,
    /// Cutoff dimension of the representation the check ran in, if any.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub dim: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    /// Set when the error was an oracle or series non-convergence.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub no_convergence: bool,
}

mod nan_as_null {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &f64, s: S) -> Result<S::Ok, S::Error> {
        if v.is_nan() {
            s.serialize_none()
        } else {
            s.serialize_f64(*v)
        }
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<f64, D::Error> {
        Ok(Option::<f64>::deserialize(d)?.unwrap_or(f64::NAN))
    }
}

impl IdentityCheck {
    pub fn new(name: impl Into<String>, residual: f64, tol: f64) -> Self {
        Self {
            name: name.into(),
            params: BTreeMap::new(),
            residual,
            tol,
            passed: residual <= tol,
            dim: None,
            error: None,
            no_convergence: false,
        }
    }

    /// A failed check for an evaluation that raised `err`; the residual is NaN.
    pub fn from_error(name: impl Into<String>, tol: f64, err: &Error) -> Self {
        let mut chk = Self::new(name, f64::NAN, tol);
        chk.error = Some(err.to_string());
        if matches!(err, Error::NoConvergence { .. } | Error::TailNotConverged { .. }) {
            chk.no_convergence = true;
        }
        chk
    }

    pub fn with(mut self, key: &str, value: impl Into<ParamValue>) -> Self {
        self.params.insert(key.to_owned(), value.into());
        self
    }

    pub fn with_dim(mut self, dim: usize) -> Self {
        self.dim = Some(dim);
        self
    }
}

fn max_abs(m: &DMatrix<C64>) -> f64 {
    m.iter().fold(0.0, |acc: f64, v| acc.max(v.norm()))
}

fn max_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    a.iter().zip(b.iter()).fold(0.0, |acc: f64, (x, y)| acc.max((x - y).norm()))
}

/// `max |a - b| / max(1, max |a|)`
fn scaled_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    max_diff(a, b) / max_abs(a).max(1.0)
}

fn top_left(m: &DMatrix<C64>, rows: usize, cols: usize) -> DMatrix<C64> {
    m.view((0, 0), (rows, cols)).into_owned()
}

fn exp_nil(x: &TruncatedOperator, s: C64) -> Result<DMatrix<C64>> {
    Ok(expm_nilpotent(&x.scale(s))?.into_entries())
}

fn exp_diag(x: &TruncatedOperator, s: C64) -> Result<DMatrix<C64>> {
    Ok(expm_diagonal(&x.scale(s))?.into_entries())
}

/// Double the cutoff until the `rows x cols` block produced by `block_at`
/// moves by at most `cfg.tol` relative to its size.
fn converge_block<F>(d0: usize, cfg: &OracleConfig, block_at: F) -> Result<(DMatrix<C64>, usize)>
where
    F: Fn(usize) -> Result<DMatrix<C64>>,
{
    let mut dim = d0.min(cfg.dim_max);
    let mut prev = block_at(dim)?;
    let mut est = f64::INFINITY;
    while dim < cfg.dim_max {
        let next = (dim * cfg.growth.max(2)).min(cfg.dim_max);
        let cur = block_at(next)?;
        est = scaled_diff(&cur, &prev);
        dim = next;
        prev = cur;
        if est <= cfg.tol {
            return Ok((prev, dim));
        }
    }
    Err(Error::NoConvergence { dim, est_error: est, tol: cfg.tol })
}

// ---------------------------------------------------------------------------
// exchange relations

/// Inputs `(a, b, c)` of `e^{a X-} e^{2b X3} e^{c X+}` and the outputs
/// `(x, y, z_out)` of the normal-ordered form `e^{x X+} e^{2y X3} e^{z_out X-}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeParams {
    pub a: C64,
    pub b: C64,
    pub c: C64,
    pub f: C64,
    pub x: C64,
    pub y: C64,
    pub z_out: C64,
}

fn exchange_from_f(a: C64, b: C64, c: C64, f: C64) -> Result<ExchangeParams> {
    if !(f.norm() > SINGULAR_EPS) {
        return Err(Error::SingularExchange(f.norm()));
    }
    let eb = b.exp();
    Ok(ExchangeParams { a, b, c, f, x: c * eb / f, y: -f.ln(), z_out: a * eb / f })
}

/// su(1,1): `f = e^{-b} - a c e^{b}`.
pub fn exchange_params_su11(a: C64, b: C64, c: C64) -> Result<ExchangeParams> {
    exchange_from_f(a, b, c, (-b).exp() - a * c * b.exp())
}

/// su(2): `f = e^{-b} + a c e^{b}`.
pub fn exchange_params_su2(a: C64, b: C64, c: C64) -> Result<ExchangeParams> {
    exchange_from_f(a, b, c, (-b).exp() + a * c * b.exp())
}

pub fn exchange_params(kind: AlgebraKind, a: C64, b: C64, c: C64) -> Result<ExchangeParams> {
    match kind {
        AlgebraKind::Su11 => exchange_params_su11(a, b, c),
        AlgebraKind::Su2 => exchange_params_su2(a, b, c),
        AlgebraKind::HeisenbergWeyl => {
            Err(Error::Domain("exchange relations are defined for su(1,1) and su(2)".into()))
        }
    }
}

fn anti_normal_product(l: &Ladder, p: &ExchangeParams) -> Result<DMatrix<C64>> {
    Ok(exp_nil(&l.lower, p.a)? * exp_diag(&l.diag, 2.0 * p.b)? * exp_nil(&l.raise, p.c)?)
}

fn normal_product(l: &Ladder, p: &ExchangeParams) -> Result<DMatrix<C64>> {
    Ok(exp_nil(&l.raise, p.x)? * exp_diag(&l.diag, 2.0 * p.y)? * exp_nil(&l.lower, p.z_out)?)
}

/// Exchange relation residual in the 2x2 fundamental representation only.
pub fn exchange_fundamental_residual(kind: AlgebraKind, a: C64, b: C64, c: C64) -> Result<f64> {
    let p = exchange_params(kind, a, b, c)?;
    let fl = fundamental(kind)?;
    Ok(scaled_diff(&anti_normal_product(&fl, &p)?, &normal_product(&fl, &p)?))
}

/// Residuals of one exchange relation, each `max |LHS - RHS| / max(1, max |LHS|)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExchangeResiduals {
    pub params: ExchangeParams,
    /// In the 2x2 fundamental representation.
    pub fundamental: f64,
    /// In the spin representation: exact for su(2), a converged truncation
    /// compared on the top-left block for su(1,1).
    pub rep: f64,
    pub rep_dim: usize,
    /// Leading block the spin-representation residual was taken on. For
    /// su(1,1) this is the largest block, up to 16, whose rounding bound
    /// `eps * (|L| |D| |R|)` is within [`ROUNDOFF_BUDGET`] relative to the
    /// block; the anti-normal side is an alternating sum there.
    pub rep_block: usize,
}

/// Evaluate both sides of the exchange relation in the fundamental and in
/// the spin representation of `spec`.
///
/// For su(1,1) the anti-normal side is a truncated infinite sum whose terms
/// decay like `|a c e^{2b}|^k`; it is converged by cutoff doubling and fails
/// with [`Error::NoConvergence`] when that ratio is too close to 1.
pub fn exchange_residuals(
    spec: &AlgebraSpec,
    a: C64,
    b: C64,
    c: C64,
    cfg: &OracleConfig,
) -> Result<ExchangeResiduals> {
    let p = exchange_params(spec.kind(), a, b, c)?;
    let fundamental = exchange_fundamental_residual(spec.kind(), a, b, c)?;

    let (rep, rep_dim) = match spec.exact_dim() {
        Some(d) => {
            let l = ladder_matrices(spec, d)?;
            (scaled_diff(&anti_normal_product(&l, &p)?, &normal_product(&l, &p)?), d)
        }
        None => {
            let bsz = TRUNCATED_BLOCK;
            // lower-triangular times diagonal times upper-triangular: exact on any cutoff
            let rhs = normal_product(&ladder_matrices(spec, bsz)?, &p)?;
            let (lhs, d) = converge_block(MIN_PRODUCT_DIM, cfg, |d| {
                let l = ladder_matrices(spec, d)?;
                let left = exp_nil(&l.lower, p.a)?;
                let mid = exp_diag(&l.diag, 2.0 * p.b)?;
                let right = exp_nil(&l.raise, p.c)?;
                let rows = left.rows(0, bsz) * mid;
                Ok(rows * right.columns(0, bsz))
            })?;
            let l = ladder_matrices(spec, d)?;
            let abs = |m: DMatrix<C64>| m.map(|v| v.norm());
            let left = abs(exp_nil(&l.lower, p.a)?);
            let mid = abs(exp_diag(&l.diag, 2.0 * p.b)?);
            let right = abs(exp_nil(&l.raise, p.c)?);
            let bound = left.rows(0, bsz) * mid * right.columns(0, bsz) * f64::EPSILON;
            let b = stable_prefix(&bound, ROUNDOFF_BUDGET * max_abs(&lhs).max(1.0));
            let rep = scaled_diff(&top_left(&lhs, b, b), &top_left(&rhs, b, b));
            return Ok(ExchangeResiduals { params: p, fundamental, rep, rep_dim: d, rep_block: b });
        }
    };
    Ok(ExchangeResiduals { params: p, fundamental, rep, rep_dim, rep_block: rep_dim })
}

/// Exchange relation check; the residual is the larger of the fundamental
/// and spin-representation residuals.
pub fn verify_exchange(
    spec: &AlgebraSpec,
    a: C64,
    b: C64,
    c: C64,
    cfg: &OracleConfig,
) -> Result<IdentityCheck> {
    let r = exchange_residuals(spec, a, b, c, cfg)?;
    Ok(IdentityCheck::new(
        format!("exchange_{}", spec.kind().label()),
        r.fundamental.max(r.rep),
        EXCHANGE_TOL,
    )
    .with("algebra", spec.to_string())
    .with("a", a)
    .with("b", b)
    .with("c", c)
    .with("residual_fundamental", r.fundamental)
    .with("residual_rep", r.rep)
    .with("rep_block", r.rep_block)
    .with_dim(r.rep_dim))
}

// ---------------------------------------------------------------------------
// disentangling

/// Residuals of the two orderings of a disentangling formula against the
/// direct exponential, on the top-left `block x block` corner.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DisentanglingResiduals {
    /// Normal ordering (raising factor on the left) vs direct.
    pub normal: f64,
    /// Anti-normal ordering vs direct.
    pub anti_normal: f64,
    /// Normal vs anti-normal.
    pub cross: f64,
    pub block: usize,
    /// Leading block on which the anti-normal product is compared; see
    /// [`disentangling_residuals`].
    pub anti_block: usize,
    /// Cutoff of the direct exponential.
    pub dim: usize,
}

/// Largest rounding error tolerated in an entry of a truncated product
/// before the entry is considered numerically meaningless.
pub const ROUNDOFF_BUDGET: f64 = 1e-12;

/// Largest `b` such that every entry of the leading `b x b` block of `bound`
/// is within `budget`.
fn stable_prefix(bound: &DMatrix<f64>, budget: f64) -> usize {
    let n = bound.nrows().min(bound.ncols());
    (1..=n)
        .take_while(|&b| (0..b).all(|i| bound[(i, b - 1)] <= budget && bound[(b - 1, i)] <= budget))
        .last()
        .unwrap_or(0)
}

/// Orderings as `(p, s, scalar)`: normal is
/// `scalar_n e^{p X+} e^{s X3} e^{-conj(p) X-}`, anti-normal is
/// `scalar_a e^{-conj(p) X-} e^{-s X3} e^{p X+}`.
fn ordering_params(spec: &AlgebraSpec, z: C64) -> Result<(C64, f64, f64, f64)> {
    match spec {
        AlgebraSpec::HeisenbergWeyl => {
            let r2 = z.norm_sqr();
            Ok((z, 0.0, (-0.5 * r2).exp(), (0.5 * r2).exp()))
        }
        AlgebraSpec::Su11 { .. } => {
            let zeta = frame(spec, z)?.aux()?;
            Ok((zeta, (-zeta.norm_sqr()).ln_1p(), 1.0, 1.0))
        }
        AlgebraSpec::Su2 { .. } => {
            let eta = frame(spec, z)?.aux()?;
            Ok((eta, eta.norm_sqr().ln_1p(), 1.0, 1.0))
        }
    }
}

/// Compare `exp(z X+ - conj(z) X-)` with both ordered products.
///
/// Fails with [`Error::Pole`] for su(2) when `cos|z| = 0`.
///
/// For the infinite-dimensional algebras the anti-normal product is an
/// alternating infinite sum on the truncated space. It converges for su(1,1)
/// only while `sinh|z| < 1`, and even then its terms can exceed the result by
/// many orders of magnitude. It is compared on the largest leading block
/// whose rounding bound `eps * (|L| |D| |R|)` stays within
/// [`ROUNDOFF_BUDGET`]; that block size is reported as `anti_block`.
pub fn disentangling_residuals(
    spec: &AlgebraSpec,
    z: C64,
    cfg: &OracleConfig,
) -> Result<DisentanglingResiduals> {
    let (p, s, scalar_n, scalar_a) = ordering_params(spec, z)?;
    let block = spec.exact_dim().unwrap_or(TRUNCATED_BLOCK);
    let direct = oracle_block(spec, z, 0.0, block, block, cfg)?;

    let normal_at = |d: usize| -> Result<DMatrix<C64>> {
        let l = ladder_matrices(spec, d)?;
        let m = exp_nil(&l.raise, p)? * exp_diag(&l.diag, C64::new(s, 0.0))? * exp_nil(&l.lower, -p.conj())?;
        Ok(top_left(&m, block, block) * C64::new(scalar_n, 0.0))
    };
    let anti_at = |d: usize| -> Result<DMatrix<C64>> {
        let l = ladder_matrices(spec, d)?;
        let left = exp_nil(&l.lower, -p.conj())?;
        let mid = exp_diag(&l.diag, C64::new(-s, 0.0))?;
        let right = exp_nil(&l.raise, p)?;
        Ok(left.rows(0, block) * mid * right.columns(0, block) * C64::new(scalar_a, 0.0))
    };

    let normal = normal_at(block)?;
    let (anti, anti_dim) = match spec.exact_dim() {
        Some(d) => (anti_at(d)?, d),
        None => converge_block(MIN_PRODUCT_DIM, cfg, anti_at)?,
    };
    let anti_block = match spec.exact_dim() {
        Some(_) => block,
        None => {
            let l = ladder_matrices(spec, anti_dim)?;
            let abs = |m: DMatrix<C64>| m.map(|v| v.norm());
            let left = abs(exp_nil(&l.lower, -p.conj())?);
            let mid = abs(exp_diag(&l.diag, C64::new(-s, 0.0))?);
            let right = abs(exp_nil(&l.raise, p)?);
            let bound = left.rows(0, block) * mid * right.columns(0, block) * (scalar_a * f64::EPSILON);
            stable_prefix(&bound, ROUNDOFF_BUDGET)
        }
    };
    let a = top_left(&anti, anti_block, anti_block);
    Ok(DisentanglingResiduals {
        normal: max_diff(&direct.values, &normal),
        anti_normal: max_diff(&top_left(&direct.values, anti_block, anti_block), &a),
        cross: max_diff(&top_left(&normal, anti_block, anti_block), &a),
        block,
        anti_block,
        dim: direct.dim_used,
    })
}

pub fn verify_disentangling(spec: &AlgebraSpec, z: C64, cfg: &OracleConfig) -> Result<IdentityCheck> {
    let r = disentangling_residuals(spec, z, cfg)?;
    Ok(IdentityCheck::new(
        format!("disentangling_{}", spec.kind().label()),
        r.normal.max(r.anti_normal).max(r.cross),
        DISENTANGLING_TOL,
    )
    .with("algebra", spec.to_string())
    .with("z", z)
    .with("residual_normal", r.normal)
    .with("residual_anti_normal", r.anti_normal)
    .with("residual_cross", r.cross)
    .with("block", r.block)
    .with("anti_block", r.anti_block)
    .with_dim(r.dim))
}

/// `e^{A+B} = e^{-[A,B]/2} e^A e^B` with `A = z a^dag`, `B = -conj(z) a`.
///
/// The commutator is formed from the truncated matrices and must be a scalar
/// away from the cutoff edge; the residual is the larger of that defect and
/// the identity's own defect on the top-left block.
pub fn bch_check(z: C64, cfg: &OracleConfig) -> Result<IdentityCheck> {
    let spec = AlgebraSpec::HeisenbergWeyl;
    let block = TRUNCATED_BLOCK;
    let d = MIN_PRODUCT_DIM;
    let l = ladder_matrices(&spec, d)?;
    let a = l.raise.scale(z);
    let b = l.lower.scale(-z.conj());
    let comm = a.commutator(&b);
    let scalar = comm.get(0, 0);
    let mut defect: f64 = 0.0;
    for c in 0..d / 4 {
        for r in 0..d / 4 {
            let want = if r == c { scalar } else { C64::new(0.0, 0.0) };
            defect = defect.max((comm.get(r, c) - want).norm());
        }
    }
    let direct = oracle_block(&spec, z, 0.0, block, block, cfg)?;
    let product = expm_nilpotent(&a)?.into_entries() * expm_nilpotent(&b)?.into_entries();
    let rhs = top_left(&product, block, block) * (-scalar * 0.5).exp();
    let residual = defect.max(max_diff(&direct.values, &rhs));
    Ok(IdentityCheck::new("bch_hw", residual, BCH_TOL)
        .with("z", z)
        .with("commutator", scalar)
        .with("commutator_defect", defect)
        .with_dim(direct.dim_used))
}

// ---------------------------------------------------------------------------
// group law and factorization

/// `<n|U(z+w)|m>` against `e^{-(z conj(w) - conj(z) w)/2} sum_k <n|U(z)|k><k|U(w)|m>`.
pub fn group_law_check(z: C64, w: C64, n: usize, m: usize, kmax: usize) -> Result<IdentityCheck> {
    if kmax < n + m + 40 {
        return Err(Error::Domain(format!("kmax = {kmax} is below n + m + 40 = {}", n + m + 40)));
    }
    let lhs = u_element(n, m, z + w);
    let phase = (-(z * w.conj() - z.conj() * w) * 0.5).exp();
    let sum: C64 = (0..=kmax).map(|k| u_element(n, k, z) * u_element(k, m, w)).sum();
    let residual = (lhs - phase * sum).norm();
    Ok(IdentityCheck::new("group_law_hw", residual, GROUP_LAW_TOL)
        .with("z", z)
        .with("w", w)
        .with("n", n)
        .with("m", m)
        .with("kmax", kmax))
}

/// Right-hand side of a factorization formula with its tail diagnostics.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesValue {
    pub value: C64,
    /// Largest magnitude among the last three tail terms, prefactors included.
    pub tail: f64,
}

fn c_powi(z: C64, k: usize) -> C64 {
    z.powi(k as i32)
}

/// `(m+N)!/k! * |q|^(k-m-N)` in log space, times the phase of `q^(k-m-N)`.
fn tail_weight(top: usize, k: usize, q: C64) -> C64 {
    let p = k - top;
    if p == 0 {
        return C64::new(1.0, 0.0);
    }
    if q.norm() == 0.0 {
        return C64::new(0.0, 0.0);
    }
    let mag = (ln_factorial(top as u64) - ln_factorial(k as u64) + p as f64 * q.norm().ln()).exp();
    C64::from_polar(mag, p as f64 * q.arg())
}

fn tail_status(last: &[f64], kmax: usize) -> Result<f64> {
    let worst = last.iter().copied().fold(0.0, f64::max);
    if !(worst < TAIL_EPS) {
        return Err(Error::TailNotConverged { k: kmax, last: worst });
    }
    Ok(worst)
}

/// The factorization series for `L_m^{(N)}(|z+w|^2)` with `N >= 0`, the
/// infinite sum cut at `kmax`. For `N = 0` this is the same expression with
/// the middle sum empty and every `(.)^N` equal to one.
pub fn factorization_rhs(m: usize, big_n: usize, z: C64, w: C64, kmax: usize) -> Result<SeriesValue> {
    let top = m + big_n;
    if kmax < top + 3 {
        return Err(Error::Domain(format!("kmax = {kmax} leaves no tail beyond m + N = {top}")));
    }
    let s = z + w;
    if big_n > 0 && s.norm() == 0.0 {
        return Err(Error::Domain("z + w = 0 is excluded for N >= 1".into()));
    }
    let (x, y) = (z.norm_sqr(), w.norm_sqr());
    let (mu, nu, bn) = (m as u32, big_n as u32, big_n as i32);
    let pre = (z.conj() * w).exp();
    let (f1, f2, f3) = if big_n == 0 {
        let one = C64::new(1.0, 0.0);
        (one, one, one)
    } else {
        ((z / s).powi(bn), s.inv().powi(bn), (w / s).powi(bn))
    };

    let mut first = C64::new(0.0, 0.0);
    for k in 0..=m {
        let k32 = k as u32;
        let ratio = (ln_factorial(k as u64) - ln_factorial(m as u64)).exp();
        first += ratio
            * c_powi(-z * w.conj(), m - k)
            * laguerre(k32, mu + nu - k32, x)
            * laguerre(k32, mu - k32, y);
    }
    let mut middle = C64::new(0.0, 0.0);
    for k in m + 1..=top {
        let k32 = k as u32;
        middle += c_powi(z, top - k)
            * c_powi(w, k - m)
            * laguerre(k32, mu + nu - k32, x)
            * laguerre(mu, k32 - mu, y);
    }
    let q = -z.conj() * w;
    let scale3 = (pre * f3).norm();
    let mut third = C64::new(0.0, 0.0);
    let mut last = [f64::INFINITY; 3];
    for k in top + 1..=kmax {
        let k32 = k as u32;
        let term = tail_weight(top, k, q) * laguerre(mu + nu, k32 - mu - nu, x) * laguerre(mu, k32 - mu, y);
        third += term;
        last.rotate_left(1);
        last[2] = term.norm() * scale3;
    }
    let tail = tail_status(&last, kmax)?;
    Ok(SeriesValue { value: pre * (f1 * first + f2 * middle + f3 * third), tail })
}

/// The dedicated `N = 0` factorization series for `L_m(|z+w|^2)`.
pub fn factorization_rhs_n0(m: usize, z: C64, w: C64, kmax: usize) -> Result<SeriesValue> {
    if kmax < m + 3 {
        return Err(Error::Domain(format!("kmax = {kmax} leaves no tail beyond m = {m}")));
    }
    let (x, y) = (z.norm_sqr(), w.norm_sqr());
    let mu = m as u32;
    let pre = (z.conj() * w).exp();
    let mut head = C64::new(0.0, 0.0);
    for k in 0..=m {
        let k32 = k as u32;
        let ratio = (ln_factorial(k as u64) - ln_factorial(m as u64)).exp();
        head += ratio
            * c_powi(-z * w.conj(), m - k)
            * laguerre(k32, mu - k32, x)
            * laguerre(k32, mu - k32, y);
    }
    let q = -z.conj() * w;
    let mut tail_sum = C64::new(0.0, 0.0);
    let mut last = [f64::INFINITY; 3];
    for k in m + 1..=kmax {
        let k32 = k as u32;
        let term = tail_weight(m, k, q) * laguerre(mu, k32 - mu, x) * laguerre(mu, k32 - mu, y);
        tail_sum += term;
        last.rotate_left(1);
        last[2] = term.norm() * pre.norm();
    }
    let tail = tail_status(&last, kmax)?;
    Ok(SeriesValue { value: pre * (head + tail_sum), tail })
}

/// `L_m^{(N)}(|z+w|^2)` against its factorization series; the residual is
/// `|LHS - RHS| / max(1, |LHS|)`. `N = 0` uses the dedicated two-sum form.
pub fn factorization_check(m: usize, big_n: usize, z: C64, w: C64, kmax: usize) -> Result<IdentityCheck> {
    let lhs = laguerre(m as u32, big_n as u32, (z + w).norm_sqr());
    let rhs = if big_n == 0 {
        factorization_rhs_n0(m, z, w, kmax)?
    } else {
        factorization_rhs(m, big_n, z, w, kmax)?
    };
    let residual = (C64::new(lhs, 0.0) - rhs.value).norm() / lhs.abs().max(1.0);
    let name = if big_n == 0 { "factorization_n0" } else { "factorization" };
    Ok(IdentityCheck::new(name, residual, FACTORIZATION_TOL)
        .with("m", m)
        .with("N", big_n)
        .with("z", z)
        .with("w", w)
        .with("kmax", kmax)
        .with("tail", rhs.tail))
}

/// [`factorization_check`] with `kmax` grown from `m + N + 40` in steps of 20
/// until the tail converges, up to `kmax_cap`.
pub fn factorization_check_adaptive(
    m: usize,
    big_n: usize,
    z: C64,
    w: C64,
    kmax_cap: usize,
) -> Result<IdentityCheck> {
    let mut kmax = m + big_n + 40;
    loop {
        match factorization_check(m, big_n, z, w, kmax) {
            Err(Error::TailNotConverged { .. }) if kmax + 20 <= kmax_cap => kmax += 20,
            other => return other,
        }
    }
}

/// The general series evaluated at `N = 0` against the dedicated `N = 0`
/// series.
pub fn factorization_specialization_check(m: usize, z: C64, w: C64, kmax: usize) -> Result<IdentityCheck> {
    let general = factorization_rhs(m, 0, z, w, kmax)?;
    let dedicated = factorization_rhs_n0(m, z, w, kmax)?;
    let residual = (general.value - dedicated.value).norm() / dedicated.value.norm().max(1.0);
    Ok(IdentityCheck::new("factorization_n0_specialization", residual, FACTORIZATION_TOL)
        .with("m", m)
        .with("z", z)
        .with("w", w)
        .with("kmax", kmax))
}

// ---------------------------------------------------------------------------
// su(1,1) elements from the generating function in zeta

/// `<K,n|V(z)|K,m>` as a Taylor coefficient of the generating function
/// `cosh^{-2K}|z| (1 + conj(zeta) beta - alpha (zeta + beta))^{-2K}`:
///
/// `cosh^{-2K}|z| sqrt(n! m! / ((2K)_n (2K)_m)) (2K)_n / n!
///  sum_i C(n, i) zeta^{n-i} (-conj(zeta))^{m-i} (2K+n)_{m-i} / (m-i)!`
///
/// This uses `zeta = tanh|z| z/|z|` instead of kappa, so it is an independent
/// route to the same numbers as [`v_element`].
pub fn zeta_series_element(k: f64, n: usize, m: usize, z: C64) -> Result<C64> {
    Ok(zeta_series_terms(k, n, m, z)?.0)
}

/// [`zeta_series_element`] together with the sum of the term magnitudes.
fn zeta_series_terms(k: f64, n: usize, m: usize, z: C64) -> Result<(C64, f64)> {
    let spec = AlgebraSpec::su11(k)?;
    let zeta = frame(&spec, z)?.aux()?;
    let r = zeta.norm();
    if r == 0.0 {
        let d = if n == m { 1.0 } else { 0.0 };
        return Ok((C64::new(d, 0.0), d));
    }
    let two_k = 2.0 * k;
    let (n32, m32) = (n as u32, m as u32);
    let ln_front = -two_k * z.norm().cosh().ln()
        + 0.5 * (ln_factorial(n as u64) + ln_factorial(m as u64)
            - ln_pochhammer(two_k, n32)
            - ln_pochhammer(two_k, m32))
        + ln_pochhammer(two_k, n32)
        - ln_factorial(n as u64);
    let u = zeta / r;
    let mut sum = C64::new(0.0, 0.0);
    let mut scale = 0.0;
    for i in 0..=n.min(m) {
        let i32_ = i as u32;
        let ln_c = ln_factorial(n as u64) - ln_factorial(i as u64) - ln_factorial((n - i) as u64)
            + ln_pochhammer(two_k + n as f64, m32 - i32_)
            - ln_factorial((m - i) as u64)
            + (n + m - 2 * i) as f64 * r.ln();
        let phase = c_powi(u, n - i) * c_powi(-u.conj(), m - i);
        let mag = (ln_front + ln_c).exp();
        sum += phase * mag;
        scale += mag;
    }
    Ok((sum, scale))
}

/// [`zeta_series_element`] against [`v_element`]. The zeta series alternates
/// too, so the difference is divided by `max(1, sum of |terms|)`.
pub fn zeta_series_check(k: f64, n: usize, m: usize, z: C64) -> Result<IdentityCheck> {
    let (a, scale) = zeta_series_terms(k, n, m, z)?;
    let b = v_element(k, n, m, z)?;
    Ok(IdentityCheck::new("zeta_series_su11", (a - b).norm() / scale.max(1.0), ZETA_SERIES_TOL)
        .with("term_scale", scale)
        .with("K", k)
        .with("n", n)
        .with("m", m)
        .with("z", z))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn close(a: C64, b: C64, tol: f64) -> bool {
        (a - b).norm() <= tol
    }

    #[test]
    fn su11_exchange_parameters() {
        let p = exchange_params_su11(c(0.0, 0.0), c(0.3, 0.0), c(0.0, 0.0)).unwrap();
        assert!(close(p.x, c(0.0, 0.0), 0.0) && close(p.z_out, c(0.0, 0.0), 0.0));
        assert!(close(p.y, c(0.3, 0.0), 1e-15));

        let p = exchange_params_su11(c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!(close(p.f, c(0.75, 0.0), 1e-15));
        assert!(close(p.x, c(2.0 / 3.0, 0.0), 1e-15));
        assert!(close(p.z_out, c(2.0 / 3.0, 0.0), 1e-15));
        assert!(close(p.y, c(0.287_682_072_451_780_9, 0.0), 1e-15));

        let e = exchange_params_su11(c(1.0, 0.0), c(0.0, 0.0), c(1.0, 0.0));
        assert!(matches!(e, Err(Error::SingularExchange(_))));
    }

    #[test]
    fn su2_exchange_parameters() {
        let p = exchange_params_su2(c(0.0, 0.0), c(0.0, 0.0), c(0.0, 0.0)).unwrap();
        assert_eq!((p.x, p.y, p.z_out), (c(0.0, 0.0), c(-0.0, -0.0), c(0.0, 0.0)));

        let p = exchange_params_su2(c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0)).unwrap();
        assert!(close(p.x, c(0.4, 0.0), 1e-15) && close(p.z_out, c(0.4, 0.0), 1e-15));
        assert!(close(p.y, c(-0.223_143_551_314_209_76, 0.0), 1e-15));

        let e = exchange_params_su2(c(0.0, 1.0), c(0.0, 0.0), c(0.0, 1.0));
        assert!(matches!(e, Err(Error::SingularExchange(_))));
        assert!(exchange_params(AlgebraKind::HeisenbergWeyl, c(0.1, 0.0), c(0.0, 0.0), c(0.1, 0.0)).is_err());
    }

    #[test]
    fn exchange_in_fundamental_and_spin_reps() {
        let cfg = OracleConfig::default();
        let r = exchange_residuals(&AlgebraSpec::su11(1.0).unwrap(), c(0.5, 0.0), c(0.0, 0.0), c(0.5, 0.0), &cfg)
            .unwrap();
        assert!(r.fundamental <= 1e-13, "{r:?}");

        let chk = verify_exchange(&AlgebraSpec::su2(1.0).unwrap(), c(0.3, 0.0), c(0.2, 0.0), c(0.1, 0.0), &cfg)
            .unwrap();
        assert!(chk.residual <= 1e-10 && chk.passed, "{chk:?}");
        assert_eq!(chk.dim, Some(3));

        let r = exchange_residuals(&AlgebraSpec::su11(0.25).unwrap(), c(0.4, 0.0), c(0.1, 0.0), c(0.4, 0.0), &cfg)
            .unwrap();
        assert!(r.rep <= 1e-8 && r.fundamental <= 1e-12, "{r:?}");
    }

    #[test]
    fn disentangling_examples() {
        let cfg = OracleConfig::default();
        let chk = verify_disentangling(&AlgebraSpec::HeisenbergWeyl, c(1.0, 0.5), &cfg).unwrap();
        assert!(chk.residual <= 1e-9, "{chk:?}");

        let chk = verify_disentangling(&AlgebraSpec::su2(1.5).unwrap(), c(0.0, 0.6), &cfg).unwrap();
        assert!(chk.residual <= 1e-11, "{chk:?}");
        assert_eq!(chk.dim, Some(4));

        for spec in [AlgebraSpec::HeisenbergWeyl, AlgebraSpec::su11(0.75).unwrap(), AlgebraSpec::su2(2.0).unwrap()] {
            let chk = verify_disentangling(&spec, c(0.0, 0.0), &cfg).unwrap();
            assert_eq!(chk.residual, 0.0, "{chk:?}");
        }

        let chk = verify_disentangling(&AlgebraSpec::su11(2.5).unwrap(), c(0.3, -0.5), &cfg).unwrap();
        assert!(chk.residual <= 1e-8, "{chk:?}");
    }

    #[test]
    fn disentangling_su2_pole() {
        let cfg = OracleConfig::default();
        let z = c(std::f64::consts::FRAC_PI_2, 0.0);
        let e = verify_disentangling(&AlgebraSpec::su2(1.0).unwrap(), z, &cfg);
        assert!(matches!(e, Err(Error::Pole(_))));
    }

    #[test]
    fn bch_hw() {
        let chk = bch_check(c(0.8, -0.6), &OracleConfig::default()).unwrap();
        assert!(chk.passed, "{chk:?}");
        assert_eq!(chk.params["commutator"], ParamValue::Complex([1.0, 0.0]));
    }

    #[test]
    fn group_law_examples() {
        let chk = group_law_check(c(0.0, 0.0), c(0.0, 0.0), 3, 1, 44).unwrap();
        assert_eq!(chk.residual, 0.0);
        let chk = group_law_check(c(0.6, 0.0), c(0.0, 0.3), 1, 2, 80).unwrap();
        assert!(chk.residual <= 1e-10, "{chk:?}");
        let chk = group_law_check(c(1.0, 0.0), c(-1.0, 0.0), 0, 0, 60).unwrap();
        assert!(chk.residual <= 1e-10, "{chk:?}");
        assert!(group_law_check(c(0.1, 0.0), c(0.1, 0.0), 5, 5, 20).is_err());
    }

    #[test]
    fn factorization_examples() {
        let chk = factorization_check(2, 0, c(0.0, 0.0), c(0.7, 0.0), 60).unwrap();
        assert!(chk.residual <= 1e-15, "{chk:?}");
        let chk = factorization_check(1, 0, c(0.5, 0.0), c(0.5, 0.0), 60).unwrap();
        assert!(chk.residual <= 1e-10, "{chk:?}");
        let chk = factorization_check(2, 3, c(0.4, 0.2), c(0.3, -0.1), 80).unwrap();
        assert!(chk.residual <= 1e-9, "{chk:?}");
        let chk = factorization_specialization_check(4, c(0.3, 0.4), c(-0.6, 0.2), 80).unwrap();
        assert!(chk.residual <= 1e-13, "{chk:?}");
    }

    #[test]
    fn factorization_errors() {
        assert!(matches!(
            factorization_check(3, 2, c(0.9, 0.0), c(0.9, 0.1), 8),
            Err(Error::TailNotConverged { .. })
        ));
        assert!(factorization_check(1, 2, c(0.5, 0.0), c(-0.5, 0.0), 60).is_err());
        assert!(factorization_check(1, 0, c(0.5, 0.0), c(-0.5, 0.0), 60).unwrap().passed);
        let chk = factorization_check_adaptive(3, 2, c(0.9, 0.0), c(0.9, 0.1), 400).unwrap();
        assert!(chk.passed, "{chk:?}");
    }

    #[test]
    fn zeta_series_matches_kappa_form() {
        for &k in &[0.25, 0.75, 2.5] {
            for (n, m) in [(0, 0), (1, 0), (0, 3), (5, 2), (7, 7)] {
                let chk = zeta_series_check(k, n, m, c(0.9, -0.4)).unwrap();
                assert!(chk.passed, "{chk:?}");
            }
        }
        // small-argument value worked by hand: sqrt(2K) tanh(r) / cosh(r)^{2K}
        let v = zeta_series_element(0.25, 1, 0, c(0.5, 0.0)).unwrap();
        let r: f64 = 0.5;
        assert!((v.re - 0.5f64.sqrt() * r.tanh() / r.cosh().sqrt()).abs() < 1e-15);
    }

    #[test]
    fn pass_flag_follows_residual() {
        let chk = IdentityCheck::new("x", 1e-3, 1e-2).with("z", c(1.0, -2.0)).with("n", 3usize).with_dim(7);
        assert!(chk.passed);
        assert_eq!(chk.params["n"], ParamValue::Int(3));
        assert!(!IdentityCheck::new("x", f64::NAN, 1.0).passed);
        assert!(!IdentityCheck::new("x", 2.0, 1.0).passed);
        let e = IdentityCheck::from_error("y", 1.0, &Error::NoConvergence { dim: 8, est_error: 1.0, tol: 0.1 });
        assert!(!e.passed && e.no_convergence && e.residual.is_nan());
    }
}
