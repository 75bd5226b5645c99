//! Seeded verification suites: closed forms against the oracle, symmetry and
//! unitarity properties, and every identity in [`crate::identities`].
//!
//! Random parameter points are drawn sequentially from a ChaCha8 stream
//! seeded per suite, then evaluated in parallel. Results keep the draw
//! order, so a report depends only on the seed and the options.

use std::collections::BTreeSet;
use std::f64::consts::FRAC_1_SQRT_2;
use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::closed_form::{element, ElementQuery};
use crate::error::{Error, Result};
use crate::identities::{
    bch_check, exchange_fundamental_residual, exchange_params, exchange_residuals,
    factorization_check_adaptive, factorization_specialization_check, group_law_check,
    verify_disentangling, zeta_series_check, IdentityCheck, BCH_TOL, DISENTANGLING_TOL,
    FACTORIZATION_TOL, GROUP_LAW_TOL, ZETA_SERIES_TOL,
};
use crate::oracle::{exp_generator, oracle_block, unitarity_defect, OracleConfig};
use crate::repr::{AlgebraKind, AlgebraSpec};
use crate::special::KahanSum;
use crate::C64;

pub const DEFAULT_SEED: u64 = 20_240_901;

pub const HW_ORACLE_TOL: f64 = 1e-9;
pub const SU11_ORACLE_TOL: f64 = 1e-8;
pub const SU2_ORACLE_TOL: f64 = 1e-10;
pub const CONJUGATION_TOL: f64 = 1e-12;
pub const SU2_UNITARITY_TOL: f64 = 1e-12;
pub const TAIL_UNITARITY_TOL: f64 = 1e-10;
pub const EXCHANGE_FUNDAMENTAL_TOL: f64 = 1e-12;
pub const EXCHANGE_REP_TOL: f64 = 1e-8;
pub const EXTENDED_UNITARITY_TOL: f64 = 1e-11;
pub const EXTENDED_REDUCTION_TOL: f64 = 1e-9;

/// Spins `K` used by the su(1,1) suites.
pub const SU11_SPINS: [f64; 4] = [0.25, 0.75, 1.0, 2.5];
/// Values of `2J` used by the su(2) closed-form suite.
pub const SU2_TWO_J: [u32; 5] = [1, 2, 3, 6, 10];
/// Values of `2J` used by the su(2) identity suites.
pub const SU2_IDENTITY_TWO_J: [u32; 4] = [1, 2, 3, 10];

/// Magnitude cap on `|a c e^{2b}|` for su(1,1) exchange points that are also
/// checked in the truncated representation.
pub const SU11_EXCHANGE_RATIO: f64 = 0.3;
/// Largest `|z|` for su(1,1) disentangling points.
pub const SU11_DISENTANGLING_RADIUS: f64 = 0.6;
/// Largest `|z|` for Heisenberg-Weyl disentangling points.
pub const HW_DISENTANGLING_RADIUS: f64 = 1.5;
/// Largest `|z|` for su(2) disentangling points. The eta form multiplies
/// factors up to `(1 + |eta|^2)^{2J}`, so points closer to `cos|z| = 0`
/// lose digits to rounding for large `J`.
pub const SU2_DISENTANGLING_RADIUS: f64 = 1.2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    HwOracle,
    Su11Oracle,
    Su2Oracle,
    Conjugation,
    Unitarity,
    Factorization,
    GroupLaw,
    Exchange,
    Disentangling,
    Extended,
    Bch,
    ZetaSeries,
}

impl Suite {
    pub const ALL: [Suite; 12] = [
        Suite::HwOracle,
        Suite::Su11Oracle,
        Suite::Su2Oracle,
        Suite::Conjugation,
        Suite::Unitarity,
        Suite::Factorization,
        Suite::GroupLaw,
        Suite::Exchange,
        Suite::Disentangling,
        Suite::Extended,
        Suite::Bch,
        Suite::ZetaSeries,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::HwOracle => "hw_oracle",
            Suite::Su11Oracle => "su11_oracle",
            Suite::Su2Oracle => "su2_oracle",
            Suite::Conjugation => "conjugation",
            Suite::Unitarity => "unitarity",
            Suite::Factorization => "factorization",
            Suite::GroupLaw => "group_law",
            Suite::Exchange => "exchange",
            Suite::Disentangling => "disentangling",
            Suite::Extended => "extended",
            Suite::Bch => "bch",
            Suite::ZetaSeries => "zeta_series",
        }
    }

    fn salt(self) -> u64 {
        Suite::ALL.iter().position(|s| *s == self).unwrap_or(0) as u64 + 1
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let key = s.trim().to_ascii_lowercase().replace('-', "_");
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == key)
            .ok_or_else(|| {
                let names: Vec<_> = Suite::ALL.iter().map(|x| x.name()).collect();
                Error::Domain(format!("unknown suite {s:?}; expected one of {}", names.join(", ")))
            })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteOptions {
    pub seed: u64,
    /// Upper bound applied to every index range (`n`, `m`) in the suites.
    pub m_max: Option<usize>,
    pub oracle: OracleConfig,
}

impl Default for SuiteOptions {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, m_max: None, oracle: OracleConfig::default() }
    }
}

impl SuiteOptions {
    fn cap(&self, n: usize) -> usize {
        self.m_max.map_or(n, |m| m.min(n))
    }

    fn rng(&self, suite: Suite) -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(self.seed ^ suite.salt().wrapping_mul(0x9E37_79B9_7F4A_7C15))
    }
}

/// Pass/fail record of one suite.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationReport {
    pub suite: String,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    /// Checks that failed because a cutoff or series did not converge.
    pub no_convergence: usize,
    /// The check with the largest `residual / tol`; any errored check wins.
    pub worst: Option<IdentityCheck>,
    /// Distinct representation cutoffs used, ascending.
    pub cutoffs: Vec<usize>,
    pub checks: Vec<IdentityCheck>,
    /// Seconds; only filled in when requested, so reports stay reproducible.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub wall_clock_s: Option<f64>,
}

fn severity(c: &IdentityCheck) -> f64 {
    if c.residual.is_nan() {
        f64::INFINITY
    } else {
        c.residual / c.tol
    }
}

impl VerificationReport {
    pub fn from_checks(suite: impl Into<String>, checks: Vec<IdentityCheck>) -> Self {
        let passed = checks.iter().filter(|c| c.passed).count();
        let no_convergence = checks.iter().filter(|c| c.no_convergence).count();
        let worst = checks
            .iter()
            .fold(None::<&IdentityCheck>, |best, c| match best {
                Some(b) if severity(b) >= severity(c) => Some(b),
                _ => Some(c),
            })
            .cloned();
        let cutoffs: BTreeSet<usize> = checks.iter().filter_map(|c| c.dim).collect();
        Self {
            suite: suite.into(),
            total: checks.len(),
            passed,
            failed: checks.len() - passed,
            no_convergence,
            worst,
            cutoffs: cutoffs.into_iter().collect(),
            checks,
            wall_clock_s: None,
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

/// Reports for several suites with totals.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VerificationSummary {
    pub seed: u64,
    pub total: usize,
    pub passed: usize,
    pub failed: usize,
    pub no_convergence: usize,
    pub suites: Vec<VerificationReport>,
}

impl VerificationSummary {
    pub fn new(seed: u64, suites: Vec<VerificationReport>) -> Self {
        Self {
            seed,
            total: suites.iter().map(|s| s.total).sum(),
            passed: suites.iter().map(|s| s.passed).sum(),
            failed: suites.iter().map(|s| s.failed).sum(),
            no_convergence: suites.iter().map(|s| s.no_convergence).sum(),
            suites,
        }
    }

    pub fn ok(&self) -> bool {
        self.failed == 0
    }
}

pub fn run_suite(suite: Suite, opts: &SuiteOptions) -> VerificationReport {
    let checks = match suite {
        Suite::HwOracle => hw_oracle(opts),
        Suite::Su11Oracle => su11_oracle(opts),
        Suite::Su2Oracle => su2_oracle(opts),
        Suite::Conjugation => conjugation(opts),
        Suite::Unitarity => unitarity(opts),
        Suite::Factorization => factorization(opts),
        Suite::GroupLaw => group_law(opts),
        Suite::Exchange => exchange(opts),
        Suite::Disentangling => disentangling(opts),
        Suite::Extended => extended(opts),
        Suite::Bch => bch(opts),
        Suite::ZetaSeries => zeta_series(opts),
    };
    VerificationReport::from_checks(suite.name(), checks)
}

pub fn run_suites(suites: &[Suite], opts: &SuiteOptions) -> VerificationSummary {
    VerificationSummary::new(opts.seed, suites.iter().map(|s| run_suite(*s, opts)).collect())
}

// ---------------------------------------------------------------------------
// parameter sets

/// `{0.25, 0.5, 1, 2} x {1, i, (1+i)/sqrt 2}`, optionally capped in modulus.
pub fn z_set(max_abs: f64) -> Vec<C64> {
    let dirs = [C64::new(1.0, 0.0), C64::new(0.0, 1.0), C64::new(FRAC_1_SQRT_2, FRAC_1_SQRT_2)];
    let mut out = Vec::new();
    for r in [0.25, 0.5, 1.0, 2.0] {
        if r <= max_abs {
            out.extend(dirs.iter().map(|d| d * r));
        }
    }
    out
}

/// 5 x 5 grid over `[-1.2, 1.2]^2`.
pub fn su2_grid() -> Vec<C64> {
    let ticks = [-1.2, -0.6, 0.0, 0.6, 1.2];
    ticks.iter().flat_map(|&x| ticks.iter().map(move |&y| C64::new(x, y))).collect()
}

fn su11_specs() -> Vec<AlgebraSpec> {
    SU11_SPINS.iter().map(|&k| AlgebraSpec::Su11 { k }).collect()
}

fn su2_specs(two_js: &[u32]) -> Vec<AlgebraSpec> {
    two_js.iter().map(|&two_j| AlgebraSpec::Su2 { two_j }).collect()
}

/// Uniform point in the closed disc of radius `r`.
fn disc<R: Rng>(rng: &mut R, r: f64) -> C64 {
    let rho = r * rng.random::<f64>().sqrt();
    C64::from_polar(rho, rng.random_range(-std::f64::consts::PI..std::f64::consts::PI))
}

fn largest_index(spec: &AlgebraSpec, cap: usize) -> usize {
    spec.exact_dim().map_or(cap, |d| (d - 1).min(cap))
}

// ---------------------------------------------------------------------------
// closed form against the oracle

fn element_of(spec: &AlgebraSpec, n: usize, m: usize, z: C64) -> Result<C64> {
    element(&ElementQuery::new(*spec, n, m, z))
}

/// One check per `(spec, z)`: the largest `|closed - oracle|` over the block.
fn oracle_block_check(spec: &AlgebraSpec, z: C64, top: usize, tol: f64, cfg: &OracleConfig) -> IdentityCheck {
    let name = format!("{}_closed_vs_oracle", spec.kind().label());
    let run = || -> Result<IdentityCheck> {
        let block = oracle_block(spec, z, 0.0, top + 1, top + 1, cfg)?;
        let (mut worst, mut at) = (0.0f64, (0, 0));
        for n in 0..=top {
            for m in 0..=top {
                let d = (element_of(spec, n, m, z)? - block.get(n, m)).norm();
                if !(d <= worst) {
                    worst = d;
                    at = (n, m);
                }
            }
        }
        Ok(IdentityCheck::new(name.as_str(), worst, tol)
            .with("worst_n", at.0)
            .with("worst_m", at.1)
            .with("est_error", block.est_error)
            .with("monotone", if block.monotone() { "yes" } else { "no" })
            .with_dim(block.dim_used))
    };
    let chk = run().unwrap_or_else(|e| IdentityCheck::from_error(name.as_str(), tol, &e));
    chk.with("algebra", spec.to_string()).with("z", z).with("index_max", top)
}

fn hw_oracle(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let top = opts.cap(20);
    z_set(f64::INFINITY)
        .par_iter()
        .map(|&z| oracle_block_check(&AlgebraSpec::HeisenbergWeyl, z, top, HW_ORACLE_TOL, &opts.oracle))
        .collect()
}

fn su11_oracle(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let top = opts.cap(15);
    let jobs: Vec<_> = su11_specs().into_iter().flat_map(|s| z_set(1.5).into_iter().map(move |z| (s, z))).collect();
    jobs.par_iter()
        .map(|(s, z)| oracle_block_check(s, *z, top, SU11_ORACLE_TOL, &opts.oracle))
        .collect()
}

fn su2_oracle(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let jobs: Vec<_> =
        su2_specs(&SU2_TWO_J).into_iter().flat_map(|s| su2_grid().into_iter().map(move |z| (s, z))).collect();
    jobs.par_iter()
        .map(|(s, z)| oracle_block_check(s, *z, largest_index(s, opts.cap(usize::MAX)), SU2_ORACLE_TOL, &opts.oracle))
        .collect()
}

// ---------------------------------------------------------------------------
// symmetry and unitarity

fn grid_jobs() -> Vec<(AlgebraSpec, C64, usize)> {
    let mut jobs: Vec<_> = z_set(f64::INFINITY).into_iter().map(|z| (AlgebraSpec::HeisenbergWeyl, z, 20)).collect();
    for s in su11_specs() {
        jobs.extend(z_set(1.5).into_iter().map(|z| (s, z, 15)));
    }
    for s in su2_specs(&SU2_TWO_J) {
        jobs.extend(su2_grid().into_iter().map(|z| (s, z, usize::MAX)));
    }
    jobs
}

fn conjugation(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    grid_jobs()
        .par_iter()
        .map(|&(spec, z, top)| {
            let top = largest_index(&spec, opts.cap(top));
            let run = || -> Result<f64> {
                let mut worst = 0.0f64;
                for n in 0..=top {
                    for m in 0..=top {
                        let a = element_of(&spec, n, m, z)?;
                        let b = element_of(&spec, m, n, -z)?.conj();
                        worst = worst.max((a - b).norm());
                    }
                }
                Ok(worst)
            };
            let name = format!("conjugation_{}", spec.kind().label());
            match run() {
                Ok(r) => IdentityCheck::new(name, r, CONJUGATION_TOL),
                Err(e) => IdentityCheck::from_error(name, CONJUGATION_TOL, &e),
            }
            .with("algebra", spec.to_string())
            .with("z", z)
            .with("index_max", top)
        })
        .collect()
}

/// `max_m |sum_{k <= kmax} |<k|X(z)|m>|^2 - 1|` for `m <= m_top`.
fn column_norm_defect(spec: &AlgebraSpec, z: C64, m_top: usize, tail: usize) -> Result<f64> {
    let mut worst = 0.0f64;
    for m in 0..=m_top {
        let k_top = largest_index(spec, m + tail);
        let mut acc = KahanSum::new();
        for k in 0..=k_top {
            acc.add(element_of(spec, k, m, z)?.norm_sqr());
        }
        worst = worst.max((acc.value() - 1.0).abs());
    }
    Ok(worst)
}

/// Column norms with the sum over `k` run until three consecutive terms are
/// below `1e-20`; returns the defect and the largest `k` used.
fn column_norm_defect_converged(spec: &AlgebraSpec, z: C64, m_top: usize) -> Result<(f64, usize)> {
    const K_CAP: usize = 5000;
    let (mut worst, mut k_used) = (0.0f64, 0);
    for m in 0..=m_top {
        let mut acc = KahanSum::new();
        let (mut k, mut quiet) = (0, 0);
        while quiet < 3 {
            if k > K_CAP {
                return Err(Error::TailNotConverged { k, last: f64::NAN });
            }
            let p = element_of(spec, k, m, z)?.norm_sqr();
            acc.add(p);
            quiet = if k > m && p < 1e-20 { quiet + 1 } else { 0 };
            k += 1;
        }
        worst = worst.max((acc.value() - 1.0).abs());
        k_used = k_used.max(k - 1);
    }
    Ok((worst, k_used))
}

fn unitarity(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let tail = 60;
    let mut jobs: Vec<(AlgebraSpec, C64, usize, f64)> = Vec::new();
    jobs.extend(z_set(1.5).into_iter().map(|z| (AlgebraSpec::HeisenbergWeyl, z, opts.cap(10), TAIL_UNITARITY_TOL)));
    for s in su11_specs() {
        jobs.extend(z_set(1.5).into_iter().map(|z| (s, z, opts.cap(10), TAIL_UNITARITY_TOL)));
    }
    for s in su2_specs(&SU2_TWO_J) {
        let top = largest_index(&s, opts.cap(usize::MAX));
        jobs.extend(su2_grid().into_iter().map(|z| (s, z, top, SU2_UNITARITY_TOL)));
    }
    let mut checks: Vec<IdentityCheck> = jobs
        .par_iter()
        .map(|&(spec, z, m_top, tol)| {
            let name = format!("column_norms_{}", spec.kind().label());
            let chk = match column_norm_defect(&spec, z, m_top, tail) {
                Ok(r) => IdentityCheck::new(name, r, tol),
                Err(e) => IdentityCheck::from_error(name, tol, &e),
            };
            let chk = chk.with("algebra", spec.to_string()).with("z", z).with("m_max", m_top);
            if spec.exact_dim().is_none() {
                chk.with("tail", tail)
            } else {
                chk
            }
        })
        .collect();

    // The su(1,1) columns spread further than m + 60 once |z| ~ 1; the same
    // sums with the tail run to convergence separate truncation from error.
    let long: Vec<_> = su11_specs().into_iter().flat_map(|s| z_set(1.5).into_iter().map(move |z| (s, z))).collect();
    checks.par_extend(long.par_iter().map(|&(spec, z)| {
        let name = "column_norms_su11_full_tail";
        let m_top = opts.cap(10);
        match column_norm_defect_converged(&spec, z, m_top) {
            Ok((r, k)) => IdentityCheck::new(name, r, TAIL_UNITARITY_TOL).with("kmax", k),
            Err(e) => IdentityCheck::from_error(name, TAIL_UNITARITY_TOL, &e),
        }
        .with("algebra", spec.to_string())
        .with("z", z)
        .with("m_max", m_top)
    }));
    checks
}

// ---------------------------------------------------------------------------
// identities

fn factorization(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut rng = opts.rng(Suite::Factorization);
    let mut points = Vec::new();
    while points.len() < 20 {
        let (z, w) = (disc(&mut rng, 1.0), disc(&mut rng, 1.0));
        if (z + w).norm() >= 0.2 {
            points.push((z, w));
        }
    }
    let m_top = opts.cap(8);
    let mut jobs = Vec::new();
    for (i, &(z, w)) in points.iter().enumerate() {
        for m in 0..=m_top {
            for big_n in 0..=4usize {
                jobs.push((i, z, w, m, Some(big_n)));
            }
            jobs.push((i, z, w, m, None));
        }
    }
    jobs.par_iter()
        .map(|&(i, z, w, m, big_n)| {
            let res = match big_n {
                Some(nn) => factorization_check_adaptive(m, nn, z, w, 600),
                None => factorization_specialization_check(m, z, w, m + 80),
            };
            let name = if big_n == Some(0) { "factorization_n0" } else { "factorization" };
            res.unwrap_or_else(|e| {
                IdentityCheck::from_error(name, FACTORIZATION_TOL, &e)
                    .with("m", m)
                    .with("z", z)
                    .with("w", w)
            })
            .with("point", i)
        })
        .collect()
}

fn group_law(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut rng = opts.rng(Suite::GroupLaw);
    let points: Vec<_> = (0..10).map(|_| (disc(&mut rng, 1.0), disc(&mut rng, 1.0))).collect();
    let top = opts.cap(6);
    let mut jobs = Vec::new();
    for (i, &(z, w)) in points.iter().enumerate() {
        for n in 0..=top {
            for m in 0..=top {
                jobs.push((i, z, w, n, m));
            }
        }
    }
    jobs.par_iter()
        .map(|&(i, z, w, n, m)| {
            group_law_check(z, w, n, m, n + m + 60)
                .unwrap_or_else(|e| IdentityCheck::from_error("group_law_hw", GROUP_LAW_TOL, &e))
                .with("point", i)
        })
        .collect()
}

#[derive(Debug, Clone, Copy)]
struct ExchangePoint {
    a: C64,
    b: C64,
    c: C64,
}

/// Draw `count` points with `|a|, |c| <= 0.8`, `|b| <= 1`, `|f| > 0.1` and
/// `|arg f| < 3`, plus `|a c e^{2b}| <= ratio_cap` when given.
fn exchange_points<R: Rng>(rng: &mut R, kind: AlgebraKind, count: usize, ratio_cap: Option<f64>) -> Vec<ExchangePoint> {
    let mut out = Vec::new();
    while out.len() < count {
        let p = ExchangePoint { a: disc(rng, 0.8), b: disc(rng, 1.0), c: disc(rng, 0.8) };
        let Ok(params) = exchange_params(kind, p.a, p.b, p.c) else { continue };
        let f = params.f;
        if f.norm() <= 0.1 || f.arg().abs() >= 3.0 {
            continue;
        }
        if let Some(cap) = ratio_cap {
            if (p.a * p.c * (2.0 * p.b).exp()).norm() > cap {
                continue;
            }
        }
        out.push(p);
    }
    out
}

fn exchange(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut rng = opts.rng(Suite::Exchange);
    let wide_su11 = exchange_points(&mut rng, AlgebraKind::Su11, 50, None);
    let near_su11 = exchange_points(&mut rng, AlgebraKind::Su11, 50, Some(SU11_EXCHANGE_RATIO));
    let su2 = exchange_points(&mut rng, AlgebraKind::Su2, 50, None);

    let mut checks: Vec<IdentityCheck> = wide_su11
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let name = "exchange_su11_fundamental";
            match exchange_fundamental_residual(AlgebraKind::Su11, p.a, p.b, p.c) {
                Ok(r) => IdentityCheck::new(name, r, EXCHANGE_FUNDAMENTAL_TOL),
                Err(e) => IdentityCheck::from_error(name, EXCHANGE_FUNDAMENTAL_TOL, &e),
            }
            .with("point", i)
            .with("a", p.a)
            .with("b", p.b)
            .with("c", p.c)
        })
        .collect();

    let mut jobs = Vec::new();
    for spec in su11_specs() {
        jobs.extend(near_su11.iter().enumerate().map(|(i, p)| (spec, i, *p)));
    }
    for spec in su2_specs(&SU2_IDENTITY_TWO_J) {
        jobs.extend(su2.iter().enumerate().map(|(i, p)| (spec, i, *p)));
    }
    let rep_checks: Vec<Vec<IdentityCheck>> = jobs
        .par_iter()
        .map(|&(spec, i, p)| {
            let label = spec.kind().label();
            let tag = |c: IdentityCheck| {
                c.with("algebra", spec.to_string()).with("point", i).with("a", p.a).with("b", p.b).with("c", p.c)
            };
            match exchange_residuals(&spec, p.a, p.b, p.c, &opts.oracle) {
                Ok(r) => vec![
                    tag(IdentityCheck::new(format!("exchange_{label}_fundamental"), r.fundamental, EXCHANGE_FUNDAMENTAL_TOL)),
                    tag(IdentityCheck::new(format!("exchange_{label}_rep"), r.rep, EXCHANGE_REP_TOL)
                        .with("rep_block", r.rep_block)
                        .with_dim(r.rep_dim)),
                ],
                Err(e) => vec![tag(IdentityCheck::from_error(format!("exchange_{label}_rep"), EXCHANGE_REP_TOL, &e))],
            }
        })
        .collect();
    checks.extend(rep_checks.into_iter().flatten());
    checks
}

fn disentangling(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut rng = opts.rng(Suite::Disentangling);
    let mut jobs: Vec<(AlgebraSpec, C64)> = Vec::new();
    jobs.extend((0..10).map(|_| (AlgebraSpec::HeisenbergWeyl, disc(&mut rng, HW_DISENTANGLING_RADIUS))));
    let su11_points: Vec<C64> = (0..10).map(|_| disc(&mut rng, SU11_DISENTANGLING_RADIUS)).collect();
    let su2_points: Vec<C64> = (0..10).map(|_| disc(&mut rng, SU2_DISENTANGLING_RADIUS)).collect();
    for s in su11_specs() {
        jobs.extend(su11_points.iter().map(|z| (s, *z)));
    }
    for s in su2_specs(&SU2_IDENTITY_TWO_J) {
        jobs.extend(su2_points.iter().map(|z| (s, *z)));
    }
    jobs.par_iter()
        .map(|&(spec, z)| {
            verify_disentangling(&spec, z, &opts.oracle).unwrap_or_else(|e| {
                IdentityCheck::from_error(format!("disentangling_{}", spec.kind().label()), DISENTANGLING_TOL, &e)
                    .with("algebra", spec.to_string())
                    .with("z", z)
            })
        })
        .collect()
}

fn bch(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut rng = opts.rng(Suite::Bch);
    let points: Vec<C64> = (0..10).map(|_| disc(&mut rng, HW_DISENTANGLING_RADIUS)).collect();
    points
        .par_iter()
        .map(|&z| {
            bch_check(z, &opts.oracle)
                .unwrap_or_else(|e| IdentityCheck::from_error("bch_hw", BCH_TOL, &e).with("z", z))
        })
        .collect()
}

fn zeta_series(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let top = opts.cap(15);
    let mut jobs = Vec::new();
    for &k in &SU11_SPINS {
        for z in z_set(2.0) {
            jobs.push((k, z));
        }
    }
    jobs.par_iter()
        .map(|&(k, z)| {
            let run = || -> Result<IdentityCheck> {
                let mut worst: Option<IdentityCheck> = None;
                for n in 0..=top {
                    for m in 0..=top {
                        let c = zeta_series_check(k, n, m, z)?;
                        if worst.as_ref().is_none_or(|w| !(c.residual <= w.residual)) {
                            worst = Some(c);
                        }
                    }
                }
                Ok(worst.expect("non-empty index range"))
            };
            run()
                .unwrap_or_else(|e| IdentityCheck::from_error("zeta_series_su11", ZETA_SERIES_TOL, &e).with("K", k))
                .with("z", z)
                .with("index_max", top)
        })
        .collect()
}

// ---------------------------------------------------------------------------
// extended operators exp(z X+ - conj(z) X- + 2 i t X3)

fn extended(opts: &SuiteOptions) -> Vec<IdentityCheck> {
    let mut rng = opts.rng(Suite::Extended);
    let points: Vec<(C64, f64)> = (0..10).map(|_| (disc(&mut rng, 1.0), rng.random_range(-1.0..1.0))).collect();
    let specs: Vec<AlgebraSpec> = su11_specs().into_iter().chain(su2_specs(&SU2_IDENTITY_TWO_J)).collect();
    let mut jobs = Vec::new();
    for s in &specs {
        jobs.extend(points.iter().enumerate().map(|(i, &(z, t))| (*s, i, z, t)));
    }
    let top = opts.cap(8);
    let nested: Vec<Vec<IdentityCheck>> = jobs
        .par_iter()
        .map(|&(spec, i, z, t)| {
            let label = spec.kind().label();
            let tag = |c: IdentityCheck| c.with("algebra", spec.to_string()).with("point", i).with("z", z).with("t", t);
            let unitary = (|| -> Result<IdentityCheck> {
                let block = oracle_block(&spec, z, t, 1, 1, &opts.oracle)?;
                let u = exp_generator(&spec, block.dim_used, z, t)?;
                Ok(IdentityCheck::new(format!("extended_unitarity_{label}"), unitarity_defect(&u), EXTENDED_UNITARITY_TOL)
                    .with_dim(block.dim_used))
            })()
            .unwrap_or_else(|e| IdentityCheck::from_error(format!("extended_unitarity_{label}"), EXTENDED_UNITARITY_TOL, &e));
            let reduction = (|| -> Result<IdentityCheck> {
                let n_top = largest_index(&spec, top);
                let block = oracle_block(&spec, z, 0.0, n_top + 1, n_top + 1, &opts.oracle)?;
                let mut worst = 0.0f64;
                for n in 0..=n_top {
                    for m in 0..=n_top {
                        worst = worst.max((element_of(&spec, n, m, z)? - block.get(n, m)).norm());
                    }
                }
                Ok(IdentityCheck::new(format!("extended_t0_{label}"), worst, EXTENDED_REDUCTION_TOL)
                    .with("index_max", n_top)
                    .with_dim(block.dim_used))
            })()
            .unwrap_or_else(|e| IdentityCheck::from_error(format!("extended_t0_{label}"), EXTENDED_REDUCTION_TOL, &e));
            vec![tag(unitary), tag(reduction)]
        })
        .collect();
    nested.into_iter().flatten().collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert_eq!("group-law".parse::<Suite>().unwrap(), Suite::GroupLaw);
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn parameter_sets() {
        assert_eq!(z_set(f64::INFINITY).len(), 12);
        assert_eq!(z_set(1.5).len(), 9);
        assert_eq!(su2_grid().len(), 25);
    }

    #[test]
    fn seeded_draws_repeat() {
        let opts = SuiteOptions::default();
        let a: Vec<C64> = (0..5).map(|_| disc(&mut opts.rng(Suite::Bch), 1.0)).collect();
        let b: Vec<C64> = (0..5).map(|_| disc(&mut opts.rng(Suite::Bch), 1.0)).collect();
        assert_eq!(a, b);
        let mut rng = opts.rng(Suite::Exchange);
        for p in exchange_points(&mut rng, AlgebraKind::Su11, 20, Some(SU11_EXCHANGE_RATIO)) {
            assert!(p.a.norm() <= 0.8 && p.c.norm() <= 0.8 && p.b.norm() <= 1.0);
            assert!((p.a * p.c * (2.0 * p.b).exp()).norm() <= SU11_EXCHANGE_RATIO);
        }
    }

    #[test]
    fn report_counts_and_worst() {
        let checks = vec![
            IdentityCheck::new("a", 1e-3, 1e-2).with_dim(64),
            IdentityCheck::new("b", 5e-2, 1e-2).with_dim(32),
            IdentityCheck::new("c", 0.0, 1e-2).with_dim(64),
        ];
        let r = VerificationReport::from_checks("x", checks);
        assert_eq!((r.total, r.passed, r.failed), (3, 2, 1));
        assert_eq!(r.worst.unwrap().name, "b");
        assert_eq!(r.cutoffs, vec![32, 64]);
    }
}
