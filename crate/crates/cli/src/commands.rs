use std::fmt::Write as _;
use std::path::PathBuf;
use std::time::Instant;

use coherent_core::identities::{
    bch_check, factorization_check, factorization_check_adaptive, group_law_check, verify_disentangling,
    verify_exchange, zeta_series_check, IdentityCheck,
};
use coherent_core::oracle::{oracle_block, oracle_element, OracleConfig};
use coherent_core::suites::{run_suite, Suite, SuiteOptions, VerificationSummary, DEFAULT_SEED};
use coherent_core::{element, frame, AlgebraKind, AlgebraSpec, ElementQuery, Error, C64};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{Map, Value};

use crate::config::{
    layered, read_config, AlgebraArgs, Cli, Command, ElementArgs, Format, IdentityArgs, IdentityName, SweepArgs,
    VerifyArgs,
};
use crate::table::{sci, write_csv, SweepRow};
use crate::{CliError, Outcome, EXIT_FAILED, EXIT_NO_CONVERGENCE, EXIT_OK};

/// Run a parsed command line; returns the output and where it should go.
pub fn run(cli: &Cli) -> Result<(Outcome, Option<PathBuf>), CliError> {
    let file = cli.config.as_deref().map(read_config).transpose()?;
    let file = file.as_ref();
    match &cli.command {
        Command::Element(a) => {
            let a = layered(a, file)?;
            Ok((cmd_element(&a)?, a.out.output.clone()))
        }
        Command::Sweep(a) => {
            let a = layered(a, file)?;
            Ok((cmd_sweep(&a)?, a.out.output.clone()))
        }
        Command::Verify(a) => {
            let a = layered(a, file)?;
            Ok((cmd_verify(&a)?, a.out.output.clone()))
        }
        Command::Identities(a) => {
            let a = layered(a, file)?;
            Ok((cmd_identities(&a)?, a.out.output.clone()))
        }
    }
}

fn spec_of(a: &AlgebraArgs) -> Result<AlgebraSpec, CliError> {
    let name = a.algebra.as_deref().ok_or_else(|| CliError::usage("--algebra is required (hw, su11 or su2)"))?;
    let kind: AlgebraKind = name.parse()?;
    Ok(AlgebraSpec::from_parts(kind, a.spin)?)
}

fn pretty_json<T: Serialize>(value: &T) -> Result<Vec<u8>, CliError> {
    let mut out = serde_json::to_vec_pretty(value).map_err(|e| CliError::io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

fn csv_bytes(header: &[&str], rows: &[Vec<String>]) -> Result<Vec<u8>, CliError> {
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::io(e.to_string());
    w.write_record(header).map_err(io)?;
    for r in rows {
        w.write_record(r).map_err(io)?;
    }
    w.into_inner().map_err(|e| CliError::io(e.to_string()))
}

fn opt(x: Option<f64>) -> String {
    x.map(sci).unwrap_or_default()
}

fn fmt_c(z: C64) -> String {
    format!("{:e} {} {:e}i", z.re, if z.im < 0.0 { '-' } else { '+' }, z.im.abs())
}

// ---------------------------------------------------------------------------
// element

#[derive(Debug, Serialize)]
struct ElementRecord {
    algebra: String,
    spin: Option<f64>,
    n: usize,
    m: usize,
    re_z: f64,
    im_z: f64,
    t: f64,
    re_closed: Option<f64>,
    im_closed: Option<f64>,
    re_oracle: Option<f64>,
    im_oracle: Option<f64>,
    est_error: Option<f64>,
    dim_used: Option<usize>,
    abs_diff: Option<f64>,
}

pub fn cmd_element(a: &ElementArgs) -> Result<Outcome, CliError> {
    let spec = spec_of(&a.algebra)?;
    let z = a.z.map_or(C64::new(0.0, 0.0), |c| c.0);
    let t = a.t.unwrap_or(0.0);
    let q = ElementQuery::new(spec, a.n.unwrap_or(0), a.m.unwrap_or(0), z).with_t(t);
    q.validate()?;
    let closed = if t == 0.0 { Some(element(&q)?) } else { None };
    let oracle = if a.oracle || t != 0.0 { Some(oracle_element(&q, &a.oracle_args.oracle_config()?)?) } else { None };

    let rec = ElementRecord {
        algebra: spec.kind().label().to_string(),
        spin: spec.spin(),
        n: q.n,
        m: q.m,
        re_z: z.re,
        im_z: z.im,
        t,
        re_closed: closed.map(|c| c.re),
        im_closed: closed.map(|c| c.im),
        re_oracle: oracle.as_ref().map(|o| o.value.re),
        im_oracle: oracle.as_ref().map(|o| o.value.im),
        est_error: oracle.as_ref().map(|o| o.est_error),
        dim_used: oracle.as_ref().map(|o| o.dim_used),
        abs_diff: closed.zip(oracle.as_ref()).map(|(c, o)| (c - o.value).norm()),
    };

    let body = match a.out.format.unwrap_or_default() {
        Format::Json => pretty_json(&rec)?,
        Format::Csv => {
            let header = [
                "algebra", "spin", "n", "m", "re_z", "im_z", "t", "re_closed", "im_closed", "re_oracle", "im_oracle",
                "est_error", "dim_used", "abs_diff",
            ];
            let row = vec![
                rec.algebra.clone(),
                opt(rec.spin),
                rec.n.to_string(),
                rec.m.to_string(),
                sci(rec.re_z),
                sci(rec.im_z),
                sci(rec.t),
                opt(rec.re_closed),
                opt(rec.im_closed),
                opt(rec.re_oracle),
                opt(rec.im_oracle),
                opt(rec.est_error),
                rec.dim_used.map(|d| d.to_string()).unwrap_or_default(),
                opt(rec.abs_diff),
            ];
            csv_bytes(&header, &[row])?
        }
        Format::Text => {
            let mut s = format!("{spec}  <{}| X(z, t) |{}>  z = {}  t = {t}\n", q.n, q.m, fmt_c(z));
            if let Some(c) = closed {
                let _ = writeln!(s, "closed  {}", fmt_c(c));
            }
            if let Some(o) = &oracle {
                let _ = writeln!(s, "oracle  {}  (dim {}, est_error {:.3e})", fmt_c(o.value), o.dim_used, o.est_error);
            }
            if let Some(d) = rec.abs_diff {
                let _ = writeln!(s, "|closed - oracle| = {d:.3e}");
            }
            s.into_bytes()
        }
    };
    Ok(Outcome { body, exit_code: EXIT_OK })
}

// ---------------------------------------------------------------------------
// sweep

fn axis(min: f64, max: f64, steps: usize, name: &str) -> Result<Vec<f64>, CliError> {
    if !(min.is_finite() && max.is_finite()) {
        return Err(CliError::usage(format!("{name} bounds must be finite")));
    }
    match steps {
        0 => Err(CliError::usage(format!("empty grid: {name} has 0 steps"))),
        1 => Ok(vec![min]),
        _ => Ok((0..steps).map(|i| min + (max - min) * i as f64 / (steps - 1) as f64).collect()),
    }
}

fn aux_columns(spec: &AlgebraSpec, z: C64) -> (String, Option<C64>) {
    match frame(spec, z) {
        Err(_) => (String::new(), None),
        Ok(f) => match (spec.kind(), f.aux_opt()) {
            (AlgebraKind::Su2, None) => ("pole".into(), None),
            (AlgebraKind::Su2, Some(e)) => ("eta".into(), Some(e)),
            (_, aux) => ("zeta".into(), aux),
        },
    }
}

fn status_of(e: &Error) -> &'static str {
    match e {
        Error::NoConvergence { .. } | Error::TailNotConverged { .. } => "no_convergence",
        _ => "error",
    }
}

#[derive(Serialize)]
struct SweepReport<'a> {
    algebra: String,
    spin: Option<f64>,
    rows: &'a [SweepRow],
}

pub fn cmd_sweep(a: &SweepArgs) -> Result<Outcome, CliError> {
    let spec = spec_of(&a.algebra)?;
    let res = axis(a.re_min.unwrap_or(0.0), a.re_max.unwrap_or(0.0), a.re_steps.unwrap_or(1), "re")?;
    let ims = axis(a.im_min.unwrap_or(0.0), a.im_max.unwrap_or(0.0), a.im_steps.unwrap_or(1), "im")?;
    let default_range = "0".parse().expect("literal range");
    let (nr, mr) = (a.n.unwrap_or(default_range), a.m.unwrap_or(default_range));
    spec.check_index(nr.hi)?;
    spec.check_index(mr.hi)?;
    let t = a.t.unwrap_or(0.0);
    if !t.is_finite() {
        return Err(CliError::usage("t must be finite"));
    }
    let use_oracle = t != 0.0 || a.source.unwrap_or_default() == crate::config::Source::Oracle;
    let cfg: OracleConfig = a.oracle_args.oracle_config()?;

    let points: Vec<C64> = res.iter().flat_map(|&re| ims.iter().map(move |&im| C64::new(re, im))).collect();
    let blocks: Vec<Vec<SweepRow>> = points
        .par_iter()
        .map(|&z| {
            let (aux_kind, aux) = aux_columns(&spec, z);
            let base = SweepRow {
                algebra: spec.kind().label().to_string(),
                spin: spec.spin(),
                n: 0,
                m: 0,
                re_z: z.re,
                im_z: z.im,
                t,
                re_val: None,
                im_val: None,
                abs2: None,
                source: if use_oracle { "oracle" } else { "closed" }.into(),
                est_error: None,
                dim_used: None,
                aux_kind,
                aux_re: aux.map(|c| c.re),
                aux_im: aux.map(|c| c.im),
                status: "ok".into(),
                error: String::new(),
            };
            let block = if use_oracle { Some(oracle_block(&spec, z, t, nr.hi + 1, mr.hi + 1, &cfg)) } else { None };
            let mut rows = Vec::new();
            for n in nr.lo..=nr.hi {
                for m in mr.lo..=mr.hi {
                    let mut row = SweepRow { n, m, ..base.clone() };
                    let value = match &block {
                        Some(Ok(b)) => {
                            row.est_error = Some(b.est_error);
                            row.dim_used = Some(b.dim_used);
                            Ok(b.get(n, m))
                        }
                        Some(Err(e)) => Err(e.clone()),
                        None => element(&ElementQuery::new(spec, n, m, z)),
                    };
                    match value {
                        Ok(v) => {
                            row.re_val = Some(v.re);
                            row.im_val = Some(v.im);
                            row.abs2 = Some(v.norm_sqr());
                        }
                        Err(e) => {
                            row.status = status_of(&e).into();
                            row.error = e.to_string();
                        }
                    }
                    rows.push(row);
                }
            }
            rows
        })
        .collect();
    let rows: Vec<SweepRow> = blocks.into_iter().flatten().collect();

    let exit_code = if rows.iter().any(|r| r.status == "no_convergence") { EXIT_NO_CONVERGENCE } else { EXIT_OK };
    let body = match a.out.format.unwrap_or_default() {
        Format::Csv => write_csv(&rows).map_err(|e| CliError::io(e.to_string()))?,
        Format::Json => {
            pretty_json(&SweepReport { algebra: spec.kind().label().to_string(), spin: spec.spin(), rows: &rows })?
        }
        Format::Text => {
            let mut s = format!("{spec}: {} rows, source {}\n", rows.len(), rows.first().map_or("", |r| &r.source));
            for r in &rows {
                let val = match (r.re_val, r.im_val) {
                    (Some(re), Some(im)) => format!("{}  |.|^2 = {:.12}", fmt_c(C64::new(re, im)), r.abs2.unwrap_or(0.0)),
                    _ => format!("{}: {}", r.status, r.error),
                };
                let aux = if r.aux_kind == "pole" { "  [pole]" } else { "" };
                let _ = writeln!(s, "n={} m={} z={}  {val}{aux}", r.n, r.m, fmt_c(C64::new(r.re_z, r.im_z)));
            }
            s.into_bytes()
        }
    };
    Ok(Outcome { body, exit_code })
}

// ---------------------------------------------------------------------------
// verify

pub fn cmd_verify(a: &VerifyArgs) -> Result<Outcome, CliError> {
    let suites: Vec<Suite> = if a.suite.is_empty() {
        Suite::ALL.to_vec()
    } else {
        a.suite.iter().map(|s| s.parse::<Suite>()).collect::<Result<_, _>>()?
    };
    let opts = SuiteOptions { seed: a.seed.unwrap_or(DEFAULT_SEED), m_max: a.m_max, oracle: a.oracle_args.oracle_config()? };

    let reports = suites
        .iter()
        .map(|&s| {
            let start = Instant::now();
            let mut r = run_suite(s, &opts);
            if a.timing {
                r.wall_clock_s = Some(start.elapsed().as_secs_f64());
            }
            r
        })
        .collect();
    let summary = VerificationSummary::new(opts.seed, reports);

    let exit_code = if summary.no_convergence > 0 {
        EXIT_NO_CONVERGENCE
    } else if summary.failed > 0 {
        EXIT_FAILED
    } else {
        EXIT_OK
    };
    let body = match a.out.format.unwrap_or_default() {
        Format::Json => pretty_json(&summary)?,
        Format::Csv => {
            let header = ["suite", "name", "passed", "residual", "tol", "dim", "no_convergence", "error", "params"];
            let rows: Vec<Vec<String>> = summary
                .suites
                .iter()
                .flat_map(|r| r.checks.iter().map(move |c| check_record(&r.suite, c)))
                .collect();
            csv_bytes(&header, &rows)?
        }
        Format::Text => {
            let mut s = String::new();
            for r in &summary.suites {
                let _ = write!(s, "{:<14} {:>5}/{:<5} failed {:<4}", r.suite, r.passed, r.total, r.failed);
                if let Some(w) = &r.worst {
                    let _ = write!(s, " worst {} {:.3e} (tol {:.0e})", w.name, w.residual, w.tol);
                }
                if let Some(secs) = r.wall_clock_s {
                    let _ = write!(s, " {secs:.2}s");
                }
                s.push('\n');
            }
            let _ = writeln!(
                s,
                "seed {}: {}/{} passed, {} failed, {} without convergence",
                summary.seed, summary.passed, summary.total, summary.failed, summary.no_convergence
            );
            s.into_bytes()
        }
    };
    Ok(Outcome { body, exit_code })
}

fn check_record(suite: &str, c: &IdentityCheck) -> Vec<String> {
    vec![
        suite.to_string(),
        c.name.clone(),
        c.passed.to_string(),
        if c.residual.is_nan() { String::new() } else { sci(c.residual) },
        sci(c.tol),
        c.dim.map(|d| d.to_string()).unwrap_or_default(),
        c.no_convergence.to_string(),
        c.error.clone().unwrap_or_default(),
        serde_json::to_string(&c.params).unwrap_or_default(),
    ]
}

// ---------------------------------------------------------------------------
// identities

fn required<T: Copy>(v: Option<T>, flag: &str, what: IdentityName) -> Result<T, CliError> {
    v.ok_or_else(|| CliError::usage(format!("--{flag} is required for {what:?}")))
}

pub fn cmd_identities(a: &IdentityArgs) -> Result<Outcome, CliError> {
    use IdentityName::*;
    let which = a.identity.ok_or_else(|| CliError::usage("--identity is required"))?;
    let cfg = a.oracle_args.oracle_config()?;
    let c = |v: Option<crate::config::ComplexArg>| v.map(|x| x.0);
    let zero = C64::new(0.0, 0.0);
    let result = match which {
        Exchange => verify_exchange(
            &spec_of(&a.algebra)?,
            c(a.a).unwrap_or(zero),
            c(a.b).unwrap_or(zero),
            c(a.c).unwrap_or(zero),
            &cfg,
        ),
        Disentangling => verify_disentangling(&spec_of(&a.algebra)?, c(a.z).unwrap_or(zero), &cfg),
        Bch => bch_check(c(a.z).unwrap_or(zero), &cfg),
        GroupLaw => {
            let (n, m) = (a.n.unwrap_or(0), a.m.unwrap_or(0));
            group_law_check(c(a.z).unwrap_or(zero), c(a.w).unwrap_or(zero), n, m, a.kmax.unwrap_or(n + m + 60))
        }
        Factorization => {
            let (m, big_n) = (a.m.unwrap_or(0), a.big_n.unwrap_or(0));
            let (z, w) = (required(c(a.z), "z", which)?, required(c(a.w), "w", which)?);
            match a.kmax {
                Some(k) => factorization_check(m, big_n, z, w, k),
                None => factorization_check_adaptive(m, big_n, z, w, 600),
            }
        }
        ZetaSeries => {
            let spec = spec_of(&a.algebra)?;
            let k = match spec {
                AlgebraSpec::Su11 { k } => k,
                _ => return Err(CliError::usage("zeta-series needs --algebra su11")),
            };
            zeta_series_check(k, a.n.unwrap_or(0), a.m.unwrap_or(0), c(a.z).unwrap_or(zero))
        }
    };
    let check = result?;
    let exit_code = if check.passed { EXIT_OK } else { EXIT_FAILED };
    let body = match a.out.format.unwrap_or_default() {
        Format::Json => pretty_json(&check)?,
        Format::Csv => csv_bytes(
            &["suite", "name", "passed", "residual", "tol", "dim", "no_convergence", "error", "params"],
            &[check_record("", &check)],
        )?,
        Format::Text => {
            let params: Map<String, Value> = serde_json::to_value(&check.params)
                .ok()
                .and_then(|v| v.as_object().cloned())
                .unwrap_or_default();
            format!(
                "{} {}: residual {:.3e} (tol {:.0e}) {}\n",
                check.name,
                Value::Object(params),
                check.residual,
                check.tol,
                if check.passed { "PASS" } else { "FAIL" }
            )
            .into_bytes()
        }
    };
    Ok(Outcome { body, exit_code })
}
