//! Acceptance run. Every criterion is evaluated and prints one
//! `criterion N: PASS|FAIL ...` line; the process fails if any criterion
//! fails. Tolerances are pinned here as literals and every check is held to
//! the pinned value, whatever the library constants say.
//!
//! `cargo test -p coherent-core --test acceptance [-- N ...]` runs all
//! criteria, or only the listed numbers.

use std::process::ExitCode;

use coherent_core::identities::IdentityCheck;
use coherent_core::suites::{run_suite, Suite, SuiteOptions, VerificationReport};

/// Tolerance for a check name; `None` means the check is not part of the
/// criterion (informational extras in the same suite).
type Pins = fn(&str) -> Option<f64>;

fn judge(criterion: u32, title: &str, report: &VerificationReport, pins: Pins) -> bool {
    let mut total = 0;
    let mut failures: Vec<&IdentityCheck> = Vec::new();
    let mut worst: Option<(&IdentityCheck, f64)> = None;
    for c in &report.checks {
        let Some(tol) = pins(&c.name) else { continue };
        total += 1;
        let ok = c.error.is_none() && c.residual <= tol;
        if !ok {
            failures.push(c);
        }
        let ratio = if c.residual.is_nan() { f64::INFINITY } else { c.residual / tol };
        if worst.is_none_or(|(_, r)| ratio > r) {
            worst = Some((c, ratio));
        }
    }
    let verdict = if failures.is_empty() && total > 0 { "PASS" } else { "FAIL" };
    let worst_text = worst.map_or("-".to_string(), |(c, _)| format!("{} {:.3e}", c.name, c.residual));
    println!(
        "criterion {criterion}: {verdict} {title} checks={total} failed={} worst={worst_text} cutoffs={:?}",
        failures.len(),
        report.cutoffs
    );
    for c in failures.iter().take(5) {
        println!(
            "    failed {} residual={:.3e} params={}",
            c.name,
            c.residual,
            serde_json::to_string(&c.params).unwrap_or_default()
        );
    }
    total > 0 && failures.is_empty()
}

const CRITERIA: [(u32, &str, Suite, Pins); 10] = [
    (1, "hw closed form vs oracle", Suite::HwOracle, |name| {
        (name == "hw_closed_vs_oracle").then_some(1e-9)
    }),
    (2, "su11 closed form vs oracle", Suite::Su11Oracle, |name| {
        (name == "su11_closed_vs_oracle").then_some(1e-8)
    }),
    (3, "su2 closed form vs exact exponential", Suite::Su2Oracle, |name| {
        (name == "su2_closed_vs_oracle").then_some(1e-10)
    }),
    (4, "conjugation symmetry", Suite::Conjugation, |name| name.starts_with("conjugation_").then_some(1e-12)),
    (5, "column norms (tail m+60)", Suite::Unitarity, |name| match name {
        "column_norms_su2" => Some(1e-12),
        "column_norms_hw" | "column_norms_su11" => Some(1e-10),
        _ => None,
    }),
    (6, "laguerre factorization", Suite::Factorization, |name| {
        name.starts_with("factorization").then_some(1e-8)
    }),
    (7, "hw group law", Suite::GroupLaw, |name| (name == "group_law_hw").then_some(1e-10)),
    (8, "exchange relations", Suite::Exchange, |name| {
        if name.ends_with("_fundamental") {
            Some(1e-12)
        } else if name.ends_with("_rep") {
            Some(1e-8)
        } else {
            None
        }
    }),
    (9, "disentangling, both orderings", Suite::Disentangling, |name| {
        name.starts_with("disentangling_").then_some(1e-8)
    }),
    (10, "extended operators", Suite::Extended, |name| {
        if name.starts_with("extended_unitarity_") {
            Some(1e-11)
        } else if name.starts_with("extended_t0_") {
            Some(1e-9)
        } else {
            None
        }
    }),
];

fn main() -> ExitCode {
    let wanted: Vec<u32> = std::env::args().skip(1).filter_map(|a| a.parse().ok()).collect();
    let opts = SuiteOptions::default();
    let mut failed = Vec::new();
    for (n, title, suite, pins) in CRITERIA {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        if !judge(n, title, &run_suite(suite, &opts), pins) {
            failed.push(n);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all criteria passed");
        ExitCode::SUCCESS
    } else {
        println!("acceptance: failed criteria {failed:?}");
        ExitCode::FAILURE
    }
}
