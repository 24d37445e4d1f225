//! End-to-end acceptance run: one line per criterion, nonzero exit on any
//! failure. Sample sizes and tolerances are the suite defaults.

use std::process::ExitCode;
use std::time::{Duration, Instant};

use tangles::verify::{run_one, Suite, SuiteReport, VerifyOptions};

struct Criterion {
    id: u8,
    title: &'static str,
    suites: &'static [Suite],
    budget: Duration,
}

const CRITERIA: [Criterion; 7] = [
    Criterion { id: 1, title: "named-state measure reports", suites: &[Suite::Named], budget: Duration::from_secs(60) },
    Criterion { id: 2, title: "four-qubit family table", suites: &[Suite::Table2], budget: Duration::from_secs(30) },
    Criterion { id: 3, title: "canonical-form bounds", suites: &[Suite::Bounds], budget: Duration::from_secs(60) },
    Criterion {
        id: 4,
        title: "route equivalences and Gour identity",
        suites: &[Suite::Identities, Suite::Gour],
        budget: Duration::from_secs(180),
    },
    Criterion {
        id: 5,
        title: "product criterion, rigidity, five conditions",
        suites: &[Suite::Propositions],
        budget: Duration::from_secs(240),
    },
    Criterion { id: 6, title: "two-tangle roof vs closed form", suites: &[Suite::Wootters], budget: Duration::from_secs(120) },
    Criterion { id: 7, title: "CFT negativity formulas", suites: &[Suite::Cft], budget: Duration::from_secs(1) },
];

fn summarize(reports: &[SuiteReport]) -> String {
    let failing: Vec<String> = reports
        .iter()
        .flat_map(|r| r.checks.iter().filter(|c| !c.passed).map(move |c| format!("{}.{} worst={:e}", r.suite.name(), c.name, c.worst)))
        .collect();
    let checks: usize = reports.iter().map(|r| r.checks.len()).sum();
    if failing.is_empty() {
        format!("{checks} checks")
    } else {
        format!("{checks} checks; failing: {}", failing.join(", "))
    }
}

fn main() -> ExitCode {
    if std::env::args().any(|a| a == "--list") {
        for c in &CRITERIA {
            println!("criterion_{}: test", c.id);
        }
        return ExitCode::SUCCESS;
    }
    let opts = VerifyOptions::default();
    let mut all_ok = true;
    for c in &CRITERIA {
        let start = Instant::now();
        let result: Result<Vec<SuiteReport>, _> = c.suites.iter().map(|&s| run_one(s, &opts)).collect();
        let elapsed = start.elapsed();
        let (ok, detail) = match result {
            Ok(reports) => {
                let in_budget = elapsed <= c.budget;
                let mut detail = summarize(&reports);
                if !in_budget {
                    detail.push_str(&format!("; over the {:?} budget", c.budget));
                }
                (reports.iter().all(|r| r.passed) && in_budget, detail)
            }
            Err(e) => (false, format!("error: {e}")),
        };
        all_ok &= ok;
        println!(
            "criterion {}: {} - {} ({}) [{:.2?}]",
            c.id,
            if ok { "PASS" } else { "FAIL" },
            c.title,
            detail,
            elapsed
        );
    }
    if all_ok {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
