//! Acceptance suite: one pass/fail line per criterion, each with its tolerance and runtime budget.
//! Runs the experiments at their default configurations.

use std::process::ExitCode;

use oscillab::record::Assertion;
use oscillab::{replay, reproduces, run, Experiment, ExperimentConfig, ResultRecord};

struct Criterion {
    id: u8,
    title: &'static str,
    /// Assertion-name prefixes that make up the criterion.
    prefixes: &'static [&'static str],
    budget_seconds: f64,
}

const CRITERIA: [(Experiment, Criterion); 9] = [
    (
        Experiment::VerifyPeetre,
        Criterion {
            id: 1,
            title: "Peetre identity, quantized matrix = diag f(mu_n) on h_0..h_8 to 1e-3 under exactly one convention",
            prefixes: &["peetre/"],
            budget_seconds: 120.0,
        },
    ),
    (
        Experiment::VerifyHeat,
        Criterion {
            id: 2,
            title: "Laguerre series (200 terms, t = 0.5, |x|,|xi| <= 4) to 1e-6; generating function to 1e-8",
            prefixes: &["laguerre_series/", "generating_function/"],
            budget_seconds: 10.0,
        },
    ),
    (
        Experiment::VerifyHeat,
        Criterion {
            id: 3,
            title: "Fourier pair a_t <-> a^_t, t in {0.25, 0.5, 1}, to 1e-8",
            prefixes: &["fourier_pair/"],
            budget_seconds: 10.0,
        },
    ),
    (
        Experiment::VerifyHeat,
        Criterion {
            id: 4,
            title: "twisted heat: semigroup 1e-6, kernel vs quantization 1e-3, Gaussian bound with zero violations",
            prefixes: &["twisted/", "gaussian_bound/"],
            budget_seconds: 300.0,
        },
    ),
    (
        Experiment::VerifyFock,
        Criterion {
            id: 5,
            title: "Weyl relations: Fock 1e-6, grids 1e-10, Fock defect decreasing from N = 32",
            prefixes: &["weyl/"],
            budget_seconds: 60.0,
        },
    ),
    (
        Experiment::VerifyFock,
        Criterion {
            id: 6,
            title: "Fock space: cocycle and isometry 1e-8, A^{p,q} isometry 1e-4, generators linear in t, diagonal L 1e-12",
            prefixes: &["ladder/", "position_momentum/", "oscillator/", "translate/", "generator/"],
            budget_seconds: 120.0,
        },
    ),
    (
        Experiment::VerifyPeetre,
        Criterion {
            id: 7,
            title: "Mehler projections idempotent and orthogonal on h_0..h_4 to 5e-4",
            prefixes: &["mehler/"],
            budget_seconds: 120.0,
        },
    ),
    (
        Experiment::MihlinSweep,
        Criterion {
            id: 8,
            title: "Mihlin ratio finite and within 25% across alpha = 1..8 for every (p, q)",
            prefixes: &["mihlin/"],
            budget_seconds: 300.0,
        },
    ),
    (
        Experiment::SquareFunctionCheck,
        Criterion {
            id: 9,
            title: "square function bounded over s in {1, 1.5, 2}, stable within 20% from 8 to 12 terms",
            prefixes: &["square/"],
            budget_seconds: 120.0,
        },
    ),
];

/// Experiments replayed for the determinism criterion.
const REPLAYED: [Experiment; 5] = [
    Experiment::VerifyHeat,
    Experiment::VerifyFock,
    Experiment::SquareFunctionCheck,
    Experiment::MaximalSweep,
    Experiment::TransferenceCheck,
];

fn report(id: u8, pass: bool, title: &str, detail: &str) -> bool {
    println!("criterion {id:>2} [{}] {title}: {detail}", if pass { "PASS" } else { "FAIL" });
    pass
}

fn worst(assertions: &[&Assertion]) -> String {
    let failing: Vec<String> = assertions
        .iter()
        .filter(|a| !a.pass)
        .map(|a| format!("{} observed {:.3e} vs {:.3e}", a.name, a.observed, a.tolerance))
        .collect();
    if failing.is_empty() {
        format!("{} checks pass", assertions.len())
    } else {
        format!("{} of {} checks fail ({})", failing.len(), assertions.len(), failing.join("; "))
    }
}

fn main() -> ExitCode {
    let mut records: Vec<ResultRecord> = Vec::new();
    let mut record_for = |e: Experiment| -> Result<ResultRecord, String> {
        if let Some(r) = records.iter().find(|r| r.config.experiment == e) {
            return Ok(r.clone());
        }
        let r = run(&ExperimentConfig::defaults(e)).map_err(|err| err.to_string())?;
        records.push(r.clone());
        Ok(r)
    };

    let mut all = true;
    for (experiment, c) in &CRITERIA {
        let pass = match record_for(*experiment) {
            Ok(r) => {
                let picked: Vec<&Assertion> =
                    r.assertions.iter().filter(|a| c.prefixes.iter().any(|p| a.name.starts_with(p))).collect();
                let in_time = r.runtime_seconds <= c.budget_seconds;
                let ok = !picked.is_empty() && picked.iter().all(|a| a.pass) && in_time;
                let detail = format!(
                    "{}; runtime {:.1} s (budget {} s)",
                    worst(&picked),
                    r.runtime_seconds,
                    c.budget_seconds
                );
                report(c.id, ok, c.title, &detail)
            }
            Err(e) => report(c.id, false, c.title, &format!("run failed: {e}")),
        };
        all &= pass;
    }

    let mut mismatched = Vec::new();
    let mut failed = Vec::new();
    for e in REPLAYED {
        match record_for(e).and_then(|r| {
            // the embedded configuration is read back from the serialized record
            let stored = r.to_json().and_then(|s| ResultRecord::from_json(&s)).map_err(|err| err.to_string())?;
            let again = replay(&stored).map_err(|err| err.to_string())?;
            reproduces(&r, &again).map_err(|err| err.to_string())
        }) {
            Ok(true) => {}
            Ok(false) => mismatched.push(e.name()),
            Err(err) => failed.push(format!("{e}: {err}")),
        }
    }
    let pass = mismatched.is_empty() && failed.is_empty();
    let detail = if pass {
        format!("{} experiments replayed bit for bit", REPLAYED.len())
    } else {
        format!("differ: {:?}; errors: {:?}", mismatched, failed)
    };
    all &= report(10, pass, "determinism, replayed records reproduce every metric bit for bit", &detail);

    if all {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
