//! Experiment bodies. Each returns the metrics and assertions of one run; [`run`]
//! wraps them with the resolved configuration, timing, and version.

mod fock;
mod heat;
mod maximal;
mod mihlin;
mod peetre;
mod square;
mod transference;

use std::time::Instant;

use num_complex::Complex64;
use oscillab_core::fock::FockVector;
use oscillab_core::hermite_model::{GridFunction, GridSpec};
use oscillab_core::twisted::TwistedGridFunction;
use oscillab_core::weyl_quantization::PhaseVector;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use crate::config::{Experiment, ExperimentConfig};
use crate::error::Result;
use crate::record::{ResultRecord, VERSION};

pub use fock::run_verify_fock;
pub use heat::run_verify_heat;
pub use maximal::run_maximal_sweep;
pub use mihlin::run_mihlin_sweep;
pub use peetre::run_verify_peetre;
pub use square::run_square_function_check;
pub use transference::run_transference_check;

pub fn run(cfg: &ExperimentConfig) -> Result<ResultRecord> {
    cfg.validate()?;
    let start = Instant::now();
    let outcome = match cfg.experiment {
        Experiment::VerifyPeetre => run_verify_peetre(cfg)?,
        Experiment::VerifyHeat => run_verify_heat(cfg)?,
        Experiment::VerifyFock => run_verify_fock(cfg)?,
        Experiment::SquareFunctionCheck => run_square_function_check(cfg)?,
        Experiment::MihlinSweep => run_mihlin_sweep(cfg)?,
        Experiment::MaximalSweep => run_maximal_sweep(cfg)?,
        Experiment::TransferenceCheck => run_transference_check(cfg)?,
    };
    Ok(ResultRecord {
        experiment: cfg.experiment.name().to_string(),
        config: cfg.clone(),
        metrics: outcome.metrics,
        assertions: outcome.assertions,
        runtime_seconds: start.elapsed().as_secs_f64(),
        version: VERSION.to_string(),
    })
}

/// Re-runs a record from its embedded configuration.
pub fn replay(record: &ResultRecord) -> Result<ResultRecord> {
    run(&record.config)
}

/// Metrics and assertions agree bit for bit (compared through their exact JSON encoding).
pub fn reproduces(a: &ResultRecord, b: &ResultRecord) -> Result<bool> {
    let enc = |r: &ResultRecord| -> Result<(String, String)> {
        Ok((serde_json::to_string(&r.metrics)?, serde_json::to_string(&r.assertions)?))
    };
    Ok(enc(a)? == enc(b)?)
}

fn uniform_complex(rng: &mut ChaCha8Rng) -> Complex64 {
    Complex64::new(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

/// Unit-norm Fock vector with random coefficients up to `degree`.
fn random_fock(truncation: usize, degree: usize, rng: &mut ChaCha8Rng) -> Result<FockVector> {
    let mut v = FockVector::zeros(1, truncation)?;
    for k in 0..=degree {
        v.coeffs[k] = uniform_complex(rng);
    }
    let s = 1.0 / v.norm();
    Ok(v.scale(Complex64::new(s, 0.0)))
}

/// Random combination of `h_m(x) h_n(y)`, `m, n <= 3`: decays well inside the desk boxes.
fn random_twisted(spec: &GridSpec, rng: &mut ChaCha8Rng) -> Result<TwistedGridFunction> {
    let mut acc = GridFunction::zeros(spec);
    for m in 0..=3 {
        for n in 0..=3 {
            acc.axpy(uniform_complex(rng), &spec.hermite(&[m, n])?);
        }
    }
    Ok(TwistedGridFunction::new(acc)?)
}

/// `max / min - 1` over positive values; `inf` if any value is zero or non-finite.
fn spread(values: &[f64]) -> f64 {
    let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = values.iter().copied().fold(0.0, f64::max);
    if lo > 0.0 && hi.is_finite() {
        hi / lo - 1.0
    } else {
        f64::INFINITY
    }
}

fn fmt_exp(p: f64) -> String {
    if (p - 4.0 / 3.0).abs() < 1e-12 {
        "4/3".to_string()
    } else {
        format!("{p}")
    }
}
