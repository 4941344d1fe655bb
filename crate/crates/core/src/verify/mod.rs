//! Independent numerical checks of the bound.
//!
//! Nothing here calls the Gibbs solver on the quantity being checked: the
//! [`delta_oracle`] maximizes entropy directly over a truncated simplex, and
//! the samplers only evaluate the bound at distances they measure
//! themselves.

mod linalg;
mod oracle;
mod sampling;
mod states;

use serde::Serialize;

use crate::error::Result;

pub use linalg::{
    jacobi_eigenvalues, jacobi_eigh, similarity_residual, Eigh, HermitianMatrix, MAX_DIM,
};
pub use oracle::{delta_oracle, delta_oracle_with, OracleConfig, OracleResult};
pub use sampling::{
    sample_verify_classical, sample_verify_fano, sample_verify_quantum, MAX_QUANTUM_DIM,
};
pub use states::{
    mirsky_passive_check, passive_energy, trace_distance, von_neumann_entropy, DensityMatrix,
    MirskyCheck, PassiveEnergy,
};

/// Absolute part of the violation threshold.
pub const ATOL: f64 = 1e-9;
/// Relative part of the violation threshold.
pub const RTOL: f64 = 1e-9;

/// One checked inequality `achieved <= bound`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Outcome {
    pub bound: f64,
    pub achieved: f64,
}

impl Outcome {
    pub fn slack(&self) -> f64 {
        self.bound - self.achieved
    }

    pub fn is_violation(&self) -> bool {
        self.achieved - self.bound > RTOL * self.bound.max(1.0) + ATOL
    }
}

/// Summary of a randomized suite. Slack is bound minus achieved value.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerificationReport {
    pub suite: String,
    pub trials: usize,
    pub violations: usize,
    pub max_slack: f64,
    pub min_slack: f64,
    pub seed: u64,
    /// Slack of the injected extremal trial, when the suite has one.
    pub tightness_slack: Option<f64>,
    pub notes: Vec<String>,
    #[serde(skip)]
    first_slack: f64,
}

impl VerificationReport {
    pub fn empty(suite: &str, seed: u64) -> Self {
        VerificationReport {
            suite: suite.to_string(),
            trials: 0,
            violations: 0,
            max_slack: f64::NAN,
            min_slack: f64::NAN,
            seed,
            tightness_slack: None,
            notes: Vec::new(),
            first_slack: f64::NAN,
        }
    }

    /// Aggregates outcomes in trial order; the first error aborts.
    pub fn collect(suite: &str, seed: u64, outcomes: Vec<Result<Outcome>>) -> Result<Self> {
        let mut report = Self::empty(suite, seed);
        for (i, o) in outcomes.into_iter().enumerate() {
            let o = o?;
            let slack = o.slack();
            if i == 0 {
                report.first_slack = slack;
                report.max_slack = slack;
                report.min_slack = slack;
            }
            report.trials += 1;
            report.max_slack = report.max_slack.max(slack);
            report.min_slack = report.min_slack.min(slack);
            if o.is_violation() {
                report.violations += 1;
                if report.notes.len() < 8 {
                    report.notes.push(format!(
                        "trial {i}: achieved {} exceeds bound {}",
                        o.achieved, o.bound
                    ));
                }
            }
        }
        Ok(report)
    }

    pub fn passed(&self) -> bool {
        self.violations == 0
    }
}
