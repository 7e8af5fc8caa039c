//! Experiment runner for `phdiss`: flat config files, CSV/JSON reports and a
//! fixed battery of closed-form reference checks.

pub mod config;
pub mod paper;
pub mod report;
pub mod runner;

use phdiss::discretization::{assemble, make_uniform_grid, ModelTag};
use phdiss::dissipation::{closability_probe, ProbeReport, ProbeSequence};

pub use config::{parse_config, ConfigError, ExperimentConfig, Task};
pub use paper::{verify_paper, Battery};
pub use runner::{run_config, run_experiment, RunError, RunOutcome, OUT_ENV};

/// Standalone probe used by the `probe` verb.
pub fn probe(model: &str, sequence: &str, n_grid: usize, n_max: usize, damping: f64) -> phdiss::Result<ProbeReport> {
    let model: ModelTag = model.parse()?;
    let seq: ProbeSequence = sequence.parse()?;
    let sys = assemble(model, &make_uniform_grid(n_grid)?, damping)?;
    closability_probe(&sys, &seq, n_max)
}

#[cfg(test)]
mod tests {
    use super::*;
    use phdiss::dissipation::Verdict;

    #[test]
    fn probe_verb() {
        let r = probe("transport", "power", 201, 8, 0.0).unwrap();
        assert_eq!(r.verdict, Verdict::NonClosableEvidence);
        assert!(probe("wave", "power", 21, 4, 0.0).is_err());
        assert!(probe("heat", "cosine", 21, 4, 0.0).is_err());
        assert!(probe("custom", "power", 21, 4, 0.0).is_err());
    }
}
