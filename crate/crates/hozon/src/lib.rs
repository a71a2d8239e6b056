//! Command-line harness around `hozon-core`: JSON configs, the six
//! experiment suites, and CSV/JSON reports.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod config;
pub mod output;
pub mod spec;
pub mod suites;

pub use config::{ExperimentConfig, Overrides};
pub use output::{SuiteReport, VerdictRow};

/// The subcommands, in the order the CLI lists them.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Command {
    ComputeZonoid,
    VerifyInclusions,
    VerifyMain,
    VerifyRs,
    SteinerRun,
    BpcSpotcheck,
}

impl Command {
    pub fn run(self, cfg: &ExperimentConfig) -> anyhow::Result<SuiteReport> {
        match self {
            Command::ComputeZonoid => suites::compute_zonoid(cfg),
            Command::VerifyInclusions => suites::verify_inclusions(cfg),
            Command::VerifyMain => suites::verify_main(cfg),
            Command::VerifyRs => suites::verify_rs(cfg),
            Command::SteinerRun => suites::steiner_run(cfg),
            Command::BpcSpotcheck => suites::bpc_spotcheck(cfg),
        }
    }

    /// Whether the main CSV is the verdict table itself.
    pub fn main_is_verdicts(self) -> bool {
        matches!(self, Command::VerifyInclusions)
    }
}
