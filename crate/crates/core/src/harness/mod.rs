//! Scenario and trace files, verification reports, the illumination oracle
//! and the command line.

pub mod cli;
pub mod oracle;
pub mod random;
pub mod report;
pub mod scenario;
pub mod trace;

pub use cli::{forward_reverse, phase_distance, run_cli, Exit};
pub use oracle::{mc_illumination_oracle, oracle_coverage, oracle_from_tsv, oracle_to_tsv, sample_lit};
pub use random::{random_admissible, StateRanges};
pub use report::{digest, Residual, VerificationReport};
pub use scenario::{Goal, Scenario, ScenarioError};
pub use trace::{verify, Record, Trace, TraceCheck, VerifyTolerances};
