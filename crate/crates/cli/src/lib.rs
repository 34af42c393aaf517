//! Experiment harness for `liesys-core`: builds the benchmark problems, runs
//! the integrators and writes semicolon-separated CSV tables.

mod error;
mod experiments;
mod output;
mod request;

pub use error::HarnessError;
pub use experiments::{
    run, run_ck, run_convergence, run_limit_cycle, run_riccati_check, CkReport, ConvergenceReport, LimitCycleReport,
    PairOutcome, Report, RiccatiReport, RICCATI_TOLERANCE,
};
pub use output::{format_number, CsvTable};
pub use request::{Experiment, MethodName, Resolution, RunRequest};
