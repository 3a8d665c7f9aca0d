//! Monte Carlo experiments over coupled and scaled paths.
//!
//! Paths are simulated in parallel but always collected in path order and
//! reduced sequentially, so every result is independent of the number of
//! worker threads.

mod experiments;
mod ks;
mod stats;

pub use experiments::{
    certificate_run, estimate_tail, exp_equiv_scan, fmt_f64, l1l1_distance, moment_scan,
    scaling_check, tail_distances, CertificateRun, Functional, MCEstimate, MomentRow, MomentTable,
    Models, ScalingOutcome, ScalingResult, ScanRow, ScanTable, ScheduleRow, EXACT_TOLERANCE,
    MIN_SCALING_SAMPLE, SCAN_CSV_HEADER,
};
pub use ks::{kolmogorov_q, ks_two_sample};
pub use stats::{compensated_sum, mean_and_se, wilson_interval, CompensatedSum, Z95};
