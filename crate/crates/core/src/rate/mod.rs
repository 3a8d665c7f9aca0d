//! Action functional and penalty-method estimates of the rate function.

mod control;
mod estimate;

pub use control::{action, Control};
pub use estimate::{
    penalty_gradient, penalty_objective, rate_estimate, rate_estimate_from, skeleton_residual,
    OptConfig, RateResult, RateValue, StageTrace, DEFAULT_BINS, DEFAULT_LAMBDA_LADDER,
    MAX_CONTROL_DIM,
};
