//! Kinetic comparison diagnostics: indicator brackets, mollifiers, the
//! doubling-variables functional and its error term, and pathwise bound
//! certificates.

mod bounds;
mod brackets;
mod doubling;
mod martingale;
mod mollifier;
mod quadrature;

pub use mollifier::{BumpKernel, MollifierPair, SpatialKernel};
pub use quadrature::GaussLegendre;
pub use brackets::{bracket_identity, bracket_identity_on, correction_mass, kinetic_indicator, XiGrid};
pub use doubling::{
    doubling_functional, doubling_functional_brute_force, error_term, l1_modulus,
    mollification_error, shift_error, smeared_l1, ERROR_TERM_DXI,
};
pub use bounds::{
    bound_check_i, bound_check_j, bound_reports_csv, envelope_constant, flux_wedge,
    gamma_function, i_bound, j1_bound, j2_bound, BoundReport, GammaEnvelope, BOUND_CSV_HEADER,
    BOUND_SLACK,
};
pub use martingale::{
    martingale_diagnostic, martingale_sample, MartingaleReport, MartingaleSample,
    MIN_MARTINGALE_PATHS,
};
