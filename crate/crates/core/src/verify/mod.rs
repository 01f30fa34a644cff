//! Verification harness: statistical goodness-of-fit against exact tables,
//! independence checks, distance estimates, oracle equivalences, and
//! numerical residuals of the governing differential systems.

mod gof;
mod residual;

pub use gof::{
    chi_square_gof, covariance_interval, independence_check, ks_uniform, total_variation,
    two_sample_ks, GofReport,
};
pub use residual::{
    fractional_system_residual, ode_residual, pgf_pde_residual, skellam_oracle_check,
    ResidualReport,
};

use thiserror::Error;

use crate::model::ModelError;

#[derive(Debug, Error)]
pub enum VerifyError {
    #[error("fewer than 2 bins after merging")]
    DegenerateBins,
    #[error("invalid parameters: {0}")]
    InvalidParams(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}
