//! Weighted Poisson random fields and their fractional-time variants.
//!
//! The crate is organized in five layers:
//!
//! - [`specfun`]: series special functions (generalized Wright ₂Ψ₂,
//!   Mittag-Leffler family, modified Bessel I) with certified truncation
//!   bounds, plus the fractional-derivative coefficient helper.
//! - [`partitions`]: enumeration of the weighted-composition index sets that
//!   the exact pmf formulas sum over, with certified truncation bounds for
//!   the signed (two-sided) case.
//! - [`model`]: exact laws — pmf/pgf/moments/covariance of the weighted
//!   Poisson field, its fractional variant, the signed (difference) field and
//!   its fractional variant, an mgf for general weighted superpositions, and
//!   path-integral moments.
//! - [`sim`]: reproducible samplers for all of the above (counting fields,
//!   thinning, stable and inverse-stable subordinators, lattice
//!   approximations) on explicit seeded streams.
//! - [`verify`]: statistical verification (chi-square GOF, independence,
//!   Kolmogorov-Smirnov, total variation) and structural checks that the
//!   laws satisfy their governing differential systems.

pub mod model;
pub mod partitions;
pub mod sim;
pub mod specfun;
pub mod verify;

pub(crate) mod quad;
