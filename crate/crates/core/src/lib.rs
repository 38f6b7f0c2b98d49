//! Size-biased distributions and the computations built on them.
//!
//! - [`dist`]: laws on `[0, inf)`, the transform `x dF(x) / E X`, quantile coupling;
//! - [`rules`]: sum, product and scaling rules plus the closed-form catalogue;
//! - [`levy`]: Levy measures, infinitely divisible samplers, independent increments;
//! - [`renewal`]: stationary renewal processes and the waiting-time paradox;
//! - [`estimate`]: Midzuno sampling for unbiased ratio estimation;
//! - [`specialfn`]: Dickman and Buchstab functions, prime-factor sieves;
//! - [`stats`]: two-sample KS and the weighted-resampling oracle for `X*`.
//! - [`suite`]: the acceptance checks, one per criterion.

pub mod dist;
pub mod error;
pub mod estimate;
pub mod grid;
pub mod levy;
pub mod quad;
pub mod renewal;
pub mod rules;
pub mod specialfn;
pub mod stats;
pub mod streams;
pub mod suite;

pub use dist::{CoupledSample, Distribution, Family, QuantileCoupler};
pub use error::{Error, Result};
pub use grid::{ComplexGrid, GridFunction};
pub use streams::{Stream, Streams};
