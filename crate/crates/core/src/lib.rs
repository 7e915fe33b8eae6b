//! Stationary nonlinear autoregressions with exogenous covariates, built from
//! iterations of dependent random maps.

pub mod config;
pub mod dependence;
pub mod error;
pub mod limits;
pub mod linalg;
pub mod models;
pub mod noise;
pub mod presets;
pub mod quad;
pub mod runner;
pub mod stationarity;
pub mod stats;
pub mod util;

pub use error::{Error, Result};
