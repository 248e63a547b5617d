//! Optimal investment in photovoltaic capacity and energy storage.
//!
//! A planner chooses an investment flow `I` that raises the energy stock `E`
//! and abates the damage stock `D`; with storage, a share `s` of the budget
//! fills a storage stock `S`. The crate provides
//!
//! - [`model`]: closed-form optima, steady states, co-states and first-order residuals,
//! - [`dynamics`]: fixed-step RK4 simulation and discounted welfare of a path,
//! - [`oracle`]: brute-force and finite-difference checks of the closed forms,
//! - [`scenarios`]: baseline / carbon-tax / storage comparisons and parameter sweeps,
//! - [`io`]: JSON configuration, CSV tables and SVG plots.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod dynamics;
pub mod error;
pub mod io;
pub mod model;
pub mod oracle;
pub mod params;
pub mod scenarios;

pub use dynamics::{IntegrationConfig, Sample, State, Trajectory};
pub use error::{Error, Result, Violation, Violations};
pub use model::{ClosedFormSolution, CostateValues, FormulaVariant};
pub use params::{validate_parameters, ModelParameters, ParamKey, StorageParameters};
