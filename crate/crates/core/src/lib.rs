//! Boolean logic mining on models of fungal mycelium networks.
//!
//! Three pipelines share the substrate types defined here:
//!
//! - [`excitable`] integrates FitzHugh–Nagumo dynamics on a conductive
//!   [`GridTemplate`] and [`spikegates`] turns the electrode recordings into a
//!   two-input gate census.
//! - [`rcnet`] converts a [`ColonyGraph`] into randomized RC circuits, solves
//!   their pulse response with a nodal transient solver and counts the gates
//!   realized over a binarization-threshold sweep.
//! - [`funcmine`] extracts four-input truth tables from multi-channel voltage
//!   recordings, reduces them to sum-of-products form and builds a function
//!   census.
//!
//! [`GridTemplate`]: substrate::GridTemplate
//! [`ColonyGraph`]: substrate::ColonyGraph

pub mod error;
pub mod excitable;
pub mod fit;
pub mod funcmine;
pub mod gates;
pub mod rcnet;
pub mod report;
pub mod seed;
pub mod spikegates;
pub mod substrate;

pub use error::{Error, Result};
