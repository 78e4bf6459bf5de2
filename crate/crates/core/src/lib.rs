//! Spontaneous heating of damped mechanical oscillators by collapse-model
//! momentum diffusion.
//!
//! The closed-form predictions live in [`collapse_models`] and
//! [`thermal_core`]. [`langevin_sim`] and [`fp_grid`] check them against the
//! stochastic and phase-space forms of the same Fokker–Planck dynamics, and
//! [`catalog_report`] turns oscillator records into heating tables and
//! collapse-parameter bounds.

#![allow(clippy::neg_cmp_op_on_partial_ord)]
pub mod catalog_report;
pub mod collapse_models;
pub mod config;
pub mod error;
pub mod fp_grid;
pub mod langevin_sim;
pub mod quantities;
pub mod thermal_core;

pub use error::{Error, Result};
