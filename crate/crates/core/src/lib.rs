//! Propagation of a pump/Stokes pulse pair through a three-level medium
//! (Λ, Ξ or V) with unequal oscillator strengths.
//!
//! The crate provides
//!
//! * [`adiabatic`]: the exact adiabatic-following solution obtained by the
//!   method of characteristics, with fold detection;
//! * [`diagnostics`]: adiabaticity breakdown scans, critical propagation
//!   lengths, STIRAP transfer efficiency and conservation residuals;
//! * [`oracle`]: a direct Maxwell–Schrödinger integrator used to validate
//!   the analytic solution;
//! * [`cli`]: the commands behind the `tristate-prop` binary.
//!
//! All quantities are dimensionless: time in units of the pulse width `T`,
//! Rabi frequencies in `1/T`, and propagation length `z = x q_s / (a² T)`.

// `!(x < y)` is how NaN gets rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod adiabatic;
pub mod cli;
pub mod config;
pub mod diagnostics;
pub mod error;
pub mod model;
pub mod oracle;
pub mod output;
pub mod roots;

pub use error::{Error, Result};
pub use model::{
    make_sech_pulses, normalize, system_signs, EntrancePulses, FieldState, Grid, MediumParams,
    Problem, SystemKind,
};
