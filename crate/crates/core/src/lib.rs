//! A miniature LP-based branch-and-cut solver for mixed-integer nonlinear
//! programs with semi-continuous structure.
//!
//! The solver detects semi-continuous variables (variables forced to a fixed
//! off-value when a binary indicator is 0 and to a box when it is 1), builds
//! linear underestimators of nonlinear constraint bodies, and strengthens them
//! into perspective cuts that are valid for the on/off disjunction. A small
//! bounded-variable simplex code drives the LP relaxations, and a
//! branch-and-bound loop with binary and spatial branching closes the gap.
//!
//! Modules:
//! - [`model`]: problem representation, expression DAGs, interval arithmetic,
//!   curvature tagging, extended reformulation with auxiliary variables.
//! - [`detect`]: discovery of semi-continuous variables and per-constraint
//!   semi-continuous/linear splits.
//! - [`cuts`]: linear estimators, perspective strengthening, separation.
//! - [`lp`]: bounded-variable simplex with incremental row addition.
//! - [`bnb`]: the branch-and-cut driver and solver settings.
//! - [`cli`]: instance file format, parser, subcommands, benchmark harness.

pub mod bnb;
pub mod cli;
pub mod cuts;
pub mod detect;
pub mod error;
pub mod lp;
pub mod model;

pub use error::{Error, Result};
