//! Attraction-repulsion chemotaxis with logistic source on a periodic box:
//!
//! ```text
//! u_t = Δu − χ1∇·(u∇v1) + χ2∇·(u∇v2) + u(a − bu)
//! 0   = (Δ − λ1)v1 + μ1u
//! 0   = (Δ − λ2)v2 + μ2u
//! ```
//!
//! [`regime`] evaluates the parameter thresholds and speed bounds in closed
//! form; [`stepper`] simulates the system; [`experiments`] checks the first
//! against the second.

// `!(x > 0.0)` is used deliberately so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod comparison;
pub mod elliptic;
pub mod experiments;
pub mod grid;
pub mod io;
pub mod regime;
pub mod selftest;
pub mod stepper;

pub use grid::{Field, Grid, InitialSpec};
pub use regime::{Bound, ModelParams};
