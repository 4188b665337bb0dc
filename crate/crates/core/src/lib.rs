//! Event-driven simulation and control synthesis for chains of billiard
//! cells with freely rotating disk scatterers.
//!
//! * [`geometry`]: cells, chains, return map, illumination.
//! * [`dynamics`]: collision rules and the exact event-driven engine.
//! * [`control`]: drivers, path planning, controllers, emptying the chain.
//! * [`harness`]: scenario and trace formats, verification, oracles, CLI.

// NaN must fail range checks, so `!(x > 0.0)` is used on purpose.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod control;
pub mod dynamics;
pub mod geometry;
pub mod harness;
pub mod tolerance;

pub use geometry::{Cell, CellSpec, Chain, Side, Vec2};
pub use tolerance::Tolerances;
