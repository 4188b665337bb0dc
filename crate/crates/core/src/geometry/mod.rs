//! Cell geometry, chains of cells, and illumination of the disk boundary.

pub mod angular;
pub mod cell;
pub mod chain;
pub mod fixtures;
pub mod illumination;
pub mod vec2;

pub use angular::{wrap_angle, wrap_signed, AngularInterval, AngularIntervalSet};
pub use cell::{build_cell, build_cell_with, ArcSpec, Cell, CellError, CellSpec, LocalContact, Surface, ValidationConfig};
pub use chain::{Chain, ChainContact, Side};
pub use illumination::{
    alpha_k, illuminate, is_one_controllable, lit_by, return_map, Controllability, IlluminationError, ReturnMap,
};
pub use vec2::Vec2;
