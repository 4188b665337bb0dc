//! A horizontal chain of identical cells glued along their openings.

use serde::{Deserialize, Serialize};

use super::cell::{Cell, Surface};
use super::Vec2;

/// Which end of the chain (or which opening of a cell).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Side {
    Left,
    Right,
}

impl Side {
    pub fn opposite(self) -> Side {
        match self {
            Side::Left => Side::Right,
            Side::Right => Side::Left,
        }
    }
}

/// Chain of `n` copies of one cell; cell `j` occupies `x ∈ [jL, (j+1)L]`.
#[derive(Debug, Clone, PartialEq)]
pub struct Chain {
    cell: Cell,
    n: usize,
}

/// A boundary contact in global coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChainContact {
    pub t: f64,
    pub point: Vec2,
    pub cell: usize,
    pub surface: Surface,
    /// Distance from the contact to the nearest corner of the cell.
    pub corner_distance: f64,
}

impl Chain {
    pub fn new(cell: Cell, n: usize) -> Chain {
        assert!(n >= 1, "a chain needs at least one cell");
        Chain { cell, n }
    }

    pub fn cell(&self) -> &Cell {
        &self.cell
    }

    pub fn n_cells(&self) -> usize {
        self.n
    }

    pub fn width(&self) -> f64 {
        self.cell.width()
    }

    pub fn offset(&self, j: usize) -> Vec2 {
        Vec2::new(j as f64 * self.cell.width(), 0.0)
    }

    pub fn disk_center(&self, j: usize) -> Vec2 {
        self.offset(j) + self.cell.disk_center()
    }

    pub fn disk_point(&self, j: usize, theta: f64) -> Vec2 {
        self.disk_center(j) + Vec2::from_angle(theta) * self.cell.r()
    }

    /// x coordinate of a bath opening.
    pub fn bath_x(&self, side: Side) -> f64 {
        match side {
            Side::Left => 0.0,
            Side::Right => self.n as f64 * self.cell.width(),
        }
    }

    /// Cell adjacent to a bath.
    pub fn bath_cell(&self, side: Side) -> usize {
        match side {
            Side::Left => 0,
            Side::Right => self.n - 1,
        }
    }

    /// Cell containing `p`, resolving the shared opening lines by the sign
    /// of `vx` (the cell the particle is moving into).
    pub fn locate(&self, p: Vec2, vx: f64) -> Option<usize> {
        let l = self.cell.width();
        let total = self.n as f64 * l;
        if p.x < 0.0 || p.x > total {
            return None;
        }
        let mut j = (p.x / l).floor() as isize;
        let on_line = (p.x - j as f64 * l).abs() == 0.0;
        if on_line && vx < 0.0 {
            j -= 1;
        }
        let j = j.clamp(0, self.n as isize - 1) as usize;
        Some(j)
    }

    /// First contact of `q + v t` (`t > t_min`) with the boundary of cell `j`.
    pub fn contact(&self, j: usize, q: Vec2, v: Vec2, t_min: f64) -> Option<ChainContact> {
        let off = self.offset(j);
        let local = self.cell.first_contact(q - off, v, t_min)?;
        Some(ChainContact {
            t: local.t,
            point: local.point + off,
            cell: j,
            surface: local.surface,
            corner_distance: self.cell.corner_distance(local.point),
        })
    }

    /// Is `p` strictly inside cell `j`?
    pub fn contains_interior(&self, j: usize, p: Vec2) -> bool {
        j < self.n && self.cell.contains_interior(p - self.offset(j))
    }
}
