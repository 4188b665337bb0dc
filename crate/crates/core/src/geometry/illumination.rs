//! Return map, illuminated segments, and 1-controllability of a cell.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::angular::{wrap_angle, wrap_signed, AngularInterval, AngularIntervalSet};
use super::cell::{Cell, Surface};
use super::Vec2;

/// Angular samples used to locate illuminated intervals before refinement.
pub const DEFAULT_ANGULAR_SAMPLES: usize = 8192;

/// Corner exclusion radius relative to `L`.
const CORNER_EPS: f64 = 1e-7;
/// Minimum `|cos|` of a non-tangent disk hit.
const TANGENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum IlluminationError {
    #[error("arc index {index} out of range (cell has {count} arcs)")]
    InvalidArcIndex { index: usize, count: usize },
}

/// Why the return map is undefined for some `(θ, α)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Undefined {
    Opening,
    Corner,
    Tangent,
    MultipleBounces,
    NoWall,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ReturnMap {
    /// New disk angle, plus the arc that reflected the ray.
    Defined { theta: f64, arc: usize },
    Undefined(Undefined),
}

impl ReturnMap {
    pub fn theta(&self) -> Option<f64> {
        match self {
            ReturnMap::Defined { theta, .. } => Some(*theta),
            ReturnMap::Undefined(_) => None,
        }
    }
}

fn outward(theta: f64) -> Vec2 {
    Vec2::from_angle(theta)
}

/// Direction along the line through the disk point `θ` and `c_k` that leaves
/// the disk toward arc `k`.
fn ray_toward_arc(cell: &Cell, k: usize, theta: f64) -> Vec2 {
    let c = cell.disk_center();
    let ck = cell.arcs()[k].center;
    let p = cell.disk_point(theta);
    if ck.dist(c) < cell.r() {
        (p - ck).normalized()
    } else {
        (ck - p).normalized()
    }
}

/// `α_k(θ)`: counterclockwise angle from the outward normal at `θ` to the
/// ray from `θ` toward the center of arc `k`.
pub fn alpha_k(cell: &Cell, k: usize, theta: f64) -> f64 {
    let d = ray_toward_arc(cell, k, theta);
    let n = outward(theta);
    n.cross(d).atan2(n.dot(d))
}

/// Single-bounce return map. `α` is measured counterclockwise from the
/// outward normal at `θ`.
pub fn return_map(cell: &Cell, theta: f64, alpha: f64) -> ReturnMap {
    let l = cell.width();
    let corner = CORNER_EPS * l;
    let p = cell.disk_point(theta);
    let dir = outward(theta).rotated(alpha);
    if dir.dot(outward(theta)) <= 0.0 {
        return ReturnMap::Undefined(Undefined::Tangent);
    }
    let first = match cell.first_contact(p, dir, 1e-12 * l) {
        Some(h) => h,
        None => return ReturnMap::Undefined(Undefined::NoWall),
    };
    if cell.corner_distance(first.point) < corner {
        return ReturnMap::Undefined(Undefined::Corner);
    }
    let k = match first.surface {
        Surface::Arc(k) => k,
        Surface::LeftOpening | Surface::RightOpening => return ReturnMap::Undefined(Undefined::Opening),
        Surface::Disk => return ReturnMap::Undefined(Undefined::NoWall),
    };
    let arc = &cell.arcs()[k];
    let n = (first.point - arc.center).normalized();
    let refl = dir - n * (2.0 * dir.dot(n));
    let second = match cell.first_contact(first.point, refl, 1e-12 * l) {
        Some(h) => h,
        None => return ReturnMap::Undefined(Undefined::NoWall),
    };
    if cell.corner_distance(second.point) < corner {
        return ReturnMap::Undefined(Undefined::Corner);
    }
    match second.surface {
        Surface::Disk => {
            let nd = (second.point - cell.disk_center()).normalized();
            if refl.dot(nd).abs() < TANGENT_EPS {
                return ReturnMap::Undefined(Undefined::Tangent);
            }
            ReturnMap::Defined {
                theta: wrap_angle((second.point - cell.disk_center()).angle()),
                arc: k,
            }
        }
        Surface::Arc(_) => ReturnMap::Undefined(Undefined::MultipleBounces),
        _ => ReturnMap::Undefined(Undefined::Opening),
    }
}

/// Does the ray from disk point `θ` toward `c_k` first meet arc `k`?
pub fn lit_by(cell: &Cell, k: usize, theta: f64) -> bool {
    let p = cell.disk_point(theta);
    let dir = ray_toward_arc(cell, k, theta);
    if dir.dot(outward(theta)) <= 0.0 {
        return false;
    }
    match cell.first_contact(p, dir, 1e-12 * cell.width()) {
        Some(h) => h.surface == Surface::Arc(k) && cell.corner_distance(h.point) >= CORNER_EPS * cell.width(),
        None => false,
    }
}

/// Illuminated set `I_k` of arc `k`.
pub fn illuminate(cell: &Cell, k: usize) -> Result<AngularIntervalSet, IlluminationError> {
    illuminate_with(cell, k, DEFAULT_ANGULAR_SAMPLES)
}

pub fn illuminate_with(cell: &Cell, k: usize, samples: usize) -> Result<AngularIntervalSet, IlluminationError> {
    let count = cell.arcs().len();
    if k >= count {
        return Err(IlluminationError::InvalidArcIndex { index: k, count });
    }
    let n = samples.max(16);
    let step = TAU / n as f64;
    let lit: Vec<bool> = (0..n).map(|i| lit_by(cell, k, i as f64 * step)).collect();
    if lit.iter().all(|&b| b) {
        return Ok(AngularIntervalSet::full());
    }
    // refine each transition between neighbouring samples by bisection
    let edge = |lo: f64, hi: f64, lo_lit: bool| -> f64 {
        let (mut a, mut b) = (lo, hi);
        for _ in 0..60 {
            let m = 0.5 * (a + b);
            if lit_by(cell, k, m) == lo_lit {
                a = m;
            } else {
                b = m;
            }
        }
        0.5 * (a + b)
    };
    let mut starts = Vec::new();
    let mut ends = Vec::new();
    for i in 0..n {
        let j = (i + 1) % n;
        let (t0, t1) = (i as f64 * step, i as f64 * step + step);
        match (lit[i], lit[j]) {
            (false, true) => starts.push(edge(t0, t1, false)),
            (true, false) => ends.push(edge(t0, t1, true)),
            _ => {}
        }
    }
    let mut set = AngularIntervalSet::empty();
    // pair each start with the next end counterclockwise
    for &s in &starts {
        let e = ends
            .iter()
            .copied()
            .min_by(|a, b| wrap_angle(a - s).total_cmp(&wrap_angle(b - s)));
        if let Some(e) = e {
            set.insert(AngularInterval::between(s, e));
        }
    }
    Ok(set)
}

/// Result of the 1-controllability test.
#[derive(Debug, Clone, PartialEq)]
pub struct Controllability {
    pub controllable: bool,
    /// An uncovered disk angle when not controllable.
    pub witness: Option<f64>,
    pub coverage: AngularIntervalSet,
    pub per_arc: Vec<AngularIntervalSet>,
}

pub fn is_one_controllable(cell: &Cell) -> Controllability {
    let per_arc: Vec<AngularIntervalSet> = (0..cell.arcs().len())
        .map(|k| illuminate(cell, k).expect("index in range"))
        .collect();
    let coverage = per_arc
        .iter()
        .fold(AngularIntervalSet::empty(), |acc, s| acc.union(s));
    let covered = coverage.covers_circle();
    let witness = if covered {
        None
    } else {
        coverage.largest_gap_midpoint()
    };
    let enough_arcs = cell.arcs().len() >= 3;
    Controllability {
        controllable: covered && enough_arcs,
        witness: if enough_arcs { witness } else { witness.or(Some(0.0)) },
        coverage,
        per_arc,
    }
}

/// Signed angular displacement `R(θ, α) − θ` in `(−π, π]`, if defined.
pub fn return_displacement(cell: &Cell, theta: f64, alpha: f64) -> Option<f64> {
    return_map(cell, theta, alpha).theta().map(|t| wrap_signed(t - theta))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use std::f64::consts::PI;

    #[test]
    fn fixed_point_and_push_away() {
        let cell = fixtures::star_cell();
        let ctl = is_one_controllable(&cell);
        assert!(ctl.controllable);
        for k in 0..cell.arcs().len() {
            let ik = &ctl.per_arc[k];
            for iv in ik.intervals() {
                let th = iv.midpoint();
                let a = alpha_k(&cell, k, th);
                let back = return_map(&cell, th, a).theta().unwrap();
                assert!(wrap_signed(back - th).abs() < 1e-9, "arc {k} θ={th}");
                let up = return_displacement(&cell, th, a + 1e-4).unwrap();
                let down = return_displacement(&cell, th, a - 1e-4).unwrap();
                assert!(up > 0.0 && down < 0.0, "arc {k}: up={up} down={down}");
            }
        }
    }

    #[test]
    fn opening_ray_is_undefined() {
        let cell = fixtures::star_cell();
        // straight left from the leftmost disk point
        assert_eq!(return_map(&cell, PI, 0.0), ReturnMap::Undefined(Undefined::Opening));
    }

    #[test]
    fn bad_arc_index() {
        let cell = fixtures::star_cell();
        assert!(matches!(
            illuminate(&cell, 9),
            Err(IlluminationError::InvalidArcIndex { index: 9, count: 4 })
        ));
    }
}

