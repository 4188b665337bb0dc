//! Collision rules: specular walls and the tangential-swap disk rule.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::Vec2;

use super::state::DiskState;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Error, Serialize, Deserialize)]
pub enum CollisionError {
    #[error("velocity is not moving into the surface")]
    NotIncoming,
    #[error("disk hit is tangent (normal component below tolerance)")]
    TangentHit,
}

/// Clockwise unit tangent at a disk contact with outward normal `n`.
///
/// A disk spinning with positive `ω` has rim velocity `+ω e_t`.
#[inline]
pub fn disk_tangent(n: Vec2) -> Vec2 {
    Vec2::new(n.y, -n.x)
}

/// Specular reflection. `n` is the unit normal pointing into the domain.
pub fn apply_wall_collision(v: Vec2, n: Vec2) -> Result<Vec2, CollisionError> {
    let vn = v.dot(n);
    if vn >= 0.0 {
        return Err(CollisionError::NotIncoming);
    }
    Ok(v - n * (2.0 * vn))
}

/// Components `(v_n, v_t)` of `v` in the contact frame of outward normal `n`.
#[inline]
pub fn disk_components(v: Vec2, n: Vec2) -> (f64, f64) {
    (v.dot(n), v.dot(disk_tangent(n)))
}

/// Disk collision: the normal component flips and the tangential component
/// is exchanged with the disk's `ω`. `n` is the outward unit normal of the
/// disk at the contact; a hit is tangent when `|v_n| < tangent_tol * |v|`.
pub fn apply_disk_collision(
    v: Vec2,
    disk: DiskState,
    n: Vec2,
    tangent_tol: f64,
) -> Result<(Vec2, DiskState), CollisionError> {
    let (vn, vt) = disk_components(v, n);
    if vn >= 0.0 {
        return Err(CollisionError::NotIncoming);
    }
    if vn.abs() < tangent_tol * v.norm() {
        return Err(CollisionError::TangentHit);
    }
    let out = n * (-vn) + disk_tangent(n) * disk.omega;
    Ok((
        out,
        DiskState {
            phi: disk.phi,
            omega: vt,
        },
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wall_examples() {
        // normal along +x, so v_n = -2 and v_t = 3
        let n = Vec2::new(1.0, 0.0);
        assert_eq!(apply_wall_collision(Vec2::new(-2.0, 3.0), n).unwrap(), Vec2::new(2.0, 3.0));
        assert_eq!(apply_wall_collision(Vec2::new(-1.5, 0.0), n).unwrap(), Vec2::new(1.5, 0.0));
        assert_eq!(apply_wall_collision(Vec2::new(1.0, 0.0), n), Err(CollisionError::NotIncoming));
    }

    #[test]
    fn disk_swap_example() {
        // at theta = pi the outward normal is -x and e_t = +y
        let n = Vec2::new(-1.0, 0.0);
        let v = Vec2::new(3.0, 2.0);
        let (out, d) = apply_disk_collision(v, DiskState { phi: 0.4, omega: 5.0 }, n, 1e-9).unwrap();
        assert_eq!(out, Vec2::new(-3.0, 5.0));
        assert_eq!(d, DiskState { phi: 0.4, omega: 2.0 });
    }

    #[test]
    fn equal_tangential_is_specular() {
        let n = Vec2::new(0.6, 0.8);
        let v = Vec2::new(-1.0, -0.3);
        let vt = v.dot(disk_tangent(n));
        let (out, d) = apply_disk_collision(v, DiskState { phi: 0.0, omega: vt }, n, 1e-9).unwrap();
        let refl = apply_wall_collision(v, n).unwrap();
        assert!((out - refl).norm() < 1e-15);
        assert_eq!(d.omega, vt);
    }

    #[test]
    fn tangent_rejected() {
        let n = Vec2::new(-1.0, 0.0);
        let r = apply_disk_collision(Vec2::new(1e-12, 1.0), DiskState::default(), n, 1e-9);
        assert_eq!(r, Err(CollisionError::TangentHit));
    }
}
