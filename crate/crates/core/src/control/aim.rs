//! One-dimensional aiming: pick a departure angle so a ray lands exactly
//! where we want it.

use crate::dynamics::collision::disk_tangent;
use crate::geometry::angular::wrap_signed;
use crate::geometry::{Chain, Side, Vec2};

use super::graph::{shoot_from, Origin, Outcome, PlannerConfig, Shot};
use super::ControlError;

/// A departure point with its angle convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Launch {
    pub q: Vec2,
    pub cell: usize,
    pub frame: Frame,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Frame {
    /// Angle from the outward normal `n` toward the clockwise tangent.
    Disk { disk: usize, n: Vec2 },
    /// Angle from the inward horizontal, counterclockwise.
    Bath { side: Side },
}

impl Launch {
    pub fn from_origin(chain: &Chain, origin: Origin) -> Launch {
        match origin {
            Origin::Disk { disk, theta } => Launch {
                q: chain.disk_point(disk, theta),
                cell: disk,
                frame: Frame::Disk {
                    disk,
                    n: Vec2::from_angle(theta),
                },
            },
            Origin::Bath { side, y } => Launch {
                q: Vec2::new(chain.bath_x(side), y),
                cell: chain.bath_cell(side),
                frame: Frame::Bath { side },
            },
        }
    }

    /// Launch from an actual contact point on `disk`.
    pub fn at_disk(chain: &Chain, disk: usize, point: Vec2) -> Launch {
        Launch {
            q: point,
            cell: disk,
            frame: Frame::Disk {
                disk,
                n: (point - chain.disk_center(disk)).normalized(),
            },
        }
    }

    pub fn direction(&self, alpha: f64) -> Vec2 {
        match self.frame {
            Frame::Disk { n, .. } => n * alpha.cos() + disk_tangent(n) * alpha.sin(),
            Frame::Bath { side: Side::Left } => Vec2::new(alpha.cos(), alpha.sin()),
            Frame::Bath { side: Side::Right } => Vec2::new(-alpha.cos(), alpha.sin()),
        }
    }

    pub fn shoot(&self, chain: &Chain, cfg: &PlannerConfig, alpha: f64) -> Shot {
        let od = match self.frame {
            Frame::Disk { disk, .. } => Some(disk),
            Frame::Bath { .. } => None,
        };
        let (outcome, signature) = shoot_from(chain, cfg, self.q, self.cell, self.direction(alpha), od);
        Shot {
            alpha,
            outcome,
            signature,
        }
    }
}

/// What a departure should achieve.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Aim {
    /// Land on `disk` at angle `theta`.
    Disk { disk: usize, theta: f64 },
    /// Land on `disk` with tangential velocity `vt`; `speed(α)` is the
    /// speed after departure.
    Tangential { disk: usize, vt: f64 },
    /// Leave through `side` at ordinate `y`.
    Exit { side: Side, y: f64 },
}

/// Residual of a shot for `aim`, or `None` when the shot misses the
/// intended combinatorics.
fn residual(aim: Aim, shot: &Shot, signature: u64, speed: &dyn Fn(f64) -> f64) -> Option<f64> {
    if shot.signature != signature {
        return None;
    }
    match (aim, shot.outcome) {
        (Aim::Disk { disk, theta }, Outcome::Disk { disk: d, theta: t, .. }) if d == disk => Some(wrap_signed(t - theta)),
        (Aim::Tangential { disk, vt }, Outcome::Disk { disk: d, tangential, .. }) if d == disk => {
            Some(speed(shot.alpha) * tangential - vt)
        }
        (Aim::Exit { side, y }, Outcome::Exit { side: s, .. }) if s == side => Some(shot_exit_y(shot) - y),
        _ => None,
    }
}

fn shot_exit_y(shot: &Shot) -> f64 {
    match shot.outcome {
        Outcome::Exit { y, .. } => y,
        _ => f64::NAN,
    }
}

/// Bisect the departure angle in `[lo, hi]` until the residual vanishes to
/// machine precision. Both ends must share `signature` and straddle zero.
#[allow(clippy::too_many_arguments)]
pub fn solve(
    chain: &Chain,
    cfg: &PlannerConfig,
    launch: &Launch,
    aim: Aim,
    lo: f64,
    hi: f64,
    signature: u64,
    speed: &dyn Fn(f64) -> f64,
) -> Result<f64, ControlError> {
    let f = |a: f64| residual(aim, &launch.shoot(chain, cfg, a), signature, speed);
    let (mut lo, mut hi) = (lo, hi);
    let flo = f(lo).ok_or(ControlError::AimFailed)?;
    let fhi = f(hi).ok_or(ControlError::AimFailed)?;
    if flo == 0.0 {
        return Ok(lo);
    }
    if fhi == 0.0 {
        return Ok(hi);
    }
    if flo.signum() == fhi.signum() {
        return Err(match aim {
            Aim::Tangential { .. } => ControlError::RootNotBracketed,
            _ => ControlError::AimFailed,
        });
    }
    let neg_at_lo = flo < 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let fm = f(mid).ok_or(ControlError::AimFailed)?;
        if fm == 0.0 {
            return Ok(mid);
        }
        if (fm < 0.0) == neg_at_lo {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (rl, rh) = (f(lo).unwrap_or(f64::INFINITY), f(hi).unwrap_or(f64::INFINITY));
    Ok(if rl.abs() <= rh.abs() { lo } else { hi })
}

/// Find a bracket around `guess` with the same combinatorics, widening
/// geometrically, then solve.
pub fn solve_near(
    chain: &Chain,
    cfg: &PlannerConfig,
    launch: &Launch,
    aim: Aim,
    guess: f64,
    speed: &dyn Fn(f64) -> f64,
) -> Result<f64, ControlError> {
    let g = launch.shoot(chain, cfg, guess);
    let signature = g.signature;
    let f0 = residual(aim, &g, signature, speed).ok_or(ControlError::AimFailed)?;
    if f0 == 0.0 {
        return Ok(guess);
    }
    let mut w = 1e-12;
    while w < 0.1 {
        for other in [guess - w, guess + w] {
            if let Some(fo) = residual(aim, &launch.shoot(chain, cfg, other), signature, speed) {
                if fo.signum() != f0.signum() {
                    return solve(chain, cfg, launch, aim, guess, other, signature, speed);
                }
            }
        }
        w *= 4.0;
    }
    Err(ControlError::AimFailed)
}
