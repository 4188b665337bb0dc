//! Admissibility of a state: every particle moves, reaches a disk or an
//! exit cleanly, and no two first disk hits coincide.

use std::fmt;

use crate::dynamics::flight::{fly, Flyer, Stop};
use crate::dynamics::{SystemState, UndefinedKind};
use crate::tolerance::Tolerances;

/// Wall bounces allowed before a particle counts as never arriving.
const MAX_WALLS: usize = 100_000;

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    /// Disk count or ids do not fit the chain.
    Malformed(String),
    /// Item 1: not strictly inside its cell.
    Outside { particle: u64 },
    /// Item 1: zero or non-finite velocity.
    AtRest { particle: u64 },
    /// Item 2: neither hits a disk nor exits before the horizon.
    NeverArrives { particle: u64 },
    /// Item 3: the first disk hit is tangent.
    Tangent { particle: u64, t: f64 },
    /// Item 4: two first disk hits at the same time.
    Simultaneous { first: u64, second: u64, t: f64 },
    /// Item 5: the flight meets a corner.
    Corner { particle: u64, t: f64 },
}

impl Violation {
    /// Numbered admissibility condition that failed, 0 for malformed input.
    pub fn item(&self) -> u8 {
        match self {
            Violation::Malformed(_) => 0,
            Violation::Outside { .. } | Violation::AtRest { .. } => 1,
            Violation::NeverArrives { .. } => 2,
            Violation::Tangent { .. } => 3,
            Violation::Simultaneous { .. } => 4,
            Violation::Corner { .. } => 5,
        }
    }
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Malformed(m) => write!(f, "malformed state: {m}"),
            Violation::Outside { particle } => write!(f, "particle {particle} is not inside its cell"),
            Violation::AtRest { particle } => write!(f, "particle {particle} has no velocity"),
            Violation::NeverArrives { particle } => write!(f, "particle {particle} neither hits a disk nor exits"),
            Violation::Tangent { particle, t } => write!(f, "particle {particle} grazes a disk at t={t}"),
            Violation::Simultaneous { first, second, t } => {
                write!(f, "particles {first} and {second} hit disks together at t={t}")
            }
            Violation::Corner { particle, t } => write!(f, "particle {particle} meets a corner at t={t}"),
        }
    }
}

/// Fly every particle alone to its first disk hit or exit, up to `t_max`.
pub fn check_admissible(state: &SystemState, t_max: f64, tol: &Tolerances) -> Result<(), Violation> {
    let chain = &state.chain;
    if state.disks.len() != chain.n_cells() {
        return Err(Violation::Malformed(format!(
            "{} disks for {} cells",
            state.disks.len(),
            chain.n_cells()
        )));
    }
    let mut ids: Vec<u64> = state.particles.iter().map(|p| p.id).collect();
    ids.sort_unstable();
    if ids.windows(2).any(|w| w[0] == w[1]) {
        return Err(Violation::Malformed("duplicate particle ids".into()));
    }
    let mut hits: Vec<(f64, u64)> = Vec::new();
    for p in &state.particles {
        if !p.v.is_finite() || p.v.norm() == 0.0 {
            return Err(Violation::AtRest { particle: p.id });
        }
        if !p.q.is_finite() || !chain.contains_interior(p.cell, p.q) {
            return Err(Violation::Outside { particle: p.id });
        }
        let f = Flyer::from_particle(p, state.t);
        match fly(chain, &f, tol, MAX_WALLS, t_max) {
            Err(e) => {
                return Err(match e.kind {
                    UndefinedKind::Corner => Violation::Corner { particle: p.id, t: e.t },
                    UndefinedKind::TangentDisk => Violation::Tangent { particle: p.id, t: e.t },
                    _ => Violation::NeverArrives { particle: p.id },
                })
            }
            Ok(leg) => match leg.stop {
                Stop::Disk { prediction, .. } => hits.push((prediction.t, p.id)),
                Stop::Exit { .. } => {}
                Stop::Horizon { .. } => return Err(Violation::NeverArrives { particle: p.id }),
            },
        }
    }
    hits.sort_by(|a, b| a.0.total_cmp(&b.0));
    for w in hits.windows(2) {
        let gap = tol.time * w[1].0.abs().max(1.0);
        if w[1].0 - w[0].0 < gap {
            return Err(Violation::Simultaneous {
                first: w[0].1,
                second: w[1].1,
                t: w[1].0,
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{Particle, Role};
    use crate::geometry::{fixtures, Chain, Vec2};

    fn state(particles: Vec<Particle>) -> SystemState {
        let mut s = SystemState::ground(Chain::new(fixtures::star_cell(), 1));
        s.particles = particles;
        s
    }

    fn p(id: u64, q: Vec2, v: Vec2) -> Particle {
        Particle {
            id,
            cell: 0,
            q,
            v,
            role: Role::Resident,
        }
    }

    #[test]
    fn ground_is_admissible() {
        assert_eq!(check_admissible(&state(vec![]), f64::INFINITY, &Tolerances::default()), Ok(()));
    }

    #[test]
    fn rest_and_tangent_rejected() {
        let tol = Tolerances::default();
        let s = state(vec![p(0, Vec2::new(1.0, 0.1), Vec2::ZERO)]);
        assert_eq!(check_admissible(&s, f64::INFINITY, &tol).unwrap_err().item(), 1);
        // grazing the top of the disk
        let s = state(vec![p(0, Vec2::new(1.0, 0.5), Vec2::new(1.0, 0.0))]);
        assert_eq!(check_admissible(&s, f64::INFINITY, &tol).unwrap_err().item(), 3);
    }

    #[test]
    fn simultaneous_rejected() {
        let tol = Tolerances::default();
        let s = state(vec![
            p(0, Vec2::new(1.0, 0.0), Vec2::new(1.0, 0.0)),
            p(1, Vec2::new(3.0, 0.0), Vec2::new(-1.0, 0.0)),
        ]);
        assert_eq!(check_admissible(&s, f64::INFINITY, &tol).unwrap_err().item(), 4);
    }
}
