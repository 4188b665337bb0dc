//! Single-particle kinematics between events.
//!
//! A particle is stored as an anchor `(q, t0)` and a velocity, so its
//! position is `q + v (t - t0)`. Its next boundary contact depends only on
//! the particle itself, never on other particles or on disk states, which
//! keeps solo flights and full replays bit-identical.

use crate::geometry::{Chain, Side, Surface, Vec2};
use crate::tolerance::Tolerances;

use super::collision::{apply_disk_collision, apply_wall_collision, CollisionError};
use super::event::{Event, EventKind, UndefinedEvent, UndefinedKind};
use super::state::{DiskState, Particle, Role};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Flyer {
    pub id: u64,
    pub role: Role,
    pub cell: usize,
    /// Position at time `t0`.
    pub q: Vec2,
    pub t0: f64,
    pub v: Vec2,
}

impl Flyer {
    pub fn from_particle(p: &Particle, t: f64) -> Flyer {
        Flyer {
            id: p.id,
            role: p.role,
            cell: p.cell,
            q: p.q,
            t0: t,
            v: p.v,
        }
    }

    pub fn position(&self, t: f64) -> Vec2 {
        self.q + self.v * (t - self.t0)
    }

    pub fn to_particle(&self, t: f64) -> Particle {
        Particle {
            id: self.id,
            cell: self.cell,
            q: self.position(t),
            v: self.v,
            role: self.role,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Next {
    Wall { arc: usize },
    Disk { disk: usize },
    Transfer { to: usize },
    Exit { side: Side },
}

/// The next event of one particle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Prediction {
    pub t: f64,
    pub point: Vec2,
    pub cell: usize,
    pub next: Next,
}

/// Locate the next boundary contact of `f`.
pub fn predict(chain: &Chain, f: &Flyer, tol: &Tolerances) -> Result<Prediction, UndefinedEvent> {
    let l = chain.width();
    let speed = f.v.norm();
    let undefined = |kind, t| UndefinedEvent {
        kind,
        t,
        particle: f.id,
        other: None,
    };
    if speed == 0.0 || !speed.is_finite() {
        return Err(undefined(UndefinedKind::Lost, f.t0));
    }
    let t_min = tol.lookback * l / speed;
    let c = chain
        .contact(f.cell, f.q, f.v, t_min)
        .ok_or_else(|| undefined(UndefinedKind::Lost, f.t0))?;
    let t = f.t0 + c.t;
    if c.corner_distance < tol.corner * l {
        return Err(undefined(UndefinedKind::Corner, t));
    }
    let next = match c.surface {
        Surface::Arc(arc) => Next::Wall { arc },
        Surface::Disk => {
            let n = (c.point - chain.disk_center(c.cell)).normalized();
            if f.v.dot(n).abs() < tol.tangent * speed {
                return Err(undefined(UndefinedKind::TangentDisk, t));
            }
            Next::Disk { disk: c.cell }
        }
        Surface::LeftOpening => {
            if c.cell == 0 {
                Next::Exit { side: Side::Left }
            } else {
                Next::Transfer { to: c.cell - 1 }
            }
        }
        Surface::RightOpening => {
            if c.cell + 1 == chain.n_cells() {
                Next::Exit { side: Side::Right }
            } else {
                Next::Transfer { to: c.cell + 1 }
            }
        }
    };
    Ok(Prediction {
        t,
        point: c.point,
        cell: c.cell,
        next,
    })
}

/// Outcome of applying a predicted event.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Advanced {
    /// `None` once the particle has left the chain.
    pub flyer: Option<Flyer>,
    pub event: Event,
    /// New state of the struck disk, for disk hits.
    pub disk: Option<(usize, DiskState)>,
}

/// Apply the predicted event to `f`. `disk` is the current state of the
/// struck disk (ignored unless the event is a disk hit).
pub fn advance(
    chain: &Chain,
    f: &Flyer,
    p: &Prediction,
    disk: DiskState,
    tol: &Tolerances,
) -> Result<Advanced, UndefinedEvent> {
    let mut out = *f;
    out.q = p.point;
    out.t0 = p.t;
    let mut new_disk = None;
    let kind = match p.next {
        Next::Wall { arc } => {
            let a = chain.cell().arcs()[arc];
            let center = a.center + chain.offset(p.cell);
            let n = (p.point - center).normalized();
            out.v = apply_wall_collision(f.v, n).map_err(|_| UndefinedEvent {
                kind: UndefinedKind::Corner,
                t: p.t,
                particle: f.id,
                other: None,
            })?;
            EventKind::WallHit { arc }
        }
        Next::Disk { disk: j } => {
            let n = (p.point - chain.disk_center(j)).normalized();
            let (v, d) = apply_disk_collision(f.v, disk, n, tol.tangent).map_err(|e| UndefinedEvent {
                kind: match e {
                    CollisionError::TangentHit | CollisionError::NotIncoming => UndefinedKind::TangentDisk,
                },
                t: p.t,
                particle: f.id,
                other: None,
            })?;
            out.v = v;
            new_disk = Some((j, d));
            EventKind::DiskHit {
                disk: j,
                phi: disk.phi,
                omega_pre: disk.omega,
                omega_post: d.omega,
            }
        }
        Next::Transfer { to } => {
            // snap onto the shared opening line
            let x = if to > p.cell {
                chain.offset(to).x
            } else {
                chain.offset(p.cell).x
            };
            out.q = Vec2::new(x, p.point.y);
            out.cell = to;
            EventKind::CellTransfer { to }
        }
        Next::Exit { side } => EventKind::Exit { side },
    };
    let event = Event {
        t: p.t,
        particle: f.id,
        role: f.role,
        cell: p.cell,
        point: out.q,
        v_pre: f.v,
        v_post: out.v,
        kind,
    };
    let flyer = match p.next {
        Next::Exit { .. } => None,
        _ => Some(out),
    };
    Ok(Advanced {
        flyer,
        event,
        disk: new_disk,
    })
}

/// Where a solo flight stopped.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Stop {
    /// About to hit a disk; `flyer` is anchored at its last wall event.
    Disk { flyer: Flyer, prediction: Prediction },
    Exit { side: Side, t: f64, point: Vec2, v: Vec2 },
    /// Still flying at `t_max`.
    Horizon { flyer: Flyer },
}

/// A flight through walls and openings up to the next disk hit or exit.
#[derive(Debug, Clone, PartialEq)]
pub struct Leg {
    pub stop: Stop,
    pub walls: usize,
    /// Wall and transfer events on the way.
    pub events: Vec<Event>,
    /// Smallest corner distance met on the way, relative to `L`.
    pub corner_margin: f64,
    /// Largest `|y|/a` at an opening crossing.
    pub opening_margin: f64,
}

/// Fly `f` through walls and openings until it reaches a disk, exits, makes
/// more than `max_walls` wall bounces, or passes `t_max`.
pub fn fly(
    chain: &Chain,
    f: &Flyer,
    tol: &Tolerances,
    max_walls: usize,
    t_max: f64,
) -> Result<Leg, UndefinedEvent> {
    let l = chain.width();
    let a = chain.cell().a();
    let mut cur = *f;
    let mut walls = 0;
    let mut events = Vec::new();
    let mut corner_margin = f64::INFINITY;
    let mut opening_margin: f64 = 0.0;
    loop {
        let p = predict(chain, &cur, tol)?;
        if p.t > t_max {
            return Ok(Leg {
                stop: Stop::Horizon { flyer: cur },
                walls,
                events,
                corner_margin,
                opening_margin,
            });
        }
        let off = chain.offset(p.cell);
        corner_margin = corner_margin.min(chain.cell().corner_distance(p.point - off) / l);
        match p.next {
            Next::Disk { .. } => {
                return Ok(Leg {
                    stop: Stop::Disk {
                        flyer: cur,
                        prediction: p,
                    },
                    walls,
                    events,
                    corner_margin,
                    opening_margin,
                })
            }
            Next::Exit { side } => {
                opening_margin = opening_margin.max(p.point.y.abs() / a);
                return Ok(Leg {
                    stop: Stop::Exit {
                        side,
                        t: p.t,
                        point: p.point,
                        v: cur.v,
                    },
                    walls,
                    events,
                    corner_margin,
                    opening_margin,
                });
            }
            Next::Wall { .. } => {
                walls += 1;
                if walls > max_walls {
                    return Ok(Leg {
                        stop: Stop::Horizon { flyer: cur },
                        walls,
                        events,
                        corner_margin,
                        opening_margin,
                    });
                }
            }
            Next::Transfer { .. } => {
                opening_margin = opening_margin.max(p.point.y.abs() / a);
            }
        }
        let adv = advance(chain, &cur, &p, DiskState::default(), tol)?;
        events.push(adv.event);
        cur = adv.flyer.expect("walls and transfers keep the particle");
    }
}
