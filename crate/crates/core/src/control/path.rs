//! Admissible paths: polylines of straight segments with specular wall
//! vertices and free disk vertices.

use serde::{Deserialize, Serialize};

use crate::dynamics::collision::disk_tangent;
use crate::dynamics::flight::{advance, fly, predict, Flyer, Next, Stop};
use crate::dynamics::{DiskState, EventKind, Role};
use crate::geometry::{is_one_controllable, Cell, Chain, Side, Vec2};
use crate::tolerance::Tolerances;

use super::aim::{solve, solve_near, Aim, Launch};
use super::graph::{Goal, HopTarget, LegPolicy, Origin, Outcome, PlannerConfig, Route, RoutePlanner};
use super::ControlError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexKind {
    Start,
    Wall,
    Disk,
    End,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Vertex {
    pub point: Vec2,
    pub kind: VertexKind,
    /// Cell the vertex belongs to; for disk vertices, the disk index.
    pub cell: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AdmissiblePath {
    pub vertices: Vec<Vertex>,
    /// Unit direction of the segment leaving each vertex but the last.
    pub directions: Vec<Vec2>,
}

impl AdmissiblePath {
    pub fn length(&self) -> f64 {
        self.vertices.windows(2).map(|w| w[0].point.dist(w[1].point)).sum()
    }

    pub fn disk_vertices(&self) -> usize {
        self.vertices.iter().filter(|v| v.kind == VertexKind::Disk).count()
    }

    pub fn starts_at_opening(&self, chain: &Chain) -> Option<Side> {
        let s = self.vertices.first()?;
        if s.kind != VertexKind::Start {
            return None;
        }
        [Side::Left, Side::Right]
            .into_iter()
            .find(|&side| s.point.x == chain.bath_x(side) && s.cell == chain.bath_cell(side))
    }

    pub fn end_side(&self, chain: &Chain) -> Option<Side> {
        let e = self.vertices.last()?;
        [Side::Left, Side::Right]
            .into_iter()
            .find(|&side| (e.point.x - chain.bath_x(side)).abs() < 1e-9 * chain.width())
    }

    /// Check every admissibility condition against the chain geometry by
    /// re-flying each segment.
    pub fn validate(&self, chain: &Chain, tol: &Tolerances) -> Result<(), String> {
        let n = self.vertices.len();
        if n < 2 || self.directions.len() != n - 1 {
            return Err("a path needs at least two vertices and one direction per segment".into());
        }
        if self.vertices[0].kind != VertexKind::Start || self.vertices[n - 1].kind != VertexKind::End {
            return Err("path must run from a start vertex to an end vertex".into());
        }
        let l = chain.width();
        let a = chain.cell().a();
        for (i, w) in self.vertices.iter().enumerate().skip(1).take(n.saturating_sub(2)) {
            if matches!(w.kind, VertexKind::Start | VertexKind::End) {
                return Err(format!("interior vertex {i} is not a wall or disk vertex"));
            }
        }
        let end = self.vertices[n - 1];
        if end.point.y.abs() >= a {
            return Err("end vertex is not inside an opening".into());
        }
        for i in 0..n - 1 {
            let d = self.directions[i];
            if (d.norm() - 1.0).abs() > 1e-9 {
                return Err(format!("direction {i} is not a unit vector"));
            }
            let from = self.vertices[i];
            let to = self.vertices[i + 1];
            if from.kind == VertexKind::Disk {
                let nrm = (from.point - chain.disk_center(from.cell)).normalized();
                if d.dot(nrm) < tol.tangent {
                    return Err(format!("segment {i} leaves disk vertex tangentially"));
                }
            }
            let mut f = Flyer {
                id: 0,
                role: Role::Tracer,
                cell: from.cell,
                q: from.point,
                t0: 0.0,
                v: d,
            };
            let p = loop {
                let p = predict(chain, &f, tol).map_err(|e| format!("segment {i}: {e}"))?;
                if let Next::Transfer { .. } = p.next {
                    if p.point.y.abs() >= a {
                        return Err(format!("segment {i} crosses an opening endpoint"));
                    }
                    f = advance(chain, &f, &p, DiskState::default(), tol)
                        .map_err(|e| format!("segment {i}: {e}"))?
                        .flyer
                        .expect("transfers keep the particle");
                    continue;
                }
                break p;
            };
            if p.point.dist(to.point) > 1e-9 * l {
                return Err(format!("segment {i} meets the boundary before vertex {}", i + 1));
            }
            if chain.cell().corner_distance(p.point - chain.offset(p.cell)) < tol.corner * l {
                return Err(format!("vertex {} is at a corner", i + 1));
            }
            match (to.kind, p.next) {
                (VertexKind::Wall, Next::Wall { .. }) => {
                    let out = advance(chain, &f, &p, DiskState::default(), tol).map_err(|e| format!("vertex {}: {e}", i + 1))?;
                    let v = out.flyer.expect("walls keep the particle").v;
                    if let Some(next) = self.directions.get(i + 1) {
                        if v.normalized().dist(*next) > 1e-9 {
                            return Err(format!("reflection at vertex {} is not specular", i + 1));
                        }
                    }
                }
                (VertexKind::Disk, Next::Disk { disk }) => {
                    if disk != to.cell {
                        return Err(format!("vertex {} is on the wrong disk", i + 1));
                    }
                    let nrm = (p.point - chain.disk_center(disk)).normalized();
                    if d.dot(nrm).abs() < tol.tangent {
                        return Err(format!("segment {i} is tangent to disk {disk}"));
                    }
                }
                (VertexKind::End, Next::Exit { .. }) => {}
                _ => return Err(format!("vertex {} does not match the boundary it lies on", i + 1)),
            }
        }
        Ok(())
    }
}

/// Lenient settings used to re-aim along an existing path.
pub fn follow_config() -> PlannerConfig {
    PlannerConfig {
        corner_margin: 1e-6,
        opening_margin: 0.999,
        min_cos_incidence: 1e-3,
        policy: LegPolicy::Chain { max_walls: 16 },
        ..PlannerConfig::default()
    }
}

/// Fly `f` to its next disk hit or exit, appending wall vertices and the
/// final vertex to `path`.
fn trace_segment(chain: &Chain, path: &mut AdmissiblePath, f: Flyer, tol: &Tolerances) -> Result<Option<(Flyer, usize)>, ControlError> {
    let leg = fly(chain, &f, tol, 64, f64::INFINITY).map_err(ControlError::Undefined)?;
    path.directions.push(f.v.normalized());
    for e in &leg.events {
        if let EventKind::WallHit { .. } = e.kind {
            path.vertices.push(Vertex {
                point: e.point,
                kind: VertexKind::Wall,
                cell: e.cell,
            });
            path.directions.push(e.v_post.normalized());
        }
    }
    match leg.stop {
        Stop::Disk { flyer, prediction } => {
            let Next::Disk { disk } = prediction.next else { unreachable!() };
            path.vertices.push(Vertex {
                point: prediction.point,
                kind: VertexKind::Disk,
                cell: disk,
            });
            let mut arrived = flyer;
            arrived.q = prediction.point;
            arrived.t0 = prediction.t;
            Ok(Some((arrived, disk)))
        }
        Stop::Exit { point, .. } => {
            path.vertices.push(Vertex {
                point,
                kind: VertexKind::End,
                cell: 0,
            });
            Ok(None)
        }
        Stop::Horizon { .. } => Err(ControlError::AimFailed),
    }
}

/// Fly one departure from a disk point and record it.
fn depart(chain: &Chain, path: &mut AdmissiblePath, disk: usize, point: Vec2, dir: Vec2, tol: &Tolerances) -> Result<Option<(Flyer, usize)>, ControlError> {
    let f = Flyer {
        id: 0,
        role: Role::Tracer,
        cell: disk,
        q: point,
        t0: 0.0,
        v: dir,
    };
    trace_segment(chain, path, f, tol)
}

/// Turn a route into an exact polyline, landing every hop precisely on its
/// target point. `path` already ends at the route's first origin.
fn realize(chain: &Chain, cfg: &PlannerConfig, path: &mut AdmissiblePath, route: &Route, tol: &Tolerances) -> Result<(), ControlError> {
    let mut at: Option<(Vec2, usize)> = None;
    for hop in &route.hops {
        let launch = match at {
            Some((p, disk)) => Launch::at_disk(chain, disk, p),
            None => match hop.origin {
                Origin::Disk { disk, .. } => {
                    let last = path.vertices.last().expect("path has a start").point;
                    Launch::at_disk(chain, disk, last)
                }
                Origin::Bath { .. } => Launch::from_origin(chain, hop.origin),
            },
        };
        let one = |_: f64| 1.0;
        let alpha = match hop.target {
            HopTarget::Disk { disk, theta, .. } => {
                let aim = Aim::Disk { disk, theta };
                solve(chain, cfg, &launch, aim, hop.alpha_lo, hop.alpha_hi, hop.signature, &one)
                    .or_else(|_| solve_near(chain, cfg, &launch, aim, 0.5 * (hop.alpha_lo + hop.alpha_hi), &one))?
            }
            HopTarget::Exit { .. } => hop.alpha_lo,
            HopTarget::Radial { .. } => return Err(ControlError::Invalid("radial hops have no fixed landing".into())),
        };
        let dir = launch.direction(alpha);
        let landed = match launch.frame {
            super::aim::Frame::Disk { disk, .. } => depart(chain, path, disk, launch.q, dir, tol)?,
            super::aim::Frame::Bath { .. } => {
                let f = Flyer {
                    id: 0,
                    role: Role::Tracer,
                    cell: launch.cell,
                    q: launch.q,
                    t0: 0.0,
                    v: dir,
                };
                trace_segment(chain, path, f, tol)?
            }
        };
        at = match (landed, hop.target) {
            (Some((f, disk)), HopTarget::Disk { disk: want, .. }) if disk == want => Some((f.q, disk)),
            (None, HopTarget::Exit { side }) => {
                let end = path.vertices.last_mut().expect("exit vertex");
                end.cell = chain.bath_cell(side);
                None
            }
            _ => return Err(ControlError::AimFailed),
        };
    }
    Ok(())
}

/// Path from the disk point at `theta` to the opening on `side`, hopping
/// along the disk by single wall reflections.
pub fn plan_exit_path(cell: &Cell, theta: f64, side: Side) -> Result<AdmissiblePath, ControlError> {
    let c = is_one_controllable(cell);
    if !c.controllable {
        return Err(ControlError::NotOneControllable {
            witness: c.witness.unwrap_or(f64::NAN),
        });
    }
    let chain = Chain::new(cell.clone(), 1);
    let cfg = PlannerConfig {
        policy: LegPolicy::ReturnMap,
        ..PlannerConfig::default()
    };
    let mut planner = RoutePlanner::new(chain.clone(), cfg.clone());
    let origin = Origin::Disk { disk: 0, theta };
    let route = planner.route(&[origin], &[true], Goal::exit(side), &[])?;
    let mut path = AdmissiblePath {
        vertices: vec![Vertex {
            point: chain.disk_point(0, theta),
            kind: VertexKind::Start,
            cell: 0,
        }],
        directions: Vec::new(),
    };
    realize(&chain, &cfg, &mut path, &route, &Tolerances::default())?;
    Ok(path)
}

/// Path entering through the center of the `from` opening and leaving
/// through the center of the `to` opening, both end segments at `angle` to
/// the inward horizontal.
pub fn plan_opening_to_opening(chain: &Chain, from: Side, to: Side, angle: f64) -> Result<AdmissiblePath, ControlError> {
    let tol = Tolerances::default();
    let cfg = PlannerConfig::default();
    let mut planner = RoutePlanner::new(chain.clone(), cfg.clone());
    let all = vec![true; chain.n_cells()];
    // the last segment, traced backwards from the exit opening
    let back = Launch::from_origin(chain, Origin::Bath { side: to, y: 0.0 });
    let (goal_disk, goal_theta, goal_point) = match back.shoot(chain, &cfg, angle).outcome {
        Outcome::Disk { disk, theta, point, .. } => (disk, theta, point),
        _ => return Err(ControlError::SearchExhausted),
    };
    let mut path = AdmissiblePath {
        vertices: vec![Vertex {
            point: Vec2::new(chain.bath_x(from), 0.0),
            kind: VertexKind::Start,
            cell: chain.bath_cell(from),
        }],
        directions: Vec::new(),
    };
    let first = Launch::from_origin(chain, Origin::Bath { side: from, y: 0.0 });
    let f = Flyer {
        id: 0,
        role: Role::Tracer,
        cell: first.cell,
        q: first.q,
        t0: 0.0,
        v: first.direction(angle),
    };
    let (arrived, disk) = trace_segment(chain, &mut path, f, &tol)?.ok_or(ControlError::SearchExhausted)?;
    let theta0 = (arrived.q - chain.disk_center(disk)).angle();
    if !(disk == goal_disk && arrived.q.dist(goal_point) < 1e-12 * chain.width()) {
        let route = planner.route(
            &[Origin::Disk { disk, theta: theta0 }],
            &all,
            Goal::Point {
                disk: goal_disk,
                theta: goal_theta,
            },
            &[],
        )?;
        realize(chain, &cfg, &mut path, &route, &tol)?;
    }
    // leave along the reversed backward ray
    let last = *path.vertices.last().expect("disk vertex");
    let n = (last.point - chain.disk_center(last.cell)).normalized();
    let a_out = back.direction(angle);
    let f = Flyer {
        id: 0,
        role: Role::Tracer,
        cell: back.cell,
        q: back.q,
        t0: 0.0,
        v: a_out,
    };
    let leg = fly(chain, &f, &tol, 64, f64::INFINITY).map_err(ControlError::Undefined)?;
    let Stop::Disk { flyer, .. } = leg.stop else {
        return Err(ControlError::SearchExhausted);
    };
    let dir = -flyer.v.normalized();
    let alpha = dir.dot(disk_tangent(n)).atan2(dir.dot(n));
    let launch = Launch::at_disk(chain, last.cell, last.point);
    let one = |_: f64| 1.0;
    let alpha = solve_near(chain, &follow_config(), &launch, Aim::Exit { side: to, y: 0.0 }, alpha, &one)?;
    let end = depart(chain, &mut path, last.cell, last.point, launch.direction(alpha), &tol)?;
    if end.is_some() {
        return Err(ControlError::AimFailed);
    }
    let e = path.vertices.last_mut().expect("end vertex");
    e.cell = chain.bath_cell(to);
    Ok(path)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;

    #[test]
    fn exit_paths_validate() {
        let cell = fixtures::star_cell();
        let chain = Chain::new(cell.clone(), 1);
        for theta in [0.0, 1.0, 2.5, 4.0, 5.5] {
            let p = plan_exit_path(&cell, theta, Side::Left).unwrap();
            p.validate(&chain, &Tolerances::default()).unwrap();
            assert_eq!(p.end_side(&chain), Some(Side::Left));
        }
    }

    #[test]
    fn tail_cell_refused() {
        let cell = fixtures::tail_cell();
        assert!(matches!(
            plan_exit_path(&cell, 0.0, Side::Left),
            Err(ControlError::NotOneControllable { .. })
        ));
    }

    #[test]
    fn opening_paths_validate() {
        for n in 1..=3 {
            let chain = Chain::new(fixtures::star_cell(), n);
            let p = plan_opening_to_opening(&chain, Side::Left, Side::Right, 0.0).unwrap();
            p.validate(&chain, &Tolerances::default()).unwrap();
            assert_eq!(p.directions[0], Vec2::new(1.0, 0.0));
            assert_eq!(p.end_side(&chain), Some(Side::Right));
        }
    }
}
