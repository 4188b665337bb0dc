//! Route search over sampled disk points.
//!
//! Nodes are bins of the disk boundaries, each represented by its central
//! point. From a point we shoot rays over a fan of departure angles; two
//! neighbouring rays with the same combinatorics (same cells, walls and
//! target) bracket a continuous family of legs, so every bin center between
//! their landing points is reachable exactly by bisection on the angle.

use std::collections::hash_map::DefaultHasher;
use std::collections::{HashMap, VecDeque};
use std::f64::consts::TAU;
use std::hash::{Hash, Hasher};

use crate::dynamics::collision::disk_tangent;
use crate::dynamics::flight::{fly, Flyer, Stop};
use crate::dynamics::{EventKind, Role};
use crate::geometry::angular::{wrap_angle, wrap_signed};
use crate::geometry::{Chain, Side, Vec2};
use crate::tolerance::Tolerances;

use super::ControlError;

/// Which legs are allowed.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum LegPolicy {
    /// Exactly one wall bounce back to the same disk, or a bounce-free exit.
    ReturnMap,
    /// Anything up to `max_walls` bounces, across cells.
    Chain { max_walls: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlannerConfig {
    pub bins: usize,
    pub alpha_samples: usize,
    pub max_alpha: f64,
    pub min_cos_incidence: f64,
    /// Minimum corner distance along a leg, relative to `L`.
    pub corner_margin: f64,
    /// Largest `|y|/a` allowed when crossing an opening.
    pub opening_margin: f64,
    /// Bath entry ordinates as fractions of `a`.
    pub bath_offsets: Vec<f64>,
    pub policy: LegPolicy,
    pub max_hops: usize,
}

impl Default for PlannerConfig {
    fn default() -> Self {
        PlannerConfig {
            bins: 1024,
            alpha_samples: 256,
            max_alpha: 1.35,
            min_cos_incidence: 0.1,
            corner_margin: 1e-3,
            opening_margin: 0.9,
            bath_offsets: vec![0.0, 0.4, -0.4, 0.8, -0.8],
            policy: LegPolicy::Chain { max_walls: 4 },
            max_hops: 16,
        }
    }
}

/// Where a leg starts.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Origin {
    Disk { disk: usize, theta: f64 },
    Bath { side: Side, y: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum HopTarget {
    Disk { disk: usize, bin: usize, theta: f64 },
    Exit { side: Side },
    /// Land on `disk` across a radial incidence.
    Radial { disk: usize },
}

/// One leg of a route: depart from `origin` with an angle in
/// `[alpha_lo, alpha_hi]` to reach `target`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hop {
    pub origin: Origin,
    pub alpha_lo: f64,
    pub alpha_hi: f64,
    pub target: HopTarget,
    pub signature: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Route {
    pub hops: Vec<Hop>,
}

impl Route {
    pub fn disk_vertices(&self) -> usize {
        self.hops.iter().filter(|h| matches!(h.target, HopTarget::Disk { .. })).count()
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Goal {
    Exit { left: bool, right: bool },
    Radial { disk: usize },
    /// Land exactly on `disk` at `theta`.
    Point { disk: usize, theta: f64 },
}

impl Goal {
    pub fn exit(side: Side) -> Goal {
        Goal::Exit {
            left: side == Side::Left,
            right: side == Side::Right,
        }
    }

    pub fn any_exit() -> Goal {
        Goal::Exit { left: true, right: true }
    }
}

/// Classified result of one ray.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Outcome {
    Disk {
        disk: usize,
        theta: f64,
        /// Tangential component of the unit incoming direction.
        tangential: f64,
        point: Vec2,
    },
    Exit {
        side: Side,
        y: f64,
    },
    Invalid,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Shot {
    pub alpha: f64,
    pub outcome: Outcome,
    pub signature: u64,
}

/// Unit departure direction for angle `alpha` from `origin`.
///
/// At a disk, `alpha` is measured from the outward normal toward the
/// clockwise tangent, so a disk spinning at `ω̂` sends a particle with normal
/// speed `v_n` off at `atan(ω̂ / v_n)`. At a bath, it is the angle from the
/// inward horizontal, counterclockwise.
pub fn departure(chain: &Chain, origin: Origin, alpha: f64) -> (Vec2, Vec2, usize) {
    match origin {
        Origin::Disk { disk, theta } => {
            let n = Vec2::from_angle(theta);
            let dir = n * alpha.cos() + disk_tangent(n) * alpha.sin();
            (chain.disk_point(disk, theta), dir, disk)
        }
        Origin::Bath { side, y } => {
            let dir = match side {
                Side::Left => Vec2::new(alpha.cos(), alpha.sin()),
                Side::Right => Vec2::new(-alpha.cos(), alpha.sin()),
            };
            (Vec2::new(chain.bath_x(side), y), dir, chain.bath_cell(side))
        }
    }
}

/// Fly a ray from `q` in cell `cell` and classify where it ends.
pub fn shoot_from(chain: &Chain, cfg: &PlannerConfig, q: Vec2, cell: usize, dir: Vec2, origin_disk: Option<usize>) -> (Outcome, u64) {
    let tol = Tolerances::default();
    let f = Flyer {
        id: 0,
        role: Role::Tracer,
        cell,
        q,
        t0: 0.0,
        v: dir,
    };
    let max_walls = match cfg.policy {
        LegPolicy::ReturnMap => 1,
        LegPolicy::Chain { max_walls } => max_walls,
    };
    let leg = match fly(chain, &f, &tol, max_walls, f64::INFINITY) {
        Ok(l) => l,
        Err(_) => return (Outcome::Invalid, 0),
    };
    let mut h = DefaultHasher::new();
    for e in &leg.events {
        e.cell.hash(&mut h);
        match e.kind {
            EventKind::WallHit { arc } => (0u8, arc).hash(&mut h),
            EventKind::CellTransfer { to } => (1u8, to).hash(&mut h),
            _ => 2u8.hash(&mut h),
        }
    }
    if leg.corner_margin < cfg.corner_margin || leg.opening_margin > cfg.opening_margin {
        return (Outcome::Invalid, 0);
    }
    let out = match leg.stop {
        Stop::Disk { flyer, prediction } => {
            let crate::dynamics::flight::Next::Disk { disk } = prediction.next else {
                return (Outcome::Invalid, 0);
            };
            let n = (prediction.point - chain.disk_center(disk)).normalized();
            let u = flyer.v.normalized();
            if u.dot(n).abs() < cfg.min_cos_incidence {
                return (Outcome::Invalid, 0);
            }
            if cfg.policy == LegPolicy::ReturnMap && (leg.walls != 1 || Some(disk) != origin_disk) {
                return (Outcome::Invalid, 0);
            }
            (3u8, disk).hash(&mut h);
            Outcome::Disk {
                disk,
                theta: wrap_angle(n.angle()),
                tangential: u.dot(disk_tangent(n)),
                point: prediction.point,
            }
        }
        Stop::Exit { side, point, .. } => {
            if cfg.policy == LegPolicy::ReturnMap && leg.walls != 0 {
                return (Outcome::Invalid, 0);
            }
            (4u8, side == Side::Left).hash(&mut h);
            Outcome::Exit { side, y: point.y }
        }
        Stop::Horizon { .. } => Outcome::Invalid,
    };
    (out, h.finish())
}

pub fn shoot(chain: &Chain, cfg: &PlannerConfig, origin: Origin, alpha: f64) -> Shot {
    let (q, dir, cell) = departure(chain, origin, alpha);
    let od = match origin {
        Origin::Disk { disk, .. } => Some(disk),
        Origin::Bath { .. } => None,
    };
    let (outcome, signature) = shoot_from(chain, cfg, q, cell, dir, od);
    Shot {
        alpha,
        outcome,
        signature,
    }
}

/// Caching route planner for one chain.
pub struct RoutePlanner {
    chain: Chain,
    cfg: PlannerConfig,
    cache: HashMap<(usize, usize), Vec<Shot>>,
    /// Searches without banned bins, by encoded query.
    routes: HashMap<Vec<u64>, Option<Route>>,
    refined: Option<Box<RoutePlanner>>,
}

type Node = (usize, usize);

fn query_key(starts: &[Origin], allowed: &[bool], goal: Goal) -> Vec<u64> {
    let mut k = Vec::with_capacity(3 * starts.len() + allowed.len() + 3);
    for o in starts {
        match *o {
            Origin::Disk { disk, theta } => k.extend([0, disk as u64, theta.to_bits()]),
            Origin::Bath { side, y } => k.extend([1, side as u64, y.to_bits()]),
        }
    }
    k.extend(allowed.iter().map(|&a| 2 + a as u64));
    match goal {
        Goal::Exit { left, right } => k.extend([4, left as u64, right as u64]),
        Goal::Radial { disk } => k.extend([5, disk as u64, 0]),
        Goal::Point { disk, theta } => k.extend([6, disk as u64, theta.to_bits()]),
    }
    k
}

impl RoutePlanner {
    pub fn new(chain: Chain, cfg: PlannerConfig) -> Self {
        RoutePlanner {
            chain,
            cfg,
            cache: HashMap::new(),
            routes: HashMap::new(),
            refined: None,
        }
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn config(&self) -> &PlannerConfig {
        &self.cfg
    }

    pub fn bin_theta(&self, bin: usize) -> f64 {
        (bin as f64 + 0.5) * TAU / self.cfg.bins as f64
    }

    pub fn bin_of(&self, theta: f64) -> usize {
        ((wrap_angle(theta) / TAU * self.cfg.bins as f64) as usize).min(self.cfg.bins - 1)
    }

    fn fan(&self, origin: Origin) -> Vec<Shot> {
        let n = self.cfg.alpha_samples;
        let m = self.cfg.max_alpha;
        (0..n)
            .map(|i| {
                let alpha = -m + 2.0 * m * i as f64 / (n - 1) as f64;
                shoot(&self.chain, &self.cfg, origin, alpha)
            })
            .collect()
    }

    fn node_shots(&mut self, node: Node) -> &[Shot] {
        if !self.cache.contains_key(&node) {
            let origin = Origin::Disk {
                disk: node.0,
                theta: self.bin_theta(node.1),
            };
            let shots = self.fan(origin);
            self.cache.insert(node, shots);
        }
        &self.cache[&node]
    }

    /// Edges out of a fan: reachable bins (with the most central bracket
    /// for each) and, if present, a hop achieving `goal`.
    fn edges(&self, origin: Origin, shots: &[Shot], allowed: &[bool], goal: Goal) -> (Vec<Hop>, Option<Hop>) {
        let bins = self.cfg.bins;
        let mut best: HashMap<Node, (f64, Hop)> = HashMap::new();
        let mut goal_hop: Option<(f64, Hop)> = None;
        for (i, s) in shots.iter().enumerate() {
            if let (Goal::Exit { left, right }, Outcome::Exit { side, y }) = (goal, s.outcome) {
                let y_frac = y.abs() / self.chain.cell().a();
                let ok = match side {
                    Side::Left => left,
                    Side::Right => right,
                };
                if ok && goal_hop.as_ref().is_none_or(|(score, _)| y_frac < *score) {
                    goal_hop = Some((
                        y_frac,
                        Hop {
                            origin,
                            alpha_lo: s.alpha,
                            alpha_hi: s.alpha,
                            target: HopTarget::Exit { side },
                            signature: s.signature,
                        },
                    ));
                }
            }
            let Some(t) = shots.get(i + 1) else { continue };
            if s.signature != t.signature {
                continue;
            }
            let (
                Outcome::Disk { disk: d0, theta: th0, tangential: g0, .. },
                Outcome::Disk { disk: d1, theta: th1, tangential: g1, .. },
            ) = (s.outcome, t.outcome)
            else {
                continue;
            };
            if d0 != d1 {
                continue;
            }
            if let Goal::Radial { disk } = goal {
                if d0 == disk && g0.signum() != g1.signum() {
                    // widen to the whole run with the same combinatorics
                    let (mut i0, mut i1) = (i, i + 1);
                    while i0 > 0 && shots[i0 - 1].signature == s.signature {
                        i0 -= 1;
                    }
                    while i1 + 1 < shots.len() && shots[i1 + 1].signature == s.signature {
                        i1 += 1;
                    }
                    let tan = |k: usize| match shots[k].outcome {
                        Outcome::Disk { tangential, .. } => tangential,
                        _ => 0.0,
                    };
                    let (mut a, mut b) = (i0, i1);
                    if tan(a).signum() == tan(b).signum() {
                        a = i;
                        b = i + 1;
                    }
                    let score = tan(a).abs().min(tan(b).abs());
                    if goal_hop.as_ref().is_none_or(|(sc, _)| score > *sc) {
                        goal_hop = Some((
                            score,
                            Hop {
                                origin,
                                alpha_lo: shots[a].alpha,
                                alpha_hi: shots[b].alpha,
                                target: HopTarget::Radial { disk },
                                signature: s.signature,
                            },
                        ));
                    }
                }
            }
            if let Goal::Point { disk, theta } = goal {
                let span = wrap_signed(th1 - th0);
                let off = wrap_signed(theta - th0);
                if d0 == disk && span != 0.0 && span.abs() < 0.5 && off.signum() == span.signum() {
                    let c = (off / span).min(1.0 - off / span);
                    if c > 0.02 && goal_hop.as_ref().is_none_or(|(sc, _)| c > *sc) {
                        goal_hop = Some((
                            c,
                            Hop {
                                origin,
                                alpha_lo: s.alpha,
                                alpha_hi: t.alpha,
                                target: HopTarget::Disk {
                                    disk,
                                    bin: self.bin_of(theta),
                                    theta,
                                },
                                signature: s.signature,
                            },
                        ));
                    }
                }
            }
            if !allowed[d0] {
                continue;
            }
            let span = wrap_signed(th1 - th0);
            if span.abs() > 0.5 || span == 0.0 {
                continue;
            }
            let (lo, hi) = if span > 0.0 { (th0, th0 + span) } else { (th1, th1 - span) };
            let width = (hi - lo).abs();
            let first = ((lo / TAU * bins as f64 - 0.5).floor() as i64) - 1;
            let last = ((hi / TAU * bins as f64 - 0.5).ceil() as i64) + 1;
            for k in first..=last {
                let th = (k as f64 + 0.5) * TAU / bins as f64;
                if th <= lo || th >= hi {
                    continue;
                }
                let centrality = (th - lo).min(hi - th) / width;
                if centrality < 0.02 {
                    continue;
                }
                let bin = k.rem_euclid(bins as i64) as usize;
                let node = (d0, bin);
                if best.get(&node).is_none_or(|(c, _)| centrality > *c) {
                    best.insert(
                        node,
                        (
                            centrality,
                            Hop {
                                origin,
                                alpha_lo: s.alpha,
                                alpha_hi: t.alpha,
                                target: HopTarget::Disk {
                                    disk: d0,
                                    bin,
                                    theta: wrap_angle(th),
                                },
                                signature: s.signature,
                            },
                        ),
                    );
                }
            }
        }
        let mut hops: Vec<(Node, f64, Hop)> = best.into_iter().map(|(n, (c, h))| (n, c, h)).collect();
        hops.sort_by_key(|a| a.0);
        (hops.into_iter().map(|(_, _, h)| h).collect(), goal_hop.map(|(_, h)| h))
    }

    /// Fewest-hop route from any of `starts` to `goal`, landing only on
    /// disks with `allowed[d]`. Bins in `banned` are never used.
    pub fn route(&mut self, starts: &[Origin], allowed: &[bool], goal: Goal, banned: &[Node]) -> Result<Route, ControlError> {
        match self.route_here(starts, allowed, goal, banned) {
            Some(r) => Ok(r),
            None => {
                if self.cfg.bins >= 4096 {
                    return Err(ControlError::SearchExhausted);
                }
                let mut cfg = self.cfg.clone();
                cfg.bins *= 4;
                let chain = self.chain.clone();
                let refined = self.refined.get_or_insert_with(|| Box::new(RoutePlanner::new(chain, cfg)));
                let banned: Vec<Node> = banned.iter().flat_map(|&(d, b)| (0..4).map(move |k| (d, 4 * b + k))).collect();
                refined.route(starts, allowed, goal, &banned)
            }
        }
    }

    /// Route search at the current resolution only.
    pub fn route_here_only(&mut self, starts: &[Origin], allowed: &[bool], goal: Goal) -> Option<Route> {
        self.route_here(starts, allowed, goal, &[])
    }

    fn route_here(&mut self, starts: &[Origin], allowed: &[bool], goal: Goal, banned: &[Node]) -> Option<Route> {
        if !banned.is_empty() {
            return self.search(starts, allowed, goal, banned);
        }
        let key = query_key(starts, allowed, goal);
        if let Some(r) = self.routes.get(&key) {
            return r.clone();
        }
        let r = self.search(starts, allowed, goal, banned);
        self.routes.insert(key, r.clone());
        r
    }

    fn search(&mut self, starts: &[Origin], allowed: &[bool], goal: Goal, banned: &[Node]) -> Option<Route> {
        let mut parent: HashMap<Node, (Option<Node>, Hop)> = HashMap::new();
        let mut queue: VecDeque<(Node, usize)> = VecDeque::new();
        let mut start_goal: Option<Hop> = None;
        for &o in starts {
            let shots = self.fan(o);
            let (hops, g) = self.edges(o, &shots, allowed, goal);
            if start_goal.is_none() {
                start_goal = g;
            }
            for h in hops {
                if let HopTarget::Disk { disk, bin, .. } = h.target {
                    let node = (disk, bin);
                    if banned.contains(&node) || parent.contains_key(&node) {
                        continue;
                    }
                    parent.insert(node, (None, h));
                    queue.push_back((node, 1));
                }
            }
        }
        if let Some(g) = start_goal {
            return Some(Route { hops: vec![g] });
        }
        while let Some((node, depth)) = queue.pop_front() {
            if depth >= self.cfg.max_hops {
                continue;
            }
            let origin = Origin::Disk {
                disk: node.0,
                theta: self.bin_theta(node.1),
            };
            let shots = self.node_shots(node).to_vec();
            let (hops, g) = self.edges(origin, &shots, allowed, goal);
            if let Some(g) = g {
                let mut out = vec![g];
                let mut cur = Some(node);
                while let Some(n) = cur {
                    let (p, h) = parent[&n];
                    out.push(h);
                    cur = p;
                }
                out.reverse();
                return Some(Route { hops: out });
            }
            for h in hops {
                if let HopTarget::Disk { disk, bin, .. } = h.target {
                    let next = (disk, bin);
                    if banned.contains(&next) || parent.contains_key(&next) {
                        continue;
                    }
                    parent.insert(next, (Some(node), h));
                    queue.push_back((next, depth + 1));
                }
            }
        }
        None
    }

    /// Bath origins of one side.
    pub fn bath_origins(&self, side: Side) -> Vec<Origin> {
        let a = self.chain.cell().a();
        self.cfg
            .bath_offsets
            .iter()
            .map(|f| Origin::Bath { side, y: f * a })
            .collect()
    }
}
