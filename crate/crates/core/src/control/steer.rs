//! Closed-loop synthesis: fly each particle exactly, and before every disk
//! hit spin the disk so the particle leaves in the direction we need.
//!
//! Disks next to a bath are spun by drivers. Other disks are spun by a
//! controller that travels from the nearer bath, steered in turn by the same
//! machinery on the disks it crosses, and scaled in speed until it fits in
//! its time window.

use std::f64::consts::PI;

use log::debug;

use crate::dynamics::flight::{fly, Flyer, Next, Prediction, Stop};
use crate::dynamics::{Batch, DiskState, EventKind, Injection, InjectionSchedule, Role, SystemState};
use crate::geometry::angular::wrap_signed;
use crate::geometry::{Chain, Side, Vec2};
use crate::tolerance::Tolerances;

use super::aim::{solve, solve_near, Aim, Launch};
use super::driver::{default_delta_hat, first_driver_omega, synth_driver};
use super::graph::{Goal, Hop, HopTarget, LegPolicy, Origin, PlannerConfig, Route, RoutePlanner};
use super::path::{follow_config, AdmissiblePath, VertexKind};
use super::plan::PlanState;
use super::{required_disk_omega, ControlError};

/// Largest nesting of controllers inside controllers.
const MAX_DEPTH: usize = 6;
/// Speed doublings tried per controller.
const MAX_DOUBLINGS: u32 = 40;
/// Iterations of the two-shot angle correction.
const TWO_SHOT_ITERS: usize = 30;
/// Angle accuracy of the two-shot correction.
const PHI_TOL: f64 = 1e-11;
/// Accepted angle error for disks that must return to a previous state.
pub const PHI_FLOOR: f64 = 1e-9;
/// Accepted angle error for a disk set to a new target.
pub const TARGET_PHI_FLOOR: f64 = 1e-7;

/// Where a steered particle is.
#[derive(Debug, Clone, Copy)]
enum At {
    /// About to enter from a bath.
    Bath { side: Side, t: f64, speed: f64, role: Role },
    /// About to hit a disk.
    Disk { flyer: Flyer, pred: Prediction },
}

#[derive(Debug, Clone, Copy)]
pub(crate) enum HopEnd {
    Disk { flyer: Flyer, pred: Prediction },
    Exit { t: f64 },
}

/// Result of spinning a disk: when the spinning hit happens and the value
/// it really left on the disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Setting {
    pub hit: f64,
    pub omega: f64,
}

/// Reusable synthesizer for one chain. Keeps the route cache warm across
/// calls.
pub struct Synthesizer {
    chain: Chain,
    tol: Tolerances,
    planner: RoutePlanner,
    /// Finer fans and longer legs, searched only for driver-only routes.
    rich: RoutePlanner,
    /// Smallest speed doubling for the next controller at a given depth,
    /// so repeated attempts keep one speed scale.
    pin: Option<(usize, u32)>,
    /// Doubling used by the last successful controller.
    last_doubling: u32,
    /// Disks being set by an enclosing two-shot; nested actions avoid them.
    protected: Vec<usize>,
}

fn rich_config() -> PlannerConfig {
    PlannerConfig {
        alpha_samples: 4096,
        opening_margin: 0.97,
        policy: LegPolicy::Chain { max_walls: 10 },
        ..PlannerConfig::default()
    }
}

fn disk_of(p: &Prediction) -> usize {
    match p.next {
        Next::Disk { disk } => disk,
        _ => usize::MAX,
    }
}

impl Synthesizer {
    pub fn new(chain: Chain, tol: Tolerances) -> Self {
        let planner = RoutePlanner::new(chain.clone(), PlannerConfig::default());
        let rich = RoutePlanner::new(chain.clone(), rich_config());
        Synthesizer {
            chain,
            tol,
            planner,
            rich,
            pin: None,
            last_doubling: 0,
            protected: Vec::new(),
        }
    }

    pub fn chain(&self) -> &Chain {
        &self.chain
    }

    pub fn tolerances(&self) -> &Tolerances {
        &self.tol
    }

    pub fn planner(&mut self) -> &mut RoutePlanner {
        &mut self.planner
    }

    /// Disks strictly between the bath on `side` and disk `m`.
    fn between(&self, side: Side, m: usize) -> Vec<bool> {
        (0..self.chain.n_cells())
            .map(|d| match side {
                Side::Left => d < m,
                Side::Right => d > m,
            })
            .collect()
    }

    fn default_side(&self, disk: usize) -> Side {
        let n = self.chain.n_cells();
        if disk <= n - 1 - disk {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Bath side whose controllers have the longest free time before a hit
    /// on `disk`: the one whose crossed disks were hit least recently.
    fn widest_side(&self, plan: &PlanState, disk: usize) -> Side {
        let n = self.chain.n_cells();
        if disk == 0 || disk == n - 1 {
            return self.default_side(disk);
        }
        let blocked = |r: std::ops::Range<usize>| self.protected.iter().any(|&p| p != disk && r.contains(&p));
        let (bl, br) = (blocked(0..disk), blocked(disk + 1..n));
        if bl != br {
            return if bl { Side::Right } else { Side::Left };
        }
        let left = plan.frontier_over(0..=disk);
        let right = plan.frontier_over(disk..n);
        if left < right || (left == right && self.default_side(disk) == Side::Left) {
            Side::Left
        } else {
            Side::Right
        }
    }

    /// Make `disk` spin at `omega` through a hit inside `(lo, hi)`, with
    /// every particle involved gone before `hi`.
    #[allow(clippy::too_many_arguments)]
    pub fn set_omega(
        &mut self,
        plan: &mut PlanState,
        disk: usize,
        omega: f64,
        lo: f64,
        hi: f64,
        via: Option<Side>,
        bound: f64,
        depth: usize,
    ) -> Result<Setting, ControlError> {
        let side = via.unwrap_or_else(|| self.widest_side(plan, disk));
        if disk == self.chain.bath_cell(side) {
            self.driver(plan, side, omega, lo, hi, bound)
        } else {
            self.controller(plan, disk, side, omega, lo, hi, depth)
        }
    }

    /// One driver from `side` in `(lo, hi)`.
    pub fn driver(&mut self, plan: &mut PlanState, side: Side, omega: f64, lo: f64, hi: f64, bound: f64) -> Result<Setting, ControlError> {
        let disk = self.chain.bath_cell(side);
        let lo = lo.max(plan.frontier(disk));
        if !(hi - lo > 1e-9 * hi.abs().max(1.0)) {
            return Err(ControlError::WindowTooShort);
        }
        let a = self.chain.cell().a();
        let mut last = ControlError::WindowTooShort;
        for frac in [0.5, 0.45, 0.55, 0.4, 0.6, 0.3] {
            let tau = lo + frac * (hi - lo);
            let delta = hi - tau;
            let current = plan.omega_at(disk, tau);
            let dh = default_delta_hat(a, delta, current, omega, bound);
            let mut trial = plan.clone();
            let id = trial.new_id();
            let dp = synth_driver(&self.chain, side, current, omega, delta, Some(dh), tau, id)?;
            match self.fly_driver(&mut trial, dp.injection, hi) {
                Ok(s) => {
                    trial.push_batch(Batch {
                        disk,
                        lo,
                        served: hi,
                        omega,
                        injection_times: vec![tau],
                    });
                    *plan = trial;
                    return Ok(s);
                }
                Err(e @ ControlError::SchedulingConflict(_)) => last = e,
                Err(e) => return Err(e),
            }
        }
        Err(last)
    }

    fn fly_driver(&self, plan: &mut PlanState, inj: Injection, hi: f64) -> Result<Setting, ControlError> {
        let f = Flyer {
            id: inj.id,
            role: inj.role,
            cell: self.chain.bath_cell(inj.side),
            q: Vec2::new(self.chain.bath_x(inj.side), inj.y),
            t0: inj.t,
            v: inj.v,
        };
        let leg = fly(&self.chain, &f, &self.tol, 0, f64::INFINITY).map_err(|_| ControlError::NoLineOfSight)?;
        let (flyer, pred) = match leg.stop {
            Stop::Disk { flyer, prediction } if disk_of(&prediction) == f.cell => (flyer, prediction),
            _ => return Err(ControlError::NoLineOfSight),
        };
        let (out, ev) = plan.commit_hit(&self.chain, &flyer, &pred, &self.tol)?;
        let back = fly(&self.chain, &out, &self.tol, 0, f64::INFINITY).map_err(|_| ControlError::NoLineOfSight)?;
        match back.stop {
            Stop::Exit { side, t, .. } if side == inj.side => {
                if !(t < hi) {
                    return Err(ControlError::WindowTooShort);
                }
                plan.note_exit(t);
            }
            _ => return Err(ControlError::NoLineOfSight),
        }
        plan.push_injection(inj);
        Ok(Setting {
            hit: pred.t,
            omega: post_omega(&ev),
        })
    }

    /// A controller from `side` landing on disk `m` with tangential velocity
    /// `omega`, then leaving the chain, all inside `(lo, hi)`.
    #[allow(clippy::too_many_arguments)]
    pub fn controller(
        &mut self,
        plan: &mut PlanState,
        m: usize,
        side: Side,
        omega: f64,
        lo: f64,
        hi: f64,
        depth: usize,
    ) -> Result<Setting, ControlError> {
        if depth >= MAX_DEPTH {
            return Err(ControlError::LambdaOverflow);
        }
        let allowed = self.between(side, m);
        let touched = (0..self.chain.n_cells()).filter(|&d| allowed[d] || d == m);
        let lo = lo.max(plan.frontier_over(touched));
        let window = hi - lo;
        if !(window > 1e-9 * hi.abs().max(1.0)) {
            return Err(ControlError::WindowTooShort);
        }
        let starts = self.planner.bath_origins(side);
        // prefer routes that only need drivers on the way
        let bath = self.chain.bath_cell(side);
        let easy: Vec<bool> = (0..self.chain.n_cells()).map(|d| allowed[d] && d == bath).collect();
        let goal = Goal::Radial { disk: m };
        let (route, cfg) = if let Some(r) = self.planner.route_here_only(&starts, &easy, goal) {
            (r, self.planner.config().clone())
        } else if let Some(r) = self.rich.route_here_only(&self.rich.bath_origins(side), &easy, goal) {
            (r, self.rich.config().clone())
        } else {
            (self.planner.route(&starts, &allowed, goal, &[])?, self.planner.config().clone())
        };
        let est = 4.0 * self.chain.width() * (route.hops.len() as f64 + 1.0);
        let s0 = 3.0 * est / window;
        let mut last = ControlError::LambdaOverflow;
        let first = match self.pin {
            Some((d, k)) if d == depth => k,
            _ => 0,
        };
        for k in first..=MAX_DOUBLINGS {
            let speed = s0 * 2f64.powi(k as i32);
            let mut trial = plan.clone();
            match self.try_controller(&mut trial, &route, &cfg, m, side, omega, lo, hi, speed, &allowed, depth) {
                Ok(s) => {
                    *plan = trial;
                    self.last_doubling = k;
                    return Ok(s);
                }
                Err(ControlError::Invalid(msg)) => return Err(ControlError::Invalid(msg)),
                Err(e) => {
                    debug!("controller for disk {m} at speed {speed:.3e} failed: {e}");
                    last = e;
                }
            }
        }
        Err(match last {
            ControlError::RootNotBracketed => ControlError::RootNotBracketed,
            _ => ControlError::LambdaOverflow,
        })
    }

    #[allow(clippy::too_many_arguments)]
    fn try_controller(
        &mut self,
        plan: &mut PlanState,
        route: &Route,
        cfg: &PlannerConfig,
        m: usize,
        side: Side,
        omega: f64,
        lo: f64,
        hi: f64,
        speed: f64,
        allowed: &[bool],
        depth: usize,
    ) -> Result<Setting, ControlError> {
        let tau = lo + 0.05 * (hi - lo);
        let mut at = At::Bath {
            side,
            t: tau,
            speed,
            role: Role::Controller,
        };
        let n = route.hops.len();
        for (i, hop) in route.hops.iter().enumerate() {
            let vt = if i + 1 == n { Some(omega) } else { None };
            match self.exec_hop(plan, at, hop, cfg, vt, lo, hi, depth)? {
                HopEnd::Disk { flyer, pred } => at = At::Disk { flyer, pred },
                HopEnd::Exit { .. } => return Err(ControlError::AimFailed),
            }
        }
        let At::Disk { flyer, pred } = at else {
            return Err(ControlError::AimFailed);
        };
        if disk_of(&pred) != m {
            return Err(ControlError::AimFailed);
        }
        let (out, ev) = plan.commit_hit(&self.chain, &flyer, &pred, &self.tol)?;
        let setting = Setting {
            hit: pred.t,
            omega: post_omega(&ev),
        };
        plan.push_batch(Batch {
            disk: m,
            lo,
            served: hi,
            omega,
            injection_times: vec![tau],
        });
        self.leave(plan, out, allowed, lo, hi, depth)?;
        Ok(setting)
    }

    /// Steer a particle that just left a disk out of the chain, landing
    /// only on `allowed` disks.
    fn leave(&mut self, plan: &mut PlanState, out: Flyer, allowed: &[bool], lo: f64, hi: f64, depth: usize) -> Result<f64, ControlError> {
        let leg = fly(&self.chain, &out, &self.tol, 64, f64::INFINITY).map_err(ControlError::Undefined)?;
        let (mut flyer, mut pred) = match leg.stop {
            Stop::Exit { t, .. } => {
                if !(t < hi) {
                    return Err(ControlError::WindowTooShort);
                }
                plan.note_exit(t);
                return Ok(t);
            }
            Stop::Disk { flyer, prediction } => (flyer, prediction),
            Stop::Horizon { .. } => return Err(ControlError::AimFailed),
        };
        loop {
            let k = disk_of(&pred);
            if !allowed[k] {
                return Err(ControlError::AimFailed);
            }
            if !(pred.t < hi) {
                return Err(ControlError::WindowTooShort);
            }
            let theta = (pred.point - self.chain.disk_center(k)).angle();
            let route = self.planner.route(&[Origin::Disk { disk: k, theta }], allowed, Goal::any_exit(), &[])?;
            let mut at = At::Disk { flyer, pred };
            let cfg = self.planner.config().clone();
            for hop in &route.hops {
                match self.exec_hop(plan, at, hop, &cfg, None, lo, hi, depth)? {
                    HopEnd::Disk { flyer, pred } => at = At::Disk { flyer, pred },
                    HopEnd::Exit { t } => return Ok(t),
                }
            }
            match at {
                At::Disk { flyer: f, pred: p } => {
                    flyer = f;
                    pred = p;
                }
                At::Bath { .. } => return Err(ControlError::AimFailed),
            }
        }
    }

    /// Realize one hop: choose the departure angle, spin the departure disk
    /// (or inject), and fly to the next disk or exit.
    #[allow(clippy::too_many_arguments)]
    fn exec_hop(
        &mut self,
        plan: &mut PlanState,
        at: At,
        hop: &Hop,
        cfg: &PlannerConfig,
        vt: Option<f64>,
        lo: f64,
        hi: f64,
        depth: usize,
    ) -> Result<HopEnd, ControlError> {
        let chain = self.chain.clone();
        let (launch, v_n, base_speed) = match at {
            At::Bath { speed, .. } => (Launch::from_origin(&chain, hop.origin), 0.0, speed),
            At::Disk { flyer, pred } => {
                let disk = disk_of(&pred);
                let n = (pred.point - chain.disk_center(disk)).normalized();
                (Launch::at_disk(&chain, disk, pred.point), -flyer.v.dot(n), 0.0)
            }
        };
        let from_bath = matches!(at, At::Bath { .. });
        let speed = move |a: f64| if from_bath { base_speed } else { v_n / a.cos() };
        let aim = match (hop.target, vt) {
            (HopTarget::Radial { disk }, Some(vt)) => Aim::Tangential { disk, vt },
            (HopTarget::Disk { disk, theta, .. }, None) => Aim::Disk { disk, theta },
            (HopTarget::Exit { .. }, None) => Aim::Exit { side: Side::Left, y: 0.0 },
            _ => return Err(ControlError::Invalid("hop target does not match the request".into())),
        };
        let alpha = match aim {
            Aim::Exit { .. } => hop.alpha_lo,
            _ => solve(&chain, cfg, &launch, aim, hop.alpha_lo, hop.alpha_hi, hop.signature, &speed).or_else(|e| match aim {
                Aim::Disk { .. } => solve_near(&chain, cfg, &launch, aim, 0.5 * (hop.alpha_lo + hop.alpha_hi), &speed),
                _ => Err(e),
            })?,
        };
        let dir = launch.direction(alpha);
        let out = match at {
            At::Bath { side, t, speed, role } => {
                let y = launch.q.y;
                let id = plan.new_id();
                let inj = Injection {
                    t,
                    id,
                    side,
                    y,
                    v: dir * speed,
                    role,
                };
                plan.push_injection(inj);
                Flyer {
                    id,
                    role,
                    cell: launch.cell,
                    q: launch.q,
                    t0: t,
                    v: inj.v,
                }
            }
            At::Disk { flyer, pred } => {
                let disk = disk_of(&pred);
                let w = required_disk_omega(v_n, alpha)?;
                if plan.omega_at(disk, pred.t) != w {
                    self.set_omega(plan, disk, w, lo, pred.t, None, 0.0, depth + 1)?;
                }
                plan.commit_hit(&chain, &flyer, &pred, &self.tol)?.0
            }
        };
        let leg = fly(&chain, &out, &self.tol, 64, f64::INFINITY).map_err(|_| ControlError::AimFailed)?;
        match (leg.stop, hop.target) {
            (Stop::Disk { flyer, prediction }, HopTarget::Disk { disk, .. } | HopTarget::Radial { disk }) if disk_of(&prediction) == disk => {
                if !(prediction.t < hi) {
                    return Err(ControlError::WindowTooShort);
                }
                Ok(HopEnd::Disk { flyer, pred: prediction })
            }
            (Stop::Exit { side, t, .. }, HopTarget::Exit { side: want }) if side == want => {
                if !(t < hi) {
                    return Err(ControlError::WindowTooShort);
                }
                plan.note_exit(t);
                Ok(HopEnd::Exit { t })
            }
            _ => Err(ControlError::AimFailed),
        }
    }

    /// Steer a free particle about to hit a disk along one route hop.
    pub(crate) fn tracer_hop(&mut self, plan: &mut PlanState, flyer: Flyer, pred: Prediction, hop: &Hop, lo: f64) -> Result<HopEnd, ControlError> {
        let cfg = self.planner.config().clone();
        self.exec_hop(plan, At::Disk { flyer, pred }, hop, &cfg, None, lo, f64::INFINITY, 0)
    }

    /// Two hits on `disk` inside `(lo, hi)` leaving it at `target` at time
    /// `t_end` (no later hits on `disk` are planned).
    #[allow(clippy::too_many_arguments)]
    pub fn set_state(
        &mut self,
        plan: &mut PlanState,
        disk: usize,
        target: DiskState,
        lo: f64,
        hi: f64,
        t_end: f64,
        via: Option<Side>,
        depth: usize,
        floor: f64,
    ) -> Result<(), ControlError> {
        let lo = lo.max(plan.frontier(disk));
        let now = plan.disk_at(disk, t_end);
        if plan.frontier(disk) < t_end && now.omega == target.omega && wrap_signed(now.phi - target.phi) == 0.0 {
            return Ok(());
        }
        let mid = 0.5 * (lo + hi);
        let half = mid - lo;
        if !(half > 0.0) {
            return Err(ControlError::WindowTooShort);
        }
        let bound = 4.0 * PI / half;
        let (h1, h2) = (0.5 * (lo + mid), 0.5 * (mid + hi));
        let w1 = first_driver_omega(
            plan.phi_at(disk, lo),
            plan.omega_at(disk, lo),
            lo,
            h1,
            h2,
            t_end,
            target.omega,
            target.phi,
        );
        self.protected.push(disk);
        let r = self.two_shot(plan, disk, target, lo, hi, t_end, via, depth, floor, bound, w1);
        self.protected.pop();
        r
    }

    #[allow(clippy::too_many_arguments)]
    fn two_shot(
        &mut self,
        plan: &mut PlanState,
        disk: usize,
        target: DiskState,
        lo: f64,
        hi: f64,
        t_end: f64,
        via: Option<Side>,
        depth: usize,
        floor: f64,
        bound: f64,
        mut w1: f64,
    ) -> Result<(), ControlError> {
        let mid = 0.5 * (lo + hi);
        let (mut k1, mut k2) = (0, 0);
        let mut best: Option<(f64, PlanState)> = None;
        let mut stall = 0;
        for _ in 0..TWO_SHOT_ITERS {
            let mut trial = plan.clone();
            self.pin = Some((depth, k1));
            let s1 = self.set_omega(&mut trial, disk, w1, lo, mid, via, bound, depth);
            k1 = k1.max(self.last_doubling);
            self.pin = Some((depth, k2));
            let s1 = s1?;
            let s2 = self.set_omega(&mut trial, disk, target.omega, mid, hi, via, bound, depth);
            k2 = k2.max(self.last_doubling);
            self.pin = None;
            let s2 = s2?;
            let (h1, h2) = (s1.hit, s2.hit);
            let err = wrap_signed(target.phi - trial.phi_at(disk, t_end));
            debug!("two-shot on disk {disk}: hits {h1:.6} {h2:.6}, angle error {err:.3e}");
            if err.abs() < PHI_TOL {
                *plan = trial;
                return Ok(());
            }
            if best.as_ref().is_none_or(|(e, _): &(f64, PlanState)| err.abs() < *e) {
                best = Some((err.abs(), trial));
                stall = 0;
            } else {
                stall += 1;
                if stall >= 3 {
                    break;
                }
            }
            if !(h2 - h1 > 1e-12) {
                return Err(ControlError::DegenerateWindow);
            }
            w1 = s1.omega + err / (h2 - h1);
        }
        match best {
            Some((e, trial)) if e < floor => {
                *plan = trial;
                Ok(())
            }
            _ => Err(ControlError::DegenerateWindow),
        }
    }

    /// Steer a tracer along `path` from its opening, starting at `t_start`
    /// with speed `v0`. Returns the plan and the exit time.
    pub fn follow(&mut self, plan: &mut PlanState, path: &AdmissiblePath, v0: f64, t_start: f64) -> Result<FollowResult, ControlError> {
        let chain = self.chain.clone();
        let side = path
            .starts_at_opening(&chain)
            .ok_or_else(|| ControlError::Invalid("path must start in an opening".into()))?;
        if !(v0 > 0.0) || !v0.is_finite() {
            return Err(ControlError::Invalid("speed must be positive".into()));
        }
        let start = path.vertices[0];
        let id = plan.new_id();
        let inj = Injection {
            t: t_start,
            id,
            side,
            y: start.point.y,
            v: path.directions[0] * v0,
            role: Role::Tracer,
        };
        plan.push_injection(inj);
        let mut f = Flyer {
            id,
            role: Role::Tracer,
            cell: start.cell,
            q: start.point,
            t0: t_start,
            v: inj.v,
        };
        let cfg = follow_config();
        let mut visited = vec![start.point];
        let mut floor = t_start;
        let mut i = 0;
        loop {
            let leg = fly(&chain, &f, &self.tol, 64, f64::INFINITY).map_err(ControlError::Undefined)?;
            for e in &leg.events {
                if let EventKind::WallHit { .. } = e.kind {
                    visited.push(e.point);
                }
            }
            i += leg.walls;
            i += 1;
            match leg.stop {
                Stop::Exit { t, point, side, .. } => {
                    visited.push(point);
                    plan.note_exit(t);
                    return Ok(FollowResult {
                        exit_time: t,
                        exit_side: side,
                        visited,
                    });
                }
                Stop::Horizon { .. } => return Err(ControlError::AimFailed),
                Stop::Disk { flyer, prediction } => {
                    visited.push(prediction.point);
                    let disk = disk_of(&prediction);
                    if path.vertices.get(i).map(|v| (v.kind, v.cell)) != Some((VertexKind::Disk, disk)) {
                        return Err(ControlError::AimFailed);
                    }
                    let j = (i + 1..path.vertices.len())
                        .find(|&j| path.vertices[j].kind != VertexKind::Wall)
                        .ok_or(ControlError::AimFailed)?;
                    let target = path.vertices[j];
                    let aim = match target.kind {
                        VertexKind::Disk => Aim::Disk {
                            disk: target.cell,
                            theta: (target.point - chain.disk_center(target.cell)).angle(),
                        },
                        _ => Aim::Exit {
                            side: path.end_side(&chain).ok_or(ControlError::AimFailed)?,
                            y: target.point.y,
                        },
                    };
                    let launch = Launch::at_disk(&chain, disk, prediction.point);
                    let n = (prediction.point - chain.disk_center(disk)).normalized();
                    let d = path.directions[i];
                    let et = crate::dynamics::collision::disk_tangent(n);
                    let guess = d.dot(et).atan2(d.dot(n));
                    let one = |_: f64| 1.0;
                    let alpha = solve_near(&chain, &cfg, &launch, aim, guess, &one)?;
                    let v_n = -flyer.v.dot(n);
                    let w = required_disk_omega(v_n, alpha)?;
                    if plan.omega_at(disk, prediction.t) != w {
                        self.set_omega(plan, disk, w, floor, prediction.t, None, 0.0, 0)?;
                    }
                    f = plan.commit_hit(&chain, &flyer, &prediction, &self.tol)?.0;
                    floor = prediction.t;
                }
            }
        }
    }
}

fn post_omega(ev: &crate::dynamics::Event) -> f64 {
    match ev.kind {
        EventKind::DiskHit { omega_post, .. } => omega_post,
        _ => f64::NAN,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FollowResult {
    pub exit_time: f64,
    pub exit_side: Side,
    /// Every wall and disk point actually visited, with the start and end.
    pub visited: Vec<Vec2>,
}

fn plan_for(state: &SystemState) -> PlanState {
    PlanState::new(state.t, state.disks.clone(), state.next_free_id())
}

/// Schedule that brings the disk next to the bath on `side` from its state
/// at `state.t` to `target` at `state.t + delta` with two drivers.
pub fn set_disk_state(state: &SystemState, side: Side, target: DiskState, delta: f64, tol: &Tolerances) -> Result<InjectionSchedule, ControlError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(ControlError::InfeasibleDelta { delta });
    }
    if !target.phi.is_finite() || !target.omega.is_finite() {
        return Err(ControlError::Invalid("target must be finite".into()));
    }
    let mut s = Synthesizer::new(state.chain.clone(), *tol);
    let mut plan = plan_for(state);
    let disk = state.chain.bath_cell(side);
    let t_end = state.t + delta;
    s.set_state(&mut plan, disk, target, state.t, t_end, t_end, Some(side), 0, PHI_FLOOR)?;
    Ok(plan.finish())
}

/// Schedule that brings disk `j` to `target` at `state.t + delta`, entering
/// from `side`, and restores every disk it disturbs to its free evolution.
pub fn control_disk(
    synth: &mut Synthesizer,
    state: &SystemState,
    j: usize,
    target: DiskState,
    delta: f64,
    side: Side,
) -> Result<InjectionSchedule, ControlError> {
    let chain = synth.chain().clone();
    if j >= chain.n_cells() {
        return Err(ControlError::Invalid(format!("disk {j} out of range")));
    }
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(ControlError::InfeasibleDelta { delta });
    }
    let mut plan = plan_for(state);
    let t0 = state.t;
    let t_end = t0 + delta;
    let half = t0 + 0.5 * delta;
    synth.set_state(&mut plan, j, target, t0, half, t_end, Some(side), 0, TARGET_PHI_FLOOR)?;
    let order: Vec<usize> = match side {
        Side::Left => (0..j).rev().collect(),
        Side::Right => (j + 1..chain.n_cells()).collect(),
    };
    let slots = order.len().max(1) as f64;
    let width = (t_end - half) / slots;
    for (i, &k) in order.iter().enumerate() {
        if plan.hits[k].is_empty() {
            continue;
        }
        let free = state.disks[k].advanced(delta);
        let lo = half + i as f64 * width;
        synth.set_state(&mut plan, k, free, lo, lo + width, t_end, Some(side), 0, PHI_FLOOR)?;
    }
    Ok(plan.finish())
}

/// Schedule steering a tracer along `path` entering at `t_start` with
/// speed `v0`; returns it with the tracer's exit time.
pub fn follow_path(
    synth: &mut Synthesizer,
    state: &SystemState,
    path: &AdmissiblePath,
    v0: f64,
    t_start: f64,
) -> Result<(InjectionSchedule, FollowResult), ControlError> {
    if t_start < state.t {
        return Err(ControlError::Invalid("path starts before the state".into()));
    }
    let mut plan = plan_for(state);
    let r = synth.follow(&mut plan, path, v0, t_start)?;
    Ok((plan.finish(), r))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::control::path::plan_opening_to_opening;
    use crate::dynamics::simulate;
    use crate::geometry::fixtures;

    fn ground(n: usize) -> SystemState {
        SystemState::ground(Chain::new(fixtures::star_cell(), n))
    }

    #[test]
    fn two_drivers_set_angle() {
        let tol = Tolerances::default();
        let mut s = ground(1);
        s.disks[0] = DiskState::new(1.0, -2.0);
        let target = DiskState::new(PI / 2.0, 0.7);
        let sched = set_disk_state(&s, Side::Left, target, 1.0, &tol).unwrap();
        sched.check_windows().unwrap();
        assert_eq!(sched.len(), 2);
        let out = simulate(&s, &sched, 1.0, &tol).unwrap();
        assert!(out.state.particles.is_empty());
        assert!((out.state.disks[0].omega - 0.7).abs() < 1e-12);
        assert!(wrap_signed(out.state.disks[0].phi - target.phi).abs() < 1e-9);
    }

    #[test]
    fn no_op_is_empty() {
        let tol = Tolerances::default();
        let sched = set_disk_state(&ground(1), Side::Left, DiskState::default(), 1.0, &tol).unwrap();
        assert!(sched.is_empty());
    }

    #[test]
    fn control_far_disk() {
        let tol = Tolerances::default();
        for n in [2, 3] {
            let s = ground(n);
            let mut synth = Synthesizer::new(s.chain.clone(), tol);
            let target = DiskState::new(2.0, 0.3);
            let sched = control_disk(&mut synth, &s, n - 1, target, 1.0, Side::Left).unwrap();
            sched.check_windows().unwrap();
            let out = simulate(&s, &sched, 1.0, &tol).unwrap();
            assert!(out.state.particles.is_empty());
            let d = out.state.disks[n - 1];
            assert!((d.omega - 0.3).abs() < 1e-8, "{n}: {d:?}");
            assert!(wrap_signed(d.phi - 2.0).abs() < 1e-6);
            for k in 0..n - 1 {
                assert!(out.state.disks[k].omega.abs() < 1e-8);
                assert!(wrap_signed(out.state.disks[k].phi).abs() < 1e-8);
            }
        }
    }

    #[test]
    fn tracer_follows_path() {
        let tol = Tolerances::default();
        for n in [1, 2, 3] {
            let s = ground(n);
            let path = plan_opening_to_opening(&s.chain, Side::Left, Side::Right, 0.1).unwrap();
            let mut synth = Synthesizer::new(s.chain.clone(), tol);
            let (sched, r) = follow_path(&mut synth, &s, &path, 1.0, 0.0).unwrap();
            assert_eq!(r.exit_side, Side::Right);
            assert_eq!(r.visited.len(), path.vertices.len());
            for (a, b) in r.visited.iter().zip(&path.vertices) {
                assert!(a.dist(b.point) < 1e-8 * s.chain.width());
            }
            let out = simulate(&s, &sched, r.exit_time, &tol).unwrap();
            assert!(out.state.particles.is_empty());
        }
    }
}
