//! Emptying the chain: steer every particle out, then bring every disk to
//! rest at angle zero.

use log::debug;

use crate::dynamics::flight::{fly, Flyer, Next, Prediction, Stop};
use crate::dynamics::{DiskState, InjectionSchedule, SystemState};
use crate::geometry::Side;

use super::admissible::check_admissible;
use super::graph::{Goal, HopTarget, Origin, Route};
use super::plan::PlanState;
use super::steer::{HopEnd, Synthesizer, TARGET_PHI_FLOOR};
use super::ControlError;

/// Length of each final disk-setting window.
pub const CLEANUP_WINDOW: f64 = 1.0;
/// Alternative routes tried at one vertex before giving up.
const MAX_REROUTES: usize = 8;

struct Tracer {
    flyer: Flyer,
    pred: Prediction,
    route: Option<(Route, usize)>,
}

/// Schedule taking `state` to the ground state, with the absolute time at
/// which it is reached.
pub fn empty_system(synth: &mut Synthesizer, state: &SystemState) -> Result<(InjectionSchedule, f64), ControlError> {
    let tol = *synth.tolerances();
    check_admissible(state, f64::INFINITY, &tol).map_err(|v| ControlError::Inadmissible(v.to_string()))?;
    if state.is_ground() {
        return Ok((InjectionSchedule::default(), state.t));
    }
    let chain = synth.chain().clone();
    let mut plan = PlanState::new(state.t, state.disks.clone(), state.next_free_id());
    let mut tracers = Vec::new();
    for p in &state.particles {
        let f = Flyer::from_particle(p, state.t);
        let leg = fly(&chain, &f, &tol, 100_000, f64::INFINITY).map_err(ControlError::Undefined)?;
        match leg.stop {
            Stop::Exit { t, .. } => plan.note_exit(t),
            Stop::Disk { flyer, prediction } => tracers.push(Tracer {
                flyer,
                pred: prediction,
                route: None,
            }),
            Stop::Horizon { .. } => return Err(ControlError::Inadmissible("particle never arrives".into())),
        }
    }
    // one disk hit at a time, in time order
    while let Some(i) = (0..tracers.len()).min_by(|&a, &b| tracers[a].pred.t.total_cmp(&tracers[b].pred.t)) {
        let tr = tracers.swap_remove(i);
        if let Some(next) = step(synth, &mut plan, tr)? {
            tracers.push(next);
        }
    }
    // bring the disks to rest, last disk first
    let n = chain.n_cells();
    let mut lo = (0..n).map(|d| plan.frontier(d)).fold(state.t, f64::max);
    let ground = DiskState::default();
    let mut order = vec![(n - 1, Side::Right)];
    order.extend((0..n - 1).rev().map(|d| (d, Side::Left)));
    for (disk, side) in order {
        let hi = lo + CLEANUP_WINDOW;
        synth.set_state(&mut plan, disk, ground, lo, hi, hi, Some(side), 0, TARGET_PHI_FLOOR)?;
        lo = hi;
    }
    let t_end = lo.max(plan.last_exit);
    Ok((plan.finish(), t_end))
}

/// Steer one tracer across its next disk hit. Returns it again unless it
/// has left the chain.
fn step(synth: &mut Synthesizer, plan: &mut PlanState, mut tr: Tracer) -> Result<Option<Tracer>, ControlError> {
    let chain = synth.chain().clone();
    let disk = match tr.pred.next {
        Next::Disk { disk } => disk,
        _ => return Err(ControlError::Invalid("tracer is not at a disk".into())),
    };
    let theta = (tr.pred.point - chain.disk_center(disk)).angle();
    let all = vec![true; chain.n_cells()];
    let mut banned = Vec::new();
    let mut last = ControlError::SearchExhausted;
    for attempt in 0..MAX_REROUTES {
        let (route, k) = match tr.route.take() {
            Some(r) if attempt == 0 => r,
            _ => {
                let r = synth
                    .planner()
                    .route(&[Origin::Disk { disk, theta }], &all, Goal::any_exit(), &banned)?;
                (r, 0)
            }
        };
        let hop = route.hops[k];
        let mut trial = plan.clone();
        match synth.tracer_hop(&mut trial, tr.flyer, tr.pred, &hop, plan.t0) {
            Ok(end) => {
                *plan = trial;
                return Ok(match end {
                    HopEnd::Exit { .. } => None,
                    HopEnd::Disk { flyer, pred } => Some(Tracer {
                        flyer,
                        pred,
                        route: (k + 1 < route.hops.len()).then_some((route, k + 1)),
                    }),
                });
            }
            Err(e) => {
                debug!("tracer {} at t={}: hop failed: {e}", tr.flyer.id, tr.pred.t);
                if let HopTarget::Disk { disk, bin, .. } = hop.target {
                    banned.push((disk, bin));
                }
                last = e;
            }
        }
    }
    Err(last)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, Particle, Role};
    use crate::geometry::{fixtures, Chain, Vec2};
    use crate::tolerance::Tolerances;

    #[test]
    fn empties_to_ground() {
        let tol = Tolerances::default();
        let chain = Chain::new(fixtures::star_cell(), 2);
        let mut s = SystemState::ground(chain.clone());
        s.disks = vec![DiskState::new(1.0, 0.4), DiskState::new(-2.0, -0.3)];
        s.particles.push(Particle {
            id: 0,
            cell: 1,
            q: Vec2::new(5.0, 0.2),
            v: Vec2::new(0.6, -0.9),
            role: Role::Resident,
        });
        let mut synth = Synthesizer::new(chain, tol);
        let (sched, t_end) = empty_system(&mut synth, &s).unwrap();
        assert!(t_end.is_finite());
        let out = simulate(&s, &sched, t_end, &tol).unwrap();
        assert!(out.state.particles.is_empty());
        for d in &out.state.disks {
            assert!(crate::geometry::angular::wrap_signed(d.phi).abs() < 1e-6);
            assert!(d.omega.abs() < 1e-8);
        }
    }

    #[test]
    fn ground_needs_nothing() {
        let s = SystemState::ground(Chain::new(fixtures::star_cell(), 3));
        let mut synth = Synthesizer::new(s.chain.clone(), Tolerances::default());
        let (sched, t) = empty_system(&mut synth, &s).unwrap();
        assert!(sched.is_empty());
        assert_eq!(t, 0.0);
    }
}
