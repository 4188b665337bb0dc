//! Exact event-driven dynamics of the chain.

pub mod collision;
pub mod engine;
pub mod event;
pub mod flight;
pub mod schedule;
pub mod state;

pub use collision::{apply_disk_collision, apply_wall_collision, disk_components, disk_tangent, CollisionError};
pub use engine::{next_event, simulate, Engine, SimError, SimOutcome};
pub use event::{Event, EventKind, UndefinedEvent, UndefinedKind};
pub use flight::{fly, Flyer, Leg, Stop};
pub use schedule::{Batch, ExpectedHit, Injection, InjectionSchedule};
pub use state::{reverse, DiskState, Particle, Role, SystemState};

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fixtures, Chain, Side, Vec2};
    use crate::tolerance::Tolerances;

    fn one(n: usize) -> SystemState {
        SystemState::ground(Chain::new(fixtures::star_cell(), n))
    }

    fn particle(id: u64, cell: usize, q: Vec2, v: Vec2) -> Particle {
        Particle { id, cell, q, v, role: Role::Resident }
    }

    #[test]
    fn straight_to_leftmost_point() {
        let mut s = one(1);
        s.particles.push(particle(0, 0, Vec2::new(0.0, 0.0), Vec2::new(1.0, 0.0)));
        let ev = next_event(&s, 10.0, &Tolerances::default()).unwrap().unwrap();
        assert_eq!(ev.t, 1.5);
        assert_eq!(ev.point, Vec2::new(1.5, 0.0));
        assert!(matches!(ev.kind, EventKind::DiskHit { disk: 0, .. }));
    }

    #[test]
    fn transfer_between_cells() {
        let mut s = one(2);
        s.particles.push(particle(0, 0, Vec2::new(3.0, 0.1), Vec2::new(1.0, 0.0)));
        let ev = next_event(&s, 10.0, &Tolerances::default()).unwrap().unwrap();
        assert_eq!(ev.kind, EventKind::CellTransfer { to: 1 });
        assert_eq!(ev.point, Vec2::new(4.0, 0.1));
    }

    #[test]
    fn simultaneous_hits_rejected() {
        let mut s = one(1);
        s.particles.push(particle(0, 0, Vec2::new(0.5, 0.0), Vec2::new(1.0, 0.0)));
        s.particles.push(particle(1, 0, Vec2::new(3.5, 0.0), Vec2::new(-1.0, 0.0)));
        let err = simulate(&s, &InjectionSchedule::default(), 5.0, &Tolerances::default()).unwrap_err();
        assert_eq!(err.undefined().unwrap().kind, UndefinedKind::SimultaneousDiskHit);
    }

    #[test]
    fn empty_state_drifts() {
        let mut s = one(2);
        s.disks[1] = DiskState::new(0.5, 0.3);
        let out = simulate(&s, &InjectionSchedule::default(), 2.0, &Tolerances::default()).unwrap();
        assert!(out.trace.is_empty());
        assert!((out.state.disks[1].phi - 1.1).abs() < 1e-15);
        assert_eq!(out.state.disks[0], DiskState::default());
    }

    #[test]
    fn injection_hit_and_exit() {
        let s = one(1);
        let inj = Injection {
            t: 0.0,
            id: 7,
            side: Side::Left,
            y: -0.1,
            v: Vec2::new(3.0, 0.2),
            role: Role::Driver,
        };
        let sched = InjectionSchedule { injections: vec![inj], ..Default::default() };
        let out = simulate(&s, &sched, 2.0, &Tolerances::default()).unwrap();
        let kinds: Vec<_> = out.trace.iter().map(|e| e.kind.name()).collect();
        assert_eq!(kinds, ["inject", "disk", "exit"]);
        assert!((out.state.disks[0].omega - 0.2).abs() < 1e-12);
        assert!(out.state.particles.is_empty());
    }

    #[test]
    fn reverse_is_an_involution() {
        let mut s = one(1);
        s.particles.push(particle(0, 0, Vec2::new(1.0, 0.1), Vec2::new(0.3, -0.7)));
        s.disks[0] = DiskState::new(1.0, -2.0);
        assert_eq!(reverse(&reverse(&s)), s);
        let g = one(3);
        assert_eq!(reverse(&g), g);
    }
}
