//! The event-driven engine for the whole chain.

use std::collections::VecDeque;

use thiserror::Error;

use crate::geometry::{Chain, Side, Vec2};
use crate::tolerance::Tolerances;

use super::event::{Event, EventKind, UndefinedEvent, UndefinedKind};
use super::flight::{advance, predict, Flyer, Next, Prediction};
use super::schedule::{Injection, InjectionSchedule};
use super::state::{DiskState, SystemState};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SimError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("{event}")]
    Undefined {
        event: UndefinedEvent,
        /// Events up to the failure.
        trace: Vec<Event>,
    },
}

impl SimError {
    pub fn undefined(&self) -> Option<&UndefinedEvent> {
        match self {
            SimError::Undefined { event, .. } => Some(event),
            SimError::Invalid(_) => None,
        }
    }
}

/// Sequential simulator. Holds no shared state; independent engines may run
/// on different threads.
pub struct Engine<'a> {
    chain: &'a Chain,
    tol: Tolerances,
    t: f64,
    flyers: Vec<Flyer>,
    preds: Vec<Result<Prediction, UndefinedEvent>>,
    disks: Vec<DiskState>,
    pending: VecDeque<Injection>,
    trace: Vec<Event>,
}

impl<'a> Engine<'a> {
    pub fn new(state: &'a SystemState, injections: &[Injection], tol: Tolerances) -> Result<Self, SimError> {
        let chain = &state.chain;
        if state.disks.len() != chain.n_cells() {
            return Err(SimError::Invalid(format!(
                "{} disk states for {} cells",
                state.disks.len(),
                chain.n_cells()
            )));
        }
        let mut ids: Vec<u64> = state.particles.iter().map(|p| p.id).collect();
        for p in &state.particles {
            if p.cell >= chain.n_cells() || !p.q.is_finite() || !p.v.is_finite() {
                return Err(SimError::Invalid(format!("particle {} is malformed", p.id)));
            }
        }
        let mut pending: Vec<Injection> = injections.to_vec();
        pending.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.id.cmp(&b.id)));
        let a = chain.cell().a();
        for inj in &pending {
            ids.push(inj.id);
            let inward = match inj.side {
                Side::Left => inj.v.x > 0.0,
                Side::Right => inj.v.x < 0.0,
            };
            if !(inj.y.abs() < a) || !inward || !inj.t.is_finite() || !inj.v.is_finite() {
                return Err(SimError::Invalid(format!("injection of particle {} is not admissible", inj.id)));
            }
            if inj.t < state.t {
                return Err(SimError::Invalid(format!("injection at {} precedes the state time", inj.t)));
            }
        }
        ids.sort_unstable();
        if ids.windows(2).any(|w| w[0] == w[1]) {
            return Err(SimError::Invalid("duplicate particle ids".into()));
        }
        let flyers: Vec<Flyer> = state.particles.iter().map(|p| Flyer::from_particle(p, state.t)).collect();
        let preds = flyers.iter().map(|f| predict(chain, f, &tol)).collect();
        Ok(Engine {
            chain,
            tol,
            t: state.t,
            flyers,
            preds,
            disks: state.disks.clone(),
            pending: pending.into(),
            trace: Vec::new(),
        })
    }

    pub fn time(&self) -> f64 {
        self.t
    }

    pub fn trace(&self) -> &[Event] {
        &self.trace
    }

    pub fn into_trace(self) -> Vec<Event> {
        self.trace
    }

    pub fn particle_count(&self) -> usize {
        self.flyers.len()
    }

    fn advance_disks(&mut self, t: f64) {
        let dt = t - self.t;
        if dt != 0.0 {
            for d in &mut self.disks {
                *d = d.advanced(dt);
            }
        }
        self.t = t;
    }

    fn earliest(&self) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for (i, p) in self.preds.iter().enumerate() {
            let t = match p {
                Ok(p) => p.t,
                Err(e) => e.t,
            };
            if best.is_none_or(|(_, bt)| t < bt) {
                best = Some((i, t));
            }
        }
        best
    }

    /// Process the next event if it happens at or before `horizon`.
    pub fn step(&mut self, horizon: f64) -> Result<Option<Event>, UndefinedEvent> {
        let next = self.earliest();
        let inj_t = self.pending.front().map(|i| i.t);
        if let Some(ti) = inj_t {
            if ti <= horizon && next.is_none_or(|(_, t)| ti <= t) {
                let inj = self.pending.pop_front().unwrap();
                return Ok(Some(self.inject(inj)));
            }
        }
        let (i, t) = match next {
            Some(n) if n.1 <= horizon => n,
            _ => return Ok(None),
        };
        let p = self.preds[i]?;
        if let Next::Disk { .. } = p.next {
            let gap = self.tol.time * t.abs().max(1.0);
            for (k, q) in self.preds.iter().enumerate() {
                if k == i {
                    continue;
                }
                if let Ok(q) = q {
                    if matches!(q.next, Next::Disk { .. }) && (q.t - t).abs() < gap {
                        return Err(UndefinedEvent {
                            kind: UndefinedKind::SimultaneousDiskHit,
                            t,
                            particle: self.flyers[i].id,
                            other: Some(self.flyers[k].id),
                        });
                    }
                }
            }
        }
        self.advance_disks(t);
        let disk = match p.next {
            Next::Disk { disk } => self.disks[disk],
            _ => DiskState::default(),
        };
        let adv = advance(self.chain, &self.flyers[i], &p, disk, &self.tol)?;
        if let Some((j, d)) = adv.disk {
            self.disks[j] = d;
        }
        match adv.flyer {
            Some(f) => {
                self.flyers[i] = f;
                self.preds[i] = predict(self.chain, &f, &self.tol);
            }
            None => {
                self.flyers.remove(i);
                let _ = self.preds.remove(i);
            }
        }
        self.trace.push(adv.event);
        Ok(Some(adv.event))
    }

    fn inject(&mut self, inj: Injection) -> Event {
        self.advance_disks(inj.t);
        let x = self.chain.bath_x(inj.side);
        let f = Flyer {
            id: inj.id,
            role: inj.role,
            cell: self.chain.bath_cell(inj.side),
            q: Vec2::new(x, inj.y),
            t0: inj.t,
            v: inj.v,
        };
        self.flyers.push(f);
        self.preds.push(predict(self.chain, &f, &self.tol));
        let ev = Event {
            t: inj.t,
            particle: inj.id,
            role: inj.role,
            cell: f.cell,
            point: f.q,
            v_pre: inj.v,
            v_post: inj.v,
            kind: EventKind::Injection { side: inj.side },
        };
        self.trace.push(ev);
        ev
    }

    /// Run every event up to and including `horizon`.
    pub fn run(&mut self, horizon: f64) -> Result<(), UndefinedEvent> {
        while self.step(horizon)?.is_some() {}
        Ok(())
    }

    /// Run until `max_events` more events have happened or nothing is left
    /// before `horizon`.
    pub fn run_events(&mut self, horizon: f64, max_events: usize) -> Result<usize, UndefinedEvent> {
        let mut n = 0;
        while n < max_events && self.step(horizon)?.is_some() {
            n += 1;
        }
        Ok(n)
    }

    /// The state at time `t`, which must not precede the last event.
    pub fn state_at(&self, t: f64) -> SystemState {
        debug_assert!(t >= self.t);
        SystemState {
            t,
            chain: self.chain.clone(),
            particles: self.flyers.iter().map(|f| f.to_particle(t)).collect(),
            disks: self.disks.iter().map(|d| d.advanced(t - self.t)).collect(),
        }
    }
}

/// The next event of `state` within `horizon` (absolute time), without
/// injections.
pub fn next_event(state: &SystemState, horizon: f64, tol: &Tolerances) -> Result<Option<Event>, UndefinedEvent> {
    let mut e = Engine::new(state, &[], *tol).map_err(|_| UndefinedEvent {
        kind: UndefinedKind::Lost,
        t: state.t,
        particle: 0,
        other: None,
    })?;
    e.step(horizon)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimOutcome {
    pub state: SystemState,
    pub trace: Vec<Event>,
}

/// Advance `state` to absolute time `t_end` under `schedule`.
pub fn simulate(
    state: &SystemState,
    schedule: &InjectionSchedule,
    t_end: f64,
    tol: &Tolerances,
) -> Result<SimOutcome, SimError> {
    if !(t_end >= state.t) {
        return Err(SimError::Invalid(format!("end time {t_end} precedes state time {}", state.t)));
    }
    if let Some(inj) = schedule.injections.iter().find(|i| i.t > t_end) {
        return Err(SimError::Invalid(format!("injection at {} is after the end time", inj.t)));
    }
    let mut e = Engine::new(state, &schedule.injections, *tol)?;
    match e.run(t_end) {
        Ok(()) => Ok(SimOutcome {
            state: e.state_at(t_end),
            trace: e.into_trace(),
        }),
        Err(event) => Err(SimError::Undefined {
            event,
            trace: e.into_trace(),
        }),
    }
}
