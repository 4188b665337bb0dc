//! Bookkeeping shared by all synthesizers: the schedule being built and the
//! angular-velocity timeline of every disk.

use crate::dynamics::flight::{advance, Flyer, Prediction};
use crate::dynamics::{Batch, DiskState, Event, ExpectedHit, Injection, InjectionSchedule};
use crate::geometry::angular::wrap_angle;
use crate::geometry::Chain;
use crate::tolerance::Tolerances;

use super::ControlError;

/// A disk hit committed to the plan.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HitRecord {
    pub t: f64,
    pub particle: u64,
    pub omega_before: f64,
    pub omega_after: f64,
}

/// Everything planned so far. Cheap to clone, which is how synthesizers
/// roll back failed attempts.
#[derive(Debug, Clone)]
pub struct PlanState {
    pub t0: f64,
    pub disks0: Vec<DiskState>,
    pub hits: Vec<Vec<HitRecord>>,
    pub schedule: InjectionSchedule,
    pub next_id: u64,
    /// Relative separation enforced between any two planned disk hits.
    pub min_gap: f64,
    /// Latest exit time of any planned particle.
    pub last_exit: f64,
}

impl PlanState {
    pub fn new(t0: f64, disks0: Vec<DiskState>, next_id: u64) -> Self {
        let n = disks0.len();
        PlanState {
            t0,
            disks0,
            hits: vec![Vec::new(); n],
            schedule: InjectionSchedule::default(),
            next_id,
            min_gap: 1e-10,
            last_exit: t0,
        }
    }

    pub fn new_id(&mut self) -> u64 {
        let id = self.next_id;
        self.next_id += 1;
        id
    }

    /// Time of the last committed hit on `disk`, or the plan start.
    pub fn frontier(&self, disk: usize) -> f64 {
        self.hits[disk].last().map_or(self.t0, |h| h.t)
    }

    /// Latest frontier over a range of disks.
    pub fn frontier_over(&self, disks: impl IntoIterator<Item = usize>) -> f64 {
        disks.into_iter().map(|d| self.frontier(d)).fold(self.t0, f64::max)
    }

    /// Angular velocity of `disk` just before time `t`.
    pub fn omega_at(&self, disk: usize, t: f64) -> f64 {
        self.hits[disk]
            .iter()
            .rev()
            .find(|h| h.t < t)
            .map_or(self.disks0[disk].omega, |h| h.omega_after)
    }

    /// Angle of `disk` at time `t`, integrating the planned timeline.
    pub fn phi_at(&self, disk: usize, t: f64) -> f64 {
        let mut phi = self.disks0[disk].phi;
        let mut omega = self.disks0[disk].omega;
        let mut last = self.t0;
        for h in &self.hits[disk] {
            if h.t >= t {
                break;
            }
            phi += omega * (h.t - last);
            omega = h.omega_after;
            last = h.t;
        }
        wrap_angle(phi + omega * (t - last))
    }

    pub fn disk_at(&self, disk: usize, t: f64) -> DiskState {
        DiskState {
            phi: self.phi_at(disk, t),
            omega: self.omega_at(disk, t),
        }
    }

    /// Can a new hit on `disk` happen at `t` without disturbing the plan?
    pub fn hit_allowed(&self, disk: usize, t: f64) -> Result<(), ControlError> {
        let gap = self.min_gap * t.abs().max(1.0);
        if !(t > self.frontier(disk) + gap) {
            return Err(ControlError::SchedulingConflict(format!(
                "hit on disk {disk} at {t} does not follow the last hit at {}",
                self.frontier(disk)
            )));
        }
        for (j, hs) in self.hits.iter().enumerate() {
            if hs.iter().any(|h| (h.t - t).abs() < gap) {
                return Err(ControlError::SchedulingConflict(format!(
                    "hit on disk {disk} at {t} too close to a hit on disk {j}"
                )));
            }
        }
        Ok(())
    }

    /// Apply a disk hit predicted for `f`, using the planned disk state.
    /// Commits the hit and returns the particle after the collision.
    pub fn commit_hit(
        &mut self,
        chain: &Chain,
        f: &Flyer,
        p: &Prediction,
        tol: &Tolerances,
    ) -> Result<(Flyer, Event), ControlError> {
        let disk = match p.next {
            crate::dynamics::flight::Next::Disk { disk } => disk,
            _ => return Err(ControlError::Invalid("commit_hit needs a disk hit".into())),
        };
        self.hit_allowed(disk, p.t)?;
        let state = self.disk_at(disk, p.t);
        let adv = advance(chain, f, p, state, tol).map_err(ControlError::Undefined)?;
        let (_, after) = adv.disk.expect("disk hit updates the disk");
        self.hits[disk].push(HitRecord {
            t: p.t,
            particle: f.id,
            omega_before: state.omega,
            omega_after: after.omega,
        });
        self.schedule.expected_hits.push(ExpectedHit {
            t: p.t,
            disk,
            particle: f.id,
            omega_post: after.omega,
        });
        Ok((adv.flyer.expect("disk hits keep the particle"), adv.event))
    }

    pub fn push_injection(&mut self, inj: Injection) {
        self.schedule.injections.push(inj);
    }

    pub fn push_batch(&mut self, batch: Batch) {
        self.schedule.batches.push(batch);
    }

    pub fn note_exit(&mut self, t: f64) {
        self.last_exit = self.last_exit.max(t);
    }

    /// Final schedule, sorted.
    pub fn finish(mut self) -> InjectionSchedule {
        self.schedule.normalize();
        self.schedule
    }
}
