use serde::{Deserialize, Serialize};

use crate::geometry::{Side, Vec2};

use super::state::Role;

/// A particle entering from a bath through the opening at the end of the chain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Injection {
    pub t: f64,
    pub id: u64,
    pub side: Side,
    /// Entry ordinate, `|y| < a`.
    pub y: f64,
    pub v: Vec2,
    pub role: Role,
}

/// A disk hit the synthesizer expects to see on replay.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpectedHit {
    pub t: f64,
    pub disk: usize,
    pub particle: u64,
    /// Disk angular velocity right after the hit.
    pub omega_post: f64,
}

/// Injections that prepare one disk hit: every injection of the batch lies
/// strictly between the previous hit `lo` and the served hit `served`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Batch {
    pub disk: usize,
    pub lo: f64,
    pub served: f64,
    pub omega: f64,
    pub injection_times: Vec<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InjectionSchedule {
    pub injections: Vec<Injection>,
    #[serde(default)]
    pub expected_hits: Vec<ExpectedHit>,
    #[serde(default)]
    pub batches: Vec<Batch>,
}

impl InjectionSchedule {
    pub fn is_empty(&self) -> bool {
        self.injections.is_empty()
    }

    pub fn len(&self) -> usize {
        self.injections.len()
    }

    /// Sort injections and annotations by time.
    pub fn normalize(&mut self) {
        self.injections.sort_by(|a, b| a.t.total_cmp(&b.t).then(a.id.cmp(&b.id)));
        self.expected_hits.sort_by(|a, b| a.t.total_cmp(&b.t));
        self.batches.sort_by(|a, b| a.served.total_cmp(&b.served));
    }

    pub fn merge(&mut self, other: InjectionSchedule) {
        self.injections.extend(other.injections);
        self.expected_hits.extend(other.expected_hits);
        self.batches.extend(other.batches);
        self.normalize();
    }

    /// Every batch's injections fall strictly inside its window and the
    /// injection times are strictly increasing.
    pub fn check_windows(&self) -> Result<(), String> {
        for b in &self.batches {
            if !(b.lo < b.served) {
                return Err(format!("batch for disk {} has empty window ({}, {})", b.disk, b.lo, b.served));
            }
            for &tau in &b.injection_times {
                if !(tau > b.lo && tau < b.served) {
                    return Err(format!(
                        "injection at {tau} outside window ({}, {}) of disk {}",
                        b.lo, b.served, b.disk
                    ));
                }
            }
        }
        for w in self.injections.windows(2) {
            if !(w[0].t < w[1].t) {
                return Err(format!("injection times not strictly increasing at {}", w[1].t));
            }
        }
        Ok(())
    }

    pub fn end_time(&self) -> f64 {
        self.expected_hits
            .iter()
            .map(|h| h.t)
            .chain(self.injections.iter().map(|i| i.t))
            .fold(0.0, f64::max)
    }
}
