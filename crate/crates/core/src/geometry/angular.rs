//! Finite unions of open arcs on the circle `[0, 2π)`.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

/// Slack used when merging touching intervals.
pub const MERGE_SLACK: f64 = 1e-9;

/// Complement measure below which a set counts as covering the circle.
pub const COVERAGE_TOLERANCE: f64 = 1e-6;

/// Reduce an angle to `[0, 2π)`.
#[inline]
pub fn wrap_angle(a: f64) -> f64 {
    let r = a.rem_euclid(TAU);
    if r >= TAU {
        0.0
    } else {
        r
    }
}

/// Reduce an angle difference to `(-π, π]`.
#[inline]
pub fn wrap_signed(a: f64) -> f64 {
    let r = wrap_angle(a);
    if r > std::f64::consts::PI {
        r - TAU
    } else {
        r
    }
}

/// An arc `(start, start + len)` travelled counterclockwise.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AngularInterval {
    pub start: f64,
    pub len: f64,
}

impl AngularInterval {
    pub fn new(start: f64, len: f64) -> Self {
        AngularInterval {
            start: wrap_angle(start),
            len: len.clamp(0.0, TAU),
        }
    }

    /// The counterclockwise arc from `from` to `to`.
    pub fn between(from: f64, to: f64) -> Self {
        let len = wrap_angle(to - from);
        AngularInterval::new(from, len)
    }

    pub fn end(&self) -> f64 {
        self.start + self.len
    }

    pub fn midpoint(&self) -> f64 {
        wrap_angle(self.start + 0.5 * self.len)
    }

    /// Open membership.
    pub fn contains(&self, theta: f64) -> bool {
        if self.len >= TAU {
            return true;
        }
        let d = wrap_angle(theta - self.start);
        d > 0.0 && d < self.len
    }
}

/// Normalized union of open angular intervals: sorted by start, pairwise
/// disjoint, every piece of positive length.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct AngularIntervalSet {
    intervals: Vec<AngularInterval>,
}

impl AngularIntervalSet {
    pub fn empty() -> Self {
        Self::default()
    }

    pub fn full() -> Self {
        AngularIntervalSet {
            intervals: vec![AngularInterval { start: 0.0, len: TAU }],
        }
    }

    pub fn from_intervals<I: IntoIterator<Item = AngularInterval>>(it: I) -> Self {
        let mut s = Self::empty();
        for iv in it {
            s.insert(iv);
        }
        s
    }

    pub fn intervals(&self) -> &[AngularInterval] {
        &self.intervals
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.intervals.len() == 1 && self.intervals[0].len >= TAU
    }

    pub fn insert(&mut self, iv: AngularInterval) {
        if iv.len <= 0.0 {
            return;
        }
        self.intervals.push(iv);
        self.normalize();
    }

    pub fn union(&self, other: &AngularIntervalSet) -> AngularIntervalSet {
        let mut out = self.clone();
        out.intervals.extend_from_slice(&other.intervals);
        out.normalize();
        out
    }

    pub fn complement(&self) -> AngularIntervalSet {
        if self.intervals.is_empty() {
            return Self::full();
        }
        if self.is_full() {
            return Self::empty();
        }
        let n = self.intervals.len();
        let mut out = Vec::with_capacity(n);
        for i in 0..n {
            let cur = self.intervals[i];
            let next = self.intervals[(i + 1) % n];
            let gap = wrap_angle(next.start - cur.end());
            let gap = if n == 1 { TAU - cur.len } else { gap };
            if gap > 0.0 {
                out.push(AngularInterval::new(cur.end(), gap));
            }
        }
        let mut s = AngularIntervalSet { intervals: out };
        s.sort();
        s
    }

    pub fn intersection(&self, other: &AngularIntervalSet) -> AngularIntervalSet {
        self.complement().union(&other.complement()).complement()
    }

    /// Total measure in radians.
    pub fn measure(&self) -> f64 {
        self.intervals.iter().map(|i| i.len).sum()
    }

    pub fn contains(&self, theta: f64) -> bool {
        self.intervals.iter().any(|i| i.contains(theta))
    }

    /// Measure of `(A \ B) ∪ (B \ A)`.
    pub fn symmetric_difference_measure(&self, other: &AngularIntervalSet) -> f64 {
        self.union(other).measure() - self.intersection(other).measure()
    }

    /// True when the complement has measure below [`COVERAGE_TOLERANCE`].
    pub fn covers_circle(&self) -> bool {
        self.complement().measure() < COVERAGE_TOLERANCE
    }

    /// Midpoint of the largest gap, if any gap exists.
    pub fn largest_gap_midpoint(&self) -> Option<f64> {
        self.complement()
            .intervals
            .iter()
            .max_by(|a, b| a.len.total_cmp(&b.len))
            .map(|g| g.midpoint())
    }

    fn sort(&mut self) {
        self.intervals.sort_by(|a, b| a.start.total_cmp(&b.start));
    }

    fn normalize(&mut self) {
        self.intervals.retain(|i| i.len > 0.0);
        if self.intervals.is_empty() {
            return;
        }
        self.sort();
        let mut merged: Vec<AngularInterval> = Vec::with_capacity(self.intervals.len());
        for iv in self.intervals.drain(..) {
            match merged.last_mut() {
                Some(last) if iv.start <= last.end() + MERGE_SLACK => {
                    let end = last.end().max(iv.end());
                    last.len = end - last.start;
                }
                _ => merged.push(iv),
            }
        }
        // Wrap-around: the last interval may reach past 2π into the first ones.
        while merged.len() > 1 {
            let last = *merged.last().unwrap();
            let first = merged[0];
            if last.end() - TAU + MERGE_SLACK >= first.start {
                let end = (last.end()).max(first.end() + TAU);
                merged.remove(0);
                let l = merged.last_mut().unwrap();
                l.len = end - l.start;
            } else {
                break;
            }
        }
        if merged.len() == 1 && merged[0].len >= TAU - MERGE_SLACK {
            merged[0] = AngularInterval { start: 0.0, len: TAU };
        } else {
            for m in &mut merged {
                m.len = m.len.min(TAU);
            }
        }
        self.intervals = merged;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn merge_and_wrap() {
        let s = AngularIntervalSet::from_intervals([
            AngularInterval::new(5.5, 1.5),
            AngularInterval::new(0.5, 1.0),
            AngularInterval::new(1.2, 0.5),
        ]);
        assert_eq!(s.intervals().len(), 1);
        assert!((s.measure() - ((TAU - 5.5) + 1.7)).abs() < 1e-12);
        assert!(s.contains(0.1));
        assert!(s.contains(6.0));
        assert!(!s.contains(3.0));
    }

    #[test]
    fn complement_and_coverage() {
        let s = AngularIntervalSet::from_intervals([
            AngularInterval::new(0.0, PI + 0.1),
            AngularInterval::new(PI, PI + 0.1),
        ]);
        assert!(s.covers_circle());
        let t = AngularIntervalSet::from_intervals([AngularInterval::new(0.0, PI)]);
        assert!(!t.covers_circle());
        let w = t.largest_gap_midpoint().unwrap();
        assert!((w - 1.5 * PI).abs() < 1e-12);
        assert!((t.complement().measure() - PI).abs() < 1e-12);
    }

    #[test]
    fn symmetric_difference() {
        let a = AngularIntervalSet::from_intervals([AngularInterval::new(0.0, 1.0)]);
        let b = AngularIntervalSet::from_intervals([AngularInterval::new(0.5, 1.0)]);
        assert!((a.symmetric_difference_measure(&b) - 1.0).abs() < 1e-12);
        assert!(a.symmetric_difference_measure(&a).abs() < 1e-12);
    }

    #[test]
    fn open_endpoints() {
        let a = AngularIntervalSet::from_intervals([AngularInterval::new(1.0, 1.0)]);
        assert!(!a.contains(1.0));
        assert!(!a.contains(2.0));
        assert!(a.contains(1.5));
    }
}
