//! Brute-force illumination oracle. It casts rays with its own
//! intersection code so it can cross-check the geometry module.

use std::f64::consts::TAU;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::geometry::angular::{wrap_angle, AngularInterval, AngularIntervalSet};
use crate::geometry::{Cell, Vec2};

/// Fewest samples accepted by the oracle.
pub const MIN_SAMPLES: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq)]
enum Hit {
    Arc(usize),
    Other,
}

/// Smallest `s > eps` with `|p + s d − c| = r`, if that point passes `keep`.
fn circle_hits(p: Vec2, d: Vec2, c: Vec2, r: f64, eps: f64) -> [Option<f64>; 2] {
    let f = p - c;
    let b = f.dot(d);
    let q = f.dot(f) - r * r;
    let disc = b * b - q;
    if disc < 0.0 {
        return [None, None];
    }
    let sq = disc.sqrt();
    let keep = |s: f64| (s > eps).then_some(s);
    [keep(-b - sq), keep(-b + sq)]
}

fn on_arc(angle: f64, span: (f64, f64)) -> bool {
    let len = wrap_angle(span.1 - span.0);
    len == 0.0 || wrap_angle(angle - span.0) <= len
}

/// First boundary met by the ray from `p` along unit `d`.
fn first_hit(cell: &Cell, p: Vec2, d: Vec2) -> Option<(f64, Hit)> {
    let l = cell.width();
    let eps = 1e-12 * l;
    let mut best: Option<(f64, Hit)> = None;
    let mut take = |s: f64, h: Hit| {
        if best.is_none_or(|(b, _)| s < b) {
            best = Some((s, h));
        }
    };
    for (k, arc) in cell.arcs().iter().enumerate() {
        for s in circle_hits(p, d, arc.center, arc.radius, eps).into_iter().flatten() {
            let q = p + d * s;
            if on_arc((q - arc.center).angle(), arc.span) {
                take(s, Hit::Arc(k));
            }
        }
    }
    for s in circle_hits(p, d, cell.disk_center(), cell.r(), eps).into_iter().flatten() {
        take(s, Hit::Other);
    }
    for x in [0.0, l] {
        if d.x != 0.0 {
            let s = (x - p.x) / d.x;
            if s > eps && (p.y + s * d.y).abs() <= cell.a() {
                take(s, Hit::Other);
            }
        }
    }
    best
}

/// Is disk angle `theta` lit by arc `k`: does the ray from the disk point
/// along the line through the arc's center, pointing away from the disk,
/// reach arc `k` first?
pub fn sample_lit(cell: &Cell, k: usize, theta: f64) -> bool {
    let c = cell.disk_center();
    let n = Vec2::new(theta.cos(), theta.sin());
    let p = c + n * cell.r();
    let ck = cell.arcs()[k].center;
    let line = ck - p;
    if line.norm() == 0.0 {
        return false;
    }
    let mut d = line * (1.0 / line.norm());
    if d.dot(n) < 0.0 {
        d = -d;
    }
    if d.dot(n) == 0.0 {
        return false;
    }
    matches!(first_hit(cell, p, d), Some((_, Hit::Arc(j))) if j == k)
}

/// Empirical lit set of every arc from `samples` stratified disk angles,
/// jittered with `seed`.
pub fn mc_illumination_oracle(cell: &Cell, samples: usize, seed: u64) -> Vec<AngularIntervalSet> {
    let n = samples.max(MIN_SAMPLES);
    let h = TAU / n as f64;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let thetas: Vec<f64> = (0..n).map(|i| (i as f64 + rng.gen::<f64>()) * h).collect();
    (0..cell.arcs().len())
        .map(|k| {
            let lit: Vec<bool> = thetas.iter().map(|&t| sample_lit(cell, k, t)).collect();
            runs(&thetas, &lit)
        })
        .collect()
}

/// Union of every arc's lit set.
pub fn oracle_coverage(per_arc: &[AngularIntervalSet]) -> AngularIntervalSet {
    per_arc.iter().fold(AngularIntervalSet::empty(), |acc, s| acc.union(s))
}

/// Tab-separated `arc start length` rows with round-trip floats.
pub fn oracle_to_tsv(per_arc: &[AngularIntervalSet]) -> String {
    let mut out = format!("# arcs {}\narc\tstart\tlength\n", per_arc.len());
    for (k, set) in per_arc.iter().enumerate() {
        for iv in set.intervals() {
            out.push_str(&format!("{k}\t{:e}\t{:e}\n", iv.start, iv.len));
        }
    }
    out
}

/// Inverse of [`oracle_to_tsv`].
pub fn oracle_from_tsv(text: &str) -> Result<Vec<AngularIntervalSet>, String> {
    let mut lines = text.lines();
    let n: usize = lines
        .next()
        .and_then(|l| l.strip_prefix("# arcs "))
        .and_then(|v| v.trim().parse().ok())
        .ok_or("missing '# arcs' header")?;
    lines.next();
    let mut sets = vec![AngularIntervalSet::empty(); n];
    for (i, line) in lines.enumerate() {
        let f: Vec<&str> = line.split('\t').collect();
        let bad = || format!("line {}: expected 'arc start length'", i + 3);
        if f.len() != 3 {
            return Err(bad());
        }
        let k: usize = f[0].parse().map_err(|_| bad())?;
        let start: f64 = f[1].parse().map_err(|_| bad())?;
        let len: f64 = f[2].parse().map_err(|_| bad())?;
        sets.get_mut(k).ok_or_else(bad)?.insert(AngularInterval::new(start, len));
    }
    Ok(sets)
}

/// Intervals of consecutive lit samples; edges sit halfway between a lit
/// and an unlit sample.
fn runs(thetas: &[f64], lit: &[bool]) -> AngularIntervalSet {
    let n = thetas.len();
    if lit.iter().all(|&b| b) {
        return AngularIntervalSet::full();
    }
    let mid = |i: usize| {
        let j = (i + 1) % n;
        let gap = wrap_angle(thetas[j] - thetas[i]);
        thetas[i] + 0.5 * gap
    };
    let mut set = AngularIntervalSet::empty();
    let Some(first_dark) = (0..n).find(|&i| !lit[i]) else {
        return set;
    };
    let mut start: Option<f64> = None;
    for step in 1..=n {
        let i = (first_dark + step) % n;
        let prev = (i + n - 1) % n;
        if lit[i] && !lit[prev] {
            start = Some(mid(prev));
        }
        if !lit[i] && lit[prev] {
            if let Some(s) = start.take() {
                set.insert(AngularInterval::between(s, mid(prev)));
            }
        }
    }
    set
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{fixtures, illuminate, is_one_controllable, Cell};

    #[test]
    fn concentric_arc_lights_its_sector() {
        // rays from the disk toward the common center run back through the
        // disk, so the oracle flips them outward along the normal
        let cell = Cell::new_unchecked(fixtures::concentric_spec());
        let sets = mc_illumination_oracle(&cell, 20_000, 1);
        let arc = cell.arcs()[0];
        let sector = AngularIntervalSet::from_intervals([AngularInterval::between(arc.span.0, arc.span.1)]);
        let lit = &sets[0];
        // the sector minus whatever the neighbouring arcs shadow
        assert!(lit.intersection(&sector.complement()).measure() < 1e-3);
        assert!(lit.measure() > 0.5 * sector.measure());
    }

    #[test]
    fn matches_illuminate_on_fixtures() {
        for cell in [fixtures::star_cell(), fixtures::tail_cell()] {
            let sets = mc_illumination_oracle(&cell, 100_000, 3);
            for (k, o) in sets.iter().enumerate() {
                let a = illuminate(&cell, k).unwrap();
                assert!(a.symmetric_difference_measure(o) < 1e-3, "arc {k}");
            }
        }
    }

    #[test]
    fn tsv_round_trips() {
        let sets = mc_illumination_oracle(&fixtures::tail_cell(), 10_000, 2);
        let text = oracle_to_tsv(&sets);
        let back = oracle_from_tsv(&text).unwrap();
        assert_eq!(back, sets);
        assert_eq!(oracle_to_tsv(&back), text);
    }

    #[test]
    fn unlit_arcs_are_empty() {
        let cell = crate::geometry::build_cell(fixtures::narrow_tail_spec()).unwrap();
        let sets = mc_illumination_oracle(&cell, 20_000, 0);
        let dark: Vec<usize> = (0..sets.len()).filter(|&k| sets[k].is_empty()).collect();
        assert!(!dark.is_empty());
        for k in dark {
            assert!(illuminate(&cell, k).unwrap().is_empty());
        }
    }

    #[test]
    fn verdicts_agree() {
        for (cell, expect) in [(fixtures::star_cell(), true), (fixtures::tail_cell(), false)] {
            let o = oracle_coverage(&mc_illumination_oracle(&cell, 50_000, 9));
            assert_eq!(o.covers_circle(), expect);
            let c = is_one_controllable(&cell);
            assert_eq!(c.controllable, expect);
            if let Some(w) = c.witness {
                assert!(!o.contains(w));
            }
        }
    }
}
