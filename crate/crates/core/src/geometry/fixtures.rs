//! Reference cells used by examples, tests and the frozen fixture files.
//!
//! All of them share `L = 4`, `a = 0.25`, `r = 0.5`, so the disk sits at
//! `(2, 0)` and `d = 1.5`.

use super::cell::{build_cell, ArcSpec, Cell, CellSpec};
use super::Vec2;

pub const WIDTH: f64 = 4.0;
pub const OPENING_HALF_HEIGHT: f64 = 0.25;
pub const DISK_RADIUS: f64 = 0.5;

fn center() -> Vec2 {
    Vec2::new(WIDTH / 2.0, 0.0)
}

fn spec(arcs: Vec<ArcSpec>) -> CellSpec {
    CellSpec {
        width: WIDTH,
        opening_half_height: OPENING_HALF_HEIGHT,
        disk_radius: DISK_RADIUS,
        arcs,
    }
}

/// Chain of arcs through `pts`, each with sagitta `sag`, bulging toward the disk.
fn polyarc(pts: &[Vec2], sags: &[f64]) -> Vec<ArcSpec> {
    pts.windows(2)
        .zip(sags)
        .map(|(w, &s)| ArcSpec::through(w[0], w[1], s, center()))
        .collect()
}

fn bottom() -> Vec<ArcSpec> {
    let a = OPENING_HALF_HEIGHT;
    polyarc(
        &[Vec2::new(WIDTH, -a), Vec2::new(WIDTH / 2.0, -1.5), Vec2::new(0.0, -a)],
        &[0.3, 0.3],
    )
}

/// Four dispersing arcs forming a diamond; 1-controllable.
pub fn star_spec() -> CellSpec {
    let a = OPENING_HALF_HEIGHT;
    let mut arcs = polyarc(
        &[Vec2::new(0.0, a), Vec2::new(WIDTH / 2.0, 1.5), Vec2::new(WIDTH, a)],
        &[0.3, 0.3],
    );
    arcs.extend(bottom());
    spec(arcs)
}

/// The star cell with a tall tail on top: the tail-facing side of the disk
/// is not illuminated, so the cell is not 1-controllable.
pub fn tail_spec() -> CellSpec {
    tail_spec_with(1.0, 3.0)
}

/// Tail of half width `hw` (at the base, `y = 0.8`) and apex height `h`.
pub fn tail_spec_with(hw: f64, h: f64) -> CellSpec {
    let a = OPENING_HALF_HEIGHT;
    let mid = WIDTH / 2.0;
    let mut arcs = polyarc(
        &[
            Vec2::new(0.0, a),
            Vec2::new(mid - hw, 0.8),
            Vec2::new(mid, h),
            Vec2::new(mid + hw, 0.8),
            Vec2::new(WIDTH, a),
        ],
        &[0.1, 0.1, 0.1, 0.1],
    );
    arcs.extend(bottom());
    spec(arcs)
}

/// A thin tail whose two walls are lit from nowhere on the disk.
pub fn narrow_tail_spec() -> CellSpec {
    let a = OPENING_HALF_HEIGHT;
    let mid = WIDTH / 2.0;
    let mut arcs = polyarc(
        &[
            Vec2::new(0.0, a),
            Vec2::new(mid - 0.3, 0.8),
            Vec2::new(mid, 4.0),
            Vec2::new(mid + 0.3, 0.8),
            Vec2::new(WIDTH, a),
        ],
        &[0.1, 0.02, 0.02, 0.1],
    );
    arcs.extend(bottom());
    spec(arcs)
}

/// Two arcs only (a taller opening makes this a valid cell).
pub fn two_arc_spec() -> CellSpec {
    let a = 1.0;
    let top = ArcSpec::through(Vec2::new(0.0, a), Vec2::new(WIDTH, a), 0.2, center());
    let bot = ArcSpec::through(Vec2::new(WIDTH, -a), Vec2::new(0.0, -a), 0.2, center());
    CellSpec {
        width: WIDTH,
        opening_half_height: a,
        disk_radius: DISK_RADIUS,
        arcs: vec![top, bot],
    }
}

/// Star cell whose first arc is replaced by a circle concentric with the
/// disk. Fails validation (the arc is not a wall chain), so it is only
/// usable through [`Cell::new_unchecked`].
pub fn concentric_spec() -> CellSpec {
    let mut s = star_spec();
    s.arcs[0] = ArcSpec {
        center: center(),
        radius: 1.2,
        span: (0.9, 2.2),
    };
    s
}

pub fn star_cell() -> Cell {
    build_cell(star_spec()).expect("star fixture is a valid cell")
}

pub fn tail_cell() -> Cell {
    build_cell(tail_spec()).expect("tail fixture is a valid cell")
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::cell::CellError;

    #[test]
    fn fixtures_validate() {
        star_cell();
        tail_cell();
        build_cell(narrow_tail_spec()).unwrap();
        build_cell(two_arc_spec()).unwrap();
    }

    #[test]
    fn rejections() {
        let mut s = star_spec();
        s.disk_radius = WIDTH / 2.0;
        assert!(matches!(build_cell(s), Err(CellError::DiskTouchesWall(_))));

        let mut s = star_spec();
        // flip arc 0 so it bulges away from the disk
        let a0 = s.arcs[0];
        let p0 = a0.start_point();
        let p1 = a0.end_point();
        let far = Vec2::new(-10.0, 10.0);
        s.arcs[0] = ArcSpec::through(p0, p1, 0.3, far);
        assert_eq!(build_cell(s).unwrap_err().condition(), 1);
        let mut s = star_spec();
        s.arcs[0] = ArcSpec::through(p0, p1, 0.3, far);
        assert!(matches!(build_cell(s), Err(CellError::NonDispersingArc { arc: 0 })));

        let mut s = star_spec();
        s.arcs.pop();
        assert!(matches!(build_cell(s), Err(CellError::NonClosedBoundary(_))));
    }
}
