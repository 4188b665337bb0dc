//! Cell geometry: a box bounded by two vertical openings and dispersing
//! circular arcs, with a freely rotating disk at its center.

use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use super::angular::wrap_angle;
use super::Vec2;

/// One circular arc of the outer boundary.
///
/// The arc runs counterclockwise (around `center`) from `span.0` to `span.1`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ArcSpec {
    pub center: Vec2,
    pub radius: f64,
    pub span: (f64, f64),
}

impl ArcSpec {
    /// Arc through `p0` and `p1` whose sagitta is `sag`, bulging toward `toward`.
    ///
    /// The circle center ends up on the far side of the chord from `toward`,
    /// which makes the arc dispersing for a domain containing `toward`.
    pub fn through(p0: Vec2, p1: Vec2, sag: f64, toward: Vec2) -> ArcSpec {
        let mid = (p0 + p1) * 0.5;
        let chord = p1 - p0;
        let half = 0.5 * chord.norm();
        let mut n = chord.perp().normalized();
        if n.dot(toward - mid) > 0.0 {
            n = -n;
        }
        let radius = (sag * sag + half * half) / (2.0 * sag);
        let center = mid + n * (radius - sag);
        let a0 = (p0 - center).angle();
        let a1 = (p1 - center).angle();
        // the short way round
        let d = super::angular::wrap_signed(a1 - a0);
        let span = if d > 0.0 { (a0, a1) } else { (a1, a0) };
        ArcSpec {
            center,
            radius,
            span,
        }
    }

    pub fn len(&self) -> f64 {
        let l = wrap_angle(self.span.1 - self.span.0);
        if l == 0.0 {
            TAU
        } else {
            l
        }
    }

    pub fn start_point(&self) -> Vec2 {
        self.center + Vec2::from_angle(self.span.0) * self.radius
    }

    pub fn end_point(&self) -> Vec2 {
        self.center + Vec2::from_angle(self.span.1) * self.radius
    }

    pub fn point_at(&self, s: f64) -> Vec2 {
        self.center + Vec2::from_angle(self.span.0 + s * self.len()) * self.radius
    }

    /// Whether the direction `ang` (seen from the center) lies within the span.
    #[inline]
    pub fn in_span(&self, ang: f64) -> bool {
        wrap_angle(ang - self.span.0) <= self.len()
    }
}

/// Declarative cell description.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellSpec {
    /// Width `L`; the cell occupies `x ∈ [0, L]`.
    pub width: f64,
    /// Half height `a` of both openings.
    pub opening_half_height: f64,
    pub disk_radius: f64,
    pub arcs: Vec<ArcSpec>,
}

impl CellSpec {
    pub fn disk_center(&self) -> Vec2 {
        Vec2::new(0.5 * self.width, 0.0)
    }

    /// Distance from the openings to the nearest disk point.
    pub fn d(&self) -> f64 {
        0.5 * self.width - self.disk_radius
    }
}

/// Which cell condition a rejected spec violates.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum CellError {
    #[error("invalid cell parameters: {0}")]
    InvalidParameters(String),
    #[error("condition 1 violated: boundary is not a closed curve ({0})")]
    NonClosedBoundary(String),
    #[error("condition 1 violated: arc {arc} is not dispersing")]
    NonDispersingArc { arc: usize },
    #[error("condition 2 violated: disk touches the boundary ({0})")]
    DiskTouchesWall(String),
    #[error("condition 3 violated: boundary is not star-shaped around the disk center (near {point:?})")]
    NotStarShaped { point: Vec2 },
}

impl CellError {
    /// The numbered cell condition violated.
    pub fn condition(&self) -> u8 {
        match self {
            CellError::InvalidParameters(_)
            | CellError::NonClosedBoundary(_)
            | CellError::NonDispersingArc { .. } => 1,
            CellError::DiskTouchesWall(_) => 2,
            CellError::NotStarShaped { .. } => 3,
        }
    }
}

/// Sampling density used while validating.
#[derive(Debug, Clone, Copy)]
pub struct ValidationConfig {
    pub boundary_samples: usize,
    pub tolerance: f64,
}

impl Default for ValidationConfig {
    fn default() -> Self {
        ValidationConfig {
            boundary_samples: 4096,
            tolerance: 1e-9,
        }
    }
}

/// Boundary piece struck by a ray.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Surface {
    Arc(usize),
    Disk,
    LeftOpening,
    RightOpening,
}

/// First boundary contact of a ray inside one cell, in local coordinates.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocalContact {
    /// Ray parameter: the contact is at `q + v * t`.
    pub t: f64,
    pub point: Vec2,
    pub surface: Surface,
}

/// A validated cell.
#[derive(Debug, Clone, PartialEq)]
pub struct Cell {
    spec: CellSpec,
    corners: Vec<Vec2>,
    validated: bool,
}

impl Cell {
    /// Build without checking the cell conditions; used for degenerate test
    /// geometries. Contact finding still works.
    pub fn new_unchecked(spec: CellSpec) -> Cell {
        let corners = corner_points(&spec);
        Cell {
            spec,
            corners,
            validated: false,
        }
    }

    pub fn spec(&self) -> &CellSpec {
        &self.spec
    }

    pub fn corners(&self) -> &[Vec2] {
        &self.corners
    }

    pub fn is_validated(&self) -> bool {
        self.validated
    }

    pub fn width(&self) -> f64 {
        self.spec.width
    }

    pub fn a(&self) -> f64 {
        self.spec.opening_half_height
    }

    pub fn r(&self) -> f64 {
        self.spec.disk_radius
    }

    pub fn arcs(&self) -> &[ArcSpec] {
        &self.spec.arcs
    }

    pub fn disk_center(&self) -> Vec2 {
        self.spec.disk_center()
    }

    /// Point on the disk rim at angle `theta` (counterclockwise from +x).
    pub fn disk_point(&self, theta: f64) -> Vec2 {
        self.disk_center() + Vec2::from_angle(theta) * self.r()
    }

    /// Distance from `p` (local coordinates) to the nearest corner.
    pub fn corner_distance(&self, p: Vec2) -> f64 {
        self.corners
            .iter()
            .map(|c| c.dist(p))
            .fold(f64::INFINITY, f64::min)
    }

    /// Earliest contact of the ray `q + v t`, `t > t_min`, with the full
    /// cell boundary (arcs, disk, openings). `None` means the ray leaves
    /// the cell without meeting any piece, which only happens for rays that
    /// start outside.
    pub fn first_contact(&self, q: Vec2, v: Vec2, t_min: f64) -> Option<LocalContact> {
        self.first_contact_filtered(q, v, t_min, true)
    }

    /// As [`Cell::first_contact`], optionally ignoring the disk.
    pub fn first_contact_filtered(
        &self,
        q: Vec2,
        v: Vec2,
        t_min: f64,
        include_disk: bool,
    ) -> Option<LocalContact> {
        let mut best: Option<LocalContact> = None;
        let mut consider = |t: f64, surface: Surface| {
            if t > t_min && best.is_none_or(|b| t < b.t) {
                best = Some(LocalContact {
                    t,
                    point: q + v * t,
                    surface,
                });
            }
        };
        for (k, arc) in self.spec.arcs.iter().enumerate() {
            if let Some((t1, t2)) = circle_roots(q, v, arc.center, arc.radius) {
                for t in [t1, t2] {
                    if t > t_min {
                        let p = q + v * t;
                        if arc.in_span((p - arc.center).angle()) {
                            consider(t, Surface::Arc(k));
                        }
                    }
                }
            }
        }
        if include_disk {
            let c = self.disk_center();
            // only the entering root; the domain lies outside the disk
            if (q - c).dot(v) < 0.0 {
                if let Some((t1, _)) = circle_roots(q, v, c, self.r()) {
                    consider(t1, Surface::Disk);
                }
            }
        }
        let a = self.a();
        if v.x < 0.0 {
            let t = -q.x / v.x;
            if (q.y + v.y * t).abs() <= a {
                consider(t, Surface::LeftOpening);
            }
        } else if v.x > 0.0 {
            let t = (self.width() - q.x) / v.x;
            if (q.y + v.y * t).abs() <= a {
                consider(t, Surface::RightOpening);
            }
        }
        best
    }

    /// Is `p` strictly inside the cell (inside the box, outside the disk)?
    pub fn contains_interior(&self, p: Vec2) -> bool {
        let c = self.disk_center();
        let rel = p - c;
        if rel.norm() <= self.r() {
            return false;
        }
        if p.x <= 0.0 || p.x >= self.width() {
            return false;
        }
        // star-shaped around c: compare with the first boundary hit outward
        let dir = rel.normalized();
        match self.first_contact_filtered(c, dir, 0.0, false) {
            Some(hit) => hit.t > rel.norm(),
            None => false,
        }
    }
}

/// Both roots `t1 <= t2` of `|q + v t - c| = r`, computed stably.
#[inline]
pub fn circle_roots(q: Vec2, v: Vec2, c: Vec2, r: f64) -> Option<(f64, f64)> {
    let w = q - c;
    let a = v.norm_sq();
    let b = w.dot(v);
    let cc = w.norm_sq() - r * r;
    let disc = b * b - a * cc;
    if disc < 0.0 || a == 0.0 {
        return None;
    }
    let s = disc.sqrt();
    let qq = if b >= 0.0 { -b - s } else { -b + s };
    if qq == 0.0 {
        return Some((0.0, 0.0));
    }
    let r1 = qq / a;
    let r2 = cc / qq;
    Some(if r1 <= r2 { (r1, r2) } else { (r2, r1) })
}

fn corner_points(spec: &CellSpec) -> Vec<Vec2> {
    let mut pts: Vec<Vec2> = Vec::new();
    let tol = 1e-9 * spec.width.max(1.0);
    let mut push = |p: Vec2| {
        if !pts.iter().any(|q| q.dist(p) < tol) {
            pts.push(p);
        }
    };
    let a = spec.opening_half_height;
    let l = spec.width;
    for p in [
        Vec2::new(0.0, a),
        Vec2::new(0.0, -a),
        Vec2::new(l, a),
        Vec2::new(l, -a),
    ] {
        push(p);
    }
    for arc in &spec.arcs {
        push(arc.start_point());
        push(arc.end_point());
    }
    pts
}

/// Validate `spec` against the three cell conditions.
pub fn build_cell(spec: CellSpec) -> Result<Cell, CellError> {
    build_cell_with(spec, ValidationConfig::default())
}

pub fn build_cell_with(spec: CellSpec, cfg: ValidationConfig) -> Result<Cell, CellError> {
    let l = spec.width;
    let a = spec.opening_half_height;
    let r = spec.disk_radius;
    if !(l.is_finite() && a.is_finite() && r.is_finite()) || l <= 0.0 || a <= 0.0 || r <= 0.0 {
        return Err(CellError::InvalidParameters(format!(
            "need finite L > 0, a > 0, r > 0 (L={l}, a={a}, r={r})"
        )));
    }
    for (k, arc) in spec.arcs.iter().enumerate() {
        if !(arc.radius.is_finite() && arc.radius > 0.0 && arc.center.is_finite()) {
            return Err(CellError::InvalidParameters(format!("arc {k}: bad center or radius")));
        }
        if !(arc.span.0.is_finite() && arc.span.1.is_finite()) || wrap_angle(arc.span.1 - arc.span.0) == 0.0 {
            return Err(CellError::InvalidParameters(format!("arc {k}: degenerate span")));
        }
    }
    let tol = cfg.tolerance * l.max(1.0) * 1e3;
    check_closed(&spec, tol)?;
    let cell = Cell::new_unchecked(spec);
    check_dispersing(&cell, cfg.boundary_samples)?;
    check_disk_clear(&cell, cfg.boundary_samples, cfg.tolerance)?;
    check_star(&cell, cfg.boundary_samples, cfg.tolerance)?;
    Ok(Cell {
        validated: true,
        ..cell
    })
}

/// Arcs must chain `(0,a) → … → (L,a)` and `(L,-a) → … → (0,-a)`, each arc
/// used once in either direction.
fn check_closed(spec: &CellSpec, tol: f64) -> Result<(), CellError> {
    let a = spec.opening_half_height;
    let l = spec.width;
    if spec.arcs.is_empty() {
        return Err(CellError::NonClosedBoundary("no arcs".into()));
    }
    let mut used = vec![false; spec.arcs.len()];
    for (from, to) in [
        (Vec2::new(0.0, a), Vec2::new(l, a)),
        (Vec2::new(l, -a), Vec2::new(0.0, -a)),
    ] {
        let mut cur = from;
        let mut steps = 0;
        while cur.dist(to) > tol || steps == 0 {
            let next = spec.arcs.iter().enumerate().find_map(|(k, arc)| {
                if used[k] {
                    return None;
                }
                if arc.start_point().dist(cur) <= tol {
                    Some((k, arc.end_point()))
                } else if arc.end_point().dist(cur) <= tol {
                    Some((k, arc.start_point()))
                } else {
                    None
                }
            });
            match next {
                Some((k, p)) => {
                    used[k] = true;
                    cur = p;
                    steps += 1;
                }
                None => {
                    return Err(CellError::NonClosedBoundary(format!(
                        "no arc continues the boundary from ({:.6}, {:.6})",
                        cur.x, cur.y
                    )))
                }
            }
        }
    }
    if let Some(k) = used.iter().position(|u| !u) {
        return Err(CellError::NonClosedBoundary(format!("arc {k} is not part of the boundary")));
    }
    Ok(())
}

fn check_dispersing(cell: &Cell, samples: usize) -> Result<(), CellError> {
    let c = cell.disk_center();
    let per_arc = (samples / cell.arcs().len().max(1)).max(16);
    for (k, arc) in cell.arcs().iter().enumerate() {
        for i in 0..per_arc {
            let s = (i as f64 + 0.5) / per_arc as f64;
            let p = arc.point_at(s);
            // inward normal of the cell at p must point away from the arc center
            if (p - arc.center).dot(c - p) <= 0.0 {
                return Err(CellError::NonDispersingArc { arc: k });
            }
        }
    }
    Ok(())
}

fn check_disk_clear(cell: &Cell, samples: usize, tol: f64) -> Result<(), CellError> {
    let c = cell.disk_center();
    let r = cell.r();
    let l = cell.width();
    if cell.spec.d() <= tol * l {
        return Err(CellError::DiskTouchesWall(format!(
            "disk reaches the opening lines (L/2 - r = {})",
            cell.spec.d()
        )));
    }
    for (k, arc) in cell.arcs().iter().enumerate() {
        // nearest point of the full circle, if inside the span; else endpoints
        let dir = c - arc.center;
        let mut dmin = arc.start_point().dist(c).min(arc.end_point().dist(c));
        if arc.in_span(dir.angle()) {
            dmin = dmin.min((dir.norm() - arc.radius).abs());
        }
        if arc.in_span((-dir).angle()) {
            dmin = dmin.min(dir.norm() + arc.radius);
        }
        let per_arc = (samples / cell.arcs().len().max(1)).max(16);
        for i in 0..=per_arc {
            dmin = dmin.min(arc.point_at(i as f64 / per_arc as f64).dist(c));
        }
        if dmin <= r + tol * l {
            return Err(CellError::DiskTouchesWall(format!("arc {k} comes within {dmin} of the disk center")));
        }
    }
    Ok(())
}

fn check_star(cell: &Cell, samples: usize, tol: f64) -> Result<(), CellError> {
    let c = cell.disk_center();
    let l = cell.width();
    let a = cell.a();
    let mut pts: Vec<Vec2> = Vec::with_capacity(samples + 64);
    let per_arc = (samples / cell.arcs().len().max(1)).max(16);
    for arc in cell.arcs() {
        for i in 0..per_arc {
            pts.push(arc.point_at((i as f64 + 0.5) / per_arc as f64));
        }
    }
    for i in 0..32 {
        let y = -a + 2.0 * a * (i as f64 + 0.5) / 32.0;
        pts.push(Vec2::new(0.0, y));
        pts.push(Vec2::new(l, y));
    }
    for z in pts {
        let rel = z - c;
        let dist = rel.norm();
        let dir = rel * (1.0 / dist);
        match cell.first_contact_filtered(c, dir, 0.0, false) {
            Some(hit) if (hit.t - dist).abs() <= tol * l * 1e3 => {}
            _ => return Err(CellError::NotStarShaped { point: z }),
        }
    }
    Ok(())
}
