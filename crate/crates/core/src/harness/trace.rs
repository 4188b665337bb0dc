//! Flat text traces: one record per line, floats with 17 significant
//! digits, and a self-contained consistency check.
//!
//! Besides the engine events a trace holds a `start` record for every
//! particle present initially, an `end` record for every particle still
//! present at the end, and `spin-start`/`spin-end` records for every disk.
//! With those, each velocity and angular velocity in the file is checked
//! against a neighbouring record.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use thiserror::Error;

use crate::dynamics::{DiskState, Event, EventKind, Particle, Role, SystemState};
use crate::geometry::angular::wrap_signed;
use crate::geometry::{Side, Vec2};

pub const HEADER: &str = "# scatterchain trace v1";
const COLUMNS: &str = "# t id role cell kind x y vx_pre vy_pre vx_post vy_post a b c d";

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Record {
    Event(Event),
    Start { t: f64, particle: Particle },
    End { t: f64, particle: Particle },
    SpinStart { t: f64, disk: usize, state: DiskState },
    SpinEnd { t: f64, disk: usize, state: DiskState },
}

impl Record {
    pub fn t(&self) -> f64 {
        match *self {
            Record::Event(e) => e.t,
            Record::Start { t, .. } | Record::End { t, .. } | Record::SpinStart { t, .. } | Record::SpinEnd { t, .. } => t,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct Trace {
    pub records: Vec<Record>,
}

#[derive(Debug, Error, PartialEq)]
#[error("trace line {line}: {msg}")]
pub struct TraceParseError {
    pub line: usize,
    pub msg: String,
}

impl Trace {
    /// Full trace of a run from `initial` to `last` through `events`.
    pub fn record(initial: &SystemState, events: &[Event], last: &SystemState) -> Trace {
        let mut records = Vec::with_capacity(events.len() + 2 * (initial.disks.len() + initial.particles.len()));
        for (disk, &state) in initial.disks.iter().enumerate() {
            records.push(Record::SpinStart { t: initial.t, disk, state });
        }
        for &particle in &initial.particles {
            records.push(Record::Start { t: initial.t, particle });
        }
        records.extend(events.iter().map(|&e| Record::Event(e)));
        for &particle in &last.particles {
            records.push(Record::End { t: last.t, particle });
        }
        for (disk, &state) in last.disks.iter().enumerate() {
            records.push(Record::SpinEnd { t: last.t, disk, state });
        }
        Trace { records }
    }

    /// Engine events only.
    pub fn events(&self) -> Vec<Event> {
        self.records
            .iter()
            .filter_map(|r| match r {
                Record::Event(e) => Some(*e),
                _ => None,
            })
            .collect()
    }

    pub fn to_text(&self) -> String {
        let mut s = String::new();
        s.push_str(HEADER);
        s.push('\n');
        s.push_str(COLUMNS);
        s.push('\n');
        for r in &self.records {
            write_record(&mut s, r);
            s.push('\n');
        }
        s
    }

    pub fn parse(text: &str) -> Result<Trace, TraceParseError> {
        let mut lines = text.lines().enumerate();
        match lines.next() {
            Some((_, h)) if h.trim_end() == HEADER => {}
            _ => {
                return Err(TraceParseError {
                    line: 1,
                    msg: format!("expected header '{HEADER}'"),
                })
            }
        }
        let mut records = Vec::new();
        for (i, line) in lines {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            records.push(parse_record(line).map_err(|msg| TraceParseError { line: i + 1, msg })?);
        }
        Ok(Trace { records })
    }
}

fn f(x: f64) -> String {
    format!("{x:.16e}")
}

fn side_str(s: Side) -> &'static str {
    match s {
        Side::Left => "left",
        Side::Right => "right",
    }
}

fn write_record(s: &mut String, r: &Record) {
    let dash = "-";
    match *r {
        Record::Event(e) => {
            let aux: [String; 4] = match e.kind {
                EventKind::WallHit { arc } => [arc.to_string(), dash.into(), dash.into(), dash.into()],
                EventKind::DiskHit {
                    disk,
                    phi,
                    omega_pre,
                    omega_post,
                } => [disk.to_string(), f(phi), f(omega_pre), f(omega_post)],
                EventKind::CellTransfer { to } => [to.to_string(), dash.into(), dash.into(), dash.into()],
                EventKind::Exit { side } | EventKind::Injection { side } => {
                    [side_str(side).into(), dash.into(), dash.into(), dash.into()]
                }
            };
            let _ = write!(
                s,
                "{} {} {} {} {} {} {} {} {} {} {} {} {} {} {}",
                f(e.t),
                e.particle,
                e.role.as_str(),
                e.cell,
                e.kind.name(),
                f(e.point.x),
                f(e.point.y),
                f(e.v_pre.x),
                f(e.v_pre.y),
                f(e.v_post.x),
                f(e.v_post.y),
                aux[0],
                aux[1],
                aux[2],
                aux[3]
            );
        }
        Record::Start { t, particle: p } | Record::End { t, particle: p } => {
            let kind = if matches!(r, Record::Start { .. }) { "start" } else { "end" };
            let _ = write!(
                s,
                "{} {} {} {} {kind} {} {} {} {} {} {} - - - -",
                f(t),
                p.id,
                p.role.as_str(),
                p.cell,
                f(p.q.x),
                f(p.q.y),
                f(p.v.x),
                f(p.v.y),
                f(p.v.x),
                f(p.v.y)
            );
        }
        Record::SpinStart { t, disk, state } | Record::SpinEnd { t, disk, state } => {
            let kind = if matches!(r, Record::SpinStart { .. }) { "spin-start" } else { "spin-end" };
            let _ = write!(
                s,
                "{} - - {disk} {kind} - - - - - - {} {} - -",
                f(t),
                f(state.phi),
                f(state.omega)
            );
        }
    }
}

fn parse_record(line: &str) -> Result<Record, String> {
    let c: Vec<&str> = line.split_whitespace().collect();
    if c.len() != 15 {
        return Err(format!("expected 15 columns, found {}", c.len()));
    }
    let num = |i: usize| -> Result<f64, String> {
        c[i].parse::<f64>().map_err(|_| format!("column {} is not a number: '{}'", i + 1, c[i]))
    };
    let int = |i: usize| -> Result<usize, String> {
        c[i].parse::<usize>().map_err(|_| format!("column {} is not an index: '{}'", i + 1, c[i]))
    };
    let side = |i: usize| -> Result<Side, String> {
        match c[i] {
            "left" => Ok(Side::Left),
            "right" => Ok(Side::Right),
            other => Err(format!("column {} is not a side: '{other}'", i + 1)),
        }
    };
    let t = num(0)?;
    let kind = c[4];
    if kind == "spin-start" || kind == "spin-end" {
        let disk = int(3)?;
        let state = DiskState {
            phi: num(11)?,
            omega: num(12)?,
        };
        return Ok(if kind == "spin-start" {
            Record::SpinStart { t, disk, state }
        } else {
            Record::SpinEnd { t, disk, state }
        });
    }
    let id = c[1].parse::<u64>().map_err(|_| format!("column 2 is not a particle id: '{}'", c[1]))?;
    let role = Role::parse(c[2]).ok_or_else(|| format!("unknown role '{}'", c[2]))?;
    let cell = int(3)?;
    let point = Vec2::new(num(5)?, num(6)?);
    let v_pre = Vec2::new(num(7)?, num(8)?);
    let v_post = Vec2::new(num(9)?, num(10)?);
    if kind == "start" || kind == "end" {
        if v_pre != v_post {
            return Err("start and end records carry one velocity".into());
        }
        let particle = Particle {
            id,
            cell,
            q: point,
            v: v_pre,
            role,
        };
        return Ok(if kind == "start" {
            Record::Start { t, particle }
        } else {
            Record::End { t, particle }
        });
    }
    let kind = match kind {
        "wall" => EventKind::WallHit { arc: int(11)? },
        "disk" => EventKind::DiskHit {
            disk: int(11)?,
            phi: num(12)?,
            omega_pre: num(13)?,
            omega_post: num(14)?,
        },
        "transfer" => EventKind::CellTransfer { to: int(11)? },
        "exit" => EventKind::Exit { side: side(11)? },
        "inject" => EventKind::Injection { side: side(11)? },
        other => return Err(format!("unknown record kind '{other}'")),
    };
    Ok(Record::Event(Event {
        t,
        particle: id,
        role,
        cell,
        point,
        v_pre,
        v_post,
        kind,
    }))
}

/// Outcome of [`verify`]: the worst mismatch of each kind and every
/// violation found.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TraceCheck {
    pub records: usize,
    /// Largest relative energy change across a single collision.
    pub max_event_energy: f64,
    /// Largest relative gap between the energy of the latest records and
    /// the initial energy plus injections minus exits.
    pub energy_drift: f64,
    /// Largest relative velocity jump between consecutive records of one
    /// particle or disk.
    pub max_continuity: f64,
    /// Largest position mismatch along a free flight, relative to the
    /// distance flown (at least 1).
    pub max_flight: f64,
    pub violations: Vec<String>,
}

impl TraceCheck {
    pub fn passed(&self) -> bool {
        self.violations.is_empty()
    }
}

/// Thresholds of [`verify`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VerifyTolerances {
    pub energy: f64,
    pub continuity: f64,
    pub flight: f64,
    pub angle: f64,
    /// Cumulative relative energy drift.
    pub drift: f64,
}

impl Default for VerifyTolerances {
    fn default() -> Self {
        VerifyTolerances {
            energy: 1e-12,
            continuity: 1e-12,
            flight: 1e-9,
            angle: 1e-9,
            drift: 1e-8,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Life {
    Alive,
    Exited,
    Ended,
}

/// Latest record of one particle.
#[derive(Debug, Clone, Copy)]
struct Last {
    t: f64,
    q: Vec2,
    v: Vec2,
    role: Role,
    life: Life,
}

impl Last {
    fn new(t: f64, q: Vec2, v: Vec2, role: Role) -> Last {
        Last {
            t,
            q,
            v,
            role,
            life: Life::Alive,
        }
    }
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1e-300)
}

fn vrel(a: Vec2, b: Vec2) -> f64 {
    (a - b).norm() / a.norm().max(b.norm()).max(1e-300)
}

/// Check a trace on its own: time order, energy at every collision and in
/// total, continuity of every particle and disk between its records.
pub fn verify(trace: &Trace, tol: &VerifyTolerances) -> TraceCheck {
    let mut out = TraceCheck {
        records: trace.records.len(),
        ..TraceCheck::default()
    };
    let mut bad = |out: &mut TraceCheck, msg: String| {
        if out.violations.len() < 100 {
            out.violations.push(msg);
        }
    };
    let mut particles: HashMap<u64, Last> = HashMap::new();
    // last known (t, phi, omega) of each disk
    let mut disks: HashMap<usize, (f64, f64, f64)> = HashMap::new();
    let mut ended: HashSet<usize> = HashSet::new();
    let mut total = 0.0f64;
    let mut scale = 0.0f64;
    let mut last_t = f64::NEG_INFINITY;
    for (i, r) in trace.records.iter().enumerate() {
        let line = i + 3;
        let t = r.t();
        if !t.is_finite() || t < last_t {
            bad(&mut out, format!("line {line}: time {t} is out of order"));
        }
        last_t = last_t.max(t);
        match *r {
            Record::SpinStart { t, disk, state } => {
                if disks.insert(disk, (t, state.phi, state.omega)).is_some() {
                    bad(&mut out, format!("line {line}: disk {disk} starts twice"));
                }
                total += state.omega * state.omega;
            }
            Record::SpinEnd { t, disk, state } => match disks.get(&disk).copied().filter(|_| ended.insert(disk)) {
                Some((t0, phi, omega)) => {
                    out.max_continuity = out.max_continuity.max(rel(omega, state.omega));
                    if rel(omega, state.omega) > tol.continuity {
                        bad(&mut out, format!("line {line}: disk {disk} ends at {} but spins at {omega}", state.omega));
                    }
                    let drift = wrap_signed(phi + omega * (t - t0) - state.phi).abs();
                    if drift > tol.angle {
                        bad(&mut out, format!("line {line}: disk {disk} angle off by {drift:.3e}"));
                    }
                }
                None => bad(&mut out, format!("line {line}: disk {disk} has no start record or ends twice")),
            },
            Record::Start { t, particle: p } => {
                if particles.insert(p.id, Last::new(t, p.q, p.v, p.role)).is_some() {
                    bad(&mut out, format!("line {line}: particle {} starts twice", p.id));
                }
                total += p.v.norm_sq();
            }
            Record::End { t, particle: p } => {
                check_flight(&mut out, tol, &mut particles, line, p.id, t, p.q, p.v, p.role, &mut bad);
                if let Some(s) = particles.get_mut(&p.id) {
                    s.life = Life::Ended;
                }
            }
            Record::Event(e) => {
                let (pre, post) = (e.v_pre.norm_sq(), e.v_post.norm_sq());
                match e.kind {
                    EventKind::Injection { .. } => {
                        if particles.contains_key(&e.particle) {
                            bad(&mut out, format!("line {line}: particle {} injected twice", e.particle));
                        }
                        if e.v_pre != e.v_post {
                            bad(&mut out, format!("line {line}: injection changes the velocity"));
                        }
                        particles.insert(e.particle, Last::new(e.t, e.point, e.v_post, e.role));
                        total += post;
                        continue;
                    }
                    EventKind::WallHit { .. } => {
                        let d = rel(pre, post);
                        out.max_event_energy = out.max_event_energy.max(d);
                        if d > tol.energy {
                            bad(&mut out, format!("line {line}: wall hit changes the speed by {d:.3e}"));
                        }
                    }
                    EventKind::DiskHit {
                        disk,
                        phi,
                        omega_pre,
                        omega_post,
                    } => {
                        let d = rel(pre + omega_pre * omega_pre, post + omega_post * omega_post);
                        out.max_event_energy = out.max_event_energy.max(d);
                        if d > tol.energy {
                            bad(&mut out, format!("line {line}: disk hit changes the energy by {d:.3e}"));
                        }
                        match disks.get(&disk) {
                            Some(&(t0, phi0, omega0)) => {
                                let c = rel(omega0, omega_pre);
                                out.max_continuity = out.max_continuity.max(c);
                                if c > tol.continuity {
                                    bad(&mut out, format!("line {line}: disk {disk} spins at {omega_pre}, expected {omega0}"));
                                }
                                let drift = wrap_signed(phi0 + omega0 * (e.t - t0) - phi).abs();
                                if drift > tol.angle {
                                    bad(&mut out, format!("line {line}: disk {disk} angle off by {drift:.3e}"));
                                }
                            }
                            None => bad(&mut out, format!("line {line}: disk {disk} has no start record")),
                        }
                        disks.insert(disk, (e.t, phi, omega_post));
                    }
                    EventKind::CellTransfer { .. } | EventKind::Exit { .. } => {
                        if e.v_pre != e.v_post {
                            bad(&mut out, format!("line {line}: {} changes the velocity", e.kind.name()));
                        }
                    }
                }
                check_flight(&mut out, tol, &mut particles, line, e.particle, e.t, e.point, e.v_pre, e.role, &mut bad);
                if let Some(s) = particles.get_mut(&e.particle) {
                    s.t = e.t;
                    s.q = e.point;
                    s.v = e.v_post;
                    if let EventKind::Exit { .. } = e.kind {
                        s.life = Life::Exited;
                        total -= pre;
                    }
                }
            }
        }
        scale = scale.max(total.abs());
        let live: f64 = particles
            .values()
            .filter(|s| s.life != Life::Exited)
            .map(|s| s.v.norm_sq())
            .sum::<f64>()
            + disks.values().map(|d| d.2 * d.2).sum::<f64>();
        let m = scale.max(live.abs());
        if m > 0.0 {
            out.energy_drift = out.energy_drift.max((live - total).abs() / m);
        }
    }
    if out.energy_drift > tol.drift {
        let msg = format!("energy drifts by {:.3e}", out.energy_drift);
        bad(&mut out, msg);
    }
    for (id, s) in &particles {
        if s.life == Life::Alive {
            bad(&mut out, format!("particle {id} has no end or exit record"));
        }
    }
    for d in disks.keys().filter(|d| !ended.contains(d)) {
        bad(&mut out, format!("disk {d} has no spin-end record"));
    }
    out.violations.sort();
    out
}

#[allow(clippy::too_many_arguments)]
fn check_flight(
    out: &mut TraceCheck,
    tol: &VerifyTolerances,
    particles: &mut HashMap<u64, Last>,
    line: usize,
    id: u64,
    t: f64,
    point: Vec2,
    v: Vec2,
    role: Role,
    bad: &mut impl FnMut(&mut TraceCheck, String),
) {
    match particles.get(&id) {
        Some(&Last {
            t: t0,
            q: q0,
            v: v0,
            role: role0,
            life,
        }) => {
            if life != Life::Alive {
                bad(out, format!("line {line}: particle {id} moves after its exit or end record"));
                return;
            }
            if role0 != role {
                bad(out, format!("line {line}: particle {id} changes role"));
            }
            let c = vrel(v0, v);
            out.max_continuity = out.max_continuity.max(c);
            if c > tol.continuity {
                bad(out, format!("line {line}: particle {id} velocity jumps by {c:.3e}"));
            }
            let flown = (v0 * (t - t0)).norm().max(1.0);
            let m = (q0 + v0 * (t - t0) - point).norm() / flown;
            out.max_flight = out.max_flight.max(m);
            if m > tol.flight {
                bad(out, format!("line {line}: particle {id} is {m:.3e} off its flight line"));
            }
        }
        None => bad(out, format!("line {line}: particle {id} appears without a start record")),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{simulate, Injection, InjectionSchedule};
    use crate::geometry::{fixtures, Chain};
    use crate::tolerance::Tolerances;

    fn run() -> Trace {
        let tol = Tolerances::default();
        let mut s = SystemState::ground(Chain::new(fixtures::star_cell(), 2));
        s.disks[1] = DiskState::new(0.4, -0.8);
        s.particles.push(Particle {
            id: 0,
            cell: 0,
            q: Vec2::new(1.0, 0.3),
            v: Vec2::new(0.7, -0.45),
            role: Role::Resident,
        });
        let sched = InjectionSchedule {
            injections: vec![Injection {
                t: 0.5,
                id: 1,
                side: Side::Right,
                y: 0.1,
                v: Vec2::new(-2.0, 0.05),
                role: Role::Driver,
            }],
            ..Default::default()
        };
        let out = simulate(&s, &sched, 12.0, &tol).unwrap();
        assert!(out.trace.len() > 10);
        Trace::record(&s, &out.trace, &out.state)
    }

    #[test]
    fn text_round_trip_is_byte_stable() {
        let t = run();
        let text = t.to_text();
        let back = Trace::parse(&text).unwrap();
        assert_eq!(back, t);
        assert_eq!(back.to_text(), text);
    }

    #[test]
    fn clean_trace_verifies() {
        let c = verify(&run(), &VerifyTolerances::default());
        assert!(c.passed(), "{:?}", c.violations);
        assert!(c.energy_drift < 1e-12);
    }

    #[test]
    fn every_velocity_tamper_is_caught() {
        let t = run();
        let tol = VerifyTolerances::default();
        for i in 0..t.records.len() {
            for comp in 0..4 {
                let mut bad = t.clone();
                let touched = match &mut bad.records[i] {
                    Record::Event(e) => {
                        match comp {
                            0 => e.v_pre.x += 1e-6,
                            1 => e.v_pre.y += 1e-6,
                            2 => e.v_post.x += 1e-6,
                            _ => e.v_post.y += 1e-6,
                        }
                        true
                    }
                    Record::Start { particle, .. } | Record::End { particle, .. } if comp < 2 => {
                        if comp == 0 {
                            particle.v.x += 1e-6
                        } else {
                            particle.v.y += 1e-6
                        }
                        true
                    }
                    _ => false,
                };
                if touched {
                    assert!(!verify(&bad, &tol).passed(), "record {i} component {comp}");
                }
            }
        }
    }

    #[test]
    fn bad_lines_are_located() {
        let text = run().to_text().replacen(" wall ", " bounce ", 1);
        let e = Trace::parse(&text).unwrap_err();
        assert!(e.line > 2 && e.msg.contains("bounce"));
        assert_eq!(Trace::parse("hello\n").unwrap_err().line, 1);
    }
}
