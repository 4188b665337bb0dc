use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{Side, Vec2};

use super::state::Role;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum EventKind {
    WallHit { arc: usize },
    DiskHit { disk: usize, phi: f64, omega_pre: f64, omega_post: f64 },
    CellTransfer { to: usize },
    Exit { side: Side },
    Injection { side: Side },
}

impl EventKind {
    pub fn name(&self) -> &'static str {
        match self {
            EventKind::WallHit { .. } => "wall",
            EventKind::DiskHit { .. } => "disk",
            EventKind::CellTransfer { .. } => "transfer",
            EventKind::Exit { .. } => "exit",
            EventKind::Injection { .. } => "inject",
        }
    }

    pub fn is_disk_hit(&self) -> bool {
        matches!(self, EventKind::DiskHit { .. })
    }
}

/// One record of the trace. `cell` is the cell the particle was in when
/// the event happened.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Event {
    pub t: f64,
    pub particle: u64,
    pub role: Role,
    pub cell: usize,
    pub point: Vec2,
    pub v_pre: Vec2,
    pub v_post: Vec2,
    pub kind: EventKind,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum UndefinedKind {
    Corner,
    TangentDisk,
    SimultaneousDiskHit,
    /// The particle found no boundary ahead (it is outside its cell).
    Lost,
}

/// An event the dynamics does not define; the state is inadmissible.
#[derive(Debug, Clone, Copy, PartialEq, Error, Serialize, Deserialize)]
#[error("undefined event {kind:?} at t = {t} (particle {particle}{})", other.map(|o| format!(", with particle {o}")).unwrap_or_default())]
pub struct UndefinedEvent {
    pub kind: UndefinedKind,
    pub t: f64,
    pub particle: u64,
    pub other: Option<u64>,
}
