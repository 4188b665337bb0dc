use serde::{Deserialize, Serialize};

use crate::geometry::angular::wrap_angle;
use crate::geometry::{Chain, Vec2};

/// Angular position and velocity of one disk.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct DiskState {
    pub phi: f64,
    pub omega: f64,
}

impl DiskState {
    pub fn new(phi: f64, omega: f64) -> Self {
        DiskState {
            phi: wrap_angle(phi),
            omega,
        }
    }

    /// Free rotation over `dt`.
    pub fn advanced(self, dt: f64) -> Self {
        DiskState {
            phi: wrap_angle(self.phi + self.omega * dt),
            omega: self.omega,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Role {
    Resident,
    Driver,
    Tracer,
    Controller,
}

impl Role {
    pub fn as_str(self) -> &'static str {
        match self {
            Role::Resident => "resident",
            Role::Driver => "driver",
            Role::Tracer => "tracer",
            Role::Controller => "controller",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Some(match s {
            "resident" => Role::Resident,
            "driver" => Role::Driver,
            "tracer" => Role::Tracer,
            "controller" => Role::Controller,
            _ => return None,
        })
    }
}

/// A particle at the state time; `q` is in global coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Particle {
    pub id: u64,
    pub cell: usize,
    pub q: Vec2,
    pub v: Vec2,
    pub role: Role,
}

/// A point of the phase space: particles, disks and the clock.
#[derive(Debug, Clone, PartialEq)]
pub struct SystemState {
    pub t: f64,
    pub chain: Chain,
    pub particles: Vec<Particle>,
    pub disks: Vec<DiskState>,
}

impl SystemState {
    /// Empty chain with every disk at rest at angle zero.
    pub fn ground(chain: Chain) -> Self {
        let n = chain.n_cells();
        SystemState {
            t: 0.0,
            chain,
            particles: Vec::new(),
            disks: vec![DiskState::default(); n],
        }
    }

    pub fn is_ground(&self) -> bool {
        self.particles.is_empty() && self.disks.iter().all(|d| d.phi == 0.0 && d.omega == 0.0)
    }

    /// `Σ |v|² + Σ ω²`.
    pub fn energy(&self) -> f64 {
        self.particles.iter().map(|p| p.v.norm_sq()).sum::<f64>()
            + self.disks.iter().map(|d| d.omega * d.omega).sum::<f64>()
    }

    pub fn particle(&self, id: u64) -> Option<&Particle> {
        self.particles.iter().find(|p| p.id == id)
    }

    pub fn next_free_id(&self) -> u64 {
        self.particles.iter().map(|p| p.id + 1).max().unwrap_or(0)
    }
}

/// Negate every particle velocity and every disk angular velocity.
pub fn reverse(state: &SystemState) -> SystemState {
    let mut s = state.clone();
    for p in &mut s.particles {
        p.v = -p.v;
    }
    for d in &mut s.disks {
        d.omega = -d.omega;
    }
    s
}
