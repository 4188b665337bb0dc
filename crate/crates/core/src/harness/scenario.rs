//! Scenario files: geometry, initial state, goal and tolerance overrides,
//! stored as TOML.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::dynamics::{DiskState, Particle, SystemState};
use crate::geometry::{build_cell, Cell, CellError, CellSpec, Chain, Side};
use crate::tolerance::Tolerances;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Geometry {
    /// Number of cells `N`.
    pub cells: usize,
    pub cell: CellSpec,
}

/// Initial state payload. Missing disks start at rest at angle zero.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Initial {
    #[serde(default)]
    pub t: f64,
    #[serde(default)]
    pub disks: Vec<DiskState>,
    #[serde(default)]
    pub particles: Vec<Particle>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum Goal {
    /// Free evolution over `duration`.
    Simulate { duration: f64 },
    CheckGeometry,
    /// One arc, or every arc when `arc` is absent.
    Illuminate {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        arc: Option<usize>,
    },
    SynthesizeEmpty,
    ControlDisk {
        disk: usize,
        phi: f64,
        omega: f64,
        delta: f64,
        #[serde(default = "default_side")]
        side: Side,
    },
    /// Forward over `duration`, reverse, forward again.
    ReverseCheck { duration: f64 },
}

fn default_side() -> Side {
    Side::Left
}

impl Goal {
    pub fn name(&self) -> &'static str {
        match self {
            Goal::Simulate { .. } => "simulate",
            Goal::CheckGeometry => "check-geometry",
            Goal::Illuminate { .. } => "illuminate",
            Goal::SynthesizeEmpty => "synthesize-empty",
            Goal::ControlDisk { .. } => "control-disk",
            Goal::ReverseCheck { .. } => "reverse-check",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    #[serde(default)]
    pub rng_seed: u64,
    pub geometry: Geometry,
    #[serde(default)]
    pub initial: Initial,
    pub goal: Goal,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tolerances: Option<Tolerances>,
}

#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("{0}")]
    Parse(String),
    #[error("invalid cell: {0}")]
    Cell(#[from] CellError),
    #[error("{0}")]
    Range(String),
    #[error("cannot read {path}: {source}")]
    Io { path: String, source: std::io::Error },
}

impl Scenario {
    pub fn parse(text: &str) -> Result<Scenario, ScenarioError> {
        let s: Scenario = toml::from_str(text).map_err(|e| ScenarioError::Parse(e.to_string()))?;
        s.check_ranges()?;
        Ok(s)
    }

    pub fn load(path: &std::path::Path) -> Result<Scenario, ScenarioError> {
        let text = std::fs::read_to_string(path).map_err(|source| ScenarioError::Io {
            path: path.display().to_string(),
            source,
        })?;
        Scenario::parse(&text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("scenario serializes")
    }

    /// Ground-state scenario on `n` copies of `cell`.
    pub fn ground(cell: CellSpec, n: usize, goal: Goal) -> Scenario {
        Scenario {
            rng_seed: 0,
            geometry: Geometry { cells: n, cell },
            initial: Initial::default(),
            goal,
            tolerances: None,
        }
    }

    /// Scenario reproducing `state` exactly.
    pub fn from_state(cell: CellSpec, state: &SystemState, goal: Goal) -> Scenario {
        Scenario {
            rng_seed: 0,
            geometry: Geometry {
                cells: state.chain.n_cells(),
                cell,
            },
            initial: Initial {
                t: state.t,
                disks: state.disks.clone(),
                particles: state.particles.clone(),
            },
            goal,
            tolerances: None,
        }
    }

    fn check_ranges(&self) -> Result<(), ScenarioError> {
        let n = self.geometry.cells;
        let range = |m: String| Err(ScenarioError::Range(m));
        if n == 0 {
            return range("geometry.cells must be at least 1".into());
        }
        if !self.initial.disks.is_empty() && self.initial.disks.len() != n {
            return range(format!("initial.disks has {} entries for {n} cells", self.initial.disks.len()));
        }
        if !self.initial.t.is_finite() {
            return range("initial.t must be finite".into());
        }
        for (i, p) in self.initial.particles.iter().enumerate() {
            if p.cell >= n {
                return range(format!("initial.particles[{i}].cell = {} is out of range", p.cell));
            }
        }
        match self.goal {
            Goal::Illuminate { arc: Some(k) } if k >= self.geometry.cell.arcs.len() => {
                range(format!("goal.arc = {k} is out of range"))
            }
            Goal::ControlDisk { disk, .. } if disk >= n => range(format!("goal.disk = {disk} is out of range")),
            Goal::ControlDisk { delta, .. } | Goal::Simulate { duration: delta } | Goal::ReverseCheck { duration: delta }
                if !(delta > 0.0 && delta.is_finite()) =>
            {
                range("goal duration must be positive".into())
            }
            _ => Ok(()),
        }
    }

    pub fn tolerances(&self) -> Tolerances {
        self.tolerances.unwrap_or_default()
    }

    /// Validated cell.
    pub fn cell(&self) -> Result<Cell, ScenarioError> {
        Ok(build_cell(self.geometry.cell.clone())?)
    }

    pub fn state(&self) -> Result<SystemState, ScenarioError> {
        let chain = Chain::new(self.cell()?, self.geometry.cells);
        let disks = if self.initial.disks.is_empty() {
            vec![DiskState::default(); self.geometry.cells]
        } else {
            self.initial.disks.clone()
        };
        Ok(SystemState {
            t: self.initial.t,
            chain,
            particles: self.initial.particles.clone(),
            disks,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::Role;
    use crate::geometry::{fixtures, Vec2};

    fn sample() -> Scenario {
        let mut s = Scenario::ground(
            fixtures::star_spec(),
            2,
            Goal::ControlDisk {
                disk: 1,
                phi: 0.1 + 0.2,
                omega: -1.0 / 3.0,
                delta: 1.0,
                side: Side::Left,
            },
        );
        s.initial.disks = vec![DiskState::new(0.3, 1e-300), DiskState::new(2.0, -0.7)];
        s.initial.particles.push(Particle {
            id: 4,
            cell: 1,
            q: Vec2::new(5.0, 0.2),
            v: Vec2::new(std::f64::consts::PI, -0.9),
            role: Role::Tracer,
        });
        s.tolerances = Some(Tolerances::default());
        s
    }

    #[test]
    fn round_trip_is_exact() {
        let s = sample();
        let text = s.to_toml();
        let back = Scenario::parse(&text).unwrap();
        assert_eq!(back, s);
        assert_eq!(back.to_toml(), text);
    }

    #[test]
    fn every_goal_round_trips() {
        for goal in [
            Goal::Simulate { duration: 2.5 },
            Goal::CheckGeometry,
            Goal::Illuminate { arc: None },
            Goal::Illuminate { arc: Some(2) },
            Goal::SynthesizeEmpty,
            Goal::ReverseCheck { duration: 1.0 },
        ] {
            let s = Scenario::ground(fixtures::tail_spec(), 1, goal);
            assert_eq!(Scenario::parse(&s.to_toml()).unwrap(), s);
        }
    }

    #[test]
    fn diagnostics_name_the_problem() {
        let text = sample().to_toml().replace("delta = 1.0", "delta = \"soon\"");
        let msg = Scenario::parse(&text).unwrap_err().to_string();
        assert!(msg.contains("line"), "{msg}");
        let text = sample().to_toml().replace("disk = 1", "disk = 5");
        assert!(matches!(Scenario::parse(&text), Err(ScenarioError::Range(_))));
    }

    #[test]
    fn state_fills_missing_disks() {
        let s = Scenario::ground(fixtures::star_spec(), 3, Goal::SynthesizeEmpty);
        let st = s.state().unwrap();
        assert!(st.is_ground());
        assert_eq!(st.disks.len(), 3);
    }
}
