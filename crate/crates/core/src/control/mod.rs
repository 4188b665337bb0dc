//! Synthesis of injection schedules: drivers, tracers and controllers.

pub mod admissible;
pub mod aim;
pub mod driver;
pub mod empty;
pub mod graph;
pub mod path;
pub mod plan;
pub mod steer;

use std::f64::consts::FRAC_PI_2;

use thiserror::Error;

use crate::dynamics::UndefinedEvent;

pub use admissible::{check_admissible, Violation};
pub use driver::{synth_driver, verify_line_of_sight, DriverPlan};
pub use empty::empty_system;
pub use graph::{Goal, LegPolicy, PlannerConfig, RoutePlanner};
pub use path::{plan_exit_path, plan_opening_to_opening, AdmissiblePath, Vertex, VertexKind};
pub use plan::PlanState;
pub use steer::{control_disk, follow_path, set_disk_state, FollowResult, Setting, Synthesizer};

/// Angles closer than this to `±π/2` count as tangent departures.
pub const ANGLE_EPS: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ControlError {
    #[error("invalid input: {0}")]
    Invalid(String),
    #[error("window {delta} is not positive")]
    InfeasibleDelta { delta: f64 },
    #[error("residence time {delta_hat} exceeds the bound {bound}")]
    DeltaHatRejected { delta_hat: f64, bound: f64 },
    #[error("no line of sight between the opening and the disk")]
    NoLineOfSight,
    #[error("driver contacts are too close together")]
    DegenerateWindow,
    #[error("departure angle is too close to tangent")]
    NearTangent,
    #[error("cell is not 1-controllable (uncovered angle {witness})")]
    NotOneControllable { witness: f64 },
    #[error("route search exhausted")]
    SearchExhausted,
    #[error("time window too short")]
    WindowTooShort,
    #[error("no feasible speed scale below the cap")]
    LambdaOverflow,
    #[error("target tangential velocity not bracketed")]
    RootNotBracketed,
    #[error("scheduling conflict: {0}")]
    SchedulingConflict(String),
    #[error("could not aim at the planned vertex")]
    AimFailed,
    #[error("{0}")]
    Undefined(UndefinedEvent),
    #[error("state is not admissible: {0}")]
    Inadmissible(String),
}

/// Disk velocity that sends a particle with normal speed `v_n` off at
/// `alpha_out` from the outward normal.
pub fn required_disk_omega(v_n: f64, alpha_out: f64) -> Result<f64, ControlError> {
    if !(v_n > 0.0) || !alpha_out.is_finite() {
        return Err(ControlError::Invalid("need v_n > 0 and a finite angle".into()));
    }
    if alpha_out.abs() > FRAC_PI_2 - ANGLE_EPS {
        return Err(ControlError::NearTangent);
    }
    Ok(v_n * alpha_out.tan())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::collision::{apply_disk_collision, disk_tangent};
    use crate::dynamics::DiskState;
    use crate::geometry::Vec2;

    #[test]
    fn radial_and_diagonal() {
        assert_eq!(required_disk_omega(3.0, 0.0).unwrap(), 0.0);
        assert!((required_disk_omega(2.0, std::f64::consts::FRAC_PI_4).unwrap() - 2.0).abs() < 1e-15);
        assert_eq!(required_disk_omega(1.0, FRAC_PI_2 - 1e-7), Err(ControlError::NearTangent));
    }

    #[test]
    fn departure_round_trip() {
        let n = Vec2::from_angle(0.7);
        let v = n * -2.0 + disk_tangent(n) * 0.3;
        for alpha in [-1.2, -0.3, 0.0, 0.5, 1.4] {
            let w = required_disk_omega(2.0, alpha).unwrap();
            let (out, _) = apply_disk_collision(v, DiskState::new(0.0, w), n, 1e-9).unwrap();
            let got = out.dot(disk_tangent(n)).atan2(out.dot(n));
            assert!((got - alpha).abs() < 1e-10);
        }
    }
}
