//! Drivers: single fast particles that set the angular velocity of a disk
//! next to a bath and leave through the same opening.

use std::f64::consts::PI;

use crate::dynamics::flight::{advance, fly, Flyer, Stop};
use crate::dynamics::{DiskState, Injection, Role};
use crate::geometry::angular::wrap_signed;
use crate::geometry::{Chain, Side, Vec2};
use crate::tolerance::Tolerances;

use super::ControlError;

/// Speed and entry offset of a driver aimed at the disk point nearest the
/// opening: `v_x = 2d/δ̂` and `ε = ω d / v_x`.
pub fn driver_kinematics(d: f64, omega_target: f64, delta_hat: f64) -> (f64, f64) {
    let vx = 2.0 * d / delta_hat;
    (vx, omega_target * d / vx)
}

/// Largest admissible residence time: entry and exit ordinates
/// `ω δ̂ / 2` must stay inside the opening.
pub fn max_delta_hat(a: f64, omega_current: f64, omega_target: f64) -> f64 {
    let w = omega_current.abs().max(omega_target.abs());
    if w == 0.0 {
        f64::INFINITY
    } else {
        2.0 * a / w
    }
}

/// `2/δ̂ > max(|ω̂|, |ω|)/a`.
pub fn delta_hat_feasible(a: f64, omega_current: f64, omega_target: f64, delta_hat: f64) -> bool {
    delta_hat > 0.0 && delta_hat < max_delta_hat(a, omega_current, omega_target)
}

/// Residence time used when the caller does not pick one: half the bound,
/// and at most `0.9 δ`.
pub fn default_delta_hat(a: f64, delta: f64, omega_current: f64, omega_target: f64, omega_bound: f64) -> f64 {
    let w = omega_current.abs().max(omega_target.abs()).max(omega_bound.abs());
    let cap = if w == 0.0 { f64::INFINITY } else { a / w };
    (0.9 * delta).min(cap)
}

/// A driver ready to inject.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DriverPlan {
    pub disk: usize,
    pub injection: Injection,
    pub delta_hat: f64,
    /// Expected contact time `τ + δ̂/2` and point.
    pub contact_time: f64,
    pub contact_point: Vec2,
    /// Expected exit time `τ + δ̂`.
    pub exit_time: f64,
    pub exit_y: f64,
    pub target_omega: f64,
}

/// Build a driver entering at `tau` from `side` that sets the adjacent disk
/// from `omega_current` to `omega_target`, leaving within `delta`.
#[allow(clippy::too_many_arguments)]
pub fn synth_driver(
    chain: &Chain,
    side: Side,
    omega_current: f64,
    omega_target: f64,
    delta: f64,
    delta_hat: Option<f64>,
    tau: f64,
    id: u64,
) -> Result<DriverPlan, ControlError> {
    if !(delta > 0.0) || !delta.is_finite() {
        return Err(ControlError::InfeasibleDelta { delta });
    }
    if !omega_target.is_finite() || !omega_current.is_finite() {
        return Err(ControlError::Invalid("non-finite angular velocity".into()));
    }
    let cell = chain.cell();
    let a = cell.a();
    let dh = match delta_hat {
        Some(dh) => {
            if !(dh < delta) || !delta_hat_feasible(a, omega_current, omega_target, dh) {
                return Err(ControlError::DeltaHatRejected {
                    delta_hat: dh,
                    bound: max_delta_hat(a, omega_current, omega_target).min(delta),
                });
            }
            dh
        }
        None => default_delta_hat(a, delta, omega_current, omega_target, 0.0),
    };
    let d = cell.spec().d();
    let (vx, eps) = driver_kinematics(d, omega_target, dh);
    let disk = chain.bath_cell(side);
    let (y, v, contact) = match side {
        Side::Left => (-eps, Vec2::new(vx, omega_target), chain.disk_center(disk) - Vec2::new(cell.r(), 0.0)),
        Side::Right => (eps, Vec2::new(-vx, -omega_target), chain.disk_center(disk) + Vec2::new(cell.r(), 0.0)),
    };
    let exit_y = match side {
        Side::Left => omega_current * dh / 2.0,
        Side::Right => -omega_current * dh / 2.0,
    };
    Ok(DriverPlan {
        disk,
        injection: Injection {
            t: tau,
            id,
            side,
            y,
            v,
            role: Role::Driver,
        },
        delta_hat: dh,
        contact_time: tau + dh / 2.0,
        contact_point: contact,
        exit_time: tau + dh,
        exit_y,
        target_omega: omega_target,
    })
}

/// Fly a driver plan against the real geometry: it must reach its disk with
/// no wall bounce and, after the swap with `omega_current`, leave through
/// its own opening without touching anything else. Returns the contact time,
/// the achieved disk velocity and the exit time.
pub fn verify_line_of_sight(
    chain: &Chain,
    plan: &DriverPlan,
    omega_current: f64,
    tol: &Tolerances,
) -> Result<(f64, f64, f64), ControlError> {
    let inj = plan.injection;
    let f = Flyer {
        id: inj.id,
        role: inj.role,
        cell: chain.bath_cell(inj.side),
        q: Vec2::new(chain.bath_x(inj.side), inj.y),
        t0: inj.t,
        v: inj.v,
    };
    let leg = fly(chain, &f, tol, 0, f64::INFINITY).map_err(|_| ControlError::NoLineOfSight)?;
    let (flyer, pred) = match leg.stop {
        Stop::Disk { flyer, prediction } if leg.walls == 0 => (flyer, prediction),
        _ => return Err(ControlError::NoLineOfSight),
    };
    let adv = advance(chain, &flyer, &pred, DiskState::new(0.0, omega_current), tol)
        .map_err(|_| ControlError::NoLineOfSight)?;
    let achieved = adv.disk.map(|(_, d)| d.omega).unwrap_or(f64::NAN);
    let out = adv.flyer.ok_or(ControlError::NoLineOfSight)?;
    let back = fly(chain, &out, tol, 0, f64::INFINITY).map_err(|_| ControlError::NoLineOfSight)?;
    match back.stop {
        Stop::Exit { side, t, .. } if side == inj.side && back.walls == 0 => Ok((pred.t, achieved, t)),
        _ => Err(ControlError::NoLineOfSight),
    }
}

/// Angular velocity of the first of two drivers so that a disk at
/// `(φ_a, ω_a)` at time `a`, set to `ω_1` at `h1` and to `ω_f` at `h2`,
/// reaches `φ_target` at time `b`. Uses the smallest such `ω_1`.
#[allow(clippy::too_many_arguments)]
pub fn first_driver_omega(
    phi_a: f64,
    omega_a: f64,
    a: f64,
    h1: f64,
    h2: f64,
    b: f64,
    omega_f: f64,
    phi_target: f64,
) -> f64 {
    let rest = phi_a + omega_a * (h1 - a) + omega_f * (b - h2);
    wrap_signed(phi_target - rest) / (h2 - h1)
}

/// Upper bound on `|ω_1|` when the two hits are at least `gap` apart.
pub fn first_driver_bound(gap: f64) -> f64 {
    PI / gap
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;

    #[test]
    fn lemma_arithmetic() {
        let (vx, eps) = driver_kinematics(1.0, 1.0, 0.5);
        assert_eq!(vx, 4.0);
        assert_eq!(eps, 0.25);
    }

    #[test]
    fn delta_constraint() {
        assert!(!delta_hat_feasible(0.5, 10.0, 0.0, 0.1));
        assert!(!delta_hat_feasible(0.5, 10.0, 0.0, 0.2));
        assert!(delta_hat_feasible(0.5, 10.0, 0.0, 0.05));
    }

    #[test]
    fn identity_driver_retraces() {
        let chain = Chain::new(fixtures::star_cell(), 1);
        let p = synth_driver(&chain, Side::Left, 0.0, 0.0, 1.0, None, 0.0, 0).unwrap();
        assert_eq!(p.injection.y, 0.0);
        assert_eq!(p.injection.v.y, 0.0);
        let (hit, w, exit) = verify_line_of_sight(&chain, &p, 0.0, &Tolerances::default()).unwrap();
        assert_eq!(w, 0.0);
        assert!((hit - p.contact_time).abs() < 1e-15);
        assert!((exit - p.exit_time).abs() < 1e-14);
    }

    #[test]
    fn remark_instance() {
        // hits at 0.1 and 0.3, target angle pi/2 at time 1, final velocity 0
        let w1 = first_driver_omega(0.0, 0.0, 0.0, 0.1, 0.3, 1.0, 0.0, PI / 2.0);
        assert!((w1 - PI / 2.0 / 0.2).abs() < 1e-12);
        // with a = 0.25 the first driver (residence 0.2) breaks the bound
        assert!(!delta_hat_feasible(0.25, 0.0, w1, 0.2));
    }

    #[test]
    fn infeasible_delta() {
        let chain = Chain::new(fixtures::star_cell(), 1);
        assert!(matches!(
            synth_driver(&chain, Side::Left, 0.0, 1.0, 0.0, None, 0.0, 0),
            Err(ControlError::InfeasibleDelta { .. })
        ));
    }
}
