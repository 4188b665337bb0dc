//! One driver sets the first disk to a new angular velocity and leaves
//! through the opening it came from.

use scatterchain::control::synth_driver;
use scatterchain::dynamics::{simulate, DiskState, InjectionSchedule, SystemState};
use scatterchain::geometry::{fixtures, Chain, Side};
use scatterchain::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let mut s = SystemState::ground(Chain::new(fixtures::star_cell(), 2));
    s.disks[0] = DiskState::new(0.3, -1.2);
    let (target, delta, tau) = (2.5, 0.8, 0.1);
    let plan = synth_driver(&s.chain, Side::Left, s.disks[0].omega, target, delta, None, tau, 0)?;
    let sched = InjectionSchedule {
        injections: vec![plan.injection],
        ..Default::default()
    };
    let out = simulate(&s, &sched, tau + delta, &tol)?;
    let omega = out.state.disks[0].omega;
    println!(
        "driver speed {:.4}, entry y {:.3e}, residence {:.4} < {delta}",
        plan.injection.v.norm(),
        plan.injection.y,
        plan.delta_hat
    );
    println!("omega {} -> {omega} (target {target}), particles left {}", s.disks[0].omega, out.state.particles.len());
    assert!((omega - target).abs() <= 1e-12 * target.abs());
    assert!(out.state.particles.is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
