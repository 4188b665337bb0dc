//! Two drivers bring the first disk to a target angle and angular velocity.

use scatterchain::control::set_disk_state;
use scatterchain::dynamics::{simulate, DiskState, SystemState};
use scatterchain::geometry::{fixtures, wrap_signed, Chain, Side};
use scatterchain::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let mut s = SystemState::ground(Chain::new(fixtures::star_cell(), 1));
    s.disks[0] = DiskState::new(-2.0, 0.9);
    let target = DiskState::new(1.0, -0.4);
    let sched = set_disk_state(&s, Side::Left, target, 1.0, &tol)?;
    let out = simulate(&s, &sched, 1.0, &tol)?;
    let d = out.state.disks[0];
    println!("{} injections", sched.len());
    for inj in &sched.injections {
        println!("  t {:.6} y {:+.3e} v ({:.4}, {:.4})", inj.t, inj.y, inj.v.x, inj.v.y);
    }
    println!(
        "phi {:.12} (target {:.12}), omega {:.12} (target {})",
        d.phi, target.phi, d.omega, target.omega
    );
    assert!(wrap_signed(d.phi - target.phi).abs() < 1e-8);
    assert!((d.omega - target.omega).abs() < 1e-9);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
