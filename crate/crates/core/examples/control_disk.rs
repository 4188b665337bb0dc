//! Set the last disk of a three-cell chain through the other two, then
//! restore them.

use scatterchain::control::{control_disk, Synthesizer};
use scatterchain::dynamics::{simulate, DiskState, SystemState};
use scatterchain::geometry::{fixtures, wrap_signed, Chain, Side};
use scatterchain::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let mut s = SystemState::ground(Chain::new(fixtures::star_cell(), 3));
    s.disks[0] = DiskState::new(0.5, 0.2);
    let mut synth = Synthesizer::new(s.chain.clone(), tol);
    let (target, delta) = (DiskState::new(-1.3, 0.75), 1.0);
    let sched = control_disk(&mut synth, &s, 2, target, delta, Side::Left)?;
    let out = simulate(&s, &sched, delta, &tol)?;
    let by_role = |r| sched.injections.iter().filter(|i| i.role == r).count();
    println!(
        "{} injections ({} drivers, {} controllers), last exit {:.6}",
        sched.len(),
        by_role(scatterchain::dynamics::Role::Driver),
        by_role(scatterchain::dynamics::Role::Controller),
        sched.end_time()
    );
    let d = out.state.disks[2];
    println!("disk 2: phi error {:.2e}, omega error {:.2e}", wrap_signed(d.phi - target.phi), d.omega - target.omega);
    for k in 0..2 {
        let free = s.disks[k].advanced(delta);
        let e = out.state.disks[k];
        println!("disk {k}: restore error {:.2e} rad, {:.2e}", wrap_signed(e.phi - free.phi), e.omega - free.omega);
        assert!((e.omega - free.omega).abs() < 1e-8);
    }
    assert!(out.state.particles.is_empty());
    assert!((d.omega - target.omega).abs() < 1e-8 && wrap_signed(d.phi - target.phi).abs() < 1e-6);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
