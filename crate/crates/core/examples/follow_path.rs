//! Plan an admissible path from the left opening to the right one and steer
//! a tracer along it by spinning each disk it touches.

use scatterchain::control::{follow_path, plan_opening_to_opening, Synthesizer};
use scatterchain::dynamics::{simulate, SystemState};
use scatterchain::geometry::{fixtures, Chain, Side};
use scatterchain::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let s = SystemState::ground(Chain::new(fixtures::star_cell(), 3));
    let path = plan_opening_to_opening(&s.chain, Side::Left, Side::Right, 0.15)?;
    path.validate(&s.chain, &tol)?;
    println!("path: {} vertices, {} on disks, length {:.4}", path.vertices.len(), path.disk_vertices(), path.length());
    let mut synth = Synthesizer::new(s.chain.clone(), tol);
    let (sched, r) = follow_path(&mut synth, &s, &path, 1.0, 0.0)?;
    let worst = r
        .visited
        .iter()
        .zip(&path.vertices)
        .map(|(a, b)| a.dist(b.point))
        .fold(0.0, f64::max);
    println!(
        "{} injections, exit {:?} at t = {:.6}, worst vertex deviation {worst:.2e}",
        sched.len(),
        r.exit_side,
        r.exit_time
    );
    let out = simulate(&s, &sched, r.exit_time, &tol)?;
    assert!(out.state.particles.is_empty());
    assert!(worst < 1e-8 * s.chain.width());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
