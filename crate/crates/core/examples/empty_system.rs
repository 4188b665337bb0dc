//! Empty a random admissible state and bring every disk to rest at angle
//! zero.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scatterchain::control::{empty_system, Synthesizer};
use scatterchain::dynamics::simulate;
use scatterchain::geometry::{fixtures, wrap_signed, Chain};
use scatterchain::harness::{random_admissible, StateRanges};
use scatterchain::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let chain = Chain::new(fixtures::star_cell(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let ranges = StateRanges {
        max_particles: 3,
        ..StateRanges::default()
    };
    let s = loop {
        let s = random_admissible(&mut rng, &chain, &ranges, &tol);
        if s.particles.len() == 3 {
            break s;
        }
    };
    let mut synth = Synthesizer::new(chain, tol);
    let (sched, t_end) = empty_system(&mut synth, &s)?;
    let out = simulate(&s, &sched, t_end, &tol)?;
    println!("{} particles, {} injections, ground at T = {t_end:.6}", s.particles.len(), sched.len());
    for (k, d) in out.state.disks.iter().enumerate() {
        println!("disk {k}: phi {:+.2e} omega {:+.2e}", wrap_signed(d.phi), d.omega);
        assert!(wrap_signed(d.phi).abs() < 1e-6 && d.omega.abs() < 1e-8);
    }
    assert!(out.state.particles.is_empty());
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
