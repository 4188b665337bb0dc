//! Time reversal: run forward, flip every velocity, run again, flip back.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scatterchain::geometry::{fixtures, Chain};
use scatterchain::harness::{forward_reverse, phase_distance, random_admissible, StateRanges};
use scatterchain::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let chain = Chain::new(fixtures::star_cell(), 2);
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    for _ in 0..5 {
        let s = random_admissible(&mut rng, &chain, &StateRanges::default(), &tol);
        let (fwd, home) = forward_reverse(&s, 6.0, &tol)?;
        let d = phase_distance(&s, &home);
        println!("{} particles, {} left after the forward leg, return distance {d:.2e}", s.particles.len(), fwd.particles.len());
        assert!(d < 1e-6);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
