//! Free evolution of a random state, written as a trace and verified.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scatterchain::dynamics::{simulate, InjectionSchedule};
use scatterchain::geometry::{fixtures, Chain};
use scatterchain::harness::{random_admissible, verify, StateRanges, Trace, VerifyTolerances};
use scatterchain::Tolerances;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let tol = Tolerances::default();
    let chain = Chain::new(fixtures::star_cell(), 3);
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let ranges = StateRanges {
        max_particles: 3,
        ..StateRanges::default()
    };
    let s = random_admissible(&mut rng, &chain, &ranges, &tol);
    let out = simulate(&s, &InjectionSchedule::default(), 40.0, &tol)?;
    let trace = Trace::record(&s, &out.trace, &out.state);
    let text = trace.to_text();
    let check = verify(&Trace::parse(&text)?, &VerifyTolerances::default());
    println!(
        "{} particles, {} events, {} left, energy {:.12} -> {:.12}, drift {:.2e}",
        s.particles.len(),
        out.trace.len(),
        out.state.particles.len(),
        s.energy(),
        out.state.energy(),
        check.energy_drift
    );
    for line in text.lines().take(6) {
        println!("{line}");
    }
    assert!(check.passed(), "{:?}", check.violations);
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
