//! Regenerate the frozen fixtures: scenario files for every command and the
//! Monte-Carlo illumination sets of both reference cells.
//!
//! `cargo run --example build_fixtures [dir]` writes into `dir`, which
//! defaults to `crates/core/fixtures`.

use std::path::{Path, PathBuf};

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scatterchain::dynamics::SystemState;
use scatterchain::geometry::{build_cell, fixtures, Chain, Side};
use scatterchain::harness::{mc_illumination_oracle, oracle_to_tsv, random_admissible, Goal, Scenario, StateRanges};
use scatterchain::Tolerances;

#[path = "check_geometry.rs"]
mod check_geometry;

/// Samples and seed behind the frozen oracle sets.
pub const ORACLE_SAMPLES: usize = 100_000;
pub const ORACLE_SEED: u64 = 0;

fn random_state(n: usize, particles: usize, seed: u64) -> Result<SystemState, Box<dyn std::error::Error>> {
    let chain = Chain::new(build_cell(fixtures::star_spec())?, n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let ranges = StateRanges {
        max_particles: particles,
        ..StateRanges::default()
    };
    loop {
        let s = random_admissible(&mut rng, &chain, &ranges, &Tolerances::default());
        if s.particles.len() == particles {
            return Ok(s);
        }
    }
}

/// Every fixture as `(relative path, contents)`.
pub fn fixture_files() -> Result<Vec<(String, String)>, Box<dyn std::error::Error>> {
    let star = fixtures::star_spec;
    let tail = fixtures::tail_spec;
    let mut scenarios = vec![
        ("star_check", Scenario::ground(star(), 1, Goal::CheckGeometry)),
        ("tail_check", Scenario::ground(tail(), 1, Goal::CheckGeometry)),
        ("hooked_check", Scenario::ground(check_geometry::hooked_spec(), 1, Goal::CheckGeometry)),
        ("star_illuminate", Scenario::ground(star(), 1, Goal::Illuminate { arc: None })),
        ("tail_illuminate", Scenario::ground(tail(), 1, Goal::Illuminate { arc: None })),
        ("ground_simulate", Scenario::ground(star(), 2, Goal::Simulate { duration: 10.0 })),
        (
            "control_disk_n3",
            Scenario::ground(
                star(),
                3,
                Goal::ControlDisk {
                    disk: 2,
                    phi: -1.3,
                    omega: 0.75,
                    delta: 1.0,
                    side: Side::Left,
                },
            ),
        ),
    ];
    let mut empty = Scenario::from_state(star(), &random_state(2, 2, 21)?, Goal::SynthesizeEmpty);
    empty.rng_seed = 21;
    scenarios.push(("two_particles_empty", empty));
    let mut rev = Scenario::from_state(star(), &random_state(2, 3, 22)?, Goal::ReverseCheck { duration: 6.0 });
    rev.rng_seed = 22;
    scenarios.push(("reverse_check", rev));

    let mut files: Vec<(String, String)> = scenarios
        .into_iter()
        .map(|(name, s)| (format!("scenarios/{name}.toml"), s.to_toml()))
        .collect();
    for (name, cell) in [("star", fixtures::star_cell()), ("tail", fixtures::tail_cell())] {
        let sets = mc_illumination_oracle(&cell, ORACLE_SAMPLES, ORACLE_SEED);
        files.push((format!("oracle/{name}.tsv"), oracle_to_tsv(&sets)));
    }
    Ok(files)
}

pub fn write_fixtures(dir: &Path) -> Result<(), Box<dyn std::error::Error>> {
    for (rel, text) in fixture_files()? {
        let path = dir.join(rel);
        std::fs::create_dir_all(path.parent().expect("fixture paths have a directory"))?;
        std::fs::write(&path, text)?;
        println!("wrote {}", path.display());
    }
    Ok(())
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    let dir = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| Path::new(env!("CARGO_MANIFEST_DIR")).join("fixtures"));
    write_fixtures(&dir)
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
