//! Illuminated sets of every arc, cross-checked by the Monte-Carlo oracle.

use scatterchain::geometry::{fixtures, illuminate};
use scatterchain::harness::mc_illumination_oracle;

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (name, cell) in [("star", fixtures::star_cell()), ("tail", fixtures::tail_cell())] {
        let oracle = mc_illumination_oracle(&cell, 100_000, 0);
        for (k, o) in oracle.iter().enumerate() {
            let lit = illuminate(&cell, k)?;
            let diff = lit.symmetric_difference_measure(o);
            println!("{name} arc {k}: measure {:.6} rad, oracle difference {diff:.2e}", lit.measure());
            assert!(diff < 1e-3);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
