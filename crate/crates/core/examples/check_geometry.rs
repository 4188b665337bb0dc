//! Validate reference cells and test 1-controllability.

use scatterchain::geometry::{build_cell, fixtures, is_one_controllable, ArcSpec, CellSpec, Vec2};

/// Star cell with a hooked tail: the boundary folds back as seen from the
/// disk center.
pub fn hooked_spec() -> CellSpec {
    let mut s = fixtures::star_spec();
    let a = fixtures::OPENING_HALF_HEIGHT;
    let c = Vec2::new(fixtures::WIDTH / 2.0, 0.0);
    let pts = [
        Vec2::new(0.0, a),
        Vec2::new(1.6, 0.8),
        Vec2::new(3.0, 2.5),
        Vec2::new(2.2, 1.2),
        Vec2::new(fixtures::WIDTH, a),
    ];
    let top: Vec<ArcSpec> = pts.windows(2).map(|w| ArcSpec::through(w[0], w[1], 0.05, c)).collect();
    s.arcs.splice(0..2, top);
    s
}

pub fn run_example() -> Result<(), Box<dyn std::error::Error>> {
    for (name, spec) in [
        ("star", fixtures::star_spec()),
        ("tail", fixtures::tail_spec()),
        ("hooked", hooked_spec()),
    ] {
        match build_cell(spec) {
            Ok(cell) => {
                let c = is_one_controllable(&cell);
                println!(
                    "{name}: valid, {} arcs, 1-controllable {}, witness {:?}",
                    cell.arcs().len(),
                    c.controllable,
                    c.witness
                );
            }
            Err(e) => println!("{name}: rejected, condition {}: {e}", e.condition()),
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> Result<(), Box<dyn std::error::Error>> {
    run_example()
}
