//! Random admissible states for sweeps and property tests.

use std::f64::consts::{PI, TAU};

use rand::Rng;

use crate::control::check_admissible;
use crate::dynamics::{DiskState, Particle, Role, SystemState};
use crate::geometry::{Chain, Vec2};
use crate::tolerance::Tolerances;

/// Ranges of a random state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StateRanges {
    pub max_particles: usize,
    pub speed: (f64, f64),
    pub omega: f64,
}

impl Default for StateRanges {
    fn default() -> Self {
        StateRanges {
            max_particles: 3,
            speed: (0.5, 2.0),
            omega: 1.0,
        }
    }
}

/// Uniform point strictly inside cell `j`.
pub fn interior_point(rng: &mut impl Rng, chain: &Chain, j: usize) -> Vec2 {
    let w = chain.width();
    let h = chain
        .cell()
        .arcs()
        .iter()
        .map(|a| a.center.y.abs() + a.radius)
        .fold(chain.cell().a(), f64::max);
    loop {
        let q = chain.offset(j) + Vec2::new(rng.gen_range(0.0..w), rng.gen_range(-h..h));
        if chain.contains_interior(j, q) {
            return q;
        }
    }
}

/// Random particle inside cell `j`.
pub fn random_particle(rng: &mut impl Rng, chain: &Chain, j: usize, id: u64, speed: (f64, f64)) -> Particle {
    Particle {
        id,
        cell: j,
        q: interior_point(rng, chain, j),
        v: Vec2::from_angle(rng.gen_range(0.0..TAU)) * rng.gen_range(speed.0..speed.1),
        role: Role::Resident,
    }
}

/// Random state on `chain` with up to `ranges.max_particles` particles,
/// redrawn until it is admissible.
pub fn random_admissible(rng: &mut impl Rng, chain: &Chain, ranges: &StateRanges, tol: &Tolerances) -> SystemState {
    loop {
        let mut s = SystemState::ground(chain.clone());
        for d in &mut s.disks {
            *d = DiskState::new(rng.gen_range(-PI..PI), rng.gen_range(-ranges.omega..ranges.omega));
        }
        let n = rng.gen_range(0..=ranges.max_particles);
        for id in 0..n as u64 {
            let j = rng.gen_range(0..chain.n_cells());
            s.particles.push(random_particle(rng, chain, j, id, ranges.speed));
        }
        if check_admissible(&s, f64::INFINITY, tol).is_ok() {
            return s;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::fixtures;
    use rand::SeedableRng;

    #[test]
    fn states_are_admissible_and_reproducible() {
        let chain = Chain::new(fixtures::star_cell(), 3);
        let tol = Tolerances::default();
        let draw = |seed| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            random_admissible(&mut rng, &chain, &StateRanges::default(), &tol)
        };
        let s = draw(5);
        assert_eq!(s, draw(5));
        assert!(check_admissible(&s, f64::INFINITY, &tol).is_ok());
    }
}
