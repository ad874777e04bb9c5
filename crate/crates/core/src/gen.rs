//! Seeded random diagrams grown from a single loop.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::diagram::{Diagram, FreeLoop, Kind, Surface};
use crate::moves::{apply_move, find_sites, Direction, MoveKind};

/// Classes a seed loop may carry, per surface.
fn seed_classes(surface: Surface) -> Vec<Vec<i64>> {
    match surface {
        Surface::Plane => vec![vec![]],
        Surface::Annulus => vec![vec![0], vec![1], vec![-1]],
        Surface::Torus => vec![vec![0, 0], vec![1, 0], vec![0, 1], vec![1, 1], vec![1, -2], vec![2, 3]],
    }
}

/// A random single-component diagram with exactly `crossings` crossings of
/// which `pre` are precrossings (capped at `crossings`).
pub fn random_diagram(surface: Surface, crossings: usize, pre: usize, seed: u64) -> Diagram {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let classes = seed_classes(surface);
    let mut d = Diagram::new(surface);
    d.free_loops.push(FreeLoop { tags: classes.choose(&mut rng).expect("classes").clone() });
    while d.crossing_count() < crossings {
        let left = crossings - d.crossing_count();
        let kind = if left >= 2 && d.crossing_count() > 0 && rng.gen_bool(0.8) { MoveKind::R2 } else { MoveKind::R1Pos };
        let sites = find_sites(&d, kind, Direction::Expand);
        let site = sites.choose(&mut rng).expect("expansions always exist");
        d = apply_move(&d, site).expect("fresh site");
        if rng.gen_bool(0.3) {
            let r3 = find_sites(&d, MoveKind::R3, Direction::Expand);
            if let Some(site) = r3.choose(&mut rng) {
                d = apply_move(&d, site).expect("fresh site");
            }
        }
    }
    let ids: Vec<u32> = d.crossings.keys().copied().collect();
    let pres: Vec<u32> = ids.choose_multiple(&mut rng, pre.min(ids.len())).copied().collect();
    for id in ids {
        let kind = if pres.contains(&id) { Kind::Pre } else { Kind::Classical { over: rng.gen_range(0..2) } };
        d.add_crossing(id, kind);
    }
    d
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_and_determinism() {
        for surface in [Surface::Plane, Surface::Annulus, Surface::Torus] {
            for n in 0..9 {
                let d = random_diagram(surface, n, 2, n as u64);
                assert!(d.validate().is_empty());
                assert_eq!(d.crossing_count(), n);
                assert_eq!(d.pre_count(), n.min(2));
                assert_eq!(d, random_diagram(surface, n, 2, n as u64));
            }
        }
    }
}
