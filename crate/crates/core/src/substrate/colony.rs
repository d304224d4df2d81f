//! Synthetic colony growth.
//!
//! Hyphal tips perform a persistent random walk on the lattice with an
//! outward bias from the inoculum. Each step advances one tip by one cell.
//! A cell may only be occupied if its sole conductive 4-neighbour is the cell
//! it grows from, so the mask is a 4-connected tree by construction. With
//! probability `branch_rate` per step a new tip is spawned sub-apically,
//! a few cells behind the advancing tip, heading off to one side.

use std::f64::consts::{FRAC_PI_2, PI};

use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use super::GridTemplate;
use crate::{seed, Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColonyParams {
    pub seed: u64,
    pub width: usize,
    pub height: usize,
    pub branch_rate: f64,
    pub steps: usize,
}

impl Default for ColonyParams {
    fn default() -> Self {
        Self {
            seed: 1,
            width: 200,
            height: 192,
            branch_rate: 0.05,
            steps: 5000,
        }
    }
}

const HEADING_NOISE: f64 = 0.3;
const OUTWARD_PULL: f64 = 0.08;
const SUBAPICAL_MIN: usize = 3;
const SUBAPICAL_MAX: usize = 8;
const RESPAWN_ATTEMPTS: usize = 64;

struct Tip {
    cell: usize,
    heading: f64,
    /// Most recent cells grown by this tip, oldest first.
    trail: Vec<usize>,
}

const DIRS: [(i64, i64, f64); 4] = [
    (1, 0, 0.0),
    (0, 1, FRAC_PI_2),
    (-1, 0, PI),
    (0, -1, -FRAC_PI_2),
];

pub fn synthesize_colony(params: &ColonyParams) -> Result<GridTemplate> {
    let ColonyParams {
        seed,
        width,
        height,
        branch_rate,
        steps,
    } = *params;
    if width < 16 || height < 16 {
        return Err(Error::InvalidParameter(format!(
            "colony grid must be at least 16x16, got {width}x{height}"
        )));
    }
    if !(0.0..=1.0).contains(&branch_rate) {
        return Err(Error::InvalidParameter(format!(
            "branch rate must be a probability, got {branch_rate}"
        )));
    }
    let mut rng = seed::rng(seed);
    let noise = Normal::new(0.0, HEADING_NOISE).expect("valid sigma");
    let mut mask = vec![false; width * height];
    let centre = (width / 2, height / 2);
    let origin = centre.1 * width + centre.0;
    mask[origin] = true;
    let mut occupied = vec![origin];
    let mut tips = vec![Tip {
        cell: origin,
        heading: rng.random_range(-PI..PI),
        trail: vec![origin],
    }];

    let step_to = |cell: usize, (dx, dy): (i64, i64)| -> Option<usize> {
        let x = (cell % width) as i64 + dx;
        let y = (cell / width) as i64 + dy;
        (x >= 0 && y >= 0 && (x as usize) < width && (y as usize) < height)
            .then(|| y as usize * width + x as usize)
    };
    // A free cell whose only occupied 4-neighbour is `from`.
    let can_grow = |mask: &[bool], from: usize, to: usize| -> bool {
        !mask[to]
            && DIRS
                .iter()
                .filter_map(|&(dx, dy, _)| step_to(to, (dx, dy)))
                .all(|n| n == from || !mask[n])
    };

    for _ in 0..steps {
        if tips.is_empty() {
            if branch_rate == 0.0 {
                break;
            }
            // Revive growth from an arbitrary hypha.
            let mut revived = false;
            for _ in 0..RESPAWN_ATTEMPTS {
                let cell = occupied[rng.random_range(0..occupied.len())];
                if DIRS
                    .iter()
                    .filter_map(|&(dx, dy, _)| step_to(cell, (dx, dy)))
                    .any(|n| can_grow(&mask, cell, n))
                {
                    tips.push(Tip {
                        cell,
                        heading: rng.random_range(-PI..PI),
                        trail: vec![cell],
                    });
                    revived = true;
                    break;
                }
            }
            if !revived {
                break;
            }
        }

        let k = rng.random_range(0..tips.len());
        let tip = &mut tips[k];
        let (tx, ty) = ((tip.cell % width) as f64, (tip.cell / width) as f64);
        let radial = (ty - centre.1 as f64).atan2(tx - centre.0 as f64);
        let drift = wrap_angle(radial - tip.heading);
        tip.heading = wrap_angle(tip.heading + OUTWARD_PULL * drift + noise.sample(&mut rng));

        // Rank the four moves by alignment with the heading, sampling the
        // first choice in proportion to cos² of the misalignment.
        let weights: Vec<f64> = DIRS
            .iter()
            .map(|&(_, _, a)| (tip.heading - a).cos().max(0.0).powi(2))
            .collect();
        let total: f64 = weights.iter().sum();
        let mut draw = rng.random::<f64>() * total;
        let mut first = 0;
        for (i, w) in weights.iter().enumerate() {
            if draw < *w {
                first = i;
                break;
            }
            draw -= w;
        }
        let mut order: Vec<usize> = (0..4).filter(|&i| i != first).collect();
        order.sort_by(|&a, &b| weights[b].total_cmp(&weights[a]));
        order.insert(0, first);

        let next = order.into_iter().find_map(|i| {
            let (dx, dy, _) = DIRS[i];
            step_to(tip.cell, (dx, dy)).filter(|&n| can_grow(&mask, tip.cell, n))
        });
        let Some(next) = next else {
            tips.swap_remove(k);
            continue;
        };
        mask[next] = true;
        occupied.push(next);
        tip.cell = next;
        tip.trail.push(next);
        if tip.trail.len() > SUBAPICAL_MAX + 1 {
            tip.trail.remove(0);
        }

        if branch_rate > 0.0 && rng.random_bool(branch_rate) && tip.trail.len() > SUBAPICAL_MIN {
            let back = rng.random_range(SUBAPICAL_MIN..tip.trail.len());
            let cell = tip.trail[tip.trail.len() - 1 - back];
            let side = if rng.random_bool(0.5) {
                FRAC_PI_2
            } else {
                -FRAC_PI_2
            };
            let heading = wrap_angle(tip.heading + side + noise.sample(&mut rng));
            tips.push(Tip {
                cell,
                heading,
                trail: vec![cell],
            });
        }
    }
    GridTemplate::new(width, height, mask)
}

fn wrap_angle(a: f64) -> f64 {
    (a + PI).rem_euclid(2.0 * PI) - PI
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params(
        seed: u64,
        width: usize,
        height: usize,
        branch_rate: f64,
        steps: usize,
    ) -> ColonyParams {
        ColonyParams {
            seed,
            width,
            height,
            branch_rate,
            steps,
        }
    }

    #[test]
    fn deterministic_for_a_seed() {
        let p = params(1, 64, 64, 0.05, 500);
        assert_eq!(
            synthesize_colony(&p).unwrap(),
            synthesize_colony(&p).unwrap()
        );
        let q = params(2, 64, 64, 0.05, 500);
        assert_ne!(
            synthesize_colony(&p).unwrap(),
            synthesize_colony(&q).unwrap()
        );
    }

    #[test]
    fn no_branching_gives_a_simple_path() {
        for seed in 0..10 {
            let t = synthesize_colony(&params(seed, 64, 64, 0.0, 300)).unwrap();
            assert!(t.conductive_count() <= 301);
            let degrees: Vec<usize> = t
                .conductive_indices()
                .into_iter()
                .map(|i| t.neighbours(i).count())
                .collect();
            assert!(degrees.iter().all(|&d| d <= 2), "path has a junction");
            let ends = degrees.iter().filter(|&&d| d <= 1).count();
            assert!(ends == 2 || t.conductive_count() == 1);
            assert_eq!(t.component_count(), 1);
        }
    }

    #[test]
    fn full_size_colony_is_connected_tree() {
        let t = synthesize_colony(&params(1, 200, 192, 0.05, 5000)).unwrap();
        assert_eq!(t.component_count(), 1);
        let n = t.conductive_count();
        assert!(n > 2000, "colony too sparse: {n}");
        assert!(n <= 5001);
        // Tree: edges = nodes - 1.
        let edges: usize = t
            .conductive_indices()
            .into_iter()
            .map(|i| t.neighbours(i).count())
            .sum::<usize>()
            / 2;
        assert_eq!(edges, n - 1);
    }

    #[test]
    fn connected_across_seed_sweep() {
        for seed in 0..100 {
            let t = synthesize_colony(&params(seed, 64, 64, 0.05, 800)).unwrap();
            assert_eq!(t.component_count(), 1, "seed {seed}");
        }
    }

    #[test]
    fn rejects_small_grids() {
        assert!(synthesize_colony(&params(1, 15, 64, 0.05, 10)).is_err());
    }
}
