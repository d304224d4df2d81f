//! Conductive substrates: 2-D grid templates for the excitable model and 3-D
//! colony graphs for the RC model.

mod colony;
mod graph;
mod image;

pub use colony::{synthesize_colony, ColonyParams};
pub use graph::{graph_from_template, ColonyGraph, GraphEdge, GraphNode, GraphOptions};
pub use image::{load_template, save_template};

use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Binary conductive mask on a rectangular lattice, stored row-major.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GridTemplate {
    width: usize,
    height: usize,
    mask: Vec<bool>,
}

impl GridTemplate {
    pub fn new(width: usize, height: usize, mask: Vec<bool>) -> Result<Self> {
        if width < 3 || height < 3 {
            return Err(Error::InvalidParameter(format!(
                "template must be at least 3x3, got {width}x{height}"
            )));
        }
        if mask.len() != width * height {
            return Err(Error::InvalidParameter(format!(
                "mask has {} cells, expected {}",
                mask.len(),
                width * height
            )));
        }
        if !mask.iter().any(|&c| c) {
            return Err(Error::DegenerateTemplate);
        }
        Ok(Self {
            width,
            height,
            mask,
        })
    }

    /// Fully conductive rectangle.
    pub fn uniform(width: usize, height: usize) -> Result<Self> {
        Self::new(width, height, vec![true; width * height])
    }

    pub fn from_fn(width: usize, height: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self> {
        let mask = (0..height)
            .flat_map(|y| (0..width).map(move |x| (x, y)))
            .map(|(x, y)| f(x, y))
            .collect();
        Self::new(width, height, mask)
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn coords(&self, index: usize) -> (usize, usize) {
        (index % self.width, index / self.width)
    }

    #[inline]
    pub fn is_conductive(&self, x: usize, y: usize) -> bool {
        x < self.width && y < self.height && self.mask[self.index(x, y)]
    }

    pub fn conductive_count(&self) -> usize {
        self.mask.iter().filter(|&&c| c).count()
    }

    /// Row-major indices of conductive cells.
    pub fn conductive_indices(&self) -> Vec<usize> {
        self.mask
            .iter()
            .enumerate()
            .filter_map(|(i, &c)| c.then_some(i))
            .collect()
    }

    /// Conductive 4-neighbours of a cell.
    pub fn neighbours(&self, index: usize) -> impl Iterator<Item = usize> + '_ {
        let (x, y) = self.coords(index);
        let w = self.width;
        let h = self.height;
        [
            (x > 0).then(|| index - 1),
            (x + 1 < w).then(|| index + 1),
            (y > 0).then(|| index - w),
            (y + 1 < h).then(|| index + w),
        ]
        .into_iter()
        .flatten()
        .filter(move |&n| self.mask[n])
    }

    /// Number of 4-connected components of the conductive set.
    pub fn component_count(&self) -> usize {
        let mut seen = vec![false; self.mask.len()];
        let mut count = 0;
        let mut stack = Vec::new();
        for start in self.conductive_indices() {
            if seen[start] {
                continue;
            }
            count += 1;
            seen[start] = true;
            stack.push(start);
            while let Some(i) = stack.pop() {
                for n in self.neighbours(i) {
                    if !seen[n] {
                        seen[n] = true;
                        stack.push(n);
                    }
                }
            }
        }
        count
    }

    /// Breadth-first path distance (in lattice steps) from `start` to every
    /// conductive cell; `None` where unreachable.
    pub fn path_distances(&self, start: usize) -> Vec<Option<usize>> {
        let mut dist = vec![None; self.mask.len()];
        if !self.mask[start] {
            return dist;
        }
        dist[start] = Some(0);
        let mut queue = std::collections::VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            let d = dist[i].unwrap_or(0);
            for n in self.neighbours(i) {
                if dist[n].is_none() {
                    dist[n] = Some(d + 1);
                    queue.push_back(n);
                }
            }
        }
        dist
    }
}

/// Circular electrode on the lattice. A node `y` belongs to the electrode
/// when its Euclidean distance to the centre is strictly below `radius`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Electrode {
    pub x: usize,
    pub y: usize,
    pub radius: f64,
}

impl Electrode {
    pub fn new(x: usize, y: usize, radius: f64) -> Self {
        Self { x, y, radius }
    }

    pub fn validate(&self, template: &GridTemplate) -> Result<()> {
        if self.x >= template.width() || self.y >= template.height() {
            return Err(Error::InvalidParameter(format!(
                "electrode centre ({}, {}) outside {}x{} grid",
                self.x,
                self.y,
                template.width(),
                template.height()
            )));
        }
        if !(self.radius > 0.0) || !self.radius.is_finite() {
            return Err(Error::InvalidParameter(format!(
                "electrode radius must be positive, got {}",
                self.radius
            )));
        }
        Ok(())
    }

    /// Conductive cells covered by the electrode, in row-major order.
    pub fn footprint(&self, template: &GridTemplate) -> Vec<usize> {
        let reach = self.radius.ceil() as i64;
        let mut cells = Vec::new();
        for dy in -reach..=reach {
            for dx in -reach..=reach {
                let (x, y) = (self.x as i64 + dx, self.y as i64 + dy);
                if x < 0 || y < 0 {
                    continue;
                }
                let (x, y) = (x as usize, y as usize);
                let d2 = (dx * dx + dy * dy) as f64;
                if d2 < self.radius * self.radius && template.is_conductive(x, y) {
                    cells.push(template.index(x, y));
                }
            }
        }
        cells.sort_unstable();
        cells
    }
}

/// Spread `count` electrodes over the conductive cells by farthest-point
/// sampling, starting from the conductive cell closest to the grid centre.
pub fn place_electrodes(template: &GridTemplate, count: usize, radius: f64) -> Vec<Electrode> {
    let cells = template.conductive_indices();
    if cells.is_empty() || count == 0 {
        return Vec::new();
    }
    let pos = |i: usize| {
        let (x, y) = template.coords(i);
        (x as f64, y as f64)
    };
    let (cx, cy) = (
        (template.width() as f64 - 1.0) / 2.0,
        (template.height() as f64 - 1.0) / 2.0,
    );
    let d2 = |a: (f64, f64), b: (f64, f64)| (a.0 - b.0).powi(2) + (a.1 - b.1).powi(2);
    let first = *cells
        .iter()
        .min_by(|&&a, &&b| d2(pos(a), (cx, cy)).total_cmp(&d2(pos(b), (cx, cy))))
        .expect("non-empty");
    let mut chosen = vec![first];
    let mut nearest: Vec<f64> = cells.iter().map(|&c| d2(pos(c), pos(first))).collect();
    while chosen.len() < count.min(cells.len()) {
        let (best, _) = nearest
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1).then(b.0.cmp(&a.0)))
            .expect("non-empty");
        let pick = cells[best];
        chosen.push(pick);
        for (n, &c) in nearest.iter_mut().zip(&cells) {
            *n = n.min(d2(pos(c), pos(pick)));
        }
    }
    chosen
        .into_iter()
        .map(|i| {
            let (x, y) = template.coords(i);
            Electrode::new(x, y, radius)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_small_or_empty_templates() {
        assert!(matches!(
            GridTemplate::new(2, 5, vec![true; 10]),
            Err(Error::InvalidParameter(_))
        ));
        assert!(matches!(
            GridTemplate::new(3, 3, vec![false; 9]),
            Err(Error::DegenerateTemplate)
        ));
    }

    #[test]
    fn electrode_footprint_is_open_disc() {
        let t = GridTemplate::uniform(9, 9).unwrap();
        // |d| < 2 covers the centre, 4 axis neighbours and 4 diagonals.
        assert_eq!(Electrode::new(4, 4, 2.0).footprint(&t).len(), 9);
        assert_eq!(Electrode::new(4, 4, 1.0).footprint(&t), vec![t.index(4, 4)]);
        assert_eq!(Electrode::new(0, 0, 2.0).footprint(&t).len(), 4);
    }

    #[test]
    fn electrode_validation() {
        let t = GridTemplate::uniform(5, 5).unwrap();
        assert!(Electrode::new(5, 0, 2.0).validate(&t).is_err());
        assert!(Electrode::new(1, 1, 0.0).validate(&t).is_err());
        assert!(Electrode::new(4, 4, 2.0).validate(&t).is_ok());
    }

    #[test]
    fn placement_is_spread_and_on_conductive_cells() {
        let t = GridTemplate::from_fn(21, 21, |x, y| x == 10 || y == 10).unwrap();
        let e = place_electrodes(&t, 5, 2.0);
        assert_eq!(e.len(), 5);
        assert_eq!((e[0].x, e[0].y), (10, 10));
        for el in &e {
            assert!(t.is_conductive(el.x, el.y));
        }
        let mut ends: Vec<_> = e[1..].iter().map(|el| (el.x, el.y)).collect();
        ends.sort();
        assert_eq!(ends, vec![(0, 10), (10, 0), (10, 20), (20, 10)]);
    }

    #[test]
    fn path_distance_follows_mask() {
        let t = GridTemplate::from_fn(5, 3, |x, y| y == 0 || x == 4 || y == 2).unwrap();
        let d = t.path_distances(t.index(0, 0));
        assert_eq!(d[t.index(0, 2)], Some(10));
        assert_eq!(d[t.index(2, 1)], None);
    }
}
