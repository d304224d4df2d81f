//! 3-D colony graphs: text format, validation and derivation from templates.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::GridTemplate;
use crate::{seed, Error, Result};

const LENGTH_RTOL: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphNode {
    pub id: u64,
    /// Micrometres.
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphEdge {
    pub a: u64,
    pub b: u64,
    /// Micrometres.
    pub length: f64,
}

/// Spatial graph of a colony. Nodes are addressed by position in
/// [`ColonyGraph::nodes`]; edges refer to node ids.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ColonyGraph {
    nodes: Vec<GraphNode>,
    edges: Vec<GraphEdge>,
    #[serde(skip)]
    index: HashMap<u64, usize>,
}

impl ColonyGraph {
    /// Builds a graph, checking id uniqueness, endpoints, self-loops and edge
    /// lengths. An edge with `length == None` takes the Euclidean distance of
    /// its endpoints.
    pub fn new(nodes: Vec<GraphNode>, edges: Vec<(u64, u64, Option<f64>)>) -> Result<Self> {
        let mut index = HashMap::with_capacity(nodes.len());
        for (i, n) in nodes.iter().enumerate() {
            if ![n.x, n.y, n.z].iter().all(|c| c.is_finite()) {
                return Err(Error::Invariant(format!(
                    "node {} has non-finite coordinates",
                    n.id
                )));
            }
            if index.insert(n.id, i).is_some() {
                return Err(Error::Invariant(format!("duplicate node id {}", n.id)));
            }
        }
        let mut checked = Vec::with_capacity(edges.len());
        for (a, b, length) in edges {
            let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) else {
                let missing = if index.contains_key(&a) { b } else { a };
                return Err(Error::Invariant(format!(
                    "edge {a}-{b} references unknown node {missing}"
                )));
            };
            if a == b {
                return Err(Error::Invariant(format!("edge {a}-{b} is a self-loop")));
            }
            let euclid = distance(&nodes[ia], &nodes[ib]);
            let length = match length {
                Some(l) if l.is_finite() && l > 0.0 => l,
                Some(l) => {
                    return Err(Error::Invariant(format!(
                        "edge {a}-{b} has non-positive length {l}"
                    )))
                }
                None if euclid > 0.0 => euclid,
                None => {
                    return Err(Error::Invariant(format!(
                        "edge {a}-{b} joins coincident nodes and has no explicit length"
                    )))
                }
            };
            checked.push(GraphEdge { a, b, length });
        }
        Ok(Self {
            nodes,
            edges: checked,
            index,
        })
    }

    pub fn nodes(&self) -> &[GraphNode] {
        &self.nodes
    }

    pub fn edges(&self) -> &[GraphEdge] {
        &self.edges
    }

    pub fn node_index(&self, id: u64) -> Option<usize> {
        self.index.get(&id).copied()
    }

    /// Whether the edge length is the Euclidean distance of its endpoints.
    pub fn is_euclidean(&self, edge: &GraphEdge) -> bool {
        let d = distance(
            &self.nodes[self.index[&edge.a]],
            &self.nodes[self.index[&edge.b]],
        );
        (edge.length - d).abs() <= LENGTH_RTOL * d.max(f64::MIN_POSITIVE)
    }

    /// Adjacency by node position: `(neighbour position, edge position)`.
    pub fn adjacency(&self) -> Vec<Vec<(usize, usize)>> {
        let mut adj = vec![Vec::new(); self.nodes.len()];
        for (e, edge) in self.edges.iter().enumerate() {
            let (a, b) = (self.index[&edge.a], self.index[&edge.b]);
            adj[a].push((b, e));
            adj[b].push((a, e));
        }
        adj
    }

    /// Component label per node position, labels numbered from 0 in order
    /// of first appearance.
    pub fn components(&self) -> Vec<usize> {
        let adj = self.adjacency();
        let mut label = vec![usize::MAX; self.nodes.len()];
        let mut next = 0;
        let mut stack = Vec::new();
        for start in 0..self.nodes.len() {
            if label[start] != usize::MAX {
                continue;
            }
            label[start] = next;
            stack.push(start);
            while let Some(i) = stack.pop() {
                for &(n, _) in &adj[i] {
                    if label[n] == usize::MAX {
                        label[n] = next;
                        stack.push(n);
                    }
                }
            }
            next += 1;
        }
        label
    }

    /// Parses the line-oriented graph format:
    ///
    /// ```text
    /// # comment
    /// N <id> <x> <y> <z>
    /// E <id1> <id2> [length]
    /// ```
    pub fn parse(text: &str) -> Result<Self> {
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let err = |message: String| Error::Parse {
                line: lineno + 1,
                message,
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            let num = |s: &str| -> Result<f64> {
                s.parse::<f64>()
                    .map_err(|_| err(format!("expected a number, found `{s}`")))
            };
            let id = |s: &str| -> Result<u64> {
                s.parse::<u64>()
                    .map_err(|_| err(format!("expected a node id, found `{s}`")))
            };
            match fields[0] {
                "N" if fields.len() == 5 => nodes.push(GraphNode {
                    id: id(fields[1])?,
                    x: num(fields[2])?,
                    y: num(fields[3])?,
                    z: num(fields[4])?,
                }),
                "E" if fields.len() == 3 || fields.len() == 4 => {
                    let length = fields.get(3).map(|s| num(s)).transpose()?;
                    edges.push((id(fields[1])?, id(fields[2])?, length));
                }
                "N" | "E" => {
                    return Err(err(format!(
                        "wrong number of fields for `{}` record",
                        fields[0]
                    )))
                }
                other => return Err(err(format!("unknown record type `{other}`"))),
            }
        }
        Self::new(nodes, edges)
    }

    /// Serializes in the format read by [`ColonyGraph::parse`], always writing
    /// explicit lengths.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        for n in &self.nodes {
            let _ = writeln!(out, "N {} {:?} {:?} {:?}", n.id, n.x, n.y, n.z);
        }
        for e in &self.edges {
            let _ = writeln!(out, "E {} {} {:?}", e.a, e.b, e.length);
        }
        out
    }
}

fn distance(a: &GraphNode, b: &GraphNode) -> f64 {
    ((a.x - b.x).powi(2) + (a.y - b.y).powi(2) + (a.z - b.z).powi(2)).sqrt()
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GraphOptions {
    /// Upper bound of the uniform z coordinate, micrometres.
    pub z_jitter: f64,
    /// Lattice spacing, micrometres per grid unit.
    pub pixel_size: f64,
    /// Replace chains of degree-2 nodes by single edges of the chain length.
    pub contract_chains: bool,
    pub seed: u64,
}

impl Default for GraphOptions {
    fn default() -> Self {
        Self {
            z_jitter: 0.0,
            pixel_size: 1.0,
            contract_chains: true,
            seed: 0,
        }
    }
}

/// Converts the conductive cells of a template into a spatial graph whose
/// edges follow 4-neighbour adjacency. Node ids are row-major cell indices.
pub fn graph_from_template(template: &GridTemplate, opts: &GraphOptions) -> Result<ColonyGraph> {
    if !(opts.z_jitter >= 0.0) || !(opts.pixel_size > 0.0) {
        return Err(Error::InvalidParameter(
            "z jitter must be non-negative and pixel size positive".into(),
        ));
    }
    let cells = template.conductive_indices();
    let mut rng = seed::rng(opts.seed);
    let mut z = vec![0.0; template.mask().len()];
    for &c in &cells {
        z[c] = if opts.z_jitter > 0.0 {
            rng.random_range(0.0..=opts.z_jitter)
        } else {
            0.0
        };
    }
    let node = |c: usize| {
        let (x, y) = template.coords(c);
        GraphNode {
            id: c as u64,
            x: x as f64 * opts.pixel_size,
            y: y as f64 * opts.pixel_size,
            z: z[c],
        }
    };
    let seg = |a: usize, b: usize| distance(&node(a), &node(b));

    if !opts.contract_chains {
        let nodes = cells.iter().map(|&c| node(c)).collect();
        let mut edges = Vec::new();
        for &c in &cells {
            for n in template.neighbours(c).filter(|&n| n > c) {
                edges.push((c as u64, n as u64, Some(seg(c, n))));
            }
        }
        return ColonyGraph::new(nodes, edges);
    }

    let degree = |c: usize| template.neighbours(c).count();
    let mut kept: HashSet<usize> = cells.iter().copied().filter(|&c| degree(c) != 2).collect();

    // Walk from `start` through `first` until reaching a kept cell. Returns
    // the end cell, the last cell before it, and the interior cells.
    let walk = |kept: &HashSet<usize>, start: usize, first: usize| {
        let mut prev = start;
        let mut cur = first;
        let mut interior = Vec::new();
        while !kept.contains(&cur) {
            interior.push(cur);
            let next = template
                .neighbours(cur)
                .find(|&n| n != prev)
                .expect("degree-2 cell has a forward neighbour");
            prev = cur;
            cur = next;
        }
        (cur, prev, interior)
    };

    // Break closed loops so that no contracted edge is a self-loop: a chain
    // returning to its start keeps its middle cell, and a component that is a
    // pure cycle keeps its lowest cell first.
    loop {
        let mut changed = false;
        let mut covered: HashSet<usize> = kept.clone();
        let mut sorted: Vec<usize> = kept.iter().copied().collect();
        sorted.sort_unstable();
        for &k in &sorted {
            let firsts: Vec<usize> = template.neighbours(k).collect();
            for f in firsts {
                let (end, _, interior) = walk(&kept, k, f);
                covered.extend(interior.iter().copied());
                if end == k && !interior.is_empty() {
                    kept.insert(interior[interior.len() / 2]);
                    changed = true;
                }
            }
            if changed {
                break;
            }
        }
        if !changed {
            if let Some(&lone) = cells.iter().find(|c| !covered.contains(c)) {
                kept.insert(lone);
                changed = true;
            }
        }
        if !changed {
            break;
        }
    }

    let mut kept_sorted: Vec<usize> = kept.iter().copied().collect();
    kept_sorted.sort_unstable();
    let nodes = kept_sorted.iter().map(|&c| node(c)).collect();
    let mut done: HashSet<(usize, usize)> = HashSet::new();
    let mut edges = Vec::new();
    for &k in &kept_sorted {
        let firsts: Vec<usize> = template.neighbours(k).collect();
        for f in firsts {
            if done.contains(&(k, f)) {
                continue;
            }
            let (end, last, interior) = walk(&kept, k, f);
            done.insert((k, f));
            done.insert((end, last));
            let mut length = 0.0;
            let mut prev = k;
            for &c in interior.iter().chain(std::iter::once(&end)) {
                length += seg(prev, c);
                prev = c;
            }
            edges.push((k as u64, end as u64, Some(length)));
        }
    }
    ColonyGraph::new(nodes, edges)
}
