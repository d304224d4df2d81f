//! Randomised RC circuits on colony graphs.
//!
//! Each graph edge becomes a resistor, a capacitor or an R∥C pair whose
//! values scale with the edge length. One node is grounded, two (or more)
//! are driven and every other node is probed.

mod netlist;
mod pulse;
mod sparse;
mod sweep;
mod transient;

pub use netlist::to_spice;
pub use pulse::PulseSpec;
pub use sparse::SparseLdl;
pub use sweep::{
    classify, ensemble_member, fit_sweep, mine_gates, probe_responses, ClassFit, FitReport,
    RcMiningParams, SweepResult,
};
pub use transient::{transient, Drive, Solver, TransientOptions, TransientTrace};

use rand::seq::index::sample;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::seed;
use crate::substrate::ColonyGraph;
use crate::{Error, Result};

/// Resistance that keeps capacitively isolated nodes anchored at DC.
pub const BLEED_OHMS: f64 = 1e9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum RcMode {
    /// Each edge is a resistor or a capacitor.
    Serial,
    /// Each edge is a resistor in parallel with a capacitor.
    Parallel,
}

impl RcMode {
    pub fn key(self) -> &'static str {
        match self {
            Self::Serial => "serial",
            Self::Parallel => "parallel",
        }
    }
}

impl std::str::FromStr for RcMode {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "serial" => Ok(Self::Serial),
            "parallel" => Ok(Self::Parallel),
            _ => Err(Error::Config(format!("unknown RC mode {s:?}"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Role {
    /// Driven input `k`; inputs 0 and 1 are x and y.
    Source(usize),
    Ground,
    Probe,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ElementSpec {
    Resistor { ohms: f64 },
    Capacitor { farads: f64 },
    Parallel { ohms: f64, farads: f64 },
}

impl ElementSpec {
    pub fn conductance(&self) -> f64 {
        match *self {
            Self::Resistor { ohms } | Self::Parallel { ohms, .. } => 1.0 / ohms,
            Self::Capacitor { .. } => 0.0,
        }
    }

    pub fn capacitance(&self) -> f64 {
        match *self {
            Self::Capacitor { farads } | Self::Parallel { farads, .. } => farads,
            Self::Resistor { .. } => 0.0,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Element {
    /// Node positions in [`RcNetwork::node_ids`].
    pub a: usize,
    pub b: usize,
    pub spec: ElementSpec,
    /// Added to anchor a DC-floating node rather than drawn from an edge.
    pub bleed: bool,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RcNetwork {
    pub mode: RcMode,
    /// Graph ids of the circuit nodes.
    pub node_ids: Vec<u64>,
    pub roles: Vec<Role>,
    pub elements: Vec<Element>,
    pub ground: usize,
    /// Driven nodes in input order.
    pub sources: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RcParams {
    /// Ohms per micrometre of edge length.
    pub r_scale: f64,
    /// Farads per micrometre of edge length.
    pub c_scale: f64,
    /// Probability that a serial-mode edge is a resistor.
    pub p_r: f64,
    pub max_retries: usize,
}

impl Default for RcParams {
    fn default() -> Self {
        Self {
            r_scale: 1e3,
            c_scale: 1e-13,
            p_r: 0.5,
            max_retries: 100,
        }
    }
}

impl RcParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.r_scale > 0.0 && self.r_scale.is_finite())
            || !(self.c_scale > 0.0 && self.c_scale.is_finite())
        {
            return Err(Error::InvalidParameter(
                "r_scale and c_scale must be positive".into(),
            ));
        }
        if !(0.0..=1.0).contains(&self.p_r) {
            return Err(Error::InvalidParameter(format!(
                "p_r = {} is not a probability",
                self.p_r
            )));
        }
        if self.max_retries == 0 {
            return Err(Error::InvalidParameter(
                "max_retries must be positive".into(),
            ));
        }
        Ok(())
    }
}

impl RcNetwork {
    pub fn len(&self) -> usize {
        self.node_ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.node_ids.is_empty()
    }

    pub fn source_x(&self) -> usize {
        self.sources[0]
    }

    pub fn source_y(&self) -> usize {
        self.sources[1]
    }

    pub fn probes(&self) -> Vec<usize> {
        (0..self.len())
            .filter(|&i| self.roles[i] == Role::Probe)
            .collect()
    }

    /// Nodes without a resistive path to ground or a source.
    pub fn dc_floating(&self) -> Vec<usize> {
        let mut parent: Vec<usize> = (0..self.len()).collect();
        fn find(p: &mut [usize], mut i: usize) -> usize {
            while p[i] != i {
                p[i] = p[p[i]];
                i = p[i];
            }
            i
        }
        for e in &self.elements {
            if e.spec.conductance() > 0.0 {
                let (ra, rb) = (find(&mut parent, e.a), find(&mut parent, e.b));
                parent[ra.max(rb)] = ra.min(rb);
            }
        }
        let anchored: Vec<usize> = std::iter::once(&self.ground)
            .chain(&self.sources)
            .map(|&t| find(&mut parent, t))
            .collect();
        (0..self.len())
            .filter(|&i| !anchored.contains(&find(&mut parent, i)))
            .collect()
    }
}

/// Builds one randomised network on the connected component that holds
/// the three randomly chosen terminals: ground, x and y.
pub fn build_rc(
    graph: &ColonyGraph,
    mode: RcMode,
    seed: u64,
    params: &RcParams,
) -> Result<RcNetwork> {
    build_rc_inputs(graph, mode, seed, params, 2)
}

/// As [`build_rc`] with `inputs` driven nodes.
pub fn build_rc_inputs(
    graph: &ColonyGraph,
    mode: RcMode,
    seed: u64,
    params: &RcParams,
    inputs: usize,
) -> Result<RcNetwork> {
    params.validate()?;
    let n = graph.nodes().len();
    let terminals = inputs + 1;
    if n < terminals {
        return Err(Error::TerminalSelection(format!(
            "graph has {n} nodes; a ground and {inputs} sources need {terminals}"
        )));
    }
    let labels = graph.components();
    let mut rng = seed::rng(seed);
    let mut chosen = None;
    for _ in 0..params.max_retries {
        let pick = sample(&mut rng, n, terminals).into_vec();
        if pick.iter().all(|&i| labels[i] == labels[pick[0]]) {
            chosen = Some(pick);
            break;
        }
    }
    let pick = chosen.ok_or_else(|| {
        Error::TerminalSelection(format!(
            "no connected terminal set in {} draws",
            params.max_retries
        ))
    })?;
    let g = pick[0];

    let keep: Vec<usize> = (0..n).filter(|&i| labels[i] == labels[g]).collect();
    let mut position = vec![usize::MAX; n];
    for (p, &i) in keep.iter().enumerate() {
        position[i] = p;
    }
    let roles = keep
        .iter()
        .map(|&i| match pick.iter().position(|&t| t == i) {
            Some(0) => Role::Ground,
            Some(k) => Role::Source(k - 1),
            None => Role::Probe,
        })
        .collect();

    let mut elements = Vec::new();
    for edge in graph.edges() {
        let (a, b) = (
            graph.node_index(edge.a).expect("validated graph"),
            graph.node_index(edge.b).expect("validated graph"),
        );
        if labels[a] != labels[g] {
            continue;
        }
        let ohms = params.r_scale * edge.length;
        let farads = params.c_scale * edge.length;
        let spec = match mode {
            RcMode::Serial if rng.random_bool(params.p_r) => ElementSpec::Resistor { ohms },
            RcMode::Serial => ElementSpec::Capacitor { farads },
            RcMode::Parallel => ElementSpec::Parallel { ohms, farads },
        };
        elements.push(Element {
            a: position[a],
            b: position[b],
            spec,
            bleed: false,
        });
    }

    let mut net = RcNetwork {
        mode,
        node_ids: keep.iter().map(|&i| graph.nodes()[i].id).collect(),
        roles,
        elements,
        ground: position[g],
        sources: pick[1..].iter().map(|&i| position[i]).collect(),
    };
    for i in net.dc_floating() {
        net.elements.push(Element {
            a: i,
            b: net.ground,
            spec: ElementSpec::Resistor { ohms: BLEED_OHMS },
            bleed: true,
        });
    }
    Ok(net)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::substrate::GraphNode;

    pub(crate) fn line_graph(n: u64, length: f64) -> ColonyGraph {
        let nodes = (0..n)
            .map(|id| GraphNode {
                id,
                x: id as f64,
                y: 0.0,
                z: 0.0,
            })
            .collect();
        let edges = (1..n).map(|i| (i - 1, i, Some(length))).collect();
        ColonyGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn two_node_graph_cannot_host_terminals() {
        let g = line_graph(2, 1.0);
        assert!(matches!(
            build_rc(&g, RcMode::Serial, 1, &RcParams::default()),
            Err(Error::TerminalSelection(_))
        ));
    }

    #[test]
    fn four_input_networks() {
        let g = line_graph(20, 1.0);
        let net = build_rc_inputs(&g, RcMode::Parallel, 2, &RcParams::default(), 4).unwrap();
        assert_eq!(net.sources.len(), 4);
        for (k, &s) in net.sources.iter().enumerate() {
            assert_eq!(net.roles[s], Role::Source(k));
        }
        assert_eq!(net.probes().len(), 15);
        assert!(build_rc_inputs(
            &line_graph(4, 1.0),
            RcMode::Serial,
            0,
            &RcParams::default(),
            4
        )
        .is_err());
    }

    #[test]
    fn values_scale_with_length() {
        let g = line_graph(3, 10.0);
        let net = build_rc(&g, RcMode::Parallel, 1, &RcParams::default()).unwrap();
        for e in &net.elements {
            match e.spec {
                ElementSpec::Parallel { ohms, farads } => {
                    assert!((ohms - 1e4).abs() < 1e-9);
                    assert!((farads - 1e-12).abs() < 1e-24);
                }
                other => panic!("{other:?}"),
            }
        }
    }

    #[test]
    fn terminals_are_distinct_and_rest_are_probes() {
        let g = line_graph(12, 5.0);
        for seed in 0..50 {
            let net = build_rc(&g, RcMode::Serial, seed, &RcParams::default()).unwrap();
            let t = [net.ground, net.source_x(), net.source_y()];
            assert!(t[0] != t[1] && t[1] != t[2] && t[0] != t[2]);
            assert_eq!(net.probes().len(), 9);
            assert_eq!(net.roles[net.ground], Role::Ground);
        }
    }

    #[test]
    fn same_seed_same_network() {
        let g = line_graph(30, 3.0);
        let p = RcParams::default();
        assert_eq!(
            build_rc(&g, RcMode::Serial, 9, &p).unwrap(),
            build_rc(&g, RcMode::Serial, 9, &p).unwrap()
        );
        assert_ne!(
            build_rc(&g, RcMode::Serial, 9, &p).unwrap(),
            build_rc(&g, RcMode::Serial, 10, &p).unwrap()
        );
    }

    #[test]
    fn disconnected_terminals_are_redrawn() {
        // Two components: a 3-node line and an isolated pair.
        let nodes = (0..5)
            .map(|id| GraphNode {
                id,
                x: id as f64,
                y: 0.0,
                z: 0.0,
            })
            .collect();
        let g = ColonyGraph::new(nodes, vec![(0, 1, None), (1, 2, None), (3, 4, None)]).unwrap();
        let net = build_rc(&g, RcMode::Parallel, 3, &RcParams::default()).unwrap();
        assert_eq!(net.node_ids, vec![0, 1, 2]);
        assert_eq!(net.elements.len(), 2);

        let params = RcParams {
            max_retries: 1,
            ..RcParams::default()
        };
        let failures = (0..40)
            .filter(|&s| build_rc(&g, RcMode::Parallel, s, &params).is_err())
            .count();
        assert!(failures > 0);
    }

    #[test]
    fn capacitor_isolated_nodes_get_bleeds() {
        let g = line_graph(40, 2.0);
        let p = RcParams::default();
        for seed in 0..20 {
            let net = build_rc(&g, RcMode::Serial, seed, &p).unwrap();
            let floating = net.dc_floating();
            let bled: Vec<usize> = net
                .elements
                .iter()
                .filter(|e| e.bleed)
                .map(|e| e.a)
                .collect();
            let mut without = net.clone();
            without.elements.retain(|e| !e.bleed);
            assert_eq!(without.dc_floating(), bled);
            assert!(floating.is_empty());
        }
        let parallel = build_rc(&g, RcMode::Parallel, 0, &p).unwrap();
        assert!(parallel.elements.iter().all(|e| !e.bleed));
    }

    #[test]
    fn all_resistor_or_all_capacitor_extremes() {
        let g = line_graph(6, 1.0);
        let all_r = RcParams {
            p_r: 1.0,
            ..RcParams::default()
        };
        let net = build_rc(&g, RcMode::Serial, 4, &all_r).unwrap();
        assert!(net
            .elements
            .iter()
            .all(|e| matches!(e.spec, ElementSpec::Resistor { .. })));
        let all_c = RcParams {
            p_r: 0.0,
            ..RcParams::default()
        };
        let net = build_rc(&g, RcMode::Serial, 4, &all_c).unwrap();
        assert_eq!(net.elements.iter().filter(|e| e.bleed).count(), 3);
    }
}
