//! Gate mining over randomised network ensembles.

use std::io::Write;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{build_rc, Drive, PulseSpec, RcMode, RcNetwork, RcParams, Solver, TransientOptions};
use crate::fit::{fit_poly, fit_power_law, Polynomial, PowerLaw};
use crate::gates::{GateClass, TwoInputGate};
use crate::seed;
use crate::substrate::ColonyGraph;
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RcMiningParams {
    pub rc: RcParams,
    pub pulse: PulseSpec,
    pub transient: TransientOptions,
}

/// Input conditions `(x, y)` in response order.
pub const CONDITIONS: [(bool, bool); 4] =
    [(false, false), (false, true), (true, false), (true, true)];

/// Class of the table obtained by reading each response as `V > θ`;
/// `None` for constant tables and tables with `f(0,0) = 1`.
pub fn classify(responses: &[f64; 4], theta: f64) -> Option<GateClass> {
    let [f00, f01, f10, f11] = responses.map(|r| r > theta);
    TwoInputGate::from_table(f00, f01, f10, f11).map(TwoInputGate::class)
}

/// Peak |V| of every probe under each of the four input conditions.
pub fn probe_responses(net: &RcNetwork, params: &RcMiningParams) -> Result<Vec<[f64; 4]>> {
    params.transient.validate()?;
    params.pulse.validate()?;
    let solver = Solver::new(net, params.transient.dt)?;
    let probes = net.probes();
    let mut out = vec![[0.0_f64; 4]; probes.len()];
    for (c, &(x, y)) in CONDITIONS.iter().enumerate() {
        let drive = Drive::inputs(x, y, params.pulse);
        solver.run(&drive, params.transient.steps(), |_, v| {
            for (r, &p) in out.iter_mut().zip(&probes) {
                r[c] = r[c].max(v[p].abs());
            }
        })?;
    }
    Ok(out)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SweepResult {
    pub thetas: Vec<f64>,
    /// Per-θ counts indexed by [`GateClass::index`].
    pub counts: Vec<[u64; 5]>,
    pub networks: usize,
}

impl SweepResult {
    pub fn new(thetas: Vec<f64>) -> Result<Self> {
        if thetas.is_empty() || thetas.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidParameter(
                "θ grid must be non-empty and strictly increasing".into(),
            ));
        }
        let counts = vec![[0; 5]; thetas.len()];
        Ok(Self {
            thetas,
            counts,
            networks: 0,
        })
    }

    pub fn add_probe(&mut self, responses: &[f64; 4]) {
        for (theta, row) in self.thetas.iter().zip(&mut self.counts) {
            if let Some(class) = classify(responses, *theta) {
                row[class.index()] += 1;
            }
        }
    }

    pub fn merge(&mut self, other: &SweepResult) {
        assert_eq!(
            self.thetas, other.thetas,
            "merging sweeps over different grids"
        );
        for (a, b) in self.counts.iter_mut().zip(&other.counts) {
            for (x, y) in a.iter_mut().zip(b) {
                *x += y;
            }
        }
        self.networks += other.networks;
    }

    pub fn curve(&self, class: GateClass) -> Vec<f64> {
        self.counts
            .iter()
            .map(|r| r[class.index()] as f64)
            .collect()
    }

    /// Count summed over the whole grid.
    pub fn total(&self, class: GateClass) -> u64 {
        self.counts.iter().map(|r| r[class.index()]).sum()
    }

    pub fn write_csv(&self, mut w: impl Write) -> Result<()> {
        let header: Vec<&str> = GateClass::ALL.iter().map(|c| c.key()).collect();
        writeln!(w, "theta,{}", header.join(","))?;
        for (theta, row) in self.thetas.iter().zip(&self.counts) {
            let cells: Vec<String> = row.iter().map(u64::to_string).collect();
            writeln!(w, "{theta},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Network `index` of the ensemble drawn from `master_seed`.
pub fn ensemble_member(
    graph: &ColonyGraph,
    mode: RcMode,
    params: &RcParams,
    master_seed: u64,
    index: u64,
) -> Result<RcNetwork> {
    build_rc(
        graph,
        mode,
        seed::derive(master_seed, "rc-network", index),
        params,
    )
}

/// Runs `ensemble` randomised networks on `graph` and counts, for every θ,
/// the probes whose four responses form a gate of each class.
pub fn mine_gates(
    graph: &ColonyGraph,
    mode: RcMode,
    ensemble: usize,
    thetas: &[f64],
    params: &RcMiningParams,
    master_seed: u64,
) -> Result<SweepResult> {
    if ensemble == 0 {
        return Err(Error::InvalidParameter("ensemble must be positive".into()));
    }
    let empty = SweepResult::new(thetas.to_vec())?;
    let members: Vec<SweepResult> = (0..ensemble as u64)
        .into_par_iter()
        .map(|i| {
            let net = ensemble_member(graph, mode, &params.rc, master_seed, i)?;
            let mut sweep = empty.clone();
            for r in probe_responses(&net, params)? {
                sweep.add_probe(&r);
            }
            sweep.networks = 1;
            Ok(sweep)
        })
        .collect::<Result<_>>()?;
    Ok(members.iter().fold(empty, |mut acc, m| {
        acc.merge(m);
        acc
    }))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClassFit {
    pub class: GateClass,
    pub total: u64,
    pub power_law: Option<PowerLaw>,
    pub line: Option<Polynomial>,
    pub quadratic: Option<Polynomial>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub networks: usize,
    pub fits: Vec<ClassFit>,
}

/// Power-law, linear and quadratic fits of every class curve; a fit that
/// lacks data is left out.
pub fn fit_sweep(sweep: &SweepResult) -> FitReport {
    let fits = GateClass::ALL
        .iter()
        .map(|&class| {
            let n = sweep.curve(class);
            let any = n.iter().any(|&v| v > 0.0);
            ClassFit {
                class,
                total: sweep.total(class),
                power_law: fit_power_law(&sweep.thetas, &n).ok(),
                line: any.then(|| fit_poly(&sweep.thetas, &n, 1).ok()).flatten(),
                quadratic: any.then(|| fit_poly(&sweep.thetas, &n, 2).ok()).flatten(),
            }
        })
        .collect();
    FitReport {
        networks: sweep.networks,
        fits,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fit::theta_grid;
    use crate::substrate::GraphNode;
    use proptest::prelude::*;

    #[test]
    fn threshold_rule_example() {
        let r = [0.0, 0.01, 0.02, 0.03];
        assert_eq!(classify(&r, 0.025), Some(GateClass::And));
        assert_eq!(classify(&r, 0.015), Some(GateClass::Select));
        assert_eq!(classify(&r, 0.005), Some(GateClass::Or));
        assert_eq!(classify(&r, 0.03), None);
    }

    #[test]
    fn strict_comparison() {
        let r = [0.0, 0.02, 0.0, 0.02];
        assert_eq!(classify(&r, 0.02), None);
        assert_eq!(classify(&r, 0.019_999), Some(GateClass::Select));
    }

    #[test]
    fn other_classes() {
        assert_eq!(
            classify(&[0.0, 0.02, 0.02, 0.0], 0.01),
            Some(GateClass::Xor)
        );
        assert_eq!(
            classify(&[0.0, 0.0, 0.02, 0.005], 0.01),
            Some(GateClass::AndNot)
        );
        assert_eq!(classify(&[0.02, 0.02, 0.02, 0.02], 0.01), None);
    }

    proptest! {
        #[test]
        fn labels_only_move_down(r in prop::array::uniform4(0.0f64..0.06), a in 0.0f64..0.05, b in 0.0f64..0.05) {
            let (lo, hi) = if a <= b { (a, b) } else { (b, a) };
            let r = [0.0, r[1], r[2], r[3]];
            let high = |t: f64| [r[1] > t, r[2] > t, r[3] > t];
            for (x, y) in high(hi).iter().zip(high(lo)) {
                prop_assert!(!x | y);
            }
            match classify(&r, lo) {
                Some(GateClass::And) => prop_assert!(matches!(classify(&r, hi), Some(GateClass::And) | None)),
                None => prop_assert_eq!(classify(&r, hi), None),
                Some(GateClass::Or) => {}
                _ => prop_assert_ne!(classify(&r, hi), Some(GateClass::Or)),
            }
        }
    }

    fn comb() -> ColonyGraph {
        // A spine with a tooth on every node.
        let mut nodes = Vec::new();
        let mut edges = Vec::new();
        for i in 0..15u64 {
            nodes.push(GraphNode {
                id: i,
                x: 10.0 * i as f64,
                y: 0.0,
                z: 0.0,
            });
            nodes.push(GraphNode {
                id: 100 + i,
                x: 10.0 * i as f64,
                y: 7.0,
                z: 1.0,
            });
            edges.push((i, 100 + i, None));
            if i > 0 {
                edges.push((i - 1, i, Some(4.0 + i as f64)));
            }
        }
        ColonyGraph::new(nodes, edges).unwrap()
    }

    fn quick() -> RcMiningParams {
        RcMiningParams {
            transient: TransientOptions {
                dt: 2e-5,
                t_end: 5e-3,
            },
            ..RcMiningParams::default()
        }
    }

    #[test]
    fn passive_networks_keep_zero_preserved() {
        let g = comb();
        for mode in [RcMode::Serial, RcMode::Parallel] {
            for s in 0..5 {
                let net = build_rc(&g, mode, s, &RcParams::default()).unwrap();
                for r in probe_responses(&net, &quick()).unwrap() {
                    assert_eq!(r[0], 0.0);
                }
            }
        }
    }

    #[test]
    fn parallel_mode_is_superposition() {
        // In the quasi-static regime every probe is a fixed non-negative mix
        // of the two inputs, so the (1,1) response is the sum of the others.
        let g = comb();
        for s in 0..5 {
            let net = build_rc(&g, RcMode::Parallel, s, &RcParams::default()).unwrap();
            for r in probe_responses(&net, &quick()).unwrap() {
                assert!((r[3] - r[1] - r[2]).abs() <= 1e-4 * r[3], "{r:?}");
            }
        }
    }

    #[test]
    fn sweep_is_deterministic_and_counts_probes() {
        let g = comb();
        let thetas = theta_grid();
        let a = mine_gates(&g, RcMode::Serial, 6, &thetas, &quick(), 11).unwrap();
        let b = mine_gates(&g, RcMode::Serial, 6, &thetas, &quick(), 11).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.networks, 6);
        for row in &a.counts {
            assert!(row.iter().sum::<u64>() <= 6 * 27);
        }
        let c = mine_gates(&g, RcMode::Serial, 6, &thetas, &quick(), 12).unwrap();
        assert_ne!(a.counts, c.counts);
    }

    #[test]
    fn csv_layout() {
        let mut s = SweepResult::new(vec![0.001, 0.002]).unwrap();
        s.add_probe(&[0.0, 0.0015, 0.0, 0.003]);
        let mut out = Vec::new();
        s.write_csv(&mut out).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "theta,and,or,andnot,select,xor\n0.001,0,0,0,1,0\n0.002,1,0,0,0,0\n"
        );
        assert!(SweepResult::new(vec![0.2, 0.1]).is_err());
    }

    #[test]
    fn fit_report_skips_empty_classes() {
        let thetas = theta_grid();
        let mut s = SweepResult::new(thetas.clone()).unwrap();
        for (row, t) in s.counts.iter_mut().zip(&thetas) {
            row[GateClass::Select.index()] = (2203.0 * t.powf(-0.48)).round() as u64;
        }
        let report = fit_sweep(&s);
        let select = &report.fits[GateClass::Select.index()];
        let law = select.power_law.unwrap();
        assert!((law.exponent + 0.48).abs() < 0.01);
        assert!(report.fits[GateClass::Xor.index()].power_law.is_none());
        assert!(report.fits[GateClass::Xor.index()].line.is_none());
    }
}
