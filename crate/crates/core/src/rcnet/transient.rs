//! Backward-Euler transient analysis by nodal analysis.
//!
//! Ground and the two source nodes have known potentials and are removed
//! from the unknowns, which leaves a symmetric positive definite system
//! `(G + C/dt) v⁺ = C/dt v + b(t⁺)`. The matrix does not depend on time, so
//! it is factored once per network and step size.

use serde::{Deserialize, Serialize};

use super::{PulseSpec, RcNetwork, SparseLdl};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct TransientOptions {
    /// Step size, seconds.
    pub dt: f64,
    /// Simulated time, seconds.
    pub t_end: f64,
}

impl Default for TransientOptions {
    fn default() -> Self {
        Self {
            dt: 5e-6,
            t_end: 1e-2,
        }
    }
}

impl TransientOptions {
    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) || !(self.t_end >= self.dt) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0 and t_end ≥ dt, got dt = {}, t_end = {}",
                self.dt, self.t_end
            )));
        }
        Ok(())
    }

    pub fn steps(&self) -> usize {
        (self.t_end / self.dt).round() as usize
    }
}

/// Source waveforms; `None` holds the source at 0 V.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Drive {
    pub x: Option<PulseSpec>,
    pub y: Option<PulseSpec>,
}

impl Drive {
    pub fn inputs(x: bool, y: bool, pulse: PulseSpec) -> Self {
        Self {
            x: x.then_some(pulse),
            y: y.then_some(pulse),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TransientTrace {
    pub times: Vec<f64>,
    /// Node positions of the probes, in network order.
    pub probes: Vec<usize>,
    /// `voltages[k][i]` is probe `k` at `times[i]`, relative to ground.
    pub voltages: Vec<Vec<f64>>,
    /// Worst nodal current imbalance over the run, relative to the largest
    /// branch current of the run.
    pub max_kcl_residual: f64,
}

#[derive(Clone, Copy, Debug)]
struct Stamp {
    a: usize,
    b: usize,
    g: f64,
    gc: f64,
}

/// A network prepared for repeated transient runs at one step size.
#[derive(Clone, Debug)]
pub struct Solver<'a> {
    net: &'a RcNetwork,
    dt: f64,
    /// Unknown index per node, `None` for ground and sources.
    unknown: Vec<Option<usize>>,
    stamps: Vec<Stamp>,
    ldl: SparseLdl,
}

impl<'a> Solver<'a> {
    pub fn new(net: &'a RcNetwork, dt: f64) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::InvalidParameter(format!("step size {dt}")));
        }
        let n = net.len();
        let fixed: Vec<usize> = std::iter::once(net.ground)
            .chain(net.sources.iter().copied())
            .collect();
        let mut unknown = vec![None; n];
        let mut count = 0;
        for (i, slot) in unknown.iter_mut().enumerate() {
            if !fixed.contains(&i) {
                *slot = Some(count);
                count += 1;
            }
        }
        let stamps: Vec<Stamp> = net
            .elements
            .iter()
            .map(|e| Stamp {
                a: e.a,
                b: e.b,
                g: e.spec.conductance(),
                gc: e.spec.capacitance() / dt,
            })
            .collect();
        check_anchored(net, &stamps, &fixed)?;

        let mut triplets = Vec::with_capacity(3 * stamps.len());
        for s in &stamps {
            let y = s.g + s.gc;
            match (unknown[s.a], unknown[s.b]) {
                (Some(a), Some(b)) => triplets.extend([(a, a, y), (b, b, y), (a, b, -y)]),
                (Some(a), None) => triplets.push((a, a, y)),
                (None, Some(b)) => triplets.push((b, b, y)),
                (None, None) => {}
            }
        }
        let ldl = SparseLdl::factor(count, &triplets)?;
        Ok(Self {
            net,
            dt,
            unknown,
            stamps,
            ldl,
        })
    }

    /// Runs `drive` on inputs x and y; further inputs are held at 0 V.
    pub fn run(
        &self,
        drive: &Drive,
        steps: usize,
        observe: impl FnMut(f64, &[f64]),
    ) -> Result<f64> {
        for p in [drive.x, drive.y].iter().flatten() {
            p.validate()?;
        }
        let wave = |p: &Option<PulseSpec>, t: f64| p.map_or(0.0, |p| p.value(t));
        self.run_levels(
            steps,
            |t, levels| {
                levels.iter_mut().for_each(|l| *l = 0.0);
                levels[0] = wave(&drive.x, t);
                levels[1] = wave(&drive.y, t);
            },
            observe,
        )
    }

    /// Integrates `steps` steps with source potentials set by
    /// `levels(t, out)`, calling `observe(t, v)` with the potentials of all
    /// nodes at `t = 0` and after every step. The network starts at rest
    /// with every potential, sources included, at 0 V; source levels are
    /// applied from the first step on. Returns the worst KCL imbalance
    /// relative to the largest branch current.
    pub fn run_levels(
        &self,
        steps: usize,
        mut levels: impl FnMut(f64, &mut [f64]),
        mut observe: impl FnMut(f64, &[f64]),
    ) -> Result<f64> {
        let net = self.net;
        let mut level = vec![0.0; net.sources.len()];
        let mut v = vec![0.0; net.len()];
        observe(0.0, &v);

        let mut next = v.clone();
        let mut rhs = vec![0.0; self.ldl.len()];
        let mut imbalance = vec![0.0; net.len()];
        let (mut worst, mut largest) = (0.0_f64, 0.0_f64);
        for step in 1..=steps {
            let t = step as f64 * self.dt;
            next[net.ground] = 0.0;
            levels(t, &mut level);
            for (&node, &l) in net.sources.iter().zip(&level) {
                next[node] = l;
            }

            rhs.iter_mut().for_each(|r| *r = 0.0);
            for s in &self.stamps {
                let history = s.gc * (v[s.a] - v[s.b]);
                let y = s.g + s.gc;
                if let Some(a) = self.unknown[s.a] {
                    rhs[a] += history;
                    if self.unknown[s.b].is_none() {
                        rhs[a] += y * next[s.b];
                    }
                }
                if let Some(b) = self.unknown[s.b] {
                    rhs[b] -= history;
                    if self.unknown[s.a].is_none() {
                        rhs[b] += y * next[s.a];
                    }
                }
            }
            self.ldl.solve_in_place(&mut rhs);
            for (i, u) in self.unknown.iter().enumerate() {
                if let Some(k) = *u {
                    next[i] = rhs[k];
                }
            }

            imbalance.iter_mut().for_each(|r| *r = 0.0);
            for s in &self.stamps {
                let dv = next[s.a] - next[s.b];
                let i = s.g * dv + s.gc * (dv - (v[s.a] - v[s.b]));
                imbalance[s.a] -= i;
                imbalance[s.b] += i;
                largest = largest.max(i.abs());
            }
            worst = (0..net.len())
                .filter(|&i| self.unknown[i].is_some())
                .fold(worst, |m, i| m.max(imbalance[i].abs()));
            if next.iter().any(|x| !x.is_finite()) {
                return Err(Error::Invariant(format!(
                    "non-finite node potential at t = {t:e}"
                )));
            }
            observe(t, &next);
            std::mem::swap(&mut v, &mut next);
        }
        Ok(if largest > 0.0 {
            worst / largest
        } else {
            worst
        })
    }
}

fn check_anchored(net: &RcNetwork, stamps: &[Stamp], fixed: &[usize]) -> Result<()> {
    let mut adj = vec![Vec::new(); net.len()];
    for s in stamps {
        if s.g > 0.0 || s.gc > 0.0 {
            adj[s.a].push(s.b);
            adj[s.b].push(s.a);
        }
    }
    let mut seen = vec![false; net.len()];
    let mut stack: Vec<usize> = fixed.to_vec();
    for &f in fixed {
        seen[f] = true;
    }
    while let Some(i) = stack.pop() {
        for &j in &adj[i] {
            if !seen[j] {
                seen[j] = true;
                stack.push(j);
            }
        }
    }
    let lost: Vec<u64> = (0..net.len())
        .filter(|&i| !seen[i])
        .map(|i| net.node_ids[i])
        .collect();
    if lost.is_empty() {
        Ok(())
    } else {
        Err(Error::Topology { nodes: lost })
    }
}

/// Runs one transient and records every probe.
pub fn transient(
    net: &RcNetwork,
    drive: &Drive,
    opts: &TransientOptions,
) -> Result<TransientTrace> {
    opts.validate()?;
    let solver = Solver::new(net, opts.dt)?;
    let probes = net.probes();
    let steps = opts.steps();
    let mut times = Vec::with_capacity(steps + 1);
    let mut voltages = vec![Vec::with_capacity(steps + 1); probes.len()];
    let max_kcl_residual = solver.run(drive, steps, |t, v| {
        times.push(t);
        for (trace, &p) in voltages.iter_mut().zip(&probes) {
            trace.push(v[p]);
        }
    })?;
    Ok(TransientTrace {
        times,
        probes,
        voltages,
        max_kcl_residual,
    })
}
