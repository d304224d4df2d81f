//! FitzHugh–Nagumo excitation on a conductive template.
//!
//! The medium lives only on conductive cells. Each step is a forward-Euler
//! update of
//!
//! ```text
//! du/dt = c1·u(u−a)(1−u) − c2·u·v + I + Du·∇²u
//! dv/dt = b·(u − v)
//! ```
//!
//! with the five-point Laplacian. A non-conductive (or off-grid) neighbour
//! contributes the centre value, which makes the mask boundary zero-flux.

use std::io::Write;
use std::ops::ControlFlow;

use serde::{Deserialize, Serialize};

use crate::substrate::{Electrode, GridTemplate};
use crate::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FhnParams {
    pub a: f64,
    pub b: f64,
    pub c1: f64,
    pub c2: f64,
    pub du: f64,
    pub dt: f64,
    pub dx: f64,
}

impl Default for FhnParams {
    fn default() -> Self {
        Self {
            a: 0.13,
            b: 0.013,
            c1: 0.26,
            c2: 0.095,
            du: 1.0,
            dt: 0.015,
            dx: 2.0,
        }
    }
}

impl FhnParams {
    pub fn validate(&self) -> Result<()> {
        let finite = [self.a, self.b, self.c1, self.c2, self.du, self.dt, self.dx]
            .iter()
            .all(|v| v.is_finite());
        if !finite {
            return Err(Error::InvalidParameter(
                "FHN parameters must be finite".into(),
            ));
        }
        if self.dt <= 0.0 || self.dx <= 0.0 || self.du < 0.0 {
            return Err(Error::InvalidParameter(
                "FHN requires dt > 0, dx > 0 and Du >= 0".into(),
            ));
        }
        let courant = self.dt * self.du * 4.0 / (self.dx * self.dx);
        if courant >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "explicit diffusion unstable: dt*Du*4/dx^2 = {courant} >= 1"
            )));
        }
        Ok(())
    }
}

/// External current `amplitude` injected over an electrode's disc for
/// iterations `start..start + duration`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Stimulus {
    pub electrode: Electrode,
    pub start: u64,
    pub duration: u64,
    pub amplitude: f64,
}

/// Amplitude and duration that reliably launch a single wave under the
/// default parameters.
pub const TRUE_PULSE_AMPLITUDE: f64 = 0.5;
pub const TRUE_PULSE_DURATION: u64 = 100;
pub const ELECTRODE_RADIUS: f64 = 2.0;

impl Stimulus {
    /// The impulse encoding logical TRUE on an input electrode.
    pub fn logical_true(electrode: Electrode, start: u64) -> Self {
        Self {
            electrode,
            start,
            duration: TRUE_PULSE_DURATION,
            amplitude: TRUE_PULSE_AMPLITUDE,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct StimulusPlan {
    pub stimuli: Vec<Stimulus>,
}

impl StimulusPlan {
    pub fn new(stimuli: Vec<Stimulus>) -> Self {
        Self { stimuli }
    }

    pub fn validate(&self, template: &GridTemplate) -> Result<()> {
        for s in &self.stimuli {
            s.electrode.validate(template)?;
            if s.duration == 0 {
                return Err(Error::InvalidParameter(
                    "stimulus duration must be positive".into(),
                ));
            }
            if !s.amplitude.is_finite() {
                return Err(Error::InvalidParameter(
                    "stimulus amplitude must be finite".into(),
                ));
            }
        }
        Ok(())
    }
}

/// Per-node state over the conductive cells, in row-major cell order.
#[derive(Clone, Debug, PartialEq)]
pub struct FhnState {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub t: u64,
}

impl FhnState {
    pub fn resting(nodes: usize) -> Self {
        Self {
            u: vec![0.0; nodes],
            v: vec![0.0; nodes],
            t: 0,
        }
    }
}

/// Compact lattice of conductive cells with precomputed stencil neighbours.
#[derive(Clone, Debug)]
pub struct Medium {
    cells: Vec<usize>,
    /// Stencil partner per node and direction; the node itself where the
    /// neighbour is missing.
    stencil: Vec<[u32; 4]>,
    /// Template cell index to compact node index.
    lookup: Vec<Option<u32>>,
    width: usize,
    height: usize,
}

impl Medium {
    pub fn new(template: &GridTemplate) -> Self {
        let cells = template.conductive_indices();
        let mut lookup = vec![None; template.mask().len()];
        for (k, &c) in cells.iter().enumerate() {
            lookup[c] = Some(k as u32);
        }
        let (w, h) = (template.width(), template.height());
        let stencil = cells
            .iter()
            .enumerate()
            .map(|(k, &c)| {
                let (x, y) = template.coords(c);
                let pick = |ok: bool, n: usize| {
                    if ok {
                        lookup[n].unwrap_or(k as u32)
                    } else {
                        k as u32
                    }
                };
                [
                    pick(x > 0, c.wrapping_sub(1)),
                    pick(x + 1 < w, c + 1),
                    pick(y > 0, c.wrapping_sub(w)),
                    pick(y + 1 < h, c + w),
                ]
            })
            .collect();
        Self {
            cells,
            stencil,
            lookup,
            width: w,
            height: h,
        }
    }

    pub fn len(&self) -> usize {
        self.cells.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.is_empty()
    }

    /// Template cell index of each node.
    pub fn cells(&self) -> &[usize] {
        &self.cells
    }

    pub fn node_of_cell(&self, cell: usize) -> Option<usize> {
        self.lookup.get(cell).copied().flatten().map(|k| k as usize)
    }

    /// Compact nodes under an electrode disc.
    pub fn footprint(&self, template: &GridTemplate, electrode: &Electrode) -> Vec<usize> {
        electrode
            .footprint(template)
            .into_iter()
            .filter_map(|c| self.node_of_cell(c))
            .collect()
    }

    /// Pure single step: returns the successor of `state`.
    pub fn step(&self, state: &FhnState, params: &FhnParams, current: &[f64]) -> Result<FhnState> {
        let mut next = FhnState::resting(self.len());
        self.update(state, &mut next, params, current)?;
        Ok(next)
    }

    fn update(
        &self,
        cur: &FhnState,
        next: &mut FhnState,
        params: &FhnParams,
        current: &[f64],
    ) -> Result<()> {
        let FhnParams {
            a,
            b,
            c1,
            c2,
            du,
            dt,
            dx,
        } = *params;
        let diff = du / (dx * dx);
        let (u, v) = (&cur.u[..], &cur.v[..]);
        let mut check = 0.0;
        for (k, nb) in self.stencil.iter().enumerate() {
            let uk = u[k];
            let vk = v[k];
            let lap = u[nb[0] as usize] + u[nb[1] as usize] + u[nb[2] as usize] + u[nb[3] as usize]
                - 4.0 * uk;
            let reaction = c1 * uk * (uk - a) * (1.0 - uk) - c2 * uk * vk;
            let un = uk + dt * (reaction + current[k] + diff * lap);
            let vn = vk + dt * b * (uk - vk);
            check += un + vn;
            next.u[k] = un;
            next.v[k] = vn;
        }
        next.t = cur.t + 1;
        if check.is_finite() {
            return Ok(());
        }
        let bad = (0..self.len())
            .find(|&k| !(next.u[k].is_finite() && next.v[k].is_finite()))
            .unwrap_or(0);
        Err(Error::NumericalBlowup {
            iteration: next.t,
            node: self.cells[bad],
        })
    }
}

/// Summed electrode potential over time.
#[derive(Clone, Debug, PartialEq)]
pub struct PotentialTrace {
    pub electrode: usize,
    /// `(iteration, p)` with strictly increasing iterations.
    pub samples: Vec<(u64, f64)>,
}

/// A stepping simulation over one template.
pub struct Simulation<'a> {
    template: &'a GridTemplate,
    medium: Medium,
    params: FhnParams,
    state: FhnState,
    scratch: FhnState,
    stimuli: Vec<(Stimulus, Vec<usize>)>,
    current: Vec<f64>,
}

impl<'a> Simulation<'a> {
    pub fn new(template: &'a GridTemplate, params: FhnParams, plan: &StimulusPlan) -> Result<Self> {
        params.validate()?;
        plan.validate(template)?;
        let medium = Medium::new(template);
        let n = medium.len();
        let stimuli = plan
            .stimuli
            .iter()
            .map(|s| (*s, medium.footprint(template, &s.electrode)))
            .collect();
        Ok(Self {
            template,
            params,
            state: FhnState::resting(n),
            scratch: FhnState::resting(n),
            stimuli,
            current: vec![0.0; n],
            medium,
        })
    }

    pub fn medium(&self) -> &Medium {
        &self.medium
    }

    pub fn state(&self) -> &FhnState {
        &self.state
    }

    pub fn set_state(&mut self, state: FhnState) -> Result<()> {
        let n = self.medium.len();
        if state.u.len() != n || state.v.len() != n {
            return Err(Error::InvalidParameter(format!(
                "state has {} nodes, medium has {n}",
                state.u.len()
            )));
        }
        self.state = state;
        Ok(())
    }

    pub fn step(&mut self) -> Result<()> {
        let t = self.state.t;
        self.current.iter_mut().for_each(|c| *c = 0.0);
        for (s, nodes) in &self.stimuli {
            if t >= s.start && t < s.start + s.duration {
                for &k in nodes {
                    self.current[k] += s.amplitude;
                }
            }
        }
        self.medium
            .update(&self.state, &mut self.scratch, &self.params, &self.current)?;
        std::mem::swap(&mut self.state, &mut self.scratch);
        Ok(())
    }

    /// `p = Σ (u_y − v_y)` over conductive nodes `y` within the electrode disc.
    pub fn potential(&self, footprint: &[usize]) -> f64 {
        footprint
            .iter()
            .map(|&k| self.state.u[k] - self.state.v[k])
            .sum()
    }

    /// `u` clamped to `[0, 1]` and scaled to bytes, as a PGM image.
    pub fn snapshot_pgm(&self) -> Vec<u8> {
        let mut pixels = vec![0u8; self.medium.width * self.medium.height];
        for (k, &c) in self.medium.cells.iter().enumerate() {
            pixels[c] = (self.state.u[k].clamp(0.0, 1.0) * 255.0).round() as u8;
        }
        let mut out =
            format!("P5\n{} {}\n255\n", self.medium.width, self.medium.height).into_bytes();
        out.extend(pixels);
        out
    }

    pub fn template(&self) -> &GridTemplate {
        self.template
    }
}

/// Runs `iterations` steps from rest and samples every electrode at
/// iterations `0, sample_every, 2·sample_every, …`.
pub fn run(
    template: &GridTemplate,
    params: &FhnParams,
    plan: &StimulusPlan,
    electrodes: &[Electrode],
    iterations: u64,
    sample_every: u64,
) -> Result<Vec<PotentialTrace>> {
    run_with(
        template,
        params,
        plan,
        electrodes,
        iterations,
        sample_every,
        |_| Ok(ControlFlow::Continue(())),
    )
}

/// As [`run`], calling `observe` after every sampled iteration. A `Break`
/// ends the run early; the traces then stop at that sample.
pub fn run_with(
    template: &GridTemplate,
    params: &FhnParams,
    plan: &StimulusPlan,
    electrodes: &[Electrode],
    iterations: u64,
    sample_every: u64,
    mut observe: impl FnMut(&Simulation<'_>) -> Result<ControlFlow<()>>,
) -> Result<Vec<PotentialTrace>> {
    if iterations == 0 || sample_every == 0 {
        return Err(Error::InvalidParameter(
            "iterations and sample interval must be positive".into(),
        ));
    }
    for e in electrodes {
        e.validate(template)?;
    }
    let mut sim = Simulation::new(template, *params, plan)?;
    let footprints: Vec<Vec<usize>> = electrodes
        .iter()
        .map(|e| sim.medium.footprint(template, e))
        .collect();
    let capacity = (iterations / sample_every + 1) as usize;
    let mut traces: Vec<PotentialTrace> = (0..electrodes.len())
        .map(|electrode| PotentialTrace {
            electrode,
            samples: Vec::with_capacity(capacity),
        })
        .collect();
    let record = |sim: &Simulation<'_>, traces: &mut Vec<PotentialTrace>| {
        for (trace, fp) in traces.iter_mut().zip(&footprints) {
            trace.samples.push((sim.state.t, sim.potential(fp)));
        }
    };
    record(&sim, &mut traces);
    if observe(&sim)?.is_break() {
        return Ok(traces);
    }
    for _ in 0..iterations {
        sim.step()?;
        if sim.state.t % sample_every == 0 {
            record(&sim, &mut traces);
            if observe(&sim)?.is_break() {
                break;
            }
        }
    }
    Ok(traces)
}

/// Writes traces as CSV `iteration,electrode_id,p`, ordered by iteration
/// then electrode.
pub fn write_traces_csv(traces: &[PotentialTrace], mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "iteration,electrode_id,p")?;
    let rows = traces.iter().map(|t| t.samples.len()).max().unwrap_or(0);
    for i in 0..rows {
        for t in traces {
            if let Some(&(it, p)) = t.samples.get(i) {
                writeln!(out, "{it},{},{p}", t.electrode)?;
            }
        }
    }
    Ok(())
}

/// Reads traces written by [`write_traces_csv`].
pub fn read_traces_csv(text: &str) -> Result<Vec<PotentialTrace>> {
    let mut traces: Vec<PotentialTrace> = Vec::new();
    for (lineno, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let err = |message: &str| Error::Parse {
            line: lineno + 1,
            message: message.to_string(),
        };
        let mut f = line.split(',');
        let it: u64 = f
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err("bad iteration"))?;
        let e: usize = f
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err("bad electrode id"))?;
        let p: f64 = f
            .next()
            .and_then(|s| s.trim().parse().ok())
            .ok_or_else(|| err("bad potential"))?;
        while traces.len() <= e {
            let electrode = traces.len();
            traces.push(PotentialTrace {
                electrode,
                samples: Vec::new(),
            });
        }
        let samples = &mut traces[e].samples;
        if samples.last().is_some_and(|&(last, _)| last >= it) {
            return Err(err("iterations must be strictly increasing per electrode"));
        }
        samples.push((it, p));
    }
    Ok(traces)
}
