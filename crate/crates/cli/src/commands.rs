use std::fmt::Write as _;
use std::fs;

use anyhow::{bail, ensure, Context, Result};
use mycologic::excitable::{self, Stimulus, StimulusPlan};
use mycologic::funcmine::{
    self, census_functions, read_trace_csv, sop, synth_driver, write_trace_csv, ChannelRecording,
    Channels, DriveSubstrate, StateBoundaries,
};
use mycologic::rcnet::{
    build_rc_inputs, ensemble_member, fit_sweep, mine_gates, to_spice, Drive, RcMiningParams,
    RcMode,
};
use mycologic::report::{census_svg, gate_ratio_svg, sweep_svg};
use mycologic::spikegates::{
    census, mine_spike_gates, random_pairs, InputPair, RatioReport, SpikeMiningParams,
};
use mycologic::substrate::{
    graph_from_template, load_template, place_electrodes, save_template, synthesize_colony,
    ColonyGraph, ColonyParams, Electrode, GraphOptions, GridTemplate,
};

use crate::config::{FunctionSource, RunConfig, SubstrateSource};
use crate::output::Output;

/// Template `index` of the configured substrate.
fn template(cfg: &RunConfig, out: &mut Output, index: u64) -> Result<GridTemplate> {
    let s = &cfg.substrate;
    match s.source {
        SubstrateSource::Synthetic => Ok(synthesize_colony(&ColonyParams {
            seed: out.seed(cfg.seed, "colony", index),
            width: s.width,
            height: s.height,
            branch_rate: s.branch_rate,
            steps: s.steps,
        })?),
        SubstrateSource::Image => {
            let path = s.image.as_ref().context("substrate.image is not set")?;
            let bytes =
                fs::read(path).with_context(|| format!("cannot read {}", path.display()))?;
            Ok(load_template(&bytes, s.threshold)?)
        }
        SubstrateSource::Graph => bail!("this command needs a grid substrate, not a graph file"),
    }
}

fn colony_count(cfg: &RunConfig) -> u64 {
    match cfg.substrate.source {
        SubstrateSource::Synthetic => cfg.substrate.colonies as u64,
        _ => 1,
    }
}

fn graph(cfg: &RunConfig, out: &mut Output) -> Result<ColonyGraph> {
    if cfg.substrate.source == SubstrateSource::Graph {
        let path = cfg
            .substrate
            .graph_file
            .as_ref()
            .context("substrate.graph_file is not set")?;
        let text =
            fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
        return Ok(ColonyGraph::parse(&text)?);
    }
    let t = template(cfg, out, 0)?;
    let g = &cfg.graph;
    Ok(graph_from_template(
        &t,
        &GraphOptions {
            z_jitter: g.z_jitter,
            pixel_size: g.pixel_size,
            contract_chains: g.contract_chains,
            seed: out.seed(cfg.seed, "graph-z", 0),
        },
    )?)
}

fn electrodes(cfg: &RunConfig, t: &GridTemplate) -> Result<Vec<Electrode>> {
    let e = &cfg.electrodes;
    let list: Vec<Electrode> = if e.sites.is_empty() {
        place_electrodes(t, e.count, e.radius)
    } else {
        e.sites
            .iter()
            .map(|&[x, y]| Electrode::new(x, y, e.radius))
            .collect()
    };
    for el in &list {
        el.validate(t)?;
    }
    Ok(list)
}

pub fn synth_colony(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    for i in 0..colony_count(cfg) {
        let t = template(cfg, out, i)?;
        ensure!(t.component_count() == 1, "colony {i} is not connected");
        out.write(&format!("colony_{i:03}.pgm"), save_template(&t))?;
    }
    let g = graph(cfg, out)?;
    out.write("graph.txt", g.to_text())
}

pub fn simulate_fhn(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let t = template(cfg, out, 0)?;
    let el = electrodes(cfg, &t)?;
    let sim = &cfg.simulate;
    let stimuli = sim
        .stimuli
        .iter()
        .map(|s| {
            let electrode = *el
                .get(s.electrode)
                .with_context(|| format!("stimulus electrode {} does not exist", s.electrode))?;
            Ok(Stimulus {
                electrode,
                start: s.start,
                duration: s.duration,
                amplitude: s.amplitude,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ensure!(
        sim.snapshot_every == 0 || sim.snapshot_every % sim.sample_every.max(1) == 0,
        "simulate.snapshot_every must be a multiple of simulate.sample_every"
    );
    let mut snapshots = Vec::new();
    let traces = excitable::run_with(
        &t,
        &cfg.fhn,
        &StimulusPlan::new(stimuli),
        &el,
        sim.iterations,
        sim.sample_every,
        |s| {
            let now = s.state().t;
            if sim.snapshot_every > 0 && now % sim.snapshot_every == 0 {
                snapshots.push((now, s.snapshot_pgm()));
            }
            Ok(std::ops::ControlFlow::Continue(()))
        },
    )?;
    out.write("template.pgm", save_template(&t))?;
    out.write_json("electrodes.json", &el)?;
    let mut csv = Vec::new();
    excitable::write_traces_csv(&traces, &mut csv)?;
    out.write("traces.csv", csv)?;
    for (now, pgm) in snapshots {
        out.write(&format!("snapshots/u_{now:09}.pgm"), pgm)?;
    }
    Ok(())
}

pub fn mine_spikes(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let sp = &cfg.spikes;
    let params = SpikeMiningParams {
        fhn: cfg.fhn,
        windows: sp.windows,
        iterations: sp.iterations,
        sample_every: sp.sample_every,
        stimulus_start: sp.stimulus_start,
        quiescence: sp.early_stop.then_some(sp.quiescent_u),
    };
    let mut events_csv = String::from("colony,x,y,electrode,time,o01,o10,o11,gate\n");
    let mut pooled = None;
    for i in 0..colony_count(cfg) {
        let t = template(cfg, out, i)?;
        let el = electrodes(cfg, &t)?;
        let pairs = if sp.pairs.is_empty() {
            random_pairs(el.len(), sp.pair_count, out.seed(cfg.seed, "pairs", i))?
        } else {
            sp.pairs.iter().map(|&[x, y]| InputPair { x, y }).collect()
        };
        let mined = mine_spike_gates(&t, &el, &pairs, &params)?;
        for (pair, events) in &mined {
            for e in events {
                let _ = writeln!(
                    events_csv,
                    "{i},{},{},{},{},{},{},{},{}",
                    pair.x,
                    pair.y,
                    e.electrode,
                    e.time,
                    u8::from(e.o01),
                    u8::from(e.o10),
                    u8::from(e.o11),
                    e.gate.key()
                );
            }
        }
        let c = census(mined.iter().flat_map(|(_, ev)| ev), el.len());
        let pooled = pooled.get_or_insert_with(|| mycologic::spikegates::GateCensus::new(el.len()));
        pooled.merge(&c);
    }
    let pooled = pooled.expect("at least one colony");
    let row_sum: u64 = (0..pooled.rows.len()).map(|e| pooled.row_total(e)).sum();
    ensure!(
        row_sum == pooled.total(),
        "census rows do not add up to the total"
    );
    if let Some(r) = pooled.ratios() {
        ensure!(
            (r.iter().sum::<f64>() - 1.0).abs() < 1e-9,
            "ratios do not sum to 1"
        );
    }
    let mut reports = vec![pooled.ratio_report("synthetic colony")];
    for path in &sp.overlays {
        let text = fs::read_to_string(path)
            .with_context(|| format!("cannot read overlay {}", path.display()))?;
        let r: RatioReport = serde_json::from_str(&text)
            .with_context(|| format!("invalid overlay {}", path.display()))?;
        ensure!(
            r.ratios.as_ref().is_none_or(|v| v.len() == 7),
            "overlay {} must give 7 ratios",
            path.display()
        );
        reports.push(r);
    }
    let mut csv = Vec::new();
    pooled.write_csv(&mut csv)?;
    out.write("census.csv", csv)?;
    out.write("events.csv", events_csv)?;
    out.write_json("ratios.json", &reports)?;
    out.write("gate_ratios.svg", gate_ratio_svg(&reports))
}

fn rc_params(cfg: &RunConfig) -> RcMiningParams {
    RcMiningParams {
        rc: cfg.rc.build,
        pulse: cfg.rc.pulse,
        transient: cfg.rc.transient,
    }
}

fn netlist(cfg: &RunConfig, g: &ColonyGraph, mode: RcMode, member: u64) -> Result<String> {
    let net = ensemble_member(g, mode, &cfg.rc.build, cfg.seed, member)?;
    let drive = Drive::inputs(true, true, cfg.rc.pulse);
    let title = format!("{} network {member}, master seed {}", mode.key(), cfg.seed);
    Ok(to_spice(&net, &drive, &cfg.rc.transient, &title))
}

fn record_network_seeds(cfg: &RunConfig, out: &mut Output, count: u64) {
    for i in 0..count {
        out.seed(cfg.seed, "rc-network", i);
    }
}

pub fn mine_rc(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let g = graph(cfg, out)?;
    out.write("graph.txt", g.to_text())?;
    let thetas = cfg.rc.theta.values();
    let params = rc_params(cfg);
    record_network_seeds(cfg, out, cfg.rc.ensemble as u64);
    for &mode in &cfg.rc.modes {
        let sweep = mine_gates(&g, mode, cfg.rc.ensemble, &thetas, &params, cfg.seed)?;
        ensure!(sweep.networks == cfg.rc.ensemble, "ensemble members lost");
        let key = mode.key();
        let mut csv = Vec::new();
        sweep.write_csv(&mut csv)?;
        out.write(&format!("sweep_{key}.csv"), csv)?;
        out.write_json(&format!("fits_{key}.json"), &fit_sweep(&sweep))?;
        let title = format!("{key} mode, {} networks", sweep.networks);
        out.write(&format!("sweep_{key}.svg"), sweep_svg(&sweep, &title))?;
        for i in 0..cfg.rc.export_netlists.min(cfg.rc.ensemble) as u64 {
            out.write(
                &format!("netlists/{key}_{i:04}.cir"),
                netlist(cfg, &g, mode, i)?,
            )?;
        }
    }
    Ok(())
}

pub fn export_netlist(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let g = graph(cfg, out)?;
    let member = cfg.rc.member;
    record_network_seeds(cfg, out, member + 1);
    for &mode in &cfg.rc.modes {
        let name = format!("netlists/{}_{member:04}.cir", mode.key());
        out.write(&name, netlist(cfg, &g, mode, member)?)?;
    }
    Ok(())
}

/// `count` positions spread evenly over `from`.
fn spread(from: &[usize], count: usize) -> Vec<usize> {
    (0..count).map(|k| from[k * from.len() / count]).collect()
}

fn recordings(cfg: &RunConfig, out: &mut Output) -> Result<Vec<Vec<ChannelRecording>>> {
    let f = &cfg.functions;
    match f.source {
        FunctionSource::Traces => {
            ensure!(!f.traces.is_empty(), "functions.traces lists no recordings");
            f.traces
                .iter()
                .map(|files| {
                    let csv = fs::read_to_string(&files.csv)
                        .with_context(|| format!("cannot read {}", files.csv.display()))?;
                    let side = fs::read_to_string(&files.sidecar)
                        .with_context(|| format!("cannot read {}", files.sidecar.display()))?;
                    let side: StateBoundaries = serde_json::from_str(&side)
                        .with_context(|| format!("invalid sidecar {}", files.sidecar.display()))?;
                    Ok(read_trace_csv(&csv, &side)?)
                })
                .collect()
        }
        FunctionSource::Rc => {
            let g = graph(cfg, out)?;
            (0..f.repeats as u64)
                .map(|r| {
                    let seed = out.seed(cfg.seed, "function-network", r);
                    let net = build_rc_inputs(&g, f.mode, seed, &cfg.rc.build, 4)?;
                    let probes = net.probes();
                    ensure!(
                        probes.len() >= f.channels,
                        "network {r} has {} probes, {} channels requested",
                        probes.len(),
                        f.channels
                    );
                    let nodes = spread(&probes, f.channels);
                    let sub = DriveSubstrate::Rc {
                        net: &net,
                        dt: f.dt,
                    };
                    Ok(synth_driver(&sub, &f.schedule, Channels::Nodes(&nodes))?)
                })
                .collect()
        }
        FunctionSource::Fhn => {
            let t = template(cfg, out, 0)?;
            let el = electrodes(cfg, &t)?;
            ensure!(
                el.len() >= 4 + f.channels,
                "{} electrodes cannot host 4 inputs and {} channels",
                el.len(),
                f.channels
            );
            let sub = DriveSubstrate::Fhn {
                template: &t,
                params: cfg.fhn,
                inputs: [el[0], el[1], el[2], el[3]],
                sample_every: f.sample_every,
            };
            // The medium is deterministic, so repeats coincide.
            let rec = synth_driver(
                &sub,
                &f.schedule,
                Channels::Electrodes(&el[4..4 + f.channels]),
            )?;
            Ok(vec![rec; f.repeats])
        }
    }
}

pub fn mine_functions(cfg: &RunConfig, out: &mut Output) -> Result<()> {
    let f = &cfg.functions;
    let repeats = recordings(cfg, out)?;
    if f.write_traces && f.source != FunctionSource::Traces {
        for (r, recs) in repeats.iter().enumerate() {
            let mut csv = Vec::new();
            write_trace_csv(&mut csv, recs)?;
            out.write(&format!("traces/repeat_{r:02}.csv"), csv)?;
            let side = StateBoundaries {
                boundaries_s: recs[0].boundaries.clone(),
            };
            out.write_json(&format!("traces/repeat_{r:02}.json"), &side)?;
        }
    }
    let tables = funcmine::mine_functions(&repeats, f.thresholds, &f.bands)?;
    let expected: usize = repeats.iter().map(|r| r.len() * f.thresholds).sum();
    ensure!(
        tables.len() == expected,
        "{} tables, expected {expected}",
        tables.len()
    );
    let mut csv = String::from("repeat,channel,threshold,table_decimal\n");
    for t in &tables {
        let _ = writeln!(csv, "{},{},{},{}", t.repeat, t.channel, t.threshold, t.bits);
    }
    let c = census_functions(tables.iter().map(|t| t.bits));
    ensure!(c.total() == tables.len() as u64, "census lost tables");
    for &t in c.counts.keys() {
        ensure!(sop(t).table() == t, "SOP of {t:#06x} does not reproduce it");
    }
    let mut census_csv = Vec::new();
    c.write_csv(&mut census_csv)?;
    out.write("tables.csv", csv)?;
    out.write("census.csv", census_csv)?;
    out.write_json(
        "top.json",
        &serde_json::json!({
            "tables": c.total(),
            "unique": c.unique(),
            "constant_false": c.counts.get(&0).copied().unwrap_or(0),
            "constant_true": c.counts.get(&u16::MAX).copied().unwrap_or(0),
            "top": c.top(f.top_n, false),
        }),
    )?;
    out.write("census.svg", census_svg(&c))
}
