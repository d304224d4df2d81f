//! SPICE netlist export for cross-checking against an external simulator.

use std::fmt::Write;

use super::{Drive, ElementSpec, PulseSpec, RcNetwork, TransientOptions};

fn node(net: &RcNetwork, i: usize) -> String {
    if i == net.ground {
        "0".into()
    } else {
        format!("n{}", net.node_ids[i])
    }
}

fn pulse(p: &Option<PulseSpec>) -> String {
    match p {
        Some(p) => format!(
            "PULSE(0 {:e} {:e} {:e} {:e} {:e} {:e} {})",
            p.amplitude, p.delay, p.rise, p.fall, p.width, p.period, p.count
        ),
        None => "0".into(),
    }
}

/// Sources beyond x and y are held at 0 V. Values are printed in shortest
/// round-trip form, so parsing the netlist recovers every element bit for
/// bit.
pub fn to_spice(net: &RcNetwork, drive: &Drive, opts: &TransientOptions, title: &str) -> String {
    let mut s = String::new();
    let title = title.replace('\n', " ");
    let _ = writeln!(s, "* {title}");
    let _ = writeln!(s, "* mode {}", net.mode.key());
    let (mut r, mut c) = (0, 0);
    for e in &net.elements {
        let (a, b) = (node(net, e.a), node(net, e.b));
        let mut resistor = |ohms: f64, s: &mut String| {
            r += 1;
            let _ = writeln!(s, "R{r} {a} {b} {ohms:e}");
        };
        match e.spec {
            ElementSpec::Resistor { ohms } => resistor(ohms, &mut s),
            ElementSpec::Capacitor { farads } => {
                c += 1;
                let _ = writeln!(s, "C{c} {a} {b} {farads:e}");
            }
            ElementSpec::Parallel { ohms, farads } => {
                resistor(ohms, &mut s);
                c += 1;
                let _ = writeln!(s, "C{c} {a} {b} {farads:e}");
            }
        }
    }
    for (k, &src) in net.sources.iter().enumerate() {
        let (name, wave) = match k {
            0 => ("VX".to_string(), pulse(&drive.x)),
            1 => ("VY".to_string(), pulse(&drive.y)),
            _ => (format!("V{}", k + 1), pulse(&None)),
        };
        let _ = writeln!(s, "{name} {} 0 {wave}", node(net, src));
    }
    let probes: Vec<String> = net
        .probes()
        .into_iter()
        .map(|p| format!("v({})", node(net, p)))
        .collect();
    if !probes.is_empty() {
        let _ = writeln!(s, ".save {}", probes.join(" "));
    }
    let _ = writeln!(s, ".tran {:e} {:e}", opts.dt, opts.t_end);
    s.push_str(".end\n");
    s
}

#[cfg(test)]
mod tests {
    use super::super::{build_rc, RcMode, RcParams};
    use super::*;
    use crate::substrate::{ColonyGraph, GraphNode};

    fn graph() -> ColonyGraph {
        let nodes = (0..8)
            .map(|id| GraphNode {
                id: 40 + id,
                x: (id * id) as f64 * 0.37,
                y: id as f64 * 1.1,
                z: 0.3,
            })
            .collect();
        let edges = (1..8).map(|i| (39 + i, 40 + i, None)).collect();
        ColonyGraph::new(nodes, edges).unwrap()
    }

    #[test]
    fn values_round_trip_exactly() {
        let g = graph();
        for mode in [RcMode::Serial, RcMode::Parallel] {
            let net = build_rc(&g, mode, 5, &RcParams::default()).unwrap();
            let text = to_spice(&net, &Drive::default(), &TransientOptions::default(), "t");
            let mut parsed = Vec::new();
            for line in text.lines() {
                let f: Vec<&str> = line.split_whitespace().collect();
                if line.starts_with('R') || line.starts_with('C') {
                    parsed.push(f[3].parse::<f64>().unwrap());
                }
            }
            let mut expected = Vec::new();
            for e in &net.elements {
                match e.spec {
                    ElementSpec::Resistor { ohms } => expected.push(ohms),
                    ElementSpec::Capacitor { farads } => expected.push(farads),
                    ElementSpec::Parallel { ohms, farads } => expected.extend([ohms, farads]),
                }
            }
            assert_eq!(parsed, expected);
            assert!(expected.iter().any(|v| v.to_string().len() > 8));
        }
    }

    #[test]
    fn sources_and_analysis_lines() {
        let g = graph();
        let net = build_rc(&g, RcMode::Parallel, 1, &RcParams::default()).unwrap();
        let drive = Drive {
            x: Some(PulseSpec::default()),
            y: None,
        };
        let text = to_spice(&net, &drive, &TransientOptions::default(), "demo");
        let x = format!("n{}", net.node_ids[net.source_x()]);
        assert!(text.contains(&format!("VX {x} 0 PULSE(0 6e-2 0e0 1e-5 1e-5 1e-3 2e-3 2)")));
        assert!(text.contains(" 0 0\n"));
        assert!(text.contains(".tran 5e-6 1e-2\n"));
        assert!(text.starts_with("* demo\n"));
        assert!(text.ends_with(".end\n"));
        assert_eq!(text.matches("v(n").count(), net.probes().len());
    }
}
