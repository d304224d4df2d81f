//! Wave propagation on the open lattice and on a grown colony.

use mycologic::excitable::{run, FhnParams, PotentialTrace, Stimulus, StimulusPlan};
use mycologic::substrate::{
    place_electrodes, synthesize_colony, ColonyParams, Electrode, GridTemplate,
};

const CENTRE: usize = 50;

/// A disc of radius 5 held at I = 0.5 for 3 time units nucleates a wave on
/// the open lattice; the radius-2 TRUE impulse is drained by diffusion.
fn centre_stimulus(dt_divisor: u64) -> StimulusPlan {
    StimulusPlan::new(vec![Stimulus {
        electrode: Electrode::new(CENTRE, CENTRE, 5.0),
        start: 0,
        duration: 200 * dt_divisor,
        amplitude: 0.5,
    }])
}

fn first_above(trace: &PotentialTrace, level: f64) -> Option<u64> {
    trace.samples.iter().find(|s| s.1 > level).map(|s| s.0)
}

#[test]
fn arrival_times_are_isotropic() {
    let t = GridTemplate::uniform(101, 101).unwrap();
    let d = 30;
    let diag = 21; // 21·√2 ≈ 29.7
    let sites = [
        Electrode::new(CENTRE + d, CENTRE, 2.0),
        Electrode::new(CENTRE, CENTRE + d, 2.0),
        Electrode::new(CENTRE - d, CENTRE, 2.0),
        Electrode::new(CENTRE + diag, CENTRE + diag, 2.0),
    ];
    let traces = run(
        &t,
        &FhnParams::default(),
        &centre_stimulus(1),
        &sites,
        20_000,
        10,
    )
    .unwrap();
    let arrivals: Vec<f64> = traces
        .iter()
        .map(|tr| first_above(tr, 0.1).expect("wave reaches every electrode") as f64)
        .collect();
    // The stencil is symmetric under axis reflection and exchange, so the
    // axis arrivals agree exactly.
    assert_eq!(arrivals[0], arrivals[1]);
    assert_eq!(arrivals[0], arrivals[2]);
    let ratio = arrivals[3] / arrivals[0];
    assert!(
        (0.95..=1.05).contains(&ratio),
        "diagonal/axis arrival ratio {ratio}"
    );
}

#[test]
fn halving_dt_changes_potentials_by_less_than_two_percent() {
    let t = GridTemplate::uniform(101, 101).unwrap();
    let sites = [
        Electrode::new(CENTRE, CENTRE, 2.0),
        Electrode::new(CENTRE + 15, CENTRE, 2.0),
        Electrode::new(CENTRE + 30, CENTRE, 2.0),
    ];
    let coarse = FhnParams::default();
    let fine = FhnParams {
        dt: coarse.dt / 2.0,
        ..coarse
    };
    let a = run(&t, &coarse, &centre_stimulus(1), &sites, 30_000, 100).unwrap();
    let b = run(&t, &fine, &centre_stimulus(2), &sites, 60_000, 200).unwrap();
    for (ta, tb) in a.iter().zip(&b) {
        assert_eq!(ta.samples.len(), tb.samples.len());
        let peak = ta.samples.iter().fold(0.0_f64, |m, s| m.max(s.1.abs()));
        assert!(peak > 1.0, "electrode {} saw no wave", ta.electrode);
        for (&(ia, pa), &(ib, pb)) in ta.samples.iter().zip(&tb.samples) {
            assert_eq!(2 * ia, ib);
            assert!(
                (pa - pb).abs() < 0.02 * peak,
                "electrode {} at {ia}: {pa} vs {pb}",
                ta.electrode
            );
        }
    }
}

#[test]
fn resting_lattice_stays_exactly_zero() {
    let t = GridTemplate::uniform(101, 101).unwrap();
    let sites = place_electrodes(&t, 8, 2.0);
    let traces = run(
        &t,
        &FhnParams::default(),
        &StimulusPlan::default(),
        &sites,
        2_000,
        50,
    )
    .unwrap();
    assert!(traces
        .iter()
        .all(|tr| tr.samples.iter().all(|s| s.1.to_bits() == 0)));
}

#[test]
fn impulse_on_a_colony_gives_a_structured_trace() {
    let t = synthesize_colony(&ColonyParams {
        seed: 3,
        steps: 1500,
        ..Default::default()
    })
    .unwrap();
    let sites = place_electrodes(&t, 16, 2.0);
    let plan = StimulusPlan::new(vec![Stimulus::logical_true(sites[0], 0)]);
    let traces = run(&t, &FhnParams::default(), &plan, &sites, 60_000, 10).unwrap();
    let excited = traces
        .iter()
        .filter(|tr| first_above(tr, 0.1).is_some())
        .count();
    assert!(
        excited >= 2,
        "the impulse should travel beyond its own site"
    );
    let distinct = |tr: &PotentialTrace| {
        let mut v: Vec<u64> = tr.samples.iter().map(|s| s.1.to_bits()).collect();
        v.sort_unstable();
        v.dedup();
        v.len()
    };
    assert!(traces.iter().any(|tr| distinct(tr) > 100));
}
