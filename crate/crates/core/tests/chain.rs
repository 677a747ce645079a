//! The detector bench end to end: fast path against the full-record path,
//! echo shape, saturation, linear mode and the sine-gating notch.

use spd_core::apd::{self, AvalancheEvent, Cause, GateConfig, GateShape, LaserConfig};
use spd_core::characterize::Bench;
use spd_core::experiment::{cmd_linear, run_tune, RunConfig};
use spd_core::sd_chain::{self, NotchConfig};
use spd_core::waveform::{self, TimeWindow};

fn tuned_bench() -> Bench {
    let cfg = RunConfig::default();
    let mut b = cfg.bench();
    b.sd = run_tune(&cfg).unwrap().config;
    b
}

fn assert_same_pulses(fast: &spd_core::characterize::RunOutput, slow: &spd_core::characterize::RunOutput) {
    assert_eq!(fast.events, slow.events);
    assert_eq!(fast.pulses.len(), slow.pulses.len());
    for (a, b) in fast.pulses.iter().zip(&slow.pulses) {
        assert!((a.t_rise_ps - b.t_rise_ps).abs() < 1e-3, "{a:?} vs {b:?}");
    }
}

#[test]
fn fast_path_matches_full_record() {
    let mut b = tuned_bench();
    b.apd.dark_rate_per_ns = 0.05;
    let fast = b.run(3000, 8).unwrap();
    let slow = b.run_dense(3000, 8).unwrap();
    assert!(fast.pulses.len() > 30);
    assert_same_pulses(&fast, &slow);
}

#[test]
fn fast_path_matches_full_record_when_saturated() {
    let mut b = tuned_bench();
    b.laser = LaserConfig { f_p_hz: 2e8, mu: 50.0, ..Default::default() };
    let fast = b.run(3000, 2).unwrap();
    let slow = b.run_dense(3000, 2).unwrap();
    assert_same_pulses(&fast, &slow);
}

#[test]
fn fast_path_matches_full_record_with_two_period_delay() {
    let mut b = tuned_bench();
    b.sd.delay_periods = 2;
    b.apd.dark_rate_per_ns = 0.05;
    let fast = b.run(3000, 5).unwrap();
    let slow = b.run_dense(3000, 5).unwrap();
    assert_same_pulses(&fast, &slow);
}

#[test]
fn lone_detection_echoes_one_delay_later() {
    let b = tuned_bench();
    let t = b.gate_period_ps();
    let ev = [AvalancheEvent { gate_index: 3, t_ps: 3.0 * t + t / 2.0, cause: Cause::Photon }];
    let s = b.samples_per_gate().unwrap();
    let w = apd::render_avalanches(&ev, 0.0, 10 * s, b.sample_rate_hz, &b.apd).unwrap();
    let out = sd_chain::self_difference(&w, &b.sd, t).unwrap();
    let x = out.samples();
    let pos = x[3 * s..4 * s].iter().cloned().fold(f64::MIN, f64::max);
    let neg = x[4 * s..5 * s].iter().cloned().fold(f64::MAX, f64::min);
    assert!(pos > 0.0 && neg < 0.0);
    assert!((pos + neg).abs() <= 0.05 * pos, "pos {pos} neg {neg}");
    // The negative extreme sits one gate period after the positive one.
    let ipos = (3 * s..4 * s).max_by(|&i, &j| x[i].total_cmp(&x[j])).unwrap();
    let ineg = (4 * s..5 * s).min_by(|&i, &j| x[i].total_cmp(&x[j])).unwrap();
    assert!((ineg as i64 - ipos as i64 - s as i64).abs() <= 1, "{ipos} {ineg}");
}

#[test]
fn idle_chain_never_fires() {
    let mut b = tuned_bench();
    b.laser.mu = 0.0;
    b.apd.dark_rate_per_ns = 0.0;
    let run = b.run(100_000, 1).unwrap();
    assert!(run.pulses.is_empty());
}

#[test]
fn detections_are_found_in_their_own_gate() {
    let b = tuned_bench();
    let run = b.run(400_000, 17).unwrap();
    let t = b.gate_period_ps();
    let clicked: std::collections::HashSet<u64> = run
        .events
        .iter()
        .filter(|e| e.gate_index >= run.first_gate)
        .map(|e| e.gate_index)
        .collect();
    // Every comparator firing belongs to a gate that had an avalanche.
    for c in &run.comparator {
        let g = (c.t_rise_ps / t).floor() as u64;
        assert!(clicked.contains(&g), "firing in empty gate {g}");
    }
    assert!(run.comparator.len() as f64 > 0.98 * clicked.len() as f64);
}

#[test]
fn saturation_never_beats_half_the_gate_rate() {
    let mut b = tuned_bench();
    b.laser = LaserConfig { f_p_hz: 2e8, mu: 100.0, ..Default::default() };
    let run = b.run(2000, 3).unwrap();
    let t = b.gate_period_ps();
    let gates: Vec<u64> = run.pulses.iter().map(|p| (p.t_rise_ps / t) as u64).collect();
    assert!(!gates.is_empty());
    assert!(gates.windows(2).all(|w| w[1] - w[0] >= 2));
}

#[test]
fn linear_mode_follows_the_bits() {
    let cfg = RunConfig::default();
    let slots = |bits: &str| -> Vec<u64> {
        let out = cmd_linear(bits, &cfg).unwrap();
        let csv = String::from_utf8(out.artifact("linear_pulses.csv").unwrap().contents.clone()).unwrap();
        csv.lines()
            .skip(1)
            .map(|l| {
                let t: f64 = l.split(',').next().unwrap().parse().unwrap();
                (t / cfg.linear.bit_period_ps).floor() as u64
            })
            .collect()
    };
    assert_eq!(slots("11111111"), (0..8).collect::<Vec<_>>());
    assert!(slots("0000").is_empty());
    assert_eq!(slots("1010"), vec![0, 2]);
    assert!(cmd_linear("10a", &cfg).is_err());
}

#[test]
fn notch_lets_an_avalanche_through_sine_gating() {
    let gate = GateConfig { shape: GateShape::Sine, ..Default::default() };
    let p = apd::ApdParams::default();
    let fs = 10e9;
    let n = 200;
    let g = apd::gen_gate_waveform(&gate, n, fs).unwrap();
    let t = gate.period_ps();
    let at = 150;
    let ev = [AvalancheEvent { gate_index: at, t_ps: gate.center_ps(at), cause: Cause::Photon }];
    let quiet = apd::synthesize_output(&[], &g, &p).unwrap();
    let loud = apd::synthesize_output(&ev, &g, &p).unwrap();
    let nc = NotchConfig::default();
    let fq = sd_chain::notch_filter_chain(&quiet, &nc).unwrap();
    let fl = sd_chain::notch_filter_chain(&loud, &nc).unwrap();

    // Background well suppressed once settled.
    let settled = TimeWindow::new(100.0 * t, 140.0 * t);
    let sup = waveform::suppression_db(&quiet, &fq, &settled).unwrap();
    assert!(sup > 20.0, "{sup}");

    // The avalanche stands clear of what is left of the background.
    let gate_win = TimeWindow::new(at as f64 * t, (at + 1) as f64 * t);
    let bump = fl.window(&gate_win).unwrap().iter().cloned().fold(f64::MIN, f64::max);
    let floor = waveform::peak_to_peak(&fq, &settled).unwrap();
    assert!(bump > 3.0 * floor, "bump {bump}, floor {floor}");
}
