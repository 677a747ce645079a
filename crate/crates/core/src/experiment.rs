//! Run configuration and the five canonical experiments.
//!
//! Commands are pure functions of the configuration: they return their output
//! files as in-memory [`Artifact`]s and never touch the file system, which
//! keeps them byte-for-byte reproducible and usable from the browser build.

use std::fmt::Write as _;
use std::path::PathBuf;
use std::str::FromStr;

use crate::apd::{self, ApdParams, GateConfig, GateShape, LaserConfig, OpticalPulse};
use crate::characterize::{
    self, bench_scan, gen_clock_signal, gen_test_signal, measure_gate_peaks, Bench, ScanSettings,
    TdcConfig, TestSignalSpec,
};
use crate::error::{Error, Result};
use crate::sd_chain::{self, SdConfig, Tuned};
use crate::waveform::{GainDb, Waveform};

/// What the tuner is given as its event-free reference.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TuneReference {
    /// The simulated APD capacitive response.
    Apd,
    /// The AWG-style test-signal schema.
    TestSignal,
}

impl FromStr for TuneReference {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s {
            "apd" => Ok(TuneReference::Apd),
            "testsignal" => Ok(TuneReference::TestSignal),
            _ => Err(format!("expected apd or testsignal, got {s:?}")),
        }
    }
}

impl std::fmt::Display for TuneReference {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            TuneReference::Apd => "apd",
            TuneReference::TestSignal => "testsignal",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LinearSettings {
    pub bits: String,
    pub power_w: f64,
    pub bit_width_ps: f64,
    pub bit_period_ps: f64,
}

impl Default for LinearSettings {
    fn default() -> Self {
        LinearSettings {
            bits: "11111111".into(),
            power_w: 2e-3,
            bit_width_ps: 500.0,
            bit_period_ps: 10_000.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub gate: GateConfig,
    pub laser: LaserConfig,
    pub apd: ApdParams,
    pub sd: SdConfig,
    pub n_gates: u64,
    pub seed: u64,
    pub outputs: PathBuf,
    pub sample_rate_hz: f64,
    pub tdc: TdcConfig,
    pub scan: ScanSettings,
    pub testsignal: TestSignalSpec,
    pub testsignal_gates: u64,
    pub tune_reference: TuneReference,
    pub linear: LinearSettings,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            gate: GateConfig::default(),
            laser: LaserConfig::default(),
            apd: ApdParams::default(),
            sd: SdConfig::default(),
            n_gates: 10_000_000,
            seed: 1,
            outputs: PathBuf::from("out"),
            sample_rate_hz: 40e9,
            tdc: TdcConfig::default(),
            scan: ScanSettings::default(),
            testsignal: TestSignalSpec::default(),
            testsignal_gates: 12,
            tune_reference: TuneReference::Apd,
            linear: LinearSettings::default(),
        }
    }
}

trait ConfigValue: Sized {
    fn render(&self) -> String;
    fn parse_value(s: &str) -> std::result::Result<Self, String>;
}

impl ConfigValue for f64 {
    fn render(&self) -> String {
        // Shortest representation that parses back to the same bits.
        format!("{self}")
    }
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.parse::<f64>().map_err(|e| format!("{s:?} is not a number: {e}"))
    }
}

macro_rules! display_value {
    ($($t:ty),*) => {$(
        impl ConfigValue for $t {
            fn render(&self) -> String {
                self.to_string()
            }
            fn parse_value(s: &str) -> std::result::Result<Self, String> {
                s.parse::<$t>().map_err(|e| format!("{s:?}: {e}"))
            }
        }
    )*};
}
display_value!(u64, u32, bool, String, TuneReference);

impl ConfigValue for GateShape {
    fn render(&self) -> String {
        self.to_string()
    }
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        s.parse().map_err(|e: Error| e.to_string())
    }
}

impl ConfigValue for PathBuf {
    fn render(&self) -> String {
        self.display().to_string()
    }
    fn parse_value(s: &str) -> std::result::Result<Self, String> {
        Ok(PathBuf::from(s))
    }
}

struct Field {
    key: &'static str,
    get: fn(&RunConfig) -> String,
    set: fn(&mut RunConfig, &str) -> std::result::Result<(), String>,
}

macro_rules! fields {
    ($($key:literal => $($path:ident).+;)*) => {
        &[$(Field {
            key: $key,
            get: |c| ConfigValue::render(&c.$($path).+),
            set: |c, v| {
                c.$($path).+ = ConfigValue::parse_value(v)?;
                Ok(())
            },
        }),*]
    };
}

const FIELDS: &[Field] = fields! {
    "run.n_gates" => n_gates;
    "run.seed" => seed;
    "run.outputs" => outputs;
    "run.sample_rate_hz" => sample_rate_hz;
    "gate.f_g_hz" => gate.f_g_hz;
    "gate.t_p_ps" => gate.t_p_ps;
    "gate.v_p" => gate.v_p;
    "gate.v_dc" => gate.v_dc;
    "gate.v_br" => gate.v_br;
    "gate.shape" => gate.shape;
    "laser.f_p_hz" => laser.f_p_hz;
    "laser.mu" => laser.mu;
    "laser.pulse_fwhm_ps" => laser.pulse_fwhm_ps;
    "laser.offset_ps" => laser.offset_ps;
    "apd.eta_peak" => apd.eta_peak;
    "apd.active_fwhm_ps" => apd.active_fwhm_ps;
    "apd.jitter_fwhm_ps" => apd.jitter_fwhm_ps;
    "apd.dark_rate_per_ns" => apd.dark_rate_per_ns;
    "apd.trap_mean" => apd.trap_mean;
    "apd.trap_tau_ns" => apd.trap_tau_ns;
    "apd.release_trigger_prob" => apd.release_trigger_prob;
    "apd.avalanche_amp_mv" => apd.avalanche_amp_mv;
    "apd.avalanche_width_ps" => apd.avalanche_width_ps;
    "apd.cap_gain_ps" => apd.cap_gain_ps;
    "apd.frontend_risetime_ps" => apd.frontend_risetime_ps;
    "apd.responsivity_v_per_w" => apd.responsivity_v_per_w;
    "sd.splitter_loss_db" => sd.splitter_loss_db;
    "sd.delay_periods" => sd.delay_periods;
    "sd.delay_fine_ps" => sd.delay_fine_ps;
    "sd.trim_db" => sd.trim_db;
    "sd.diffamp_gain_db" => sd.diffamp_gain_db;
    "sd.diffamp_risetime_ps" => sd.diffamp_risetime_ps;
    "sd.post_gain_db" => sd.post_gain_db;
    "sd.threshold_mv" => sd.threshold_mv;
    "sd.out_pulse_ps" => sd.out_pulse_ps;
    "sd.stretch_ns" => sd.stretch_ns;
    "sd.delay_line_loss_db" => sd.delay_line_loss_db;
    "sd.delay_line_corner_hz" => sd.delay_line_corner_hz;
    "tdc.trigger_rate_hz" => tdc.trigger_rate_hz;
    "tdc.bin_width_ps" => tdc.bin_width_ps;
    "scan.offset_min_ps" => scan.offset_min_ps;
    "scan.offset_max_ps" => scan.offset_max_ps;
    "scan.offset_step_ps" => scan.offset_step_ps;
    "scan.mu" => scan.mu;
    "scan.probe_fwhm_ps" => scan.probe_fwhm_ps;
    "scan.n_gates" => scan.n_gates;
    "testsignal.rail_mv" => testsignal.rail_mv;
    "testsignal.sample_ps" => testsignal.sample_ps;
    "testsignal.gap_samples" => testsignal.gap_samples;
    "testsignal.event_width_ps" => testsignal.event_width_ps;
    "testsignal.event_mv" => testsignal.event_mv;
    "testsignal.rep_rate_hz" => testsignal.rep_rate_hz;
    "testsignal.event_every" => testsignal.event_every;
    "testsignal.allow_any" => testsignal.allow_any;
    "testsignal.n_gates" => testsignal_gates;
    "tune.reference" => tune_reference;
    "linear.bits" => linear.bits;
    "linear.power_w" => linear.power_w;
    "linear.bit_width_ps" => linear.bit_width_ps;
    "linear.bit_period_ps" => linear.bit_period_ps;
};

impl RunConfig {
    /// Every key in serialization order.
    pub fn keys() -> impl Iterator<Item = &'static str> {
        FIELDS.iter().map(|f| f.key)
    }

    /// Sets one `section.key` to a textual value.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let f = FIELDS
            .iter()
            .find(|f| f.key == key)
            .ok_or_else(|| Error::invalid(key, "unknown configuration key"))?;
        (f.set)(self, value).map_err(|reason| Error::invalid(key, reason))
    }

    pub fn get(&self, key: &str) -> Option<String> {
        FIELDS.iter().find(|f| f.key == key).map(|f| (f.get)(self))
    }

    /// Parses `key=value` lines over the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<RunConfig> {
        let mut cfg = RunConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                reason: format!("expected key=value, got {line:?}"),
            })?;
            cfg.set(k.trim(), v.trim()).map_err(|e| Error::Parse {
                line: i + 1,
                reason: e.to_string(),
            })?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn serialize(&self) -> String {
        let mut s = String::new();
        for f in FIELDS {
            let _ = writeln!(s, "{}={}", f.key, (f.get)(self));
        }
        s
    }

    pub fn bench(&self) -> Bench {
        Bench {
            gate: self.gate.clone(),
            laser: self.laser.clone(),
            apd: self.apd.clone(),
            sd: self.sd.clone(),
            sample_rate_hz: self.sample_rate_hz,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_gates == 0 {
            return Err(Error::invalid("run.n_gates", "must be >= 1"));
        }
        self.bench().validate()?;
        self.tdc.n_bins()?;
        self.testsignal.validate()?;
        if self.testsignal_gates < 2 {
            return Err(Error::invalid("testsignal.n_gates", "must be >= 2"));
        }
        if self.scan.n_gates == 0 {
            return Err(Error::invalid("scan.n_gates", "must be >= 1"));
        }
        self.scan.offsets()?;
        Ok(())
    }
}

/// One output file.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Artifact {
    pub name: String,
    pub contents: Vec<u8>,
}

impl Artifact {
    fn text(name: &str, contents: String) -> Self {
        Artifact {
            name: name.into(),
            contents: contents.into_bytes(),
        }
    }

    fn with(name: &str, f: impl FnOnce(&mut Vec<u8>) -> std::io::Result<()>) -> Self {
        let mut contents = Vec::new();
        f(&mut contents).expect("writing to memory cannot fail");
        Artifact {
            name: name.into(),
            contents,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CommandOutput {
    pub artifacts: Vec<Artifact>,
    /// Human-readable one-liners for the terminal.
    pub summary: Vec<String>,
}

impl CommandOutput {
    pub fn artifact(&self, name: &str) -> Option<&Artifact> {
        self.artifacts.iter().find(|a| a.name == name)
    }
}

fn waveform_artifact(name: &str, w: &Waveform) -> Artifact {
    Artifact::text(name, w.to_text())
}

/// Gates of the event-free APD background used as a tuning reference.
fn apd_reference(cfg: &RunConfig) -> Result<Waveform> {
    cfg.bench().apd_background(cfg.sd.delay_periods as usize + 10)
}

fn testsignal_reference(cfg: &RunConfig) -> Result<Waveform> {
    let spec = TestSignalSpec {
        event_mv: 0.0,
        ..cfg.testsignal.clone()
    };
    gen_test_signal(&spec, cfg.testsignal_gates as usize)
}

/// Tunes the chain on an event-free reference.
pub fn run_tune(cfg: &RunConfig) -> Result<Tuned> {
    cfg.validate()?;
    match cfg.tune_reference {
        TuneReference::Apd => sd_chain::tune(&apd_reference(cfg)?, &cfg.sd, cfg.gate.period_ps()),
        TuneReference::TestSignal => sd_chain::tune(
            &testsignal_reference(cfg)?,
            &cfg.sd,
            cfg.testsignal.period_ps(),
        ),
    }
}

pub fn cmd_tune(cfg: &RunConfig) -> Result<CommandOutput> {
    let tuned = run_tune(cfg)?;
    let mut out_cfg = cfg.clone();
    out_cfg.sd = tuned.config.clone();
    let summary_csv = format!(
        "reference,trim_db,delay_fine_ps,suppression_db,residual_pp_v\n{},{},{},{:.8e},{:.8e}\n",
        cfg.tune_reference,
        tuned.config.trim_db,
        tuned.config.delay_fine_ps,
        tuned.suppression_db,
        tuned.residual_pp_v
    );
    Ok(CommandOutput {
        artifacts: vec![
            Artifact::text("tuned.conf", out_cfg.serialize()),
            Artifact::text("tune.csv", summary_csv),
        ],
        summary: vec![
            format!(
                "tuned on {} reference: trim {:.2} dB, fine delay {} ps",
                cfg.tune_reference, tuned.config.trim_db, tuned.config.delay_fine_ps
            ),
            format!("suppression {:.2} dB", tuned.suppression_db),
        ],
    })
}

/// Result of the test-signal experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct TestSignalReport {
    pub tuned: Tuned,
    pub suppression_db: f64,
    pub clock_suppression_db: f64,
    /// `(event_mv, gate-1 peak, gate-2 peak)` for the 10-100 mV sweep.
    pub sweep: Vec<(f64, f64, f64)>,
}

/// First event gate past the warm-up of the delayed arm, and the one after it.
pub fn sweep_gates(spec: &TestSignalSpec, sd: &SdConfig) -> (u64, u64) {
    let every = spec.event_every as u64;
    let g1 = (sd.delay_periods as u64 + 1).div_ceil(every) * every;
    (g1, g1 + 1)
}

pub fn run_testsignal(cfg: &RunConfig) -> Result<(TestSignalReport, Vec<Artifact>)> {
    cfg.validate()?;
    let spec = &cfg.testsignal;
    let n = cfg.testsignal_gates as usize;
    let period = spec.period_ps();
    let reference = testsignal_reference(cfg)?;
    let tuned = sd_chain::tune(&reference, &cfg.sd, period)?;
    let sd = &tuned.config;
    let window = sd_chain::tuning_window(&reference, sd, period);

    let residual = sd_chain::self_difference(&reference, sd, period)?;
    let suppression_db = sd_chain::input_referred_suppression(&reference, &residual, sd, &window)?;

    let clock = gen_clock_signal(spec, n)?;
    let clock_res = sd_chain::self_difference(&clock, sd, period)?;
    let clock_suppression_db = sd_chain::input_referred_suppression(&clock, &clock_res, sd, &window)?;

    let signal = gen_test_signal(spec, n)?;
    let diff = sd_chain::self_difference(&signal, sd, period)?;

    let gates = sweep_gates(spec, sd);
    let mut sweep = Vec::new();
    if spec.event_mv != 0.0 {
        for k in 1..=10 {
            let mv = 10.0 * k as f64;
            let s = TestSignalSpec { event_mv: mv, ..spec.clone() };
            let d = sd_chain::self_difference(&gen_test_signal(&s, n)?, sd, period)?;
            let (p1, p2) = measure_gate_peaks(&d, period, gates)?;
            sweep.push((mv, p1, p2));
        }
    }

    let mut sweep_csv = String::from("event_mv,gate1_peak_v,gate2_peak_v\n");
    for (mv, p1, p2) in &sweep {
        let _ = writeln!(sweep_csv, "{mv},{p1:.8e},{p2:.8e}");
    }
    let supp_csv = format!(
        "suppression_db,clock_suppression_db,trim_db,delay_fine_ps\n{suppression_db:.8e},{clock_suppression_db:.8e},{},{}\n",
        sd.trim_db, sd.delay_fine_ps
    );
    let artifacts = vec![
        waveform_artifact("testsignal.txt", &signal),
        waveform_artifact("testsignal_residual.txt", &residual),
        waveform_artifact("testsignal_diff.txt", &diff),
        Artifact::text("testsignal_suppression.csv", supp_csv),
        Artifact::text("peak_sweep.csv", sweep_csv),
    ];
    Ok((
        TestSignalReport {
            tuned,
            suppression_db,
            clock_suppression_db,
            sweep,
        },
        artifacts,
    ))
}

pub fn cmd_testsignal(cfg: &RunConfig) -> Result<CommandOutput> {
    let (r, artifacts) = run_testsignal(cfg)?;
    Ok(CommandOutput {
        artifacts,
        summary: vec![
            format!("test-signal suppression {:.2} dB", r.suppression_db),
            format!("clock suppression {:.2} dB", r.clock_suppression_db),
        ],
    })
}

pub fn cmd_characterize(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let bench = cfg.bench();
    let c = characterize::characterize(&bench, cfg.n_gates, cfg.seed, &cfg.tdc)?;
    let t = bench.gate_period_ps();
    let r = c.metrics.r as f64;

    let mut artifacts = vec![
        Artifact::with("metrics.csv", |w| c.metrics.write_csv(w)),
        Artifact::with("histogram.csv", |w| c.histogram.write_csv(w)),
        Artifact::with("hist_dark.csv", |w| c.dark_histogram.write_csv(w)),
    ];
    if let Some(f) = &c.folded {
        artifacts.push(Artifact::with("hist_illuminated.csv", |w| f.slice(0.0, t).write_csv(w)));
        artifacts.push(Artifact::with("hist_afterpulse.csv", |w| f.slice(t, r * t).write_csv(w)));
    }
    let mut decay_csv = String::from("t_since_ns,net_counts\n");
    if let Ok(fit) = &c.decay {
        for (x, y) in &fit.points {
            let _ = writeln!(decay_csv, "{x},{y}");
        }
    }
    artifacts.push(Artifact::text("decay.csv", decay_csv));

    let m = &c.metrics;
    let show = |v: Option<f64>| v.map_or("undefined".to_string(), |x| format!("{x:.4e}"));
    let mut summary = vec![
        format!("eta {}", show(m.eta)),
        format!("P_dc {:.4e} per gate, {:.4e} per ns", m.p_dc, m.p_dc_ns),
        format!("P_a {}, P_a per ns {}", show(m.p_a), show(m.p_a_ns)),
        format!("jitter FWHM {} ps", show(m.jitter_fwhm_ps)),
    ];
    match &c.decay {
        Ok(f) => summary.push(format!("afterpulse decay tau {:.2} +- {:.2} ns", f.tau_ns, f.tau_se_ns)),
        Err(e) => summary.push(format!("afterpulse decay fit: {e}")),
    }
    if m.eta.is_none() {
        summary.push("no illumination: efficiency skipped, dark-count metrics only".into());
    }
    Ok(CommandOutput { artifacts, summary })
}

pub fn cmd_scan(cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let offsets = cfg.scan.offsets()?;
    let res = bench_scan(&cfg.bench(), &offsets, &cfg.scan, cfg.seed)?;
    let mut csv = String::from("offset_ps,count_rate_hz\n");
    for p in &res.points {
        let _ = writeln!(csv, "{},{:.8e}", p.offset_ps, p.count_rate_hz);
    }
    let summary_csv = format!(
        "active_fwhm_ps,duty_cycle,gate_rate_hz\n{:.8e},{:.8e},{}\n",
        res.active_fwhm_ps, res.duty_cycle, cfg.gate.f_g_hz
    );
    Ok(CommandOutput {
        artifacts: vec![
            Artifact::text("scan.csv", csv),
            Artifact::text("scan_summary.csv", summary_csv),
        ],
        summary: vec![format!(
            "active time {:.1} ps, duty cycle {:.4} at {} Hz gating",
            res.active_fwhm_ps, res.duty_cycle, cfg.gate.f_g_hz
        )],
    })
}

/// Linear-mode pulse train for a bit string, one slot per `bit_period_ps`.
pub fn bit_pulses(bits: &str, s: &LinearSettings) -> Result<Vec<OpticalPulse>> {
    if let Some(c) = bits.chars().find(|c| *c != '0' && *c != '1') {
        return Err(Error::invalid("bits", format!("only 0 and 1 are allowed, found {c:?}")));
    }
    Ok(bits
        .chars()
        .enumerate()
        .filter(|(_, c)| *c == '1')
        .map(|(k, _)| OpticalPulse {
            t_ps: k as f64 * s.bit_period_ps + s.bit_period_ps / 4.0,
            power_w: s.power_w,
            width_ps: s.bit_width_ps,
        })
        .collect())
}

/// Linear-mode detection of a bit string: photodiode response through the
/// differential amplifier and comparator, latched once per bit slot.
pub fn cmd_linear(bits: &str, cfg: &RunConfig) -> Result<CommandOutput> {
    cfg.validate()?;
    let s = &cfg.linear;
    if !(s.bit_period_ps > 0.0 && s.bit_width_ps > 0.0 && s.bit_width_ps < s.bit_period_ps) {
        return Err(Error::invalid("linear.bit_width_ps", "must be positive and shorter than the bit period"));
    }
    let pulses = bit_pulses(bits, s)?;
    let duration = (bits.len() as f64 + 1.0) * s.bit_period_ps;
    let apd_out = apd::linear_mode_response(&pulses, &cfg.apd, cfg.sample_rate_hz, duration)?;
    let diff = sd_chain::self_difference(&apd_out, &cfg.sd, cfg.gate.period_ps())?;
    let crossings = sd_chain::find_crossings(
        diff.samples(),
        diff.t0(),
        diff.sample_rate(),
        GainDb(cfg.sd.post_gain_db).ratio(),
        cfg.sd.threshold_v(),
        s.bit_period_ps,
    );
    let detected = sd_chain::stretch(&crossings, &cfg.sd, s.bit_period_ps);
    Ok(CommandOutput {
        artifacts: vec![
            waveform_artifact("linear_input.txt", &apd_out),
            waveform_artifact("linear_diff.txt", &diff),
            Artifact::with("linear_pulses.csv", |w| sd_chain::write_pulses_csv(&detected, w)),
        ],
        summary: vec![format!("{} pulses detected for {} bits", detected.len(), bits.len())],
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_round_trips() {
        let cfg = RunConfig::default();
        let text = cfg.serialize();
        assert_eq!(RunConfig::parse(&text).unwrap(), cfg);
        assert_eq!(text.lines().count(), RunConfig::keys().count());
    }

    #[test]
    fn parse_reports_bad_lines() {
        assert!(matches!(RunConfig::parse("gate.nope=1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(RunConfig::parse("\n\ngate.f_g_hz"), Err(Error::Parse { line: 3, .. })));
        assert!(RunConfig::parse("laser.mu=abc").is_err());
        let e = RunConfig::parse("laser.f_p_hz=3e7").unwrap_err();
        assert!(e.is_config_error());
    }

    #[test]
    fn comments_and_whitespace() {
        let cfg = RunConfig::parse("# header\n  laser.mu = 0.5  # half\n\ngate.shape=sine\n").unwrap();
        assert_eq!(cfg.laser.mu, 0.5);
        assert_eq!(cfg.gate.shape, GateShape::Sine);
    }

    #[test]
    fn bits_validation() {
        let s = LinearSettings::default();
        assert!(bit_pulses("10x1", &s).is_err());
        assert_eq!(bit_pulses("1010", &s).unwrap().len(), 2);
        assert!(bit_pulses("0000", &s).unwrap().is_empty());
    }
}
