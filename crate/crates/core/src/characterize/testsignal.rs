//! Arbitrary-waveform-generator stand-in for the APD: three positive rail
//! samples, a short gap, three negative rail samples, and optionally a
//! pseudo-detection event in the gap.

use crate::error::{Error, Result};
use crate::waveform::{TimeWindow, Waveform, PS_PER_S};

#[derive(Debug, Clone, PartialEq)]
pub struct TestSignalSpec {
    pub rail_mv: f64,
    pub sample_ps: f64,
    pub gap_samples: u32,
    pub event_width_ps: f64,
    pub event_mv: f64,
    pub rep_rate_hz: f64,
    /// Put an event on gates whose index is a multiple of this.
    pub event_every: u32,
    /// Accept widths and amplitudes outside the usual schema.
    pub allow_any: bool,
}

impl Default for TestSignalSpec {
    fn default() -> Self {
        TestSignalSpec {
            rail_mv: 300.0,
            sample_ps: 100.0,
            gap_samples: 1,
            event_width_ps: 100.0,
            event_mv: 100.0,
            rep_rate_hz: 200e6,
            event_every: 2,
            allow_any: false,
        }
    }
}

pub const RAIL_SAMPLES: usize = 3;

impl TestSignalSpec {
    pub fn sample_rate_hz(&self) -> f64 {
        PS_PER_S / self.sample_ps
    }

    pub fn period_ps(&self) -> f64 {
        PS_PER_S / self.rep_rate_hz
    }

    pub fn samples_per_period(&self) -> Result<usize> {
        let n = self.period_ps() / self.sample_ps;
        if (n - n.round()).abs() > 1e-9 * n {
            return Err(Error::invalid(
                "testsignal.rep_rate_hz",
                format!("period {} ps is not a whole number of {} ps samples", self.period_ps(), self.sample_ps),
            ));
        }
        Ok(n.round() as usize)
    }

    fn event_samples(&self) -> usize {
        (self.event_width_ps / self.sample_ps).round() as usize
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sample_ps > 0.0) {
            return Err(Error::invalid("testsignal.sample_ps", "must be > 0"));
        }
        if !(self.rep_rate_hz > 0.0) {
            return Err(Error::invalid("testsignal.rep_rate_hz", "must be > 0"));
        }
        if self.event_every == 0 {
            return Err(Error::invalid("testsignal.event_every", "must be >= 1"));
        }
        if !self.allow_any {
            if self.event_width_ps != 100.0 && self.event_width_ps != 200.0 {
                return Err(Error::invalid(
                    "testsignal.event_width_ps",
                    "must be 100 or 200 ps (set allow_any to override)",
                ));
            }
            if self.event_mv != 0.0 && !(10.0..=100.0).contains(&self.event_mv) {
                return Err(Error::invalid(
                    "testsignal.event_mv",
                    "must be 0 or within 10-100 mV (set allow_any to override)",
                ));
            }
        }
        let ev = self.event_samples();
        if self.event_mv != 0.0 && (ev == 0 || ev > self.gap_samples as usize) {
            return Err(Error::invalid(
                "testsignal.event_width_ps",
                format!("a {} ps event does not fit in a {} sample gap", self.event_width_ps, self.gap_samples),
            ));
        }
        let per = self.samples_per_period()?;
        if 2 * RAIL_SAMPLES + self.gap_samples as usize > per {
            return Err(Error::invalid(
                "testsignal",
                format!("schema needs {} samples but a period holds {per}", 2 * RAIL_SAMPLES + self.gap_samples as usize),
            ));
        }
        Ok(())
    }

    /// Index of the first positive rail sample within a period.
    pub fn pattern_start(&self) -> Result<usize> {
        let per = self.samples_per_period()?;
        Ok((per - (2 * RAIL_SAMPLES + self.gap_samples as usize)) / 2)
    }

    pub fn has_event(&self, gate: usize) -> bool {
        self.event_mv != 0.0 && gate.is_multiple_of(self.event_every as usize)
    }
}

pub fn gen_test_signal(spec: &TestSignalSpec, n_gates: usize) -> Result<Waveform> {
    if n_gates < 2 {
        return Err(Error::invalid("n_gates", "a test signal needs at least 2 gates"));
    }
    spec.validate()?;
    let per = spec.samples_per_period()?;
    let start = spec.pattern_start()?;
    let rail = spec.rail_mv * 1e-3;
    let gap = spec.gap_samples as usize;
    let mut s = vec![0.0; per * n_gates];
    for g in 0..n_gates {
        let b = g * per + start;
        s[b..b + RAIL_SAMPLES].fill(rail);
        s[b + RAIL_SAMPLES + gap..b + 2 * RAIL_SAMPLES + gap].fill(-rail);
        if spec.has_event(g) {
            let e = b + RAIL_SAMPLES;
            s[e..e + spec.event_samples()].fill(spec.event_mv * 1e-3);
        }
    }
    Waveform::new(spec.sample_rate_hz(), 0.0, s)
}

/// A clock of the same peak-to-peak amplitude as the schema.
pub fn gen_clock_signal(spec: &TestSignalSpec, n_gates: usize) -> Result<Waveform> {
    let per = spec.samples_per_period()?;
    let rail = spec.rail_mv * 1e-3;
    let f = spec.rep_rate_hz;
    Waveform::from_fn(spec.sample_rate_hz(), 0.0, per * n_gates, |t| {
        rail * (std::f64::consts::TAU * f * t / PS_PER_S).sin()
    })
}

/// Largest sample (floored at zero) inside each of two gate periods.
pub fn measure_gate_peaks(diff_out: &Waveform, gate_period_ps: f64, gates: (u64, u64)) -> Result<(f64, f64)> {
    let peak = |g: u64| -> Result<f64> {
        let w = TimeWindow::new(g as f64 * gate_period_ps, (g + 1) as f64 * gate_period_ps);
        Ok(diff_out.window(&w)?.iter().fold(0.0f64, |m, &v| m.max(v)))
    };
    Ok((peak(gates.0)?, peak(gates.1)?))
}
