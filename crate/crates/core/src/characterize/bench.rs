//! The full detector: APD, self-differencing chain and discriminator, run for
//! many gates.
//!
//! Everything after the APD is linear and time-invariant, so the chain output
//! is the steady-state response to the periodic capacitive signal plus the
//! response to the avalanche pulses alone. [`Bench::run`] computes the former
//! once per gate period and renders the latter only around events; gates far
//! from any event reuse the steady-state comparator decision.
//! [`Bench::run_dense`] pushes the whole record through the public chain
//! functions and exists to cross-check the fast path.

use crate::apd::{self, ApdParams, AvalancheEvent, GateConfig, LaserConfig};
use crate::error::{Error, Result};
use crate::sd_chain::{self, Crossing, DigitalPulse, SdConfig};
use crate::waveform::{GainDb, Waveform, PS_PER_S};

/// Longest stretch of gates evaluated from one rendered window.
const MAX_WINDOW_GATES: u64 = 1024;

#[derive(Debug, Clone, PartialEq)]
pub struct Bench {
    pub gate: GateConfig,
    pub laser: LaserConfig,
    pub apd: ApdParams,
    pub sd: SdConfig,
    pub sample_rate_hz: f64,
}

impl Default for Bench {
    fn default() -> Self {
        Bench {
            gate: GateConfig::default(),
            laser: LaserConfig::default(),
            apd: ApdParams::default(),
            sd: SdConfig::default(),
            sample_rate_hz: 40e9,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunOutput {
    pub events: Vec<AvalancheEvent>,
    /// Comparator pulses, one per gate at most.
    pub comparator: Vec<DigitalPulse>,
    /// Stretched output pulses.
    pub pulses: Vec<DigitalPulse>,
    /// First gate whose output is recorded; earlier gates only warm up the chain.
    pub first_gate: u64,
    /// One past the last simulated gate.
    pub end_gate: u64,
}

impl RunOutput {
    pub fn counted_gates(&self) -> u64 {
        self.end_gate - self.first_gate
    }
}

/// Output pulses split by whether their gate was illuminated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct GateCounts {
    pub illuminated_gates: u64,
    pub illuminated_clicks: u64,
    pub other_gates: u64,
    pub other_clicks: u64,
}

impl GateCounts {
    pub fn tally(run: &RunOutput, gate_period_ps: f64, gates_per_pulse: u64) -> Self {
        let r = gates_per_pulse;
        let multiples_below = |g: u64| g.div_ceil(r);
        let illuminated_gates = multiples_below(run.end_gate) - multiples_below(run.first_gate);
        let mut c = GateCounts {
            illuminated_gates,
            other_gates: run.counted_gates() - illuminated_gates,
            ..Default::default()
        };
        for p in &run.pulses {
            let g = (p.t_rise_ps / gate_period_ps).floor() as u64;
            if g.is_multiple_of(r) {
                c.illuminated_clicks += 1;
            } else {
                c.other_clicks += 1;
            }
        }
        c
    }

    pub fn c_i(&self) -> f64 {
        self.illuminated_clicks as f64 / self.illuminated_gates as f64
    }

    pub fn c_ni(&self) -> f64 {
        self.other_clicks as f64 / self.other_gates as f64
    }

    pub fn c_all(&self) -> f64 {
        (self.illuminated_clicks + self.other_clicks) as f64
            / (self.illuminated_gates + self.other_gates) as f64
    }
}

impl Bench {
    pub fn gate_period_ps(&self) -> f64 {
        self.gate.period_ps()
    }

    pub fn samples_per_gate(&self) -> Result<usize> {
        let s = self.gate_period_ps() * self.sample_rate_hz / PS_PER_S;
        if !(s >= 2.0) || (s - s.round()).abs() > 1e-9 * s {
            return Err(Error::invalid(
                "sample_rate_hz",
                format!("a gate period must hold a whole number of samples, got {s}"),
            ));
        }
        Ok(s.round() as usize)
    }

    pub fn validate(&self) -> Result<()> {
        self.gate.validate()?;
        self.laser.validate(&self.gate)?;
        self.apd.validate()?;
        self.sd.validate()?;
        self.samples_per_gate()?;
        Ok(())
    }

    pub fn gates_per_pulse(&self) -> Result<u64> {
        self.laser.gates_per_pulse(&self.gate)
    }

    /// Gates discarded at the start while the delayed arm fills.
    pub fn warmup_gates(&self) -> u64 {
        self.sd.delay_periods as u64 + 3
    }

    /// Gates after an event that its chain response can still reach.
    fn reach_gates(&self) -> u64 {
        self.sd.delay_periods as u64 + 3
    }

    /// Capacitive response of the gate train, as the APD outputs it.
    pub fn apd_background(&self, n_gates: usize) -> Result<Waveform> {
        let g = apd::gen_gate_waveform(&self.gate, n_gates, self.sample_rate_hz)?;
        apd::capacitive_response(&g, &self.apd)
    }

    /// One gate period of the settled differential-amplifier output with no
    /// avalanches, starting at a gate boundary.
    pub fn steady_state(&self) -> Result<Vec<f64>> {
        let s = self.samples_per_gate()?;
        let n = self.sd.delay_periods as usize + 8;
        let bg = self.apd_background(n)?;
        let out = sd_chain::self_difference(&bg, &self.sd, self.gate_period_ps())?;
        Ok(out.samples()[(n - 1) * s..n * s].to_vec())
    }

    fn post_gain(&self) -> f64 {
        GainDb(self.sd.post_gain_db).ratio()
    }

    /// Crossing phase within a gate of the steady-state output, if it fires.
    fn steady_crossing(&self, steady: &[f64]) -> Option<f64> {
        let t = self.gate_period_ps();
        let two: Vec<f64> = steady.iter().chain(steady).copied().collect();
        sd_chain::find_crossings(&two, 0.0, self.sample_rate_hz, self.post_gain(), self.sd.threshold_v(), t)
            .into_iter()
            .find(|c| c.gate == 1)
            .map(|c| c.t_ps - t)
    }

    fn finish(&self, events: Vec<AvalancheEvent>, crossings: Vec<Crossing>, first: u64, end: u64) -> RunOutput {
        let t = self.gate_period_ps();
        let comparator = crossings
            .iter()
            .map(|c| DigitalPulse {
                t_rise_ps: c.t_ps,
                width_ps: self.sd.out_pulse_ps,
            })
            .collect();
        let pulses = sd_chain::stretch(&crossings, &self.sd, t);
        RunOutput {
            events,
            comparator,
            pulses,
            first_gate: first,
            end_gate: end,
        }
    }

    /// Simulates `n_gates` recorded gates (after the warm-up) with the given seed.
    pub fn run(&self, n_gates: u64, seed: u64) -> Result<RunOutput> {
        self.validate()?;
        if n_gates == 0 {
            return Err(Error::invalid("n_gates", "must be >= 1"));
        }
        let first = self.warmup_gates();
        let end = first + n_gates;
        let events = apd::simulate_events(&self.gate, &self.laser, &self.apd, end, seed)?;
        let crossings = self.sparse_crossings(&events, first, end)?;
        Ok(self.finish(events, crossings, first, end))
    }

    /// Comparator crossings for gates `first..end` given the event stream.
    pub fn sparse_crossings(&self, events: &[AvalancheEvent], first: u64, end: u64) -> Result<Vec<Crossing>> {
        let s = self.samples_per_gate()?;
        let t = self.gate_period_ps();
        let steady = self.steady_state()?;
        let idle = self.steady_crossing(&steady);
        let reach = self.reach_gates();
        let gain = self.post_gain();
        let thr = self.sd.threshold_v();

        // Plan the cluster windows first; each one is then independent.
        struct Window {
            events: std::ops::Range<usize>,
            w0: u64,
            w1: u64,
            eval_from: u64,
            eval_to: u64,
        }
        let mut plan: Vec<Window> = Vec::new();
        let mut cursor = first;
        let mut i = 0;
        while i < events.len() {
            let a = events[i].gate_index;
            let mut b = a;
            let mut j = i + 1;
            while j < events.len() && events[j].gate_index <= b + reach + 2 {
                b = events[j].gate_index;
                j += 1;
            }
            let w0 = a.saturating_sub(2);
            let w1 = (b + reach + 1).min(end).max(w0 + self.sd.delay_periods as u64 + 1);
            let eval_from = (w0 + 1).max(a.saturating_sub(1)).max(cursor);
            let eval_to = w1.min(end);
            if eval_to > cursor {
                let eval_from = eval_from.min(eval_to);
                if eval_to - eval_from <= MAX_WINDOW_GATES {
                    plan.push(Window { events: i..j, w0, w1, eval_from, eval_to });
                } else {
                    // Busy stretch: evaluate in chunks, each rendered from far
                    // enough back that earlier events no longer matter.
                    let mut e0 = eval_from;
                    while e0 < eval_to {
                        let e1 = (e0 + MAX_WINDOW_GATES).min(eval_to);
                        let c0 = if e0 == eval_from { w0 } else { e0 - reach - 4 };
                        let c1 = if e1 == eval_to { w1 } else { e1 };
                        let lo = i + events[i..j].partition_point(|e| e.gate_index < c0);
                        let hi = i + events[i..j].partition_point(|e| e.gate_index <= c1);
                        plan.push(Window { events: lo..hi, w0: c0, w1: c1, eval_from: e0, eval_to: e1 });
                        e0 = e1;
                    }
                }
                cursor = eval_to;
            }
            i = j;
        }

        let render = |w: &Window| -> Result<Vec<Crossing>> {
            let len = (w.w1 - w.w0) as usize * s;
            let t0 = w.w0 as f64 * t;
            let ev = apd::render_avalanches(&events[w.events.clone()], t0, len, self.sample_rate_hz, &self.apd)?;
            let mut proc = sd_chain::self_difference(&ev, &self.sd, t)?.into_samples();
            for (k, v) in proc.iter_mut().enumerate() {
                *v += steady[k % s];
            }
            Ok(sd_chain::find_crossings(&proc, t0, self.sample_rate_hz, gain, thr, t)
                .into_iter()
                .filter(|c| c.gate >= w.eval_from as i64 && c.gate < w.eval_to as i64)
                .collect())
        };
        #[cfg(feature = "parallel")]
        let found: Vec<Vec<Crossing>> = {
            use rayon::prelude::*;
            plan.par_iter().map(render).collect::<Result<_>>()?
        };
        #[cfg(not(feature = "parallel"))]
        let found: Vec<Vec<Crossing>> = plan.iter().map(render).collect::<Result<_>>()?;

        let mut out: Vec<Crossing> = Vec::new();
        let emit_idle = |out: &mut Vec<Crossing>, from: u64, to: u64| {
            if let Some(phase) = idle {
                for g in from..to {
                    out.push(Crossing {
                        gate: g as i64,
                        t_ps: g as f64 * t + phase,
                    });
                }
            }
        };
        let mut cursor = first;
        for (w, f) in plan.iter().zip(found) {
            emit_idle(&mut out, cursor, w.eval_from);
            out.extend(f);
            cursor = w.eval_to;
        }
        emit_idle(&mut out, cursor, end);
        Ok(out)
    }

    /// Chain output for the whole record, computed the slow way.
    pub fn process_dense(&self, events: &[AvalancheEvent], total_gates: u64) -> Result<Waveform> {
        let g = apd::gen_gate_waveform(&self.gate, total_gates as usize, self.sample_rate_hz)?;
        let apd_out = apd::synthesize_output(events, &g, &self.apd)?;
        sd_chain::self_difference(&apd_out, &self.sd, self.gate_period_ps())
    }

    /// Same as [`Bench::run`] but through the full-record chain.
    pub fn run_dense(&self, n_gates: u64, seed: u64) -> Result<RunOutput> {
        self.validate()?;
        let first = self.warmup_gates();
        let end = first + n_gates;
        let events = apd::simulate_events(&self.gate, &self.laser, &self.apd, end, seed)?;
        let processed = self.process_dense(&events, end)?;
        let crossings = sd_chain::find_crossings(
            processed.samples(),
            processed.t0(),
            processed.sample_rate(),
            self.post_gain(),
            self.sd.threshold_v(),
            self.gate_period_ps(),
        )
        .into_iter()
        .filter(|c| c.gate >= first as i64 && c.gate < end as i64)
        .collect();
        Ok(self.finish(events, crossings, first, end))
    }
}
