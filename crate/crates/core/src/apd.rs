//! Gated APD physics: gate drive, capacitive response, Monte-Carlo avalanche
//! statistics and analog output synthesis.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::fmt;
use std::io::{BufRead, Write};
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Exp, Geometric, Normal, Poisson};

use crate::error::{Error, Result};
use crate::waveform::{self, Waveform, PS_PER_S};
use crate::FWHM_PER_SIGMA;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GateShape {
    Square,
    Sine,
}

impl fmt::Display for GateShape {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            GateShape::Square => "square",
            GateShape::Sine => "sine",
        })
    }
}

impl FromStr for GateShape {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "square" => Ok(GateShape::Square),
            "sine" => Ok(GateShape::Sine),
            _ => Err(Error::invalid("gate.shape", format!("expected square or sine, got {s:?}"))),
        }
    }
}

/// Gate drive: a pulse of `v_p` volts and width `t_p_ps` every `1/f_g_hz`,
/// added to the DC bias `v_dc`.
#[derive(Debug, Clone, PartialEq)]
pub struct GateConfig {
    pub f_g_hz: f64,
    pub t_p_ps: f64,
    pub v_p: f64,
    pub v_dc: f64,
    pub v_br: f64,
    pub shape: GateShape,
}

impl Default for GateConfig {
    fn default() -> Self {
        GateConfig {
            f_g_hz: 200e6,
            t_p_ps: 900.0,
            v_p: 4.0,
            v_dc: 60.0,
            v_br: 62.5,
            shape: GateShape::Square,
        }
    }
}

impl GateConfig {
    pub fn period_ps(&self) -> f64 {
        PS_PER_S / self.f_g_hz
    }

    /// Time of the gate maximum in gate `n`.
    pub fn center_ps(&self, n: u64) -> f64 {
        let t = self.period_ps();
        match self.shape {
            GateShape::Square => n as f64 * t + t / 2.0,
            GateShape::Sine => n as f64 * t + t / 4.0,
        }
    }

    /// Index of the gate period `[nT, (n+1)T)` holding `t_ps`.
    pub fn gate_of(&self, t_ps: f64) -> i64 {
        (t_ps / self.period_ps()).floor() as i64
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.f_g_hz > 0.0 && self.f_g_hz.is_finite()) {
            return Err(Error::invalid("gate.f_g_hz", "must be positive"));
        }
        if !(self.t_p_ps > 0.0) {
            return Err(Error::invalid("gate.t_p_ps", "must be positive"));
        }
        if self.t_p_ps >= self.period_ps() {
            return Err(Error::invalid(
                "gate.t_p_ps",
                format!(
                    "pulse width {} ps does not fit in the {} ps gate period",
                    self.t_p_ps,
                    self.period_ps()
                ),
            ));
        }
        if self.v_dc + self.v_p <= self.v_br {
            return Err(Error::invalid(
                "gate.v_p",
                format!(
                    "v_dc + v_p = {} V never exceeds breakdown {} V",
                    self.v_dc + self.v_p,
                    self.v_br
                ),
            ));
        }
        Ok(())
    }

    /// Bias voltage at time `t_ps`.
    pub fn voltage_at(&self, t_ps: f64) -> f64 {
        let period = self.period_ps();
        match self.shape {
            GateShape::Square => {
                let phase = t_ps - (t_ps / period).floor() * period;
                let half = self.t_p_ps / 2.0;
                let c = period / 2.0;
                if phase >= c - half && phase < c + half {
                    self.v_dc + self.v_p
                } else {
                    self.v_dc
                }
            }
            GateShape::Sine => {
                let arg = std::f64::consts::TAU * (t_ps / period).fract();
                self.v_dc + self.v_p / 2.0 * (1.0 + arg.sin())
            }
        }
    }
}

/// Pulsed laser synchronized to a subharmonic of the gate.
#[derive(Debug, Clone, PartialEq)]
pub struct LaserConfig {
    pub f_p_hz: f64,
    /// Mean photon number per pulse.
    pub mu: f64,
    pub pulse_fwhm_ps: f64,
    /// Pulse center minus gate center.
    pub offset_ps: f64,
}

impl Default for LaserConfig {
    fn default() -> Self {
        LaserConfig {
            f_p_hz: 50e6,
            mu: 1.0,
            pulse_fwhm_ps: 500.0,
            offset_ps: 0.0,
        }
    }
}

impl LaserConfig {
    pub fn validate(&self, gate: &GateConfig) -> Result<()> {
        if !(self.f_p_hz > 0.0 && self.f_p_hz.is_finite()) {
            return Err(Error::invalid("laser.f_p_hz", "must be positive"));
        }
        if !(self.mu >= 0.0 && self.mu.is_finite()) {
            return Err(Error::invalid("laser.mu", "must be >= 0"));
        }
        if !(self.pulse_fwhm_ps >= 0.0) {
            return Err(Error::invalid("laser.pulse_fwhm_ps", "must be >= 0"));
        }
        if !self.offset_ps.is_finite() {
            return Err(Error::invalid("laser.offset_ps", "must be finite"));
        }
        self.gates_per_pulse(gate).map(|_| ())
    }

    /// `R = f_g / f_p`, which has to be a whole number.
    pub fn gates_per_pulse(&self, gate: &GateConfig) -> Result<u64> {
        let r = gate.f_g_hz / self.f_p_hz;
        let k = r.round();
        if k < 1.0 || (r - k).abs() > 1e-9 * k {
            return Err(Error::invalid(
                "laser.f_p_hz",
                format!(
                    "gate rate {} Hz is not a whole multiple of the laser rate {} Hz",
                    gate.f_g_hz, self.f_p_hz
                ),
            ));
        }
        Ok(k as u64)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ApdParams {
    /// Single-photon detection efficiency at the center of the gate.
    pub eta_peak: f64,
    /// FWHM of the Gaussian intra-gate efficiency profile.
    pub active_fwhm_ps: f64,
    pub jitter_fwhm_ps: f64,
    /// Dark count density inside the active window, per ns.
    pub dark_rate_per_ns: f64,
    pub trap_mean: f64,
    pub trap_tau_ns: f64,
    pub release_trigger_prob: f64,
    pub avalanche_amp_mv: f64,
    pub avalanche_width_ps: f64,
    /// Volts of capacitive response per V/ps of gate slope.
    pub cap_gain_ps: f64,
    /// Risetime of the APD plus its readout, applied to everything it outputs.
    pub frontend_risetime_ps: f64,
    /// Linear-mode output, volts per watt of optical power.
    pub responsivity_v_per_w: f64,
}

impl Default for ApdParams {
    fn default() -> Self {
        ApdParams {
            eta_peak: 0.1700,
            active_fwhm_ps: 200.0,
            jitter_fwhm_ps: 150.0,
            dark_rate_per_ns: 4.5e-6,
            trap_mean: 3.75,
            trap_tau_ns: 30.0,
            release_trigger_prob: 0.5,
            avalanche_amp_mv: 100.0,
            avalanche_width_ps: 100.0,
            cap_gain_ps: 15.0,
            frontend_risetime_ps: 250.0,
            responsivity_v_per_w: 45.0,
        }
    }
}

impl ApdParams {
    pub fn validate(&self) -> Result<()> {
        let prob = |name: &str, v: f64| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be in [0, 1], got {v}")))
            }
        };
        let positive = |name: &str, v: f64| {
            if v > 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be positive, got {v}")))
            }
        };
        let non_negative = |name: &str, v: f64| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::invalid(name, format!("must be >= 0, got {v}")))
            }
        };
        prob("apd.eta_peak", self.eta_peak)?;
        prob("apd.release_trigger_prob", self.release_trigger_prob)?;
        positive("apd.active_fwhm_ps", self.active_fwhm_ps)?;
        positive("apd.jitter_fwhm_ps", self.jitter_fwhm_ps)?;
        positive("apd.trap_tau_ns", self.trap_tau_ns)?;
        positive("apd.avalanche_width_ps", self.avalanche_width_ps)?;
        positive("apd.frontend_risetime_ps", self.frontend_risetime_ps)?;
        non_negative("apd.dark_rate_per_ns", self.dark_rate_per_ns)?;
        non_negative("apd.trap_mean", self.trap_mean)?;
        non_negative("apd.responsivity_v_per_w", self.responsivity_v_per_w)?;
        if !self.avalanche_amp_mv.is_finite() || !self.cap_gain_ps.is_finite() {
            return Err(Error::invalid("apd", "amplitudes must be finite"));
        }
        Ok(())
    }

    fn active_sigma(&self) -> f64 {
        self.active_fwhm_ps / FWHM_PER_SIGMA
    }

    /// Probability that one photon of `laser` is detected, i.e. `eta_peak`
    /// weighted by the overlap of the optical pulse with the efficiency profile.
    pub fn photon_efficiency(&self, laser: &LaserConfig) -> f64 {
        let sa2 = self.active_sigma().powi(2);
        let sl2 = (laser.pulse_fwhm_ps / FWHM_PER_SIGMA).powi(2);
        let s2 = sa2 + sl2;
        self.eta_peak * (sa2 / s2).sqrt() * (-laser.offset_ps.powi(2) / (2.0 * s2)).exp()
    }

    /// Mean detection time of a photon relative to the gate center.
    pub fn photon_time_offset(&self, laser: &LaserConfig) -> f64 {
        let sa2 = self.active_sigma().powi(2);
        let sl2 = (laser.pulse_fwhm_ps / FWHM_PER_SIGMA).powi(2);
        laser.offset_ps * sa2 / (sa2 + sl2)
    }

    /// Probability of a dark click in one gate.
    pub fn dark_prob_per_gate(&self) -> f64 {
        (self.dark_rate_per_ns * self.active_fwhm_ps * 1e-3).min(1.0)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Cause {
    Photon,
    Dark,
    Afterpulse,
}

impl Cause {
    pub fn as_str(self) -> &'static str {
        match self {
            Cause::Photon => "photon",
            Cause::Dark => "dark",
            Cause::Afterpulse => "afterpulse",
        }
    }
}

impl fmt::Display for Cause {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Cause {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "photon" => Ok(Cause::Photon),
            "dark" => Ok(Cause::Dark),
            "afterpulse" => Ok(Cause::Afterpulse),
            _ => Err(Error::invalid("cause", format!("unknown cause {s:?}"))),
        }
    }
}

/// One avalanche. Dark and afterpulse events lie inside the active window of
/// their gate; photon events are jittered around the nominal detection time
/// and kept inside their gate period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AvalancheEvent {
    pub gate_index: u64,
    pub t_ps: f64,
    pub cause: Cause,
}

/// Square or sine gate train of `n_gates` periods starting at t = 0.
pub fn gen_gate_waveform(cfg: &GateConfig, n_gates: usize, sample_rate_hz: f64) -> Result<Waveform> {
    if n_gates == 0 {
        return Err(Error::invalid("n_gates", "must be >= 1"));
    }
    if cfg.t_p_ps >= cfg.period_ps() {
        return Err(Error::invalid("gate.t_p_ps", "gates overlap: pulse width >= period"));
    }
    let len = (n_gates as f64 * cfg.period_ps() * sample_rate_hz / PS_PER_S).round() as usize;
    Waveform::from_fn(sample_rate_hz, 0.0, len.max(1), |t| cfg.voltage_at(t))
}

/// `cap_gain` times the gate slope, band-limited by the front end.
pub fn capacitive_response(gate_wf: &Waveform, p: &ApdParams) -> Result<Waveform> {
    let v = gate_wf.samples();
    let n = v.len();
    let dt = gate_wf.sample_period_ps();
    let mut d = vec![0.0; n];
    if n > 1 {
        d[0] = (v[1] - v[0]) / dt;
        d[n - 1] = (v[n - 1] - v[n - 2]) / dt;
        for i in 1..n - 1 {
            d[i] = (v[i + 1] - v[i - 1]) / (2.0 * dt);
        }
    }
    let d = gate_wf.with_samples(d.into_iter().map(|s| s * p.cap_gain_ps).collect());
    waveform::band_limit(&d, p.frontend_risetime_ps)
}

/// Response at time `t` of a single-pole low-pass (time constant `tau`) to a
/// rectangle of height `amp` on `[a, b)`.
pub(crate) fn rc_rect(t: f64, a: f64, b: f64, amp: f64, tau: f64) -> f64 {
    if t <= a {
        0.0
    } else if t <= b {
        amp * -(-(t - a) / tau).exp_m1()
    } else {
        amp * ((-(t - b) / tau).exp() - (-(t - a) / tau).exp())
    }
}

/// Adds band-limited rectangles `(start_ps, width_ps, amp_v)` onto a sample
/// buffer whose first sample is at `t0_ps`.
pub(crate) fn add_rc_rects(
    out: &mut [f64],
    t0_ps: f64,
    sample_rate_hz: f64,
    rects: impl IntoIterator<Item = (f64, f64, f64)>,
    risetime_ps: f64,
) {
    let tau = waveform::risetime_to_tau(risetime_ps);
    let dt = PS_PER_S / sample_rate_hz;
    for (a, w, amp) in rects {
        let b = a + w;
        // Past 40 time constants the tail is below 1e-17 of the amplitude.
        let first = (((a - t0_ps) / dt).floor().max(0.0)) as usize;
        let last = ((((b + 40.0 * tau) - t0_ps) / dt).ceil().max(0.0) as usize).min(out.len());
        for (i, s) in out.iter_mut().enumerate().take(last).skip(first) {
            let t = t0_ps + i as f64 * dt;
            *s += rc_rect(t, a, b, amp, tau);
        }
    }
}

/// Renders only the avalanche pulses of `events` onto a zero baseline.
pub fn render_avalanches(
    events: &[AvalancheEvent],
    t0_ps: f64,
    len: usize,
    sample_rate_hz: f64,
    p: &ApdParams,
) -> Result<Waveform> {
    let mut out = vec![0.0; len];
    let w = p.avalanche_width_ps;
    let amp = p.avalanche_amp_mv * 1e-3;
    add_rc_rects(
        &mut out,
        t0_ps,
        sample_rate_hz,
        events.iter().map(|e| (e.t_ps - w / 2.0, w, amp)),
        p.frontend_risetime_ps,
    );
    Waveform::new(sample_rate_hz, t0_ps, out)
}

/// Capacitive response plus one band-limited rectangular avalanche pulse,
/// centered on the event time, per event.
pub fn synthesize_output(
    events: &[AvalancheEvent],
    gate_wf: &Waveform,
    p: &ApdParams,
) -> Result<Waveform> {
    let span = gate_wf.span();
    if let Some(e) = events.iter().find(|e| !span.contains(e.t_ps)) {
        return Err(Error::invalid(
            "events",
            format!(
                "event at {} ps lies outside the waveform span [{}, {}) ps",
                e.t_ps, span.start_ps, span.end_ps
            ),
        ));
    }
    let cap = capacitive_response(gate_wf, p)?;
    let av = render_avalanches(events, gate_wf.t0(), gate_wf.len(), gate_wf.sample_rate(), p)?;
    waveform::add(&cap, &av)
}

#[derive(Debug, Clone, Copy)]
struct Release {
    gate: u64,
    t_ps: f64,
}

impl PartialEq for Release {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Release {}
impl PartialOrd for Release {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Release {
    // Reversed so BinaryHeap pops the earliest release first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .gate
            .cmp(&self.gate)
            .then_with(|| other.t_ps.total_cmp(&self.t_ps))
    }
}

/// Number of Bernoulli(p) failures before the next success, `None` if p = 0.
fn geometric_skip(dist: &Option<Geometric>, rng: &mut ChaCha8Rng) -> Option<u64> {
    dist.as_ref().map(|d| d.sample(rng))
}

fn geometric(p: f64) -> Result<Option<Geometric>> {
    // Below half an ulp of 1 the sampler never terminates; such a source
    // would not fire in any realistic run anyway.
    if 1.0 - p == 1.0 {
        return Ok(None);
    }
    Geometric::new(p.min(1.0))
        .map(Some)
        .map_err(|e| Error::Domain(format!("geometric distribution: {e}")))
}

/// Monte-Carlo avalanche stream for gates `0..n_gates`.
///
/// Per gate the causes are tried in the order photon, dark, afterpulse and the
/// first one wins. Photon clicks only happen in gates `n` with `n % R == 0`.
/// Every avalanche fills a Poisson number of traps; each trap releases after an
/// exponential delay and, if that lands inside a later gate's active window,
/// triggers there with `release_trigger_prob`.
///
/// All randomness comes from one `ChaCha8Rng` seeded with `seed_from_u64(seed)`.
/// The cost scales with the number of events, not the number of gates.
pub fn simulate_events(
    gate: &GateConfig,
    laser: &LaserConfig,
    p: &ApdParams,
    n_gates: u64,
    seed: u64,
) -> Result<Vec<AvalancheEvent>> {
    gate.validate()?;
    laser.validate(gate)?;
    p.validate()?;
    if n_gates == 0 {
        return Err(Error::invalid("n_gates", "must be >= 1"));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let r = laser.gates_per_pulse(gate)?;
    let period = gate.period_ps();
    let half_window = p.active_fwhm_ps / 2.0;

    let p_click = -(-laser.mu * p.photon_efficiency(laser)).exp_m1();
    let photon_dist = geometric(p_click)?;
    let dark_dist = geometric(p.dark_prob_per_gate())?;
    let jitter = Normal::new(0.0, p.jitter_fwhm_ps / FWHM_PER_SIGMA)
        .map_err(|e| Error::Domain(e.to_string()))?;
    let release = Exp::new(1.0 / (p.trap_tau_ns * 1e3)).map_err(|e| Error::Domain(e.to_string()))?;
    let traps = if p.trap_mean > 0.0 {
        Some(Poisson::new(p.trap_mean).map_err(|e| Error::Domain(e.to_string()))?)
    } else {
        None
    };
    let photon_shift = p.photon_time_offset(laser);

    let next_after = |from: u64, skip: Option<u64>, stride: u64| -> u64 {
        match skip {
            Some(k) => from.saturating_add(k.saturating_mul(stride)),
            None => u64::MAX,
        }
    };
    let mut next_photon = next_after(0, geometric_skip(&photon_dist, &mut rng), r);
    let mut next_dark = next_after(0, geometric_skip(&dark_dist, &mut rng), 1);
    let mut pending: BinaryHeap<Release> = BinaryHeap::new();
    let mut events = Vec::new();

    loop {
        let next_release = pending.peek().map_or(u64::MAX, |rel| rel.gate);
        let g = next_photon.min(next_dark).min(next_release);
        if g >= n_gates {
            break;
        }
        let center = gate.center_ps(g);
        let mut event = None;
        if next_photon == g {
            let lo = g as f64 * period;
            let hi = lo + period * (1.0 - 1e-12);
            let t = (center + photon_shift + jitter.sample(&mut rng)).clamp(lo, hi);
            event = Some((t, Cause::Photon));
            next_photon = next_after(g + r, geometric_skip(&photon_dist, &mut rng), r);
        }
        if next_dark == g {
            if event.is_none() {
                let t = center + rng.random_range(-half_window..=half_window);
                event = Some((t, Cause::Dark));
            }
            next_dark = next_after(g + 1, geometric_skip(&dark_dist, &mut rng), 1);
        }
        while pending.peek().is_some_and(|rel| rel.gate == g) {
            let rel = pending.pop().expect("peeked");
            if event.is_none() {
                event = Some((rel.t_ps, Cause::Afterpulse));
            }
        }
        let Some((t, cause)) = event else { continue };
        events.push(AvalancheEvent {
            gate_index: g,
            t_ps: t,
            cause,
        });
        if let Some(traps) = &traps {
            let n = traps.sample(&mut rng) as u64;
            for _ in 0..n {
                let tr = t + release.sample(&mut rng);
                let m = (tr / period).floor() as u64;
                if m <= g || m >= n_gates {
                    continue;
                }
                if (tr - gate.center_ps(m)).abs() > half_window {
                    continue;
                }
                if rng.random::<f64>() < p.release_trigger_prob {
                    pending.push(Release { gate: m, t_ps: tr });
                }
            }
        }
    }
    Ok(events)
}

/// Optical input for linear (ungated) operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OpticalPulse {
    pub t_ps: f64,
    pub power_w: f64,
    pub width_ps: f64,
}

/// Proportional photodiode response: each pulse becomes a band-limited
/// rectangle of `responsivity * power` volts starting at its time.
pub fn linear_mode_response(
    pulses: &[OpticalPulse],
    p: &ApdParams,
    sample_rate_hz: f64,
    duration_ps: f64,
) -> Result<Waveform> {
    if let Some(bad) = pulses.iter().find(|q| !(q.power_w >= 0.0)) {
        return Err(Error::invalid(
            "power",
            format!("optical power must be >= 0, got {} W", bad.power_w),
        ));
    }
    if let Some(bad) = pulses.iter().find(|q| !(q.width_ps > 0.0)) {
        return Err(Error::invalid("width", format!("must be > 0, got {} ps", bad.width_ps)));
    }
    let len = ((duration_ps * sample_rate_hz / PS_PER_S).ceil() as usize).max(1);
    let mut out = vec![0.0; len];
    add_rc_rects(
        &mut out,
        0.0,
        sample_rate_hz,
        pulses
            .iter()
            .map(|q| (q.t_ps, q.width_ps, q.power_w * p.responsivity_v_per_w)),
        p.frontend_risetime_ps,
    );
    Waveform::new(sample_rate_hz, 0.0, out)
}

pub fn write_events_csv<W: Write>(events: &[AvalancheEvent], mut w: W) -> std::io::Result<()> {
    writeln!(w, "gate_index,t_ps,cause")?;
    for e in events {
        writeln!(w, "{},{},{}", e.gate_index, e.t_ps, e.cause)?;
    }
    Ok(())
}

pub fn read_events_csv<R: BufRead>(r: R) -> Result<Vec<AvalancheEvent>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "gate_index,t_ps,cause" {
                return Err(Error::Parse {
                    line: 1,
                    reason: format!("unexpected header {line:?}"),
                });
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let bad = |reason: String| Error::Parse { line: i + 1, reason };
        let mut it = line.split(',');
        let (Some(g), Some(t), Some(c), None) = (it.next(), it.next(), it.next(), it.next()) else {
            return Err(bad("expected 3 fields".into()));
        };
        out.push(AvalancheEvent {
            gate_index: g.trim().parse().map_err(|e| bad(format!("gate_index: {e}")))?,
            t_ps: t.trim().parse().map_err(|e| bad(format!("t_ps: {e}")))?,
            cause: c.trim().parse().map_err(|_| bad(format!("unknown cause {c:?}")))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const FS: f64 = 10e9;

    #[test]
    fn validation_catches_bad_configs() {
        assert!(GateConfig::default().validate().is_ok());
        let g = GateConfig { t_p_ps: 5000.0, ..Default::default() };
        assert!(g.validate().is_err());
        let g = GateConfig { v_p: 2.0, ..Default::default() };
        assert!(g.validate().is_err());
        let l = LaserConfig { f_p_hz: 3e7, ..Default::default() };
        assert!(l.validate(&GateConfig::default()).is_err());
        assert_eq!(LaserConfig::default().gates_per_pulse(&GateConfig::default()).unwrap(), 4);
        let p = ApdParams { eta_peak: 1.5, ..Default::default() };
        assert!(p.validate().is_err());
    }

    #[test]
    fn flat_gate_without_pulse() {
        let g = GateConfig { v_p: 0.0, v_br: 50.0, ..Default::default() };
        let w = gen_gate_waveform(&g, 3, FS).unwrap();
        assert!(w.samples().iter().all(|&v| v == 60.0));
    }

    #[test]
    fn square_gate_geometry() {
        let g = GateConfig::default();
        let w = gen_gate_waveform(&g, 4, FS).unwrap();
        assert_eq!(w.len(), 200);
        let high: Vec<usize> = (0..w.len()).filter(|&i| w.samples()[i] > 62.0).collect();
        assert_eq!(high.len(), 36);
        for k in 0..4 {
            let in_gate: Vec<usize> = high.iter().copied().filter(|i| i / 50 == k).collect();
            assert_eq!(in_gate.len(), 9);
            let mid = (in_gate[0] + in_gate[8]) as f64 / 2.0 * 100.0;
            assert_relative_eq!(mid, g.center_ps(k as u64), epsilon = 1e-9);
        }
        assert!(gen_gate_waveform(&GateConfig { t_p_ps: 6000.0, ..g }, 1, FS).is_err());
    }

    #[test]
    fn sine_gate_formula() {
        let g = GateConfig { shape: GateShape::Sine, ..Default::default() };
        let w = gen_gate_waveform(&g, 2, FS).unwrap();
        for (i, v) in w.samples().iter().enumerate() {
            let t = i as f64 * 100.0e-12;
            let want = 60.0 + 2.0 * (1.0 + (std::f64::consts::TAU * 2e8 * t).sin());
            assert_relative_eq!(*v, want, epsilon = 1e-9);
        }
    }

    #[test]
    fn capacitive_response_shapes() {
        let p = ApdParams::default();
        let flat = Waveform::new(FS, 0.0, vec![60.0; 100]).unwrap();
        assert!(capacitive_response(&flat, &p).unwrap().samples().iter().all(|&v| v == 0.0));

        let g = GateConfig::default();
        let cap = capacitive_response(&gen_gate_waveform(&g, 2, FS).unwrap(), &p).unwrap();
        let s = &cap.samples()[..50];
        let imax = (0..50).max_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        let imin = (0..50).min_by(|&a, &b| s[a].total_cmp(&s[b])).unwrap();
        assert!(s[imax] > 0.1 && s[imin] < -0.1);
        assert!(imax < 25 && imin > 25, "rising edge positive, falling edge negative");
    }

    #[test]
    fn sine_gate_gives_sine_response() {
        let p = ApdParams::default();
        let g = GateConfig { shape: GateShape::Sine, ..Default::default() };
        let cap = capacitive_response(&gen_gate_waveform(&g, 8, FS).unwrap(), &p).unwrap();
        // Fit a*sin + b*cos over whole periods after the filter settles.
        let s = &cap.samples()[100..350];
        let w = std::f64::consts::TAU / 50.0;
        let (mut a, mut b) = (0.0, 0.0);
        for (k, v) in s.iter().enumerate() {
            let ph = w * (k + 100) as f64;
            a += v * ph.sin() * 2.0 / s.len() as f64;
            b += v * ph.cos() * 2.0 / s.len() as f64;
        }
        let amp = a.hypot(b);
        let mut err: f64 = 0.0;
        for (k, v) in s.iter().enumerate() {
            let ph = w * (k + 100) as f64;
            err = err.max((v - a * ph.sin() - b * ph.cos()).abs());
        }
        assert!(amp > 0.01);
        assert!(err < 1e-6 * amp.max(1.0), "residual {err} vs amplitude {amp}");
    }

    #[test]
    fn rc_rect_matches_discrete_filter_on_grid() {
        // A rectangle aligned to samples is exactly what the discrete filter sees.
        let mut x = vec![0.0; 60];
        x[10] = 0.1;
        let wf = Waveform::new(FS, 0.0, x).unwrap();
        let y = waveform::band_limit(&wf, 250.0).unwrap();
        let mut z = vec![0.0; 60];
        add_rc_rects(&mut z, 0.0, FS, [(900.0, 100.0, 0.1)], 250.0);
        for (a, b) in y.samples().iter().zip(&z) {
            assert_relative_eq!(*a, *b, epsilon = 1e-15);
        }
    }

    #[test]
    fn synthesize_without_events_is_capacitive_response() {
        let p = ApdParams::default();
        let g = gen_gate_waveform(&GateConfig::default(), 4, FS).unwrap();
        assert_eq!(synthesize_output(&[], &g, &p).unwrap(), capacitive_response(&g, &p).unwrap());
        let outside = AvalancheEvent { gate_index: 9, t_ps: 47_500.0, cause: Cause::Dark };
        assert!(synthesize_output(&[outside], &g, &p).is_err());
    }

    #[test]
    fn no_sources_no_events() {
        let p = ApdParams { dark_rate_per_ns: 0.0, trap_mean: 0.0, ..Default::default() };
        let l = LaserConfig { mu: 0.0, ..Default::default() };
        let ev = simulate_events(&GateConfig::default(), &l, &p, 1_000_000, 1).unwrap();
        assert!(ev.is_empty());
    }

    #[test]
    fn saturating_light_clicks_every_illuminated_gate() {
        let p = ApdParams { dark_rate_per_ns: 0.0, trap_mean: 0.0, ..Default::default() };
        let l = LaserConfig { mu: 1e4, ..Default::default() };
        let ev = simulate_events(&GateConfig::default(), &l, &p, 4000, 1).unwrap();
        assert_eq!(ev.len(), 1000);
        assert!(ev.iter().all(|e| e.gate_index % 4 == 0 && e.cause == Cause::Photon));
    }

    #[test]
    fn photon_efficiency_overlap() {
        let p = ApdParams { eta_peak: 0.5, ..Default::default() };
        let narrow = LaserConfig { pulse_fwhm_ps: 0.0, ..Default::default() };
        assert_relative_eq!(p.photon_efficiency(&narrow), 0.5, epsilon = 1e-15);
        let off = LaserConfig { pulse_fwhm_ps: 0.0, offset_ps: 100.0, ..Default::default() };
        assert_relative_eq!(p.photon_efficiency(&off), 0.25, epsilon = 1e-12);
        // Equal widths: overlap sqrt(1/2).
        let eq = LaserConfig { pulse_fwhm_ps: 200.0, ..Default::default() };
        assert_relative_eq!(p.photon_efficiency(&eq), 0.5 / 2f64.sqrt(), epsilon = 1e-12);
    }

    #[test]
    fn linear_mode_basics() {
        let p = ApdParams::default();
        let z = linear_mode_response(&[], &p, FS, 10_000.0).unwrap();
        assert!(z.samples().iter().all(|&v| v == 0.0));
        let one = OpticalPulse { t_ps: 1000.0, power_w: 1e-3, width_ps: 500.0 };
        let two = OpticalPulse { power_w: 2e-3, ..one };
        let a = linear_mode_response(&[one], &p, FS, 10_000.0).unwrap();
        let b = linear_mode_response(&[two], &p, FS, 10_000.0).unwrap();
        for (x, y) in a.samples().iter().zip(b.samples()) {
            assert_relative_eq!(2.0 * x, *y, epsilon = 1e-15);
        }
        let neg = OpticalPulse { power_w: -1.0, ..one };
        assert!(linear_mode_response(&[neg], &p, FS, 10_000.0).is_err());
    }

    #[test]
    fn events_csv_round_trip() {
        let ev = simulate_events(
            &GateConfig::default(),
            &LaserConfig::default(),
            &ApdParams::default(),
            10_000,
            5,
        )
        .unwrap();
        assert!(!ev.is_empty());
        let mut buf = Vec::new();
        write_events_csv(&ev, &mut buf).unwrap();
        assert!(buf.starts_with(b"gate_index,t_ps,cause\n"));
        assert_eq!(read_events_csv(buf.as_slice()).unwrap(), ev);
    }
}
