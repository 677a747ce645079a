//! Readout electronics: the self-differencing circuit, its tuner, the
//! comparator and pulse stretcher, and the notch-filter alternative used with
//! sine gating.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::waveform::{self, GainDb, TimeWindow, Waveform, PS_PER_S};

#[derive(Debug, Clone, PartialEq)]
pub struct SdConfig {
    /// Loss of the power splitter on each output.
    pub splitter_loss_db: f64,
    pub delay_periods: u32,
    /// Extra delay on top of `delay_periods` gate periods, may be negative.
    pub delay_fine_ps: f64,
    /// Extra attenuation on the undelayed arm, matched to the delay line.
    pub trim_db: f64,
    pub diffamp_gain_db: f64,
    pub diffamp_risetime_ps: f64,
    /// Gain between the differential amplifier and the comparator.
    pub post_gain_db: f64,
    pub threshold_mv: f64,
    pub out_pulse_ps: f64,
    pub stretch_ns: f64,
    /// High-frequency loss of the delay line.
    pub delay_line_loss_db: f64,
    /// Below this frequency the delay line loses less; 0 makes the loss flat.
    pub delay_line_corner_hz: f64,
}

impl Default for SdConfig {
    fn default() -> Self {
        SdConfig {
            splitter_loss_db: 3.0,
            delay_periods: 1,
            delay_fine_ps: 0.0,
            trim_db: 0.99,
            diffamp_gain_db: 10.0,
            diffamp_risetime_ps: 250.0,
            post_gain_db: 12.0,
            threshold_mv: 80.0,
            out_pulse_ps: 217.0,
            stretch_ns: 5.0,
            delay_line_loss_db: 1.31,
            delay_line_corner_hz: 2e8,
        }
    }
}

impl SdConfig {
    pub fn validate(&self) -> Result<()> {
        if self.delay_periods < 1 {
            return Err(Error::invalid("sd.delay_periods", "must be >= 1"));
        }
        if !(self.threshold_mv > 0.0) {
            return Err(Error::invalid("sd.threshold_mv", "must be > 0"));
        }
        if !(self.splitter_loss_db >= 0.0) {
            return Err(Error::invalid("sd.splitter_loss_db", "must be >= 0"));
        }
        if !(self.diffamp_risetime_ps > 0.0) {
            return Err(Error::invalid("sd.diffamp_risetime_ps", "must be > 0"));
        }
        if !(self.out_pulse_ps > 0.0) {
            return Err(Error::invalid("sd.out_pulse_ps", "must be > 0"));
        }
        if !(self.stretch_ns > 0.0) {
            return Err(Error::invalid("sd.stretch_ns", "must be > 0"));
        }
        if !(self.delay_line_corner_hz >= 0.0) {
            return Err(Error::invalid("sd.delay_line_corner_hz", "must be >= 0"));
        }
        for (name, v) in [
            ("sd.delay_fine_ps", self.delay_fine_ps),
            ("sd.trim_db", self.trim_db),
            ("sd.diffamp_gain_db", self.diffamp_gain_db),
            ("sd.post_gain_db", self.post_gain_db),
            ("sd.delay_line_loss_db", self.delay_line_loss_db),
        ] {
            if !v.is_finite() {
                return Err(Error::invalid(name, "must be finite"));
            }
        }
        Ok(())
    }

    /// Total delay of arm B.
    pub fn delay_ps(&self, gate_period_ps: f64) -> f64 {
        self.delay_periods as f64 * gate_period_ps + self.delay_fine_ps
    }

    /// Gain from the APD output to the differential amplifier output along the
    /// undelayed arm.
    pub fn arm_a_gain(&self) -> GainDb {
        GainDb(self.diffamp_gain_db - self.splitter_loss_db - self.trim_db)
    }

    pub fn threshold_v(&self) -> f64 {
        self.threshold_mv * 1e-3
    }
}

/// Comparator or stretched output pulse.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DigitalPulse {
    pub t_rise_ps: f64,
    pub width_ps: f64,
}

/// Delay-line transfer: full loss at high frequency, less below the corner.
fn delay_line(samples: &mut [f64], period_ps: f64, cfg: &SdConfig) {
    let g = GainDb(-cfg.delay_line_loss_db).ratio();
    if cfg.delay_line_corner_hz == 0.0 {
        samples.iter_mut().for_each(|s| *s *= g);
        return;
    }
    let tau = PS_PER_S / (std::f64::consts::TAU * cfg.delay_line_corner_hz);
    let mut lp = samples.to_vec();
    waveform::low_pass_in_place(&mut lp, period_ps, tau);
    for (s, l) in samples.iter_mut().zip(lp) {
        *s = g * *s + (1.0 - g) * l;
    }
}

fn delay_shift(cfg: &SdConfig, gate_period_ps: f64, sample_rate: f64) -> Result<usize> {
    let d = cfg.delay_ps(gate_period_ps);
    if d < 0.0 {
        return Err(Error::invalid("sd.delay_fine_ps", "total delay is negative"));
    }
    Ok((d * sample_rate / PS_PER_S).round() as usize)
}

/// The two chain arms before the differential amplifier's band limit and gain.
/// Arm A is returned unit-scaled (no trim) so callers can apply any trim.
fn arms(apd_out: &Waveform, cfg: &SdConfig, gate_period_ps: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let need = (cfg.delay_periods as f64 + 1.0) * gate_period_ps;
    if apd_out.span().duration_ps() < need * (1.0 - 1e-12) {
        return Err(Error::TooShort(format!(
            "self-differencing needs at least {need} ps of signal, got {} ps",
            apd_out.span().duration_ps()
        )));
    }
    let shift = delay_shift(cfg, gate_period_ps, apd_out.sample_rate())?;
    let split = GainDb(-cfg.splitter_loss_db).ratio();
    let a: Vec<f64> = apd_out.samples().iter().map(|v| v * split).collect();
    let mut b = a.clone();
    delay_line(&mut b, apd_out.sample_period_ps(), cfg);
    let b = waveform::shift_samples(&b, shift);
    Ok((a, b))
}

/// Splits, delays one copy by `delay_periods` gate periods (plus the fine
/// delay) through the delay line, trims the other, and takes
/// `arm A - arm B` through the band-limited differential amplifier.
///
/// A detection in gate n shows up as a positive peak in gate n and a negative
/// echo in gate n + delay_periods. The output is on the input's time grid.
pub fn self_difference(apd_out: &Waveform, cfg: &SdConfig, gate_period_ps: f64) -> Result<Waveform> {
    let (a, b) = arms(apd_out, cfg, gate_period_ps)?;
    let trim = GainDb(-cfg.trim_db).ratio();
    let diff: Vec<f64> = a.iter().zip(&b).map(|(x, y)| trim * x - y).collect();
    let out = waveform::band_limit(&apd_out.with_samples(diff), cfg.diffamp_risetime_ps)?;
    Ok(waveform::scale(&out, GainDb(cfg.diffamp_gain_db)))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tuned {
    pub config: SdConfig,
    /// Input-referred suppression of the reference over the evaluation window.
    pub suppression_db: f64,
    /// Peak-to-peak residual at the differential amplifier output.
    pub residual_pp_v: f64,
}

/// Window the tuner scores on: everything after the first
/// `delay_periods + 1` gate periods.
pub fn tuning_window(reference: &Waveform, cfg: &SdConfig, gate_period_ps: f64) -> TimeWindow {
    let span = reference.span();
    TimeWindow::new(
        span.start_ps + (cfg.delay_periods as f64 + 1.0) * gate_period_ps,
        span.end_ps,
    )
}

/// `20 log10(pp(input) / pp(residual / G))` where G is the arm-A gain.
pub fn input_referred_suppression(
    input: &Waveform,
    residual: &Waveform,
    cfg: &SdConfig,
    window: &TimeWindow,
) -> Result<f64> {
    let referred = waveform::scale(residual, -cfg.arm_a_gain());
    waveform::suppression_db(input, &referred, window)
}

/// Grid search for the trim and fine delay that minimize the residual of an
/// event-free reference.
///
/// The fine delay is tried at the configured value and one sample either side;
/// the trim from -3 dB to +3 dB around the configured value in 0.01 dB steps.
/// Candidates are visited in order of increasing adjustment and only a strictly
/// smaller residual replaces the incumbent, so ties keep the smallest change.
pub fn tune(reference: &Waveform, cfg: &SdConfig, gate_period_ps: f64) -> Result<Tuned> {
    cfg.validate()?;
    let window = tuning_window(reference, cfg, gate_period_ps);
    let range = reference.index_range(&window);
    if range.is_empty() {
        return Err(Error::TooShort(
            "reference is too short to leave a tuning window".into(),
        ));
    }
    let step = reference.sample_period_ps();
    let gain = GainDb(cfg.diffamp_gain_db).ratio();
    let mut best: Option<(f64, SdConfig)> = None;
    for fine_steps in [0.0, -1.0, 1.0] {
        let mut trial = cfg.clone();
        trial.delay_fine_ps = cfg.delay_fine_ps + fine_steps * step;
        if trial.delay_ps(gate_period_ps) < 0.0 {
            continue;
        }
        let (a, b) = arms(reference, &trial, gate_period_ps)?;
        // The amplifier is linear, so filter each arm once and mix per trim.
        let fa = waveform::band_limit(&reference.with_samples(a), cfg.diffamp_risetime_ps)?;
        let fb = waveform::band_limit(&reference.with_samples(b), cfg.diffamp_risetime_ps)?;
        let fa = &fa.samples()[range.clone()];
        let fb = &fb.samples()[range.clone()];
        for k in trim_steps() {
            let trim_db = cfg.trim_db + k as f64 * 0.01;
            let t = GainDb(-trim_db).ratio();
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for (x, y) in fa.iter().zip(fb) {
                let v = gain * (t * x - y);
                lo = lo.min(v);
                hi = hi.max(v);
            }
            let pp = hi - lo;
            if best.as_ref().is_none_or(|(b, _)| pp < *b) {
                let mut c = trial.clone();
                c.trim_db = trim_db;
                best = Some((pp, c));
            }
        }
    }
    let (_, config) = best.ok_or_else(|| Error::invalid("sd.delay_fine_ps", "no admissible delay"))?;
    // Re-run the chosen point through the public path so the reported figures
    // are exactly what self_difference produces.
    let residual = self_difference(reference, &config, gate_period_ps)?;
    let residual_pp_v = waveform::peak_to_peak(&residual, &window)?;
    let suppression_db = input_referred_suppression(reference, &residual, &config, &window)?;
    Ok(Tuned {
        config,
        suppression_db,
        residual_pp_v,
    })
}

/// 0, -1, +1, -2, +2, ... -300, +300
fn trim_steps() -> impl Iterator<Item = i32> {
    std::iter::once(0).chain((1..=300).flat_map(|k| [-k, k]))
}

/// First rising threshold crossing in one gate period.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Crossing {
    pub gate: i64,
    pub t_ps: f64,
}

/// First rising crossing of `threshold` per gate period `[nT, (n+1)T)` in
/// `samples * gain`, with the crossing time linearly interpolated.
pub fn find_crossings(
    samples: &[f64],
    t0_ps: f64,
    sample_rate: f64,
    gain: f64,
    threshold: f64,
    gate_period_ps: f64,
) -> Vec<Crossing> {
    let mut out: Vec<Crossing> = Vec::new();
    let dt = PS_PER_S / sample_rate;
    for i in 1..samples.len() {
        let (a, b) = (samples[i - 1] * gain, samples[i] * gain);
        if !(a < threshold && b >= threshold) {
            continue;
        }
        let ta = t0_ps + (i - 1) as f64 * PS_PER_S / sample_rate;
        let t = ta + (threshold - a) / (b - a) * dt;
        let gate = (t / gate_period_ps).floor() as i64;
        if out.last().is_some_and(|c| c.gate == gate) {
            continue;
        }
        out.push(Crossing { gate, t_ps: t });
    }
    out
}

/// Gate-synchronous stretcher: a crossing in gate m is dropped while the
/// previous output pulse (started at t) is still high at the start of gate m,
/// i.e. while `m * T < t + stretch`.
pub fn stretch(crossings: &[Crossing], cfg: &SdConfig, gate_period_ps: f64) -> Vec<DigitalPulse> {
    let width = cfg.stretch_ns * 1e3;
    let mut out: Vec<DigitalPulse> = Vec::new();
    for c in crossings {
        if let Some(last) = out.last() {
            if (c.gate as f64) * gate_period_ps < last.t_rise_ps + width {
                continue;
            }
        }
        out.push(DigitalPulse {
            t_rise_ps: c.t_ps,
            width_ps: width,
        });
    }
    out
}

/// Comparator output before stretching: one `out_pulse_ps` pulse per gate
/// with a rising crossing of the threshold by `processed * post_gain`.
pub fn comparator(processed: &Waveform, cfg: &SdConfig, gate_period_ps: f64) -> Vec<DigitalPulse> {
    crossings_of(processed, cfg, gate_period_ps)
        .into_iter()
        .map(|c| DigitalPulse {
            t_rise_ps: c.t_ps,
            width_ps: cfg.out_pulse_ps,
        })
        .collect()
}

fn crossings_of(processed: &Waveform, cfg: &SdConfig, gate_period_ps: f64) -> Vec<Crossing> {
    find_crossings(
        processed.samples(),
        processed.t0(),
        processed.sample_rate(),
        GainDb(cfg.post_gain_db).ratio(),
        cfg.threshold_v(),
        gate_period_ps,
    )
}

/// Output pulse stream: comparator pulses lengthened to `stretch_ns`, with
/// crossings swallowed while the stretched pulse is high.
pub fn discriminate(processed: &Waveform, cfg: &SdConfig, gate_period_ps: f64) -> Vec<DigitalPulse> {
    stretch(&crossings_of(processed, cfg, gate_period_ps), cfg, gate_period_ps)
}

#[derive(Debug, Clone, PartialEq)]
pub struct NotchConfig {
    pub f0_hz: f64,
    pub n_harmonics: u32,
    pub q: f64,
}

impl Default for NotchConfig {
    fn default() -> Self {
        NotchConfig {
            f0_hz: 200e6,
            n_harmonics: 3,
            q: 10.0,
        }
    }
}

/// Cascade of second-order notches at `f0, 2 f0, ..., n f0`.
///
/// Each section starts in the steady state of the first sample so a constant
/// input passes through untouched.
pub fn notch_filter_chain(apd_out: &Waveform, n: &NotchConfig) -> Result<Waveform> {
    if !(n.f0_hz > 0.0) {
        return Err(Error::invalid("notch.f0_hz", "must be > 0"));
    }
    if n.n_harmonics < 1 {
        return Err(Error::invalid("notch.n_harmonics", "must be >= 1"));
    }
    if !(n.q > 0.0) {
        return Err(Error::invalid("notch.q", "must be > 0"));
    }
    let fs = apd_out.sample_rate();
    let top = n.f0_hz * n.n_harmonics as f64;
    if fs <= 2.0 * top {
        return Err(Error::Domain(format!(
            "notch at {top} Hz is above the Nyquist frequency of {} Hz",
            fs / 2.0
        )));
    }
    let mut x = apd_out.samples().to_vec();
    for h in 1..=n.n_harmonics {
        let w0 = std::f64::consts::TAU * n.f0_hz * h as f64 / fs;
        let alpha = w0.sin() / (2.0 * n.q);
        let a0 = 1.0 + alpha;
        let (b0, b1, b2) = (1.0 / a0, -2.0 * w0.cos() / a0, 1.0 / a0);
        let (a1, a2) = (-2.0 * w0.cos() / a0, (1.0 - alpha) / a0);
        let x0 = x[0];
        let mut s2 = (b2 - a2) * x0;
        let mut s1 = (b1 - a1) * x0 + s2;
        for v in x.iter_mut() {
            let xin = *v;
            let y = b0 * xin + s1;
            s1 = b1 * xin - a1 * y + s2;
            s2 = b2 * xin - a2 * y;
            *v = y;
        }
    }
    Ok(apd_out.with_samples(x))
}

pub fn write_pulses_csv<W: Write>(pulses: &[DigitalPulse], mut w: W) -> std::io::Result<()> {
    writeln!(w, "t_rise_ps,width_ps")?;
    for p in pulses {
        writeln!(w, "{},{}", p.t_rise_ps, p.width_ps)?;
    }
    Ok(())
}

pub fn read_pulses_csv<R: BufRead>(r: R) -> Result<Vec<DigitalPulse>> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if i == 0 {
            if line.trim() != "t_rise_ps,width_ps" {
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
        let (t, w) = line.split_once(',').ok_or_else(|| bad("expected 2 fields".into()))?;
        out.push(DigitalPulse {
            t_rise_ps: t.trim().parse().map_err(|e| bad(format!("t_rise_ps: {e}")))?,
            width_ps: w.trim().parse().map_err(|e| bad(format!("width_ps: {e}")))?,
        });
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    const FS: f64 = 10e9;
    const T: f64 = 5000.0;

    fn flat_cfg() -> SdConfig {
        SdConfig {
            trim_db: 0.0,
            delay_line_loss_db: 0.0,
            delay_line_corner_hz: 0.0,
            ..Default::default()
        }
    }

    fn bump(len: usize, at: usize) -> Waveform {
        let mut s = vec![0.0; len];
        s[at] = 0.1;
        Waveform::new(FS, 0.0, s).unwrap()
    }

    #[test]
    fn zero_in_zero_out() {
        let z = Waveform::zeros(FS, 0.0, 200).unwrap();
        let out = self_difference(&z, &SdConfig::default(), T).unwrap();
        assert!(out.samples().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn too_short_is_an_error() {
        let z = Waveform::zeros(FS, 0.0, 80).unwrap();
        assert!(matches!(
            self_difference(&z, &SdConfig::default(), T),
            Err(Error::TooShort(_))
        ));
    }

    #[test]
    fn event_gives_positive_peak_then_equal_negative_echo() {
        let out = self_difference(&bump(300, 75), &flat_cfg(), T).unwrap();
        let s = out.samples();
        let g1 = &s[50..100];
        let g2 = &s[100..150];
        let pos = g1.iter().cloned().fold(f64::MIN, f64::max);
        let neg = g2.iter().cloned().fold(f64::MAX, f64::min);
        assert!(pos > 0.0 && neg < 0.0);
        assert!(g1.iter().all(|&v| v >= 0.0), "no negative lobe in the event gate");
        assert_relative_eq!(pos, -neg, max_relative = 0.05);
    }

    #[test]
    fn matched_chain_cancels_periodic_input_exactly() {
        let w = Waveform::from_fn(FS, 0.0, 500, |t| ((t / T) * std::f64::consts::TAU).sin() + 0.2)
            .unwrap();
        let out = self_difference(&w, &flat_cfg(), T).unwrap();
        // After the delay fills, the input to the amplifier is exactly zero
        // and the filter tail from the start-up transient has decayed.
        for v in &out.samples()[150..] {
            assert!(v.abs() < 1e-9, "{v}");
        }
    }

    #[test]
    fn tuner_recovers_flat_loss() {
        let cfg = SdConfig {
            trim_db: 0.0,
            delay_line_loss_db: 1.31,
            delay_line_corner_hz: 0.0,
            ..Default::default()
        };
        let w = Waveform::from_fn(FS, 0.0, 600, |t| {
            let ph = t % T;
            if (1000.0..1300.0).contains(&ph) {
                0.3
            } else if (1400.0..1700.0).contains(&ph) {
                -0.3
            } else {
                0.0
            }
        })
        .unwrap();
        let tuned = tune(&w, &cfg, T).unwrap();
        assert_relative_eq!(tuned.config.trim_db, 1.31, epsilon = 0.02);
        assert_eq!(tuned.config.delay_fine_ps, 0.0);
        assert!(tuned.suppression_db > 40.0);

        let again = tune(&w, &tuned.config, T).unwrap();
        assert_eq!(again.config, tuned.config);
    }

    #[test]
    fn tuner_recovers_planted_delay_offset() {
        let cfg = flat_cfg();
        let w = Waveform::from_fn(FS, 0.0, 600, |t| {
            let ph = t % T;
            if (1000.0..1300.0).contains(&ph) {
                0.3
            } else {
                0.0
            }
        })
        .unwrap();
        let off = SdConfig { delay_fine_ps: 100.0, ..cfg.clone() };
        let tuned = tune(&w, &off, T).unwrap();
        assert_eq!(tuned.config.delay_fine_ps, 0.0);
        assert_eq!(tuned.config.trim_db, 0.0);
        assert!(tuned.suppression_db >= 100.0);
    }

    #[test]
    fn crossings_latch_once_per_gate() {
        let mut s = vec![0.0; 100];
        s[10] = 1.0;
        s[12] = 1.0;
        s[60] = 1.0;
        let c = find_crossings(&s, 0.0, FS, 1.0, 0.5, T);
        assert_eq!(c.len(), 2);
        assert_relative_eq!(c[0].t_ps, 950.0);
        assert_eq!(c[1].gate, 1);
    }

    #[test]
    fn negative_peaks_never_fire() {
        let w = Waveform::new(FS, 0.0, vec![0.0, -1.0, 0.0, -1.0]).unwrap();
        assert!(discriminate(&w, &SdConfig::default(), T).is_empty());
    }

    #[test]
    fn stretcher_swallows_next_gate_only() {
        let cfg = SdConfig::default();
        let cs: Vec<Crossing> = (0..6)
            .map(|g| Crossing { gate: g, t_ps: g as f64 * T + 2700.0 })
            .collect();
        let out = stretch(&cs, &cfg, T);
        let gates: Vec<i64> = out.iter().map(|p| (p.t_rise_ps / T) as i64).collect();
        assert_eq!(gates, vec![0, 2, 4]);
        assert!(out.iter().all(|p| p.width_ps == 5000.0));
    }

    #[test]
    fn notch_kills_fundamental_and_passes_dc() {
        let n = NotchConfig::default();
        let sine = Waveform::from_fn(FS, 0.0, 20_000, |t| (std::f64::consts::TAU * 2e8 * t * 1e-12).sin())
            .unwrap();
        let y = notch_filter_chain(&sine, &n).unwrap();
        let tail = TimeWindow::new(1.5e6, 2e6);
        let sup = waveform::suppression_db(&sine, &y, &tail).unwrap();
        assert!(sup >= 40.0, "{sup}");

        let dc = Waveform::new(FS, 0.0, vec![0.5; 1000]).unwrap();
        let y = notch_filter_chain(&dc, &n).unwrap();
        assert!(y.samples().iter().all(|v| (v - 0.5).abs() < 0.0025));

        let slow = Waveform::new(1e9, 0.0, vec![0.0; 10]).unwrap();
        assert!(matches!(notch_filter_chain(&slow, &n), Err(Error::Domain(_))));
    }

    #[test]
    fn pulses_csv_round_trip() {
        let p = vec![
            DigitalPulse { t_rise_ps: 2712.345678901234, width_ps: 5000.0 },
            DigitalPulse { t_rise_ps: 12_700.0, width_ps: 5000.0 },
        ];
        let mut buf = Vec::new();
        write_pulses_csv(&p, &mut buf).unwrap();
        assert_eq!(read_pulses_csv(buf.as_slice()).unwrap(), p);
    }
}
