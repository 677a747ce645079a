//! Uniformly sampled voltage signals and the handful of linear operations the
//! detector chain is built from.
//!
//! Times are picoseconds, voltages are volts, sample rates are Hz. Sample `i`
//! of a waveform sits at `t0 + i * 1e12 / sample_rate`, computed directly from
//! the index so long records carry no accumulated drift.

use std::fmt;
use std::io::{BufRead, Write};
use std::ops::Range;

use crate::error::{Error, Result};

/// Suppression reported when a residual is identically zero.
pub const SUPPRESSION_CEILING_DB: f64 = 120.0;

/// Picoseconds per second.
pub const PS_PER_S: f64 = 1e12;

/// A gain (positive) or attenuation (negative) in decibels, applied to voltages.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct GainDb(pub f64);

impl GainDb {
    pub fn from_ratio(ratio: f64) -> Self {
        GainDb(20.0 * ratio.log10())
    }

    /// Voltage ratio `10^(dB/20)`.
    pub fn ratio(self) -> f64 {
        10f64.powf(self.0 / 20.0)
    }

    pub fn db(self) -> f64 {
        self.0
    }
}

impl std::ops::Neg for GainDb {
    type Output = GainDb;
    fn neg(self) -> GainDb {
        GainDb(-self.0)
    }
}

impl std::ops::Add for GainDb {
    type Output = GainDb;
    fn add(self, rhs: GainDb) -> GainDb {
        GainDb(self.0 + rhs.0)
    }
}

impl fmt::Display for GainDb {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} dB", self.0)
    }
}

/// Half-open time interval `[start_ps, end_ps)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TimeWindow {
    pub start_ps: f64,
    pub end_ps: f64,
}

impl TimeWindow {
    pub fn new(start_ps: f64, end_ps: f64) -> Self {
        TimeWindow { start_ps, end_ps }
    }

    pub fn duration_ps(&self) -> f64 {
        self.end_ps - self.start_ps
    }

    pub fn contains(&self, t_ps: f64) -> bool {
        t_ps >= self.start_ps && t_ps < self.end_ps
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Waveform {
    sample_rate: f64,
    t0: f64,
    samples: Vec<f64>,
}

impl Waveform {
    pub fn new(sample_rate_hz: f64, t0_ps: f64, samples: Vec<f64>) -> Result<Self> {
        if !(sample_rate_hz > 0.0 && sample_rate_hz.is_finite()) {
            return Err(Error::invalid("sample_rate", "must be positive and finite"));
        }
        if samples.is_empty() {
            return Err(Error::invalid("samples", "a waveform needs at least one sample"));
        }
        if !t0_ps.is_finite() {
            return Err(Error::invalid("t0", "must be finite"));
        }
        Ok(Waveform {
            sample_rate: sample_rate_hz,
            t0: t0_ps,
            samples,
        })
    }

    pub fn zeros(sample_rate_hz: f64, t0_ps: f64, len: usize) -> Result<Self> {
        Self::new(sample_rate_hz, t0_ps, vec![0.0; len])
    }

    /// Samples `f(t)` on the grid.
    pub fn from_fn(
        sample_rate_hz: f64,
        t0_ps: f64,
        len: usize,
        f: impl Fn(f64) -> f64,
    ) -> Result<Self> {
        let mut wf = Self::zeros(sample_rate_hz, t0_ps, len)?;
        for i in 0..len {
            wf.samples[i] = f(wf.time_at(i));
        }
        Ok(wf)
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn t0(&self) -> f64 {
        self.t0
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn samples_mut(&mut self) -> &mut [f64] {
        &mut self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn sample_period_ps(&self) -> f64 {
        PS_PER_S / self.sample_rate
    }

    pub fn time_at(&self, i: usize) -> f64 {
        self.t0 + (i as f64 * PS_PER_S) / self.sample_rate
    }

    /// Time of the last sample.
    pub fn end_time(&self) -> f64 {
        self.time_at(self.samples.len() - 1)
    }

    /// Span covered when every sample is held for one period.
    pub fn span(&self) -> TimeWindow {
        TimeWindow::new(self.t0, self.time_at(self.samples.len()))
    }

    /// Indices of the samples whose times fall inside `window`.
    pub fn index_range(&self, window: &TimeWindow) -> Range<usize> {
        let n = self.samples.len();
        let first = self.first_index_at_or_after(window.start_ps).min(n);
        let end = self.first_index_at_or_after(window.end_ps).min(n);
        first..end.max(first)
    }

    fn first_index_at_or_after(&self, t_ps: f64) -> usize {
        let guess = ((t_ps - self.t0) * self.sample_rate / PS_PER_S).ceil();
        if guess <= 0.0 {
            return 0;
        }
        let mut i = guess as usize;
        // Float rounding can put the guess one sample off either way.
        while i > 0 && self.time_at(i - 1) >= t_ps {
            i -= 1;
        }
        while self.time_at(i) < t_ps {
            i += 1;
        }
        i
    }

    pub fn window(&self, window: &TimeWindow) -> Result<&[f64]> {
        let r = self.index_range(window);
        if r.is_empty() {
            return Err(Error::EmptyWindow {
                start_ps: window.start_ps,
                end_ps: window.end_ps,
            });
        }
        Ok(&self.samples[r])
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Waveform {
        Waveform {
            sample_rate: self.sample_rate,
            t0: self.t0,
            samples: self.samples.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn with_samples(&self, samples: Vec<f64>) -> Waveform {
        debug_assert_eq!(samples.len(), self.samples.len());
        Waveform {
            sample_rate: self.sample_rate,
            t0: self.t0,
            samples,
        }
    }

    /// Writes the plain-text dump: a header line then one voltage per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(
            w,
            "# sample_rate_hz={} t0_ps={} n={}",
            self.sample_rate,
            self.t0,
            self.samples.len()
        )?;
        for v in &self.samples {
            // 17 significant digits round-trip every f64.
            writeln!(w, "{v:.16e}")?;
        }
        Ok(())
    }

    pub fn to_text(&self) -> String {
        let mut buf = Vec::with_capacity(self.samples.len() * 24 + 64);
        self.write_text(&mut buf).expect("writing to a Vec cannot fail");
        String::from_utf8(buf).expect("dump is ascii")
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Waveform> {
        let mut lines = r.lines();
        let header = lines.next().ok_or(Error::Parse {
            line: 1,
            reason: "empty input".into(),
        })??;
        let (sample_rate, t0, n) = parse_header(&header)?;
        let mut samples = Vec::with_capacity(n);
        for (idx, line) in lines.enumerate() {
            let line = line?;
            let s = line.trim();
            if s.is_empty() {
                continue;
            }
            let v = s.parse::<f64>().map_err(|e| Error::Parse {
                line: idx + 2,
                reason: format!("bad sample {s:?}: {e}"),
            })?;
            samples.push(v);
        }
        if samples.len() != n {
            return Err(Error::Parse {
                line: 1,
                reason: format!("header declares {n} samples, found {}", samples.len()),
            });
        }
        Waveform::new(sample_rate, t0, samples)
    }
}

fn parse_header(header: &str) -> Result<(f64, f64, usize)> {
    let bad = |reason: String| Error::Parse { line: 1, reason };
    let body = header
        .strip_prefix('#')
        .ok_or_else(|| bad("header must start with '#'".into()))?;
    let (mut rate, mut t0, mut n) = (None, None, None);
    for field in body.split_whitespace() {
        let (k, v) = field
            .split_once('=')
            .ok_or_else(|| bad(format!("malformed header field {field:?}")))?;
        match k {
            "sample_rate_hz" => rate = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "t0_ps" => t0 = Some(v.parse::<f64>().map_err(|e| bad(e.to_string()))?),
            "n" => n = Some(v.parse::<usize>().map_err(|e| bad(e.to_string()))?),
            _ => return Err(bad(format!("unknown header field {k:?}"))),
        }
    }
    match (rate, t0, n) {
        (Some(r), Some(t), Some(n)) => Ok((r, t, n)),
        _ => Err(bad("header needs sample_rate_hz, t0_ps and n".into())),
    }
}

/// Result of [`delay`]: the shifted waveform plus the delay actually applied.
#[derive(Debug, Clone, PartialEq)]
pub struct Delayed {
    pub waveform: Waveform,
    pub shift_samples: usize,
    pub applied_ps: f64,
    /// Requested minus applied delay.
    pub residue_ps: f64,
}

/// Shifts `wf` later by `dt_ps`, quantized to the nearest whole sample.
///
/// The time grid and length are kept: the head is zero-filled and samples
/// shifted past the end are dropped.
pub fn delay(wf: &Waveform, dt_ps: f64) -> Result<Delayed> {
    if !(dt_ps >= 0.0) {
        return Err(Error::invalid("delay", format!("must be >= 0, got {dt_ps} ps")));
    }
    let shift = (dt_ps * wf.sample_rate / PS_PER_S).round() as usize;
    let applied_ps = shift as f64 * PS_PER_S / wf.sample_rate;
    Ok(Delayed {
        waveform: wf.with_samples(shift_samples(&wf.samples, shift)),
        shift_samples: shift,
        applied_ps,
        residue_ps: dt_ps - applied_ps,
    })
}

pub(crate) fn shift_samples(samples: &[f64], shift: usize) -> Vec<f64> {
    let n = samples.len();
    let mut out = vec![0.0; n];
    if shift < n {
        out[shift..].copy_from_slice(&samples[..n - shift]);
    }
    out
}

pub fn scale(wf: &Waveform, gain: GainDb) -> Waveform {
    let r = gain.ratio();
    wf.map(|v| v * r)
}

/// Sample offset of `b`'s grid relative to `a`'s, if the grids line up.
fn grid_offset(a: &Waveform, b: &Waveform) -> Result<i64> {
    let rel = (a.sample_rate - b.sample_rate).abs() / a.sample_rate;
    if rel > 1e-12 {
        return Err(Error::Incompatible(format!(
            "sample rates differ: {} Hz vs {} Hz",
            a.sample_rate, b.sample_rate
        )));
    }
    let off = (b.t0 - a.t0) * a.sample_rate / PS_PER_S;
    let k = off.round();
    if (off - k).abs() > 1e-6 {
        return Err(Error::Incompatible(format!(
            "sample grids are misaligned by {} samples",
            off - k
        )));
    }
    Ok(k as i64)
}

fn combine(a: &Waveform, b: &Waveform, op: impl Fn(f64, f64) -> f64) -> Result<Waveform> {
    let k = grid_offset(a, b)?;
    // a[i] pairs with b[i - k]
    let a_start = k.max(0);
    let a_end = (a.len() as i64).min(k + b.len() as i64);
    if a_end <= a_start {
        return Err(Error::Incompatible("time ranges do not overlap".into()));
    }
    let samples = (a_start..a_end)
        .map(|i| op(a.samples[i as usize], b.samples[(i - k) as usize]))
        .collect();
    Waveform::new(a.sample_rate, a.time_at(a_start as usize), samples)
}

/// Sample-wise `a - b` on the time overlap of the two waveforms.
pub fn subtract(a: &Waveform, b: &Waveform) -> Result<Waveform> {
    combine(a, b, |x, y| x - y)
}

/// Sample-wise `a + b` on the time overlap of the two waveforms.
pub fn add(a: &Waveform, b: &Waveform) -> Result<Waveform> {
    combine(a, b, |x, y| x + y)
}

/// Time constant of a single-pole low-pass with the given 10-90% risetime.
pub fn risetime_to_tau(risetime_ps: f64) -> f64 {
    risetime_ps / 2.2
}

/// Single-pole low-pass with unity DC gain and 10-90% risetime `risetime_ps`.
///
/// Discretized step-invariantly: each sample is treated as the input held
/// over the preceding sample period, so `y[n] = a*y[n-1] + (1-a)*x[n]` with
/// `a = exp(-T/tau)`. The filter starts in steady state with the first sample.
pub fn band_limit(wf: &Waveform, risetime_ps: f64) -> Result<Waveform> {
    if !(risetime_ps > 0.0) {
        return Err(Error::invalid("risetime", format!("must be > 0, got {risetime_ps} ps")));
    }
    let mut out = wf.samples.clone();
    low_pass_in_place(&mut out, wf.sample_period_ps(), risetime_to_tau(risetime_ps));
    Ok(wf.with_samples(out))
}

pub(crate) fn low_pass_in_place(samples: &mut [f64], period_ps: f64, tau_ps: f64) {
    let a = (-period_ps / tau_ps).exp();
    let b = 1.0 - a;
    let mut y = match samples.first() {
        Some(&v) => v,
        None => return,
    };
    for s in samples.iter_mut() {
        y = a * y + b * *s;
        *s = y;
    }
}

pub fn peak_to_peak(wf: &Waveform, window: &TimeWindow) -> Result<f64> {
    let w = wf.window(window)?;
    let (lo, hi) = w
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| (lo.min(v), hi.max(v)));
    Ok(hi - lo)
}

/// `20 log10(pp(input) / pp(residual))` over `window`.
///
/// A residual with zero peak-to-peak saturates at [`SUPPRESSION_CEILING_DB`].
pub fn suppression_db(input: &Waveform, residual: &Waveform, window: &TimeWindow) -> Result<f64> {
    let pin = peak_to_peak(input, window)?;
    let pres = peak_to_peak(residual, window)?;
    if pin == 0.0 {
        return Err(Error::Domain(
            "input has zero peak-to-peak; suppression is undefined".into(),
        ));
    }
    if pres == 0.0 {
        return Ok(SUPPRESSION_CEILING_DB);
    }
    Ok(20.0 * (pin / pres).log10())
}
