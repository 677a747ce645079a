//! Time-to-digital converter: arrival times folded onto one trigger period.

use std::io::Write;

use crate::error::{Error, Result};
use crate::sd_chain::DigitalPulse;
use crate::waveform::PS_PER_S;

#[derive(Debug, Clone, PartialEq)]
pub struct TdcConfig {
    pub trigger_rate_hz: f64,
    pub bin_width_ps: f64,
}

impl Default for TdcConfig {
    fn default() -> Self {
        TdcConfig {
            trigger_rate_hz: 1e6,
            bin_width_ps: 20.0,
        }
    }
}

impl TdcConfig {
    pub fn span_ps(&self) -> f64 {
        PS_PER_S / self.trigger_rate_hz
    }

    pub fn n_bins(&self) -> Result<usize> {
        if !(self.trigger_rate_hz > 0.0) {
            return Err(Error::invalid("tdc.trigger_rate_hz", "must be > 0"));
        }
        if !(self.bin_width_ps > 0.0) {
            return Err(Error::invalid("tdc.bin_width_ps", "must be > 0"));
        }
        let n = self.span_ps() / self.bin_width_ps;
        if (n - n.round()).abs() > 1e-9 * n || n < 1.0 {
            return Err(Error::invalid(
                "tdc.bin_width_ps",
                format!("{} ps does not divide the {} ps span", self.bin_width_ps, self.span_ps()),
            ));
        }
        Ok(n.round() as usize)
    }
}

/// Counts in equal bins starting at `start_ps`.
#[derive(Debug, Clone, PartialEq)]
pub struct Histogram {
    pub start_ps: f64,
    pub bin_width_ps: f64,
    pub counts: Vec<u64>,
}

impl Histogram {
    pub fn new(start_ps: f64, bin_width_ps: f64, n_bins: usize) -> Self {
        Histogram {
            start_ps,
            bin_width_ps,
            counts: vec![0; n_bins],
        }
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn total(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn bin_start(&self, i: usize) -> f64 {
        self.start_ps + i as f64 * self.bin_width_ps
    }

    pub fn bin_center(&self, i: usize) -> f64 {
        self.bin_start(i) + self.bin_width_ps / 2.0
    }

    pub fn bin_edges(&self) -> Vec<f64> {
        (0..=self.counts.len()).map(|i| self.bin_start(i)).collect()
    }

    pub fn end_ps(&self) -> f64 {
        self.bin_start(self.counts.len())
    }

    /// Bins whose centers lie in `[start_ps, end_ps)`.
    pub fn bins_in(&self, start_ps: f64, end_ps: f64) -> std::ops::Range<usize> {
        let lo = ((start_ps - self.start_ps) / self.bin_width_ps - 0.5).ceil().max(0.0) as usize;
        let hi = ((end_ps - self.start_ps) / self.bin_width_ps - 0.5).ceil().max(0.0) as usize;
        lo.min(self.len())..hi.min(self.len()).max(lo.min(self.len()))
    }

    pub fn sum_in(&self, start_ps: f64, end_ps: f64) -> u64 {
        self.counts[self.bins_in(start_ps, end_ps)].iter().sum()
    }

    /// Overlays every `period_ps` slice onto the first one.
    pub fn fold(&self, period_ps: f64) -> Result<Histogram> {
        let per = period_ps / self.bin_width_ps;
        let k = per.round() as usize;
        if k == 0 || (per - k as f64).abs() > 1e-9 * per || !self.len().is_multiple_of(k) {
            return Err(Error::invalid(
                "period",
                format!("{period_ps} ps is not a whole number of bins dividing the span"),
            ));
        }
        let mut out = Histogram::new(self.start_ps, self.bin_width_ps, k);
        for (i, c) in self.counts.iter().enumerate() {
            out.counts[i % k] += c;
        }
        Ok(out)
    }

    /// Sub-histogram over the bins whose centers lie in `[start_ps, end_ps)`.
    pub fn slice(&self, start_ps: f64, end_ps: f64) -> Histogram {
        let r = self.bins_in(start_ps, end_ps);
        Histogram {
            start_ps: self.bin_start(r.start),
            bin_width_ps: self.bin_width_ps,
            counts: self.counts[r].to_vec(),
        }
    }

    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "bin_start_ps,count")?;
        for (i, c) in self.counts.iter().enumerate() {
            writeln!(w, "{},{}", self.bin_start(i), c)?;
        }
        Ok(())
    }
}

/// Folds each pulse's rise time into one trigger period and bins it.
pub fn tdc_histogram(pulses: &[DigitalPulse], cfg: &TdcConfig) -> Result<Histogram> {
    let n = cfg.n_bins()?;
    let span = cfg.span_ps();
    let mut h = Histogram::new(0.0, cfg.bin_width_ps, n);
    for p in pulses {
        let t = p.t_rise_ps.rem_euclid(span);
        let i = ((t / cfg.bin_width_ps) as usize).min(n - 1);
        h.counts[i] += 1;
    }
    Ok(h)
}
