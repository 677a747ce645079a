//! Active-time scan: sweep the laser delay across the gate and record the
//! count rate.

#[cfg(feature = "parallel")]
use rayon::prelude::*;

use super::bench::{Bench, GateCounts};
use super::fit::curve_fwhm;
use super::formulas::duty_cycle;
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScanPoint {
    pub offset_ps: f64,
    pub count_rate_hz: f64,
}

/// Calls `run(offset, seed)` once per offset with `seed = base_seed + index`.
/// Runs may execute in parallel; results come back in offset order.
pub fn scan_active_time<F>(run: F, offsets: &[f64], base_seed: u64) -> Result<Vec<ScanPoint>>
where
    F: Fn(f64, u64) -> Result<f64> + Sync,
{
    if offsets.is_empty() {
        return Err(Error::invalid("scan offsets", "the offset list is empty"));
    }
    let one = |(i, &offset_ps): (usize, &f64)| -> Result<ScanPoint> {
        Ok(ScanPoint {
            offset_ps,
            count_rate_hz: run(offset_ps, base_seed.wrapping_add(i as u64))?,
        })
    };
    #[cfg(feature = "parallel")]
    let points = offsets.par_iter().enumerate().map(one).collect();
    #[cfg(not(feature = "parallel"))]
    let points = offsets.iter().enumerate().map(one).collect();
    points
}

/// FWHM of the count-rate curve, i.e. the measured active time.
pub fn scan_fwhm(points: &[ScanPoint]) -> Result<f64> {
    let xs: Vec<f64> = points.iter().map(|p| p.offset_ps).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.count_rate_hz).collect();
    curve_fwhm(&xs, &ys)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanSettings {
    pub offset_min_ps: f64,
    pub offset_max_ps: f64,
    pub offset_step_ps: f64,
    pub mu: f64,
    /// Optical pulse width used for the scan. Short enough that the curve
    /// width is the active time itself.
    pub probe_fwhm_ps: f64,
    pub n_gates: u64,
}

impl Default for ScanSettings {
    fn default() -> Self {
        ScanSettings {
            offset_min_ps: -1000.0,
            offset_max_ps: 1000.0,
            offset_step_ps: 25.0,
            mu: 0.01,
            probe_fwhm_ps: 20.0,
            n_gates: 4_000_000,
        }
    }
}

impl ScanSettings {
    pub fn offsets(&self) -> Result<Vec<f64>> {
        if !(self.offset_step_ps > 0.0) {
            return Err(Error::invalid("scan.offset_step_ps", "must be > 0"));
        }
        if !(self.offset_max_ps >= self.offset_min_ps) {
            return Err(Error::invalid("scan.offset_max_ps", "must be >= scan.offset_min_ps"));
        }
        let n = ((self.offset_max_ps - self.offset_min_ps) / self.offset_step_ps + 1e-9).floor() as usize;
        Ok((0..=n)
            .map(|i| self.offset_min_ps + i as f64 * self.offset_step_ps)
            .collect())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScanResult {
    pub points: Vec<ScanPoint>,
    pub active_fwhm_ps: f64,
    pub duty_cycle: f64,
}

/// Runs the detector once per offset and extracts the active time.
pub fn bench_scan(bench: &Bench, offsets: &[f64], s: &ScanSettings, base_seed: u64) -> Result<ScanResult> {
    bench.validate()?;
    let r = bench.gates_per_pulse()?;
    let period = bench.gate_period_ps();
    let f_p = bench.laser.f_p_hz;
    let points = scan_active_time(
        |offset, seed| {
            let mut b = bench.clone();
            b.laser.offset_ps = offset;
            b.laser.mu = s.mu;
            b.laser.pulse_fwhm_ps = s.probe_fwhm_ps;
            let run = b.run(s.n_gates, seed)?;
            Ok(GateCounts::tally(&run, period, r).c_i() * f_p)
        },
        offsets,
        base_seed,
    )?;
    let active_fwhm_ps = scan_fwhm(&points)?;
    Ok(ScanResult {
        duty_cycle: duty_cycle(bench.gate.f_g_hz, active_fwhm_ps * 1e-3),
        points,
        active_fwhm_ps,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_offsets_rejected() {
        assert!(scan_active_time(|_, _| Ok(0.0), &[], 0).is_err());
    }

    #[test]
    fn seeds_follow_index_and_order_is_kept() {
        let offs = [-50.0, 0.0, 50.0, 100.0];
        let pts = scan_active_time(|o, seed| Ok(o + seed as f64 * 1000.0), &offs, 7).unwrap();
        let got: Vec<f64> = pts.iter().map(|p| p.count_rate_hz).collect();
        assert_eq!(got, vec![6950.0, 8000.0, 9050.0, 10100.0]);
    }

    #[test]
    fn default_offsets() {
        let o = ScanSettings::default().offsets().unwrap();
        assert_eq!(o.len(), 81);
        assert_eq!(o[0], -1000.0);
        assert_eq!(o[80], 1000.0);
    }

    #[test]
    fn gaussian_curve_width() {
        let sigma = 200.0 / crate::FWHM_PER_SIGMA;
        let pts: Vec<ScanPoint> = (0..81)
            .map(|i| {
                let x = -1000.0 + 25.0 * i as f64;
                ScanPoint { offset_ps: x, count_rate_hz: (-x * x / (2.0 * sigma * sigma)).exp() }
            })
            .collect();
        let w = scan_fwhm(&pts).unwrap();
        assert!((w - 200.0).abs() < 3.0, "{w}");
    }
}
