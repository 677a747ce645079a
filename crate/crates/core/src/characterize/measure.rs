//! One characterization measurement: a laser run and a laser-off run of
//! equal length, reduced to the detector's figures of merit.

use std::io::Write;

use super::bench::{Bench, GateCounts};
use super::fit::{self, DecayFit, DecayWindow};
use super::formulas;
use super::tdc::{self, Histogram, TdcConfig};
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    pub eta: Option<f64>,
    pub p_dc: f64,
    pub p_dc_ns: f64,
    pub p_a: Option<f64>,
    pub p_a_ns: Option<f64>,
    pub jitter_fwhm_ps: Option<f64>,
    pub active_fwhm_ps: f64,
    pub r: u64,
    pub c_i: f64,
    pub c_ni: Option<f64>,
    pub c_dc: f64,
    pub afterpulse_tau_ns: Option<f64>,
}

const METRIC_NAMES: [&str; 12] = [
    "eta",
    "p_dc",
    "p_dc_ns",
    "p_a",
    "p_a_ns",
    "jitter_fwhm_ps",
    "active_fwhm_ps",
    "r",
    "c_i",
    "c_ni",
    "c_dc",
    "afterpulse_tau_ns",
];

fn sig9(v: Option<f64>) -> String {
    match v {
        Some(x) if x.is_finite() => format!("{x:.8e}"),
        _ => "nan".to_string(),
    }
}

impl Metrics {
    /// Header row of names, then one row of values to 9 significant digits;
    /// undefined values are written as `nan`.
    pub fn write_csv<W: Write>(&self, mut w: W) -> std::io::Result<()> {
        writeln!(w, "{}", METRIC_NAMES.join(","))?;
        let row = [
            sig9(self.eta),
            sig9(Some(self.p_dc)),
            sig9(Some(self.p_dc_ns)),
            sig9(self.p_a),
            sig9(self.p_a_ns),
            sig9(self.jitter_fwhm_ps),
            sig9(Some(self.active_fwhm_ps)),
            self.r.to_string(),
            sig9(Some(self.c_i)),
            sig9(self.c_ni),
            sig9(Some(self.c_dc)),
            sig9(self.afterpulse_tau_ns),
        ];
        writeln!(w, "{}", row.join(","))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Characterization {
    pub metrics: Metrics,
    pub counts: GateCounts,
    pub dark_counts: GateCounts,
    /// Laser run, one trigger period.
    pub histogram: Histogram,
    pub dark_histogram: Histogram,
    /// Laser run folded onto one laser period, when the trigger allows it.
    pub folded: Option<Histogram>,
    pub decay: std::result::Result<DecayFit, String>,
    /// Chi-square p-value of the dark-run counts across gates, when there are
    /// enough counts for the test.
    pub dark_uniformity_p: Option<f64>,
}

/// Non-illuminated gate windows inside one trigger period, excluding the gate
/// right after each illuminated one, which the stretcher blanks after every
/// photon detection.
pub fn decay_windows(bench: &Bench, tdc: &TdcConfig) -> Result<Vec<DecayWindow>> {
    let r = bench.gates_per_pulse()?;
    let t = bench.gate_period_ps();
    let gates = (tdc.span_ps() / t).round() as u64;
    Ok((0..gates)
        .filter(|k| k % r >= 2)
        .map(|k| DecayWindow {
            start_ps: k as f64 * t,
            end_ps: (k + 1) as f64 * t,
            t_since_ps: (k % r) as f64 * t,
        })
        .collect())
}

/// Every gate window inside one trigger period.
pub fn gate_windows(bench: &Bench, tdc: &TdcConfig) -> Vec<(f64, f64)> {
    let t = bench.gate_period_ps();
    let gates = (tdc.span_ps() / t).round() as u64;
    (0..gates).map(|k| (k as f64 * t, (k + 1) as f64 * t)).collect()
}

/// Laser run with `seed`, laser-off run with `seed + 1`, both `n_gates` long.
pub fn characterize(bench: &Bench, n_gates: u64, seed: u64, tdc: &TdcConfig) -> Result<Characterization> {
    bench.validate()?;
    let r = bench.gates_per_pulse()?;
    let t = bench.gate_period_ps();
    let f_g = bench.gate.f_g_hz;
    let f_p = bench.laser.f_p_hz;
    let mu = bench.laser.mu;
    let dt_ns = bench.apd.active_fwhm_ps * 1e-3;
    let span = tdc.span_ps();
    let gates_in_span = span / t;
    if (gates_in_span - gates_in_span.round()).abs() > 1e-9 * gates_in_span {
        return Err(Error::invalid(
            "tdc.trigger_rate_hz",
            "the trigger period must hold a whole number of gates",
        ));
    }

    let run = bench.run(n_gates, seed)?;
    let mut dark_bench = bench.clone();
    dark_bench.laser.mu = 0.0;
    let dark = dark_bench.run(n_gates, seed.wrapping_add(1))?;

    let counts = GateCounts::tally(&run, t, r);
    let dark_counts = GateCounts::tally(&dark, t, r);
    let c_dc = dark_counts.c_all();
    let c_i = counts.c_i();
    let c_ni = (r > 1).then(|| counts.c_ni());

    let eta = if mu > 0.0 {
        formulas::efficiency(mu, c_dc * f_g, c_i * f_p, f_g, f_p).ok()
    } else {
        None
    };
    let (p_dc, p_dc_ns) = formulas::dark_prob(c_dc, f_g, dt_ns)?;
    let p_a = match (mu > 0.0, c_ni) {
        (true, Some(c_ni)) => formulas::afterpulse_prob(c_ni, c_i, c_dc, r as f64).ok(),
        _ => None,
    };
    let p_a_ns = match (p_a, eta) {
        (Some(p_a), Some(eta)) => Some(formulas::afterpulse_per_ns(p_a, f_p, mu, eta, f_g, dt_ns)),
        _ => None,
    };

    let histogram = tdc::tdc_histogram(&run.pulses, tdc)?;
    let dark_histogram = tdc::tdc_histogram(&dark.pulses, tdc)?;
    let folded = histogram.fold(r as f64 * t).ok();
    let jitter_fwhm_ps = match (&folded, mu > 0.0) {
        (Some(f), true) => fit::fwhm(f, 0.0, t).ok(),
        _ => None,
    };

    let decay = if mu > 0.0 && r > 2 {
        let baseline = c_dc * run.counted_gates() as f64 / gates_in_span.round();
        fit::fit_afterpulse_decay(&histogram, &decay_windows(bench, tdc)?, baseline)
            .map_err(|e| e.to_string())
    } else {
        Err("needs illumination and at least two dark gates per laser period".to_string())
    };
    let dark_uniformity_p = fit::uniformity_test(&dark_histogram, &gate_windows(bench, tdc)).ok();

    Ok(Characterization {
        metrics: Metrics {
            eta,
            p_dc,
            p_dc_ns,
            p_a,
            p_a_ns,
            jitter_fwhm_ps,
            active_fwhm_ps: bench.apd.active_fwhm_ps,
            r,
            c_i,
            c_ni,
            c_dc,
            afterpulse_tau_ns: decay.as_ref().ok().map(|d| d.tau_ns),
        },
        counts,
        dark_counts,
        histogram,
        dark_histogram,
        folded,
        decay,
        dark_uniformity_p,
    })
}

/// Binomial standard error of the efficiency estimate from `n_i` illuminated
/// gates with click fraction `c_i`.
pub fn efficiency_standard_error(c_i: f64, n_i: u64, mu: f64) -> f64 {
    (c_i * (1.0 - c_i) / n_i as f64).sqrt() / ((1.0 - c_i) * mu)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn metrics_csv_layout() {
        let m = Metrics {
            eta: Some(0.064),
            p_dc: 9e-7,
            p_dc_ns: 1.125e-4,
            p_a: None,
            p_a_ns: None,
            jitter_fwhm_ps: Some(150.0),
            active_fwhm_ps: 200.0,
            r: 4,
            c_i: 0.062,
            c_ni: Some(0.001),
            c_dc: 9e-7,
            afterpulse_tau_ns: None,
        };
        let mut buf = Vec::new();
        m.write_csv(&mut buf).unwrap();
        let s = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0].split(',').count(), lines[1].split(',').count());
        assert!(lines[1].starts_with("6.40000000e-2,9.00000000e-7,"));
        assert!(lines[1].contains(",nan,nan,"));
    }

    #[test]
    fn decay_windows_skip_dead_gate() {
        let b = Bench::default();
        let w = decay_windows(&b, &TdcConfig::default()).unwrap();
        assert_eq!(w.len(), 100);
        assert_eq!(w[0].start_ps, 10_000.0);
        assert_eq!(w[0].t_since_ps, 10_000.0);
        assert_eq!(w[1].t_since_ps, 15_000.0);
    }
}
