//! Peak widths, the afterpulse decay fit and the dark-count uniformity test.

use statrs::distribution::{ChiSquared, ContinuousCDF};

use super::tdc::Histogram;
use crate::error::{Error, Result};

/// Full width at half maximum of sampled points `(x, y)` with `x` ascending,
/// interpolating linearly on both flanks of the highest point.
pub fn curve_fwhm(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 3 {
        return Err(Error::TooShort("a width needs at least 3 points".into()));
    }
    let peak = (0..ys.len())
        .max_by(|&a, &b| ys[a].total_cmp(&ys[b]).then(b.cmp(&a)))
        .expect("non-empty");
    let half = ys[peak] / 2.0;
    if !(half > 0.0) {
        return Err(Error::Domain("curve has no positive peak".into()));
    }
    let mut l = peak;
    while l > 0 && ys[l - 1] >= half {
        l -= 1;
    }
    let mut r = peak;
    while r + 1 < ys.len() && ys[r + 1] >= half {
        r += 1;
    }
    if l == 0 || r + 1 == ys.len() {
        return Err(Error::Domain(
            "peak does not fall below half maximum inside the window".into(),
        ));
    }
    let cross = |i_lo: usize, i_hi: usize| {
        let (x0, y0, x1, y1) = (xs[i_lo], ys[i_lo], xs[i_hi], ys[i_hi]);
        x0 + (half - y0) / (y1 - y0) * (x1 - x0)
    };
    Ok(cross(r + 1, r) - cross(l - 1, l))
}

/// FWHM of the highest peak among the bins centered in `[start_ps, end_ps)`.
pub fn fwhm(h: &Histogram, start_ps: f64, end_ps: f64) -> Result<f64> {
    let r = h.bins_in(start_ps, end_ps);
    let counts = &h.counts[r.clone()];
    if counts.iter().filter(|&&c| c > 0).count() < 5 {
        return Err(Error::TooShort(format!(
            "fewer than 5 occupied bins in the peak; use a bin width below {} ps",
            h.bin_width_ps
        )));
    }
    let xs: Vec<f64> = r.clone().map(|i| h.bin_center(i)).collect();
    let ys: Vec<f64> = counts.iter().map(|&c| c as f64).collect();
    curve_fwhm(&xs, &ys)
}

/// One non-illuminated gate window of the histogram and its delay after the
/// preceding illuminated gate.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayWindow {
    pub start_ps: f64,
    pub end_ps: f64,
    pub t_since_ps: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecayFit {
    pub tau_ns: f64,
    /// Fitted net counts per window at zero delay.
    pub amplitude: f64,
    pub tau_se_ns: f64,
    /// `(delay in ns, net counts)` of every window used.
    pub points: Vec<(f64, f64)>,
}

/// Fits `A exp(-t/tau)` to the window counts less `baseline` by least squares
/// on the logarithm. Windows left with no net counts are skipped.
///
/// A fit whose slope is not negative by at least three standard errors is
/// rejected as non-exponential.
pub fn fit_afterpulse_decay(h: &Histogram, windows: &[DecayWindow], baseline: f64) -> Result<DecayFit> {
    let points: Vec<(f64, f64)> = windows
        .iter()
        .map(|w| (w.t_since_ps * 1e-3, h.sum_in(w.start_ps, w.end_ps) as f64 - baseline))
        .filter(|&(_, c)| c > 0.0)
        .collect();
    if points.len() < 3 {
        return Err(Error::FitRejected(format!(
            "only {} windows hold counts above the baseline; need 3",
            points.len()
        )));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1.ln()).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return Err(Error::FitRejected("all windows share one delay".into()));
    }
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1.ln() - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let rss: f64 = points
        .iter()
        .map(|p| (p.1.ln() - intercept - slope * p.0).powi(2))
        .sum();
    let se = if points.len() > 2 { (rss / (n - 2.0) / sxx).sqrt() } else { 0.0 };
    if !(slope < 0.0) || -slope < 3.0 * se {
        return Err(Error::FitRejected(format!(
            "non-exponential: slope {slope:.3e}/ns with standard error {se:.3e}"
        )));
    }
    let tau = -1.0 / slope;
    Ok(DecayFit {
        tau_ns: tau,
        amplitude: intercept.exp(),
        tau_se_ns: tau * tau * se,
        points,
    })
}

/// Chi-square p-value for "every window has the same expected count".
pub fn uniformity_test(h: &Histogram, windows: &[(f64, f64)]) -> Result<f64> {
    if windows.len() < 2 {
        return Err(Error::TooShort("need at least 2 windows".into()));
    }
    let counts: Vec<f64> = windows.iter().map(|&(a, b)| h.sum_in(a, b) as f64).collect();
    let total: f64 = counts.iter().sum();
    if total < 100.0 {
        return Err(Error::TooShort(format!("{total} counts; the test needs at least 100")));
    }
    let expected = total / counts.len() as f64;
    let stat: f64 = counts.iter().map(|c| (c - expected).powi(2) / expected).sum();
    if stat == 0.0 {
        return Ok(1.0);
    }
    let dist = ChiSquared::new((counts.len() - 1) as f64).map_err(|e| Error::Domain(e.to_string()))?;
    Ok(dist.sf(stat))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn hist(counts: Vec<u64>, width: f64) -> Histogram {
        Histogram { start_ps: 0.0, bin_width_ps: width, counts }
    }

    #[test]
    fn gaussian_fwhm() {
        let sigma = 63.7;
        let counts = (0..200)
            .map(|i| {
                let x = i as f64 * 5.0 + 2.5 - 500.0;
                (1e6 * (-x * x / (2.0 * sigma * sigma)).exp()).round() as u64
            })
            .collect();
        let w = fwhm(&hist(counts, 5.0), 0.0, 1000.0).unwrap();
        assert_relative_eq!(w, 2.3548 * sigma, max_relative = 0.05);
    }

    #[test]
    fn single_bin_is_rejected() {
        let mut c = vec![0; 50];
        c[20] = 100;
        assert!(matches!(fwhm(&hist(c, 20.0), 0.0, 1000.0), Err(Error::TooShort(_))));
    }

    #[test]
    fn rectangle_fwhm_is_its_width() {
        let mut c = vec![0; 100];
        c[30..70].fill(50);
        let w = fwhm(&hist(c, 10.0), 0.0, 1000.0).unwrap();
        assert!((w - 400.0).abs() <= 10.0);
    }

    fn windows(n: usize) -> Vec<DecayWindow> {
        (0..n)
            .map(|k| DecayWindow {
                start_ps: k as f64 * 5000.0,
                end_ps: (k + 1) as f64 * 5000.0,
                t_since_ps: (k + 1) as f64 * 5000.0,
            })
            .collect()
    }

    #[test]
    fn exact_exponential_is_recovered() {
        let tau = 30.0;
        let mut c = vec![0u64; 8 * 250];
        for k in 0..8 {
            let t = (k + 1) as f64 * 5.0;
            c[k * 250] = (1e12 * (-t / tau).exp()).round() as u64;
        }
        let fit = fit_afterpulse_decay(&hist(c, 20.0), &windows(8), 0.0).unwrap();
        assert_relative_eq!(fit.tau_ns, tau, max_relative = 1e-6);
        assert_relative_eq!(fit.amplitude, 1e12, max_relative = 1e-6);
    }

    #[test]
    fn flat_counts_are_rejected() {
        let c = vec![7u64; 8 * 250];
        assert!(matches!(
            fit_afterpulse_decay(&hist(c, 20.0), &windows(8), 0.0),
            Err(Error::FitRejected(_))
        ));
        let z = vec![0u64; 8 * 250];
        assert!(fit_afterpulse_decay(&hist(z, 20.0), &windows(8), 0.0).is_err());
    }

    #[test]
    fn uniformity_extremes() {
        let w: Vec<(f64, f64)> = (0..10).map(|k| (k as f64 * 100.0, (k + 1) as f64 * 100.0)).collect();
        let even = hist(vec![20; 50], 20.0);
        assert_eq!(uniformity_test(&even, &w).unwrap(), 1.0);
        let mut c = vec![0; 50];
        c[3] = 1000;
        assert!(uniformity_test(&hist(c, 20.0), &w).unwrap() < 1e-6);
        assert!(uniformity_test(&hist(vec![1; 50], 20.0), &w).is_err());
    }
}
