//! Statistics of the simulated avalanche stream against closed-form
//! expectations.

use spd_core::apd::{simulate_events, ApdParams, AvalancheEvent, Cause, GateConfig, LaserConfig};
use statrs::distribution::{ChiSquared, ContinuousCDF};

const SIGMA_PER_FWHM: f64 = 1.0 / 2.354_820_045_030_949_4;

fn quiet() -> ApdParams {
    ApdParams {
        dark_rate_per_ns: 0.0,
        trap_mean: 0.0,
        ..Default::default()
    }
}

fn dark_only() -> LaserConfig {
    LaserConfig { mu: 0.0, ..Default::default() }
}

#[test]
fn one_event_per_gate_and_seeded() {
    let g = GateConfig::default();
    let p = ApdParams { dark_rate_per_ns: 1e-2, ..Default::default() };
    let l = LaserConfig { mu: 3.0, ..Default::default() };
    let a = simulate_events(&g, &l, &p, 2_000_000, 11).unwrap();
    let b = simulate_events(&g, &l, &p, 2_000_000, 11).unwrap();
    assert_eq!(a, b);
    assert!(a.windows(2).all(|w| w[0].gate_index < w[1].gate_index));
    let c = simulate_events(&g, &l, &p, 2_000_000, 12).unwrap();
    assert_ne!(a, c);
}

#[test]
fn illuminated_click_fraction_matches_poisson() {
    let g = GateConfig::default();
    let l = LaserConfig::default();
    // Overlap of a Gaussian pulse with the Gaussian efficiency profile.
    let target = 0.064;
    let sa = 200.0 * SIGMA_PER_FWHM;
    let sl = l.pulse_fwhm_ps * SIGMA_PER_FWHM;
    let overlap = sa / (sa * sa + sl * sl).sqrt();
    let p = ApdParams { eta_peak: target / overlap, ..quiet() };

    let n_illuminated = 10_000_000u64;
    let ev = simulate_events(&g, &l, &p, 4 * n_illuminated, 3).unwrap();
    assert!(ev.iter().all(|e| e.cause == Cause::Photon && e.gate_index % 4 == 0));
    let frac = ev.len() as f64 / n_illuminated as f64;
    let expect = 1.0 - (-target).exp();
    let sigma = (expect * (1.0 - expect) / n_illuminated as f64).sqrt();
    assert!((frac - expect).abs() < 3.0 * sigma, "{frac} vs {expect} (sigma {sigma})");
}

#[test]
fn saturating_light_clicks_every_illuminated_gate() {
    let l = LaserConfig { mu: 1e4, ..Default::default() };
    let ev = simulate_events(&GateConfig::default(), &l, &quiet(), 4000, 1).unwrap();
    assert_eq!(ev.len(), 1000);
}

#[test]
fn dark_rate_converges() {
    let p = quiet_dark(4.5e-6);
    let n = 1_000_000_000u64;
    let ev = simulate_events(&GateConfig::default(), &dark_only(), &p, n, 5).unwrap();
    let expect = 4.5e-6 * 0.2;
    let frac = ev.len() as f64 / n as f64;
    let sigma = (expect * (1.0 - expect) / n as f64).sqrt();
    assert!((frac - expect).abs() < 3.0 * sigma, "{frac} vs {expect}");
}

fn quiet_dark(rate: f64) -> ApdParams {
    ApdParams { dark_rate_per_ns: rate, ..quiet() }
}

#[test]
fn dark_positions_fill_the_active_window_uniformly() {
    let g = GateConfig::default();
    let p = quiet_dark(5e-2);
    let ev = simulate_events(&g, &dark_only(), &p, 2_000_000, 9).unwrap();
    assert!(ev.len() > 10_000);
    let bins = 20;
    let half = p.active_fwhm_ps / 2.0;
    let mut counts = vec![0u64; bins];
    for e in &ev {
        let x = (e.t_ps - g.center_ps(e.gate_index) + half) / (2.0 * half);
        assert!((0.0..=1.0).contains(&x));
        counts[((x * bins as f64) as usize).min(bins - 1)] += 1;
    }
    let expect = ev.len() as f64 / bins as f64;
    let chi2: f64 = counts.iter().map(|&c| (c as f64 - expect).powi(2) / expect).sum();
    let p_value = 1.0 - ChiSquared::new((bins - 1) as f64).unwrap().cdf(chi2);
    assert!(p_value > 1e-3, "chi2 {chi2}, p {p_value}");
}

#[test]
fn photon_jitter_is_gaussian_with_configured_width() {
    let g = GateConfig::default();
    let l = LaserConfig::default();
    let p = quiet();
    let ev = simulate_events(&g, &l, &p, 8_000_000, 21).unwrap();
    let dev: Vec<f64> = ev.iter().map(|e| e.t_ps - g.center_ps(e.gate_index)).collect();
    let n = dev.len() as f64;
    let mean = dev.iter().sum::<f64>() / n;
    let var = dev.iter().map(|d| (d - mean).powi(2)).sum::<f64>() / n;
    let fwhm = var.sqrt() / SIGMA_PER_FWHM;
    assert!((fwhm - 150.0).abs() < 15.0, "{fwhm}");
    // Gaussian shape: about 68.3% within one sigma.
    let s = var.sqrt();
    let inside = dev.iter().filter(|d| (*d - mean).abs() < s).count() as f64 / n;
    assert!((inside - 0.6827).abs() < 0.01, "{inside}");
}

/// Delay of every afterpulse after the photon event that opened its laser
/// period.
fn afterpulse_delays(ev: &[AvalancheEvent]) -> Vec<f64> {
    let mut last_photon = None;
    let mut out = Vec::new();
    for e in ev {
        match e.cause {
            Cause::Photon => last_photon = Some(e.t_ps),
            Cause::Afterpulse => {
                if let Some(t) = last_photon {
                    out.push(e.t_ps - t);
                }
            }
            Cause::Dark => {}
        }
    }
    out
}

#[test]
fn afterpulse_delays_decay_with_trap_lifetime() {
    // One strong pulse every 100 gates; a weak trap population keeps
    // afterpulses of afterpulses rare.
    let g = GateConfig::default();
    let l = LaserConfig { f_p_hz: 2e6, mu: 20.0, ..Default::default() };
    let p = ApdParams { trap_mean: 1.0, release_trigger_prob: 0.5, ..quiet() };
    let ev = simulate_events(&g, &l, &p, 800_000_000, 4).unwrap();
    let delays = afterpulse_delays(&ev);
    assert!(delays.len() >= 100_000, "{}", delays.len());

    // Counts per gate gap, fitted on a log scale.
    let t = g.period_ps();
    let gaps = 20usize;
    let mut counts = vec![0u64; gaps + 1];
    for d in &delays {
        let k = (d / t).round() as usize;
        if (1..=gaps).contains(&k) {
            counts[k] += 1;
        }
    }
    let pts: Vec<(f64, f64)> = (1..=gaps)
        .filter(|&k| counts[k] > 0)
        .map(|k| (k as f64 * t * 1e-3, (counts[k] as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let tau = -sxx / sxy;
    assert!((tau - 30.0).abs() < 3.0, "tau {tau} ns");
}
