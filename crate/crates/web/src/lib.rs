//! Browser bindings: the test-signal suppression explorer, a short TDC run and
//! the active-time scan. The plain functions are usable (and tested) natively;
//! the `#[wasm_bindgen]` wrappers only convert errors.

use spd_core::characterize::{self, bench_scan, gen_test_signal, TestSignalSpec};
use spd_core::experiment::{run_tune, RunConfig, TuneReference};
use spd_core::sd_chain::{self, SdConfig};
use spd_core::waveform::PS_PER_S;
use wasm_bindgen::prelude::*;

/// Test signal, its self-differenced output and the suppression achieved.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct SuppressionView {
    suppression_db: f64,
    sample_ps: f64,
    input: Vec<f64>,
    output: Vec<f64>,
}

#[wasm_bindgen]
impl SuppressionView {
    #[wasm_bindgen(getter)]
    pub fn suppression_db(&self) -> f64 {
        self.suppression_db
    }
    #[wasm_bindgen(getter)]
    pub fn sample_ps(&self) -> f64 {
        self.sample_ps
    }
    #[wasm_bindgen(getter)]
    pub fn input(&self) -> Vec<f64> {
        self.input.clone()
    }
    /// Differential amplifier output.
    #[wasm_bindgen(getter)]
    pub fn output(&self) -> Vec<f64> {
        self.output.clone()
    }
}

const TS_GATES: usize = 12;

pub fn suppression(trim_db: f64, delay_fine_ps: f64, event_mv: f64) -> spd_core::Result<SuppressionView> {
    let spec = TestSignalSpec { event_mv, allow_any: true, ..Default::default() };
    let period = spec.period_ps();
    let sd = SdConfig { trim_db, delay_fine_ps, ..Default::default() };
    let reference = gen_test_signal(&TestSignalSpec { event_mv: 0.0, ..spec.clone() }, TS_GATES)?;
    let window = sd_chain::tuning_window(&reference, &sd, period);
    let residual = sd_chain::self_difference(&reference, &sd, period)?;
    let suppression_db = sd_chain::input_referred_suppression(&reference, &residual, &sd, &window)?;
    let signal = gen_test_signal(&spec, TS_GATES)?;
    let output = sd_chain::self_difference(&signal, &sd, period)?;
    Ok(SuppressionView {
        suppression_db,
        sample_ps: spec.sample_ps,
        input: signal.into_samples(),
        output: output.into_samples(),
    })
}

/// Trim and fine delay the tuner picks for the test signal.
pub fn autotune() -> spd_core::Result<Vec<f64>> {
    let cfg = RunConfig { tune_reference: TuneReference::TestSignal, ..Default::default() };
    let t = run_tune(&cfg)?;
    Ok(vec![t.config.trim_db, t.config.delay_fine_ps])
}

/// Folded TDC histogram over one laser period plus the headline metrics.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct TdcView {
    bin_width_ps: f64,
    counts: Vec<f64>,
    eta: f64,
    p_a: f64,
    jitter_fwhm_ps: f64,
    p_dc: f64,
}

#[wasm_bindgen]
impl TdcView {
    #[wasm_bindgen(getter)]
    pub fn bin_width_ps(&self) -> f64 {
        self.bin_width_ps
    }
    #[wasm_bindgen(getter)]
    pub fn counts(&self) -> Vec<f64> {
        self.counts.clone()
    }
    /// NaN when undefined.
    #[wasm_bindgen(getter)]
    pub fn eta(&self) -> f64 {
        self.eta
    }
    #[wasm_bindgen(getter)]
    pub fn p_a(&self) -> f64 {
        self.p_a
    }
    #[wasm_bindgen(getter)]
    pub fn jitter_fwhm_ps(&self) -> f64 {
        self.jitter_fwhm_ps
    }
    #[wasm_bindgen(getter)]
    pub fn p_dc(&self) -> f64 {
        self.p_dc
    }
}

fn tuned_config() -> spd_core::Result<RunConfig> {
    let mut cfg = RunConfig::default();
    cfg.sd = run_tune(&cfg)?.config;
    Ok(cfg)
}

pub fn tdc_run(n_gates: u32, mu: f64, seed: u32) -> spd_core::Result<TdcView> {
    let mut cfg = tuned_config()?;
    cfg.laser.mu = mu;
    let bench = cfg.bench();
    let c = characterize::characterize(&bench, n_gates as u64, seed as u64, &cfg.tdc)?;
    let period = PS_PER_S / bench.laser.f_p_hz;
    let folded = c.histogram.fold(period)?;
    let m = &c.metrics;
    Ok(TdcView {
        bin_width_ps: folded.bin_width_ps,
        counts: folded.counts.iter().map(|&v| v as f64).collect(),
        eta: m.eta.unwrap_or(f64::NAN),
        p_a: m.p_a.unwrap_or(f64::NAN),
        jitter_fwhm_ps: m.jitter_fwhm_ps.unwrap_or(f64::NAN),
        p_dc: m.p_dc,
    })
}

/// Count rate against laser delay, with the extracted active time.
#[wasm_bindgen]
#[derive(Debug, Clone)]
pub struct ScanView {
    offsets_ps: Vec<f64>,
    rates_hz: Vec<f64>,
    active_fwhm_ps: f64,
    duty_cycle: f64,
}

#[wasm_bindgen]
impl ScanView {
    #[wasm_bindgen(getter)]
    pub fn offsets_ps(&self) -> Vec<f64> {
        self.offsets_ps.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn rates_hz(&self) -> Vec<f64> {
        self.rates_hz.clone()
    }
    #[wasm_bindgen(getter)]
    pub fn active_fwhm_ps(&self) -> f64 {
        self.active_fwhm_ps
    }
    #[wasm_bindgen(getter)]
    pub fn duty_cycle(&self) -> f64 {
        self.duty_cycle
    }
}

pub fn scan(gate_rate_hz: f64, gates_per_point: u32, seed: u32) -> spd_core::Result<ScanView> {
    let mut cfg = RunConfig::default();
    cfg.gate.f_g_hz = gate_rate_hz;
    cfg.scan.n_gates = gates_per_point as u64;
    cfg.validate()?;
    cfg.sd = run_tune(&cfg)?.config;
    let offsets = cfg.scan.offsets()?;
    let r = bench_scan(&cfg.bench(), &offsets, &cfg.scan, seed as u64)?;
    Ok(ScanView {
        offsets_ps: r.points.iter().map(|p| p.offset_ps).collect(),
        rates_hz: r.points.iter().map(|p| p.count_rate_hz).collect(),
        active_fwhm_ps: r.active_fwhm_ps,
        duty_cycle: r.duty_cycle,
    })
}

fn js(e: spd_core::Error) -> JsError {
    JsError::new(&e.to_string())
}

#[wasm_bindgen(js_name = suppression)]
pub fn suppression_js(trim_db: f64, delay_fine_ps: f64, event_mv: f64) -> Result<SuppressionView, JsError> {
    suppression(trim_db, delay_fine_ps, event_mv).map_err(js)
}

/// `[trim_db, delay_fine_ps]`.
#[wasm_bindgen(js_name = autotune)]
pub fn autotune_js() -> Result<Vec<f64>, JsError> {
    autotune().map_err(js)
}

#[wasm_bindgen(js_name = tdcRun)]
pub fn tdc_run_js(n_gates: u32, mu: f64, seed: u32) -> Result<TdcView, JsError> {
    tdc_run(n_gates, mu, seed).map_err(js)
}

#[wasm_bindgen(js_name = scan)]
pub fn scan_js(gate_rate_hz: f64, gates_per_point: u32, seed: u32) -> Result<ScanView, JsError> {
    scan(gate_rate_hz, gates_per_point, seed).map_err(js)
}
