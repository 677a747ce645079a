//! The measurement bench.

pub mod bench;
pub mod fit;
pub mod formulas;
pub mod measure;
pub mod scan;
pub mod tdc;
pub mod testsignal;

pub use bench::{Bench, GateCounts, RunOutput};
pub use fit::{curve_fwhm, fit_afterpulse_decay, fwhm, uniformity_test, DecayFit, DecayWindow};
pub use formulas::{afterpulse_per_ns, afterpulse_prob, dark_prob, duty_cycle, efficiency};
pub use measure::{characterize, Characterization, Metrics};
pub use scan::{bench_scan, scan_active_time, scan_fwhm, ScanPoint, ScanResult, ScanSettings};
pub use tdc::{tdc_histogram, Histogram, TdcConfig};
pub use testsignal::{gen_clock_signal, gen_test_signal, measure_gate_peaks, TestSignalSpec};
