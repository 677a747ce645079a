//! Detector figures of merit from measured count probabilities.

use crate::error::{Error, Result};

/// Detection efficiency from the dark count rate `r_dc` (per second, at gate
/// rate `f_g`) and the count rate `r_pd` in illuminated gates (per second, at
/// laser rate `f_p`):
/// `eta = ln((1 - r_dc/f_g) / (1 - r_pd/f_p)) / mu`.
pub fn efficiency(mu: f64, r_dc: f64, r_pd: f64, f_g: f64, f_p: f64) -> Result<f64> {
    if !(mu > 0.0) {
        return Err(Error::Domain(format!("mu must be > 0, got {mu}")));
    }
    let dark = r_dc / f_g;
    let light = r_pd / f_p;
    if !(0.0..1.0).contains(&dark) {
        return Err(Error::Domain(format!("R_dc/f_g = {dark} must be in [0, 1)")));
    }
    if !(0.0..1.0).contains(&light) {
        return Err(Error::Domain(format!("R_pd/f_p = {light} must be in [0, 1)")));
    }
    if light < dark {
        return Err(Error::Domain(format!(
            "R_pd/f_p = {light} is below R_dc/f_g = {dark}"
        )));
    }
    Ok(((-dark).ln_1p() - (-light).ln_1p()) / mu)
}

/// `(P_dc, P_dc / (f_g * dt))` with `dt_ns` converted to seconds, so the
/// divisor is the duty cycle.
pub fn dark_prob(c_dc: f64, f_g: f64, dt_ns: f64) -> Result<(f64, f64)> {
    if !(dt_ns > 0.0) {
        return Err(Error::Domain(format!("active time must be > 0, got {dt_ns} ns")));
    }
    if !(c_dc >= 0.0) {
        return Err(Error::Domain(format!("C_dc must be >= 0, got {c_dc}")));
    }
    Ok((c_dc, c_dc / duty_cycle(f_g, dt_ns)))
}

pub fn duty_cycle(f_g: f64, dt_ns: f64) -> f64 {
    f_g * dt_ns * 1e-9
}

/// Afterpulse probability per detection,
/// `(C_ni - C_dc) * R / (C_i - C_ni)`.
pub fn afterpulse_prob(c_ni: f64, c_i: f64, c_dc: f64, r: f64) -> Result<f64> {
    if !(c_i > c_ni) {
        return Err(Error::Domain(format!(
            "C_i = {c_i} must exceed C_ni = {c_ni}: no net signal"
        )));
    }
    if !(r >= 1.0) {
        return Err(Error::Domain(format!("R must be >= 1, got {r}")));
    }
    Ok((c_ni - c_dc) * r / (c_i - c_ni))
}

/// Afterpulse probability per nanosecond of active time,
/// `P_a * f_p * mu * eta / (f_g * dt)` with `dt` in ns.
pub fn afterpulse_per_ns(p_a: f64, f_p: f64, mu: f64, eta: f64, f_g: f64, dt_ns: f64) -> f64 {
    p_a * f_p * mu * eta / (f_g * dt_ns)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn equal_rates_give_zero() {
        assert_eq!(efficiency(1.0, 2e3, 5e2, 2e8, 5e7).unwrap(), 0.0);
    }

    #[test]
    fn efficiency_domain_errors_name_the_ratio() {
        let e = efficiency(1.0, 0.0, 6e7, 2e8, 5e7).unwrap_err().to_string();
        assert!(e.contains("R_pd/f_p"), "{e}");
        let e = efficiency(1.0, 3e8, 1e3, 2e8, 5e7).unwrap_err().to_string();
        assert!(e.contains("R_dc/f_g"), "{e}");
        assert!(efficiency(0.0, 0.0, 1.0, 2e8, 5e7).is_err());
    }

    #[test]
    fn dark_prob_examples() {
        let (p, pns) = dark_prob(4e-6, 2e8, 0.2).unwrap();
        assert_eq!(p, 4e-6);
        assert_relative_eq!(pns, 1e-4, max_relative = 1e-12);
        assert_eq!(dark_prob(0.0, 2e8, 0.2).unwrap(), (0.0, 0.0));
        let (_, half) = dark_prob(4e-6, 2e8, 0.1).unwrap();
        assert_relative_eq!(half, 2.0 * pns, max_relative = 1e-12);
    }

    #[test]
    fn afterpulse_examples() {
        assert_eq!(afterpulse_prob(0.001, 0.05, 0.001, 4.0).unwrap(), 0.0);
        assert_relative_eq!(
            afterpulse_prob(0.001, 0.05, 0.0002, 4.0).unwrap(),
            0.0032 / 0.049,
            max_relative = 1e-12
        );
        assert!(afterpulse_prob(0.05, 0.05, 0.0, 4.0).is_err());
        assert_eq!(afterpulse_per_ns(0.0, 5e7, 1.0, 0.064, 2e8, 0.2), 0.0);
    }
}
