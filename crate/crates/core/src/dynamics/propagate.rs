use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use crate::error::{Error, Result};
use crate::scattering::RateSet;

/// The three rates that drive the qubit master equation, s^-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRates {
    /// Raman `u -> d`.
    pub gamma_ud: f64,
    /// Raman `d -> u`.
    pub gamma_du: f64,
    /// Elastic (pure dephasing) decoherence.
    pub gamma_el: f64,
}

impl DecayRates {
    pub fn new(gamma_ud: f64, gamma_du: f64, gamma_el: f64) -> Self {
        DecayRates { gamma_ud, gamma_du, gamma_el }
    }

    pub fn zero() -> Self {
        DecayRates::new(0.0, 0.0, 0.0)
    }

    pub fn gamma_ram(&self) -> f64 {
        self.gamma_ud + self.gamma_du
    }

    /// Coherence decay rate `(Gamma_ram + Gamma_el) / 2`.
    pub fn coherence_decay(&self) -> f64 {
        0.5 * (self.gamma_ram() + self.gamma_el)
    }

    pub fn max_rate(&self) -> f64 {
        self.gamma_ud.max(self.gamma_du).max(self.gamma_el)
    }

    pub(crate) fn validate(&self) -> Result<()> {
        for (name, v) in [("gamma_ud", self.gamma_ud), ("gamma_du", self.gamma_du), ("gamma_el", self.gamma_el)] {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::Precondition(format!("{name} must be finite and non-negative, got {v}")));
            }
        }
        Ok(())
    }
}

impl From<&RateSet> for DecayRates {
    fn from(r: &RateSet) -> Self {
        DecayRates::new(r.gamma_ud, r.gamma_du, r.gamma_el)
    }
}

impl From<RateSet> for DecayRates {
    fn from(r: RateSet) -> Self {
        DecayRates::from(&r)
    }
}

/// Exact solution of the master equation after time `t` (s).
pub fn propagate(rho: &DensityMatrix, rates: &DecayRates, t: f64) -> Result<DensityMatrix> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    rates.validate()?;
    let relax = rates.gamma_ram();
    let (rho_uu, rho_dd) = if relax > 0.0 {
        let steady_uu = rates.gamma_du / relax;
        let steady_dd = rates.gamma_ud / relax;
        let decay = (-relax * t).exp();
        (steady_uu + (rho.rho_uu - steady_uu) * decay, steady_dd + (rho.rho_dd - steady_dd) * decay)
    } else {
        (rho.rho_uu, rho.rho_dd)
    };
    Ok(DensityMatrix { rho_uu, rho_dd, rho_ud: rho.rho_ud * (-rates.coherence_decay() * t).exp() })
}

#[derive(Clone, Copy)]
struct Derivative {
    uu: f64,
    dd: f64,
    ud: Complex64,
}

fn rhs(rates: &DecayRates, uu: f64, dd: f64, ud: Complex64) -> Derivative {
    Derivative {
        uu: -rates.gamma_ud * uu + rates.gamma_du * dd,
        dd: -rates.gamma_du * dd + rates.gamma_ud * uu,
        ud: -rates.coherence_decay() * ud,
    }
}

/// Fixed-step classical Runge-Kutta integration of the same master equation.
/// The interval is split into `ceil(t / dt)` equal steps.
pub fn rk4_propagate(rho: &DensityMatrix, rates: &DecayRates, t: f64, dt: f64) -> Result<DensityMatrix> {
    if t < 0.0 || t.is_nan() {
        return Err(Error::NegativeTime(t));
    }
    rates.validate()?;
    if !(dt > 0.0) {
        return Err(Error::StepTooLarge(format!("step must be positive, got {dt}")));
    }
    let max_rate = rates.max_rate().max(rates.gamma_ram());
    if dt * max_rate > 0.1 {
        return Err(Error::StepTooLarge(format!("dt = {dt:.3e} s exceeds 0.1 / max rate = {:.3e} s", 0.1 / max_rate)));
    }
    let n = (t / dt).ceil() as usize;
    if n == 0 {
        return Ok(*rho);
    }
    let h = t / n as f64;
    let (mut uu, mut dd, mut ud) = (rho.rho_uu, rho.rho_dd, rho.rho_ud);
    for _ in 0..n {
        let k1 = rhs(rates, uu, dd, ud);
        let k2 = rhs(rates, uu + 0.5 * h * k1.uu, dd + 0.5 * h * k1.dd, ud + 0.5 * h * k1.ud);
        let k3 = rhs(rates, uu + 0.5 * h * k2.uu, dd + 0.5 * h * k2.dd, ud + 0.5 * h * k2.ud);
        let k4 = rhs(rates, uu + h * k3.uu, dd + h * k3.dd, ud + h * k3.ud);
        uu += h / 6.0 * (k1.uu + 2.0 * k2.uu + 2.0 * k3.uu + k4.uu);
        dd += h / 6.0 * (k1.dd + 2.0 * k2.dd + 2.0 * k3.dd + k4.dd);
        ud += (k1.ud + 2.0 * k2.ud + 2.0 * k3.ud + k4.ud) * (h / 6.0);
    }
    Ok(DensityMatrix { rho_uu: uu, rho_dd: dd, rho_ud: ud })
}

/// Ideal instantaneous rotation by `theta` about the equatorial axis at
/// azimuth `phase`: `U = exp(-i theta (cos(phase) sx + sin(phase) sy) / 2)`.
pub fn apply_rotation(rho: &DensityMatrix, theta: f64, phase: f64) -> DensityMatrix {
    let u = rotation_matrix(theta, phase);
    let m = rho.to_matrix();
    let mut um = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            um[r][c] = u[r][0] * m[0][c] + u[r][1] * m[1][c];
        }
    }
    let mut out = [[Complex64::new(0.0, 0.0); 2]; 2];
    for r in 0..2 {
        for c in 0..2 {
            // (U rho U^dagger)_{rc} = sum_k (U rho)_{rk} conj(U_{ck})
            out[r][c] = um[r][0] * u[c][0].conj() + um[r][1] * u[c][1].conj();
        }
    }
    DensityMatrix::from_matrix(out)
}

pub(crate) fn rotation_matrix(theta: f64, phase: f64) -> [[Complex64; 2]; 2] {
    let c = (0.5 * theta).cos();
    let s = (0.5 * theta).sin();
    let minus_i = Complex64::new(0.0, -1.0);
    [
        [Complex64::new(c, 0.0), minus_i * s * Complex64::from_polar(1.0, -phase)],
        [minus_i * s * Complex64::from_polar(1.0, phase), Complex64::new(c, 0.0)],
    ]
}

/// Upper-state population at the end of the two-pi-pulse spin echo,
/// `(1 - exp(-(Gamma_ram + Gamma_el) tau / 2)) / 2`, for total light-on time `tau`.
pub fn spin_echo_analytic(rates: &DecayRates, tau: f64) -> f64 {
    0.5 * (1.0 - (-rates.coherence_decay() * tau).exp())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::Qubit;
    use std::f64::consts::PI;

    #[test]
    fn zero_time_and_zero_rates_are_identity() {
        let rho = DensityMatrix::from_bloch(0.2, 0.5, -0.3);
        let rates = DecayRates::new(3.0, 1.0, 7.0);
        assert_eq!(propagate(&rho, &rates, 0.0).unwrap(), rho);
        assert_eq!(propagate(&rho, &DecayRates::zero(), 12.0).unwrap(), rho);
        assert_eq!(rk4_propagate(&rho, &DecayRates::zero(), 12.0, 0.1).unwrap(), rho);
    }

    #[test]
    fn negative_time_rejected() {
        let rho = DensityMatrix::basis(Qubit::Up);
        assert_eq!(propagate(&rho, &DecayRates::zero(), -1.0), Err(Error::NegativeTime(-1.0)));
        assert!(rk4_propagate(&rho, &DecayRates::zero(), -1.0, 0.1).is_err());
    }

    #[test]
    fn one_way_pumping_matches_textbook() {
        let gamma = 40.0;
        let rates = DecayRates::new(0.0, gamma, 0.0);
        let rho0 = DensityMatrix::basis(Qubit::Down);
        for t in [0.001, 0.01, 0.05, 0.2] {
            let rho = propagate(&rho0, &rates, t).unwrap();
            assert!((rho.rho_uu - (1.0 - (-gamma * t).exp())).abs() < 1e-14);
            let rk = rk4_propagate(&rho0, &rates, t, 1e-5).unwrap();
            assert!((rk.rho_uu - rho.rho_uu).abs() < 1e-12);
        }
    }

    #[test]
    fn rk4_rejects_coarse_steps() {
        let rho = DensityMatrix::basis(Qubit::Up);
        let rates = DecayRates::new(100.0, 0.0, 0.0);
        assert!(matches!(rk4_propagate(&rho, &rates, 1.0, 0.01), Err(Error::StepTooLarge(_))));
        assert!(matches!(rk4_propagate(&rho, &rates, 1.0, 0.0), Err(Error::StepTooLarge(_))));
    }

    #[test]
    fn rotations() {
        let up = DensityMatrix::basis(Qubit::Up);
        for phase in [0.0, 0.4, 2.0, -1.3] {
            let flipped = apply_rotation(&up, PI, phase);
            assert!(flipped.max_abs_diff(&DensityMatrix::basis(Qubit::Down)) < 1e-15);
        }
        let half = apply_rotation(&up, 0.5 * PI, 0.0);
        assert!((half.rho_uu - 0.5).abs() < 1e-15);
        assert!((half.rho_ud.norm() - 0.5).abs() < 1e-15);

        let rho = DensityMatrix::from_bloch(0.1, -0.6, 0.3);
        let twice = apply_rotation(&apply_rotation(&rho, 0.5 * PI, 0.7), 0.5 * PI, 0.7);
        assert!(twice.max_abs_diff(&apply_rotation(&rho, PI, 0.7)) < 1e-15);
    }

    #[test]
    fn echo_closed_form_limits() {
        let rates = DecayRates::new(10.0, 20.0, 50.0);
        assert_eq!(spin_echo_analytic(&rates, 0.0), 0.0);
        assert!((spin_echo_analytic(&rates, 1e3) - 0.5).abs() < 1e-15);
        // slope at zero is (Gamma_ram + Gamma_el) / 4
        let h = 1e-7;
        let slope = (spin_echo_analytic(&rates, h) - spin_echo_analytic(&rates, 0.0)) / h;
        assert!((slope - 80.0 / 4.0).abs() < 1e-3);
    }
}
