//! Kramers-Heisenberg scattering amplitudes between the qubit levels and the
//! Raman, Rayleigh, and decoherence rates built from them.

use std::f64::consts::{PI, SQRT_2, TAU};

use serde::{Deserialize, Serialize};

use crate::angular::HalfInt;
use crate::error::{Error, Result};
use crate::levels::{dipole_ratio, Detuning, LevelStructure, Qubit};

/// Smallest |detuning| (Hz) at which a scattering path is still treated
/// perturbatively.
pub const DEFAULT_RESONANCE_FLOOR_HZ: f64 = 10e6;

/// The two excited manifolds, indexed in [`AmplitudeTable`] as 0 (J=1/2) and 1 (J=3/2).
pub const EXCITED_J: [HalfInt; 2] = [HalfInt::HALF, HalfInt::THREE_HALVES];

pub const LAMBDAS: [i32; 3] = [-1, 0, 1];

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum LaserFrequency {
    /// Absolute optical frequency, Hz.
    Absolute(f64),
    /// Offset from the `|u> -> |3/2, 3/2>` cycling transition, Hz.
    FromCycling(f64),
}

/// Real spherical polarization amplitudes `b_lambda` for `lambda = -1, 0, +1`,
/// with `eps_{+-1} = -+(x +- i y)/sqrt(2)` and `eps_0 = z` along the field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Polarization {
    components: [f64; 3],
}

impl Polarization {
    /// Linear polarization at angle `theta` (rad) to the field, beam
    /// perpendicular to the field: `b0 = cos(theta)`, `b_{+-1} = -+ sin(theta)/sqrt(2)`.
    pub fn linear(theta: f64) -> Self {
        let s = theta.sin() / SQRT_2;
        Polarization { components: [s, theta.cos(), -s] }
    }

    pub fn from_components(b_minus: f64, b_pi: f64, b_plus: f64) -> Result<Self> {
        let norm = b_minus * b_minus + b_pi * b_pi + b_plus * b_plus;
        if (norm - 1.0).abs() > 1e-12 {
            return Err(Error::InvalidConfig(format!(
                "polarization amplitudes must have unit norm, got sum |b|^2 = {norm}"
            )));
        }
        Ok(Polarization { components: [b_minus, b_pi, b_plus] })
    }

    pub fn component(&self, lambda: i32) -> f64 {
        match lambda {
            -1 => self.components[0],
            0 => self.components[1],
            1 => self.components[2],
            _ => 0.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LaserField {
    pub frequency: LaserFrequency,
    /// `Omega_R = mu E0 / (2 hbar)`, rad/s.
    pub rabi: f64,
    pub polarization: Polarization,
    /// Angle used to build `polarization`, when it is linear.
    pub polarization_angle: Option<f64>,
    /// Hz.
    pub resonance_floor: f64,
}

impl LaserField {
    pub fn linear(frequency: LaserFrequency, rabi: f64, theta: f64) -> Self {
        LaserField {
            frequency,
            rabi,
            polarization: Polarization::linear(theta),
            polarization_angle: Some(theta),
            resonance_floor: DEFAULT_RESONANCE_FLOOR_HZ,
        }
    }

    pub fn with_angle(&self, theta: f64) -> Self {
        LaserField { polarization: Polarization::linear(theta), polarization_angle: Some(theta), ..*self }
    }

    pub fn with_frequency(&self, frequency: LaserFrequency) -> Self {
        LaserField { frequency, ..*self }
    }

    pub fn with_rabi(&self, rabi: f64) -> Self {
        LaserField { rabi, ..*self }
    }

    /// Absolute laser frequency, Hz.
    pub fn omega0(&self, levels: &LevelStructure) -> f64 {
        match self.frequency {
            LaserFrequency::Absolute(f) => f,
            LaserFrequency::FromCycling(offset) => levels.cycling_frequency() + offset,
        }
    }

    pub fn detuning_from_cycling(&self, levels: &LevelStructure) -> f64 {
        match self.frequency {
            LaserFrequency::Absolute(f) => f - levels.cycling_frequency(),
            LaserFrequency::FromCycling(offset) => offset,
        }
    }
}

fn qubit_index(q: Qubit) -> usize {
    match q {
        Qubit::Up => 0,
        Qubit::Down => 1,
    }
}

fn j_index(j: HalfInt) -> Option<usize> {
    EXCITED_J.iter().position(|&x| x == j)
}

/// Scattering amplitudes `A^{i->j}_{J,lambda}` in s/rad: the product of the
/// absorption and emission dipole ratios, weighted by `b_lambda` and divided
/// by the angular detuning of the intermediate level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AmplitudeTable {
    // [i][j][J][lambda + 1]
    entries: [[[[f64; 3]; 2]; 2]; 2],
}

impl AmplitudeTable {
    pub fn get(&self, i: Qubit, j: Qubit, excited_j: HalfInt, lambda: i32) -> f64 {
        match (j_index(excited_j), lambda) {
            (Some(ji), -1..=1) => self.entries[qubit_index(i)][qubit_index(j)][ji][(lambda + 1) as usize],
            _ => 0.0,
        }
    }

    /// Coherent sum over intermediate manifolds, `sum_J A^{i->j}_{J,lambda}`.
    pub fn summed(&self, i: Qubit, j: Qubit, lambda: i32) -> f64 {
        EXCITED_J.iter().map(|&ej| self.get(i, j, ej, lambda)).sum()
    }
}

fn on_resonance(i: Qubit, j: HalfInt, mj: HalfInt, detuning_hz: f64, floor: f64) -> Error {
    Error::OnResonance { path: format!("|{}> -> |{}, {}>", i.label(), j, mj), detuning_hz, floor_hz: floor }
}

pub fn amplitudes(levels: &LevelStructure, laser: &LaserField) -> Result<AmplitudeTable> {
    let omega0 = laser.omega0(levels);
    let mut entries = [[[[0.0; 3]; 2]; 2]; 2];
    for i in Qubit::BOTH {
        for (ji, &ej) in EXCITED_J.iter().enumerate() {
            for lambda in LAMBDAS {
                let b = laser.polarization.component(lambda);
                if b == 0.0 {
                    continue;
                }
                let Detuning::Hz(delta) = levels.detuning(i, ej, lambda, omega0) else {
                    continue;
                };
                let mj = i.mj() + HalfInt::from_int(lambda);
                if delta.abs() < laser.resonance_floor {
                    return Err(on_resonance(i, ej, mj, delta, laser.resonance_floor));
                }
                let absorb = dipole_ratio(i.mj(), ej, mj, lambda);
                for j in Qubit::BOTH {
                    let emitted = (mj - j.mj()).twice() / 2;
                    if !(-1..=1).contains(&emitted) {
                        continue;
                    }
                    let emit = dipole_ratio(j.mj(), ej, mj, emitted);
                    entries[qubit_index(i)][qubit_index(j)][ji][(lambda + 1) as usize] =
                        b * emit * absorb / (TAU * delta);
                }
            }
        }
    }
    Ok(AmplitudeTable { entries })
}

/// Scattering and decoherence rates, s^-1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RateSet {
    /// Raman `u -> d`.
    pub gamma_ud: f64,
    /// Raman `d -> u`.
    pub gamma_du: f64,
    /// Rayleigh `u -> u`.
    pub gamma_uu: f64,
    /// Rayleigh `d -> d`.
    pub gamma_dd: f64,
    pub gamma_ram: f64,
    /// Elastic decoherence rate from the squared difference of the u and d
    /// elastic amplitudes.
    pub gamma_el: f64,
    /// Rate-difference comparison model, stored as
    /// `2 (Gamma_uu - Gamma_dd)^2 / (Gamma_uu + Gamma_dd)` so that the
    /// decoherence rate it predicts is `(Gamma_ram + gamma_el_diff) / 2`.
    pub gamma_el_diff: f64,
}

impl RateSet {
    pub fn from_channels(gamma_ud: f64, gamma_du: f64, gamma_uu: f64, gamma_dd: f64, gamma_el: f64) -> Self {
        let elastic_total = gamma_uu + gamma_dd;
        let gamma_el_diff = if elastic_total > 0.0 { 2.0 * (gamma_uu - gamma_dd).powi(2) / elastic_total } else { 0.0 };
        RateSet { gamma_ud, gamma_du, gamma_uu, gamma_dd, gamma_ram: gamma_ud + gamma_du, gamma_el, gamma_el_diff }
    }

    pub fn zero() -> Self {
        RateSet::from_channels(0.0, 0.0, 0.0, 0.0, 0.0)
    }

    pub fn population_rate(&self, i: Qubit, j: Qubit) -> f64 {
        match (i, j) {
            (Qubit::Up, Qubit::Down) => self.gamma_ud,
            (Qubit::Down, Qubit::Up) => self.gamma_du,
            (Qubit::Up, Qubit::Up) => self.gamma_uu,
            (Qubit::Down, Qubit::Down) => self.gamma_dd,
        }
    }

    /// Coherence decay rate `(Gamma_ram + Gamma_el) / 2`.
    pub fn total_full(&self) -> f64 {
        0.5 * (self.gamma_ram + self.gamma_el)
    }

    pub fn total_ratediff(&self) -> f64 {
        0.5 * (self.gamma_ram + self.gamma_el_diff)
    }

    pub fn total_raman_only(&self) -> f64 {
        0.5 * self.gamma_ram
    }

    pub fn scaled(&self, factor: f64) -> Self {
        RateSet::from_channels(
            self.gamma_ud * factor,
            self.gamma_du * factor,
            self.gamma_uu * factor,
            self.gamma_dd * factor,
            self.gamma_el * factor,
        )
    }
}

/// Rates from an amplitude table, given `Omega_R` (rad/s) and `gamma` (s^-1).
pub fn rates_from_amplitudes(table: &AmplitudeTable, rabi: f64, gamma: f64) -> RateSet {
    let prefactor = rabi * rabi * gamma;
    let channel =
        |i: Qubit, j: Qubit| -> f64 { prefactor * LAMBDAS.iter().map(|&l| table.summed(i, j, l).powi(2)).sum::<f64>() };
    let gamma_el = prefactor
        * LAMBDAS
            .iter()
            .map(|&l| (table.summed(Qubit::Down, Qubit::Down, l) - table.summed(Qubit::Up, Qubit::Up, l)).powi(2))
            .sum::<f64>();
    RateSet::from_channels(
        channel(Qubit::Up, Qubit::Down),
        channel(Qubit::Down, Qubit::Up),
        channel(Qubit::Up, Qubit::Up),
        channel(Qubit::Down, Qubit::Down),
        gamma_el,
    )
}

pub fn rates(levels: &LevelStructure, laser: &LaserField) -> Result<RateSet> {
    let table = amplitudes(levels, laser)?;
    Ok(rates_from_amplitudes(&table, laser.rabi, levels.gamma))
}

/// Second-order light shift of one qubit level, Hz. Negative for red detuning.
pub fn light_shift(levels: &LevelStructure, laser: &LaserField, i: Qubit) -> Result<f64> {
    let omega0 = laser.omega0(levels);
    let mut shift = 0.0;
    for ej in EXCITED_J {
        for lambda in LAMBDAS {
            let b = laser.polarization.component(lambda);
            if b == 0.0 {
                continue;
            }
            let Detuning::Hz(delta) = levels.detuning(i, ej, lambda, omega0) else {
                continue;
            };
            let mj = i.mj() + HalfInt::from_int(lambda);
            if delta.abs() < laser.resonance_floor {
                return Err(on_resonance(i, ej, mj, delta, laser.resonance_floor));
            }
            let r = dipole_ratio(i.mj(), ej, mj, lambda);
            shift -= b * b * r * r / (TAU * delta);
        }
    }
    // Omega_R^2 / delta is angular; divide once more by 2 pi for Hz
    Ok(laser.rabi * laser.rabi * shift / TAU)
}

/// Light shift of the qubit frequency, `(dE_u - dE_d) / h` in Hz. Positive
/// when the qubit frequency increases.
pub fn differential_stark_shift(levels: &LevelStructure, laser: &LaserField) -> Result<f64> {
    Ok(light_shift(levels, laser, Qubit::Up)? - light_shift(levels, laser, Qubit::Down)?)
}

/// Bisection tolerance for null angles, rad.
pub const NULL_ANGLE_TOLERANCE: f64 = 1e-10;

/// Root of `shift` on `[0, pi/2]` by bisection, requiring a strict sign change
/// between the endpoints.
pub fn bisect_null<F>(mut shift: F) -> Result<f64>
where
    F: FnMut(f64) -> Result<f64>,
{
    let mut lo = 0.0;
    let mut hi = 0.5 * PI;
    let f_lo = shift(lo)?;
    let f_hi = shift(hi)?;
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::NoNull { at_zero: f_lo, at_right_angle: f_hi });
    }
    let lo_negative = f_lo < 0.0;
    while hi - lo > NULL_ANGLE_TOLERANCE {
        let mid = 0.5 * (lo + hi);
        let f_mid = shift(mid)?;
        if f_mid == 0.0 {
            return Ok(mid);
        }
        if (f_mid < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}

/// Linear-polarization angle at which the differential Stark shift vanishes.
/// The polarization in `laser` is ignored.
pub fn find_null_angle(levels: &LevelStructure, laser: &LaserField) -> Result<f64> {
    bisect_null(|theta| differential_stark_shift(levels, &laser.with_angle(theta)))
}

/// Null angle if one exists; otherwise whichever of 0 and pi/2 has the
/// smaller |shift|. The shift is affine in `cos^2(theta)`, so its minimum
/// magnitude without a root sits at an endpoint. The flag reports whether a
/// true null was found.
pub fn null_or_best_angle(levels: &LevelStructure, laser: &LaserField) -> Result<(f64, bool)> {
    match find_null_angle(levels, laser) {
        Ok(theta) => Ok((theta, true)),
        Err(Error::NoNull { at_zero, at_right_angle }) => {
            let theta = if at_zero.abs() <= at_right_angle.abs() { 0.0 } else { 0.5 * PI };
            Ok((theta, false))
        }
        Err(e) => Err(e),
    }
}
