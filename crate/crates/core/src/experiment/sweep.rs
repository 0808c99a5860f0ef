use std::f64::consts::PI;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::angular::HalfInt;
use crate::error::{Error, Result};
use crate::levels::{LevelStructure, Qubit};
use crate::scattering::{null_or_best_angle, rates, LaserField, LaserFrequency, RateSet, DEFAULT_RESONANCE_FLOOR_HZ};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub enum PolarizationMode {
    /// Per point, the angle that nulls the differential Stark shift, or the
    /// endpoint of `[0, pi/2]` with the smaller shift when no null exists.
    AutoNull,
    /// Fixed linear-polarization angle, rad.
    Fixed(f64),
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SweepSpec {
    /// Hz from the cycling transition.
    pub detuning_start: f64,
    pub detuning_stop: f64,
    pub n_points: usize,
    /// rad/s.
    pub rabi: f64,
    pub polarization: PolarizationMode,
    /// Hz.
    pub resonance_floor: f64,
}

impl Default for SweepSpec {
    fn default() -> Self {
        SweepSpec {
            detuning_start: -95e9,
            detuning_stop: -30e9,
            n_points: 651,
            rabi: 2.0 * PI * 1e6,
            polarization: PolarizationMode::AutoNull,
            resonance_floor: DEFAULT_RESONANCE_FLOOR_HZ,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_points < 2 {
            return Err(Error::InvalidConfig(format!("sweep needs at least 2 points, got {}", self.n_points)));
        }
        if !(self.detuning_start < self.detuning_stop) {
            return Err(Error::InvalidConfig("sweep start must lie below stop".into()));
        }
        if !(self.rabi >= 0.0 && self.rabi.is_finite()) {
            return Err(Error::InvalidConfig(format!("rabi must be finite and >= 0, got {}", self.rabi)));
        }
        Ok(())
    }

    pub fn grid(&self) -> Vec<f64> {
        let span = self.detuning_stop - self.detuning_start;
        let last = (self.n_points - 1) as f64;
        (0..self.n_points).map(|k| self.detuning_start + span * k as f64 / last).collect()
    }

    fn laser(&self, detuning: f64) -> LaserField {
        LaserField {
            resonance_floor: self.resonance_floor,
            ..LaserField::linear(LaserFrequency::FromCycling(detuning), self.rabi, 0.0)
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SweepRow {
    /// Hz from the cycling transition.
    pub detuning: f64,
    pub polarization_angle: Option<f64>,
    /// False when auto-null fell back to an endpoint angle.
    pub null_found: bool,
    /// `None` when the point sits within the resonance floor.
    pub rates: Option<RateSet>,
}

impl SweepRow {
    pub fn skipped(&self) -> bool {
        self.rates.is_none()
    }

    pub fn total_full(&self) -> Option<f64> {
        self.rates.map(|r| r.total_full())
    }

    pub fn total_ratediff(&self) -> Option<f64> {
        self.rates.map(|r| r.total_ratediff())
    }

    pub fn total_raman_only(&self) -> Option<f64> {
        self.rates.map(|r| r.total_raman_only())
    }
}

/// Rates at one detuning (Hz from cycling), with the polarization chosen per
/// `spec`. Returns the angle used and whether it is a true Stark null.
pub fn rates_at(levels: &LevelStructure, spec: &SweepSpec, detuning: f64) -> Result<(RateSet, f64, bool)> {
    let template = spec.laser(detuning);
    let (theta, found) = match spec.polarization {
        PolarizationMode::AutoNull => null_or_best_angle(levels, &template)?,
        PolarizationMode::Fixed(theta) => (theta, true),
    };
    let r = rates(levels, &template.with_angle(theta))?;
    Ok((r, theta, found))
}

fn row_at(levels: &LevelStructure, spec: &SweepSpec, detuning: f64) -> Result<SweepRow> {
    match rates_at(levels, spec, detuning) {
        Ok((r, theta, found)) => {
            Ok(SweepRow { detuning, polarization_angle: Some(theta), null_found: found, rates: Some(r) })
        }
        Err(Error::OnResonance { .. }) => {
            Ok(SweepRow { detuning, polarization_angle: None, null_found: false, rates: None })
        }
        Err(e) => Err(e),
    }
}

/// Rates on a linear detuning grid, in ascending detuning order. Points within
/// the resonance floor are kept as skipped rows.
pub fn sweep(levels: &LevelStructure, spec: &SweepSpec) -> Result<Vec<SweepRow>> {
    spec.validate()?;
    let rows = spec.grid().into_par_iter().map(|d| row_at(levels, spec, d)).collect::<Result<Vec<_>>>()?;
    if rows.iter().all(SweepRow::skipped) {
        return Err(Error::NoUsablePoints("every sweep point lies within the resonance floor".into()));
    }
    Ok(rows)
}

/// Offsets from the cycling transition (Hz) of the two pi resonances
/// `|u> -> |3/2, +1/2>` and `|d> -> |3/2, -1/2>`.
pub fn pi_resonances(levels: &LevelStructure) -> (f64, f64) {
    let cycling = levels.cycling_frequency();
    let j = HalfInt::THREE_HALVES;
    let u = levels.transition_frequency(Qubit::Up, j, HalfInt::HALF).expect("P3/2 present");
    let d = levels.transition_frequency(Qubit::Down, j, HalfInt::MINUS_HALF).expect("P3/2 present");
    (u - cycling, d - cycling)
}

/// Number of sign changes of `Gamma_uu - Gamma_dd` between consecutive
/// usable rows strictly inside `(lo, hi)`.
pub fn count_crossings(rows: &[SweepRow], lo: f64, hi: f64) -> usize {
    let signs: Vec<bool> = rows
        .iter()
        .filter(|r| r.detuning > lo && r.detuning < hi)
        .filter_map(|r| r.rates.map(|x| x.gamma_uu - x.gamma_dd))
        .filter(|v| *v != 0.0)
        .map(|v| v > 0.0)
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

/// Detuning (Hz from cycling) in `[lo, hi]` where `Gamma_uu = Gamma_dd`, by
/// bisection to 1 kHz.
pub fn find_rate_crossing(levels: &LevelStructure, spec: &SweepSpec, lo: f64, hi: f64) -> Result<f64> {
    let diff = |d: f64| rates_at(levels, spec, d).map(|(r, _, _)| r.gamma_uu - r.gamma_dd);
    let (mut lo, mut hi) = (lo, hi);
    let f_lo = diff(lo)?;
    let f_hi = diff(hi)?;
    if !(f_lo * f_hi < 0.0) {
        return Err(Error::Precondition(format!(
            "Gamma_uu - Gamma_dd does not change sign on [{lo:.6e}, {hi:.6e}] Hz"
        )));
    }
    let lo_negative = f_lo < 0.0;
    while hi - lo > 1e3 {
        let mid = 0.5 * (lo + hi);
        let f = diff(mid)?;
        if (f < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
