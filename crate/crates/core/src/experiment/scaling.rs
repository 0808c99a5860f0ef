use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::levels::{LevelStructure, Term};
use crate::scattering::{rates, LaserField, LaserFrequency, RateSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RateField {
    GammaUd,
    GammaDu,
    GammaUu,
    GammaDd,
    GammaRam,
    GammaEl,
    GammaElDiff,
}

impl RateField {
    pub fn get(self, r: &RateSet) -> f64 {
        match self {
            RateField::GammaUd => r.gamma_ud,
            RateField::GammaDu => r.gamma_du,
            RateField::GammaUu => r.gamma_uu,
            RateField::GammaDd => r.gamma_dd,
            RateField::GammaRam => r.gamma_ram,
            RateField::GammaEl => r.gamma_el,
            RateField::GammaElDiff => r.gamma_el_diff,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ScalingFit {
    /// d ln(rate) / d ln|detuning|.
    pub slope: f64,
    pub intercept: f64,
    pub points_used: usize,
}

/// Largest |offset| of any P3/2 transition from the P3/2 line centroid, Hz.
fn p32_spread(levels: &LevelStructure) -> f64 {
    let centroid = levels.p32_line_centroid();
    levels
        .transitions()
        .iter()
        .filter(|t| t.to.term == Term::P32)
        .map(|t| (t.frequency - centroid).abs())
        .fold(0.0, f64::max)
}

/// Log-log slope of one rate against detuning. Detunings are signed offsets
/// (Hz) of the laser from the P3/2 line centroid and must all exceed ten times
/// the spread of the P3/2 resonances about that centroid. The polarization
/// and Rabi frequency come from `template`; its frequency is ignored.
pub fn scaling_probe(
    levels: &LevelStructure,
    template: &LaserField,
    detunings: &[f64],
    field: RateField,
) -> Result<ScalingFit> {
    let centroid = levels.p32_line_centroid();
    let spread = p32_spread(levels);
    let mut xs = Vec::with_capacity(detunings.len());
    let mut ys = Vec::with_capacity(detunings.len());
    for &delta in detunings {
        if delta.abs() < 10.0 * spread {
            return Err(Error::Precondition(format!(
                "detuning {delta:.6e} Hz is within 10x the resonance spread {spread:.6e} Hz"
            )));
        }
        let laser = template.with_frequency(LaserFrequency::Absolute(centroid + delta));
        let value = field.get(&rates(levels, &laser)?);
        if value > 0.0 && value.is_finite() {
            xs.push(delta.abs().ln());
            ys.push(value.ln());
        }
    }
    if xs.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 usable detunings, got {}", xs.len())));
    }
    let n = xs.len() as f64;
    let mean_x = xs.iter().sum::<f64>() / n;
    let mean_y = ys.iter().sum::<f64>() / n;
    let sxx: f64 = xs.iter().map(|x| (x - mean_x).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mean_x) * (y - mean_y)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Precondition("detunings must span more than one magnitude".into()));
    }
    let slope = sxy / sxx;
    Ok(ScalingFit { slope, intercept: mean_y - slope * mean_x, points_used: xs.len() })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::levels::{build_levels, PhysicalConfig};

    #[test]
    fn rejects_near_detunings() {
        let levels = build_levels(&PhysicalConfig::default()).unwrap();
        let laser = LaserField::linear(LaserFrequency::FromCycling(0.0), 1e6, 0.5);
        let err = scaling_probe(&levels, &laser, &[-1e11, -2e12, -3e12], RateField::GammaEl).unwrap_err();
        assert!(matches!(err, Error::Precondition(_)));
    }

    #[test]
    fn needs_three_points() {
        let levels = build_levels(&PhysicalConfig::default()).unwrap();
        let laser = LaserField::linear(LaserFrequency::FromCycling(0.0), 1e6, 0.5);
        assert!(scaling_probe(&levels, &laser, &[-5e12, -6e12], RateField::GammaUu).is_err());
    }
}
