use std::f64::consts::PI;

use serde::Serialize;

use super::density::DensityMatrix;
use super::propagate::{apply_rotation, propagate, DecayRates};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Segment {
    /// Instantaneous ideal rotation; angles in rad.
    Rotate { theta: f64, phase: f64 },
    /// Free evolution for `duration` seconds, with the scattering laser on iff `light`.
    Wait { duration: f64, light: bool },
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PulseSequence {
    segments: Vec<Segment>,
}

impl PulseSequence {
    pub fn new(segments: Vec<Segment>) -> Result<Self> {
        for (k, seg) in segments.iter().enumerate() {
            match *seg {
                Segment::Wait { duration, .. } if !(duration >= 0.0 && duration.is_finite()) => {
                    return Err(Error::Precondition(format!(
                        "segment {k}: duration must be finite and >= 0, got {duration}"
                    )));
                }
                Segment::Rotate { theta, phase } if !(theta.is_finite() && phase.is_finite()) => {
                    return Err(Error::Precondition(format!("segment {k}: rotation angles must be finite")));
                }
                _ => {}
            }
        }
        Ok(PulseSequence { segments })
    }

    /// Two-pi-pulse spin echo, `pi/2 - tau/4 - pi - tau/2 - pi - tau/4 - pi/2`,
    /// all pulses at phase 0 so that `|u>` returns to `|d>` without
    /// decoherence. The light is on during all four quarter windows.
    pub fn spin_echo(tau: f64) -> Result<Self> {
        let quarter = Segment::Wait { duration: 0.25 * tau, light: true };
        let half_pi = Segment::Rotate { theta: 0.5 * PI, phase: 0.0 };
        let pi = Segment::Rotate { theta: PI, phase: 0.0 };
        PulseSequence::new(vec![half_pi, quarter, pi, quarter, quarter, pi, quarter, half_pi])
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Total light-on time, s.
    pub fn light_time(&self) -> f64 {
        self.segments
            .iter()
            .map(|s| match *s {
                Segment::Wait { duration, light: true } => duration,
                _ => 0.0,
            })
            .sum()
    }
}

pub fn simulate_sequence(rho0: &DensityMatrix, seq: &PulseSequence, rates: &DecayRates) -> Result<DensityMatrix> {
    seq.segments().iter().try_fold(*rho0, |rho, seg| match *seg {
        Segment::Rotate { theta, phase } => Ok(apply_rotation(&rho, theta, phase)),
        Segment::Wait { duration, light: true } => propagate(&rho, rates, duration),
        Segment::Wait { duration, light: false } => propagate(&rho, &DecayRates::zero(), duration),
    })
}
