//! Theory curves and analysis built on the scattering and dynamics modules:
//! detuning sweeps, rate-measurement curves and their fits, and power-law
//! scaling probes.

mod fit;
mod scaling;
mod sweep;

pub use fit::{fit_rates, raman_population_curve, DecayCurve, DecayFitResult, FitMethod};
pub use scaling::{scaling_probe, RateField, ScalingFit};
pub use sweep::{
    count_crossings, find_rate_crossing, pi_resonances, rates_at, sweep, PolarizationMode, SweepRow, SweepSpec,
};
