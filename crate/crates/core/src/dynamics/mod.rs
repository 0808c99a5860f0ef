//! Open-system dynamics of the qubit under scattering: the reduced density
//! matrix obeys a Lindblad equation whose populations follow two-state rate
//! equations while the coherence decays at `(Gamma_ram + Gamma_el) / 2`.

mod density;
mod propagate;
mod sequence;
mod trajectories;

pub use density::DensityMatrix;
pub use propagate::{apply_rotation, propagate, rk4_propagate, spin_echo_analytic, DecayRates};
pub use sequence::{simulate_sequence, PulseSequence, Segment};
pub use trajectories::{run_trajectories, TrajectoryConfig, TrajectoryEstimate, MAX_STEP_RATE_PRODUCT};
