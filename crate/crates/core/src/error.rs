use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("no such level: {0}")]
    InvalidLevel(String),

    /// A scattering path has a detuning inside the resonance floor, where the
    /// perturbative amplitude diverges.
    #[error(
        "laser is on resonance with {path}: |detuning| = {detuning_hz:.3e} Hz is below the floor {floor_hz:.3e} Hz"
    )]
    OnResonance { path: String, detuning_hz: f64, floor_hz: f64 },

    #[error("differential Stark shift does not change sign on [0, pi/2] (shift(0) = {at_zero:.6e} Hz, shift(pi/2) = {at_right_angle:.6e} Hz)")]
    NoNull { at_zero: f64, at_right_angle: f64 },

    #[error("negative evolution time {0} s")]
    NegativeTime(f64),

    #[error("step too large: {0}")]
    StepTooLarge(String),

    #[error("initial state is not pure (purity {0})")]
    NotPure(f64),

    #[error("degenerate data: {0}")]
    DegenerateData(String),

    #[error("fit did not converge after {iterations} iterations (last rate estimate {last_rate:.6e} s^-1)")]
    NotConverged { iterations: usize, last_rate: f64 },

    #[error("no usable points: {0}")]
    NoUsablePoints(String),

    #[error("precondition violated: {0}")]
    Precondition(String),
}
