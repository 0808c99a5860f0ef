//! Quantum-jump unraveling of the qubit master equation.
//!
//! Jump operators: `sqrt(Gamma_ud) s-`, `sqrt(Gamma_du) s+`, and
//! `(sqrt(Gamma_el) / 2) sz`. Each step of length `h` jumps with the
//! first-order probability `h <C^dagger C>`; otherwise the state evolves under
//! the non-Hermitian no-jump propagator and is renormalized.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::density::DensityMatrix;
use super::propagate::{rotation_matrix, DecayRates};
use super::sequence::{PulseSequence, Segment};
use crate::error::{Error, Result};

/// Upper bound on `dt * max rate` for trajectory stepping.
pub const MAX_STEP_RATE_PRODUCT: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TrajectoryConfig {
    pub n_trajectories: usize,
    pub seed: u64,
    /// s.
    pub dt: f64,
}

impl TrajectoryConfig {
    pub fn validate(&self, rates: &DecayRates) -> Result<()> {
        if self.n_trajectories == 0 {
            return Err(Error::Precondition("n_trajectories must be at least 1".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::StepTooLarge(format!("dt must be positive, got {}", self.dt)));
        }
        let product = self.dt * rates.max_rate();
        if product >= MAX_STEP_RATE_PRODUCT {
            return Err(Error::StepTooLarge(format!(
                "dt * max rate = {product:.3e} must stay below {MAX_STEP_RATE_PRODUCT}"
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrajectoryEstimate {
    pub rho_uu: f64,
    pub rho_uu_stderr: f64,
    pub rho_dd: f64,
    pub rho_dd_stderr: f64,
    /// Ensemble mean of `c_u conj(c_d)`.
    pub rho_ud: Complex64,
    pub n_trajectories: usize,
    pub seed: u64,
}

#[derive(Clone, Copy)]
struct PureState {
    u: Complex64,
    d: Complex64,
}

impl PureState {
    fn from_density(rho: &DensityMatrix) -> Result<Self> {
        let purity = rho.purity();
        if (purity - 1.0).abs() > 1e-9 || (rho.trace() - 1.0).abs() > 1e-9 {
            return Err(Error::NotPure(purity));
        }
        Ok(if rho.rho_uu >= rho.rho_dd {
            let u = rho.rho_uu.sqrt();
            PureState { u: Complex64::new(u, 0.0), d: rho.rho_ud.conj() / u }
        } else {
            let d = rho.rho_dd.sqrt();
            PureState { u: rho.rho_ud / d, d: Complex64::new(d, 0.0) }
        })
    }

    fn normalize(&mut self) {
        let norm = (self.u.norm_sqr() + self.d.norm_sqr()).sqrt();
        self.u /= norm;
        self.d /= norm;
    }

    fn rotate(&mut self, theta: f64, phase: f64) {
        let m = rotation_matrix(theta, phase);
        let (u, d) = (self.u, self.d);
        self.u = m[0][0] * u + m[0][1] * d;
        self.d = m[1][0] * u + m[1][1] * d;
    }
}

fn evolve_lit(state: &mut PureState, rates: &DecayRates, duration: f64, dt: f64, rng: &mut ChaCha8Rng) {
    let n = (duration / dt).ceil() as usize;
    if n == 0 {
        return;
    }
    let h = duration / n as f64;
    let damp_u = (-0.5 * rates.gamma_ud * h).exp();
    let damp_d = (-0.5 * rates.gamma_du * h).exp();
    let p_dephase = 0.25 * rates.gamma_el * h;
    for _ in 0..n {
        let p_down = rates.gamma_ud * state.u.norm_sqr() * h;
        let p_up = rates.gamma_du * state.d.norm_sqr() * h;
        let r: f64 = rng.gen();
        if r < p_down {
            // s- |u> = |d>, keeping the phase of c_u
            let phase = state.u / state.u.norm();
            *state = PureState { u: Complex64::new(0.0, 0.0), d: phase };
        } else if r < p_down + p_up {
            let phase = state.d / state.d.norm();
            *state = PureState { u: phase, d: Complex64::new(0.0, 0.0) };
        } else if r < p_down + p_up + p_dephase {
            state.d = -state.d;
        } else {
            state.u *= damp_u;
            state.d *= damp_d;
            state.normalize();
        }
    }
}

fn run_one(
    initial: PureState,
    seq: &PulseSequence,
    rates: &DecayRates,
    cfg: &TrajectoryConfig,
    index: u64,
) -> PureState {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(index);
    let mut state = initial;
    for seg in seq.segments() {
        match *seg {
            Segment::Rotate { theta, phase } => state.rotate(theta, phase),
            Segment::Wait { duration, light: true } => evolve_lit(&mut state, rates, duration, cfg.dt, &mut rng),
            Segment::Wait { light: false, .. } => {}
        }
    }
    state
}

/// Monte Carlo estimate of the final populations. Trajectory `k` draws from
/// stream `k` of a ChaCha8 generator seeded with `cfg.seed`, so results do
/// not depend on thread scheduling. Standard errors are the sample standard
/// deviation of the per-trajectory populations over `sqrt(n)`.
pub fn run_trajectories(
    rho0: &DensityMatrix,
    seq: &PulseSequence,
    rates: &DecayRates,
    cfg: &TrajectoryConfig,
) -> Result<TrajectoryEstimate> {
    rates.validate()?;
    cfg.validate(rates)?;
    let initial = PureState::from_density(rho0)?;

    let finals: Vec<PureState> =
        (0..cfg.n_trajectories as u64).into_par_iter().map(|k| run_one(initial, seq, rates, cfg, k)).collect();

    // Welford accumulation in trajectory order
    let mut mean_uu = 0.0;
    let mut m2_uu = 0.0;
    let mut mean_dd = 0.0;
    let mut m2_dd = 0.0;
    let mut mean_ud = Complex64::new(0.0, 0.0);
    for (k, s) in finals.iter().enumerate() {
        let count = (k + 1) as f64;
        let uu = s.u.norm_sqr();
        let dd = s.d.norm_sqr();
        let delta_uu = uu - mean_uu;
        mean_uu += delta_uu / count;
        m2_uu += delta_uu * (uu - mean_uu);
        let delta_dd = dd - mean_dd;
        mean_dd += delta_dd / count;
        m2_dd += delta_dd * (dd - mean_dd);
        mean_ud += (s.u * s.d.conj() - mean_ud) / count;
    }
    let n = finals.len() as f64;
    let stderr = |m2: f64| if finals.len() > 1 { (m2 / (n - 1.0) / n).sqrt() } else { 0.0 };
    Ok(TrajectoryEstimate {
        rho_uu: mean_uu,
        rho_uu_stderr: stderr(m2_uu),
        rho_dd: mean_dd,
        rho_dd_stderr: stderr(m2_dd),
        rho_ud: mean_ud,
        n_trajectories: cfg.n_trajectories,
        seed: cfg.seed,
    })
}
