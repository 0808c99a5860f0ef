//! Rate extraction from population curves.
//!
//! All three curve kinds reduce to `z(t) = a (1 - exp(-k t))` after an
//! offset and sign flip:
//!
//! | curve            | measured `rho_uu(t)`     | reported rate   |
//! |------------------|--------------------------|-----------------|
//! | Raman from `d`   | `a (1 - e^{-kt})`        | `a k = Gamma_du`|
//! | Raman from `u`   | `1 - a (1 - e^{-kt})`    | `a k = Gamma_ud`|
//! | spin echo        | `(1 - e^{-kt}) / 2`      | `k`, the coherence decay rate `(Gamma_ram + Gamma_el)/2` |

use serde::{Deserialize, Serialize};

use crate::dynamics::{propagate, DecayRates, DensityMatrix};
use crate::error::{Error, Result};
use crate::levels::Qubit;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DecayCurve {
    /// Upper-state population after preparing the given level, laser on.
    Raman(Qubit),
    /// Upper-state population at the end of the two-pi-pulse echo versus
    /// light-on time.
    SpinEcho,
}

impl DecayCurve {
    fn offset_and_sign(self) -> (f64, f64) {
        match self {
            DecayCurve::Raman(Qubit::Up) => (1.0, -1.0),
            DecayCurve::Raman(Qubit::Down) | DecayCurve::SpinEcho => (0.0, 1.0),
        }
    }

    fn fixed_amplitude(self) -> Option<f64> {
        match self {
            DecayCurve::SpinEcho => Some(0.5),
            DecayCurve::Raman(_) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitMethod {
    EarlySlope,
    FullExponential,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DecayFitResult {
    /// s^-1.
    pub rate: f64,
    /// One standard deviation from the linearized covariance, s^-1.
    pub uncertainty: f64,
    pub method: FitMethod,
    /// Root of the residual sum of squares over the points used.
    pub residual_norm: f64,
    pub points_used: usize,
    pub iterations: usize,
}

/// `rho_uu(t)` after preparing `initial`, from the closed-form rate equations.
pub fn raman_population_curve(rates: &DecayRates, initial: Qubit, times: &[f64]) -> Result<Vec<f64>> {
    let rho0 = DensityMatrix::basis(initial);
    times.iter().map(|&t| propagate(&rho0, rates, t).map(|r| r.rho_uu)).collect()
}

/// Window is `t < EARLY_WINDOW / k`.
const EARLY_WINDOW: f64 = 0.2;
const MAX_ITERATIONS: usize = 100;
const RELATIVE_TOLERANCE: f64 = 1e-10;

pub fn fit_rates(times: &[f64], populations: &[f64], curve: DecayCurve, method: FitMethod) -> Result<DecayFitResult> {
    if times.len() != populations.len() {
        return Err(Error::Precondition(format!("{} times but {} populations", times.len(), populations.len())));
    }
    if times.len() < 3 {
        return Err(Error::Precondition(format!("need at least 3 points, got {}", times.len())));
    }
    for (&t, &p) in times.iter().zip(populations) {
        if !(t >= 0.0 && t.is_finite()) {
            return Err(Error::Precondition(format!("time {t} must be finite and >= 0")));
        }
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::Precondition(format!("population {p} outside [0, 1]")));
        }
    }
    if populations.iter().all(|&p| p == populations[0]) {
        return Err(Error::DegenerateData("populations have zero variance".into()));
    }

    let mut points: Vec<(f64, f64)> = times.iter().copied().zip(populations.iter().copied()).collect();
    points.sort_by(|a, b| a.0.total_cmp(&b.0));
    let (offset, sign) = curve.offset_and_sign();
    let z: Vec<(f64, f64)> = points.iter().map(|&(t, p)| (t, sign * (p - offset))).collect();

    match method {
        FitMethod::EarlySlope => Ok(early_slope(&z, curve)?.result(curve)),
        FitMethod::FullExponential => {
            let mut starts = vec![rise_time_guess(&z, curve)];
            if let Ok(early) = early_slope(&z, curve) {
                let k = early.decay_constant(curve);
                starts.push((curve.fixed_amplitude().unwrap_or((early.slope / k).min(1.0)), k));
            }
            let start = starts
                .into_iter()
                .filter(|&(a, k)| a > 0.0 && k > 0.0 && k.is_finite())
                .min_by(|x, y| model_rss(&z, x.0, x.1).total_cmp(&model_rss(&z, y.0, y.1)))
                .ok_or_else(|| Error::DegenerateData("no rise in the data".into()))?;
            full_exponential(&z, curve, start)
        }
    }
}

/// Amplitude from the largest value, decay constant from the first time the
/// data reach `1 - 1/e` of it.
fn rise_time_guess(z: &[(f64, f64)], curve: DecayCurve) -> (f64, f64) {
    let a = curve.fixed_amplitude().unwrap_or_else(|| z.iter().map(|p| p.1).fold(0.0, f64::max));
    let target = (1.0 - (-1.0f64).exp()) * a;
    let t_rise = z.iter().find(|&&(t, y)| t > 0.0 && y >= target).map_or(f64::NAN, |p| p.0);
    (a, 1.0 / t_rise)
}

struct EarlyFit {
    /// Initial slope of `z`.
    slope: f64,
    slope_sigma: f64,
    /// Coefficient of `t^2`.
    curvature: f64,
    residual_norm: f64,
    points_used: usize,
    iterations: usize,
}

impl EarlyFit {
    fn result(&self, curve: DecayCurve) -> DecayFitResult {
        // rate = a k for Raman curves, k = slope / a for the echo
        let scale = curve.fixed_amplitude().map_or(1.0, |a| 1.0 / a);
        DecayFitResult {
            rate: (scale * self.slope).max(0.0),
            uncertainty: scale * self.slope_sigma,
            method: FitMethod::EarlySlope,
            residual_norm: self.residual_norm,
            points_used: self.points_used,
            iterations: self.iterations,
        }
    }

    /// Estimate of the exponential constant `k`.
    fn decay_constant(&self, curve: DecayCurve) -> f64 {
        let from_amplitude = self.slope / curve.fixed_amplitude().unwrap_or(1.0);
        let from_curvature = if self.curvature < 0.0 { -2.0 * self.curvature / self.slope } else { 0.0 };
        from_amplitude.max(from_curvature)
    }
}

/// Weighted straight-line fit of the secant slope `z / t` against `t` with
/// weights `t^2`; the intercept is the initial slope of `z` and the line's
/// gradient absorbs the leading curvature. Algebraically this is the
/// unweighted least-squares fit of `z = s t + c t^2`.
fn secant_line_fit(points: &[(f64, f64)]) -> Result<EarlyFit> {
    let used: Vec<(f64, f64)> = points.iter().copied().filter(|&(t, _)| t > 0.0).collect();
    let n = used.len();
    if n < 3 {
        return Err(Error::DegenerateData(format!("only {n} points with t > 0 in the fit window")));
    }
    let (mut s22, mut s23, mut s33, mut s2z, mut s3z) = (0.0, 0.0, 0.0, 0.0, 0.0);
    for &(t, z) in &used {
        let t2 = t * t;
        s22 += t2;
        s23 += t2 * t;
        s33 += t2 * t2;
        s2z += t * z;
        s3z += t2 * z;
    }
    let det = s22 * s33 - s23 * s23;
    if !(det > 0.0) {
        return Err(Error::DegenerateData("early-time design matrix is singular".into()));
    }
    let slope = (s33 * s2z - s23 * s3z) / det;
    let curvature = (s22 * s3z - s23 * s2z) / det;
    let rss: f64 = used.iter().map(|&(t, z)| (z - slope * t - curvature * t * t).powi(2)).sum();
    let sigma2 = rss / (n - 2) as f64;
    Ok(EarlyFit {
        slope,
        slope_sigma: (sigma2 * s33 / det).sqrt(),
        curvature,
        residual_norm: rss.sqrt(),
        points_used: n,
        iterations: 1,
    })
}

/// The first three positive-time points, plus any further points inside
/// `t < EARLY_WINDOW / k`.
fn window(points: &[(f64, f64)], k: f64) -> Vec<(f64, f64)> {
    let limit = EARLY_WINDOW / k;
    let mut positive = 0;
    points
        .iter()
        .copied()
        .take_while(|&(t, _)| {
            if t > 0.0 {
                positive += 1;
            }
            t < limit || positive <= 3
        })
        .collect()
}

fn early_slope(z: &[(f64, f64)], curve: DecayCurve) -> Result<EarlyFit> {
    // initial estimate from the first three points, then two windowed passes
    let first_three: Vec<(f64, f64)> = z.iter().copied().filter(|&(t, _)| t > 0.0).take(3).collect();
    let mut fit = secant_line_fit(&first_three)?;
    for pass in 0..2 {
        if !(fit.slope > 0.0) {
            return Err(Error::DegenerateData("no rise in the early-time data".into()));
        }
        let k = fit.decay_constant(curve);
        fit = secant_line_fit(&window(z, k))?;
        fit.iterations = pass + 2;
    }
    if !(fit.slope > 0.0) {
        return Err(Error::DegenerateData("no rise in the early-time data".into()));
    }
    Ok(fit)
}

fn model_rss(z: &[(f64, f64)], a: f64, k: f64) -> f64 {
    z.iter().map(|&(t, y)| (y - a * (1.0 - (-k * t).exp())).powi(2)).sum()
}

/// Gauss-Newton on `z = a (1 - exp(-k t))` with step halving to keep the
/// residual decreasing and both parameters positive.
fn full_exponential(z: &[(f64, f64)], curve: DecayCurve, start: (f64, f64)) -> Result<DecayFitResult> {
    let fixed_a = curve.fixed_amplitude();
    let (mut a, mut k) = start;
    let n_params = if fixed_a.is_some() { 1 } else { 2 };
    let n = z.len();
    if n <= n_params {
        return Err(Error::Precondition(format!("need more than {n_params} points")));
    }

    let mut rss = model_rss(z, a, k);
    let mut converged = false;
    let mut iterations = 0;
    while iterations < MAX_ITERATIONS {
        iterations += 1;
        // normal equations J^T J dp = J^T r, columns (d/da, d/dk)
        let (mut jaa, mut jak, mut jkk, mut ra, mut rk) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for &(t, y) in z {
            let e = (-k * t).exp();
            let da = 1.0 - e;
            let dk = a * t * e;
            let r = y - a * da;
            jaa += da * da;
            jak += da * dk;
            jkk += dk * dk;
            ra += da * r;
            rk += dk * r;
        }
        let (step_a, step_k) = if fixed_a.is_some() {
            if !(jkk > 0.0) {
                return Err(Error::DegenerateData("zero sensitivity to the decay constant".into()));
            }
            (0.0, rk / jkk)
        } else {
            let det = jaa * jkk - jak * jak;
            if !(det > 0.0) {
                return Err(Error::DegenerateData("singular normal equations".into()));
            }
            ((jkk * ra - jak * rk) / det, (jaa * rk - jak * ra) / det)
        };

        let mut scale = 1.0;
        let mut accepted = None;
        for _ in 0..60 {
            let (na, nk) = (a + scale * step_a, k + scale * step_k);
            if na > 0.0 && nk > 0.0 {
                let new_rss = model_rss(z, na, nk);
                if new_rss <= rss {
                    accepted = Some((na, nk, new_rss));
                    break;
                }
            }
            scale *= 0.5;
        }
        let small_step = |p: f64, dp: f64| dp.abs() <= RELATIVE_TOLERANCE * p.abs();
        match accepted {
            Some((na, nk, new_rss)) => {
                let done = small_step(na, na - a) && small_step(nk, nk - k);
                a = na;
                k = nk;
                rss = new_rss;
                if done {
                    converged = true;
                    break;
                }
            }
            None => {
                // no step along the Gauss-Newton direction lowers the residual
                converged = true;
                break;
            }
        }
    }
    let rate_of = |a: f64, k: f64| if fixed_a.is_some() { k } else { a * k };
    if !converged {
        return Err(Error::NotConverged { iterations, last_rate: rate_of(a, k) });
    }

    // linearized covariance at the optimum
    let (mut jaa, mut jak, mut jkk) = (0.0, 0.0, 0.0);
    for &(t, _) in z {
        let e = (-k * t).exp();
        let da = 1.0 - e;
        let dk = a * t * e;
        jaa += da * da;
        jak += da * dk;
        jkk += dk * dk;
    }
    let sigma2 = rss / (n - n_params) as f64;
    let uncertainty = if fixed_a.is_some() {
        (sigma2 / jkk).sqrt()
    } else {
        let det = jaa * jkk - jak * jak;
        let (var_a, var_k, cov) = (sigma2 * jkk / det, sigma2 * jaa / det, -sigma2 * jak / det);
        (k * k * var_a + a * a * var_k + 2.0 * a * k * cov).max(0.0).sqrt()
    };
    Ok(DecayFitResult {
        rate: rate_of(a, k),
        uncertainty,
        method: FitMethod::FullExponential,
        residual_norm: rss.sqrt(),
        points_used: n,
        iterations,
    })
}
