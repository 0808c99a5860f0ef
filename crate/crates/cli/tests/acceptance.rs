//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any
//! failure. Run with `cargo test -p qubit-scatter-cli --test acceptance`.

use std::f64::consts::{PI, TAU};
use std::process::{Command, ExitCode};
use std::time::{Duration, Instant};

use qubit_scatter::dynamics::spin_echo_analytic;
use qubit_scatter::dynamics::{
    apply_rotation, propagate, rk4_propagate, run_trajectories, simulate_sequence, DecayRates, DensityMatrix,
    PulseSequence, TrajectoryConfig,
};
use qubit_scatter::experiment::{
    count_crossings, find_rate_crossing, fit_rates, pi_resonances, raman_population_curve, rates_at, scaling_probe,
    sweep, DecayCurve, FitMethod, RateField, SweepSpec,
};
use qubit_scatter::levels::{build_levels, LevelStructure, PhysicalConfig, Qubit};
use qubit_scatter::scattering::{find_null_angle, rates, LaserField, LaserFrequency};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, Normal};

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome);

fn check(ok: bool, detail: String) -> Outcome {
    if ok {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn rng(tag: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(0xacce_0000 + tag)
}

fn default_levels() -> LevelStructure {
    build_levels(&PhysicalConfig::default()).unwrap()
}

fn qubit_splitting() -> Outcome {
    let start = Instant::now();
    let out = Command::new(env!("CARGO_BIN_EXE_qubit-scatter")).arg("levels").output().map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    if !out.status.success() {
        return Err(format!("levels exited with {}", out.status));
    }
    let text = String::from_utf8_lossy(&out.stdout);
    let ghz: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("qubit_splitting,"))
        .and_then(|l| l.rsplit(',').next())
        .and_then(|v| v.parse().ok())
        .ok_or("no qubit_splitting row")?;
    check(
        (ghz - 124.1).abs() <= 1e-3 && elapsed < Duration::from_secs(1),
        format!("splitting {ghz:.6} GHz (want 124.100 +- 0.001), {elapsed:.2?} (< 1 s)"),
    )
}

fn resonance_positions() -> Outcome {
    let levels = default_levels();
    let (u, d) = pi_resonances(&levels);
    let default_ok = (u + 79.4e9).abs() <= 5e9 && (d + 37.7e9).abs() <= 5e9;

    // pin both pi transitions with overrides
    let mut cfg = PhysicalConfig::default();
    let top = levels.level("P3/2:+3/2".parse().unwrap()).unwrap().energy;
    let cycling = levels.cycling_frequency();
    cfg.level_overrides.insert("P3/2:+1/2".into(), top - 79.4e9);
    cfg.level_overrides.insert("P3/2:-1/2".into(), levels.qubit_d.energy + cycling - 37.7e9);
    let pinned = build_levels(&cfg).unwrap();
    let (pu, pd) = pi_resonances(&pinned);
    let pinned_ok = (pu + 79.4e9).abs() <= 1e6 && (pd + 37.7e9).abs() <= 1e6;
    check(
        default_ok && pinned_ok,
        format!(
            "default {:.3} / {:.3} GHz (+-5 of -79.4 / -37.7); pinned {:.6} / {:.6} GHz (+-1 MHz)",
            u / 1e9,
            d / 1e9,
            pu / 1e9,
            pd / 1e9
        ),
    )
}

fn rate_crossing() -> Outcome {
    let levels = default_levels();
    let spec = SweepSpec::default();
    let (u, d) = pi_resonances(&levels);
    let crossing = find_rate_crossing(&levels, &spec, u + 1e9, d - 1e9).map_err(|e| e.to_string())?;
    let rows = sweep(&levels, &spec).map_err(|e| e.to_string())?;
    let n = count_crossings(&rows, u, d);
    check(
        (crossing + 56e9).abs() <= 6e9 && n == 1,
        format!("Gamma_uu = Gamma_dd at {:.3} GHz (+-6 of -56), {n} crossing(s) between resonances", crossing / 1e9),
    )
}

fn headline_ratio() -> Outcome {
    let levels = default_levels();
    let spec = SweepSpec::default();
    let (u, d) = pi_resonances(&levels);
    let crossing = find_rate_crossing(&levels, &spec, u + 1e9, d - 1e9).map_err(|e| e.to_string())?;
    let mut ratios = Vec::new();
    for rabi_mhz in [0.1, 1.0, 30.0] {
        let s = SweepSpec { rabi: TAU * rabi_mhz * 1e6, ..spec };
        let (r, _, _) = rates_at(&levels, &s, crossing).map_err(|e| e.to_string())?;
        ratios.push(r.total_full() / r.total_ratediff());
    }
    let start = Instant::now();
    let rows = sweep(&levels, &spec).map_err(|e| e.to_string())?;
    let elapsed = start.elapsed();
    let spread = ratios.iter().fold(0.0f64, |m, r| m.max((r - ratios[0]).abs() / ratios[0]));
    check(
        (3.0..=7.0).contains(&ratios[0]) && spread < 1e-9 && rows.len() == 651 && elapsed < Duration::from_secs(1),
        format!(
            "total_full/total_ratediff = {:.3} in [3, 7], Rabi spread {spread:.1e}, {}-point sweep {elapsed:.2?} (< 1 s)",
            ratios[0],
            rows.len()
        ),
    )
}

fn random_rates(rng: &mut ChaCha8Rng) -> DecayRates {
    DecayRates::new(rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0), rng.gen_range(0.0..200.0))
}

fn echo_closed_form() -> Outcome {
    let mut rng = rng(5);
    let up = DensityMatrix::basis(Qubit::Up);
    let mut worst = 0.0f64;
    for _ in 0..50 {
        let r = random_rates(&mut rng);
        let tau = rng.gen_range(0.0..0.05);
        let sim = simulate_sequence(&up, &PulseSequence::spin_echo(tau).unwrap(), &r).unwrap().rho_uu;
        let formula = 0.5 * (1.0 - (-(r.gamma_ram() + r.gamma_el) * tau / 2.0).exp());
        worst = worst.max((sim - formula).abs());
    }
    check(worst <= 1e-9, format!("max |simulated - closed form| = {worst:.2e} over 50 cases (<= 1e-9)"))
}

fn random_state(rng: &mut ChaCha8Rng) -> DensityMatrix {
    let r: f64 = rng.gen_range(0.0..1.0);
    let pol: f64 = rng.gen_range(0.0..PI);
    let az: f64 = rng.gen_range(0.0..TAU);
    DensityMatrix::from_bloch(r * pol.sin() * az.cos(), r * pol.sin() * az.sin(), r * pol.cos())
}

fn propagator_equivalence() -> Outcome {
    let mut rng = rng(6);
    let mut worst = 0.0f64;
    for _ in 0..100 {
        let rho = random_state(&mut rng);
        let r = random_rates(&mut rng);
        let slowest = r.gamma_ram().max(r.coherence_decay());
        if slowest == 0.0 {
            continue;
        }
        let t_end = 5.0 / slowest;
        let dt = 0.005 / r.max_rate().max(r.gamma_ram());
        for k in 1..=5 {
            let t = t_end * k as f64 / 5.0;
            let exact = propagate(&rho, &r, t).unwrap();
            let numeric = rk4_propagate(&rho, &r, t, dt).unwrap();
            worst = worst.max(exact.max_abs_diff(&numeric));
        }
    }
    check(worst <= 1e-10, format!("max |analytic - RK4| = {worst:.2e} over 100 cases, 5 decay times (<= 1e-10)"))
}

fn trajectory_oracle() -> Outcome {
    let levels = default_levels();
    let template = LaserField::linear(LaserFrequency::FromCycling(-56e9), TAU * 1e6, 0.0);
    let theta = find_null_angle(&levels, &template).map_err(|e| e.to_string())?;
    let r = DecayRates::from(rates(&levels, &template.with_angle(theta)).map_err(|e| e.to_string())?);
    // echo long enough for the signal to reach 1 - 1/e of its final value
    let tau = 2.0 / (r.gamma_ram() + r.gamma_el);
    let seq = PulseSequence::spin_echo(tau).unwrap();
    let up = DensityMatrix::basis(Qubit::Up);
    let exact = simulate_sequence(&up, &seq, &r).unwrap().rho_uu;
    let start = Instant::now();
    let mut inside = 0;
    for seed in 0..100 {
        let cfg = TrajectoryConfig { n_trajectories: 10_000, seed, dt: 0.005 / r.max_rate() };
        let est = run_trajectories(&up, &seq, &r, &cfg).map_err(|e| e.to_string())?;
        if (est.rho_uu - exact).abs() < 3.0 * est.rho_uu_stderr {
            inside += 1;
        }
    }
    let elapsed = start.elapsed();
    check(
        inside >= 99 && elapsed < Duration::from_secs(60),
        format!("{inside}/100 runs of 1e4 trajectories within 3 stderr of {exact:.4} (>= 99), {elapsed:.1?} (< 60 s)"),
    )
}

fn scaling_laws() -> Outcome {
    let levels = build_levels(&PhysicalConfig { fine_structure_split: 1e17, ..Default::default() }).unwrap();
    let detunings: Vec<f64> = (0..10).map(|k| -5e12 * 10f64.powf(k as f64 / 9.0)).collect();
    let generic = LaserField::linear(LaserFrequency::FromCycling(0.0), 1e8, 0.5 * PI);
    let clock = generic.with_angle(0.0);
    let g = scaling_probe(&levels, &generic, &detunings, RateField::GammaEl).map_err(|e| e.to_string())?;
    let c = scaling_probe(&levels, &clock, &detunings, RateField::GammaEl).map_err(|e| e.to_string())?;
    check(
        (g.slope + 2.0).abs() <= 0.1 && (c.slope + 4.0).abs() <= 0.2,
        format!("Gamma_el slope {:.3} generic (-2 +- 0.1), {:.3} pi-light clock-like (-4 +- 0.2)", g.slope, c.slope),
    )
}

#[derive(Clone, Copy)]
enum Curve {
    RamanUp,
    RamanDown,
    Echo,
}

impl Curve {
    fn kind(self) -> DecayCurve {
        match self {
            Curve::RamanUp => DecayCurve::Raman(Qubit::Up),
            Curve::RamanDown => DecayCurve::Raman(Qubit::Down),
            Curve::Echo => DecayCurve::SpinEcho,
        }
    }

    fn truth(self, r: &DecayRates) -> f64 {
        match self {
            Curve::RamanUp => r.gamma_ud,
            Curve::RamanDown => r.gamma_du,
            Curve::Echo => r.coherence_decay(),
        }
    }

    fn k(self, r: &DecayRates) -> f64 {
        match self {
            Curve::Echo => r.coherence_decay(),
            _ => r.gamma_ram(),
        }
    }

    fn values(self, r: &DecayRates, times: &[f64]) -> Vec<f64> {
        match self {
            Curve::RamanUp => raman_population_curve(r, Qubit::Up, times).unwrap(),
            Curve::RamanDown => raman_population_curve(r, Qubit::Down, times).unwrap(),
            Curve::Echo => times.iter().map(|&t| spin_echo_analytic(r, t)).collect(),
        }
    }
}

fn fit_case(rng: &mut ChaCha8Rng, i: usize, noise: Option<f64>) -> Result<(f64, f64, f64), String> {
    let curve = [Curve::RamanUp, Curve::RamanDown, Curve::Echo][i % 3];
    let ram = rng.gen_range(20.0..1000.0);
    let frac = rng.gen_range(0.2..0.8);
    let r = DecayRates::new(frac * ram, (1.0 - frac) * ram, rng.gen_range(0.0..500.0));
    let k = curve.k(&r);
    let grid: Vec<f64> = (0..80).map(|j| 5.0 / k * j as f64 / 79.0).collect();
    let (times, pops) = match noise {
        None => (grid.clone(), curve.values(&r, &grid)),
        Some(sigma) => {
            // keep the clean curve 0.05 inside [0, 1] so noise stays physical
            let times: Vec<f64> =
                grid.into_iter().filter(|&t| (0.05..=0.95).contains(&curve.values(&r, &[t])[0])).collect();
            let normal = Normal::new(0.0, sigma).unwrap();
            let pops = curve.values(&r, &times).into_iter().map(|p| (p + normal.sample(rng)).clamp(0.0, 1.0)).collect();
            (times, pops)
        }
    };
    let fit = fit_rates(&times, &pops, curve.kind(), FitMethod::FullExponential).map_err(|e| e.to_string())?;
    Ok((fit.rate, fit.uncertainty, curve.truth(&r)))
}

fn fit_round_trips() -> Outcome {
    let mut rng = rng(9);
    let mut worst_rel = 0.0f64;
    for i in 0..200 {
        let (rate, _, truth) = fit_case(&mut rng, i, None)?;
        worst_rel = worst_rel.max((rate - truth).abs() / truth);
    }
    let mut inside = 0;
    for i in 0..200 {
        let (rate, sigma, truth) = fit_case(&mut rng, i, Some(0.01))?;
        if (rate - truth).abs() <= 3.0 * sigma {
            inside += 1;
        }
    }
    check(
        worst_rel <= 1e-3 && inside >= 198,
        format!("noiseless max rel error {worst_rel:.1e} (<= 1e-3); noisy {inside}/200 within 3 sigma (>= 198)"),
    )
}

fn conservation_suite() -> Outcome {
    let mut rng = rng(10);
    let (mut trace_err, mut herm_err, mut min_eig, mut semi_err) = (0.0f64, 0.0f64, f64::INFINITY, 0.0f64);
    let mut rho = random_state(&mut rng);
    for _ in 0..1000 {
        let r = random_rates(&mut rng);
        let t1 = rng.gen_range(0.0..0.02);
        let t2 = rng.gen_range(0.0..0.02);
        rho = if rng.gen_bool(0.5) {
            apply_rotation(&rho, rng.gen_range(-TAU..TAU), rng.gen_range(-TAU..TAU))
        } else {
            let whole = propagate(&rho, &r, t1 + t2).unwrap();
            let split = propagate(&propagate(&rho, &r, t1).unwrap(), &r, t2).unwrap();
            semi_err = semi_err.max(whole.max_abs_diff(&split));
            whole
        };
        trace_err = trace_err.max((rho.trace() - 1.0).abs());
        herm_err = herm_err.max((rho.rho_du() - rho.rho_ud.conj()).norm());
        min_eig = min_eig.min(rho.eigenvalues()[0]);
        if rng.gen_bool(0.05) {
            rho = random_state(&mut rng);
        }
    }
    check(
        trace_err <= 1e-12 && herm_err <= 1e-12 && min_eig >= -1e-12 && semi_err <= 1e-12,
        format!(
            "1000 ops: trace err {trace_err:.1e}, Hermiticity err {herm_err:.1e}, min eigenvalue {min_eig:.2e}, semigroup err {semi_err:.1e}"
        ),
    )
}

fn main() -> ExitCode {
    let criteria: [Criterion; 10] = [
        ("1 qubit splitting", qubit_splitting),
        ("2 resonance positions", resonance_positions),
        ("3 rate crossing", rate_crossing),
        ("4 headline discrepancy", headline_ratio),
        ("5 spin-echo closed form", echo_closed_form),
        ("6 propagator equivalence", propagator_equivalence),
        ("7 trajectory oracle", trajectory_oracle),
        ("8 scaling laws", scaling_laws),
        ("9 fit round-trips", fit_round_trips),
        ("10 conservation suite", conservation_suite),
    ];
    let mut failed = 0;
    for (name, f) in criteria {
        match f() {
            Ok(detail) => println!("PASS  {name}: {detail}"),
            Err(detail) => {
                failed += 1;
                println!("FAIL  {name}: {detail}");
            }
        }
    }
    println!("{} of {} criteria passed", criteria.len() - failed, criteria.len());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
