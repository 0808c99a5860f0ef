use std::fmt::Write as _;
use std::path::Path;

use anyhow::Context as _;
use qubit_scatter::dynamics::{
    run_trajectories, simulate_sequence, spin_echo_analytic, DecayRates, DensityMatrix, TrajectoryConfig,
};
use qubit_scatter::experiment::{fit_rates, rates_at, sweep, DecayCurve, FitMethod, PolarizationMode};
use qubit_scatter::levels::Qubit;
use qubit_scatter::scattering::{differential_stark_shift, find_null_angle};
use qubit_scatter::Error;
use serde_json::json;

use crate::config::{ConfigError, RunConfig, SequenceKind};
use crate::output::{base_meta, fmt_opt, fmt_sig, Sink};
use crate::svg::{line_plot, Series};

pub const SWEEP_HEADER: &str = "detuning_ghz,gamma_ud,gamma_du,gamma_uu,gamma_dd,gamma_ram,gamma_el,gamma_el_diff,total_full,total_ratediff,total_raman_only,skipped";

pub fn levels(cfg: &RunConfig, sink: &Sink) -> anyhow::Result<()> {
    let levels = cfg.levels()?;
    let cycling = levels.cycling_frequency();
    let mut out = String::from("quantity,from,to,lambda,value_ghz\n");
    for l in [&levels.qubit_u, &levels.qubit_d].into_iter().chain(&levels.excited) {
        let _ = writeln!(out, "energy,{},,,{:.6}", l.key(), l.energy / 1e9);
    }
    let _ = writeln!(
        out,
        "qubit_splitting,{},{},,{:.6}",
        levels.qubit_d.key(),
        levels.qubit_u.key(),
        levels.qubit_splitting() / 1e9
    );
    for t in levels.transitions() {
        let from = levels.qubit(t.from).key();
        let _ = writeln!(out, "resonance_detuning,{from},{},{},{:.6}", t.to, t.lambda, (t.frequency - cycling) / 1e9);
    }
    sink.write(&out)?;
    let mut meta = base_meta("levels", &cfg.hash(), cfg.trajectories.seed);
    meta["magnetic_field_tesla"] = json!(cfg.physical_resolved()?.magnetic_field);
    sink.write_meta(&meta)
}

pub fn sweep_cmd(cfg: &RunConfig, sink: &Sink, svg: bool) -> anyhow::Result<()> {
    let levels = cfg.levels()?;
    let spec = cfg.sweep_spec()?;
    let rows = sweep(&levels, &spec)?;

    let mut out = String::with_capacity(200 * rows.len());
    out.push_str(SWEEP_HEADER);
    out.push('\n');
    for row in &rows {
        let r = row.rates;
        let fields = [
            Some(row.detuning / 1e9),
            r.map(|r| r.gamma_ud),
            r.map(|r| r.gamma_du),
            r.map(|r| r.gamma_uu),
            r.map(|r| r.gamma_dd),
            r.map(|r| r.gamma_ram),
            r.map(|r| r.gamma_el),
            r.map(|r| r.gamma_el_diff),
            row.total_full(),
            row.total_ratediff(),
            row.total_raman_only(),
        ];
        for f in fields {
            out.push_str(&fmt_opt(f));
            out.push(',');
        }
        out.push_str(if row.skipped() { "1\n" } else { "0\n" });
    }

    let svg_body = svg.then(|| {
        let curve = |name, f: fn(&qubit_scatter::experiment::SweepRow) -> Option<f64>| Series {
            name,
            points: rows.iter().filter_map(|r| f(r).map(|v| (r.detuning / 1e9, v))).collect(),
        };
        line_plot(
            &[
                curve("full", |r| r.total_full()),
                curve("rate difference", |r| r.total_ratediff()),
                curve("Raman only", |r| r.total_raman_only()),
            ],
            "detuning from cycling (GHz)",
            "decoherence rate (1/s)",
            true,
        )
    });

    sink.write(&out)?;
    if let Some(body) = svg_body {
        write_svg(sink, &body)?;
    }
    let mut meta = base_meta("sweep", &cfg.hash(), cfg.trajectories.seed);
    meta["n_points"] = json!(rows.len());
    meta["skipped"] = json!(rows.iter().filter(|r| r.skipped()).count());
    meta["polarization"] = match spec.polarization {
        PolarizationMode::AutoNull => json!({
            "mode": "auto-null",
            "note": "angle per point nulls the differential Stark shift; outside the null region the endpoint with the smaller shift is used",
            "points_without_null": rows.iter().filter(|r| !r.skipped() && !r.null_found).count(),
        }),
        PolarizationMode::Fixed(theta) => json!({ "mode": "fixed", "angle_deg": theta.to_degrees() }),
    };
    sink.write_meta(&meta)
}

fn write_svg(sink: &Sink, body: &str) -> anyhow::Result<()> {
    let path =
        sink.svg_path().ok_or_else(|| ConfigError("--svg needs --out so the plot has somewhere to go".into()))?;
    std::fs::write(&path, body).with_context(|| format!("writing {}", path.display()))
}

pub fn sequence(cfg: &RunConfig, sink: &Sink) -> anyhow::Result<()> {
    let levels = cfg.levels()?;
    let seq = cfg.pulse_sequence()?;
    let detuning = cfg.laser_template().detuning_from_cycling(&levels);
    let spec = qubit_scatter::experiment::SweepSpec {
        rabi: cfg.laser.rabi,
        polarization: cfg.polarization_mode(),
        resonance_floor: cfg.laser.resonance_floor_hz,
        ..Default::default()
    };
    let (rate_set, theta, null_found) = rates_at(&levels, &spec, detuning)?;
    let rates = DecayRates::from(&rate_set);
    let rho0 = DensityMatrix::basis(cfg.sequence.initial);
    let fin = simulate_sequence(&rho0, &seq, &rates)?;
    let analytic = match (cfg.sequence.kind, cfg.sequence.initial) {
        (SequenceKind::SpinEcho, Qubit::Up) => Some(spin_echo_analytic(&rates, cfg.sequence.tau)),
        (SequenceKind::SpinEcho, Qubit::Down) => Some(1.0 - spin_echo_analytic(&rates, cfg.sequence.tau)),
        (SequenceKind::Segments, _) => None,
    };

    let mc = if cfg.trajectories.enabled {
        let dt = cfg.trajectories.dt.unwrap_or_else(|| {
            let max = rates.max_rate();
            if max > 0.0 {
                0.005 / max
            } else {
                seq.light_time().max(1e-9)
            }
        });
        let tc = TrajectoryConfig { n_trajectories: cfg.trajectories.n_trajectories, seed: cfg.trajectories.seed, dt };
        Some(run_trajectories(&rho0, &seq, &rates, &tc)?)
    } else {
        None
    };

    let mut body = base_meta("sequence", &cfg.hash(), cfg.trajectories.seed);
    body["final_rho_uu"] = json!(fin.rho_uu);
    body["analytic_rho_uu"] = json!(analytic);
    body["mc_estimate"] = json!(mc.map(|m| m.rho_uu));
    body["mc_stderr"] = json!(mc.map(|m| m.rho_uu_stderr));
    body["n_trajectories"] = json!(mc.map(|m| m.n_trajectories));
    body["final_rho_ud"] = json!([fin.rho_ud.re, fin.rho_ud.im]);
    body["rates"] = serde_json::to_value(rate_set)?;
    body["polarization_angle_deg"] = json!(theta.to_degrees());
    body["stark_null_found"] = json!(null_found);
    body["detuning_ghz"] = json!(detuning / 1e9);
    body["light_time"] = json!(seq.light_time());
    sink.write(&(serde_json::to_string_pretty(&body)? + "\n"))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum CurveArg {
    Echo,
    RamanD,
    RamanU,
}

impl From<CurveArg> for DecayCurve {
    fn from(c: CurveArg) -> Self {
        match c {
            CurveArg::Echo => DecayCurve::SpinEcho,
            CurveArg::RamanD => DecayCurve::Raman(Qubit::Down),
            CurveArg::RamanU => DecayCurve::Raman(Qubit::Up),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum MethodArg {
    EarlySlope,
    FullExponential,
}

impl From<MethodArg> for FitMethod {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::EarlySlope => FitMethod::EarlySlope,
            MethodArg::FullExponential => FitMethod::FullExponential,
        }
    }
}

/// Two numeric columns, `t` in s and population; one leading header row is
/// allowed.
pub fn read_curve(path: &Path) -> anyhow::Result<(Vec<f64>, Vec<f64>)> {
    let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut reader = csv::ReaderBuilder::new().has_headers(false).trim(csv::Trim::All).from_reader(text.as_bytes());
    let (mut times, mut pops) = (Vec::new(), Vec::new());
    for (i, record) in reader.records().enumerate() {
        let record = record.map_err(|e| ConfigError(format!("{}: {e}", path.display())))?;
        if record.len() != 2 {
            return Err(ConfigError(format!(
                "{}: row {} has {} columns, expected 2",
                path.display(),
                i + 1,
                record.len()
            ))
            .into());
        }
        match (record[0].parse::<f64>(), record[1].parse::<f64>()) {
            (Ok(t), Ok(p)) => {
                times.push(t);
                pops.push(p);
            }
            _ if i == 0 => {}
            _ => return Err(ConfigError(format!("{}: row {} is not numeric", path.display(), i + 1)).into()),
        }
    }
    Ok((times, pops))
}

pub fn fit(cfg: &RunConfig, sink: &Sink, input: &Path, curve: CurveArg, method: MethodArg) -> anyhow::Result<()> {
    let (times, pops) = read_curve(input)?;
    let result = fit_rates(&times, &pops, curve.into(), method.into())?;
    let mut body = base_meta("fit", &cfg.hash(), cfg.trajectories.seed);
    body["rate"] = json!(result.rate);
    body["uncertainty"] = json!(result.uncertainty);
    body["method"] = serde_json::to_value(result.method)?;
    body["curve"] = serde_json::to_value(DecayCurve::from(curve))?;
    body["residual_norm"] = json!(result.residual_norm);
    body["points_used"] = json!(result.points_used);
    body["iterations"] = json!(result.iterations);
    sink.write(&(serde_json::to_string_pretty(&body)? + "\n"))
}

/// Writes the shift table, then reports a missing null as an error.
pub fn stark(cfg: &RunConfig, sink: &Sink, svg: bool) -> anyhow::Result<()> {
    let levels = cfg.levels()?;
    let template = cfg.laser_template();
    let n = (90.0 / cfg.stark.step_deg).round() as usize;
    let mut out = String::from("angle_deg,shift_hz\n");
    let mut points = Vec::with_capacity(n + 1);
    for k in 0..=n {
        let deg = (k as f64 * cfg.stark.step_deg).min(90.0);
        let shift = differential_stark_shift(&levels, &template.with_angle(deg.to_radians()))?;
        let _ = writeln!(out, "{},{}", fmt_sig(deg, 9), fmt_sig(shift, 9));
        points.push((deg, shift));
    }
    let null_deg = match find_null_angle(&levels, &template) {
        Ok(theta) => Some(theta.to_degrees()),
        Err(Error::NoNull { .. }) => None,
        Err(e) => return Err(e.into()),
    };

    sink.write(&out)?;
    if svg {
        write_svg(
            sink,
            &line_plot(
                &[Series { name: "differential shift", points: points.clone() }],
                "polarization angle (deg)",
                "shift (Hz)",
                false,
            ),
        )?;
    }
    let mut meta = base_meta("stark", &cfg.hash(), cfg.trajectories.seed);
    meta["null_angle_deg"] = json!(null_deg);
    meta["detuning_ghz"] = json!(template.detuning_from_cycling(&levels) / 1e9);
    sink.write_meta(&meta)?;
    if null_deg.is_none() {
        let at_zero = points.first().map_or(0.0, |p| p.1);
        let at_right_angle = points.last().map_or(0.0, |p| p.1);
        return Err(Error::NoNull { at_zero, at_right_angle }.into());
    }
    Ok(())
}
