use clap::ValueEnum;
use entrain::arnold::{ensemble_tongue, linear_grid, single_tongue, TongueBoundary};
use entrain::fourier::grid;
use entrain::interaction::fixed_points;
use entrain::io::{self, SweepRow};
use entrain::ode::{LimitCycle, ModelConfig, VectorField};
use entrain::phase::{prc_adjoint_report, prc_projection, PrcOptions};
use entrain::sim::{
    empirical_tongue, phase_rate_experiment, state_rate_experiment, BisectionOptions,
    PhaseLockTest, RateWindow, StateLockTest,
};
use entrain::synthesis::{
    ensemble_waveform, fast_waveform, max_range_waveform, min_energy_single, EnsembleSpec, Waveform,
};
use entrain::{Execution, PhaseModel, SubharmonicRatio};
use serde_json::json;

use crate::manifest::Run;
use crate::{
    Cli, CliError, Command, FamilyArg, PrcArgs, RateArgs, SynthArgs, TongueArgs, TongueMode,
};

pub fn run(cli: &Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Prc(a) => prc(cli, a),
        Command::Synth(a) => synth(cli, a),
        Command::Tongue(a) => tongue(cli, a),
        Command::Rate(a) => rate(cli, a),
    }
}

fn load_model(run: &mut Run, path: &std::path::Path) -> Result<PhaseModel, CliError> {
    Ok(PhaseModel::from_json(&run.read(path)?)?)
}

fn load_waveform(run: &mut Run, path: &std::path::Path) -> Result<Waveform, CliError> {
    Ok(Waveform::from_json(&run.read(path)?)?)
}

fn load_system(
    run: &mut Run,
    path: &std::path::Path,
) -> Result<(Box<dyn VectorField>, LimitCycle), CliError> {
    let cfg = ModelConfig::from_json(&run.read(path)?)?;
    Ok(cfg.limit_cycle()?)
}

fn prc(cli: &Cli, a: &PrcArgs) -> Result<(), CliError> {
    let params = json!({ "adjoint": a.adjoint, "n_phases": a.n_phases, "order": a.order });
    let mut run = Run::new("prc", &cli.output_dir, params)?;
    let cfg = ModelConfig::from_json(&run.read(&a.config)?)?;
    let (field, cycle) = cfg.limit_cycle()?;
    let opts = PrcOptions {
        n_phases: a.n_phases,
        order: a.order,
        ..Default::default()
    };
    let model = prc_projection(field.as_ref(), &cycle, &opts)?;
    println!("period {:.9} omega {:.12}", cycle.period(), cycle.omega());
    run.write("phase_model.json", &(model.to_json()? + "\n"))?;
    run.write("prc.csv", &io::prc_csv(&model)?)?;
    run.write(
        "limit_cycle.csv",
        &io::cycle_csv(&cycle, &field.state_names())?,
    )?;
    if a.adjoint {
        let (adj, report) = prc_adjoint_report(field.as_ref(), &cycle, &opts)?;
        let zmax = model.prc().sup_norm(4096);
        let dev = grid(4096)
            .map(|t| (model.prc().eval(t) - adj.prc().eval(t)).abs())
            .fold(0.0, f64::max);
        println!("adjoint deviation {dev:.3e} ({:.3e} of max|Z|)", dev / zmax);
        let out = json!({
            "max_deviation": dev,
            "relative_deviation": dev / zmax,
            "periods": report.periods,
            "residual": report.residual,
            "adjoint_model": adj,
        });
        run.write("adjoint_report.json", &io::to_json(&out)?)?;
    }
    run.finish()
}

fn target_of(model: &PhaseModel, t: &crate::TargetArgs) -> Result<f64, CliError> {
    match (t.target, t.target_factor) {
        (Some(v), _) => Ok(v),
        (None, Some(f)) => Ok(f * model.omega()),
        (None, None) => Err(CliError::usage(
            "one of --target or --target-factor is required",
        )),
    }
}

fn require(value: Option<f64>, flag: &str, family: &str) -> Result<f64, CliError> {
    value.ok_or_else(|| CliError::usage(format!("--family {family} requires {flag}")))
}

fn synth(cli: &Cli, a: &SynthArgs) -> Result<(), CliError> {
    let params = json!({
        "ratio": a.ratio, "target": a.target.target, "target_factor": a.target.target_factor,
        "family": a.family.to_possible_value().map(|v| v.get_name().to_string()), "power": a.power, "omega1": a.omega1, "omega2": a.omega2,
    });
    let mut run = Run::new("synth", &cli.output_dir, params)?;
    let model = load_model(&mut run, &a.model)?;
    let ratio: SubharmonicRatio = a.ratio.parse()?;
    let target = target_of(&model, &a.target)?;
    let (w, extra) = match a.family {
        FamilyArg::Min => (min_energy_single(&model, ratio, target)?, json!({})),
        FamilyArg::Fast => {
            let f = fast_waveform(
                &model,
                ratio,
                target,
                Some(require(a.power, "--power", "fast")?),
            )?;
            let extra = json!({ "multiplier": f.multiplier, "predicted_rate": f.predicted_rate, "min_energy": f.min_energy });
            (f.waveform, extra)
        }
        FamilyArg::Ensemble => {
            let spec = EnsembleSpec::new(
                require(a.omega1, "--omega1", "ensemble")?,
                require(a.omega2, "--omega2", "ensemble")?,
                target,
            )?;
            let e = ensemble_waveform(&model, ratio, &spec)?;
            let extra = json!({ "case": e.case, "mu_plus": e.mu_plus, "mu_minus": e.mu_minus });
            (e.waveform, extra)
        }
        FamilyArg::Range => {
            let r =
                max_range_waveform(&model, ratio, target, require(a.power, "--power", "range")?)?;
            (r.waveform, json!({ "predicted_width": r.predicted_width }))
        }
    };
    let lam = w.interaction(&model);
    let mut sidecar = io::lambda_sidecar(&lam);
    let (lo, hi) = lam.locking_range(target);
    sidecar["locking_range"] = json!([lo, hi]);
    sidecar["design"] = extra;
    println!(
        "{} {} energy {:.6e} rms {:.6e}",
        w.family(),
        ratio,
        w.energy(),
        w.rms()
    );
    run.write("waveform.json", &(w.to_json()? + "\n"))?;
    run.write("waveform.csv", &io::waveform_csv(&w)?)?;
    run.write("lambda.csv", &io::lambda_csv(&lam)?)?;
    run.write("lambda.json", &io::to_json(&sidecar)?)?;
    run.finish()
}

fn tongue(cli: &Cli, a: &TongueArgs) -> Result<(), CliError> {
    let params = json!({
        "mode": a.mode.to_possible_value().map(|v| v.get_name().to_string()), "ensemble": a.ensemble, "points": a.points, "span": a.span,
        "steps": a.steps, "dt": a.dt,
    });
    let mut run = Run::new("tongue", &cli.output_dir, params)?;
    let model = load_model(&mut run, &a.model)?;
    let w = load_waveform(&mut run, &a.waveform)?;
    if a.points == 0 {
        return Err(CliError::usage("empty grid: --points must be positive"));
    }
    if !(a.span > 0.0 && a.span < 1.0) {
        return Err(CliError::usage("--span must lie in (0, 1)"));
    }
    let shape = w.unit_shape()?;
    let ratio = w.ratio();
    let theory = if a.ensemble {
        ensemble_tongue(
            &model,
            ratio,
            &shape,
            w.target(),
            &linear_grid(w.target(), a.span, a.points),
        )?
    } else {
        single_tongue(
            &model,
            ratio,
            &shape,
            &linear_grid(ratio.forcing_frequency(model.omega()), a.span, a.points),
        )?
    };
    println!("case {} for {} tongue", theory.case, ratio);
    run.write("tongue.csv", &io::tongue_csv(&theory)?)?;
    run.write("tongue.json", &io::to_json(&io::tongue_sidecar(&theory))?)?;

    let phase_on = matches!(a.mode, TongueMode::PhaseSim | TongueMode::All);
    let state_on = matches!(a.mode, TongueMode::StateSim | TongueMode::All);
    if !(phase_on || state_on) {
        return run.finish();
    }
    let bis = BisectionOptions::default();
    let mut phase_emp = None;
    let mut state_emp = None;
    if phase_on {
        let test = PhaseLockTest {
            steps_per_period: a.steps,
            ..Default::default()
        };
        let z = model.prc().clone();
        let (emp, failures) = if a.ensemble {
            let lock = |omega: f64, p: f64| {
                let m = PhaseModel::new(omega, z.clone())?;
                test.locked(&m, &shape, ratio, w.omega_f(), p)
            };
            empirical_tongue(&theory, &lock, &bis, Execution::Parallel)
        } else {
            let lock = |omega_f: f64, p: f64| test.locked(&model, &shape, ratio, omega_f, p);
            empirical_tongue(&theory, &lock, &bis, Execution::Parallel)
        };
        run.warn(failures);
        run.write("tongue_phase.csv", &io::tongue_csv(&emp)?)?;
        phase_emp = Some(emp);
    }
    if state_on {
        if a.ensemble {
            return Err(CliError::usage(
                "state-space simulation of ensemble tongues is not supported",
            ));
        }
        let cfg = a
            .config
            .as_ref()
            .ok_or_else(|| CliError::usage("state-space simulation requires --config"))?;
        let (field, cycle) = load_system(&mut run, cfg)?;
        let test = StateLockTest {
            dt: a.dt,
            ..Default::default()
        };
        let lock =
            |omega_f: f64, p: f64| test.locked(field.as_ref(), &cycle, &shape, ratio, omega_f, p);
        let (emp, failures) = empirical_tongue(&theory, &lock, &bis, Execution::Parallel);
        run.warn(failures);
        run.note("state-space runs start on the unforced cycle at theta = 0");
        run.write("tongue_state.csv", &io::tongue_csv(&emp)?)?;
        state_emp = Some(emp);
    }
    let pick = |t: &Option<TongueBoundary>, i: usize| t.as_ref().and_then(|t| t.points[i].p_min());
    let rows: Vec<SweepRow> = theory
        .points
        .iter()
        .enumerate()
        .map(|(i, p)| SweepRow {
            abscissa: p.abscissa,
            theory: p.p_min(),
            phase: pick(&phase_emp, i),
            state: pick(&state_emp, i),
        })
        .collect();
    run.write("sweep.csv", &io::sweep_csv(&rows)?)?;
    run.finish()
}

fn rate(cli: &Cli, a: &RateArgs) -> Result<(), CliError> {
    let params = json!({
        "target": a.target, "state_space": a.state_space, "offset": a.offset, "cycles": a.cycles,
        "steps": a.steps, "dt": a.dt,
    });
    let mut run = Run::new("rate", &cli.output_dir, params)?;
    let model = load_model(&mut run, &a.model)?;
    let mut w = load_waveform(&mut run, &a.waveform)?;
    if let Some(t) = a.target {
        if t != w.target() {
            w = w.retargeted(t)?;
        }
    }
    let lam = w.interaction(&model);
    let star = match w.lock_phase() {
        Some(p) => p,
        None => *fixed_points(&lam, model.omega() - w.target())
            .stable
            .first()
            .ok_or_else(|| CliError {
                code: 3,
                message: "waveform does not lock at this target".into(),
            })?,
    };
    let theory = lam.slope(star);
    let window = RateWindow::default();
    let est = if a.state_space {
        let cfg = a
            .config
            .as_ref()
            .ok_or_else(|| CliError::usage("--state-space requires --config"))?;
        let (field, cycle) = load_system(&mut run, cfg)?;
        run.note("state-space run starts on the unforced cycle, offset behind the lock phase");
        state_rate_experiment(
            field.as_ref(),
            &cycle,
            &model,
            &w,
            a.offset,
            a.cycles,
            a.dt,
            &window,
        )?
    } else {
        phase_rate_experiment(&model, &w, a.offset, a.cycles, a.steps, &window)?
    };
    println!("kappa {:.6e} theory {:.6e}", est.kappa, theory);
    let out = json!({
        "kappa": est.kappa,
        "intercept": est.intercept,
        "residual": est.residual,
        "source": est.source,
        "points": est.points,
        "theory": theory,
        "relative_error": (est.kappa - theory).abs() / theory.abs(),
    });
    run.write("rate.json", &io::to_json(&out)?)?;
    run.finish()
}
