use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::Path;

use levy_sympl::diagnostics::ConvergenceSetup;
use levy_sympl::oracle::{exact_hamiltonian_left, exact_state_left};
use levy_sympl::{
    convergence_study, csv, evolve_domain, evolve_domain_exact, exact_hamiltonian, exact_state,
    integrate, linear_oscillator, LevyPath, OscillatorParams, PhaseDomain, Scheme, SchemeConfig,
    TrajectoryRecord,
};

use crate::config::{Command, ExperimentConfig};
use crate::error::CliError;

pub fn run(cfg: &ExperimentConfig) -> Result<(), CliError> {
    fs::create_dir_all(&cfg.out).map_err(|e| CliError::Io {
        path: cfg.out.clone(),
        source: e,
    })?;
    match cfg.command {
        Command::Simulate => simulate(cfg),
        Command::Converge => converge(cfg),
        Command::PhaseDomain => phase_domain(cfg),
        Command::Hamiltonian => hamiltonian(cfg),
    }
}

fn write_file(
    dir: &Path,
    name: &str,
    body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>,
) -> Result<(), CliError> {
    let path = dir.join(name);
    let io_err = |source| CliError::Io {
        path: path.clone(),
        source,
    };
    let mut w = BufWriter::new(File::create(&path).map_err(io_err)?);
    body(&mut w).map_err(io_err)?;
    w.flush().map_err(io_err)?;
    log::info!("wrote {}", path.display());
    Ok(())
}

fn sample_path(cfg: &ExperimentConfig) -> Result<LevyPath, CliError> {
    let path = LevyPath::sample(&cfg.levy)?;
    if cfg.dump_path {
        write_file(&cfg.out, "path.csv", |w| csv::write_path(w, &path))?;
    }
    Ok(path)
}

/// True when entry `i` is the left limit that precedes a post-jump entry.
fn is_pre_jump(record: &TrajectoryRecord, i: usize) -> bool {
    !record.jump_flags[i]
        && record.jump_flags.get(i + 1) == Some(&true)
        && record.times[i + 1] == record.times[i]
}

fn simulate(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let path = sample_path(cfg)?;
    let sys = linear_oscillator(cfg.params.beta);
    let record = integrate(&sys, &cfg.params.initial_state(), &path, &cfg.scheme)?;
    write_file(&cfg.out, "trajectory.csv", |w| {
        csv::write_trajectory(w, &record)
    })?;
    if cfg.with_exact {
        let exact = exact_on_grid(&cfg.params, &path, &record)?;
        write_file(&cfg.out, "exact.csv", |w| csv::write_trajectory(w, &exact))?;
    }
    let last = record.final_state();
    println!(
        "t = {}  P = {}  Q = {}",
        record.final_time(),
        last.p[0],
        last.q[0]
    );
    Ok(())
}

fn exact_on_grid(
    params: &OscillatorParams,
    path: &LevyPath,
    record: &TrajectoryRecord,
) -> Result<TrajectoryRecord, CliError> {
    let states = (0..record.len())
        .map(|i| {
            let t = record.times[i];
            if is_pre_jump(record, i) {
                exact_state_left(params, path, t)
            } else {
                exact_state(params, path, t)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    let hamiltonians = states
        .iter()
        .map(|s| 0.5 * (s.p[0] * s.p[0] + s.q[0] * s.q[0]))
        .collect();
    Ok(TrajectoryRecord {
        times: record.times.clone(),
        states,
        hamiltonians: Some(hamiltonians),
        jump_flags: record.jump_flags.clone(),
        warnings: Vec::new(),
    })
}

fn converge(cfg: &ExperimentConfig) -> Result<(), CliError> {
    if cfg.steps.len() < 2 {
        return Err(CliError::Validation(
            "--steps needs at least two step sizes".into(),
        ));
    }
    if cfg.paths == 1 {
        eprintln!("warning: a single path gives a pathwise error, not a mean-square estimate");
    }
    let setup = ConvergenceSetup {
        levy: cfg.levy.clone(),
        params: cfg.params,
        scheme: cfg.scheme.clone(),
        step_sizes: cfg.steps.clone(),
        paths: cfg.paths,
        t_end: cfg.scheme.t_end,
        ..Default::default()
    };
    let report = convergence_study(&setup)?;
    write_file(&cfg.out, "convergence.csv", |w| {
        csv::write_convergence(w, &report)
    })?;
    println!("fitted slope: {:.4}", report.fitted_slope);
    let (lo, hi) = cfg.slope_band;
    if (lo..=hi).contains(&report.fitted_slope) {
        Ok(())
    } else {
        Err(CliError::SlopeOutOfBand {
            slope: report.fitted_slope,
            lo,
            hi,
        })
    }
}

fn phase_domain(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let path = sample_path(cfg)?;
    let sys = linear_oscillator(cfg.params.beta);
    let initial = PhaseDomain::circle((cfg.params.p0, cfg.params.q0), 1.0, cfg.vertices)?;
    let mut results = Vec::new();
    for scheme in [Scheme::Ses, Scheme::Eem] {
        let run = SchemeConfig {
            scheme,
            ..cfg.scheme.clone()
        };
        let snaps = evolve_domain(&sys, &path, &run, &initial, &cfg.snapshots)?;
        results.push((scheme.name(), snaps));
    }
    let exact = evolve_domain_exact(cfg.params.beta, &path, &initial, &cfg.snapshots)?;
    results.push(("exact", exact));

    let view: Vec<(&str, &[PhaseDomain])> =
        results.iter().map(|(m, d)| (*m, d.as_slice())).collect();
    write_file(&cfg.out, "domains.csv", |w| csv::write_domains(w, &view))?;
    write_file(&cfg.out, "areas.csv", |w| csv::write_areas(w, &view))?;
    for (method, snaps) in &view {
        let areas: Vec<String> = snaps.iter().map(|d| format!("{:.6}", d.area())).collect();
        println!("{method}: {}", areas.join(" "));
    }
    Ok(())
}

fn hamiltonian(cfg: &ExperimentConfig) -> Result<(), CliError> {
    let path = sample_path(cfg)?;
    let sys = linear_oscillator(cfg.params.beta);
    let x0 = cfg.params.initial_state();
    let ses_cfg = SchemeConfig {
        scheme: Scheme::Ses,
        ..cfg.scheme.clone()
    };
    let eem_cfg = SchemeConfig {
        scheme: Scheme::Eem,
        ..cfg.scheme.clone()
    };
    let ses = integrate(&sys, &x0, &path, &ses_cfg)?;
    let eem = integrate(&sys, &x0, &path, &eem_cfg)?;
    debug_assert_eq!(ses.times, eem.times);
    let h_ses = ses.hamiltonians.as_ref().expect("oscillator provides H0");
    let h_eem = eem.hamiltonians.as_ref().expect("oscillator provides H0");
    let h_exact = (0..ses.len())
        .map(|i| {
            let t = ses.times[i];
            if is_pre_jump(&ses, i) {
                exact_hamiltonian_left(&cfg.params, &path, t)
            } else {
                exact_hamiltonian(&cfg.params, &path, t)
            }
        })
        .collect::<Result<Vec<_>, _>>()?;
    write_file(&cfg.out, "hamiltonian.csv", |w| {
        writeln!(w, "t,H_ses,H_exact,H_eem,jump_flag")?;
        for i in 0..ses.len() {
            writeln!(
                w,
                "{},{},{},{},{}",
                csv::fmt_real(ses.times[i]),
                csv::fmt_real(h_ses[i]),
                csv::fmt_real(h_exact[i]),
                csv::fmt_real(h_eem[i]),
                u8::from(ses.jump_flags[i])
            )?;
        }
        Ok(())
    })?;
    println!(
        "H at t = {}: ses {:.6}  exact {:.6}  eem {:.6}",
        ses.final_time(),
        h_ses[ses.len() - 1],
        h_exact[ses.len() - 1],
        h_eem[eem.len() - 1]
    );
    Ok(())
}
