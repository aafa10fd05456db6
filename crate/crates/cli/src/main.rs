mod config;
mod output;
mod svg;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

use nnlif::experiments::{self, IcSpec, Verdict};
use nnlif::grid::make_grid;
use nnlif::pde::{self, SimOptions};
use nnlif::{discrete, init, specfun, ModelParams};

use config::RunConfig;
use output::{num, output_root, write_file, write_run_bundle};

#[derive(Parser)]
#[command(name = "nnlif", version, about = "delayed integrate-and-fire network: recurrence, bifurcation and PDE experiments")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the stationary firing-rate equation N I(N) = 1
    #[command(allow_negative_numbers = true)]
    Stationary {
        #[arg(long)]
        b: f64,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        v_reset: f64,
        #[arg(long, default_value_t = 2.0)]
        v_thresh: f64,
    },
    /// Iterate the firing-rate recurrence and emit a CSV plus cobweb plot
    #[command(allow_negative_numbers = true)]
    Discrete {
        #[arg(long)]
        b: f64,
        #[arg(long)]
        n0: f64,
        #[arg(long, default_value_t = 200)]
        max_k: usize,
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        v_reset: f64,
        #[arg(long, default_value_t = 2.0)]
        v_thresh: f64,
        /// output subdirectory under the output root
        #[arg(long, default_value = "discrete")]
        out: String,
    },
    /// Locate the coupling strength where the fixed point loses stability
    Bifurcation {
        #[arg(long, default_value_t = 1.0)]
        a: f64,
        #[arg(long, default_value_t = 1.0)]
        v_reset: f64,
        #[arg(long, default_value_t = 2.0)]
        v_thresh: f64,
    },
    /// Run one configured simulation and write its artifact bundle
    Simulate {
        #[arg(long)]
        config: PathBuf,
    },
    /// Run a named preset study
    Experiment {
        #[arg(value_enum)]
        name: ExperimentName,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExperimentName {
    Bistability,
    DelaySweepExcitatory,
    DelaySweepNoEq,
    InhibitoryPeriodic,
    #[value(name = "fig13-sync")]
    Fig13Sync,
}

enum CliError {
    Config(String),
    Numeric(String),
}

impl From<nnlif::Error> for CliError {
    fn from(e: nnlif::Error) -> Self {
        match e {
            nnlif::Error::InvalidParams(msg) => CliError::Config(msg),
            other => CliError::Numeric(other.to_string()),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Numeric(format!("io: {e}"))
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(()) => ExitCode::SUCCESS,
        Err(CliError::Config(msg)) => {
            eprintln!("config error: {msg}");
            ExitCode::from(2)
        }
        Err(CliError::Numeric(msg)) => {
            eprintln!("numerical failure: {msg}");
            ExitCode::from(3)
        }
    }
}

fn run(cmd: Command) -> Result<(), CliError> {
    match cmd {
        Command::Stationary {
            b,
            a,
            v_reset,
            v_thresh,
        } => cmd_stationary(assemble(a, b, v_reset, v_thresh, 0.0)?),
        Command::Discrete {
            b,
            n0,
            max_k,
            a,
            v_reset,
            v_thresh,
            out,
        } => cmd_discrete(assemble(a, b, v_reset, v_thresh, 0.0)?, n0, max_k, &out),
        Command::Bifurcation { a, v_reset, v_thresh } => {
            cmd_bifurcation(assemble(a, 0.0, v_reset, v_thresh, 0.0)?)
        }
        Command::Simulate { config } => cmd_simulate(&config),
        Command::Experiment { name } => cmd_experiment(name),
    }
}

fn assemble(a: f64, b: f64, v_reset: f64, v_thresh: f64, delay: f64) -> Result<ModelParams, CliError> {
    let p = ModelParams {
        a,
        b,
        v_reset,
        v_thresh,
        delay,
    };
    p.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(p)
}

fn cmd_stationary(params: ModelParams) -> Result<(), CliError> {
    let set = specfun::solve_stationary(&params)?;
    println!("count,{}", set.count());
    for (i, root) in set.roots.iter().enumerate() {
        println!("root{},{} slope,{}", i + 1, num(root.n), num(root.slope));
    }
    Ok(())
}

fn cmd_discrete(params: ModelParams, n0: f64, max_k: usize, out: &str) -> Result<(), CliError> {
    if n0 < 0.0 {
        return Err(CliError::Config("n0 must be nonnegative".into()));
    }
    if max_k == 0 {
        return Err(CliError::Config("max-k must be at least 1".into()));
    }
    let traj = discrete::iterate_firing_rate(&params, n0, max_k, 1e-9)?;
    let dir = output_root().join(out);
    write_file(&dir.join("trajectory.csv"), &discrete::trajectory_csv(&traj))?;

    // map graph over [0, max(f(0), largest iterate) * 1.05]
    let f0 = specfun::eval_f(&params, 0.0)?;
    let hi = 1.05
        * traj
            .values
            .iter()
            .copied()
            .fold(f0, f64::max)
            .max(n0);
    let curve: Vec<(f64, f64)> = (0..=400)
        .map(|i| {
            let n = hi * i as f64 / 400.0;
            Ok((n, specfun::eval_f(&params, n)?))
        })
        .collect::<Result<_, nnlif::Error>>()?;
    write_file(
        &dir.join("cobweb.svg"),
        &svg::cobweb("firing-rate recurrence", &curve, &traj.values),
    )?;
    println!("classification,{:?}", traj.classification);
    println!("iterations,{}", traj.iterations_used);
    println!("wrote {}", dir.display());
    Ok(())
}

fn cmd_bifurcation(params: ModelParams) -> Result<(), CliError> {
    let b_star = specfun::find_b_star(&params)?;
    println!("b_star,{}", num(b_star));
    Ok(())
}

fn cmd_simulate(path: &std::path::Path) -> Result<(), CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
    let cfg = RunConfig::parse(&text).map_err(CliError::Config)?;
    let params = cfg.params();
    let grid = cfg.build_grid()?;
    let (ic, n0) = cfg.ic_spec().build(&params, &grid)?;

    let mut opts = SimOptions::new(cfg.run.t_end);
    opts.record_every = cfg.run.record_every;
    opts.snapshot_times = cfg.run.snapshot_times.clone();
    opts.snapshot_times
        .sort_by(|a, b| a.partial_cmp(b).unwrap());
    let record = pde::simulate(&params, &ic, n0, &opts)?;

    let window = cfg
        .detectors
        .window
        .unwrap_or_else(|| experiments::default_window(cfg.run.t_end, params.delay));
    let verdict = experiments::classify_record(&params, &record, window)?;

    let dir = output_root().join(&cfg.output.dir);
    write_run_bundle(&dir, &record, &ic, &verdict, &[])?;
    println!("verdict,{}", verdict_name(&verdict));
    println!("wrote {}", dir.display());
    Ok(())
}

fn verdict_name(v: &Verdict) -> &'static str {
    match v {
        Verdict::SteadyState(_) => "steady",
        Verdict::Plateau => "plateau",
        Verdict::Periodic { .. } => "periodic",
        Verdict::Undetermined => "undetermined",
    }
}

fn cmd_experiment(name: ExperimentName) -> Result<(), CliError> {
    match name {
        ExperimentName::Bistability => bistability(),
        ExperimentName::DelaySweepExcitatory => {
            sweep("delay-sweep-excitatory", 0.5, &[0.1, 2.0, 10.0], IcSpec::PseudoEquilibrium { n: 6.0 })
        }
        ExperimentName::DelaySweepNoEq => {
            sweep("delay-sweep-no-eq", 2.2, &[0.1, 1.0, 10.0], IcSpec::PseudoEquilibrium { n: 2.0 })
        }
        ExperimentName::InhibitoryPeriodic => {
            sweep("inhibitory-periodic", -14.0, &[2.0, 10.0, 25.0], IcSpec::PseudoEquilibrium { n: 0.0 })
        }
        ExperimentName::Fig13Sync => fig13_sync(),
    }
}

fn bistability() -> Result<(), CliError> {
    let mut params = ModelParams::with_b(1.5);
    params.delay = 10.0;
    let grid = make_grid(&params, -6.0, 0.02)?;
    let root = output_root().join("bistability");
    let mut summary = vec![("run".to_string(), "verdict,agreement".to_string())];
    for (label, n_pre) in [("low", 2.25), ("high", 2.35)] {
        let report = experiments::compare_discrete_continuous(&params, n_pre, 200.0, &grid)?;
        let (ic, _) = init::ic_pseudo_equilibrium(&params, &grid, n_pre)?;
        let dir = root.join(label);
        let extra = vec![(
            "discrete_classification".to_string(),
            format!("{:?}", report.discrete),
        )];
        write_run_bundle(&dir, &report.record, &ic, &report.verdict, &extra)?;
        write_file(
            &dir.join("trajectory.csv"),
            &discrete::trajectory_csv(&report.trajectory),
        )?;
        summary.push((
            label.to_string(),
            format!("{},{}", verdict_name(&report.verdict), report.agreement),
        ));
        println!(
            "{label}: verdict {}, discrete {:?}, agreement {}",
            verdict_name(&report.verdict),
            report.discrete,
            report.agreement
        );
    }
    write_file(&root.join("summary.csv"), &output::report_csv(&summary))?;
    println!("wrote {}", root.display());
    Ok(())
}

fn sweep(name: &str, b: f64, delays: &[f64], ic: IcSpec) -> Result<(), CliError> {
    let params = ModelParams::with_b(b);
    let v_min = if b < -5.0 { -10.0 } else { -6.0 };
    let grid = make_grid(&params, v_min, 0.02)?;
    let results = experiments::delay_sweep(&params, delays, &ic, 12.0, &grid)?;
    let root = output_root().join(name);
    let mut summary = vec![("delay".to_string(), "verdict".to_string())];
    for (d, verdict, record) in &results {
        let p = ModelParams { delay: *d, ..params };
        let (initial, _) = ic.build(&p, &grid)?;
        let dir = root.join(format!("d{d}"));
        write_run_bundle(&dir, record, &initial, verdict, &[])?;
        summary.push((format!("{d}"), verdict_name(verdict).to_string()));
        println!("d = {d}: {}", verdict_name(verdict));
    }
    write_file(&root.join("summary.csv"), &output::report_csv(&summary))?;
    println!("wrote {}", root.display());
    Ok(())
}

fn fig13_sync() -> Result<(), CliError> {
    let mut params = ModelParams::with_b(-14.0);
    params.delay = 25.0;
    let grid = make_grid(&params, -10.0, 0.02)?;
    let cases: [(&str, IcSpec); 4] = [
        ("cycle-low", IcSpec::CycleLow),
        ("dm-low", IcSpec::DoubleMaxwellian { mu: -1.0, sigma: 0.5 }),
        ("cycle-high", IcSpec::CycleHigh),
        ("dm-high", IcSpec::DoubleMaxwellian { mu: 0.4, sigma: 0.5 }),
    ];
    let t_end = 300.0;

    let records: Vec<nnlif::Result<_>> = std::thread::scope(|scope| {
        let handles: Vec<_> = cases
            .iter()
            .map(|(_, ic)| {
                let grid = &grid;
                let params = &params;
                scope.spawn(move || {
                    let (prof, n0) = ic.build(params, grid)?;
                    let mut opts = SimOptions::new(t_end);
                    opts.record_every = 8;
                    let record = pde::simulate(params, &prof, n0, &opts)?;
                    Ok((prof, record))
                })
            })
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });

    let root = output_root().join("fig13-sync");
    let mut runs = Vec::new();
    for ((label, _), res) in cases.iter().zip(records) {
        let (initial, record) = res?;
        let verdict = experiments::classify_record(
            &params,
            &record,
            experiments::default_window(t_end, params.delay),
        )?;
        write_run_bundle(&root.join(label), &record, &initial, &verdict, &[])?;
        println!("{label}: {}", verdict_name(&verdict));
        runs.push((*label, record));
    }

    // pairwise trailing agreement, as a fraction of the oscillation span
    let mut rows = Vec::new();
    let mut overlay = Vec::new();
    for (label, record) in &runs {
        let pts: Vec<(f64, f64)> = record
            .times
            .iter()
            .copied()
            .zip(record.rates.iter().copied())
            .filter(|(t, _)| *t > 100.0)
            .collect();
        overlay.push(svg::Series::new(label, pts));
    }
    for (i, j) in [(0usize, 1usize), (2, 3)] {
        let gap = trailing_gap(&runs[i].1, &runs[j].1, 150.0);
        rows.push((
            format!("{}_vs_{}", runs[i].0, runs[j].0),
            num(gap),
        ));
        println!("{} vs {}: relative trailing gap {gap:.4}", runs[i].0, runs[j].0);
    }
    write_file(&root.join("sync.csv"), &output::report_csv(&rows))?;
    write_file(
        &root.join("sync.svg"),
        &svg::line_chart("firing-rate synchronisation", "t", "N(t)", &overlay),
    )?;
    println!("wrote {}", root.display());
    Ok(())
}

fn trailing_gap(a: &pde::SimRecord, b: &pde::SimRecord, t_from: f64) -> f64 {
    let interp = |times: &[f64], values: &[f64], t: f64| -> f64 {
        let i = times.partition_point(|&x| x < t).clamp(1, times.len() - 1);
        let w = ((t - times[i - 1]) / (times[i] - times[i - 1])).clamp(0.0, 1.0);
        values[i - 1] + w * (values[i] - values[i - 1])
    };
    let tail: Vec<f64> = a
        .times
        .iter()
        .zip(&a.rates)
        .filter(|(t, _)| **t > t_from)
        .map(|(_, n)| *n)
        .collect();
    let amp = tail.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - tail.iter().copied().fold(f64::INFINITY, f64::min);
    a.times
        .iter()
        .zip(&a.rates)
        .filter(|(t, _)| **t > t_from)
        .map(|(t, n)| (n - interp(&b.times, &b.rates, *t)).abs())
        .fold(0.0, f64::max)
        / amp
}
