mod config;
mod output;

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Parser, Subcommand};
use qosrec::experiment::{convergence_trace, parameter_sweep, tune_neighbors};
use qosrec::synth::{generate, SurrogateSpec};
use qosrec::{parse_wsdream_matrix, run_experiment, EvalReport, Method, QosMatrix, SweepParam};

use config::{RunConfigFile, RunPlan};

/// Ranking-oriented QoS prediction experiments on WS-Dream style matrices.
#[derive(Debug, Parser)]
#[command(name = "qosrec", version)]
struct Cli {
    /// Worker threads for repetitions and similarity tables (default: all cores).
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Base seed for train/test splits; overrides the config file.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Directory for CSV output. Without it, CSV goes to standard output.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Source matrix; overrides `dataset` in the config file.
    #[arg(long, global = true)]
    dataset: Option<PathBuf>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Print size, density and value range of a matrix file.
    Inspect { file: PathBuf },
    /// Evaluate several methods on identical splits.
    Compare {
        #[arg(long)]
        config: PathBuf,
        /// Comma-separated method ids: umean, imean, upcc, ipcc, wsrec, biassvd, 2rhyrec.
        #[arg(long, default_value = "umean,imean,upcc,ipcc,wsrec,biassvd,2rhyrec")]
        methods: String,
    },
    /// Evaluate one method across values of a hyperparameter.
    Sweep {
        #[arg(long)]
        config: PathBuf,
        /// One of topK, beta, F, topk_neighbors.
        #[arg(long)]
        param: String,
        /// Comma-separated values or an inclusive start:end:step range.
        #[arg(long)]
        values: String,
        #[arg(long, default_value = "2rhyrec")]
        method: String,
    },
    /// Per-epoch loss, learning rate and test NDCG of the hybrid model.
    Trace {
        #[arg(long)]
        config: PathBuf,
    },
    /// Write a synthetic response-time matrix in WS-Dream layout.
    Synth {
        file: PathBuf,
        #[arg(long, default_value_t = 339)]
        users: usize,
        #[arg(long, default_value_t = 5825)]
        services: usize,
        #[arg(long = "matrix-seed", default_value_t = 0)]
        matrix_seed: u64,
    },
}

const TRACE_DENSITIES: [f64; 4] = [0.1, 0.2, 0.3, 0.4];

fn load_plan(cli: &Cli, path: &Path) -> Result<(RunPlan, QosMatrix)> {
    let mut plan = RunConfigFile::load(path)?.resolve()?;
    if let Some(seed) = cli.seed {
        plan.base.base_seed = seed;
    }
    let dataset = cli
        .dataset
        .clone()
        .or_else(|| plan.dataset.clone())
        .ok_or_else(|| {
            anyhow!(
                "no dataset: set `dataset` in {} or pass --dataset",
                path.display()
            )
        })?;
    let matrix = load_matrix(&dataset)?;
    plan.dataset = Some(dataset);
    Ok((plan, matrix))
}

fn load_matrix(path: &Path) -> Result<QosMatrix> {
    parse_wsdream_matrix(path).with_context(|| format!("cannot load {}", path.display()))
}

fn parse_methods(list: &str) -> Result<Vec<Method>> {
    let mut methods: Vec<Method> = Vec::new();
    for id in list.split(',').map(str::trim).filter(|s| !s.is_empty()) {
        let m: Method = id.parse()?;
        if methods.contains(&m) {
            eprintln!("warning: duplicate method `{id}` ignored");
        } else {
            methods.push(m);
        }
    }
    if methods.is_empty() {
        bail!("no methods given");
    }
    Ok(methods)
}

/// Runs `write` against `<out>/<name>`, or against standard output.
fn emit(
    out: Option<&Path>,
    name: &str,
    write: impl FnOnce(&mut dyn Write) -> Result<()>,
) -> Result<()> {
    match out {
        Some(dir) => {
            std::fs::create_dir_all(dir)
                .with_context(|| format!("cannot create {}", dir.display()))?;
            let path = dir.join(name);
            let mut file = BufWriter::new(
                File::create(&path).with_context(|| format!("cannot create {}", path.display()))?,
            );
            write(&mut file)?;
            file.flush()?;
            eprintln!("wrote {}", path.display());
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write(&mut lock)?;
            lock.flush()?;
        }
    }
    Ok(())
}

fn inspect(file: &Path) -> Result<()> {
    let q = load_matrix(file)?;
    println!("file: {}", file.display());
    println!("users: {}", q.users());
    println!("services: {}", q.services());
    println!("observed: {}", q.observed_count());
    println!("density: {:.6}", q.density());
    match q.value_stats() {
        Some((min, mean, max)) => println!("min: {min}\nmean: {mean}\nmax: {max}"),
        None => println!("min: n/a\nmean: n/a\nmax: n/a"),
    }
    Ok(())
}

fn compare(cli: &Cli, config: &Path, methods: &str) -> Result<()> {
    let methods = parse_methods(methods)?;
    let (plan, source) = load_plan(cli, config)?;
    let mut reports: Vec<EvalReport> = Vec::new();
    for density in plan.densities_or(&[plan.base.density]) {
        let cfg = plan.with_density(density)?;
        for &m in &methods {
            let report = if m.uses_cf_neighbors() && plan.cf_neighbor_grid.len() > 1 {
                let (k, report) = tune_neighbors(&source, &cfg, m, &plan.cf_neighbor_grid)?;
                eprintln!("{m} at density {density}: best neighbor count {k}");
                report
            } else {
                let mut cfg = cfg.clone();
                cfg.hyperparams.cf_neighbors = plan.cf_neighbor_grid[0];
                run_experiment(&source, &cfg, m.predictor(&cfg.hyperparams).as_ref())
                    .with_context(|| format!("{m} at density {density}"))?
            };
            reports.push(report);
        }
    }
    let out = cli.out.as_deref();
    emit(out, "comparison.csv", |w| {
        output::comparison_csv(w, &reports)
    })?;
    if out.is_some() {
        emit(out, "results.csv", |w| output::results_csv(w, &reports))?;
        emit(out, "summary.csv", |w| output::summary_csv(w, &reports))?;
    }
    Ok(())
}

fn sweep(cli: &Cli, config: &Path, param: &str, values: &str, method: &str) -> Result<()> {
    let param: SweepParam = param.parse()?;
    let values = output::parse_values(values)?;
    let method: Method = method.parse()?;
    let (plan, source) = load_plan(cli, config)?;
    let mut points = Vec::new();
    for density in plan.densities_or(&[plan.base.density]) {
        let cfg = plan.with_density(density)?;
        points.extend(parameter_sweep(&source, &cfg, method, param, &values)?);
    }
    emit(cli.out.as_deref(), "sweep.csv", |w| {
        output::sweep_csv(w, &param.to_string(), &points)
    })
}

fn trace(cli: &Cli, config: &Path) -> Result<()> {
    let (plan, source) = load_plan(cli, config)?;
    let mut failures = 0;
    let mut combined = Vec::new();
    for density in plan.densities_or(&TRACE_DENSITIES) {
        let rows = plan
            .with_density(density)
            .and_then(|cfg| Ok(convergence_trace(&source, &cfg)?.0));
        match rows {
            Ok(rows) => {
                if let Some(dir) = cli.out.as_deref() {
                    let name = format!("trace-{}.csv", (density * 100.0).round() as u32);
                    let tagged: Vec<_> = rows.iter().map(|r| (None, *r)).collect();
                    emit(Some(dir), &name, |w| output::trace_csv(w, &tagged))?;
                } else {
                    combined.extend(rows.into_iter().map(|r| (Some(density), r)));
                }
            }
            Err(e) => {
                eprintln!("error: density {density}: {e:#}");
                failures += 1;
            }
        }
    }
    if cli.out.is_none() {
        emit(None, "", |w| output::trace_csv(w, &combined))?;
    }
    if failures > 0 {
        bail!("{failures} densities failed");
    }
    Ok(())
}

fn synth(file: &Path, users: usize, services: usize, seed: u64) -> Result<()> {
    let spec = SurrogateSpec {
        users,
        services,
        ..SurrogateSpec::ws_dream_like(seed)
    };
    generate(&spec)?.write_wsdream(file)?;
    eprintln!("wrote {}", file.display());
    Ok(())
}

fn run(cli: &Cli) -> Result<()> {
    if let Some(jobs) = cli.jobs {
        if jobs == 0 {
            bail!("--jobs must be at least 1");
        }
        rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build_global()
            .context("cannot start worker pool")?;
    }
    match &cli.command {
        Command::Inspect { file } => inspect(file),
        Command::Compare { config, methods } => compare(cli, config, methods),
        Command::Sweep {
            config,
            param,
            values,
            method,
        } => sweep(cli, config, param, values, method),
        Command::Trace { config } => trace(cli, config),
        Command::Synth {
            file,
            users,
            services,
            matrix_seed,
        } => synth(file, *users, *services, *matrix_seed),
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(&cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}
