use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use modesheaf::complex::{nerve, product, Complex, Cover};
use modesheaf::par::{self, Execution};
use modesheaf::scenario::{RunOptions, RunSummary, Scenario};

/// Simulate and validate simplicial mode systems.
#[derive(Parser)]
#[command(name = "modesheaf", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run a scenario and write its trace as CSV.
    Run {
        #[arg(long)]
        scenario: PathBuf,
        /// Time step in seconds (overrides the scenario).
        #[arg(long)]
        dt: Option<f64>,
        /// Trace file; a directory in sweep mode. Standard output when omitted.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Noise seed (overrides the scenario).
        #[arg(long)]
        seed: Option<u64>,
        /// Sweep an N x N grid of start offsets (two-car scenarios).
        #[arg(long, value_name = "N")]
        sweep: Option<usize>,
        /// Run sweeps on one thread.
        #[arg(long)]
        sequential: bool,
    },
    /// Validate the sheaf laws on random probe states and print the report.
    Check {
        #[arg(long)]
        scenario: PathBuf,
        #[arg(long, default_value_t = 200)]
        probes: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Print the nerve of a cover file.
    Nerve { cover: PathBuf },
    /// Print the product of two complex files.
    Product { a: PathBuf, b: PathBuf },
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().filter_or("MODESHEAF_LOG", "warn")).init();
    let cli = Cli::parse();
    match dispatch(cli.command) {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(1)
        }
    }
}

fn dispatch(cmd: Command) -> Result<u8> {
    match cmd {
        Command::Run { scenario, dt, out, seed, sweep, sequential } => {
            let sc = load(&scenario)?;
            if let Some(dt) = dt {
                if !(dt > 0.0 && dt.is_finite()) {
                    bail!("--dt must be positive, got {dt}");
                }
            }
            let checked = sc.audit().context("partition audit failed")?;
            log::info!("partition audit: {checked} states");
            let opts = RunOptions { dt, seed, ..RunOptions::default() };
            match sweep {
                None => cmd_run(&sc, &opts, out.as_deref()),
                Some(n) => cmd_sweep(&sc, &opts, n, out.as_deref(), if sequential { Execution::Sequential } else { Execution::Parallel }),
            }
        }
        Command::Check { scenario, probes, seed, out } => {
            if probes == 0 {
                bail!("no probes: --probes must be at least 1");
            }
            let sc = load(&scenario)?;
            let report = sc.check(probes, seed)?;
            emit(out.as_deref(), report.to_json().as_bytes())?;
            for e in &report.laws {
                eprintln!("{:<18} {:?} ({} checked)", e.id, e.status, e.checked);
            }
            Ok(if report.passed { 0 } else { 1 })
        }
        Command::Nerve { cover } => {
            let text = read(&cover)?;
            let c = Cover::from_json(&text).with_context(|| format!("{}", cover.display()))?;
            println!("{}", nerve(&c)?.to_json());
            Ok(0)
        }
        Command::Product { a, b } => {
            let ca = Complex::from_json(&read(&a)?).with_context(|| format!("{}", a.display()))?;
            let cb = Complex::from_json(&read(&b)?).with_context(|| format!("{}", b.display()))?;
            println!("{}", product(&ca, &cb)?.0.to_json());
            Ok(0)
        }
    }
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))
}

fn load(path: &Path) -> Result<Scenario> {
    Scenario::load(path).with_context(|| format!("loading {}", path.display()))
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, bytes).with_context(|| format!("cannot write {}", p.display())),
        None => {
            let mut stdout = io::stdout().lock();
            stdout.write_all(bytes)?;
            if !bytes.ends_with(b"\n") {
                stdout.write_all(b"\n")?;
            }
            Ok(())
        }
    }
}

fn describe(s: &RunSummary) -> String {
    serde_json::to_string(&s.outcome).unwrap_or_default()
}

fn cmd_run(sc: &Scenario, opts: &RunOptions, out: Option<&Path>) -> Result<u8> {
    let r = sc.run(opts)?;
    let trace = r.trace.expect("recording run");
    match out {
        Some(p) => {
            let f = fs::File::create(p).with_context(|| format!("cannot write {}", p.display()))?;
            trace.write_csv(io::BufWriter::new(f))?;
        }
        None => trace.write_csv(io::stdout().lock())?,
    }
    eprintln!("{}: {} steps, {}", sc.name(), r.summary.steps, describe(&r.summary));
    Ok(r.summary.exit_code() as u8)
}

fn cmd_sweep(sc: &Scenario, opts: &RunOptions, n: usize, out: Option<&Path>, exec: Execution) -> Result<u8> {
    if sc.joint().is_none() {
        bail!("--sweep needs a two-car scenario");
    }
    if n == 0 {
        bail!("--sweep needs N >= 1");
    }
    if let Some(dir) = out {
        fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    }
    let max = sc.file.two_car.as_ref().and_then(|t| t.sweep.as_ref()).map_or(0.1, |s| s.max_offset_frac);
    let offsets: Vec<(usize, [f64; 2])> = sc.sweep_offsets(n, max).into_iter().enumerate().collect();
    let results = par::map(&offsets, exec, |&(k, o)| -> Result<RunSummary> {
        let r = sc.run(&RunOptions { offsets_km: Some(o), record: out.is_some(), ..opts.clone() })?;
        if let (Some(dir), Some(trace)) = (out, r.trace) {
            let p = dir.join(format!("{}_{:02}_{:02}.csv", sc.name(), k / n, k % n));
            let f = fs::File::create(&p).with_context(|| format!("cannot write {}", p.display()))?;
            trace.write_csv(io::BufWriter::new(f))?;
        }
        Ok(r.summary)
    });
    let mut code = 0u8;
    for ((_, o), r) in offsets.iter().zip(&results) {
        let c = match r {
            Ok(s) => {
                println!("{:.4}\t{:.4}\t{}", o[0], o[1], describe(s));
                s.exit_code() as u8
            }
            Err(e) => {
                println!("{:.4}\t{:.4}\terror: {e:#}", o[0], o[1]);
                1
            }
        };
        // breach outranks halt outranks other failures
        code = match (code, c) {
            (2, _) | (_, 2) => 2,
            (3, _) | (_, 3) => 3,
            (a, b) => a.max(b),
        };
    }
    Ok(code)
}
