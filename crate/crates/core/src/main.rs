use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Instant;

use clap::{Args, Parser, Subcommand};

use xplab::app::config::{parse_constant, parse_p_list};
use xplab::app::envelope::{table_to_csv, to_csv, to_json};
use xplab::app::{
    run_genus, run_list, run_verify, JobConfig, ListTarget, OutputFormat, ReportEnvelope,
    TableEnvelope, VerifyTarget,
};
use xplab::error::Error;

/// Exit status for bad arguments and invalid configuration.
const USAGE: u8 = 64;

#[derive(Parser)]
#[command(
    name = "xplab",
    version,
    about = "Verification checks for the modular curves X(p)"
)]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
    #[command(flatten)]
    common: Common,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run one family of checks and print a report.
    Verify {
        /// geometry, repulsion, volume or multiplicity
        target: String,
    },
    /// Print derived invariants.
    Report {
        /// genus
        what: String,
    },
    /// Enumerate cusps, CM points, singular bicusps or Hecke images.
    List {
        /// cusps, cm, bicusps or hecke
        what: String,
    },
}

#[derive(Args)]
struct Common {
    /// Comma-separated primes.
    #[arg(long, global = true)]
    p: Option<String>,
    #[arg(long, global = true)]
    delta: Option<f64>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long = "height-bound", global = true)]
    height_bound: Option<u64>,
    /// NAME=VALUE, repeatable.
    #[arg(long = "const", global = true)]
    constants: Vec<String>,
    /// Worker threads. Falls back to XPLAB_JOBS, then the config file.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// json or csv
    #[arg(long, global = true)]
    out: Option<String>,
    /// INI file with defaults; flags override it.
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Volume check: ht, htd, htad, profile or all.
    #[arg(long, global = true)]
    check: Option<String>,
    /// Inner radius for volume checks.
    #[arg(long, global = true)]
    r: Option<f64>,
    /// Outer radius for volume checks.
    #[arg(long = "R", global = true)]
    big_r: Option<f64>,
    /// Special set for multiplicity: cm_plus, cm_minus, sbc or diagonals.
    #[arg(long, global = true)]
    set: Option<String>,
    /// Hecke degree for `list hecke`.
    #[arg(long, global = true)]
    n: Option<u64>,
    /// Hecke convention for `list hecke`.
    #[arg(long, global = true)]
    convention: Option<String>,
}

fn build_config(command: &str, c: &Common) -> Result<JobConfig, Error> {
    let mut cfg = JobConfig {
        command: command.to_string(),
        ..Default::default()
    };
    if let Some(path) = &c.config {
        cfg.load_ini(path)?;
    }
    if let Ok(v) = std::env::var("XPLAB_JOBS") {
        cfg.set("jobs", &v)?;
    }
    if let Some(p) = &c.p {
        cfg.p = parse_p_list(p)?;
    }
    if let Some(v) = c.delta {
        cfg.delta = v;
    }
    if let Some(v) = c.tol {
        cfg.tol = v;
    }
    if let Some(v) = c.height_bound {
        cfg.height_bound = Some(v);
    }
    for s in &c.constants {
        let (k, v) = parse_constant(s)?;
        cfg.constants.insert(k, v);
    }
    if let Some(v) = c.jobs {
        cfg.jobs = v;
    }
    if let Some(v) = c.seed {
        cfg.seed = v;
    }
    if let Some(v) = &c.out {
        cfg.out = v.parse()?;
    }
    let opts = [
        ("check", c.check.clone()),
        ("r", c.r.map(|x| x.to_string())),
        ("R", c.big_r.map(|x| x.to_string())),
        ("set", c.set.clone()),
        ("n", c.n.map(|x| x.to_string())),
        ("convention", c.convention.clone()),
    ];
    for (k, v) in opts {
        if let Some(v) = v {
            cfg.options.insert(k.to_string(), v);
        }
    }
    cfg.validate()?;
    Ok(cfg)
}

fn fail(e: &Error) -> ExitCode {
    eprintln!("xplab: {e}");
    match e {
        Error::Domain(_) | Error::Range(_) => ExitCode::from(USAGE),
        _ => ExitCode::from(1),
    }
}

fn run(cli: &Cli) -> Result<ExitCode, Error> {
    let start = Instant::now();
    let (text, code) = match &cli.cmd {
        Cmd::Verify { target } => {
            let t: VerifyTarget = target.parse()?;
            let cfg = build_config(&format!("verify {target}"), &cli.common)?;
            let checks = run_verify(t, &cfg)?;
            let mut env = ReportEnvelope::new(cfg, checks);
            env.wall_time_s = start.elapsed().as_secs_f64();
            let text = match env.config.out {
                OutputFormat::Json => to_json(&env)?,
                OutputFormat::Csv => to_csv(&env)?,
            };
            let s = env.summary;
            eprintln!(
                "{} checks: {} pass, {} fail, {} inconclusive in {:.2} s",
                s.total, s.pass, s.fail, s.inconclusive, env.wall_time_s
            );
            (text, s.exit_code())
        }
        Cmd::Report { what } | Cmd::List { what } => {
            let is_report = matches!(cli.cmd, Cmd::Report { .. });
            let command = format!("{} {what}", if is_report { "report" } else { "list" });
            let cfg = build_config(&command, &cli.common)?;
            let rows = if is_report {
                if what != "genus" {
                    return Err(Error::Domain(format!("unknown report {what:?}")));
                }
                run_genus(&cfg)?
            } else {
                run_list(what.parse::<ListTarget>()?, &cfg)?
            };
            let env = TableEnvelope::new(cfg, rows);
            let text = match env.config.out {
                OutputFormat::Json => to_json(&env)?,
                OutputFormat::Csv => table_to_csv(&env)?,
            };
            eprintln!("done in {:.2} s", start.elapsed().as_secs_f64());
            (text, 0)
        }
    };
    print!("{text}");
    Ok(ExitCode::from(code as u8))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { USAGE } else { 0 };
            let _ = e.print();
            return ExitCode::from(code);
        }
    };
    match run(&cli) {
        Ok(code) => code,
        Err(e) => fail(&e),
    }
}
