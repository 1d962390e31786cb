use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use surflow::harness::{
    audit_tension, load_config, output, run_ksweep, run_mms_order_study, run_refine, run_single, write_outputs,
    Experiment, ExperimentConfig, Ledger, Status,
};

#[derive(Parser)]
#[command(name = "surflow", version, about = "Thin-film / surfactant simulator and audits")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// TOML experiment config.
    config: PathBuf,
    /// Overrides `output_dir` from the config.
    #[arg(long)]
    output_dir: Option<PathBuf>,
    /// Overrides `seed` from the config.
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Subcommand)]
enum Command {
    /// Single run with trajectory audits.
    Run(Common),
    /// k-sweep or joint refinement, as set by `[experiment]`.
    Sweep(Common),
    /// Manufactured-solution order study.
    Mms(Common),
    /// Tension and regularization-ladder audits only.
    AuditTension(Common),
}

fn load(c: &Common) -> surflow::Result<(ExperimentConfig, PathBuf)> {
    let mut cfg = load_config(&c.config)?;
    if let Some(seed) = c.seed {
        cfg.seed = seed;
    }
    let dir = c
        .output_dir
        .clone()
        .or_else(|| cfg.output_dir.as_ref().map(|d| cfg.base_dir.join(d)))
        .unwrap_or_else(|| PathBuf::from("out"));
    cfg.output_dir = Some(dir.clone());
    Ok((cfg, dir))
}

fn report(ledger: &Ledger) -> bool {
    for e in ledger.entries() {
        let tag = match e.status {
            Status::Pass => "PASS",
            Status::Fail => "FAIL",
            Status::Skipped => "SKIP",
        };
        println!("{tag} {}: {}", e.name, e.detail);
    }
    ledger.all_pass()
}

fn to_usize(v: &[i64]) -> Vec<usize> {
    v.iter().map(|&n| n as usize).collect()
}

fn execute(cmd: Command) -> surflow::Result<bool> {
    match cmd {
        Command::Run(c) => {
            let (cfg, dir) = load(&c)?;
            let result = run_single(&cfg)?;
            for p in write_outputs(&result, &dir)? {
                println!("wrote {}", p.display());
            }
            Ok(report(&result.ledger))
        }
        Command::Sweep(c) => {
            let (cfg, dir) = load(&c)?;
            output::ensure_dir(&dir)?;
            match &cfg.experiment {
                Experiment::Refine { ns, dts, basis_size } => {
                    let rep = run_refine(&cfg, &to_usize(ns), dts, *basis_size)?;
                    write_report(&dir.join("refine.json"), &cfg, &rep, &rep.ledger)
                }
                Experiment::KSweep { ks } => {
                    let ks: Vec<u32> = ks.iter().map(|&k| k as u32).collect();
                    let rep = run_ksweep(&cfg, &ks)?;
                    write_report(&dir.join("ksweep.json"), &cfg, &rep, &rep.ledger)
                }
                _ => {
                    let rep = run_ksweep(&cfg, &[8, 16, 32])?;
                    write_report(&dir.join("ksweep.json"), &cfg, &rep, &rep.ledger)
                }
            }
        }
        Command::Mms(c) => {
            let (cfg, dir) = load(&c)?;
            output::ensure_dir(&dir)?;
            let (ns, factor) = match &cfg.experiment {
                Experiment::OrderStudy { ns, dt_factor } => (to_usize(ns), *dt_factor),
                _ => (vec![32, 64, 128, 256], 0.5),
            };
            let rep = run_mms_order_study(&cfg, &ns, factor)?;
            for l in &rep.levels {
                println!("n={} dt={:e} steps={} error_h={:e} error_gamma={:e}", l.n, l.dt, l.steps, l.error_h, l.error_gamma);
            }
            write_report(&dir.join("mms.json"), &cfg, &rep, &rep.ledger)
        }
        Command::AuditTension(c) => {
            let (cfg, dir) = load(&c)?;
            output::ensure_dir(&dir)?;
            let rep = audit_tension(&cfg.tension()?, cfg.seed)?;
            write_report(&dir.join("audit.json"), &cfg, &rep, &rep.ledger)
        }
    }
}

fn write_report<T: serde::Serialize>(path: &Path, cfg: &ExperimentConfig, rep: &T, ledger: &Ledger) -> surflow::Result<bool> {
    #[derive(serde::Serialize)]
    struct Doc<'a, T> {
        config: &'a ExperimentConfig,
        note: &'a str,
        report: &'a T,
    }
    output::write_json(
        path,
        &Doc {
            config: cfg,
            note: surflow::harness::SCENARIO_NOTE,
            report: rep,
        },
    )?;
    println!("wrote {}", path.display());
    Ok(report(ledger))
}

fn main() -> ExitCode {
    match execute(Cli::parse().command) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
