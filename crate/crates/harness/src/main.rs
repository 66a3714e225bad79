use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use opencd_harness::config::{merge_toml, RunConfig};
use opencd_harness::{presets, run, validate};

const OUT_DIR_ENV: &str = "OPENCD_OUT_DIR";

#[derive(Parser)]
#[command(name = "opencd", version, about = "Counterdiabatic driving for open quantum systems")]
struct Cli {
    /// Output directory; falls back to the manifest, then $OPENCD_OUT_DIR, then ./results.
    #[arg(long, global = true)]
    out_dir: Option<PathBuf>,
    /// Worker threads (defaults to the number of cores).
    #[arg(long, global = true)]
    threads: Option<usize>,
    /// Overrides the manifest seed.
    #[arg(long, global = true)]
    seed: Option<u64>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Source {
    /// TOML manifest; merged over the preset when both are given.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_parser = presets::NAMES)]
    preset: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Run every (cd, eta, tau) combination of a manifest.
    Run(Source),
    /// Run the cartesian product of the manifest's [sweep] lists.
    Sweep(Source),
    /// Run the invariant and oracle suite.
    Validate {
        /// Write the JSON report here.
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

fn load(src: &Source, seed: Option<u64>) -> Result<RunConfig> {
    let mut value: toml::Value = match (&src.preset, &src.config) {
        (None, None) => bail!("either --config or --preset is required"),
        (Some(p), _) => toml::from_str(presets::preset_text(p)?)?,
        (None, Some(_)) => toml::Value::Table(Default::default()),
    };
    if let Some(path) = &src.config {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        let top: toml::Value = toml::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
        merge_toml(&mut value, top);
    }
    let mut cfg = RunConfig::from_toml_str(&toml::to_string(&value)?)?;
    if let Some(s) = seed {
        cfg.seed = s;
    }
    Ok(cfg)
}

fn out_dir(cli: &Option<PathBuf>, cfg: &RunConfig) -> PathBuf {
    cli.clone()
        .or_else(|| cfg.output.dir.clone())
        .or_else(|| std::env::var_os(OUT_DIR_ENV).filter(|v| !v.is_empty()).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn real_main(cli: Cli) -> Result<bool> {
    if let Some(n) = cli.threads {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global()?;
    }
    match &cli.command {
        Command::Run(src) => {
            let cfg = load(src, cli.seed)?;
            let dir = out_dir(&cli.out_dir, &cfg);
            let rec = run::cmd_run(&cfg, &dir)?;
            println!("{} trajectories written to {}", rec.trajectories.len(), dir.join(&cfg.name).display());
            Ok(true)
        }
        Command::Sweep(src) => {
            let cfg = load(src, cli.seed)?;
            let dir = out_dir(&cli.out_dir, &cfg);
            let rec = run::cmd_sweep(&cfg, &dir)?;
            println!("{} cells, {} failures", rec.cells.len(), rec.failures);
            Ok(rec.failures == 0)
        }
        Command::Validate { report } => {
            let rep = validate::run_all(cli.seed.unwrap_or(0));
            for c in &rep.checks {
                println!(
                    "{:<34} {}  {:.3e} (tol {:.0e})  {}",
                    c.name,
                    if c.passed { "PASS" } else { "FAIL" },
                    c.value,
                    c.tolerance,
                    c.detail
                );
            }
            if let Some(p) = report {
                write_report(p, &rep)?;
            }
            Ok(rep.passed)
        }
    }
}

fn write_report(path: &Path, rep: &validate::Report) -> Result<()> {
    if let Some(parent) = path.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent)?;
    }
    std::fs::write(path, serde_json::to_string_pretty(rep)? + "\n")?;
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match real_main(Cli::parse()) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::FAILURE,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
