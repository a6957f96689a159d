//! Command-line front end: parse a JSON experiment config, apply dotted-key
//! overrides, run experiments, and write CSV/diagnostics files.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use mmtc_core::harness::{
    diagnostics_to_jsonl, run_experiment, to_csv, CsiMode, ExperimentConfig, ExperimentOutput,
};

#[derive(Parser)]
#[command(
    name = "mmtc",
    about = "Link-level Monte-Carlo simulator for sparse-activity multiuser uplinks",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct ConfigArgs {
    /// JSON config file; built-in defaults are used when omitted.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Dotted-key override, e.g. --set system.N=64 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// Directory for CSV and diagnostics outputs.
    #[arg(long, default_value = ".")]
    output_dir: PathBuf,
}

#[derive(Subcommand)]
enum Command {
    /// Run the configured experiment grid and write results.csv.
    Run(ConfigArgs),
    /// Run the four standard curves: {uncoded,coded} x {perfect,imperfect} CSI.
    Sweep(ConfigArgs),
    /// Tabulate complex multiplications per symbol over N in {16,32,64,128}.
    Complexity {
        #[command(flatten)]
        cfg: ConfigArgs,
        /// Trials per (variant, N) cell for the counter runs.
        #[arg(long, default_value_t = 20)]
        trials: u64,
    },
    /// Parse and validate the config, echo the resolved form, exit 0/1.
    ValidateConfig(ConfigArgs),
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {:#}", e);
            ExitCode::FAILURE
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Run(args) => {
            let cfg = load_config(&args)?;
            let out = run_experiment(&cfg).map_err(|e| anyhow!("{}", e))?;
            write_outputs(&args.output_dir, "results", &cfg, &out)?;
            print_summary(&cfg, &out);
            Ok(())
        }
        Command::Sweep(args) => {
            let base = load_config(&args)?;
            for (coded, csi) in [
                (false, CsiMode::Perfect),
                (true, CsiMode::Perfect),
                (false, CsiMode::Imperfect),
                (true, CsiMode::Imperfect),
            ] {
                let mut cfg = base.clone();
                cfg.coded = coded;
                cfg.csi = csi;
                cfg.validate().map_err(|e| anyhow!("{}", e))?;
                let stem = format!(
                    "{}_{}",
                    if coded { "coded" } else { "uncoded" },
                    csi.as_str()
                );
                let out = run_experiment(&cfg).map_err(|e| anyhow!("{}", e))?;
                write_outputs(&args.output_dir, &stem, &cfg, &out)?;
                println!("== {} ==", stem);
                print_summary(&cfg, &out);
            }
            Ok(())
        }
        Command::Complexity { cfg: args, trials } => {
            let base = load_config(&args)?;
            complexity_table(&args.output_dir, &base, trials)
        }
        Command::ValidateConfig(args) => {
            let cfg = load_config(&args)?;
            println!("{}", serde_json::to_string_pretty(&cfg)?);
            Ok(())
        }
    }
}

/// Load the JSON config (or defaults), apply `--set` overrides, then apply
/// the MMTC_SEED environment variable, and validate.
fn load_config(args: &ConfigArgs) -> Result<ExperimentConfig> {
    let cfg: ExperimentConfig = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("reading config {}", path.display()))?;
            serde_json::from_str(&text)
                .with_context(|| format!("parsing config {}", path.display()))?
        }
        None => ExperimentConfig::default(),
    };

    // Round-trip through a JSON value so every key exists before overrides,
    // and unknown override keys are rejected by name on re-deserialization.
    let mut value = serde_json::to_value(&cfg)?;
    for set in &args.sets {
        apply_set(&mut value, set)?;
    }
    let mut cfg: ExperimentConfig =
        serde_json::from_value(value).map_err(|e| anyhow!("invalid override: {}", e))?;

    if let Ok(seed) = std::env::var("MMTC_SEED") {
        cfg.seed = seed
            .parse()
            .map_err(|_| anyhow!("MMTC_SEED must be an unsigned integer, got `{}`", seed))?;
    }
    cfg.validate().map_err(|e| anyhow!("{}", e))?;
    Ok(cfg)
}

/// Apply one `key.path=value` override to the config JSON value.
fn apply_set(root: &mut serde_json::Value, set: &str) -> Result<()> {
    let (path, raw) = set
        .split_once('=')
        .ok_or_else(|| anyhow!("--set expects KEY=VALUE, got `{}`", set))?;
    if path.is_empty() {
        bail!("--set expects a nonempty key, got `{}`", set);
    }
    let parsed: serde_json::Value =
        serde_json::from_str(raw).unwrap_or_else(|_| serde_json::Value::String(raw.to_string()));
    let mut node = root;
    let segments: Vec<&str> = path.split('.').collect();
    for (i, seg) in segments.iter().enumerate() {
        let obj = node
            .as_object_mut()
            .ok_or_else(|| anyhow!("`{}` is not a config section", segments[..i].join(".")))?;
        if i + 1 == segments.len() {
            obj.insert(seg.to_string(), parsed);
            return Ok(());
        }
        node = obj
            .get_mut(*seg)
            .ok_or_else(|| anyhow!("unknown config section `{}`", segments[..=i].join(".")))?;
    }
    unreachable!("empty segment list rejected above")
}

fn write_outputs(
    dir: &Path,
    stem: &str,
    cfg: &ExperimentConfig,
    out: &ExperimentOutput,
) -> Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let csv_path = dir.join(format!("{}.csv", stem));
    fs::write(&csv_path, to_csv(cfg, &out.records))
        .with_context(|| format!("writing {}", csv_path.display()))?;
    let diag_path = dir.join(format!("{}_diagnostics.jsonl", stem));
    fs::write(&diag_path, diagnostics_to_jsonl(&out.diagnostics))
        .with_context(|| format!("writing {}", diag_path.display()))?;
    Ok(())
}

fn print_summary(cfg: &ExperimentConfig, out: &ExperimentOutput) {
    println!(
        "{:>14} {:>7} {:>10} {:>10} {:>10} {:>10} {:>14}",
        "variant", "snr_db", "nser", "ber", "fa_rate", "miss_rate", "cmults/symbol"
    );
    for r in &out.records {
        println!(
            "{:>14} {:>7} {:>10.5} {:>10.5} {:>10.5} {:>10.5} {:>14.1}",
            r.variant,
            r.snr_db,
            r.nser(),
            r.ber(),
            r.false_alarm_rate(),
            r.miss_rate(),
            r.cmults_per_symbol(cfg.system.n, cfg.system.data_len)
        );
    }
    if !out.diagnostics.is_empty() {
        println!("({} diagnostic records)", out.diagnostics.len());
    }
}

/// Per-variant complex-multiplication counts per symbol over a ladder of
/// system sizes N in {16,32,64,128} with M = N/2.
fn complexity_table(dir: &Path, base: &ExperimentConfig, trials: u64) -> Result<()> {
    let sizes = [16usize, 32, 64, 128];
    let mut rows: Vec<(String, Vec<f64>)> = base
        .variants
        .iter()
        .map(|v| (v.to_string(), Vec::new()))
        .collect();
    for &n in &sizes {
        let mut cfg = base.clone();
        cfg.system.n = n;
        cfg.system.m = n / 2;
        cfg.trials = trials;
        cfg.snr_grid_db = vec![cfg.snr_grid_db[0]];
        cfg.validate().map_err(|e| anyhow!("{}", e))?;
        let out = run_experiment(&cfg).map_err(|e| anyhow!("{}", e))?;
        for (row, rec) in rows.iter_mut().zip(&out.records) {
            row.1
                .push(rec.cmults_per_symbol(cfg.system.n, cfg.system.data_len));
        }
    }

    let mut csv = String::from("variant,n,cmults_per_symbol\n");
    print!("{:>14}", "variant");
    for n in sizes {
        print!(" {:>12}", format!("N={}", n));
    }
    println!();
    for (name, counts) in &rows {
        print!("{:>14}", name);
        for (n, c) in sizes.iter().zip(counts) {
            print!(" {:>12.1}", c);
            csv.push_str(&format!("{},{},{:.3}\n", name, n, c));
        }
        println!();
    }
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    let path = dir.join("complexity.csv");
    fs::write(&path, csv).with_context(|| format!("writing {}", path.display()))?;
    Ok(())
}
