//! Experiment CLI. Exit codes: 0 success, 1 a command-level invariant was
//! violated by the computed results, 2 bad input or configuration.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};

use condkit_cli::commands;
use condkit_cli::config::Config;

#[derive(Parser)]
#[command(
    name = "condkit",
    version,
    about = "Condition constants, perturbation norms, implication checks, and rate experiments"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(clap::Args)]
struct Common {
    /// Objective label(s), e.g. f_lrp, quadratic:1,10, f_eps:0.1
    #[arg(long = "objective")]
    objectives: Vec<String>,
    /// Flat key=value config file; command-line flags override it
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output CSV path (stdout when omitted)
    #[arg(long)]
    out: Option<PathBuf>,
    /// Probe grid as lo:hi:points (per axis)
    #[arg(long)]
    grid: Option<String>,
    /// RNG seed where a command draws samples
    #[arg(long)]
    seed: Option<u64>,
    /// Iteration count for runs
    #[arg(long)]
    iters: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate all twelve condition constants per objective
    Constants {
        #[command(flatten)]
        common: Common,
    },
    /// Verify every implication edge numerically
    VerifyGraph {
        #[command(flatten)]
        common: Common,
        /// Also write the edge list as JSON next to the report
        #[arg(long)]
        dump_edges: bool,
    },
    /// Measured tail rates of tuned runs against the guaranteed table
    Rates {
        #[command(flatten)]
        common: Common,
        /// "all" or a comma list like "SC+/SC-,EB+/RSI-"
        #[arg(long, default_value = "all")]
        pairs: String,
        /// Override the step size (disables the guarantee comparison)
        #[arg(long)]
        alpha: Option<f64>,
    },
    /// Momentum-tuning plane of linear rates with floor tunings overlaid
    HbSweep {
        #[command(flatten)]
        common: Common,
    },
    /// Iterate deviation under a ladder of vanishing perturbations
    PerturbStudy {
        #[command(flatten)]
        common: Common,
    },
    /// Curvature-estimate blowup along the vanishing-perturbation family
    Discontinuity {
        #[command(flatten)]
        common: Common,
    },
    /// Growth constants of the squared logistic loss and the adaptive run
    Logistic {
        #[command(flatten)]
        common: Common,
    },
}

fn build_config(common: &Common) -> Result<Config, String> {
    let mut cfg = match &common.config {
        Some(p) => Config::from_file(p)?,
        None => Config::default(),
    };
    if let Some(g) = &common.grid {
        cfg.set("grid", g);
    }
    if let Some(s) = common.seed {
        cfg.set("seed", s);
    }
    if let Some(n) = common.iters {
        cfg.set("iters", n);
    }
    Ok(cfg)
}

fn write_output(
    command_name: &str,
    common: &Common,
    cfg: &Config,
    out: commands::CommandOutput,
) -> Result<bool, String> {
    let csv = out.report.to_csv(command_name, cfg, &out.extra_meta);
    match &common.out {
        Some(path) => {
            if let Some(dir) = path.parent() {
                if !dir.as_os_str().is_empty() {
                    std::fs::create_dir_all(dir).map_err(|e| e.to_string())?;
                }
            }
            std::fs::write(path, csv).map_err(|e| e.to_string())?;
            for (suffix, content) in &out.side_files {
                let side = side_path(path, suffix);
                std::fs::write(&side, content).map_err(|e| e.to_string())?;
            }
        }
        None => {
            print!("{csv}");
            for (suffix, content) in &out.side_files {
                println!("--- {suffix} ---");
                println!("{content}");
            }
        }
    }
    for v in &out.report.violations {
        eprintln!("violation: {v}");
    }
    Ok(out.report.violations.is_empty())
}

fn side_path(base: &Path, suffix: &str) -> PathBuf {
    let stem = base
        .file_stem()
        .and_then(|s| s.to_str())
        .unwrap_or("report");
    base.with_file_name(format!("{stem}.{suffix}"))
}

fn run() -> Result<bool, String> {
    let cli = Cli::parse();
    match &cli.command {
        Command::Constants { common } => {
            if common.objectives.is_empty() {
                return Err("constants needs at least one --objective".into());
            }
            let cfg = build_config(common)?;
            let out = commands::cmd_constants(&common.objectives, &cfg)?;
            write_output("constants", common, &cfg, out)
        }
        Command::VerifyGraph { common, dump_edges } => {
            if common.objectives.is_empty() {
                return Err("verify-graph needs at least one --objective".into());
            }
            let cfg = build_config(common)?;
            let out = commands::cmd_verify_graph(&common.objectives, &cfg, *dump_edges)?;
            write_output("verify-graph", common, &cfg, out)
        }
        Command::Rates {
            common,
            pairs,
            alpha,
        } => {
            if common.objectives.is_empty() {
                return Err("rates needs at least one --objective".into());
            }
            let mut cfg = build_config(common)?;
            if let Some(a) = alpha {
                cfg.set("alpha", a);
            }
            cfg.set_default("iters", 500);
            let out = commands::cmd_rates(&common.objectives, pairs, &cfg)?;
            write_output("rates", common, &cfg, out)
        }
        Command::HbSweep { common } => {
            let mut cfg = build_config(common)?;
            if let Some(label) = common.objectives.first() {
                cfg.set("objective", label);
            }
            cfg.set_default("objective", "f_lrp");
            cfg.set_default("alpha_max", 0.12);
            cfg.set_default("na", 200);
            cfg.set_default("nb", 200);
            cfg.set_default("iters", 2000);
            cfg.set_default("x0", 3.3);
            cfg.set_default("upper", 25.0);
            cfg.set_default("mus", "1,7,8.894736842105263,13,19");
            let out = commands::cmd_hb_sweep(&cfg)?;
            write_output("hb-sweep", common, &cfg, out)
        }
        Command::PerturbStudy { common } => {
            let mut cfg = build_config(common)?;
            if let Some(label) = common.objectives.first() {
                cfg.set("objective", label);
            }
            cfg.set_default("objective", "quadratic:2");
            cfg.set_default("alpha", 0.4);
            cfg.set_default("iters", 20);
            cfg.set_default("radius", 0.1);
            cfg.set_default("starts", "-2,-1,1,2");
            cfg.set_default("ladder", "0.4,0.2,0.1,0.05,0.01,0.002");
            let out = commands::cmd_perturb_study(&cfg)?;
            write_output("perturb-study", common, &cfg, out)
        }
        Command::Discontinuity { common } => {
            let mut cfg = build_config(common)?;
            cfg.set_default("ladder", "0.4,0.2,0.1,0.05");
            cfg.set_default("iters", 60);
            cfg.set_default("x0", 3.0);
            let out = commands::cmd_discontinuity(&cfg)?;
            write_output("discontinuity", common, &cfg, out)
        }
        Command::Logistic { common } => {
            let mut cfg = build_config(common)?;
            cfg.set_default("seed", 42);
            cfg.set_default("d", 3);
            cfg.set_default("m", 200);
            cfg.set_default("iters", 6000);
            cfg.set_default("half_width", 3.0);
            // points_per_axis defaults inside the command, scaled by dimension
            let out = commands::cmd_logistic(&cfg)?;
            write_output("logistic", common, &cfg, out)
        }
    }
}

fn main() -> ExitCode {
    match run() {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(msg) => {
            eprintln!("error: {msg}");
            ExitCode::from(2)
        }
    }
}
