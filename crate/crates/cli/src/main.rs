use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use qstrat_cli::{parse_channel_spec, preset, render_plot, run_sweep, SweepConfig};
use qstrat_comb::{n_fold_sequential_choi, verify_comb, StrategyChoi};
use qstrat_programs::{evaluate, EvalOptions, Mode, Quantity};

/// One-shot distinguishability quantities for quantum strategies.
#[derive(Parser)]
#[command(name = "qstrat", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct EvalArgs {
    /// First channel spec (e.g. gadc:0.2:0.3, identity:2, random:2:2:7).
    #[arg(long)]
    a: String,
    /// Second channel spec.
    #[arg(long)]
    b: String,
    /// Number of sequential channel uses.
    #[arg(long, default_value_t = 1)]
    n: usize,
    /// Smoothing parameter for dmin/dmax.
    #[arg(long, default_value_t = 0.05)]
    epsilon: f64,
    /// adaptive or parallel.
    #[arg(long, default_value = "adaptive")]
    mode: String,
    /// Emit the full result record as JSON.
    #[arg(long)]
    json: bool,
}

#[derive(Subcommand)]
enum Command {
    /// Normalized strategy distance between n uses of two channels.
    Distance(EvalArgs),
    /// Distillable distinguishability (smooth strategy min-relative entropy).
    Dmin(EvalArgs),
    /// Distinguishability cost (smooth strategy max-relative entropy).
    Dmax(EvalArgs),
    /// Run a sweep config, appending results to its CSV with resume support.
    Sweep {
        /// Path to a sweep config JSON.
        #[arg(long, conflicts_with = "preset")]
        config: Option<PathBuf>,
        /// Shipped preset name (fig3, fig4, fig5).
        #[arg(long)]
        preset: Option<String>,
        /// Override the preset/config output CSV path.
        #[arg(long)]
        output: Option<String>,
        /// Concurrent solver workers.
        #[arg(long, default_value_t = 2)]
        jobs: usize,
        /// Keep rows already present in the output CSV.
        #[arg(long)]
        resume: bool,
    },
    /// Render adaptive-minus-parallel gap curves from a sweep CSV.
    Plot {
        #[arg(long)]
        csv: PathBuf,
        #[arg(long)]
        quantity: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Check the comb causality conditions of a strategy Choi JSON file.
    Verify {
        #[arg(long)]
        comb: PathBuf,
        /// PSD / residual tolerance.
        #[arg(long, default_value_t = 1e-9)]
        tol: f64,
    },
}

fn run_eval(quantity: Quantity, args: &EvalArgs) -> Result<(), String> {
    let build = |spec: &str| -> Result<StrategyChoi, String> {
        let one = parse_channel_spec(spec)
            .map_err(|e| format!("channel '{spec}': {e}"))?
            .build()
            .map_err(|e| e.to_string())?;
        n_fold_sequential_choi(&one, args.n).map_err(|e| e.to_string())
    };
    let a = build(&args.a)?;
    let b = build(&args.b)?;
    let mode = Mode::parse(&args.mode).map_err(|e| e.to_string())?;
    let result = evaluate(quantity, &a, &b, args.epsilon, mode, &EvalOptions::default())
        .map_err(|e| e.to_string())?;
    if args.json {
        println!("{}", result.to_json());
    } else {
        let unit = match quantity {
            Quantity::Distance => "",
            _ => " bits",
        };
        println!(
            "{} ({}, n={}{}) = {:.12}{unit}",
            quantity.as_str(),
            mode.as_str(),
            args.n,
            if quantity == Quantity::Distance {
                String::new()
            } else {
                format!(", eps={}", args.epsilon)
            },
            result.value
        );
        println!(
            "  certificates: primal {:.12e}, dual {:.12e}, gap {:.3e}, {} iterations, status {}",
            result.primal_value,
            result.dual_value,
            result.gap,
            result.solver.iterations,
            result.solver.status.as_str()
        );
    }
    Ok(())
}

fn run() -> Result<ExitCode, String> {
    let cli = Cli::parse();
    match cli.command {
        Command::Distance(args) => run_eval(Quantity::Distance, &args)?,
        Command::Dmin(args) => run_eval(Quantity::Dmin, &args)?,
        Command::Dmax(args) => run_eval(Quantity::Dmax, &args)?,
        Command::Sweep {
            config,
            preset: preset_name,
            output,
            jobs,
            resume,
        } => {
            let cfg: SweepConfig = match (&config, &preset_name) {
                (Some(path), None) => {
                    let text = std::fs::read_to_string(path).map_err(|e| e.to_string())?;
                    let mut cfg = SweepConfig::from_json(&text).map_err(|e| e.to_string())?;
                    if let Some(out) = &output {
                        cfg.output_path = out.clone();
                    }
                    cfg
                }
                (None, Some(name)) => {
                    preset(name, output.as_deref()).map_err(|e| e.to_string())?
                }
                _ => return Err("pass exactly one of --config or --preset".into()),
            };
            let out_path = std::path::Path::new(&cfg.output_path);
            if out_path.exists() && !resume {
                return Err(format!(
                    "output '{}' exists; pass --resume to skip completed cells",
                    cfg.output_path
                ));
            }
            let rows = run_sweep(&cfg, jobs).map_err(|e| e.to_string())?;
            println!(
                "sweep complete: {} rows in {}",
                rows.len(),
                cfg.output_path
            );
        }
        Command::Plot { csv, quantity, out } => {
            render_plot(&csv, &quantity, &out).map_err(|e| e.to_string())?;
            println!("wrote {}", out.display());
        }
        Command::Verify { comb, tol } => {
            let text = std::fs::read_to_string(&comb).map_err(|e| e.to_string())?;
            let strategy = StrategyChoi::from_json(&text).map_err(|e| e.to_string())?;
            let report = verify_comb(&strategy, tol);
            for level in &report.levels {
                println!(
                    "level {}: min eigenvalue {:+.3e}, chain residual {:.3e}",
                    level.level, level.min_eigenvalue, level.residual
                );
            }
            if report.pass {
                println!("comb conditions hold at tolerance {tol:.1e}");
            } else {
                println!("comb conditions FAIL at tolerance {tol:.1e}");
                return Ok(ExitCode::from(1));
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    match run() {
        Ok(code) => code,
        Err(message) => {
            eprintln!("error: {message}");
            ExitCode::from(2)
        }
    }
}
