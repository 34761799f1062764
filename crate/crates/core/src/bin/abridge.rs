use std::path::PathBuf;
use std::process::ExitCode;

use avoiding_bridges::cli::{cmd_bench, cmd_enumerate, cmd_sample, cmd_verify};
use avoiding_bridges::config::Config;
use avoiding_bridges::verify::stats::render_text;
use avoiding_bridges::verify::suites::{is_suite, SUITES};
use clap::{Args, Parser, Subcommand};

/// Avoiding Brownian bridge ensembles: samplers and verification suites.
#[derive(Parser, Debug)]
#[command(name = "abridge", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Debug)]
struct Common {
    /// Flat `key = value` configuration file; flags override its values.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Extra `key=value` overrides (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
    /// Root seed.
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker thread cap (default: available cores).
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sample bridges, avoiding ensembles, walk ensembles or Glauber states.
    Sample {
        #[command(flatten)]
        common: Common,
        /// bridge | avoid | walk | glauber
        #[arg(long)]
        kind: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        a: Option<f64>,
        #[arg(long, allow_hyphen_values = true)]
        b: Option<f64>,
        /// Number of curves (equally spaced endpoints unless --x/--y given).
        #[arg(long)]
        k: Option<usize>,
        /// Entrance values, comma separated, top first.
        #[arg(long, allow_hyphen_values = true)]
        x: Option<String>,
        /// Exit values, comma separated, top first.
        #[arg(long, allow_hyphen_values = true)]
        y: Option<String>,
        /// Constant lower barrier value.
        #[arg(long, allow_hyphen_values = true)]
        g: Option<f64>,
        /// Grid steps (lattice steps for walk and glauber).
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long = "n-samples")]
        n_samples: Option<usize>,
    },
    /// Run a verification suite; exit 0 iff it passes.
    Verify {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        suite: Option<String>,
        /// For the detect suite: none | hidden | both.
        #[arg(long)]
        planted: Option<String>,
    },
    /// Enumerate avoiding lattice configurations.
    Enumerate {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        steps: Option<usize>,
        /// Entrance heights (lattice units), comma separated.
        #[arg(long = "x-heights", allow_hyphen_values = true)]
        x_heights: Option<String>,
        #[arg(long = "y-heights", allow_hyphen_values = true)]
        y_heights: Option<String>,
        #[arg(long = "g-height", allow_hyphen_values = true)]
        g_height: Option<i64>,
    },
    /// Sampler and chain throughput.
    Bench {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        samples: Option<usize>,
        #[arg(long)]
        events: Option<u64>,
    },
}

fn usage_error(msg: impl std::fmt::Display) -> ExitCode {
    eprintln!("abridge: {msg}");
    ExitCode::from(2)
}

fn build_config(common: &Common, flags: &[(&str, Option<String>)]) -> Result<Config, String> {
    let mut cfg = match &common.config {
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| format!("{}: {e}", path.display()))?;
            Config::parse(&text).map_err(|e| e.to_string())?
        }
        None => Config::new(),
    };
    for kv in &common.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| format!("--set expects KEY=VALUE, got {kv:?}"))?;
        cfg.set(k.trim(), v.trim());
    }
    if let Some(s) = common.seed {
        cfg.set("seed", s.to_string());
    }
    if let Some(o) = &common.out {
        cfg.set("out", o.to_string_lossy().to_string());
    }
    for (k, v) in flags {
        if let Some(v) = v {
            cfg.set(k, v.clone());
        }
    }
    Ok(cfg)
}

fn opt<T: ToString>(v: &Option<T>) -> Option<String> {
    v.as_ref().map(ToString::to_string)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let common = match &cli.command {
        Command::Sample { common, .. }
        | Command::Verify { common, .. }
        | Command::Enumerate { common, .. }
        | Command::Bench { common, .. } => common,
    };
    if let Some(t) = common.threads {
        if t == 0 {
            return usage_error("--threads must be positive");
        }
        if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(t).build_global() {
            return usage_error(e);
        }
    }
    let flags: Vec<(&str, Option<String>)> = match &cli.command {
        Command::Sample { kind, a, b, k, x, y, g, grid, n_samples, .. } => vec![
            ("kind", kind.clone()),
            ("a", opt(a)),
            ("b", opt(b)),
            ("k", opt(k)),
            ("x", x.clone()),
            ("y", y.clone()),
            ("g", opt(g)),
            ("grid", opt(grid)),
            ("n_samples", opt(n_samples)),
        ],
        Command::Verify { suite, planted, .. } => vec![("suite", suite.clone()), ("planted", planted.clone())],
        Command::Enumerate { steps, x_heights, y_heights, g_height, .. } => vec![
            ("steps", opt(steps)),
            ("x_heights", x_heights.clone()),
            ("y_heights", y_heights.clone()),
            ("g_height", opt(g_height)),
        ],
        Command::Bench { samples, events, .. } => vec![("samples", opt(samples)), ("events", opt(events))],
    };
    let cfg = match build_config(common, &flags) {
        Ok(c) => c,
        Err(e) => return usage_error(e),
    };
    match &cli.command {
        Command::Sample { .. } => {
            if !cfg.contains("kind") {
                return usage_error("sample needs --kind (bridge | avoid | walk | glauber)");
            }
            match cmd_sample(&cfg) {
                Ok(files) => {
                    for f in files {
                        println!("wrote {}", f.display());
                    }
                    ExitCode::SUCCESS
                }
                Err(e) => {
                    eprintln!("abridge sample: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Verify { .. } => {
            let suite = cfg.raw("suite").unwrap_or_default().to_string();
            if !is_suite(&suite) {
                return usage_error(format!("unknown suite {suite:?}; expected one of {}", SUITES.join(", ")));
            }
            match cmd_verify(&cfg) {
                Ok((result, _)) => {
                    print!("{}", render_text(&result.reports));
                    if result.passed() {
                        println!("SUITE {suite}: PASS");
                        ExitCode::SUCCESS
                    } else {
                        println!("SUITE {suite}: FAIL");
                        for r in result.failures() {
                            eprintln!("failed: {} ({})", r.name, r.threshold);
                        }
                        ExitCode::from(1)
                    }
                }
                Err(e) => {
                    eprintln!("abridge verify: {e}");
                    ExitCode::from(1)
                }
            }
        }
        Command::Enumerate { .. } => match cmd_enumerate(&cfg) {
            Ok(files) => {
                for f in files {
                    println!("wrote {}", f.display());
                }
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("abridge enumerate: {e}");
                ExitCode::from(1)
            }
        },
        Command::Bench { .. } => match cmd_bench(&cfg) {
            Ok(text) => {
                print!("{text}");
                ExitCode::SUCCESS
            }
            Err(e) => {
                eprintln!("abridge bench: {e}");
                ExitCode::from(1)
            }
        },
    }
}
