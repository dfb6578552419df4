use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use hypstab_cli::{parse_sweep_values, run_to_outcome, CliError, CommandKind, JobConfig, PointSpec, Status, SweepSpec};

#[derive(Parser)]
#[command(name = "hypstab", version, about = "Stability of hyperbolic boundary value and shock problems")]
struct Cli {
    #[command(subcommand)]
    command: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// Registry name (mhd, euler-isentropic, maxwell-biaxial, euler-shock, mhd-shock, two-by-two) or JSON path.
    #[arg(long)]
    model: Option<String>,
    /// JSON job configuration; flags given here override it.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Approximate number of frequency grid points.
    #[arg(long)]
    grid: Option<usize>,
    #[arg(long)]
    gamma_floor: Option<f64>,
    /// Grid minima polished by local search (default 3).
    #[arg(long)]
    refine: Option<usize>,
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; falls back to HYPSTAB_THREADS.
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Classify the real roots over a frequency.
    Classify {
        #[command(flatten)]
        common: Common,
        /// JSON point, e.g. {"U": {...}, "xi": [0, 0, 1]}.
        #[arg(long)]
        point: Option<String>,
    },
    /// Uniform Lopatinski scan over the frequency half sphere.
    Scan {
        #[command(flatten)]
        common: Common,
    },
    /// Majda determinant of a shock, optionally along a field sweep.
    Shock {
        #[command(flatten)]
        common: Common,
        /// Parameter and values, e.g. `--sweep H 1e-1..1e-4`.
        #[arg(long, num_args = 2, value_names = ["PARAM", "VALUES"])]
        sweep: Option<Vec<String>>,
        /// Compare each swept shock with the Euler shock.
        #[arg(long)]
        compare_euler: bool,
    },
    /// Structural checks: hyperbolicity, symmetry, boundary, symmetrizer identities.
    Verify {
        #[command(flatten)]
        common: Common,
    },
    /// Measured constant of the maximal estimate at random data.
    Probe {
        #[command(flatten)]
        common: Common,
    },
    /// 2x2 normal-form sweep over (a, c).
    Demo {
        #[command(flatten)]
        common: Common,
    },
}

fn build(cli: Cli) -> Result<JobConfig, CliError> {
    let (kind, common) = match &cli.command {
        Cmd::Classify { common, .. } => (CommandKind::Classify, common),
        Cmd::Scan { common } => (CommandKind::Scan, common),
        Cmd::Shock { common, .. } => (CommandKind::Shock, common),
        Cmd::Verify { common } => (CommandKind::Verify, common),
        Cmd::Probe { common } => (CommandKind::Probe, common),
        Cmd::Demo { common } => (CommandKind::Demo, common),
    };
    let mut cfg = match &common.config {
        Some(p) => JobConfig::from_json(&std::fs::read_to_string(p)?)?,
        None => JobConfig::default(),
    };
    if let Some(c) = cfg.command {
        if c != kind {
            return Err(CliError::Config(format!("command: config says '{}', invoked as '{}'", c.name(), kind.name())));
        }
    }
    cfg.command = Some(kind);
    if let Some(m) = &common.model {
        cfg.model = m.clone();
    }
    if let Some(o) = &common.out {
        cfg.out = Some(o.clone());
    }
    if let Some(g) = common.grid {
        cfg.grid = g;
    }
    if let Some(g) = common.gamma_floor {
        cfg.gamma_floor = g;
    }
    if let Some(r) = common.refine {
        cfg.refine = r;
    }
    if let Some(s) = common.seed {
        cfg.seed = s;
    }
    if let Some(t) = common.threads {
        cfg.threads = Some(t);
    }
    match &cli.command {
        Cmd::Classify { point: Some(p), .. } => {
            let de = &mut serde_json::Deserializer::from_str(p);
            let spec: PointSpec = serde_path_to_error::deserialize(de)
                .map_err(|e| CliError::Config(format!("point.{}: {}", e.path(), e.inner())))?;
            cfg.point = Some(spec);
        }
        Cmd::Shock { sweep, compare_euler, .. } => {
            if let Some(v) = sweep {
                cfg.sweep = Some(SweepSpec { parameter: v[0].clone(), values: parse_sweep_values(&v[1])? });
            }
            cfg.compare_euler |= *compare_euler;
        }
        _ => {}
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let cfg = match build(cli) {
        Ok(c) => c,
        Err(e) => {
            eprintln!("error: {e}");
            return ExitCode::from(Status::Failure.code() as u8);
        }
    };
    let out = run_to_outcome(&cfg);
    if out.status == Status::Failure {
        eprint!("{}", out.summary);
    } else {
        print!("{}", out.summary);
        for a in &out.artifacts {
            println!("wrote {}", a.display());
        }
    }
    ExitCode::from(out.status.code() as u8)
}
