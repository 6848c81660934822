use clap::{Parser, Subcommand};
use nanonas_cli::{cmd_report, cmd_reproduce, cmd_run, Invocation, RunCommand, SpaceAction};
use std::path::PathBuf;

/// Desk-scale neural architecture search: random search with weight
/// sharing, an ASHA early-stopping baseline, and an exact-reproducibility
/// harness.
#[derive(Parser)]
#[command(name = "nanonas", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Commands,
}

#[derive(clap::Args, Clone)]
struct ConfigArgs {
    /// Config file with `key = value` lines (dotted keys).
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. `--set train.epochs=50`. Repeatable; flags
    /// beat the config file, which beats built-in defaults.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
}

#[derive(Subcommand)]
enum Commands {
    /// Inspect the configured search space.
    Space {
        #[command(subcommand)]
        action: SpaceCommands,
    },
    /// Stage 1: random search with weight sharing (all trials).
    SearchWs {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// ASHA baseline: early-stopping search plus stage-3 evaluation.
    Asha {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stage 2: retrain candidate genotypes from scratch and pick one.
    Stage2 {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Candidate genotype (repeatable).
        #[arg(long = "genotype")]
        genotypes: Vec<String>,
        /// Read candidates from a previous run's output directory.
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// Stage 3: multi-seed final evaluation of one genotype.
    Stage3 {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        genotype: Option<String>,
        #[arg(long)]
        from: Option<PathBuf>,
    },
    /// The full three-stage protocol.
    Pipeline {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Stage 1 + 2 across the labeled settings in `sweep.settings`.
    Sweep {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
    },
    /// Train every architecture of an enumerable space (ground truth).
    Oracle {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long)]
        out: PathBuf,
        /// Refuse spaces with more architectures than this.
        #[arg(long, default_value_t = 500)]
        limit: u64,
    },
    /// Re-run a manifest and verify outputs byte for byte.
    Reproduce { manifest: PathBuf },
    /// Render tables from a results directory.
    Report { dir: PathBuf },
}

#[derive(Subcommand)]
enum SpaceCommands {
    /// Exact architecture count.
    Count {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Every genotype, one per line (small spaces only).
    Enumerate {
        #[command(flatten)]
        cfg: ConfigArgs,
        #[arg(long, default_value_t = 10_000)]
        limit: u64,
    },
    /// One uniformly sampled genotype.
    Sample {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
    /// Check the space invariants.
    Validate {
        #[command(flatten)]
        cfg: ConfigArgs,
    },
}

fn main() {
    let cli = Cli::parse();
    let code = match cli.command {
        Commands::Space { action } => {
            let (space_action, cfg, limit) = match action {
                SpaceCommands::Count { cfg } => (SpaceAction::Count, cfg, 0),
                SpaceCommands::Enumerate { cfg, limit } => (SpaceAction::Enumerate, cfg, limit),
                SpaceCommands::Sample { cfg } => (SpaceAction::Sample, cfg, 0),
                SpaceCommands::Validate { cfg } => (SpaceAction::Validate, cfg, 0),
            };
            cmd_run(&Invocation {
                command: RunCommand::Space { action: space_action, limit },
                config_path: cfg.config,
                sets: cfg.sets,
                out_dir: None,
            })
        }
        Commands::SearchWs { cfg, out } => cmd_run(&Invocation {
            command: RunCommand::SearchWs,
            config_path: cfg.config,
            sets: cfg.sets,
            out_dir: Some(out),
        }),
        Commands::Asha { cfg, out } => cmd_run(&Invocation {
            command: RunCommand::Asha,
            config_path: cfg.config,
            sets: cfg.sets,
            out_dir: Some(out),
        }),
        Commands::Stage2 { cfg, out, genotypes, from } => cmd_run(&Invocation {
            command: RunCommand::Stage2 { genotypes, from },
            config_path: cfg.config,
            sets: cfg.sets,
            out_dir: Some(out),
        }),
        Commands::Stage3 { cfg, out, genotype, from } => cmd_run(&Invocation {
            command: RunCommand::Stage3 { genotype, from },
            config_path: cfg.config,
            sets: cfg.sets,
            out_dir: Some(out),
        }),
        Commands::Pipeline { cfg, out } => cmd_run(&Invocation {
            command: RunCommand::Pipeline,
            config_path: cfg.config,
            sets: cfg.sets,
            out_dir: Some(out),
        }),
        Commands::Sweep { cfg, out } => cmd_run(&Invocation {
            command: RunCommand::Sweep,
            config_path: cfg.config,
            sets: cfg.sets,
            out_dir: Some(out),
        }),
        Commands::Oracle { cfg, out, limit } => cmd_run(&Invocation {
            command: RunCommand::Oracle { limit },
            config_path: cfg.config,
            sets: cfg.sets,
            out_dir: Some(out),
        }),
        Commands::Reproduce { manifest } => cmd_reproduce(&manifest),
        Commands::Report { dir } => cmd_report(&dir),
    };
    std::process::exit(code);
}
