use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use cdp_bpc::aggregation::{DecisionRule, Order, PlanParams, PlanSpec, Strategy, SvmConfig};
use cdp_bpc::pipeline::{
    cmd_authenticate, cmd_estimate, cmd_evaluate, cmd_simulate, cmd_train, AuthenticateConfig,
    EvaluateConfig, ExperimentConfig, Preset, ShotMode, SimulateConfig, SplitConfig,
};
use cdp_bpc::{ModelConfig, Result};

#[derive(Parser)]
#[command(name = "cdp", version, about = "Copy detection pattern authentication with per-pattern binary channels")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Write a simulated dataset directory.
    Simulate {
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 1000)]
        templates: usize,
        #[arg(long, default_value_t = 6)]
        shots: u32,
        #[arg(long, default_value_t = 64)]
        width: usize,
        #[arg(long, default_value_t = 64)]
        height: usize,
        /// Codebook preset: default or mixed.
        #[arg(long, default_value = "mixed")]
        preset: Preset,
    },
    /// Estimate both codebooks from the train split.
    Estimate {
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long)]
        codebook_orig: PathBuf,
        #[arg(long)]
        codebook_fake: PathBuf,
    },
    /// Train the linear classifier used by strategy s4.
    Train {
        #[command(flatten)]
        split: SplitArgs,
        /// 1 trains on single captures, anything else on fused captures.
        #[arg(long, default_value_t = 1)]
        shots: u32,
        #[arg(long)]
        out: PathBuf,
    },
    /// Decide whether one or more captures of a print are original.
    Authenticate {
        #[arg(long)]
        template: PathBuf,
        /// Capture files; repeat for multi-shot fusion.
        #[arg(long = "probe", required = true)]
        probes: Vec<PathBuf>,
        /// Gray reference for histogram matching.
        #[arg(long)]
        reference: Option<PathBuf>,
        #[arg(long)]
        codebook_orig: PathBuf,
        #[arg(long)]
        codebook_fake: PathBuf,
        #[command(flatten)]
        plan: PlanArgs,
        #[arg(long)]
        classifier: Option<PathBuf>,
        /// Write the JSON report here as well.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Write fig2.csv, fig3.csv and table1.csv for a dataset.
    Evaluate {
        #[command(flatten)]
        split: SplitArgs,
        #[arg(long)]
        codebook_orig: PathBuf,
        #[arg(long)]
        codebook_fake: PathBuf,
        #[arg(long, default_value = "gamma-crit")]
        rule: DecisionRule,
        #[arg(long, default_value_t = 500)]
        fig2_probes: usize,
        #[arg(long)]
        out: PathBuf,
    },
}

#[derive(Args)]
struct SplitArgs {
    #[arg(long)]
    dataset: PathBuf,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 0.5)]
    train_fraction: f64,
}

impl SplitArgs {
    fn config(self) -> SplitConfig {
        SplitConfig {
            dataset: self.dataset,
            seed: self.seed,
            train_fraction: self.train_fraction,
        }
    }
}

#[derive(Args)]
struct PlanArgs {
    #[arg(long, default_value = "s1")]
    strategy: Strategy,
    #[arg(long, default_value = "ad")]
    ordering: Order,
    #[arg(long, default_value = "gamma-crit")]
    rule: DecisionRule,
    #[arg(long, default_value_t = 1.0)]
    mu: f64,
    #[arg(long, default_value_t = 0.5)]
    nu: f64,
    #[arg(long)]
    k: Option<usize>,
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { out, seed, templates, shots, width, height, preset } => {
            let m = cmd_simulate(&SimulateConfig {
                out: out.clone(),
                seed,
                n_templates: templates,
                shots,
                width,
                height,
                config: ModelConfig::default(),
                preset,
            })?;
            println!("wrote {} templates x {} shots to {}", m.n_templates, m.shots, out.display());
        }
        Command::Estimate { split, codebook_orig, codebook_fake } => {
            let (c0, _) = cmd_estimate(&split.config(), &codebook_orig, &codebook_fake)?;
            let occ: u64 = c0.entries.iter().map(|e| e.occurrences).sum();
            println!("estimated codebooks from {occ} pixel occurrences per class");
        }
        Command::Train { split, shots, out } => {
            let mode = if shots == 1 { ShotMode::Single } else { ShotMode::Multi };
            cmd_train(&split.config(), mode, &SvmConfig::default(), &out)?;
            println!("wrote {}", out.display());
        }
        Command::Authenticate { template, probes, reference, codebook_orig, codebook_fake, plan, classifier, out } => {
            let report = cmd_authenticate(&AuthenticateConfig {
                template,
                probes,
                reference,
                codebook_orig,
                codebook_fake,
                plan: PlanSpec {
                    strategy: plan.strategy,
                    order: plan.ordering,
                    rule: plan.rule,
                    params: PlanParams { mu: plan.mu, nu: plan.nu, k: plan.k },
                },
                classifier,
            })?;
            println!("{report}");
            if let Some(path) = out {
                cdp_bpc::pnm::write_atomic(&path, serde_json::to_string_pretty(&report)?.as_bytes())?;
            }
        }
        Command::Evaluate { split, codebook_orig, codebook_fake, rule, fig2_probes, out } => {
            let res = cmd_evaluate(&EvaluateConfig {
                split: split.config(),
                codebook_orig,
                codebook_fake,
                experiment: ExperimentConfig { rule, ..Default::default() },
                fig2_probes,
                out,
            })?;
            for c in res.cells() {
                println!("{:>2} {} {:<6} k={:<4} p_err={:.4}", c.strategy, c.ordering, c.shot_mode, c.best_k, c.p_err);
            }
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
