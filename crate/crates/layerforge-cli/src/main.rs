use std::process::ExitCode;

use clap::{Parser, Subcommand};

use layerforge_cli::commands::{
    run_eval, run_infer, run_report, run_synth, run_train, EvalArgs, InferArgs, ReportArgs,
    SynthArgs, TrainArgs,
};

/// Two-layer document pipeline: synthesize datasets, train the separation
/// model, and evaluate or apply checkpoints.
#[derive(Parser)]
#[command(name = "layerforge", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize a two-layer dataset from source pages (or --verify one).
    Synth(SynthArgs),
    /// Train on a manifest; writes best_l0/best_l1/last checkpoints.
    Train(TrainArgs),
    /// Score a checkpoint against a manifest's ground truth.
    Eval(EvalArgs),
    /// Split one image into its predicted layers.
    Infer(InferArgs),
    /// Merge summary JSON files into a markdown score table.
    Report(ReportArgs),
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Synth(args) => run_synth(args),
        Command::Train(args) => run_train(args),
        Command::Eval(args) => run_eval(args),
        Command::Infer(args) => run_infer(args),
        Command::Report(args) => run_report(args),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.exit_code())
        }
    }
}
