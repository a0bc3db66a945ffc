//! `layerforge train`: fit the dual-layer model on a manifest and write the
//! best-L0 / best-L1 / last checkpoints plus the per-step history log.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use layerforge::nn::{ModelConfig, ModelState};
use layerforge::rng::subseed;
use layerforge::trainer::{train, TrainConfig, TrainError};

use crate::manifest::{load_samples, read_manifest};
use crate::CliError;

const INIT_STAGE: u64 = 0x494e_4954;

#[derive(Args, Clone, Debug)]
pub struct TrainArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    /// Output directory for checkpoints and history.jsonl.
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long, default_value_t = 2000)]
    pub steps: usize,
    #[arg(long, default_value_t = 1e-3)]
    pub lr: f64,
    #[arg(long, default_value_t = 4)]
    pub batch: usize,
    /// Square crop size for training batches; must be a multiple of 8.
    #[arg(long, default_value_t = 64)]
    pub crop: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Fraction of samples reserved for validation.
    #[arg(long, default_value_t = 0.1)]
    pub val_frac: f64,
    #[arg(long, default_value_t = 16)]
    pub base_channels: usize,
    #[arg(long, default_value_t = 100)]
    pub val_every: usize,
}

pub fn run_train(args: &TrainArgs) -> Result<(), CliError> {
    if !(0.0..1.0).contains(&args.val_frac) {
        return Err(CliError::Config(format!(
            "val_frac {} must be in [0, 1)",
            args.val_frac
        )));
    }
    if args.base_channels == 0 {
        return Err(CliError::Config("base_channels must be >= 1".into()));
    }

    let records = read_manifest(&args.manifest).map_err(|e| CliError::Input(e.to_string()))?;
    if records.is_empty() {
        return Err(CliError::Input(format!(
            "manifest {} has no records",
            args.manifest.display()
        )));
    }
    let base_dir = args.manifest.parent().unwrap_or(std::path::Path::new("."));
    let samples = load_samples(&records, base_dir).map_err(|e| CliError::Input(e.to_string()))?;

    // Deterministic split: the tail of the manifest order becomes validation.
    let n = samples.len();
    let (train_set, val_set) = if n == 1 {
        (&samples[..], &samples[..])
    } else {
        let n_val = ((n as f64 * args.val_frac).round() as usize).clamp(1, n - 1);
        (&samples[..n - n_val], &samples[n - n_val..])
    };

    let config = TrainConfig {
        lr: args.lr,
        steps: args.steps,
        batch: args.batch,
        crop: args.crop,
        seed: args.seed,
        val_every: args.val_every,
        ..TrainConfig::default()
    };
    let model = ModelState::init(
        ModelConfig {
            base_channels: args.base_channels,
        },
        subseed(args.seed, INIT_STAGE),
    );

    let result = train(model, train_set, val_set, &config).map_err(|e| match e {
        TrainError::CropTooLarge { .. } | TrainError::TooSmallForModel { .. } => {
            CliError::Geometry(e.to_string())
        }
        TrainError::InvalidConfig(_) => CliError::Config(e.to_string()),
        other => CliError::Input(other.to_string()),
    })?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out.display())))?;
    let save = |state: &ModelState, suffix: &str| {
        state
            .save(&args.out.join(format!("model.{suffix}")))
            .map_err(|e| CliError::Input(e.to_string()))
    };
    save(&result.best_l0.state, "best_l0")?;
    save(&result.best_l1.state, "best_l1")?;
    save(&result.last, "last")?;

    let history_path = args.out.join("history.jsonl");
    let mut file = std::fs::File::create(&history_path)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", history_path.display())))?;
    for record in &result.history {
        let line = serde_json::to_string(record).expect("history records serialize");
        writeln!(file, "{line}")
            .map_err(|e| CliError::Input(format!("cannot write {}: {e}", history_path.display())))?;
    }

    println!(
        "trained {} steps on {} samples ({} validation); best val L0 {:.6}, best val L1 {:.6}",
        args.steps,
        train_set.len(),
        val_set.len(),
        result.best_l0.val_loss,
        result.best_l1.val_loss
    );
    Ok(())
}
