//! `layerforge infer`: split one image into its two predicted layers.

use std::path::PathBuf;

use clap::Args;

use layerforge::nn::ModelState;
use layerforge::raster::{load_png, save_png};
use layerforge::trainer::infer;

use crate::CliError;

#[derive(Args, Clone, Debug)]
pub struct InferArgs {
    #[arg(long)]
    pub image: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Outputs are written to `<prefix>_layer0.png` and `<prefix>_layer1.png`.
    #[arg(long)]
    pub out_prefix: String,
}

pub fn run_infer(args: &InferArgs) -> Result<(), CliError> {
    let img = load_png(&args.image).map_err(|e| CliError::Input(e.to_string()))?;
    let model = ModelState::load(&args.checkpoint).map_err(|e| CliError::Checkpoint(e.to_string()))?;
    let (l0, l1) = infer(&model, &img).map_err(|e| CliError::Input(e.to_string()))?;

    let p0 = PathBuf::from(format!("{}_layer0.png", args.out_prefix));
    let p1 = PathBuf::from(format!("{}_layer1.png", args.out_prefix));
    save_png(&l0, &p0).map_err(|e| CliError::Input(e.to_string()))?;
    save_png(&l1, &p1).map_err(|e| CliError::Input(e.to_string()))?;
    println!("wrote {} and {}", p0.display(), p1.display());
    Ok(())
}
