//! `layerforge synth`: turn source pages into two-layer training records,
//! or re-verify an existing output directory against its manifest.

use std::path::{Path, PathBuf};

use clap::Args;
use rayon::prelude::*;

use layerforge::assets::{load_asset_dir, procedural_library, AssetLibrary};
use layerforge::compose::{recombine, replay_placements, synth_sample, ComposeError, SynthConfig};
use layerforge::raster::{load_png, save_png, ImageGray};
use layerforge::rng::subseed;

use crate::manifest::{read_manifest, validate_manifest, write_manifest, ManifestRecord};
use crate::{thread_pool, CliError};

const LIBRARY_STAGE: u64 = 0x4c49_4252;
const SAMPLE_STAGE: u64 = 0x534d_504c;

/// Tolerances for replay verification. Stored layers went through 8-bit PNG
/// quantization (alpha through 16-bit), so replayed floats may differ by up
/// to one quantization step plus blend rounding.
const VERIFY_TOL_8BIT: f32 = 2.0 / 255.0;
const VERIFY_TOL_ALPHA: f32 = 1e-3;
const VERIFY_TOL_RECOMBINE: f32 = 1e-5;

#[derive(Args, Clone, Debug)]
pub struct SynthArgs {
    /// Directory of source page PNGs (the clean text layer).
    #[arg(long)]
    pub sources: PathBuf,
    /// Asset directory, or "procedural" for generated assets.
    #[arg(long, default_value = "procedural")]
    pub assets: String,
    /// Output directory for PNGs and manifest.jsonl.
    #[arg(long)]
    pub out: PathBuf,
    /// Optional JSON synthesis config.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Number of samples to synthesize.
    #[arg(long, default_value_t = 16)]
    pub count: usize,
    /// Verify an existing output directory instead of generating.
    #[arg(long, default_value_t = false)]
    pub verify: bool,
}

pub fn run_synth(args: &SynthArgs) -> Result<(), CliError> {
    let cfg = load_config(args.config.as_deref())?;
    let library = build_library(&args.assets, args.seed)?;
    if args.verify {
        return verify_out_dir(&args.out, &library);
    }

    let pages = load_source_pages(&args.sources)?;
    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out.display())))?;

    let records = thread_pool().install(|| {
        (0..args.count)
            .into_par_iter()
            .map(|i| synth_one(i, args, &pages, &library, &cfg))
            .collect::<Result<Vec<ManifestRecord>, CliError>>()
    })?;

    let manifest_path = args.out.join("manifest.jsonl");
    write_manifest(&records, &manifest_path)
        .map_err(|e| CliError::Input(e.to_string()))?;
    println!(
        "synthesized {} samples into {} (manifest: {})",
        records.len(),
        args.out.display(),
        manifest_path.display()
    );
    Ok(())
}

fn load_config(path: Option<&Path>) -> Result<SynthConfig, CliError> {
    let cfg = match path {
        None => SynthConfig::default(),
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", p.display())))?;
            serde_json::from_str(&text)
                .map_err(|e| CliError::Config(format!("bad config {}: {e}", p.display())))?
        }
    };
    cfg.validate().map_err(|e| CliError::Config(e.to_string()))?;
    Ok(cfg)
}

fn build_library(assets: &str, seed: u64) -> Result<AssetLibrary, CliError> {
    if assets == "procedural" {
        Ok(procedural_library(subseed(seed, LIBRARY_STAGE), 3))
    } else {
        load_asset_dir(Path::new(assets)).map_err(|e| CliError::Input(e.to_string()))
    }
}

fn load_source_pages(dir: &Path) -> Result<Vec<layerforge::raster::ImageRgb>, CliError> {
    let mut paths: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| CliError::Input(format!("cannot read sources {}: {e}", dir.display())))?
        .filter_map(|entry| entry.ok().map(|e| e.path()))
        .filter(|p| {
            p.is_file()
                && p.extension()
                    .map(|e| e.eq_ignore_ascii_case("png"))
                    .unwrap_or(false)
        })
        .collect();
    paths.sort();
    if paths.is_empty() {
        return Err(CliError::Input(format!(
            "no source pages (*.png) found in {}",
            dir.display()
        )));
    }
    paths
        .iter()
        .map(|p| load_png(p).map_err(|e| CliError::Input(e.to_string())))
        .collect()
}

fn synth_one(
    index: usize,
    args: &SynthArgs,
    pages: &[layerforge::raster::ImageRgb],
    library: &AssetLibrary,
    cfg: &SynthConfig,
) -> Result<ManifestRecord, CliError> {
    let record_seed = subseed(subseed(args.seed, SAMPLE_STAGE), index as u64);
    let source = &pages[index % pages.len()];
    let sample = synth_sample(source, library, record_seed, cfg).map_err(|e| match e {
        ComposeError::SourceTooSmall { .. } => CliError::Geometry(e.to_string()),
        ComposeError::InvalidConfig(_) => CliError::Config(e.to_string()),
        other => CliError::Input(other.to_string()),
    })?;

    let id = format!("{index:06}");
    let names = [
        format!("{id}_input.png"),
        format!("{id}_layer0.png"),
        format!("{id}_layer1.png"),
        format!("{id}_alpha.png"),
    ];
    let write = |img, name: &str| {
        save_png(img, &args.out.join(name)).map_err(|e| CliError::Input(e.to_string()))
    };
    write(&sample.input, &names[0])?;
    write(&sample.layer0, &names[1])?;
    write(&sample.layer1, &names[2])?;
    sample
        .alpha_map
        .save_png_16bit(&args.out.join(&names[3]))
        .map_err(|e| CliError::Input(e.to_string()))?;

    Ok(ManifestRecord {
        id,
        input: names[0].clone(),
        layer0: names[1].clone(),
        layer1: names[2].clone(),
        alpha_map: names[3].clone(),
        seed: record_seed,
        degrade: sample.degrade,
        placements: sample.placements,
    })
}

/// Re-run each record's placement list and degradation spec against the
/// stored PNGs. Passing means train/eval can consume the directory and the
/// recombination identity holds.
fn verify_out_dir(out: &Path, library: &AssetLibrary) -> Result<(), CliError> {
    let manifest_path = out.join("manifest.jsonl");
    let records = read_manifest(&manifest_path).map_err(|e| CliError::Input(e.to_string()))?;
    if records.is_empty() {
        return Err(CliError::Input(format!(
            "manifest {} has no records",
            manifest_path.display()
        )));
    }
    validate_manifest(&records, out).map_err(|e| CliError::Input(e.to_string()))?;

    thread_pool().install(|| {
        records
            .par_iter()
            .map(|record| verify_record(record, out, library))
            .collect::<Result<Vec<()>, CliError>>()
    })?;
    println!("verified {} records in {}", records.len(), out.display());
    Ok(())
}

fn verify_record(record: &ManifestRecord, out: &Path, library: &AssetLibrary) -> Result<(), CliError> {
    let fail = |what: &str, err: f32| {
        Err(CliError::Input(format!(
            "record {}: {what} mismatch (max abs diff {err})",
            record.id
        )))
    };
    let img = |rel: &String| load_png(&out.join(rel)).map_err(|e| CliError::Input(e.to_string()));
    let stored_input = img(&record.input)?;
    let stored_l0 = img(&record.layer0)?;
    let stored_l1 = img(&record.layer1)?;
    let stored_alpha = ImageGray::load_png(&out.join(&record.alpha_map))
        .map_err(|e| CliError::Input(e.to_string()))?;

    let placed = replay_placements(&stored_l0, library, &record.placements)
        .map_err(|e| CliError::Input(format!("record {}: {e}", record.id)))?;

    let l1_err = placed.layer1.max_abs_diff(&stored_l1);
    if l1_err > VERIFY_TOL_8BIT {
        return fail("layer1 replay", l1_err);
    }
    let alpha_err = placed
        .alpha_map
        .data
        .iter()
        .zip(&stored_alpha.data)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0f32, f32::max);
    if alpha_err > VERIFY_TOL_ALPHA {
        return fail("alpha map replay", alpha_err);
    }

    let rebuilt = recombine(&stored_l0, &placed.layer1, &placed.alpha_map)
        .map_err(|e| CliError::Input(format!("record {}: {e}", record.id)))?;
    let recombine_err = rebuilt.max_abs_diff(&placed.composite);
    if recombine_err > VERIFY_TOL_RECOMBINE {
        return fail("recombination identity", recombine_err);
    }

    let degraded = record.degrade.apply(&placed.composite);
    let input_err = degraded.max_abs_diff(&stored_input);
    if input_err > VERIFY_TOL_8BIT {
        return fail("degraded input replay", input_err);
    }
    Ok(())
}
