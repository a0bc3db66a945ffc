//! `layerforge eval`: score a checkpoint against a manifest's ground truth,
//! emitting per-sample records, per-grouping summaries, and a markdown table.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use layerforge::metrics::{aggregate, render_markdown_table, LayerKind, MetricsRecord};
use layerforge::nn::ModelState;
use layerforge::trainer::infer;

use crate::manifest::{load_samples, read_manifest};
use crate::{thread_pool, CliError};

#[derive(Args, Clone, Debug)]
pub struct EvalArgs {
    #[arg(long)]
    pub manifest: PathBuf,
    #[arg(long)]
    pub checkpoint: PathBuf,
    /// Output directory for metrics.jsonl, summary_*.json, and report.md.
    #[arg(long)]
    pub out: PathBuf,
    /// Method label for report rows; defaults to the checkpoint file name.
    #[arg(long)]
    pub method: Option<String>,
}

/// One line of metrics.jsonl: every grouping's scores for one sample.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SampleMetrics {
    pub id: String,
    pub records: Vec<MetricsRecord>,
}

pub fn run_eval(args: &EvalArgs) -> Result<(), CliError> {
    let records = read_manifest(&args.manifest).map_err(|e| CliError::Input(e.to_string()))?;
    if records.is_empty() {
        return Err(CliError::Input(format!(
            "manifest {} has no records",
            args.manifest.display()
        )));
    }
    let base_dir = args.manifest.parent().unwrap_or(std::path::Path::new("."));
    let samples = load_samples(&records, base_dir).map_err(|e| CliError::Input(e.to_string()))?;

    let model = ModelState::load(&args.checkpoint).map_err(|e| CliError::Checkpoint(e.to_string()))?;
    let method = args.method.clone().unwrap_or_else(|| {
        args.checkpoint
            .file_name()
            .map(|n| n.to_string_lossy().into_owned())
            .unwrap_or_else(|| "model".to_string())
    });

    let per_sample: Vec<SampleMetrics> = thread_pool().install(|| {
        records
            .par_iter()
            .zip(samples.par_iter())
            .map(|(record, sample)| {
                let (pred_l0, pred_l1) =
                    infer(&model, &sample.input).map_err(|e| CliError::Input(e.to_string()))?;
                let recs = layerforge::metrics::evaluate_pair(
                    (&pred_l0, &pred_l1),
                    (&sample.layer0, &sample.layer1),
                )
                .map_err(|e| CliError::Input(e.to_string()))?;
                Ok(SampleMetrics {
                    id: record.id.clone(),
                    records: recs,
                })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;

    std::fs::create_dir_all(&args.out)
        .map_err(|e| CliError::Input(format!("cannot create {}: {e}", args.out.display())))?;
    let metrics_path = args.out.join("metrics.jsonl");
    let mut file = std::fs::File::create(&metrics_path)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", metrics_path.display())))?;
    for line in &per_sample {
        writeln!(file, "{}", serde_json::to_string(line).expect("records serialize"))
            .map_err(|e| CliError::Input(e.to_string()))?;
    }

    // One aggregate row per grouping; each also lands in its own summary file
    // so `report` can compare methods.
    let mut rows = Vec::new();
    for (kind, suffix) in [
        (LayerKind::L0, "l0"),
        (LayerKind::L1, "l1"),
        (LayerKind::Combined, "combined"),
    ] {
        let group: Vec<MetricsRecord> = per_sample
            .iter()
            .flat_map(|s| s.records.iter().filter(|r| r.layer == kind).cloned())
            .collect();
        let row = aggregate(&format!("{method} ({})", kind.label()), &group)
            .map_err(|e| CliError::Input(e.to_string()))?;
        let summary_path = args.out.join(format!("summary_{suffix}.json"));
        std::fs::write(
            &summary_path,
            serde_json::to_string_pretty(&row).expect("row serializes"),
        )
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", summary_path.display())))?;
        rows.push(row);
    }

    let table = render_markdown_table(&rows);
    let report_path = args.out.join("report.md");
    std::fs::write(&report_path, &table)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", report_path.display())))?;
    print!("{table}");
    println!(
        "evaluated {} samples; wrote {} and {}",
        per_sample.len(),
        metrics_path.display(),
        report_path.display()
    );
    Ok(())
}
