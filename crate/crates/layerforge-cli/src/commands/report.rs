//! `layerforge report`: merge method summaries into one markdown score table
//! with best/second-best styling.

use std::path::PathBuf;

use clap::Args;

use layerforge::metrics::{render_markdown_table, ReportRow};

use crate::CliError;

#[derive(Args, Clone, Debug)]
pub struct ReportArgs {
    /// Summary JSON files, one table row each.
    #[arg(long, num_args = 1.., required = true)]
    pub inputs: Vec<PathBuf>,
    #[arg(long)]
    pub out: PathBuf,
}

pub fn run_report(args: &ReportArgs) -> Result<(), CliError> {
    let mut rows = Vec::with_capacity(args.inputs.len());
    for path in &args.inputs {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Input(format!("cannot read {}: {e}", path.display())))?;
        let row: ReportRow = serde_json::from_str(&text)
            .map_err(|e| CliError::Config(format!("malformed summary {}: {e}", path.display())))?;
        rows.push(row);
    }
    let table = render_markdown_table(&rows);
    std::fs::write(&args.out, &table)
        .map_err(|e| CliError::Input(format!("cannot write {}: {e}", args.out.display())))?;
    print!("{table}");
    Ok(())
}
