//! JSONL dataset manifest: one record per synthesized sample, with relative
//! paths to its four images and everything needed to replay the synthesis
//! (seed, placement list, degradation spec).

use std::collections::HashSet;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use layerforge::compose::{LayerSample, PlacementSpec};
use layerforge::degrade::DegradeSpec;
use layerforge::raster::{load_png, ImageGray};

#[derive(Debug, Error)]
pub enum ManifestError {
    #[error("cannot read manifest {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path} line {line}: {source}")]
    Parse {
        path: String,
        line: usize,
        #[source]
        source: serde_json::Error,
    },
    #[error("duplicate record id `{0}`")]
    DuplicateId(String),
    #[error("record `{id}` references missing file {path}")]
    MissingFile { id: String, path: String },
    #[error("record `{id}`: {source}")]
    BadImage {
        id: String,
        #[source]
        source: layerforge::raster::RasterError,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ManifestRecord {
    pub id: String,
    pub input: String,
    pub layer0: String,
    pub layer1: String,
    pub alpha_map: String,
    pub seed: u64,
    pub degrade: DegradeSpec,
    pub placements: Vec<PlacementSpec>,
}

impl ManifestRecord {
    pub fn relative_paths(&self) -> [&str; 4] {
        [&self.input, &self.layer0, &self.layer1, &self.alpha_map]
    }
}

pub fn write_manifest(records: &[ManifestRecord], path: &Path) -> Result<(), ManifestError> {
    let io_err = |source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut file = std::fs::File::create(path).map_err(io_err)?;
    for record in records {
        let line = serde_json::to_string(record).expect("manifest records serialize");
        file.write_all(line.as_bytes()).map_err(io_err)?;
        file.write_all(b"\n").map_err(io_err)?;
    }
    Ok(())
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestRecord>, ManifestError> {
    let file = std::fs::File::open(path).map_err(|source| ManifestError::Io {
        path: path.display().to_string(),
        source,
    })?;
    let reader = BufReader::new(file);
    let mut records = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line.map_err(|source| ManifestError::Io {
            path: path.display().to_string(),
            source,
        })?;
        if line.trim().is_empty() {
            continue;
        }
        let record = serde_json::from_str(&line).map_err(|source| ManifestError::Parse {
            path: path.display().to_string(),
            line: i + 1,
            source,
        })?;
        records.push(record);
    }
    Ok(records)
}

/// Ids are unique and every referenced file exists under `base_dir`.
pub fn validate_manifest(records: &[ManifestRecord], base_dir: &Path) -> Result<(), ManifestError> {
    let mut seen = HashSet::new();
    for record in records {
        if !seen.insert(record.id.as_str()) {
            return Err(ManifestError::DuplicateId(record.id.clone()));
        }
    }
    for record in records {
        for rel in record.relative_paths() {
            let path = base_dir.join(rel);
            if !path.is_file() {
                return Err(ManifestError::MissingFile {
                    id: record.id.clone(),
                    path: path.display().to_string(),
                });
            }
        }
    }
    Ok(())
}

/// Load the images behind each record back into in-memory samples.
pub fn load_samples(
    records: &[ManifestRecord],
    base_dir: &Path,
) -> Result<Vec<LayerSample>, ManifestError> {
    validate_manifest(records, base_dir)?;
    records
        .iter()
        .map(|record| {
            let img = |rel: &str| {
                load_png(&base_dir.join(rel)).map_err(|source| ManifestError::BadImage {
                    id: record.id.clone(),
                    source,
                })
            };
            let alpha_map = ImageGray::load_png(&base_dir.join(&record.alpha_map)).map_err(
                |source| ManifestError::BadImage {
                    id: record.id.clone(),
                    source,
                },
            )?;
            Ok(LayerSample {
                input: img(&record.input)?,
                layer0: img(&record.layer0)?,
                layer1: img(&record.layer1)?,
                alpha_map,
                placements: record.placements.clone(),
                seed: record.seed,
                degrade: record.degrade.clone(),
            })
        })
        .collect()
}
