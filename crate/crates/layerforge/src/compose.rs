//! Sample assembly: place overlay sprites onto a clean base page, producing
//! the composite, the overlays-over-white ground truth, and the accumulated
//! coverage map — plus the exact recombination operator.
//!
//! Both canvases receive the *same* sprite stream with the same per-pixel
//! alphas, which is what makes recombination an algebraic identity instead of
//! an approximation.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::assets::{AssetCategory, AssetLibrary};
use crate::degrade::DegradeSpec;
use crate::raster::{
    accumulate_coverage, composite_into, rotate_sprite, ImageGray, ImageRgb, RasterError,
};
use crate::rng::{stream, subseed};

const PLACEMENT_STAGE: u64 = 0x504c_4143;
const DEGRADE_STAGE: u64 = 0x4445_4752;

#[derive(Debug, Error)]
pub enum ComposeError {
    #[error("invalid config: {0}")]
    InvalidConfig(String),
    #[error("no assets available for requested category `{0}`")]
    EmptyCategory(AssetCategory),
    #[error("source page {sh}x{sw} smaller than output size {oh}x{ow}")]
    SourceTooSmall {
        sh: usize,
        sw: usize,
        oh: usize,
        ow: usize,
    },
    #[error(transparent)]
    Raster(#[from] RasterError),
}

/// Knobs for one synthesis run. Serialized as the user-facing JSON config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    /// Inclusive range for the number of overlays per sample, within [0, 12].
    pub count_range: [u32; 2],
    /// Rotation range in degrees, within [-45, 45].
    pub angle_range: [f32; 2],
    /// Global alpha range per placement, within [0.5, 1.0].
    pub alpha_range: [f32; 2],
    /// Relative draw weight per category; zero excludes a category.
    pub category_weights: BTreeMap<AssetCategory, f32>,
    pub shadow: bool,
    pub color_shift: bool,
    /// Optional [height, width] the source page is center-cropped to.
    pub output_size: Option<[usize; 2]>,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            count_range: [1, 6],
            angle_range: [-45.0, 45.0],
            alpha_range: [0.5, 1.0],
            category_weights: AssetCategory::ALL.into_iter().map(|c| (c, 1.0)).collect(),
            shadow: true,
            color_shift: true,
            output_size: None,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<(), ComposeError> {
        let bad = |msg: String| Err(ComposeError::InvalidConfig(msg));
        if self.count_range[0] > self.count_range[1] || self.count_range[1] > 12 {
            return bad(format!("count_range {:?} not within [0, 12]", self.count_range));
        }
        if self.angle_range[0] > self.angle_range[1]
            || self.angle_range[0] < -45.0
            || self.angle_range[1] > 45.0
        {
            return bad(format!("angle_range {:?} not within [-45, 45]", self.angle_range));
        }
        if self.alpha_range[0] > self.alpha_range[1]
            || self.alpha_range[0] < 0.5
            || self.alpha_range[1] > 1.0
        {
            return bad(format!("alpha_range {:?} not within [0.5, 1.0]", self.alpha_range));
        }
        if self.category_weights.values().any(|&w| w < 0.0 || !w.is_finite()) {
            return bad("category weights must be finite and >= 0".into());
        }
        if self.count_range[1] > 0 && !self.category_weights.values().any(|&w| w > 0.0) {
            return bad("at least one category weight must be positive".into());
        }
        if let Some([h, w]) = self.output_size {
            if h < 32 || w < 32 {
                return bad(format!("output_size {h}x{w} below 32x32 minimum"));
            }
        }
        Ok(())
    }

    fn requested_categories(&self) -> impl Iterator<Item = AssetCategory> + '_ {
        self.category_weights
            .iter()
            .filter(|(_, &w)| w > 0.0)
            .map(|(&c, _)| c)
    }
}

/// One overlay placement, sufficient to replay the composite exactly:
/// rotate library asset `asset_index` by `theta`, then alpha-composite at
/// top-left anchor `(x, y)` with `global_alpha`, in `order`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PlacementSpec {
    pub asset_index: usize,
    pub theta: f32,
    pub x: i64,
    pub y: i64,
    pub global_alpha: f32,
    pub order: u32,
}

/// Output of the placement stage, before degradation.
#[derive(Clone, Debug)]
pub struct PlacedSample {
    pub composite: ImageRgb,
    pub layer1: ImageRgb,
    pub alpha_map: ImageGray,
    pub placements: Vec<PlacementSpec>,
}

/// One dataset record: degraded input plus clean ground truths.
#[derive(Clone, Debug, PartialEq)]
pub struct LayerSample {
    pub input: ImageRgb,
    pub layer0: ImageRgb,
    pub layer1: ImageRgb,
    pub alpha_map: ImageGray,
    pub placements: Vec<PlacementSpec>,
    pub seed: u64,
    pub degrade: DegradeSpec,
}

/// Draw `k` placements and composite them onto `layer0` (the composite) and
/// onto a white canvas (the layer-1 ground truth), accumulating per-pixel
/// coverage along the way. Deterministic in `seed`.
pub fn place_overlays(
    layer0: &ImageRgb,
    library: &AssetLibrary,
    seed: u64,
    cfg: &SynthConfig,
) -> Result<PlacedSample, ComposeError> {
    cfg.validate()?;
    let weights: Vec<(AssetCategory, f32)> = cfg
        .requested_categories()
        .map(|c| (c, cfg.category_weights[&c]))
        .collect();
    if cfg.count_range[1] > 0 {
        for (cat, _) in &weights {
            if library.category_count(*cat) == 0 {
                return Err(ComposeError::EmptyCategory(*cat));
            }
        }
    }

    let mut rng = stream(subseed(seed, PLACEMENT_STAGE));
    let (h, w) = (layer0.height, layer0.width);
    let mut composite = layer0.clone();
    let mut layer1 = ImageRgb::white(h, w);
    let mut alpha_map = ImageGray::new(h, w, 0.0);
    let mut placements = Vec::new();

    let k = rng.gen_range(cfg.count_range[0]..=cfg.count_range[1]);
    for order in 0..k {
        let cat = weighted_pick(&mut rng, &weights);
        let indices = library.category_indices(cat);
        let asset_index = indices[rng.gen_range(0..indices.len())];
        let theta = sample_range(&mut rng, cfg.angle_range);
        let global_alpha = sample_range(&mut rng, cfg.alpha_range);
        let sprite = rotate_sprite(&library.get(asset_index).unwrap().sprite, theta);
        // Sample the sprite center on the page; partial overhang is fine.
        let cx = rng.gen_range(0..w) as i64;
        let cy = rng.gen_range(0..h) as i64;
        let x = cx - sprite.width as i64 / 2;
        let y = cy - sprite.height as i64 / 2;

        composite_into(&mut composite, &sprite, x, y, global_alpha);
        composite_into(&mut layer1, &sprite, x, y, global_alpha);
        accumulate_coverage(&mut alpha_map, &sprite, x, y, global_alpha);
        placements.push(PlacementSpec {
            asset_index,
            theta,
            x,
            y,
            global_alpha,
            order,
        });
    }

    Ok(PlacedSample {
        composite,
        layer1,
        alpha_map,
        placements,
    })
}

/// Replay a recorded placement list onto a base page. Used by manifest
/// verification; produces exactly what [`place_overlays`] produced.
pub fn replay_placements(
    layer0: &ImageRgb,
    library: &AssetLibrary,
    placements: &[PlacementSpec],
) -> Result<PlacedSample, ComposeError> {
    let (h, w) = (layer0.height, layer0.width);
    let mut composite = layer0.clone();
    let mut layer1 = ImageRgb::white(h, w);
    let mut alpha_map = ImageGray::new(h, w, 0.0);
    for p in placements {
        let asset = library
            .get(p.asset_index)
            .ok_or_else(|| ComposeError::InvalidConfig(format!("asset index {} out of range", p.asset_index)))?;
        let sprite = rotate_sprite(&asset.sprite, p.theta);
        composite_into(&mut composite, &sprite, p.x, p.y, p.global_alpha);
        composite_into(&mut layer1, &sprite, p.x, p.y, p.global_alpha);
        accumulate_coverage(&mut alpha_map, &sprite, p.x, p.y, p.global_alpha);
    }
    Ok(PlacedSample {
        composite,
        layer1,
        alpha_map,
        placements: placements.to_vec(),
    })
}

fn sample_range(rng: &mut rand_chacha::ChaCha8Rng, range: [f32; 2]) -> f32 {
    if range[0] == range[1] {
        range[0]
    } else {
        rng.gen_range(range[0]..=range[1])
    }
}

fn weighted_pick(rng: &mut rand_chacha::ChaCha8Rng, weights: &[(AssetCategory, f32)]) -> AssetCategory {
    let total: f64 = weights.iter().map(|(_, w)| *w as f64).sum();
    let mut u = rng.gen::<f64>() * total;
    for (cat, w) in weights {
        u -= *w as f64;
        if u <= 0.0 {
            return *cat;
        }
    }
    weights.last().expect("weights nonempty").0
}

/// Reconstruct the pre-degradation composite from the two ground-truth layers
/// and the coverage map: `out = layer1 + (1 - A) * (layer0 - white)`.
pub fn recombine(
    layer0: &ImageRgb,
    layer1: &ImageRgb,
    alpha_map: &ImageGray,
) -> Result<ImageRgb, ComposeError> {
    layer0.same_dims(layer1)?;
    if layer0.height != alpha_map.height || layer0.width != alpha_map.width {
        return Err(RasterError::DimensionMismatch {
            ah: layer0.height,
            aw: layer0.width,
            bh: alpha_map.height,
            bw: alpha_map.width,
        }
        .into());
    }
    let mut out = ImageRgb::new(layer0.height, layer0.width, 0.0);
    for (i, &a) in alpha_map.data.iter().enumerate() {
        let keep = 1.0 - a;
        for c in 0..3 {
            let v = layer1.data[i * 3 + c] + keep * (layer0.data[i * 3 + c] - 1.0);
            out.data[i * 3 + c] = v.clamp(0.0, 1.0);
        }
    }
    Ok(out)
}

/// Full sample synthesis: optional center-crop of the source page, overlay
/// placement, then degradation of the composite only. Ground-truth layers
/// stay clean.
pub fn synth_sample(
    source: &ImageRgb,
    library: &AssetLibrary,
    seed: u64,
    cfg: &SynthConfig,
) -> Result<LayerSample, ComposeError> {
    cfg.validate()?;
    let layer0 = match cfg.output_size {
        Some([oh, ow]) => {
            if source.height < oh || source.width < ow {
                return Err(ComposeError::SourceTooSmall {
                    sh: source.height,
                    sw: source.width,
                    oh,
                    ow,
                });
            }
            source.crop((source.height - oh) / 2, (source.width - ow) / 2, oh, ow)
        }
        None => source.clone(),
    };
    let placed = place_overlays(&layer0, library, seed, cfg)?;
    let degrade_spec = DegradeSpec::sample(subseed(seed, DEGRADE_STAGE), cfg.shadow, cfg.color_shift);
    let input = degrade_spec.apply(&placed.composite);
    Ok(LayerSample {
        input,
        layer0,
        layer1: placed.layer1,
        alpha_map: placed.alpha_map,
        placements: placed.placements,
        seed,
        degrade: degrade_spec,
    })
}
