//! Optimization loop: Adam over random crops, periodic validation, and
//! independent best-by-layer checkpoint selection.

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::compose::LayerSample;
use crate::metrics::{evaluate_pair, MetricsError, MetricsRecord};
use crate::nn::{
    l1_loss, split_layers, total_loss, ModelGrads, ModelState, NnError, Tensor4, SIZE_MULTIPLE,
};
use crate::raster::ImageRgb;
use crate::rng::{stream, subseed};

const TRAIN_STAGE: u64 = 0x5452_4149;

#[derive(Debug, Error)]
pub enum TrainError {
    #[error("dataset is empty")]
    EmptyDataset,
    #[error("crop {crop} larger than smallest sample dimension {min}")]
    CropTooLarge { crop: usize, min: usize },
    #[error("sample {h}x{w} too small for the {SIZE_MULTIPLE}-divisible model input")]
    TooSmallForModel { h: usize, w: usize },
    #[error("invalid train config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Nn(#[from] NnError),
    #[error(transparent)]
    Metrics(#[from] MetricsError),
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    pub lr: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub eps: f64,
    pub steps: usize,
    pub batch: usize,
    pub crop: usize,
    pub seed: u64,
    pub val_every: usize,
}

impl Default for TrainConfig {
    fn default() -> Self {
        TrainConfig {
            lr: 1e-3,
            beta1: 0.9,
            beta2: 0.999,
            eps: 1e-8,
            steps: 1000,
            batch: 4,
            crop: 64,
            seed: 0,
            val_every: 100,
        }
    }
}

impl TrainConfig {
    fn validate(&self) -> Result<(), TrainError> {
        if self.crop == 0 || self.crop % SIZE_MULTIPLE != 0 {
            return Err(TrainError::InvalidConfig(format!(
                "crop {} must be a positive multiple of {SIZE_MULTIPLE}",
                self.crop
            )));
        }
        if self.batch == 0 {
            return Err(TrainError::InvalidConfig("batch must be >= 1".into()));
        }
        if self.val_every == 0 {
            return Err(TrainError::InvalidConfig("val_every must be >= 1".into()));
        }
        Ok(())
    }
}

/// One training step for the history log; validation numbers appear on the
/// steps where validation ran.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StepRecord {
    pub step: usize,
    pub loss_l0: f64,
    pub loss_l1: f64,
    pub total: f64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_l0: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub val_l1: Option<f64>,
}

#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub state: ModelState,
    pub val_loss: f64,
}

#[derive(Clone, Debug)]
pub struct CheckpointSet {
    pub best_l0: Checkpoint,
    pub best_l1: Checkpoint,
    pub last: ModelState,
    pub history: Vec<StepRecord>,
}

#[derive(Clone, Debug)]
pub struct ValidationReport {
    pub val_l0: f64,
    pub val_l1: f64,
    pub records: Vec<MetricsRecord>,
}

/// Adam moment estimates, shaped like the model parameters.
#[derive(Clone, Debug)]
pub struct AdamState {
    m: ModelGrads,
    v: ModelGrads,
    t: u64,
}

impl AdamState {
    pub fn new(model: &ModelState) -> AdamState {
        AdamState {
            m: ModelGrads::zeros_like(model),
            v: ModelGrads::zeros_like(model),
            t: 0,
        }
    }

    pub fn step_count(&self) -> u64 {
        self.t
    }
}

/// Standard bias-corrected Adam update, in place.
pub fn adam_step(model: &mut ModelState, grads: &ModelGrads, opt: &mut AdamState, cfg: &TrainConfig) {
    opt.t += 1;
    let bc1 = 1.0 - cfg.beta1.powi(opt.t as i32);
    let bc2 = 1.0 - cfg.beta2.powi(opt.t as i32);
    let update = |p: &mut [f64], g: &[f64], m: &mut [f64], v: &mut [f64]| {
        for i in 0..p.len() {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * g[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * g[i] * g[i];
            let m_hat = m[i] / bc1;
            let v_hat = v[i] / bc2;
            p[i] -= cfg.lr * m_hat / (v_hat.sqrt() + cfg.eps);
        }
    };
    for (li, layer) in model.layers.iter_mut().enumerate() {
        update(
            &mut layer.weight,
            &grads.layers[li].weight,
            &mut opt.m.layers[li].weight,
            &mut opt.v.layers[li].weight,
        );
        update(
            &mut layer.bias,
            &grads.layers[li].bias,
            &mut opt.m.layers[li].bias,
            &mut opt.v.layers[li].bias,
        );
    }
}

/// Copy an image window into one batch slot of an NCHW tensor.
fn fill_tensor_slot(t: &mut Tensor4, slot: usize, img: &ImageRgb, y0: usize, x0: usize) {
    let (h, w) = (t.h, t.w);
    for c in 0..3 {
        let plane = t.plane_mut(slot, c);
        for y in 0..h {
            for x in 0..w {
                plane[y * w + x] = img.pixel(y0 + y, x0 + x)[c] as f64;
            }
        }
    }
}

/// Clamp one batch slot of an NCHW tensor back into an image.
pub fn tensor_to_image(t: &Tensor4, slot: usize) -> ImageRgb {
    let mut img = ImageRgb::new(t.h, t.w, 0.0);
    for c in 0..3 {
        let plane = t.plane(slot, c);
        for y in 0..t.h {
            for x in 0..t.w {
                let i = img.idx(y, x);
                img.data[i + c] = (plane[y * t.w + x] as f32).clamp(0.0, 1.0);
            }
        }
    }
    img
}

fn image_to_tensor(img: &ImageRgb) -> Tensor4 {
    let mut t = Tensor4::zeros(1, 3, img.height, img.width);
    fill_tensor_slot(&mut t, 0, img, 0, 0);
    t
}

/// Train with Adam on random crops; every `val_every` steps the validation
/// split is scored and the best-by-layer-0 / best-by-layer-1 checkpoints are
/// updated independently. Deterministic in `(data, config)`.
pub fn train(
    model: ModelState,
    train_set: &[LayerSample],
    val_set: &[LayerSample],
    cfg: &TrainConfig,
) -> Result<CheckpointSet, TrainError> {
    cfg.validate()?;
    if train_set.is_empty() || val_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let min_dim = train_set
        .iter()
        .flat_map(|s| [s.input.height, s.input.width])
        .min()
        .unwrap();
    if cfg.crop > min_dim {
        return Err(TrainError::CropTooLarge {
            crop: cfg.crop,
            min: min_dim,
        });
    }

    let mut model = model;
    let mut opt = AdamState::new(&model);
    let mut rng = stream(subseed(cfg.seed, TRAIN_STAGE));

    let baseline = validate(&model, val_set)?;
    let mut best_l0 = Checkpoint {
        state: model.clone(),
        val_loss: baseline.val_l0,
    };
    let mut best_l1 = Checkpoint {
        state: model.clone(),
        val_loss: baseline.val_l1,
    };

    let mut history = Vec::with_capacity(cfg.steps);
    for step in 1..=cfg.steps {
        let c = cfg.crop;
        let mut input = Tensor4::zeros(cfg.batch, 3, c, c);
        let mut gt_l0 = Tensor4::zeros(cfg.batch, 3, c, c);
        let mut gt_l1 = Tensor4::zeros(cfg.batch, 3, c, c);
        for slot in 0..cfg.batch {
            let sample = &train_set[rng.gen_range(0..train_set.len())];
            let y0 = rng.gen_range(0..=sample.input.height - c);
            let x0 = rng.gen_range(0..=sample.input.width - c);
            fill_tensor_slot(&mut input, slot, &sample.input, y0, x0);
            fill_tensor_slot(&mut gt_l0, slot, &sample.layer0, y0, x0);
            fill_tensor_slot(&mut gt_l1, slot, &sample.layer1, y0, x0);
        }

        let (out, cache) = model.forward_with_cache(&input)?;
        let (breakdown, grad_out) = total_loss(&out, &gt_l0, &gt_l1)?;
        let grads = model.backward(&cache, &grad_out)?;
        adam_step(&mut model, &grads, &mut opt, cfg);

        let mut record = StepRecord {
            step,
            loss_l0: breakdown.loss_l0,
            loss_l1: breakdown.loss_l1,
            total: breakdown.total,
            val_l0: None,
            val_l1: None,
        };
        if step % cfg.val_every == 0 || step == cfg.steps {
            let report = validate(&model, val_set)?;
            if report.val_l0 < best_l0.val_loss {
                best_l0 = Checkpoint {
                    state: model.clone(),
                    val_loss: report.val_l0,
                };
            }
            if report.val_l1 < best_l1.val_loss {
                best_l1 = Checkpoint {
                    state: model.clone(),
                    val_loss: report.val_l1,
                };
            }
            record.val_l0 = Some(report.val_l0);
            record.val_l1 = Some(report.val_l1);
        }
        history.push(record);
    }

    Ok(CheckpointSet {
        best_l0,
        best_l1,
        last: model,
        history,
    })
}

/// Mean per-layer L1 losses over full validation images (center-cropped to
/// the model's size multiple when needed) plus metric records on the clamped
/// predictions. Never mutates the model.
pub fn validate(model: &ModelState, val_set: &[LayerSample]) -> Result<ValidationReport, TrainError> {
    if val_set.is_empty() {
        return Err(TrainError::EmptyDataset);
    }
    let mut sum_l0 = 0.0;
    let mut sum_l1 = 0.0;
    let mut records = Vec::with_capacity(val_set.len() * 3);
    for sample in val_set {
        let (h, w) = (sample.input.height, sample.input.width);
        let (ch, cw) = (h - h % SIZE_MULTIPLE, w - w % SIZE_MULTIPLE);
        if ch == 0 || cw == 0 {
            return Err(TrainError::TooSmallForModel { h, w });
        }
        let (y0, x0) = ((h - ch) / 2, (w - cw) / 2);
        let input = sample.input.crop(y0, x0, ch, cw);
        let gt0_img = sample.layer0.crop(y0, x0, ch, cw);
        let gt1_img = sample.layer1.crop(y0, x0, ch, cw);

        let out = model.forward(&image_to_tensor(&input))?;
        let (pred_l0, pred_l1) = split_layers(&out)?;
        let gt0 = image_to_tensor(&gt0_img);
        let gt1 = image_to_tensor(&gt1_img);
        sum_l0 += l1_loss(&pred_l0, &gt0)?.0;
        sum_l1 += l1_loss(&pred_l1, &gt1)?.0;

        let pred0_img = tensor_to_image(&pred_l0, 0);
        let pred1_img = tensor_to_image(&pred_l1, 0);
        records.extend(evaluate_pair((&pred0_img, &pred1_img), (&gt0_img, &gt1_img))?);
    }
    let n = val_set.len() as f64;
    Ok(ValidationReport {
        val_l0: sum_l0 / n,
        val_l1: sum_l1 / n,
        records,
    })
}

/// Run the model on an arbitrary image: reflect-pad to the next multiple of
/// 8, forward, split, clamp, and crop back to the input size.
pub fn infer(model: &ModelState, img: &ImageRgb) -> Result<(ImageRgb, ImageRgb), TrainError> {
    let (h, w) = (img.height, img.width);
    let ph = (SIZE_MULTIPLE - h % SIZE_MULTIPLE) % SIZE_MULTIPLE;
    let pw = (SIZE_MULTIPLE - w % SIZE_MULTIPLE) % SIZE_MULTIPLE;
    let padded = if ph == 0 && pw == 0 {
        img.clone()
    } else {
        img.pad_reflect(0, ph, 0, pw)
    };
    let out = model.forward(&image_to_tensor(&padded))?;
    let (l0, l1) = split_layers(&out)?;
    let mut img0 = tensor_to_image(&l0, 0);
    let mut img1 = tensor_to_image(&l1, 0);
    if ph != 0 || pw != 0 {
        img0 = img0.crop(0, 0, h, w);
        img1 = img1.crop(0, 0, h, w);
    }
    Ok((img0, img1))
}
