//! Small convolutional encoder-decoder with a 6-channel dual-layer head.
//!
//! The encoder halves the spatial resolution three times (so the bottleneck
//! sits at H/8 x W/8 with 8x the base channel count), the decoder mirrors it
//! with nearest-neighbor upsamples and additive skip connections, and a final
//! 3x3 convolution emits six channels: the first three are the predicted text
//! layer, the last three the predicted overlay layer. No output activation.
//!
//! All math runs in f64 so analytic gradients can be checked tightly against
//! central finite differences; checkpoints store f32 payloads.

mod ops;
mod tensor;

use std::io::Write;
use std::path::Path;

use rand::Rng;
use thiserror::Error;

pub use ops::{
    concat_channels, conv2d_backward, conv2d_forward, l1_loss, leaky_relu, leaky_relu_backward,
    split_layers, total_loss, upsample_nearest2, upsample_nearest2_backward, Conv2d, ConvGrads,
    LossBreakdown, LEAKY_SLOPE,
};
pub use tensor::Tensor4;

use crate::rng::stream;

pub const INPUT_CHANNELS: usize = 3;
pub const OUTPUT_CHANNELS: usize = 6;
pub const DOWNSAMPLE_STAGES: usize = 3;
/// Spatial divisibility the three stride-2 stages require.
pub const SIZE_MULTIPLE: usize = 1 << DOWNSAMPLE_STAGES;

const CHECKPOINT_MAGIC: &[u8; 4] = b"LYRD";
const CHECKPOINT_VERSION: u32 = 1;

pub const LAYER_NAMES: [&str; 9] = [
    "stem",
    "enc1",
    "enc2",
    "enc3",
    "bottleneck",
    "dec3",
    "dec2",
    "dec1",
    "head",
];

#[derive(Debug, Error)]
pub enum NnError {
    #[error("shape mismatch: {0}")]
    Shape(String),
    #[error("bad checkpoint {path}: {reason}")]
    BadCheckpoint { path: String, reason: String },
    #[error("cannot access checkpoint {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct ModelConfig {
    pub base_channels: usize,
}

impl Default for ModelConfig {
    fn default() -> Self {
        ModelConfig { base_channels: 16 }
    }
}

impl ModelConfig {
    /// `(in_ch, out_ch, stride)` for each layer, in [`LAYER_NAMES`] order.
    fn layer_shapes(&self) -> [(usize, usize, usize); 9] {
        let b = self.base_channels;
        [
            (INPUT_CHANNELS, b, 1),  // stem
            (b, 2 * b, 2),           // enc1
            (2 * b, 4 * b, 2),       // enc2
            (4 * b, 8 * b, 2),       // enc3
            (8 * b, 8 * b, 1),       // bottleneck
            (8 * b, 4 * b, 1),       // dec3 (after 2x upsample)
            (4 * b, 2 * b, 1),       // dec2
            (2 * b, b, 1),           // dec1
            (b, OUTPUT_CHANNELS, 1), // head
        ]
    }
}

/// All learnable parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ModelState {
    pub config: ModelConfig,
    pub layers: Vec<Conv2d>,
}

/// Parameter gradients, aligned with [`ModelState::layers`].
#[derive(Clone, Debug)]
pub struct ModelGrads {
    pub layers: Vec<ConvGrads>,
}

impl ModelGrads {
    pub fn zeros_like(model: &ModelState) -> ModelGrads {
        ModelGrads {
            layers: model
                .layers
                .iter()
                .map(|l| ConvGrads {
                    weight: vec![0.0; l.weight.len()],
                    bias: vec![0.0; l.bias.len()],
                })
                .collect(),
        }
    }

    /// Concatenation of all gradient entries, layer order then weights/bias.
    pub fn flatten(&self) -> Vec<f64> {
        let mut out = Vec::new();
        for l in &self.layers {
            out.extend_from_slice(&l.weight);
            out.extend_from_slice(&l.bias);
        }
        out
    }
}

/// Intermediate activations kept for the backward pass.
pub struct ForwardCache {
    input: Tensor4,
    pre: Vec<Tensor4>,  // conv outputs before activation, per layer
    post: Vec<Tensor4>, // block outputs (activation, plus skip for decoder)
    ups: Vec<Tensor4>,  // upsampled inputs to dec3/dec2/dec1
    out: Tensor4,
}

impl ForwardCache {
    /// Channel and spatial dims of the encoder bottleneck (output of enc3).
    pub fn bottleneck_dims(&self) -> (usize, usize, usize) {
        let t = &self.post[3];
        (t.c, t.h, t.w)
    }

    /// Pre-activation conv outputs per layer (the head output is last).
    pub fn pre_activations(&self) -> &[Tensor4] {
        &self.pre
    }
}

impl ModelState {
    /// Fan-in uniform init, `w ~ U(-sqrt(1/(in_ch * 9)), +sqrt(1/(in_ch * 9)))`,
    /// zero bias; deterministic in `seed`.
    pub fn init(config: ModelConfig, seed: u64) -> ModelState {
        let mut rng = stream(seed);
        let layers = config
            .layer_shapes()
            .into_iter()
            .map(|(in_ch, out_ch, stride)| {
                let mut conv = Conv2d::zeros(in_ch, out_ch, stride);
                let bound = (1.0 / (in_ch as f64 * 9.0)).sqrt();
                for w in conv.weight.iter_mut() {
                    *w = rng.gen_range(-bound..=bound);
                }
                conv
            })
            .collect();
        ModelState { config, layers }
    }

    pub fn num_params(&self) -> usize {
        self.layers.iter().map(|l| l.weight.len() + l.bias.len()).sum()
    }

    fn check_input(&self, x: &Tensor4) -> Result<(), NnError> {
        if x.c != INPUT_CHANNELS {
            return Err(NnError::Shape(format!(
                "expected {INPUT_CHANNELS} input channels, got {}",
                x.c
            )));
        }
        if x.h % SIZE_MULTIPLE != 0 || x.w % SIZE_MULTIPLE != 0 {
            return Err(NnError::Shape(format!(
                "input {}x{} not divisible by {SIZE_MULTIPLE}",
                x.h, x.w
            )));
        }
        Ok(())
    }

    pub fn forward(&self, x: &Tensor4) -> Result<Tensor4, NnError> {
        Ok(self.forward_with_cache(x)?.0)
    }

    pub fn forward_with_cache(&self, x: &Tensor4) -> Result<(Tensor4, ForwardCache), NnError> {
        self.check_input(x)?;
        let mut pre = Vec::with_capacity(9);
        let mut post = Vec::with_capacity(9);
        let mut ups = Vec::with_capacity(3);

        // Encoder: stem, enc1..enc3, bottleneck refinement.
        let mut cur = x.clone();
        for i in 0..5 {
            let p = conv2d_forward(&cur, &self.layers[i])?;
            cur = leaky_relu(&p);
            pre.push(p);
            post.push(cur.clone());
        }

        // Decoder: upsample, conv, activation, additive skip from the encoder
        // stage at the same resolution (enc2, enc1, stem respectively).
        for (i, skip) in [(5usize, 2usize), (6, 1), (7, 0)] {
            let up = upsample_nearest2(&cur);
            let p = conv2d_forward(&up, &self.layers[i])?;
            cur = leaky_relu(&p).add(&post[skip]);
            ups.push(up);
            pre.push(p);
            post.push(cur.clone());
        }

        // Head: plain convolution, no activation, unclamped values.
        let out = conv2d_forward(&cur, &self.layers[8])?;
        pre.push(out.clone());
        post.push(out.clone());

        let cache = ForwardCache {
            input: x.clone(),
            pre,
            post,
            ups,
            out: out.clone(),
        };
        Ok((out, cache))
    }

    /// Parameter gradients for the forward pass recorded in `cache`, given
    /// the gradient of the loss with respect to the 6-channel output.
    pub fn backward(&self, cache: &ForwardCache, grad_out: &Tensor4) -> Result<ModelGrads, NnError> {
        if grad_out.dims() != cache.out.dims() {
            return Err(NnError::Shape(format!(
                "grad_out dims {:?} do not match output {:?}",
                grad_out.dims(),
                cache.out.dims()
            )));
        }
        let mut grads = ModelGrads::zeros_like(self);

        // Head.
        let (mut g_cur, g) = conv2d_backward(&cache.post[7], &self.layers[8], grad_out)?;
        grads.layers[8] = g;

        // Decoder blocks in reverse; the skip addition routes the incoming
        // gradient both into the conv path and into the encoder output.
        let mut skip_grads: [Option<Tensor4>; 3] = [None, None, None];
        for (i, skip) in [(7usize, 0usize), (6, 1), (5, 2)] {
            let g_pre = leaky_relu_backward(&cache.pre[i], &g_cur);
            let (g_up, g) = conv2d_backward(&cache.ups[i - 5], &self.layers[i], &g_pre)?;
            grads.layers[i] = g;
            skip_grads[skip] = Some(g_cur);
            g_cur = upsample_nearest2_backward(&g_up);
        }

        // Encoder in reverse; stem/enc1/enc2 pick up the extra gradient their
        // skip connections fed to dec1/dec2/dec3.
        for i in (0..5).rev() {
            if i < 3 {
                g_cur = g_cur.add(skip_grads[i].as_ref().unwrap());
            }
            let g_pre = leaky_relu_backward(&cache.pre[i], &g_cur);
            let below = if i == 0 { &cache.input } else { &cache.post[i - 1] };
            let (g_in, g) = conv2d_backward(below, &self.layers[i], &g_pre)?;
            grads.layers[i] = g;
            g_cur = g_in;
        }
        Ok(grads)
    }

    /// Serialize to the binary checkpoint format: magic `LYRD`, version u32,
    /// then per tensor: name length (u32), UTF-8 name, four u32 dims, and a
    /// little-endian f32 payload.
    pub fn save(&self, path: &Path) -> Result<(), NnError> {
        let io_err = |source| NnError::Io {
            path: path.display().to_string(),
            source,
        };
        let mut buf: Vec<u8> = Vec::new();
        buf.extend_from_slice(CHECKPOINT_MAGIC);
        buf.extend_from_slice(&CHECKPOINT_VERSION.to_le_bytes());
        for (layer, name) in self.layers.iter().zip(LAYER_NAMES) {
            write_tensor(
                &mut buf,
                &format!("{name}.weight"),
                [layer.out_ch as u32, layer.in_ch as u32, 3, 3],
                &layer.weight,
            );
            write_tensor(
                &mut buf,
                &format!("{name}.bias"),
                [layer.out_ch as u32, 1, 1, 1],
                &layer.bias,
            );
        }
        let mut file = std::fs::File::create(path).map_err(io_err)?;
        file.write_all(&buf).map_err(io_err)?;
        Ok(())
    }

    /// Load and validate a checkpoint; the base channel width is recovered
    /// from the stem weight shape and every tensor is checked against it.
    pub fn load(path: &Path) -> Result<ModelState, NnError> {
        let bad = |reason: &str| NnError::BadCheckpoint {
            path: path.display().to_string(),
            reason: reason.to_string(),
        };
        let bytes = std::fs::read(path).map_err(|source| NnError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut r = Reader { buf: &bytes, pos: 0 };
        if r.take(4).ok_or_else(|| bad("truncated magic"))? != CHECKPOINT_MAGIC {
            return Err(bad("wrong magic"));
        }
        let version = r.u32().ok_or_else(|| bad("truncated version"))?;
        if version != CHECKPOINT_VERSION {
            return Err(bad(&format!("unsupported version {version}")));
        }

        let mut tensors: Vec<(String, [u32; 4], Vec<f64>)> = Vec::new();
        while r.pos < bytes.len() {
            let name_len = r.u32().ok_or_else(|| bad("truncated name length"))? as usize;
            let name_bytes = r.take(name_len).ok_or_else(|| bad("truncated name"))?;
            let name = std::str::from_utf8(name_bytes)
                .map_err(|_| bad("tensor name is not UTF-8"))?
                .to_string();
            let mut dims = [0u32; 4];
            for d in dims.iter_mut() {
                *d = r.u32().ok_or_else(|| bad("truncated dims"))?;
            }
            let count = dims.iter().map(|&d| d as usize).product::<usize>();
            let payload = r.take(count * 4).ok_or_else(|| bad("truncated payload"))?;
            let values = payload
                .chunks_exact(4)
                .map(|c| f32::from_le_bytes([c[0], c[1], c[2], c[3]]) as f64)
                .collect();
            tensors.push((name, dims, values));
        }
        if tensors.len() != 18 {
            return Err(bad(&format!("expected 18 tensors, found {}", tensors.len())));
        }
        let base = tensors[0].1[0] as usize;
        if base == 0 {
            return Err(bad("stem has zero output channels"));
        }
        let config = ModelConfig { base_channels: base };
        let shapes = config.layer_shapes();
        let mut layers = Vec::with_capacity(9);
        for (i, name) in LAYER_NAMES.iter().enumerate() {
            let (in_ch, out_ch, stride) = shapes[i];
            let (wname, wdims, wdata) = &tensors[2 * i];
            let (bname, bdims, bdata) = &tensors[2 * i + 1];
            if wname != &format!("{name}.weight") || bname != &format!("{name}.bias") {
                return Err(bad(&format!("unexpected tensor order at `{wname}`")));
            }
            if *wdims != [out_ch as u32, in_ch as u32, 3, 3] {
                return Err(bad(&format!("{wname} has dims {wdims:?}")));
            }
            if *bdims != [out_ch as u32, 1, 1, 1] {
                return Err(bad(&format!("{bname} has dims {bdims:?}")));
            }
            layers.push(Conv2d {
                in_ch,
                out_ch,
                stride,
                weight: wdata.clone(),
                bias: bdata.clone(),
            });
        }
        Ok(ModelState { config, layers })
    }
}

fn write_tensor(buf: &mut Vec<u8>, name: &str, dims: [u32; 4], data: &[f64]) {
    buf.extend_from_slice(&(name.len() as u32).to_le_bytes());
    buf.extend_from_slice(name.as_bytes());
    for d in dims {
        buf.extend_from_slice(&d.to_le_bytes());
    }
    for &v in data {
        buf.extend_from_slice(&(v as f32).to_le_bytes());
    }
}

struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return None;
        }
        let s = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Some(s)
    }

    fn u32(&mut self) -> Option<u32> {
        let b = self.take(4)?;
        Some(u32::from_le_bytes([b[0], b[1], b[2], b[3]]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn random_input(seed: u64, n: usize, h: usize, w: usize) -> Tensor4 {
        let mut rng = crate::rng::stream(seed);
        let data = (0..n * 3 * h * w).map(|_| rng.gen_range(0.0..1.0)).collect();
        Tensor4::from_vec(n, 3, h, w, data)
    }

    #[test]
    fn forward_shape_contract() {
        let model = ModelState::init(ModelConfig { base_channels: 4 }, 0);
        for (h, w) in [(16usize, 16usize), (16, 64), (64, 16), (64, 64)] {
            let x = random_input(1, 1, h, w);
            let (out, cache) = model.forward_with_cache(&x).unwrap();
            assert_eq!(out.dims(), (1, 6, h, w));
            assert_eq!(cache.bottleneck_dims(), (32, h / 8, w / 8));
        }
    }

    #[test]
    fn forward_rejects_bad_inputs() {
        let model = ModelState::init(ModelConfig { base_channels: 4 }, 0);
        let odd = random_input(0, 1, 20, 16);
        assert!(model.forward(&odd).is_err());
        let wrong_c = Tensor4::zeros(1, 4, 16, 16);
        assert!(model.forward(&wrong_c).is_err());
    }

    #[test]
    fn zero_model_outputs_zero() {
        let config = ModelConfig { base_channels: 4 };
        let mut model = ModelState::init(config, 0);
        for layer in model.layers.iter_mut() {
            layer.weight.iter_mut().for_each(|w| *w = 0.0);
            layer.bias.iter_mut().for_each(|b| *b = 0.0);
        }
        let out = model.forward(&random_input(2, 1, 16, 16)).unwrap();
        assert!(out.data.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn batch_forward_stacks_single_forwards() {
        let model = ModelState::init(ModelConfig { base_channels: 4 }, 3);
        let a = random_input(10, 1, 16, 16);
        let b = random_input(11, 1, 16, 16);
        let mut batch = Tensor4::zeros(2, 3, 16, 16);
        batch.data[..a.data.len()].copy_from_slice(&a.data);
        batch.data[a.data.len()..].copy_from_slice(&b.data);

        let out_batch = model.forward(&batch).unwrap();
        let out_a = model.forward(&a).unwrap();
        let out_b = model.forward(&b).unwrap();
        let mut stacked = Tensor4::zeros(2, 6, 16, 16);
        stacked.data[..out_a.data.len()].copy_from_slice(&out_a.data);
        stacked.data[out_a.data.len()..].copy_from_slice(&out_b.data);
        assert!(out_batch.max_abs_diff(&stacked) <= 1e-6);
    }

    #[test]
    fn init_is_deterministic_and_fan_in_bounded() {
        let config = ModelConfig { base_channels: 8 };
        let a = ModelState::init(config, 42);
        let b = ModelState::init(config, 42);
        assert_eq!(a, b);
        assert_ne!(a, ModelState::init(config, 43));
        for layer in &a.layers {
            let bound = (1.0 / (layer.in_ch as f64 * 9.0)).sqrt();
            assert!(layer.weight.iter().all(|w| w.abs() <= bound));
            assert!(layer.bias.iter().all(|&b| b == 0.0));
        }
    }

    #[test]
    fn parameter_gradients_match_finite_differences_spot_check() {
        let config = ModelConfig { base_channels: 2 };
        let model = ModelState::init(config, 7);
        let x = random_input(8, 1, 8, 8);
        let gt0 = random_input(9, 1, 8, 8);
        let gt1 = random_input(10, 1, 8, 8);

        let (_, cache) = model.forward_with_cache(&x).unwrap();
        let (_, grad_out) = total_loss(&cache.out, &gt0, &gt1).unwrap();
        let grads = model.backward(&cache, &grad_out).unwrap();

        let loss_of = |m: &ModelState| -> f64 {
            let out = m.forward(&x).unwrap();
            total_loss(&out, &gt0, &gt1).unwrap().0.total
        };
        let eps = 1e-4;
        let mut rng = crate::rng::stream(99);
        let mut checked = 0;
        for li in 0..9 {
            for _ in 0..6 {
                let wi = rng.gen_range(0..model.layers[li].weight.len());
                let mut mp = model.clone();
                let mut mm = model.clone();
                mp.layers[li].weight[wi] += eps;
                mm.layers[li].weight[wi] -= eps;
                let fd = (loss_of(&mp) - loss_of(&mm)) / (2.0 * eps);
                let g = grads.layers[li].weight[wi];
                if g.abs() < 1e-7 && fd.abs() < 1e-7 {
                    continue;
                }
                assert!(
                    (fd - g).abs() <= 1e-4 + 2e-2 * fd.abs().max(g.abs()),
                    "layer {li} weight {wi}: fd {fd} vs analytic {g}"
                );
                checked += 1;
            }
        }
        assert!(checked > 30);
    }

    #[test]
    fn checkpoint_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = ModelState::init(ModelConfig { base_channels: 4 }, 5);
        model.save(&path).unwrap();
        let loaded = ModelState::load(&path).unwrap();
        assert_eq!(loaded.config, model.config);
        // Values survive the f32 cast both ways; a second save is identical.
        let path2 = dir.path().join("model2.ckpt");
        loaded.save(&path2).unwrap();
        assert_eq!(std::fs::read(&path).unwrap(), std::fs::read(&path2).unwrap());
        for (a, b) in model.layers.iter().zip(&loaded.layers) {
            for (x, y) in a.weight.iter().zip(&b.weight) {
                assert_eq!(*x as f32, *y as f32);
            }
        }
    }

    #[test]
    fn checkpoint_rejects_corruption() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("model.ckpt");
        let model = ModelState::init(ModelConfig { base_channels: 4 }, 5);
        model.save(&path).unwrap();

        let mut bytes = std::fs::read(&path).unwrap();
        bytes[0] = b'X';
        std::fs::write(&path, &bytes).unwrap();
        assert!(matches!(
            ModelState::load(&path),
            Err(NnError::BadCheckpoint { .. })
        ));

        // Truncated file.
        let good = {
            let p = dir.path().join("model_good.ckpt");
            model.save(&p).unwrap();
            std::fs::read(&p).unwrap()
        };
        let p = dir.path().join("model_trunc.ckpt");
        std::fs::write(&p, &good[..good.len() / 2]).unwrap();
        assert!(matches!(
            ModelState::load(&p),
            Err(NnError::BadCheckpoint { .. })
        ));

        assert!(matches!(
            ModelState::load(&dir.path().join("missing.ckpt")),
            Err(NnError::Io { .. })
        ));
    }
}
