//! Capture simulation: random low-frequency shadows and per-channel color
//! shifts, the degradations applied to composites before they become model
//! inputs. Everything is replayable from the recorded spec.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::raster::ImageRgb;
use crate::rng::stream;

/// Fully describes one degradation draw.
///
/// The shadow is a `grid_size`x`grid_size` multiplicative gain field in
/// `[g_min, 1]`, bilinearly upsampled to the image; the color shift is a
/// per-channel affine map `v -> gain * v + offset`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DegradeSpec {
    pub grid_size: usize,
    pub shadow_grid: Vec<f32>,
    pub g_min: f32,
    pub channel_gains: [f32; 3],
    pub channel_offsets: [f32; 3],
    pub seed: u64,
    pub shadow_enabled: bool,
    pub color_enabled: bool,
}

impl DegradeSpec {
    /// Draw a spec from `seed`. Grid size lands in {2, 3, 4}, gains in
    /// [0.85, 1.15], offsets in [-0.05, 0.05], shadow gains in [g_min, 1].
    pub fn sample(seed: u64, shadow_enabled: bool, color_enabled: bool) -> DegradeSpec {
        let mut rng = stream(seed);
        let grid_size = rng.gen_range(2..=4usize);
        let g_min = rng.gen_range(0.4..=0.75f32);
        let shadow_grid = (0..grid_size * grid_size)
            .map(|_| rng.gen_range(g_min..=1.0f32))
            .collect();
        let mut channel_gains = [0.0f32; 3];
        let mut channel_offsets = [0.0f32; 3];
        for c in 0..3 {
            channel_gains[c] = rng.gen_range(0.85..=1.15f32);
            channel_offsets[c] = rng.gen_range(-0.05..=0.05f32);
        }
        DegradeSpec {
            grid_size,
            shadow_grid,
            g_min,
            channel_gains,
            channel_offsets,
            seed,
            shadow_enabled,
            color_enabled,
        }
    }

    /// Identity spec; applying it changes nothing.
    pub fn identity(seed: u64) -> DegradeSpec {
        DegradeSpec {
            grid_size: 2,
            shadow_grid: vec![1.0; 4],
            g_min: 1.0,
            channel_gains: [1.0; 3],
            channel_offsets: [0.0; 3],
            seed,
            shadow_enabled: false,
            color_enabled: false,
        }
    }

    /// Run the enabled stages in order: shadow, then color shift.
    pub fn apply(&self, img: &ImageRgb) -> ImageRgb {
        let mut out = img.clone();
        if self.shadow_enabled {
            out = apply_shadow(&out, self);
        }
        if self.color_enabled {
            out = apply_color_shift(&out, self);
        }
        out
    }
}

/// Multiply the image by the bilinearly upsampled shadow grid. Grid corners
/// map to image corners, so a constant grid row leaves that image row scaled
/// by exactly that value.
pub fn apply_shadow(img: &ImageRgb, spec: &DegradeSpec) -> ImageRgb {
    let k = spec.grid_size;
    debug_assert_eq!(spec.shadow_grid.len(), k * k);
    let mut out = img.clone();
    let (h, w) = (img.height, img.width);
    for y in 0..h {
        let gy = if h > 1 {
            y as f32 * (k - 1) as f32 / (h - 1) as f32
        } else {
            0.0
        };
        let y0 = (gy.floor() as usize).min(k - 1);
        let y1 = (y0 + 1).min(k - 1);
        let fy = gy - y0 as f32;
        for x in 0..w {
            let gx = if w > 1 {
                x as f32 * (k - 1) as f32 / (w - 1) as f32
            } else {
                0.0
            };
            let x0 = (gx.floor() as usize).min(k - 1);
            let x1 = (x0 + 1).min(k - 1);
            let fx = gx - x0 as f32;
            let top = spec.shadow_grid[y0 * k + x0] * (1.0 - fx) + spec.shadow_grid[y0 * k + x1] * fx;
            let bot = spec.shadow_grid[y1 * k + x0] * (1.0 - fx) + spec.shadow_grid[y1 * k + x1] * fx;
            let gain = top * (1.0 - fy) + bot * fy;
            let i = out.idx(y, x);
            for c in 0..3 {
                out.data[i + c] = (out.data[i + c] * gain).clamp(0.0, 1.0);
            }
        }
    }
    out
}

/// Per-channel affine color shift, `out_c = clamp(gain_c * v + offset_c)`.
pub fn apply_color_shift(img: &ImageRgb, spec: &DegradeSpec) -> ImageRgb {
    let mut out = img.clone();
    for px in out.data.chunks_exact_mut(3) {
        for (c, v) in px.iter_mut().enumerate() {
            *v = (spec.channel_gains[c] * *v + spec.channel_offsets[c]).clamp(0.0, 1.0);
        }
    }
    out
}

/// Sample a spec from `seed` with both stages enabled and apply it,
/// returning the degraded image together with the spec for replay.
pub fn degrade(img: &ImageRgb, seed: u64) -> (ImageRgb, DegradeSpec) {
    let spec = DegradeSpec::sample(seed, true, true);
    (spec.apply(img), spec)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assets::gen_text_page;
    use crate::raster::to_luminance;

    fn const_spec(grid: Vec<f32>, k: usize) -> DegradeSpec {
        DegradeSpec {
            grid_size: k,
            shadow_grid: grid,
            g_min: 0.4,
            channel_gains: [1.0; 3],
            channel_offsets: [0.0; 3],
            seed: 0,
            shadow_enabled: true,
            color_enabled: true,
        }
    }

    #[test]
    fn unit_grid_is_identity() {
        let img = gen_text_page(1, 32, 32);
        let spec = const_spec(vec![1.0; 4], 2);
        assert_eq!(apply_shadow(&img, &spec), img);
    }

    #[test]
    fn constant_half_grid_darkens_uniformly() {
        let img = ImageRgb::white(16, 16);
        let spec = const_spec(vec![0.5; 9], 3);
        let out = apply_shadow(&img, &spec);
        for &v in &out.data {
            assert!((v - 0.5).abs() < 1e-6);
        }
    }

    #[test]
    fn two_by_two_grid_interpolates_rows() {
        let img = ImageRgb::white(9, 5);
        let spec = const_spec(vec![1.0, 1.0, 0.5, 0.5], 2);
        let out = apply_shadow(&img, &spec);
        for x in 0..5 {
            assert_eq!(out.pixel(0, x), [1.0, 1.0, 1.0]);
            for c in 0..3 {
                assert!((out.pixel(8, x)[c] - 0.5).abs() < 1e-6);
                // Middle row sits exactly halfway.
                assert!((out.pixel(4, x)[c] - 0.75).abs() < 1e-6);
            }
        }
    }

    #[test]
    fn shadow_keeps_black_black() {
        let img = ImageRgb::new(8, 8, 0.0);
        let spec = DegradeSpec::sample(3, true, true);
        assert_eq!(apply_shadow(&img, &spec), img);
    }

    #[test]
    fn color_shift_cases() {
        let mut spec = DegradeSpec::identity(0);
        spec.color_enabled = true;
        let img = ImageRgb::new(2, 2, 0.5);
        assert_eq!(apply_color_shift(&img, &spec), img);

        spec.channel_gains = [1.1, 1.0, 1.0];
        let out = apply_color_shift(&img, &spec);
        assert!((out.pixel(0, 0)[0] - 0.55).abs() < 1e-6);
        assert_eq!(out.pixel(0, 0)[1], 0.5);

        spec.channel_gains = [1.0; 3];
        spec.channel_offsets = [0.05; 3];
        let white = ImageRgb::white(2, 2);
        assert_eq!(apply_color_shift(&white, &spec), white);
    }

    #[test]
    fn degrade_is_deterministic_and_bounded() {
        let img = gen_text_page(7, 48, 48);
        let (a, spec_a) = degrade(&img, 99);
        let (b, spec_b) = degrade(&img, 99);
        assert_eq!(a, b);
        assert_eq!(spec_a, spec_b);
        for &v in &a.data {
            assert!((0.0..=1.0).contains(&v));
        }
        assert_eq!(spec_a.apply(&img), a);
    }

    #[test]
    fn disabled_stages_are_identity() {
        let img = gen_text_page(2, 40, 40);
        let mut spec = DegradeSpec::sample(5, false, false);
        assert_eq!(spec.apply(&img), img);
        spec.shadow_enabled = false;
        spec.color_enabled = false;
        assert_eq!(spec.apply(&img), img);
    }

    #[test]
    fn degradation_darkens_bright_pages_on_average() {
        let img = gen_text_page(11, 64, 64);
        let base: f64 = to_luminance(&img).data.iter().map(|&v| v as f64).sum::<f64>()
            / (64.0 * 64.0);
        for seed in 0..100u64 {
            let (out, _) = degrade(&img, seed);
            let lum: f64 = to_luminance(&out).data.iter().map(|&v| v as f64).sum::<f64>()
                / (64.0 * 64.0);
            assert!(lum <= base + 0.05, "seed {seed}: {lum} vs base {base}");
        }
    }

    #[test]
    fn spec_round_trips_through_json() {
        let spec = DegradeSpec::sample(42, true, false);
        let json = serde_json::to_string(&spec).unwrap();
        let back: DegradeSpec = serde_json::from_str(&json).unwrap();
        assert_eq!(spec, back);
    }
}
