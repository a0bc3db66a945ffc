//! Overlay asset vocabulary: stamps, signatures, barcodes, QR-style codes,
//! photo blocks, and watermark words.
//!
//! Assets come from two places: RGBA PNG files organized by category
//! directory, or procedural generators. The generators are pure functions of
//! `(seed, size)` so the whole pipeline can run with zero binary fixtures.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use rand::Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{load_png_rgba, ImageRgb, RasterError, SpriteRgba};
use crate::rng::{stream, subseed};

#[derive(Debug, Error)]
pub enum AssetError {
    #[error("unknown category directory `{name}` in {dir}")]
    UnknownCategory { dir: String, name: String },
    #[error("empty asset library in {0}")]
    EmptyLibrary(String),
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error(transparent)]
    Raster(#[from] RasterError),
    #[error("{0}")]
    TooSmall(String),
    #[error("watermark text is empty")]
    EmptyText,
    #[error("unsupported watermark character {0:?}")]
    UnsupportedChar(char),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AssetCategory {
    Stamp,
    Signature,
    Barcode,
    Qr,
    Photo,
    WatermarkWord,
}

impl AssetCategory {
    pub const ALL: [AssetCategory; 6] = [
        AssetCategory::Stamp,
        AssetCategory::Signature,
        AssetCategory::Barcode,
        AssetCategory::Qr,
        AssetCategory::Photo,
        AssetCategory::WatermarkWord,
    ];

    pub fn dir_name(self) -> &'static str {
        match self {
            AssetCategory::Stamp => "stamp",
            AssetCategory::Signature => "signature",
            AssetCategory::Barcode => "barcode",
            AssetCategory::Qr => "qr",
            AssetCategory::Photo => "photo",
            AssetCategory::WatermarkWord => "watermark_word",
        }
    }

    pub fn from_dir_name(name: &str) -> Option<AssetCategory> {
        Self::ALL.into_iter().find(|c| c.dir_name() == name)
    }
}

impl fmt::Display for AssetCategory {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.dir_name())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum AssetSource {
    File(PathBuf),
    Procedural { seed: u64 },
}

#[derive(Clone, Debug)]
pub struct OverlayAsset {
    pub category: AssetCategory,
    pub sprite: SpriteRgba,
    pub source: AssetSource,
}

/// Indexed collection of overlay assets. Placement specs refer to assets by
/// their position in this library, so construction order is deterministic.
#[derive(Clone, Debug, Default)]
pub struct AssetLibrary {
    assets: Vec<OverlayAsset>,
    by_category: BTreeMap<AssetCategory, Vec<usize>>,
}

impl AssetLibrary {
    pub fn push(&mut self, asset: OverlayAsset) {
        self.by_category
            .entry(asset.category)
            .or_default()
            .push(self.assets.len());
        self.assets.push(asset);
    }

    pub fn assets(&self) -> &[OverlayAsset] {
        &self.assets
    }

    pub fn get(&self, index: usize) -> Option<&OverlayAsset> {
        self.assets.get(index)
    }

    pub fn len(&self) -> usize {
        self.assets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assets.is_empty()
    }

    pub fn category_indices(&self, category: AssetCategory) -> &[usize] {
        self.by_category
            .get(&category)
            .map(Vec::as_slice)
            .unwrap_or(&[])
    }

    pub fn category_count(&self, category: AssetCategory) -> usize {
        self.category_indices(category).len()
    }
}

/// Load a library from `<root>/<category>/<name>.png`. Category directories
/// and files are visited in lexicographic order so indices are stable.
pub fn load_asset_dir(root: &Path) -> Result<AssetLibrary, AssetError> {
    let io_err = |path: &Path, source: std::io::Error| AssetError::Io {
        path: path.display().to_string(),
        source,
    };
    let mut dirs: Vec<(String, PathBuf)> = Vec::new();
    for entry in std::fs::read_dir(root).map_err(|e| io_err(root, e))? {
        let entry = entry.map_err(|e| io_err(root, e))?;
        let path = entry.path();
        if path.is_dir() {
            let name = entry.file_name().to_string_lossy().into_owned();
            dirs.push((name, path));
        }
    }
    dirs.sort_by(|a, b| a.0.cmp(&b.0));

    let mut library = AssetLibrary::default();
    for (name, dir) in dirs {
        let category =
            AssetCategory::from_dir_name(&name).ok_or_else(|| AssetError::UnknownCategory {
                dir: root.display().to_string(),
                name: name.clone(),
            })?;
        let mut files: Vec<PathBuf> = Vec::new();
        for entry in std::fs::read_dir(&dir).map_err(|e| io_err(&dir, e))? {
            let entry = entry.map_err(|e| io_err(&dir, e))?;
            let path = entry.path();
            let is_png = path
                .extension()
                .map(|e| e.eq_ignore_ascii_case("png"))
                .unwrap_or(false);
            if path.is_file() && is_png {
                files.push(path);
            }
        }
        files.sort();
        for file in files {
            let sprite = load_png_rgba(&file)?;
            library.push(OverlayAsset {
                category,
                sprite,
                source: AssetSource::File(file),
            });
        }
    }
    if library.is_empty() {
        return Err(AssetError::EmptyLibrary(root.display().to_string()));
    }
    Ok(library)
}

/// Build a library entirely from the generators, `per_category` assets each.
pub fn procedural_library(seed: u64, per_category: usize) -> AssetLibrary {
    let mut library = AssetLibrary::default();
    for (tag, category) in AssetCategory::ALL.into_iter().enumerate() {
        for i in 0..per_category {
            let s = subseed(seed, (tag as u64) << 32 | i as u64);
            let mut sizes = stream(subseed(s, 0xD1));
            let asset = match category {
                AssetCategory::Stamp => gen_stamp(s, sizes.gen_range(16..=22)),
                AssetCategory::Signature => {
                    gen_signature(s, sizes.gen_range(64..=100), sizes.gen_range(24..=40))
                }
                AssetCategory::Barcode => {
                    gen_barcode(s, sizes.gen_range(40..=64), sizes.gen_range(12..=20))
                }
                AssetCategory::Qr => gen_qr_like(s, 2 * sizes.gen_range(5..=10) + 1, 2),
                AssetCategory::Photo => {
                    gen_photo_block(s, sizes.gen_range(28..=44), sizes.gen_range(36..=56))
                }
                AssetCategory::WatermarkWord => {
                    const WORDS: [&str; 6] = ["DRAFT", "COPY", "VOID", "PAID", "FINAL", "FILE"];
                    let word = WORDS[sizes.gen_range(0..WORDS.len())];
                    gen_watermark_word(word, sizes.gen_range(1..=2))
                }
            }
            .expect("procedural parameter ranges satisfy generator preconditions");
            library.push(asset);
        }
    }
    library
}

fn require(cond: bool, msg: &str) -> Result<(), AssetError> {
    if cond {
        Ok(())
    } else {
        Err(AssetError::TooSmall(msg.to_string()))
    }
}

/// 1D barcode lookalike: vertical bars of pseudo-random 1-4 px widths on an
/// opaque white quiet zone. Every column is uniform top to bottom.
pub fn gen_barcode(seed: u64, width: usize, height: usize) -> Result<OverlayAsset, AssetError> {
    require(width >= 16, "barcode width must be >= 16")?;
    require(height >= 8, "barcode height must be >= 8")?;
    let mut rng = stream(seed);
    let quiet = (width / 16).max(2);
    let mut columns = vec![false; width]; // true = black
    let mut x = quiet;
    let mut black = true;
    while x < width - quiet {
        let run = rng.gen_range(1..=4usize).min(width - quiet - x);
        if black {
            columns[x..x + run].iter_mut().for_each(|c| *c = true);
        }
        x += run;
        black = !black;
    }
    let mut sprite = SpriteRgba::new(height, width);
    for y in 0..height {
        for (x, &is_black) in columns.iter().enumerate() {
            let v = if is_black { 0.0 } else { 1.0 };
            sprite.set_pixel(y, x, [v, v, v, 1.0]);
        }
    }
    Ok(OverlayAsset {
        category: AssetCategory::Barcode,
        sprite,
        source: AssetSource::Procedural { seed },
    })
}

/// QR-style lookalike (not decodable): a random black/white module grid with
/// three 3x3 finder rings in the top-left, top-right, and bottom-left corners.
pub fn gen_qr_like(seed: u64, modules: usize, module_px: usize) -> Result<OverlayAsset, AssetError> {
    require(modules >= 9, "qr module count must be >= 9")?;
    require(module_px >= 1, "qr module size must be >= 1")?;
    let mut rng = stream(seed);
    let mut grid = vec![false; modules * modules];
    for cell in grid.iter_mut() {
        *cell = rng.gen::<f64>() < 0.5;
    }
    // Finder rings: black border, white center.
    for (fy, fx) in [(0, 0), (0, modules - 3), (modules - 3, 0)] {
        for dy in 0..3 {
            for dx in 0..3 {
                grid[(fy + dy) * modules + (fx + dx)] = !(dy == 1 && dx == 1);
            }
        }
    }
    let side = modules * module_px;
    let mut sprite = SpriteRgba::new(side, side);
    for y in 0..side {
        for x in 0..side {
            let v = if grid[(y / module_px) * modules + (x / module_px)] {
                0.0
            } else {
                1.0
            };
            sprite.set_pixel(y, x, [v, v, v, 1.0]);
        }
    }
    Ok(OverlayAsset {
        category: AssetCategory::Qr,
        sprite,
        source: AssetSource::Procedural { seed },
    })
}

/// Round ink stamp: two concentric circles plus radial tick marks in a
/// saturated red/blue/violet ink. Alpha is 1 on ink and 0 elsewhere.
pub fn gen_stamp(seed: u64, radius: usize) -> Result<OverlayAsset, AssetError> {
    require(radius >= 16, "stamp radius must be >= 16")?;
    let mut rng = stream(seed);
    let side = 2 * radius + 1;
    let center = radius as f32;
    let r_outer = radius as f32 - 2.0;
    let stroke_outer = rng.gen_range(2.0..=4.0f32);
    let r_inner = r_outer * 0.62;
    let stroke_inner = rng.gen_range(2.0..=4.0f32);
    let ticks = rng.gen_range(8..=16usize);
    let phase = rng.gen_range(0.0..std::f32::consts::TAU);
    let hue_base = [0.0f32, 240.0, 275.0][rng.gen_range(0..3usize)];
    let hue = (hue_base + rng.gen_range(-10.0..=10.0f32)).rem_euclid(360.0);
    let sat = rng.gen_range(0.65..=0.95f32);
    let val = rng.gen_range(0.45..=0.75f32);
    let ink = hsv_to_rgb(hue, sat, val);

    let tick_step = std::f32::consts::TAU / ticks as f32;
    let mut sprite = SpriteRgba::new(side, side);
    for y in 0..side {
        for x in 0..side {
            let dy = y as f32 - center;
            let dx = x as f32 - center;
            let r = (dx * dx + dy * dy).sqrt();
            let mut on = (r - r_outer).abs() <= stroke_outer / 2.0
                || (r - r_inner).abs() <= stroke_inner / 2.0;
            if !on && r >= r_inner + 1.5 && r <= r_outer - 1.5 {
                let angle = dy.atan2(dx) - phase;
                let rel = angle.rem_euclid(tick_step);
                let arc = rel.min(tick_step - rel) * r;
                on = arc <= 1.0;
            }
            if on {
                sprite.set_pixel(y, x, [ink[0], ink[1], ink[2], 1.0]);
            }
        }
    }
    Ok(OverlayAsset {
        category: AssetCategory::Stamp,
        sprite,
        source: AssetSource::Procedural { seed },
    })
}

/// Handwritten-style signature: chained cubic Bezier strokes in dark ink with
/// an antialiased alpha edge.
pub fn gen_signature(seed: u64, width: usize, height: usize) -> Result<OverlayAsset, AssetError> {
    require(width >= 32, "signature width must be >= 32")?;
    require(height >= 16, "signature height must be >= 16")?;
    let mut rng = stream(seed);
    let (wf, hf) = (width as f32, height as f32);
    let strokes = rng.gen_range(2..=4usize);
    let thickness = rng.gen_range(1.0..=2.0f32);
    let baseline = rng.gen_range(0.45..=0.62f32) * hf;
    let base = rng.gen_range(0.05..=0.20f32);
    let ink = [
        (base * rng.gen_range(0.6..=1.0f32)).min(0.28),
        (base * rng.gen_range(0.6..=1.0f32)).min(0.28),
        (base + rng.gen_range(0.0..=0.08f32)).min(0.28),
    ];

    let mut alpha = vec![0.0f32; height * width];
    let span = 0.88 * wf;
    let x_at = |t: f32| 0.06 * wf + span * t;
    let mut cursor = [
        x_at(0.0) + rng.gen_range(0.0..=0.04) * wf,
        baseline + rng.gen_range(-0.1..=0.1) * hf,
    ];
    for s in 0..strokes {
        let t0 = s as f32 / strokes as f32;
        let t1 = (s + 1) as f32 / strokes as f32;
        let wiggle = |rng: &mut rand_chacha::ChaCha8Rng| {
            (baseline + rng.gen_range(-0.32..=0.32) * hf).clamp(1.0, hf - 2.0)
        };
        let c1 = [
            x_at(t0 + rng.gen_range(0.0..=0.5) * (t1 - t0)),
            wiggle(&mut rng),
        ];
        let c2 = [
            x_at(t0 + rng.gen_range(0.5..=1.0) * (t1 - t0)),
            wiggle(&mut rng),
        ];
        let end = [
            x_at(t1) + rng.gen_range(-0.02..=0.02) * wf,
            wiggle(&mut rng),
        ];
        stamp_bezier(&mut alpha, width, height, cursor, c1, c2, end, thickness);
        cursor = end;
    }

    let mut sprite = SpriteRgba::new(height, width);
    for (i, &a) in alpha.iter().enumerate() {
        if a > 0.0 {
            let (y, x) = (i / width, i % width);
            sprite.set_pixel(y, x, [ink[0], ink[1], ink[2], a]);
        }
    }
    Ok(OverlayAsset {
        category: AssetCategory::Signature,
        sprite,
        source: AssetSource::Procedural { seed },
    })
}

#[allow(clippy::too_many_arguments)]
fn stamp_bezier(
    alpha: &mut [f32],
    width: usize,
    height: usize,
    p0: [f32; 2],
    c1: [f32; 2],
    c2: [f32; 2],
    p3: [f32; 2],
    thickness: f32,
) {
    let hull = |a: [f32; 2], b: [f32; 2]| ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
    let approx_len = hull(p0, c1) + hull(c1, c2) + hull(c2, p3);
    let steps = ((approx_len * 3.0).ceil() as usize).max(48);
    let radius = thickness / 2.0;
    for i in 0..=steps {
        let t = i as f32 / steps as f32;
        let u = 1.0 - t;
        let px = u * u * u * p0[0] + 3.0 * u * u * t * c1[0] + 3.0 * u * t * t * c2[0] + t * t * t * p3[0];
        let py = u * u * u * p0[1] + 3.0 * u * u * t * c1[1] + 3.0 * u * t * t * c2[1] + t * t * t * p3[1];
        let y0 = (py - radius - 1.0).floor().max(0.0) as usize;
        let y1 = ((py + radius + 1.0).ceil() as usize).min(height - 1);
        let x0 = (px - radius - 1.0).floor().max(0.0) as usize;
        let x1 = ((px + radius + 1.0).ceil() as usize).min(width - 1);
        for y in y0..=y1 {
            for x in x0..=x1 {
                let d = ((x as f32 - px).powi(2) + (y as f32 - py).powi(2)).sqrt();
                let cov = (radius + 0.5 - d).clamp(0.0, 1.0);
                let cell = &mut alpha[y * width + x];
                *cell = cell.max(cov);
            }
        }
    }
}

/// Render text in the embedded 5x7 bitmap font as a light-gray watermark
/// word. Supports A-Z, 0-9, and space; `scale` is pixels per font cell.
pub fn gen_watermark_word(text: &str, scale: usize) -> Result<OverlayAsset, AssetError> {
    if text.is_empty() {
        return Err(AssetError::EmptyText);
    }
    require(scale >= 1, "watermark scale must be >= 1")?;
    let glyphs: Vec<[u8; 7]> = text
        .chars()
        .map(|c| glyph_5x7(c).ok_or(AssetError::UnsupportedChar(c)))
        .collect::<Result<_, _>>()?;
    let n = glyphs.len();
    let width = n * 5 * scale + (n - 1) * scale;
    let height = 7 * scale;
    let mut sprite = SpriteRgba::new(height, width);
    for (i, rows) in glyphs.iter().enumerate() {
        let x_base = i * 6 * scale;
        for (gy, row) in rows.iter().enumerate() {
            for gx in 0..5 {
                if row & (0b10000 >> gx) != 0 {
                    for sy in 0..scale {
                        for sx in 0..scale {
                            sprite.set_pixel(
                                gy * scale + sy,
                                x_base + gx * scale + sx,
                                [0.75, 0.75, 0.75, 1.0],
                            );
                        }
                    }
                }
            }
        }
    }
    let seed = text
        .bytes()
        .fold(scale as u64, |acc, b| acc.wrapping_mul(131).wrapping_add(b as u64));
    Ok(OverlayAsset {
        category: AssetCategory::WatermarkWord,
        sprite,
        source: AssetSource::Procedural { seed },
    })
}

/// Opaque photo stand-in: a smooth two-color vertical gradient, a faint
/// lighter ellipse, and a thin dark border. Row means stay monotone from top
/// to bottom because the ellipse falloff is gentler than the gradient slope.
pub fn gen_photo_block(seed: u64, width: usize, height: usize) -> Result<OverlayAsset, AssetError> {
    require(width >= 16 && height >= 16, "photo block must be >= 16x16")?;
    let mut rng = stream(seed);
    let border = rng.gen_range(1..=2usize);
    let border_val = rng.gen_range(0.06..=0.15f32);
    let mut top = [0.0f32; 3];
    let mut bottom = [0.0f32; 3];
    let span = rng.gen_range(0.25..=0.33f32);
    for c in 0..3 {
        top[c] = rng.gen_range(0.20..=0.35f32);
        bottom[c] = top[c] + span + rng.gen_range(0.0..=0.04f32);
    }
    let cx = width as f32 / 2.0;
    let cy = 0.52 * height as f32;
    let ea = width as f32 * rng.gen_range(0.24..=0.28f32);
    let eb = height as f32 * rng.gen_range(0.28..=0.32f32);
    let lift = rng.gen_range(0.06..=0.11f32);

    let mut sprite = SpriteRgba::new(height, width);
    for y in 0..height {
        let frac = y as f32 / (height - 1) as f32;
        for x in 0..width {
            let on_border = y < border || y >= height - border || x < border || x >= width - border;
            let px = if on_border {
                [border_val, border_val, border_val, 1.0]
            } else {
                let rho2 = ((x as f32 - cx) / ea).powi(2) + ((y as f32 - cy) / eb).powi(2);
                let bump = if rho2 < 1.0 {
                    lift * (1.0 - rho2) * (1.0 - rho2)
                } else {
                    0.0
                };
                let mut p = [0.0f32; 3];
                for c in 0..3 {
                    p[c] = (top[c] + frac * (bottom[c] - top[c]) + bump).clamp(0.0, 1.0);
                }
                [p[0], p[1], p[2], 1.0]
            };
            sprite.set_pixel(y, x, px);
        }
    }
    Ok(OverlayAsset {
        category: AssetCategory::Photo,
        sprite,
        source: AssetSource::Procedural { seed },
    })
}

/// Procedural stand-in for a text-only document page: near-white background
/// with rows of dark word-like blocks. Used as the clean base layer when no
/// real page scans are available.
pub fn gen_text_page(seed: u64, height: usize, width: usize) -> ImageRgb {
    assert!(height >= 32 && width >= 32, "text page must be >= 32x32");
    let mut rng = stream(seed);
    let bg = rng.gen_range(0.96..=0.99f32);
    let ink = rng.gen_range(0.03..=0.09f32);
    let mut page = ImageRgb::new(height, width, bg);
    let margin_y = (height / 12).max(2);
    let margin_x = (width / 12).max(2);
    let line_h = (height / 42).max(2);
    let max_word = (width / 6).clamp(4, 14);

    let mut y = margin_y;
    let mut first = true;
    while y + line_h < height - margin_y {
        let h = if first && rng.gen::<f32>() < 0.4 {
            line_h * 2
        } else {
            line_h
        };
        first = false;
        if y + h >= height - margin_y {
            break;
        }
        let mut x = margin_x;
        while x + 4 < width - margin_x {
            let w = rng.gen_range(4..=max_word).min(width - margin_x - x);
            if rng.gen::<f32>() < 0.85 {
                for yy in y..y + h {
                    for xx in x..x + w {
                        page.set_pixel(yy, xx, [ink, ink, ink]);
                    }
                }
            }
            x += w + rng.gen_range(2..=6);
        }
        y += h + line_h + 1;
    }
    page
}

fn hsv_to_rgb(h: f32, s: f32, v: f32) -> [f32; 3] {
    let c = v * s;
    let hp = h / 60.0;
    let x = c * (1.0 - (hp.rem_euclid(2.0) - 1.0).abs());
    let (r, g, b) = match hp as u32 {
        0 => (c, x, 0.0),
        1 => (x, c, 0.0),
        2 => (0.0, c, x),
        3 => (0.0, x, c),
        4 => (x, 0.0, c),
        _ => (c, 0.0, x),
    };
    let m = v - c;
    [r + m, g + m, b + m]
}

/// 5x7 bitmap glyphs for A-Z, 0-9, and space; bit 4 is the left column.
fn glyph_5x7(c: char) -> Option<[u8; 7]> {
    let g = match c {
        'A' => [0b01110, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
        'B' => [0b11110, 0b10001, 0b10001, 0b11110, 0b10001, 0b10001, 0b11110],
        'C' => [0b01110, 0b10001, 0b10000, 0b10000, 0b10000, 0b10001, 0b01110],
        'D' => [0b11100, 0b10010, 0b10001, 0b10001, 0b10001, 0b10010, 0b11100],
        'E' => [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b11111],
        'F' => [0b11111, 0b10000, 0b10000, 0b11110, 0b10000, 0b10000, 0b10000],
        'G' => [0b01110, 0b10001, 0b10000, 0b10111, 0b10001, 0b10001, 0b01111],
        'H' => [0b10001, 0b10001, 0b10001, 0b11111, 0b10001, 0b10001, 0b10001],
        'I' => [0b01110, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
        'J' => [0b00111, 0b00010, 0b00010, 0b00010, 0b00010, 0b10010, 0b01100],
        'K' => [0b10001, 0b10010, 0b10100, 0b11000, 0b10100, 0b10010, 0b10001],
        'L' => [0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b10000, 0b11111],
        'M' => [0b10001, 0b11011, 0b10101, 0b10101, 0b10001, 0b10001, 0b10001],
        'N' => [0b10001, 0b10001, 0b11001, 0b10101, 0b10011, 0b10001, 0b10001],
        'O' => [0b01110, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110],
        'P' => [0b11110, 0b10001, 0b10001, 0b11110, 0b10000, 0b10000, 0b10000],
        'Q' => [0b01110, 0b10001, 0b10001, 0b10001, 0b10101, 0b10010, 0b01101],
        'R' => [0b11110, 0b10001, 0b10001, 0b11110, 0b10100, 0b10010, 0b10001],
        'S' => [0b01111, 0b10000, 0b10000, 0b01110, 0b00001, 0b00001, 0b11110],
        'T' => [0b11111, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100, 0b00100],
        'U' => [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01110],
        'V' => [0b10001, 0b10001, 0b10001, 0b10001, 0b10001, 0b01010, 0b00100],
        'W' => [0b10001, 0b10001, 0b10001, 0b10101, 0b10101, 0b10101, 0b01010],
        'X' => [0b10001, 0b10001, 0b01010, 0b00100, 0b01010, 0b10001, 0b10001],
        'Y' => [0b10001, 0b10001, 0b10001, 0b01010, 0b00100, 0b00100, 0b00100],
        'Z' => [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b10000, 0b11111],
        '0' => [0b01110, 0b10001, 0b10011, 0b10101, 0b11001, 0b10001, 0b01110],
        '1' => [0b00100, 0b01100, 0b00100, 0b00100, 0b00100, 0b00100, 0b01110],
        '2' => [0b01110, 0b10001, 0b00001, 0b00010, 0b00100, 0b01000, 0b11111],
        '3' => [0b11111, 0b00010, 0b00100, 0b00010, 0b00001, 0b10001, 0b01110],
        '4' => [0b00010, 0b00110, 0b01010, 0b10010, 0b11111, 0b00010, 0b00010],
        '5' => [0b11111, 0b10000, 0b11110, 0b00001, 0b00001, 0b10001, 0b01110],
        '6' => [0b00110, 0b01000, 0b10000, 0b11110, 0b10001, 0b10001, 0b01110],
        '7' => [0b11111, 0b00001, 0b00010, 0b00100, 0b01000, 0b01000, 0b01000],
        '8' => [0b01110, 0b10001, 0b10001, 0b01110, 0b10001, 0b10001, 0b01110],
        '9' => [0b01110, 0b10001, 0b10001, 0b01111, 0b00001, 0b00010, 0b01100],
        ' ' => [0; 7],
        _ => return None,
    };
    Some(g)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rgb_to_hsv(r: f32, g: f32, b: f32) -> (f32, f32, f32) {
        let max = r.max(g).max(b);
        let min = r.min(g).min(b);
        let d = max - min;
        let s = if max == 0.0 { 0.0 } else { d / max };
        let h = if d == 0.0 {
            0.0
        } else if max == r {
            60.0 * (((g - b) / d).rem_euclid(6.0))
        } else if max == g {
            60.0 * ((b - r) / d + 2.0)
        } else {
            60.0 * ((r - g) / d + 4.0)
        };
        (h, s, max)
    }

    #[test]
    fn barcode_is_deterministic_and_column_uniform() {
        let a = gen_barcode(9, 64, 32).unwrap();
        let b = gen_barcode(9, 64, 32).unwrap();
        assert_eq!(a.sprite, b.sprite);
        assert_eq!(a.category, AssetCategory::Barcode);

        let s = &a.sprite;
        for x in 0..s.width {
            let top = s.pixel(0, x);
            assert!(top[0] == 0.0 || top[0] == 1.0);
            for y in 1..s.height {
                assert_eq!(s.pixel(y, x), top, "column {x} not uniform");
            }
        }

        let c = gen_barcode(10, 64, 32).unwrap();
        assert_ne!(a.sprite, c.sprite);
    }

    #[test]
    fn barcode_rejects_tiny_dimensions() {
        assert!(gen_barcode(0, 8, 32).is_err());
        assert!(gen_barcode(0, 64, 4).is_err());
    }

    #[test]
    fn qr_has_finder_rings_and_balanced_fill() {
        let a = gen_qr_like(3, 9, 1).unwrap();
        assert_eq!(a.sprite, gen_qr_like(3, 9, 1).unwrap().sprite);
        let s = &a.sprite;
        for (fy, fx) in [(0usize, 0usize), (0, 6), (6, 0)] {
            for dy in 0..3 {
                for dx in 0..3 {
                    let expect = if dy == 1 && dx == 1 { 1.0 } else { 0.0 };
                    assert_eq!(s.pixel(fy + dy, fx + dx)[0], expect);
                }
            }
        }

        for seed in 0..5 {
            let a = gen_qr_like(seed, 25, 1).unwrap();
            let black = a.sprite.data.chunks_exact(4).filter(|p| p[0] == 0.0).count();
            let frac = black as f64 / (25.0 * 25.0);
            assert!((0.3..0.7).contains(&frac), "seed {seed}: black fraction {frac}");
        }

        assert!(gen_qr_like(0, 8, 1).is_err());
    }

    #[test]
    fn stamp_ink_is_saturated_and_binary_alpha() {
        for seed in 0..8 {
            let a = gen_stamp(seed, 18).unwrap();
            let mut ink_px = 0usize;
            for p in a.sprite.data.chunks_exact(4) {
                assert!(p[3] == 0.0 || p[3] == 1.0);
                if p[3] == 1.0 {
                    ink_px += 1;
                    let (_, s, v) = rgb_to_hsv(p[0], p[1], p[2]);
                    assert!(s >= 0.5, "seed {seed}: saturation {s}");
                    assert!(v > 0.0);
                } else {
                    assert_eq!(&p[..3], &[0.0, 0.0, 0.0]);
                }
            }
            assert!(ink_px > 0);
            assert_eq!(a.sprite, gen_stamp(seed, 18).unwrap().sprite);
        }
    }

    #[test]
    fn signature_is_sparse_dark_ink() {
        for seed in 0..20 {
            let a = gen_signature(seed, 120, 48).unwrap();
            let total = (a.sprite.height * a.sprite.width) as f64;
            let mut inked = 0usize;
            for p in a.sprite.data.chunks_exact(4) {
                if p[3] > 0.0 {
                    inked += 1;
                    assert!(p[0] <= 0.3 && p[1] <= 0.3 && p[2] <= 0.3);
                }
            }
            let frac = inked as f64 / total;
            assert!(frac <= 0.20, "seed {seed}: ink fraction {frac}");
            assert!(frac > 0.0);
            assert_eq!(a.sprite, gen_signature(seed, 120, 48).unwrap().sprite);
        }
    }

    #[test]
    fn watermark_matches_font_layout() {
        let a = gen_watermark_word("A", 1).unwrap();
        assert_eq!((a.sprite.height, a.sprite.width), (7, 5));
        let bits = glyph_5x7('A').unwrap();
        for (y, row) in bits.iter().enumerate() {
            for x in 0..5 {
                let expect = row & (0b10000 >> x) != 0;
                let px = a.sprite.pixel(y, x);
                assert_eq!(px[3] == 1.0, expect);
                if expect {
                    assert_eq!(&px[..3], &[0.75, 0.75, 0.75]);
                }
            }
        }

        for scale in 1..=3usize {
            let ab = gen_watermark_word("AB", scale).unwrap();
            assert_eq!(ab.sprite.width, 2 * 5 * scale + scale);
            assert_eq!(ab.sprite.height, 7 * scale);
        }

        assert!(matches!(gen_watermark_word("", 1), Err(AssetError::EmptyText)));
        assert!(matches!(
            gen_watermark_word("a!", 1),
            Err(AssetError::UnsupportedChar('a'))
        ));
    }

    #[test]
    fn photo_block_border_and_monotone_rows() {
        for seed in [0u64, 1, 7, 21] {
            for (w, h) in [(36usize, 48usize), (16, 16), (44, 20)] {
                let a = gen_photo_block(seed, w, h).unwrap();
                let s = &a.sprite;
                for x in 0..w {
                    assert!(s.pixel(0, x)[0] <= 0.2);
                    assert!(s.pixel(h - 1, x)[0] <= 0.2);
                }
                for y in 0..h {
                    assert!(s.pixel(y, 0)[1] <= 0.2);
                    assert!(s.pixel(y, w - 1)[1] <= 0.2);
                }
                // Row means over the interior rise from top to bottom.
                let interior = 2usize;
                let mut prev = -1.0f64;
                for y in interior..h - interior {
                    let mut sum = 0.0f64;
                    for x in interior..w - interior {
                        let p = s.pixel(y, x);
                        sum += (p[0] + p[1] + p[2]) as f64 / 3.0;
                    }
                    let mean = sum / (w - 2 * interior) as f64;
                    assert!(
                        mean >= prev - 1e-6,
                        "seed {seed} {w}x{h} row {y}: {mean} < {prev}"
                    );
                    prev = mean;
                }
            }
        }
        assert_eq!(
            gen_photo_block(5, 32, 40).unwrap().sprite,
            gen_photo_block(5, 32, 40).unwrap().sprite
        );
    }

    #[test]
    fn generators_stay_in_range_with_visible_pixels() {
        let lib = procedural_library(123, 2);
        assert_eq!(lib.len(), 12);
        for asset in lib.assets() {
            let mut any_alpha = false;
            for p in asset.sprite.data.chunks_exact(4) {
                for &v in p {
                    assert!((0.0..=1.0).contains(&v) && v.is_finite());
                }
                any_alpha |= p[3] > 0.0;
            }
            assert!(any_alpha, "{:?} has no visible pixels", asset.category);
        }
        for cat in AssetCategory::ALL {
            assert_eq!(lib.category_count(cat), 2);
            for &i in lib.category_indices(cat) {
                assert_eq!(lib.get(i).unwrap().category, cat);
            }
        }
    }

    #[test]
    fn text_page_is_mostly_light() {
        let page = gen_text_page(0, 128, 128);
        let dark = page
            .data
            .chunks_exact(3)
            .filter(|p| p[0] < 0.5)
            .count() as f64
            / (128.0 * 128.0);
        assert!(dark > 0.01 && dark < 0.3, "ink fraction {dark}");
        assert_eq!(gen_text_page(0, 128, 128), page);
    }

    #[test]
    fn asset_dir_loading_counts_and_errors() {
        let dir = tempfile::tempdir().unwrap();
        // Empty root -> empty library error.
        assert!(matches!(
            load_asset_dir(dir.path()),
            Err(AssetError::EmptyLibrary(_))
        ));

        let stamp_dir = dir.path().join("stamp");
        let sig_dir = dir.path().join("signature");
        std::fs::create_dir(&stamp_dir).unwrap();
        std::fs::create_dir(&sig_dir).unwrap();
        for (i, d) in [(0u64, &stamp_dir), (1, &stamp_dir)] {
            gen_stamp(i, 16)
                .unwrap()
                .sprite
                .save_png(&d.join(format!("s{i}.png")))
                .unwrap();
        }
        for i in 0..3u64 {
            gen_signature(i, 64, 24)
                .unwrap()
                .sprite
                .save_png(&sig_dir.join(format!("g{i}.png")))
                .unwrap();
        }
        let lib = load_asset_dir(dir.path()).unwrap();
        assert_eq!(lib.len(), 5);
        assert_eq!(lib.category_count(AssetCategory::Stamp), 2);
        assert_eq!(lib.category_count(AssetCategory::Signature), 3);
        // Loaded alpha survives the PNG round trip.
        assert!(lib.assets()[0].sprite.data.chunks_exact(4).any(|p| p[3] == 0.0));

        std::fs::create_dir(dir.path().join("mystery")).unwrap();
        assert!(matches!(
            load_asset_dir(dir.path()),
            Err(AssetError::UnknownCategory { .. })
        ));
    }
}
