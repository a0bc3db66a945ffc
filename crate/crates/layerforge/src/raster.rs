//! Pixel buffers, PNG I/O, color conversion, resampling, and alpha compositing.
//!
//! All in-memory raster data is 32-bit float in [0, 1], row-major, sRGB.
//! 8-bit (and 16-bit on input) exists only at the PNG boundary.

use std::path::Path;

use thiserror::Error;

#[derive(Debug, Error)]
pub enum RasterError {
    #[error("cannot decode {path}: {source}")]
    Decode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("cannot encode {path}: {source}")]
    Encode {
        path: String,
        #[source]
        source: image::ImageError,
    },
    #[error("unsupported PNG pixel layout in {path}")]
    UnsupportedLayout { path: String },
    #[error("zero-dimension image: {path}")]
    ZeroDimension { path: String },
    #[error("dimension mismatch: {ah}x{aw} vs {bh}x{bw}")]
    DimensionMismatch {
        ah: usize,
        aw: usize,
        bh: usize,
        bw: usize,
    },
}

/// H×W RGB image, row-major `[r, g, b]` triplets in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ImageRgb {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

/// H×W single-channel image in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct ImageGray {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

/// H×W RGBA sprite with straight (non-premultiplied) alpha, all in [0, 1].
#[derive(Clone, Debug, PartialEq)]
pub struct SpriteRgba {
    pub height: usize,
    pub width: usize,
    pub data: Vec<f32>,
}

impl ImageRgb {
    pub fn new(height: usize, width: usize, fill: f32) -> Self {
        assert!(height >= 1 && width >= 1, "image dimensions must be >= 1");
        ImageRgb {
            height,
            width,
            data: vec![fill; height * width * 3],
        }
    }

    pub fn white(height: usize, width: usize) -> Self {
        Self::new(height, width, 1.0)
    }

    #[inline]
    pub fn idx(&self, y: usize, x: usize) -> usize {
        (y * self.width + x) * 3
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f32; 3] {
        let i = self.idx(y, x);
        [self.data[i], self.data[i + 1], self.data[i + 2]]
    }

    #[inline]
    pub fn set_pixel(&mut self, y: usize, x: usize, px: [f32; 3]) {
        let i = self.idx(y, x);
        self.data[i..i + 3].copy_from_slice(&px);
    }

    pub fn same_dims(&self, other: &ImageRgb) -> Result<(), RasterError> {
        if self.height != other.height || self.width != other.width {
            return Err(RasterError::DimensionMismatch {
                ah: self.height,
                aw: self.width,
                bh: other.height,
                bw: other.width,
            });
        }
        Ok(())
    }

    /// Copy of the `h`×`w` window with top-left corner at `(y0, x0)`.
    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> ImageRgb {
        assert!(y0 + h <= self.height && x0 + w <= self.width, "crop out of bounds");
        let mut out = ImageRgb::new(h, w, 0.0);
        for y in 0..h {
            let src = self.idx(y0 + y, x0);
            let dst = out.idx(y, 0);
            out.data[dst..dst + w * 3].copy_from_slice(&self.data[src..src + w * 3]);
        }
        out
    }

    /// Reflect-pad (mirror without repeating the edge pixel) on each side.
    /// Padding wider than the image keeps bouncing off both edges.
    pub fn pad_reflect(&self, top: usize, bottom: usize, left: usize, right: usize) -> ImageRgb {
        let h = self.height + top + bottom;
        let w = self.width + left + right;
        let mut out = ImageRgb::new(h, w, 0.0);
        for y in 0..h {
            let sy = reflect_index(y as isize - top as isize, self.height);
            for x in 0..w {
                let sx = reflect_index(x as isize - left as isize, self.width);
                out.set_pixel(y, x, self.pixel(sy, sx));
            }
        }
        out
    }

    pub fn max_abs_diff(&self, other: &ImageRgb) -> f32 {
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f32::max)
    }
}

fn reflect_index(i: isize, n: usize) -> usize {
    if n == 1 {
        return 0;
    }
    let n = n as isize;
    let mut i = i;
    loop {
        if i < 0 {
            i = -i;
        } else if i >= n {
            i = 2 * (n - 1) - i;
        } else {
            return i as usize;
        }
    }
}

impl ImageGray {
    pub fn new(height: usize, width: usize, fill: f32) -> Self {
        assert!(height >= 1 && width >= 1, "image dimensions must be >= 1");
        ImageGray {
            height,
            width,
            data: vec![fill; height * width],
        }
    }

    #[inline]
    pub fn at(&self, y: usize, x: usize) -> f32 {
        self.data[y * self.width + x]
    }

    #[inline]
    pub fn set(&mut self, y: usize, x: usize, v: f32) {
        self.data[y * self.width + x] = v;
    }

    pub fn crop(&self, y0: usize, x0: usize, h: usize, w: usize) -> ImageGray {
        assert!(y0 + h <= self.height && x0 + w <= self.width, "crop out of bounds");
        let mut out = ImageGray::new(h, w, 0.0);
        for y in 0..h {
            let src = (y0 + y) * self.width + x0;
            out.data[y * w..(y + 1) * w].copy_from_slice(&self.data[src..src + w]);
        }
        out
    }

    /// Write as a 16-bit grayscale PNG, `v -> round(v * 65535)`.
    pub fn save_png_16bit(&self, path: &Path) -> Result<(), RasterError> {
        let pixels: Vec<u16> = self
            .data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 65535.0).round() as u16)
            .collect();
        let buf = image::ImageBuffer::<image::Luma<u16>, Vec<u16>>::from_raw(
            self.width as u32,
            self.height as u32,
            pixels,
        )
        .expect("buffer length matches dimensions");
        buf.save(path).map_err(|source| RasterError::Encode {
            path: path.display().to_string(),
            source,
        })
    }

    /// Read a grayscale PNG (8 or 16 bit) back into floats.
    pub fn load_png(path: &Path) -> Result<ImageGray, RasterError> {
        let img = open_image(path)?;
        let (w, h) = (img.width() as usize, img.height() as usize);
        check_nonzero(w, h, path)?;
        let data: Vec<f32> = match img {
            image::DynamicImage::ImageLuma8(buf) => {
                buf.into_raw().iter().map(|&v| v as f32 / 255.0).collect()
            }
            image::DynamicImage::ImageLuma16(buf) => {
                buf.into_raw().iter().map(|&v| v as f32 / 65535.0).collect()
            }
            _ => {
                return Err(RasterError::UnsupportedLayout {
                    path: path.display().to_string(),
                })
            }
        };
        Ok(ImageGray {
            height: h,
            width: w,
            data,
        })
    }
}

impl SpriteRgba {
    pub fn new(height: usize, width: usize) -> Self {
        assert!(height >= 1 && width >= 1, "sprite dimensions must be >= 1");
        SpriteRgba {
            height,
            width,
            data: vec![0.0; height * width * 4],
        }
    }

    #[inline]
    pub fn idx(&self, y: usize, x: usize) -> usize {
        (y * self.width + x) * 4
    }

    #[inline]
    pub fn pixel(&self, y: usize, x: usize) -> [f32; 4] {
        let i = self.idx(y, x);
        [
            self.data[i],
            self.data[i + 1],
            self.data[i + 2],
            self.data[i + 3],
        ]
    }

    #[inline]
    pub fn set_pixel(&mut self, y: usize, x: usize, px: [f32; 4]) {
        let i = self.idx(y, x);
        self.data[i..i + 4].copy_from_slice(&px);
    }

    /// Write as an 8-bit RGBA PNG.
    pub fn save_png(&self, path: &Path) -> Result<(), RasterError> {
        let bytes: Vec<u8> = self
            .data
            .iter()
            .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
            .collect();
        let buf = image::RgbaImage::from_raw(self.width as u32, self.height as u32, bytes)
            .expect("buffer length matches dimensions");
        buf.save(path).map_err(|source| RasterError::Encode {
            path: path.display().to_string(),
            source,
        })
    }
}

fn open_image(path: &Path) -> Result<image::DynamicImage, RasterError> {
    image::open(path).map_err(|source| RasterError::Decode {
        path: path.display().to_string(),
        source,
    })
}

fn check_nonzero(w: usize, h: usize, path: &Path) -> Result<(), RasterError> {
    if w == 0 || h == 0 {
        return Err(RasterError::ZeroDimension {
            path: path.display().to_string(),
        });
    }
    Ok(())
}

/// Decode an 8/16-bit gray/RGB/RGBA PNG into float RGB. Alpha, when present,
/// is flattened over white; channel values map as `v / (2^bitdepth - 1)`.
pub fn load_png(path: &Path) -> Result<ImageRgb, RasterError> {
    let img = open_image(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    check_nonzero(w, h, path)?;
    let mut data = Vec::with_capacity(h * w * 3);
    match img {
        image::DynamicImage::ImageLuma8(buf) => {
            for &v in buf.as_raw() {
                let f = v as f32 / 255.0;
                data.extend_from_slice(&[f, f, f]);
            }
        }
        image::DynamicImage::ImageLuma16(buf) => {
            for &v in buf.as_raw() {
                let f = v as f32 / 65535.0;
                data.extend_from_slice(&[f, f, f]);
            }
        }
        image::DynamicImage::ImageLumaA8(buf) => {
            for px in buf.pixels() {
                let v = px.0[0] as f32 / 255.0;
                let a = px.0[1] as f32 / 255.0;
                let f = a * v + (1.0 - a);
                data.extend_from_slice(&[f, f, f]);
            }
        }
        image::DynamicImage::ImageLumaA16(buf) => {
            for px in buf.pixels() {
                let v = px.0[0] as f32 / 65535.0;
                let a = px.0[1] as f32 / 65535.0;
                let f = a * v + (1.0 - a);
                data.extend_from_slice(&[f, f, f]);
            }
        }
        image::DynamicImage::ImageRgb8(buf) => {
            data.extend(buf.as_raw().iter().map(|&v| v as f32 / 255.0));
        }
        image::DynamicImage::ImageRgb16(buf) => {
            data.extend(buf.as_raw().iter().map(|&v| v as f32 / 65535.0));
        }
        image::DynamicImage::ImageRgba8(buf) => {
            for px in buf.pixels() {
                let a = px.0[3] as f32 / 255.0;
                for c in 0..3 {
                    let v = px.0[c] as f32 / 255.0;
                    data.push(a * v + (1.0 - a));
                }
            }
        }
        image::DynamicImage::ImageRgba16(buf) => {
            for px in buf.pixels() {
                let a = px.0[3] as f32 / 65535.0;
                for c in 0..3 {
                    let v = px.0[c] as f32 / 65535.0;
                    data.push(a * v + (1.0 - a));
                }
            }
        }
        _ => {
            return Err(RasterError::UnsupportedLayout {
                path: path.display().to_string(),
            })
        }
    }
    Ok(ImageRgb {
        height: h,
        width: w,
        data,
    })
}

/// Decode a PNG into an RGBA sprite, keeping straight alpha (opaque when the
/// file has no alpha channel).
pub fn load_png_rgba(path: &Path) -> Result<SpriteRgba, RasterError> {
    let img = open_image(path)?;
    let (w, h) = (img.width() as usize, img.height() as usize);
    check_nonzero(w, h, path)?;
    let mut data = Vec::with_capacity(h * w * 4);
    match img {
        image::DynamicImage::ImageLuma8(buf) => {
            for &v in buf.as_raw() {
                let f = v as f32 / 255.0;
                data.extend_from_slice(&[f, f, f, 1.0]);
            }
        }
        image::DynamicImage::ImageLuma16(buf) => {
            for &v in buf.as_raw() {
                let f = v as f32 / 65535.0;
                data.extend_from_slice(&[f, f, f, 1.0]);
            }
        }
        image::DynamicImage::ImageLumaA8(buf) => {
            for px in buf.pixels() {
                let v = px.0[0] as f32 / 255.0;
                let a = px.0[1] as f32 / 255.0;
                data.extend_from_slice(&[v, v, v, a]);
            }
        }
        image::DynamicImage::ImageRgb8(buf) => {
            for px in buf.pixels() {
                for c in 0..3 {
                    data.push(px.0[c] as f32 / 255.0);
                }
                data.push(1.0);
            }
        }
        image::DynamicImage::ImageRgb16(buf) => {
            for px in buf.pixels() {
                for c in 0..3 {
                    data.push(px.0[c] as f32 / 65535.0);
                }
                data.push(1.0);
            }
        }
        image::DynamicImage::ImageRgba8(buf) => {
            data.extend(buf.as_raw().iter().map(|&v| v as f32 / 255.0));
        }
        image::DynamicImage::ImageRgba16(buf) => {
            data.extend(buf.as_raw().iter().map(|&v| v as f32 / 65535.0));
        }
        _ => {
            return Err(RasterError::UnsupportedLayout {
                path: path.display().to_string(),
            })
        }
    }
    Ok(SpriteRgba {
        height: h,
        width: w,
        data,
    })
}

/// Write an 8-bit RGB PNG, `v -> round(v * 255)`.
pub fn save_png(img: &ImageRgb, path: &Path) -> Result<(), RasterError> {
    let bytes: Vec<u8> = img
        .data
        .iter()
        .map(|&v| (v.clamp(0.0, 1.0) * 255.0).round() as u8)
        .collect();
    let buf = image::RgbImage::from_raw(img.width as u32, img.height as u32, bytes)
        .expect("buffer length matches dimensions");
    buf.save(path).map_err(|source| RasterError::Encode {
        path: path.display().to_string(),
        source,
    })
}

/// Rec. 601 luma, `y = 0.299 R + 0.587 G + 0.114 B`.
///
/// Evaluated as `b + 0.299 (r - b) + 0.587 (g - b)`, which is the same
/// polynomial but keeps `to_luminance(v, v, v) == v` exact in float.
pub fn to_luminance(img: &ImageRgb) -> ImageGray {
    let mut out = ImageGray::new(img.height, img.width, 0.0);
    for (i, px) in img.data.chunks_exact(3).enumerate() {
        let (r, g, b) = (px[0] as f64, px[1] as f64, px[2] as f64);
        let y = b + 0.299 * (r - b) + 0.587 * (g - b);
        out.data[i] = (y as f32).clamp(0.0, 1.0);
    }
    out
}

/// Rotate a sprite about its center, expanding the canvas to the rotated
/// bounding box. Positive angles turn counterclockwise on screen. The
/// axis-aligned angles 0/±90/±180 are exact pixel permutations; everything
/// else is sampled bilinearly (premultiplied, so transparent samples do not
/// bleed color), with out-of-source samples fully transparent.
pub fn rotate_sprite(sprite: &SpriteRgba, theta_deg: f32) -> SpriteRgba {
    debug_assert!((-180.0..=180.0).contains(&theta_deg));
    if theta_deg == 0.0 {
        return sprite.clone();
    }
    if theta_deg == 90.0 {
        return rotate_quarter(sprite, Quarter::Ccw90);
    }
    if theta_deg == -90.0 {
        return rotate_quarter(sprite, Quarter::Cw90);
    }
    if theta_deg == 180.0 || theta_deg == -180.0 {
        return rotate_quarter(sprite, Quarter::Half);
    }

    let (h, w) = (sprite.height, sprite.width);
    let theta = (theta_deg as f64).to_radians();
    let (sin, cos) = theta.sin_cos();
    let out_w = ((w as f64 * cos.abs() + h as f64 * sin.abs()) - 1e-9).ceil() as usize;
    let out_h = ((h as f64 * cos.abs() + w as f64 * sin.abs()) - 1e-9).ceil() as usize;
    let (out_w, out_h) = (out_w.max(1), out_h.max(1));

    let cx_src = (w as f64 - 1.0) / 2.0;
    let cy_src = (h as f64 - 1.0) / 2.0;
    let cx_dst = (out_w as f64 - 1.0) / 2.0;
    let cy_dst = (out_h as f64 - 1.0) / 2.0;

    let mut out = SpriteRgba::new(out_h, out_w);
    for y in 0..out_h {
        let dy = y as f64 - cy_dst;
        for x in 0..out_w {
            let dx = x as f64 - cx_dst;
            // Inverse map: rotate the destination offset by -theta.
            let sx = cx_src + cos * dx - sin * dy;
            let sy = cy_src + sin * dx + cos * dy;
            out.set_pixel(y, x, sample_bilinear_premultiplied(sprite, sx, sy));
        }
    }
    out
}

enum Quarter {
    Ccw90,
    Cw90,
    Half,
}

fn rotate_quarter(sprite: &SpriteRgba, q: Quarter) -> SpriteRgba {
    let (h, w) = (sprite.height, sprite.width);
    let (oh, ow) = match q {
        Quarter::Ccw90 | Quarter::Cw90 => (w, h),
        Quarter::Half => (h, w),
    };
    let mut out = SpriteRgba::new(oh, ow);
    for y in 0..oh {
        for x in 0..ow {
            let px = match q {
                Quarter::Ccw90 => sprite.pixel(x, w - 1 - y),
                Quarter::Cw90 => sprite.pixel(h - 1 - x, y),
                Quarter::Half => sprite.pixel(h - 1 - y, w - 1 - x),
            };
            out.set_pixel(y, x, px);
        }
    }
    out
}

fn sample_bilinear_premultiplied(sprite: &SpriteRgba, x: f64, y: f64) -> [f32; 4] {
    let (h, w) = (sprite.height as isize, sprite.width as isize);
    if x <= -1.0 || y <= -1.0 || x >= w as f64 || y >= h as f64 {
        return [0.0; 4];
    }
    let x0 = x.floor();
    let y0 = y.floor();
    let fx = x - x0;
    let fy = y - y0;
    let fetch = |yy: isize, xx: isize| -> [f64; 4] {
        if yy < 0 || xx < 0 || yy >= h || xx >= w {
            return [0.0; 4];
        }
        let p = sprite.pixel(yy as usize, xx as usize);
        let a = p[3] as f64;
        [p[0] as f64 * a, p[1] as f64 * a, p[2] as f64 * a, a]
    };
    let (x0, y0) = (x0 as isize, y0 as isize);
    let p00 = fetch(y0, x0);
    let p01 = fetch(y0, x0 + 1);
    let p10 = fetch(y0 + 1, x0);
    let p11 = fetch(y0 + 1, x0 + 1);
    let mut acc = [0.0f64; 4];
    for c in 0..4 {
        let top = p00[c] * (1.0 - fx) + p01[c] * fx;
        let bot = p10[c] * (1.0 - fx) + p11[c] * fx;
        acc[c] = top * (1.0 - fy) + bot * fy;
    }
    let a = acc[3];
    if a <= 1e-6 {
        return [0.0; 4];
    }
    [
        (acc[0] / a).clamp(0.0, 1.0) as f32,
        (acc[1] / a).clamp(0.0, 1.0) as f32,
        (acc[2] / a).clamp(0.0, 1.0) as f32,
        a.clamp(0.0, 1.0) as f32,
    ]
}

/// Straight-alpha "over" composite of `sprite` onto `dst` at top-left anchor
/// `(x, y)`; the sprite is clipped at the borders. Per covered pixel
/// `a = A_sprite * global_alpha` and `out = (1 - a) * dst + a * src`.
pub fn alpha_composite(
    dst: &ImageRgb,
    sprite: &SpriteRgba,
    x: i64,
    y: i64,
    global_alpha: f32,
) -> ImageRgb {
    let mut out = dst.clone();
    composite_into(&mut out, sprite, x, y, global_alpha);
    out
}

/// In-place variant of [`alpha_composite`].
pub fn composite_into(
    dst: &mut ImageRgb,
    sprite: &SpriteRgba,
    x: i64,
    y: i64,
    global_alpha: f32,
) {
    debug_assert!((0.0..=1.0).contains(&global_alpha));
    let (y0, y1, x0, x1) = clip_span(dst.height, dst.width, sprite.height, sprite.width, x, y);
    for dy in y0..y1 {
        let sy = (dy as i64 - y) as usize;
        for dx in x0..x1 {
            let sx = (dx as i64 - x) as usize;
            let sp = sprite.pixel(sy, sx);
            let a = sp[3] * global_alpha;
            let i = dst.idx(dy, dx);
            for (d, &s) in dst.data[i..i + 3].iter_mut().zip(&sp[..3]) {
                *d = ((1.0 - a) * *d + a * s).clamp(0.0, 1.0);
            }
        }
    }
}

/// Fold one placement into an accumulated coverage map:
/// `A_new = a + (1 - a) * A_old` with `a = A_sprite * global_alpha`.
pub fn accumulate_coverage(
    coverage: &mut ImageGray,
    sprite: &SpriteRgba,
    x: i64,
    y: i64,
    global_alpha: f32,
) {
    let (y0, y1, x0, x1) = clip_span(
        coverage.height,
        coverage.width,
        sprite.height,
        sprite.width,
        x,
        y,
    );
    for dy in y0..y1 {
        let sy = (dy as i64 - y) as usize;
        for dx in x0..x1 {
            let sx = (dx as i64 - x) as usize;
            let a = sprite.pixel(sy, sx)[3] * global_alpha;
            let old = coverage.at(dy, dx);
            coverage.set(dy, dx, (a + (1.0 - a) * old).clamp(0.0, 1.0));
        }
    }
}

fn clip_span(
    dh: usize,
    dw: usize,
    sh: usize,
    sw: usize,
    x: i64,
    y: i64,
) -> (usize, usize, usize, usize) {
    let y0 = y.max(0).min(dh as i64) as usize;
    let y1 = (y + sh as i64).max(0).min(dh as i64) as usize;
    let x0 = x.max(0).min(dw as i64) as usize;
    let x1 = (x + sw as i64).max(0).min(dw as i64) as usize;
    (y0, y1, x0, x1)
}
