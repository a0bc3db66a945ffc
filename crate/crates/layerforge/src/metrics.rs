//! Image quality metrics (PSNR over color and luminance, SSIM) plus the
//! layer-decorrelation diagnostic, aggregation, and the markdown score table.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::raster::{to_luminance, ImageGray, ImageRgb};

/// PSNR returned for (near-)identical images instead of infinity.
pub const PSNR_CAP_DB: f64 = 100.0;
const PSNR_MSE_FLOOR: f64 = 1e-10;

const SSIM_WINDOW: usize = 11;
const SSIM_SIGMA: f64 = 1.5;
const SSIM_C1: f64 = 0.01 * 0.01;
const SSIM_C2: f64 = 0.03 * 0.03;

#[derive(Debug, Error)]
pub enum MetricsError {
    #[error("dimension mismatch: {ah}x{aw} vs {bh}x{bw}")]
    DimensionMismatch {
        ah: usize,
        aw: usize,
        bh: usize,
        bw: usize,
    },
    #[error("image {h}x{w} is smaller than the {win}x{win} SSIM window")]
    TooSmallForWindow { h: usize, w: usize, win: usize },
    #[error("cannot aggregate an empty record group")]
    EmptyGroup,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LayerKind {
    L0,
    L1,
    Combined,
}

impl LayerKind {
    pub fn label(self) -> &'static str {
        match self {
            LayerKind::L0 => "L0",
            LayerKind::L1 => "L1",
            LayerKind::Combined => "combined",
        }
    }
}

/// Scores for one predicted/ground-truth pair on one layer grouping.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MetricsRecord {
    pub layer: LayerKind,
    pub psnr_color: f64,
    pub psnr_illum: f64,
    pub ssim: f64,
}

/// One aggregated table row: per-method means over a fixed sample set.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub method: String,
    pub psnr_color: f64,
    pub psnr_illum: f64,
    pub ssim: f64,
    pub count: usize,
}

fn check_dims(
    ah: usize,
    aw: usize,
    bh: usize,
    bw: usize,
) -> Result<(), MetricsError> {
    if ah != bh || aw != bw {
        return Err(MetricsError::DimensionMismatch { ah, aw, bh, bw });
    }
    Ok(())
}

/// Mean squared error over all channels.
pub fn mse(a: &ImageRgb, b: &ImageRgb) -> Result<f64, MetricsError> {
    check_dims(a.height, a.width, b.height, b.width)?;
    Ok(mse_slices(&a.data, &b.data))
}

/// Mean squared error over a single-channel pair.
pub fn mse_gray(a: &ImageGray, b: &ImageGray) -> Result<f64, MetricsError> {
    check_dims(a.height, a.width, b.height, b.width)?;
    Ok(mse_slices(&a.data, &b.data))
}

fn mse_slices(a: &[f32], b: &[f32]) -> f64 {
    let sum: f64 = a
        .iter()
        .zip(b)
        .map(|(&x, &y)| {
            let d = x as f64 - y as f64;
            d * d
        })
        .sum();
    sum / a.len() as f64
}

fn psnr_from_mse(mse: f64) -> f64 {
    if mse < PSNR_MSE_FLOOR {
        PSNR_CAP_DB
    } else {
        10.0 * (1.0 / mse).log10()
    }
}

/// PSNR over the RGB channels with MAX = 1.0, capped at 100 dB.
pub fn psnr_color(pred: &ImageRgb, gt: &ImageRgb) -> Result<f64, MetricsError> {
    Ok(psnr_from_mse(mse(pred, gt)?))
}

/// PSNR over the luminance planes, same cap rule.
pub fn psnr_illum(pred: &ImageRgb, gt: &ImageRgb) -> Result<f64, MetricsError> {
    check_dims(pred.height, pred.width, gt.height, gt.width)?;
    Ok(psnr_from_mse(mse_gray(
        &to_luminance(pred),
        &to_luminance(gt),
    )?))
}

/// Structural similarity over the luminance planes: 11x11 Gaussian window
/// (sigma 1.5), stride 1, valid padding, C1 = 0.01^2, C2 = 0.03^2 at unit
/// dynamic range; mean over all window positions.
pub fn ssim(pred: &ImageRgb, gt: &ImageRgb) -> Result<f64, MetricsError> {
    check_dims(pred.height, pred.width, gt.height, gt.width)?;
    if pred.height < SSIM_WINDOW || pred.width < SSIM_WINDOW {
        return Err(MetricsError::TooSmallForWindow {
            h: pred.height,
            w: pred.width,
            win: SSIM_WINDOW,
        });
    }
    let (h, w) = (pred.height, pred.width);
    let x: Vec<f64> = to_luminance(pred).data.iter().map(|&v| v as f64).collect();
    let y: Vec<f64> = to_luminance(gt).data.iter().map(|&v| v as f64).collect();
    let xy: Vec<f64> = x.iter().zip(&y).map(|(a, b)| a * b).collect();
    let xx: Vec<f64> = x.iter().map(|a| a * a).collect();
    let yy: Vec<f64> = y.iter().map(|a| a * a).collect();

    let kernel = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA);
    let mu_x = window_means(&x, h, w, &kernel);
    let mu_y = window_means(&y, h, w, &kernel);
    let e_xx = window_means(&xx, h, w, &kernel);
    let e_yy = window_means(&yy, h, w, &kernel);
    let e_xy = window_means(&xy, h, w, &kernel);

    let mut sum = 0.0;
    for i in 0..mu_x.len() {
        let (mx, my) = (mu_x[i], mu_y[i]);
        let var_x = e_xx[i] - mx * mx;
        let var_y = e_yy[i] - my * my;
        let cov = e_xy[i] - mx * my;
        let num = (2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2);
        let den = (mx * mx + my * my + SSIM_C1) * (var_x + var_y + SSIM_C2);
        sum += num / den;
    }
    Ok(sum / mu_x.len() as f64)
}

fn gaussian_kernel(size: usize, sigma: f64) -> Vec<f64> {
    let half = (size / 2) as f64;
    let mut k: Vec<f64> = (0..size)
        .map(|i| (-((i as f64 - half).powi(2)) / (2.0 * sigma * sigma)).exp())
        .collect();
    let total: f64 = k.iter().sum();
    k.iter_mut().for_each(|v| *v /= total);
    k
}

/// Separable valid-mode windowed weighted means: horizontal pass then
/// vertical pass, output (h - win + 1) x (w - win + 1).
fn window_means(plane: &[f64], h: usize, w: usize, kernel: &[f64]) -> Vec<f64> {
    let win = kernel.len();
    let ow = w - win + 1;
    let oh = h - win + 1;
    let mut horiz = vec![0.0f64; h * ow];
    for y in 0..h {
        let row = &plane[y * w..(y + 1) * w];
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                acc += kv * row[x + k];
            }
            horiz[y * ow + x] = acc;
        }
    }
    let mut out = vec![0.0f64; oh * ow];
    for y in 0..oh {
        for x in 0..ow {
            let mut acc = 0.0;
            for (k, &kv) in kernel.iter().enumerate() {
                acc += kv * horiz[(y + k) * ow + x];
            }
            out[y * ow + x] = acc;
        }
    }
    out
}

/// Pearson correlation between the luminance planes of two layers; defined
/// as 0 when either plane is constant. Diagnostic only.
pub fn layer_correlation(l0: &ImageRgb, l1: &ImageRgb) -> Result<f64, MetricsError> {
    check_dims(l0.height, l0.width, l1.height, l1.width)?;
    let a = to_luminance(l0);
    let b = to_luminance(l1);
    let n = a.data.len() as f64;
    let mean_a: f64 = a.data.iter().map(|&v| v as f64).sum::<f64>() / n;
    let mean_b: f64 = b.data.iter().map(|&v| v as f64).sum::<f64>() / n;
    let mut var_a = 0.0;
    let mut var_b = 0.0;
    let mut cov = 0.0;
    for (&x, &y) in a.data.iter().zip(&b.data) {
        let dx = x as f64 - mean_a;
        let dy = y as f64 - mean_b;
        var_a += dx * dx;
        var_b += dy * dy;
        cov += dx * dy;
    }
    if var_a <= 1e-12 || var_b <= 1e-12 {
        return Ok(0.0);
    }
    Ok(cov / (var_a.sqrt() * var_b.sqrt()))
}

/// Score a predicted layer pair against ground truth: records for L0, L1,
/// and the pixelwise mean of both layers as "combined".
pub fn evaluate_pair(
    pred: (&ImageRgb, &ImageRgb),
    gt: (&ImageRgb, &ImageRgb),
) -> Result<Vec<MetricsRecord>, MetricsError> {
    let record = |layer, p: &ImageRgb, g: &ImageRgb| -> Result<MetricsRecord, MetricsError> {
        Ok(MetricsRecord {
            layer,
            psnr_color: psnr_color(p, g)?,
            psnr_illum: psnr_illum(p, g)?,
            ssim: ssim(p, g)?,
        })
    };
    let pred_mean = mean_image(pred.0, pred.1)?;
    let gt_mean = mean_image(gt.0, gt.1)?;
    Ok(vec![
        record(LayerKind::L0, pred.0, gt.0)?,
        record(LayerKind::L1, pred.1, gt.1)?,
        record(LayerKind::Combined, &pred_mean, &gt_mean)?,
    ])
}

/// Pixelwise mean of two images.
pub fn mean_image(a: &ImageRgb, b: &ImageRgb) -> Result<ImageRgb, MetricsError> {
    check_dims(a.height, a.width, b.height, b.width)?;
    let mut out = a.clone();
    for (o, &v) in out.data.iter_mut().zip(&b.data) {
        *o = (*o + v) / 2.0;
    }
    Ok(out)
}

/// Arithmetic mean of a record group into one labeled table row.
pub fn aggregate(method: &str, records: &[MetricsRecord]) -> Result<ReportRow, MetricsError> {
    if records.is_empty() {
        return Err(MetricsError::EmptyGroup);
    }
    let n = records.len() as f64;
    Ok(ReportRow {
        method: method.to_string(),
        psnr_color: records.iter().map(|r| r.psnr_color).sum::<f64>() / n,
        psnr_illum: records.iter().map(|r| r.psnr_illum).sum::<f64>() / n,
        ssim: records.iter().map(|r| r.ssim).sum::<f64>() / n,
        count: records.len(),
    })
}

type TableColumn = (&'static str, fn(&ReportRow) -> f64);

/// Render rows as a markdown score table, higher-is-better columns in a
/// fixed order, best value bold and second best underlined per column.
pub fn render_markdown_table(rows: &[ReportRow]) -> String {
    let columns: [TableColumn; 3] = [
        ("PSNR(color) ↑", |r| r.psnr_color),
        ("PSNR(ilum) ↑", |r| r.psnr_illum),
        ("SSIM ↑", |r| r.ssim),
    ];
    let mut out = String::from("| Method |");
    for (name, _) in &columns {
        out.push_str(&format!(" {name} |"));
    }
    out.push_str("\n|---|---|---|---|\n");

    // Per column: the maximum gets bold, the largest strictly-smaller value
    // gets underline.
    let mut best = [f64::NEG_INFINITY; 3];
    for row in rows {
        for (c, (_, get)) in columns.iter().enumerate() {
            best[c] = best[c].max(get(row));
        }
    }
    let mut second = [f64::NEG_INFINITY; 3];
    for row in rows {
        for (c, (_, get)) in columns.iter().enumerate() {
            let v = get(row);
            if v < best[c] {
                second[c] = second[c].max(v);
            }
        }
    }
    for row in rows {
        out.push_str(&format!("| {} |", row.method));
        for (c, (_, get)) in columns.iter().enumerate() {
            let v = get(row);
            let cell = format!("{v:.4}");
            let styled = if v == best[c] {
                format!("**{cell}**")
            } else if v == second[c] {
                format!("<u>{cell}</u>")
            } else {
                cell
            };
            out.push_str(&format!(" {styled} |"));
        }
        out.push('\n');
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;

    fn img_from(h: usize, w: usize, mut f: impl FnMut(usize, usize, usize) -> f32) -> ImageRgb {
        let mut img = ImageRgb::new(h, w, 0.0);
        for y in 0..h {
            for x in 0..w {
                img.set_pixel(y, x, [f(y, x, 0), f(y, x, 1), f(y, x, 2)]);
            }
        }
        img
    }

    fn random_img(seed: u64, h: usize, w: usize) -> ImageRgb {
        let mut rng = crate::rng::stream(seed);
        img_from(h, w, |_, _, _| rng.gen())
    }

    fn hflip(img: &ImageRgb) -> ImageRgb {
        img_from(img.height, img.width, |y, x, c| {
            img.pixel(y, img.width - 1 - x)[c]
        })
    }

    /// Direct windowed SSIM on luminance, no separable tricks: every window
    /// recomputes weighted means and central moments from scratch.
    fn ssim_reference(pred: &ImageRgb, gt: &ImageRgb) -> f64 {
        let a = to_luminance(pred);
        let b = to_luminance(gt);
        let (h, w) = (a.height, a.width);
        let k1d = gaussian_kernel(SSIM_WINDOW, SSIM_SIGMA);
        let mut weights = vec![0.0f64; SSIM_WINDOW * SSIM_WINDOW];
        for y in 0..SSIM_WINDOW {
            for x in 0..SSIM_WINDOW {
                weights[y * SSIM_WINDOW + x] = k1d[y] * k1d[x];
            }
        }
        let mut total = 0.0;
        let mut count = 0usize;
        for oy in 0..=h - SSIM_WINDOW {
            for ox in 0..=w - SSIM_WINDOW {
                let mut mx = 0.0;
                let mut my = 0.0;
                for wy in 0..SSIM_WINDOW {
                    for wx in 0..SSIM_WINDOW {
                        let wgt = weights[wy * SSIM_WINDOW + wx];
                        mx += wgt * a.at(oy + wy, ox + wx) as f64;
                        my += wgt * b.at(oy + wy, ox + wx) as f64;
                    }
                }
                let mut vx = 0.0;
                let mut vy = 0.0;
                let mut cov = 0.0;
                for wy in 0..SSIM_WINDOW {
                    for wx in 0..SSIM_WINDOW {
                        let wgt = weights[wy * SSIM_WINDOW + wx];
                        let dx = a.at(oy + wy, ox + wx) as f64 - mx;
                        let dy = b.at(oy + wy, ox + wx) as f64 - my;
                        vx += wgt * dx * dx;
                        vy += wgt * dy * dy;
                        cov += wgt * dx * dy;
                    }
                }
                total += ((2.0 * mx * my + SSIM_C1) * (2.0 * cov + SSIM_C2))
                    / ((mx * mx + my * my + SSIM_C1) * (vx + vy + SSIM_C2));
                count += 1;
            }
        }
        total / count as f64
    }

    #[test]
    fn mse_basic_cases() {
        let a = random_img(0, 8, 8);
        assert_eq!(mse(&a, &a).unwrap(), 0.0);

        let zero = ImageRgb::new(4, 4, 0.0);
        let tenth = ImageRgb::new(4, 4, 0.1);
        assert!((mse(&zero, &tenth).unwrap() - 0.01).abs() < 1e-9);

        let g0 = ImageGray {
            height: 1,
            width: 2,
            data: vec![0.0, 1.0],
        };
        let g1 = ImageGray {
            height: 1,
            width: 2,
            data: vec![1.0, 1.0],
        };
        assert_eq!(mse_gray(&g0, &g1).unwrap(), 0.5);

        let small = ImageRgb::new(2, 4, 0.0);
        assert!(mse(&zero, &small).is_err());
    }

    #[test]
    fn psnr_matches_analytic_offsets() {
        let a = ImageRgb::new(8, 8, 0.4);
        let b = ImageRgb::new(8, 8, 0.5);
        assert!((psnr_color(&a, &b).unwrap() - 20.0).abs() < 1e-6);

        let c = ImageRgb::new(8, 8, 0.0);
        let d = ImageRgb::new(8, 8, 0.5);
        assert!((psnr_color(&c, &d).unwrap() - 6.0206).abs() < 1e-3);

        assert_eq!(psnr_color(&a, &a).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn psnr_decreases_when_error_doubles() {
        for (e1, e2) in [(0.05f32, 0.1f32), (0.1, 0.2), (0.2, 0.4)] {
            let base = ImageRgb::new(8, 8, 0.3);
            let p1 = ImageRgb::new(8, 8, 0.3 + e1);
            let p2 = ImageRgb::new(8, 8, 0.3 + e2);
            let d = psnr_color(&p1, &base).unwrap() - psnr_color(&p2, &base).unwrap();
            assert!((d - 20.0 * 2.0f64.log10()).abs() < 1e-3, "drop {d}");
        }
    }

    #[test]
    fn psnr_illum_sees_only_luminance() {
        let gt = ImageRgb::new(8, 8, 0.4);
        let mut pred = gt.clone();
        for px in pred.data.chunks_exact_mut(3) {
            px[0] += 0.1;
        }
        let expected = 20.0 * (1.0f64 / 0.0299).log10();
        assert!((psnr_illum(&pred, &gt).unwrap() - expected).abs() < 1e-2);

        let g1 = ImageRgb::new(8, 8, 0.3);
        let g2 = ImageRgb::new(8, 8, 0.4);
        assert!((psnr_illum(&g1, &g2).unwrap() - 20.0).abs() < 1e-6);
        assert_eq!(psnr_illum(&gt, &gt).unwrap(), PSNR_CAP_DB);
    }

    #[test]
    fn ssim_identity_is_exactly_one() {
        let img = random_img(1, 16, 16);
        assert_eq!(ssim(&img, &img).unwrap(), 1.0);
    }

    #[test]
    fn ssim_is_symmetric_and_bounded() {
        for seed in 0..6u64 {
            let a = random_img(seed, 20, 14);
            let b = random_img(seed + 100, 20, 14);
            let ab = ssim(&a, &b).unwrap();
            let ba = ssim(&b, &a).unwrap();
            assert!((ab - ba).abs() <= 1e-9);
            assert!((-1.0..=1.0).contains(&ab));
            assert!(ab < 1.0 - 1e-9, "random pair should not be identical");
        }
    }

    #[test]
    fn ssim_matches_dense_reference() {
        for seed in 0..8u64 {
            let a = random_img(seed * 2, 32, 32);
            let b = random_img(seed * 2 + 1, 32, 32);
            let fast = ssim(&a, &b).unwrap();
            let slow = ssim_reference(&a, &b);
            assert!((fast - slow).abs() <= 1e-6, "seed {seed}: {fast} vs {slow}");
        }
    }

    #[test]
    fn ssim_rejects_images_below_window() {
        let a = ImageRgb::new(10, 16, 0.5);
        assert!(matches!(
            ssim(&a, &a),
            Err(MetricsError::TooSmallForWindow { .. })
        ));
    }

    #[test]
    fn correlation_extremes() {
        let a = random_img(5, 12, 12);
        assert!((layer_correlation(&a, &a).unwrap() - 1.0).abs() < 1e-9);

        let inverted = img_from(12, 12, |y, x, c| 1.0 - a.pixel(y, x)[c]);
        assert!((layer_correlation(&a, &inverted).unwrap() + 1.0).abs() < 1e-9);

        let flat = ImageRgb::new(12, 12, 0.7);
        assert_eq!(layer_correlation(&flat, &a).unwrap(), 0.0);
        assert_eq!(layer_correlation(&a, &flat).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_pair_composes_per_layer_scores() {
        let gt0 = random_img(7, 16, 16);
        let gt1 = random_img(8, 16, 16);
        let recs = evaluate_pair((&gt0, &gt1), (&gt0, &gt1)).unwrap();
        assert_eq!(recs.len(), 3);
        for r in &recs {
            assert_eq!(r.psnr_color, PSNR_CAP_DB);
            assert_eq!(r.ssim, 1.0);
        }

        // Keep values away from the clamp so the offset is exact.
        let gt0 = img_from(16, 16, |y, x, c| gt0.pixel(y, x)[c] * 0.8);
        let off = img_from(16, 16, |y, x, c| gt0.pixel(y, x)[c] + 0.1);
        let recs = evaluate_pair((&off, &gt1), (&gt0, &gt1)).unwrap();
        assert!((recs[0].psnr_color - 20.0).abs() < 1e-4);
        assert_eq!(recs[1].psnr_color, PSNR_CAP_DB);

        // The combined record is the metrics of the mean images.
        let pm = mean_image(&off, &gt1).unwrap();
        let gm = mean_image(&gt0, &gt1).unwrap();
        assert_eq!(recs[2].psnr_color, psnr_color(&pm, &gm).unwrap());
        assert_eq!(recs[2].ssim, ssim(&pm, &gm).unwrap());
    }

    #[test]
    fn metrics_are_flip_invariant() {
        let a = random_img(21, 24, 24);
        let b = random_img(22, 24, 24);
        let (fa, fb) = (hflip(&a), hflip(&b));
        assert!((psnr_color(&a, &b).unwrap() - psnr_color(&fa, &fb).unwrap()).abs() < 1e-9);
        assert!((psnr_illum(&a, &b).unwrap() - psnr_illum(&fa, &fb).unwrap()).abs() < 1e-9);
        assert!((ssim(&a, &b).unwrap() - ssim(&fa, &fb).unwrap()).abs() < 1e-9);
        assert!(
            (layer_correlation(&a, &b).unwrap() - layer_correlation(&fa, &fb).unwrap()).abs()
                < 1e-9
        );
    }

    fn record(layer: LayerKind, pc: f64, pi: f64, s: f64) -> MetricsRecord {
        MetricsRecord {
            layer,
            psnr_color: pc,
            psnr_illum: pi,
            ssim: s,
        }
    }

    #[test]
    fn aggregate_means_and_errors() {
        let r = record(LayerKind::L0, 20.0, 21.0, 0.9);
        let row = aggregate("m", std::slice::from_ref(&r)).unwrap();
        assert_eq!((row.psnr_color, row.psnr_illum, row.ssim), (20.0, 21.0, 0.9));
        assert_eq!(row.count, 1);

        let row = aggregate(
            "m",
            &[
                record(LayerKind::L0, 20.0, 22.0, 0.8),
                record(LayerKind::L0, 30.0, 24.0, 1.0),
            ],
        )
        .unwrap();
        assert_eq!(row.psnr_color, 25.0);
        assert_eq!(row.psnr_illum, 23.0);
        assert!((row.ssim - 0.9).abs() < 1e-12);

        // n identical records aggregate to that record.
        let row = aggregate("m", &vec![r.clone(); 7]).unwrap();
        assert!((row.psnr_color - 20.0).abs() < 1e-12);
        assert!((row.psnr_illum - 21.0).abs() < 1e-12);
        assert!((row.ssim - 0.9).abs() < 1e-12);

        assert!(matches!(aggregate("m", &[]), Err(MetricsError::EmptyGroup)));
    }

    fn table_fixture() -> Vec<ReportRow> {
        vec![
            ReportRow {
                method: "baseline".into(),
                psnr_color: 21.2469,
                psnr_illum: 22.8686,
                ssim: 0.9145,
                count: 64,
            },
            ReportRow {
                method: "best_l0".into(),
                psnr_color: 23.4026,
                psnr_illum: 25.0724,
                ssim: 0.9273,
                count: 64,
            },
            ReportRow {
                method: "best_l1".into(),
                psnr_color: 21.8596,
                psnr_illum: 23.3913,
                ssim: 0.9034,
                count: 64,
            },
        ]
    }

    #[test]
    fn markdown_table_styles_best_and_second_best() {
        let md = render_markdown_table(&table_fixture());
        assert!(md.starts_with("| Method | PSNR(color) ↑ | PSNR(ilum) ↑ | SSIM ↑ |"));
        for bold in ["**23.4026**", "**25.0724**", "**0.9273**"] {
            assert!(md.contains(bold), "missing {bold} in:\n{md}");
        }
        for under in ["<u>21.8596</u>", "<u>23.3913</u>", "<u>0.9145</u>"] {
            assert!(md.contains(under), "missing {under} in:\n{md}");
        }
        for plain in ["| 21.2469 |", "| 22.8686 |", "| 0.9034 |"] {
            assert!(md.contains(plain), "missing plain {plain} in:\n{md}");
        }
    }

    #[test]
    fn markdown_single_row_is_all_bold_no_underline() {
        let md = render_markdown_table(&table_fixture()[..1]);
        assert!(md.contains("**21.2469**"));
        assert!(md.contains("**22.8686**"));
        assert!(md.contains("**0.9145**"));
        assert!(!md.contains("<u>"));
    }
}
