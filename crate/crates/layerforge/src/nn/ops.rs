//! Differentiable building blocks: 3x3 convolution, leaky rectifier,
//! nearest-neighbor upsampling, channel split, and the per-layer L1 losses.
//! Every forward here has an exact analytic backward.

use serde::{Deserialize, Serialize};

use super::tensor::Tensor4;
use super::NnError;

pub const LEAKY_SLOPE: f64 = 0.1;

/// One 3x3 convolution layer: zero padding 1, stride 1 or 2.
/// Weights are `[out_ch, in_ch, 3, 3]` row-major, one bias per output channel.
#[derive(Clone, Debug, PartialEq)]
pub struct Conv2d {
    pub in_ch: usize,
    pub out_ch: usize,
    pub stride: usize,
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

impl Conv2d {
    pub fn zeros(in_ch: usize, out_ch: usize, stride: usize) -> Conv2d {
        assert!(stride == 1 || stride == 2, "stride must be 1 or 2");
        Conv2d {
            in_ch,
            out_ch,
            stride,
            weight: vec![0.0; out_ch * in_ch * 9],
            bias: vec![0.0; out_ch],
        }
    }
}

/// Gradients for one conv layer, same layout as the parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ConvGrads {
    pub weight: Vec<f64>,
    pub bias: Vec<f64>,
}

/// Output range `[lo, hi)` for kernel offset `k` so that the sampled input
/// index `o * stride + k - 1` stays inside `[0, in_len)`.
fn valid_range(k: usize, stride: usize, in_len: usize, out_len: usize) -> (usize, usize) {
    // For stride 1 or 2, `o * stride + k - 1 >= 0` means o >= 1 when k == 0.
    let lo = if k == 0 { 1 } else { 0 };
    let hi_inclusive = in_len as i64 - k as i64;
    if hi_inclusive < 0 {
        return (0, 0);
    }
    let hi = ((hi_inclusive as usize) / stride + 1).min(out_len);
    (lo.min(hi), hi)
}

pub fn conv2d_forward(x: &Tensor4, conv: &Conv2d) -> Result<Tensor4, NnError> {
    if x.c != conv.in_ch {
        return Err(NnError::Shape(format!(
            "conv expects {} input channels, got {}",
            conv.in_ch, x.c
        )));
    }
    if x.h % conv.stride != 0 || x.w % conv.stride != 0 {
        return Err(NnError::Shape(format!(
            "input {}x{} not divisible by stride {}",
            x.h, x.w, conv.stride
        )));
    }
    let s = conv.stride;
    let (oh, ow) = (x.h / s, x.w / s);
    let mut out = Tensor4::zeros(x.n, conv.out_ch, oh, ow);
    for n in 0..x.n {
        for oc in 0..conv.out_ch {
            out.plane_mut(n, oc).fill(conv.bias[oc]);
        }
    }
    for n in 0..x.n {
        for ic in 0..conv.in_ch {
            let xpl = x.plane(n, ic).to_vec();
            for oc in 0..conv.out_ch {
                let w9 = &conv.weight[(oc * conv.in_ch + ic) * 9..(oc * conv.in_ch + ic) * 9 + 9];
                let opl = out.plane_mut(n, oc);
                for ky in 0..3 {
                    let (oy_lo, oy_hi) = valid_range(ky, s, x.h, oh);
                    for kx in 0..3 {
                        let wv = w9[ky * 3 + kx];
                        if wv == 0.0 {
                            continue;
                        }
                        let (ox_lo, ox_hi) = valid_range(kx, s, x.w, ow);
                        if ox_lo >= ox_hi {
                            continue;
                        }
                        for oy in oy_lo..oy_hi {
                            let iy = oy * s + ky - 1;
                            let xbase = iy * x.w + (ox_lo * s + kx - 1);
                            let obase = oy * ow;
                            if s == 1 {
                                let xrow = &xpl[xbase..xbase + (ox_hi - ox_lo)];
                                let orow = &mut opl[obase + ox_lo..obase + ox_hi];
                                for (o, xv) in orow.iter_mut().zip(xrow) {
                                    *o += wv * xv;
                                }
                            } else {
                                for (j, o) in opl[obase + ox_lo..obase + ox_hi].iter_mut().enumerate() {
                                    *o += wv * xpl[xbase + j * s];
                                }
                            }
                        }
                    }
                }
            }
        }
    }
    Ok(out)
}

/// Exact gradients of [`conv2d_forward`] with respect to input, weights, and
/// bias, given the upstream gradient `grad_out`.
pub fn conv2d_backward(
    x: &Tensor4,
    conv: &Conv2d,
    grad_out: &Tensor4,
) -> Result<(Tensor4, ConvGrads), NnError> {
    let s = conv.stride;
    let (oh, ow) = (x.h / s, x.w / s);
    if grad_out.dims() != (x.n, conv.out_ch, oh, ow) {
        return Err(NnError::Shape(format!(
            "grad_out dims {:?} do not match conv output {:?}",
            grad_out.dims(),
            (x.n, conv.out_ch, oh, ow)
        )));
    }
    if x.c != conv.in_ch {
        return Err(NnError::Shape(format!(
            "conv expects {} input channels, got {}",
            conv.in_ch, x.c
        )));
    }
    let mut grad_x = Tensor4::zeros(x.n, x.c, x.h, x.w);
    let mut grads = ConvGrads {
        weight: vec![0.0; conv.weight.len()],
        bias: vec![0.0; conv.bias.len()],
    };

    for n in 0..x.n {
        for oc in 0..conv.out_ch {
            grads.bias[oc] += grad_out.plane(n, oc).iter().sum::<f64>();
        }
    }

    for n in 0..x.n {
        for ic in 0..conv.in_ch {
            let xpl = x.plane(n, ic).to_vec();
            for oc in 0..conv.out_ch {
                let gpl = grad_out.plane(n, oc).to_vec();
                let wbase = (oc * conv.in_ch + ic) * 9;
                let gxpl = grad_x.plane_mut(n, ic);
                for ky in 0..3 {
                    let (oy_lo, oy_hi) = valid_range(ky, s, x.h, oh);
                    for kx in 0..3 {
                        let (ox_lo, ox_hi) = valid_range(kx, s, x.w, ow);
                        if ox_lo >= ox_hi || oy_lo >= oy_hi {
                            continue;
                        }
                        let wv = conv.weight[wbase + ky * 3 + kx];
                        let mut wacc = 0.0f64;
                        for oy in oy_lo..oy_hi {
                            let iy = oy * s + ky - 1;
                            let xbase = iy * x.w + (ox_lo * s + kx - 1);
                            let grow = &gpl[oy * ow + ox_lo..oy * ow + ox_hi];
                            if s == 1 {
                                let xrow = &xpl[xbase..xbase + grow.len()];
                                let gxrow = &mut gxpl[xbase..xbase + grow.len()];
                                for ((g, xv), gx) in grow.iter().zip(xrow).zip(gxrow) {
                                    wacc += g * xv;
                                    *gx += wv * g;
                                }
                            } else {
                                for (j, g) in grow.iter().enumerate() {
                                    wacc += g * xpl[xbase + j * s];
                                    gxpl[xbase + j * s] += wv * g;
                                }
                            }
                        }
                        grads.weight[wbase + ky * 3 + kx] += wacc;
                    }
                }
            }
        }
    }
    Ok((grad_x, grads))
}

/// Leaky rectifier, slope [`LEAKY_SLOPE`] for negative inputs.
pub fn leaky_relu(x: &Tensor4) -> Tensor4 {
    let mut out = x.clone();
    for v in out.data.iter_mut() {
        if *v < 0.0 {
            *v *= LEAKY_SLOPE;
        }
    }
    out
}

/// Backward of [`leaky_relu`] given the forward *input*.
pub fn leaky_relu_backward(x: &Tensor4, grad_out: &Tensor4) -> Tensor4 {
    debug_assert_eq!(x.dims(), grad_out.dims());
    let mut out = grad_out.clone();
    for (g, &v) in out.data.iter_mut().zip(&x.data) {
        if v < 0.0 {
            *g *= LEAKY_SLOPE;
        }
    }
    out
}

/// Nearest-neighbor 2x upsample.
pub fn upsample_nearest2(x: &Tensor4) -> Tensor4 {
    let mut out = Tensor4::zeros(x.n, x.c, x.h * 2, x.w * 2);
    for n in 0..x.n {
        for c in 0..x.c {
            let src = x.plane(n, c).to_vec();
            let dst = out.plane_mut(n, c);
            for y in 0..x.h * 2 {
                let srow = &src[(y / 2) * x.w..(y / 2 + 1) * x.w];
                let drow = &mut dst[y * x.w * 2..(y + 1) * x.w * 2];
                for (xcol, d) in drow.iter_mut().enumerate() {
                    *d = srow[xcol / 2];
                }
            }
        }
    }
    out
}

/// Backward of [`upsample_nearest2`]: each source cell collects its 2x2 fan-out.
pub fn upsample_nearest2_backward(grad_out: &Tensor4) -> Tensor4 {
    assert!(grad_out.h % 2 == 0 && grad_out.w % 2 == 0);
    let (h, w) = (grad_out.h / 2, grad_out.w / 2);
    let mut out = Tensor4::zeros(grad_out.n, grad_out.c, h, w);
    for n in 0..grad_out.n {
        for c in 0..grad_out.c {
            let src = grad_out.plane(n, c).to_vec();
            let dst = out.plane_mut(n, c);
            for y in 0..grad_out.h {
                let drow = &mut dst[(y / 2) * w..(y / 2 + 1) * w];
                let srow = &src[y * grad_out.w..(y + 1) * grad_out.w];
                for (xcol, &g) in srow.iter().enumerate() {
                    drow[xcol / 2] += g;
                }
            }
        }
    }
    out
}

/// Slice a 6-channel prediction into its two 3-channel layers.
pub fn split_layers(out: &Tensor4) -> Result<(Tensor4, Tensor4), NnError> {
    if out.c != 6 {
        return Err(NnError::Shape(format!(
            "layer split expects 6 channels, got {}",
            out.c
        )));
    }
    let mut l0 = Tensor4::zeros(out.n, 3, out.h, out.w);
    let mut l1 = Tensor4::zeros(out.n, 3, out.h, out.w);
    for n in 0..out.n {
        for c in 0..3 {
            l0.plane_mut(n, c).copy_from_slice(out.plane(n, c));
            l1.plane_mut(n, c).copy_from_slice(out.plane(n, c + 3));
        }
    }
    Ok((l0, l1))
}

/// Stack two tensors along the channel axis; inverse of [`split_layers`].
pub fn concat_channels(a: &Tensor4, b: &Tensor4) -> Result<Tensor4, NnError> {
    if a.n != b.n || a.h != b.h || a.w != b.w {
        return Err(NnError::Shape(format!(
            "concat dims {:?} vs {:?}",
            a.dims(),
            b.dims()
        )));
    }
    let mut out = Tensor4::zeros(a.n, a.c + b.c, a.h, a.w);
    for n in 0..a.n {
        for c in 0..a.c {
            out.plane_mut(n, c).copy_from_slice(a.plane(n, c));
        }
        for c in 0..b.c {
            out.plane_mut(n, a.c + c).copy_from_slice(b.plane(n, c));
        }
    }
    Ok(out)
}

/// Mean absolute error and its subgradient: `value = mean |pred - gt|`,
/// `grad = sign(pred - gt) / count` with `sign(0) = 0`.
pub fn l1_loss(pred: &Tensor4, gt: &Tensor4) -> Result<(f64, Tensor4), NnError> {
    if pred.dims() != gt.dims() {
        return Err(NnError::Shape(format!(
            "l1 loss dims {:?} vs {:?}",
            pred.dims(),
            gt.dims()
        )));
    }
    let count = pred.len() as f64;
    let mut grad = Tensor4::zeros(pred.n, pred.c, pred.h, pred.w);
    let mut sum = 0.0f64;
    for (i, (&p, &g)) in pred.data.iter().zip(&gt.data).enumerate() {
        let d = p - g;
        sum += d.abs();
        grad.data[i] = if d > 0.0 {
            1.0 / count
        } else if d < 0.0 {
            -1.0 / count
        } else {
            0.0
        };
    }
    Ok((sum / count, grad))
}

/// Per-layer losses and their sum, Eq-style dual objective.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LossBreakdown {
    pub loss_l0: f64,
    pub loss_l1: f64,
    pub total: f64,
}

/// Split the 6-channel output, take the L1 loss against each layer's ground
/// truth, and add them. The returned gradient is with respect to `out`.
pub fn total_loss(
    out: &Tensor4,
    gt_l0: &Tensor4,
    gt_l1: &Tensor4,
) -> Result<(LossBreakdown, Tensor4), NnError> {
    let (pred_l0, pred_l1) = split_layers(out)?;
    let (loss_l0, grad_l0) = l1_loss(&pred_l0, gt_l0)?;
    let (loss_l1, grad_l1) = l1_loss(&pred_l1, gt_l1)?;
    let grad = concat_channels(&grad_l0, &grad_l1)?;
    Ok((
        LossBreakdown {
            loss_l0,
            loss_l1,
            total: loss_l0 + loss_l1,
        },
        grad,
    ))
}
