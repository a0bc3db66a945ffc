//! Two-layer document image toolkit: synthesize pages with graphic overlays
//! and capture-style degradations, train a small encoder-decoder that splits
//! an input into a text layer and an overlay layer, and score the separation
//! with PSNR and SSIM.

pub mod assets;
pub mod compose;
pub mod degrade;
pub mod metrics;
pub mod nn;
pub mod raster;
pub mod rng;
pub mod trainer;
