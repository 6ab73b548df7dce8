//! Deterministic binary PPM rendering of pattern layers.
//!
//! Color table v1 (robinson layer): blue corners blue, red corners red
//! (valuation 1 darkened), arm symbols on a gray ramp by arrow count,
//! blank white. Other layers render blank white, non-blank codes on a
//! deterministic palette derived from the code value.

use crate::pattern::Pattern;
use crate::robinson::{decode_tile, TileKind, LAYER_ROBINSON};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum RenderError {
    #[error("layer {0:?} is absent or empty")]
    UnsupportedLayer(String),
}

fn robinson_color(code: u32) -> [u8; 3] {
    match decode_tile(code) {
        None => [255, 255, 255],
        Some(t) => match t.kind {
            TileKind::Corner { red: false, .. } => [40, 90, 220],
            TileKind::Corner { red: true, bit, .. } => {
                if bit == 1 {
                    [170, 20, 20]
                } else {
                    [230, 90, 90]
                }
            }
            TileKind::Arm { .. } => {
                let g = 230 - 22 * t.arrow_count();
                [g, g, g]
            }
        },
    }
}

fn generic_color(code: u32) -> [u8; 3] {
    if code == 0 {
        return [255, 255, 255];
    }
    // a fixed low-discrepancy palette keyed by the code
    let h = code.wrapping_mul(0x9e37_79b9);
    [64 + (h >> 8) as u8 % 160, 64 + (h >> 16) as u8 % 160, 64 + (h >> 24) as u8 % 160]
}

/// Render one layer of a 2D pattern (or one section of a 3D one) as a binary
/// PPM, one pixel per position, north up.
pub fn render_ppm(p: &Pattern, layer_name: &str, scale: u32) -> Result<Vec<u8>, RenderError> {
    let layer = p
        .layer_index(layer_name)
        .ok_or_else(|| RenderError::UnsupportedLayer(layer_name.to_string()))?;
    let b = p.support.base;
    if b.w <= 0 || b.h <= 0 {
        return Err(RenderError::UnsupportedLayer(layer_name.to_string()));
    }
    let scale = scale.max(1) as i64;
    let (w, h) = (b.w * scale, b.h * scale);
    let mut out = Vec::with_capacity(64 + (w * h * 3) as usize);
    out.extend_from_slice(format!("P6\n{w} {h}\n255\n").as_bytes());
    let robinson = layer_name == LAYER_ROBINSON;
    for py in 0..h {
        let y = b.y1() - py / scale; // image rows top-down, grid rows north up
        for px in 0..w {
            let x = b.x0 + px / scale;
            let code = p.get(layer, crate::geom::Pos2::new(x, y));
            let c = if robinson { robinson_color(code) } else { generic_color(code) };
            out.extend_from_slice(&c);
        }
    }
    Ok(out)
}
