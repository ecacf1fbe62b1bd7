use super::raster::Raster;
use crate::error::{Error, Result};

/// Mean chroma per quarter of the object's axis-aligned bounding box, over object pixels
/// only. Output order is `[a, b]` for the upper-left, upper-right, lower-left and lower-right
/// quarters. Odd box sides give the extra column/row to the left/upper half. A quarter
/// without object pixels contributes zeros.
pub fn quarter_averages(raster: &Raster) -> Result<[f64; 8]> {
    let bb = raster
        .mask()
        .bounding_box()
        .ok_or_else(|| Error::DegenerateInput("raster has no object pixels".into()))?;
    let x_split = bb.x0 + bb.width().div_ceil(2);
    let y_split = bb.y0 + bb.height().div_ceil(2);

    let mut sums = [[0.0f64; 2]; 4];
    let mut counts = [0usize; 4];
    for y in bb.y0..=bb.y1 {
        for x in bb.x0..=bb.x1 {
            let Some(c) = raster.get(x, y) else { continue };
            let q = usize::from(x >= x_split) + 2 * usize::from(y >= y_split);
            sums[q][0] += c.a;
            sums[q][1] += c.b;
            counts[q] += 1;
        }
    }
    let mut out = [0.0; 8];
    for q in 0..4 {
        if counts[q] > 0 {
            out[2 * q] = sums[q][0] / counts[q] as f64;
            out[2 * q + 1] = sums[q][1] / counts[q] as f64;
        }
    }
    Ok(out)
}

/// Quarter averages scaled from 8-bit chroma into `[0, 1]`, the colour network's input.
pub fn color_input(raster: &Raster) -> Result<Vec<f64>> {
    Ok(quarter_averages(raster)?.iter().map(|v| v / 255.0).collect())
}
