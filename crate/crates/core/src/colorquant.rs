//! RGB to HSV conversion and the 72-level (8 hue x 3 saturation x 3 value)
//! color quantization.
//!
//! Conversion runs in f64 regardless of the scalar type used downstream, so
//! the interval tests below see the same values on every platform.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::imaging::{ForegroundMask, ImageBuffer};

/// Number of saturation levels.
pub const SAT_LEVELS: u8 = 3;
/// Number of value levels.
pub const VAL_LEVELS: u8 = 3;
/// Number of hue levels.
pub const HUE_LEVELS: u8 = 8;
/// Number of quantized colors (`L`).
pub const NUM_COLORS: usize = (HUE_LEVELS * SAT_LEVELS * VAL_LEVELS) as usize;

/// Lower edges of hue bins 1..=7 in degrees; bin 0 wraps around [316, 20).
const HUE_EDGES: [f64; 8] = [20.0, 40.0, 75.0, 155.0, 190.0, 270.0, 295.0, 316.0];

/// An HSV triple. `hue` is `None` for achromatic colors (max == min).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HsvColor {
    /// Degrees in [0, 360).
    pub hue: Option<f64>,
    pub saturation: f64,
    pub value: f64,
}

/// Converts 8-bit RGB to HSV.
///
/// Hue comes out in [0, 360]; the `r == max && g == min` branch yields 360
/// for pure reds, which is folded to 0.
pub fn rgb_to_hsv(r: u8, g: u8, b: u8) -> HsvColor {
    let r = f64::from(r) / 255.0;
    let g = f64::from(g) / 255.0;
    let b = f64::from(b) / 255.0;
    let max = r.max(g).max(b);
    let min = r.min(g).min(b);
    let v = max;
    let delta = max - min;
    let s = if max == 0.0 { 0.0 } else { delta / max };

    let hue = if max == min {
        None
    } else {
        let h = if r == max && g != min {
            60.0 * (g - b) / delta
        } else if r == max && g == min {
            360.0 + 60.0 * (g - b) / delta
        } else if g == max {
            60.0 * (2.0 + (b - r) / delta)
        } else {
            60.0 * (4.0 + (r - g) / delta)
        };
        Some(if h >= 360.0 { h - 360.0 } else { h })
    };

    HsvColor {
        hue,
        saturation: s,
        value: v,
    }
}

/// Hue bin in 0..8. Achromatic hue goes to bin 0.
pub fn quantize_hue(hue: Option<f64>) -> u8 {
    let Some(h) = hue else { return 0 };
    if !(HUE_EDGES[0]..HUE_EDGES[7]).contains(&h) {
        return 0;
    }
    // h lies in [20, 316): count how many interior edges it has passed.
    HUE_EDGES[1..7]
        .iter()
        .take_while(|&&edge| h >= edge)
        .count() as u8
        + 1
}

/// [0, 0.2] -> 0, (0.2, 0.7] -> 1, (0.7, 1] -> 2
fn quantize_unit(x: f64) -> u8 {
    if x <= 0.2 {
        0
    } else if x <= 0.7 {
        1
    } else {
        2
    }
}

pub fn quantize_sat(s: f64) -> u8 {
    quantize_unit(s)
}

pub fn quantize_val(v: f64) -> u8 {
    quantize_unit(v)
}

/// A quantized color index `C = 9H + 3S + V` in [0, 71].
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuantizedColor(u8);

impl QuantizedColor {
    pub fn new(index: u8) -> Option<Self> {
        (usize::from(index) < NUM_COLORS).then_some(QuantizedColor(index))
    }

    /// Panics if any bin is out of range.
    pub fn from_bins(h: u8, s: u8, v: u8) -> Self {
        assert!(
            h < HUE_LEVELS && s < SAT_LEVELS && v < VAL_LEVELS,
            "bins out of range: ({h},{s},{v})"
        );
        QuantizedColor(SAT_LEVELS * VAL_LEVELS * h + VAL_LEVELS * s + v)
    }

    #[inline]
    pub fn index(self) -> u8 {
        self.0
    }

    /// (H, S, V) bins.
    pub fn bins(self) -> (u8, u8, u8) {
        let c = self.0;
        (c / 9, (c % 9) / 3, c % 3)
    }
}

impl From<QuantizedColor> for usize {
    fn from(c: QuantizedColor) -> usize {
        usize::from(c.0)
    }
}

pub fn quantize_hsv(hsv: HsvColor) -> QuantizedColor {
    QuantizedColor::from_bins(
        quantize_hue(hsv.hue),
        quantize_sat(hsv.saturation),
        quantize_val(hsv.value),
    )
}

pub fn quantize_pixel(r: u8, g: u8, b: u8) -> QuantizedColor {
    quantize_hsv(rgb_to_hsv(r, g, b))
}

const MASKED: u8 = u8::MAX;

/// Per-pixel quantized colors; background pixels are masked out.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct QuantizedImage {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl QuantizedImage {
    /// Builds an image from raw cells, `None` meaning masked.
    pub fn from_cells(
        width: usize,
        height: usize,
        cells: &[Option<QuantizedColor>],
    ) -> Result<Self> {
        if width == 0 || height == 0 || cells.len() != width * height {
            return Err(Error::arg(format!(
                "{width}x{height} quantized image needs {} cells, got {}",
                width * height,
                cells.len()
            )));
        }
        Ok(QuantizedImage {
            width,
            height,
            cells: cells
                .iter()
                .map(|c| c.map_or(MASKED, QuantizedColor::index))
                .collect(),
        })
    }

    #[inline]
    pub fn width(&self) -> usize {
        self.width
    }

    #[inline]
    pub fn height(&self) -> usize {
        self.height
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<QuantizedColor> {
        self.cell(y * self.width + x)
    }

    #[inline]
    pub(crate) fn cell(&self, idx: usize) -> Option<QuantizedColor> {
        match self.cells[idx] {
            MASKED => None,
            c => Some(QuantizedColor(c)),
        }
    }

    pub fn cells(&self) -> impl ExactSizeIterator<Item = Option<QuantizedColor>> + '_ {
        (0..self.cells.len()).map(|i| self.cell(i))
    }
}

/// Quantizes every foreground pixel; background becomes masked.
pub fn quantize_image(img: &ImageBuffer, mask: &ForegroundMask) -> Result<QuantizedImage> {
    if (img.width(), img.height()) != (mask.width(), mask.height()) {
        return Err(Error::arg(format!(
            "mask is {}x{} but image is {}x{}",
            mask.width(),
            mask.height(),
            img.width(),
            img.height()
        )));
    }
    let cells = img
        .pixels()
        .par_iter()
        .zip(mask.bits().par_iter())
        .map(|(&[r, g, b], &fg)| {
            if fg {
                quantize_pixel(r, g, b).index()
            } else {
                MASKED
            }
        })
        .collect();
    Ok(QuantizedImage {
        width: img.width(),
        height: img.height(),
        cells,
    })
}
