//! Normalized 72-bin color histograms and centroid dominant color descriptors.

use std::ops::Range;

use crate::colorquant::{QuantizedColor, QuantizedImage, NUM_COLORS};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Default maximum number of centroid dominant colors per part.
pub const DEFAULT_MAX_COLORS: usize = 8;

/// Region of interest over a quantized image.
pub trait Roi {
    /// Rows that may contain selected cells.
    fn rows(&self, height: usize) -> Range<usize> {
        0..height
    }

    fn contains(&self, x: usize, y: usize) -> bool;
}

/// Selects every cell.
#[derive(Debug, Clone, Copy, Default)]
pub struct WholeImage;

impl Roi for WholeImage {
    fn contains(&self, _x: usize, _y: usize) -> bool {
        true
    }
}

/// Selects a half-open band of rows.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RowBand(pub Range<usize>);

impl Roi for RowBand {
    fn rows(&self, height: usize) -> Range<usize> {
        self.0.start.min(height)..self.0.end.min(height)
    }

    fn contains(&self, _x: usize, y: usize) -> bool {
        self.0.contains(&y)
    }
}

/// Selects cells for which the wrapped closure returns true.
pub struct Predicate<F>(pub F);

impl<F: Fn(usize, usize) -> bool> Roi for Predicate<F> {
    fn contains(&self, x: usize, y: usize) -> bool {
        (self.0)(x, y)
    }
}

/// Calls `f(x, y, color)` for every selected, unmasked cell in raster order.
pub(crate) fn for_each_selected(
    qimg: &QuantizedImage,
    roi: &impl Roi,
    mut f: impl FnMut(usize, usize, QuantizedColor),
) {
    let w = qimg.width();
    for y in roi.rows(qimg.height()) {
        for x in 0..w {
            if !roi.contains(x, y) {
                continue;
            }
            if let Some(c) = qimg.cell(y * w + x) {
                f(x, y, c);
            }
        }
    }
}

/// Normalized histogram over the 72 quantized colors.
#[derive(Debug, Clone, PartialEq)]
pub struct ColorHistogram<T> {
    bins: [T; NUM_COLORS],
    pixel_count: usize,
}

impl<T: Scalar> ColorHistogram<T> {
    /// Histogram from raw per-color counts.
    pub fn from_counts(counts: &[usize; NUM_COLORS]) -> Self {
        let total: usize = counts.iter().sum();
        let mut bins = [T::zero(); NUM_COLORS];
        if total > 0 {
            let denom = T::of_usize(total);
            for (bin, &n) in bins.iter_mut().zip(counts) {
                *bin = T::of_usize(n) / denom;
            }
        }
        ColorHistogram {
            bins,
            pixel_count: total,
        }
    }

    pub fn bins(&self) -> &[T; NUM_COLORS] {
        &self.bins
    }

    pub fn get(&self, color: QuantizedColor) -> T {
        self.bins[usize::from(color)]
    }

    pub fn pixel_count(&self) -> usize {
        self.pixel_count
    }
}

/// Histogram of selected, unmasked cells.
pub fn color_histogram<T: Scalar>(qimg: &QuantizedImage, roi: &impl Roi) -> ColorHistogram<T> {
    let mut counts = [0usize; NUM_COLORS];
    for_each_selected(qimg, roi, |_, _, c| counts[usize::from(c)] += 1);
    ColorHistogram::from_counts(&counts)
}

/// One dominant color and its share of the part.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CentroidDcd<T> {
    pub color: QuantizedColor,
    pub percentage: T,
}

/// Up to `M` centroid dominant colors, largest share first.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct DcdSet<T> {
    entries: Vec<CentroidDcd<T>>,
}

impl<T: Scalar> DcdSet<T> {
    /// Validates an externally supplied set (e.g. one read from disk).
    pub fn new(entries: Vec<CentroidDcd<T>>) -> Result<Self> {
        for (i, e) in entries.iter().enumerate() {
            if !(e.percentage > T::zero() && e.percentage <= T::one() + T::of(1e-9)) {
                return Err(Error::Schema(format!(
                    "dominant color {} has percentage {} outside (0, 1]",
                    e.color.index(),
                    e.percentage
                )));
            }
            if i > 0 && e.percentage > entries[i - 1].percentage {
                return Err(Error::Schema(
                    "dominant color percentages must be non-increasing".into(),
                ));
            }
            if entries[..i].iter().any(|prev| prev.color == e.color) {
                return Err(Error::Schema(format!(
                    "duplicate dominant color {}",
                    e.color.index()
                )));
            }
        }
        if !entries.is_empty() {
            let sum: T = entries.iter().map(|e| e.percentage).sum();
            if (sum - T::one()).abs() > T::of(1e-6) {
                return Err(Error::Schema(format!(
                    "dominant color percentages sum to {sum}, not 1"
                )));
            }
        }
        Ok(DcdSet { entries })
    }

    pub fn entries(&self) -> &[CentroidDcd<T>] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn contains(&self, color: QuantizedColor) -> bool {
        self.entries.iter().any(|e| e.color == color)
    }

    pub fn colors(&self) -> impl Iterator<Item = QuantizedColor> + '_ {
        self.entries.iter().map(|e| e.color)
    }

    /// Percentage of `color`, zero when absent.
    pub fn percentage(&self, color: QuantizedColor) -> T {
        self.entries
            .iter()
            .find(|e| e.color == color)
            .map_or(T::zero(), |e| e.percentage)
    }

    /// Dense 72-bin view of the set.
    pub fn to_dense(&self) -> [T; NUM_COLORS] {
        let mut dense = [T::zero(); NUM_COLORS];
        for e in &self.entries {
            dense[usize::from(e.color)] = e.percentage;
        }
        dense
    }
}

/// Divides each percentage by the sum of all of them.
pub fn renormalize<T: Scalar>(entries: &mut [CentroidDcd<T>]) {
    let sum: T = entries.iter().map(|e| e.percentage).sum();
    if sum > T::zero() {
        for e in entries.iter_mut() {
            e.percentage = e.percentage / sum;
        }
    }
}

/// Keeps the `max_colors` largest nonzero bins (ties by ascending color
/// index) and renormalizes them to sum to one.
pub fn extract_centroid_dcds<T: Scalar>(
    hist: &ColorHistogram<T>,
    max_colors: usize,
) -> Result<DcdSet<T>> {
    if max_colors == 0 {
        return Err(Error::arg("max_colors must be at least 1"));
    }
    let mut entries: Vec<CentroidDcd<T>> = hist
        .bins
        .iter()
        .enumerate()
        .filter(|(_, &p)| p > T::zero())
        .map(|(i, &p)| CentroidDcd {
            color: QuantizedColor::new(i as u8).expect("bin index < 72"),
            percentage: p,
        })
        .collect();
    entries.sort_by(|a, b| {
        b.percentage
            .partial_cmp(&a.percentage)
            .expect("histogram bins are finite")
            .then(a.color.cmp(&b.color))
    });
    entries.truncate(max_colors);
    renormalize(&mut entries);
    Ok(DcdSet { entries })
}
