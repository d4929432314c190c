//! Dominant color regions: connected components of pixels sharing one
//! centroid dominant color, with small components discarded as noise.

use serde::{Deserialize, Serialize};

use crate::colorquant::{QuantizedColor, QuantizedImage};
use crate::descriptor::{for_each_selected, DcdSet, Roi};
use crate::error::{Error, Result};
use crate::imaging::Mask;
use crate::scalar::Scalar;

/// Components smaller than this many pixels are noise.
pub const DEFAULT_MIN_AREA: usize = 5;

/// Pixel adjacency used for component labeling.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
pub enum Connectivity {
    /// N, S, E and W neighbors.
    Four,
    /// All eight neighbors.
    #[default]
    Eight,
}

impl Connectivity {
    pub fn as_u8(self) -> u8 {
        match self {
            Connectivity::Four => 4,
            Connectivity::Eight => 8,
        }
    }
}

impl TryFrom<u8> for Connectivity {
    type Error = Error;

    fn try_from(n: u8) -> Result<Self> {
        match n {
            4 => Ok(Connectivity::Four),
            8 => Ok(Connectivity::Eight),
            other => Err(Error::arg(format!(
                "connectivity must be 4 or 8, got {other}"
            ))),
        }
    }
}

/// Body part a region was extracted from.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Part {
    Upper,
    Lower,
}

/// (x, y)
pub type Pixel = (usize, usize);

/// A connected set of pixels, stored in raster order.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Component {
    pixels: Vec<Pixel>,
}

impl Component {
    pub fn new(mut pixels: Vec<Pixel>) -> Self {
        pixels.sort_unstable_by_key(|&(x, y)| (y, x));
        pixels.dedup();
        Component { pixels }
    }

    pub fn pixels(&self) -> &[Pixel] {
        &self.pixels
    }

    pub fn area(&self) -> usize {
        self.pixels.len()
    }
}

/// Cells that are selected, unmasked and equal to `color`.
pub fn color_mask(qimg: &QuantizedImage, color: QuantizedColor, roi: &impl Roi) -> Mask {
    let mut mask = Mask::new(
        qimg.width(),
        qimg.height(),
        vec![false; qimg.width() * qimg.height()],
    )
    .expect("quantized image dimensions are positive");
    for_each_selected(qimg, roi, |x, y, c| {
        if c == color {
            mask.set(x, y, true);
        }
    });
    mask
}

fn find(parent: &mut [usize], mut i: usize) -> usize {
    while parent[i] != i {
        parent[i] = parent[parent[i]];
        i = parent[i];
    }
    i
}

fn union(parent: &mut [usize], a: usize, b: usize) {
    let (ra, rb) = (find(parent, a), find(parent, b));
    if ra != rb {
        // keep the smaller (earlier in raster order) index as root
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        parent[hi] = lo;
    }
}

/// Two-pass union-find labeling. Components come out ordered by their
/// first pixel in raster order.
pub fn connected_components(mask: &Mask, connectivity: Connectivity) -> Vec<Component> {
    let (w, h) = (mask.width(), mask.height());
    let bits = mask.bits();
    let mut parent: Vec<usize> = (0..w * h).collect();

    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            if x > 0 && bits[i - 1] {
                union(&mut parent, i, i - 1);
            }
            if y > 0 {
                let up = i - w;
                if bits[up] {
                    union(&mut parent, i, up);
                }
                if connectivity == Connectivity::Eight {
                    if x > 0 && bits[up - 1] {
                        union(&mut parent, i, up - 1);
                    }
                    if x + 1 < w && bits[up + 1] {
                        union(&mut parent, i, up + 1);
                    }
                }
            }
        }
    }

    let mut slot = vec![usize::MAX; w * h];
    let mut components: Vec<Vec<Pixel>> = Vec::new();
    for y in 0..h {
        for x in 0..w {
            let i = y * w + x;
            if !bits[i] {
                continue;
            }
            let root = find(&mut parent, i);
            if slot[root] == usize::MAX {
                slot[root] = components.len();
                components.push(Vec::new());
            }
            components[slot[root]].push((x, y));
        }
    }
    components
        .into_iter()
        .map(|pixels| Component { pixels })
        .collect()
}

/// Drops components with fewer than `min_area` pixels, keeping order.
pub fn filter_noise(components: Vec<Component>, min_area: usize) -> Result<Vec<Component>> {
    if min_area == 0 {
        return Err(Error::arg("min_area must be at least 1"));
    }
    Ok(components
        .into_iter()
        .filter(|c| c.area() >= min_area)
        .collect())
}

/// Minimum bounding rectangle in full-image pixel coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Mbr {
    pub x: u32,
    pub y: u32,
    pub width: u32,
    pub height: u32,
}

/// A dominant color region. Only the vertical center and height of the MBR,
/// both as fractions of the image height, take part in matching.
#[derive(Debug, Clone, PartialEq)]
pub struct DominantColorRegion<T> {
    color: QuantizedColor,
    part: Part,
    area: u32,
    mbr: Mbr,
    center_y: T,
    mbr_height: T,
}

impl<T: Scalar> DominantColorRegion<T> {
    /// Builds a region and derives its normalized fields from the MBR.
    pub fn new(
        color: QuantizedColor,
        part: Part,
        area: u32,
        mbr: Mbr,
        image_height: usize,
    ) -> Result<Self> {
        if area == 0 || mbr.width == 0 || mbr.height == 0 {
            return Err(Error::Schema("region must cover at least one pixel".into()));
        }
        if u64::from(area) > u64::from(mbr.width) * u64::from(mbr.height) {
            return Err(Error::Schema(format!(
                "region area {area} exceeds its {}x{} bounding box",
                mbr.width, mbr.height
            )));
        }
        if image_height == 0 || (mbr.y + mbr.height) as usize > image_height {
            return Err(Error::Schema(format!(
                "region rows {}..{} fall outside image height {image_height}",
                mbr.y,
                mbr.y + mbr.height
            )));
        }
        let hh = T::of_usize(image_height);
        let two = T::one() + T::one();
        let center_y = (T::of(f64::from(mbr.y)) + T::of(f64::from(mbr.height)) / two) / hh;
        let mbr_height = T::of(f64::from(mbr.height)) / hh;
        Ok(DominantColorRegion {
            color,
            part,
            area,
            mbr,
            center_y,
            mbr_height,
        })
    }

    pub fn color(&self) -> QuantizedColor {
        self.color
    }

    pub fn part(&self) -> Part {
        self.part
    }

    pub fn area(&self) -> u32 {
        self.area
    }

    pub fn mbr(&self) -> Mbr {
        self.mbr
    }

    /// Vertical MBR center as a fraction of image height.
    pub fn center_y(&self) -> T {
        self.center_y
    }

    /// MBR height as a fraction of image height.
    pub fn mbr_height(&self) -> T {
        self.mbr_height
    }

    /// Same region shifted horizontally by `dx` pixels.
    pub fn translated_x(&self, dx: u32) -> Self {
        let mut r = self.clone();
        r.mbr.x += dx;
        r
    }
}

/// Bounding box and normalized vertical statistics of one component.
pub fn region_stats<T: Scalar>(
    component: &Component,
    color: QuantizedColor,
    part: Part,
    image_height: usize,
) -> Result<DominantColorRegion<T>> {
    let first = *component
        .pixels()
        .first()
        .ok_or_else(|| Error::arg("cannot describe an empty component"))?;
    let (mut x0, mut y0, mut x1, mut y1) = (first.0, first.1, first.0, first.1);
    for &(x, y) in component.pixels() {
        x0 = x0.min(x);
        x1 = x1.max(x);
        y0 = y0.min(y);
        y1 = y1.max(y);
    }
    let mbr = Mbr {
        x: x0 as u32,
        y: y0 as u32,
        width: (x1 - x0 + 1) as u32,
        height: (y1 - y0 + 1) as u32,
    };
    DominantColorRegion::new(color, part, component.area() as u32, mbr, image_height)
        .map_err(|e| Error::arg(e.to_string()))
}

/// Regions of one signature, ordered by part, then color, then the raster
/// position of each region's first pixel.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct RegionSet<T> {
    regions: Vec<DominantColorRegion<T>>,
}

impl<T: Scalar> RegionSet<T> {
    /// Wraps regions that are already in canonical order.
    pub fn from_ordered(regions: Vec<DominantColorRegion<T>>) -> Self {
        RegionSet { regions }
    }

    pub fn regions(&self) -> &[DominantColorRegion<T>] {
        &self.regions
    }

    pub fn len(&self) -> usize {
        self.regions.len()
    }

    pub fn is_empty(&self) -> bool {
        self.regions.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, DominantColorRegion<T>> {
        self.regions.iter()
    }

    /// Concatenates two sets and restores canonical order. Within one
    /// (part, color) the incoming order is kept.
    pub fn merge(mut self, other: RegionSet<T>) -> Self {
        self.regions.extend(other.regions);
        self.regions.sort_by_key(|r| (r.part, r.color));
        self
    }
}

impl<'a, T> IntoIterator for &'a RegionSet<T> {
    type Item = &'a DominantColorRegion<T>;
    type IntoIter = std::slice::Iter<'a, DominantColorRegion<T>>;

    fn into_iter(self) -> Self::IntoIter {
        self.regions.iter()
    }
}

/// Dominant color regions of one body part: for each centroid color,
/// label its pixels, drop noise components and measure the rest.
pub fn extract_dcrs<T: Scalar>(
    qimg: &QuantizedImage,
    dcds: &DcdSet<T>,
    part: Part,
    roi: &impl Roi,
    connectivity: Connectivity,
    min_area: usize,
) -> Result<RegionSet<T>> {
    let mut colors: Vec<QuantizedColor> = dcds.colors().collect();
    colors.sort_unstable();
    let mut regions = Vec::new();
    for color in colors {
        let mask = color_mask(qimg, color, roi);
        let components = filter_noise(connected_components(&mask, connectivity), min_area)?;
        for c in &components {
            regions.push(region_stats(c, color, part, qimg.height())?);
        }
    }
    Ok(RegionSet { regions })
}
