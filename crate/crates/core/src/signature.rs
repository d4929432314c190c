//! Upper/lower body split and assembly of a pedestrian's appearance signature.

use std::ops::Range;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::colorquant::quantize_image;
use crate::descriptor::{
    color_histogram, extract_centroid_dcds, DcdSet, RowBand, DEFAULT_MAX_COLORS,
};
use crate::error::{Error, Result};
use crate::imaging::{
    full_mask, resize_mask_nearest, resize_nearest, ForegroundMask, ImageBuffer, DEFAULT_NORM_SIZE,
};
use crate::regions::{extract_dcrs, Connectivity, Part, RegionSet, DEFAULT_MIN_AREA};
use crate::scalar::Scalar;

/// Default fraction of the height given to the upper part.
pub const DEFAULT_TAU: f64 = 0.5;

/// Every knob that changes what a signature means.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExtractionParams {
    pub norm_width: usize,
    pub norm_height: usize,
    /// Upper part is rows [0, floor(tau * H)).
    pub tau: f64,
    pub max_colors: usize,
    pub connectivity: Connectivity,
    pub min_area: usize,
}

impl Default for ExtractionParams {
    fn default() -> Self {
        ExtractionParams {
            norm_width: DEFAULT_NORM_SIZE.0,
            norm_height: DEFAULT_NORM_SIZE.1,
            tau: DEFAULT_TAU,
            max_colors: DEFAULT_MAX_COLORS,
            connectivity: Connectivity::Eight,
            min_area: DEFAULT_MIN_AREA,
        }
    }
}

impl ExtractionParams {
    pub fn validate(&self) -> Result<()> {
        if self.norm_width == 0 || self.norm_height == 0 {
            return Err(Error::arg("normalized size must be positive"));
        }
        if !(self.tau > 0.0 && self.tau < 1.0) {
            return Err(Error::arg(format!(
                "tau must lie in (0, 1), got {}",
                self.tau
            )));
        }
        if self.max_colors == 0 {
            return Err(Error::arg("max_colors must be at least 1"));
        }
        if self.min_area == 0 {
            return Err(Error::arg("min_area must be at least 1"));
        }
        split_body(self.norm_height, self.tau).map(|_| ())
    }

    /// Short stable hash of the parameters. Signatures are comparable only
    /// when their fingerprints agree.
    pub fn fingerprint(&self) -> String {
        let canonical = format!(
            "domcolor-v1;w={};h={};tau={:?};m={};conn={};min_area={}",
            self.norm_width,
            self.norm_height,
            self.tau,
            self.max_colors,
            self.connectivity.as_u8(),
            self.min_area
        );
        let digest = Sha256::digest(canonical.as_bytes());
        digest[..8].iter().map(|b| format!("{b:02x}")).collect()
    }
}

/// Row ranges of the upper and lower body parts.
pub fn split_body(image_height: usize, tau: f64) -> Result<(Range<usize>, Range<usize>)> {
    if !(tau > 0.0 && tau < 1.0) {
        return Err(Error::arg(format!("tau must lie in (0, 1), got {tau}")));
    }
    let split = (tau * image_height as f64).floor() as usize;
    if split == 0 || split >= image_height {
        return Err(Error::arg(format!(
            "tau {tau} splits a {image_height}-row image into an empty part"
        )));
    }
    Ok((0..split, split..image_height))
}

/// Appearance signature of one pedestrian image.
#[derive(Debug, Clone, PartialEq)]
pub struct PersonSignature<T> {
    id: String,
    image_size: (usize, usize),
    upper_dcds: DcdSet<T>,
    lower_dcds: DcdSet<T>,
    regions: RegionSet<T>,
    params_fingerprint: String,
}

impl<T: Scalar> PersonSignature<T> {
    /// Assembles a signature, checking that every region's color is one of
    /// its part's dominant colors and that regions fit inside the image.
    pub fn from_parts(
        id: impl Into<String>,
        image_size: (usize, usize),
        upper_dcds: DcdSet<T>,
        lower_dcds: DcdSet<T>,
        regions: RegionSet<T>,
        params_fingerprint: impl Into<String>,
    ) -> Result<Self> {
        let id = id.into();
        for r in &regions {
            let dcds = match r.part() {
                Part::Upper => &upper_dcds,
                Part::Lower => &lower_dcds,
            };
            if !dcds.contains(r.color()) {
                return Err(Error::Schema(format!(
                    "signature {id}: region color {} is not a dominant color of its part",
                    r.color().index()
                )));
            }
            let m = r.mbr();
            if (m.x + m.width) as usize > image_size.0 || (m.y + m.height) as usize > image_size.1 {
                return Err(Error::Schema(format!(
                    "signature {id}: region lies outside the image"
                )));
            }
        }
        Ok(PersonSignature {
            id,
            image_size,
            upper_dcds,
            lower_dcds,
            regions,
            params_fingerprint: params_fingerprint.into(),
        })
    }

    pub fn id(&self) -> &str {
        &self.id
    }

    /// (width, height) after normalization.
    pub fn image_size(&self) -> (usize, usize) {
        self.image_size
    }

    pub fn upper_dcds(&self) -> &DcdSet<T> {
        &self.upper_dcds
    }

    pub fn lower_dcds(&self) -> &DcdSet<T> {
        &self.lower_dcds
    }

    pub fn dcds(&self, part: Part) -> &DcdSet<T> {
        match part {
            Part::Upper => &self.upper_dcds,
            Part::Lower => &self.lower_dcds,
        }
    }

    pub fn regions(&self) -> &RegionSet<T> {
        &self.regions
    }

    pub fn params_fingerprint(&self) -> &str {
        &self.params_fingerprint
    }

    /// Errors unless both signatures were extracted with the same parameters.
    pub fn check_compatible(&self, other: &Self) -> Result<()> {
        if self.params_fingerprint != other.params_fingerprint
            || self.image_size != other.image_size
        {
            return Err(Error::IncompatibleSignatures {
                left: self.params_fingerprint.clone(),
                right: other.params_fingerprint.clone(),
            });
        }
        Ok(())
    }

    /// Same signature with every region moved `dx` pixels to the right.
    /// Fails if a region would leave the image.
    pub fn translated_x(&self, dx: u32) -> Result<Self> {
        let regions = self.regions.iter().map(|r| r.translated_x(dx)).collect();
        PersonSignature::from_parts(
            self.id.clone(),
            self.image_size,
            self.upper_dcds.clone(),
            self.lower_dcds.clone(),
            RegionSet::from_ordered(regions),
            self.params_fingerprint.clone(),
        )
    }
}

/// Full extraction pipeline: normalize size, quantize, split into parts,
/// then per part compute the dominant colors and their regions.
pub fn build_signature<T: Scalar>(
    img: &ImageBuffer,
    mask: Option<&ForegroundMask>,
    id: impl Into<String>,
    params: &ExtractionParams,
) -> Result<PersonSignature<T>> {
    params.validate()?;
    let (w, h) = (params.norm_width, params.norm_height);
    let mask = match mask {
        Some(m) if (m.width(), m.height()) != (img.width(), img.height()) => {
            return Err(Error::arg(format!(
                "mask is {}x{} but image is {}x{}",
                m.width(),
                m.height(),
                img.width(),
                img.height()
            )))
        }
        Some(m) => resize_mask_nearest(m, w, h)?,
        None => full_mask(w, h)?,
    };
    let img = resize_nearest(img, w, h)?;
    let qimg = quantize_image(&img, &mask)?;
    let (upper_rows, lower_rows) = split_body(h, params.tau)?;

    let mut parts = Vec::with_capacity(2);
    for (part, rows) in [(Part::Upper, upper_rows), (Part::Lower, lower_rows)] {
        let band = RowBand(rows);
        let hist = color_histogram::<T>(&qimg, &band);
        let dcds = extract_centroid_dcds(&hist, params.max_colors)?;
        let regions = extract_dcrs(
            &qimg,
            &dcds,
            part,
            &band,
            params.connectivity,
            params.min_area,
        )?;
        parts.push((dcds, regions));
    }
    let (lower_dcds, lower_regions) = parts.pop().expect("two parts");
    let (upper_dcds, upper_regions) = parts.pop().expect("two parts");

    PersonSignature::from_parts(
        id,
        (w, h),
        upper_dcds,
        lower_dcds,
        upper_regions.merge(lower_regions),
        params.fingerprint(),
    )
}
