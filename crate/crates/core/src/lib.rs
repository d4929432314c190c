//! Appearance-based person re-identification from dominant colors.
//!
//! The pipeline quantizes pedestrian images into 72 HSV colors, keeps the
//! eight most frequent colors of the upper and lower body as centroid
//! dominant color descriptors, extracts connected regions of those colors,
//! and scores probe/gallery pairs by fusing part-wise histogram
//! intersection with the vertical layout of matching regions. Rankings are
//! summarized as CMC curves.
//!
//! Everything downstream of quantization is generic over the [`Scalar`]
//! type; the aliases below fix it to `f64`.

pub mod colorquant;
pub mod dataset;
pub mod descriptor;
pub mod error;
pub mod evaluation;
pub mod imaging;
pub mod matching;
pub mod regions;
pub mod scalar;
pub mod signature;

pub use colorquant::{
    quantize_image, quantize_pixel, rgb_to_hsv, HsvColor, QuantizedColor, QuantizedImage,
};
pub use error::{Error, Result};
pub use imaging::{
    decode_ppm, encode_ppm, full_mask, resize_nearest, ForegroundMask, ImageBuffer, Mask,
};
pub use regions::{Connectivity, Part};
pub use scalar::Scalar;
pub use signature::{build_signature, ExtractionParams};

pub type ColorHistogram = descriptor::ColorHistogram<f64>;
pub type CentroidDcd = descriptor::CentroidDcd<f64>;
pub type DcdSet = descriptor::DcdSet<f64>;
pub type DominantColorRegion = regions::DominantColorRegion<f64>;
pub type RegionSet = regions::RegionSet<f64>;
pub type PersonSignature = signature::PersonSignature<f64>;
pub type MatchParams = matching::MatchParams<f64>;
pub type MatchScore = matching::MatchScore<f64>;
pub type RankedList = evaluation::RankedList<f64>;
pub type CmcCurve = evaluation::CmcCurve<f64>;
pub type Evaluation = evaluation::Evaluation<f64>;
pub type SignatureFile = dataset::SignatureFile<f64>;

/// Single-precision variants.
pub mod f32 {
    pub type DcdSet = crate::descriptor::DcdSet<f32>;
    pub type PersonSignature = crate::signature::PersonSignature<f32>;
    pub type MatchParams = crate::matching::MatchParams<f32>;
    pub type MatchScore = crate::matching::MatchScore<f32>;
    pub type CmcCurve = crate::evaluation::CmcCurve<f32>;
}
