//! Probe-vs-gallery similarity: part-wise dominant color histogram
//! intersection fused with the vertical layout of dominant color regions.

use crate::colorquant::NUM_COLORS;
use crate::descriptor::DcdSet;
use crate::error::{Error, Result};
use crate::regions::{DominantColorRegion, RegionSet};
use crate::scalar::Scalar;
use crate::signature::PersonSignature;

/// Fusion weights.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchParams<T> {
    /// Weight of the histogram similarity against the region layout term.
    pub alpha: T,
    /// Weight of the center distance against the height difference.
    pub beta: T,
    /// Weight of the upper part against the lower part.
    pub gamma: T,
    /// Only pair regions that come from the same body part.
    pub same_part_only: bool,
}

impl<T: Scalar> Default for MatchParams<T> {
    fn default() -> Self {
        MatchParams {
            alpha: T::of(0.4),
            beta: T::of(0.6),
            gamma: T::of(0.55),
            same_part_only: false,
        }
    }
}

impl<T: Scalar> MatchParams<T> {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("alpha", self.alpha),
            ("beta", self.beta),
            ("gamma", self.gamma),
        ] {
            if !(v > T::zero() && v < T::one()) {
                return Err(Error::arg(format!("{name} must lie in (0, 1), got {v}")));
            }
        }
        Ok(())
    }
}

/// All three quantities behind one comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MatchScore<T> {
    /// Weighted histogram intersection, larger is more similar.
    pub dch: T,
    /// Mean region layout dissimilarity, smaller is more similar.
    pub dcr_dissim: T,
    /// `alpha * dch + (1 - alpha) * (1 - dcr_dissim)`, larger is more similar.
    pub combined: T,
}

// Each term is bounded by 1 analytically; rounding can overshoot by an ulp.
#[inline]
fn unit<T: Scalar>(x: T) -> T {
    x.max(T::zero()).min(T::one())
}

/// Histogram intersection of two descriptor sets; absent colors count as 0.
/// Summed over color index so the result is symmetric bit for bit.
pub fn part_hist_similarity<T: Scalar>(a: &DcdSet<T>, b: &DcdSet<T>) -> T {
    let (da, db) = (a.to_dense(), b.to_dense());
    let sum = (0..NUM_COLORS).fold(T::zero(), |acc, i| acc + da[i].min(db[i]));
    unit(sum)
}

/// `gamma * upper + (1 - gamma) * lower` part histogram similarity.
pub fn dch_similarity<T: Scalar>(
    a: &PersonSignature<T>,
    b: &PersonSignature<T>,
    gamma: T,
) -> Result<T> {
    a.check_compatible(b)?;
    let upper = part_hist_similarity(a.upper_dcds(), b.upper_dcds());
    let lower = part_hist_similarity(a.lower_dcds(), b.lower_dcds());
    Ok(unit(gamma * upper + (T::one() - gamma) * lower))
}

/// `beta * |dy| + (1 - beta) * |dh|` on height-normalized MBR centers and
/// heights. Horizontal position and width are ignored.
pub fn region_dissimilarity<T: Scalar>(
    u: &DominantColorRegion<T>,
    w: &DominantColorRegion<T>,
    beta: T,
) -> T {
    let dy = (u.center_y() - w.center_y()).abs();
    let dh = (u.mbr_height() - w.mbr_height()).abs();
    unit(beta * dy + (T::one() - beta) * dh)
}

/// For each probe region, the smallest dissimilarity to a gallery region of
/// the same color (1 when there is none), averaged over probe regions.
/// Not symmetric: the probe side drives the sum.
pub fn dcr_dissimilarity<T: Scalar>(ra: &RegionSet<T>, rb: &RegionSet<T>, beta: T) -> T {
    dcr_dissimilarity_with(ra, rb, beta, false)
}

/// [`dcr_dissimilarity`] with optional restriction to same-part pairs.
pub fn dcr_dissimilarity_with<T: Scalar>(
    ra: &RegionSet<T>,
    rb: &RegionSet<T>,
    beta: T,
    same_part_only: bool,
) -> T {
    match (ra.is_empty(), rb.is_empty()) {
        (true, true) => return T::zero(),
        (true, false) | (false, true) => return T::one(),
        (false, false) => {}
    }
    let total = ra.iter().fold(T::zero(), |acc, u| {
        let best = rb
            .iter()
            .filter(|w| w.color() == u.color() && (!same_part_only || w.part() == u.part()))
            .map(|w| region_dissimilarity(u, w, beta))
            .fold(None, |best: Option<T>, d| {
                Some(best.map_or(d, |b| b.min(d)))
            });
        acc + best.unwrap_or_else(T::one)
    });
    unit(total / T::of_usize(ra.len()))
}

/// Fused similarity of a probe and a gallery signature.
pub fn combined_score<T: Scalar>(
    probe: &PersonSignature<T>,
    gallery: &PersonSignature<T>,
    params: &MatchParams<T>,
) -> Result<MatchScore<T>> {
    let dch = dch_similarity(probe, gallery, params.gamma)?;
    let dcr_dissim = dcr_dissimilarity_with(
        probe.regions(),
        gallery.regions(),
        params.beta,
        params.same_part_only,
    );
    Ok(MatchScore {
        dch,
        dcr_dissim,
        combined: fuse(dch, dcr_dissim, params.alpha),
    })
}

/// `alpha * dch + (1 - alpha) * (1 - dcr_dissim)`
pub fn fuse<T: Scalar>(dch: T, dcr_dissim: T, alpha: T) -> T {
    unit(alpha * dch + (T::one() - alpha) * (T::one() - dcr_dissim))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::colorquant::QuantizedColor;
    use crate::descriptor::CentroidDcd;
    use crate::regions::{Mbr, Part};

    fn qc(i: u8) -> QuantizedColor {
        QuantizedColor::new(i).unwrap()
    }

    fn set(entries: &[(u8, f64)]) -> DcdSet<f64> {
        DcdSet::new(
            entries
                .iter()
                .map(|&(c, p)| CentroidDcd {
                    color: qc(c),
                    percentage: p,
                })
                .collect(),
        )
        .unwrap()
    }

    fn region(
        color: u8,
        part: Part,
        y: u32,
        height: u32,
        image_height: usize,
    ) -> DominantColorRegion<f64> {
        let mbr = Mbr {
            x: 0,
            y,
            width: 1,
            height,
        };
        DominantColorRegion::new(qc(color), part, height, mbr, image_height).unwrap()
    }

    fn sig(
        upper: DcdSet<f64>,
        lower: DcdSet<f64>,
        regions: Vec<DominantColorRegion<f64>>,
    ) -> PersonSignature<f64> {
        PersonSignature::from_parts(
            "s",
            (4, 128),
            upper,
            lower,
            RegionSet::from_ordered(regions),
            "fp",
        )
        .unwrap()
    }

    #[test]
    fn hist_similarity_examples() {
        let a = set(&[(8, 0.6), (0, 0.4)]);
        let b = set(&[(35, 0.7), (8, 0.3)]);
        assert_eq!(part_hist_similarity(&a, &a), 1.0);
        assert_eq!(part_hist_similarity(&a, &set(&[(1, 1.0)])), 0.0);
        assert!((part_hist_similarity(&a, &b) - 0.3).abs() < 1e-15);
        assert_eq!(
            part_hist_similarity(&DcdSet::default(), &DcdSet::<f64>::default()),
            0.0
        );
    }

    #[test]
    fn dch_examples() {
        let red = set(&[(8, 1.0)]);
        let green = set(&[(35, 1.0)]);
        let a = sig(red.clone(), green.clone(), vec![]);
        let b = sig(red.clone(), red.clone(), vec![]);
        assert_eq!(dch_similarity(&a, &a, 0.55).unwrap(), 1.0);
        assert!((dch_similarity(&a, &b, 0.55).unwrap() - 0.55).abs() < 1e-15);
        let empty = sig(DcdSet::default(), DcdSet::default(), vec![]);
        assert_eq!(dch_similarity(&a, &empty, 0.55).unwrap(), 0.0);
    }

    #[test]
    fn fingerprint_mismatch_is_an_error() {
        let a = sig(set(&[(8, 1.0)]), set(&[(8, 1.0)]), vec![]);
        let b = PersonSignature::from_parts(
            "b",
            (4, 128),
            DcdSet::default(),
            DcdSet::default(),
            RegionSet::default(),
            "other",
        )
        .unwrap();
        assert!(matches!(
            dch_similarity(&a, &b, 0.5),
            Err(Error::IncompatibleSignatures { .. })
        ));
        assert!(combined_score(&a, &b, &MatchParams::default()).is_err());
    }

    #[test]
    fn region_dissimilarity_examples() {
        let u = region(8, Part::Upper, 5, 10, 128);
        assert_eq!(region_dissimilarity(&u, &u, 0.6), 0.0);
        // centers 10 and 30 with equal heights
        let a = region(8, Part::Upper, 5, 10, 128);
        let b = region(8, Part::Upper, 25, 10, 128);
        assert!((region_dissimilarity(&a, &b, 0.6) - 0.09375).abs() < 1e-15);
        // 1-row strips at the top and bottom rows: only the center term is left
        let top = region(8, Part::Upper, 0, 1, 128);
        let bottom = region(8, Part::Lower, 127, 1, 128);
        assert!((region_dissimilarity(&top, &bottom, 0.6) - 0.6 * 127.0 / 128.0).abs() < 1e-15);
        // center term saturates while heights differ by almost the whole image
        let tall = region(8, Part::Upper, 0, 1000, 1000);
        let dot = region(8, Part::Lower, 999, 1, 1000);
        let d = region_dissimilarity(&tall, &dot, 0.6);
        assert!((d - (0.6 * 0.4995 + 0.4 * 0.999)).abs() < 1e-12 && d <= 1.0);
    }

    #[test]
    fn dcr_examples() {
        let red_02 = region(8, Part::Upper, 20, 8, 120);
        let red_08 = region(8, Part::Lower, 92, 8, 120);
        let ra = RegionSet::from_ordered(vec![red_02.clone()]);
        let rb = RegionSet::from_ordered(vec![red_02.clone(), red_08]);
        assert_eq!(dcr_dissimilarity(&ra, &ra, 0.6), 0.0);
        assert_eq!(dcr_dissimilarity(&ra, &rb, 0.6), 0.0);
        let no_red = RegionSet::from_ordered(vec![region(35, Part::Upper, 20, 8, 120)]);
        assert_eq!(dcr_dissimilarity(&ra, &no_red, 0.6), 1.0);
        assert_eq!(
            dcr_dissimilarity(&RegionSet::default(), &RegionSet::<f64>::default(), 0.6),
            0.0
        );
        assert_eq!(dcr_dissimilarity(&RegionSet::default(), &ra, 0.6), 1.0);
        assert_eq!(dcr_dissimilarity(&ra, &RegionSet::default(), 0.6), 1.0);
    }

    #[test]
    fn dcr_is_directional() {
        // probe has one red region, gallery has red plus green: probe->gallery
        // finds everything, gallery->probe misses green
        let red = region(8, Part::Upper, 10, 10, 128);
        let green = region(35, Part::Lower, 80, 10, 128);
        let ra = RegionSet::from_ordered(vec![red.clone()]);
        let rb = RegionSet::from_ordered(vec![red, green]);
        assert_eq!(dcr_dissimilarity(&ra, &rb, 0.6), 0.0);
        assert_eq!(dcr_dissimilarity(&rb, &ra, 0.6), 0.5);
    }

    #[test]
    fn same_part_restriction() {
        let ra = RegionSet::from_ordered(vec![region(8, Part::Upper, 10, 10, 128)]);
        let rb = RegionSet::from_ordered(vec![region(8, Part::Lower, 10, 10, 128)]);
        assert_eq!(dcr_dissimilarity_with(&ra, &rb, 0.6, false), 0.0);
        assert_eq!(dcr_dissimilarity_with(&ra, &rb, 0.6, true), 1.0);
    }

    #[test]
    fn fusion_examples() {
        assert_eq!(fuse(1.0, 0.0, 0.4), 1.0);
        assert!((fuse(1.0f64, 1.0, 0.4) - 0.4).abs() < 1e-15);
        assert_eq!(fuse(0.0, 1.0, 0.4), 0.0);

        let s = sig(
            set(&[(8, 1.0)]),
            set(&[(35, 1.0)]),
            vec![region(8, Part::Upper, 0, 64, 128)],
        );
        let score = combined_score(&s, &s, &MatchParams::default()).unwrap();
        assert_eq!(
            (score.dch, score.dcr_dissim, score.combined),
            (1.0, 0.0, 1.0)
        );
    }

    #[test]
    fn params_validation() {
        assert!(MatchParams::<f64>::default().validate().is_ok());
        assert!(MatchParams {
            alpha: 1.0,
            ..MatchParams::<f64>::default()
        }
        .validate()
        .is_err());
        assert!(MatchParams {
            gamma: 0.0,
            ..MatchParams::<f64>::default()
        }
        .validate()
        .is_err());
    }
}
