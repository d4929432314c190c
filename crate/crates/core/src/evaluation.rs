//! Gallery ranking and Cumulative Matching Characteristic curves for the
//! single-shot protocol.

use std::collections::{BTreeMap, HashSet};
use std::io::Write;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::matching::{combined_score, MatchParams, MatchScore};
use crate::scalar::Scalar;
use crate::signature::PersonSignature;

#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry<T> {
    pub gallery_id: String,
    pub score: MatchScore<T>,
}

/// Gallery ids by descending combined score; equal scores by ascending id.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedList<T> {
    pub probe_id: String,
    pub entries: Vec<RankedEntry<T>>,
}

impl<T: Scalar> RankedList<T> {
    /// 1-based rank of `gallery_id`, if present.
    pub fn rank_of(&self, gallery_id: &str) -> Option<usize> {
        self.entries
            .iter()
            .position(|e| e.gallery_id == gallery_id)
            .map(|i| i + 1)
    }
}

/// Scores every gallery signature against the probe and sorts them.
pub fn rank_gallery<T: Scalar>(
    probe: &PersonSignature<T>,
    gallery: &[PersonSignature<T>],
    params: &MatchParams<T>,
) -> Result<RankedList<T>> {
    if gallery.is_empty() {
        return Err(Error::arg("gallery is empty"));
    }
    let mut entries = gallery
        .iter()
        .map(|g| {
            Ok(RankedEntry {
                gallery_id: g.id().to_owned(),
                score: combined_score(probe, g, params)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    entries.sort_by(|a, b| {
        b.score
            .combined
            .partial_cmp(&a.score.combined)
            .expect("scores are finite")
            .then_with(|| a.gallery_id.cmp(&b.gallery_id))
    });
    Ok(RankedList {
        probe_id: probe.id().to_owned(),
        entries,
    })
}

/// Fraction of probes whose true match ranks within the top k, for
/// k = 1..=gallery size.
#[derive(Debug, Clone, PartialEq)]
pub struct CmcCurve<T> {
    points: Vec<T>,
}

impl<T: Scalar> CmcCurve<T> {
    /// Curve from 1-based ranks against a gallery of `gallery_size`.
    pub fn from_ranks(ranks: &[usize], gallery_size: usize) -> Result<Self> {
        if ranks.is_empty() {
            return Err(Error::arg("no probes to evaluate"));
        }
        let mut hits = vec![0usize; gallery_size + 1];
        for &r in ranks {
            if r == 0 || r > gallery_size {
                return Err(Error::arg(format!("rank {r} outside 1..={gallery_size}")));
            }
            hits[r] += 1;
        }
        let n = T::of_usize(ranks.len());
        let mut cumulative = 0usize;
        let points = hits[1..]
            .iter()
            .map(|&h| {
                cumulative += h;
                T::of_usize(cumulative) / n
            })
            .collect();
        Ok(CmcCurve { points })
    }

    /// Point k - 1 holds CMC(k).
    pub fn points(&self) -> &[T] {
        &self.points
    }

    /// CMC(k) with 1-based k; k past the gallery size reads the last point.
    pub fn at(&self, k: usize) -> T {
        assert!(k >= 1, "CMC ranks are 1-based");
        self.points[(k - 1).min(self.points.len() - 1)]
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }
}

/// Where each probe's true match landed.
#[derive(Debug, Clone, PartialEq)]
pub struct ProbeRank<T> {
    pub probe_id: String,
    pub gallery_id: String,
    pub rank: usize,
    pub score: T,
}

fn probe_rank<T: Scalar>(
    list: &RankedList<T>,
    truth: &BTreeMap<String, String>,
) -> Result<ProbeRank<T>> {
    let target = truth.get(&list.probe_id).ok_or_else(|| Error::Evaluation {
        probe: list.probe_id.clone(),
        message: "no ground-truth gallery id".into(),
    })?;
    let rank = list.rank_of(target).ok_or_else(|| Error::Evaluation {
        probe: list.probe_id.clone(),
        message: format!("true match {target} is not in the gallery"),
    })?;
    Ok(ProbeRank {
        probe_id: list.probe_id.clone(),
        gallery_id: target.clone(),
        rank,
        score: list.entries[rank - 1].score.combined,
    })
}

/// CMC curve over ranked lists, `truth` mapping probe id to gallery id.
pub fn compute_cmc<T: Scalar>(
    ranked: &[RankedList<T>],
    truth: &BTreeMap<String, String>,
) -> Result<CmcCurve<T>> {
    let ranks = ranked
        .iter()
        .map(|l| probe_rank(l, truth).map(|r| r.rank))
        .collect::<Result<Vec<_>>>()?;
    let gallery_size = ranked.iter().map(|l| l.entries.len()).max().unwrap_or(0);
    CmcCurve::from_ranks(&ranks, gallery_size)
}

#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation<T> {
    pub cmc: CmcCurve<T>,
    /// One row per probe, in probe input order.
    pub ranks: Vec<ProbeRank<T>>,
}

/// Ranks the gallery for every probe (in parallel on the current rayon
/// pool) and builds the CMC curve. Output order follows probe order.
pub fn evaluate_dataset<T: Scalar>(
    probes: &[PersonSignature<T>],
    gallery: &[PersonSignature<T>],
    truth: &BTreeMap<String, String>,
    params: &MatchParams<T>,
) -> Result<Evaluation<T>> {
    params.validate()?;
    let mut ids = HashSet::new();
    if let Some(dup) = gallery.iter().find(|g| !ids.insert(g.id())) {
        return Err(Error::arg(format!("duplicate gallery id {}", dup.id())));
    }
    let ranks = probes
        .par_iter()
        .map(|p| rank_gallery(p, gallery, params).and_then(|list| probe_rank(&list, truth)))
        .collect::<Result<Vec<_>>>()?;
    let cmc = CmcCurve::from_ranks(
        &ranks.iter().map(|r| r.rank).collect::<Vec<_>>(),
        gallery.len(),
    )?;
    Ok(Evaluation { cmc, ranks })
}

/// `rank,cmc` CSV with six decimals.
pub fn write_cmc_csv<T: Scalar>(cmc: &CmcCurve<T>, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "rank,cmc")?;
    for (i, p) in cmc.points().iter().enumerate() {
        writeln!(out, "{},{:.6}", i + 1, p.to_f64_lossless())?;
    }
    Ok(())
}

/// `probe_id,gallery_id,rank,score` CSV with six-decimal scores.
pub fn write_ranks_csv<T: Scalar>(
    ranks: &[ProbeRank<T>],
    mut out: impl Write,
) -> std::io::Result<()> {
    writeln!(out, "probe_id,gallery_id,rank,score")?;
    for r in ranks {
        writeln!(
            out,
            "{},{},{},{:.6}",
            r.probe_id,
            r.gallery_id,
            r.rank,
            r.score.to_f64_lossless()
        )?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn list(probe: &str, order: &[&str]) -> RankedList<f64> {
        let n = order.len() as f64;
        RankedList {
            probe_id: probe.into(),
            entries: order
                .iter()
                .enumerate()
                .map(|(i, g)| RankedEntry {
                    gallery_id: (*g).into(),
                    score: MatchScore {
                        dch: 0.0,
                        dcr_dissim: 0.0,
                        combined: 1.0 - i as f64 / n,
                    },
                })
                .collect(),
        }
    }

    fn truth(pairs: &[(&str, &str)]) -> BTreeMap<String, String> {
        pairs
            .iter()
            .map(|(a, b)| ((*a).into(), (*b).into()))
            .collect()
    }

    #[test]
    fn cmc_examples() {
        let c = compute_cmc(&[list("p", &["p", "x", "y"])], &truth(&[("p", "p")])).unwrap();
        assert_eq!(c.points(), &[1.0, 1.0, 1.0]);

        let ranked = [
            list("a", &["a", "b", "c"]),
            list("b", &["a", "b", "c"]),
            list("c", &["c", "a", "b"]),
        ];
        let c = compute_cmc(&ranked, &truth(&[("a", "a"), ("b", "b"), ("c", "c")])).unwrap();
        assert_eq!(c.points(), &[2.0 / 3.0, 1.0, 1.0]);

        let last = [list("a", &["b", "c", "a"]), list("b", &["a", "c", "b"])];
        let c = compute_cmc(&last, &truth(&[("a", "a"), ("b", "b")])).unwrap();
        assert_eq!(c.points(), &[0.0, 0.0, 1.0]);
    }

    #[test]
    fn cmc_errors_name_the_probe() {
        let err = compute_cmc(&[list("p", &["x"])], &truth(&[])).unwrap_err();
        assert!(matches!(err, Error::Evaluation { ref probe, .. } if probe == "p"));
        let err = compute_cmc(&[list("p", &["x"])], &truth(&[("p", "q")])).unwrap_err();
        assert!(matches!(err, Error::Evaluation { ref probe, .. } if probe == "p"));
    }

    #[test]
    fn csv_formats() {
        let c = CmcCurve::<f64>::from_ranks(&[1, 2, 1], 3).unwrap();
        let mut buf = Vec::new();
        write_cmc_csv(&c, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "rank,cmc\n1,0.666667\n2,1.000000\n3,1.000000\n"
        );

        let rows = [ProbeRank {
            probe_id: "001".into(),
            gallery_id: "001".into(),
            rank: 2,
            score: 0.5,
        }];
        let mut buf = Vec::new();
        write_ranks_csv(&rows, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "probe_id,gallery_id,rank,score\n001,001,2,0.500000\n"
        );
    }

    proptest! {
        #[test]
        fn cmc_monotone(n in 1usize..40, seed_ranks in prop::collection::vec(0usize..1000, 1..60)) {
            let ranks: Vec<usize> = seed_ranks.iter().map(|r| r % n + 1).collect();
            let c = CmcCurve::<f64>::from_ranks(&ranks, n).unwrap();
            prop_assert_eq!(c.len(), n);
            prop_assert!(c.points().windows(2).all(|w| w[0] <= w[1]));
            prop_assert_eq!(c.at(n), 1.0);
        }
    }
}
