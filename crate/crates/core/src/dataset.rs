//! Dataset manifests, VIPeR-style directory scanning and signature files.
//!
//! Manifest CSV: `id,camera,image_path,mask_path` (mask_path may be empty).
//! Relative paths are resolved against the manifest's directory.
//!
//! Signature files are JSON documents:
//!
//! ```text
//! {
//!   "version": 1,
//!   "params": { "norm_width": 48, "norm_height": 128, "tau": 0.5, "max_colors": 8,
//!               "connectivity": "Eight", "min_area": 5, "fingerprint": "..." },
//!   "signatures": [
//!     { "id": "001", "fingerprint": "...", "image_size": [48, 128],
//!       "upper_dcds": [[color, percentage], ...],
//!       "lower_dcds": [[color, percentage], ...],
//!       "regions": [[color, "upper"|"lower", area, x, y, width, height], ...] }
//!   ]
//! }
//! ```
//!
//! Normalized region centers and heights are not stored; they are derived
//! from the bounding box and image height on load.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use regex::Regex;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::colorquant::QuantizedColor;
use crate::descriptor::{CentroidDcd, DcdSet};
use crate::error::{Error, Result};
use crate::regions::{DominantColorRegion, Mbr, Part, RegionSet};
use crate::scalar::Scalar;
use crate::signature::{ExtractionParams, PersonSignature};

/// Current signature file format version.
pub const SIGNATURE_FILE_VERSION: u32 = 1;

/// Default identity token: the leading digits of a file name.
pub const DEFAULT_ID_PATTERN: &str = r"^(\d+)";

const IMAGE_EXTENSIONS: [&str; 5] = ["ppm", "pnm", "pgm", "bmp", "png"];

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Camera {
    A,
    B,
}

impl fmt::Display for Camera {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Camera::A => "A",
            Camera::B => "B",
        })
    }
}

impl FromStr for Camera {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "a" | "cam_a" => Ok(Camera::A),
            "b" | "cam_b" => Ok(Camera::B),
            other => Err(Error::Schema(format!("unknown camera tag {other:?}"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub camera: Camera,
    pub image_path: PathBuf,
    pub mask_path: Option<PathBuf>,
}

/// Images of a single-shot dataset; (id, camera) pairs are unique.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct DatasetManifest {
    entries: Vec<ManifestEntry>,
}

impl DatasetManifest {
    pub fn new(entries: Vec<ManifestEntry>) -> Result<Self> {
        let mut seen = HashSet::new();
        for e in &entries {
            if !seen.insert((e.id.as_str(), e.camera)) {
                return Err(Error::Schema(format!(
                    "duplicate manifest entry for id {} camera {}",
                    e.id, e.camera
                )));
            }
        }
        Ok(DatasetManifest { entries })
    }

    pub fn entries(&self) -> &[ManifestEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn camera(&self, camera: Camera) -> impl Iterator<Item = &ManifestEntry> {
        self.entries.iter().filter(move |e| e.camera == camera)
    }
}

#[derive(Debug, Deserialize, Serialize)]
struct ManifestRow {
    id: String,
    camera: String,
    image_path: String,
    mask_path: String,
}

/// Parses a manifest; relative paths are joined onto `base`.
pub fn read_manifest(input: impl Read, base: &Path) -> Result<DatasetManifest> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "camera", "image_path", "mask_path"] {
        return Err(Error::Schema(format!(
            "manifest header must be id,camera,image_path,mask_path, got {}",
            headers.iter().collect::<Vec<_>>().join(",")
        )));
    }
    let resolve = |p: &str| {
        let p = Path::new(p);
        if p.is_absolute() {
            p.to_path_buf()
        } else {
            base.join(p)
        }
    };
    let mut entries = Vec::new();
    for (line, row) in reader.deserialize::<ManifestRow>().enumerate() {
        let row = row.map_err(|e| Error::Schema(format!("manifest row {}: {e}", line + 2)))?;
        if row.id.is_empty() || row.image_path.is_empty() {
            return Err(Error::Schema(format!(
                "manifest row {}: id and image_path are required",
                line + 2
            )));
        }
        entries.push(ManifestEntry {
            id: row.id,
            camera: row.camera.parse()?,
            image_path: resolve(&row.image_path),
            mask_path: (!row.mask_path.is_empty()).then(|| resolve(&row.mask_path)),
        });
    }
    DatasetManifest::new(entries)
}

pub fn load_manifest(path: &Path) -> Result<DatasetManifest> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    let base = path.parent().unwrap_or(Path::new("."));
    read_manifest(file, base).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

pub fn write_manifest(manifest: &DatasetManifest, out: impl Write) -> Result<()> {
    let mut writer = csv::Writer::from_writer(out);
    for e in &manifest.entries {
        writer
            .serialize(ManifestRow {
                id: e.id.clone(),
                camera: e.camera.to_string(),
                image_path: e.image_path.display().to_string(),
                mask_path: e
                    .mask_path
                    .as_ref()
                    .map(|p| p.display().to_string())
                    .unwrap_or_default(),
            })
            .map_err(|e| Error::Schema(e.to_string()))?;
    }
    if manifest.entries.is_empty() {
        writer
            .write_record(["id", "camera", "image_path", "mask_path"])
            .map_err(|e| Error::Schema(e.to_string()))?;
    }
    writer.flush().map_err(|e| Error::io("<manifest>", e))
}

/// Result of scanning a `cam_a/` + `cam_b/` layout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScanOutcome {
    pub manifest: DatasetManifest,
    /// Images without a partner in the other camera.
    pub unpaired: Vec<PathBuf>,
}

fn list_images(dir: &Path) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(|e| Error::io(dir, e))? {
        let path = entry.map_err(|e| Error::io(dir, e))?.path();
        let is_image = path
            .extension()
            .and_then(|e| e.to_str())
            .is_some_and(|e| IMAGE_EXTENSIONS.contains(&e.to_ascii_lowercase().as_str()));
        if path.is_file() && is_image {
            files.push(path);
        }
    }
    files.sort();
    Ok(files)
}

/// Scans `root/cam_a` and `root/cam_b` with the default identity pattern.
pub fn scan_viper_layout(root: &Path) -> Result<ScanOutcome> {
    let pattern = Regex::new(DEFAULT_ID_PATTERN).expect("default pattern is valid");
    scan_viper_layout_with(root, &pattern)
}

/// Scans with a custom identity pattern; capture group 1 (or the whole
/// match when there is no group) is the identity token.
pub fn scan_viper_layout_with(root: &Path, id_pattern: &Regex) -> Result<ScanOutcome> {
    let mut by_camera: [BTreeMap<String, PathBuf>; 2] = Default::default();
    let mut offenders = Vec::new();
    for (slot, sub) in [(0, "cam_a"), (1, "cam_b")] {
        let dir = root.join(sub);
        if !dir.is_dir() {
            return Err(Error::Ingestion(format!(
                "missing subdirectory {}",
                dir.display()
            )));
        }
        for path in list_images(&dir)? {
            let name = path
                .file_name()
                .and_then(|n| n.to_str())
                .unwrap_or_default();
            let token = id_pattern
                .captures(name)
                .and_then(|c| c.get(1).or_else(|| c.get(0)))
                .map(|m| m.as_str().to_owned());
            match token {
                Some(id) if !id.is_empty() => {
                    if let Some(prev) = by_camera[slot].insert(id.clone(), path.clone()) {
                        return Err(Error::Ingestion(format!(
                            "identity {id} appears twice in {sub}: {} and {}",
                            prev.display(),
                            path.display()
                        )));
                    }
                }
                _ => offenders.push(path.display().to_string()),
            }
        }
    }
    if !offenders.is_empty() {
        return Err(Error::Ingestion(format!(
            "no identity token in file names: {}",
            offenders.join(", ")
        )));
    }

    let [cam_a, cam_b] = by_camera;
    let mut entries = Vec::new();
    let mut unpaired = Vec::new();
    for (id, path_a) in &cam_a {
        match cam_b.get(id) {
            Some(path_b) => {
                entries.push(ManifestEntry {
                    id: id.clone(),
                    camera: Camera::A,
                    image_path: path_a.clone(),
                    mask_path: None,
                });
                entries.push(ManifestEntry {
                    id: id.clone(),
                    camera: Camera::B,
                    image_path: path_b.clone(),
                    mask_path: None,
                });
            }
            None => unpaired.push(path_a.clone()),
        }
    }
    unpaired.extend(
        cam_b
            .iter()
            .filter(|(id, _)| !cam_a.contains_key(*id))
            .map(|(_, p)| p.clone()),
    );
    for p in &unpaired {
        log::warn!(
            "excluding {}: no image of the same identity in the other camera",
            p.display()
        );
    }
    Ok(ScanOutcome {
        manifest: DatasetManifest::new(entries)?,
        unpaired,
    })
}

/// Reads a `probe_id,gallery_id` CSV.
pub fn read_truth(input: impl Read) -> Result<BTreeMap<String, String>> {
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader
        .headers()
        .map_err(|e| Error::Schema(e.to_string()))?
        .clone();
    if headers.iter().collect::<Vec<_>>() != ["probe_id", "gallery_id"] {
        return Err(Error::Schema(
            "truth header must be probe_id,gallery_id".into(),
        ));
    }
    let mut truth = BTreeMap::new();
    for (line, row) in reader.deserialize::<(String, String)>().enumerate() {
        let (probe, gallery) =
            row.map_err(|e| Error::Schema(format!("truth row {}: {e}", line + 2)))?;
        if truth.insert(probe.clone(), gallery).is_some() {
            return Err(Error::Schema(format!(
                "probe {probe} listed twice in truth file"
            )));
        }
    }
    Ok(truth)
}

pub fn load_truth(path: &Path) -> Result<BTreeMap<String, String>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_truth(file).map_err(|e| Error::File {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// Signatures extracted with one set of parameters.
#[derive(Debug, Clone, PartialEq)]
pub struct SignatureFile<T> {
    pub params: ExtractionParams,
    pub signatures: Vec<PersonSignature<T>>,
}

impl<T: Scalar> SignatureFile<T> {
    pub fn new(params: ExtractionParams, signatures: Vec<PersonSignature<T>>) -> Result<Self> {
        let expected = params.fingerprint();
        if let Some(bad) = signatures
            .iter()
            .find(|s| s.params_fingerprint() != expected)
        {
            return Err(Error::MixedFingerprints {
                first: expected,
                other: bad.params_fingerprint().to_owned(),
            });
        }
        Ok(SignatureFile { params, signatures })
    }

    pub fn fingerprint(&self) -> String {
        self.params.fingerprint()
    }

    pub fn get(&self, id: &str) -> Option<&PersonSignature<T>> {
        self.signatures.iter().find(|s| s.id() == id)
    }
}

#[derive(Serialize, Deserialize)]
struct ParamsDoc {
    #[serde(flatten)]
    params: ExtractionParams,
    fingerprint: String,
}

#[derive(Serialize, Deserialize)]
struct RegionDoc(u8, Part, u32, u32, u32, u32, u32);

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned"))]
struct SignatureDoc<T> {
    id: String,
    fingerprint: String,
    image_size: (usize, usize),
    upper_dcds: Vec<(u8, T)>,
    lower_dcds: Vec<(u8, T)>,
    regions: Vec<RegionDoc>,
}

#[derive(Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: DeserializeOwned"))]
struct FileDoc<T> {
    version: u32,
    params: ParamsDoc,
    signatures: Vec<SignatureDoc<T>>,
}

#[derive(Deserialize)]
struct VersionProbe {
    version: u32,
}

fn color(index: u8) -> Result<QuantizedColor> {
    QuantizedColor::new(index)
        .ok_or_else(|| Error::Schema(format!("color index {index} outside 0..72")))
}

fn dcds_doc<T: Scalar>(set: &DcdSet<T>) -> Vec<(u8, T)> {
    set.entries()
        .iter()
        .map(|e| (e.color.index(), e.percentage))
        .collect()
}

fn dcds_from_doc<T: Scalar>(doc: Vec<(u8, T)>) -> Result<DcdSet<T>> {
    let entries = doc
        .into_iter()
        .map(|(c, p)| {
            Ok(CentroidDcd {
                color: color(c)?,
                percentage: p,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    DcdSet::new(entries)
}

impl<T: Scalar> SignatureDoc<T> {
    fn from_signature(sig: &PersonSignature<T>) -> Self {
        SignatureDoc {
            id: sig.id().to_owned(),
            fingerprint: sig.params_fingerprint().to_owned(),
            image_size: sig.image_size(),
            upper_dcds: dcds_doc(sig.upper_dcds()),
            lower_dcds: dcds_doc(sig.lower_dcds()),
            regions: sig
                .regions()
                .iter()
                .map(|r| {
                    let m = r.mbr();
                    RegionDoc(
                        r.color().index(),
                        r.part(),
                        r.area(),
                        m.x,
                        m.y,
                        m.width,
                        m.height,
                    )
                })
                .collect(),
        }
    }

    fn into_signature(self) -> Result<PersonSignature<T>> {
        let height = self.image_size.1;
        let regions = self
            .regions
            .into_iter()
            .map(|RegionDoc(c, part, area, x, y, width, height_px)| {
                DominantColorRegion::new(
                    color(c)?,
                    part,
                    area,
                    Mbr {
                        x,
                        y,
                        width,
                        height: height_px,
                    },
                    height,
                )
            })
            .collect::<Result<Vec<_>>>()?;
        PersonSignature::from_parts(
            self.id,
            self.image_size,
            dcds_from_doc(self.upper_dcds)?,
            dcds_from_doc(self.lower_dcds)?,
            RegionSet::from_ordered(regions),
            self.fingerprint,
        )
    }
}

pub fn write_signature_file<T: Scalar + Serialize>(
    file: &SignatureFile<T>,
    mut out: impl Write,
) -> Result<()> {
    let doc = FileDoc {
        version: SIGNATURE_FILE_VERSION,
        params: ParamsDoc {
            params: file.params,
            fingerprint: file.fingerprint(),
        },
        signatures: file
            .signatures
            .iter()
            .map(SignatureDoc::from_signature)
            .collect(),
    };
    serde_json::to_writer_pretty(&mut out, &doc).map_err(|e| Error::Schema(e.to_string()))?;
    out.write_all(b"\n")
        .map_err(|e| Error::io("<signature file>", e))
}

pub fn read_signature_file<T: Scalar + DeserializeOwned>(
    mut input: impl Read,
) -> Result<SignatureFile<T>> {
    let mut text = String::new();
    input
        .read_to_string(&mut text)
        .map_err(|e| Error::io("<signature file>", e))?;
    let probe: VersionProbe =
        serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    if probe.version != SIGNATURE_FILE_VERSION {
        return Err(Error::VersionMismatch {
            found: probe.version,
            expected: SIGNATURE_FILE_VERSION,
        });
    }
    let doc: FileDoc<T> = serde_json::from_str(&text).map_err(|e| Error::Schema(e.to_string()))?;
    let params = doc.params.params;
    params.validate()?;
    if doc.params.fingerprint != params.fingerprint() {
        return Err(Error::Schema(format!(
            "stored fingerprint {} does not match parameters ({})",
            doc.params.fingerprint,
            params.fingerprint()
        )));
    }
    let signatures = doc
        .signatures
        .into_iter()
        .map(SignatureDoc::into_signature)
        .collect::<Result<Vec<_>>>()?;
    let mut ids = HashSet::new();
    if let Some(dup) = signatures.iter().find(|s| !ids.insert(s.id().to_owned())) {
        return Err(Error::Schema(format!(
            "duplicate signature id {}",
            dup.id()
        )));
    }
    SignatureFile::new(params, signatures)
}

pub fn save_signature_file<T: Scalar + Serialize>(
    path: &Path,
    file: &SignatureFile<T>,
) -> Result<()> {
    let mut buf = Vec::new();
    write_signature_file(file, &mut buf)?;
    std::fs::write(path, buf).map_err(|e| Error::io(path, e))
}

pub fn load_signature_file<T: Scalar + DeserializeOwned>(path: &Path) -> Result<SignatureFile<T>> {
    let file = std::fs::File::open(path).map_err(|e| Error::io(path, e))?;
    read_signature_file(std::io::BufReader::new(file)).map_err(|e| match e {
        Error::Io { .. } | Error::VersionMismatch { .. } | Error::MixedFingerprints { .. } => e,
        other => Error::File {
            path: path.to_path_buf(),
            message: other.to_string(),
        },
    })
}
