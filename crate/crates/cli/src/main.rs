//! `domcolor` command-line front end.
//!
//! Exit codes: 0 success, 1 domain error, 2 usage error.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context};
use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use domcolor::dataset::{self, Camera, ManifestEntry};
use domcolor::evaluation::{evaluate_dataset, write_cmc_csv, write_ranks_csv};
use domcolor::imaging::{load_image, load_mask};
use domcolor::matching::combined_score;
use domcolor::{
    build_signature, Connectivity, ExtractionParams, MatchParams, PersonSignature, SignatureFile,
};

#[derive(Parser)]
#[command(
    name = "domcolor",
    version,
    about = "Dominant color person re-identification"
)]
struct Cli {
    /// Worker threads for extraction and evaluation (0 = one per core).
    #[arg(long, global = true, default_value_t = 0)]
    jobs: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build signatures for every image in a manifest.
    Extract {
        manifest: PathBuf,
        /// Signature file to write.
        #[arg(short, long)]
        output: PathBuf,
        /// Only extract images from this camera (A or B).
        #[arg(long)]
        camera: Option<String>,
        #[command(flatten)]
        params: ExtractArgs,
    },
    /// Score one probe signature against one gallery signature.
    Match {
        signatures: PathBuf,
        probe: String,
        gallery: String,
        /// Look the gallery id up in this file instead.
        #[arg(long)]
        gallery_file: Option<PathBuf>,
        #[command(flatten)]
        params: MatchArgs,
    },
    /// Rank a gallery for every probe and write CMC and per-probe rank CSVs.
    Evaluate {
        probes: PathBuf,
        gallery: PathBuf,
        /// `probe_id,gallery_id` CSV; defaults to matching equal ids.
        #[arg(long)]
        truth: Option<PathBuf>,
        #[arg(long, default_value = "cmc.csv")]
        cmc: PathBuf,
        #[arg(long, default_value = "ranks.csv")]
        ranks: PathBuf,
        #[command(flatten)]
        params: MatchArgs,
    },
    /// Write a manifest for a `cam_a/` + `cam_b/` dataset directory.
    Scan {
        root: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Regex whose first capture group is the identity token.
        #[arg(long, default_value = dataset::DEFAULT_ID_PATTERN)]
        id_pattern: String,
    },
}

#[derive(Args)]
struct ExtractArgs {
    /// Upper/lower split as a fraction of the height.
    #[arg(long, default_value_t = domcolor::signature::DEFAULT_TAU)]
    tau: f64,
    /// Maximum dominant colors per body part.
    #[arg(long, default_value_t = domcolor::descriptor::DEFAULT_MAX_COLORS)]
    max_colors: usize,
    /// Pixel adjacency, 4 or 8.
    #[arg(long, default_value_t = 8)]
    connectivity: u8,
    /// Smallest region kept, in pixels.
    #[arg(long, default_value_t = domcolor::regions::DEFAULT_MIN_AREA)]
    min_area: usize,
    /// Normalized width.
    #[arg(long, default_value_t = domcolor::imaging::DEFAULT_NORM_SIZE.0)]
    width: usize,
    /// Normalized height.
    #[arg(long, default_value_t = domcolor::imaging::DEFAULT_NORM_SIZE.1)]
    height: usize,
}

#[derive(Args)]
struct MatchArgs {
    /// Weight of histogram similarity against region layout.
    #[arg(long, default_value_t = 0.4)]
    alpha: f64,
    /// Weight of region center distance against height difference.
    #[arg(long, default_value_t = 0.6)]
    beta: f64,
    /// Weight of the upper body against the lower body.
    #[arg(long, default_value_t = 0.55)]
    gamma: f64,
    /// Pair regions only within the same body part.
    #[arg(long)]
    same_part_only: bool,
}

/// Bad flag values; reported with exit code 2.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(e: impl ToString) -> anyhow::Error {
    anyhow!(UsageError(e.to_string()))
}

impl ExtractArgs {
    fn params(&self) -> anyhow::Result<ExtractionParams> {
        let params = ExtractionParams {
            norm_width: self.width,
            norm_height: self.height,
            tau: self.tau,
            max_colors: self.max_colors,
            connectivity: Connectivity::try_from(self.connectivity).map_err(usage)?,
            min_area: self.min_area,
        };
        params.validate().map_err(usage)?;
        Ok(params)
    }
}

impl MatchArgs {
    fn params(&self) -> anyhow::Result<MatchParams> {
        let params = MatchParams {
            alpha: self.alpha,
            beta: self.beta,
            gamma: self.gamma,
            same_part_only: self.same_part_only,
        };
        params.validate().map_err(usage)?;
        Ok(params)
    }
}

fn extract_one(
    entry: &ManifestEntry,
    params: &ExtractionParams,
) -> domcolor::Result<PersonSignature> {
    let img = load_image(&entry.image_path)?;
    let mask = entry.mask_path.as_deref().map(load_mask).transpose()?;
    build_signature(&img, mask.as_ref(), entry.id.clone(), params)
}

fn cmd_extract(
    manifest: &Path,
    output: &Path,
    camera: Option<&str>,
    args: &ExtractArgs,
) -> anyhow::Result<bool> {
    let params = args.params()?;
    let camera = camera
        .map(str::parse::<Camera>)
        .transpose()
        .map_err(usage)?;
    let manifest = dataset::load_manifest(manifest)?;
    let entries: Vec<&ManifestEntry> = manifest
        .entries()
        .iter()
        .filter(|e| camera.is_none_or(|c| e.camera == c))
        .collect();
    let mut ids = std::collections::HashSet::new();
    if let Some(dup) = entries.iter().find(|e| !ids.insert(e.id.as_str())) {
        bail!(usage(format!(
            "identity {} appears in both cameras; pass --camera A or --camera B",
            dup.id
        )));
    }

    let results: Vec<_> = entries
        .par_iter()
        .map(|e| extract_one(e, &params))
        .collect();
    let mut signatures = Vec::with_capacity(results.len());
    let mut failures = 0usize;
    for (entry, result) in entries.iter().zip(results) {
        match result {
            Ok(sig) => signatures.push(sig),
            Err(e) => {
                failures += 1;
                eprintln!("error: {} ({}): {e}", entry.id, entry.image_path.display());
            }
        }
    }
    let file = SignatureFile::new(params, signatures)?;
    dataset::save_signature_file(output, &file)?;
    log::info!(
        "wrote {} signatures to {}",
        file.signatures.len(),
        output.display()
    );
    if failures > 0 {
        eprintln!("{failures} of {} images failed", entries.len());
    }
    Ok(failures == 0)
}

fn cmd_match(
    signatures: &Path,
    probe: &str,
    gallery: &str,
    gallery_file: Option<&Path>,
    args: &MatchArgs,
) -> anyhow::Result<bool> {
    let params = args.params()?;
    let probes: SignatureFile = dataset::load_signature_file(signatures)?;
    let gallery_set: SignatureFile = match gallery_file {
        Some(path) => dataset::load_signature_file(path)?,
        None => probes.clone(),
    };
    let a = probes
        .get(probe)
        .ok_or_else(|| anyhow!("unknown probe id {probe}"))?;
    let b = gallery_set
        .get(gallery)
        .ok_or_else(|| anyhow!("unknown gallery id {gallery}"))?;
    let score = combined_score(a, b, &params)?;
    println!("dch {:.6}", score.dch);
    println!("dcr_dissim {:.6}", score.dcr_dissim);
    println!("combined {:.6}", score.combined);
    Ok(true)
}

fn write_csv(
    path: &Path,
    f: impl FnOnce(&mut BufWriter<File>) -> std::io::Result<()>,
) -> anyhow::Result<()> {
    let mut out =
        BufWriter::new(File::create(path).with_context(|| format!("creating {}", path.display()))?);
    f(&mut out)
        .and_then(|_| out.flush())
        .with_context(|| format!("writing {}", path.display()))
}

fn cmd_evaluate(
    probes: &Path,
    gallery: &Path,
    truth: Option<&Path>,
    cmc_path: &Path,
    ranks_path: &Path,
    args: &MatchArgs,
) -> anyhow::Result<bool> {
    let params = args.params()?;
    let probes: SignatureFile = dataset::load_signature_file(probes)?;
    let gallery: SignatureFile = dataset::load_signature_file(gallery)?;
    if probes.fingerprint() != gallery.fingerprint() {
        bail!(domcolor::Error::IncompatibleSignatures {
            left: probes.fingerprint(),
            right: gallery.fingerprint(),
        });
    }
    let truth: BTreeMap<String, String> = match truth {
        Some(path) => dataset::load_truth(path)?,
        None => probes
            .signatures
            .iter()
            .map(|s| (s.id().to_owned(), s.id().to_owned()))
            .collect(),
    };
    let eval = evaluate_dataset(&probes.signatures, &gallery.signatures, &truth, &params)?;
    write_csv(cmc_path, |out| write_cmc_csv(&eval.cmc, out))?;
    write_csv(ranks_path, |out| write_ranks_csv(&eval.ranks, out))?;

    println!(
        "probes {} gallery {}",
        probes.signatures.len(),
        gallery.signatures.len()
    );
    for k in [1, 5, 10, 20] {
        println!("rank-{k}: {:.2}%", 100.0 * eval.cmc.at(k));
    }
    Ok(true)
}

fn cmd_scan(root: &Path, output: &Path, id_pattern: &str) -> anyhow::Result<bool> {
    let pattern = regex::Regex::new(id_pattern).map_err(usage)?;
    let outcome = dataset::scan_viper_layout_with(root, &pattern)?;
    for p in &outcome.unpaired {
        eprintln!("warning: excluded unpaired image {}", p.display());
    }
    let mut buf = Vec::new();
    dataset::write_manifest(&outcome.manifest, &mut buf)?;
    std::fs::write(output, buf).with_context(|| format!("writing {}", output.display()))?;
    println!(
        "{} pairs written to {}",
        outcome.manifest.len() / 2,
        output.display()
    );
    Ok(true)
}

fn run(cli: Cli) -> anyhow::Result<bool> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cli.jobs)
        .build()
        .context("starting worker pool")?;
    pool.install(|| match &cli.command {
        Command::Extract {
            manifest,
            output,
            camera,
            params,
        } => cmd_extract(manifest, output, camera.as_deref(), params),
        Command::Match {
            signatures,
            probe,
            gallery,
            gallery_file,
            params,
        } => cmd_match(signatures, probe, gallery, gallery_file.as_deref(), params),
        Command::Evaluate {
            probes,
            gallery,
            truth,
            cmc,
            ranks,
            params,
        } => cmd_evaluate(probes, gallery, truth.as_deref(), cmc, ranks, params),
        Command::Scan {
            root,
            output,
            id_pattern,
        } => cmd_scan(root, output, id_pattern),
    })
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    let cli = Cli::parse();
    match run(cli) {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<UsageError>().is_some() {
                ExitCode::from(2)
            } else {
                ExitCode::from(1)
            }
        }
    }
}
