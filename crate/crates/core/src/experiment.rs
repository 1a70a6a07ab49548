//! Experiment runner: loads objects, drives a search with checkpoints and
//! writes the front, the minimal sufficient statistic and model payloads.
//!
//! Output directory layout:
//!
//! ```text
//! experiment.json   the spec, read back by resume
//! checkpoint.txt    latest search state
//! front.csv         one row per distinct model trade-off, by rate
//! mss.txt           minimal sufficient statistic
//! best.txt          model closest to the original (when one is given)
//! models/           payload of every front point
//! ```

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::alphabet::Alphabet;
use crate::distortion::Metric;
use crate::error::{Error, Result};
use crate::image::{encode_pgm, parse_pgm, ImageGrid};
use crate::pareto::{minimal_sufficient_statistic, FrontPoint, Objective};
use crate::search::{Checkpoint, Search, SearchConfig};

pub const SPEC_FILE: &str = "experiment.json";
pub const CHECKPOINT_FILE: &str = "checkpoint.txt";
pub const FRONT_FILE: &str = "front.csv";
pub const MSS_FILE: &str = "mss.txt";
pub const BEST_FILE: &str = "best.txt";
pub const MODELS_DIR: &str = "models";

pub const DEFAULT_SIDE_INFO_CAP: usize = 64 * 1024;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlphabetChoice {
    /// Symbols occurring in the input.
    Auto,
    Bytes,
}

impl std::str::FromStr for AlphabetChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "auto" => Ok(AlphabetChoice::Auto),
            "bytes" => Ok(AlphabetChoice::Bytes),
            other => Err(Error::Domain(format!("unknown alphabet {other:?}"))),
        }
    }
}

impl AlphabetChoice {
    pub fn resolve(self, source: &[u8]) -> Result<Alphabet> {
        match self {
            AlphabetChoice::Bytes => Ok(Alphabet::bytes()),
            AlphabetChoice::Auto => Alphabet::auto(source, &[]),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub input: PathBuf,
    pub metric: Metric,
    pub side_info: Option<PathBuf>,
    /// Uncorrupted object, for controlled denoising runs.
    pub original: Option<PathBuf>,
    pub width: Option<usize>,
    pub height: Option<usize>,
    pub alphabet: AlphabetChoice,
    pub side_info_cap: usize,
    pub search: SearchConfig,
    pub out_dir: PathBuf,
}

impl ExperimentSpec {
    pub fn new(input: impl Into<PathBuf>, metric: Metric, out_dir: impl Into<PathBuf>) -> Self {
        ExperimentSpec {
            input: input.into(),
            metric,
            side_info: None,
            original: None,
            width: None,
            height: None,
            alphabet: AlphabetChoice::Bytes,
            side_info_cap: DEFAULT_SIDE_INFO_CAP,
            search: SearchConfig::default(),
            out_dir: out_dir.into(),
        }
    }
}

/// An input object: raw bytes, with grid dimensions when it is an image.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LoadedObject {
    pub bytes: Vec<u8>,
    pub dims: Option<(usize, usize)>,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path, e))
}

/// Loads a binary PGM (detected by its `P5` magic) or raw bytes. Explicit
/// dimensions must agree with the data.
pub fn load_object(path: &Path, width: Option<usize>, height: Option<usize>) -> Result<LoadedObject> {
    let data = read(path)?;
    let explicit = match (width, height) {
        (Some(w), Some(h)) => Some((w, h)),
        (None, None) => None,
        _ => return Err(Error::Experiment("--width and --height go together".into())),
    };
    if data.starts_with(b"P5") {
        let grid = parse_pgm(&data)?;
        if explicit.is_some_and(|d| d != (grid.width, grid.height)) {
            return Err(Error::Experiment(format!(
                "{} is {}x{}, not the requested size",
                path.display(),
                grid.width,
                grid.height
            )));
        }
        return Ok(LoadedObject {
            bytes: grid.pixels,
            dims: Some((grid.width, grid.height)),
        });
    }
    if let Some((w, h)) = explicit {
        if w * h != data.len() {
            return Err(Error::Experiment(format!(
                "{} has {} bytes, not {w}x{h}",
                path.display(),
                data.len()
            )));
        }
    }
    Ok(LoadedObject {
        bytes: data,
        dims: explicit,
    })
}

/// Everything an experiment needs in memory.
struct Prepared {
    input: LoadedObject,
    original: Option<Vec<u8>>,
    objective: Objective,
    alphabet: Alphabet,
}

fn prepare(spec: &ExperimentSpec) -> Result<Prepared> {
    spec.search.validate()?;
    let input = load_object(&spec.input, spec.width, spec.height)?;
    if input.bytes.is_empty() {
        return Err(Error::Experiment(format!("{} is empty", spec.input.display())));
    }
    if spec.metric == Metric::Euclidean && input.dims.is_none() {
        return Err(Error::Experiment(
            "euclidean distortion needs an image input (PGM or --width/--height)".into(),
        ));
    }
    let side = match &spec.side_info {
        Some(p) => read(p)?,
        None => Vec::new(),
    };
    if side.len() > spec.side_info_cap {
        return Err(Error::Experiment(format!(
            "side information is {} bytes, above the cap of {}",
            side.len(),
            spec.side_info_cap
        )));
    }
    let original = match &spec.original {
        Some(p) => {
            let o = load_object(p, spec.width, spec.height)?.bytes;
            if spec.metric.preserves_length() && o.len() != input.bytes.len() {
                return Err(Error::Experiment(format!(
                    "original has {} bytes, input has {}",
                    o.len(),
                    input.bytes.len()
                )));
            }
            Some(o)
        }
        None => None,
    };
    let alphabet = spec.alphabet.resolve(&input.bytes)?;
    let objective = Objective::new(input.bytes.clone(), spec.metric, side, alphabet.size() as u64);
    Ok(Prepared {
        input,
        original,
        objective,
        alphabet,
    })
}

/// Formats with nine significant digits, fixed-point.
pub fn format_sig(v: f64) -> String {
    if v == 0.0 || !v.is_finite() {
        return format!("{v}");
    }
    let magnitude = v.abs().log10().floor() as i32;
    let decimals = (8 - magnitude).max(0) as usize;
    format!("{v:.decimals$}")
}

fn format_distortion(metric: Metric, p: &FrontPoint) -> String {
    match metric {
        Metric::Euclidean => format_sig(p.display_distortion),
        _ => p.distortion.to_string(),
    }
}

pub fn front_csv(metric: Metric, points: &[FrontPoint]) -> String {
    let with_original = points.iter().any(|p| p.distortion_to_original.is_some());
    let mut out = String::from("rate_bits,distortion,three_part_codelength_bits");
    if with_original {
        out.push_str(",distortion_to_original");
    }
    out.push('\n');
    for p in points {
        out.push_str(&format!(
            "{},{},{}",
            format_sig(p.rate),
            format_distortion(metric, p),
            format_sig(p.three_part_codelength)
        ));
        if let Some(d) = p.distortion_to_original {
            out.push_str(&format!(",{}", format_sig(d)));
        }
        out.push('\n');
    }
    out
}

/// Row of `front.csv` as read back.
#[derive(Clone, Debug, PartialEq)]
pub struct FrontRow {
    pub rate: f64,
    pub distortion: f64,
    pub three_part_codelength: f64,
    pub distortion_to_original: Option<f64>,
}

pub fn parse_front_csv(text: &str) -> Result<Vec<FrontRow>> {
    let mut lines = text.lines();
    let header = lines.next().unwrap_or_default();
    if !header.starts_with("rate_bits,distortion,three_part_codelength_bits") {
        return Err(Error::Experiment(format!("unexpected front header {header:?}")));
    }
    lines
        .filter(|l| !l.is_empty())
        .map(|l| {
            let f = l
                .split(',')
                .map(|s| s.parse::<f64>())
                .collect::<std::result::Result<Vec<f64>, _>>()
                .map_err(|_| Error::Experiment(format!("bad front row {l:?}")))?;
            if f.len() < 3 {
                return Err(Error::Experiment(format!("short front row {l:?}")));
            }
            Ok(FrontRow {
                rate: f[0],
                distortion: f[1],
                three_part_codelength: f[2],
                distortion_to_original: f.get(3).copied(),
            })
        })
        .collect()
}

/// Summary of a finished experiment.
#[derive(Clone, Debug)]
pub struct ExperimentReport {
    pub out_dir: PathBuf,
    pub iterations: u64,
    pub evaluations: u64,
    pub input_codelength: f64,
    pub points: Vec<FrontPoint>,
    pub mss: FrontPoint,
    pub best: Option<FrontPoint>,
}

fn model_extension(dims: Option<(usize, usize)>) -> &'static str {
    if dims.is_some() {
        "pgm"
    } else {
        "bin"
    }
}

fn payload_bytes(payload: &[u8], dims: Option<(usize, usize)>) -> Vec<u8> {
    match dims {
        Some((w, h)) if payload.len() == w * h => encode_pgm(&ImageGrid {
            width: w,
            height: h,
            pixels: payload.to_vec(),
        }),
        _ => payload.to_vec(),
    }
}

fn describe_point(metric: Metric, p: &FrontPoint, model: &str, input_bits: f64) -> String {
    let mut out = String::new();
    out.push_str(&format!("rate_bits: {}\n", format_sig(p.rate)));
    out.push_str(&format!("distortion: {}\n", format_distortion(metric, p)));
    out.push_str(&format!(
        "three_part_codelength_bits: {}\n",
        format_sig(p.three_part_codelength)
    ));
    if let Some(d) = p.distortion_to_original {
        out.push_str(&format!("distortion_to_original: {}\n", format_sig(d)));
    }
    out.push_str(&format!("input_codelength_bits: {}\n", format_sig(input_bits)));
    out.push_str(&format!("model: {model}\n"));
    out.push_str(&format!("payload_hex: {}\n", hex::encode(&p.payload)));
    out
}

fn write_file(path: &Path, data: impl AsRef<[u8]>) -> Result<()> {
    fs::write(path, data).map_err(|e| Error::io(path, e))
}

fn write_artifacts(spec: &ExperimentSpec, prepared: &Prepared, search: &Search) -> Result<ExperimentReport> {
    let out = &spec.out_dir;
    let metric = spec.metric;
    let points = search.front(prepared.original.as_deref())?;
    write_file(&out.join(FRONT_FILE), front_csv(metric, &points))?;

    let models = out.join(MODELS_DIR);
    fs::create_dir_all(&models).map_err(|e| Error::io(&models, e))?;
    let ext = model_extension(prepared.input.dims);
    let model_names: Vec<String> = (0..points.len())
        .map(|i| format!("{MODELS_DIR}/model_{i:04}.{ext}"))
        .collect();
    for (p, name) in points.iter().zip(&model_names) {
        write_file(&out.join(name), payload_bytes(&p.payload, prepared.input.dims))?;
    }

    let input_bits = prepared.objective.rate(prepared.objective.source());
    let mss = minimal_sufficient_statistic(&points)
        .cloned()
        .ok_or_else(|| Error::Experiment("empty front".into()))?;
    let mss_idx = points.iter().position(|p| *p == mss).unwrap();
    write_file(
        &out.join(MSS_FILE),
        describe_point(metric, &mss, &model_names[mss_idx], input_bits),
    )?;

    let best = if prepared.original.is_some() {
        let (idx, best) = points
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let (da, db) = (a.distortion_to_original.unwrap(), b.distortion_to_original.unwrap());
                da.total_cmp(&db).then(a.rate.total_cmp(&b.rate))
            })
            .unwrap();
        write_file(
            &out.join(BEST_FILE),
            describe_point(metric, best, &model_names[idx], input_bits),
        )?;
        Some(best.clone())
    } else {
        None
    };

    Ok(ExperimentReport {
        out_dir: out.clone(),
        iterations: search.iteration(),
        evaluations: search.evaluations(),
        input_codelength: input_bits,
        points,
        mss,
        best,
    })
}

fn write_spec(spec: &ExperimentSpec) -> Result<()> {
    let path = spec.out_dir.join(SPEC_FILE);
    let json = serde_json::to_string_pretty(spec).expect("spec serialises");
    write_file(&path, json + "\n")
}

fn absolute(p: &Path) -> Result<PathBuf> {
    std::path::absolute(p).map_err(|e| Error::io(p, e))
}

/// Runs a fresh experiment to its iteration budget.
pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentReport> {
    let mut spec = spec.clone();
    spec.input = absolute(&spec.input)?;
    spec.side_info = spec.side_info.as_deref().map(absolute).transpose()?;
    spec.original = spec.original.as_deref().map(absolute).transpose()?;
    let prepared = prepare(&spec)?;
    fs::create_dir_all(&spec.out_dir).map_err(|e| Error::io(&spec.out_dir, e))?;
    write_spec(&spec)?;
    let mut search = Search::new(prepared.objective.clone(), prepared.alphabet.clone(), spec.search.clone())?;
    search.run(Some(&spec.out_dir.join(CHECKPOINT_FILE)))?;
    write_artifacts(&spec, &prepared, &search)
}

/// Continues the experiment owning `checkpoint` (its directory must hold
/// `experiment.json`). `iterations` replaces the stored budget.
pub fn resume_experiment(checkpoint: &Path, iterations: Option<u64>) -> Result<ExperimentReport> {
    let dir = checkpoint
        .parent()
        .map(|d| if d.as_os_str().is_empty() { Path::new(".") } else { d })
        .unwrap_or(Path::new("."));
    let spec_path = dir.join(SPEC_FILE);
    let text = fs::read_to_string(&spec_path).map_err(|e| Error::io(&spec_path, e))?;
    let mut spec: ExperimentSpec =
        serde_json::from_str(&text).map_err(|e| Error::Experiment(format!("{}: {e}", spec_path.display())))?;
    spec.out_dir = dir.to_path_buf();
    if let Some(n) = iterations {
        spec.search.max_iterations = n;
        write_spec(&spec)?;
    }
    let prepared = prepare(&spec)?;
    let state = Checkpoint::read(checkpoint, &prepared.objective)?;
    let mut search = Search::resume(
        prepared.objective.clone(),
        prepared.alphabet.clone(),
        spec.search.clone(),
        state,
    )?;
    search.run(Some(checkpoint))?;
    write_artifacts(&spec, &prepared, &search)
}
