use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use gazekit::dataset::{build_manifest, SplitFractions};
use gazekit::fixation::{check_segments, parse_fixations_json, IdtParams, DEFAULT_D_MAX, DEFAULT_T_MIN};
use gazekit::metrics::{evaluate_sequence, fdm_cc, fdm_sim};
use gazekit::spatial::{
    decode_sgm, encode_pgm, encode_sgm, frame_heatmaps, DEFAULT_FDM_SIGMA, DEFAULT_HEATMAP_SIGMA,
    DEFAULT_HEATMAP_TRUNCATION,
};
use gazekit::synth::{synth_trace, SynthSpec};
use gazekit::trace::{parse_gaze_csv, write_gaze_csv};
use gazekit::trial::parse_trials_json;
use gazekit::{build_fdm, convex_hull, detect_fixations, summarize, Coords, FixationSegment, GazeTrace, HeatmapParams};
use rayon::prelude::*;
use serde::Serialize;

const EXIT_USAGE: u8 = 2;
const EXIT_DATA: u8 = 3;

#[derive(Parser)]
#[command(name = "gazekit", version, about = "Gaze-trace analytics and saliency-map evaluation")]
struct Cli {
    #[command(flatten)]
    global: Global,
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Global {
    /// Frame width of the gaze data in pixels.
    #[arg(long, global = true, default_value_t = 1280)]
    width: u32,
    /// Frame height of the gaze data in pixels.
    #[arg(long, global = true, default_value_t = 1024)]
    height: u32,
    /// Coordinate convention of the gaze CSV.
    #[arg(long, global = true, value_enum, default_value_t = CoordsArg::Pixel)]
    coords: CoordsArg,
    /// Output file, or output directory for directory inputs. Defaults to stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,
    /// Worker threads for directory inputs.
    #[arg(long, global = true)]
    jobs: Option<usize>,
    /// Seed for splits and synthetic traces.
    #[arg(long, global = true, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum CoordsArg {
    Pixel,
    Normalized,
}

impl From<CoordsArg> for Coords {
    fn from(c: CoordsArg) -> Self {
        match c {
            CoordsArg::Pixel => Coords::Pixel,
            CoordsArg::Normalized => Coords::Normalized,
        }
    }
}

#[derive(Args, Clone, Copy)]
struct Detection {
    /// Minimum fixation duration in seconds.
    #[arg(long, default_value_t = DEFAULT_T_MIN)]
    t_min: f64,
    /// Maximum dispersion in pixels at the detection resolution.
    #[arg(long, default_value_t = DEFAULT_D_MAX)]
    d_max: f64,
    /// Rescale the trace to this width before detection.
    #[arg(long, requires = "detect_height")]
    detect_width: Option<u32>,
    /// Rescale the trace to this height before detection.
    #[arg(long, requires = "detect_width")]
    detect_height: Option<u32>,
}

#[derive(Subcommand)]
enum Command {
    /// Detect I-DT fixations and write them as JSON.
    Fixations {
        /// Gaze CSV file, or a directory of them.
        input: PathBuf,
        #[command(flatten)]
        detection: Detection,
    },
    /// Duration-normalized fixation and hull metrics as JSON.
    Metrics {
        /// Gaze CSV file, or a directory of them.
        input: PathBuf,
        /// Fixation JSON to use instead of running detection.
        #[arg(long)]
        fixations: Option<PathBuf>,
        #[command(flatten)]
        detection: Detection,
    },
    /// Per-frame gaze heatmaps written as SGM files into the --out directory.
    Heatmap {
        input: PathBuf,
        /// Heatmap grid width.
        #[arg(long)]
        grid_width: usize,
        /// Heatmap grid height.
        #[arg(long)]
        grid_height: usize,
        /// Frames per second of the stimulus video.
        #[arg(long, default_value_t = 30.0)]
        fps: f64,
        /// Maximum distance in seconds from a frame to its gaze sample.
        /// Defaults to half a frame period.
        #[arg(long)]
        tolerance: Option<f64>,
        #[arg(long, default_value_t = DEFAULT_HEATMAP_SIGMA)]
        sigma: f64,
        /// Support radius in units of sigma.
        #[arg(long, default_value_t = DEFAULT_HEATMAP_TRUNCATION)]
        truncation: f64,
    },
    /// Fixation density map written as SGM.
    Fdm {
        /// Gaze CSV file, or a directory of them.
        input: PathBuf,
        /// Fixation JSON to use instead of running detection.
        #[arg(long)]
        fixations: Option<PathBuf>,
        #[arg(long, default_value_t = DEFAULT_FDM_SIGMA)]
        sigma: f64,
        /// Divide by the total so the map sums to 1.
        #[arg(long)]
        normalize: bool,
        #[command(flatten)]
        detection: Detection,
    },
    /// FDM-SIM and FDM-CC between two SGM fixation density maps.
    CompareFdm {
        a: PathBuf,
        b: PathBuf,
        /// Normalize both maps before FDM-SIM instead of requiring unit sums.
        #[arg(long)]
        normalize: bool,
    },
    /// Per-frame KLD, CC, SIM and NSS between two directories of SGM frames.
    Eval {
        gt_dir: PathBuf,
        pred_dir: PathBuf,
        /// Expected prediction width.
        #[arg(long, requires = "pred_height")]
        pred_width: Option<usize>,
        /// Expected prediction height.
        #[arg(long, requires = "pred_width")]
        pred_height: Option<usize>,
    },
    /// Rank demonstrations, allocate viewing subsets and build leakage-safe splits.
    RankSplit {
        /// Trial metadata JSON list.
        trials: PathBuf,
        #[arg(long, default_value_t = 0.6)]
        train: f64,
        #[arg(long, default_value_t = 0.2)]
        val: f64,
        #[arg(long, default_value_t = 0.2)]
        test: f64,
        /// Demonstrations selected per (task, expertise) group.
        #[arg(long)]
        quota: Option<usize>,
    },
    /// Synthetic gaze CSV with known fixations.
    Synth {
        #[arg(long, default_value_t = 3)]
        n_fixations: usize,
        #[arg(long, default_value_t = 0.2)]
        min_duration: f64,
        #[arg(long, default_value_t = 0.5)]
        max_duration: f64,
        #[arg(long, default_value_t = 0.02)]
        saccade_duration: f64,
        #[arg(long, default_value_t = 0.0)]
        jitter_sigma: f64,
        #[arg(long, default_value_t = 200.0)]
        rate: f64,
        #[arg(long, default_value_t = 400.0)]
        min_separation: f64,
        /// Write the generating fixations as JSON to this path.
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Convert SGM grids to 8-bit PGM images.
    ExportPgm {
        /// SGM file, or a directory of them.
        input: PathBuf,
    },
}

/// An error in how the command was invoked rather than in the data.
#[derive(Debug)]
struct Usage(String);

impl std::fmt::Display for Usage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for Usage {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    anyhow!(Usage(msg.into()))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.downcast_ref::<Usage>().is_some() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_DATA)
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let g = &cli.global;
    if let Some(jobs) = g.jobs {
        if jobs == 0 {
            return Err(usage("--jobs must be at least 1"));
        }
        rayon::ThreadPoolBuilder::new().num_threads(jobs).build_global()?;
    }
    match &cli.command {
        Command::Fixations { input, detection } => per_input(g, input, "csv", "json", |p| {
            let (_, det) = load_trace(g, p, detection)?;
            let segs = detect_fixations(&det, params(detection))?;
            Ok(json_bytes(&segs))
        }),
        Command::Metrics { input, fixations, detection } => {
            single_when(fixations.is_some(), input, "--fixations")?;
            per_input(g, input, "csv", "json", |p| {
                let (_, det) = load_trace(g, p, detection)?;
                let segs = segments_for(&det, fixations.as_deref(), detection)?;
                let mut m = summarize(&det, &segs)?;
                let points = det.valid_points();
                if !points.is_empty() {
                    m.set_hull_area(convex_hull(&points)?.area);
                }
                Ok(json_bytes(&m))
            })
        }
        Command::Heatmap { input, grid_width, grid_height, fps, tolerance, sigma, truncation } => {
            cmd_heatmap(g, input, (*grid_width, *grid_height), *fps, *tolerance, HeatmapParams { sigma: *sigma, truncation: *truncation })
        }
        Command::Fdm { input, fixations, sigma, normalize, detection } => {
            single_when(fixations.is_some(), input, "--fixations")?;
            if g.out.is_none() {
                return Err(usage("fdm writes SGM; pass --out"));
            }
            per_input(g, input, "csv", "sgm", |p| {
                let (native, det) = load_trace(g, p, detection)?;
                let segs = segments_for(&det, fixations.as_deref(), detection)?;
                Ok(encode_sgm(&build_fdm(&native, &segs, *sigma, *normalize)?))
            })
        }
        Command::CompareFdm { a, b, normalize } => {
            let (ga, gb) = (read_sgm(a)?, read_sgm(b)?);
            let cc = fdm_cc(&ga, &gb)?;
            let (pa, pb) = if *normalize {
                (ga.normalized()?, gb.normalized()?)
            } else {
                let prob = |grid: gazekit::SaliencyGrid, p: &Path| {
                    grid.into_probability().with_context(|| format!("{} is not a normalized FDM (use --normalize)", p.display()))
                };
                (prob(ga, a)?, prob(gb, b)?)
            };
            #[derive(Serialize)]
            struct Comparison {
                fdm_sim: f64,
                fdm_cc: f64,
            }
            emit(g.out.as_deref(), &json_bytes(&Comparison { fdm_sim: fdm_sim(&pa, &pb)?, fdm_cc: cc }))
        }
        Command::Eval { gt_dir, pred_dir, pred_width, pred_height } => {
            let gt = read_sgm_dir(gt_dir)?;
            let pred = read_sgm_dir(pred_dir)?;
            let native = pred_width.zip(*pred_height);
            let report = evaluate_sequence(&gt, &pred, native)?;
            emit(g.out.as_deref(), &json_bytes(&report))
        }
        Command::RankSplit { trials, train, val, test, quota } => {
            let fractions = SplitFractions::new(*train, *val, *test).map_err(|e| usage(e.to_string()))?;
            let records = parse_trials_json(&read(trials)?).with_context(|| format!("reading {}", trials.display()))?;
            let manifest = build_manifest(&records, fractions, g.seed, *quota)?;
            emit(g.out.as_deref(), &json_bytes(&manifest))
        }
        Command::Synth {
            n_fixations,
            min_duration,
            max_duration,
            saccade_duration,
            jitter_sigma,
            rate,
            min_separation,
            truth,
        } => {
            let spec = SynthSpec {
                seed: g.seed,
                n_fixations: *n_fixations,
                fixation_duration_range: (*min_duration, *max_duration),
                saccade_duration: *saccade_duration,
                jitter_sigma: *jitter_sigma,
                rate: *rate,
                width: g.width,
                height: g.height,
                min_separation: *min_separation,
            };
            for w in spec.warnings(IdtParams::default()) {
                eprintln!("warning: {w:?}: fixations may not be recovered with default thresholds");
            }
            let out = synth_trace(&spec)?;
            if let Some(path) = truth {
                write(path, &json_bytes(&out.segments))?;
            }
            let mut csv = Vec::new();
            write_gaze_csv(&out.trace, &mut csv)?;
            emit(g.out.as_deref(), &csv)
        }
        Command::ExportPgm { input } => {
            if g.out.is_none() {
                return Err(usage("export-pgm writes binary PGM; pass --out"));
            }
            per_input(g, input, "sgm", "pgm", |p| Ok(encode_pgm(&read_sgm(p)?)))
        }
    }
}

fn params(d: &Detection) -> IdtParams {
    IdtParams { t_min: d.t_min, d_max: d.d_max }
}

fn single_when(cond: bool, input: &Path, flag: &str) -> Result<()> {
    if cond && input.is_dir() {
        return Err(usage(format!("{flag} needs a single gaze CSV, not a directory")));
    }
    Ok(())
}

/// Loads a gaze CSV. Returns the trace at its native frame size and the
/// trace used for detection, which is rescaled when detection flags ask for it.
fn load_trace(g: &Global, path: &Path, d: &Detection) -> Result<(GazeTrace, GazeTrace)> {
    let trace = parse_gaze_csv(&read(path)?, g.width, g.height, g.coords.into())
        .with_context(|| format!("reading {}", path.display()))?;
    let det = match d.detect_width.zip(d.detect_height) {
        Some((w, h)) => trace.rescaled(w, h)?,
        None => trace.clone(),
    };
    Ok((trace, det))
}

fn segments_for(det: &GazeTrace, fixations: Option<&Path>, d: &Detection) -> Result<Vec<FixationSegment>> {
    match fixations {
        Some(p) => {
            let segs = parse_fixations_json(&read(p)?).with_context(|| format!("reading {}", p.display()))?;
            check_segments(det, &segs).with_context(|| format!("{} does not match the trace", p.display()))?;
            Ok(segs)
        }
        None => Ok(detect_fixations(det, params(d))?),
    }
}

fn cmd_heatmap(
    g: &Global,
    input: &Path,
    (grid_w, grid_h): (usize, usize),
    fps: f64,
    tolerance: Option<f64>,
    params: HeatmapParams,
) -> Result<()> {
    let Some(out) = g.out.as_deref() else {
        return Err(usage("heatmap writes one SGM per frame; pass --out <dir>"));
    };
    if !fps.is_finite() || fps <= 0.0 {
        return Err(usage("--fps must be positive"));
    }
    let trace = parse_gaze_csv(&read(input)?, g.width, g.height, g.coords.into())
        .with_context(|| format!("reading {}", input.display()))?;
    let (t0, t1) = (trace.samples()[0].t, trace.samples()[trace.len() - 1].t);
    let n_frames = ((t1 - t0) * fps).floor() as usize + 1;
    let times: Vec<f64> = (0..n_frames).map(|k| t0 + k as f64 / fps).collect();
    let tolerance = tolerance.unwrap_or(0.5 / fps);
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    let width = n_frames.to_string().len().max(5);
    times
        .par_chunks(64)
        .enumerate()
        .try_for_each(|(chunk, ts)| -> Result<()> {
            let frames = frame_heatmaps(&trace, ts, tolerance, grid_w, grid_h, params)?;
            for (k, frame) in frames.iter().enumerate() {
                let i = chunk * 64 + k;
                write(&out.join(format!("frame_{i:0width$}.sgm")), &encode_sgm(frame))?;
            }
            Ok(())
        })
}

/// Runs `f` on a single file, or on every `*.ext` file of a directory in
/// parallel, writing `<stem>.<out_ext>` files into the --out directory.
fn per_input<F>(g: &Global, input: &Path, ext: &str, out_ext: &str, f: F) -> Result<()>
where
    F: Fn(&Path) -> Result<Vec<u8>> + Sync,
{
    if !input.is_dir() {
        return emit(g.out.as_deref(), &f(input)?);
    }
    let Some(out) = g.out.as_deref() else {
        return Err(usage("directory input needs --out <dir>"));
    };
    let files = list_dir(input, ext)?;
    fs::create_dir_all(out).with_context(|| format!("creating {}", out.display()))?;
    files.par_iter().try_for_each(|p| {
        let stem = p.file_stem().expect("listed files have names");
        let target = out.join(stem).with_extension(out_ext);
        write(&target, &f(p).with_context(|| format!("processing {}", p.display()))?)
    })
}

fn list_dir(dir: &Path, ext: &str) -> Result<Vec<PathBuf>> {
    let mut files: Vec<PathBuf> = fs::read_dir(dir)
        .with_context(|| format!("listing {}", dir.display()))?
        .map(|e| e.map(|e| e.path()))
        .collect::<std::io::Result<_>>()?;
    files.retain(|p| p.is_file() && p.extension().is_some_and(|e| e == ext));
    files.sort();
    if files.is_empty() {
        bail!("no .{ext} files in {}", dir.display());
    }
    Ok(files)
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).with_context(|| format!("reading {}", path.display()))
}

fn write(path: &Path, bytes: &[u8]) -> Result<()> {
    fs::write(path, bytes).with_context(|| format!("writing {}", path.display()))
}

fn read_sgm(path: &Path) -> Result<gazekit::SaliencyGrid> {
    decode_sgm(&read(path)?).with_context(|| format!("decoding {}", path.display()))
}

fn read_sgm_dir(dir: &Path) -> Result<Vec<gazekit::SaliencyGrid>> {
    list_dir(dir, "sgm")?.par_iter().map(|p| read_sgm(p)).collect()
}

fn json_bytes<T: Serialize + ?Sized>(value: &T) -> Vec<u8> {
    let mut s = gazekit::json::to_string_pretty(value);
    s.push('\n');
    s.into_bytes()
}

fn emit(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(p) => write(p, bytes),
        None => {
            use std::io::Write;
            let mut stdout = std::io::stdout().lock();
            stdout.write_all(bytes)?;
            stdout.flush()?;
            Ok(())
        }
    }
}
