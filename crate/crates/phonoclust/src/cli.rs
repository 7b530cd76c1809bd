//! Command-line front end.
//!
//! Every subcommand reads the artifacts of the previous stage from disk, so
//! stages can be run, inspected and replaced one at a time. `pipeline` runs
//! them all in order through the same files.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use phonoclust_core::cluster::{
    dbscan_cluster, default_min_samples_grid, default_threshold_grid, grouping_cluster, project_2d, silhouette,
    sweep, Clustering, Method, SweepMethod,
};
use phonoclust_core::ingest::{normalize_sequence, NormalizationTarget};
use phonoclust_core::phonology::extract_phonology;
use phonoclust_core::segment::{length_histogram, segment_hand};
use phonoclust_core::seqmatch::{match_spans, span_report, SpanMatch};
use phonoclust_core::synth::generate;
use phonoclust_core::{AffinityMatrix, Phoneme, PoseSequence, Side};

use crate::config::{ClusterMethod, ConfigLayer, Hand, PipelineConfig};
use crate::error::DataError;
use crate::formats;
use crate::openpose::load_directory;
use crate::parallel::affinity_matrix_with_jobs;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 1;
pub const EXIT_DATA: i32 = 2;

#[derive(Parser, Debug)]
#[command(name = "phonoclust", version, about = "Phoneme segmentation, clustering and repeat discovery for signed songs")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

fn on_off(s: &str) -> Result<bool, String> {
    match s {
        "on" | "true" => Ok(true),
        "off" | "false" => Ok(false),
        _ => Err(format!("expected on or off, got {s:?}")),
    }
}

/// Settings shared by all subcommands; unset flags fall back to the config file.
#[derive(Args, Debug, Clone, Default)]
struct Settings {
    /// Flat JSON config file
    #[arg(long)]
    config: Option<PathBuf>,
    /// Frames per second of the source video
    #[arg(long)]
    fps: Option<f64>,
    /// Shortest phoneme kept, in frames
    #[arg(long)]
    min_len: Option<usize>,
    /// Three-tap smoothing of the speed series (on|off)
    #[arg(long, value_parser = on_off)]
    smoothing: Option<bool>,
    /// Similarity threshold T in [0, 1]
    #[arg(long)]
    threshold: Option<f64>,
    /// Insertion and deletion cost of the edit distance (at least 1)
    #[arg(long)]
    deletion_cost: Option<f64>,
    /// DBSCAN neighbourhood radius
    #[arg(long)]
    eps: Option<f64>,
    /// DBSCAN core-point size
    #[arg(long)]
    min_samples: Option<usize>,
    /// Longest matched span, in phonemes
    #[arg(long)]
    max_span_len: Option<usize>,
    /// Clustering method
    #[arg(long, value_enum)]
    method: Option<ClusterMethod>,
    /// Hand clustered, scored and projected; hands are never compared with each other
    #[arg(long, value_enum)]
    hand: Option<Hand>,
    /// Worker threads for the affinity matrix (1 = sequential, 0 = all cores)
    #[arg(long)]
    jobs: Option<usize>,
}

impl Settings {
    fn flag_layer(&self, input: Option<&PathBuf>, output: Option<&PathBuf>) -> ConfigLayer {
        ConfigLayer {
            fps: self.fps,
            min_phoneme_len: self.min_len,
            smoothing: self.smoothing,
            threshold: self.threshold,
            deletion_cost: self.deletion_cost,
            eps: self.eps,
            min_samples: self.min_samples,
            max_span_len: self.max_span_len,
            method: self.method,
            hand: self.hand,
            input: input.cloned(),
            output: output.cloned(),
        }
    }

    fn resolve(&self, input: Option<&PathBuf>, output: Option<&PathBuf>) -> Result<PipelineConfig, Failure> {
        let flags = self.flag_layer(input, output);
        flags.validate().map_err(Failure::Usage)?;
        let file = match &self.config {
            Some(path) => ConfigLayer::from_file(path)?,
            None => ConfigLayer::default(),
        };
        Ok(PipelineConfig::resolve(flags.over(file)))
    }
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Load an OpenPose export directory or keypoints JSON-lines file and normalize it
    Ingest {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Per-frame orientation and location of both hands
    Extract {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Cut hand trajectories into phonemes at speed extrema
    Segment {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Boundary frames per hand (JSON)
        #[arg(long)]
        boundaries: Option<PathBuf>,
        /// Phoneme length histogram (CSV)
        #[arg(long)]
        histogram: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Cluster phonemes by grouping or DBSCAN
    Cluster {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Also write the distance matrix (CSV)
        #[arg(long)]
        affinity: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Cluster statistics over a parameter grid (thresholds, or min_samples for DBSCAN)
    Sweep {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Mean silhouette of an existing clustering
    Silhouette {
        #[arg(short, long)]
        input: PathBuf,
        /// Clustering table written by `cluster`
        #[arg(long)]
        labels: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Two-dimensional embedding of the distance matrix
    Project {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Clustering table; clusters with the configured method when absent
        #[arg(long)]
        labels: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
    /// Find repeated phoneme spans
    Match {
        #[arg(short, long)]
        input: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        settings: Settings,
    },
    /// Render a synthetic script to keypoints and ground truth
    Synth {
        #[arg(long)]
        script: PathBuf,
        #[arg(short, long)]
        output: PathBuf,
        /// Ground-truth JSON
        #[arg(long)]
        truth: PathBuf,
    },
    /// Run every stage, writing all artifacts into one directory
    Pipeline {
        #[arg(short, long)]
        input: Option<PathBuf>,
        /// Output directory
        #[arg(short, long)]
        output: Option<PathBuf>,
        #[command(flatten)]
        settings: Settings,
    },
}

#[derive(Debug)]
enum Failure {
    Usage(String),
    Data(DataError),
}

impl From<DataError> for Failure {
    fn from(e: DataError) -> Self {
        Failure::Data(e)
    }
}

/// Parses `args` (program name first), runs the command and returns the exit status.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match Cli::try_parse_from(&args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            if !e.use_stderr() {
                return EXIT_OK;
            }
            eprintln!("\n{}", usage_text(&args));
            return EXIT_USAGE;
        }
    };
    match dispatch(cli.command) {
        Ok(summary) => {
            println!("{summary}");
            EXIT_OK
        }
        Err(Failure::Usage(msg)) => {
            eprintln!("error: {msg}");
            EXIT_USAGE
        }
        Err(Failure::Data(e)) => {
            eprintln!("error: {e}");
            EXIT_DATA
        }
    }
}

/// Full help of the subcommand named in `args`, or of the program.
fn usage_text(args: &[OsString]) -> String {
    use clap::CommandFactory;
    let mut root = Cli::command();
    let name = args
        .iter()
        .skip(1)
        .filter_map(|a| a.to_str())
        .find(|a| root.find_subcommand(a).is_some())
        .map(str::to_owned);
    match name.and_then(|n| root.find_subcommand_mut(&n).cloned().map(|sub| sub.bin_name(format!("phonoclust {n}")))) {
        Some(mut sub) => sub.render_help().to_string(),
        None => root.render_help().to_string(),
    }
}

fn dispatch(command: Command) -> Result<String, Failure> {
    match command {
        Command::Ingest { input, output, settings } => {
            let cfg = settings.resolve(Some(&input), Some(&output))?;
            Ok(ingest(&input, &output, &cfg)?)
        }
        Command::Extract { input, output, settings } => {
            let cfg = settings.resolve(Some(&input), Some(&output))?;
            Ok(extract(&input, &output, &cfg)?)
        }
        Command::Segment {
            input,
            output,
            boundaries,
            histogram,
            settings,
        } => {
            let cfg = settings.resolve(Some(&input), Some(&output))?;
            Ok(segment(&input, &output, boundaries.as_deref(), histogram.as_deref(), &cfg)?)
        }
        Command::Cluster {
            input,
            output,
            affinity,
            settings,
        } => {
            let cfg = settings.resolve(Some(&input), Some(&output))?;
            Ok(cluster(&input, &output, affinity.as_deref(), &cfg, settings.jobs)?)
        }
        Command::Sweep { input, output, settings } => {
            let cfg = settings.resolve(Some(&input), Some(&output))?;
            Ok(sweep_stage(&input, &output, cfg.method, &cfg, settings.jobs)?)
        }
        Command::Silhouette { input, labels, settings } => {
            let cfg = settings.resolve(Some(&input), None)?;
            Ok(silhouette_stage(&input, &labels, &cfg, settings.jobs)?)
        }
        Command::Project {
            input,
            output,
            labels,
            settings,
        } => {
            let cfg = settings.resolve(Some(&input), Some(&output))?;
            Ok(project(&input, &output, labels.as_deref(), &cfg, settings.jobs)?)
        }
        Command::Match { input, output, settings } => {
            let cfg = settings.resolve(Some(&input), Some(&output))?;
            let (summary, table) = match_stage(&input, &output, &cfg)?;
            print!("{table}");
            Ok(summary)
        }
        Command::Synth { script, output, truth } => Ok(synth(&script, &output, &truth)?),
        Command::Pipeline {
            input,
            output,
            settings,
        } => {
            let cfg = settings.resolve(input.as_ref(), output.as_ref())?;
            let input = cfg
                .input
                .clone()
                .ok_or_else(|| Failure::Usage("pipeline needs --input or an `input` config key".into()))?;
            let output = cfg
                .output
                .clone()
                .ok_or_else(|| Failure::Usage("pipeline needs --output or an `output` config key".into()))?;
            Ok(pipeline(&input, &output, &cfg, settings.jobs)?)
        }
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<File>) -> io::Result<()>) -> Result<(), DataError> {
    let file = File::create(path).map_err(|e| DataError::io(path, e))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(|e| DataError::io(path, e))
}

/// Phonemes of the configured hand, in file order; their positions are the phoneme ids.
fn read_hand_phonemes(path: &Path, cfg: &PipelineConfig) -> Result<Vec<Phoneme>, DataError> {
    let side = cfg.hand.side();
    let phonemes: Vec<Phoneme> = formats::read_phonemes(path)?
        .into_iter()
        .filter(|p| p.hand() == side)
        .collect();
    if phonemes.is_empty() {
        return Err(DataError::new(path, format!("no {} hand phonemes", side.as_str())));
    }
    Ok(phonemes)
}

fn affinity(path: &Path, phonemes: &[Phoneme], cfg: &PipelineConfig, jobs: Option<usize>) -> Result<AffinityMatrix, DataError> {
    affinity_matrix_with_jobs(phonemes, &cfg.similarity(), jobs).map_err(|e| DataError::new(path, e))
}

fn clustering(matrix: &AffinityMatrix, cfg: &PipelineConfig) -> Clustering {
    match cfg.method {
        ClusterMethod::Grouping => grouping_cluster(matrix, &cfg.similarity()),
        ClusterMethod::Dbscan => dbscan_cluster(matrix, &cfg.dbscan()),
    }
}

fn describe(c: &Clustering) -> String {
    let method = match c.method {
        Method::Grouping { threshold } => format!("grouping T={}", formats::sig9(threshold)),
        Method::Dbscan { eps, min_samples } => format!("dbscan eps={} min_samples={min_samples}", formats::sig9(eps)),
    };
    let sil = c.silhouette.map_or_else(|| "undefined".to_owned(), |s| format!("{s:.4}"));
    format!(
        "{method}: {} clusters over {} phonemes (mean size {:.2}, noise {}, silhouette {sil})",
        c.n_clusters,
        c.labels.len(),
        c.mean_cluster_size(),
        c.noise_count()
    )
}

pub fn load_pose_input(input: &Path, fps: f64) -> Result<(PoseSequence, String), DataError> {
    if input.is_dir() {
        let load = load_directory(input)?;
        let note = format!(
            "{} missing files, {} frames without a person",
            load.missing_files.len(),
            load.empty_frames.len()
        );
        let seq = PoseSequence::new(load.frames, fps, load.prefix).map_err(|e| DataError::new(input, e))?;
        Ok((seq, note))
    } else {
        Ok((formats::read_sequence(input, fps)?, "keypoints JSON-lines".to_owned()))
    }
}

fn ingest(input: &Path, output: &Path, cfg: &PipelineConfig) -> Result<String, DataError> {
    let (seq, note) = load_pose_input(input, cfg.fps)?;
    let normalized = normalize_sequence(&seq, NormalizationTarget::default()).map_err(|e| DataError::new(input, e))?;
    write_file(output, |w| formats::write_keypoints(w, normalized.frames()))?;
    Ok(format!(
        "ingest: {} frames normalized ({note}) -> {}",
        normalized.len(),
        output.display()
    ))
}

fn extract(input: &Path, output: &Path, cfg: &PipelineConfig) -> Result<String, DataError> {
    let seq = formats::read_sequence(input, cfg.fps)?;
    let frames = extract_phonology(&seq);
    write_file(output, |w| formats::write_phonology(w, &frames))?;
    let count = |side: Side| frames.iter().filter(|f| f.hand(side).symbol().is_some()).count();
    Ok(format!(
        "extract: {} frames, right hand described in {}, left in {} -> {}",
        frames.len(),
        count(Side::Right),
        count(Side::Left),
        output.display()
    ))
}

fn segment(
    input: &Path,
    output: &Path,
    boundaries: Option<&Path>,
    histogram: Option<&Path>,
    cfg: &PipelineConfig,
) -> Result<String, DataError> {
    let frames = formats::read_phonology(input)?;
    let mut phonemes = Vec::new();
    let mut cuts = Vec::new();
    for side in Side::BOTH {
        let seg = segment_hand(&frames, side, cfg.segmentation()).map_err(|e| DataError::new(input, e))?;
        phonemes.extend(seg.phonemes);
        cuts.push((side, seg.boundaries));
    }
    write_file(output, |w| formats::write_phonemes(w, &phonemes))?;
    if let Some(path) = boundaries {
        write_file(path, |w| formats::write_boundaries(w, &cuts))?;
    }
    if let Some(path) = histogram {
        write_file(path, |w| formats::write_histogram(w, &length_histogram(&phonemes)))?;
    }
    let mean = if phonemes.is_empty() {
        0.0
    } else {
        phonemes.iter().map(Phoneme::len).sum::<usize>() as f64 / phonemes.len() as f64
    };
    Ok(format!(
        "segment: {} phonemes (mean length {mean:.2} frames) from {} boundaries -> {}",
        phonemes.len(),
        cuts.iter().map(|(_, b)| b.len()).sum::<usize>(),
        output.display()
    ))
}

fn cluster(
    input: &Path,
    output: &Path,
    affinity_out: Option<&Path>,
    cfg: &PipelineConfig,
    jobs: Option<usize>,
) -> Result<String, DataError> {
    let phonemes = read_hand_phonemes(input, cfg)?;
    let matrix = affinity(input, &phonemes, cfg, jobs)?;
    if let Some(path) = affinity_out {
        write_file(path, |w| formats::write_affinity(w, &matrix))?;
    }
    let c = clustering(&matrix, cfg);
    write_file(output, |w| formats::write_clustering(w, &phonemes, &c))?;
    Ok(format!("cluster: {} hand, {} -> {}", cfg.hand.side().as_str(), describe(&c), output.display()))
}

fn sweep_stage(
    input: &Path,
    output: &Path,
    method: ClusterMethod,
    cfg: &PipelineConfig,
    jobs: Option<usize>,
) -> Result<String, DataError> {
    let phonemes = read_hand_phonemes(input, cfg)?;
    let matrix = affinity(input, &phonemes, cfg, jobs)?;
    let (method, grid, name) = match method {
        ClusterMethod::Grouping => (
            SweepMethod::Grouping {
                deletion_cost: cfg.deletion_cost,
            },
            default_threshold_grid(),
            "threshold",
        ),
        ClusterMethod::Dbscan => (SweepMethod::Dbscan { eps: cfg.eps }, default_min_samples_grid(), "min_samples"),
    };
    let rows = sweep(&matrix, method, &grid).map_err(|e| DataError::new(input, e))?;
    write_file(output, |w| formats::write_sweep(w, &rows))?;
    Ok(format!(
        "sweep: {} {name} values over {} phonemes -> {}",
        rows.len(),
        phonemes.len(),
        output.display()
    ))
}

fn clustering_from_labels(path: &Path, labels: Vec<Option<usize>>, cfg: &PipelineConfig) -> Result<Clustering, DataError> {
    let n_clusters = labels.iter().flatten().max().map_or(0, |m| m + 1);
    let mut seen = vec![false; n_clusters];
    for l in labels.iter().flatten() {
        seen[*l] = true;
    }
    if seen.iter().any(|s| !s) {
        return Err(DataError::new(path, "cluster labels are not contiguous from 0"));
    }
    let method = match cfg.method {
        ClusterMethod::Grouping => Method::Grouping {
            threshold: cfg.threshold,
        },
        ClusterMethod::Dbscan => Method::Dbscan {
            eps: cfg.eps,
            min_samples: cfg.min_samples,
        },
    };
    Ok(Clustering {
        labels,
        method,
        n_clusters,
        silhouette: None,
    })
}

fn silhouette_stage(input: &Path, labels: &Path, cfg: &PipelineConfig, jobs: Option<usize>) -> Result<String, DataError> {
    let phonemes = read_hand_phonemes(input, cfg)?;
    let table = formats::read_labels(labels)?;
    if table.len() != phonemes.len() {
        return Err(DataError::new(
            labels,
            format!("{} labels for {} phonemes", table.len(), phonemes.len()),
        ));
    }
    let c = clustering_from_labels(labels, table, cfg)?;
    let matrix = affinity(input, &phonemes, cfg, jobs)?;
    let s = silhouette(&matrix, &c).map_err(|e| DataError::new(labels, e))?;
    Ok(match s {
        Some(s) => format!("silhouette: {} over {} clusters", formats::sig9(s), c.n_clusters),
        None => format!("silhouette: undefined ({} clusters)", c.n_clusters),
    })
}

fn project(
    input: &Path,
    output: &Path,
    labels: Option<&Path>,
    cfg: &PipelineConfig,
    jobs: Option<usize>,
) -> Result<String, DataError> {
    let phonemes = read_hand_phonemes(input, cfg)?;
    let matrix = affinity(input, &phonemes, cfg, jobs)?;
    let labels = match labels {
        Some(path) => {
            let l = formats::read_labels(path)?;
            if l.len() != phonemes.len() {
                return Err(DataError::new(path, format!("{} labels for {} phonemes", l.len(), phonemes.len())));
            }
            l
        }
        None => clustering(&matrix, cfg).labels,
    };
    let p = project_2d(&matrix).map_err(|e| DataError::new(input, e))?;
    write_file(output, |w| formats::write_projection(w, &p, Some(&labels)))?;
    Ok(format!(
        "project: {} points, explained {:.3}/{:.3} -> {}",
        p.coords.len(),
        p.explained[0],
        p.explained[1],
        output.display()
    ))
}

fn match_stage(input: &Path, output: &Path, cfg: &PipelineConfig) -> Result<(String, String), DataError> {
    let phonemes = formats::read_phonemes(input)?;
    let sim = cfg.similarity();
    let mut per_hand: Vec<(Side, Vec<SpanMatch>)> = Vec::new();
    let mut table = String::new();
    for side in Side::BOTH {
        let hand: Vec<Phoneme> = phonemes.iter().filter(|p| p.hand() == side).cloned().collect();
        let matches = match_spans(&hand, &sim, cfg.max_span_len);
        if !matches.is_empty() {
            table.push_str(&format!("{} hand\n", side.as_str()));
            table.push_str(&span_report(&matches, cfg.fps));
        }
        per_hand.push((side, matches));
    }
    write_file(output, |w| formats::write_matches(w, &per_hand))?;
    let total: usize = per_hand.iter().map(|(_, m)| m.len()).sum();
    let longest = per_hand
        .iter()
        .flat_map(|(_, m)| m.iter().map(|m| m.a.phoneme_count()))
        .max()
        .unwrap_or(0);
    Ok((
        format!(
            "match: {total} repeated spans (longest {longest} phonemes) -> {}",
            output.display()
        ),
        table,
    ))
}

fn synth(script: &Path, output: &Path, truth: &Path) -> Result<String, DataError> {
    let s = formats::read_script(script)?;
    let (seq, gt) = generate(&s).map_err(|e| DataError::new(script, e))?;
    write_file(output, |w| formats::write_keypoints(w, seq.frames()))?;
    write_file(truth, |w| formats::write_ground_truth(w, &gt))?;
    Ok(format!(
        "synth: {} frames, {} true boundaries, {} repeats -> {}",
        seq.len(),
        gt.true_boundaries.len(),
        gt.verse_spans.len(),
        output.display()
    ))
}

/// File names written by `pipeline` inside its output directory.
pub mod artifacts {
    pub const KEYPOINTS: &str = "keypoints.jsonl";
    pub const PHONOLOGY: &str = "phonology.jsonl";
    pub const PHONEMES: &str = "phonemes.json";
    pub const BOUNDARIES: &str = "boundaries.json";
    pub const HISTOGRAM: &str = "histogram.csv";
    pub const AFFINITY: &str = "affinity.csv";
    pub const CLUSTERS: &str = "clusters.csv";
    pub const SWEEP_THRESHOLD: &str = "sweep_threshold.csv";
    pub const SWEEP_MIN_SAMPLES: &str = "sweep_min_samples.csv";
    pub const PROJECTION: &str = "projection.csv";
    pub const MATCHES: &str = "matches.json";
    pub const MATCH_TABLE: &str = "matches.txt";

    pub const ALL: [&str; 12] = [
        KEYPOINTS,
        PHONOLOGY,
        PHONEMES,
        BOUNDARIES,
        HISTOGRAM,
        AFFINITY,
        CLUSTERS,
        SWEEP_THRESHOLD,
        SWEEP_MIN_SAMPLES,
        PROJECTION,
        MATCHES,
        MATCH_TABLE,
    ];
}

fn pipeline(input: &Path, out: &Path, cfg: &PipelineConfig, jobs: Option<usize>) -> Result<String, DataError> {
    use artifacts::*;
    fs::create_dir_all(out).map_err(|e| DataError::io(out, e))?;
    let at = |name: &str| out.join(name);
    ingest(input, &at(KEYPOINTS), cfg)?;
    extract(&at(KEYPOINTS), &at(PHONOLOGY), cfg)?;
    segment(
        &at(PHONOLOGY),
        &at(PHONEMES),
        Some(&at(BOUNDARIES)),
        Some(&at(HISTOGRAM)),
        cfg,
    )?;
    let cluster_summary = cluster(&at(PHONEMES), &at(CLUSTERS), Some(&at(AFFINITY)), cfg, jobs)?;
    sweep_stage(&at(PHONEMES), &at(SWEEP_THRESHOLD), ClusterMethod::Grouping, cfg, jobs)?;
    sweep_stage(&at(PHONEMES), &at(SWEEP_MIN_SAMPLES), ClusterMethod::Dbscan, cfg, jobs)?;
    project(&at(PHONEMES), &at(PROJECTION), Some(&at(CLUSTERS)), cfg, jobs)?;
    let (match_summary, table) = match_stage(&at(PHONEMES), &at(MATCHES), cfg)?;
    write_file(&at(MATCH_TABLE), |w| w.write_all(table.as_bytes()))?;
    let strip = |s: &str| s.split(" -> ").next().unwrap_or(s).to_owned();
    Ok(format!(
        "pipeline: {}; {} -> {}",
        strip(&cluster_summary),
        strip(&match_summary),
        out.display()
    ))
}
