//! Command-line front end for the persistent-entropy pipeline.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use pentropy::persistence::write_barcode;
use pentropy::pipeline::{
    barcode_of_cloud, boxstats_csv, cloud_from_matrix, compare, detect_input, entropy_csv, entropy_json,
    run_entropy_batch, scatter_csv, EntropyInput, InfiniteMode, InputKind, PipelineConfig, PipelineError, SummaryTable,
};
use pentropy::synth::{self, SynthKind};
use pentropy::{load_label_matrix, Adjustment, PointCloud};

/// Exit status for a run where at least one input failed.
const EXIT_FAILED: u8 = 1;
/// Exit status for invalid arguments.
const EXIT_USAGE: u8 = 2;

#[derive(Parser)]
#[command(name = "pentropy", version, about = "Persistent entropy of cell tessellations")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Select cells from a label matrix and write their centroids as a point cloud CSV.
    Ingest(IngestArgs),
    /// Compute the persistence barcode of a point cloud (or label matrix).
    Barcode(BarcodeArgs),
    /// Persistent entropy summary for a batch of inputs.
    Entropy(EntropyArgs),
    /// Kruskal-Wallis and Dunn tests on an entropy summary CSV.
    Compare(CompareArgs),
    /// Generate synthetic point clouds.
    Synth(SynthArgs),
}

#[derive(Args)]
struct SelectArgs {
    /// Number of cells to select from each label matrix.
    #[arg(long = "cells", default_value_t = 400)]
    cells: usize,
    /// Spiral origin as ROW,COL (default: matrix centre).
    #[arg(long, value_parser = parse_start)]
    start: Option<(usize, usize)>,
}

#[derive(Args)]
struct IngestArgs {
    input: PathBuf,
    #[command(flatten)]
    select: SelectArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BarcodeArgs {
    input: PathBuf,
    #[command(flatten)]
    select: SelectArgs,
    /// Output CSV (stdout when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Also write the filtered complex, one simplex per line.
    #[arg(long)]
    dump_complex: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum InfiniteArg {
    Drop,
    Cap,
}

#[derive(Clone, Copy, ValueEnum)]
enum AdjustArg {
    None,
    Bonferroni,
    Holm,
    Bh,
}

impl From<AdjustArg> for Adjustment {
    fn from(a: AdjustArg) -> Self {
        match a {
            AdjustArg::None => Adjustment::None,
            AdjustArg::Bonferroni => Adjustment::Bonferroni,
            AdjustArg::Holm => Adjustment::Holm,
            AdjustArg::Bh => Adjustment::Bh,
        }
    }
}

#[derive(Args)]
struct EntropyArgs {
    /// Label matrices (.pgm, .csv) or point clouds (.csv with an x,y header).
    #[arg(required = true)]
    inputs: Vec<PathBuf>,
    #[command(flatten)]
    select: SelectArgs,
    #[arg(long, default_value_t = 2.0)]
    log_base: f64,
    #[arg(long, value_enum, default_value_t = InfiniteArg::Drop)]
    infinite: InfiniteArg,
    /// Group label for every input (default: parent directory name).
    #[arg(long)]
    group: Option<String>,
    /// Output directory for entropy.csv and entropy.json (stdout CSV when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write each input's barcode to OUT/barcodes/.
    #[arg(long, requires = "out")]
    dump_barcodes: bool,
    /// Worker threads (0 = all cores).
    #[arg(long, default_value_t = 0)]
    threads: usize,
}

#[derive(Args)]
struct CompareArgs {
    /// CSV with group, pe0, pe1 and pe_all columns.
    input: PathBuf,
    #[arg(long = "adjust", value_enum, default_value_t = AdjustArg::Bh)]
    adjust: AdjustArg,
    /// Significance threshold.
    #[arg(long, default_value_t = 0.005)]
    alpha: f64,
    /// Output directory for stats.json, scatter.csv and boxstats.csv (stdout JSON when omitted).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum KindArg {
    Uniform,
    Hexjitter,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, value_enum, default_value_t = KindArg::Hexjitter)]
    kind: KindArg,
    /// Jitter in lattice spacings (hexjitter only).
    #[arg(long, default_value_t = 0.0)]
    sigma: f64,
    #[arg(long, default_value_t = 400)]
    points: usize,
    #[arg(long, default_value_t = 1)]
    samples: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output file for one sample, or directory for several (stdout when omitted and samples = 1).
    #[arg(long)]
    out: Option<PathBuf>,
    /// Write a SIZE x SIZE Voronoi label raster (.pgm) of each sample instead of the point cloud.
    #[arg(long, value_name = "SIZE")]
    raster: Option<usize>,
}

fn parse_start(s: &str) -> Result<(usize, usize), String> {
    let (r, c) = s.split_once(',').ok_or("expected ROW,COL")?;
    let n = |t: &str| t.trim().parse::<usize>().map_err(|e| format!("{t:?}: {e}"));
    Ok((n(r)?, n(c)?))
}

/// Raised for argument values that clap cannot check on its own.
#[derive(Debug)]
struct UsageError(String);

impl std::fmt::Display for UsageError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for UsageError {}

fn usage(msg: impl Into<String>) -> anyhow::Error {
    UsageError(msg.into()).into()
}

fn write_output(out: Option<&Path>, content: &[u8]) -> Result<()> {
    match out {
        Some(p) => fs::write(p, content).with_context(|| format!("writing {}", p.display())),
        None => {
            use std::io::Write;
            std::io::stdout().write_all(content).context("writing to stdout")
        }
    }
}

fn config(select: &SelectArgs) -> PipelineConfig {
    PipelineConfig { n_cells: select.cells, start: select.start, ..Default::default() }
}

fn checked(cfg: PipelineConfig) -> Result<PipelineConfig> {
    cfg.validate().map_err(|e| usage(e.to_string()))?;
    Ok(cfg)
}

fn load_cloud(path: &Path, cfg: &PipelineConfig) -> Result<PointCloud> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    let pc = match detect_input(path, &bytes)? {
        InputKind::Cloud => PointCloud::from_csv(&String::from_utf8_lossy(&bytes))?,
        InputKind::Labels(fmt) => cloud_from_matrix(&load_label_matrix(&bytes, fmt)?, cfg)?,
    };
    Ok(pc)
}

fn cmd_ingest(a: &IngestArgs) -> Result<u8> {
    let cfg = checked(config(&a.select))?;
    let pc = load_cloud(&a.input, &cfg).with_context(|| a.input.display().to_string())?;
    write_output(a.out.as_deref(), pc.to_csv().as_bytes())?;
    Ok(0)
}

fn cmd_barcode(a: &BarcodeArgs) -> Result<u8> {
    let cfg = checked(config(&a.select))?;
    let pc = load_cloud(&a.input, &cfg).with_context(|| a.input.display().to_string())?;
    let (fc, b) = barcode_of_cloud(&pc).with_context(|| a.input.display().to_string())?;
    if let Some(p) = &a.dump_complex {
        fs::write(p, fc.dump()).with_context(|| format!("writing {}", p.display()))?;
    }
    write_output(a.out.as_deref(), write_barcode(&b).as_bytes())?;
    Ok(0)
}

fn init_threads(n: usize) -> Result<()> {
    #[cfg(feature = "parallel")]
    if n > 0 {
        rayon::ThreadPoolBuilder::new().num_threads(n).build_global().context("starting thread pool")?;
    }
    #[cfg(not(feature = "parallel"))]
    let _ = n;
    Ok(())
}

fn cmd_entropy(a: &EntropyArgs) -> Result<u8> {
    let cfg = checked(PipelineConfig {
        log_base: a.log_base,
        infinite: match a.infinite {
            InfiniteArg::Drop => InfiniteMode::Drop,
            InfiniteArg::Cap => InfiniteMode::Cap,
        },
        ..config(&a.select)
    })?;
    init_threads(a.threads)?;
    let inputs: Vec<EntropyInput> = a.inputs.iter().map(|p| EntropyInput::new(p, a.group.as_deref())).collect();
    let results = run_entropy_batch(&inputs, &cfg);

    let mut ok = Vec::new();
    let mut failed = 0;
    for (inp, r) in inputs.iter().zip(results) {
        match r {
            Ok(s) => ok.push(s),
            Err(e @ PipelineError::Io { .. }) => {
                failed += 1;
                eprintln!("error: {e}");
            }
            Err(e) => {
                failed += 1;
                eprintln!("error: {}: {e}", inp.path.display());
            }
        }
    }

    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_output(Some(&dir.join("entropy.csv")), entropy_csv(&ok).as_bytes())?;
            write_output(Some(&dir.join("entropy.json")), entropy_json(&ok, &cfg).as_bytes())?;
            if a.dump_barcodes {
                let bdir = dir.join("barcodes");
                fs::create_dir_all(&bdir).with_context(|| format!("creating {}", bdir.display()))?;
                for (i, s) in ok.iter().enumerate() {
                    let stem = Path::new(&s.image).file_stem().map(|s| s.to_string_lossy().into_owned());
                    let name = format!("{:04}_{}.csv", i, stem.unwrap_or_default());
                    write_output(Some(&bdir.join(name)), write_barcode(&s.barcode).as_bytes())?;
                }
            }
        }
        None => write_output(None, entropy_csv(&ok).as_bytes())?,
    }
    if failed > 0 {
        eprintln!("{failed} of {} inputs failed", inputs.len());
        return Ok(EXIT_FAILED);
    }
    Ok(0)
}

fn cmd_compare(a: &CompareArgs) -> Result<u8> {
    let cfg = checked(PipelineConfig { adjustment: a.adjust.into(), alpha_threshold: a.alpha, ..Default::default() })?;
    let text = fs::read_to_string(&a.input).with_context(|| format!("reading {}", a.input.display()))?;
    let table = SummaryTable::parse(&text).with_context(|| a.input.display().to_string())?;
    let report = compare(&table, &cfg).with_context(|| a.input.display().to_string())?;
    let json = report.to_json() + "\n";
    match &a.out {
        Some(dir) => {
            fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
            write_output(Some(&dir.join("stats.json")), json.as_bytes())?;
            write_output(Some(&dir.join("scatter.csv")), scatter_csv(&table).as_bytes())?;
            write_output(Some(&dir.join("boxstats.csv")), boxstats_csv(&table).as_bytes())?;
        }
        None => write_output(None, json.as_bytes())?,
    }
    Ok(0)
}

fn cmd_synth(a: &SynthArgs) -> Result<u8> {
    if a.points < 3 {
        return Err(usage(format!("points must be at least 3, got {}", a.points)));
    }
    if !(a.sigma >= 0.0 && a.sigma.is_finite()) {
        return Err(usage(format!("sigma must be finite and >= 0, got {}", a.sigma)));
    }
    if a.samples == 0 {
        return Err(usage("samples must be at least 1"));
    }
    if a.samples > 1 && a.out.is_none() {
        return Err(usage("--out DIR is required when samples > 1"));
    }
    let kind = match a.kind {
        KindArg::Uniform => SynthKind::Uniform,
        KindArg::Hexjitter => SynthKind::HexJitter { sigma: a.sigma },
    };
    let render = |seed: u64| -> Vec<u8> {
        let pc = synth::generate(kind, a.points, seed);
        match a.raster {
            Some(size) => {
                let sites: Vec<_> =
                    pc.points().iter().map(|p| pentropy::Point::new(p.x * size as f64, p.y * size as f64)).collect();
                synth::voronoi_label_map(size, &sites).to_pgm()
            }
            None => pc.to_csv().into_bytes(),
        }
    };
    let ext = if a.raster.is_some() { "pgm" } else { "csv" };
    if a.samples == 1 {
        write_output(a.out.as_deref(), &render(a.seed))?;
        return Ok(0);
    }
    let dir = a.out.as_deref().expect("checked above");
    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    for i in 0..a.samples {
        let seed = a.seed.wrapping_add(i as u64);
        write_output(Some(&dir.join(format!("sample_{i:03}.{ext}"))), &render(seed))?;
    }
    Ok(0)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Ingest(a) => cmd_ingest(a),
        Command::Barcode(a) => cmd_barcode(a),
        Command::Entropy(a) => cmd_entropy(a),
        Command::Compare(a) => cmd_compare(a),
        Command::Synth(a) => cmd_synth(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(e) => {
            eprintln!("error: {e:#}");
            if e.is::<UsageError>() {
                ExitCode::from(EXIT_USAGE)
            } else {
                ExitCode::from(EXIT_FAILED)
            }
        }
    }
}
