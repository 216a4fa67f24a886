//! `elf`: statistics, refactor passes, dataset collection, training and
//! equivalence checking for AIGER files.
//!
//! Exit codes: 0 on success or equivalence, 1 on a verification mismatch,
//! 2 on usage or I/O errors.

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use elf_core::aig::{parse_aiger, write_aiger};
use elf_core::cut::DEFAULT_MAX_LEAVES;
use elf_core::dataset::{self, DatasetRow};
use elf_core::model::{self, load_model, save_model, Metrics, Mlp, TrainConfig};
use elf_core::refactor::{collect_labels, relative_difference, run_elf, run_refactor, PassParams, PassStats};
use elf_core::verify::{check_equiv_exhaustive, check_equiv_random, Verdict, DEFAULT_PATTERNS};
use elf_core::Aig;

#[derive(Parser)]
#[command(name = "elf", version, about = "AIG refactoring with learned cut pruning")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct PassFlags {
    /// Maximum cut leaves.
    #[arg(short = 'N', long = "max-leaves", default_value_t = DEFAULT_MAX_LEAVES)]
    max_leaves: usize,
    /// Also commit zero-gain replacements.
    #[arg(short = 'z', long = "zero-cost")]
    zero_cost: bool,
    /// Reject replacements that raise the root level.
    #[arg(short = 'l', long = "preserve-level")]
    preserve_level: bool,
}

impl PassFlags {
    fn params(&self, threshold: f64) -> PassParams {
        PassParams {
            max_leaves: self.max_leaves,
            zero_cost: self.zero_cost,
            preserve_level: self.preserve_level,
            threshold,
        }
    }
}

#[derive(Subcommand)]
enum Cmd {
    /// Print AND count, depth and interface size.
    Stats { input: PathBuf },
    /// Run one refactor pass.
    Refactor {
        input: PathBuf,
        output: PathBuf,
        #[command(flatten)]
        flags: PassFlags,
    },
    /// Run one refactor pass that skips nodes the classifier predicts to fail.
    Elf {
        input: PathBuf,
        output: PathBuf,
        #[arg(short, long)]
        model: PathBuf,
        /// Nodes predicted below this probability are skipped.
        #[arg(short = 't', long, default_value_t = 0.5)]
        threshold: f64,
        #[command(flatten)]
        flags: PassFlags,
    },
    /// Label every node by running the baseline pass; write a dataset CSV.
    Collect {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        output: PathBuf,
        #[command(flatten)]
        flags: PassFlags,
    },
    /// Train on every design except the holdout, then evaluate on it.
    Train {
        dataset: PathBuf,
        #[arg(long)]
        holdout: String,
        #[arg(short, long)]
        output: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 30)]
        epochs: usize,
        /// Samples drawn per epoch (default: training-set size).
        #[arg(long)]
        samples_per_epoch: Option<usize>,
    },
    /// Report classifier metrics per design.
    Eval {
        dataset: PathBuf,
        #[arg(short, long)]
        model: PathBuf,
        /// Restrict to one design.
        #[arg(long)]
        design: Option<String>,
        #[arg(short = 't', long, default_value_t = 0.5)]
        threshold: f64,
    },
    /// Check two graphs for equivalence by simulation.
    Verify {
        a: PathBuf,
        b: PathBuf,
        /// Random patterns.
        #[arg(short = 'n', long, default_value_t = DEFAULT_PATTERNS)]
        patterns: usize,
        /// Enumerate every input assignment (at most 16 inputs).
        #[arg(short = 'x', long)]
        exhaustive: bool,
        #[arg(long, default_value_t = 1)]
        seed: u64,
    },
    /// Compare the baseline and pruned passes per design.
    Bench {
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(short, long)]
        model: PathBuf,
        #[arg(short = 't', long, default_value_t = 0.5)]
        threshold: f64,
        /// Also write the report as CSV, with unrounded numbers.
        #[arg(long)]
        csv: Option<PathBuf>,
        #[command(flatten)]
        flags: PassFlags,
    },
}

fn read_aig(path: &Path) -> Result<Aig> {
    let bytes = fs::read(path).with_context(|| format!("reading {}", path.display()))?;
    parse_aiger(&bytes).with_context(|| format!("parsing {}", path.display()))
}

/// Binary unless the extension is `.aag`.
fn write_aig(path: &Path, aig: &Aig) -> Result<()> {
    let binary = path.extension().is_none_or(|e| e != "aag");
    fs::write(path, write_aiger(aig, binary)).with_context(|| format!("writing {}", path.display()))
}

fn read_model(path: &Path) -> Result<Mlp> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    load_model(&text).with_context(|| format!("loading {}", path.display()))
}

fn read_dataset(path: &Path) -> Result<Vec<DatasetRow>> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    dataset::read_csv(file).with_context(|| format!("reading {}", path.display()))
}

fn design_name(path: &Path) -> String {
    path.file_stem().map_or_else(|| path.display().to_string(), |s| s.to_string_lossy().into_owned())
}

fn pct(after: f64, before: f64) -> String {
    relative_difference(after, before).map_or_else(|_| "n/a".into(), |d| format!("{d:+.2}%"))
}

fn print_stats(s: &PassStats) {
    println!(
        "visited {}  skipped {}  attempted {}  committed {}  gain {}",
        s.visited, s.skipped, s.attempted, s.committed, s.total_gain
    );
    println!(
        "And {} -> {} ({})  Level {} -> {}  time {:.2} s",
        s.and_before,
        s.and_after,
        pct(s.and_after as f64, s.and_before as f64),
        s.level_before,
        s.level_after,
        s.wall_time
    );
}

fn print_metrics_header() {
    println!("{:<12} {:>8} {:>9} {:>8} {:>9} {:>8} {:>8}", "design", "recall", "accuracy", "TP", "TN", "FP", "FN");
}

fn print_metrics(design: &str, m: &Metrics) {
    println!(
        "{:<12} {:>7.2}% {:>8.2}% {:>8} {:>9} {:>8} {:>8}",
        design,
        m.recall(),
        m.accuracy(),
        m.tp,
        m.tn,
        m.fp,
        m.fn_
    );
}

fn run(cli: Cli) -> Result<ExitCode> {
    match cli.cmd {
        Cmd::Stats { input } => {
            let mut aig = read_aig(&input)?;
            let depth = aig.compute_levels();
            println!(
                "And {}  Level {}  PIs {}  POs {}",
                aig.live_and_count(),
                depth,
                aig.num_inputs(),
                aig.num_outputs()
            );
        }
        Cmd::Refactor { input, output, flags } => {
            let mut aig = read_aig(&input)?;
            let stats = run_refactor(&mut aig, &flags.params(0.0))?;
            print_stats(&stats);
            write_aig(&output, &aig)?;
        }
        Cmd::Elf { input, output, model, threshold, flags } => {
            if !(0.0..=1.0).contains(&threshold) {
                bail!("threshold {threshold} outside [0, 1]");
            }
            let model = read_model(&model)?;
            let mut aig = read_aig(&input)?;
            let stats = run_elf(&mut aig, &flags.params(threshold), &model)?;
            print_stats(&stats);
            write_aig(&output, &aig)?;
        }
        Cmd::Collect { inputs, output, flags } => {
            let mut rows = Vec::new();
            for path in &inputs {
                let design = design_name(path);
                let mut aig = read_aig(path)?;
                let (labels, stats) = collect_labels(&mut aig, &flags.params(0.0))?;
                let pos = labels.iter().filter(|l| l.label).count();
                println!(
                    "{design}: {} rows, {pos} positive ({:.2}%)",
                    labels.len(),
                    100.0 * pos as f64 / stats.visited.max(1) as f64
                );
                rows.extend(labels.into_iter().map(|l| DatasetRow {
                    design: design.clone(),
                    node_id: l.node_id,
                    features: l.features,
                    label: l.label,
                }));
            }
            let file = fs::File::create(&output).with_context(|| format!("creating {}", output.display()))?;
            dataset::write_csv(file, &rows)?;
        }
        Cmd::Train { dataset: path, holdout, output, seed, epochs, samples_per_epoch } => {
            let rows = read_dataset(&path)?;
            if !dataset::designs(&rows).contains(&holdout) {
                bail!("design {holdout:?} not in {}", path.display());
            }
            let (x, y) = dataset::normalized_by_design(&rows, |d| d != holdout);
            let cfg = TrainConfig { seed, max_epochs: epochs, samples_per_epoch, ..TrainConfig::default() };
            let (model, history) = model::train(&x, &y, &cfg)?;
            if let Some(last) = history.last() {
                println!(
                    "trained {} epochs on {} rows, validation loss {:.4}",
                    last.epoch + 1,
                    x.len(),
                    last.val_loss
                );
            }
            fs::write(&output, save_model(&model)).with_context(|| format!("writing {}", output.display()))?;
            let (hx, hy) = dataset::normalized_by_design(&rows, |d| d == holdout);
            print_metrics_header();
            print_metrics(&holdout, &Metrics::from_predictions(&model.predict(&hx), &hy, 0.5));
        }
        Cmd::Eval { dataset: path, model, design, threshold } => {
            let rows = read_dataset(&path)?;
            let model = read_model(&model)?;
            let mut names = dataset::designs(&rows);
            if let Some(d) = design {
                if !names.contains(&d) {
                    bail!("design {d:?} not in {}", path.display());
                }
                names = vec![d];
            }
            print_metrics_header();
            for d in names {
                let (x, y) = dataset::normalized_by_design(&rows, |n| n == d);
                print_metrics(&d, &Metrics::from_predictions(&model.predict(&x), &y, threshold));
            }
        }
        Cmd::Verify { a, b, patterns, exhaustive, seed } => {
            let (ga, gb) = (read_aig(&a)?, read_aig(&b)?);
            let verdict = if exhaustive {
                check_equiv_exhaustive(&ga, &gb)?
            } else {
                check_equiv_random(&ga, &gb, patterns, seed)?
            };
            match verdict {
                Verdict::Equivalent => println!("equivalent"),
                Verdict::Counterexample { inputs, output } => {
                    let bits: String = inputs.iter().map(|&b| if b { '1' } else { '0' }).collect();
                    println!("mismatch at output {output} under inputs {bits}");
                    return Ok(ExitCode::from(1));
                }
            }
        }
        Cmd::Bench { inputs, model, threshold, csv, flags } => {
            let model = read_model(&model)?;
            let header = [
                "design", "base_time", "elf_time", "speedup", "base_and", "elf_and", "d_and", "base_level",
                "elf_level", "d_level", "skipped",
            ];
            println!(
                "{:<12} {:>9} {:>9} {:>8} {:>9} {:>9} {:>8} {:>7} {:>7} {:>8} {:>8}",
                "design", "base(s)", "elf(s)", "speedup", "base And", "elf And", "dAnd", "base L", "elf L", "dLevel", "skipped"
            );
            let mut records: Vec<Vec<String>> = Vec::new();
            for path in &inputs {
                let design = design_name(path);
                let orig = read_aig(path)?;
                let mut base = orig.clone();
                let b = run_refactor(&mut base, &flags.params(0.0))?;
                let mut pruned = orig;
                let e = run_elf(&mut pruned, &flags.params(threshold), &model)?;
                let speedup = b.wall_time / e.wall_time.max(1e-9);
                let skipped = 100.0 * e.skipped as f64 / e.visited.max(1) as f64;
                let d_and = pct(e.and_after as f64, b.and_after as f64);
                let d_level = pct(f64::from(e.level_after), f64::from(b.level_after));
                println!(
                    "{:<12} {:>9.2} {:>9.2} {:>7.2}x {:>9} {:>9} {:>8} {:>7} {:>7} {:>8} {:>7.2}%",
                    design,
                    b.wall_time,
                    e.wall_time,
                    speedup,
                    b.and_after,
                    e.and_after,
                    d_and,
                    b.level_after,
                    e.level_after,
                    d_level,
                    skipped
                );
                let raw = |a: f64, b: f64| relative_difference(a, b).map_or(String::new(), |d| d.to_string());
                records.push(vec![
                    design,
                    b.wall_time.to_string(),
                    e.wall_time.to_string(),
                    speedup.to_string(),
                    b.and_after.to_string(),
                    e.and_after.to_string(),
                    raw(e.and_after as f64, b.and_after as f64),
                    b.level_after.to_string(),
                    e.level_after.to_string(),
                    raw(f64::from(e.level_after), f64::from(b.level_after)),
                    skipped.to_string(),
                ]);
            }
            if let Some(out) = csv {
                let mut w = csv::Writer::from_path(&out).with_context(|| format!("creating {}", out.display()))?;
                w.write_record(header)?;
                for r in &records {
                    w.write_record(r)?;
                }
                w.flush()?;
            }
        }
    }
    Ok(ExitCode::SUCCESS)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}
