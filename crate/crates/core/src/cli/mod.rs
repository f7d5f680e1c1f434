//! The `trn` command line: generate, train, eval, ablate and gradcheck.
//!
//! Settings come from built-in defaults, then an optional `key = value`
//! config file, then command-line flags, later layers winning.

mod config;

pub use config::{GeneratorSettings, RunConfig, KEYS};

use std::ffi::OsString;
use std::fmt::Write as _;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::data::{generate, import_csv, load_dataset, save_dataset, StreamDataset};
use crate::error::{Error, Result};
use crate::gradcheck::{block_errors, tiny_instance, GradientHook};
use crate::metrics::{anticipation_average, anticipation_report, per_frame_map, MetricReport};
use crate::model::{checkpoint, Model, ModelKind};
use crate::training::{evaluate, train};

/// Gradients agree when every block's max relative error is below this.
pub const GRADCHECK_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Parser)]
#[command(name = "trn", version, about = "Online action detection with temporal recurrent networks")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct Common {
    /// `key = value` config file
    #[arg(long, value_name = "PATH")]
    pub config: Option<PathBuf>,
    #[arg(long, value_name = "N")]
    pub seed: Option<u64>,
    /// Extra `key=value` override; may be repeated
    #[arg(long = "set", value_name = "KEY=VALUE")]
    pub set: Vec<String>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write a synthetic dataset
    Generate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Train one model and write a checkpoint
    Train {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "NAME")]
        model: Option<String>,
        /// Decoder steps
        #[arg(long, value_name = "N")]
        ld: Option<usize>,
        /// Training dataset (.oads or .csv)
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Score a dataset with a checkpoint
    Eval {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "PATH")]
        checkpoint: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        #[arg(long)]
        deciles: bool,
        #[arg(long)]
        anticipation: bool,
        /// Key-value report path; the table goes next to it with `.txt` appended
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Train and evaluate one model per decoder length and seed
    Ablate {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "NAME")]
        model: Option<String>,
        /// Comma-separated decoder lengths
        #[arg(long, value_name = "N,...")]
        ld: Option<String>,
        /// Comma-separated seeds
        #[arg(long, value_name = "N,...")]
        seeds: Option<String>,
        #[arg(long, value_name = "PATH")]
        data: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        test_data: Option<PathBuf>,
        #[arg(long, value_name = "PATH")]
        out: Option<PathBuf>,
    },
    /// Compare analytic and finite-difference gradients on tiny models
    Gradcheck {
        #[command(flatten)]
        common: Common,
        #[arg(long, value_name = "NAME")]
        model: Option<String>,
        /// Perturb the analytic gradient first; the check must then fail
        #[arg(long, hide = true)]
        corrupt: bool,
    },
}

/// Exit status for a finished run.
pub fn exit_code(result: &Result<()>) -> i32 {
    match result {
        Ok(()) => 0,
        Err(Error::Numeric(_)) => 2,
        Err(_) => 1,
    }
}

/// Parses `args` (program name first) and runs the subcommand, writing
/// reports to `out`. Returns the process exit code.
pub fn main_with_args<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = write!(err, "{}", e.render());
            return if e.use_stderr() { 1 } else { 0 };
        }
    };
    let result = run(cli.command, out);
    if let Err(e) = &result {
        let _ = writeln!(err, "error: {e}");
    }
    exit_code(&result)
}

fn resolve(common: &Common, flags: &[(&str, Option<String>)]) -> Result<RunConfig> {
    let mut cfg = match &common.config {
        Some(path) => RunConfig::from_file(path)?,
        None => RunConfig::default(),
    };
    if let Some(seed) = common.seed {
        cfg.set("seed", &seed.to_string())?;
    }
    for (key, value) in flags {
        if let Some(v) = value {
            cfg.set(key, v)?;
        }
    }
    cfg.apply_overrides(&common.set)?;
    cfg.validate()?;
    Ok(cfg)
}

fn path_str(p: &Option<PathBuf>) -> Option<String> {
    p.as_ref().map(|p| p.display().to_string())
}

fn required<'a>(p: &'a Option<PathBuf>, what: &str) -> Result<&'a Path> {
    p.as_deref()
        .ok_or_else(|| Error::config(format!("no {what} path given")))
}

/// Loads an OADS file, or a CSV file when the extension is `.csv`.
pub fn load_any(path: &Path, num_actions: usize) -> Result<StreamDataset> {
    if path.extension().is_some_and(|e| e.eq_ignore_ascii_case("csv")) {
        import_csv(path, num_actions)
    } else {
        load_dataset(path)
    }
}

pub fn run(command: Command, out: &mut dyn Write) -> Result<()> {
    match command {
        Command::Generate { common, out: path } => {
            let cfg = resolve(&common, &[("out", path_str(&path))])?;
            out.write_all(cmd_generate(&cfg)?.as_bytes())?;
        }
        Command::Train {
            common,
            model,
            ld,
            data,
            out: path,
        } => {
            let cfg = resolve(
                &common,
                &[
                    ("model", model),
                    ("decoder_steps", ld.map(|n| n.to_string())),
                    ("data", path_str(&data)),
                    ("out", path_str(&path)),
                ],
            )?;
            cmd_train(&cfg, out)?;
        }
        Command::Eval {
            common,
            checkpoint,
            data,
            deciles,
            anticipation,
            out: path,
        } => {
            let cfg = resolve(
                &common,
                &[
                    ("checkpoint", path_str(&checkpoint)),
                    ("data", path_str(&data)),
                    ("out", path_str(&path)),
                ],
            )?;
            let report = cmd_eval(&cfg, deciles, anticipation)?;
            out.write_all(report.table_text().as_bytes())?;
            out.write_all(b"\n")?;
            out.write_all(report.key_value_text().as_bytes())?;
        }
        Command::Ablate {
            common,
            model,
            ld,
            seeds,
            data,
            test_data,
            out: path,
        } => {
            let cfg = resolve(
                &common,
                &[
                    ("model", model),
                    ("ablate_steps", ld),
                    ("ablate_seeds", seeds),
                    ("data", path_str(&data)),
                    ("test_data", path_str(&test_data)),
                    ("out", path_str(&path)),
                ],
            )?;
            let table = cmd_ablate(&cfg)?;
            out.write_all(table.text().as_bytes())?;
        }
        Command::Gradcheck {
            common,
            model,
            corrupt,
        } => {
            let cfg = resolve(&common, &[])?;
            let kinds = match model {
                Some(m) => vec![m.parse()?],
                None => ModelKind::ALL.to_vec(),
            };
            let report = cmd_gradcheck(&kinds, cfg.train.seed, cfg.gradcheck_instances, corrupt)?;
            out.write_all(report.text.as_bytes())?;
            if !report.passed {
                return Err(Error::Numeric(format!(
                    "gradient check failed: max relative error {:e} >= {:e}",
                    report.worst, GRADCHECK_TOLERANCE
                )));
            }
        }
    }
    Ok(())
}

fn summary(name: &str, ds: &StreamDataset) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "{name}: {} videos, {} frames", ds.videos.len(), ds.total_frames());
    for (c, n) in ds.class_histogram().iter().enumerate() {
        let _ = writeln!(s, "  class {c}: {n}");
    }
    s
}

/// Generates the configured dataset, writes it and returns a summary.
/// With `test_videos > 0` the trailing videos go to a second file.
pub fn cmd_generate(cfg: &RunConfig) -> Result<String> {
    let path = required(&cfg.out, "output")?;
    let ds = generate(&cfg.generator_config())?;
    let (train_set, test_set) = ds.split_at(cfg.generator.num_videos);
    save_dataset(&train_set, path)?;
    let mut s = summary(&path.display().to_string(), &train_set);
    if cfg.generator.test_videos > 0 {
        let test_path = cfg
            .test_out
            .clone()
            .unwrap_or_else(|| with_suffix(path, ".test"));
        save_dataset(&test_set, &test_path)?;
        s.push_str(&summary(&test_path.display().to_string(), &test_set));
    }
    Ok(s)
}

fn with_suffix(path: &Path, suffix: &str) -> PathBuf {
    let mut name = path.file_stem().unwrap_or_default().to_os_string();
    name.push(suffix);
    if let Some(ext) = path.extension() {
        name.push(".");
        name.push(ext);
    }
    path.with_file_name(name)
}

/// Arch settings with `D` and `K` taken from the dataset.
fn arch_for(cfg: &RunConfig, ds: &StreamDataset) -> crate::model::TrnConfig {
    let mut arch = cfg.arch.clone();
    arch.feature_dim = ds.feature_dim;
    arch.num_actions = ds.num_actions;
    arch
}

/// Trains, writes the checkpoint and loss log, and echoes loss lines to
/// `out`. Returns the trained model as stored (f32 parameters).
pub fn cmd_train(cfg: &RunConfig, out: &mut dyn Write) -> Result<Model> {
    let data = required(&cfg.data, "training data")?;
    let ckpt = required(&cfg.out, "checkpoint output")?;
    let ds = load_any(data, cfg.arch.num_actions)?;
    let log_path = cfg.log.clone().unwrap_or_else(|| {
        let mut p = ckpt.as_os_str().to_owned();
        p.push(".log");
        p.into()
    });
    let mut log_text = String::new();
    let mut io_err = None;
    let outcome = train(cfg.model, &arch_for(cfg, &ds), &ds, &cfg.train, |epoch, loss| {
        let line = format!("epoch {epoch} loss {loss:.10}\n");
        log_text.push_str(&line);
        if let Err(e) = out.write_all(line.as_bytes()) {
            io_err.get_or_insert(e);
        }
    });
    fs::write(&log_path, &log_text)?;
    if let Some(e) = io_err {
        return Err(e.into());
    }
    let outcome = outcome?;
    checkpoint::save(&outcome.model, ckpt)?;
    checkpoint::load(ckpt)
}

/// Loads a checkpoint and dataset and computes the requested metrics.
/// Writes the key-value and table reports when `out` is set.
pub fn cmd_eval(cfg: &RunConfig, deciles: bool, anticipation: bool) -> Result<MetricReport> {
    let model = checkpoint::load(required(&cfg.checkpoint, "checkpoint")?)?;
    let ds = load_any(required(&cfg.data, "evaluation data")?, model.config.num_actions)?;
    let report = MetricReport::compute(&evaluate(&model, &ds)?, deciles, anticipation)?;
    if let Some(path) = &cfg.out {
        fs::write(path, report.key_value_text())?;
        let mut table = path.as_os_str().to_owned();
        table.push(".txt");
        fs::write(PathBuf::from(table), report.table_text())?;
    }
    Ok(report)
}

/// Metrics of one ablation cell.
#[derive(Debug, Clone, PartialEq)]
pub struct AblationCell {
    pub decoder_steps: usize,
    pub seed: u64,
    pub map: f64,
    /// Anticipation mAP averaged over offsets; `None` for models that do
    /// not anticipate or when every offset is undefined.
    pub anticipation_map: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AblationTable {
    pub steps: Vec<usize>,
    pub cells: Vec<AblationCell>,
}

impl AblationTable {
    fn column(&self, ld: usize, f: impl Fn(&AblationCell) -> Option<f64>) -> Option<f64> {
        let vals: Option<Vec<f64>> = self
            .cells
            .iter()
            .filter(|c| c.decoder_steps == ld)
            .map(f)
            .collect();
        vals.filter(|v| !v.is_empty())
            .map(|v| v.iter().sum::<f64>() / v.len() as f64)
    }

    /// Detection mAP per decoder length, averaged over seeds.
    pub fn detection_row(&self) -> Vec<Option<f64>> {
        self.steps.iter().map(|&l| self.column(l, |c| Some(c.map))).collect()
    }

    /// Mean anticipation mAP per decoder length, averaged over seeds.
    pub fn anticipation_row(&self) -> Vec<Option<f64>> {
        self.steps
            .iter()
            .map(|&l| self.column(l, |c| c.anticipation_map))
            .collect()
    }

    pub fn text(&self) -> String {
        let mut s = String::new();
        let _ = write!(s, "{:<24}", "decoder steps");
        for l in &self.steps {
            let _ = write!(s, " {l:>10}");
        }
        s.push('\n');
        for (name, row) in [
            ("detection mAP", self.detection_row()),
            ("anticipation mAP (avg)", self.anticipation_row()),
        ] {
            let _ = write!(s, "{name:<24}");
            for v in row {
                match v {
                    Some(x) => {
                        let _ = write!(s, " {:>10.2}", 100.0 * x);
                    }
                    None => {
                        let _ = write!(s, " {:>10}", "n/a");
                    }
                }
            }
            s.push('\n');
        }
        s.push('\n');
        for c in &self.cells {
            let _ = writeln!(s, "ablate.map.{}.{} {:.10}", c.decoder_steps, c.seed, c.map);
            let a = c.anticipation_map.map_or("nan".into(), |v| format!("{v:.10}"));
            let _ = writeln!(s, "ablate.anticipation_map.{}.{} {a}", c.decoder_steps, c.seed);
        }
        s
    }
}

/// Trains and evaluates one model per `(decoder_steps, seed)`, reading
/// every other setting from `cfg`. Each trained model passes through the
/// checkpoint encoding before evaluation, exactly as train + eval would.
pub fn cmd_ablate(cfg: &RunConfig) -> Result<AblationTable> {
    if cfg.ablate_steps.is_empty() || cfg.ablate_seeds.is_empty() {
        return Err(Error::config("ablation needs at least one decoder length and seed"));
    }
    let train_set = load_any(required(&cfg.data, "training data")?, cfg.arch.num_actions)?;
    let test_set = load_any(required(&cfg.test_data, "test data")?, cfg.arch.num_actions)?;
    let mut cells = Vec::new();
    for &ld in &cfg.ablate_steps {
        for &seed in &cfg.ablate_seeds {
            let mut arch = arch_for(cfg, &train_set);
            arch.decoder_steps = ld;
            let mut train_cfg = cfg.train.clone();
            train_cfg.seed = seed;
            let outcome = train(cfg.model, &arch, &train_set, &train_cfg, |epoch, loss| {
                log::info!("ld {ld} seed {seed} epoch {epoch} loss {loss:.10}");
            })?;
            let model = checkpoint::round_trip(&outcome.model)?;
            let table = evaluate(&model, &test_set)?;
            let map = per_frame_map(&table)?.map;
            let anticipation_map =
                anticipation_average(&anticipation_report(&table)?).map(|(m, _)| m);
            cells.push(AblationCell {
                decoder_steps: ld,
                seed,
                map,
                anticipation_map,
            });
        }
    }
    let table = AblationTable {
        steps: cfg.ablate_steps.clone(),
        cells,
    };
    if let Some(path) = &cfg.out {
        fs::write(path, table.text())?;
    }
    Ok(table)
}

#[derive(Debug, Clone)]
pub struct GradcheckReport {
    pub text: String,
    pub worst: f64,
    pub passed: bool,
}

/// Checks `instances` tiny random instances per model kind, starting at
/// `seed`, and reports each block's worst error once per kind.
pub fn cmd_gradcheck(
    kinds: &[ModelKind],
    seed: u64,
    instances: usize,
    corrupt: bool,
) -> Result<GradcheckReport> {
    let perturb = |g: &mut [f64]| {
        for v in g.iter_mut() {
            *v = *v * 1.01 + 1e-3;
        }
    };
    let hook: Option<GradientHook> = if corrupt { Some(&perturb) } else { None };
    let mut text = String::new();
    let mut worst = 0.0f64;
    for &kind in kinds {
        let mut per_block: Vec<(String, f64)> = Vec::new();
        for s in seed..seed + instances.max(1) as u64 {
            let inst = tiny_instance(kind, s)?;
            let errors = block_errors(&inst.model, &inst.inputs, &inst.targets, inst.alpha, hook)?;
            if per_block.is_empty() {
                per_block = errors.iter().map(|e| (e.name.clone(), 0.0)).collect();
            }
            for (slot, e) in per_block.iter_mut().zip(&errors) {
                let v = if e.max_relative_error.is_nan() {
                    f64::INFINITY
                } else {
                    e.max_relative_error
                };
                slot.1 = slot.1.max(v);
            }
        }
        for (name, err) in &per_block {
            let _ = writeln!(text, "{:<12} {:<28} {:.3e}", kind.name(), name, err);
            worst = worst.max(*err);
        }
    }
    let passed = worst < GRADCHECK_TOLERANCE;
    let _ = writeln!(
        text,
        "max relative error {worst:.3e} ({})",
        if passed { "pass" } else { "FAIL" }
    );
    Ok(GradcheckReport {
        text,
        worst,
        passed,
    })
}
