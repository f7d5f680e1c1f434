use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::data::{default_transition, GeneratorConfig};
use crate::error::{Error, Result};
use crate::model::{ModelKind, TrnConfig};
use crate::training::TrainConfig;

/// Synthetic-stream settings that are not part of the model.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratorSettings {
    pub num_videos: usize,
    /// Extra videos written to a separate test file, sharing class means
    /// and transitions with the training videos.
    pub test_videos: usize,
    pub frames_per_video: usize,
    pub mean_segment_len: f64,
    pub mean_scale: f64,
    pub noise: f64,
    pub precursor_strength: f64,
    pub precursor_len: usize,
    pub background_return: f64,
}

impl Default for GeneratorSettings {
    fn default() -> Self {
        let g = GeneratorConfig::new(1, 1);
        Self {
            num_videos: g.num_videos,
            test_videos: 0,
            frames_per_video: g.frames_per_video,
            mean_segment_len: g.mean_segment_len,
            mean_scale: g.mean_scale,
            noise: g.noise,
            precursor_strength: g.precursor_strength,
            precursor_len: g.precursor_len,
            background_return: 0.5,
        }
    }
}

/// Every setting a subcommand can read. Built from defaults, then a
/// `key = value` file, then command-line overrides.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub arch: TrnConfig,
    pub train: TrainConfig,
    pub generator: GeneratorSettings,
    pub data: Option<PathBuf>,
    pub test_data: Option<PathBuf>,
    pub checkpoint: Option<PathBuf>,
    pub out: Option<PathBuf>,
    pub test_out: Option<PathBuf>,
    pub log: Option<PathBuf>,
    pub ablate_steps: Vec<usize>,
    pub ablate_seeds: Vec<u64>,
    pub gradcheck_instances: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let train = TrainConfig::default();
        let arch = TrnConfig {
            sequence_len: train.sequence_len,
            alpha: train.alpha,
            ..TrnConfig::default()
        };
        Self {
            model: ModelKind::Trn,
            arch,
            train,
            generator: GeneratorSettings::default(),
            data: None,
            test_data: None,
            checkpoint: None,
            out: None,
            test_out: None,
            log: None,
            ablate_steps: vec![2, 4, 6, 8],
            ablate_seeds: vec![0],
            gradcheck_instances: 5,
        }
    }
}

/// Every key accepted in a config file or by `--set`.
pub const KEYS: &[&str] = &[
    "model",
    "feature_dim",
    "num_actions",
    "hidden_dim",
    "decoder_steps",
    "sequence_len",
    "alpha",
    "score_embed_dim",
    "future_dim",
    "lr",
    "weight_decay",
    "batch_size",
    "epochs",
    "seed",
    "num_videos",
    "test_videos",
    "frames_per_video",
    "mean_segment_len",
    "mean_scale",
    "noise",
    "precursor_strength",
    "precursor_len",
    "background_return",
    "data",
    "test_data",
    "checkpoint",
    "out",
    "test_out",
    "log",
    "ablate_steps",
    "ablate_seeds",
    "gradcheck_instances",
];

fn parse<T: FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::config(format!("invalid value '{value}' for '{key}'")))
}

fn parse_list<T: FromStr>(key: &str, value: &str) -> Result<Vec<T>> {
    let items: Vec<T> = value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| parse(key, s))
        .collect::<Result<_>>()?;
    if items.is_empty() {
        return Err(Error::config(format!("'{key}' needs at least one value")));
    }
    Ok(items)
}

impl RunConfig {
    /// Applies one `key = value` setting.
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        let v = value.trim();
        let g = &mut self.generator;
        match key.trim() {
            "model" => self.model = v.parse()?,
            "feature_dim" => self.arch.feature_dim = parse(key, v)?,
            "num_actions" => self.arch.num_actions = parse(key, v)?,
            "hidden_dim" => self.arch.hidden_dim = parse(key, v)?,
            "decoder_steps" => self.arch.decoder_steps = parse(key, v)?,
            "sequence_len" => {
                self.train.sequence_len = parse(key, v)?;
                self.arch.sequence_len = self.train.sequence_len;
            }
            "alpha" => {
                self.train.alpha = parse(key, v)?;
                self.arch.alpha = self.train.alpha;
            }
            "score_embed_dim" => self.arch.score_embed_dim = parse(key, v)?,
            "future_dim" => self.arch.future_dim = parse(key, v)?,
            "lr" => self.train.lr = parse(key, v)?,
            "weight_decay" => self.train.weight_decay = parse(key, v)?,
            "batch_size" => self.train.batch_size = parse(key, v)?,
            "epochs" => self.train.epochs = parse(key, v)?,
            "seed" => self.train.seed = parse(key, v)?,
            "num_videos" => g.num_videos = parse(key, v)?,
            "test_videos" => g.test_videos = parse(key, v)?,
            "frames_per_video" => g.frames_per_video = parse(key, v)?,
            "mean_segment_len" => g.mean_segment_len = parse(key, v)?,
            "mean_scale" => g.mean_scale = parse(key, v)?,
            "noise" => g.noise = parse(key, v)?,
            "precursor_strength" => g.precursor_strength = parse(key, v)?,
            "precursor_len" => g.precursor_len = parse(key, v)?,
            "background_return" => g.background_return = parse(key, v)?,
            "data" => self.data = Some(v.into()),
            "test_data" => self.test_data = Some(v.into()),
            "checkpoint" => self.checkpoint = Some(v.into()),
            "out" => self.out = Some(v.into()),
            "test_out" => self.test_out = Some(v.into()),
            "log" => self.log = Some(v.into()),
            "ablate_steps" => self.ablate_steps = parse_list(key, v)?,
            "ablate_seeds" => self.ablate_seeds = parse_list(key, v)?,
            "gradcheck_instances" => self.gradcheck_instances = parse(key, v)?,
            other => return Err(Error::config(format!("unknown config key '{other}'"))),
        }
        Ok(())
    }

    /// Applies every `key = value` line of a config text. Blank lines and
    /// `#` comments are ignored.
    pub fn apply_text(&mut self, text: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::config(format!("line {}: expected 'key = value', got '{line}'", n + 1))
            })?;
            self.set(key, value)
                .map_err(|e| Error::config(format!("line {}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        cfg.apply_text(text)?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_text(&text)
    }

    /// Applies `key=value` overrides, in order.
    pub fn apply_overrides<S: AsRef<str>>(&mut self, overrides: &[S]) -> Result<()> {
        for o in overrides {
            let o = o.as_ref();
            let (k, v) = o
                .split_once('=')
                .ok_or_else(|| Error::config(format!("override '{o}' is not key=value")))?;
            self.set(k, v)?;
        }
        Ok(())
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        let g = &self.generator;
        let mut cfg = GeneratorConfig::new(self.arch.num_actions, self.arch.feature_dim);
        cfg.num_videos = g.num_videos + g.test_videos;
        cfg.frames_per_video = g.frames_per_video;
        cfg.transition = default_transition(self.arch.num_actions, g.background_return);
        cfg.mean_segment_len = g.mean_segment_len;
        cfg.mean_scale = g.mean_scale;
        cfg.noise = g.noise;
        cfg.precursor_strength = g.precursor_strength;
        cfg.precursor_len = g.precursor_len;
        cfg.seed = self.train.seed;
        cfg
    }

    pub fn validate(&self) -> Result<()> {
        self.arch.validate()?;
        self.train.validate()?;
        if self.ablate_steps.contains(&0) {
            return Err(Error::config("ablate_steps entries must be >= 1"));
        }
        Ok(())
    }
}
