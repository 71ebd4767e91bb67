//! Run configuration: flat dotted keys read from a TOML file, then `--set` overrides.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use sonolab::classify::{default_features, TrainConfig};
use sonolab::formants::FormantConfig;
use sonolab::spectrum::SpectrumConfig;
use sonolab::stats::ScalePolicy;
use toml::Value;

use crate::CliError;

pub const CONFIG_ENV: &str = "SONOLAB_CONFIG";

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub spectrum: SpectrumConfig,
    pub formants: FormantConfig,
    pub phone_tier: String,
    /// Tier holding keywords; used when present in the annotation.
    pub word_tier: String,
    pub scale: ScalePolicy,
    pub center_by_speaker: bool,
    pub train: TrainConfig,
    pub features: Vec<String>,
    pub folds: usize,
    pub speakers_per_variety: usize,
    pub sample_rate: u32,
    pub manifest: Option<PathBuf>,
    pub output_dir: PathBuf,
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            spectrum: SpectrumConfig::default(),
            formants: FormantConfig::default(),
            phone_tier: "phones".into(),
            word_tier: "words".into(),
            scale: ScalePolicy::default(),
            center_by_speaker: false,
            train: TrainConfig::default(),
            features: default_features(),
            folds: 5,
            speakers_per_variety: 2,
            sample_rate: 44100,
            manifest: None,
            output_dir: PathBuf::from("out"),
            seed: 1,
        }
    }
}

/// Every accepted key, for error messages and `sonolab validate --config`.
pub const KEYS: &[&str] = &[
    "spectrum.window_ms",
    "spectrum.overlap",
    "spectrum.span",
    "spectrum.exclude_dc",
    "spectrum.ceiling_hz",
    "formants.ceiling_hz",
    "formants.order",
    "formants.frame_ms",
    "formants.hop_ms",
    "formants.max_bandwidth_hz",
    "annotation.phone_tier",
    "annotation.word_tier",
    "stats.log_shape_moments",
    "stats.center_by_speaker",
    "classify.l2_lambda",
    "classify.tol",
    "classify.max_iter",
    "classify.features",
    "classify.folds",
    "synth.speakers_per_variety",
    "synth.sample_rate",
    "run.manifest",
    "run.output_dir",
    "run.seed",
];

fn flatten(prefix: &str, table: &toml::Table, out: &mut BTreeMap<String, Value>) {
    for (k, v) in table {
        let key = if prefix.is_empty() {
            k.clone()
        } else {
            format!("{prefix}.{k}")
        };
        match v {
            Value::Table(t) => flatten(&key, t, out),
            other => {
                out.insert(key, other.clone());
            }
        }
    }
}

/// Parses a config document into dotted keys. Nested tables and dotted keys are equivalent.
pub fn parse_keys(text: &str) -> Result<BTreeMap<String, Value>, CliError> {
    let table: toml::Table = text
        .parse()
        .map_err(|e: toml::de::Error| CliError::Config(e.to_string()))?;
    let mut out = BTreeMap::new();
    flatten("", &table, &mut out);
    Ok(out)
}

/// Parses one `key=value` override. Values that are not valid TOML are taken as strings.
pub fn parse_override(arg: &str) -> Result<(String, Value), CliError> {
    let (key, raw) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Config(format!("override {arg:?} is not key=value")))?;
    let key = key.trim().to_string();
    let raw = raw.trim();
    let value = format!("v = {raw}")
        .parse::<toml::Table>()
        .ok()
        .and_then(|mut t| t.remove("v"))
        .unwrap_or_else(|| Value::String(raw.to_string()));
    Ok((key, value))
}

fn float(key: &str, v: &Value) -> Result<f64, CliError> {
    match v {
        Value::Float(f) => Ok(*f),
        Value::Integer(i) => Ok(*i as f64),
        _ => Err(CliError::Config(format!("{key} must be a number"))),
    }
}

fn uint(key: &str, v: &Value) -> Result<u64, CliError> {
    match v {
        Value::Integer(i) if *i >= 0 => Ok(*i as u64),
        _ => Err(CliError::Config(format!(
            "{key} must be a non-negative integer"
        ))),
    }
}

fn boolean(key: &str, v: &Value) -> Result<bool, CliError> {
    v.as_bool()
        .ok_or_else(|| CliError::Config(format!("{key} must be true or false")))
}

fn string(key: &str, v: &Value) -> Result<String, CliError> {
    v.as_str()
        .map(str::to_string)
        .ok_or_else(|| CliError::Config(format!("{key} must be a string")))
}

impl RunConfig {
    /// Applies one key. Unknown keys are rejected.
    pub fn set(&mut self, key: &str, v: &Value) -> Result<(), CliError> {
        match key {
            "spectrum.window_ms" => self.spectrum.window_ms = float(key, v)?,
            "spectrum.overlap" => self.spectrum.overlap = float(key, v)?,
            "spectrum.span" => {
                let arr = v.as_array().filter(|a| a.len() == 2);
                let arr = arr.ok_or_else(|| {
                    CliError::Config(format!("{key} must be a two-element array"))
                })?;
                self.spectrum.span = (float(key, &arr[0])?, float(key, &arr[1])?);
            }
            "spectrum.exclude_dc" => self.spectrum.exclude_dc = boolean(key, v)?,
            "spectrum.ceiling_hz" => self.spectrum.ceiling_hz = Some(float(key, v)?),
            "formants.ceiling_hz" => self.formants.ceiling_hz = float(key, v)?,
            "formants.order" => self.formants.order = uint(key, v)? as usize,
            "formants.frame_ms" => self.formants.frame_ms = float(key, v)?,
            "formants.hop_ms" => self.formants.hop_ms = float(key, v)?,
            "formants.max_bandwidth_hz" => self.formants.max_bandwidth_hz = float(key, v)?,
            "annotation.phone_tier" => self.phone_tier = string(key, v)?,
            "annotation.word_tier" => self.word_tier = string(key, v)?,
            "stats.log_shape_moments" => self.scale.log_shape_moments = boolean(key, v)?,
            "stats.center_by_speaker" => self.center_by_speaker = boolean(key, v)?,
            "classify.l2_lambda" => self.train.l2_lambda = float(key, v)?,
            "classify.tol" => self.train.tol = float(key, v)?,
            "classify.max_iter" => self.train.max_iter = uint(key, v)? as usize,
            "classify.features" => {
                let arr = v
                    .as_array()
                    .ok_or_else(|| CliError::Config(format!("{key} must be an array of names")))?;
                self.features = arr
                    .iter()
                    .map(|x| string(key, x))
                    .collect::<Result<_, _>>()?;
            }
            "classify.folds" => self.folds = uint(key, v)? as usize,
            "synth.speakers_per_variety" => self.speakers_per_variety = uint(key, v)? as usize,
            "synth.sample_rate" => {
                self.sample_rate = u32::try_from(uint(key, v)?)
                    .map_err(|_| CliError::Config(format!("{key} is too large")))?
            }
            "run.manifest" => self.manifest = Some(PathBuf::from(string(key, v)?)),
            "run.output_dir" => self.output_dir = PathBuf::from(string(key, v)?),
            "run.seed" => self.seed = uint(key, v)?,
            _ => return Err(CliError::Config(format!("unknown config key {key:?}"))),
        }
        Ok(())
    }

    /// Defaults, then the config file (explicit path or `SONOLAB_CONFIG`), then overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let env_path = std::env::var_os(CONFIG_ENV)
            .filter(|p| !p.is_empty())
            .map(PathBuf::from);
        if let Some(p) = path.map(Path::to_path_buf).or(env_path) {
            let text = std::fs::read_to_string(&p).map_err(|e| {
                CliError::Config(format!("cannot read config {}: {e}", p.display()))
            })?;
            cfg.apply_text(&text)?;
        }
        for o in overrides {
            let (k, v) = parse_override(o)?;
            cfg.set(&k, &v)?;
        }
        cfg.check()?;
        Ok(cfg)
    }

    pub fn apply_text(&mut self, text: &str) -> Result<(), CliError> {
        for (k, v) in parse_keys(text)? {
            self.set(&k, &v)?;
        }
        Ok(())
    }

    fn check(&self) -> Result<(), CliError> {
        if self.folds < 2 {
            return Err(CliError::Config("classify.folds must be at least 2".into()));
        }
        if self.features.is_empty() {
            return Err(CliError::Config(
                "classify.features must not be empty".into(),
            ));
        }
        if self.sample_rate == 0 {
            return Err(CliError::Config(
                "synth.sample_rate must be positive".into(),
            ));
        }
        Ok(())
    }
}
