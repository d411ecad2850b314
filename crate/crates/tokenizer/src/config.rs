use std::fmt::Write as _;

use crate::error::{Error, Result};

/// Architecture and latent shape.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ModelConfig {
    /// Number of latent tokens `K`.
    pub token_count: usize,
    /// Channels per token `C`.
    pub channel_dim: usize,
    /// Attention width `d`.
    pub hidden_dim: usize,
    pub heads: usize,
    pub encoder_self_layers: usize,
    pub decoder_self_layers: usize,
    pub fourier_frequencies: usize,
    /// Feed-forward width as a multiple of `hidden_dim`.
    pub ffn_mult: usize,
    /// Weight `λ` of the KL term.
    pub kl_weight: f64,
    /// Seed for parameter initialization.
    pub seed: u64,
}

impl Default for ModelConfig {
    fn default() -> Self {
        Self {
            token_count: 32,
            channel_dim: 4,
            hidden_dim: 64,
            heads: 4,
            encoder_self_layers: 2,
            decoder_self_layers: 4,
            fourier_frequencies: 8,
            ffn_mult: 2,
            kl_weight: 1e-3,
            seed: 0,
        }
    }
}

impl ModelConfig {
    /// Smallest useful configuration, for gradient checks.
    pub fn micro() -> Self {
        Self {
            token_count: 4,
            channel_dim: 2,
            hidden_dim: 16,
            heads: 2,
            encoder_self_layers: 1,
            decoder_self_layers: 1,
            fourier_frequencies: 2,
            ffn_mult: 2,
            kl_weight: 1e-3,
            seed: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.token_count == 0 || self.channel_dim == 0 {
            return bad(format!(
                "token count and channel dim must be >= 1, got K={} C={}",
                self.token_count, self.channel_dim
            ));
        }
        if self.hidden_dim == 0 || self.heads == 0 || self.hidden_dim % self.heads != 0 {
            return bad(format!(
                "hidden dim {} must be a positive multiple of heads {}",
                self.hidden_dim, self.heads
            ));
        }
        if self.fourier_frequencies == 0 || self.fourier_frequencies > 30 {
            return bad(format!("fourier frequencies {} outside 1..=30", self.fourier_frequencies));
        }
        if self.ffn_mult == 0 {
            return bad("ffn multiplier must be >= 1".into());
        }
        if !(self.kl_weight >= 0.0) || !self.kl_weight.is_finite() {
            return bad(format!("kl weight {} must be finite and >= 0", self.kl_weight));
        }
        Ok(())
    }

    /// Width of the Fourier features, `3 (1 + 2 F)`.
    pub fn fourier_width(&self) -> usize {
        3 * (1 + 2 * self.fourier_frequencies)
    }

    pub fn head_dim(&self) -> usize {
        self.hidden_dim / self.heads
    }

    pub fn latent_len(&self) -> usize {
        self.token_count * self.channel_dim
    }
}

/// Optimization and supervision settings.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TrainConfig {
    /// Passes over the dataset; each graph is one step per pass.
    pub epochs: usize,
    pub lr_peak: f64,
    pub lr_min: f64,
    pub weight_decay: f64,
    /// Supervision points per step.
    pub queries: usize,
    pub near_fraction: f64,
    pub sigma_min: f64,
    pub sigma_max: f64,
    pub pseudo_radius: f64,
    /// Randomly rotate each graph every epoch.
    pub rotate: bool,
    /// Seed for query sampling, rotations and latent noise.
    pub data_seed: u64,
}

impl Default for TrainConfig {
    fn default() -> Self {
        Self {
            epochs: 200,
            lr_peak: 1e-3,
            lr_min: 1e-5,
            weight_decay: 0.01,
            queries: 1024,
            near_fraction: 0.5,
            sigma_min: 0.005,
            sigma_max: 0.05,
            pseudo_radius: vesseltok_core::field::DEFAULT_PSEUDO_RADIUS,
            rotate: false,
            data_seed: 0,
        }
    }
}

impl TrainConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.epochs == 0 || self.queries == 0 {
            return bad("epochs and queries must be >= 1".into());
        }
        if !(self.lr_peak > 0.0 && self.lr_min >= 0.0 && self.lr_min <= self.lr_peak) {
            return bad(format!(
                "learning rates must satisfy 0 <= min <= peak, 0 < peak; got {} / {}",
                self.lr_min, self.lr_peak
            ));
        }
        if !(self.weight_decay >= 0.0) {
            return bad(format!("weight decay {} must be >= 0", self.weight_decay));
        }
        if !(0.0..=1.0).contains(&self.near_fraction) {
            return bad(format!("near fraction {} outside [0, 1]", self.near_fraction));
        }
        if !(self.sigma_min > 0.0 && self.sigma_min <= self.sigma_max) {
            return bad(format!("sigma range [{}, {}] invalid", self.sigma_min, self.sigma_max));
        }
        if !(self.pseudo_radius > 0.0) {
            return bad(format!("pseudo radius {} must be > 0", self.pseudo_radius));
        }
        Ok(())
    }
}

impl ModelConfig {
    /// `key = value` lines for the architecture fields.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("token_count", self.token_count.to_string());
        kv("channel_dim", self.channel_dim.to_string());
        kv("hidden_dim", self.hidden_dim.to_string());
        kv("heads", self.heads.to_string());
        kv("encoder_self_layers", self.encoder_self_layers.to_string());
        kv("decoder_self_layers", self.decoder_self_layers.to_string());
        kv("fourier_frequencies", self.fourier_frequencies.to_string());
        kv("ffn_mult", self.ffn_mult.to_string());
        kv("kl_weight", self.kl_weight.to_string());
        kv("seed", self.seed.to_string());
        s
    }
}

impl TrainConfig {
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        let mut kv = |k: &str, v: String| writeln!(s, "{k} = {v}").unwrap();
        kv("epochs", self.epochs.to_string());
        kv("lr_peak", self.lr_peak.to_string());
        kv("lr_min", self.lr_min.to_string());
        kv("weight_decay", self.weight_decay.to_string());
        kv("queries", self.queries.to_string());
        kv("near_fraction", self.near_fraction.to_string());
        kv("sigma_min", self.sigma_min.to_string());
        kv("sigma_max", self.sigma_max.to_string());
        kv("pseudo_radius", self.pseudo_radius.to_string());
        kv("rotate", self.rotate.to_string());
        kv("data_seed", self.data_seed.to_string());
        s
    }
}

/// Serializes both configs as `key = value` lines.
pub fn write_config_text(model: &ModelConfig, train: &TrainConfig) -> String {
    model.to_text() + &train.to_text()
}

/// Parses `key = value` lines (blank lines and `#` comments ignored) on top
/// of the defaults. Unknown keys are rejected.
pub fn parse_config_text(text: &str) -> Result<(ModelConfig, TrainConfig)> {
    let mut model = ModelConfig::default();
    let mut train = TrainConfig::default();
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(Error::Config(format!("line {}: expected key = value", lineno + 1)));
        };
        let (key, value) = (key.trim(), value.trim());
        let err = |what: &str| Error::Config(format!("line {}: bad {what} value {value:?} for {key}", lineno + 1));
        let int = || value.parse::<usize>().map_err(|_| err("integer"));
        let float = || value.parse::<f64>().map_err(|_| err("number"));
        let seed = || value.parse::<u64>().map_err(|_| err("integer"));
        match key {
            "token_count" => model.token_count = int()?,
            "channel_dim" => model.channel_dim = int()?,
            "hidden_dim" => model.hidden_dim = int()?,
            "heads" => model.heads = int()?,
            "encoder_self_layers" => model.encoder_self_layers = int()?,
            "decoder_self_layers" => model.decoder_self_layers = int()?,
            "fourier_frequencies" => model.fourier_frequencies = int()?,
            "ffn_mult" => model.ffn_mult = int()?,
            "kl_weight" => model.kl_weight = float()?,
            "seed" => model.seed = seed()?,
            "epochs" => train.epochs = int()?,
            "lr_peak" => train.lr_peak = float()?,
            "lr_min" => train.lr_min = float()?,
            "weight_decay" => train.weight_decay = float()?,
            "queries" => train.queries = int()?,
            "near_fraction" => train.near_fraction = float()?,
            "sigma_min" => train.sigma_min = float()?,
            "sigma_max" => train.sigma_max = float()?,
            "pseudo_radius" => train.pseudo_radius = float()?,
            "rotate" => train.rotate = value.parse().map_err(|_| err("boolean"))?,
            "data_seed" => train.data_seed = seed()?,
            _ => return Err(Error::Config(format!("line {}: unknown key {key:?}", lineno + 1))),
        }
    }
    model.validate()?;
    train.validate()?;
    Ok((model, train))
}
