use std::fmt;
use std::str::FromStr;

use crate::corpus::Task;
use crate::error::{Error, Result};
use crate::nn::{LayerConfig, OutputActivation};

/// Which network is being trained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Arch {
    Cnn,
    Lstm,
}

impl Arch {
    pub fn as_str(self) -> &'static str {
        match self {
            Arch::Cnn => "cnn",
            Arch::Lstm => "lstm",
        }
    }
}

impl fmt::Display for Arch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Arch {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "cnn" => Ok(Arch::Cnn),
            "lstm" => Ok(Arch::Lstm),
            other => Err(Error::invalid(format!(
                "unknown architecture {other:?} (expected cnn or lstm)"
            ))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OptimizerKind {
    Adam,
    Sgd,
}

impl OptimizerKind {
    pub fn as_str(self) -> &'static str {
        match self {
            OptimizerKind::Adam => "adam",
            OptimizerKind::Sgd => "sgd",
        }
    }
}

impl fmt::Display for OptimizerKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for OptimizerKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "adam" => Ok(OptimizerKind::Adam),
            "sgd" => Ok(OptimizerKind::Sgd),
            other => Err(Error::invalid(format!(
                "unknown optimizer {other:?} (expected adam or sgd)"
            ))),
        }
    }
}

/// Every knob of one training run. Serializes to a flat `key=value` text
/// format; unspecified keys keep these defaults.
#[derive(Debug, Clone, PartialEq)]
pub struct TrainingConfig {
    pub task: Task,
    pub arch: Arch,
    pub epochs: usize,
    pub batch_size: usize,
    pub learning_rate: f64,
    pub optimizer: OptimizerKind,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub spatial_dropout: f64,
    pub lstm_dropout: f64,
    pub lstm_recurrent_dropout: f64,
    pub emb_dim: usize,
    pub num_words: usize,
    pub maxlen: usize,
    pub kernel_width: usize,
    pub num_filters: usize,
    pub lstm_units: usize,
    pub cnn_output: OutputActivation,
    /// Fit the vocabulary on train+test instead of train only.
    pub fit_on_all: bool,
    pub seed: u64,
}

impl Default for TrainingConfig {
    fn default() -> Self {
        TrainingConfig {
            task: Task::Cognitive,
            arch: Arch::Cnn,
            epochs: 20,
            batch_size: 32,
            learning_rate: 0.001,
            optimizer: OptimizerKind::Adam,
            beta1: 0.9,
            beta2: 0.999,
            epsilon: 1e-8,
            spatial_dropout: 0.7,
            lstm_dropout: 0.7,
            lstm_recurrent_dropout: 0.7,
            emb_dim: 50,
            num_words: 5000,
            maxlen: 30,
            kernel_width: 3,
            num_filters: 64,
            lstm_units: 10,
            cnn_output: OutputActivation::Softmax,
            fit_on_all: false,
            seed: 42,
        }
    }
}

impl TrainingConfig {
    pub fn validate(&self) -> Result<()> {
        if self.epochs < 1 {
            return Err(Error::invalid("epochs must be at least 1"));
        }
        if self.batch_size < 1 {
            return Err(Error::invalid("batch_size must be at least 1"));
        }
        if !self.learning_rate.is_finite() || self.learning_rate <= 0.0 {
            return Err(Error::invalid(format!(
                "learning_rate must be positive, got {}",
                self.learning_rate
            )));
        }
        for (name, v) in [("beta1", self.beta1), ("beta2", self.beta2)] {
            if !(0.0..1.0).contains(&v) {
                return Err(Error::invalid(format!("{name} must be in [0, 1), got {v}")));
            }
        }
        if !self.epsilon.is_finite() || self.epsilon <= 0.0 {
            return Err(Error::invalid("epsilon must be positive"));
        }
        if self.emb_dim < 1 || self.num_words < 2 || self.maxlen < 1 {
            return Err(Error::invalid(
                "emb_dim and maxlen must be at least 1, num_words at least 2",
            ));
        }
        if self.kernel_width < 1 || self.num_filters < 1 || self.lstm_units < 1 {
            return Err(Error::invalid(
                "kernel_width, num_filters and lstm_units must be at least 1",
            ));
        }
        if self.arch == Arch::Cnn && self.maxlen < self.kernel_width {
            return Err(Error::invalid(format!(
                "maxlen {} is shorter than kernel_width {}",
                self.maxlen, self.kernel_width
            )));
        }
        self.layer_config().validate()
    }

    pub fn layer_config(&self) -> LayerConfig {
        LayerConfig {
            spatial_dropout: self.spatial_dropout,
            lstm_dropout: self.lstm_dropout,
            lstm_recurrent_dropout: self.lstm_recurrent_dropout,
            cnn_output: self.cnn_output,
        }
    }

    /// Canonical `key=value` serialization, one key per line.
    pub fn to_key_values(&self) -> String {
        format!(
            "task={}\narch={}\nepochs={}\nbatch_size={}\nlearning_rate={}\noptimizer={}\n\
             beta1={}\nbeta2={}\nepsilon={}\nspatial_dropout={}\nlstm_dropout={}\n\
             lstm_recurrent_dropout={}\nemb_dim={}\nnum_words={}\nmaxlen={}\nkernel_width={}\n\
             num_filters={}\nlstm_units={}\ncnn_output={}\nfit_on_all={}\nseed={}\n",
            self.task,
            self.arch,
            self.epochs,
            self.batch_size,
            self.learning_rate,
            self.optimizer,
            self.beta1,
            self.beta2,
            self.epsilon,
            self.spatial_dropout,
            self.lstm_dropout,
            self.lstm_recurrent_dropout,
            self.emb_dim,
            self.num_words,
            self.maxlen,
            self.kernel_width,
            self.num_filters,
            self.lstm_units,
            self.cnn_output,
            self.fit_on_all,
            self.seed,
        )
    }

    /// Apply one `key=value` assignment.
    pub fn set_key(&mut self, key: &str, value: &str) -> Result<()> {
        let value = value.trim();
        let bad = |what: &str| Error::invalid(format!("config key {key}: bad {what} {value:?}"));
        match key {
            "task" => self.task = value.parse()?,
            "arch" => self.arch = value.parse()?,
            "epochs" => self.epochs = value.parse().map_err(|_| bad("integer"))?,
            "batch_size" => self.batch_size = value.parse().map_err(|_| bad("integer"))?,
            "learning_rate" => self.learning_rate = value.parse().map_err(|_| bad("number"))?,
            "optimizer" => self.optimizer = value.parse()?,
            "beta1" => self.beta1 = value.parse().map_err(|_| bad("number"))?,
            "beta2" => self.beta2 = value.parse().map_err(|_| bad("number"))?,
            "epsilon" => self.epsilon = value.parse().map_err(|_| bad("number"))?,
            "spatial_dropout" => {
                self.spatial_dropout = value.parse().map_err(|_| bad("number"))?
            }
            "lstm_dropout" => self.lstm_dropout = value.parse().map_err(|_| bad("number"))?,
            "lstm_recurrent_dropout" => {
                self.lstm_recurrent_dropout = value.parse().map_err(|_| bad("number"))?
            }
            "emb_dim" => self.emb_dim = value.parse().map_err(|_| bad("integer"))?,
            "num_words" => self.num_words = value.parse().map_err(|_| bad("integer"))?,
            "maxlen" => self.maxlen = value.parse().map_err(|_| bad("integer"))?,
            "kernel_width" => self.kernel_width = value.parse().map_err(|_| bad("integer"))?,
            "num_filters" => self.num_filters = value.parse().map_err(|_| bad("integer"))?,
            "lstm_units" => self.lstm_units = value.parse().map_err(|_| bad("integer"))?,
            "cnn_output" => self.cnn_output = value.parse()?,
            "fit_on_all" => self.fit_on_all = value.parse().map_err(|_| bad("boolean"))?,
            "seed" => self.seed = value.parse().map_err(|_| bad("integer"))?,
            other => return Err(Error::invalid(format!("unknown config key {other:?}"))),
        }
        Ok(())
    }

    /// Overlay `key=value` lines onto this config. Blank lines and lines
    /// starting with `#` are ignored.
    pub fn apply_key_values(&mut self, text: &str) -> Result<()> {
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::invalid(format!("config line {}: expected key=value", lineno + 1))
            })?;
            self.set_key(key.trim(), value)?;
        }
        Ok(())
    }

    /// Parse a full config from text, starting from the defaults.
    pub fn from_key_values(text: &str) -> Result<Self> {
        let mut config = TrainingConfig::default();
        config.apply_key_values(text)?;
        config.validate()?;
        Ok(config)
    }
}
