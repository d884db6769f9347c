//! `key = value` configuration files.
//!
//! Blank lines and everything after `#` are ignored. Every key is optional
//! and defaults to the values below; unknown or repeated keys are errors.
//!
//! ```text
//! # DE
//! scale_factor = 0.5
//! crossover_rate = 1.0
//! population_size = 100
//! max_evals = 10000
//! stop_tolerance = 1e-8
//! # features
//! history_generations = 10
//! window_size = 50
//! # agent
//! epsilon = 0.1
//! gamma = 0.99
//! sync_period = 1000
//! batch_size = 64
//! memory_capacity = 100000
//! warmup = 10000
//! learning_rate = 1e-4
//! adam_beta1 = 0.9
//! adam_beta2 = 0.999
//! adam_epsilon = 1e-8
//! clip_norm = none
//! hidden_layers = 4
//! hidden_units = 100
//! # training
//! reward = r2
//! r3_cap = 1e6
//! cycles = 2000
//! patience = 50
//! seed = 0
//! # suite
//! train_functions = sphere_shifted, rosenbrock_shifted, ...
//! test_functions = rastrigin_shifted, ...
//! dims = 10, 30
//! transform_dir = data        # optional, relative to this file
//! check_orthogonal = true
//! ```

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use de_ddqn_core::bench::SuiteConfig;
use de_ddqn_core::ddqn::AgentConfig;
use de_ddqn_core::de::FeatureConfig;
use de_ddqn_core::rewards::R3_DEFAULT_CAP;
use de_ddqn_core::rng::fnv1a;
use de_ddqn_core::{DeParams, RewardKind, Strategy, STATE_DIM};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct Config {
    pub de: DeParams,
    pub history_generations: usize,
    pub window_size: usize,
    pub agent: AgentConfig,
    pub hidden_layers: usize,
    pub hidden_units: usize,
    pub reward: RewardKind,
    pub cycles: usize,
    /// Cycles without a better mean reward before training stops.
    pub patience: usize,
    pub seed: u64,
    pub suite: SuiteConfig,
    pub transform_dir: Option<PathBuf>,
    pub check_orthogonal: bool,
}

impl Default for Config {
    fn default() -> Self {
        Config {
            de: DeParams::default(),
            history_generations: 10,
            window_size: 50,
            agent: AgentConfig::default(),
            hidden_layers: 4,
            hidden_units: 100,
            reward: RewardKind::R2,
            cycles: 2000,
            patience: 50,
            seed: 0,
            suite: SuiteConfig::default(),
            transform_dir: None,
            check_orthogonal: true,
        }
    }
}

const KEYS: &[&str] = &[
    "scale_factor",
    "crossover_rate",
    "population_size",
    "max_evals",
    "stop_tolerance",
    "history_generations",
    "window_size",
    "epsilon",
    "gamma",
    "sync_period",
    "batch_size",
    "memory_capacity",
    "warmup",
    "learning_rate",
    "adam_beta1",
    "adam_beta2",
    "adam_epsilon",
    "clip_norm",
    "hidden_layers",
    "hidden_units",
    "reward",
    "r3_cap",
    "cycles",
    "patience",
    "seed",
    "train_functions",
    "test_functions",
    "dims",
    "transform_dir",
    "check_orthogonal",
];

impl Config {
    /// Reads and validates a configuration file.
    pub fn load(path: &Path) -> Result<Config> {
        let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Config::parse(&text, path)?;
        if let Some(dir) = &cfg.transform_dir {
            if dir.is_relative() {
                let base = path.parent().unwrap_or_else(|| Path::new(""));
                cfg.transform_dir = Some(base.join(dir));
            }
        }
        Ok(cfg)
    }

    /// Parses configuration text; `path` is only used in error messages.
    pub fn parse(text: &str, path: &Path) -> Result<Config> {
        let mut cfg = Config::default();
        let mut seen: Vec<&str> = Vec::new();
        let mut r3_cap = R3_DEFAULT_CAP;
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let err = |message: String| Error::ConfigLine {
                path: path.to_path_buf(),
                line,
                message,
            };
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let (key, value) = content
                .split_once('=')
                .ok_or_else(|| err(format!("expected `key = value`, found `{content}`")))?;
            let (key, value) = (key.trim(), value.trim());
            let key = KEYS
                .iter()
                .copied()
                .find(|k| *k == key)
                .ok_or_else(|| err(format!("unknown key `{key}`")))?;
            if seen.contains(&key) {
                return Err(err(format!("duplicate key `{key}`")));
            }
            seen.push(key);
            cfg.set(key, value, &mut r3_cap).map_err(err)?;
        }
        if let RewardKind::R3 { .. } = cfg.reward {
            cfg.reward = RewardKind::R3 { cap: r3_cap };
        }
        cfg.agent.layers = cfg.layers();
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str, r3_cap: &mut f64) -> Result<(), String> {
        match key {
            "scale_factor" => self.de.scale_factor = num(value)?,
            "crossover_rate" => self.de.crossover_rate = num(value)?,
            "population_size" => self.de.population_size = num(value)?,
            "max_evals" => self.de.max_evals = num(value)?,
            "stop_tolerance" => self.de.stop_tolerance = num(value)?,
            "history_generations" => self.history_generations = num(value)?,
            "window_size" => self.window_size = num(value)?,
            "epsilon" => self.agent.epsilon = num(value)?,
            "gamma" => self.agent.gamma = num(value)?,
            "sync_period" => self.agent.sync_period = num(value)?,
            "batch_size" => self.agent.batch_size = num(value)?,
            "memory_capacity" => self.agent.memory_capacity = num(value)?,
            "warmup" => self.agent.warmup = num(value)?,
            "learning_rate" => self.agent.learning_rate = num(value)?,
            "adam_beta1" => self.agent.beta1 = num(value)?,
            "adam_beta2" => self.agent.beta2 = num(value)?,
            "adam_epsilon" => self.agent.adam_epsilon = num(value)?,
            "clip_norm" => {
                self.agent.clip_norm = match value {
                    "none" | "off" => None,
                    v => Some(num(v)?),
                }
            }
            "hidden_layers" => self.hidden_layers = num(value)?,
            "hidden_units" => self.hidden_units = num(value)?,
            "reward" => self.reward = value.parse().map_err(|e| format!("{e}"))?,
            "r3_cap" => *r3_cap = num(value)?,
            "cycles" => self.cycles = num(value)?,
            "patience" => self.patience = num(value)?,
            "seed" => self.seed = num(value)?,
            "train_functions" => self.suite.train = list(value),
            "test_functions" => self.suite.test = list(value),
            "dims" => {
                self.suite.dims = list(value)
                    .iter()
                    .map(|d| num(d))
                    .collect::<Result<_, _>>()?
            }
            "transform_dir" => self.transform_dir = Some(PathBuf::from(value)),
            "check_orthogonal" => self.check_orthogonal = num(value)?,
            _ => unreachable!("key table and setter disagree on `{key}`"),
        }
        Ok(())
    }

    /// Network layer widths implied by the hidden layer settings.
    pub fn layers(&self) -> Vec<usize> {
        let mut layers = vec![STATE_DIM];
        layers.extend(std::iter::repeat(self.hidden_units).take(self.hidden_layers));
        layers.push(Strategy::COUNT);
        layers
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        self.de.validate().or_else(|e| bad(e.to_string()))?;
        self.agent.validate().or_else(|e| bad(e.to_string()))?;
        self.suite.validate().or_else(|e| bad(e.to_string()))?;
        self.reward.validate_for(Some(0.0)).or_else(|e| bad(e.to_string()))?;
        if self.history_generations == 0 || self.window_size == 0 {
            return bad("history_generations and window_size must be positive".into());
        }
        if self.hidden_layers > 0 && self.hidden_units == 0 {
            return bad("hidden_units must be positive".into());
        }
        if self.agent.layers != self.layers() {
            return bad("agent layers disagree with hidden_layers/hidden_units".into());
        }
        Ok(())
    }

    /// Feature sizes with the normalizing dimension taken from the suite.
    pub fn features(&self) -> FeatureConfig {
        FeatureConfig {
            history_len: self.history_generations,
            window_size: self.window_size,
            dim_max: self.suite.dim_max(),
        }
    }

    /// Every setting in a fixed order, one `key = value` per line. Parsing
    /// the output gives back an equal configuration.
    pub fn render(&self) -> String {
        let mut s = String::new();
        let mut put = |k: &str, v: String| {
            let _ = writeln!(s, "{k} = {v}");
        };
        put("scale_factor", self.de.scale_factor.to_string());
        put("crossover_rate", self.de.crossover_rate.to_string());
        put("population_size", self.de.population_size.to_string());
        put("max_evals", self.de.max_evals.to_string());
        put("stop_tolerance", self.de.stop_tolerance.to_string());
        put("history_generations", self.history_generations.to_string());
        put("window_size", self.window_size.to_string());
        put("epsilon", self.agent.epsilon.to_string());
        put("gamma", self.agent.gamma.to_string());
        put("sync_period", self.agent.sync_period.to_string());
        put("batch_size", self.agent.batch_size.to_string());
        put("memory_capacity", self.agent.memory_capacity.to_string());
        put("warmup", self.agent.warmup.to_string());
        put("learning_rate", self.agent.learning_rate.to_string());
        put("adam_beta1", self.agent.beta1.to_string());
        put("adam_beta2", self.agent.beta2.to_string());
        put("adam_epsilon", self.agent.adam_epsilon.to_string());
        put(
            "clip_norm",
            self.agent.clip_norm.map_or("none".into(), |c| c.to_string()),
        );
        put("hidden_layers", self.hidden_layers.to_string());
        put("hidden_units", self.hidden_units.to_string());
        put("reward", self.reward.name().into());
        if let RewardKind::R3 { cap } = self.reward {
            put("r3_cap", cap.to_string());
        }
        put("cycles", self.cycles.to_string());
        put("patience", self.patience.to_string());
        put("seed", self.seed.to_string());
        put("train_functions", self.suite.train.join(", "));
        put("test_functions", self.suite.test.join(", "));
        put(
            "dims",
            self.suite
                .dims
                .iter()
                .map(usize::to_string)
                .collect::<Vec<_>>()
                .join(", "),
        );
        if let Some(dir) = &self.transform_dir {
            put("transform_dir", dir.display().to_string());
        }
        put("check_orthogonal", self.check_orthogonal.to_string());
        s
    }

    /// Hash of [`Config::render`], recorded next to checkpoints.
    pub fn hash(&self) -> String {
        format!("{:016x}", fnv1a(self.render().as_bytes()))
    }
}

fn num<T: FromStr>(value: &str) -> Result<T, String> {
    value
        .parse()
        .map_err(|_| format!("cannot parse `{value}` as {}", std::any::type_name::<T>()))
}

fn list(value: &str) -> Vec<String> {
    value
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(String::from)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<Config> {
        Config::parse(text, Path::new("test.cfg"))
    }

    #[test]
    fn empty_text_gives_defaults() {
        let cfg = parse("# nothing\n\n").unwrap();
        assert_eq!(cfg, Config::default());
        assert_eq!(cfg.agent.layers, vec![99, 100, 100, 100, 100, 4]);
    }

    #[test]
    fn render_round_trips() {
        let text = "reward = r3\nr3_cap = 500\nclip_norm = 10\ndims = 5, 10\ntrain_functions = sphere_shifted\n\
                    test_functions = rastrigin_shifted\nhidden_layers = 2\nhidden_units = 8\nseed = 42\n";
        let cfg = parse(text).unwrap();
        assert_eq!(cfg.reward, RewardKind::R3 { cap: 500.0 });
        assert_eq!(cfg.agent.layers, vec![99, 8, 8, 4]);
        let again = parse(&cfg.render()).unwrap();
        assert_eq!(again, cfg);
        assert_eq!(again.hash(), cfg.hash());
    }

    #[test]
    fn errors_carry_line_numbers() {
        let e = parse("seed = 1\n\nbogus = 3\n").unwrap_err();
        assert!(matches!(e, Error::ConfigLine { line: 3, .. }), "{e}");
        let e = parse("seed = 1\nseed = 2\n").unwrap_err();
        assert!(e.to_string().contains("test.cfg:2: duplicate key"), "{e}");
        let e = parse("gamma = lots\n").unwrap_err();
        assert!(matches!(e, Error::ConfigLine { line: 1, .. }));
        let e = parse("no equals sign\n").unwrap_err();
        assert_eq!(e.exit_code(), 2);
    }

    #[test]
    fn semantic_checks() {
        assert!(matches!(parse("gamma = 1.5\n"), Err(Error::Config(_))));
        assert!(matches!(parse("train_functions = nope\n"), Err(Error::Config(_))));
        assert!(parse("train_functions = sphere_shifted\ntest_functions = sphere_shifted\n").is_err());
        assert!(parse("population_size = 3\n").is_err());
    }

    #[test]
    fn hash_tracks_content() {
        let a = parse("seed = 1\n").unwrap();
        let b = parse("seed = 2\n").unwrap();
        assert_ne!(a.hash(), b.hash());
        assert_eq!(a.hash().len(), 16);
    }
}
