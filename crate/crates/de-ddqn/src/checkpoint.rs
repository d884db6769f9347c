//! Checkpoint files: the binary network image plus a JSON sidecar at
//! `<checkpoint>.json`.

use std::ffi::OsString;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use de_ddqn_core::features::FEATURE_LAYOUT_VERSION;
use de_ddqn_core::neural::codec::{self, FORMAT_VERSION};
use de_ddqn_core::{Adam, QNetwork, Strategy, STATE_DIM};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AdamSettings {
    pub learning_rate: f64,
    pub beta1: f64,
    pub beta2: f64,
    pub epsilon: f64,
    pub clip_norm: Option<f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sidecar {
    pub format_version: u32,
    pub feature_layout_version: u32,
    pub config_hash: String,
    /// Largest training dimension, used to normalize the dimension feature.
    pub dim_max: usize,
    pub state_dim: usize,
    pub strategies: Vec<String>,
    pub layers: Vec<usize>,
    pub adam: AdamSettings,
    pub reward: String,
    pub cycle: usize,
    pub mean_reward: f64,
}

impl Sidecar {
    pub fn new(net: &QNetwork, adam: &Adam, config_hash: String, dim_max: usize, reward: &str) -> Self {
        Sidecar {
            format_version: FORMAT_VERSION,
            feature_layout_version: FEATURE_LAYOUT_VERSION,
            config_hash,
            dim_max,
            state_dim: STATE_DIM,
            strategies: Strategy::ALL.iter().map(|s| s.name().to_string()).collect(),
            layers: net.sizes(),
            adam: AdamSettings {
                learning_rate: adam.learning_rate,
                beta1: adam.beta1,
                beta2: adam.beta2,
                epsilon: adam.epsilon,
                clip_norm: adam.clip_norm,
            },
            reward: reward.to_string(),
            cycle: 0,
            mean_reward: 0.0,
        }
    }

    fn check(&self, path: &Path) -> Result<()> {
        let bad = |message: String| {
            Err(Error::Data {
                path: path.to_path_buf(),
                message,
            })
        };
        if self.format_version != FORMAT_VERSION {
            return bad(format!(
                "checkpoint format version {} (expected {FORMAT_VERSION})",
                self.format_version
            ));
        }
        if self.feature_layout_version != FEATURE_LAYOUT_VERSION {
            return bad(format!(
                "feature layout version {} (this build uses {FEATURE_LAYOUT_VERSION})",
                self.feature_layout_version
            ));
        }
        let names: Vec<&str> = Strategy::ALL.iter().map(|s| s.name()).collect();
        if self.strategies != names {
            return bad(format!("strategy table {:?} differs from {names:?}", self.strategies));
        }
        if self.state_dim != STATE_DIM {
            return bad(format!("state dimension {} (expected {STATE_DIM})", self.state_dim));
        }
        if self.dim_max == 0 {
            return bad("dim_max must be positive".into());
        }
        Ok(())
    }
}

/// A loaded checkpoint.
#[derive(Clone, Debug)]
pub struct Checkpoint {
    pub network: QNetwork,
    pub adam: Option<Adam>,
    pub sidecar: Sidecar,
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

fn temp_path(path: &Path) -> PathBuf {
    let mut s: OsString = path.as_os_str().to_owned();
    s.push(".tmp");
    PathBuf::from(s)
}

/// Writes `bytes` to a sibling temporary file and renames it into place.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let tmp = temp_path(path);
    let result = (|| {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(bytes)?;
        f.sync_all()?;
        fs::rename(&tmp, path)
    })();
    result.map_err(|e| {
        let _ = fs::remove_file(&tmp);
        Error::io(path, e)
    })
}

/// Fails early when `path` cannot be written.
pub fn ensure_writable(path: &Path) -> Result<()> {
    let probe = temp_path(path);
    fs::File::create(&probe).map_err(|e| Error::io(path, e))?;
    fs::remove_file(&probe).map_err(|e| Error::io(&probe, e))?;
    if path.is_dir() {
        return Err(Error::Data {
            path: path.to_path_buf(),
            message: "is a directory".into(),
        });
    }
    Ok(())
}

/// Saves the network (with optimizer state) and its sidecar.
pub fn save(path: &Path, net: &QNetwork, adam: Option<&Adam>, sidecar: &Sidecar) -> Result<()> {
    write_atomic(path, &codec::encode(net, adam))?;
    let mut json = serde_json::to_string_pretty(sidecar).expect("sidecar serializes");
    json.push('\n');
    write_atomic(&sidecar_path(path), json.as_bytes())
}

/// Loads and cross-checks a checkpoint and its sidecar.
pub fn load(path: &Path) -> Result<Checkpoint> {
    let bytes = fs::read(path).map_err(|e| Error::io(path, e))?;
    let side_path = sidecar_path(path);
    let text = fs::read_to_string(&side_path).map_err(|e| Error::io(&side_path, e))?;
    let sidecar: Sidecar = serde_json::from_str(&text).map_err(|e| Error::Data {
        path: side_path.clone(),
        message: e.to_string(),
    })?;
    sidecar.check(&side_path)?;
    let (network, adam) = codec::decode(&bytes).map_err(|source| Error::Checkpoint {
        path: path.to_path_buf(),
        source,
    })?;
    if network.sizes() != sidecar.layers {
        return Err(Error::Data {
            path: side_path,
            message: format!(
                "sidecar layers {:?} do not match the checkpoint's {:?}",
                sidecar.layers,
                network.sizes()
            ),
        });
    }
    Ok(Checkpoint {
        network,
        adam,
        sidecar,
    })
}
