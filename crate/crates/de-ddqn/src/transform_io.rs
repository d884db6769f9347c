//! Loading shift/rotation data files and building suites from a config.

use std::fs;
use std::io;
use std::path::{Path, PathBuf};

use de_ddqn_core::bench::transform::{parse_transform, TransformData};
use de_ddqn_core::bench::{make_suite_with, BenchError};
use de_ddqn_core::ObjectiveFunction;

use crate::config::Config;
use crate::error::{Error, Result};

/// Reads a transform file for a `dim`-dimensional function.
pub fn load_transform_data(path: &Path, dim: usize, check_orthogonal: bool) -> Result<TransformData> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_transform(&text, dim, check_orthogonal).map_err(|e| Error::Data {
        path: path.to_path_buf(),
        message: e.to_string(),
    })
}

/// `<dir>/<id>_D<dim>.txt`
pub fn transform_path(dir: &Path, id: &str, dim: usize) -> PathBuf {
    dir.join(format!("{id}_D{dim}.txt"))
}

/// Which half of the configured suite to build.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SuitePart {
    Train,
    Test,
}

/// Instantiates one half of the suite. When `transform_dir` is set, a file
/// named by [`transform_path`] replaces the generated shift and rotation of
/// that instance; missing files fall back to the generated data.
pub fn build_suite(cfg: &Config, part: SuitePart) -> Result<Vec<ObjectiveFunction>> {
    let ids = match part {
        SuitePart::Train => &cfg.suite.train,
        SuitePart::Test => &cfg.suite.test,
    };
    let mut failure: Option<Error> = None;
    let suite = make_suite_with(ids, &cfg.suite.dims, |id, dim| {
        let Some(dir) = &cfg.transform_dir else {
            return Ok(None);
        };
        let path = transform_path(dir, id, dim);
        match load_transform_data(&path, dim, cfg.check_orthogonal) {
            Ok(data) => Ok(Some(data)),
            Err(Error::Io { source, .. }) if source.kind() == io::ErrorKind::NotFound => Ok(None),
            Err(e) => {
                let message = e.to_string();
                failure = Some(e);
                Err(BenchError::TransformSource {
                    id: id.to_string(),
                    message,
                })
            }
        }
    });
    match (suite, failure) {
        (Ok(s), _) => Ok(s),
        (Err(_), Some(e)) => Err(e),
        (Err(e), None) => Err(e.into()),
    }
}
