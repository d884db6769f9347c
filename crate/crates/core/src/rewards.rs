//! Per-application rewards.

use core::fmt;
use core::str::FromStr;

use thiserror::Error;

/// Default value returned by R3 when the trial lands on the optimum.
pub const R3_DEFAULT_CAP: f64 = 1e6;

/// Below this distance to the optimum R3 returns its cap.
pub const R3_SINGULARITY: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum RewardKind {
    /// Fitness improvement over the parent.
    R1,
    /// 10 for a new best-so-far, 1 for beating the parent, else 0.
    R2,
    /// Improvement over the parent relative to the trial's error.
    R3 { cap: f64 },
}

impl RewardKind {
    pub fn r3() -> Self {
        RewardKind::R3 { cap: R3_DEFAULT_CAP }
    }

    pub fn name(self) -> &'static str {
        match self {
            RewardKind::R1 => "r1",
            RewardKind::R2 => "r2",
            RewardKind::R3 { .. } => "r3",
        }
    }

    pub fn needs_optimum(self) -> bool {
        matches!(self, RewardKind::R3 { .. })
    }

    /// Rejects R3 on a function without a known optimum, and bad caps.
    pub fn validate_for(self, f_optimum: Option<f64>) -> Result<(), RewardError> {
        if let RewardKind::R3 { cap } = self {
            if !(cap.is_finite() && cap >= 0.0) {
                return Err(RewardError::InvalidCap(cap));
            }
            match f_optimum {
                Some(v) if v.is_finite() => {}
                _ => return Err(RewardError::MissingOptimum),
            }
        }
        Ok(())
    }
}

impl fmt::Display for RewardKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for RewardKind {
    type Err = RewardError;

    fn from_str(s: &str) -> Result<Self, RewardError> {
        match s {
            "r1" | "R1" => Ok(RewardKind::R1),
            "r2" | "R2" => Ok(RewardKind::R2),
            "r3" | "R3" => Ok(RewardKind::r3()),
            _ => Err(RewardError::UnknownKind),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Error)]
pub enum RewardError {
    #[error("reward r3 needs a known optimum")]
    MissingOptimum,
    #[error("reward r3 cap {0} must be finite and non-negative")]
    InvalidCap(f64),
    #[error("unknown reward kind (expected r1, r2 or r3)")]
    UnknownKind,
}

/// Reward for one application. `f_bsf` is the best-so-far value before
/// the trial was evaluated.
pub fn reward(
    kind: RewardKind,
    f_parent: f64,
    f_trial: f64,
    f_bsf: f64,
    f_optimum: Option<f64>,
) -> Result<f64, RewardError> {
    Ok(match kind {
        RewardKind::R1 => (f_parent - f_trial).max(0.0),
        RewardKind::R2 => {
            if f_trial < f_bsf {
                10.0
            } else if f_trial < f_parent {
                1.0
            } else {
                0.0
            }
        }
        RewardKind::R3 { cap } => {
            kind.validate_for(f_optimum)?;
            let opt = f_optimum.unwrap_or(0.0);
            let gain = f_parent - f_trial;
            if gain <= 0.0 {
                0.0
            } else {
                let err = f_trial - opt;
                if err < R3_SINGULARITY {
                    cap
                } else {
                    (gain / err).min(cap)
                }
            }
        }
    })
}
