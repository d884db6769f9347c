//! Differential evolution with per-parent strategy choice.

mod env;
mod operators;
mod population;

use core::fmt;
use core::str::FromStr;

use thiserror::Error;

use crate::bench::BenchError;

pub use env::{DeRun, FeatureConfig, StepOutcome};
pub use operators::{crossover, draw_indices, mutate, mutate_into, repair};
pub use population::{sample_uniform, Population};

/// Smallest population for which five distinct partners other than the
/// parent exist.
pub const MIN_POPULATION: usize = 6;

/// Mutation strategy. The ordinal order is part of the state layout and the
/// Q-network's output order and must never change.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Strategy {
    /// `x_r1 + F (x_r2 − x_r3)`
    Rand1 = 0,
    /// `x_r1 + F (x_r2 − x_r3 + x_r4 − x_r5)`
    Rand2 = 1,
    /// `x_r1 + F (x_best − x_r1 + x_r2 − x_r3 + x_r4 − x_r5)`
    RandToBest2 = 2,
    /// `x_i + F (x_r1 − x_i + x_r2 − x_r3)`
    CurrToRand1 = 3,
}

impl Strategy {
    pub const COUNT: usize = 4;
    pub const ALL: [Strategy; Strategy::COUNT] = [
        Strategy::Rand1,
        Strategy::Rand2,
        Strategy::RandToBest2,
        Strategy::CurrToRand1,
    ];

    pub const fn ordinal(self) -> usize {
        self as usize
    }

    pub fn from_ordinal(ordinal: usize) -> Option<Strategy> {
        Strategy::ALL.get(ordinal).copied()
    }

    pub fn name(self) -> &'static str {
        match self {
            Strategy::Rand1 => "rand1",
            Strategy::Rand2 => "rand2",
            Strategy::RandToBest2 => "rand-to-best2",
            Strategy::CurrToRand1 => "curr-to-rand1",
        }
    }
}

impl fmt::Display for Strategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Strategy {
    type Err = DeError;

    fn from_str(s: &str) -> Result<Self, DeError> {
        Strategy::ALL
            .into_iter()
            .find(|st| st.name() == s)
            .ok_or_else(|| DeError::UnknownStrategy(s.into()))
    }
}

#[derive(Clone, Debug, PartialEq, Error)]
pub enum DeError {
    #[error("population size {0} is below the minimum of {MIN_POPULATION}")]
    PopulationTooSmall(usize),
    #[error("crossover rate {0} outside [0, 1]")]
    InvalidCrossoverRate(f64),
    #[error("scaling factor {0} must be finite and positive")]
    InvalidScaleFactor(f64),
    #[error("evaluation budget {budget} cannot cover the initial population of {population}")]
    BudgetTooSmall { budget: usize, population: usize },
    #[error("evaluation budget exhausted")]
    BudgetExhausted,
    #[error("population members and fitness values disagree in size")]
    ShapeMismatch,
    #[error("unknown strategy `{0}`")]
    UnknownStrategy(alloc::string::String),
    #[error(transparent)]
    Bench(#[from] BenchError),
}

/// DE control parameters.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeParams {
    /// F
    pub scale_factor: f64,
    /// CR
    pub crossover_rate: f64,
    /// NP
    pub population_size: usize,
    /// Evaluation budget per run, initial population included.
    pub max_evals: usize,
    /// A run stops once best-so-far error drops below this (when the optimum
    /// is known).
    pub stop_tolerance: f64,
}

impl Default for DeParams {
    fn default() -> Self {
        DeParams {
            scale_factor: 0.5,
            crossover_rate: 1.0,
            population_size: 100,
            max_evals: 10_000,
            stop_tolerance: 1e-8,
        }
    }
}

impl DeParams {
    pub fn validate(&self) -> Result<(), DeError> {
        if self.population_size < MIN_POPULATION {
            return Err(DeError::PopulationTooSmall(self.population_size));
        }
        if !(0.0..=1.0).contains(&self.crossover_rate) {
            return Err(DeError::InvalidCrossoverRate(self.crossover_rate));
        }
        if !(self.scale_factor.is_finite() && self.scale_factor > 0.0) {
            return Err(DeError::InvalidScaleFactor(self.scale_factor));
        }
        if self.max_evals < self.population_size {
            return Err(DeError::BudgetTooSmall {
                budget: self.max_evals,
                population: self.population_size,
            });
        }
        Ok(())
    }
}
