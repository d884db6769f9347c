use alloc::vec;
use alloc::vec::Vec;

use super::operators::{crossover, draw_indices, mutate_into, repair};
use super::{DeError, DeParams, Population, Strategy};
use crate::bench::ObjectiveFunction;
use crate::features::{compute_state, record_application, MetricWindow, OperatorHistory, RunState, STATE_DIM};
use crate::rng::{seeded, RunRng};

/// Sizes of the feature bookkeeping.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FeatureConfig {
    /// Generations kept in the operator history (`gen`).
    pub history_len: usize,
    /// Capacity of the improvement window (`W`).
    pub window_size: usize,
    /// Largest dimension of the training suite.
    pub dim_max: usize,
}

impl FeatureConfig {
    pub fn new(dim_max: usize) -> Self {
        FeatureConfig {
            history_len: 10,
            window_size: 50,
            dim_max,
        }
    }
}

/// What happened in one [`DeRun::step`].
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepOutcome {
    pub strategy: Strategy,
    pub parent: usize,
    pub parent_fitness: f64,
    pub trial_fitness: f64,
    pub best_parent_fitness: f64,
    /// Median parent fitness before selection.
    pub median_fitness: f64,
    /// Best-so-far fitness before this evaluation.
    pub bsf_before: f64,
    pub improved_parent: bool,
    pub improved_bsf: bool,
    pub done: bool,
}

/// One DE run driven one parent at a time. Parents are visited in index
/// order; a generation ends after every member has been visited once.
///
/// The partner indices for the current parent are drawn lazily, so calling
/// [`DeRun::state`] before [`DeRun::step`] does not change the random stream.
#[derive(Debug)]
pub struct DeRun<'f> {
    func: &'f ObjectiveFunction,
    params: DeParams,
    pop: Population,
    run: RunState,
    history: OperatorHistory,
    window: MetricWindow,
    rng: RunRng,
    cursor: usize,
    generation: usize,
    pending: Option<[usize; 5]>,
    donor: Vec<f64>,
    trial: Vec<f64>,
    scratch: Vec<f64>,
    done: bool,
}

impl<'f> DeRun<'f> {
    /// Initializes and evaluates the population (`NP` evaluations).
    pub fn new(
        func: &'f ObjectiveFunction,
        params: DeParams,
        features: FeatureConfig,
        seed: u64,
    ) -> Result<Self, DeError> {
        params.validate()?;
        let mut rng = seeded(seed);
        let pop = Population::initialize(func, params.population_size, &mut rng)?;
        let run = RunState::from_population(&pop, params.max_evals, features.dim_max, func.diagonal());
        let mut history = OperatorHistory::new(features.history_len);
        history.rotate();
        let dim = func.dim();
        let mut de = DeRun {
            func,
            params,
            pop,
            run,
            history,
            window: MetricWindow::new(features.window_size),
            rng,
            cursor: 0,
            generation: 0,
            pending: None,
            donor: vec![0.0; dim],
            trial: vec![0.0; dim],
            scratch: Vec::with_capacity(params.population_size),
            done: false,
        };
        de.done = de.termination_reached();
        Ok(de)
    }

    fn termination_reached(&self) -> bool {
        if self.run.evals >= self.params.max_evals {
            return true;
        }
        match self.func.f_optimum() {
            Some(opt) => self.run.f_bsf - opt < self.params.stop_tolerance,
            None => false,
        }
    }

    fn prepare(&mut self) -> [usize; 5] {
        match self.pending {
            Some(r) => r,
            None => {
                let r = draw_indices(self.pop.len(), self.cursor, &mut self.rng);
                self.pending = Some(r);
                r
            }
        }
    }

    /// State vector for the parent about to be mutated.
    pub fn state(&mut self) -> [f64; STATE_DIM] {
        let mut out = [0.0; STATE_DIM];
        self.state_into(&mut out);
        out
    }

    pub fn state_into(&mut self, out: &mut [f64; STATE_DIM]) {
        let r = self.prepare();
        compute_state(&self.run, &self.pop, self.cursor, &r, &self.history, &self.window, out);
    }

    /// Applies `strategy` to the current parent: mutation, crossover,
    /// repair, evaluation, bookkeeping, selection.
    pub fn step(&mut self, strategy: Strategy) -> Result<StepOutcome, DeError> {
        if self.done {
            return Err(DeError::BudgetExhausted);
        }
        let r = self.prepare();
        let i = self.cursor;
        mutate_into(strategy, &self.pop, i, &r, self.params.scale_factor, &mut self.donor);
        crossover(
            self.pop.member(i),
            &self.donor,
            self.params.crossover_rate,
            &mut self.rng,
            &mut self.trial,
        );
        repair(&mut self.trial, self.func.lower(), self.func.upper());
        let trial_fitness = self.func.evaluate(&self.trial)?;

        let parent_fitness = self.pop.fitness(i);
        let best_parent_fitness = self.pop.fitness(self.pop.best_index());
        let median = self.pop.median_fitness(&mut self.scratch);
        let bsf_before = self.run.f_bsf;
        record_application(
            &mut self.history,
            &mut self.window,
            strategy,
            parent_fitness,
            trial_fitness,
            best_parent_fitness,
            bsf_before,
            median,
        );
        let improved_parent = self.pop.select(i, &self.trial, trial_fitness);
        let improved_bsf = self.run.observe(&self.trial, trial_fitness);

        self.pending = None;
        self.cursor += 1;
        if self.cursor == self.pop.len() {
            self.cursor = 0;
            self.generation += 1;
            self.history.rotate();
        }
        self.done = self.termination_reached();

        Ok(StepOutcome {
            strategy,
            parent: i,
            parent_fitness,
            trial_fitness,
            best_parent_fitness,
            median_fitness: median,
            bsf_before,
            improved_parent,
            improved_bsf,
            done: self.done,
        })
    }

    pub fn is_done(&self) -> bool {
        self.done
    }

    /// Index of the parent the next step mutates.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    /// Completed generations.
    pub fn generation(&self) -> usize {
        self.generation
    }

    pub fn evals(&self) -> usize {
        self.run.evals
    }

    pub fn best_fitness(&self) -> f64 {
        self.run.f_bsf
    }

    /// Best-so-far minus the optimum, or the raw best when it is unknown.
    pub fn final_error(&self) -> f64 {
        match self.func.f_optimum() {
            Some(opt) => self.run.f_bsf - opt,
            None => self.run.f_bsf,
        }
    }

    pub fn function(&self) -> &'f ObjectiveFunction {
        self.func
    }

    pub fn params(&self) -> &DeParams {
        &self.params
    }

    pub fn population(&self) -> &Population {
        &self.pop
    }

    pub fn run_state(&self) -> &RunState {
        &self.run
    }

    pub fn history(&self) -> &OperatorHistory {
        &self.history
    }

    pub fn window(&self) -> &MetricWindow {
        &self.window
    }

    /// The last trial vector evaluated.
    pub fn last_trial(&self) -> &[f64] {
        &self.trial
    }
}
