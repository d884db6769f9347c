//! The 99-dimensional state observed before each mutation.
//!
//! Layout (0-based indices into the state vector):
//!
//! | index   | content                                                      |
//! |---------|--------------------------------------------------------------|
//! | 0       | parent fitness relative to best/worst-so-far                 |
//! | 1       | population mean fitness, same normalisation                  |
//! | 2       | population fitness std over its two-point maximum            |
//! | 3       | remaining budget fraction                                    |
//! | 4       | problem dimension over the largest training dimension        |
//! | 5       | stagnation count over budget                                 |
//! | 6..11   | distance from parent to the five drawn members               |
//! | 11      | distance from parent to the population best                  |
//! | 12..17  | parent fitness minus each drawn member's fitness             |
//! | 17      | parent fitness minus the population best                     |
//! | 18      | distance from parent to the best-so-far solution             |
//! | 19..35  | summed success rates                                         |
//! | 35..51  | summed improvements per application                          |
//! | 51..67  | relative change of best improvement, last two generations   |
//! | 67..83  | summed best improvements                                     |
//! | 83..99  | window sums                                                  |
//!
//! Each of the last five groups holds 16 values at `base + 4·m + op`, with
//! `m` the metric and `op` the strategy ordinal, normalised across the four
//! operators of the same metric. Every denominator that is zero yields 0,
//! and all values are clamped to `[0, 1]`.

mod history;
mod window;

use alloc::vec::Vec;

use libm::sqrt;

pub use history::{improvement_metrics, GenerationRecord, Metrics, OperatorHistory, METRICS};
pub use window::{MetricWindow, WindowEntry};

use crate::de::{Population, Strategy};

pub const STATE_DIM: usize = 99;
/// Bumped whenever the meaning or order of any state component changes.
pub const FEATURE_LAYOUT_VERSION: u32 = 1;

pub const SUCCESS_RATE_BASE: usize = 19;
pub const MEAN_IMPROVEMENT_BASE: usize = 35;
pub const BEST_DELTA_BASE: usize = 51;
pub const BEST_SUM_BASE: usize = 67;
pub const WINDOW_BASE: usize = 83;
/// Number of history-derived components (groups starting at 19).
pub const HISTORY_FEATURES: usize = STATE_DIM - SUCCESS_RATE_BASE;

/// Index of the `(metric, operator)` value in the group starting at `base`.
pub const fn group_index(base: usize, metric: usize, op: usize) -> usize {
    base + metric * Strategy::COUNT + op
}

/// Per-run counters tracked alongside the population.
#[derive(Clone, Debug, PartialEq)]
pub struct RunState {
    pub f_bsf: f64,
    pub f_wsf: f64,
    pub x_bsf: Vec<f64>,
    pub evals: usize,
    pub max_evals: usize,
    /// Evaluations since best-so-far last improved.
    pub stagnation: usize,
    pub dim: usize,
    pub dim_max: usize,
    /// Length of the search box diagonal.
    pub dist_max: f64,
}

impl RunState {
    /// State right after the initial population was evaluated.
    pub fn from_population(pop: &Population, max_evals: usize, dim_max: usize, dist_max: f64) -> Self {
        let (mut best, mut worst) = (0, 0);
        for i in 0..pop.len() {
            if pop.fitness(i) < pop.fitness(best) {
                best = i;
            }
            if pop.fitness(i) > pop.fitness(worst) {
                worst = i;
            }
        }
        RunState {
            f_bsf: pop.fitness(best),
            f_wsf: pop.fitness(worst),
            x_bsf: pop.member(best).to_vec(),
            evals: pop.len(),
            max_evals,
            stagnation: 0,
            dim: pop.dim(),
            dim_max,
            dist_max,
        }
    }

    /// Accounts for one evaluation; returns whether best-so-far improved.
    pub fn observe(&mut self, x: &[f64], f: f64) -> bool {
        self.evals += 1;
        if f > self.f_wsf {
            self.f_wsf = f;
        }
        if f < self.f_bsf {
            self.f_bsf = f;
            self.x_bsf.copy_from_slice(x);
            self.stagnation = 0;
            true
        } else {
            self.stagnation += 1;
            false
        }
    }

    /// Standard deviation of a population split evenly between the best-
    /// and worst-so-far fitness.
    pub fn std_max(&self) -> f64 {
        (self.f_wsf - self.f_bsf) / 2.0
    }
}

/// `num / den` clamped to `[0, 1]`; 0 when the denominator is zero or the
/// quotient is not finite.
fn ratio(num: f64, den: f64) -> f64 {
    if den == 0.0 {
        return 0.0;
    }
    let v = num / den;
    if v.is_finite() {
        v.clamp(0.0, 1.0)
    } else {
        0.0
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    sqrt(a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum())
}

/// Fills `out` with the state for parent `i` about to be mutated with the
/// drawn indices `r`. Pure: none of the inputs change.
pub fn compute_state(
    run: &RunState,
    pop: &Population,
    i: usize,
    r: &[usize; 5],
    history: &OperatorHistory,
    window: &MetricWindow,
    out: &mut [f64; STATE_DIM],
) {
    let range = run.f_wsf - run.f_bsf;
    let np = pop.len() as f64;
    let fi = pop.fitness(i);
    let xi = pop.member(i);
    let best = pop.best_index();

    let mean = pop.fitness_values().iter().sum::<f64>() / np;
    let var = pop
        .fitness_values()
        .iter()
        .map(|f| (f - mean) * (f - mean))
        .sum::<f64>()
        / np;

    out[0] = ratio(fi - run.f_bsf, range);
    out[1] = ratio(mean - run.f_bsf, range);
    out[2] = ratio(sqrt(var), run.std_max());
    out[3] = ratio(run.max_evals.saturating_sub(run.evals) as f64, run.max_evals as f64);
    out[4] = ratio(run.dim as f64, run.dim_max as f64);
    out[5] = ratio(run.stagnation as f64, run.max_evals as f64);
    for (k, &j) in r.iter().enumerate() {
        out[6 + k] = ratio(distance(xi, pop.member(j)), run.dist_max);
        out[12 + k] = ratio(fi - pop.fitness(j), range);
    }
    out[11] = ratio(distance(xi, pop.member(best)), run.dist_max);
    out[17] = ratio(fi - pop.fitness(best), range);
    out[18] = ratio(distance(xi, &run.x_bsf), run.dist_max);

    history_features(history, window, &mut out[SUCCESS_RATE_BASE..]);
}

/// Raw (pre-normalisation) history values for one group, `[metric][op]`.
pub type GroupValues = [[f64; Strategy::COUNT]; METRICS];

/// Un-normalised values of the five history groups, in layout order.
pub fn raw_history_groups(history: &OperatorHistory, window: &MetricWindow) -> [GroupValues; 5] {
    let ops = Strategy::COUNT;
    let mut success_rate = [[0.0; 4]; METRICS];
    let mut improvement = [[0.0; 4]; METRICS];
    let mut best_delta = [[0.0; 4]; METRICS];
    let mut best_sum = [[0.0; 4]; METRICS];
    let mut window_sum = [[0.0; 4]; METRICS];

    let mut applications = [0u64; 4];
    let mut improvement_total = [[0.0; 4]; METRICS];
    for rec in history.records() {
        for op in 0..ops {
            let n = rec.applications[op];
            applications[op] += u64::from(n);
            for m in 0..METRICS {
                if n > 0 {
                    success_rate[m][op] += f64::from(rec.successes[m][op]) / f64::from(n);
                }
                improvement_total[m][op] += rec.improvement_sum[m][op];
                best_sum[m][op] += rec.best_improvement[m][op];
            }
        }
    }
    for op in 0..ops {
        for m in 0..METRICS {
            if applications[op] > 0 {
                improvement[m][op] = improvement_total[m][op] / applications[op] as f64;
            }
        }
    }

    let n = history.len();
    if n >= 2 {
        let mut recs = history.records().skip(n - 2);
        let (prev, last) = (recs.next().unwrap(), recs.next().unwrap());
        for op in 0..ops {
            let dn = (f64::from(last.applications[op]) - f64::from(prev.applications[op])).abs();
            for m in 0..METRICS {
                let den = prev.best_improvement[m][op] * dn;
                if den != 0.0 {
                    best_delta[m][op] =
                        (last.best_improvement[m][op] - prev.best_improvement[m][op]) / den;
                }
            }
        }
    }

    for e in window.entries() {
        let op = e.strategy.ordinal();
        for m in 0..METRICS {
            if e.metrics[m] > 0.0 {
                window_sum[m][op] += e.metrics[m];
            }
        }
    }

    [success_rate, improvement, best_delta, best_sum, window_sum]
}

/// Clamps negatives to zero, then divides by the sum over operators.
pub fn normalize_across_operators(values: &[f64; Strategy::COUNT]) -> [f64; Strategy::COUNT] {
    let mut v = [0.0; Strategy::COUNT];
    for (dst, &src) in v.iter_mut().zip(values) {
        *dst = if src.is_finite() && src > 0.0 { src } else { 0.0 };
    }
    let total: f64 = v.iter().sum();
    if total > 0.0 && total.is_finite() {
        for x in v.iter_mut() {
            *x = (*x / total).clamp(0.0, 1.0);
        }
    } else {
        v = [0.0; Strategy::COUNT];
    }
    v
}

/// Writes the 80 history-derived components (state indices 19..99).
pub fn history_features(history: &OperatorHistory, window: &MetricWindow, out: &mut [f64]) {
    let groups = raw_history_groups(history, window);
    for (g, group) in groups.iter().enumerate() {
        for (m, values) in group.iter().enumerate() {
            let normalized = normalize_across_operators(values);
            for (op, v) in normalized.iter().enumerate() {
                out[g * 16 + m * Strategy::COUNT + op] = *v;
            }
        }
    }
}

/// Books one application: history counters always, window only when the
/// trial improved on its parent.
#[allow(clippy::too_many_arguments)]
pub fn record_application(
    history: &mut OperatorHistory,
    window: &mut MetricWindow,
    op: Strategy,
    parent_f: f64,
    trial_f: f64,
    best_parent_f: f64,
    bsf: f64,
    median_f: f64,
) -> Metrics {
    let metrics = improvement_metrics(parent_f, trial_f, best_parent_f, bsf, median_f);
    history.record(op, &metrics);
    window.insert(op, metrics, trial_f);
    metrics
}
