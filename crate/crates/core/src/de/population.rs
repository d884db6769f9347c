use alloc::vec::Vec;

use rand::Rng;

use super::{DeError, MIN_POPULATION};
use crate::bench::ObjectiveFunction;
use crate::rng::{seeded, RunRng};

/// NP solution vectors with their fitness, stored row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct Population {
    dim: usize,
    members: Vec<f64>,
    fitness: Vec<f64>,
    best: usize,
}

impl Population {
    /// Uniform random population in the function's box, fully evaluated
    /// (`np` evaluations).
    pub fn initialize(func: &ObjectiveFunction, np: usize, rng: &mut RunRng) -> Result<Self, DeError> {
        if np < MIN_POPULATION {
            return Err(DeError::PopulationTooSmall(np));
        }
        let members = sample_uniform(func.lower(), func.upper(), np, rng);
        let fitness = members
            .chunks_exact(func.dim())
            .map(|x| func.evaluate(x))
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_parts(func.dim(), members, fitness)
    }

    /// [`Population::initialize`] with a private generator.
    pub fn initialize_seeded(func: &ObjectiveFunction, np: usize, seed: u64) -> Result<Self, DeError> {
        Self::initialize(func, np, &mut seeded(seed))
    }

    /// Builds a population from row-major members and matching fitness.
    pub fn from_parts(dim: usize, members: Vec<f64>, fitness: Vec<f64>) -> Result<Self, DeError> {
        if dim == 0 || members.len() != dim * fitness.len() {
            return Err(DeError::ShapeMismatch);
        }
        let mut pop = Population {
            dim,
            members,
            fitness,
            best: 0,
        };
        pop.refresh_best();
        Ok(pop)
    }

    pub fn len(&self) -> usize {
        self.fitness.len()
    }

    pub fn is_empty(&self) -> bool {
        self.fitness.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn member(&self, i: usize) -> &[f64] {
        &self.members[i * self.dim..(i + 1) * self.dim]
    }

    pub fn fitness(&self, i: usize) -> f64 {
        self.fitness[i]
    }

    pub fn fitness_values(&self) -> &[f64] {
        &self.fitness
    }

    /// Argmin of fitness, lowest index on ties.
    pub fn best_index(&self) -> usize {
        self.best
    }

    /// Median parent fitness (mean of the two middle values for even sizes).
    pub fn median_fitness(&self, scratch: &mut Vec<f64>) -> f64 {
        scratch.clear();
        scratch.extend_from_slice(&self.fitness);
        let n = scratch.len();
        let mid = n / 2;
        let (_, upper, _) = scratch.select_nth_unstable_by(mid, f64::total_cmp);
        let upper = *upper;
        if n % 2 == 1 {
            upper
        } else {
            let lower = scratch[..mid].iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lower + upper) / 2.0
        }
    }

    /// Greedy replacement: member `i` is replaced only on strict improvement.
    pub fn select(&mut self, i: usize, trial: &[f64], f_trial: f64) -> bool {
        if f_trial < self.fitness[i] {
            self.members[i * self.dim..(i + 1) * self.dim].copy_from_slice(trial);
            self.fitness[i] = f_trial;
            if f_trial < self.fitness[self.best] || (f_trial == self.fitness[self.best] && i < self.best) {
                self.best = i;
            }
            true
        } else {
            false
        }
    }

    fn refresh_best(&mut self) {
        let mut best = 0;
        for (i, &f) in self.fitness.iter().enumerate() {
            if f < self.fitness[best] {
                best = i;
            }
        }
        self.best = best;
    }
}

/// `np` points drawn uniformly from `[lower, upper]`, row-major. Degenerate
/// coordinates (`lower == upper`) are pinned.
pub fn sample_uniform(lower: &[f64], upper: &[f64], np: usize, rng: &mut RunRng) -> Vec<f64> {
    let mut members = Vec::with_capacity(np * lower.len());
    for _ in 0..np {
        for (l, u) in lower.iter().zip(upper) {
            let t: f64 = rng.random();
            members.push(if l == u { *l } else { l + t * (u - l) });
        }
    }
    members
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bench::registered;
    use alloc::vec;

    #[test]
    fn initialization_is_in_bounds_and_repeatable() {
        let f = registered("rastrigin_shifted").unwrap().instantiate(10).unwrap();
        let a = Population::initialize_seeded(&f, 100, 42).unwrap();
        let b = Population::initialize_seeded(&f, 100, 42).unwrap();
        assert_eq!(a.len(), 100);
        assert!((0..100).all(|i| f.contains(a.member(i))));
        assert_eq!(a, b);
        for i in 0..100 {
            assert_eq!(a.fitness(i), f.evaluate(a.member(i)).unwrap());
        }
    }

    #[test]
    fn too_small_rejected() {
        let f = registered("sphere").unwrap().instantiate(3).unwrap();
        assert_eq!(
            Population::initialize_seeded(&f, 5, 0),
            Err(DeError::PopulationTooSmall(5))
        );
    }

    #[test]
    fn degenerate_coordinate_is_shared() {
        let mut rng = seeded(1);
        let pts = sample_uniform(&[0.0, 2.5, -1.0], &[1.0, 2.5, 1.0], 50, &mut rng);
        assert!(pts.chunks(3).all(|x| x[1] == 2.5));
    }

    #[test]
    fn best_index_ties_lowest() {
        let pop = Population::from_parts(1, vec![0.0; 6], vec![3.0, 1.0, 2.0, 1.0, 5.0, 1.0]).unwrap();
        assert_eq!(pop.best_index(), 1);
    }

    #[test]
    fn selection_requires_strict_improvement() {
        let mut pop = Population::from_parts(1, vec![0.0; 6], vec![3.0, 1.0, 2.0, 4.0, 5.0, 6.0]).unwrap();
        assert!(!pop.select(0, &[9.0], 3.0));
        assert_eq!(pop.member(0), &[0.0]);
        assert!(!pop.select(0, &[9.0], 3.5));
        assert!(pop.select(0, &[9.0], 0.5));
        assert_eq!(pop.member(0), &[9.0]);
        assert_eq!(pop.best_index(), 0);
    }

    #[test]
    fn median_even_and_odd() {
        let mut scratch = Vec::new();
        let pop = Population::from_parts(1, vec![0.0; 6], vec![6.0, 1.0, 5.0, 2.0, 4.0, 3.0]).unwrap();
        assert_eq!(pop.median_fitness(&mut scratch), 3.5);
        let pop = Population::from_parts(1, vec![0.0; 7], vec![6.0, 1.0, 5.0, 2.0, 4.0, 3.0, 7.0]).unwrap();
        assert_eq!(pop.median_fitness(&mut scratch), 4.0);
    }
}
