//! Registered functions and suite construction.
//!
//! Shifted and rotated instances are generated from a fixed suite seed, so a
//! given `(id, dim)` always yields the same problem regardless of the
//! experiment's master seed.

use alloc::string::{String, ToString};
use alloc::vec::Vec;

use rand::Rng;

use super::functions::BaseFunction;
use super::transform::{self, TransformData};
use super::{BenchError, Component, FunctionClass, ObjectiveFunction, COMPOSITION_BOUND};
use crate::rng::{derive_seed, seeded};

const SUITE_SEED: u64 = 0x5eed_2005;
/// Shifts are drawn from this fraction of the box so optima stay inside.
const SHIFT_SPAN: f64 = 0.8;

/// Default role of a registered function.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Membership {
    Train,
    Test,
    /// Plain kernels, available for tests and ad-hoc runs.
    Extra,
}

#[derive(Clone, Copy, Debug)]
enum Recipe {
    Plain(BaseFunction),
    Shifted(BaseFunction),
    ShiftedRotated(BaseFunction),
    Composition(&'static HybridRecipe),
}

#[derive(Debug)]
struct HybridRecipe {
    /// (kernel, sigma, lambda) per component; biases are 0, 100, 200, ...
    components: &'static [(BaseFunction, f64, f64)],
    rotated: bool,
    /// Puts the first optimum close to the upper bound on even coordinates.
    optimum_near_bound: bool,
}

use BaseFunction::{
    Ackley as ACK, Elliptic as ELL, ExpandedGriewankRosenbrock as EGR, ExpandedScaffer as ESC,
    Griewank as GRI, Rastrigin as RAS, Sphere as SPH, Weierstrass as WEI,
};

const BASIC_MIX: &[(BaseFunction, f64, f64)] = &[
    (RAS, 1.0, 1.0),
    (RAS, 1.0, 1.0),
    (WEI, 1.0, 10.0),
    (WEI, 1.0, 10.0),
    (GRI, 1.0, 5.0 / 60.0),
    (GRI, 1.0, 5.0 / 60.0),
    (ACK, 1.0, 5.0 / 32.0),
    (ACK, 1.0, 5.0 / 32.0),
    (SPH, 1.0, 5.0 / 100.0),
    (SPH, 1.0, 5.0 / 100.0),
];

const MIXED: &[(BaseFunction, f64, f64)] = &[
    (ACK, 1.0, 10.0 / 32.0),
    (ACK, 2.0, 5.0 / 32.0),
    (RAS, 1.5, 2.0),
    (RAS, 1.5, 1.0),
    (SPH, 1.0, 5.0 / 100.0),
    (SPH, 1.0, 5.0 / 100.0),
    (WEI, 1.5, 20.0),
    (WEI, 1.5, 10.0),
    (GRI, 2.0, 5.0 / 60.0),
    (GRI, 2.0, 5.0 / 60.0),
];

const MIXED_NARROW: &[(BaseFunction, f64, f64)] = &[
    (ACK, 0.1, 0.5 / 32.0),
    (ACK, 2.0, 5.0 / 32.0),
    (RAS, 1.5, 2.0),
    (RAS, 1.5, 1.0),
    (SPH, 1.0, 5.0 / 100.0),
    (SPH, 1.0, 5.0 / 100.0),
    (WEI, 1.5, 20.0),
    (WEI, 1.5, 10.0),
    (GRI, 2.0, 5.0 / 60.0),
    (GRI, 2.0, 5.0 / 60.0),
];

const EXPANDED_MIX: &[(BaseFunction, f64, f64)] = &[
    (ESC, 1.0, 25.0 / 100.0),
    (ESC, 1.0, 5.0 / 100.0),
    (RAS, 1.0, 5.0),
    (RAS, 1.0, 1.0),
    (EGR, 1.0, 5.0),
    (EGR, 2.0, 1.0),
    (WEI, 2.0, 50.0),
    (WEI, 2.0, 10.0),
    (GRI, 2.0, 25.0 / 200.0),
    (GRI, 2.0, 5.0 / 200.0),
];

const EXPANDED_MIX_WIDE: &[(BaseFunction, f64, f64)] = &[
    (ESC, 1.5, 25.0 / 100.0),
    (ESC, 1.5, 5.0 / 100.0),
    (RAS, 1.5, 5.0),
    (RAS, 1.5, 1.0),
    (EGR, 1.5, 5.0),
    (EGR, 1.5, 1.0),
    (WEI, 1.5, 50.0),
    (WEI, 1.5, 10.0),
    (GRI, 1.5, 25.0 / 200.0),
    (GRI, 1.5, 5.0 / 200.0),
];

const EXPANDED_MIX_NARROW: &[(BaseFunction, f64, f64)] = &[
    (ESC, 0.5, 25.0 / 100.0),
    (ESC, 1.0, 5.0 / 100.0),
    (RAS, 1.0, 5.0),
    (RAS, 1.0, 1.0),
    (EGR, 1.0, 5.0),
    (EGR, 2.0, 1.0),
    (WEI, 2.0, 50.0),
    (WEI, 2.0, 10.0),
    (GRI, 2.0, 25.0 / 200.0),
    (GRI, 2.0, 5.0 / 200.0),
];

const TEN_KERNELS: &[(BaseFunction, f64, f64)] = &[
    (WEI, 2.0, 10.0),
    (ESC, 2.0, 5.0 / 20.0),
    (EGR, 2.0, 1.0),
    (ACK, 2.0, 5.0 / 32.0),
    (RAS, 2.0, 1.0),
    (GRI, 2.0, 5.0 / 100.0),
    (ESC, 2.0, 5.0 / 50.0),
    (RAS, 2.0, 1.0),
    (ELL, 2.0, 5.0 / 100.0),
    (SPH, 2.0, 5.0 / 100.0),
];

macro_rules! hybrid {
    ($mix:expr, $rot:expr, $bound:expr) => {
        &HybridRecipe {
            components: $mix,
            rotated: $rot,
            optimum_near_bound: $bound,
        }
    };
}

/// A registered function id with its class, default role and recipe.
#[derive(Clone, Copy, Debug)]
pub struct RegisteredFunction {
    pub id: &'static str,
    pub class: FunctionClass,
    pub membership: Membership,
    recipe: Recipe,
}

const fn entry(
    id: &'static str,
    class: FunctionClass,
    membership: Membership,
    recipe: Recipe,
) -> RegisteredFunction {
    RegisteredFunction {
        id,
        class,
        membership,
        recipe,
    }
}

use FunctionClass::{Expanded as EXP, Hybrid as HYB, Multimodal as MUL, Unimodal as UNI};
use Membership::{Extra, Test, Train};

static REGISTRY: &[RegisteredFunction] = &[
    entry("sphere_shifted", UNI, Train, Recipe::Shifted(SPH)),
    entry("schwefel12_shifted", UNI, Train, Recipe::Shifted(BaseFunction::Schwefel12)),
    entry("elliptic_shifted_rotated", UNI, Test, Recipe::ShiftedRotated(ELL)),
    entry("schwefel12_shifted_rotated", UNI, Train, Recipe::ShiftedRotated(BaseFunction::Schwefel12)),
    entry("rosenbrock_shifted", MUL, Train, Recipe::Shifted(BaseFunction::Rosenbrock)),
    entry("ackley_shifted_rotated", MUL, Train, Recipe::ShiftedRotated(ACK)),
    entry("rastrigin_shifted", MUL, Test, Recipe::Shifted(RAS)),
    entry("rastrigin_shifted_rotated", MUL, Train, Recipe::ShiftedRotated(RAS)),
    entry("weierstrass_shifted_rotated", MUL, Train, Recipe::ShiftedRotated(WEI)),
    entry("griewank_shifted_rotated", MUL, Train, Recipe::ShiftedRotated(GRI)),
    entry("expanded_griewank_rosenbrock_shifted", EXP, Train, Recipe::Shifted(EGR)),
    entry("expanded_scaffer_shifted_rotated", EXP, Train, Recipe::ShiftedRotated(ESC)),
    entry("hybrid1", HYB, Train, Recipe::Composition(hybrid!(BASIC_MIX, false, false))),
    entry("hybrid2", HYB, Test, Recipe::Composition(hybrid!(BASIC_MIX, true, false))),
    entry("hybrid3", HYB, Test, Recipe::Composition(hybrid!(MIXED, true, false))),
    entry("hybrid4", HYB, Train, Recipe::Composition(hybrid!(MIXED_NARROW, true, false))),
    entry("hybrid5", HYB, Train, Recipe::Composition(hybrid!(MIXED, true, true))),
    entry("hybrid6", HYB, Train, Recipe::Composition(hybrid!(EXPANDED_MIX, true, false))),
    entry("hybrid7", HYB, Train, Recipe::Composition(hybrid!(EXPANDED_MIX_NARROW, true, false))),
    entry("hybrid8", HYB, Test, Recipe::Composition(hybrid!(EXPANDED_MIX_WIDE, true, false))),
    entry("hybrid9", HYB, Train, Recipe::Composition(hybrid!(TEN_KERNELS, true, false))),
    entry("sphere", UNI, Extra, Recipe::Plain(SPH)),
    entry("schwefel12", UNI, Extra, Recipe::Plain(BaseFunction::Schwefel12)),
    entry("elliptic", UNI, Extra, Recipe::Plain(ELL)),
    entry("rosenbrock", MUL, Extra, Recipe::Plain(BaseFunction::Rosenbrock)),
    entry("rastrigin", MUL, Extra, Recipe::Plain(RAS)),
    entry("ackley", MUL, Extra, Recipe::Plain(ACK)),
    entry("griewank", MUL, Extra, Recipe::Plain(GRI)),
    entry("weierstrass", MUL, Extra, Recipe::Plain(WEI)),
    entry("expanded_griewank_rosenbrock", EXP, Extra, Recipe::Plain(EGR)),
    entry("expanded_scaffer", EXP, Extra, Recipe::Plain(ESC)),
];

/// Every registered function, in registration order.
pub fn registry() -> &'static [RegisteredFunction] {
    REGISTRY
}

pub fn registered(id: &str) -> Option<&'static RegisteredFunction> {
    REGISTRY.iter().find(|r| r.id == id)
}

impl RegisteredFunction {
    pub fn is_composition(&self) -> bool {
        matches!(self.recipe, Recipe::Composition(_))
    }

    /// Search box half-width.
    pub fn bound(&self) -> f64 {
        match self.recipe {
            Recipe::Plain(b) | Recipe::Shifted(b) | Recipe::ShiftedRotated(b) => b.default_bound(),
            Recipe::Composition(_) => COMPOSITION_BOUND,
        }
    }

    /// Builds the `dim`-dimensional instance with generated transforms.
    pub fn instantiate(&self, dim: usize) -> Result<ObjectiveFunction, BenchError> {
        self.instantiate_with(dim, None)
    }

    /// Builds the instance, replacing generated shift/rotation by `data`.
    pub fn instantiate_with(
        &self,
        dim: usize,
        data: Option<TransformData>,
    ) -> Result<ObjectiveFunction, BenchError> {
        if dim < 2 {
            return Err(BenchError::DimensionTooSmall(dim));
        }
        let mut rng = seeded(derive_seed(
            SUITE_SEED,
            &[self.id.as_bytes(), &(dim as u64).to_le_bytes()],
        ));
        let bound = self.bound();
        let shift = |rng: &mut crate::rng::RunRng, span: f64| -> Vec<f64> {
            (0..dim)
                .map(|_| rng.random_range(-span * bound..=span * bound))
                .collect()
        };
        match self.recipe {
            Recipe::Composition(recipe) => {
                if data.is_some() {
                    return Err(BenchError::TransformOnComposition(self.id.to_string()));
                }
                let mut components = Vec::with_capacity(recipe.components.len());
                for (k, &(base, sigma, lambda)) in recipe.components.iter().enumerate() {
                    let mut o = shift(&mut rng, SHIFT_SPAN);
                    if k == 0 && recipe.optimum_near_bound {
                        for v in o.iter_mut().step_by(2) {
                            *v = 0.9 * bound;
                        }
                    }
                    let rotation = recipe
                        .rotated
                        .then(|| transform::random_rotation(dim, &mut rng));
                    components.push(Component {
                        base,
                        shift: o,
                        rotation,
                        sigma,
                        lambda,
                        bias: 100.0 * k as f64,
                    });
                }
                ObjectiveFunction::composition(self.id, dim, components)
            }
            Recipe::Plain(base) | Recipe::Shifted(base) | Recipe::ShiftedRotated(base) => {
                let f = ObjectiveFunction::standard(self.id, self.class, base, dim)?;
                if let Some(data) = data {
                    return f.with_transform(data);
                }
                match self.recipe {
                    Recipe::Plain(_) => Ok(f),
                    Recipe::Shifted(_) => f.with_shift(shift(&mut rng, SHIFT_SPAN)),
                    _ => {
                        let o = shift(&mut rng, SHIFT_SPAN);
                        let m = transform::random_rotation(dim, &mut rng);
                        f.with_shift(o)?.with_rotation(m)
                    }
                }
            }
        }
    }
}

/// Which functions form the training and test suites, and at which
/// dimensions each is instantiated.
#[derive(Clone, Debug, PartialEq)]
pub struct SuiteConfig {
    pub train: Vec<String>,
    pub test: Vec<String>,
    pub dims: Vec<usize>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        let pick = |m: Membership| {
            REGISTRY
                .iter()
                .filter(|r| r.membership == m)
                .map(|r| r.id.to_string())
                .collect()
        };
        SuiteConfig {
            train: pick(Membership::Train),
            test: pick(Membership::Test),
            dims: alloc::vec![10, 30],
        }
    }
}

impl SuiteConfig {
    /// Checks ids are registered, dimensions usable and the two sets disjoint.
    pub fn validate(&self) -> Result<(), BenchError> {
        for id in self.train.iter().chain(&self.test) {
            registered(id).ok_or_else(|| BenchError::UnknownFunction(id.clone()))?;
        }
        if let Some(id) = self.train.iter().find(|id| self.test.contains(id)) {
            return Err(BenchError::OverlappingSuites(id.clone()));
        }
        if let Some(&d) = self.dims.iter().find(|&&d| d < 2) {
            return Err(BenchError::DimensionTooSmall(d));
        }
        Ok(())
    }

    /// Largest configured dimension (the feature normaliser), 0 if none.
    pub fn dim_max(&self) -> usize {
        self.dims.iter().copied().max().unwrap_or(0)
    }
}

/// Instantiates every `(id, dim)` pair, ids outermost.
pub fn make_suite(ids: &[String], dims: &[usize]) -> Result<Vec<ObjectiveFunction>, BenchError> {
    make_suite_with(ids, dims, |_, _| Ok(None))
}

/// Like [`make_suite`], asking `load` for external transform data first.
pub fn make_suite_with<L>(
    ids: &[String],
    dims: &[usize],
    mut load: L,
) -> Result<Vec<ObjectiveFunction>, BenchError>
where
    L: FnMut(&str, usize) -> Result<Option<TransformData>, BenchError>,
{
    let mut suite = Vec::with_capacity(ids.len() * dims.len());
    for id in ids {
        let entry = registered(id).ok_or_else(|| BenchError::UnknownFunction(id.clone()))?;
        for &dim in dims {
            let data = if entry.is_composition() {
                None
            } else {
                load(id, dim)?
            };
            suite.push(entry.instantiate_with(dim, data)?);
        }
    }
    Ok(suite)
}
