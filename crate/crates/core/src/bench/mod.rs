//! Box-constrained minimisation problems.
//!
//! Every suite member is built from one of the [`BaseFunction`] kernels,
//! optionally shifted, rotated and biased, or from a weighted composition of
//! several kernels. All functions are minimised and their optimum, when
//! known, equals the bias (0 unless configured).

mod functions;
mod suite;
pub mod transform;

use alloc::string::String;
use alloc::vec;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use libm::{exp, pow};
use thiserror::Error;

pub use functions::BaseFunction;
pub use suite::{
    make_suite, make_suite_with, registered, registry, Membership, RegisteredFunction,
    SuiteConfig,
};
pub use transform::TransformData;

#[derive(Clone, Debug, PartialEq, Error)]
pub enum BenchError {
    #[error("expected a {expected}-dimensional point, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("unknown function id `{0}`")]
    UnknownFunction(String),
    #[error("function `{0}` listed in both the training and the test suite")]
    OverlappingSuites(String),
    #[error("invalid bounds: lower must be strictly below upper in every coordinate")]
    InvalidBounds,
    #[error("dimension must be at least 2, got {0}")]
    DimensionTooSmall(usize),
    #[error("transform data for `{id}`: {source}")]
    Transform {
        id: String,
        source: transform::TransformError,
    },
    #[error("transform data for `{id}` unavailable: {message}")]
    TransformSource { id: String, message: String },
    #[error("transform data for `{0}` cannot be applied to a composition")]
    TransformOnComposition(String),
}

/// Landscape family, used to balance training and test suites.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum FunctionClass {
    Unimodal,
    Multimodal,
    Expanded,
    Hybrid,
}

impl FunctionClass {
    pub const ALL: [FunctionClass; 4] = [
        FunctionClass::Unimodal,
        FunctionClass::Multimodal,
        FunctionClass::Expanded,
        FunctionClass::Hybrid,
    ];

    pub fn name(self) -> &'static str {
        match self {
            FunctionClass::Unimodal => "unimodal",
            FunctionClass::Multimodal => "multimodal",
            FunctionClass::Expanded => "expanded",
            FunctionClass::Hybrid => "hybrid",
        }
    }
}

impl fmt::Display for FunctionClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for FunctionClass {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, ()> {
        FunctionClass::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or(())
    }
}

#[derive(Clone, Debug)]
struct Transformed {
    base: BaseFunction,
    shift: Option<Vec<f64>>,
    rotation: Option<Vec<f64>>,
    bias: f64,
}

/// One kernel inside a composition.
#[derive(Clone, Debug)]
pub struct Component {
    pub base: BaseFunction,
    pub shift: Vec<f64>,
    pub rotation: Option<Vec<f64>>,
    /// Width of the Gaussian weight around `shift`.
    pub sigma: f64,
    /// Coordinate stretch applied before the kernel.
    pub lambda: f64,
    pub bias: f64,
}

/// Scale every component so that its value at the box corner is this large.
const COMPOSITION_HEIGHT: f64 = 2000.0;
/// Half-width of the composition search box.
pub const COMPOSITION_BOUND: f64 = 5.0;

#[derive(Clone, Debug)]
struct Composition {
    components: Vec<Component>,
    scales: Vec<f64>,
}

impl Composition {
    fn new(components: Vec<Component>, dim: usize) -> Self {
        let mut z = vec![0.0; dim];
        let scales = components
            .iter()
            .map(|c| {
                let corner = vec![COMPOSITION_BOUND / c.lambda; dim];
                match &c.rotation {
                    Some(m) => transform::rotate(m, &corner, &mut z),
                    None => z.copy_from_slice(&corner),
                }
                let peak = c.base.eval(&z).abs();
                if peak > 0.0 && peak.is_finite() {
                    COMPOSITION_HEIGHT / peak
                } else {
                    1.0
                }
            })
            .collect();
        Composition { components, scales }
    }

    fn eval(&self, x: &[f64]) -> f64 {
        let d = x.len();
        let n = self.components.len();
        let mut weights = vec![0.0; n];
        for (w, c) in weights.iter_mut().zip(&self.components) {
            let d2: f64 = x.iter().zip(&c.shift).map(|(a, o)| (a - o) * (a - o)).sum();
            *w = exp(-d2 / (2.0 * d as f64 * c.sigma * c.sigma));
        }
        let max_w = weights.iter().copied().fold(0.0, f64::max);
        if max_w > 0.0 {
            let damp = 1.0 - pow(max_w, 10.0);
            for w in weights.iter_mut() {
                if *w != max_w {
                    *w *= damp;
                }
            }
        }
        let total: f64 = weights.iter().sum();
        if total <= 0.0 {
            weights.iter_mut().for_each(|w| *w = 1.0);
        }
        let total: f64 = weights.iter().sum();

        let mut shifted = vec![0.0; d];
        let mut z = vec![0.0; d];
        let mut value = 0.0;
        for ((c, scale), w) in self.components.iter().zip(&self.scales).zip(&weights) {
            if *w == 0.0 {
                continue;
            }
            for ((s, a), o) in shifted.iter_mut().zip(x).zip(&c.shift) {
                *s = (a - o) / c.lambda;
            }
            match &c.rotation {
                Some(m) => transform::rotate(m, &shifted, &mut z),
                None => z.copy_from_slice(&shifted),
            }
            value += w / total * (scale * c.base.eval(&z) + c.bias);
        }
        value
    }
}

#[derive(Clone, Debug)]
enum Landscape {
    Transformed(Transformed),
    Composition(Composition),
}

/// A box-constrained minimisation problem. Immutable once built.
#[derive(Clone, Debug)]
pub struct ObjectiveFunction {
    name: String,
    dim: usize,
    lower: Vec<f64>,
    upper: Vec<f64>,
    f_optimum: Option<f64>,
    class: FunctionClass,
    landscape: Landscape,
}

impl ObjectiveFunction {
    /// Unshifted kernel on an explicit box. Optimum 0 at the origin, which
    /// must lie inside the box for `f_optimum` to be meaningful.
    pub fn new(
        name: impl Into<String>,
        class: FunctionClass,
        base: BaseFunction,
        lower: Vec<f64>,
        upper: Vec<f64>,
    ) -> Result<Self, BenchError> {
        check_bounds(&lower, &upper)?;
        Ok(ObjectiveFunction {
            name: name.into(),
            dim: lower.len(),
            lower,
            upper,
            f_optimum: Some(0.0),
            class,
            landscape: Landscape::Transformed(Transformed {
                base,
                shift: None,
                rotation: None,
                bias: 0.0,
            }),
        })
    }

    /// Kernel on its conventional symmetric box.
    pub fn standard(
        name: impl Into<String>,
        class: FunctionClass,
        base: BaseFunction,
        dim: usize,
    ) -> Result<Self, BenchError> {
        let b = base.default_bound();
        Self::new(name, class, base, vec![-b; dim], vec![b; dim])
    }

    /// Weighted composition of kernels on `[-5, 5]^dim`. Optimum 0 at the
    /// first component's shift, provided its bias is 0 and the others are
    /// non-negative.
    pub fn composition(
        name: impl Into<String>,
        dim: usize,
        components: Vec<Component>,
    ) -> Result<Self, BenchError> {
        let lower = vec![-COMPOSITION_BOUND; dim];
        let upper = vec![COMPOSITION_BOUND; dim];
        check_bounds(&lower, &upper)?;
        for c in &components {
            if c.shift.len() != dim {
                return Err(BenchError::DimensionMismatch {
                    expected: dim,
                    found: c.shift.len(),
                });
            }
        }
        let f_optimum = components.first().map(|c| c.bias);
        Ok(ObjectiveFunction {
            name: name.into(),
            dim,
            lower,
            upper,
            f_optimum,
            class: FunctionClass::Hybrid,
            landscape: Landscape::Composition(Composition::new(components, dim)),
        })
    }

    /// Moves the optimum to `shift`. Not available for compositions.
    pub fn with_shift(mut self, shift: Vec<f64>) -> Result<Self, BenchError> {
        self.expect_len(shift.len())?;
        match &mut self.landscape {
            Landscape::Transformed(t) => t.shift = Some(shift),
            Landscape::Composition(_) => {
                return Err(BenchError::TransformOnComposition(self.name.clone()))
            }
        }
        Ok(self)
    }

    /// Applies `z = M (x - o)` with a row-major `dim × dim` matrix.
    pub fn with_rotation(mut self, rotation: Vec<f64>) -> Result<Self, BenchError> {
        if rotation.len() != self.dim * self.dim {
            return Err(BenchError::DimensionMismatch {
                expected: self.dim * self.dim,
                found: rotation.len(),
            });
        }
        match &mut self.landscape {
            Landscape::Transformed(t) => t.rotation = Some(rotation),
            Landscape::Composition(_) => {
                return Err(BenchError::TransformOnComposition(self.name.clone()))
            }
        }
        Ok(self)
    }

    pub fn with_transform(self, data: TransformData) -> Result<Self, BenchError> {
        let f = self.with_shift(data.shift)?;
        match data.rotation {
            Some(m) => f.with_rotation(m),
            None => Ok(f),
        }
    }

    /// Adds a constant to every value; the known optimum moves with it.
    pub fn with_bias(mut self, bias: f64) -> Self {
        if let Landscape::Transformed(t) = &mut self.landscape {
            t.bias = bias;
            self.f_optimum = self.f_optimum.map(|_| bias);
        }
        self
    }

    /// Overrides the known optimum (`None` when it is unknown).
    pub fn with_optimum(mut self, f_optimum: Option<f64>) -> Self {
        self.f_optimum = f_optimum;
        self
    }

    fn expect_len(&self, found: usize) -> Result<(), BenchError> {
        if found != self.dim {
            return Err(BenchError::DimensionMismatch {
                expected: self.dim,
                found,
            });
        }
        Ok(())
    }

    /// Registered base id, e.g. `rastrigin_shifted`.
    pub fn name(&self) -> &str {
        &self.name
    }

    /// Problem id including the dimension, e.g. `rastrigin_shifted-10`.
    pub fn id(&self) -> String {
        alloc::format!("{}-{}", self.name, self.dim)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn f_optimum(&self) -> Option<f64> {
        self.f_optimum
    }

    pub fn class(&self) -> FunctionClass {
        self.class
    }

    /// Euclidean length of the box diagonal.
    pub fn diagonal(&self) -> f64 {
        libm::sqrt(
            self.lower
                .iter()
                .zip(&self.upper)
                .map(|(l, u)| (u - l) * (u - l))
                .sum(),
        )
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        x.len() == self.dim
            && x
                .iter()
                .zip(self.lower.iter().zip(&self.upper))
                .all(|(v, (l, u))| *v >= *l && *v <= *u)
    }

    /// Fitness of `x` (minimisation). Bounds are not checked; callers repair
    /// first.
    pub fn evaluate(&self, x: &[f64]) -> Result<f64, BenchError> {
        self.expect_len(x.len())?;
        Ok(match &self.landscape {
            Landscape::Transformed(t) => {
                let value = match (&t.shift, &t.rotation) {
                    (None, None) => t.base.eval(x),
                    (shift, rotation) => {
                        let mut z: Vec<f64> = match shift {
                            Some(o) => x.iter().zip(o).map(|(a, b)| a - b).collect(),
                            None => x.to_vec(),
                        };
                        if let Some(m) = rotation {
                            let src = z.clone();
                            transform::rotate(m, &src, &mut z);
                        }
                        t.base.eval(&z)
                    }
                };
                value + t.bias
            }
            Landscape::Composition(c) => c.eval(x),
        })
    }
}

fn check_bounds(lower: &[f64], upper: &[f64]) -> Result<(), BenchError> {
    if lower.len() != upper.len() {
        return Err(BenchError::DimensionMismatch {
            expected: lower.len(),
            found: upper.len(),
        });
    }
    if lower.is_empty() || lower.iter().zip(upper).any(|(l, u)| !(l < u)) {
        return Err(BenchError::InvalidBounds);
    }
    Ok(())
}
