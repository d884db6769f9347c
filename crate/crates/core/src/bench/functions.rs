//! Base landscapes, each with its global minimum 0 at `z = 0`.
//!
//! Shifting, rotation and bias are applied by the caller; these kernels only
//! see the transformed coordinates.

use core::f64::consts::{E, PI};
use core::fmt;
use core::str::FromStr;

use libm::{cos, exp, pow, sin, sqrt};

const WEIERSTRASS_A: f64 = 0.5;
const WEIERSTRASS_B: f64 = 3.0;
const WEIERSTRASS_KMAX: usize = 20;
const ELLIPTIC_CONDITION: f64 = 1.0e6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum BaseFunction {
    Sphere,
    /// Schwefel's problem 1.2 (sum of squared prefix sums).
    Schwefel12,
    /// High-conditioned elliptic.
    Elliptic,
    Rosenbrock,
    Rastrigin,
    Ackley,
    Griewank,
    Weierstrass,
    /// Griewank applied to 2-d Rosenbrock on consecutive coordinate pairs.
    ExpandedGriewankRosenbrock,
    /// Schaffer's F6 on consecutive coordinate pairs.
    ExpandedScaffer,
}

impl BaseFunction {
    pub const ALL: [BaseFunction; 10] = [
        BaseFunction::Sphere,
        BaseFunction::Schwefel12,
        BaseFunction::Elliptic,
        BaseFunction::Rosenbrock,
        BaseFunction::Rastrigin,
        BaseFunction::Ackley,
        BaseFunction::Griewank,
        BaseFunction::Weierstrass,
        BaseFunction::ExpandedGriewankRosenbrock,
        BaseFunction::ExpandedScaffer,
    ];

    pub fn name(self) -> &'static str {
        match self {
            BaseFunction::Sphere => "sphere",
            BaseFunction::Schwefel12 => "schwefel12",
            BaseFunction::Elliptic => "elliptic",
            BaseFunction::Rosenbrock => "rosenbrock",
            BaseFunction::Rastrigin => "rastrigin",
            BaseFunction::Ackley => "ackley",
            BaseFunction::Griewank => "griewank",
            BaseFunction::Weierstrass => "weierstrass",
            BaseFunction::ExpandedGriewankRosenbrock => "expanded_griewank_rosenbrock",
            BaseFunction::ExpandedScaffer => "expanded_scaffer",
        }
    }

    /// Conventional symmetric search box `[-b, b]` for this landscape.
    pub fn default_bound(self) -> f64 {
        match self {
            BaseFunction::Sphere
            | BaseFunction::Schwefel12
            | BaseFunction::Elliptic
            | BaseFunction::Rosenbrock
            | BaseFunction::ExpandedScaffer => 100.0,
            BaseFunction::Rastrigin => 5.0,
            BaseFunction::Ackley => 32.0,
            BaseFunction::Griewank => 600.0,
            BaseFunction::Weierstrass => 0.5,
            BaseFunction::ExpandedGriewankRosenbrock => 3.0,
        }
    }

    pub fn eval(self, z: &[f64]) -> f64 {
        match self {
            BaseFunction::Sphere => z.iter().map(|v| v * v).sum(),
            BaseFunction::Schwefel12 => {
                let mut prefix = 0.0;
                let mut total = 0.0;
                for v in z {
                    prefix += v;
                    total += prefix * prefix;
                }
                total
            }
            BaseFunction::Elliptic => {
                let d = z.len();
                if d == 1 {
                    return z[0] * z[0];
                }
                z.iter()
                    .enumerate()
                    .map(|(i, v)| {
                        pow(ELLIPTIC_CONDITION, i as f64 / (d - 1) as f64) * v * v
                    })
                    .sum()
            }
            BaseFunction::Rosenbrock => {
                let mut total = 0.0;
                for w in z.windows(2) {
                    total += rosenbrock2(w[0] + 1.0, w[1] + 1.0);
                }
                total
            }
            BaseFunction::Rastrigin => z
                .iter()
                .map(|v| v * v - 10.0 * cos(2.0 * PI * v) + 10.0)
                .sum(),
            BaseFunction::Ackley => {
                let d = z.len() as f64;
                let sq: f64 = z.iter().map(|v| v * v).sum();
                let cs: f64 = z.iter().map(|v| cos(2.0 * PI * v)).sum();
                -20.0 * exp(-0.2 * sqrt(sq / d)) - exp(cs / d) + 20.0 + E
            }
            BaseFunction::Griewank => {
                let mut sum = 0.0;
                let mut prod = 1.0;
                for (i, v) in z.iter().enumerate() {
                    sum += v * v / 4000.0;
                    prod *= cos(v / sqrt((i + 1) as f64));
                }
                1.0 + sum - prod
            }
            BaseFunction::Weierstrass => {
                let mut ak = [0.0; WEIERSTRASS_KMAX + 1];
                let mut bk = [0.0; WEIERSTRASS_KMAX + 1];
                let (mut a, mut b) = (1.0, 1.0);
                for k in 0..=WEIERSTRASS_KMAX {
                    ak[k] = a;
                    bk[k] = b;
                    a *= WEIERSTRASS_A;
                    b *= WEIERSTRASS_B;
                }
                let offset: f64 = (0..=WEIERSTRASS_KMAX).map(|k| ak[k] * cos(PI * bk[k])).sum();
                let mut total = 0.0;
                for v in z {
                    for k in 0..=WEIERSTRASS_KMAX {
                        total += ak[k] * cos(2.0 * PI * bk[k] * (v + 0.5));
                    }
                }
                total - z.len() as f64 * offset
            }
            BaseFunction::ExpandedGriewankRosenbrock => pairwise(z, |a, b| {
                let r = rosenbrock2(a + 1.0, b + 1.0);
                r * r / 4000.0 - cos(r) + 1.0
            }),
            BaseFunction::ExpandedScaffer => pairwise(z, scaffer_f6),
        }
    }
}

impl fmt::Display for BaseFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for BaseFunction {
    type Err = ();

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        BaseFunction::ALL
            .into_iter()
            .find(|b| b.name() == s)
            .ok_or(())
    }
}

fn rosenbrock2(x: f64, y: f64) -> f64 {
    let a = x * x - y;
    100.0 * a * a + (x - 1.0) * (x - 1.0)
}

fn scaffer_f6(x: f64, y: f64) -> f64 {
    let r2 = x * x + y * y;
    let s = sin(sqrt(r2));
    let den = 1.0 + 0.001 * r2;
    0.5 + (s * s - 0.5) / (den * den)
}

/// Sums `g` over consecutive pairs, wrapping the last coordinate to the first.
fn pairwise(z: &[f64], g: impl Fn(f64, f64) -> f64) -> f64 {
    let d = z.len();
    if d == 1 {
        return g(z[0], z[0]);
    }
    (0..d).map(|i| g(z[i], z[(i + 1) % d])).sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn every_kernel_vanishes_at_origin() {
        for base in BaseFunction::ALL {
            for d in [1usize, 2, 5, 10] {
                let v = base.eval(&vec![0.0; d]);
                assert!(v.abs() < 1e-12, "{base} at 0 in {d}-d gave {v}");
            }
        }
    }

    #[test]
    fn kernels_positive_away_from_origin() {
        for base in BaseFunction::ALL {
            let v = base.eval(&[0.3, -0.2, 0.1]);
            assert!(v > 0.0, "{base} gave {v}");
        }
    }

    #[test]
    fn schwefel12_hand_value() {
        // prefix sums 1, 3, 6 -> 1 + 9 + 36
        assert_eq!(BaseFunction::Schwefel12.eval(&[1.0, 2.0, 3.0]), 46.0);
    }

    #[test]
    fn names_round_trip() {
        for base in BaseFunction::ALL {
            assert_eq!(base.name().parse::<BaseFunction>(), Ok(base));
        }
    }
}
