use alloc::vec;
use alloc::vec::Vec;

use rand::Rng;

use super::{Population, Strategy};

/// Five distinct indices in `[0, np)`, all different from `i`, drawn
/// uniformly without replacement. Requires `np >= 6`.
pub fn draw_indices<R: Rng + ?Sized>(np: usize, i: usize, rng: &mut R) -> [usize; 5] {
    debug_assert!(np >= 6);
    let mut r = [usize::MAX; 5];
    let mut k = 0;
    while k < 5 {
        let c = rng.random_range(0..np);
        if c != i && !r[..k].contains(&c) {
            r[k] = c;
            k += 1;
        }
    }
    r
}

/// Writes the donor for parent `i` into `out` using the drawn indices `r`.
pub fn mutate_into(
    strategy: Strategy,
    pop: &Population,
    i: usize,
    r: &[usize; 5],
    f: f64,
    out: &mut [f64],
) {
    let [x1, x2, x3, x4, x5] = r.map(|j| pop.member(j));
    let xi = pop.member(i);
    match strategy {
        Strategy::Rand1 => {
            for (j, o) in out.iter_mut().enumerate() {
                *o = x1[j] + f * (x2[j] - x3[j]);
            }
        }
        Strategy::Rand2 => {
            for (j, o) in out.iter_mut().enumerate() {
                *o = x1[j] + f * (x2[j] - x3[j] + x4[j] - x5[j]);
            }
        }
        Strategy::RandToBest2 => {
            let xb = pop.member(pop.best_index());
            for (j, o) in out.iter_mut().enumerate() {
                *o = x1[j] + f * (xb[j] - x1[j] + x2[j] - x3[j] + x4[j] - x5[j]);
            }
        }
        Strategy::CurrToRand1 => {
            for (j, o) in out.iter_mut().enumerate() {
                *o = xi[j] + f * (x1[j] - xi[j] + x2[j] - x3[j]);
            }
        }
    }
}

/// Draws indices and returns the donor for parent `i`.
pub fn mutate<R: Rng + ?Sized>(
    strategy: Strategy,
    pop: &Population,
    i: usize,
    f: f64,
    rng: &mut R,
) -> (Vec<f64>, [usize; 5]) {
    let r = draw_indices(pop.len(), i, rng);
    let mut donor = vec![0.0; pop.dim()];
    mutate_into(strategy, pop, i, &r, f, &mut donor);
    (donor, r)
}

/// Binomial crossover into `out`. One uniformly chosen coordinate always
/// comes from the donor; one uniform draw is consumed per coordinate.
pub fn crossover<R: Rng + ?Sized>(
    parent: &[f64],
    donor: &[f64],
    cr: f64,
    rng: &mut R,
    out: &mut [f64],
) {
    let jrand = rng.random_range(0..parent.len());
    for (j, o) in out.iter_mut().enumerate() {
        let take: f64 = rng.random();
        *o = if j == jrand || take < cr {
            donor[j]
        } else {
            parent[j]
        };
    }
}

/// Clamps every coordinate into `[lower, upper]`.
pub fn repair(x: &mut [f64], lower: &[f64], upper: &[f64]) {
    for ((v, l), u) in x.iter_mut().zip(lower).zip(upper) {
        if *v < *l {
            *v = *l;
        } else if *v > *u {
            *v = *u;
        }
    }
}
