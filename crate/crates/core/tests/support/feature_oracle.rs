//! Brute-force recomputation of the 80 history features from a raw trace
//! of applications. Shares no code with the incremental bookkeeping.

use de_ddqn_core::Strategy;

#[derive(Clone, Copy, Debug)]
pub struct App {
    pub op: Strategy,
    pub parent: f64,
    pub trial: f64,
    pub best_parent: f64,
    pub bsf: f64,
    pub median: f64,
}

impl App {
    pub fn om(&self) -> [f64; 4] {
        [
            self.parent - self.trial,
            self.best_parent - self.trial,
            self.bsf - self.trial,
            self.median - self.trial,
        ]
    }
}

struct GenStats {
    total: [f64; 4],
    succ: [[Vec<f64>; 4]; 4],
}

fn gen_stats(apps: &[App]) -> GenStats {
    let mut g = GenStats {
        total: [0.0; 4],
        succ: Default::default(),
    };
    for a in apps {
        let op = a.op.ordinal();
        g.total[op] += 1.0;
        for (m, v) in a.om().into_iter().enumerate() {
            if v > 0.0 {
                g.succ[m][op].push(v);
            }
        }
    }
    g
}

fn sum(v: &[f64]) -> f64 {
    let mut s = 0.0;
    for x in v {
        s += x;
    }
    s
}

fn best(v: &[f64]) -> f64 {
    v.iter().copied().fold(0.0, f64::max)
}

fn normalize(v: [f64; 4]) -> [f64; 4] {
    let c = v.map(|x| if x.is_finite() && x > 0.0 { x } else { 0.0 });
    let t: f64 = c.iter().sum();
    if t > 0.0 && t.is_finite() {
        c.map(|x| (x / t).clamp(0.0, 1.0))
    } else {
        [0.0; 4]
    }
}

/// Window contents after replaying every improving application.
fn window(trace: &[Vec<App>], cap: usize) -> Vec<(usize, [f64; 4])> {
    // (op, om, f_u, arrival)
    let mut w: Vec<(usize, [f64; 4], f64, usize)> = Vec::new();
    let mut arrival = 0;
    for a in trace.iter().flatten() {
        let om = a.om();
        if om[0] <= 0.0 || cap == 0 {
            continue;
        }
        let op = a.op.ordinal();
        if w.len() == cap {
            let same = w
                .iter()
                .enumerate()
                .filter(|(_, e)| e.0 == op)
                .min_by_key(|(_, e)| e.3)
                .map(|(i, _)| i);
            let victim = same.unwrap_or_else(|| {
                let mut worst = 0;
                for i in 1..w.len() {
                    if w[i].2 > w[worst].2 {
                        worst = i;
                    }
                }
                worst
            });
            w.remove(victim);
        }
        w.push((op, om, a.trial, arrival));
        arrival += 1;
    }
    w.into_iter().map(|(op, om, _, _)| (op, om)).collect()
}

/// Features 19..99 (0-based) after the given trace; `trace[g]` holds the
/// applications of generation `g`, the last one possibly still open.
pub fn history_features(trace: &[Vec<App>], gen: usize, window_size: usize) -> Vec<f64> {
    let recent = &trace[trace.len().saturating_sub(gen)..];
    let stats: Vec<GenStats> = recent.iter().map(|g| gen_stats(g)).collect();
    let mut groups = [[[0.0f64; 4]; 4]; 5];
    for m in 0..4 {
        for op in 0..4 {
            let mut rate = 0.0;
            let mut imp = 0.0;
            let mut tot = 0.0;
            let mut best_sum = 0.0;
            for g in &stats {
                if g.total[op] > 0.0 {
                    rate += g.succ[m][op].len() as f64 / g.total[op];
                }
                imp += sum(&g.succ[m][op]);
                tot += g.total[op];
                best_sum += best(&g.succ[m][op]);
            }
            groups[0][m][op] = rate;
            groups[1][m][op] = if tot > 0.0 { imp / tot } else { 0.0 };
            groups[3][m][op] = best_sum;
            if stats.len() >= 2 {
                let (p, l) = (&stats[stats.len() - 2], &stats[stats.len() - 1]);
                let (bp, bl) = (best(&p.succ[m][op]), best(&l.succ[m][op]));
                let den = bp * (l.total[op] - p.total[op]).abs();
                if den != 0.0 {
                    groups[2][m][op] = (bl - bp) / den;
                }
            }
        }
    }
    for (op, om) in window(trace, window_size) {
        for m in 0..4 {
            if om[m] > 0.0 {
                groups[4][m][op] += om[m];
            }
        }
    }
    let mut out = Vec::with_capacity(80);
    for g in groups {
        for m in 0..4 {
            out.extend(normalize(g[m]));
        }
    }
    out
}
