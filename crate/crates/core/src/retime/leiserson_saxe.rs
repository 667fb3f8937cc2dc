//! Minimum-period retiming.
//!
//! For every node pair `(u, v)`, `W(u, v)` is the fewest registers on any
//! `u -> v` path and `D(u, v)` the largest total delay among the paths that
//! achieve `W(u, v)`. A retiming reaches period `c` iff the difference
//! constraints
//!
//! ```text
//! r(u) - r(v) <= w(e)            for every edge e: u -> v
//! r(u) - r(v) <= W(u, v) - 1     for every pair with D(u, v) > c
//! r(host)     =  0
//! ```
//!
//! are satisfiable. The optimum is one of the distinct `D` values, found by
//! binary search; each probe solves the constraints with Bellman-Ford and
//! reports infeasibility as a negative cycle.

use super::{apply_retiming, Retiming};
use crate::netlist::{critical_path, Netlist};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PathMatrices {
    /// `w[u][v]`, `None` when `v` is unreachable from `u`.
    pub w: Vec<Vec<Option<u64>>>,
    /// `d[u][v]`, meaningful only where `w[u][v]` is `Some`.
    pub d: Vec<Vec<u64>>,
}

/// Computes `W` and `D` with Floyd-Warshall over `(w(e), -d(u))` pairs
/// ordered lexicographically.
pub fn path_matrices(n: &Netlist) -> PathMatrices {
    let size = n.len();
    // (registers, -delay excluding the final node)
    let mut best: Vec<Vec<Option<(u64, i64)>>> = vec![vec![None; size]; size];
    for (v, row) in best.iter_mut().enumerate() {
        row[v] = Some((0, 0));
    }
    for e in n.edges() {
        let cand = (e.weight as u64, -(n.node(e.from).delay as i64));
        let slot = &mut best[e.from.0][e.to.0];
        if slot.is_none_or(|cur| cand < cur) {
            *slot = Some(cand);
        }
    }
    for k in 0..size {
        for i in 0..size {
            let Some((wik, dik)) = best[i][k] else {
                continue;
            };
            let via_k = best[k].clone();
            for (slot, through) in best[i].iter_mut().zip(via_k) {
                let Some((wkj, dkj)) = through else {
                    continue;
                };
                let cand = (wik + wkj, dik + dkj);
                if slot.is_none_or(|cur| cand < cur) {
                    *slot = Some(cand);
                }
            }
        }
    }

    let mut w = vec![vec![None; size]; size];
    let mut d = vec![vec![0; size]; size];
    for u in 0..size {
        for v in 0..size {
            if let Some((regs, neg_delay)) = best[u][v] {
                w[u][v] = Some(regs);
                d[u][v] = (n.nodes()[v].delay as i64 - neg_delay) as u64;
            }
        }
    }
    PathMatrices { w, d }
}

/// A legal retiming achieving period `period`, if one exists.
pub fn feasible_retiming(n: &Netlist, m: &PathMatrices, period: u64) -> Option<Retiming> {
    let size = n.len();
    let reference = size;
    // (a, b, k) encodes x_a - x_b <= k, i.e. a graph edge b -> a of weight k.
    let mut constraints: Vec<(usize, usize, i64)> = Vec::new();
    for e in n.edges() {
        constraints.push((e.from.0, e.to.0, e.weight as i64));
    }
    for u in 0..size {
        for v in 0..size {
            if let Some(regs) = m.w[u][v] {
                if m.d[u][v] > period {
                    constraints.push((u, v, regs as i64 - 1));
                }
            }
        }
    }
    for v in n.node_ids().filter(|v| n.node(*v).kind.is_host()) {
        constraints.push((v.0, reference, 0));
        constraints.push((reference, v.0, 0));
    }

    // Bellman-Ford from an implicit source joined to every variable by 0.
    let mut dist = vec![0i64; size + 1];
    for _ in 0..=size + 1 {
        let mut changed = false;
        for &(a, b, k) in &constraints {
            if dist[b] + k < dist[a] {
                dist[a] = dist[b] + k;
                changed = true;
            }
        }
        if !changed {
            let base = dist[reference];
            return Some(Retiming {
                lags: dist[..size].iter().map(|x| x - base).collect(),
            });
        }
    }
    None
}

#[derive(Debug, Clone)]
pub struct MinPeriod {
    pub retiming: Retiming,
    pub period: u64,
    pub netlist: Netlist,
}

/// Retimes `n` for the smallest achievable clock period.
pub fn min_period_retime(n: &Netlist) -> MinPeriod {
    let m = path_matrices(n);
    let mut candidates: Vec<u64> = (0..n.len())
        .flat_map(|u| (0..n.len()).map(move |v| (u, v)))
        .filter(|&(u, v)| m.w[u][v].is_some())
        .map(|(u, v)| m.d[u][v])
        .collect();
    candidates.sort_unstable();
    candidates.dedup();

    let identity = Retiming::identity(n);
    let mut best = (identity, critical_path(n).period);
    let (mut lo, mut hi) = (0, candidates.len());
    while lo < hi {
        let mid = (lo + hi) / 2;
        match feasible_retiming(n, &m, candidates[mid]) {
            Some(r) => {
                best = (r, candidates[mid]);
                hi = mid;
            }
            None => lo = mid + 1,
        }
    }

    let (retiming, _) = best;
    let netlist = apply_retiming(n, &retiming).expect("constraint solution is a legal retiming");
    let period = critical_path(&netlist).period;
    MinPeriod {
        retiming,
        period,
        netlist,
    }
}
