//! Register-moving transformations on synchronous netlists.
//!
//! A retiming assigns an integer lag `r(v)` to every node and rewrites each
//! edge `u -> v` to carry `w(e) + r(v) - r(u)` registers. Inputs and outputs
//! keep lag 0, so the number of registers on any input-to-output path (the
//! latency) is unchanged. C-slow multiplies every register count by `C`;
//! pipelining adds registers at the inputs and therefore does change latency.

mod area;
mod equiv;
mod leiserson_saxe;

use std::fmt;

use crate::netlist::{Netlist, NetlistError, NodeId};

pub use area::{area_report, AreaModel, FpgaReference, MEASURED_FPGA};
pub use equiv::{
    check_equivalence, retiming_warmup, EquivalenceCheck, EquivalenceReport, Mismatch,
};
pub use leiserson_saxe::{
    feasible_retiming, min_period_retime, path_matrices, MinPeriod, PathMatrices,
};

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum RetimeError {
    #[error("C must be at least 1, got {0}")]
    BadC(usize),
    #[error("retiming makes edge {from} -> {to} (pin {pin}) carry {weight} registers")]
    IllegalRetiming {
        from: String,
        to: String,
        pin: usize,
        weight: i64,
    },
    #[error("host node `{node}` must keep lag 0, got {lag}")]
    HostLag { node: String, lag: i64 },
    #[error("retiming has {got} lags for {expected} nodes")]
    LagCount { expected: usize, got: usize },
    #[error("pipelining needs a feed-forward netlist; this one has a feedback loop")]
    NotFeedForward,
    #[error("line {line}: {message}")]
    LagFile { line: usize, message: String },
    #[error("netlists differ in their {0} signals")]
    InterfaceMismatch(&'static str),
    #[error(transparent)]
    Netlist(#[from] NetlistError),
}

/// Integer lag per node, indexed by `NodeId`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Retiming {
    pub lags: Vec<i64>,
}

impl Retiming {
    pub fn identity(n: &Netlist) -> Self {
        Retiming {
            lags: vec![0; n.len()],
        }
    }

    pub fn lag(&self, v: NodeId) -> i64 {
        self.lags[v.0]
    }

    /// Retimed weight of every edge, in edge order. Entries may be negative
    /// when the retiming is illegal.
    pub fn retimed_weights(&self, n: &Netlist) -> Vec<i64> {
        n.edges()
            .iter()
            .map(|e| e.weight as i64 + self.lags[e.to.0] - self.lags[e.from.0])
            .collect()
    }

    /// Parses a lag file (`lag <node> <integer>` per line, `#` comments).
    /// Nodes not mentioned get lag 0.
    pub fn parse(text: &str, n: &Netlist) -> Result<Self, RetimeError> {
        let mut r = Retiming::identity(n);
        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let code = raw.split('#').next().unwrap_or("").trim();
            let tokens: Vec<&str> = code.split_whitespace().collect();
            let err = |message: String| RetimeError::LagFile { line, message };
            match tokens.as_slice() {
                [] => {}
                ["lag", node, value] => {
                    let id = n
                        .id(node)
                        .ok_or_else(|| err(format!("unknown node `{node}`")))?;
                    r.lags[id.0] = value
                        .parse()
                        .map_err(|_| err(format!("bad lag `{value}`")))?;
                }
                _ => return Err(err(format!("cannot parse `{code}`"))),
            }
        }
        Ok(r)
    }

    /// Lag-file text for `n`, one line per node.
    pub fn to_text(&self, n: &Netlist) -> String {
        RetimingDisplay(self, n).to_string()
    }
}

struct RetimingDisplay<'a>(&'a Retiming, &'a Netlist);

impl fmt::Display for RetimingDisplay<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for (v, node) in self.1.nodes().iter().enumerate() {
            writeln!(f, "lag {} {}", node.name, self.0.lags[v])?;
        }
        Ok(())
    }
}

/// Checks `r` against `n`: host lags are 0 and no edge goes negative.
pub fn check_legal(n: &Netlist, r: &Retiming) -> Result<Vec<u32>, RetimeError> {
    if r.lags.len() != n.len() {
        return Err(RetimeError::LagCount {
            expected: n.len(),
            got: r.lags.len(),
        });
    }
    for v in n.node_ids() {
        let node = n.node(v);
        if node.kind.is_host() && r.lag(v) != 0 {
            return Err(RetimeError::HostLag {
                node: node.name.clone(),
                lag: r.lag(v),
            });
        }
    }
    n.edges()
        .iter()
        .zip(r.retimed_weights(n))
        .map(|(e, w)| {
            u32::try_from(w).map_err(|_| RetimeError::IllegalRetiming {
                from: n.node(e.from).name.clone(),
                to: n.node(e.to).name.clone(),
                pin: e.pin,
                weight: w,
            })
        })
        .collect()
}

/// Rewrites every edge weight to `w(e) + r(to) - r(from)`.
pub fn apply_retiming(n: &Netlist, r: &Retiming) -> Result<Netlist, RetimeError> {
    let weights = check_legal(n, r)?;
    Ok(n.with_weights(&weights)?)
}

/// Replaces every register with `c` registers.
pub fn cslow_transform(n: &Netlist, c: usize) -> Result<Netlist, RetimeError> {
    if c == 0 {
        return Err(RetimeError::BadC(c));
    }
    let weights: Vec<u32> = n.edges().iter().map(|e| e.weight * c as u32).collect();
    Ok(n.with_weights(&weights)?)
}

#[derive(Debug, Clone)]
pub struct Pipelined {
    pub netlist: Netlist,
    /// Retiming applied after the extra input registers were inserted.
    pub retiming: Retiming,
    pub period: u64,
    /// Registers added to every input-to-output path.
    pub latency: u32,
}

/// Adds `k` registers behind every input, then retimes for minimum period.
pub fn pipeline(n: &Netlist, k: u32) -> Result<Pipelined, RetimeError> {
    if !n.is_feed_forward() {
        return Err(RetimeError::NotFeedForward);
    }
    let inputs = n.inputs();
    let weights: Vec<u32> = n
        .edges()
        .iter()
        .map(|e| e.weight + if inputs.contains(&e.from) { k } else { 0 })
        .collect();
    let padded = n.with_weights(&weights)?;
    let best = min_period_retime(&padded);
    Ok(Pipelined {
        netlist: best.netlist,
        retiming: best.retiming,
        period: best.period,
        latency: k,
    })
}
