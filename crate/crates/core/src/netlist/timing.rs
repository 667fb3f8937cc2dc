use super::{Netlist, NodeId};

/// Clock period of a netlist and one path that attains it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CriticalPath {
    pub period: u64,
    /// Nodes along a register-free path whose delays sum to `period`.
    pub path: Vec<NodeId>,
}

/// Latest arrival time at each node's output: its own delay plus the worst
/// arrival over register-free fanin. Returns arrivals and the chosen
/// predecessor of each node.
pub fn arrival_times(n: &Netlist) -> (Vec<u64>, Vec<Option<NodeId>>) {
    let mut arrival = vec![0u64; n.len()];
    let mut pred = vec![None; n.len()];
    for v in n.combinational_order() {
        let mut best: Option<(u64, NodeId)> = None;
        for &ei in n.fanin(v) {
            let e = &n.edges()[ei];
            if e.weight == 0 && best.is_none_or(|(t, _)| arrival[e.from.0] > t) {
                best = Some((arrival[e.from.0], e.from));
            }
        }
        arrival[v.0] = n.node(v).delay as u64 + best.map_or(0, |(t, _)| t);
        pred[v.0] = best.map(|(_, u)| u);
    }
    (arrival, pred)
}

/// Longest register-free path delay, by longest-path traversal of the
/// zero-weight subgraph in topological order.
pub fn critical_path(n: &Netlist) -> CriticalPath {
    let (arrival, pred) = arrival_times(n);
    let Some(end) = (0..n.len()).max_by_key(|&v| (arrival[v], std::cmp::Reverse(v))) else {
        return CriticalPath {
            period: 0,
            path: Vec::new(),
        };
    };
    let mut path = vec![NodeId(end)];
    while let Some(p) = pred[path.last().unwrap().0] {
        path.push(p);
    }
    path.reverse();
    CriticalPath {
        period: arrival[end],
        path,
    }
}
