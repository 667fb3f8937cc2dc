//! Synchronous gate-level netlists.
//!
//! Registers live on edges: an edge of weight `k` delays its signal by `k`
//! clock cycles. Gates carry an integer propagation delay; inputs and outputs
//! have delay 0. Every directed cycle must hold at least one register.
//!
//! Text format (`#` starts a comment):
//!
//! ```text
//! input  x
//! output y
//! gate   g1 XOR 1
//! gate   g2 BUF 1
//! wire   x  g1 0 0      # from to pin weight
//! wire   g2 g1 1 1
//! wire   g1 g2 0 0
//! wire   g1 y  0 0
//! ```

mod sim;
mod timing;

use std::collections::{HashMap, VecDeque};
use std::fmt;
use std::str::FromStr;

pub use sim::{simulate, BitStreams, SimError, Simulator};
pub use timing::{arrival_times, critical_path, CriticalPath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct NodeId(pub usize);

impl NodeId {
    pub fn index(self) -> usize {
        self.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum GateKind {
    And,
    Or,
    Not,
    Xor,
    Nand,
    Nor,
    Buf,
    Const0,
    Const1,
}

impl GateKind {
    pub const ALL: [GateKind; 9] = [
        GateKind::And,
        GateKind::Or,
        GateKind::Not,
        GateKind::Xor,
        GateKind::Nand,
        GateKind::Nor,
        GateKind::Buf,
        GateKind::Const0,
        GateKind::Const1,
    ];

    pub fn arity(self) -> usize {
        match self {
            GateKind::Const0 | GateKind::Const1 => 0,
            GateKind::Not | GateKind::Buf => 1,
            _ => 2,
        }
    }

    /// `pins` must hold exactly `arity()` values.
    pub fn eval(self, pins: &[bool]) -> bool {
        match self {
            GateKind::And => pins[0] & pins[1],
            GateKind::Or => pins[0] | pins[1],
            GateKind::Not => !pins[0],
            GateKind::Xor => pins[0] ^ pins[1],
            GateKind::Nand => !(pins[0] & pins[1]),
            GateKind::Nor => !(pins[0] | pins[1]),
            GateKind::Buf => pins[0],
            GateKind::Const0 => false,
            GateKind::Const1 => true,
        }
    }

    /// True when the gate outputs 0 on all-zero inputs.
    pub fn preserves_zero(self) -> bool {
        !self.eval(&[false, false][..self.arity()])
    }

    pub fn name(self) -> &'static str {
        match self {
            GateKind::And => "AND",
            GateKind::Or => "OR",
            GateKind::Not => "NOT",
            GateKind::Xor => "XOR",
            GateKind::Nand => "NAND",
            GateKind::Nor => "NOR",
            GateKind::Buf => "BUF",
            GateKind::Const0 => "CONST0",
            GateKind::Const1 => "CONST1",
        }
    }
}

impl fmt::Display for GateKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GateKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let upper = s.to_ascii_uppercase();
        GateKind::ALL
            .into_iter()
            .find(|k| k.name() == upper)
            .ok_or_else(|| format!("unknown gate kind `{s}`"))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeKind {
    Input,
    Output,
    Gate(GateKind),
}

impl NodeKind {
    pub fn arity(self) -> usize {
        match self {
            NodeKind::Input => 0,
            NodeKind::Output => 1,
            NodeKind::Gate(g) => g.arity(),
        }
    }

    pub fn is_host(self) -> bool {
        matches!(self, NodeKind::Input | NodeKind::Output)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Node {
    pub name: String,
    pub kind: NodeKind,
    pub delay: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Edge {
    pub from: NodeId,
    pub to: NodeId,
    pub pin: usize,
    pub weight: u32,
}

/// A structural problem found while building or parsing a netlist.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Syntax {
        line: usize,
        message: String,
    },
    DuplicateNode {
        name: String,
        line: usize,
    },
    UnknownNode {
        name: String,
        line: usize,
    },
    BadPin {
        node: String,
        pin: usize,
        arity: usize,
    },
    DanglingPin {
        node: String,
        pin: usize,
    },
    MultipleDrivers {
        node: String,
        pin: usize,
    },
    DrivenInput {
        node: String,
    },
    OutputFanout {
        node: String,
    },
    CombinationalCycle {
        cycle: Vec<String>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::Syntax { line, message } => write!(f, "line {line}: {message}"),
            Violation::DuplicateNode { name, line } => {
                write!(f, "line {line}: node `{name}` declared twice")
            }
            Violation::UnknownNode { name, line } => {
                write!(f, "line {line}: unknown node `{name}`")
            }
            Violation::BadPin { node, pin, arity } => {
                write!(
                    f,
                    "`{node}` has {arity} input pins, pin {pin} does not exist"
                )
            }
            Violation::DanglingPin { node, pin } => write!(f, "pin {pin} of `{node}` is undriven"),
            Violation::MultipleDrivers { node, pin } => {
                write!(f, "pin {pin} of `{node}` has more than one driver")
            }
            Violation::DrivenInput { node } => write!(f, "input `{node}` cannot be driven"),
            Violation::OutputFanout { node } => write!(f, "output `{node}` cannot drive wires"),
            Violation::CombinationalCycle { cycle } => {
                write!(f, "combinational cycle: {}", cycle.join(" -> "))
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
#[error("{}", .violations.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
pub struct NetlistError {
    pub violations: Vec<Violation>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Netlist {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    /// Driving edge per input pin, indexed `[node][pin]`.
    fanin: Vec<Vec<usize>>,
    fanout: Vec<Vec<usize>>,
    by_name: HashMap<String, NodeId>,
}

impl Netlist {
    pub fn builder() -> NetlistBuilder {
        NetlistBuilder::default()
    }

    pub fn parse(text: &str) -> Result<Self, NetlistError> {
        text.parse()
    }

    pub fn nodes(&self) -> &[Node] {
        &self.nodes
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn node(&self, id: NodeId) -> &Node {
        &self.nodes[id.0]
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn id(&self, name: &str) -> Option<NodeId> {
        self.by_name.get(name).copied()
    }

    pub fn node_ids(&self) -> impl Iterator<Item = NodeId> {
        (0..self.nodes.len()).map(NodeId)
    }

    fn ids_of(&self, kind: NodeKind) -> Vec<NodeId> {
        self.node_ids()
            .filter(|id| self.nodes[id.0].kind == kind)
            .collect()
    }

    /// Input nodes in declaration order.
    pub fn inputs(&self) -> Vec<NodeId> {
        self.ids_of(NodeKind::Input)
    }

    /// Output nodes in declaration order.
    pub fn outputs(&self) -> Vec<NodeId> {
        self.ids_of(NodeKind::Output)
    }

    pub fn input_names(&self) -> Vec<String> {
        self.inputs()
            .iter()
            .map(|i| self.node(*i).name.clone())
            .collect()
    }

    pub fn output_names(&self) -> Vec<String> {
        self.outputs()
            .iter()
            .map(|i| self.node(*i).name.clone())
            .collect()
    }

    /// Edge indices driving each pin of `id`, in pin order.
    pub fn fanin(&self, id: NodeId) -> &[usize] {
        &self.fanin[id.0]
    }

    pub fn fanout(&self, id: NodeId) -> &[usize] {
        &self.fanout[id.0]
    }

    pub fn gate_count(&self) -> usize {
        self.nodes
            .iter()
            .filter(|n| matches!(n.kind, NodeKind::Gate(_)))
            .count()
    }

    /// Total number of registers, `sum of w(e)`.
    pub fn register_count(&self) -> u64 {
        self.edges.iter().map(|e| e.weight as u64).sum()
    }

    pub fn max_delay(&self) -> u32 {
        self.nodes.iter().map(|n| n.delay).max().unwrap_or(0)
    }

    /// Same structure with edge weights replaced, edge by edge.
    pub fn with_weights(&self, weights: &[u32]) -> Result<Netlist, NetlistError> {
        assert_eq!(weights.len(), self.edges.len());
        let mut out = self.clone();
        for (e, w) in out.edges.iter_mut().zip(weights) {
            e.weight = *w;
        }
        match out.find_combinational_cycle() {
            Some(cycle) => Err(NetlistError {
                violations: vec![Violation::CombinationalCycle { cycle }],
            }),
            None => Ok(out),
        }
    }

    /// Topological order of the zero-weight subgraph.
    pub fn combinational_order(&self) -> Vec<NodeId> {
        self.zero_weight_kahn()
            .expect("validated netlists have no combinational cycle")
    }

    /// True when the graph has no directed cycle at all, registers or not.
    pub fn is_feed_forward(&self) -> bool {
        let mut indeg = vec![0usize; self.nodes.len()];
        for e in &self.edges {
            indeg[e.to.0] += 1;
        }
        let mut queue: VecDeque<usize> = (0..self.nodes.len()).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &ei in &self.fanout[v] {
                let t = self.edges[ei].to.0;
                indeg[t] -= 1;
                if indeg[t] == 0 {
                    queue.push_back(t);
                }
            }
        }
        seen == self.nodes.len()
    }

    fn zero_weight_kahn(&self) -> Result<Vec<NodeId>, Vec<bool>> {
        let n = self.nodes.len();
        let mut indeg = vec![0usize; n];
        for e in self.edges.iter().filter(|e| e.weight == 0) {
            indeg[e.to.0] += 1;
        }
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(v) = queue.pop_front() {
            order.push(NodeId(v));
            for &ei in &self.fanout[v] {
                let e = &self.edges[ei];
                if e.weight == 0 {
                    indeg[e.to.0] -= 1;
                    if indeg[e.to.0] == 0 {
                        queue.push_back(e.to.0);
                    }
                }
            }
        }
        if order.len() == n {
            Ok(order)
        } else {
            let mut stuck = vec![true; n];
            for v in &order {
                stuck[v.0] = false;
            }
            Err(stuck)
        }
    }

    /// Node names along one register-free cycle, if any exists.
    fn find_combinational_cycle(&self) -> Option<Vec<String>> {
        let stuck = self.zero_weight_kahn().err()?;
        // Every stuck node has a stuck zero-weight predecessor; walking
        // predecessors must revisit a node.
        let start = stuck.iter().position(|s| *s)?;
        let mut seen_at = HashMap::new();
        let mut walk = Vec::new();
        let mut v = start;
        while !seen_at.contains_key(&v) {
            seen_at.insert(v, walk.len());
            walk.push(v);
            v = self.fanin[v]
                .iter()
                .map(|&ei| &self.edges[ei])
                .find(|e| e.weight == 0 && stuck[e.from.0])
                .map(|e| e.from.0)?;
        }
        let mut cycle: Vec<String> = walk[seen_at[&v]..]
            .iter()
            .rev()
            .map(|&i| self.nodes[i].name.clone())
            .collect();
        cycle.push(cycle[0].clone());
        Some(cycle)
    }
}

impl fmt::Display for Netlist {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for n in &self.nodes {
            match n.kind {
                NodeKind::Input => writeln!(f, "input {}", n.name)?,
                NodeKind::Output => writeln!(f, "output {}", n.name)?,
                NodeKind::Gate(g) => writeln!(f, "gate {} {} {}", n.name, g, n.delay)?,
            }
        }
        for e in &self.edges {
            writeln!(
                f,
                "wire {} {} {} {}",
                self.nodes[e.from.0].name, self.nodes[e.to.0].name, e.pin, e.weight
            )?;
        }
        Ok(())
    }
}

impl FromStr for Netlist {
    type Err = NetlistError;

    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut b = NetlistBuilder::default();
        let mut wires = Vec::new();
        let mut errors = Vec::new();

        for (idx, raw) in text.lines().enumerate() {
            let line = idx + 1;
            let code = raw.split('#').next().unwrap_or("").trim();
            let tokens: Vec<&str> = code.split_whitespace().collect();
            let syntax = |message: String| Violation::Syntax { line, message };
            match tokens.as_slice() {
                [] => {}
                ["input", name] => {
                    b.declare(name, NodeKind::Input, 0, line);
                }
                ["output", name] => {
                    b.declare(name, NodeKind::Output, 0, line);
                }
                ["gate", name, kind, delay] => match (kind.parse::<GateKind>(), delay.parse()) {
                    (Ok(k), Ok(d)) => {
                        b.declare(name, NodeKind::Gate(k), d, line);
                    }
                    (Err(e), _) => errors.push(syntax(e)),
                    (_, Err(_)) => errors.push(syntax(format!("bad delay `{delay}`"))),
                },
                ["wire", from, to, pin, weight] => match (pin.parse(), weight.parse()) {
                    (Ok(p), Ok(w)) => wires.push((from.to_string(), to.to_string(), p, w, line)),
                    _ => errors.push(syntax(format!("bad pin or weight in `{code}`"))),
                },
                _ => errors.push(syntax(format!("cannot parse `{code}`"))),
            }
        }
        for (from, to, pin, weight, line) in wires {
            b.connect_named(&from, &to, pin, weight, line);
        }
        b.violations.extend(errors);
        b.build()
    }
}

/// Incremental netlist construction with validation at `build`.
#[derive(Debug, Default)]
pub struct NetlistBuilder {
    nodes: Vec<Node>,
    edges: Vec<Edge>,
    by_name: HashMap<String, NodeId>,
    violations: Vec<Violation>,
}

impl NetlistBuilder {
    fn declare(&mut self, name: &str, kind: NodeKind, delay: u32, line: usize) -> NodeId {
        if let Some(id) = self.by_name.get(name) {
            self.violations.push(Violation::DuplicateNode {
                name: name.to_string(),
                line,
            });
            return *id;
        }
        let id = NodeId(self.nodes.len());
        self.nodes.push(Node {
            name: name.to_string(),
            kind,
            delay: if kind.is_host() { 0 } else { delay },
        });
        self.by_name.insert(name.to_string(), id);
        id
    }

    pub fn input(&mut self, name: &str) -> NodeId {
        self.declare(name, NodeKind::Input, 0, 0)
    }

    pub fn output(&mut self, name: &str) -> NodeId {
        self.declare(name, NodeKind::Output, 0, 0)
    }

    pub fn gate(&mut self, name: &str, kind: GateKind, delay: u32) -> NodeId {
        self.declare(name, NodeKind::Gate(kind), delay, 0)
    }

    pub fn wire(&mut self, from: NodeId, to: NodeId, pin: usize, weight: u32) -> &mut Self {
        self.edges.push(Edge {
            from,
            to,
            pin,
            weight,
        });
        self
    }

    fn connect_named(&mut self, from: &str, to: &str, pin: usize, weight: u32, line: usize) {
        let lookup = |name: &str| {
            self.by_name
                .get(name)
                .copied()
                .ok_or(Violation::UnknownNode {
                    name: name.to_string(),
                    line,
                })
        };
        match (lookup(from), lookup(to)) {
            (Ok(f), Ok(t)) => {
                self.wire(f, t, pin, weight);
            }
            (f, t) => self
                .violations
                .extend([f.err(), t.err()].into_iter().flatten()),
        }
    }

    pub fn build(self) -> Result<Netlist, NetlistError> {
        let NetlistBuilder {
            nodes,
            edges,
            by_name,
            mut violations,
        } = self;
        let mut fanin: Vec<Vec<Option<usize>>> =
            nodes.iter().map(|n| vec![None; n.kind.arity()]).collect();
        let mut fanout = vec![Vec::new(); nodes.len()];

        for (ei, e) in edges.iter().enumerate() {
            let to = &nodes[e.to.0];
            let from = &nodes[e.from.0];
            if from.kind == NodeKind::Output {
                violations.push(Violation::OutputFanout {
                    node: from.name.clone(),
                });
            }
            if to.kind == NodeKind::Input {
                violations.push(Violation::DrivenInput {
                    node: to.name.clone(),
                });
                continue;
            }
            match fanin[e.to.0].get_mut(e.pin) {
                None => violations.push(Violation::BadPin {
                    node: to.name.clone(),
                    pin: e.pin,
                    arity: to.kind.arity(),
                }),
                Some(Some(_)) => violations.push(Violation::MultipleDrivers {
                    node: to.name.clone(),
                    pin: e.pin,
                }),
                Some(slot) => *slot = Some(ei),
            }
            fanout[e.from.0].push(ei);
        }

        let mut resolved = Vec::with_capacity(nodes.len());
        for (v, pins) in fanin.into_iter().enumerate() {
            let mut row = Vec::with_capacity(pins.len());
            for (pin, slot) in pins.into_iter().enumerate() {
                match slot {
                    Some(ei) => row.push(ei),
                    None => violations.push(Violation::DanglingPin {
                        node: nodes[v].name.clone(),
                        pin,
                    }),
                }
            }
            resolved.push(row);
        }

        let netlist = Netlist {
            nodes,
            edges,
            fanin: resolved,
            fanout,
            by_name,
        };
        if violations.is_empty() {
            if let Some(cycle) = netlist.find_combinational_cycle() {
                violations.push(Violation::CombinationalCycle { cycle });
            }
        }
        if violations.is_empty() {
            Ok(netlist)
        } else {
            Err(NetlistError { violations })
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    pub(crate) const CHAIN: &str = "\
input in
output out
gate g1 BUF 1
gate g2 BUF 1
gate g3 BUF 1
gate g4 BUF 1
wire in g1 0 0
wire g1 g2 0 0
wire g2 g3 0 0
wire g3 g4 0 0
wire g4 out 0 0
";

    #[test]
    fn parses_chain() {
        let n = Netlist::parse(CHAIN).unwrap();
        assert_eq!(n.len(), 6);
        assert_eq!(n.gate_count(), 4);
        assert!(n.edges().iter().all(|e| e.weight == 0));
        assert_eq!(n.input_names(), vec!["in"]);
        assert_eq!(n.output_names(), vec!["out"]);
        assert!(n.is_feed_forward());
    }

    #[test]
    fn text_round_trip() {
        let n = Netlist::parse(CHAIN).unwrap();
        assert_eq!(Netlist::parse(&n.to_string()).unwrap(), n);
    }

    #[test]
    fn empty_file_is_empty_netlist() {
        let n = Netlist::parse("# nothing\n\n").unwrap();
        assert!(n.is_empty());
        assert_eq!(critical_path(&n).period, 0);
    }

    #[test]
    fn zero_weight_cycle_is_reported() {
        let text = "gate a BUF 1\ngate b NOT 1\nwire a b 0 0\nwire b a 0 0\n";
        let err = Netlist::parse(text).unwrap_err();
        let [Violation::CombinationalCycle { cycle }] = err.violations.as_slice() else {
            panic!("{err}");
        };
        assert_eq!(cycle.len(), 3);
        assert_eq!(cycle.first(), cycle.last());
        assert!(cycle.contains(&"a".to_string()) && cycle.contains(&"b".to_string()));
        // The same loop with a register is fine.
        assert!(Netlist::parse("gate a BUF 1\ngate b NOT 1\nwire a b 0 1\nwire b a 0 0\n").is_ok());
    }

    #[test]
    fn all_violations_are_collected() {
        let text = "\
input x
input x
gate g AND 1
gate h FOO 1
wire x g 0 0
wire x g 0 0
wire x g 5 0
wire g zz 0 0
output y
wire y g 1 0
wire g x 0 0
bogus line
";
        let err = Netlist::parse(text).unwrap_err();
        let v = &err.violations;
        assert!(v.contains(&Violation::DuplicateNode {
            name: "x".into(),
            line: 2
        }));
        assert!(v
            .iter()
            .any(|e| matches!(e, Violation::Syntax { line: 4, .. })));
        assert!(v
            .iter()
            .any(|e| matches!(e, Violation::Syntax { line: 12, .. })));
        assert!(v.contains(&Violation::MultipleDrivers {
            node: "g".into(),
            pin: 0
        }));
        assert!(v.contains(&Violation::BadPin {
            node: "g".into(),
            pin: 5,
            arity: 2
        }));
        assert!(v.contains(&Violation::UnknownNode {
            name: "zz".into(),
            line: 8
        }));
        assert!(v.contains(&Violation::OutputFanout { node: "y".into() }));
        assert!(v.contains(&Violation::DrivenInput { node: "x".into() }));
        assert!(v.contains(&Violation::DanglingPin {
            node: "y".into(),
            pin: 0
        }));
    }

    #[test]
    fn gate_truth_tables() {
        use GateKind::*;
        let cases = [(false, false), (false, true), (true, false), (true, true)];
        let table = |k: GateKind| cases.map(|(a, b)| k.eval(&[a, b]) as u8);
        assert_eq!(table(And), [0, 0, 0, 1]);
        assert_eq!(table(Or), [0, 1, 1, 1]);
        assert_eq!(table(Xor), [0, 1, 1, 0]);
        assert_eq!(table(Nand), [1, 1, 1, 0]);
        assert_eq!(table(Nor), [1, 0, 0, 0]);
        assert!(Not.eval(&[false]) && !Buf.eval(&[false]));
        assert!(Const1.eval(&[]) && !Const0.eval(&[]));
        let zp: Vec<_> = GateKind::ALL
            .into_iter()
            .filter(|k| k.preserves_zero())
            .collect();
        assert_eq!(zp, vec![And, Or, Xor, Buf, Const0]);
    }

    #[test]
    fn builder_api() {
        let mut b = Netlist::builder();
        let x = b.input("x");
        let g = b.gate("g", GateKind::Not, 2);
        let y = b.output("y");
        b.wire(x, g, 0, 0).wire(g, y, 0, 1);
        let n = b.build().unwrap();
        assert_eq!(n.register_count(), 1);
        assert_eq!(n.id("g"), Some(g));
        assert_eq!(n.fanin(y), &[1]);
        assert_eq!(n.max_delay(), 2);
    }
}
