use std::collections::VecDeque;
use std::fmt;

use rand::Rng;

use super::{Netlist, NodeId, NodeKind};

/// Named bit sequences of equal length, one per signal.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BitStreams {
    pub names: Vec<String>,
    /// `bits[signal][cycle]`
    pub bits: Vec<Vec<bool>>,
}

#[derive(Debug, Clone, PartialEq, Eq, thiserror::Error)]
pub enum SimError {
    #[error("no stream for input `{0}`")]
    MissingInput(String),
    #[error("stream `{name}` has {len} cycles, {needed} needed")]
    ShortStream {
        name: String,
        len: usize,
        needed: usize,
    },
    #[error("line {line}: expected {expected} characters of 0/1")]
    BadLine { line: usize, expected: usize },
}

impl BitStreams {
    /// # Panics
    ///
    /// If the streams differ in length or do not match `names`.
    pub fn new(names: Vec<String>, bits: Vec<Vec<bool>>) -> Self {
        assert_eq!(names.len(), bits.len());
        assert!(bits.windows(2).all(|w| w[0].len() == w[1].len()));
        BitStreams { names, bits }
    }

    pub fn random<R: Rng + ?Sized>(names: Vec<String>, cycles: usize, rng: &mut R) -> Self {
        let bits = names
            .iter()
            .map(|_| (0..cycles).map(|_| rng.gen()).collect())
            .collect();
        BitStreams { names, bits }
    }

    /// Number of cycles.
    pub fn len(&self) -> usize {
        self.bits.first().map_or(0, Vec::len)
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn get(&self, name: &str) -> Option<&[bool]> {
        self.names
            .iter()
            .position(|n| n == name)
            .map(|i| self.bits[i].as_slice())
    }

    /// Parses the streams file: one line per cycle, one `0`/`1` per signal.
    pub fn parse(text: &str, names: Vec<String>) -> Result<Self, SimError> {
        let mut bits = vec![Vec::new(); names.len()];
        for (idx, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() {
                continue;
            }
            if line.len() != names.len() || !line.bytes().all(|b| b == b'0' || b == b'1') {
                return Err(SimError::BadLine {
                    line: idx + 1,
                    expected: names.len(),
                });
            }
            for (s, b) in bits.iter_mut().zip(line.bytes()) {
                s.push(b == b'1');
            }
        }
        Ok(BitStreams { names, bits })
    }
}

impl fmt::Display for BitStreams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for t in 0..self.len() {
            let line: String = self
                .bits
                .iter()
                .map(|s| if s[t] { '1' } else { '0' })
                .collect();
            writeln!(f, "{line}")?;
        }
        Ok(())
    }
}

/// Where a pin reads its value from.
#[derive(Debug, Clone, Copy)]
enum Source {
    /// Straight from another node's current value.
    Wire(usize),
    /// From the oldest register of an edge's chain.
    Register(usize),
}

/// One node to evaluate, in settle order.
#[derive(Debug, Clone)]
struct Eval {
    node: usize,
    kind: NodeKind,
    pins: [Option<Source>; 2],
}

/// Cycle-by-cycle evaluator. Registers start at 0.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    netlist: &'a Netlist,
    plan: Vec<Eval>,
    inputs: Vec<NodeId>,
    outputs: Vec<NodeId>,
    values: Vec<bool>,
    /// Register chain per edge; front is the oldest value.
    registers: Vec<VecDeque<bool>>,
    /// `(edge, driving node)` for every edge that carries registers.
    clocked: Vec<(usize, usize)>,
}

impl<'a> Simulator<'a> {
    pub fn new(netlist: &'a Netlist) -> Self {
        let registers = netlist
            .edges()
            .iter()
            .map(|e| VecDeque::from(vec![false; e.weight as usize]))
            .collect();
        let plan = netlist
            .combinational_order()
            .into_iter()
            .filter(|v| netlist.node(*v).kind != NodeKind::Input)
            .map(|v| {
                let mut pins = [None; 2];
                for (p, &ei) in netlist.fanin(v).iter().enumerate() {
                    let e = &netlist.edges()[ei];
                    pins[p] = Some(if e.weight == 0 {
                        Source::Wire(e.from.0)
                    } else {
                        Source::Register(ei)
                    });
                }
                Eval {
                    node: v.0,
                    kind: netlist.node(v).kind,
                    pins,
                }
            })
            .collect();
        let clocked = netlist
            .edges()
            .iter()
            .enumerate()
            .filter(|(_, e)| e.weight > 0)
            .map(|(ei, e)| (ei, e.from.0))
            .collect();
        Simulator {
            netlist,
            plan,
            inputs: netlist.inputs(),
            outputs: netlist.outputs(),
            values: vec![false; netlist.len()],
            registers,
            clocked,
        }
    }

    pub fn netlist(&self) -> &'a Netlist {
        self.netlist
    }

    fn read(&self, src: Source) -> bool {
        match src {
            Source::Wire(v) => self.values[v],
            Source::Register(ei) => self.registers[ei][0],
        }
    }

    /// One clock cycle: settle the logic with `inputs` (in input declaration
    /// order), sample the outputs, then clock every register.
    pub fn step(&mut self, inputs: &[bool]) -> Vec<bool> {
        let mut out = Vec::with_capacity(self.outputs.len());
        self.step_into(inputs, &mut out);
        out
    }

    /// Like [`Simulator::step`], appending the sampled outputs to `out`.
    pub fn step_into(&mut self, inputs: &[bool], out: &mut Vec<bool>) {
        debug_assert_eq!(inputs.len(), self.inputs.len());
        for (id, v) in self.inputs.iter().zip(inputs) {
            self.values[id.0] = *v;
        }
        for i in 0..self.plan.len() {
            let Eval { node, kind, pins } = self.plan[i];
            let a = pins[0].is_some_and(|p| self.read(p));
            let value = match kind {
                NodeKind::Input => continue,
                NodeKind::Output => a,
                NodeKind::Gate(g) => {
                    let b = pins[1].is_some_and(|p| self.read(p));
                    g.eval(&[a, b][..g.arity()])
                }
            };
            self.values[node] = value;
        }
        out.extend(self.outputs.iter().map(|o| self.values[o.0]));
        for &(ei, from) in &self.clocked {
            let q = &mut self.registers[ei];
            q.pop_front();
            q.push_back(self.values[from]);
        }
    }
}

/// Runs `n` for `cycles` cycles and returns the output streams.
pub fn simulate(n: &Netlist, inputs: &BitStreams, cycles: usize) -> Result<BitStreams, SimError> {
    let streams: Vec<&[bool]> = n
        .input_names()
        .into_iter()
        .map(|name| match inputs.get(&name) {
            None => Err(SimError::MissingInput(name)),
            Some(s) if s.len() < cycles => Err(SimError::ShortStream {
                name,
                len: s.len(),
                needed: cycles,
            }),
            Some(s) => Ok(s),
        })
        .collect::<Result<_, _>>()?;

    let mut sim = Simulator::new(n);
    let mut out = vec![Vec::with_capacity(cycles); n.outputs().len()];
    let mut frame = vec![false; streams.len()];
    let mut sampled = Vec::with_capacity(out.len());
    for t in 0..cycles {
        for (f, s) in frame.iter_mut().zip(&streams) {
            *f = s[t];
        }
        sampled.clear();
        sim.step_into(&frame, &mut sampled);
        for (o, v) in out.iter_mut().zip(&sampled) {
            o.push(*v);
        }
    }
    Ok(BitStreams {
        names: n.output_names(),
        bits: out,
    })
}
