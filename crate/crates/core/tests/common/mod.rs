//! Independent oracles and random generators shared by the integration and
//! acceptance suites. Nothing here calls into the crate's microcode walker
//! or retiming code; the crate is only used for its data types.

#![allow(dead_code)]

use std::collections::HashMap;

use cslow::isa::{MemoryImage, Mnemonic};
use cslow::netlist::{GateKind, Netlist, NodeId, NodeKind};
use rand::seq::SliceRandom;
use rand::Rng;

// ---------------------------------------------------------------------------
// Control-store oracle: walks the symbolic table text row by row.

/// The control store exactly as printed, including its typos (`DCA` for the
/// DCRA row, `ADDSUB` for `ADSUB`, and a blank I0 value at row 36).
pub const CONTROL_TABLE: &str = "\
0\t\tpc ← 0
1\tFetch\tMAR ← pc
2\t\tIR ← M(MAR) ; pc ← pc+1
3\tDecode\tI3 = 1? go to MEMREF
4\t\tXC0 = 1? Go to CMA
5\t\tXC1 = 1? Go to INCA
6\t\tXC2 = 1? Go to DCA
7\t\tgo to HALT
8\tCMA\tA ← \\bar{A}
9\t\tgo to Fetch
10\tINCA\tA ← A+1
11\t\tgo to Fetch
12\tDCRA\tA ← A-1
13\t\tgo to Fetch
14\tMEMREF\tif XC0 = 1, LDSTO
15\t\tif XC1 = 1, ADDSUB
16\t\tif XC2 = 1, JUMP
17\tAND\tMAR ← pc
18\t\tBuffer ← M(MAR), pc ← pc+1
19\t\tMAR ← Buffer
20\t\tBuffer ← M(MAR)
21\t\tA ← A & Buffer
22\t\tgo to Fetch
23\tLDSTO\tMAR ← pc
24\t\tBuffer ← M(MAR); pc ← pc +1
25\t\tMAR ← Buffer
26\t\tif I0 = 1 go to STO
27\tLOAD\tBuffer ← M(MAR)
28\t\tA ← Buffer
29\t\tgo to Fetch
30\tSTO\tM(MAR) ← A
31\t\tgo to Fetch
32\tADSUB\tMAR ← pc
33\t\tBuffer ← M(MAR); pc ← pc+1
34\t\tMAR ← Buffer
35\t\tBuffer ← M(MAR)
36\t\tif I0 = , go to SUB
37\tADD\tA ← A + Buffer
38\t\tgo to Fetch
39\tSUB\tA ← A - Buffer
40\t\tgo to Fetch
41\tJUMP\tMAR ← pc
42\t\tif I0 =0, go to JOZ
43\t\tif I0 =1, go to JOC
44\tJOZ\tif z=1 go to LOADPC
45\t\tpc ← pc+1
46\t\tgo to Fetch
47\tJOC\tif c=1 go to LOADPC
48\t\tpc ← pc+1
49\t\tgo to Fetch
50\tLOADPC\tpc ← M(MAR)
51\t\tgo to Fetch
52\tHALT\tgo to HALT
";

#[derive(Debug, Clone)]
pub struct TableRow {
    pub address: usize,
    pub label: Option<String>,
    pub text: String,
}

pub fn table_rows() -> Vec<TableRow> {
    CONTROL_TABLE
        .lines()
        .map(|line| {
            let mut parts = line.splitn(3, '\t');
            let address = parts.next().unwrap().parse().unwrap();
            let label = parts.next().unwrap();
            let text = parts.next().unwrap().to_string();
            TableRow {
                address,
                label: (!label.is_empty()).then(|| label.to_string()),
                text,
            }
        })
        .collect()
}

fn canonical_label(name: &str) -> &str {
    match name {
        "DCA" => "DCRA",
        "ADDSUB" => "ADSUB",
        other => other,
    }
}

/// What a row does to the micro-sequencer.
#[derive(Debug, Clone, PartialEq)]
enum Flow {
    Next,
    Goto(usize),
    /// Jump when the named condition holds.
    When(String, usize),
}

fn flow_of(row: &TableRow, labels: &HashMap<String, usize>) -> Flow {
    let text = row.text.as_str();
    let lower = text.to_ascii_lowercase();
    let is_control = lower.contains("go to") || lower.starts_with("if ") || text.contains('?');
    if !is_control {
        return Flow::Next;
    }
    let target_word = text.split([' ', ',']).rfind(|w| !w.is_empty()).unwrap();
    let target = labels[canonical_label(target_word)];
    let cond_part = lower
        .trim_start_matches("if ")
        .split(['?', ','])
        .next()
        .unwrap()
        .split("go to")
        .next()
        .unwrap()
        .replace(' ', "");
    if lower.starts_with("go to") {
        return Flow::Goto(target);
    }
    // "I0 = ," has lost its value; the ADD/SUB split mirrors LOAD/STO, so
    // I0 = 1 selects SUB.
    let cond = if cond_part == "i0=" {
        "i0=1".to_string()
    } else {
        cond_part
    };
    Flow::When(cond, target)
}

fn holds(cond: &str, opcode: u8, z: bool, c: bool) -> bool {
    let bit = |i: u8| (opcode >> i) & 1 == 1;
    let (i3, i2, i1, i0) = (bit(3), bit(2), bit(1), bit(0));
    match cond {
        "i3=1" => i3,
        "xc0=1" => !i2 && i1,
        "xc1=1" => i2 && !i1,
        "xc2=1" => i2 && i1,
        "i0=1" => i0,
        "i0=0" => !i0,
        "z=1" => z,
        "c=1" => c,
        other => panic!("unknown condition {other}"),
    }
}

/// Rows of one instruction, from Fetch until control returns to Fetch or
/// enters HALT. Returns the cycle count and the visited addresses.
pub fn oracle_walk(opcode: u8, z: bool, c: bool) -> (u32, Vec<usize>) {
    let rows = table_rows();
    let labels: HashMap<String, usize> = rows
        .iter()
        .filter_map(|r| r.label.clone().map(|l| (l, r.address)))
        .collect();
    let fetch = labels["Fetch"];
    let halt = labels["HALT"];
    let mut at = fetch;
    let mut visited = Vec::new();
    loop {
        visited.push(at);
        let next = match flow_of(&rows[at], &labels) {
            Flow::Next => at + 1,
            Flow::Goto(t) => t,
            Flow::When(cond, t) => {
                if holds(&cond, opcode, z, c) {
                    t
                } else {
                    at + 1
                }
            }
        };
        if next == fetch || next == halt {
            return (visited.len() as u32, visited);
        }
        at = next;
    }
}

pub fn oracle_row_count() -> usize {
    table_rows().len()
}

/// Opcode nibble per mnemonic, written out independently of the crate.
pub fn opcode_of(m: Mnemonic) -> u8 {
    match m {
        Mnemonic::Halt => 0b0000,
        Mnemonic::Cma => 0b0010,
        Mnemonic::Inca => 0b0100,
        Mnemonic::Dcra => 0b0110,
        Mnemonic::And => 0b1000,
        Mnemonic::Load => 0b1010,
        Mnemonic::Sto => 0b1011,
        Mnemonic::Add => 0b1100,
        Mnemonic::Sub => 0b1101,
        Mnemonic::Joz => 0b1110,
        Mnemonic::Joc => 0b1111,
    }
}

/// Cycle cost for a mnemonic; `taken` picks the branch outcome.
pub fn oracle_cost(m: Mnemonic, taken: bool) -> u32 {
    oracle_walk(opcode_of(m), taken, taken).0
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct OracleRun {
    pub cycles: u64,
    pub memory: MemoryImage,
    pub a: u8,
    pub pc: u8,
    pub z: bool,
    pub c: bool,
    pub instructions: usize,
}

/// Instruction-level interpreter charging each instruction its table-walk
/// cost, plus one reset cycle. `None` if `limit` instructions do not halt.
pub fn oracle_run(image: &MemoryImage, limit: usize) -> Option<OracleRun> {
    let mut mem = image.clone();
    let (mut pc, mut a, mut z, mut c) = (0u8, 0u8, false, false);
    let mut cycles = 1u64;
    for executed in 0..limit {
        let opcode = mem.read(pc) & 0x0f;
        let (cost, _) = oracle_walk(opcode, z, c);
        cycles += cost as u64;
        let operand = mem.read(pc.wrapping_add(1));
        pc = pc.wrapping_add(1);
        let i3 = opcode & 0b1000 != 0;
        if !i3 {
            match (opcode >> 1) & 0b11 {
                0b01 => a = !a,
                0b10 => {
                    let (r, carry) = a.overflowing_add(1);
                    a = r;
                    z = r == 0;
                    c = carry;
                }
                0b11 => {
                    c = a >= 1;
                    a = a.wrapping_sub(1);
                    z = a == 0;
                }
                _ => {
                    return Some(OracleRun {
                        cycles,
                        memory: mem,
                        a,
                        pc,
                        z,
                        c,
                        instructions: executed + 1,
                    })
                }
            }
            continue;
        }
        pc = pc.wrapping_add(1);
        let value = mem.read(operand);
        match opcode {
            0b1000 => a &= value,
            0b1010 => a = value,
            0b1011 => mem.write(operand, a),
            0b1100 => {
                let (r, carry) = a.overflowing_add(value);
                a = r;
                z = r == 0;
                c = carry;
            }
            0b1101 => {
                c = a >= value;
                a = a.wrapping_sub(value);
                z = a == 0;
            }
            0b1110 => {
                if z {
                    pc = operand;
                }
            }
            0b1111 => {
                if c {
                    pc = operand;
                }
            }
            // 0b1001: the AND path is the fall-through of MEMREF.
            _ => a &= value,
        }
    }
    None
}

// ---------------------------------------------------------------------------
// Random halting programs.

pub const DATA_START: u8 = 0xc0;

/// A program that always halts: jumps only go forward, stores only hit the
/// data region, and the code ends in HALT. The data region is random.
pub fn random_program<R: Rng>(rng: &mut R) -> MemoryImage {
    let len = rng.gen_range(1..=24);
    let mut picks: Vec<Mnemonic> = (0..len)
        .map(|_| *Mnemonic::ALL.choose(rng).unwrap())
        .collect();
    picks.push(Mnemonic::Halt);
    // Addresses of every instruction, to aim jumps at later ones.
    let mut starts = Vec::with_capacity(picks.len());
    let mut addr = 0usize;
    for m in &picks {
        starts.push(addr);
        addr += if m.is_memory_reference() { 2 } else { 1 };
    }
    assert!(addr <= DATA_START as usize);

    let mut img = MemoryImage::new();
    for (i, m) in picks.iter().enumerate() {
        let at = starts[i] as u8;
        img.write(at, opcode_of(*m));
        if m.is_branch() {
            let target = starts[rng.gen_range(i + 1..starts.len())];
            img.write(at + 1, target as u8);
        } else if m.is_memory_reference() {
            img.write(at + 1, rng.gen_range(DATA_START..=0xff));
        }
    }
    for addr in DATA_START..=0xff {
        img.write(addr, rng.gen());
    }
    img
}

// ---------------------------------------------------------------------------
// Random netlists.

const SAFE_GATES: [GateKind; 4] = [GateKind::And, GateKind::Or, GateKind::Xor, GateKind::Buf];
const ALL_GATES: [GateKind; 7] = [
    GateKind::And,
    GateKind::Or,
    GateKind::Xor,
    GateKind::Buf,
    GateKind::Not,
    GateKind::Nand,
    GateKind::Nor,
];

/// A random valid netlist with `gates` gates. With `feedback`, gates may read
/// from later gates through at least one register, and only gates that map
/// all-zero inputs to zero are used, so every retiming of it starts in an
/// equivalent all-zero state.
pub fn random_netlist<R: Rng>(rng: &mut R, gates: usize, feedback: bool) -> Netlist {
    let inputs = rng.gen_range(1..=2);
    let outputs = rng.gen_range(1..=2);
    let mut b = Netlist::builder();
    let ins: Vec<NodeId> = (0..inputs).map(|i| b.input(&format!("i{i}"))).collect();
    let kinds: &[GateKind] = if feedback { &SAFE_GATES } else { &ALL_GATES };
    let gs: Vec<(NodeId, GateKind)> = (0..gates)
        .map(|i| {
            let kind = *kinds.choose(rng).unwrap();
            (b.gate(&format!("g{i}"), kind, rng.gen_range(1..=3)), kind)
        })
        .collect();
    for (gi, (g, kind)) in gs.iter().enumerate() {
        for pin in 0..kind.arity() {
            let back = feedback && rng.gen_bool(0.3);
            let (src, min_w) = if back {
                (gs[rng.gen_range(gi..gates)].0, 1)
            } else {
                let pool = inputs + gi;
                let k = rng.gen_range(0..pool);
                let src = if k < inputs { ins[k] } else { gs[k - inputs].0 };
                (src, 0)
            };
            let w = min_w + if rng.gen_bool(0.35) { 1 } else { 0 };
            b.wire(src, *g, pin, w);
        }
    }
    for o in 0..outputs {
        let y = b.output(&format!("o{o}"));
        let src = if gates > 0 {
            gs[rng.gen_range(0..gates)].0
        } else {
            ins[0]
        };
        b.wire(src, y, 0, rng.gen_bool(0.25) as u32);
    }
    b.build().expect("generator builds valid netlists")
}

// ---------------------------------------------------------------------------
// Timing and retiming oracles.

/// Clock period for explicit edge weights, by memoized recursion over
/// register-free fanin.
pub fn period_with(n: &Netlist, weights: &[i64]) -> u64 {
    fn arrival(
        v: usize,
        n: &Netlist,
        weights: &[i64],
        memo: &mut Vec<Option<u64>>,
        fanin: &[Vec<usize>],
    ) -> u64 {
        if let Some(t) = memo[v] {
            return t;
        }
        let mut worst = 0;
        for &ei in &fanin[v] {
            if weights[ei] == 0 {
                let from = n.edges()[ei].from.0;
                worst = worst.max(arrival(from, n, weights, memo, fanin));
            }
        }
        let t = n.nodes()[v].delay as u64 + worst;
        memo[v] = Some(t);
        t
    }
    let mut fanin = vec![Vec::new(); n.len()];
    for (ei, e) in n.edges().iter().enumerate() {
        fanin[e.to.0].push(ei);
    }
    let mut memo = vec![None; n.len()];
    (0..n.len())
        .map(|v| arrival(v, n, weights, &mut memo, &fanin))
        .max()
        .unwrap_or(0)
}

pub fn weights_of(n: &Netlist) -> Vec<i64> {
    n.edges().iter().map(|e| e.weight as i64).collect()
}

/// Smallest period over every legal lag vector in `[-B, B]^V` with
/// `B = total registers + node count` and host lags 0.
pub fn brute_force_min_period(n: &Netlist) -> u64 {
    let bound = n.register_count() as i64 + n.len() as i64;
    let free: Vec<usize> = (0..n.len())
        .filter(|&v| !n.nodes()[v].kind.is_host())
        .collect();
    let mut lags = vec![0i64; n.len()];
    let mut assigned: Vec<bool> = n.nodes().iter().map(|v| v.kind.is_host()).collect();
    let mut best = u64::MAX;
    search(n, &free, 0, bound, &mut lags, &mut assigned, &mut best);
    best
}

fn search(
    n: &Netlist,
    free: &[usize],
    depth: usize,
    bound: i64,
    lags: &mut Vec<i64>,
    assigned: &mut Vec<bool>,
    best: &mut u64,
) {
    if depth == free.len() {
        let w: Vec<i64> = n
            .edges()
            .iter()
            .map(|e| e.weight as i64 + lags[e.to.0] - lags[e.from.0])
            .collect();
        *best = (*best).min(period_with(n, &w));
        return;
    }
    let v = free[depth];
    assigned[v] = true;
    for lag in -bound..=bound {
        lags[v] = lag;
        let legal = n.edges().iter().all(|e| {
            !(assigned[e.from.0] && assigned[e.to.0])
                || e.weight as i64 + lags[e.to.0] - lags[e.from.0] >= 0
        });
        if legal {
            search(n, free, depth + 1, bound, lags, assigned, best);
        }
    }
    lags[v] = 0;
    assigned[v] = false;
}

/// Every simple directed cycle, as edge-index lists.
pub fn simple_cycles(n: &Netlist) -> Vec<Vec<usize>> {
    let mut out = Vec::new();
    for start in 0..n.len() {
        let mut path = Vec::new();
        let mut on_path = vec![false; n.len()];
        walk_cycles(n, start, start, &mut path, &mut on_path, &mut out);
    }
    out
}

fn walk_cycles(
    n: &Netlist,
    start: usize,
    at: usize,
    path: &mut Vec<usize>,
    on_path: &mut Vec<bool>,
    out: &mut Vec<Vec<usize>>,
) {
    on_path[at] = true;
    for (ei, e) in n.edges().iter().enumerate() {
        if e.from.0 != at {
            continue;
        }
        let to = e.to.0;
        if to == start {
            path.push(ei);
            out.push(path.clone());
            path.pop();
        } else if to > start && !on_path[to] {
            path.push(ei);
            walk_cycles(n, start, to, path, on_path, out);
            path.pop();
        }
    }
    on_path[at] = false;
}

/// `max(max gate delay, max over cycles of ceil(delay / registers))`.
pub fn period_lower_bound(n: &Netlist) -> u64 {
    let max_delay = n.nodes().iter().map(|v| v.delay as u64).max().unwrap_or(0);
    let cycle_bound = simple_cycles(n)
        .iter()
        .map(|cycle| {
            let d: u64 = cycle
                .iter()
                .map(|&ei| n.nodes()[n.edges()[ei].to.0].delay as u64)
                .sum();
            let w: u64 = cycle.iter().map(|&ei| n.edges()[ei].weight as u64).sum();
            d.div_ceil(w)
        })
        .max()
        .unwrap_or(0);
    max_delay.max(cycle_bound)
}

/// A random legal retiming built from single-node lag moves that keep every
/// edge non-negative.
pub fn random_legal_lags<R: Rng>(rng: &mut R, n: &Netlist, moves: usize) -> Vec<i64> {
    let mut lags = vec![0i64; n.len()];
    let gates: Vec<usize> = (0..n.len())
        .filter(|&v| matches!(n.nodes()[v].kind, NodeKind::Gate(_)))
        .collect();
    if gates.is_empty() {
        return lags;
    }
    for _ in 0..moves {
        let v = *gates.choose(rng).unwrap();
        let step = if rng.gen_bool(0.5) { 1 } else { -1 };
        lags[v] += step;
        let legal = n
            .edges()
            .iter()
            .all(|e| e.weight as i64 + lags[e.to.0] - lags[e.from.0] >= 0);
        if !legal {
            lags[v] -= step;
        }
    }
    lags
}
