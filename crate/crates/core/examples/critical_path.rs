//! Clock period of the bundled netlists and of the chain with a register
//! placed between its second and third gate.

use cslow::corpus::{CHAIN_NET, RING_NET};
use cslow::netlist::{critical_path, Netlist};

fn show(label: &str, n: &Netlist) {
    let cp = critical_path(n);
    let names: Vec<_> = cp.path.iter().map(|v| n.node(*v).name.as_str()).collect();
    println!("{label}: period {} via {}", cp.period, names.join(" -> "));
}

fn main() {
    let chain: Netlist = CHAIN_NET.parse().unwrap();
    show("chain", &chain);
    let split = chain.with_weights(&[0, 0, 1, 0, 0]).unwrap();
    show("chain, register after g2", &split);
    let ring: Netlist = RING_NET.parse().unwrap();
    show("ring", &ring);
}
