//! Pipelines the four-gate chain with k = 0..4 input registers.

use cslow::corpus::CHAIN_NET;
use cslow::netlist::Netlist;
use cslow::retime::pipeline;

fn main() {
    let chain: Netlist = CHAIN_NET.parse().unwrap();
    for k in 0..=4 {
        let p = pipeline(&chain, k).unwrap();
        let weights: Vec<_> = p.netlist.edges().iter().map(|e| e.weight).collect();
        println!(
            "k={k}: period {}, latency {}, edge weights {weights:?}",
            p.period, p.latency
        );
    }
}
