//! Checks by random simulation that C-slow, retiming and pipelining keep the
//! function of the bundled netlists.

use cslow::corpus::{CHAIN_NET, RING_NET};
use cslow::netlist::Netlist;
use cslow::retime::{
    check_equivalence, cslow_transform, min_period_retime, pipeline, EquivalenceCheck,
};

fn main() {
    let ring: Netlist = RING_NET.parse().unwrap();
    let chain: Netlist = CHAIN_NET.parse().unwrap();

    let slow = cslow_transform(&ring, 3).unwrap();
    let exact = EquivalenceCheck::new(100, 256, 0)
        .interleaved(3)
        .with_warmup(0);
    let r = check_equivalence(&ring, &slow, &exact).unwrap();
    println!(
        "ring vs 3-slow ring, from cycle 0: {} ({} samples)",
        r.verdict(),
        r.compared
    );

    let retimed = min_period_retime(&slow).netlist;
    let after_warmup = EquivalenceCheck::new(100, 256, 0).interleaved(3);
    let r = check_equivalence(&ring, &retimed, &after_warmup).unwrap();
    println!(
        "ring vs retimed 3-slow ring: {} (warmup {})",
        r.verdict(),
        r.warmup
    );

    let piped = pipeline(&chain, 2).unwrap();
    let shifted = EquivalenceCheck::new(100, 256, 0).with_latency(2);
    let r = check_equivalence(&chain, &piped.netlist, &shifted).unwrap();
    println!("chain vs 2-stage pipeline, shifted by 2: {}", r.verdict());
}
