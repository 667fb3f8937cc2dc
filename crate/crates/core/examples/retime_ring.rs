//! C-slows the ring for C = 1..4, retimes it for minimum period, and prints
//! the area model and the chosen lags.

use cslow::corpus::RING_NET;
use cslow::netlist::{critical_path, Netlist};
use cslow::retime::{area_report, cslow_transform, min_period_retime};

fn main() {
    let ring: Netlist = RING_NET.parse().unwrap();
    for c in 1..=4 {
        let slow = cslow_transform(&ring, c).unwrap();
        let best = min_period_retime(&slow);
        println!(
            "C={c}: period {} -> {}; {}",
            critical_path(&ring).period,
            best.period,
            area_report(&ring, &best.netlist)
        );
        print!("{}", best.retiming.to_text(&slow));
    }
}
