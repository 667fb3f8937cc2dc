//! Assembles each bundled benchmark program and runs it on the baseline core.

use cslow::corpus::BENCHMARK;
use cslow::isa::assemble_str;
use cslow::microcode::run;

fn main() {
    for (name, source) in BENCHMARK {
        let image = assemble_str(source, 0)
            .expect("bundled program assembles")
            .image;
        let outcome = run(&image, 100_000, false).expect("bundled program halts");
        println!(
            "{name}: {} cycles, {} instructions",
            outcome.cycles(),
            outcome.retired.len()
        );
        for (addr, before, after) in image.diff(&outcome.memory) {
            println!("  mem[{addr:02x}] {before:02x} -> {after:02x}");
        }
    }
}
