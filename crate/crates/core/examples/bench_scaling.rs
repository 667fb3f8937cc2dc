//! Sequential cycle totals against C-slow rounds for 1, 2 and 3 threads.

use cslow::cli::bench_images;
use cslow::corpus::BENCHMARK;
use cslow::cslow::MemoryMode;
use cslow::isa::assemble_str;

fn main() {
    let images: Vec<_> = BENCHMARK
        .iter()
        .map(|(_, src)| assemble_str(src, 0).unwrap().image)
        .collect();
    let rows = bench_images(&images, &[1, 2, 3], MemoryMode::Private, 100_000).unwrap();
    println!("threads  sequential  cslow_rounds  fast_cycles  speedup");
    for r in rows {
        println!(
            "{:>7}  {:>10}  {:>12}  {:>11}  {:>7.3}",
            r.n_threads, r.sequential_sum, r.cslow_rounds, r.fast_cycles, r.speedup
        );
    }
}
