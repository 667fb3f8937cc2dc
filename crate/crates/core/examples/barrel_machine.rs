//! Runs the three benchmark programs as threads of a 3-slow barrel machine
//! in each memory mode that keeps threads apart.

use cslow::corpus::BENCHMARK;
use cslow::cslow::sequential_baseline;
use cslow::cslow::{CslowConfig, CslowMachine, MemoryMode, RunReport};
use cslow::isa::assemble_str;

fn main() {
    let images: Vec<_> = BENCHMARK
        .iter()
        .map(|(_, src)| assemble_str(src, 0).unwrap().image)
        .collect();
    let sequential = sequential_baseline(&images, 100_000).unwrap();

    for mode in [MemoryMode::Private, MemoryMode::Tagged] {
        let mut machine = CslowMachine::new(CslowConfig::new(images.len(), mode), &images).unwrap();
        let metrics = machine.run_all().unwrap();
        let report = RunReport::new(images.len(), mode, &metrics, sequential);
        println!("{}", serde_json::to_string_pretty(&report).unwrap());
        for (t, (name, _)) in BENCHMARK.iter().enumerate() {
            let changed = images[t].diff(&machine.memory_view(t)).count();
            println!(
                "  thread {t} ({name}): a={:02x}, {changed} cells changed",
                machine.contexts()[t].a
            );
        }
    }
}
