//! Programs and netlists shipped with the crate.

/// Four unit-delay buffers in a chain, no registers. Period 4.
pub const CHAIN_NET: &str = include_str!("../fixtures/chain.net");

/// Four unit-delay gates closed into a loop by one register. Period 4.
pub const RING_NET: &str = include_str!("../fixtures/ring.net");

pub const SUM_LOOP_ASM: &str = include_str!("../fixtures/sum_loop.asm");
pub const WRAP_COUNTER_ASM: &str = include_str!("../fixtures/wrap_counter.asm");
pub const DIVIDE_ASM: &str = include_str!("../fixtures/divide.asm");
pub const CMA_HALT_ASM: &str = include_str!("../fixtures/cma_halt.asm");
pub const RUNAWAY_ASM: &str = include_str!("../fixtures/runaway.asm");

/// The benchmark programs, shortest run first. Together they use every
/// mnemonic.
pub const BENCHMARK: [(&str, &str); 3] = [
    ("sum_loop", SUM_LOOP_ASM),
    ("wrap_counter", WRAP_COUNTER_ASM),
    ("divide", DIVIDE_ASM),
];
